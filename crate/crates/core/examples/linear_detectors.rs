//! Zero-forcing and MMSE detection of one 4x4 16-QAM channel use.
//!
//! ```bash
//! cargo run -p mimo-core --example linear_detectors
//! ```

use mimo_core::channel::{add_awgn, noise_variance_for_snr, ChannelGenerator, ChannelModel, RngStream};
use mimo_core::detect::{detect_mmse, detect_zf};
use mimo_core::numerics::{mat_mul, mat_vec, pseudo_inverse};
use mimo_core::Constellation;

fn main() {
    let (nt, nr) = (4, 4);
    let c = Constellation::new(16).unwrap();
    let mut rng = RngStream::new(2024, 0);
    let h = ChannelGenerator::new(ChannelModel::iid(nt, nr)).unwrap().sample(&mut rng);
    println!("H = {h:?}");

    let g = pseudo_inverse(&h).unwrap();
    println!("max |H+ H - I| = {:.2e}", mat_mul(&g, &h).unwrap().max_abs_diff(&mimo_core::CMatrix::identity(nt)));

    let x: Vec<usize> = (0..nt).map(|_| rng.index(c.order())).collect();
    let s = mat_vec(&h, &c.modulate(&x).unwrap()).unwrap();
    for snr_db in [5.0, 15.0, 25.0, f64::INFINITY] {
        let noise = noise_variance_for_snr(snr_db, nt);
        let y = add_awgn(&s, noise, &mut rng.clone());
        let zf = detect_zf(&y, &h, &c).unwrap().estimate;
        let mmse = detect_mmse(&y, &h, noise, &c).unwrap().estimate;
        println!("snr {snr_db:>4} dB  sent {x:?}  zf {zf:?}  mmse {mmse:?}");
    }
}
