//! V-BLAST ordered successive interference cancellation with its audit trace.
//!
//! ```bash
//! cargo run -p mimo-core --example vblast_trace
//! ```

use mimo_core::channel::{add_awgn, noise_variance_for_snr, ChannelGenerator, ChannelModel, RngStream};
use mimo_core::detect::{detect_vblast, Criterion};
use mimo_core::numerics::mat_vec;
use mimo_core::{CMatrix, Constellation, NoiseSpec};

fn main() {
    let c = Constellation::new(4).unwrap();

    // layer 2 is three times stronger, so it is detected first
    let h = CMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 3.0]]);
    let y = mat_vec(&h, &c.modulate(&[1, 2]).unwrap()).unwrap();
    let res = detect_vblast(&y, &h, NoiseSpec::NOISELESS, &c, Criterion::Zf).unwrap();
    println!("diagonal channel: order {:?}, estimate {:?}", res.trace.unwrap().order, res.estimate);

    let (nt, nr) = (4, 6);
    let mut rng = RngStream::new(5, 0);
    let h = ChannelGenerator::new(ChannelModel::iid(nt, nr)).unwrap().sample(&mut rng);
    let x: Vec<usize> = (0..nt).map(|_| rng.index(4)).collect();
    let noise = noise_variance_for_snr(8.0, nt);
    let y = add_awgn(&mat_vec(&h, &c.modulate(&x).unwrap()).unwrap(), noise, &mut rng);
    println!("\nsent {x:?}");
    for crit in [Criterion::Zf, Criterion::Mmse] {
        let res = detect_vblast(&y, &h, noise, &c, crit).unwrap();
        let trace = res.trace.unwrap();
        println!("{crit:?}: estimate {:?}", res.estimate);
        for (k, z) in trace.order.iter().zip(&trace.per_layer_soft) {
            println!("    antenna {k}: soft {z:.3} -> symbol {}", c.slice(*z));
        }
    }
}
