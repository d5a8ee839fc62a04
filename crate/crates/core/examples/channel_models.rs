//! I.i.d. and Kronecker-correlated Rayleigh channels, AWGN and the SNR convention.
//!
//! ```bash
//! cargo run -p mimo-core --example channel_models
//! ```

use mimo_core::channel::{add_awgn, correlation_matrix, noise_variance_for_snr, ChannelGenerator, ChannelModel, RngStream};
use mimo_core::numerics::{mat_vec, norm_sqr};
use mimo_core::Constellation;
use num_complex::Complex64;

fn main() {
    let (nt, nr) = (4, 4);
    println!("exponential correlation, n = 4, rho = 0.7:\n{:?}\n", correlation_matrix(4, 0.7));

    for rho in [0.0, 0.7] {
        let model = if rho == 0.0 {
            ChannelModel::iid(nt, nr)
        } else {
            ChannelModel::kronecker(nt, nr, rho, rho)
        };
        let gen = ChannelGenerator::new(model).unwrap();
        let mut rng = RngStream::new(1, 0);
        let draws = 20_000;
        let mut adjacent = Complex64::new(0.0, 0.0);
        let mut power = 0.0;
        for _ in 0..draws {
            let h = gen.sample(&mut rng);
            adjacent += (0..nt).map(|k| h[(0, k)] * h[(1, k)].conj()).sum::<Complex64>();
            power += norm_sqr(h.as_slice());
        }
        println!(
            "rho = {rho}: mean |h_ij|^2 = {:.4}, receive correlation of antennas 1,2 = {:.4}",
            power / (draws * nt * nr) as f64,
            (adjacent / (draws * nt) as f64).re
        );
    }

    // SNR per receive antenna: sigma2 = nt / 10^(snr/10)
    let c = Constellation::new(4).unwrap();
    let gen = ChannelGenerator::new(ChannelModel::iid(nt, nr)).unwrap();
    let snr_db = 10.0;
    let noise = noise_variance_for_snr(snr_db, nt);
    let mut rng = RngStream::new(2, 0);
    let (mut signal, mut noise_power) = (0.0, 0.0);
    for _ in 0..20_000 {
        let h = gen.sample(&mut rng);
        let x: Vec<usize> = (0..nt).map(|_| rng.index(4)).collect();
        let s = mat_vec(&h, &c.modulate(&x).unwrap()).unwrap();
        let y = add_awgn(&s, noise, &mut rng);
        signal += norm_sqr(&s);
        noise_power += y.iter().zip(&s).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    }
    println!(
        "\ntarget SNR {snr_db} dB (sigma2 = {}), measured {:.3} dB",
        noise.sigma2,
        10.0 * (signal / noise_power).log10()
    );
}
