//! Single-antenna 4-QAM over a frozen unit channel against the closed form
//! `SER = 2Q(√γ) − Q(√γ)²`.
//!
//! ```bash
//! cargo run --release -p mimo-core --example siso_awgn
//! ```

use mimo_core::channel::noise_variance_for_snr;
use mimo_core::sim::{estimate_ser, FrozenChannel, SimulationConfig};
use mimo_core::{Algorithm, DetectorSpec, Modulation};
use statrs::distribution::{ContinuousCDF, Normal};

fn main() {
    let cfg = SimulationConfig {
        nt: 1,
        nr: 1,
        modulation: Modulation::QAM4,
        detectors: vec![DetectorSpec::new(Algorithm::Zf)],
        snr_grid_db: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
        max_channel_uses: 200_000,
        min_errors: 0,
        freeze_h: Some(FrozenChannel::Identity),
        ..SimulationConfig::default()
    };
    let curve = estimate_ser(&cfg).unwrap();
    let normal = Normal::standard();
    println!("{:>7} {:>12} {:>12} {:>8}", "snr_db", "measured", "analytic", "z");
    for p in &curve.points {
        let gamma = 1.0 / noise_variance_for_snr(p.snr_db, 1).sigma2;
        let q = 1.0 - normal.cdf(gamma.sqrt());
        let want = 2.0 * q - q * q;
        let se = (want * (1.0 - want) / p.symbols as f64).sqrt();
        println!("{:>7.1} {:>12.5e} {:>12.5e} {:>8.2}", p.snr_db, p.ser, want, (p.ser - want) / se);
    }
}
