//! SER-versus-SNR sweep of the whole detector family, 4x4 4-QAM i.i.d. Rayleigh.
//!
//! ```bash
//! cargo run --release -p mimo-core --example ser_sweep
//! ```

use mimo_core::sim::{estimate_ser, SimulationConfig};
use mimo_core::{Algorithm, DetectorSpec, Modulation};

fn main() {
    let detectors = [
        Algorithm::Zf,
        Algorithm::Mmse,
        Algorithm::VblastZf,
        Algorithm::VblastMmse,
        Algorithm::Ml,
    ];
    let cfg = SimulationConfig {
        nt: 4,
        nr: 4,
        modulation: Modulation::QAM4,
        detectors: detectors.into_iter().map(DetectorSpec::new).collect(),
        snr_grid_db: (0..=8).map(|i| 2.5 * i as f64).collect(),
        max_channel_uses: 50_000,
        min_errors: 300,
        seed: 2,
        threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..SimulationConfig::default()
    };
    let curve = estimate_ser(&cfg).unwrap();

    print!("{:>7}", "snr_db");
    for d in detectors {
        print!("{:>13}", d.name());
    }
    println!();
    for &snr in &cfg.snr_grid_db {
        print!("{snr:>7.1}");
        for d in detectors {
            print!("{:>13.3e}", curve.point(snr, d).unwrap().ser);
        }
        println!();
    }
    if curve.resampled_draws > 0 {
        println!("({} rank-deficient draws resampled)", curve.resampled_draws);
    }
}
