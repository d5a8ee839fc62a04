//! Antenna correlation (rho = 0.7 at both ends) against i.i.d. fading, 4x4 4-QAM.
//!
//! ```bash
//! cargo run --release -p mimo-core --example correlated_fading
//! ```

use mimo_core::sim::{estimate_ser, SimulationConfig};
use mimo_core::{Algorithm, DetectorSpec, Modulation};

fn main() {
    let detectors = [Algorithm::Zf, Algorithm::Mmse, Algorithm::VblastZf, Algorithm::VblastMmse];
    let base = SimulationConfig {
        nt: 4,
        nr: 4,
        modulation: Modulation::QAM4,
        detectors: detectors.into_iter().map(DetectorSpec::new).collect(),
        snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
        max_channel_uses: 40_000,
        min_errors: 300,
        seed: 7,
        ..SimulationConfig::default()
    };
    let iid = estimate_ser(&base).unwrap();
    let corr = estimate_ser(&SimulationConfig { rho: 0.7, ..base.clone() }).unwrap();

    println!("{:>7} {:>12} {:>12} {:>12}", "snr_db", "detector", "iid", "rho=0.7");
    for &snr in &base.snr_grid_db {
        for d in detectors {
            println!(
                "{snr:>7.1} {:>12} {:>12.3e} {:>12.3e}",
                d.name(),
                iid.point(snr, d).unwrap().ser,
                corr.point(snr, d).unwrap().ser
            );
        }
    }
}
