//! Six transmit and twelve receive antennas with 16- and 64-QAM, where
//! exhaustive ML is out of reach and refused by its candidate guard.
//!
//! ```bash
//! cargo run --release -p mimo-core --example large_array
//! ```

use mimo_core::sim::{estimate_ser, SimulationConfig};
use mimo_core::{Algorithm, DetectorSpec, Modulation};

fn main() {
    let detectors = [Algorithm::Zf, Algorithm::Mmse, Algorithm::VblastZf, Algorithm::VblastMmse];
    for modulation in [Modulation::QAM16, Modulation::QAM64] {
        let cfg = SimulationConfig {
            nt: 6,
            nr: 12,
            modulation,
            detectors: detectors.into_iter().map(DetectorSpec::new).collect(),
            snr_grid_db: (0..=5).map(|i| 4.0 * i as f64).collect(),
            max_channel_uses: 10_000,
            min_errors: 200,
            seed: 612,
            ..SimulationConfig::default()
        };
        let curve = estimate_ser(&cfg).unwrap();
        println!("\n6x12 {modulation}");
        for &snr in &cfg.snr_grid_db {
            let row: Vec<String> = detectors
                .iter()
                .map(|&d| format!("{}={:.3e}", d.name(), curve.point(snr, d).unwrap().ser))
                .collect();
            println!("  {snr:>4} dB  {}", row.join("  "));
        }
    }

    let ml = SimulationConfig {
        nt: 6,
        nr: 12,
        modulation: Modulation::QAM64,
        detectors: vec![DetectorSpec::new(Algorithm::Ml)],
        ..SimulationConfig::default()
    };
    match estimate_ser(&ml) {
        Err(e) => println!("\nml at 6x12 64-QAM: {e}"),
        Ok(_) => unreachable!("guard should refuse 64^6 candidates"),
    }
}
