//! Gray-coded square QAM: normalisation, labels and hard slicing.
//!
//! ```bash
//! cargo run -p mimo-core --example constellations
//! ```

use mimo_core::modem::{Constellation, Modulation};
use num_complex::Complex64;

fn main() {
    for name in ["qpsk", "4qam", "16qam", "64qam"] {
        let m: Modulation = name.parse().unwrap();
        let c = m.constellation().unwrap();
        println!(
            "{name:>6}: M = {:2}, {} bits/symbol, mean energy = {:.15}, d_min = {:.6}",
            c.order(),
            c.bits_per_symbol(),
            c.mean_energy(),
            c.min_distance()
        );
    }

    let c = Constellation::new(16).unwrap();
    println!("\n16-QAM map (Q axis up, labels I-bits|Q-bits):");
    for q in (0..c.side()).rev() {
        let row: Vec<String> = (0..c.side())
            .map(|i| {
                let k = c.index_of_levels(i, q);
                format!("{:04b}", c.label(k))
            })
            .collect();
        println!("  {}", row.join("  "));
    }

    let noisy = Complex64::new(0.35, -0.9);
    let k = c.slice(noisy);
    println!(
        "\nslice({noisy:.2}) -> index {k}, point {:.4}, bits {:?}",
        c.point(k),
        c.demodulate(&[k]).unwrap()
    );
}
