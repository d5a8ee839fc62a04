//! Sphere decoding returns the exhaustive-ML answer while visiting far fewer nodes.
//!
//! ```bash
//! cargo run --release -p mimo-core --example sphere_vs_ml
//! ```

use mimo_core::channel::{add_awgn, noise_variance_for_snr, ChannelGenerator, ChannelModel, RngStream};
use mimo_core::detect::{detect_ml, detect_sphere, DEFAULT_ML_GUARD};
use mimo_core::numerics::mat_vec;
use mimo_core::Constellation;

fn main() {
    let (nt, order) = (3, 16);
    let c = Constellation::new(order).unwrap();
    let gen = ChannelGenerator::new(ChannelModel::iid(nt, nt)).unwrap();
    let exhaustive = (order as u64).pow(nt as u32);
    println!("nt = {nt}, {order}-QAM: exhaustive ML scores {exhaustive} candidates\n");
    println!("{:>8} {:>12} {:>12} {:>10}", "snr_db", "mean nodes", "mean leaves", "agree");

    for snr_db in [0.0, 5.0, 10.0, 15.0, 20.0, 25.0] {
        let trials = 500;
        let (mut nodes, mut leaves, mut agree) = (0u64, 0u64, 0);
        for t in 0..trials {
            let mut rng = RngStream::new(3, t);
            let h = gen.sample(&mut rng);
            let x: Vec<usize> = (0..nt).map(|_| rng.index(order)).collect();
            let y = add_awgn(
                &mat_vec(&h, &c.modulate(&x).unwrap()).unwrap(),
                noise_variance_for_snr(snr_db, nt),
                &mut rng,
            );
            let ml = detect_ml(&y, &h, &c, DEFAULT_ML_GUARD).unwrap();
            let sd = detect_sphere(&y, &h, &c).unwrap();
            let stats = sd.search.unwrap();
            nodes += stats.nodes;
            leaves += stats.leaves;
            agree += (ml.estimate == sd.estimate) as u32;
        }
        println!(
            "{snr_db:>8} {:>12.1} {:>12.2} {:>7}/{trials}",
            nodes as f64 / trials as f64,
            leaves as f64 / trials as f64,
            agree
        );
    }
}
