//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use mimo_core::channel::{add_awgn, noise_variance_for_snr, ChannelGenerator, ChannelModel, NoiseSpec, RngStream};
use mimo_core::cli;
use mimo_core::detect::{detect_ml, detect_sphere, ml_metric, Algorithm, DetectError, DetectorSpec, DEFAULT_ML_GUARD};
use mimo_core::modem::{Constellation, Modulation};
use mimo_core::numerics::{mat_vec, CMatrix};
use mimo_core::sim::{estimate_ser, run_channel_use, FrozenChannel, SerCurve, SerPoint, SimError, SimulationConfig};
use num_complex::Complex64;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

/// `a ≤ b` up to `k` combined standard errors.
fn not_worse(a: &SerPoint, b: &SerPoint, k: f64) -> bool {
    a.ser <= b.ser + k * (a.standard_error().powi(2) + b.standard_error().powi(2)).sqrt()
}

fn specs(algs: &[Algorithm]) -> Vec<DetectorSpec> {
    algs.iter().copied().map(DetectorSpec::new).collect()
}

fn run(cfg: &SimulationConfig) -> Result<SerCurve, String> {
    estimate_ser(cfg).map_err(|e| e.to_string())
}

fn criterion_1_ranking() -> Outcome {
    let order = [Algorithm::Ml, Algorithm::VblastMmse, Algorithm::VblastZf, Algorithm::Mmse, Algorithm::Zf];
    let cfg = SimulationConfig {
        nt: 4,
        nr: 4,
        modulation: Modulation::QAM4,
        detectors: specs(&order),
        snr_grid_db: vec![12.0],
        max_channel_uses: 200_000,
        min_errors: 0,
        seed: 2012,
        ..SimulationConfig::default()
    };
    let curve = run(&cfg)?;
    let pts: Vec<&SerPoint> = order.iter().map(|&a| curve.point(12.0, a).unwrap()).collect();
    let summary = pts
        .iter()
        .map(|p| format!("{}={:.4e}", p.detector, p.ser))
        .collect::<Vec<_>>()
        .join(" ");
    for w in pts.windows(2) {
        if !not_worse(w[0], w[1], 3.0) {
            return Err(format!("{} worse than {}: {summary}", w[0].detector, w[1].detector));
        }
    }
    Ok(summary)
}

fn criterion_2_sphere_equals_ml() -> Outcome {
    let mut total = 0u64;
    let mut nodes = 0u64;
    for (nt, m) in [(2, 4), (3, 4), (4, 4), (2, 16), (3, 16)] {
        let c = Constellation::new(m).unwrap();
        let gen = ChannelGenerator::new(ChannelModel::iid(nt, nt)).unwrap();
        for i in 0..10_000u64 {
            let mut rng = RngStream::new(0xACCE, ((nt * 100 + m) as u64) << 32 | i);
            let snr_db = 20.0 * rng.index(1_000_001) as f64 / 1e6;
            let h = gen.sample(&mut rng);
            let x: Vec<usize> = (0..nt).map(|_| rng.index(m)).collect();
            let s = mat_vec(&h, &c.modulate(&x).unwrap()).unwrap();
            let y = add_awgn(&s, noise_variance_for_snr(snr_db, nt), &mut rng);
            let ml = detect_ml(&y, &h, &c, DEFAULT_ML_GUARD).map_err(|e| e.to_string())?;
            let sd = detect_sphere(&y, &h, &c).map_err(|e| e.to_string())?;
            let (m_ml, m_sd) = (ml_metric(&y, &h, &c, &ml.estimate), ml_metric(&y, &h, &c, &sd.estimate));
            if m_ml != m_sd || ml.estimate != sd.estimate {
                return Err(format!("nt={nt} M={m} instance {i}: metric {m_ml} vs {m_sd}"));
            }
            nodes += sd.search.unwrap().nodes;
            total += 1;
        }
    }
    Ok(format!("{total} instances identical, mean sphere nodes {:.1}", nodes as f64 / total as f64))
}

fn criterion_3_noiseless() -> Outcome {
    let cfg = SimulationConfig {
        nt: 4,
        nr: 4,
        modulation: Modulation::QAM4,
        detectors: specs(&Algorithm::ALL),
        ..SimulationConfig::default()
    };
    let gen = ChannelGenerator::new(cfg.channel_model()).unwrap();
    let mut used = 0;
    let mut u = 0u64;
    while used < 1000 {
        // skip ill-conditioned draws so the check is about the detectors, not rounding
        let h = gen.sample(&mut RngStream::new(cfg.seed, u << 8));
        if condition_estimate(&h) < 1e4 {
            let out = run_channel_use(&cfg, f64::INFINITY, u).map_err(|e| e.to_string())?;
            if out.errors.iter().any(|&e| e != 0) {
                return Err(format!("use {u}: errors {:?}", out.errors));
            }
            used += 1;
        }
        u += 1;
    }
    Ok(format!("{used} noiseless instances x {} detectors, zero errors", cfg.detectors.len()))
}

/// ‖H‖_F · ‖H⁺‖_F, an upper bound on the 2-norm condition number.
fn condition_estimate(h: &CMatrix) -> f64 {
    let fro = |m: &CMatrix| m.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    match mimo_core::numerics::pseudo_inverse(h) {
        Ok(p) => fro(h) * fro(&p),
        Err(_) => f64::INFINITY,
    }
}

/// Gaussian tail probability by composite Simpson quadrature of the density
/// over [x, x + 40].
fn q_function(x: f64) -> f64 {
    let n = 200_000;
    let (a, b) = (x, x + 40.0);
    let h = (b - a) / n as f64;
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * PI).sqrt();
    let mut s = pdf(a) + pdf(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * pdf(a + i as f64 * h);
    }
    s * h / 3.0
}

fn criterion_4_siso_anchor() -> Outcome {
    // values of 2Q(√γ) − Q(√γ)² computed offline with scipy.stats.norm.sf
    let frozen = [(0.0, 0.29213901826285904), (4.0, 0.10979888437897187), (8.0, 0.011972720144284655)];
    let cfg = SimulationConfig {
        nt: 1,
        nr: 1,
        modulation: Modulation::QAM4,
        detectors: specs(&[Algorithm::Zf]),
        snr_grid_db: frozen.iter().map(|f| f.0).collect(),
        max_channel_uses: 1_000_000,
        min_errors: 0,
        freeze_h: Some(FrozenChannel::Identity),
        seed: 4,
        ..SimulationConfig::default()
    };
    let curve = run(&cfg)?;
    let mut parts = Vec::new();
    for (snr_db, want_frozen) in frozen {
        let gamma = 1.0 / noise_variance_for_snr(snr_db, 1).sigma2;
        let q = q_function(gamma.sqrt());
        let want = 2.0 * q - q * q;
        if (want - want_frozen).abs() > 1e-9 {
            return Err(format!("quadrature oracle {want} disagrees with frozen {want_frozen}"));
        }
        let p = curve.point(snr_db, Algorithm::Zf).unwrap();
        let se = (want * (1.0 - want) / p.symbols as f64).sqrt();
        let z = (p.ser - want) / se;
        if z.abs() > 3.0 {
            return Err(format!("{snr_db} dB: measured {} vs analytic {want} ({z:.2} SE)", p.ser));
        }
        parts.push(format!("{snr_db}dB {:.5}/{:.5} ({z:+.2} SE)", p.ser, want));
    }
    Ok(parts.join(", "))
}

fn criterion_5_correlation() -> Outcome {
    let base = SimulationConfig {
        nt: 4,
        nr: 4,
        modulation: Modulation::QAM4,
        detectors: specs(&[Algorithm::Zf]),
        snr_grid_db: vec![12.0],
        max_channel_uses: 200_000,
        min_errors: 0,
        seed: 77,
        ..SimulationConfig::default()
    };
    let iid = run(&base)?;
    let corr = run(&SimulationConfig { rho: 0.7, ..base })?;
    let (a, b) = (&iid.points[0], &corr.points[0]);
    if !not_worse(a, b, 3.0) {
        return Err(format!("rho=0.7 SER {} below iid SER {}", b.ser, a.ser));
    }
    Ok(format!("zf iid {:.4e} <= rho=0.7 {:.4e}", a.ser, b.ser))
}

fn criterion_6_paper_configs() -> Outcome {
    let algs = [Algorithm::Zf, Algorithm::Mmse, Algorithm::VblastZf, Algorithm::VblastMmse];
    let mut parts = Vec::new();
    for modulation in [Modulation::QAM16, Modulation::QAM64] {
        let cfg = SimulationConfig {
            nt: 6,
            nr: 12,
            modulation,
            detectors: specs(&algs),
            snr_grid_db: (0..=5).map(|i| 4.0 * i as f64).collect(),
            max_channel_uses: 50_000,
            min_errors: 0,
            seed: 612,
            ..SimulationConfig::default()
        };
        let curve = run(&cfg)?;
        for a in algs {
            let s = curve.series(a);
            for w in s.windows(2) {
                if w[1].ci95_lo > w[0].ci95_hi {
                    return Err(format!("{modulation} {a}: SER rises from {} to {} dB", w[0].snr_db, w[1].snr_db));
                }
            }
        }
        let at0: Vec<String> = algs
            .iter()
            .map(|&a| format!("{a}={:.3e}", curve.point(0.0, a).unwrap().ser))
            .collect();
        parts.push(format!("{modulation} @0dB {}", at0.join(" ")));
    }

    let cfg = SimulationConfig {
        nt: 6,
        nr: 12,
        modulation: Modulation::QAM64,
        detectors: specs(&[Algorithm::Ml]),
        ..SimulationConfig::default()
    };
    match estimate_ser(&cfg) {
        Err(SimError::Detect(DetectError::GuardExceeded { .. })) => {}
        other => return Err(format!("ML at 64-QAM nt=6 not refused: {other:?}")),
    }
    let c = Constellation::new(64).unwrap();
    let h = CMatrix::identity(6);
    match detect_ml(&[Complex64::new(0.0, 0.0); 6], &h, &c, DEFAULT_ML_GUARD) {
        Err(DetectError::GuardExceeded { .. }) => {}
        other => return Err(format!("detect_ml not refused: {other:?}")),
    }
    parts.push("ml refused at 64^6".into());
    Ok(parts.join("; "))
}

fn criterion_7_statistics() -> Outcome {
    for m in [4, 16, 64] {
        let e = Constellation::new(m).unwrap().mean_energy();
        if (e - 1.0).abs() > 1e-12 {
            return Err(format!("M={m} mean energy {e}"));
        }
    }

    let (n, rho, draws) = (4, 0.7, 10_000);
    let gen = ChannelGenerator::new(ChannelModel::kronecker(n, n, rho, rho)).unwrap();
    let mut rng = RngStream::new(7, 0);
    let mut acc = vec![Complex64::new(0.0, 0.0); n * n];
    for _ in 0..draws {
        let h = gen.sample(&mut rng);
        for i in 0..n {
            for j in 0..n {
                acc[i * n + j] += (0..n).map(|k| h[(i, k)] * h[(j, k)].conj()).sum::<Complex64>();
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let emp = acc[i * n + j] / (draws * n) as f64;
            worst = worst.max((emp - Complex64::new(rho.powi(i.abs_diff(j) as i32), 0.0)).norm());
        }
    }
    if worst > 0.05 {
        return Err(format!("receive correlation off by {worst}"));
    }

    let sigma2 = 0.25;
    let samples = 100_000;
    let zeros = vec![Complex64::new(0.0, 0.0); 10];
    let mut power = 0.0;
    let mut rng = RngStream::new(8, 0);
    for _ in 0..samples / zeros.len() {
        power += add_awgn(&zeros, NoiseSpec::new(sigma2), &mut rng)
            .iter()
            .map(|w| w.norm_sqr())
            .sum::<f64>();
    }
    let ratio = power / samples as f64 / sigma2;
    if (ratio - 1.0).abs() > 0.05 {
        return Err(format!("noise variance ratio {ratio}"));
    }
    Ok(format!("energy exact, corr max err {worst:.4}, noise ratio {ratio:.4}"))
}

fn criterion_8_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let path = dir.path().join(format!("t{threads}.csv"));
        let args = [
            "mimo-sim", "--nt", "4", "--nr", "4", "--mod", "4qam", "--detectors", "zf,mmse,ml,sphere,vblast-zf,vblast-mmse",
            "--snr-db", "0:12:4", "--trials", "6000", "--min-errors", "100", "--seed", "8", "--threads", threads, "--out",
            path.to_str().unwrap(),
        ];
        let mut stdout = Vec::new();
        let mut stderr = Vec::new();
        let code = cli::run(args, &mut stdout, &mut stderr);
        if code != 0 {
            return Err(String::from_utf8_lossy(&stderr).into_owned());
        }
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    if outputs[0] != outputs[1] {
        return Err("CSV differs between 1 and 8 threads".into());
    }
    Ok(format!("{} identical bytes", outputs[0].len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("1 detector ranking at 12 dB", criterion_1_ranking),
        ("2 sphere decoder equals ML", criterion_2_sphere_equals_ml),
        ("3 noiseless exactness", criterion_3_noiseless),
        ("4 analytic SISO anchor", criterion_4_siso_anchor),
        ("5 correlation degrades ZF", criterion_5_correlation),
        ("6 6x12 16/64-QAM sweeps", criterion_6_paper_configs),
        ("7 constellation and channel statistics", criterion_7_statistics),
        ("8 thread-count determinism", criterion_8_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
