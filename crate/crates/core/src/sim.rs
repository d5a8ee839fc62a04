//! Monte Carlo symbol-error-rate estimation.
//!
//! Every channel use is a pure function of `(seed, use_index)`: the symbol
//! draw, channel matrix and noise all come from the stream
//! `RngStream::new(seed, use_index << 8 | attempt)`. All configured detectors
//! see the same `(x, H, y)` triple. Uses are processed in fixed-size
//! batches; the early-stop rule is only checked between batches, so results
//! do not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{
    add_awgn, noise_variance_for_snr, ChannelError, ChannelGenerator, ChannelModel, Correlation, NoiseSpec, RngStream,
};
use crate::detect::{Algorithm, DetectError, DetectorSpec};
use crate::modem::{Constellation, ModemError, Modulation};
use crate::numerics::{mat_vec, CMatrix};

pub const DEFAULT_BATCH_SIZE: u64 = 1024;
pub const DEFAULT_MIN_ERRORS: u64 = 200;
/// Redraws allowed per channel use before a rank-deficient stream is an error.
const MAX_ATTEMPTS: u64 = 256;
/// Quantile for the reported 95% intervals.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid {key}: {message}")]
    InvalidConfig { key: &'static str, message: String },
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error("channel use {use_index}: {attempts} consecutive rank-deficient channel draws")]
    Degenerate { use_index: u64, attempts: u64 },
    #[error("could not start worker threads: {0}")]
    ThreadPool(String),
}

fn invalid(key: &'static str, message: impl Into<String>) -> SimError {
    SimError::InvalidConfig {
        key,
        message: message.into(),
    }
}

/// Deterministic channel override, used for analytic SISO checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrozenChannel {
    /// `H` fixed to the `nr × nt` identity.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub nt: usize,
    pub nr: usize,
    pub modulation: Modulation,
    pub detectors: Vec<DetectorSpec>,
    /// Strictly increasing; `+inf` means noiseless.
    pub snr_grid_db: Vec<f64>,
    /// Exponential correlation coefficient at both ends; 0 is i.i.d.
    pub rho: f64,
    pub max_channel_uses: u64,
    /// Stop a point once every detector has this many errors; 0 disables early stopping.
    pub min_errors: u64,
    pub seed: u64,
    pub threads: usize,
    pub freeze_h: Option<FrozenChannel>,
    pub batch_size: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            nt: 4,
            nr: 4,
            modulation: Modulation::QAM4,
            detectors: [Algorithm::Zf, Algorithm::Mmse, Algorithm::VblastZf, Algorithm::VblastMmse, Algorithm::Ml]
                .into_iter()
                .map(DetectorSpec::new)
                .collect(),
            snr_grid_db: (0..=10).map(|i| 2.0 * i as f64).collect(),
            rho: 0.0,
            max_channel_uses: 100_000,
            min_errors: DEFAULT_MIN_ERRORS,
            seed: 1,
            threads: 1,
            freeze_h: None,
            batch_size: DEFAULT_BATCH_SIZE,
        }
    }
}

impl SimulationConfig {
    pub fn channel_model(&self) -> ChannelModel {
        ChannelModel {
            nt: self.nt,
            nr: self.nr,
            correlation: Correlation::symmetric(self.rho),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.nt == 0 {
            return Err(invalid("nt", "must be at least 1"));
        }
        if self.nr == 0 {
            return Err(invalid("nr", "must be at least 1"));
        }
        if self.nr < self.nt {
            return Err(invalid(
                "nr",
                format!("nr = {} is smaller than nt = {}; need nr >= nt", self.nr, self.nt),
            ));
        }
        if self.detectors.is_empty() {
            return Err(invalid("detectors", "at least one detector is required"));
        }
        for (i, d) in self.detectors.iter().enumerate() {
            if self.detectors[..i].iter().any(|e| e.algorithm == d.algorithm) {
                return Err(invalid("detectors", format!("'{}' listed twice", d.algorithm)));
            }
            if d.ml_candidate_guard == 0 {
                return Err(invalid("detectors", "ML guard must be at least 1"));
            }
        }
        if let Some(bad) = self.snr_grid_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return Err(invalid("snr-db", format!("{bad} is not a usable SNR")));
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("snr-db", "grid must be strictly increasing"));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(invalid("rho", format!("{} is outside [0, 1)", self.rho)));
        }
        if self.max_channel_uses == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.max_channel_uses >= 1 << 56 {
            return Err(invalid("trials", "must be below 2^56"));
        }
        if self.threads == 0 {
            return Err(invalid("threads", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch", "must be at least 1"));
        }
        if self.freeze_h.is_some() && self.rho != 0.0 {
            return Err(invalid("freeze-h", "a frozen channel cannot be combined with rho > 0"));
        }
        for d in &self.detectors {
            d.check_feasible(self.nt, self.modulation.order)?;
        }
        Ok(())
    }
}

/// Per-detector symbol error counts from one channel use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelUseOutcome {
    /// Wrong scalar symbols, one entry per configured detector (0..=nt).
    pub errors: Vec<u32>,
    /// Rank-deficient channel draws discarded before this use succeeded.
    pub resampled: u32,
}

/// Everything a channel use needs that does not change between uses.
struct Link<'a> {
    cfg: &'a SimulationConfig,
    constellation: Constellation,
    generator: ChannelGenerator,
}

impl<'a> Link<'a> {
    fn new(cfg: &'a SimulationConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            constellation: cfg.modulation.constellation()?,
            generator: ChannelGenerator::new(cfg.channel_model())?,
        })
    }

    fn draw_channel(&self, rng: &mut RngStream) -> CMatrix {
        match self.cfg.freeze_h {
            Some(FrozenChannel::Identity) => {
                CMatrix::from_fn(self.cfg.nr, self.cfg.nt, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
            }
            None => self.generator.sample(rng),
        }
    }

    fn run(&self, noise: NoiseSpec, use_index: u64) -> Result<ChannelUseOutcome, SimError> {
        let cfg = self.cfg;
        'attempt: for attempt in 0..MAX_ATTEMPTS {
            let mut rng = RngStream::new(cfg.seed, (use_index << 8) | attempt);
            let h = self.draw_channel(&mut rng);
            let x: Vec<usize> = (0..cfg.nt).map(|_| rng.index(self.constellation.order())).collect();
            let s = mat_vec(&h, &self.constellation.modulate(&x)?).expect("channel shape matches nt");
            let y = add_awgn(&s, noise, &mut rng);

            let mut errors = Vec::with_capacity(cfg.detectors.len());
            for d in &cfg.detectors {
                match d.detect(&y, &h, noise, &self.constellation) {
                    Ok(res) => {
                        errors.push(res.estimate.iter().zip(&x).filter(|(a, b)| a != b).count() as u32);
                    }
                    Err(e) if e.is_rank_deficient() => continue 'attempt,
                    Err(e) => return Err(e.into()),
                }
            }
            return Ok(ChannelUseOutcome {
                errors,
                resampled: attempt as u32,
            });
        }
        Err(SimError::Degenerate {
            use_index,
            attempts: MAX_ATTEMPTS,
        })
    }
}

/// Runs one channel use at `snr_db` and counts symbol errors per detector.
pub fn run_channel_use(cfg: &SimulationConfig, snr_db: f64, use_index: u64) -> Result<ChannelUseOutcome, SimError> {
    Link::new(cfg)?.run(noise_variance_for_snr(snr_db, cfg.nt), use_index)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerPoint {
    pub snr_db: f64,
    pub detector: Algorithm,
    pub channel_uses: u64,
    pub symbol_errors: u64,
    /// `symbol_errors / (nt · channel_uses)`.
    pub ser: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    /// Scalar symbol decisions behind `ser`.
    pub symbols: u64,
}

impl SerPoint {
    /// Binomial standard error of `ser`.
    pub fn standard_error(&self) -> f64 {
        (self.ser * (1.0 - self.ser) / self.symbols as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerCurve {
    pub config: SimulationConfig,
    /// SNR-major, detectors in configuration order.
    pub points: Vec<SerPoint>,
    /// Channel draws discarded as rank deficient, over the whole run.
    pub resampled_draws: u64,
}

impl SerCurve {
    pub fn point(&self, snr_db: f64, detector: Algorithm) -> Option<&SerPoint> {
        self.points
            .iter()
            .find(|p| p.snr_db == snr_db && p.detector == detector)
    }

    /// Points of one detector in SNR order.
    pub fn series(&self, detector: Algorithm) -> Vec<&SerPoint> {
        self.points.iter().filter(|p| p.detector == detector).collect()
    }
}

/// Wilson score interval for `errors` successes out of `n` trials.
pub fn wilson_interval(errors: u64, n: u64, z: f64) -> (f64, f64) {
    assert!(n >= 1 && errors <= n, "need 0 <= errors <= n and n >= 1");
    let nf = n as f64;
    let p = errors as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0).min(p) };
    let hi = if errors == n { 1.0 } else { (center + half).min(1.0).max(p) };
    (lo, hi)
}

/// Sweeps the SNR grid and returns one [`SerPoint`] per (SNR, detector).
pub fn estimate_ser(cfg: &SimulationConfig) -> Result<SerCurve, SimError> {
    let link = Link::new(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| SimError::ThreadPool(e.to_string()))?;

    let nd = cfg.detectors.len();
    let mut points = Vec::with_capacity(cfg.snr_grid_db.len() * nd);
    let mut resampled_draws = 0u64;

    for &snr_db in &cfg.snr_grid_db {
        let noise = noise_variance_for_snr(snr_db, cfg.nt);
        let mut errors = vec![0u64; nd];
        let mut uses = 0u64;
        while uses < cfg.max_channel_uses {
            let n = cfg.batch_size.min(cfg.max_channel_uses - uses);
            let batch: Vec<Result<ChannelUseOutcome, SimError>> = if cfg.threads == 1 {
                (uses..uses + n).map(|u| link.run(noise, u)).collect()
            } else {
                pool.install(|| (uses..uses + n).into_par_iter().map(|u| link.run(noise, u)).collect())
            };
            for outcome in batch {
                let outcome = outcome?;
                for (acc, e) in errors.iter_mut().zip(&outcome.errors) {
                    *acc += *e as u64;
                }
                resampled_draws += outcome.resampled as u64;
            }
            uses += n;
            if cfg.min_errors > 0 && errors.iter().all(|&e| e >= cfg.min_errors) {
                break;
            }
        }

        let symbols = uses * cfg.nt as u64;
        for (d, &e) in cfg.detectors.iter().zip(&errors) {
            let (lo, hi) = wilson_interval(e, symbols, Z_95);
            points.push(SerPoint {
                snr_db,
                detector: d.algorithm,
                channel_uses: uses,
                symbol_errors: e,
                ser: e as f64 / symbols as f64,
                ci95_lo: lo,
                ci95_hi: hi,
                symbols,
            });
        }
    }

    Ok(SerCurve {
        config: cfg.clone(),
        points,
        resampled_draws,
    })
}
