//! Rayleigh flat-fading channel draws, AWGN and SNR calibration.
//!
//! Randomness comes from [`RngStream`], a ChaCha8 generator keyed by
//! `(seed, stream_id)`. Distinct stream ids give independent sequences, so
//! any channel use can be regenerated from its index alone.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::numerics::{cholesky, hermitian, mat_mul, CMatrix, CVector, LinalgError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("antenna counts must be positive (nt = {nt}, nr = {nr})")]
    ZeroAntennas { nt: usize, nr: usize },
    #[error("nr = {nr} must be at least nt = {nt}")]
    TooFewReceivers { nt: usize, nr: usize },
    #[error("correlation coefficient {0} outside [0, 1)")]
    InvalidRho(f64),
    #[error("channel model is {found}, expected {expected}")]
    WrongModel { expected: &'static str, found: &'static str },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Deterministic random stream addressed by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// One CN(0,1) draw: independent N(0, 1/2) real and imaginary parts.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Uniform integer in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

pub fn sample_complex_gaussian(rng: &mut RngStream) -> Complex64 {
    rng.complex_gaussian()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    Iid,
    /// Exponential correlation `rho^|i-j|` at each end.
    Kronecker { rho_tx: f64, rho_rx: f64 },
}

impl Correlation {
    /// Same `rho` at both ends; `rho = 0` collapses to i.i.d.
    pub fn symmetric(rho: f64) -> Self {
        if rho == 0.0 {
            Correlation::Iid
        } else {
            Correlation::Kronecker { rho_tx: rho, rho_rx: rho }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Correlation::Iid => "iid",
            Correlation::Kronecker { .. } => "kronecker",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub nt: usize,
    pub nr: usize,
    pub correlation: Correlation,
}

impl ChannelModel {
    pub fn iid(nt: usize, nr: usize) -> Self {
        Self { nt, nr, correlation: Correlation::Iid }
    }

    pub fn kronecker(nt: usize, nr: usize, rho_tx: f64, rho_rx: f64) -> Self {
        Self {
            nt,
            nr,
            correlation: Correlation::Kronecker { rho_tx, rho_rx },
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let (nt, nr) = (self.nt, self.nr);
        if nt == 0 || nr == 0 {
            return Err(ChannelError::ZeroAntennas { nt, nr });
        }
        if nr < nt {
            return Err(ChannelError::TooFewReceivers { nt, nr });
        }
        if let Correlation::Kronecker { rho_tx, rho_rx } = self.correlation {
            for rho in [rho_tx, rho_rx] {
                check_rho(rho)?;
            }
        }
        Ok(())
    }
}

fn check_rho(rho: f64) -> Result<(), ChannelError> {
    if (0.0..1.0).contains(&rho) {
        Ok(())
    } else {
        Err(ChannelError::InvalidRho(rho))
    }
}

/// Exponential correlation matrix with entries `rho^|i-j|`.
pub fn correlation_matrix(n: usize, rho: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| Complex64::new(rho.powi(i.abs_diff(j) as i32), 0.0))
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> CMatrix {
    // row-major draw order is part of the reproducibility contract
    CMatrix::from_fn(rows, cols, |_, _| rng.complex_gaussian())
}

/// Channel sampler with the Kronecker square-root factors computed once.
#[derive(Debug, Clone)]
pub struct ChannelGenerator {
    model: ChannelModel,
    factors: Option<(CMatrix, CMatrix)>,
}

impl ChannelGenerator {
    pub fn new(model: ChannelModel) -> Result<Self, ChannelError> {
        model.validate()?;
        let factors = match model.correlation {
            Correlation::Iid => None,
            Correlation::Kronecker { rho_tx, rho_rx } => {
                let l_rx = cholesky(&correlation_matrix(model.nr, rho_rx))?;
                let l_tx_h = hermitian(&cholesky(&correlation_matrix(model.nt, rho_tx))?);
                Some((l_rx, l_tx_h))
            }
        };
        Ok(Self { model, factors })
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    /// `nr × nt` draw; `L_rx · H_w · L_txᴴ` under Kronecker correlation.
    pub fn sample(&self, rng: &mut RngStream) -> CMatrix {
        let hw = gaussian_matrix(self.model.nr, self.model.nt, rng);
        match &self.factors {
            None => hw,
            Some((l_rx, l_tx_h)) => {
                let left = mat_mul(l_rx, &hw).expect("shapes fixed at construction");
                mat_mul(&left, l_tx_h).expect("shapes fixed at construction")
            }
        }
    }
}

pub fn sample_iid_channel(model: &ChannelModel, rng: &mut RngStream) -> Result<CMatrix, ChannelError> {
    model.validate()?;
    if model.correlation != Correlation::Iid {
        return Err(ChannelError::WrongModel {
            expected: "iid",
            found: model.correlation.name(),
        });
    }
    Ok(gaussian_matrix(model.nr, model.nt, rng))
}

pub fn sample_correlated_channel(model: &ChannelModel, rng: &mut RngStream) -> Result<CMatrix, ChannelError> {
    if !matches!(model.correlation, Correlation::Kronecker { .. }) {
        return Err(ChannelError::WrongModel {
            expected: "kronecker",
            found: model.correlation.name(),
        });
    }
    Ok(ChannelGenerator::new(*model)?.sample(rng))
}

/// Complex noise variance per receive antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma2: f64,
}

impl NoiseSpec {
    pub const NOISELESS: Self = Self { sigma2: 0.0 };

    pub fn new(sigma2: f64) -> Self {
        assert!(sigma2 >= 0.0 && sigma2.is_finite(), "noise variance must be finite and nonnegative");
        Self { sigma2 }
    }
}

/// Noise variance for a given average received SNR per receive antenna.
///
/// With unit-energy symbols and CN(0,1) gains each receive antenna collects
/// `nt` units of signal power, so `sigma2 = nt / 10^(snr_db/10)`.
/// `snr_db = +inf` maps to the noiseless case.
pub fn noise_variance_for_snr(snr_db: f64, nt: usize) -> NoiseSpec {
    assert!(nt >= 1);
    if snr_db == f64::INFINITY {
        return NoiseSpec::NOISELESS;
    }
    NoiseSpec::new(nt as f64 / 10f64.powf(snr_db / 10.0))
}

pub fn add_awgn(s: &[Complex64], noise: NoiseSpec, rng: &mut RngStream) -> CVector {
    if noise.sigma2 == 0.0 {
        return s.to_vec();
    }
    let std = noise.sigma2.sqrt();
    s.iter().map(|&v| v + rng.complex_gaussian() * std).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_determinism_and_streams() {
        let a: Vec<_> = {
            let mut r = RngStream::new(7, 3);
            (0..10).map(|_| r.complex_gaussian()).collect()
        };
        let b: Vec<_> = {
            let mut r = RngStream::new(7, 3);
            (0..10).map(|_| r.complex_gaussian()).collect()
        };
        assert_eq!(a, b);
        let mut r = RngStream::new(7, 4);
        assert_ne!(a[0], r.complex_gaussian());
    }

    #[test]
    fn gaussian_moments() {
        let n = 100_000;
        let mut r = RngStream::new(1, 0);
        let draws: Vec<Complex64> = (0..n).map(|_| sample_complex_gaussian(&mut r)).collect();
        let mean = draws.iter().sum::<Complex64>() / n as f64;
        assert!(mean.norm() < 0.02, "mean {mean}");
        let power = draws.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((power - 1.0).abs() < 0.05, "power {power}");
        let re_var = draws.iter().map(|z| z.re * z.re).sum::<f64>() / n as f64;
        assert!((re_var - 0.5).abs() < 0.025, "re var {re_var}");
    }

    #[test]
    fn iid_channel_shape_and_variance() {
        let model = ChannelModel::iid(3, 5);
        let mut r = RngStream::new(2, 0);
        let h = sample_iid_channel(&model, &mut r).unwrap();
        assert_eq!(h.shape(), (5, 3));

        let draws = 10_000;
        let mut acc = vec![0.0; 15];
        for _ in 0..draws {
            let h = sample_iid_channel(&model, &mut r).unwrap();
            for (a, z) in acc.iter_mut().zip(h.as_slice()) {
                *a += z.norm_sqr();
            }
        }
        for a in acc {
            assert!((a / draws as f64 - 1.0).abs() < 0.05);
        }

        let h1 = sample_iid_channel(&model, &mut RngStream::new(9, 1)).unwrap();
        let h2 = sample_iid_channel(&model, &mut RngStream::new(9, 2)).unwrap();
        assert_ne!(h1, h2);
    }

    #[test]
    fn wrong_model_is_rejected() {
        let mut r = RngStream::new(0, 0);
        assert!(matches!(
            sample_iid_channel(&ChannelModel::kronecker(2, 2, 0.5, 0.5), &mut r),
            Err(ChannelError::WrongModel { .. })
        ));
        assert!(matches!(
            sample_correlated_channel(&ChannelModel::iid(2, 2), &mut r),
            Err(ChannelError::WrongModel { .. })
        ));
    }

    #[test]
    fn model_validation() {
        assert!(ChannelModel::iid(4, 4).validate().is_ok());
        assert_eq!(
            ChannelModel::iid(4, 2).validate(),
            Err(ChannelError::TooFewReceivers { nt: 4, nr: 2 })
        );
        assert_eq!(
            ChannelModel::kronecker(2, 2, 1.0, 0.0).validate(),
            Err(ChannelError::InvalidRho(1.0))
        );
        assert!(ChannelModel::kronecker(2, 2, -0.1, 0.0).validate().is_err());
        assert!(ChannelModel::iid(0, 2).validate().is_err());
    }

    #[test]
    fn correlation_matrix_examples() {
        let r = correlation_matrix(3, 0.7);
        let expect = CMatrix::from_real_rows(&[[1.0, 0.7, 0.49], [0.7, 1.0, 0.7], [0.49, 0.7, 1.0]]);
        assert!(r.max_abs_diff(&expect) < 1e-15);
        assert_eq!(correlation_matrix(4, 0.0), CMatrix::identity(4));
        for n in 1..=12 {
            for rho in [0.0, 0.3, 0.7, 0.95, 0.999] {
                let r = correlation_matrix(n, rho);
                assert_eq!(r, hermitian(&r));
                assert!(cholesky(&r).is_ok(), "n={n} rho={rho}");
            }
        }
    }

    #[test]
    fn zero_rho_kronecker_equals_iid() {
        let g = ChannelGenerator::new(ChannelModel::kronecker(3, 4, 0.0, 0.0)).unwrap();
        let a = g.sample(&mut RngStream::new(5, 5));
        let b = sample_iid_channel(&ChannelModel::iid(3, 4), &mut RngStream::new(5, 5)).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn kronecker_statistics() {
        let (nt, nr, rho) = (4, 4, 0.7);
        let g = ChannelGenerator::new(ChannelModel::kronecker(nt, nr, rho, rho)).unwrap();
        let draws = 10_000;
        let mut r = RngStream::new(11, 0);
        let mut corr = CMatrix::zeros(nr, nr);
        let mut power = vec![0.0; nr * nt];
        for _ in 0..draws {
            let h = g.sample(&mut r);
            for i in 0..nr {
                for j in 0..nr {
                    let s: Complex64 = (0..nt).map(|k| h[(i, k)] * h[(j, k)].conj()).sum();
                    corr[(i, j)] += s;
                }
            }
            for (p, z) in power.iter_mut().zip(h.as_slice()) {
                *p += z.norm_sqr();
            }
        }
        let scale = 1.0 / (draws * nt) as f64;
        for i in 0..nr {
            for j in 0..nr {
                let emp = corr[(i, j)] * scale;
                let want = rho.powi(i.abs_diff(j) as i32);
                assert!((emp.re - want).abs() < 0.05 && emp.im.abs() < 0.05, "({i},{j}) {emp}");
            }
        }
        for p in power {
            assert!((p / draws as f64 - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn snr_calibration_examples() {
        assert!((noise_variance_for_snr(10.0, 4).sigma2 - 0.4).abs() < 1e-15);
        assert!((noise_variance_for_snr(0.0, 1).sigma2 - 1.0).abs() < 1e-15);
        assert!((noise_variance_for_snr(20.0, 6).sigma2 - 0.06).abs() < 1e-15);
        assert_eq!(noise_variance_for_snr(f64::INFINITY, 3), NoiseSpec::NOISELESS);
    }

    #[test]
    fn awgn_variance() {
        let s = vec![Complex64::new(0.3, -0.2); 8];
        let mut r = RngStream::new(3, 0);
        assert_eq!(add_awgn(&s, NoiseSpec::NOISELESS, &mut r), s);

        let sigma2 = 0.37;
        let n = 100_000;
        let base = [Complex64::new(1.0, 1.0)];
        let (mut total, mut re, mut im) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let y = add_awgn(&base, NoiseSpec::new(sigma2), &mut r);
            let w = y[0] - base[0];
            total += w.norm_sqr();
            re += w.re * w.re;
            im += w.im * w.im;
        }
        let n = n as f64;
        assert!((total / n / sigma2 - 1.0).abs() < 0.05);
        assert!((re / n / (sigma2 / 2.0) - 1.0).abs() < 0.05);
        assert!((im / n / (sigma2 / 2.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn snr_closes_the_loop() {
        // E[‖Hx‖²/nr] / sigma2 should equal the linear SNR.
        let (nt, nr, snr_db) = (4, 6, 7.0);
        let c = crate::modem::Constellation::new(16).unwrap();
        let model = ChannelModel::iid(nt, nr);
        let mut r = RngStream::new(21, 0);
        let uses = 10_000;
        let mut acc = 0.0;
        for _ in 0..uses {
            let h = sample_iid_channel(&model, &mut r).unwrap();
            let idx: Vec<usize> = (0..nt).map(|_| r.index(c.order())).collect();
            let x = c.modulate(&idx).unwrap();
            let s = crate::numerics::mat_vec(&h, &x).unwrap();
            acc += crate::numerics::norm_sqr(&s) / nr as f64;
        }
        let measured = acc / uses as f64 / noise_variance_for_snr(snr_db, nt).sigma2;
        let want = 10f64.powf(snr_db / 10.0);
        assert!((measured / want - 1.0).abs() < 0.05, "{measured} vs {want}");
    }
}
