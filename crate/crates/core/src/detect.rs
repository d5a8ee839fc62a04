//! MIMO hard-decision detectors for `y = Hx + w`.
//!
//! All detectors assume perfect channel knowledge and unit-energy symbols.
//! Linear detectors (ZF, MMSE) filter then slice per layer; V-BLAST adds
//! ordered successive interference cancellation; ML and the sphere decoder
//! both return the exact minimiser of `‖y − Hx‖²` with a shared tie-break.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::NoiseSpec;
use crate::modem::{Constellation, SymbolIndex};
use crate::numerics::{
    cholesky_real, gram, hermitian, inverse, mat_vec, pseudo_inverse, solve, CMatrix, LinalgError,
};

/// Default cap on the number of candidate vectors exhaustive ML may enumerate.
pub const DEFAULT_ML_GUARD: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("received vector has length {got}, channel has {expected} rows")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("channel has {nr} receive antennas for {nt} transmit antennas (need nr >= nt)")]
    TooFewReceivers { nt: usize, nr: usize },
    #[error("channel matrix is rank deficient")]
    RankDeficient,
    #[error("ML search needs {order}^{nt} = {candidates} candidates, exceeding the guard of {guard}")]
    GuardExceeded {
        order: usize,
        nt: usize,
        /// Rendered count, since `order^nt` may not fit in 64 bits.
        candidates: String,
        guard: u64,
    },
    #[error(transparent)]
    Linalg(LinalgError),
}

impl DetectError {
    pub fn is_rank_deficient(&self) -> bool {
        matches!(self, DetectError::RankDeficient)
    }
}

impl From<LinalgError> for DetectError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular { .. } | LinalgError::RankDeficient | LinalgError::NotPositiveDefinite { .. } => {
                DetectError::RankDeficient
            }
            other => DetectError::Linalg(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Zf,
    Mmse,
    Ml,
    Sphere,
    VblastZf,
    VblastMmse,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Zf,
        Algorithm::Mmse,
        Algorithm::Ml,
        Algorithm::Sphere,
        Algorithm::VblastZf,
        Algorithm::VblastMmse,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Zf => "zf",
            Algorithm::Mmse => "mmse",
            Algorithm::Ml => "ml",
            Algorithm::Sphere => "sphere",
            Algorithm::VblastZf => "vblast-zf",
            Algorithm::VblastMmse => "vblast-mmse",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown detector '{0}' (expected zf, mmse, ml, sphere, vblast-zf or vblast-mmse)")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}

/// Nulling criterion used inside V-BLAST.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Zf,
    Mmse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectorSpec {
    pub algorithm: Algorithm,
    pub ml_candidate_guard: u64,
}

impl DetectorSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ml_candidate_guard: DEFAULT_ML_GUARD,
        }
    }

    pub fn with_guard(mut self, guard: u64) -> Self {
        assert!(guard >= 1, "ML guard must be at least 1");
        self.ml_candidate_guard = guard;
        self
    }

    /// Checks whether this detector can run at the given size at all.
    pub fn check_feasible(&self, nt: usize, order: usize) -> Result<(), DetectError> {
        if self.algorithm == Algorithm::Ml {
            ml_candidate_count(nt, order, self.ml_candidate_guard)?;
        }
        Ok(())
    }

    pub fn detect(
        &self,
        y: &[Complex64],
        h: &CMatrix,
        noise: NoiseSpec,
        c: &Constellation,
    ) -> Result<DetectionResult, DetectError> {
        match self.algorithm {
            Algorithm::Zf => detect_zf(y, h, c),
            Algorithm::Mmse => detect_mmse(y, h, noise, c),
            Algorithm::Ml => detect_ml(y, h, c, self.ml_candidate_guard),
            Algorithm::Sphere => detect_sphere(y, h, c),
            Algorithm::VblastZf => detect_vblast(y, h, noise, c, Criterion::Zf),
            Algorithm::VblastMmse => detect_vblast(y, h, noise, c, Criterion::Mmse),
        }
    }
}

impl From<Algorithm> for DetectorSpec {
    fn from(a: Algorithm) -> Self {
        Self::new(a)
    }
}

/// V-BLAST detection order and the pre-slicing soft value of each layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionTrace {
    /// Transmit antenna indices (0-based) in the order they were detected.
    pub order: Vec<usize>,
    pub per_layer_soft: Vec<Complex64>,
}

/// Tree-search effort of the sphere decoder.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Partial assignments whose distance was evaluated, over all levels.
    pub nodes: u64,
    /// Complete candidate vectors reached inside the radius.
    pub leaves: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub estimate: Vec<SymbolIndex>,
    pub trace: Option<DetectionTrace>,
    pub search: Option<SearchStats>,
}

impl DetectionResult {
    fn plain(estimate: Vec<SymbolIndex>) -> Self {
        Self {
            estimate,
            trace: None,
            search: None,
        }
    }
}

fn check_dims(y: &[Complex64], h: &CMatrix) -> Result<(), DetectError> {
    if y.len() != h.rows() {
        return Err(DetectError::DimensionMismatch {
            expected: h.rows(),
            got: y.len(),
        });
    }
    if h.rows() < h.cols() {
        return Err(DetectError::TooFewReceivers {
            nt: h.cols(),
            nr: h.rows(),
        });
    }
    Ok(())
}

/// `‖y − Hx‖²` for `x = points[indices]`.
pub fn ml_metric(y: &[Complex64], h: &CMatrix, c: &Constellation, indices: &[SymbolIndex]) -> f64 {
    MetricTable::new(h, c).metric(y, indices)
}

/// Precomputed `h_j · p_k` products so ML and the sphere decoder evaluate
/// `‖y − Hx‖²` with bit-identical arithmetic.
struct MetricTable {
    nr: usize,
    order: usize,
    prods: Vec<Complex64>,
}

impl MetricTable {
    fn new(h: &CMatrix, c: &Constellation) -> Self {
        let (nr, nt, order) = (h.rows(), h.cols(), c.order());
        let mut prods = Vec::with_capacity(nt * order * nr);
        for j in 0..nt {
            for p in c.points() {
                for i in 0..nr {
                    prods.push(h[(i, j)] * p);
                }
            }
        }
        Self { nr, order, prods }
    }

    #[inline]
    fn metric(&self, y: &[Complex64], idx: &[SymbolIndex]) -> f64 {
        let mut total = 0.0;
        for (i, &yi) in y.iter().enumerate() {
            let mut r = yi;
            for (j, &k) in idx.iter().enumerate() {
                r -= self.prods[(j * self.order + k) * self.nr + i];
            }
            total += r.norm_sqr();
        }
        total
    }
}

pub fn detect_zf(y: &[Complex64], h: &CMatrix, c: &Constellation) -> Result<DetectionResult, DetectError> {
    check_dims(y, h)?;
    let g = pseudo_inverse(h)?;
    let soft = mat_vec(&g, y)?;
    Ok(DetectionResult::plain(soft.into_iter().map(|z| c.slice(z)).collect()))
}

pub fn detect_mmse(
    y: &[Complex64],
    h: &CMatrix,
    noise: NoiseSpec,
    c: &Constellation,
) -> Result<DetectionResult, DetectError> {
    check_dims(y, h)?;
    if noise.sigma2 == 0.0 {
        return detect_zf(y, h, c);
    }
    let mut a = gram(h);
    for i in 0..a.rows() {
        a[(i, i)] += noise.sigma2;
    }
    let rhs = mat_vec(&hermitian(h), y)?;
    let soft = solve(&a, &rhs)?;
    Ok(DetectionResult::plain(soft.into_iter().map(|z| c.slice(z)).collect()))
}

/// Number of ML candidates, or a guard error if it exceeds `guard`.
fn ml_candidate_count(nt: usize, order: usize, guard: u64) -> Result<u64, DetectError> {
    let exceeded = |candidates: String| DetectError::GuardExceeded {
        order,
        nt,
        candidates,
        guard,
    };
    match u32::try_from(nt).ok().and_then(|e| (order as u64).checked_pow(e)) {
        Some(n) if n <= guard => Ok(n),
        Some(n) => Err(exceeded(n.to_string())),
        None => Err(exceeded(format!("{:.3e}", (order as f64).powi(nt as i32)))),
    }
}

/// Exhaustive search over all `M^nt` candidates in odometer order (last
/// antenna fastest); a candidate replaces the incumbent only if strictly
/// better, so ties resolve to the lexicographically smallest index vector.
pub fn detect_ml(
    y: &[Complex64],
    h: &CMatrix,
    c: &Constellation,
    guard: u64,
) -> Result<DetectionResult, DetectError> {
    if y.len() != h.rows() {
        return Err(DetectError::DimensionMismatch {
            expected: h.rows(),
            got: y.len(),
        });
    }
    let nt = h.cols();
    let order = c.order();
    ml_candidate_count(nt, order, guard)?;

    let table = MetricTable::new(h, c);
    let mut idx = vec![0usize; nt];
    let mut best = idx.clone();
    let mut best_metric = f64::INFINITY;
    'outer: loop {
        let m = table.metric(y, &idx);
        if m < best_metric {
            best_metric = m;
            best.copy_from_slice(&idx);
        }
        for d in (0..nt).rev() {
            idx[d] += 1;
            if idx[d] < order {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    Ok(DetectionResult::plain(best))
}

/// Exact ML by depth-first Schnorr–Euchner enumeration.
///
/// The complex model is unfolded into `2·nt` real dimensions, ordered
/// `[Re x₀, Im x₀, Re x₁, …]`, and `‖y − Hx‖²` is rewritten as
/// `‖R(s − ŝ)‖² + ρ₀` with `RᵀR` the real Gram matrix and `ŝ` the
/// unconstrained least-squares solution. The search starts with an infinite
/// radius and shrinks it at each leaf. Leaves are scored with the same
/// metric routine as [`detect_ml`] and compared with the same tie-break, so
/// both detectors return the same index vector.
pub fn detect_sphere(y: &[Complex64], h: &CMatrix, c: &Constellation) -> Result<DetectionResult, DetectError> {
    check_dims(y, h)?;
    let (nr, nt) = h.shape();
    let n = 2 * nt;

    // real-valued channel and observation
    let mut hr = vec![0.0; 2 * nr * n];
    let mut yr = vec![0.0; 2 * nr];
    for i in 0..nr {
        yr[2 * i] = y[i].re;
        yr[2 * i + 1] = y[i].im;
        for j in 0..nt {
            let z = h[(i, j)];
            hr[(2 * i) * n + 2 * j] = z.re;
            hr[(2 * i) * n + 2 * j + 1] = -z.im;
            hr[(2 * i + 1) * n + 2 * j] = z.im;
            hr[(2 * i + 1) * n + 2 * j + 1] = z.re;
        }
    }
    let mut g = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for row in 0..2 * nr {
        let hrow = &hr[row * n..(row + 1) * n];
        for a in 0..n {
            b[a] += hrow[a] * yr[row];
            for bcol in 0..n {
                g[a * n + bcol] += hrow[a] * hrow[bcol];
            }
        }
    }
    let l = cholesky_real(&g, n)?;
    // ŝ = G⁻¹b via forward/back substitution with L and Lᵀ
    let mut t = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * t[k]).sum();
        t[i] = (b[i] - s) / l[i * n + i];
    }
    let mut center = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[k * n + i] * center[k]).sum();
        center[i] = (t[i] - s) / l[i * n + i];
    }
    // R = Lᵀ, so R[k][j] = l[j][k]
    let r = |k: usize, j: usize| l[j * n + k];
    let rho0 = yr.iter().map(|v| v * v).sum::<f64>() - b.iter().zip(&center).map(|(u, v)| u * v).sum::<f64>();

    let levels = c.axis_levels();
    let mut search = SphereSearch {
        n,
        levels,
        center: &center,
        r: &r,
        rho0,
        table: MetricTable::new(h, c),
        y,
        c,
        s_level: vec![0; n],
        idx: vec![0; nt],
        best: vec![0; nt],
        best_metric: f64::INFINITY,
        stats: SearchStats::default(),
    };
    search.descend(n, 0.0);
    // the first descent runs with an infinite radius and always reaches a leaf
    debug_assert!(search.best_metric.is_finite());
    let stats = search.stats;
    Ok(DetectionResult {
        estimate: search.best,
        trace: None,
        search: Some(stats),
    })
}

struct SphereSearch<'a, R: Fn(usize, usize) -> f64> {
    n: usize,
    levels: &'a [f64],
    center: &'a [f64],
    r: &'a R,
    rho0: f64,
    table: MetricTable,
    y: &'a [Complex64],
    c: &'a Constellation,
    /// Chosen PAM level index per real dimension.
    s_level: Vec<usize>,
    idx: Vec<SymbolIndex>,
    best: Vec<SymbolIndex>,
    best_metric: f64,
    stats: SearchStats,
}

impl<R: Fn(usize, usize) -> f64> SphereSearch<'_, R> {
    /// Largest partial distance that may still contain a metric ≤ the incumbent.
    fn bound(&self) -> f64 {
        let radius = self.best_metric - self.rho0;
        radius + 1e-9 * (self.best_metric.abs() + self.rho0.abs()) + 1e-12
    }

    /// Assigns dimension `level - 1` given dimensions `level..n` are fixed.
    fn descend(&mut self, level: usize, partial: f64) {
        if level == 0 {
            self.leaf();
            return;
        }
        let k = level - 1;
        let rkk = (self.r)(k, k);
        let mut offset = 0.0;
        for j in level..self.n {
            offset += (self.r)(k, j) * (self.levels[self.s_level[j]] - self.center[j]);
        }
        let target = self.center[k] - offset / rkk;

        // Schnorr–Euchner: children in increasing distance from the target
        let mut order: Vec<(f64, usize)> = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let d = rkk * (v - target);
                (d * d, i)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        for (inc, i) in order {
            self.stats.nodes += 1;
            let pd = partial + inc;
            if pd > self.bound() {
                break;
            }
            self.s_level[k] = i;
            self.descend(k, pd);
        }
    }

    fn leaf(&mut self) {
        self.stats.leaves += 1;
        for (j, slot) in self.idx.iter_mut().enumerate() {
            *slot = self.c.index_of_levels(self.s_level[2 * j], self.s_level[2 * j + 1]);
        }
        let m = self.table.metric(self.y, &self.idx);
        if m < self.best_metric || (m == self.best_metric && self.idx < self.best) {
            self.best_metric = m;
            self.best.copy_from_slice(&self.idx);
        }
    }
}

/// Ordered successive interference cancellation.
///
/// Each stage recomputes the nulling filter for the undetected layers,
/// detects the layer with the smallest post-filter noise enhancement
/// (smallest pseudoinverse row norm for ZF, smallest error-covariance
/// diagonal for MMSE; lowest antenna index on ties), slices it and subtracts
/// its contribution from the residual.
pub fn detect_vblast(
    y: &[Complex64],
    h: &CMatrix,
    noise: NoiseSpec,
    c: &Constellation,
    criterion: Criterion,
) -> Result<DetectionResult, DetectError> {
    check_dims(y, h)?;
    let nt = h.cols();
    let mut active: Vec<usize> = (0..nt).collect();
    let mut residual = y.to_vec();
    let mut estimate = vec![0; nt];
    let mut order = Vec::with_capacity(nt);
    let mut soft = Vec::with_capacity(nt);

    while !active.is_empty() {
        let ha = h.select_columns(&active);
        let (pos, filter) = match criterion {
            Criterion::Zf => {
                let g = pseudo_inverse(&ha)?;
                let pos = argmin((0..active.len()).map(|i| g.row(i).iter().map(|z| z.norm_sqr()).sum()));
                (pos, g.row(pos).to_vec())
            }
            Criterion::Mmse => {
                let mut a = gram(&ha);
                for i in 0..a.rows() {
                    a[(i, i)] += noise.sigma2;
                }
                let p = inverse(&a)?;
                let pos = argmin((0..active.len()).map(|i| p[(i, i)].re));
                // row `pos` of P·H_Aᴴ
                let filter = (0..ha.rows())
                    .map(|r| (0..ha.cols()).map(|l| p[(pos, l)] * ha[(r, l)].conj()).sum())
                    .collect();
                (pos, filter)
            }
        };
        let k = active[pos];
        let z: Complex64 = filter.iter().zip(&residual).map(|(g, r)| g * r).sum();
        let sym = c.slice(z);
        estimate[k] = sym;
        let x = c.point(sym);
        for (i, r) in residual.iter_mut().enumerate() {
            *r -= h[(i, k)] * x;
        }
        active.remove(pos);
        order.push(k);
        soft.push(z);
    }

    Ok(DetectionResult {
        estimate,
        trace: Some(DetectionTrace {
            order,
            per_layer_soft: soft,
        }),
        search: None,
    })
}

/// First index of the minimum value.
fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::INFINITY;
    for (i, v) in values.enumerate() {
        if v < best_v {
            best_v = v;
            best = i;
        }
    }
    best
}
