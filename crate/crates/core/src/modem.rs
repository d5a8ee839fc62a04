//! Gray-coded square QAM constellations, mapping and hard-decision slicing.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

/// Index into a constellation's point list.
pub type SymbolIndex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModemError {
    #[error("unsupported constellation order {0} (expected 4, 16 or 64)")]
    UnsupportedOrder(usize),
    #[error("symbol index {index} out of range for {order}-point constellation")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("unknown modulation '{0}' (expected 4qam, qpsk, 16qam or 64qam)")]
    UnknownModulation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    SquareQam,
    /// QPSK named separately; the point set is the 4-QAM grid.
    QpskAlias,
}

/// Modulation as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modulation {
    pub order: usize,
    pub kind: ConstellationKind,
}

impl Modulation {
    pub const QAM4: Self = Self { order: 4, kind: ConstellationKind::SquareQam };
    pub const QPSK: Self = Self { order: 4, kind: ConstellationKind::QpskAlias };
    pub const QAM16: Self = Self { order: 16, kind: ConstellationKind::SquareQam };
    pub const QAM64: Self = Self { order: 64, kind: ConstellationKind::SquareQam };

    pub fn constellation(&self) -> Result<Constellation, ModemError> {
        let mut c = Constellation::new(self.order)?;
        c.kind = self.kind;
        Ok(c)
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConstellationKind::QpskAlias => write!(f, "qpsk"),
            ConstellationKind::SquareQam => write!(f, "{}qam", self.order),
        }
    }
}

impl FromStr for Modulation {
    type Err = ModemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "4qam" => Ok(Self::QAM4),
            "qpsk" => Ok(Self::QPSK),
            "16qam" => Ok(Self::QAM16),
            "64qam" => Ok(Self::QAM64),
            _ => Err(ModemError::UnknownModulation(s.to_string())),
        }
    }
}

#[inline]
fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Square M-QAM constellation with unit average energy.
///
/// Point `k = i·√M + q` sits at in-phase level `i` and quadrature level `q`
/// (levels counted from the most negative coordinate). Its label is the
/// Gray code of `i` followed by the Gray code of `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    kind: ConstellationKind,
    points: Vec<Complex64>,
    labels: Vec<u32>,
    /// Per-axis amplitude levels, ascending.
    levels: Vec<f64>,
}

impl Constellation {
    pub fn new(order: usize) -> Result<Self, ModemError> {
        let side: usize = match order {
            4 => 2,
            16 => 4,
            64 => 8,
            other => return Err(ModemError::UnsupportedOrder(other)),
        };
        // mean energy of the odd-integer grid: 2·(side² − 1)/3
        let energy = 2.0 * ((side * side - 1) as f64) / 3.0;
        let scale = energy.sqrt().recip();
        let levels: Vec<f64> = (0..side)
            .map(|i| (2.0 * i as f64 - (side as f64 - 1.0)) * scale)
            .collect();
        let half_bits = side.trailing_zeros();
        let mut points = Vec::with_capacity(order);
        let mut labels = Vec::with_capacity(order);
        for i in 0..side {
            for q in 0..side {
                points.push(Complex64::new(levels[i], levels[q]));
                labels.push(((gray(i) << half_bits) | gray(q)) as u32);
            }
        }
        Ok(Self {
            order,
            kind: ConstellationKind::SquareQam,
            points,
            labels,
            levels,
        })
    }

    pub fn qpsk() -> Self {
        Modulation::QPSK.constellation().expect("qpsk is supported")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, k: SymbolIndex) -> Complex64 {
        self.points[k]
    }

    /// Gray label of point `k`, as an integer with `bits_per_symbol` significant bits.
    pub fn label(&self, k: SymbolIndex) -> u32 {
        self.labels[k]
    }

    /// Label of point `k` as bits, most significant first.
    pub fn label_bits(&self, k: SymbolIndex) -> Vec<u8> {
        let m = self.bits_per_symbol();
        (0..m).rev().map(|b| ((self.labels[k] >> b) & 1) as u8).collect()
    }

    /// Per-axis amplitude levels (the PAM alphabet), ascending.
    pub fn axis_levels(&self) -> &[f64] {
        &self.levels
    }

    /// Points per axis.
    pub fn side(&self) -> usize {
        self.levels.len()
    }

    /// Index of the point at in-phase level `i`, quadrature level `q`.
    #[inline]
    pub fn index_of_levels(&self, i: usize, q: usize) -> SymbolIndex {
        i * self.side() + q
    }

    /// Smallest distance between two distinct points.
    pub fn min_distance(&self) -> f64 {
        self.levels[1] - self.levels[0]
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// Nearest point by exhaustive scan; ties go to the smallest index.
    pub fn slice(&self, z: Complex64) -> SymbolIndex {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }

    pub fn modulate(&self, indices: &[SymbolIndex]) -> Result<Vec<Complex64>, ModemError> {
        indices
            .iter()
            .map(|&k| {
                self.points.get(k).copied().ok_or(ModemError::IndexOutOfRange {
                    index: k,
                    order: self.order,
                })
            })
            .collect()
    }

    /// Concatenated bit labels, most significant bit first per symbol.
    pub fn demodulate(&self, indices: &[SymbolIndex]) -> Result<Vec<u8>, ModemError> {
        let mut bits = Vec::with_capacity(indices.len() * self.bits_per_symbol());
        for &k in indices {
            if k >= self.order {
                return Err(ModemError::IndexOutOfRange { index: k, order: self.order });
            }
            bits.extend(self.label_bits(k));
        }
        Ok(bits)
    }
}

/// Free-function form of [`Constellation::new`].
pub fn build_constellation(order: usize) -> Result<Constellation, ModemError> {
    Constellation::new(order)
}

pub fn modulate(indices: &[SymbolIndex], c: &Constellation) -> Result<Vec<Complex64>, ModemError> {
    c.modulate(indices)
}

pub fn slice(z: Complex64, c: &Constellation) -> SymbolIndex {
    c.slice(z)
}

pub fn demodulate(indices: &[SymbolIndex], c: &Constellation) -> Result<Vec<u8>, ModemError> {
    c.demodulate(indices)
}
