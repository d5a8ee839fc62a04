//! MIMO symbol detection and Monte Carlo symbol-error-rate simulation.
//!
//! The crate models a flat-fading link `y = Hx + w` with `nt` transmit and
//! `nr ≥ nt` receive antennas and provides:
//!
//! - [`numerics`]: the small dense complex linear algebra the detectors need
//! - [`modem`]: Gray-coded 4/16/64-QAM constellations and slicing
//! - [`channel`]: i.i.d. and Kronecker-correlated Rayleigh channels, AWGN,
//!   SNR calibration and reproducible random streams
//! - [`detect`]: ZF, MMSE, exhaustive ML, sphere decoding and V-BLAST
//!   (ZF and MMSE ordering)
//! - [`sim`]: the Monte Carlo engine producing SER curves with Wilson intervals
//! - [`cli`]: argument/config parsing and CSV output behind the `mimo-sim` binary
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod channel;
pub mod cli;
pub mod detect;
pub mod modem;
pub mod numerics;
pub mod sim;

pub use channel::{ChannelGenerator, ChannelModel, Correlation, NoiseSpec, RngStream};
pub use detect::{Algorithm, Criterion, DetectError, DetectionResult, DetectionTrace, DetectorSpec};
pub use modem::{Constellation, Modulation, SymbolIndex};
pub use numerics::{CMatrix, CVector, LinalgError};
pub use sim::{SerCurve, SerPoint, SimError, SimulationConfig};
