//! Companion-model graph signal processing.
//!
//! The library builds, for a directed or undirected graph shift `A` with
//! distinct eigenvalues, the canonical companion model: companion shift,
//! companion graph, Vandermonde GFT, and the spectral companion
//! counterparts. Signals can be moved among four representations (vertex
//! `s`, spectrum `s_hat`, vertex impulse `p`, spectral impulse `q`),
//! convolved mod the characteristic polynomial via FFT, multiplexed with
//! spectral-frequency-vector carriers, and decimated.

pub mod companion;
pub mod fftpoly;
pub mod graph_model;
pub mod graphs;
pub mod interp;
pub mod io;
pub mod model;
pub mod modulation;
pub mod sampling;

pub use companion::CompanionModel;
pub use fftpoly::{ConvMethod, Poly};
pub use graph_model::{CharPoly, GraphSignal, Rep, ShiftGraph, SpectralDecomposition};
pub use interp::BarycentricTable;
pub use model::{Model, ModelId};
pub use modulation::MultiplexPlan;
pub use sampling::{BandFlavor, Decimation, DecimationPlan};

use std::sync::atomic::{AtomicU64, Ordering};

pub type C64 = num_complex::Complex<f64>;

/// Numerical tolerances. Defaults target desk-scale graphs (N up to ~50)
/// with well separated spectra; every field can be overridden.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub eig_tol: f64,
    /// Scaled by max |lambda| before use.
    pub distinct_tol: f64,
    pub charpoly_tol: f64,
    pub conv_tol: f64,
    /// Scaled by sigma_max before use.
    pub rank_tol: f64,
    /// Scaled by cond(V) before use.
    pub comp_tol: f64,
    /// Relative q-tail energy allowed for a signal to count as bandlimited.
    pub band_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig_tol: 1e-8,
            distinct_tol: 1e-6,
            charpoly_tol: 1e-6,
            conv_tol: 1e-7,
            rank_tol: 1e-8,
            comp_tol: 1e-6,
            band_tol: 1e-8,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigenvalue gap {gap:.3e} below distinctness tolerance {tol:.3e}")]
    RepeatedEigenvalues { gap: f64, tol: f64 },
    #[error("eigensolver failed: {0}")]
    EigensolverFailure(String),
    #[error("numerical invariant violated: {0}")]
    NumericalInvariant(String),
    #[error("index {index} out of range for size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("signal belongs to a different model")]
    ModelMismatch,
    #[error("modulus polynomial is not monic")]
    NonMonicModulus,
    #[error("singular block for this vertex selection (cond > 1/{rank_tol:.3e})")]
    SingularBlock { rank_tol: f64 },
    #[error("signal not bandlimited: q-tail leakage {leakage:.3e} exceeds {tol:.3e}")]
    BandLeakage { leakage: f64, tol: f64 },
    #[error("multiplex plan invalid: {0}")]
    InvalidPlan(String),
    #[error("interpolation failed: {0}")]
    InterpolationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_model_id() -> u64 {
    NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed)
}
