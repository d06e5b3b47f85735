//! 2D photoacoustic tomography (PAT) forward simulation and compressed-sensing
//! reconstruction built on a multiscale convolution factorization of the wave
//! equation.
//!
//! The measured pressure traces are split by a bank of temporal filters
//! (a Gaussian low-pass plus Mexican-hat band-passes) into per-scale data.
//! Acoustic reciprocity turns each temporal filter into a radial spatial
//! filter, so every filtered data set is itself exact PAT data of a spatially
//! convolved initial pressure. The low-frequency factor is recovered by a
//! Landweber iteration, the sparse high-frequency factors by iterative soft
//! thresholding, and the factors are fused by frame synthesis followed by a
//! regularized deconvolution.
//!
//! Module map:
//! - [`grid`]: Cartesian grid, padded fields, and the scaled 2D DFT pair.
//! - [`wave`]: spectral cosine propagator, detector sampling, exact adjoint,
//!   and a dense-matrix oracle for small grids.
//! - [`filters`]: temporal/spatial filter banks, canonical duals, frame
//!   bounds, convolutions, and the radial Radon machinery.
//! - [`measure`]: compressed-sensing measurement matrices.
//! - [`solvers`]: Landweber and ISTA with power-iteration step sizing.
//! - [`recon`]: the three-step multiscale reconstruction and the single-pass
//!   l1 baseline.
//! - [`phantom`]: test phantoms, error metrics, PGM rendering.
//! - [`io`]: binary array files and CSV metrics.
//! - [`selftest`]: the property suites behind `patms selftest`.

pub mod fft;
pub mod filters;
pub mod grid;
pub mod io;
pub mod measure;
pub mod phantom;
pub mod recon;
pub mod selftest;
pub mod solvers;
pub mod wave;

use std::fmt;

/// Radius of the disk that admissible initial pressures are supported in.
pub const SUPPORT_RADIUS: f64 = 0.9;

/// Errors reported by the library.
#[derive(Debug)]
pub enum Error {
    /// Array or operator dimensions do not match.
    DimensionMismatch { context: &'static str, expected: usize, got: usize },
    /// An inverse DFT produced a non-negligible imaginary part.
    NonNegligibleImaginaryPart { ratio: f64 },
    /// Dense-matrix oracle requested for a grid above the memory guard.
    GridTooLarge { nx: usize, max: usize },
    /// Filter scale index outside the bank.
    ScaleOutOfRange { scale: usize, max: usize },
    /// Adaptive quadrature did not reach the requested tolerance.
    QuadratureNotConverged { detail: String },
    /// The frame denominator vanishes on part of the grid, so canonical
    /// duals are not defined there.
    FrameDegenerateAtFrequency { nodes: usize },
    /// Temporal filter support does not fit the recorded time axis.
    FilterSupportExceedsPadding { support: usize, nt: usize },
    /// Subsampling factor does not divide the detector count.
    NotDivisible { n: usize, factor: usize },
    /// Soft threshold called with a negative threshold.
    NegativeThreshold { value: f64 },
    /// Relative error against an identically zero ground truth.
    ZeroTruth,
    /// Phantom feature extends outside the support disk.
    FeatureOutsideSupport { detail: String },
    /// Underlying I/O failure.
    Io(std::io::Error),
    /// Malformed array file.
    Format(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { context, expected, got } => {
                write!(f, "dimension mismatch in {context}: expected {expected}, got {got}")
            }
            Error::NonNegligibleImaginaryPart { ratio } => {
                write!(f, "inverse DFT imaginary residue {ratio:.3e} exceeds tolerance")
            }
            Error::GridTooLarge { nx, max } => {
                write!(f, "grid nx={nx} too large for dense oracle (max {max})")
            }
            Error::ScaleOutOfRange { scale, max } => {
                write!(f, "filter scale {scale} out of range (bank has scales 0..={max})")
            }
            Error::QuadratureNotConverged { detail } => {
                write!(f, "quadrature did not converge: {detail}")
            }
            Error::FrameDegenerateAtFrequency { nodes } => {
                write!(f, "frame denominator degenerate at {nodes} frequency nodes")
            }
            Error::FilterSupportExceedsPadding { support, nt } => {
                write!(f, "filter support {support} samples exceeds time axis of {nt}")
            }
            Error::NotDivisible { n, factor } => {
                write!(f, "detector count {n} not divisible by subsampling factor {factor}")
            }
            Error::NegativeThreshold { value } => {
                write!(f, "soft threshold must be nonnegative, got {value}")
            }
            Error::ZeroTruth => write!(f, "ground truth field is identically zero"),
            Error::FeatureOutsideSupport { detail } => {
                write!(f, "phantom feature outside support disk: {detail}")
            }
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Format(msg) => write!(f, "malformed array file: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
