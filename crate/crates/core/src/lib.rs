//! Local multifractal analysis on the unit interval.
//!
//! The crate is organised around [`DyadicFamily`]: a nonnegative quantity
//! attached to every dyadic interval of a scale range. Families are built from
//! binned measures, sampled signals, wavelet pyramids or Birkhoff sums
//! ([`builders`], [`wavelet`]), and analysed globally or on shrinking windows
//! ([`estimators`]). The [`synth`] module generates the reference models whose
//! local spectra are known in closed form.

pub mod builders;
pub mod dyadic;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod io;
pub mod numeric;
pub mod profile;
pub mod synth;
pub mod wavelet;

pub use builders::{BinnedMeasure, DigitPotential};
pub use dyadic::{DyadicCube, DyadicFamily, ExponentEstimate, ExponentMethod, Window};
pub use error::{Error, Result};
pub use estimators::{
    FitPolicy, FitRange, LegendreSpectrum, LocalProfile, ScalingFunction, StructureFunction,
};
pub use exec::Exec;
pub use profile::Profile;
pub use wavelet::{Filter, WaveletPyramid};

/// Spatial dimension. Every pipeline in this crate is one-dimensional.
pub const DIM: u32 = 1;
