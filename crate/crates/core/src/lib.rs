//! Recovery of spectrally sparse signals from random time-domain samples by
//! low-rank Hankel matrix completion, with an optional prior signal whose
//! lifted subspaces are rewarded through a correlation term.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the bottom of this file fix it to `f64` for everyday use.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod hankel;
pub mod linalg;
pub mod prior;
pub mod rng;
pub mod scalar;
pub mod signal;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
pub use hankel::{HankelShape, Variant};
pub use scalar::{CMatrix, Complex, Real};
pub use signal::{draw_samples, make_prior, mask, RandomModel, SampleSet, SamplingLaw};

pub type Signal = signal::ComplexSignal<f64>;
pub type Signal32 = signal::ComplexSignal<f32>;
pub type Model = signal::SpectralModel<f64>;
pub type Model32 = signal::SpectralModel<f32>;
pub type LiftedMatrix = CMatrix<f64>;
pub type LiftedMatrix32 = CMatrix<f32>;
pub type Prior = prior::PriorLift<f64>;
pub type Prior32 = prior::PriorLift<f32>;
pub type Recovery = solvers::RecoveryResult<f64>;
pub type Recovery32 = solvers::RecoveryResult<f32>;
pub type Estimate = spectral::FrequencyEstimate<f64>;
pub type Estimate32 = spectral::FrequencyEstimate<f32>;
pub type Tangent = diagnostics::TangentSpace<f64>;
pub type Tangent32 = diagnostics::TangentSpace<f32>;
