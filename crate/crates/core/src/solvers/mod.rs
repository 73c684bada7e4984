//! Recovery engines.
//!
//! All engines solve, in one form or another,
//!
//! ```text
//! minimise  ‖H(z)‖_* − λ·Re⟨G, H(z)⟩   subject to   P_Ω(z) = P_Ω(x)
//! ```
//!
//! where `⟨X, Y⟩ = vec(Y)^H vec(X)`. The weight on the correlation term is
//! the same `λ` that appears in the factor updates of [`admm`] and in the
//! certificate residual `F₀ = P_T(sgn[H(x)] − λG)`.

pub mod admm;
pub mod convex;
pub mod lmafit;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;
use crate::signal::{ComplexSignal, SignalJson};

pub use admm::{admm_recover, init_factors, recover_with_prior, AdmmConfig, AdmmState, InitBranch, Initialization};
pub use convex::{convex_recover, convex_objective, ConvexConfig, NoisyConstraint};
pub use lmafit::lmafit_init;

/// Output of any solver.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult<T: Real> {
    pub z: ComplexSignal<T>,
    pub iters: usize,
    /// `‖H(z_k) − X_k‖_F` per iteration, where `X_k` is the low-rank iterate.
    pub primal_residuals: Vec<f64>,
    /// Augmented Lagrangian (factorised solver) or objective at the
    /// thresholded iterate (convex solver), per iteration.
    pub objective_history: Vec<f64>,
    pub converged: bool,
    pub wall_time: f64,
}

impl<T: Real> RecoveryResult<T> {
    pub fn to_json(&self) -> RecoveryResultJson {
        RecoveryResultJson {
            z: self.z.to_json(),
            iters: self.iters,
            primal_residuals: self.primal_residuals.clone(),
            objective_history: self.objective_history.clone(),
            converged: self.converged,
            wall_time: self.wall_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResultJson {
    pub z: SignalJson,
    pub iters: usize,
    pub primal_residuals: Vec<f64>,
    pub objective_history: Vec<f64>,
    pub converged: bool,
    pub wall_time: f64,
}
