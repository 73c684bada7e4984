//! Lifted prior `G(φ)` and the correlation weight `λ`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::TangentSpace;
use crate::error::{Error, Result};
use crate::hankel::{lift, HankelShape};
use crate::linalg::{frobenius, inner, SortedSvd};
use crate::scalar::{CMatrix, Real};
use crate::signal::ComplexSignal;

/// Relative singular-value cutoff used whenever a numerical rank is needed.
pub fn default_rank_tol<T: Real>() -> T {
    let floor = T::machine_eps() * T::lit(1000.0);
    let tol = T::lit(1e-10);
    if tol > floor {
        tol
    } else {
        floor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorConstruction {
    SignOfLift,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorLift<T: Real> {
    pub g: CMatrix<T>,
    pub lambda: T,
    pub construction: PriorConstruction,
}

impl<T: Real> PriorLift<T> {
    /// No prior: the correlation term vanishes.
    pub fn zero(shape: &HankelShape) -> Self {
        Self { g: CMatrix::zeros(shape.rows(), shape.cols()), lambda: T::zero(), construction: PriorConstruction::Zero }
    }

    pub fn is_zero(&self) -> bool {
        self.construction == PriorConstruction::Zero
    }

    /// `λ·G`.
    pub fn weighted(&self) -> CMatrix<T> {
        self.g.scale(self.lambda)
    }
}

/// `sgn(X) = Ũ Ṽ^H` over singular values above `rank_tol · σ_max`.
pub fn sign_matrix<T: Real>(x: &CMatrix<T>, rank_tol: T) -> Result<CMatrix<T>> {
    let svd = SortedSvd::new(x);
    let rank = svd.rank(rank_tol);
    if rank == 0 {
        return Err(Error::ZeroMatrix);
    }
    let (u, _, v) = svd.truncate(rank);
    Ok(u * v.adjoint())
}

/// `G = U_(r) V_(r)^H` from the rank-`r` truncated SVD of `H(φ)`.
///
/// Directions with singular value below the default rank tolerance are
/// dropped, so `G` always has singular values in `{0, 1}`. An all-zero `φ`
/// yields the zero prior.
pub fn build_prior_lift<T: Real>(
    phi: &ComplexSignal<T>,
    shape: &HankelShape,
    lambda: T,
    rank: usize,
) -> Result<PriorLift<T>> {
    let max = shape.rows().min(shape.cols());
    if rank == 0 || rank > max {
        return Err(Error::RankTooLarge { rank, max });
    }
    let h = lift(phi, shape)?;
    let svd = SortedSvd::new(&h);
    let keep = svd.rank(default_rank_tol()).min(rank);
    if keep == 0 {
        let mut zero = PriorLift::zero(shape);
        zero.lambda = lambda;
        return Ok(zero);
    }
    let (u, _, v) = svd.truncate(keep);
    Ok(PriorLift { g: u * v.adjoint(), lambda, construction: PriorConstruction::SignOfLift })
}

/// `λ* = Re⟨P_T(sgn[H(x)]), G⟩ / ‖P_T(G)‖_F²`, the weight minimising `‖F₀‖_F`.
pub fn optimal_lambda<T: Real>(x: &ComplexSignal<T>, g: &CMatrix<T>, shape: &HankelShape) -> Result<T> {
    let h = lift(x, shape)?;
    let tangent = TangentSpace::from_matrix(&h, default_rank_tol())?;
    optimal_lambda_in(&tangent, g)
}

pub(crate) fn optimal_lambda_in<T: Real>(tangent: &TangentSpace<T>, g: &CMatrix<T>) -> Result<T> {
    let pt_g = tangent.project(g);
    let denom = frobenius(&pt_g);
    if denom <= T::machine_eps() * T::lit(100.0) * frobenius(g).max(T::one()) {
        return Err(Error::DegeneratePrior);
    }
    let pt_sign = tangent.sign();
    Ok(inner(&pt_sign, g).re / (denom * denom))
}
