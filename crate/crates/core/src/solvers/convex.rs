//! Reference solver for the convex program, via ADMM with singular value
//! thresholding.
//!
//! Splitting `X = H(z)` with scaled dual `Y`:
//!
//! ```text
//! X ← SVT_{1/ρ}(H(z) − Y + (λ/ρ)G)
//! z ← argmin_{z ∈ C} ‖H(z) − X − Y‖_F²
//! Y ← Y + X − H(z)
//! ```
//!
//! `C` is either the affine set `P_Ω(z) = P_Ω(x)` or the ball
//! `‖P_Ω(z − y)‖_F ≤ δ`. Because `H^*H` is diagonal with the anti-diagonal
//! weights, the `z` step is a weighted projection computed in closed form
//! (affine case) or by a scalar bisection on the multiplier (ball case).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::RecoveryResult;
use crate::error::{Error, Result};
use crate::hankel::HankelShape;
use crate::linalg::{frobenius, inner, nuclear_norm, SortedSvd};
use crate::prior::PriorLift;
use crate::scalar::{CMatrix, Complex, Real};
use crate::signal::{ComplexSignal, SampleSet};

fn default_rho() -> f64 {
    1.0
}
fn default_max_iters() -> usize {
    5000
}
fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexConfig {
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Relative tolerance on the primal and dual residuals.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for ConvexConfig {
    fn default() -> Self {
        Self { rho: default_rho(), max_iters: default_max_iters(), tol: default_tol() }
    }
}

impl ConvexConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::InvalidConfig("rho must be positive and finite".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive and finite".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Noisy data constraint `‖P_Ω(z) − P_Ω(y)‖_F ≤ δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyConstraint<T: Real> {
    pub y: ComplexSignal<T>,
    pub delta: T,
}

/// `‖H(z)‖_* − λ·Re⟨G, H(z)⟩`.
pub fn convex_objective<T: Real>(z: &ComplexSignal<T>, prior: &PriorLift<T>, shape: &HankelShape) -> Result<T> {
    let h = shape.lift(z)?;
    Ok(nuclear_norm(&h) - prior.lambda * inner(&h, &prior.g).re)
}

/// Singular value thresholding; also returns `Σ max(σ − τ, 0)`.
fn svt<T: Real>(m: CMatrix<T>, tau: T) -> (CMatrix<T>, T) {
    let (rows, cols) = m.shape();
    let svd = SortedSvd::new(&m);
    let mut out = CMatrix::zeros(rows, cols);
    let mut nuc = T::zero();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        let t = s - tau;
        if t <= T::zero() {
            break;
        }
        nuc += t;
        let col = svd.u.column(j) * Complex::new(t, T::zero());
        out.gerc(Complex::new(T::one(), T::zero()), &col, &svd.v.column(j), Complex::new(T::one(), T::zero()));
    }
    (out, nuc)
}

struct Projector<'a, T: Real> {
    weights: Vec<T>,
    observed: Vec<bool>,
    target: &'a [Complex<T>],
    delta: Option<T>,
}

impl<T: Real> Projector<'_, T> {
    /// Weighted projection of `c` onto the data constraint, in place.
    fn apply(&self, c: &mut [Complex<T>]) {
        let Some(delta) = self.delta else {
            for (k, ck) in c.iter_mut().enumerate() {
                if self.observed[k] {
                    *ck = self.target[k];
                }
            }
            return;
        };
        let gap = |nu: T| -> T {
            let mut s = T::zero();
            for (k, ck) in c.iter().enumerate() {
                if self.observed[k] {
                    let f = self.weights[k] / (self.weights[k] + nu);
                    s += f * f * (*ck - self.target[k]).norm_sqr();
                }
            }
            s.sqrt()
        };
        if gap(T::zero()) <= delta {
            return;
        }
        let nu = if delta <= T::zero() {
            None
        } else {
            let mut hi = T::one();
            while gap(hi) > delta {
                hi *= T::lit(2.0);
            }
            let mut lo = T::zero();
            for _ in 0..200 {
                let mid = (lo + hi) * T::lit(0.5);
                if gap(mid) > delta {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= T::machine_eps() * hi {
                    break;
                }
            }
            Some(hi)
        };
        for (k, ck) in c.iter_mut().enumerate() {
            if self.observed[k] {
                *ck = match nu {
                    None => self.target[k],
                    Some(nu) => {
                        let f = self.weights[k] / (self.weights[k] + nu);
                        self.target[k] + (*ck - self.target[k]) * Complex::new(f, T::zero())
                    }
                };
            }
        }
    }
}

/// Solves the convex program to the configured tolerance.
///
/// Without `noisy` the observations `obs` are matched exactly. With it,
/// `obs` is ignored and the ball around `noisy.y` is used instead. Hitting
/// `max_iters` is reported through `converged = false` with the last
/// iterate returned.
pub fn convex_recover<T: Real>(
    obs: &ComplexSignal<T>,
    omega: &SampleSet,
    shape: &HankelShape,
    prior: &PriorLift<T>,
    noisy: Option<&NoisyConstraint<T>>,
    cfg: &ConvexConfig,
) -> Result<RecoveryResult<T>> {
    cfg.validate()?;
    obs.check_dims(shape.dims())?;
    let start = Instant::now();
    let target = match noisy {
        Some(nc) => {
            nc.y.check_dims(shape.dims())?;
            if !(nc.delta >= T::zero()) {
                return Err(Error::InvalidConfig("delta must be non-negative".into()));
            }
            nc.y.values()
        }
        None => obs.values(),
    };
    let projector = Projector {
        weights: shape.weights().iter().map(|&w| T::from_usize_lossy(w)).collect(),
        observed: omega.indicator(),
        target,
        delta: noisy.map(|nc| nc.delta),
    };

    let mut z: Vec<Complex<T>> = target
        .iter()
        .zip(&projector.observed)
        .map(|(v, &o)| if o { *v } else { Complex::new(T::zero(), T::zero()) })
        .collect();
    projector.apply(&mut z);
    let mut hz = shape.lift_values(&z);
    let mut y = CMatrix::<T>::zeros(shape.rows(), shape.cols());
    let weighted_prior = prior.weighted();
    let rho = T::lit(cfg.rho);
    let tol = T::lit(cfg.tol);

    let mut primal = Vec::new();
    let mut objective = Vec::new();
    let mut converged = false;
    let mut iters = 0;
    for k in 1..=cfg.max_iters {
        iters = k;
        let arg = &hz - &y + weighted_prior.unscale(rho);
        let (x, nuc) = svt(arg, rho.recip());
        objective.push((nuc - inner(&x, &weighted_prior).re).as_f64());

        let mut c = shape.anti_diagonal_means(&(&x + &y));
        projector.apply(&mut c);
        let hz_new = shape.lift_values(&c);
        let r = &x - &hz_new;
        let r_norm = frobenius(&r);
        let s_norm = rho * frobenius(&(&hz_new - &hz));
        y += r;
        z = c;
        hz = hz_new;
        primal.push(r_norm.as_f64());

        if !(r_norm.is_finite() && s_norm.is_finite()) {
            return Err(Error::Diverged { iteration: k });
        }
        let scale_p = frobenius(&x).max(frobenius(&hz)).max(T::one());
        let scale_d = (rho * frobenius(&y)).max(T::one());
        if r_norm <= tol * scale_p && s_norm <= tol * scale_d {
            converged = true;
            break;
        }
    }
    Ok(RecoveryResult {
        z: ComplexSignal::new(shape.dims().to_vec(), z)?,
        iters,
        primal_residuals: primal,
        objective_history: objective,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
