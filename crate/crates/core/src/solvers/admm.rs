//! Factorised ADMM with a lifted prior.
//!
//! Splits `H(z) = UV^H` and alternates exact minimisation of the scaled
//! augmented Lagrangian
//!
//! ```text
//! L(z, U, V; Λ) = ½‖U‖_F² + ½‖V‖_F² − λ·Re⟨G, UV^H⟩
//!               + (μ/2)‖H(z) − UV^H + Λ‖_F² − (μ/2)‖Λ‖_F²
//! ```
//!
//! over `z` (observed entries pinned), `U`, `V`, followed by the dual step
//! `Λ ← Λ + H(z) − UV^H`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::lmafit::lmafit_init;
use super::RecoveryResult;
use crate::error::{Error, Result};
use crate::hankel::HankelShape;
use crate::linalg::{frobenius, hpd_inverse, inner, pinv, SortedSvd};
use crate::prior::{default_rank_tol, PriorConstruction, PriorLift};
use crate::scalar::{cz, CMatrix, Complex, Real};
use crate::signal::{ComplexSignal, SampleSet};

fn default_lambda() -> f64 {
    1.0
}
fn default_mu() -> f64 {
    1.0
}
fn default_max_iters() -> usize {
    500
}
fn default_tol() -> f64 {
    1e-8
}
fn default_lmafit_iters() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    pub rank: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Trust the prior for initialisation when `‖P_Ω(x − φ)‖_F ≤ eps_init`.
    /// `None` always trusts a supplied prior.
    #[serde(default)]
    pub eps_init: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lmafit_iters")]
    pub lmafit_iters: usize,
}

impl AdmmConfig {
    pub fn new(rank: usize) -> Self {
        Self {
            lambda: default_lambda(),
            mu: default_mu(),
            rank,
            max_iters: default_max_iters(),
            tol: default_tol(),
            eps_init: None,
            seed: 0,
            lmafit_iters: default_lmafit_iters(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.rank == 0 {
            return bad("rank must be positive");
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return bad("mu must be positive and finite");
        }
        if !self.lambda.is_finite() {
            return bad("lambda must be finite");
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad("tol must be positive and finite");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if matches!(self.eps_init, Some(e) if !(e >= 0.0)) {
            return bad("eps_init must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitBranch {
    Prior,
    Lmafit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Initialization<T: Real> {
    pub u0: CMatrix<T>,
    pub v0: CMatrix<T>,
    pub prior: PriorLift<T>,
    pub branch: InitBranch,
}

fn observed_residual<T: Real>(obs: &ComplexSignal<T>, phi: &ComplexSignal<T>, omega: &SampleSet) -> f64 {
    omega
        .distinct()
        .into_iter()
        .map(|k| (obs.values()[k] - phi.values()[k]).norm_sqr().as_f64())
        .sum::<f64>()
        .sqrt()
}

/// Chooses the starting factors and the prior used by the iteration.
///
/// With a prior `φ` close enough to the observations the factors come from
/// the rank-`r` SVD of `H(φ)` (`U₀ = U_r Σ_r`, `V₀ = V_r`) and
/// `G = U_r V_r^H`. Otherwise the factors come from [`lmafit_init`] and the
/// prior is zero.
pub fn init_factors<T: Real>(
    obs: &ComplexSignal<T>,
    omega: &SampleSet,
    shape: &HankelShape,
    phi: Option<&ComplexSignal<T>>,
    cfg: &AdmmConfig,
) -> Result<Initialization<T>> {
    cfg.validate()?;
    obs.check_dims(shape.dims())?;
    let max = shape.rows().min(shape.cols());
    if cfg.rank > max {
        return Err(Error::RankTooLarge { rank: cfg.rank, max });
    }
    if let Some(phi) = phi {
        phi.check_dims(shape.dims())?;
        let trusted = match cfg.eps_init {
            None => true,
            Some(eps) => observed_residual(obs, phi, omega) <= eps,
        };
        if trusted {
            let svd = SortedSvd::new(&shape.lift(phi)?);
            let keep = svd.rank(default_rank_tol()).min(cfg.rank);
            if keep > 0 {
                let (u, s, v) = svd.truncate(keep);
                let mut u0 = u.clone();
                for (j, sj) in s.iter().enumerate() {
                    u0.column_mut(j).scale_mut(*sj);
                }
                return Ok(Initialization {
                    u0,
                    v0: v.clone(),
                    prior: PriorLift {
                        g: u * v.adjoint(),
                        lambda: T::lit(cfg.lambda),
                        construction: PriorConstruction::SignOfLift,
                    },
                    branch: InitBranch::Prior,
                });
            }
        }
    }
    let (u0, v0) = lmafit_init(obs, omega, shape, cfg.rank, cfg.lmafit_iters, cfg.seed)?;
    Ok(Initialization { u0, v0, prior: PriorLift::zero(shape), branch: InitBranch::Lmafit })
}

/// Iterate state, exposed so that the per-block updates can be inspected.
#[derive(Debug, Clone)]
pub struct AdmmState<'a, T: Real> {
    shape: &'a HankelShape,
    obs: Vec<Complex<T>>,
    observed: Vec<bool>,
    weighted_prior: CMatrix<T>,
    lambda: T,
    mu: T,
    pub u: CMatrix<T>,
    pub v: CMatrix<T>,
    pub dual: CMatrix<T>,
    pub z: ComplexSignal<T>,
    hz: CMatrix<T>,
    // UV^H as of the last dual step.
    x: CMatrix<T>,
    // μ(H(z) + Λ) + λG as of the last z step.
    c: CMatrix<T>,
}

impl<'a, T: Real> AdmmState<'a, T> {
    pub fn new(
        obs: &ComplexSignal<T>,
        omega: &SampleSet,
        shape: &'a HankelShape,
        init: &Initialization<T>,
        mu: T,
    ) -> Result<Self> {
        obs.check_dims(shape.dims())?;
        let (rows, cols) = (shape.rows(), shape.cols());
        if init.u0.nrows() != rows || init.v0.nrows() != cols || init.u0.ncols() != init.v0.ncols() {
            return Err(Error::DimensionMismatch {
                expected: vec![rows, cols, init.u0.ncols()],
                got: vec![init.u0.nrows(), init.v0.nrows(), init.v0.ncols()],
            });
        }
        if init.prior.g.shape() != (rows, cols) {
            return Err(Error::DimensionMismatch {
                expected: vec![rows, cols],
                got: vec![init.prior.g.nrows(), init.prior.g.ncols()],
            });
        }
        let observed = omega.indicator();
        let mut z = obs.clone();
        for (zk, &seen) in z.values_mut().iter_mut().zip(&observed) {
            if !seen {
                *zk = cz();
            }
        }
        let hz = shape.lift_values(z.values());
        let weighted_prior = init.prior.weighted();
        Ok(Self {
            shape,
            obs: obs.values().to_vec(),
            observed,
            c: hz.scale(mu) + &weighted_prior,
            weighted_prior,
            lambda: init.prior.lambda,
            mu,
            x: &init.u0 * init.v0.adjoint(),
            u: init.u0.clone(),
            v: init.v0.clone(),
            dual: CMatrix::zeros(rows, cols),
            z,
            hz,
        })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn lifted_z(&self) -> &CMatrix<T> {
        &self.hz
    }

    /// `z ← P_Ω^c H†(UV^H − Λ) + P_Ω x`.
    pub fn z_step(&mut self) {
        let target = &self.x - &self.dual;
        let means = self.shape.anti_diagonal_means(&target);
        for (k, zk) in self.z.values_mut().iter_mut().enumerate() {
            *zk = if self.observed[k] { self.obs[k] } else { means[k] };
        }
        self.hz = self.shape.lift_values(self.z.values());
        self.c = (&self.hz + &self.dual) * Complex::new(self.mu, T::zero()) + &self.weighted_prior;
    }

    fn factor_solve(&self, gram: CMatrix<T>) -> CMatrix<T> {
        let n = gram.nrows();
        let m = CMatrix::identity(n, n) + gram.scale(self.mu);
        hpd_inverse(&m).unwrap_or_else(|| pinv(&m, T::machine_eps()))
    }

    /// `U ← [μ(H(z) + Λ) + λG] V (I + μ V^H V)^{-1}`.
    pub fn u_step(&mut self) {
        let inv = self.factor_solve(self.v.ad_mul(&self.v));
        self.u = &self.c * &self.v * inv;
    }

    /// `V ← [μ(H(z) + Λ) + λG]^H U (I + μ U^H U)^{-1}`.
    pub fn v_step(&mut self) {
        let inv = self.factor_solve(self.u.ad_mul(&self.u));
        self.v = self.c.ad_mul(&self.u) * inv;
    }

    /// `Λ ← Λ + H(z) − UV^H`. Returns the primal residual `‖H(z) − UV^H‖_F`
    /// and the augmented Lagrangian at the point reached before the update.
    pub fn dual_step(&mut self) -> (T, T) {
        self.x = &self.u * self.v.adjoint();
        let r = &self.hz - &self.x;
        let norm = frobenius(&r);
        let before = self.dual.norm_squared();
        self.dual += r;
        let half = T::lit(0.5);
        let lag = half * (self.u.norm_squared() + self.v.norm_squared()) - inner(&self.x, &self.weighted_prior).re
            + half * self.mu * (self.dual.norm_squared() - before);
        (norm, lag)
    }

    /// `B = (C − λG)/μ`, the data-fit target of the factor updates.
    fn b(&self) -> CMatrix<T> {
        (&self.c - &self.weighted_prior).unscale(self.mu)
    }

    /// Gradient of `L` in `U` at the current point, taken with the `B` of the
    /// last `z` step: `U − λGV − μ(B − UV^H)V`.
    pub fn u_gradient(&self) -> CMatrix<T> {
        let x = &self.u * self.v.adjoint();
        &self.u - &self.weighted_prior * &self.v - (self.b() - x) * &self.v * Complex::new(self.mu, T::zero())
    }

    /// Gradient of `L` in `V`: `V − λG^H U − μ(B − UV^H)^H U`.
    pub fn v_gradient(&self) -> CMatrix<T> {
        let x = &self.u * self.v.adjoint();
        &self.v - self.weighted_prior.ad_mul(&self.u) - (self.b() - x).ad_mul(&self.u) * Complex::new(self.mu, T::zero())
    }

    /// Scaled augmented Lagrangian at the current iterate.
    pub fn lagrangian(&self) -> T {
        let half = T::lit(0.5);
        let x = &self.u * self.v.adjoint();
        let gap = (&self.hz - &x + &self.dual).norm_squared();
        half * (self.u.norm_squared() + self.v.norm_squared()) - inner(&x, &self.weighted_prior).re
            + half * self.mu * (gap - self.dual.norm_squared())
    }

    fn finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|c| c.re.is_finite() && c.im.is_finite()) && self.z.all_finite()
    }
}

/// Runs the factorised iteration from a prepared [`Initialization`].
///
/// Stops when `‖z_k − z_{k−1}‖_F < tol` or after `max_iters` iterations.
/// Non-finite iterates raise [`Error::Diverged`] with the iteration index.
pub fn admm_recover<T: Real>(
    obs: &ComplexSignal<T>,
    omega: &SampleSet,
    shape: &HankelShape,
    init: &Initialization<T>,
    cfg: &AdmmConfig,
) -> Result<RecoveryResult<T>> {
    cfg.validate()?;
    let start = Instant::now();
    let mut state = AdmmState::new(obs, omega, shape, init, T::lit(cfg.mu))?;
    let tol = T::lit(cfg.tol);
    let mut primal = Vec::new();
    let mut objective = Vec::new();
    let mut converged = false;
    let mut iters = 0;
    let blowup = T::lit(1e150);
    for k in 1..=cfg.max_iters {
        iters = k;
        let prev = state.z.clone();
        state.z_step();
        state.u_step();
        state.v_step();
        let (r, lag) = state.dual_step();
        primal.push(r.as_f64());
        objective.push(lag.as_f64());
        if !state.finite() || !(r < blowup) {
            return Err(Error::Diverged { iteration: k });
        }
        if state.z.distance(&prev) < tol {
            converged = true;
            break;
        }
    }
    Ok(RecoveryResult {
        z: state.z,
        iters,
        primal_residuals: primal,
        objective_history: objective,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Initialisation followed by the iteration. `phi = None` gives the
/// prior-free variant.
pub fn recover_with_prior<T: Real>(
    obs: &ComplexSignal<T>,
    omega: &SampleSet,
    shape: &HankelShape,
    phi: Option<&ComplexSignal<T>>,
    cfg: &AdmmConfig,
) -> Result<RecoveryResult<T>> {
    let start = Instant::now();
    let init = init_factors(obs, omega, shape, phi, cfg)?;
    let mut out = admm_recover(obs, omega, shape, &init, cfg)?;
    out.wall_time = start.elapsed().as_secs_f64();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{draw_samples, make_prior, mask, SpectralModel};

    fn instance() -> (ComplexSignal<f64>, HankelShape) {
        let one = Complex::new(1.0, 0.0);
        let x = SpectralModel::one_dim(32, &[0.1, 0.37, 0.72], &[one, one, one]).unwrap().synthesize();
        (x, HankelShape::with_default_pencils(vec![32], Default::default()).unwrap())
    }

    #[test]
    fn full_sampling_returns_observations_immediately() {
        let (x, shape) = instance();
        let omega = SampleSet::full(vec![32]);
        let phi = make_prior(&x, 0.5, 3);
        let res = recover_with_prior(&x, &omega, &shape, Some(&phi), &AdmmConfig::new(3)).unwrap();
        assert_eq!(res.iters, 1);
        assert!(res.converged);
        assert_eq!(res.z, x);
    }

    #[test]
    fn observed_entries_are_pinned() {
        let (x, shape) = instance();
        let omega = draw_samples(&[32], 10, Default::default(), 5).unwrap();
        let phi = make_prior(&x, 0.5, 6);
        let mut cfg = AdmmConfig::new(3);
        cfg.max_iters = 40;
        let res = recover_with_prior(&x, &omega, &shape, Some(&phi), &cfg).unwrap();
        assert_eq!(mask(&res.z, &omega).unwrap(), mask(&x, &omega).unwrap());
        assert_eq!(res.primal_residuals.len(), res.iters);
    }

    #[test]
    fn block_updates_zero_their_gradients() {
        let (x, shape) = instance();
        let omega = draw_samples(&[32], 12, Default::default(), 9).unwrap();
        let phi = make_prior(&x, 0.3, 2);
        let cfg = AdmmConfig::new(3);
        let init = init_factors(&x, &omega, &shape, Some(&phi), &cfg).unwrap();
        let mut st = AdmmState::new(&x, &omega, &shape, &init, 1.0).unwrap();
        for _ in 0..5 {
            st.z_step();
            st.u_step();
            let scale = frobenius(&st.u).max(1.0);
            assert!(frobenius(&st.u_gradient()) < 1e-9 * scale);
            st.v_step();
            assert!(frobenius(&st.v_gradient()) < 1e-9 * frobenius(&st.v).max(1.0));
            st.dual_step();
        }
    }

    #[test]
    fn reported_lagrangian_matches_direct_evaluation() {
        let (x, shape) = instance();
        let omega = draw_samples(&[32], 12, Default::default(), 13).unwrap();
        let phi = make_prior(&x, 0.5, 5);
        let cfg = AdmmConfig::new(3);
        let init = init_factors(&x, &omega, &shape, Some(&phi), &cfg).unwrap();
        let mut st = AdmmState::new(&x, &omega, &shape, &init, 1.0).unwrap();
        for _ in 0..5 {
            st.z_step();
            st.u_step();
            st.v_step();
            let direct = st.lagrangian();
            let (_, reported) = st.dual_step();
            assert!((direct - reported).abs() < 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn primal_sweep_does_not_increase_lagrangian() {
        let (x, shape) = instance();
        let omega = draw_samples(&[32], 12, Default::default(), 11).unwrap();
        let phi = make_prior(&x, 0.5, 4);
        let cfg = AdmmConfig::new(3);
        let init = init_factors(&x, &omega, &shape, Some(&phi), &cfg).unwrap();
        let mut st = AdmmState::new(&x, &omega, &shape, &init, 1.0).unwrap();
        for _ in 0..20 {
            let before = st.lagrangian();
            st.z_step();
            let after_z = st.lagrangian();
            st.u_step();
            let after_u = st.lagrangian();
            st.v_step();
            let after_v = st.lagrangian();
            let slack = 1e-9 * before.abs().max(1.0);
            assert!(after_z <= before + slack);
            assert!(after_u <= after_z + slack);
            assert!(after_v <= after_u + slack);
            st.dual_step();
        }
    }

    #[test]
    fn init_threshold_is_inclusive() {
        let (x, shape) = instance();
        let omega = draw_samples(&[32], 10, Default::default(), 1).unwrap();
        let phi = make_prior(&x, 0.5, 2);
        let gap = observed_residual(&x, &phi, &omega);
        let mut cfg = AdmmConfig::new(3);
        cfg.eps_init = Some(gap);
        assert_eq!(init_factors(&x, &omega, &shape, Some(&phi), &cfg).unwrap().branch, InitBranch::Prior);
        cfg.eps_init = Some(gap * (1.0 - 1e-12));
        let init = init_factors(&x, &omega, &shape, Some(&phi), &cfg).unwrap();
        assert_eq!(init.branch, InitBranch::Lmafit);
        assert!(init.prior.is_zero());
        assert_eq!(init.prior.lambda, 0.0);
    }

    #[test]
    fn prior_init_factors_reproduce_truncated_lift() {
        let (x, shape) = instance();
        let omega = SampleSet::full(vec![32]);
        let init = init_factors(&x, &omega, &shape, Some(&x), &AdmmConfig::new(3)).unwrap();
        let err = frobenius(&(&init.u0 * init.v0.adjoint() - shape.lift(&x).unwrap()));
        assert!(err < 1e-9);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = AdmmConfig::new(0);
        assert!(cfg.validate().is_err());
        cfg.rank = 2;
        cfg.mu = 0.0;
        assert!(cfg.validate().is_err());
        cfg.mu = 1.0;
        cfg.tol = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let cfg: AdmmConfig = serde_json::from_str(r#"{"rank":3}"#).unwrap();
        assert_eq!(cfg, AdmmConfig::new(3));
        let full: AdmmConfig = serde_json::from_str(
            r#"{"lambda":1.0,"mu":1.0,"rank":3,"max_iters":500,"tol":1e-8,"eps_init":2.5,"seed":7}"#,
        )
        .unwrap();
        assert_eq!(full.eps_init, Some(2.5));
        assert_eq!(full.seed, 7);
    }
}
