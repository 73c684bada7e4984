//! Certificate quantities behind the exact-recovery guarantee.
//!
//! Everything here needs the noiseless ground truth and is meant for
//! analysis, not recovery: the tangent space of `H(x)`, incoherence, the
//! basis-weighted norms, the residual `F₀`, the sample-size bound up to its
//! absolute constant, a golfing-scheme dual certificate and the deviation
//! of the sampled operator restricted to the tangent space.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{basis_coefficients, hankel_project, lift, sampling_op, HankelShape, Variant};
use crate::linalg::{frobenius, orthogonal_complement, spectral_norm, SortedSvd};
use crate::prior::{build_prior_lift, default_rank_tol, optimal_lambda_in, PriorLift};
use crate::rng::rng_from_seed;
use crate::scalar::{CMatrix, Complex, Real};
use crate::signal::{ComplexSignal, SampleSet, SamplingLaw};

/// Column and row spaces of a low-rank matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSpace<T: Real> {
    u: CMatrix<T>,
    v: CMatrix<T>,
}

impl<T: Real> TangentSpace<T> {
    /// Compact SVD with singular values above `rank_tol · σ₁`.
    pub fn from_matrix(m: &CMatrix<T>, rank_tol: T) -> Result<Self> {
        let svd = SortedSvd::new(m);
        let rank = svd.rank(rank_tol);
        if rank == 0 {
            return Err(Error::ZeroMatrix);
        }
        let (u, _, v) = svd.truncate(rank);
        Ok(Self { u, v })
    }

    pub fn from_factors(u: CMatrix<T>, v: CMatrix<T>) -> Self {
        Self { u, v }
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn u(&self) -> &CMatrix<T> {
        &self.u
    }

    pub fn v(&self) -> &CMatrix<T> {
        &self.v
    }

    /// `sgn = U V^H`.
    pub fn sign(&self) -> CMatrix<T> {
        &self.u * self.v.adjoint()
    }

    /// `P_T(M) = UU^H M + M VV^H − UU^H M VV^H`.
    pub fn project(&self, m: &CMatrix<T>) -> CMatrix<T> {
        let uh_m = self.u.adjoint() * m;
        let m_v = m * &self.v;
        let core = &uh_m * &self.v;
        &self.u * &uh_m + &m_v * self.v.adjoint() - &self.u * core * self.v.adjoint()
    }

    pub fn project_complement(&self, m: &CMatrix<T>) -> CMatrix<T> {
        m - self.project(m)
    }
}

/// `P_T(M)` or `P_{T⊥}(M)`.
pub fn tangent_project<T: Real>(m: &CMatrix<T>, t: &TangentSpace<T>, complement: bool) -> CMatrix<T> {
    if complement {
        t.project_complement(m)
    } else {
        t.project(m)
    }
}

/// Smallest `μ` with `max_i ‖U^H e_i‖² ≤ μr/n₁` and `max_j ‖V^H e_j‖² ≤ μr/n₂`.
pub fn incoherence<T: Real>(t: &TangentSpace<T>, shape: &HankelShape) -> T {
    let r = T::from_usize_lossy(t.rank());
    let lev = |m: &CMatrix<T>| {
        m.row_iter()
            .map(|row| row.iter().fold(T::zero(), |a, v| a + v.norm_sqr()))
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    };
    let mu_u = lev(&t.u) * T::from_usize_lossy(shape.rows()) / r;
    let mu_v = lev(&t.v) * T::from_usize_lossy(shape.cols()) / r;
    if mu_u > mu_v {
        mu_u
    } else {
        mu_v
    }
}

/// Spectral norms `‖A_k‖` of every basis element.
///
/// Each is computed by an SVD of the pattern restricted to the rows and
/// columns it touches.
pub fn basis_spectral_norms<T: Real>(shape: &HankelShape) -> Vec<T> {
    let n = shape.signal_len();
    let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut cols_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut cells: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for r in 0..shape.rows() {
        for c in 0..shape.cols() {
            let k = shape.position(r, c);
            cells[k].push((r, c));
            if !rows_of[k].contains(&r) {
                rows_of[k].push(r);
            }
            if !cols_of[k].contains(&c) {
                cols_of[k].push(c);
            }
        }
    }
    (0..n)
        .map(|k| {
            let w = T::from_usize_lossy(shape.weights()[k]);
            let scale = T::one() / w.sqrt();
            let mut sub = nalgebra::DMatrix::<T>::zeros(rows_of[k].len(), cols_of[k].len());
            for &(r, c) in &cells[k] {
                let ri = rows_of[k].iter().position(|&x| x == r).unwrap();
                let ci = cols_of[k].iter().position(|&x| x == c).unwrap();
                sub[(ri, ci)] = scale;
            }
            sub.svd(false, false).singular_values.iter().fold(T::zero(), |a, &s| if s > a { s } else { a })
        })
        .collect()
}

/// `(‖M‖_{A,∞}, ‖M‖_{A,2})` with `|⟨M, A_k⟩| · ‖A_k‖` per basis element.
pub fn a_norms<T: Real>(m: &CMatrix<T>, shape: &HankelShape) -> Result<(T, T)> {
    let norms = basis_spectral_norms::<T>(shape);
    a_norms_with(m, shape, &norms)
}

fn a_norms_with<T: Real>(m: &CMatrix<T>, shape: &HankelShape, norms: &[T]) -> Result<(T, T)> {
    let coeffs = basis_coefficients(m, shape)?;
    let mut max = T::zero();
    let mut sum = T::zero();
    for (c, &a) in coeffs.iter().zip(norms) {
        let v = c.norm_sqr().sqrt() * a;
        if v > max {
            max = v;
        }
        sum += v * v;
    }
    Ok((max, sum.sqrt()))
}

/// `c_s = max{n/n₁, n/n₂}`; for multi-level lifts this equals
/// `max{∏ N_k/n_k, ∏ N_k/rows_k}`.
pub fn sampling_ratio(shape: &HankelShape) -> f64 {
    let n = shape.signal_len() as f64;
    (n / shape.rows() as f64).max(n / shape.cols() as f64)
}

/// Outcome of the golfing construction and the three certificate conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Number of sample batches used.
    pub batches: usize,
    /// Batch size after padding.
    pub batch_size: usize,
    /// `W` has no component on unobserved anti-diagonals.
    pub cond_13: bool,
    pub cond_13_residual: f64,
    /// `‖P_T(sgn − W − λG)‖_F`, required `≤ 1/(7n)`.
    pub cond_14_value: f64,
    pub cond_14_pass: bool,
    /// `‖P_{T⊥}(W + λG)‖`, required `≤ 1/2`.
    pub cond_15_value: f64,
    pub cond_15_pass: bool,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.cond_13 && self.cond_14_pass && self.cond_15_pass
    }
}

/// `max{ln(7n‖F₀‖_F), 1}` (natural logarithm).
pub fn golfing_depth(n: usize, f0_norm: f64) -> f64 {
    let arg = 7.0 * n as f64 * f0_norm;
    if arg > 0.0 {
        arg.ln().max(1.0)
    } else {
        1.0
    }
}

pub(crate) struct CertificateInputs<'a, T: Real> {
    pub tangent: &'a TangentSpace<T>,
    pub weighted_prior: &'a CMatrix<T>,
    pub omega: &'a SampleSet,
    pub shape: &'a HankelShape,
}

pub(crate) fn golfing_in<T: Real>(inp: &CertificateInputs<'_, T>, j0: Option<usize>, seed: u64) -> Result<Certificate> {
    let shape = inp.shape;
    let n = shape.signal_len();
    let sign = inp.tangent.sign();
    let f0 = inp.tangent.project(&(&sign - inp.weighted_prior));
    let batches = j0.unwrap_or_else(|| golfing_depth(n, frobenius(&f0).as_f64()).ceil() as usize).max(1);
    let m = inp.omega.m();
    if m < batches {
        return Err(Error::TooFewSamples { m, batches });
    }
    let batch_size = m.div_ceil(batches);
    let mut rng = rng_from_seed(seed);
    let all = inp.omega.indices();
    let scale = T::from_usize_lossy(n) / T::from_usize_lossy(batch_size);

    let mut f = f0;
    let mut w = CMatrix::zeros(shape.rows(), shape.cols());
    for b in 0..batches {
        let start = (b * batch_size).min(m);
        let end = ((b + 1) * batch_size).min(m);
        let mut idx = all[start..end].to_vec();
        while idx.len() < batch_size {
            idx.push(all[rng.random_range(0..m)]);
        }
        let batch = SampleSet::new(shape.dims().to_vec(), SamplingLaw::Iid, idx)?;
        let a_batch = sampling_op(&f, &batch, shape, true)?.scale(scale);
        let a_full = hankel_project(&f, shape)?;
        w += &a_batch + (&f - &a_full);
        f = inp.tangent.project(&(a_full - a_batch));
    }

    let observed = inp.omega.indicator();
    let unobserved: Vec<usize> = (0..n).filter(|&k| !observed[k]).collect();
    let off = SampleSet::new(shape.dims().to_vec(), SamplingLaw::WithoutReplacement, unobserved)?;
    let residual = frobenius(&sampling_op(&w, &off, shape, false)?).as_f64();
    let w_norm = frobenius(&w).as_f64();
    let cond13_tol = 1e-10 * w_norm.max(1.0);

    let c14 = frobenius(&inp.tangent.project(&(&sign - &w - inp.weighted_prior))).as_f64();
    let c15 = spectral_norm(&inp.tangent.project_complement(&(&w + inp.weighted_prior))).as_f64();
    Ok(Certificate {
        batches,
        batch_size,
        cond_13: residual <= cond13_tol,
        cond_13_residual: residual,
        cond_14_value: c14,
        cond_14_pass: c14 <= 1.0 / (7.0 * n as f64),
        cond_15_value: c15,
        cond_15_pass: c15 <= 0.5,
    })
}

/// Builds a dual certificate `W` by the golfing scheme and checks the three
/// sufficient conditions for exact recovery.
///
/// `Ω` is split in order into `j₀` batches of `⌈m/j₀⌉` draws; short batches
/// are padded by resampling from `Ω` with `seed`. Each batch is rescaled by
/// `n / batch_size`. When `j0` is `None` it is `⌈max{ln(7n‖F₀‖_F), 1}⌉`.
pub fn golfing_certificate<T: Real>(
    x: &ComplexSignal<T>,
    prior: &PriorLift<T>,
    omega: &SampleSet,
    shape: &HankelShape,
    j0: Option<usize>,
    seed: u64,
) -> Result<Certificate> {
    let h = lift(x, shape)?;
    let tangent = TangentSpace::from_matrix(&h, default_rank_tol())?;
    let weighted = prior.weighted();
    golfing_in(&CertificateInputs { tangent: &tangent, weighted_prior: &weighted, omega, shape }, j0, seed)
}

/// `‖P_T 𝒜 P_T − (n/m) P_T 𝒜_Ω P_T‖` as an operator on `T`.
///
/// The operator is written out in the orthonormal basis
/// `{u_a v_b^H, u_a v⊥_c^H, u⊥_d v_b^H}` of `T` and its spectral norm taken.
pub fn lemma1_concentration<T: Real>(t: &TangentSpace<T>, omega: &SampleSet, shape: &HankelShape) -> Result<T> {
    let r = t.rank();
    let n1 = shape.rows();
    let n2 = shape.cols();
    let u_perp = orthogonal_complement(&t.u);
    let v_perp = orthogonal_complement(&t.v);
    let dim = r * (n1 + n2 - r);
    let ratio = T::from_usize_lossy(shape.signal_len()) / T::from_usize_lossy(omega.m().max(1));

    let basis_elem = |j: usize| -> CMatrix<T> {
        if j < r * r {
            t.u.column(j / r) * t.v.column(j % r).adjoint()
        } else if j < r * n2 {
            let j = j - r * r;
            let cols = n2 - r;
            t.u.column(j / cols) * v_perp.column(j % cols).adjoint()
        } else {
            let j = j - r * n2;
            u_perp.column(j / r) * t.v.column(j % r).adjoint()
        }
    };
    let coords = |y: &CMatrix<T>| -> Vec<Complex<T>> {
        let uh_y = t.u.adjoint() * y;
        let a = &uh_y * &t.v;
        let b = &uh_y * &v_perp;
        let c = u_perp.adjoint() * y * &t.v;
        let mut out = Vec::with_capacity(dim);
        for i in 0..r {
            for k in 0..r {
                out.push(a[(i, k)]);
            }
        }
        for i in 0..r {
            for k in 0..n2 - r {
                out.push(b[(i, k)]);
            }
        }
        for i in 0..n1 - r {
            for k in 0..r {
                out.push(c[(i, k)]);
            }
        }
        out
    };
    let mut op = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let e = basis_elem(j);
        let y = hankel_project(&e, shape)? - sampling_op(&e, omega, shape, true)?.scale(ratio);
        let col = coords(&t.project(&y));
        for (i, v) in col.into_iter().enumerate() {
            op[(i, j)] = v;
        }
    }
    Ok(spectral_norm(&op))
}

/// Every certificate-related quantity for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub n: usize,
    pub m: usize,
    pub rank: usize,
    /// Incoherence `μ` of `H(x)`.
    pub mu: f64,
    pub cs: f64,
    pub lambda: f64,
    pub f0_norm: f64,
    pub f0_a_inf: f64,
    pub f0_a2: f64,
    /// `‖P_{T⊥}(λG)‖`.
    pub pt_perp_g: f64,
    /// `‖P_{T⊥}(λG)‖ < 1/2`.
    pub prior_hypothesis: bool,
    /// `None` when `1 − 2‖P_{T⊥}(λG)‖ ≤ 0`.
    pub delta: Option<f64>,
    /// `None` when `P_T(G) = 0`.
    pub lambda_star: Option<f64>,
    /// `max{ln(7n‖F₀‖_F), 1}`.
    pub j0: f64,
    pub log_base: String,
    /// Exponent on `log n`: 1 for wrap-around lifts, 3 otherwise.
    pub alpha: u32,
    /// `max{Δ²,1}·μ·c_s·r·logᵅ n·j₀` with the absolute constant set to 1.
    pub m_bound_upto_constant: Option<f64>,
    /// The golfing-stage bound `max{Δ²,1}·μ·c_s·r·log n·j₀`, which omits `ν`.
    pub m_bound_golfing_stage: Option<f64>,
    /// `‖P_T 𝒜 P_T − (n/m) P_T 𝒜_Ω P_T‖`.
    pub lemma1_deviation: f64,
    pub certificate: Option<Certificate>,
    /// Why the certificate could not be built, if it was not.
    pub certificate_error: Option<String>,
}

/// Computes every quantity of the exact-recovery theorem for ground truth
/// `x`, prior `φ` (or none), weight `λ` and samples `Ω`.
pub fn theorem1_report<T: Real>(
    x: &ComplexSignal<T>,
    phi: Option<&ComplexSignal<T>>,
    lambda: T,
    omega: &SampleSet,
    shape: &HankelShape,
    seed: u64,
) -> Result<DiagnosticsReport> {
    let h = lift(x, shape)?;
    let tangent = TangentSpace::from_matrix(&h, default_rank_tol())?;
    let rank = tangent.rank();
    let prior = match phi {
        Some(phi) => build_prior_lift(phi, shape, lambda, rank)?,
        None => PriorLift::zero(shape),
    };
    report_with_prior(x, &tangent, &prior, lambda, omega, shape, seed)
}

pub(crate) fn report_with_prior<T: Real>(
    x: &ComplexSignal<T>,
    tangent: &TangentSpace<T>,
    prior: &PriorLift<T>,
    lambda: T,
    omega: &SampleSet,
    shape: &HankelShape,
    seed: u64,
) -> Result<DiagnosticsReport> {
    x.check_dims(shape.dims())?;
    let n = shape.signal_len();
    let rank = tangent.rank();
    let weighted = prior.g.scale(lambda);
    let f0 = tangent.project(&(tangent.sign() - &weighted));
    let f0_norm = frobenius(&f0).as_f64();
    let norms = basis_spectral_norms::<T>(shape);
    let (a_inf, a2) = a_norms_with(&f0, shape, &norms)?;
    let (a_inf, a2) = (a_inf.as_f64(), a2.as_f64());
    let pt_perp_g = spectral_norm(&tangent.project_complement(&weighted)).as_f64();
    let denom = 1.0 - 2.0 * pt_perp_g;
    let delta = (denom > 0.0).then(|| 4.0 * (a2 + a_inf) / denom);
    let lambda_star = if prior.is_zero() { None } else { optimal_lambda_in(tangent, &prior.g).ok().map(|v| v.as_f64()) };
    let mu = incoherence(tangent, shape).as_f64();
    let cs = sampling_ratio(shape);
    let j0 = golfing_depth(n, f0_norm);
    let alpha = match shape.variant() {
        Variant::WrapAround => 1,
        Variant::Standard => 3,
    };
    let log_n = (n as f64).ln();
    let base = delta.map(|d| (d * d).max(1.0) * mu * cs * rank as f64 * j0);
    let m_bound = base.map(|b| b * log_n.powi(alpha as i32));
    let m_golf = base.map(|b| b * log_n);
    let lemma1 = lemma1_concentration(tangent, omega, shape)?.as_f64();
    let inputs = CertificateInputs { tangent, weighted_prior: &weighted, omega, shape };
    let (certificate, certificate_error) = match golfing_in(&inputs, None, seed) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(DiagnosticsReport {
        n,
        m: omega.m(),
        rank,
        mu,
        cs,
        lambda: lambda.as_f64(),
        f0_norm,
        f0_a_inf: a_inf,
        f0_a2: a2,
        pt_perp_g,
        prior_hypothesis: pt_perp_g < 0.5,
        delta,
        lambda_star,
        j0,
        log_base: "natural".into(),
        alpha,
        m_bound_upto_constant: m_bound,
        m_bound_golfing_stage: m_golf,
        lemma1_deviation: lemma1,
        certificate,
        certificate_error,
    })
}
