//! Thin helpers over nalgebra's complex decompositions.

use nalgebra::{DMatrix, DVector};

use crate::scalar::{cz, CMatrix, Complex, Real};

/// Singular value decomposition with singular values sorted in descending order.
#[derive(Debug, Clone)]
pub struct SortedSvd<T: Real> {
    /// `rows × k` left singular vectors, `k = min(rows, cols)`.
    pub u: CMatrix<T>,
    pub singular_values: Vec<T>,
    /// `cols × k` right singular vectors (not transposed).
    pub v: CMatrix<T>,
}

impl<T: Real> SortedSvd<T> {
    /// nalgebra's bidiagonal SVD is tried first. Its complex path can return
    /// a factorisation that does not reproduce the input on some rank-deficient
    /// matrices, so the result is checked and recomputed by one-sided Jacobi
    /// when the check fails.
    pub fn new(m: &CMatrix<T>) -> Self {
        let (rows, cols) = m.shape();
        let k = rows.min(cols);
        if k == 0 {
            return Self {
                u: CMatrix::zeros(rows, 0),
                singular_values: Vec::new(),
                v: CMatrix::zeros(cols, 0),
            };
        }
        let (u, s, v) = match bidiagonal_svd(m) {
            Some(f) if is_factorisation(m, &f) => f,
            _ => jacobi_svd(m),
        };
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
        let mut su = CMatrix::zeros(rows, k);
        let mut sv = CMatrix::zeros(cols, k);
        let mut values = Vec::with_capacity(k);
        for (dst, &src) in order.iter().enumerate() {
            su.set_column(dst, &u.column(src));
            sv.set_column(dst, &v.column(src));
            values.push(s[src]);
        }
        Self { u: su, singular_values: values, v: sv }
    }

    pub fn rank(&self, rel_tol: T) -> usize {
        let top = self.singular_values.first().copied().unwrap_or_else(T::zero);
        if top <= T::zero() {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > rel_tol * top).count()
    }

    /// Leading `r` columns of `U` and `V`, and the leading singular values.
    pub fn truncate(&self, r: usize) -> (CMatrix<T>, Vec<T>, CMatrix<T>) {
        let r = r.min(self.singular_values.len());
        (
            self.u.columns(0, r).into_owned(),
            self.singular_values[..r].to_vec(),
            self.v.columns(0, r).into_owned(),
        )
    }
}

/// `⟨X, Y⟩ = vec(Y)^H vec(X)`.
pub fn inner<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> Complex<T> {
    debug_assert_eq!(x.shape(), y.shape());
    x.iter().zip(y.iter()).fold(cz(), |acc, (a, b)| acc + *a * b.conj())
}

pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()).sqrt()
}

pub fn spectral_norm<T: Real>(m: &CMatrix<T>) -> T {
    SortedSvd::new(m).singular_values.first().copied().unwrap_or_else(T::zero)
}

pub fn nuclear_norm<T: Real>(m: &CMatrix<T>) -> T {
    SortedSvd::new(m).singular_values.iter().fold(T::zero(), |acc, &s| acc + s)
}

type Factors<T> = (CMatrix<T>, Vec<T>, CMatrix<T>);

fn bidiagonal_svd<T: Real>(m: &CMatrix<T>) -> Option<Factors<T>> {
    let svd = m.clone().try_svd(true, true, T::machine_eps(), 0)?;
    let u = svd.u?;
    let v = svd.v_t?.adjoint();
    Some((u, svd.singular_values.iter().copied().collect(), v))
}

/// `A ≈ U diag(s) V^H` with orthonormal `U`, `V`, to a few hundred ulps.
fn is_factorisation<T: Real>(m: &CMatrix<T>, (u, s, v): &Factors<T>) -> bool {
    let k = s.len();
    let scale = frobenius(m);
    let tol = T::machine_eps() * T::lit(256.0) * T::from_usize_lossy(m.nrows().max(m.ncols())).sqrt();
    if s.iter().any(|x| !x.is_finite() || *x < T::zero()) {
        return false;
    }
    let eye = CMatrix::<T>::identity(k, k);
    let recon = compose(u, s, v) - m;
    frobenius(&recon) <= tol * scale
        && frobenius(&(u.adjoint() * u - &eye)) <= tol * T::from_usize_lossy(k).sqrt()
        && frobenius(&(v.adjoint() * v - &eye)) <= tol * T::from_usize_lossy(k).sqrt()
}

/// One-sided (Hestenes) Jacobi SVD. Returns thin factors in no particular order.
pub fn jacobi_svd<T: Real>(m: &CMatrix<T>) -> Factors<T> {
    if m.nrows() < m.ncols() {
        let (u, s, v) = jacobi_svd(&m.adjoint());
        return (v, s, u);
    }
    let (rows, cols) = m.shape();
    let mut g = m.clone();
    let mut v = CMatrix::<T>::identity(cols, cols);
    let eps = T::machine_eps();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dotc(&g.column(q));
                let mag = gamma.norm_sqr().sqrt();
                if mag <= eps * (alpha * beta).sqrt() || mag == T::zero() {
                    continue;
                }
                rotated = true;
                // Rotate column q by the phase of γ, then apply a real rotation.
                let phase = gamma.unscale(mag).conj();
                let zeta = (beta - alpha) / (T::lit(2.0) * mag);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut g, p, q, phase, c, s);
                rotate(&mut v, p, q, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s = Vec::with_capacity(cols);
    let mut u = CMatrix::zeros(rows, cols);
    let top = (0..cols).map(|j| g.column(j).norm()).fold(T::zero(), |a, b| a.max(b));
    let mut missing = Vec::new();
    for j in 0..cols {
        let sj = g.column(j).norm();
        s.push(sj);
        if sj > top * eps * T::from_usize_lossy(rows) && sj > T::zero() {
            u.set_column(j, &g.column(j).unscale(sj));
        } else {
            missing.push(j);
        }
    }
    // Columns for (numerically) zero singular values: complete to an orthonormal set.
    for j in missing {
        let mut best = (T::zero(), nalgebra::DVector::<Complex<T>>::zeros(rows));
        for e in 0..rows {
            let mut cand = nalgebra::DVector::<Complex<T>>::zeros(rows);
            cand[e] = Complex::new(T::one(), T::zero());
            for _ in 0..2 {
                for k in 0..cols {
                    let proj = u.column(k).dotc(&cand);
                    cand -= u.column(k) * proj;
                }
            }
            let nrm = cand.norm();
            if nrm > best.0 {
                best = (nrm, cand);
            }
        }
        u.set_column(j, &best.1.unscale(best.0));
    }
    (u, s, v)
}

fn rotate<T: Real>(m: &mut CMatrix<T>, p: usize, q: usize, phase: Complex<T>, c: T, s: T) {
    for i in 0..m.nrows() {
        let a = m[(i, p)];
        let b = m[(i, q)] * phase;
        m[(i, p)] = a.scale(c) - b.scale(s);
        m[(i, q)] = a.scale(s) + b.scale(c);
    }
}

/// Inverse of a Hermitian positive definite matrix.
pub fn hpd_inverse<T: Real>(m: &CMatrix<T>) -> Option<CMatrix<T>> {
    m.clone().cholesky().map(|c| c.inverse())
}

/// Moore–Penrose pseudo-inverse with singular values below `rel_tol·σ₁` dropped.
pub fn pinv<T: Real>(m: &CMatrix<T>, rel_tol: T) -> CMatrix<T> {
    let svd = SortedSvd::new(m);
    let keep = svd.rank(rel_tol);
    let (rows, cols) = m.shape();
    let mut out = CMatrix::zeros(cols, rows);
    for k in 0..keep {
        let inv = T::one() / svd.singular_values[k];
        let vk = svd.v.column(k);
        let uk = svd.u.column(k);
        for c in 0..rows {
            let uc = uk[c].conj().scale(inv);
            for r in 0..cols {
                out[(r, c)] += vk[r] * uc;
            }
        }
    }
    out
}

/// Least-squares solution of `A x ≈ b` via the pseudo-inverse.
pub fn least_squares<T: Real>(a: &CMatrix<T>, b: &DVector<Complex<T>>) -> DVector<Complex<T>> {
    pinv(a, T::machine_eps() * T::lit(64.0)) * b
}

/// `U · diag(s) · V^H`.
pub fn compose<T: Real>(u: &CMatrix<T>, s: &[T], v: &CMatrix<T>) -> CMatrix<T> {
    let mut us = u.clone();
    for (k, &sk) in s.iter().enumerate() {
        us.column_mut(k).scale_mut(sk);
    }
    us * v.adjoint()
}

/// Orthonormal basis of the orthogonal complement of `span(u)` (columns of `u` orthonormal).
pub fn orthogonal_complement<T: Real>(u: &CMatrix<T>) -> CMatrix<T> {
    let n = u.nrows();
    let r = u.ncols();
    let mut aug = CMatrix::zeros(n, r + n);
    aug.columns_mut(0, r).copy_from(u);
    aug.columns_mut(r, n).copy_from(&DMatrix::identity(n, n));
    let q = aug.qr().q();
    q.columns(r, n - r).into_owned()
}
