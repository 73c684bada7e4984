//! Hankel lifting operators.
//!
//! A [`HankelShape`] fixes the geometry of the lift: signal dims
//! `N_1..N_d`, pencil parameters `n_1..n_d` (the per-dimension column
//! counts) and the variant. The lifted matrix has
//! `n1 = ∏ rows_k` rows and `n2 = ∏ n_k` columns where
//! `rows_k = N_k − n_k + 1` for the standard lift and `rows_k = N_k` for the
//! wrap-around lift. Row and column multi-indices are flattened with the
//! *last* dimension most significant, which reproduces the recursive
//! block-Hankel layout: block `(i_d, j_d)` is the `(d−1)`-level lift of the
//! slice `X(…, i_d + j_d)`.
//!
//! Entry `(row, col)` maps to the tensor index `(i_k + j_k)_k` (standard) or
//! `((i_k + j_k) mod N_k)_k` (wrap-around). Every operator below is driven by
//! that position map, and the anti-diagonal weights `w_k` are counted from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cz, CMatrix, Complex, Real};
use crate::signal::{ComplexSignal, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Standard,
    WrapAround,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HankelShape {
    dims: Vec<usize>,
    pencils: Vec<usize>,
    variant: Variant,
    rows: usize,
    cols: usize,
    /// Flat signal index of lifted entry `(r, c)`, stored at `r * cols + c`.
    positions: Vec<usize>,
    weights: Vec<usize>,
}

impl HankelShape {
    pub fn new(dims: Vec<usize>, pencils: Vec<usize>, variant: Variant) -> Result<Self> {
        if dims.is_empty() || dims.len() != pencils.len() {
            return Err(Error::InvalidShape(format!("dims {dims:?} vs pencils {pencils:?}")));
        }
        for (&n, &p) in dims.iter().zip(&pencils) {
            if p == 0 || p > n {
                return Err(Error::InvalidShape(format!("pencil {p} outside [1, {n}]")));
            }
        }
        let row_dims: Vec<usize> = dims
            .iter()
            .zip(&pencils)
            .map(|(&n, &p)| match variant {
                Variant::Standard => n - p + 1,
                Variant::WrapAround => n,
            })
            .collect();
        let rows: usize = row_dims.iter().product();
        let cols: usize = pencils.iter().product();
        let total: usize = dims.iter().product();

        // Per-dimension tensor index for every (row, col) digit pair.
        let row_digits = digits_last_major(&row_dims, rows);
        let col_digits = digits_last_major(&pencils, cols);
        let mut strides = vec![1usize; dims.len()];
        for axis in (0..dims.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * dims[axis + 1];
        }
        let mut positions = Vec::with_capacity(rows * cols);
        for ri in &row_digits {
            for ci in &col_digits {
                let mut flat = 0;
                for axis in 0..dims.len() {
                    let mut k = ri[axis] + ci[axis];
                    if variant == Variant::WrapAround {
                        k %= dims[axis];
                    }
                    flat += k * strides[axis];
                }
                positions.push(flat);
            }
        }
        let mut weights = vec![0usize; total];
        for &p in &positions {
            weights[p] += 1;
        }
        Ok(Self { dims, pencils, variant, rows, cols, positions, weights })
    }

    /// Standard 1-D lift of length `n` with pencil `d` (an `(n−d+1) × d` matrix).
    pub fn standard(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![n], vec![d], Variant::Standard)
    }

    /// Wrap-around 1-D lift (an `n × d` matrix).
    pub fn wrap_around(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![n], vec![d], Variant::WrapAround)
    }

    /// Near-square lift: pencil `⌊N_k/2⌋ + 1` in every dimension.
    pub fn with_default_pencils(dims: Vec<usize>, variant: Variant) -> Result<Self> {
        let pencils = dims.iter().map(|&n| default_pencil(n)).collect();
        Self::new(dims, pencils, variant)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn pencils(&self) -> &[usize] {
        &self.pencils
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `n1`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `n2`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Signal length `n = ∏ N_k`.
    pub fn signal_len(&self) -> usize {
        self.weights.len()
    }

    /// Anti-diagonal multiplicities `w_k`, indexed by flat signal index.
    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    #[inline]
    pub fn position(&self, row: usize, col: usize) -> usize {
        self.positions[row * self.cols + col]
    }

    /// `w(k_1..k_d) = ∏_l w_l`, each factor counted by enumerating the
    /// per-dimension index pairs. Independent of the position map.
    pub fn weight_by_product(&self, flat: usize) -> usize {
        let idx = crate::signal::unravel(flat, &self.dims);
        let mut w = 1;
        for axis in 0..self.dims.len() {
            let n = self.dims[axis];
            let p = self.pencils[axis];
            let rows = match self.variant {
                Variant::Standard => n - p + 1,
                Variant::WrapAround => n,
            };
            let mut count = 0;
            for i in 0..rows {
                for j in 0..p {
                    let k = match self.variant {
                        Variant::Standard => i + j,
                        Variant::WrapAround => (i + j) % n,
                    };
                    if k == idx[axis] {
                        count += 1;
                    }
                }
            }
            w *= count;
        }
        w
    }

    fn check_matrix<T: Real>(&self, m: &CMatrix<T>) -> Result<()> {
        if m.shape() != (self.rows, self.cols) {
            return Err(Error::DimensionMismatch {
                expected: vec![self.rows, self.cols],
                got: vec![m.nrows(), m.ncols()],
            });
        }
        Ok(())
    }

    /// Lifts a signal; see [`lift`].
    pub fn lift<T: Real>(&self, x: &ComplexSignal<T>) -> Result<CMatrix<T>> {
        lift(x, self)
    }

    /// Lifts raw values without a dims check. `values.len()` must equal `n`.
    pub(crate) fn lift_values<T: Real>(&self, values: &[Complex<T>]) -> CMatrix<T> {
        CMatrix::from_fn(self.rows, self.cols, |r, c| values[self.position(r, c)])
    }

    /// Sums of `M` over each anti-diagonal class (the adjoint `H*`).
    pub(crate) fn anti_diagonal_sums<T: Real>(&self, m: &CMatrix<T>) -> Vec<Complex<T>> {
        let mut sums = vec![cz(); self.signal_len()];
        for c in 0..self.cols {
            for r in 0..self.rows {
                sums[self.position(r, c)] += m[(r, c)];
            }
        }
        sums
    }

    /// Weighted anti-diagonal averages (`H†`).
    pub(crate) fn anti_diagonal_means<T: Real>(&self, m: &CMatrix<T>) -> Vec<Complex<T>> {
        let mut sums = self.anti_diagonal_sums(m);
        for (s, &w) in sums.iter_mut().zip(&self.weights) {
            *s = s.unscale(T::from_usize_lossy(w));
        }
        sums
    }
}

fn digits_last_major(radices: &[usize], count: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    let mut cur = vec![0usize; radices.len()];
    for _ in 0..count {
        out.push(cur.clone());
        for axis in 0..radices.len() {
            cur[axis] += 1;
            if cur[axis] < radices[axis] {
                break;
            }
            cur[axis] = 0;
        }
    }
    out
}

pub fn default_pencil(n: usize) -> usize {
    n / 2 + 1
}

/// `H(x)`: standard, wrap-around or multi-level lift depending on `shape`.
pub fn lift<T: Real>(x: &ComplexSignal<T>, shape: &HankelShape) -> Result<CMatrix<T>> {
    x.check_dims(shape.dims())?;
    Ok(shape.lift_values(x.values()))
}

/// `H†(M)`: anti-diagonal averages weighted by `1/w_k`.
pub fn unlift<T: Real>(m: &CMatrix<T>, shape: &HankelShape) -> Result<ComplexSignal<T>> {
    shape.check_matrix(m)?;
    ComplexSignal::new(shape.dims().to_vec(), shape.anti_diagonal_means(m))
}

/// `H*(M)`: unweighted anti-diagonal sums, the adjoint of [`lift`].
pub fn unlift_adjoint<T: Real>(m: &CMatrix<T>, shape: &HankelShape) -> Result<ComplexSignal<T>> {
    shape.check_matrix(m)?;
    ComplexSignal::new(shape.dims().to_vec(), shape.anti_diagonal_sums(m))
}

/// `A_k = H(e_k) / √w_k`.
pub fn basis_matrix<T: Real>(k: usize, shape: &HankelShape) -> Result<CMatrix<T>> {
    let n = shape.signal_len();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, size: n });
    }
    let scale = T::one() / T::from_usize_lossy(shape.weights()[k]).sqrt();
    Ok(CMatrix::from_fn(shape.rows(), shape.cols(), |r, c| {
        if shape.position(r, c) == k {
            Complex::new(scale, T::zero())
        } else {
            cz()
        }
    }))
}

/// Coefficients `⟨X, A_k⟩` for every `k`.
pub fn basis_coefficients<T: Real>(m: &CMatrix<T>, shape: &HankelShape) -> Result<Vec<Complex<T>>> {
    shape.check_matrix(m)?;
    Ok(shape
        .anti_diagonal_sums(m)
        .into_iter()
        .zip(shape.weights())
        .map(|(s, &w)| s.unscale(T::from_usize_lossy(w).sqrt()))
        .collect())
}

/// `𝒜(X) = Σ_k ⟨X, A_k⟩ A_k = H(H†(X))`, the projection onto Hankel matrices.
pub fn hankel_project<T: Real>(m: &CMatrix<T>, shape: &HankelShape) -> Result<CMatrix<T>> {
    shape.check_matrix(m)?;
    Ok(shape.lift_values(&shape.anti_diagonal_means(m)))
}

/// `𝒜^⊥(X) = X − 𝒜(X)`.
pub fn hankel_project_complement<T: Real>(m: &CMatrix<T>, shape: &HankelShape) -> Result<CMatrix<T>> {
    Ok(m - hankel_project(m, shape)?)
}

/// `𝒜_Ω` (weighted: sums over the multiset) or `𝒜'_Ω` (distinct support).
pub fn sampling_op<T: Real>(
    m: &CMatrix<T>,
    omega: &SampleSet,
    shape: &HankelShape,
    weighted: bool,
) -> Result<CMatrix<T>> {
    shape.check_matrix(m)?;
    if omega.dims() != shape.dims() {
        return Err(Error::DimensionMismatch { expected: shape.dims().to_vec(), got: omega.dims().to_vec() });
    }
    let mut means = shape.anti_diagonal_means(m);
    let counts = omega.counts();
    for (v, &c) in means.iter_mut().zip(&counts) {
        let factor = if weighted { c } else { usize::from(c > 0) };
        *v = v.scale(T::from_usize_lossy(factor));
    }
    Ok(shape.lift_values(&means))
}

/// Serialized matrix: `{"dims":[rows, cols], "re":[...], "im":[...]}`, row-major.
pub fn matrix_to_json<T: Real>(m: &CMatrix<T>) -> crate::signal::SignalJson {
    let (rows, cols) = m.shape();
    let mut re = Vec::with_capacity(rows * cols);
    let mut im = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            re.push(m[(r, c)].re.as_f64());
            im.push(m[(r, c)].im.as_f64());
        }
    }
    crate::signal::SignalJson { dims: vec![rows, cols], re, im }
}

pub fn matrix_from_json<T: Real>(json: &crate::signal::SignalJson) -> Result<CMatrix<T>> {
    if json.dims.len() != 2 || json.re.len() != json.dims[0] * json.dims[1] || json.im.len() != json.re.len() {
        return Err(Error::Json("matrix json must carry dims [rows, cols] and rows*cols values".into()));
    }
    let (rows, cols) = (json.dims[0], json.dims[1]);
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        Complex::new(T::lit(json.re[r * cols + c]), T::lit(json.im[r * cols + c]))
    }))
}
