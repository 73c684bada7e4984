//! Frequency and amplitude estimation from a (recovered) signal.
//!
//! One dimension uses the matrix pencil: the column space of the lifted
//! matrix is spanned by Vandermonde vectors, so dropping its last or first
//! row gives two bases related by `diag(e^{i2πf_l})`. Two dimensions run
//! the same pencil along each axis on horizontally stacked slice lifts and
//! then pair the per-axis frequencies by a least-squares amplitude fit over
//! every candidate combination.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::HankelShape;
use crate::linalg::{least_squares, SortedSvd};
use crate::scalar::{cis_turns, CMatrix, Complex, Real};
use crate::signal::ComplexSignal;

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyEstimate<T: Real> {
    /// One vector per term, sorted lexicographically.
    pub freqs: Vec<Vec<T>>,
    pub amps: Vec<Complex<T>>,
    /// `‖x − synth(estimate)‖ / ‖x‖`.
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimateJson {
    pub freqs: Vec<Vec<f64>>,
    pub amps_re: Vec<f64>,
    pub amps_im: Vec<f64>,
    pub residual: f64,
}

impl<T: Real> FrequencyEstimate<T> {
    pub fn to_json(&self) -> FrequencyEstimateJson {
        FrequencyEstimateJson {
            freqs: self.freqs.iter().map(|f| f.iter().map(|v| v.as_f64()).collect()).collect(),
            amps_re: self.amps.iter().map(|a| a.re.as_f64()).collect(),
            amps_im: self.amps.iter().map(|a| a.im.as_f64()).collect(),
            residual: self.residual.as_f64(),
        }
    }
}

/// Relative singular-value floor for counting distinct per-axis frequencies.
const AXIS_RANK_TOL: f64 = 1e-6;
/// A discarded pairing amplitude above this fraction of the weakest kept one
/// makes the pairing ambiguous.
const PAIRING_RATIO: f64 = 1e-3;

fn angle_to_turns<T: Real>(z: Complex<T>) -> T {
    let mut f = z.im.atan2(z.re) / T::two_pi();
    if f < T::zero() {
        f += T::one();
    }
    if f >= T::one() {
        f = T::zero();
    }
    f
}

/// Shift-invariance eigenvalues of the leading `r` left singular vectors of `h`.
fn pencil_poles<T: Real>(h: &CMatrix<T>, r: usize) -> Result<Vec<T>> {
    let svd = SortedSvd::new(h);
    let (u, _, _) = svd.truncate(r);
    let rows = u.nrows();
    let up = u.rows(0, rows - 1).into_owned();
    let down = u.rows(1, rows - 1).into_owned();
    let psi = crate::linalg::pinv(&up, T::machine_eps() * T::lit(64.0)) * down;
    let schur = psi.try_schur(T::machine_eps(), 10_000).ok_or(Error::Eigen)?;
    let (_, tri) = schur.unpack();
    Ok((0..r).map(|k| angle_to_turns(tri[(k, k)])).collect())
}

fn check_signal<T: Real>(x: &ComplexSignal<T>) -> Result<T> {
    let norm = x.norm();
    if norm <= T::zero() {
        return Err(Error::ZeroMatrix);
    }
    if !x.all_finite() {
        return Err(Error::InvalidModel("signal has non-finite entries".into()));
    }
    Ok(norm)
}

/// Least-squares amplitudes for the given frequency vectors; returns the
/// amplitudes and the relative residual.
fn fit_amplitudes<T: Real>(x: &ComplexSignal<T>, freqs: &[Vec<T>], norm: T) -> (Vec<Complex<T>>, T) {
    let dims = x.dims();
    let n = x.len();
    let mut basis = CMatrix::zeros(n, freqs.len());
    let mut idx = vec![0usize; dims.len()];
    for row in 0..n {
        for (col, f) in freqs.iter().enumerate() {
            let phase = idx.iter().zip(f).fold(T::zero(), |acc, (&k, &fk)| acc + T::from_usize_lossy(k) * fk);
            basis[(row, col)] = cis_turns(phase - phase.floor());
        }
        crate::signal::advance(&mut idx, dims);
    }
    let b = DVector::from_column_slice(x.values());
    let amps = least_squares(&basis, &b);
    let resid = (&basis * &amps - b).norm() / norm;
    (amps.iter().copied().collect(), resid)
}

fn sorted<T: Real>(freqs: Vec<Vec<T>>, amps: Vec<Complex<T>>, residual: T) -> FrequencyEstimate<T> {
    let mut pairs: Vec<_> = freqs.into_iter().zip(amps).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let (freqs, amps) = pairs.into_iter().unzip();
    FrequencyEstimate { freqs, amps, residual }
}

/// Matrix pencil estimate of `r` undamped tones from a 1-D signal.
///
/// `pencil` is the column count of the lifted matrix and defaults to `⌊n/2⌋`.
/// Clustered poles are kept and show up in the residual.
pub fn matrix_pencil<T: Real>(x: &ComplexSignal<T>, r: usize, pencil: Option<usize>) -> Result<FrequencyEstimate<T>> {
    if x.dims().len() != 1 {
        return Err(Error::InvalidShape(format!("expected a 1-D signal, got dims {:?}", x.dims())));
    }
    let n = x.len();
    if r == 0 {
        return Err(Error::InvalidConfig("rank must be positive".into()));
    }
    if n < 2 * r + 1 {
        return Err(Error::TooShort(format!("n = {n} < 2r + 1 = {}", 2 * r + 1)));
    }
    let l = pencil.unwrap_or(n / 2);
    if l < r || l > n - r {
        return Err(Error::InvalidConfig(format!("pencil {l} outside [{r}, {}]", n - r)));
    }
    let norm = check_signal(x)?;
    let shape = HankelShape::standard(n, l)?;
    let poles = pencil_poles(&shape.lift(x)?, r)?;
    let freqs: Vec<Vec<T>> = poles.into_iter().map(|f| vec![f]).collect();
    let (amps, residual) = fit_amplitudes(x, &freqs, norm);
    Ok(sorted(freqs, amps, residual))
}

/// Distinct frequencies along one axis of a 2-D signal, at most `r` of them.
fn axis_frequencies<T: Real>(x: &ComplexSignal<T>, axis: usize, r: usize) -> Result<Vec<T>> {
    let (n0, n1) = (x.dims()[0], x.dims()[1]);
    let (len, count) = if axis == 0 { (n0, n1) } else { (n1, n0) };
    let l = len / 2;
    let rows = len - l + 1;
    let mut stacked = CMatrix::zeros(rows, l * count);
    for s in 0..count {
        for i in 0..rows {
            for j in 0..l {
                let k = i + j;
                let flat = if axis == 0 { k * n1 + s } else { s * n1 + k };
                stacked[(i, s * l + j)] = x.values()[flat];
            }
        }
    }
    let svd = SortedSvd::new(&stacked);
    let k = svd.rank(T::lit(AXIS_RANK_TOL)).clamp(1, r);
    pencil_poles(&stacked, k)
}

/// Two-dimensional estimate of `r` tones.
///
/// Each axis is estimated separately, every combination of per-axis
/// frequencies is fitted jointly, and the `r` strongest combinations are kept
/// and refitted. When a discarded combination is not clearly weaker than the
/// kept ones the pairing is reported as ambiguous.
pub fn estimate_2d<T: Real>(x: &ComplexSignal<T>, r: usize) -> Result<FrequencyEstimate<T>> {
    if x.dims().len() != 2 {
        return Err(Error::InvalidShape(format!("expected a 2-D signal, got dims {:?}", x.dims())));
    }
    if r == 0 {
        return Err(Error::InvalidConfig("rank must be positive".into()));
    }
    let (n0, n1) = (x.dims()[0], x.dims()[1]);
    if n0.min(n1) < 2 * r + 1 {
        return Err(Error::TooShort(format!("dims {:?} need at least {} per axis", x.dims(), 2 * r + 1)));
    }
    let norm = check_signal(x)?;
    let f0 = axis_frequencies(x, 0, r)?;
    let f1 = axis_frequencies(x, 1, r)?;
    let candidates: Vec<Vec<T>> = f0.iter().flat_map(|&a| f1.iter().map(move |&b| vec![a, b])).collect();
    let (amps, _) = fit_amplitudes(x, &candidates, norm);
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| amps[b].norm_sqr().partial_cmp(&amps[a].norm_sqr()).unwrap_or(std::cmp::Ordering::Equal));
    let keep = r.min(candidates.len());
    if candidates.len() > keep {
        let weakest_kept = amps[order[keep - 1]].norm_sqr().sqrt();
        let strongest_dropped = amps[order[keep]].norm_sqr().sqrt();
        if strongest_dropped > T::lit(PAIRING_RATIO) * weakest_kept {
            let significant = order
                .iter()
                .filter(|&&i| amps[i].norm_sqr().sqrt() > T::lit(PAIRING_RATIO) * weakest_kept)
                .map(|&i| (candidates[i][0].as_f64(), candidates[i][1].as_f64()))
                .collect();
            return Err(Error::AmbiguousPairing { candidates: significant });
        }
    }
    let chosen: Vec<Vec<T>> = order[..keep].iter().map(|&i| candidates[i].clone()).collect();
    let (amps, residual) = fit_amplitudes(x, &chosen, norm);
    Ok(sorted(chosen, amps, residual))
}

/// Matches estimated frequencies to reference ones by nearest wrap-around
/// distance and returns the largest frequency and amplitude errors.
pub fn match_errors<T: Real>(
    est: &FrequencyEstimate<T>,
    freqs: &[Vec<T>],
    amps: &[Complex<T>],
) -> (f64, f64) {
    let mut used = vec![false; est.freqs.len()];
    let mut worst_f = 0.0f64;
    let mut worst_a = 0.0f64;
    for (f, a) in freqs.iter().zip(amps) {
        let dist = |g: &Vec<T>| {
            f.iter()
                .zip(g)
                .map(|(x, y)| crate::signal::wrap_distance(x.as_f64(), y.as_f64()))
                .fold(0.0, f64::max)
        };
        let best = (0..est.freqs.len())
            .filter(|&i| !used[i])
            .min_by(|&i, &j| dist(&est.freqs[i]).partial_cmp(&dist(&est.freqs[j])).unwrap());
        match best {
            Some(i) => {
                used[i] = true;
                worst_f = worst_f.max(dist(&est.freqs[i]));
                worst_a = worst_a.max((est.amps[i] - *a).norm_sqr().sqrt().as_f64());
            }
            None => return (f64::INFINITY, f64::INFINITY),
        }
    }
    (worst_f, worst_a)
}
