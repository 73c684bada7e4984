//! Spectrally sparse signals, sampling sets and priors.
//!
//! Tensors are stored flat in row-major order: the multi-index
//! `(k_1, …, k_d)` of a signal with dims `(N_1, …, N_d)` lives at
//! `((k_1·N_2 + k_2)·N_3 + …)·N_d + k_d`. Sample indices refer to this flat
//! layout.

use std::collections::BTreeSet;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{complex_normal, rng_from_seed};
use crate::scalar::{cis_turns, cz, Complex, Real};

/// One sinusoidal component: a frequency vector in `[0,1)^d` and its amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Term<T: Real> {
    pub freq: Vec<T>,
    pub amp: Complex<T>,
}

/// Ground-truth frequencies and amplitudes of a (possibly multi-way) signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel<T: Real> {
    dims: Vec<usize>,
    terms: Vec<Term<T>>,
}

impl<T: Real> SpectralModel<T> {
    pub fn new(dims: Vec<usize>, terms: Vec<Term<T>>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&n| n == 0) {
            return Err(Error::InvalidModel(format!("dims must be positive, got {dims:?}")));
        }
        if terms.is_empty() {
            return Err(Error::InvalidModel("at least one term is required".into()));
        }
        for t in &terms {
            if t.freq.len() != dims.len() {
                return Err(Error::InvalidModel(format!(
                    "frequency vector has {} coordinates for a {}-way signal",
                    t.freq.len(),
                    dims.len()
                )));
            }
            if t.freq.iter().any(|&f| !(f >= T::zero() && f < T::one())) {
                return Err(Error::InvalidModel(format!("frequency {:?} outside [0,1)", t.freq)));
            }
        }
        for (i, a) in terms.iter().enumerate() {
            for b in &terms[i + 1..] {
                if a.freq == b.freq {
                    return Err(Error::InvalidModel(format!("duplicate frequency {:?}", a.freq)));
                }
            }
        }
        Ok(Self { dims, terms })
    }

    /// Single-dimension convenience constructor.
    pub fn one_dim(n: usize, freqs: &[T], amps: &[Complex<T>]) -> Result<Self> {
        if freqs.len() != amps.len() {
            return Err(Error::InvalidModel("frequency/amplitude count mismatch".into()));
        }
        let terms = freqs.iter().zip(amps).map(|(&f, &a)| Term { freq: vec![f], amp: a }).collect();
        Self::new(vec![n], terms)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// Samples `Σ_l amp_l · exp(i2π Σ_j k_j f_{j,l})` on the full grid.
    pub fn synthesize(&self) -> ComplexSignal<T> {
        let total: usize = self.dims.iter().product();
        let mut values = vec![cz(); total];
        let mut idx = vec![0usize; self.dims.len()];
        for v in values.iter_mut() {
            for term in &self.terms {
                let mut phase = T::zero();
                for (k, f) in idx.iter().zip(&term.freq) {
                    let p = T::from_usize_lossy(*k) * *f;
                    phase += p - p.floor();
                }
                *v += term.amp * cis_turns(phase - phase.floor());
            }
            advance(&mut idx, &self.dims);
        }
        ComplexSignal { dims: self.dims.clone(), values }
    }
}

/// Increments a row-major multi-index in place.
pub(crate) fn advance(idx: &mut [usize], dims: &[usize]) {
    for axis in (0..dims.len()).rev() {
        idx[axis] += 1;
        if idx[axis] < dims[axis] {
            return;
        }
        idx[axis] = 0;
    }
}

pub(crate) fn unravel(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for axis in (0..dims.len()).rev() {
        out[axis] = flat % dims[axis];
        flat /= dims[axis];
    }
    out
}

/// Amplitude law for randomly generated models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeLaw {
    /// Every amplitude equals 1.
    #[default]
    Unit,
    /// Modulus 1 with a uniformly random phase.
    RandomPhase,
}

/// Generator for random spectral models with optional wrap-around separation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomModel {
    pub dims: Vec<usize>,
    pub rank: usize,
    /// Minimum wrap-around distance between any two frequency vectors
    /// (max over coordinates). `None` only enforces distinctness.
    #[serde(default)]
    pub min_separation: Option<f64>,
    #[serde(default)]
    pub amplitudes: AmplitudeLaw,
}

impl RandomModel {
    const MAX_ATTEMPTS: usize = 100_000;

    pub fn generate<T: Real>(&self, seed: u64) -> Result<SpectralModel<T>> {
        if self.rank == 0 {
            return Err(Error::InvalidModel("rank must be at least 1".into()));
        }
        let mut rng = rng_from_seed(seed);
        let d = self.dims.len();
        let sep = self.min_separation.unwrap_or(0.0);
        let mut freqs: Vec<Vec<f64>> = Vec::with_capacity(self.rank);
        let mut attempts = 0;
        while freqs.len() < self.rank {
            attempts += 1;
            if attempts > Self::MAX_ATTEMPTS {
                return Err(Error::InvalidModel(format!(
                    "could not place {} frequencies with separation {sep}",
                    self.rank
                )));
            }
            let cand: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let ok = freqs.iter().all(|f| {
                let dist = f
                    .iter()
                    .zip(&cand)
                    .map(|(a, b)| wrap_distance(*a, *b))
                    .fold(0.0, f64::max);
                dist > 0.0 && dist >= sep
            });
            if ok {
                freqs.push(cand);
            }
        }
        let terms = freqs
            .into_iter()
            .map(|f| {
                let amp = match self.amplitudes {
                    AmplitudeLaw::Unit => Complex::new(T::one(), T::zero()),
                    AmplitudeLaw::RandomPhase => cis_turns(T::lit(rng.random::<f64>())),
                };
                Term { freq: f.into_iter().map(T::lit).collect(), amp }
            })
            .collect();
        SpectralModel::new(self.dims.clone(), terms)
    }
}

/// Distance on the unit circle `[0,1)`.
pub fn wrap_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Complex-valued signal or tensor in flat row-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal<T: Real> {
    dims: Vec<usize>,
    values: Vec<Complex<T>>,
}

impl<T: Real> ComplexSignal<T> {
    pub fn new(dims: Vec<usize>, values: Vec<Complex<T>>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.iter().any(|&n| n == 0) || total != values.len() {
            return Err(Error::InvalidShape(format!(
                "{} values for dims {dims:?}",
                values.len()
            )));
        }
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let total = dims.iter().product();
        Self { dims, values: vec![cz(); total] }
    }

    pub fn from_vec(values: Vec<Complex<T>>) -> Self {
        Self { dims: vec![values.len()], values }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()).sqrt()
    }

    pub fn distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc + (*a - *b).norm_sqr())
            .sqrt()
    }

    /// `‖self − truth‖₂ / ‖truth‖₂`.
    pub fn relative_error(&self, truth: &Self) -> T {
        let denom = truth.norm();
        if denom == T::zero() {
            return self.norm();
        }
        self.distance(truth) / denom
    }

    pub fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if self.dims != dims {
            return Err(Error::DimensionMismatch { expected: dims.to_vec(), got: self.dims.clone() });
        }
        Ok(())
    }

    pub fn map<F: Fn(Complex<T>) -> Complex<T>>(&self, f: F) -> Self {
        Self { dims: self.dims.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_with<F: Fn(Complex<T>, Complex<T>) -> Complex<T>>(&self, other: &Self, f: F) -> Self {
        Self {
            dims: self.dims.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn to_json(&self) -> SignalJson {
        SignalJson {
            dims: self.dims.clone(),
            re: self.values.iter().map(|v| v.re.as_f64()).collect(),
            im: self.values.iter().map(|v| v.im.as_f64()).collect(),
        }
    }

    pub fn from_json(json: &SignalJson) -> Result<Self> {
        if json.re.len() != json.im.len() {
            return Err(Error::Json("re and im lengths differ".into()));
        }
        let values =
            json.re.iter().zip(&json.im).map(|(&r, &i)| Complex::new(T::lit(r), T::lit(i))).collect();
        Self::new(json.dims.clone(), values)
    }
}

/// Wire format `{"dims":[...], "re":[...], "im":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalJson {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum SamplingLaw {
    /// i.i.d. uniform with replacement; indices may repeat.
    #[serde(rename = "iid")]
    Iid,
    /// Uniform without replacement.
    #[default]
    #[serde(rename = "norep")]
    WithoutReplacement,
}

/// Observation multiset `Ω` over flat signal indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    dims: Vec<usize>,
    law: SamplingLaw,
    indices: Vec<usize>,
}

impl SampleSet {
    pub fn new(dims: Vec<usize>, law: SamplingLaw, indices: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if let Some(&bad) = indices.iter().find(|&&k| k >= total) {
            return Err(Error::IndexOutOfRange { index: bad, size: total });
        }
        if law == SamplingLaw::WithoutReplacement {
            let distinct: BTreeSet<_> = indices.iter().collect();
            if distinct.len() != indices.len() {
                return Err(Error::InvalidConfig("repeated index under without-replacement law".into()));
            }
        }
        Ok(Self { dims, law, indices })
    }

    /// Every index exactly once.
    pub fn full(dims: Vec<usize>) -> Self {
        let total = dims.iter().product();
        Self { dims, law: SamplingLaw::WithoutReplacement, indices: (0..total).collect() }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn law(&self) -> SamplingLaw {
        self.law
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Number of draws `m`, counting repetitions.
    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn size(&self) -> usize {
        self.dims.iter().product()
    }

    /// Sorted distinct support.
    pub fn distinct(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.indices.iter().copied().collect();
        set.into_iter().collect()
    }

    pub fn indicator(&self) -> Vec<bool> {
        let mut out = vec![false; self.size()];
        for &k in &self.indices {
            out[k] = true;
        }
        out
    }

    /// Multiplicity of every flat index.
    pub fn counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.size()];
        for &k in &self.indices {
            out[k] += 1;
        }
        out
    }
}

/// Draws `m` indices over `∏ dims` under the given law.
pub fn draw_samples(dims: &[usize], m: usize, law: SamplingLaw, seed: u64) -> Result<SampleSet> {
    if m == 0 {
        return Err(Error::InvalidConfig("m must be at least 1".into()));
    }
    let total: usize = dims.iter().product();
    let mut rng = rng_from_seed(seed);
    let indices = match law {
        SamplingLaw::Iid => (0..m).map(|_| rng.random_range(0..total)).collect(),
        SamplingLaw::WithoutReplacement => {
            if m > total {
                return Err(Error::TooManySamples { m, total });
            }
            rand::seq::index::sample(&mut rng, total, m).into_vec()
        }
    };
    Ok(SampleSet { dims: dims.to_vec(), law, indices })
}

/// `P_Ω`: keeps entries on the distinct support of `omega`, zeroes the rest.
pub fn mask<T: Real>(signal: &ComplexSignal<T>, omega: &SampleSet) -> Result<ComplexSignal<T>> {
    signal.check_dims(omega.dims())?;
    let keep = omega.indicator();
    let values =
        signal.values.iter().zip(&keep).map(|(v, &k)| if k { *v } else { cz() }).collect();
    Ok(ComplexSignal { dims: signal.dims.clone(), values })
}

/// Reference signal `φ = x + σ·n` with `Re n, Im n ~ N(0,1)` i.i.d.
pub fn make_prior<T: Real>(x: &ComplexSignal<T>, sigma: T, seed: u64) -> ComplexSignal<T> {
    let mut rng = rng_from_seed(seed);
    let values = x
        .values
        .iter()
        .map(|v| {
            let n: Complex<T> = complex_normal(&mut rng);
            *v + n.scale(sigma)
        })
        .collect();
    ComplexSignal { dims: x.dims.clone(), values }
}
