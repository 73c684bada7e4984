//! Monte-Carlo experiment harness: single instances, success-rate curves,
//! phase transitions and runtime tables.
//!
//! Every trial derives its randomness from `(spec.seed, trial index)`, every
//! record carries the resulting trial seed, and each trial runs all requested
//! solvers on the same instance. Trials run on the current rayon pool;
//! records are sorted by seed before aggregation so the CSV payload does not
//! depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{theorem1_report, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::hankel::{HankelShape, Variant};
use crate::prior::{build_prior_lift, PriorLift};
use crate::rng::derive_seed;
use crate::signal::{
    draw_samples, make_prior, mask, AmplitudeLaw, ComplexSignal, RandomModel, SampleSet, SamplingLaw, SignalJson,
    SpectralModel,
};
use crate::solvers::{
    convex_recover, recover_with_prior, AdmmConfig, ConvexConfig, RecoveryResult, RecoveryResultJson,
};
use crate::spectral::{estimate_2d, matrix_pencil, FrequencyEstimateJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Single,
    SuccessCurve,
    PhaseTransition,
    Runtime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Admm,
    Convex,
    VanillaAdmm,
    VanillaConvex,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] =
        [SolverKind::Admm, SolverKind::Convex, SolverKind::VanillaAdmm, SolverKind::VanillaConvex];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Admm => "admm",
            SolverKind::Convex => "convex",
            SolverKind::VanillaAdmm => "vanilla-admm",
            SolverKind::VanillaConvex => "vanilla-convex",
        }
    }

    pub fn uses_prior(self) -> bool {
        matches!(self, SolverKind::Admm | SolverKind::Convex)
    }

    pub fn is_convex(self) -> bool {
        matches!(self, SolverKind::Convex | SolverKind::VanillaConvex)
    }

    /// Default success threshold: tighter for the convex solver.
    pub fn default_eta(self) -> f64 {
        if self.is_convex() {
            1e-4
        } else {
            1e-2
        }
    }

    /// The convex solver with the same prior setting.
    pub fn convex_counterpart(self) -> SolverKind {
        if self.uses_prior() {
            SolverKind::Convex
        } else {
            SolverKind::VanillaConvex
        }
    }
}

/// Factorised-solver settings shared by every trial; rank, `λ` and seed come
/// from the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmSettings {
    pub mu: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub eps_init: Option<f64>,
    pub lmafit_iters: usize,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        let base = AdmmConfig::new(1);
        Self {
            mu: base.mu,
            max_iters: base.max_iters,
            tol: base.tol,
            eps_init: base.eps_init,
            lmafit_iters: base.lmafit_iters,
        }
    }
}

fn default_solvers() -> Vec<SolverKind> {
    SolverKind::ALL.to_vec()
}
fn default_trials() -> usize {
    50
}
fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub kind: ExperimentKind,
    /// `[n]` for 1-D signals, `[N₁, N₂, …]` for tensors.
    pub dims: Vec<usize>,
    pub rank: usize,
    #[serde(default)]
    pub amplitudes: AmplitudeLaw,
    #[serde(default)]
    pub min_separation: Option<f64>,
    /// Sampling levels as fractions of the signal size (`m = round(p·N)`).
    #[serde(default)]
    pub probs: Vec<f64>,
    /// Sampling levels as sample counts.
    #[serde(default)]
    pub ms: Vec<usize>,
    /// Prior perturbation level.
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverKind>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Overrides the per-solver success threshold.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub pencils: Option<Vec<usize>>,
    #[serde(default)]
    pub law: SamplingLaw,
    #[serde(default)]
    pub admm: AdmmSettings,
    #[serde(default)]
    pub convex: ConvexConfig,
    /// Signal sizes for runtime tables; empty means `[dims]`.
    #[serde(default)]
    pub sizes: Vec<Vec<usize>>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, dims: Vec<usize>, rank: usize) -> Self {
        Self {
            kind,
            dims,
            rank,
            amplitudes: AmplitudeLaw::default(),
            min_separation: None,
            probs: Vec::new(),
            ms: Vec::new(),
            sigma: 0.0,
            solvers: default_solvers(),
            trials: default_trials(),
            eta: None,
            seed: 0,
            lambda: default_lambda(),
            variant: Variant::default(),
            pencils: None,
            law: SamplingLaw::default(),
            admm: AdmmSettings::default(),
            convex: ConvexConfig::default(),
            sizes: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn eta(&self, solver: SolverKind) -> f64 {
        self.eta.unwrap_or_else(|| solver.default_eta())
    }

    pub fn sizes(&self) -> Vec<Vec<usize>> {
        if self.sizes.is_empty() {
            vec![self.dims.clone()]
        } else {
            self.sizes.clone()
        }
    }

    pub fn levels(&self) -> Vec<Level> {
        if self.probs.is_empty() {
            self.ms.iter().map(|&m| Level::Count(m)).collect()
        } else {
            self.probs.iter().map(|&p| Level::Prob(p)).collect()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if matches!(self.eta, Some(e) if !(e > 0.0)) {
            return bad("eta must be positive".into());
        }
        if self.rank == 0 {
            return bad("rank must be at least 1".into());
        }
        if self.solvers.is_empty() {
            return bad("solver set is empty".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be finite and non-negative".into());
        }
        if !self.lambda.is_finite() {
            return bad("lambda must be finite".into());
        }
        if !self.probs.is_empty() && !self.ms.is_empty() {
            return bad("give either probs or ms, not both".into());
        }
        if self.probs.is_empty() && self.ms.is_empty() {
            return bad("sampling sweep is empty".into());
        }
        if let Some(p) = self.probs.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return bad(format!("sampling probability {p} outside (0, 1]"));
        }
        for size in self.sizes() {
            if size.is_empty() || size.contains(&0) {
                return bad(format!("invalid signal dims {size:?}"));
            }
            let total: usize = size.iter().product();
            for level in self.levels() {
                let m = level.samples(total);
                if m == 0 || (self.law == SamplingLaw::WithoutReplacement && m > total) {
                    return bad(format!("cannot draw {m} samples from {total} positions"));
                }
            }
            self.shape_for(&size)?;
        }
        let admm = self.admm_config();
        admm.validate()?;
        self.convex.validate()
    }

    fn shape_for(&self, dims: &[usize]) -> Result<HankelShape> {
        match &self.pencils {
            Some(p) if self.sizes.is_empty() => HankelShape::new(dims.to_vec(), p.clone(), self.variant),
            _ => HankelShape::with_default_pencils(dims.to_vec(), self.variant),
        }
    }

    fn admm_config(&self) -> AdmmConfig {
        AdmmConfig {
            lambda: self.lambda,
            mu: self.admm.mu,
            rank: self.rank,
            max_iters: self.admm.max_iters,
            tol: self.admm.tol,
            eps_init: self.admm.eps_init,
            seed: 0,
            lmafit_iters: self.admm.lmafit_iters,
        }
    }

    fn expect_kind(&self, kind: ExperimentKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidConfig(format!("spec kind {:?} where {:?} was expected", self.kind, kind)));
        }
        self.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    Prob(f64),
    Count(usize),
}

impl Level {
    pub fn samples(self, total: usize) -> usize {
        match self {
            Level::Prob(p) => ((p * total as f64).round() as usize).max(1),
            Level::Count(m) => m,
        }
    }

    fn prob(self, total: usize) -> f64 {
        match self {
            Level::Prob(p) => p,
            Level::Count(m) => m as f64 / total as f64,
        }
    }
}

/// One random problem: truth, prior and samples.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub model: SpectralModel<f64>,
    pub x: ComplexSignal<f64>,
    pub phi: ComplexSignal<f64>,
    pub omega: SampleSet,
    pub obs: ComplexSignal<f64>,
    pub shape: HankelShape,
}

impl Instance {
    /// Rebuilds the instance of a trial. `seed` is the trial seed stored in
    /// each record; the same seed gives the same truth and prior at every
    /// sampling level.
    pub fn build(spec: &ExperimentSpec, dims: &[usize], seed: u64, level: Level) -> Result<Self> {
        let generator = RandomModel {
            dims: dims.to_vec(),
            rank: spec.rank,
            min_separation: spec.min_separation,
            amplitudes: spec.amplitudes,
        };
        let model = generator.generate::<f64>(derive_seed(seed, 0))?;
        let x = model.synthesize();
        let phi = make_prior(&x, spec.sigma, derive_seed(seed, 1));
        let total: usize = dims.iter().product();
        let omega = draw_samples(dims, level.samples(total), spec.law, derive_seed(seed, 2))?;
        let obs = mask(&x, &omega)?;
        let shape = spec.shape_for(dims)?;
        Ok(Self { seed, model, x, phi, omega, obs, shape })
    }

    pub fn solve(&self, spec: &ExperimentSpec, solver: SolverKind) -> Result<RecoveryResult<f64>> {
        let mut cfg = spec.admm_config();
        cfg.seed = derive_seed(self.seed, 3);
        match solver {
            SolverKind::Admm => recover_with_prior(&self.obs, &self.omega, &self.shape, Some(&self.phi), &cfg),
            SolverKind::VanillaAdmm => recover_with_prior(&self.obs, &self.omega, &self.shape, None, &cfg),
            SolverKind::Convex => {
                let prior = build_prior_lift(&self.phi, &self.shape, spec.lambda, spec.rank)?;
                convex_recover(&self.obs, &self.omega, &self.shape, &prior, None, &spec.convex)
            }
            SolverKind::VanillaConvex => {
                let prior = PriorLift::zero(&self.shape);
                convex_recover(&self.obs, &self.omega, &self.shape, &prior, None, &spec.convex)
            }
        }
    }
}

/// Outcome of one solver on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub trial: usize,
    pub dims: Vec<usize>,
    pub prob: f64,
    pub m: usize,
    pub solver: SolverKind,
    pub rel_err: Option<f64>,
    pub success: bool,
    pub converged: bool,
    pub iters: usize,
    pub wall_time: f64,
    pub diverged: bool,
    pub error: Option<String>,
}

/// Aggregate over the trials of one (size, level, solver) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub dims: Vec<usize>,
    pub prob: f64,
    pub m: usize,
    pub solver: SolverKind,
    pub success_rate: f64,
    /// Mean over trials that produced an estimate; `NaN` when none did.
    pub mean_err: f64,
    pub mean_wall_time: f64,
    pub median_wall_time: f64,
    pub trials: usize,
    pub diverged: usize,
    /// Median time of the convex solver with the same prior setting divided
    /// by this solver's median time, when both are present.
    pub speedup_vs_convex: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub law: SamplingLaw,
    pub spec: ExperimentSpec,
    pub cells: Vec<CellSummary>,
    pub records: Vec<TrialRecord>,
}

impl ExperimentResult {
    pub fn any_diverged(&self) -> bool {
        self.records.iter().any(|r| r.diverged)
    }

    pub fn cell(&self, dims: &[usize], m: usize, solver: SolverKind) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.dims == dims && c.m == m && c.solver == solver)
    }

    /// CSV payload. Curves and phase transitions carry no timing columns, so
    /// reruns with the same spec produce identical bytes.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Json(e.to_string());
        let fmt = |v: f64| format!("{v}");
        let sci = |v: f64| format!("{v:e}");
        match self.kind {
            ExperimentKind::SuccessCurve | ExperimentKind::Single => {
                w.write_record(["prob", "solver", "success_rate", "mean_err", "trials"]).map_err(err)?;
                for c in &self.cells {
                    w.write_record([
                        fmt(c.prob),
                        c.solver.name().to_string(),
                        fmt(c.success_rate),
                        sci(c.mean_err),
                        c.trials.to_string(),
                    ])
                    .map_err(err)?;
                }
            }
            ExperimentKind::PhaseTransition => {
                w.write_record(["m", "solver", "success_rate", "mean_err", "trials"]).map_err(err)?;
                for c in &self.cells {
                    w.write_record([
                        c.m.to_string(),
                        c.solver.name().to_string(),
                        fmt(c.success_rate),
                        sci(c.mean_err),
                        c.trials.to_string(),
                    ])
                    .map_err(err)?;
                }
            }
            ExperimentKind::Runtime => {
                w.write_record(["size", "m", "solver", "median_wall_time", "speedup_vs_convex", "mean_err", "trials"])
                    .map_err(err)?;
                for c in &self.cells {
                    let size = c.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
                    w.write_record([
                        size,
                        c.m.to_string(),
                        c.solver.name().to_string(),
                        sci(c.median_wall_time),
                        c.speedup_vs_convex.map(fmt).unwrap_or_default(),
                        sci(c.mean_err),
                        c.trials.to_string(),
                    ])
                    .map_err(err)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Json(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Json(e.to_string()))
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn run_trial(
    spec: &ExperimentSpec,
    dims: &[usize],
    level: Level,
    trial: usize,
) -> Vec<TrialRecord> {
    let seed = derive_seed(spec.seed, trial as u64);
    let total: usize = dims.iter().product();
    let base = |solver| TrialRecord {
        seed,
        trial,
        dims: dims.to_vec(),
        prob: level.prob(total),
        m: level.samples(total),
        solver,
        rel_err: None,
        success: false,
        converged: false,
        iters: 0,
        wall_time: 0.0,
        diverged: false,
        error: None,
    };
    let instance = match Instance::build(spec, dims, seed, level) {
        Ok(i) => i,
        Err(e) => {
            return spec.solvers.iter().map(|&s| TrialRecord { error: Some(e.to_string()), ..base(s) }).collect();
        }
    };
    spec.solvers
        .iter()
        .map(|&solver| {
            let mut rec = base(solver);
            match instance.solve(spec, solver) {
                Ok(res) => {
                    let err = res.z.relative_error(&instance.x);
                    rec.rel_err = Some(err);
                    rec.success = err < spec.eta(solver);
                    rec.converged = res.converged;
                    rec.iters = res.iters;
                    rec.wall_time = res.wall_time;
                }
                Err(e) => {
                    rec.diverged = matches!(e, Error::Diverged { .. });
                    rec.error = Some(e.to_string());
                }
            }
            rec
        })
        .collect()
}

fn run_grid(spec: &ExperimentSpec, sizes: &[Vec<usize>]) -> ExperimentResult {
    let levels = spec.levels();
    let mut jobs = Vec::new();
    for (si, dims) in sizes.iter().enumerate() {
        for (li, &level) in levels.iter().enumerate() {
            for t in 0..spec.trials {
                jobs.push((si, li, dims.clone(), level, t));
            }
        }
    }
    let mut tagged: Vec<(usize, usize, TrialRecord)> = jobs
        .into_par_iter()
        .flat_map_iter(|(si, li, dims, level, t)| {
            run_trial(spec, &dims, level, t).into_iter().map(move |r| (si, li, r))
        })
        .collect();
    let solver_pos = |s: SolverKind| spec.solvers.iter().position(|&x| x == s).unwrap_or(usize::MAX);
    tagged.sort_by_key(|(si, li, r)| (*si, *li, r.seed, r.trial, solver_pos(r.solver)));

    let mut cells = Vec::new();
    for (si, dims) in sizes.iter().enumerate() {
        let total: usize = dims.iter().product();
        for (li, &level) in levels.iter().enumerate() {
            let group: Vec<&TrialRecord> =
                tagged.iter().filter(|(s, l, _)| *s == si && *l == li).map(|(_, _, r)| r).collect();
            let medians: Vec<(SolverKind, f64)> = spec
                .solvers
                .iter()
                .map(|&s| (s, median(group.iter().filter(|r| r.solver == s).map(|r| r.wall_time).collect())))
                .collect();
            for &solver in &spec.solvers {
                let recs: Vec<&&TrialRecord> = group.iter().filter(|r| r.solver == solver).collect();
                let n = recs.len();
                let errs: Vec<f64> = recs.iter().filter_map(|r| r.rel_err).collect();
                let times: Vec<f64> = recs.iter().map(|r| r.wall_time).collect();
                let own = medians.iter().find(|(s, _)| *s == solver).map(|m| m.1).unwrap_or(f64::NAN);
                let convex = medians.iter().find(|(s, _)| *s == solver.convex_counterpart()).map(|m| m.1);
                cells.push(CellSummary {
                    dims: dims.clone(),
                    prob: level.prob(total),
                    m: level.samples(total),
                    solver,
                    success_rate: recs.iter().filter(|r| r.success).count() as f64 / n.max(1) as f64,
                    mean_err: if errs.is_empty() { f64::NAN } else { errs.iter().sum::<f64>() / errs.len() as f64 },
                    mean_wall_time: times.iter().sum::<f64>() / n.max(1) as f64,
                    median_wall_time: median(times),
                    trials: n,
                    diverged: recs.iter().filter(|r| r.diverged).count(),
                    speedup_vs_convex: convex.filter(|c| c.is_finite() && own > 0.0).map(|c| c / own),
                });
            }
        }
    }
    let mut records: Vec<TrialRecord> = tagged.into_iter().map(|(_, _, r)| r).collect();
    records.sort_by_key(|r| r.seed);
    ExperimentResult { kind: spec.kind, law: spec.law, spec: spec.clone(), cells, records }
}

/// Success rate against sampling level for each solver.
pub fn run_success_curve(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.expect_kind(ExperimentKind::SuccessCurve)?;
    Ok(run_grid(spec, &[spec.dims.clone()]))
}

/// Success rate against sample count for each solver.
pub fn run_phase_transition(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.expect_kind(ExperimentKind::PhaseTransition)?;
    Ok(run_grid(spec, &[spec.dims.clone()]))
}

/// Wall time per solver for each signal size and sampling level.
pub fn run_runtime(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.expect_kind(ExperimentKind::Runtime)?;
    Ok(run_grid(spec, &spec.sizes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOutput {
    pub solver: SolverKind,
    pub eta: f64,
    pub rel_err: Option<f64>,
    pub success: bool,
    pub result: Option<RecoveryResultJson>,
    pub estimate: Option<FrequencyEstimateJson>,
    pub estimate_error: Option<String>,
    pub diverged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleReport {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub m: usize,
    pub truth: SignalJson,
    pub truth_freqs: Vec<Vec<f64>>,
    pub prior: SignalJson,
    pub omega: SampleSet,
    pub solvers: Vec<SolverOutput>,
    pub diagnostics: Option<DiagnosticsReport>,
    pub diagnostics_error: Option<String>,
}

impl SingleReport {
    pub fn any_diverged(&self) -> bool {
        self.solvers.iter().any(|s| s.diverged)
    }

    /// Same layout as a one-trial success curve.
    pub fn to_result(&self, spec: &ExperimentSpec) -> ExperimentResult {
        let total: usize = self.dims.iter().product();
        let records: Vec<TrialRecord> = self
            .solvers
            .iter()
            .map(|s| TrialRecord {
                seed: self.seed,
                trial: 0,
                dims: self.dims.clone(),
                prob: self.m as f64 / total as f64,
                m: self.m,
                solver: s.solver,
                rel_err: s.rel_err,
                success: s.success,
                converged: s.result.as_ref().is_some_and(|r| r.converged),
                iters: s.result.as_ref().map_or(0, |r| r.iters),
                wall_time: s.result.as_ref().map_or(0.0, |r| r.wall_time),
                diverged: s.diverged,
                error: s.error.clone(),
            })
            .collect();
        let cells = records
            .iter()
            .map(|r| CellSummary {
                dims: r.dims.clone(),
                prob: r.prob,
                m: r.m,
                solver: r.solver,
                success_rate: if r.success { 1.0 } else { 0.0 },
                mean_err: r.rel_err.unwrap_or(f64::NAN),
                mean_wall_time: r.wall_time,
                median_wall_time: r.wall_time,
                trials: 1,
                diverged: usize::from(r.diverged),
                speedup_vs_convex: None,
            })
            .collect();
        ExperimentResult { kind: ExperimentKind::Single, law: spec.law, spec: spec.clone(), cells, records }
    }
}

fn single_instance(spec: &ExperimentSpec) -> Result<Instance> {
    let level = spec.levels()[0];
    Instance::build(spec, &spec.dims, derive_seed(spec.seed, 0), level)
}

/// One instance at the first sampling level, every solver, frequency
/// estimates and diagnostics.
pub fn run_single(spec: &ExperimentSpec) -> Result<SingleReport> {
    spec.expect_kind(ExperimentKind::Single)?;
    let inst = single_instance(spec)?;
    let solvers = spec
        .solvers
        .par_iter()
        .map(|&solver| {
            let eta = spec.eta(solver);
            match inst.solve(spec, solver) {
                Ok(res) => {
                    let err = res.z.relative_error(&inst.x);
                    let est = match spec.dims.len() {
                        1 => matrix_pencil(&res.z, spec.rank, None),
                        2 => estimate_2d(&res.z, spec.rank),
                        _ => Err(Error::InvalidShape("estimation supports 1-D and 2-D signals".into())),
                    };
                    let (estimate, estimate_error) = match est {
                        Ok(e) => (Some(e.to_json()), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    SolverOutput {
                        solver,
                        eta,
                        rel_err: Some(err),
                        success: err < eta,
                        result: Some(res.to_json()),
                        estimate,
                        estimate_error,
                        diverged: false,
                        error: None,
                    }
                }
                Err(e) => SolverOutput {
                    solver,
                    eta,
                    rel_err: None,
                    success: false,
                    result: None,
                    estimate: None,
                    estimate_error: None,
                    diverged: matches!(e, Error::Diverged { .. }),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let (diagnostics, diagnostics_error) = match diagnose_instance(spec, &inst) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SingleReport {
        seed: inst.seed,
        dims: spec.dims.clone(),
        m: inst.omega.m(),
        truth: inst.x.to_json(),
        truth_freqs: inst.model.terms().iter().map(|t| t.freq.clone()).collect(),
        prior: inst.phi.to_json(),
        omega: inst.omega.clone(),
        solvers,
        diagnostics,
        diagnostics_error,
    })
}

fn diagnose_instance(spec: &ExperimentSpec, inst: &Instance) -> Result<DiagnosticsReport> {
    theorem1_report(&inst.x, Some(&inst.phi), spec.lambda, &inst.omega, &inst.shape, derive_seed(inst.seed, 4))
}

/// Certificate quantities for the instance `run_single` would build.
pub fn run_diagnose(spec: &ExperimentSpec) -> Result<DiagnosticsReport> {
    spec.validate()?;
    diagnose_instance(spec, &single_instance(spec)?)
}
