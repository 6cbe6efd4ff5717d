//! Trajectory runner, ensemble averaging and result tables.

pub mod fit;
pub mod io;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{self, CircuitSpec, ConfigError, Instruction, Model, ModelOptions};
use crate::entropy::RenyiOrder;
use crate::gates::{self, CMatrix, LocalState, SelfDualGate};
use crate::mps::sampling::{BitstringBatch, PauliBatch};
use crate::mps::{MpsError, MpsState, TruncationConfig, WeakMeasurementSpec};
use crate::oracle::Basis;
use crate::stabilizer::{CliffordGate, StabilizerError, Tableau};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("model {model} cannot run on the {backend:?} backend")]
    BackendMismatch { model: Model, backend: BackendKind },
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Mps(#[from] MpsError),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    Ee,
    Sre,
    Pe,
    Bsmi,
    Bpmi,
}

impl Observable {
    pub const ALL: [Observable; 5] = [Observable::Ee, Observable::Sre, Observable::Pe, Observable::Bsmi, Observable::Bpmi];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Ee => "ee",
            Observable::Sre => "sre",
            Observable::Pe => "pe",
            Observable::Bsmi => "bsmi",
            Observable::Bpmi => "bpmi",
        }
    }

    /// Whether the observable is defined per bipartition.
    pub fn has_cut(self) -> bool {
        matches!(self, Observable::Ee | Observable::Bsmi | Observable::Bpmi)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s.trim())
            .ok_or_else(|| format!("unknown observable {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Cuts {
    Half,
    All,
    List(Vec<usize>),
}

impl Cuts {
    pub fn resolve(&self, l: usize) -> Vec<usize> {
        match self {
            Cuts::Half => vec![l / 2],
            Cuts::All => (1..l).collect(),
            Cuts::List(v) => v.clone(),
        }
    }
}

impl FromStr for Cuts {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "half" => Ok(Cuts::Half),
            "all" => Ok(Cuts::All),
            list => list
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad cut {x:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()
                .map(Cuts::List),
        }
    }
}

impl TryFrom<String> for Cuts {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Cuts> for String {
    fn from(c: Cuts) -> String {
        match c {
            Cuts::Half => "half".into(),
            Cuts::All => "all".into(),
            Cuts::List(v) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Record from `t = 0` every `t_m` steps up to `t_max`, or at the
    /// explicit `times` when given.
    Growth,
    /// Equilibrate `t_eq` steps, then record every `t_m` steps for `t_s` steps.
    Steady,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSchedule {
    pub mode: Mode,
    pub t_eq: usize,
    pub t_m: usize,
    pub t_s: usize,
    pub t_max: usize,
    pub observables: Vec<Observable>,
    pub cuts: Cuts,
    pub sre_pe_samples: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub times: Vec<usize>,
}

impl ObservableSchedule {
    pub fn growth(t_max: usize, observables: &[Observable], cuts: Cuts, samples: usize) -> Self {
        Self { mode: Mode::Growth, t_eq: 0, t_m: 1, t_s: 0, t_max, observables: observables.to_vec(), cuts, sre_pe_samples: samples, times: Vec::new() }
    }

    pub fn steady(t_eq: usize, t_m: usize, t_s: usize, observables: &[Observable], cuts: Cuts, samples: usize) -> Self {
        Self { mode: Mode::Steady, t_eq, t_m, t_s, t_max: 0, observables: observables.to_vec(), cuts, sre_pe_samples: samples, times: Vec::new() }
    }

    pub fn record_times(&self) -> Vec<usize> {
        let stride = self.t_m.max(1);
        match self.mode {
            Mode::Growth if !self.times.is_empty() => self.times.clone(),
            Mode::Growth => (0..=self.t_max).step_by(stride).collect(),
            Mode::Steady => (0..self.t_s / stride).map(|k| self.t_eq + k * stride).collect(),
        }
    }

    pub fn validate(&self, l: usize) -> Result<(), HarnessError> {
        if self.t_m == 0 {
            return Err(HarnessError::Schedule("t_m must be positive".into()));
        }
        if self.mode == Mode::Steady && self.t_s < self.t_m {
            return Err(HarnessError::Schedule("t_s must cover at least one interval t_m".into()));
        }
        if !self.times.is_empty() && (self.mode != Mode::Growth || self.times.windows(2).any(|w| w[0] >= w[1])) {
            return Err(HarnessError::Schedule("explicit times must be increasing and need growth mode".into()));
        }
        if self.observables.is_empty() {
            return Err(HarnessError::Schedule("no observables requested".into()));
        }
        if let Some(bad) = self.cuts.resolve(l).into_iter().find(|&c| c == 0 || c >= l) {
            return Err(HarnessError::Schedule(format!("cut {bad} outside 1..{l}")));
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mps,
    Tableau,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub chi: usize,
    #[serde(default)]
    pub svd_cutoff: Option<f64>,
    /// `None` picks the tableau for Clifford models and the MPS otherwise.
    #[serde(default)]
    pub kind: Option<BackendKind>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self { chi: 64, svd_cutoff: None, kind: None }
    }
}

/// Everything that determines a trajectory apart from its seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub spec: CircuitSpec,
    #[serde(default)]
    pub options: ModelOptions,
    #[serde(default)]
    pub backend: BackendConfig,
    pub schedule: ObservableSchedule,
}

impl Experiment {
    pub fn backend_kind(&self) -> BackendKind {
        self.backend.kind.unwrap_or(if self.spec.model.uses_tableau() { BackendKind::Tableau } else { BackendKind::Mps })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.spec.validate()?;
        self.schedule.validate(self.spec.l)?;
        let kind = self.backend_kind();
        let ok = match self.spec.model {
            Model::SelfDualHybrid => kind == BackendKind::Mps,
            Model::RandomClifford => kind == BackendKind::Tableau,
            Model::CliffordDual | Model::QuantumAutomaton => true,
        };
        if !ok {
            return Err(HarnessError::BackendMismatch { model: self.spec.model, backend: kind });
        }
        if kind == BackendKind::Mps && self.backend.chi == 0 {
            return Err(MpsError::ZeroChi.into());
        }
        Ok(())
    }

    /// Basis of the participation entropy: X for the automaton model, Z otherwise.
    pub fn pe_basis(&self) -> Basis {
        if self.spec.model == Model::QuantumAutomaton {
            Basis::X
        } else {
            Basis::Z
        }
    }

    fn initial_state(&self) -> LocalState {
        if self.spec.model == Model::QuantumAutomaton {
            LocalState::Plus
        } else {
            LocalState::Zero
        }
    }
}

/// Named substreams of one trajectory seed.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Stream {
    Layers,
    Outcomes,
    PauliSamples { t: usize },
    BitSamples { t: usize },
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Layers => 1,
            Stream::Outcomes => 2,
            Stream::PauliSamples { t } => (3 << 60) | t as u64,
            Stream::BitSamples { t } => (4 << 60) | t as u64,
        }
    }

    pub fn rng(self, seed: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(self.id());
        r
    }
}

#[derive(Clone, Debug)]
pub enum Backend {
    Mps { state: MpsState, self_dual: Vec<CMatrix> },
    Tableau(Tableau),
}

impl Backend {
    pub fn new(exp: &Experiment) -> Result<Self, HarnessError> {
        let l = exp.spec.l;
        Ok(match exp.backend_kind() {
            BackendKind::Mps => {
                let cfg = TruncationConfig { chi_max: exp.backend.chi, cutoff: exp.backend.svd_cutoff };
                let state = MpsState::new_product_state(l, exp.initial_state(), cfg)?;
                Backend::Mps { state, self_dual: SelfDualGate::ensemble().iter().map(|g| g.matrix()).collect() }
            }
            BackendKind::Tableau => {
                let basis = if exp.initial_state() == LocalState::Plus { Basis::X } else { Basis::Z };
                Backend::Tableau(Tableau::new(l, basis)?)
            }
        })
    }

    pub fn apply(&mut self, ins: &Instruction, outcomes: &mut ChaCha8Rng) -> Result<(), HarnessError> {
        match self {
            Backend::Mps { state, self_dual } => match *ins {
                Instruction::SelfDual { gate, left } => {
                    let k = SelfDualGate::ensemble().iter().position(|g| *g == gate).expect("ensemble member");
                    state.apply_unitary(&self_dual[k], left)?;
                }
                Instruction::Weak { pauli, left, beta } => {
                    state.weak_measure(&WeakMeasurementSpec { pauli_op: pauli, beta, left_site: left }, outcomes)?;
                }
                Instruction::Projective { pauli, left } => {
                    state.projective_measure(pauli.letters(), left, outcomes)?;
                }
                Instruction::Cx { control, target } => {
                    let g = if control < target { gates::cnot() } else { gates::cnot_reversed() };
                    state.apply_unitary(&g, control.min(target))?;
                }
                Instruction::Cz { left } => state.apply_unitary(&gates::cz(), left)?,
                Instruction::H(q) => state.apply_unitary(&gates::hadamard(), q)?,
                Instruction::Clifford2 { .. } => {
                    return Err(HarnessError::BackendMismatch { model: Model::RandomClifford, backend: BackendKind::Mps })
                }
            },
            Backend::Tableau(tab) => match *ins {
                Instruction::SelfDual { gate, left } => tab.apply(&CliffordGate::Rotation { gate, left })?,
                Instruction::Projective { pauli, left } => {
                    tab.measure(pauli.letters(), left, outcomes)?;
                }
                Instruction::Cx { control, target } => tab.apply(&CliffordGate::Cx { control, target })?,
                Instruction::Cz { left } => tab.apply(&CliffordGate::Cz(left, left + 1))?,
                Instruction::H(q) => tab.apply(&CliffordGate::H(q))?,
                Instruction::Clifford2 { gate, left } => tab.apply(&CliffordGate::TwoQubit { gate, a: left, b: left + 1 })?,
                Instruction::Weak { .. } => {
                    return Err(HarnessError::BackendMismatch { model: Model::SelfDualHybrid, backend: BackendKind::Tableau })
                }
            },
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: usize,
    pub observable: Observable,
    pub cut: Option<usize>,
    pub value: f64,
    pub stderr: f64,
    /// Samples behind the value; `0` for exact quantities.
    pub n_samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub spec: CircuitSpec,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
    /// Total truncated weight of the MPS run (zero for tableaux).
    pub discarded_weight: f64,
}

fn measure_observables(
    exp: &Experiment,
    backend: &mut Backend,
    t: usize,
    seed: u64,
    rows: &mut Vec<Row>,
    warnings: &mut Vec<String>,
) -> Result<(), HarnessError> {
    let sched = &exp.schedule;
    let cuts = sched.cuts.resolve(exp.spec.l);
    let wants = |o: Observable| sched.observables.contains(&o);
    let basis = exp.pe_basis();
    let exact = |observable, cut, value| Row { t, observable, cut, value, stderr: 0.0, n_samples: 0 };
    match backend {
        Backend::Mps { state, .. } => {
            if wants(Observable::Ee) {
                for &c in &cuts {
                    rows.push(exact(Observable::Ee, Some(c), state.entanglement_entropy(c, RenyiOrder::SHANNON)?.nats()));
                }
            }
            state.right_normalize();
            let n = sched.sre_pe_samples;
            let mut push = |observable, cut, r: crate::mps::sampling::EstimatorResult| {
                if let Some(w) = &r.warning {
                    warnings.push(format!("t={t} {observable}: {w}"));
                }
                if r.value.is_finite() && r.stderr.is_finite() {
                    rows.push(Row { t, observable, cut, value: r.value, stderr: r.stderr, n_samples: r.n_samples });
                } else {
                    warnings.push(format!("t={t} {observable}: dropped non-finite estimate"));
                }
            };
            if wants(Observable::Sre) || wants(Observable::Bsmi) {
                let bcuts = if wants(Observable::Bsmi) { cuts.clone() } else { Vec::new() };
                let batch = PauliBatch::draw(state, n, &bcuts, &mut Stream::PauliSamples { t }.rng(seed))?;
                if wants(Observable::Sre) {
                    push(Observable::Sre, None, batch.sre(RenyiOrder::SHANNON)?);
                }
                for &c in &bcuts {
                    push(Observable::Bsmi, Some(c), batch.bsmi(c)?);
                }
            }
            if wants(Observable::Pe) || wants(Observable::Bpmi) {
                let bcuts = if wants(Observable::Bpmi) { cuts.clone() } else { Vec::new() };
                let batch = BitstringBatch::draw(state, n, &bcuts, basis, &mut Stream::BitSamples { t }.rng(seed))?;
                if wants(Observable::Pe) {
                    push(Observable::Pe, None, batch.pe());
                }
                for &c in &bcuts {
                    push(Observable::Bpmi, Some(c), batch.bpmi(c)?);
                }
            }
        }
        Backend::Tableau(tab) => {
            if wants(Observable::Ee) {
                for &c in &cuts {
                    rows.push(exact(Observable::Ee, Some(c), tab.entanglement_entropy(0..c)?.nats()));
                }
            }
            if wants(Observable::Sre) {
                rows.push(exact(Observable::Sre, None, 0.0));
            }
            if wants(Observable::Pe) {
                rows.push(exact(Observable::Pe, None, tab.participation_entropy(basis).nats()));
            }
            if wants(Observable::Bsmi) {
                for &c in &cuts {
                    rows.push(exact(Observable::Bsmi, Some(c), 0.0));
                }
            }
            if wants(Observable::Bpmi) {
                for &c in &cuts {
                    rows.push(exact(Observable::Bpmi, Some(c), tab.bpmi(c, basis)?.nats()));
                }
            }
        }
    }
    Ok(())
}

/// Run one trajectory; deterministic in `(exp, seed)`.
pub fn run_trajectory(exp: &Experiment, seed: u64) -> Result<TrajectoryRecord, HarnessError> {
    exp.validate()?;
    let mut backend = Backend::new(exp)?;
    let mut layers = Stream::Layers.rng(seed);
    let mut outcomes = Stream::Outcomes.rng(seed);
    let times = exp.schedule.record_times();
    let last = times.last().copied().unwrap_or(0);
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut next = times.iter().peekable();
    for t in 0..=last {
        if t > 0 {
            let plan = circuits::layer(&exp.spec, &exp.options, t - 1, &mut layers)?;
            let ordered = match &backend {
                Backend::Mps { state, .. } => plan.sweep_order(state.orthocenter()),
                Backend::Tableau(_) => plan.instructions,
            };
            for ins in &ordered {
                backend.apply(ins, &mut outcomes)?;
            }
        }
        if next.peek() == Some(&&t) {
            next.next();
            measure_observables(exp, &mut backend, t, seed, &mut rows, &mut warnings)?;
        }
    }
    let discarded_weight = match &backend {
        Backend::Mps { state, .. } => state.total_discarded(),
        Backend::Tableau(_) => 0.0,
    };
    Ok(TrajectoryRecord { spec: exp.spec.clone(), seed, rows, warnings, discarded_weight })
}

/// Worker count from `MIPT_THREADS`, if set.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("MIPT_THREADS").ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub t: usize,
    pub observable: Observable,
    pub cut: Option<usize>,
    pub mean: f64,
    /// Standard error of the mean across trajectories.
    pub sem: f64,
    /// Number of trajectories contributing.
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleTable {
    pub model: Model,
    pub l: usize,
    pub p: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub chi: Option<usize>,
    pub seed_base: u64,
    pub n_traj: usize,
    pub rows: Vec<AggregateRow>,
    pub warnings: Vec<String>,
}

impl EnsembleTable {
    /// `(t, mean, sem)` for one observable and cut, ordered by time.
    pub fn series(&self, observable: Observable, cut: Option<usize>) -> Vec<(usize, f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.observable == observable && r.cut == cut)
            .map(|r| (r.t, r.mean, r.sem))
            .collect()
    }

    /// `(cut, mean, sem)` at time `t`.
    pub fn profile(&self, observable: Observable, t: usize) -> Vec<(usize, f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.observable == observable && r.t == t)
            .filter_map(|r| r.cut.map(|c| (c, r.mean, r.sem)))
            .collect()
    }

    /// Relaxation curve of one observable; see [`fit::relaxation_curve`].
    pub fn relaxation(
        &self,
        observable: Observable,
        cut: Option<usize>,
        z: f64,
        s_inf: fit::Saturation,
    ) -> Result<fit::RelaxationCurve, HarnessError> {
        let series: Vec<(f64, f64)> = self.series(observable, cut).into_iter().map(|(t, m, _)| (t as f64, m)).collect();
        if series.is_empty() {
            return Err(HarnessError::Fit(format!("no {observable} data")));
        }
        fit::relaxation_curve(&series, self.l, z, s_inf)
    }

    /// `S(t) = α ln t + b` for one observable, over the default temporal window.
    pub fn temporal_log_slope(&self, observable: Observable, cut: Option<usize>) -> Result<fit::FitResult, HarnessError> {
        let series: Vec<(f64, f64)> =
            self.series(observable, cut).into_iter().filter(|p| p.0 > 0).map(|(t, m, _)| (t as f64, m)).collect();
        let times: Vec<f64> = series.iter().map(|p| p.0).collect();
        fit::fit_log_slope(&series, fit::default_time_window(&times))
    }

    /// Time-averaged `S(ℓ) = α ln x(ℓ) + b` over `ℓ ∈ [4, L/2]`, `x` the chord length.
    pub fn spatial_log_slope(&self, observable: Observable) -> Result<fit::FitResult, HarnessError> {
        let pts: Vec<(f64, f64)> = self
            .time_averaged_profile(observable)
            .into_iter()
            .filter(|&(c, _)| c >= 4 && c <= self.l / 2)
            .map(|(c, m)| (fit::chord_length(self.l, c), m))
            .collect();
        fit::fit_log_slope(&pts, None)
    }

    /// Time average of a profile over all recorded times.
    pub fn time_averaged_profile(&self, observable: Observable) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.observable == observable) {
            if let Some(c) = r.cut {
                let e = acc.entry(c).or_default();
                e.0 += r.mean;
                e.1 += 1;
            }
        }
        acc.into_iter().map(|(c, (s, n))| (c, s / n as f64)).collect()
    }
}

/// Aggregate records (in index order) into per-`(t, observable, cut)` means.
pub fn aggregate(records: &[TrajectoryRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(usize, Observable, Option<usize>), Vec<f64>> = BTreeMap::new();
    for rec in records {
        for r in &rec.rows {
            groups.entry((r.t, r.observable, r.cut)).or_default().push(r.value);
        }
    }
    groups
        .into_iter()
        .map(|((t, observable, cut), v)| {
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let sem = if n > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
            } else {
                0.0
            };
            AggregateRow { t, observable, cut, mean, sem, n }
        })
        .collect()
}

/// Run `n_traj` trajectories with seeds `seed_base + i` on up to `threads`
/// workers (default: `MIPT_THREADS`, else all cores).
pub fn run_ensemble(
    exp: &Experiment,
    n_traj: usize,
    seed_base: u64,
    threads: Option<usize>,
) -> Result<EnsembleTable, HarnessError> {
    exp.validate()?;
    if n_traj == 0 {
        return Err(HarnessError::Schedule("n_traj must be at least 1".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.or_else(threads_from_env) {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| HarnessError::Pool(e.to_string()))?;
    let records: Vec<TrajectoryRecord> = pool.install(|| {
        (0..n_traj as u64)
            .into_par_iter()
            .map(|i| run_trajectory(exp, seed_base.wrapping_add(i)))
            .collect::<Result<_, _>>()
    })?;
    let warnings = records
        .iter()
        .flat_map(|r| r.warnings.iter().map(move |w| format!("seed {}: {w}", r.seed)))
        .collect();
    Ok(EnsembleTable {
        model: exp.spec.model,
        l: exp.spec.l,
        p: exp.spec.p,
        beta: exp.spec.beta,
        gamma: exp.spec.gamma,
        chi: (exp.backend_kind() == BackendKind::Mps).then_some(exp.backend.chi),
        seed_base,
        n_traj,
        rows: aggregate(&records),
        warnings,
    })
}
