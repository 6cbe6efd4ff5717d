use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use mipt::circuits::{CircuitSpec, Model, ModelOptions, Placement};
use mipt::gates::LocalState;
use mipt::harness::fit::{self, Saturation};
use mipt::harness::io::{emit_results, read_results, write_rows, Format};
use mipt::harness::{
    run_ensemble, BackendConfig, BackendKind, Cuts, EnsembleTable, Experiment, Observable, ObservableSchedule,
};
use mipt::{DenseState, RenyiOrder};

#[derive(Parser)]
#[command(name = "mipt", version, about = "Monitored quantum circuit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble of trajectories and write the averaged observables.
    Simulate(SimulateArgs),
    /// Fit log slopes, exponential tails or a dynamic exponent to a result file.
    Fit(FitArgs),
    /// Exact entropies of a small product or explicit state.
    Oracle(OracleArgs),
}

/// Every field can also come from the `--config` JSON file; flags win.
#[derive(Args, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct SimulateArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// selfdual | clifford-dual | random-clifford | qa
    #[arg(long)]
    model: Option<String>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    l: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    chi: Option<usize>,
    #[arg(long)]
    svd_cutoff: Option<f64>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[arg(long, value_enum)]
    placement: Option<PlacementArg>,
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    t_eq: Option<usize>,
    #[arg(long)]
    t_m: Option<usize>,
    #[arg(long)]
    t_s: Option<usize>,
    /// Explicit growth-mode record times, e.g. `0,4,8,16`; replaces the `--t-m` grid.
    #[arg(long)]
    times: Option<String>,
    #[arg(long)]
    traj: Option<usize>,
    /// Samples per estimate for sre, pe, bsmi and bpmi.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of ee,sre,pe,bsmi,bpmi.
    #[arg(long)]
    observables: Option<String>,
    /// half | all | comma-separated list
    #[arg(long)]
    cuts: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads (overrides MIPT_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum BackendArg {
    Mps,
    Tableau,
}

#[derive(Copy, Clone, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PlacementArg {
    WithReplacement,
    WithoutReplacement,
}

#[derive(Copy, Clone, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Growth,
    Steady,
}

#[derive(Copy, Clone, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum FormatArg {
    Csv,
    Json,
}

macro_rules! overlay {
    ($flags:expr, $file:expr; $($f:ident),*) => {
        $( if $flags.$f.is_none() { $flags.$f = $file.$f.take(); } )*
    };
}

impl SimulateArgs {
    fn resolve(mut self) -> Result<Self> {
        if let Some(path) = self.config.clone() {
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let mut file: SimulateArgs =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            overlay!(self, file; model, l, p, beta, gamma, chi, svd_cutoff, backend, placement, t_max, t_eq, t_m,
                t_s, times, traj, samples, seed, observables, cuts, mode, out, format, threads);
        }
        Ok(self)
    }

    fn experiment(&self) -> Result<Experiment> {
        let name = self.model.as_deref().ok_or_else(|| anyhow!("--model is required"))?;
        let model = Model::from_short_name(name).ok_or_else(|| anyhow!("unknown model {name:?}"))?;
        let l = self.l.ok_or_else(|| anyhow!("--L is required"))?;
        let p = self.p.ok_or_else(|| anyhow!("--p is required"))?;
        let seed = self.seed.unwrap_or(0);
        let spec = CircuitSpec {
            model,
            l,
            p,
            beta: self.beta,
            gamma: self.gamma,
            boundary: Default::default(),
            seed,
        };
        let observables = self
            .observables
            .as_deref()
            .unwrap_or("ee")
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<Observable>, _>>()
            .map_err(|e| anyhow!(e))?;
        let cuts: Cuts = self.cuts.as_deref().unwrap_or("half").parse().map_err(|e: String| anyhow!(e))?;
        let samples = self.samples.unwrap_or(2000);
        let times: Vec<usize> = match self.times.as_deref() {
            Some(list) => list
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| anyhow!("bad time {t:?} in --times")))
                .collect::<Result<_>>()?,
            None => Vec::new(),
        };
        let schedule = match self.mode.unwrap_or(ModeArg::Growth) {
            ModeArg::Growth => ObservableSchedule {
                t_m: self.t_m.unwrap_or(1),
                times: times.clone(),
                ..ObservableSchedule::growth(
                    self.t_max
                        .or(times.last().copied())
                        .ok_or_else(|| anyhow!("--t-max or --times is required in growth mode"))?,
                    &observables,
                    cuts,
                    samples,
                )
            },
            ModeArg::Steady => ObservableSchedule::steady(
                self.t_eq.ok_or_else(|| anyhow!("--t-eq is required in steady mode"))?,
                self.t_m.unwrap_or(1),
                self.t_s.ok_or_else(|| anyhow!("--t-s is required in steady mode"))?,
                &observables,
                cuts,
                samples,
            ),
        };
        let options = ModelOptions {
            placement: match self.placement {
                Some(PlacementArg::WithoutReplacement) => Placement::WithoutReplacement,
                _ => Placement::WithReplacement,
            },
            ..Default::default()
        };
        let backend = BackendConfig {
            chi: self.chi.unwrap_or(BackendConfig::default().chi),
            svd_cutoff: self.svd_cutoff,
            kind: self.backend.map(|b| match b {
                BackendArg::Mps => BackendKind::Mps,
                BackendArg::Tableau => BackendKind::Tableau,
            }),
        };
        let exp = Experiment { spec, options, backend, schedule };
        exp.validate()?;
        Ok(exp)
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let args = args.resolve()?;
    let exp = args.experiment()?;
    let table = run_ensemble(&exp, args.traj.unwrap_or(1), args.seed.unwrap_or(0), args.threads)?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    let format = match args.format {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Csv) => Format::Csv,
        None => args.out.as_deref().map_or(Format::Csv, Format::from_path),
    };
    match &args.out {
        Some(path) => emit_results(&table, path, format)?,
        None => write_rows(io::stdout().lock(), &table.result_rows(), format)?,
    }
    Ok(())
}

#[derive(Copy, Clone, ValueEnum)]
enum FitKind {
    /// `S = α ln t + b` (or `α ln x(ℓ) + b` with `--axis space`).
    Logslope,
    /// `δS ∝ exp(−α τ)`
    Exptail,
    /// `δS ∝ τ^slope`
    Powerlaw,
    /// Best dynamic exponent over `--z-grid`.
    Collapse,
}

#[derive(Copy, Clone, ValueEnum)]
enum Axis {
    Time,
    Space,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: FitKind,
    /// Defaults to ee for log slopes and pe otherwise.
    #[arg(long)]
    observable: Option<Observable>,
    /// Cut for per-bipartition observables (default L/2).
    #[arg(long)]
    cut: Option<usize>,
    #[arg(long, value_enum, default_value = "time")]
    axis: Axis,
    #[arg(long, default_value_t = 1.0)]
    z: f64,
    /// `start:stop:step`
    #[arg(long, default_value = "0.5:2.5:0.01")]
    z_grid: String,
    /// `auto` or a number.
    #[arg(long, default_value = "auto")]
    s_inf: String,
    /// `lo:hi` on the fitted abscissa (t, ℓ-chord or τ).
    #[arg(long)]
    window: Option<String>,
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = s.split(':').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>()?;
    if v.len() != n {
        bail!("expected {n} colon-separated numbers in {s:?}");
    }
    Ok(v)
}

fn fit(args: FitArgs) -> Result<()> {
    let rows = read_results(&args.input)?;
    let tables = EnsembleTable::from_result_rows(&rows)?;
    if tables.is_empty() {
        bail!("{} holds no rows", args.input.display());
    }
    let observable = args.observable.unwrap_or(match args.kind {
        FitKind::Logslope => Observable::Ee,
        _ => Observable::Pe,
    });
    let cut_of = |t: &EnsembleTable| observable.has_cut().then(|| args.cut.unwrap_or(t.l / 2));
    let window = args.window.as_deref().map(|w| parse_floats(w, 2).map(|v| (v[0], v[1]))).transpose()?;
    let s_inf = match args.s_inf.as_str() {
        "auto" => Saturation::Auto,
        v => Saturation::Value(v.parse().context("--s-inf")?),
    };
    let id = |t: &EnsembleTable| json!({"model": t.model.to_string(), "L": t.l, "p": t.p, "observable": observable.name()});
    match args.kind {
        FitKind::Collapse => {
            let g = parse_floats(&args.z_grid, 3)?;
            if g[2] <= 0.0 || g[1] < g[0] {
                bail!("bad z grid {:?}", args.z_grid);
            }
            let grid: Vec<f64> = (0..=((g[1] - g[0]) / g[2] + 1e-9) as usize).map(|k| g[0] + k as f64 * g[2]).collect();
            let curves = tables
                .iter()
                .map(|t| Ok((t.l, t.relaxation(observable, cut_of(t), 0.0, s_inf)?.points)))
                .collect::<Result<Vec<_>>>()?;
            let scan = fit::scan_collapse_z(&curves, &grid)?;
            println!("{}", serde_json::to_string(&json!({"observable": observable.name(), "best_z": scan.best_z, "quality": scan.quality}))?);
        }
        kind => {
            for t in &tables {
                let result = match (kind, args.axis) {
                    (FitKind::Logslope, Axis::Time) if window.is_none() => t.temporal_log_slope(observable, cut_of(t))?,
                    (FitKind::Logslope, Axis::Time) => {
                        let s: Vec<(f64, f64)> =
                            t.series(observable, cut_of(t)).into_iter().map(|(x, m, _)| (x as f64, m)).collect();
                        fit::fit_log_slope(&s, window)?
                    }
                    (FitKind::Logslope, Axis::Space) => t.spatial_log_slope(observable)?,
                    (FitKind::Exptail, _) => {
                        let c = t.relaxation(observable, cut_of(t), args.z, s_inf)?;
                        fit::fit_exponential_tail(&c.points, window)?
                    }
                    (FitKind::Powerlaw, _) => {
                        let c = t.relaxation(observable, cut_of(t), args.z, s_inf)?;
                        fit::fit_power_law(&c.points, window)?
                    }
                    (FitKind::Collapse, _) => unreachable!(),
                };
                println!("{}", serde_json::to_string(&json!({"table": id(t), "fit": result}))?);
            }
        }
    }
    Ok(())
}

#[derive(Args)]
struct OracleArgs {
    /// Product state as characters from `01+-T`, e.g. `0+T1`.
    #[arg(long, conflicts_with = "amplitudes")]
    state: Option<String>,
    /// JSON file holding `[[re, im], ...]` amplitudes.
    #[arg(long)]
    amplitudes: Option<PathBuf>,
    #[arg(long)]
    cut: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    order: f64,
}

fn local_state(c: char) -> Result<LocalState> {
    Ok(match c {
        '0' => LocalState::Zero,
        '1' => LocalState::One,
        '+' => LocalState::Plus,
        '-' => LocalState::Minus,
        'T' | 't' => LocalState::T,
        other => bail!("unknown local state {other:?}"),
    })
}

fn load_amplitudes(path: &Path) -> Result<DenseState> {
    let raw: Vec<[f64; 2]> = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok(DenseState::from_amplitudes(raw.into_iter().map(|[re, im]| num_complex::Complex64::new(re, im)).collect())?)
}

fn oracle(args: OracleArgs) -> Result<()> {
    let (state, label) = match (&args.state, &args.amplitudes) {
        (Some(s), _) => {
            let locals = s.chars().map(local_state).collect::<Result<Vec<_>>>()?;
            (DenseState::product_of(&locals)?, json!({"product": s}))
        }
        (None, Some(path)) => (load_amplitudes(path)?, json!({"amplitudes": path.display().to_string()})),
        (None, None) => bail!("give --state or --amplitudes"),
    };
    let n = state.num_qubits();
    let cut = args.cut.unwrap_or(n / 2);
    let order = RenyiOrder::new(args.order)?;
    let e = state.exact_entropies(cut, order)?;
    let out = json!({
        "state": label,
        "num_qubits": n,
        "cut": cut,
        "order": args.order,
        "entropies": {
            "ee": e.ee.nats(),
            "sre": e.sre.map(|v| v.nats()),
            "pe_z": e.pe_z.nats(),
            "pe_x": e.pe_x.nats(),
            "bpmi": state.bpmi(cut)?.nats(),
            "bsmi": if n <= 8 { Some(state.bsmi(cut)?.nats()) } else { None },
        },
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Oracle(a) => oracle(a),
    }
}
