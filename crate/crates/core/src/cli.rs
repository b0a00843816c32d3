//! Command-line front end.
//!
//! Every subcommand produces one [`Table`] that is rendered as CSV (floats
//! with nine significant digits) or as a single JSON object with keys `command`,
//! `chain`, `params`, optional command extras, `rows` and, for Monte Carlo
//! runs, `seed`. Output is rendered fully in memory before anything is
//! written. Exit status: 0 success, 2 usage error, 3 runtime error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::cavity::{CavityParams, RateConvention};
use crate::error::{Error, Result};
use crate::experiments::{
    jitter_with, to_dimensionless, yield_seconds, Evaluator, JitterMode, JitterSpec, PhysicalParams,
};
use crate::graphs::{compile_schedule, graph_of_schedule, PauliFrame, Schedule, StarChain};
use crate::noisy::{LoadMode, Protocol};
use crate::ode::SolverOptions;
use crate::qsim::{canonical_graph_state, fidelity, run_schedule_ideal_with, StateVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "graphstream",
    version,
    about = "Compile star-chain graph states into stream operations and simulate their heralded cavity-QED generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Edges of the graph realized by the compiled schedule.
    BuildGraph(Opts),
    /// Lossless state-vector execution, fidelity per parent outcome.
    SimulateIdeal(Opts),
    /// Fidelity and heralding probability at each (kappa, gamma).
    SimulateNoisy(Opts),
    /// Fidelity/probability table over a kappa × gamma grid.
    Sweep(Opts),
    /// Monte Carlo over interaction-time jitter.
    Jitter(Opts),
    /// Seconds per heralded state at physical parameters.
    YieldTime(Opts),
}

#[derive(Debug, Clone, Args)]
struct Opts {
    /// Leaf counts per spine vertex, e.g. `2,0,1`.
    #[arg(long, value_parser = parse_chain)]
    chain: StarChain,
    /// Keep the parent (photon) as the last spine vertex instead of measuring it.
    #[arg(long)]
    keep_parent: bool,
    /// Cavity decay in units of g: a value or `start:stop:step`.
    #[arg(long, value_parser = parse_axis)]
    kappa: Option<Axis>,
    /// Atomic decay in units of g: a value or `start:stop:step`.
    #[arg(long, value_parser = parse_axis)]
    gamma: Option<Axis>,
    /// Physical `g,gamma,kappa` as value/2π in MHz.
    #[arg(long, value_parser = parse_phys, conflicts_with_all = ["kappa", "gamma"])]
    phys: Option<PhysicalParams<f64>>,
    /// Integrator step in units of 1/g.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Relative tolerance of the step-halving check.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Skip the step-halving check.
    #[arg(long)]
    no_verify: bool,
    #[arg(long, default_value_t = 0.1)]
    jitter_fraction: f64,
    #[arg(long, value_enum, default_value_t = JitterModeArg::PerPulse)]
    jitter_mode: JitterModeArg,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grids and Monte Carlo (0: all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = LoadModeArg::PreparedPhoton)]
    load_mode: LoadModeArg,
    #[arg(long, value_enum, default_value_t = ConventionArg::Literal)]
    rate_convention: ConventionArg,
    /// Idle time after every atom, as g·τ.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    idle_angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum JitterModeArg {
    PerPulse,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LoadModeArg {
    PreparedPhoton,
    AtomicPulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Literal,
    Half,
}

/// Values of one loss axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis(pub Vec<f64>);

fn parse_chain(s: &str) -> std::result::Result<StarChain, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("not a finite number: {s:?}"));
    }
    Ok(v)
}

/// `v` or `start:stop:step`, the latter inclusive of `stop` within half a step.
pub fn parse_axis(s: &str) -> std::result::Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [v] => vec![parse_number(v)?],
        [a, b, h] => {
            let (start, stop, step) = (parse_number(a)?, parse_number(b)?, parse_number(h)?);
            if !(step > 0.0) {
                return Err(format!("range step must be positive in {s:?}"));
            }
            let mut out = Vec::new();
            let mut i = 0u32;
            loop {
                let v = start + f64::from(i) * step;
                if v > stop + 0.5 * step {
                    break;
                }
                out.push(v);
                i += 1;
            }
            out
        }
        _ => return Err(format!("expected a value or start:stop:step, got {s:?}")),
    };
    if values.iter().any(|v| *v < 0.0) {
        return Err(format!("rates must be nonnegative in {s:?}"));
    }
    Ok(Axis(values))
}

fn parse_phys(s: &str) -> std::result::Result<PhysicalParams<f64>, String> {
    let v: Vec<f64> = s.split(',').map(parse_number).collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [g, gamma, kappa] => PhysicalParams::new(*g, *gamma, *kappa).map_err(|e| e.to_string()),
        _ => Err(format!("expected g,gamma,kappa, got {s:?}")),
    }
}

/// Subcommand selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    BuildGraph,
    SimulateIdeal,
    SimulateNoisy,
    Sweep,
    Jitter,
    YieldTime,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::BuildGraph => "build-graph",
            Command::SimulateIdeal => "simulate-ideal",
            Command::SimulateNoisy => "simulate-noisy",
            Command::Sweep => "sweep",
            Command::Jitter => "jitter",
            Command::YieldTime => "yield-time",
        }
    }
}

/// Where loss parameters come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamSource {
    Dimensionless { kappas: Vec<f64>, gammas: Vec<f64> },
    Physical(PhysicalParams<f64>),
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub chain: StarChain,
    pub keep_parent: bool,
    pub params: Option<ParamSource>,
    pub convention: RateConvention,
    pub protocol: Protocol<f64>,
    pub solver: SolverOptions<f64>,
    pub jitter: JitterSpec<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: usize,
}

/// Usage error: message plus the exit status it maps to.
#[derive(Debug)]
pub struct UsageError {
    pub message: String,
    /// Help and version requests are not failures.
    pub is_info: bool,
}

pub fn parse_args<I, S>(argv: I) -> std::result::Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError {
        is_info: matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion
                | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
        ),
        message: e.render().to_string(),
    })?;
    let (command, o) = match cli.command {
        Cmd::BuildGraph(o) => (Command::BuildGraph, o),
        Cmd::SimulateIdeal(o) => (Command::SimulateIdeal, o),
        Cmd::SimulateNoisy(o) => (Command::SimulateNoisy, o),
        Cmd::Sweep(o) => (Command::Sweep, o),
        Cmd::Jitter(o) => (Command::Jitter, o),
        Cmd::YieldTime(o) => (Command::YieldTime, o),
    };
    let usage = |m: String| UsageError {
        message: format!("error: {m}\n"),
        is_info: false,
    };
    let params = match (&o.phys, &o.kappa, &o.gamma) {
        (Some(p), _, _) => Some(ParamSource::Physical(*p)),
        (None, Some(k), Some(g)) => Some(ParamSource::Dimensionless {
            kappas: k.0.clone(),
            gammas: g.0.clone(),
        }),
        (None, Some(_), None) => return Err(usage("--kappa given without --gamma".into())),
        (None, None, Some(_)) => return Err(usage("--gamma given without --kappa".into())),
        (None, None, None) => None,
    };
    match (command, &params) {
        (Command::SimulateNoisy | Command::Jitter, None) => {
            return Err(usage(format!("{} needs --phys or --kappa and --gamma", command.name())))
        }
        (Command::YieldTime, Some(ParamSource::Dimensionless { .. }) | None) => {
            return Err(usage("yield-time needs --phys".into()))
        }
        _ => {}
    }
    if !(o.step > 0.0) {
        return Err(usage(format!("--step must be positive, got {}", o.step)));
    }
    if !(o.tolerance > 0.0) {
        return Err(usage(format!("--tolerance must be positive, got {}", o.tolerance)));
    }
    if !(o.idle_angle >= 0.0) || !o.idle_angle.is_finite() {
        return Err(usage(format!("--idle-angle must be nonnegative, got {}", o.idle_angle)));
    }
    let mut jitter =
        JitterSpec::new(o.jitter_fraction, o.samples, o.seed).map_err(|e| usage(format!("--jitter-fraction/--samples: {e}")))?;
    jitter.mode = match o.jitter_mode {
        JitterModeArg::PerPulse => JitterMode::PerPulse,
        JitterModeArg::Shared => JitterMode::Shared,
    };
    Ok(RunConfig {
        command,
        chain: o.chain,
        keep_parent: o.keep_parent,
        params,
        convention: match o.rate_convention {
            ConventionArg::Literal => RateConvention::Literal,
            ConventionArg::Half => RateConvention::Half,
        },
        protocol: Protocol {
            load: match o.load_mode {
                LoadModeArg::PreparedPhoton => LoadMode::PreparedPhoton,
                LoadModeArg::AtomicPulse => LoadMode::AtomicPulse,
            },
            idle_angle: o.idle_angle,
        },
        solver: SolverOptions {
            step_size: o.step,
            tolerance: o.tolerance,
            verify: !o.no_verify,
        },
        jitter,
        format: o.format,
        out: o.out,
        threads: o.threads,
    })
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Null,
}

/// Positional notation with 9 significant digits.
fn significant(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (8 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => significant(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Null => Value::Null,
        }
    }
}

/// Column-named rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Results of one invocation, ready to serialize.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub chain: StarChain,
    pub params: Map<String, Value>,
    /// Command-specific fields placed between `params` and `rows`.
    pub extra: Map<String, Value>,
    pub table: Table,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = report.table.columns.join(",");
            s.push('\n');
            for row in &report.table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("command".into(), json!(report.command.name()));
            obj.insert("chain".into(), json!(report.chain.to_string()));
            obj.insert("params".into(), Value::Object(report.params.clone()));
            for (k, v) in &report.extra {
                obj.insert(k.clone(), v.clone());
            }
            let rows: Vec<Value> = report
                .table
                .rows
                .iter()
                .map(|row| {
                    let m: Map<String, Value> = report
                        .table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| ((*c).to_string(), v.json()))
                        .collect();
                    Value::Object(m)
                })
                .collect();
            obj.insert("rows".into(), Value::Array(rows));
            if let Some(seed) = report.seed {
                obj.insert("seed".into(), json!(seed));
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("JSON values serialize");
            s.push('\n');
            s
        }
    }
}

/// Writes rendered output to `path`, or to `stdout` when absent.
pub fn emit(report: &Report, format: Format, path: Option<&std::path::Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = render(report, format);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn param_block(cfg: &RunConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("keep_parent".into(), json!(cfg.keep_parent));
    match &cfg.params {
        Some(ParamSource::Dimensionless { kappas, gammas }) => {
            m.insert("kappa".into(), json!(kappas));
            m.insert("gamma".into(), json!(gammas));
        }
        Some(ParamSource::Physical(p)) => {
            let d = to_dimensionless(p);
            m.insert("kappa".into(), json!([d.kappa_l]));
            m.insert("gamma".into(), json!([d.gamma_l]));
        }
        None => {}
    }
    m.insert("rate_convention".into(), json!(cfg.convention.name()));
    m.insert("load_mode".into(), json!(cfg.protocol.load.name()));
    m.insert("idle_angle".into(), json!(cfg.protocol.idle_angle));
    m.insert("step".into(), json!(cfg.solver.step_size));
    m.insert("tolerance".into(), json!(cfg.solver.tolerance));
    if cfg.command == Command::Jitter {
        m.insert("jitter_fraction".into(), json!(cfg.jitter.fraction));
        m.insert("jitter_mode".into(), json!(cfg.jitter.mode));
        m.insert("samples".into(), json!(cfg.jitter.samples));
    }
    m
}

fn physical_block(p: &PhysicalParams<f64>, wall_time: f64, probability: f64) -> Result<Value> {
    Ok(json!({
        "g_mhz": p.g_mhz,
        "gamma_mhz": p.gamma_mhz,
        "kappa_mhz": p.kappa_mhz,
        "wall_time_s": wall_time,
        "yield_time_s": yield_seconds(wall_time, probability)?,
    }))
}

fn loss_points(cfg: &RunConfig) -> Vec<(f64, f64)> {
    match &cfg.params {
        Some(ParamSource::Dimensionless { kappas, gammas }) => kappas
            .iter()
            .flat_map(|&k| gammas.iter().map(move |&g| (k, g)))
            .collect(),
        Some(ParamSource::Physical(p)) => {
            let d = to_dimensionless(p);
            vec![(d.kappa_l, d.gamma_l)]
        }
        None => {
            let axis: Vec<f64> = (0..=12).map(|i| 0.025 * i as f64).collect();
            axis.iter().flat_map(|&k| axis.iter().map(move |&g| (k, g))).collect()
        }
    }
}

fn schedule_names(s: &Schedule) -> Value {
    Value::Array(s.ops().iter().map(|op| json!(op.name())).collect())
}

/// Runs a resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<Report> {
    let (schedule, ideal) = compile_schedule(&cfg.chain, cfg.keep_parent);
    let mut report = Report {
        command: cfg.command,
        chain: cfg.chain.clone(),
        params: param_block(cfg),
        extra: Map::new(),
        table: Table::default(),
        seed: None,
        warnings: Vec::new(),
    };
    match cfg.command {
        Command::BuildGraph => {
            let g = graph_of_schedule(&schedule);
            report.extra.insert("schedule".into(), schedule_names(&schedule));
            report.extra.insert("vertex_count".into(), json!(g.vertex_count()));
            let mut t = Table::new(&["source", "target"]);
            for (a, b) in g.edges() {
                t.push(vec![Cell::Int(a as u64), Cell::Int(b as u64)]);
            }
            report.table = t;
        }
        Command::SimulateIdeal => {
            report.table = ideal_table(&schedule, &ideal)?;
        }
        Command::SimulateNoisy | Command::Sweep => {
            let ev = Evaluator::new(&schedule, &cfg.protocol, &cfg.solver)?;
            let points = loss_points(cfg);
            let convention = cfg.convention;
            let metrics = in_pool(cfg.threads, || {
                use rayon::prelude::*;
                points
                    .par_iter()
                    .map(|&(k, g)| ev.evaluate(&CavityParams::symmetric(k, g).with_convention(convention)))
                    .collect::<Result<Vec<_>>>()
            })?;
            let mut t = Table::new(&["kappa", "gamma", "fidelity", "probability"]);
            for (&(k, g), m) in points.iter().zip(&metrics) {
                t.push(vec![Cell::Float(k), Cell::Float(g), Cell::Float(m.fidelity), Cell::Float(m.success_prob)]);
            }
            if cfg.command == Command::SimulateNoisy {
                let post: Vec<Value> = metrics.iter().map(|m| json!(m.fidelity_post_measurement)).collect();
                report.extra.insert("fidelity_post_measurement".into(), Value::Array(post));
                if let (Some(ParamSource::Physical(p)), Some(m)) = (&cfg.params, metrics.first()) {
                    let wall = p.to_seconds(ev.plan().total_duration());
                    report.extra.insert("physical".into(), physical_block(p, wall, m.success_prob)?);
                }
            }
            report.table = t;
        }
        Command::Jitter => {
            let ev = Evaluator::new(&schedule, &cfg.protocol, &cfg.solver)?;
            let mut t = Table::new(&[
                "kappa",
                "gamma",
                "fidelity",
                "probability",
                "mean_fidelity",
                "std_fidelity",
                "mean_probability",
                "std_probability",
            ]);
            for (k, g) in loss_points(cfg) {
                let params = CavityParams::symmetric(k, g).with_convention(cfg.convention);
                let base = ev.evaluate(&params)?;
                let j = in_pool(cfg.threads, || jitter_with(&ev, &params, &cfg.jitter))?;
                t.push(vec![
                    Cell::Float(k),
                    Cell::Float(g),
                    Cell::Float(base.fidelity),
                    Cell::Float(base.success_prob),
                    Cell::Float(j.mean_fidelity),
                    Cell::Float(j.std_fidelity),
                    Cell::Float(j.mean_probability),
                    Cell::Float(j.std_probability),
                ]);
            }
            report.table = t;
            report.seed = Some(cfg.jitter.seed);
        }
        Command::YieldTime => {
            let Some(ParamSource::Physical(p)) = &cfg.params else {
                return Err(Error::invalid("yield-time needs physical parameters"));
            };
            let ev = Evaluator::new(&schedule, &cfg.protocol, &cfg.solver)?;
            let params = to_dimensionless(p).with_convention(cfg.convention);
            let m = ev.evaluate(&params)?;
            let wall = p.to_seconds(ev.plan().total_duration());
            let mut t = Table::new(&["kappa", "gamma", "probability", "wall_time_s", "yield_time_s"]);
            t.push(vec![
                Cell::Float(params.kappa_l),
                Cell::Float(params.gamma_l),
                Cell::Float(m.success_prob),
                Cell::Float(wall),
                Cell::Float(yield_seconds(wall, m.success_prob)?),
            ]);
            report.table = t;
        }
    }
    if cfg.command != Command::BuildGraph && cfg.command != Command::SimulateIdeal {
        let plan = cfg.protocol.plan(&schedule, 1.0);
        let probe = crate::noisy::cascade_run(&plan, &CavityParams::lossless(), &cfg.solver)?;
        if probe.timing_warning() {
            report.warnings.push(format!(
                "pulse timing leaves excited-state amplitude {:.3e} in the no-loss branch",
                probe.max_residual_excited
            ));
        }
    }
    Ok(report)
}

fn ideal_table(schedule: &Schedule, frame: &PauliFrame) -> Result<Table> {
    let target = canonical_graph_state::<f64>(&graph_of_schedule(schedule));
    let mut t = Table::new(&["outcome", "probability", "fidelity"]);
    let plus = StateVector::parent_plus();
    if schedule.measures_parent() {
        for outcome in 0..2u8 {
            let (state, rec) = run_schedule_ideal_with(schedule, &plus, outcome)?;
            let p = rec.map_or(1.0, |r| r.probability);
            let f = fidelity(&state.apply_frame(frame, Some(outcome))?, &target)?;
            t.push(vec![Cell::Int(u64::from(outcome)), Cell::Float(p), Cell::Float(f)]);
        }
    } else {
        let (state, _) = run_schedule_ideal_with(schedule, &plus, 0)?;
        let f = fidelity(&state.apply_frame(frame, None)?, &target)?;
        t.push(vec![Cell::Text("none".into()), Cell::Float(1.0), Cell::Float(f)]);
    }
    Ok(t)
}

fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Parses, executes and emits; returns the process exit status.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(c) => c,
        Err(e) if e.is_info => {
            let _ = stdout.write_all(e.message.as_bytes());
            return EXIT_OK;
        }
        Err(e) => {
            let _ = stderr.write_all(e.message.as_bytes());
            return EXIT_USAGE;
        }
    };
    let report = match execute(&cfg) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_RUNTIME;
        }
    };
    for w in &report.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    match emit(&report, cfg.format, cfg.out.as_deref(), stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_RUNTIME
        }
    }
}
