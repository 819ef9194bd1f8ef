//! The `adiametric` command-line driver.
//!
//! Exit codes: 0 success, 2 unusable arguments or configuration, 3 solver
//! failure or failed check, 4 the model admits no positive metric (complex
//! spectrum, not pseudo-Hermitian, ramp leaves the real-spectrum region). In
//! the last case a JSON error report is written to the output destination.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, Model, ModelConfig, SweepParameter};
use crate::error::Error;
use crate::flow::{evolve, quasi_hermiticity_residual, static_metric};
use crate::integrate::uniform_grid;
use crate::linalg::{
    biorthogonal_decompose, hermiticity_defect, identity, positivity_check, ComplexMatrix,
};
use crate::moyal::{
    cubic_linear_switch_evolve, cubic_static_first_order, first_order_residual, harmonic_flow,
    harmonic_hamiltonian, harmonic_transport, pig_closed_form, random_polynomial, star_flow_rhs,
    Coefficient, Exact, ExactPolynomial, ANSATZ_LABELS,
};
use crate::output::{to_value, Cell, Report, Table};
use crate::scattering::{epsilon_ladder, s_matrix, smooth_ladder, EpsilonLadder};
use crate::schedule::{adiabatic_sweep, is_nonincreasing, HamiltonianSchedule};
use crate::two_level::{
    classify_regime, fig1_experiment, pauli_compose, static_solution, FigOneParams,
    MetricComponents, Regime, TwoLevelParams,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_SPECTRAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "adiametric",
    version,
    about = "Metric operators for time-dependent non-Hermitian Hamiltonians"
)]
pub struct Cli {
    /// JSON model configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (standard output when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Suppress the summary line on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Integrate the metric along the configured schedule.
    Evolve,
    /// Run an adiabaticity ladder (ramp duration or switching rate).
    Sweep,
    /// Adiabatic S-matrix, Møller operators and the ε extrapolation.
    Smatrix,
    /// Static metric, its residual and positivity.
    Static,
    /// Exact checks of the star-product algebra (and the cubic closed form).
    MoyalCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Sweep => "sweep",
            Command::Smatrix => "smatrix",
            Command::Static => "static",
            Command::MoyalCheck => "moyal-check",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Evolve | Command::Sweep => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Solver(Error),
    /// The run completed but a check did not pass; the report is still written.
    Check(Report),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn config_error<T>(msg: impl Into<String>) -> Run<T> {
    Err(Failure::Config(msg.into()))
}

/// Parses `args` (including the program name) and runs the command, writing
/// data to the configured destination or `stdout` and diagnostics to
/// `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    execute(&cli, stdout, stderr)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let config = match &cli.config {
        Some(path) => match ModelConfig::load(path) {
            Ok(c) => Some(c),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_CONFIG;
            }
        },
        None if cli.command == Command::MoyalCheck => None,
        None => {
            let _ = writeln!(stderr, "error: {} needs --config PATH", cli.command.name());
            return EXIT_CONFIG;
        }
    };
    let format = cli
        .format
        .or(config.as_ref().and_then(|c| c.output.format))
        .unwrap_or(cli.command.default_format());
    let destination = cli
        .out
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.output.path.clone()));
    let config_value = match &config {
        Some(c) => to_value(c),
        None => json!({ "checks": crate::config::CheckSection::default() }),
    };

    let outcome = match (cli.command, &config) {
        (Command::Evolve, Some(c)) => cmd_evolve(c),
        (Command::Sweep, Some(c)) => cmd_sweep(c),
        (Command::Smatrix, Some(c)) => cmd_smatrix(c),
        (Command::Static, Some(c)) => cmd_static(c),
        (Command::MoyalCheck, c) => cmd_moyal_check(c.as_ref()),
        (_, None) => unreachable!("checked above"),
    };

    let (report, code) = match outcome {
        Ok(r) => (r, EXIT_OK),
        Err(Failure::Check(r)) => (r, EXIT_SOLVER),
        Err(Failure::Config(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_CONFIG;
        }
        Err(Failure::Solver(e)) => {
            let _ = writeln!(stderr, "error [{}]: {e}", e.kind());
            if !e.is_spectral() {
                return EXIT_SOLVER;
            }
            let doc = json!({
                "config": config_value,
                "error": { "kind": e.kind(), "message": e.to_string() },
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("error report");
            text.push('\n');
            return match emit(destination.as_ref(), text.as_bytes(), stdout) {
                Ok(()) => EXIT_SPECTRAL,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    EXIT_CONFIG
                }
            };
        }
    };

    let bytes = match format {
        Format::Json => report.to_json(&config_value).into_bytes(),
        Format::Csv => match &report.table {
            Some(t) => t.to_csv_string().into_bytes(),
            None => {
                let _ = writeln!(stderr, "error: {} has no tabular output", cli.command.name());
                return EXIT_CONFIG;
            }
        },
    };
    if let Err(msg) = emit(destination.as_ref(), &bytes, stdout) {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_CONFIG;
    }
    if code != EXIT_OK {
        let _ = writeln!(stderr, "{}: check failed", cli.command.name());
    } else if !cli.quiet {
        let rows = report.table.as_ref().map_or(0, |t| t.rows.len());
        let _ = writeln!(stderr, "{}: ok ({rows} rows)", cli.command.name());
    }
    code
}

fn emit(path: Option<&PathBuf>, bytes: &[u8], stdout: &mut dyn Write) -> std::result::Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => stdout.write_all(bytes).map_err(|e| format!("cannot write output: {e}")),
    }
}

// ---------------------------------------------------------------- helpers

fn matrix_columns(prefix: &str, n: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            cols.push(format!("{prefix}_{i}_{j}_re"));
            cols.push(format!("{prefix}_{i}_{j}_im"));
        }
    }
    cols
}

fn matrix_cells(m: &ComplexMatrix) -> Vec<Cell> {
    let n = m.nrows();
    let mut cells = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            cells.push(m[(i, j)].re.into());
            cells.push(m[(i, j)].im.into());
        }
    }
    cells
}

fn entry_table(m: &ComplexMatrix) -> Table {
    let mut t = Table::new(["row", "col", "re", "im"]);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            t.push(vec![
                (i as f64).into(),
                (j as f64).into(),
                m[(i, j)].re.into(),
                m[(i, j)].im.into(),
            ]);
        }
    }
    t
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    to_value(&crate::serde_matrix::to_rows(m))
}

const COMPONENT_COLUMNS: [&str; 5] = ["t", "theta0", "theta1", "theta2", "theta3"];

fn component_table(times: &[f64], comps: &[MetricComponents]) -> Table {
    let mut t = Table::new(COMPONENT_COLUMNS);
    for (time, m) in times.iter().zip(comps) {
        let mut row: Vec<Cell> = vec![(*time).into()];
        row.extend(m.as_array().iter().map(|&x| Cell::Num(x)));
        t.push(row);
    }
    t
}

fn initial_metric(theta0: &Option<ComplexMatrix>, dim: usize) -> Run<ComplexMatrix> {
    match theta0 {
        Some(m) if m.nrows() != dim => config_error(format!(
            "theta0 is {}x{}, the Hamiltonian is {dim}x{dim}",
            m.nrows(),
            m.ncols()
        )),
        Some(m) => Ok(m.clone()),
        None => Ok(identity(dim)),
    }
}

fn validated_schedule(schedule: &HamiltonianSchedule) -> Run<usize> {
    schedule
        .validate()
        .map_err(|e| Failure::Config(format!("schedule: {e}")))
}

enum TwoLevelSource {
    Constant(TwoLevelParams),
    Ramp(FigOneParams),
}

fn two_level_source(params: &Option<TwoLevelParams>, ramp: &Option<FigOneParams>) -> Run<TwoLevelSource> {
    match (params, ramp) {
        (Some(p), None) => Ok(TwoLevelSource::Constant(*p)),
        (None, Some(r)) => Ok(TwoLevelSource::Ramp(*r)),
        (Some(_), Some(_)) => config_error("two-level model takes either params or ramp, not both"),
        (None, None) => config_error("two-level model needs params or ramp"),
    }
}

/// `H₀ = v_μσ_μ/2` and `H_I = i w_μσ_μ/2`.
fn split_two_level(p: &TwoLevelParams) -> (ComplexMatrix, ComplexMatrix) {
    let free = TwoLevelParams::new(p.v, [0.0; 4]);
    let interaction = TwoLevelParams::new([0.0; 4], p.w);
    (pauli_compose(&free), pauli_compose(&interaction))
}

fn check_ladder(values: &[f64], what: &str) -> Run<()> {
    if values.is_empty() {
        return config_error(format!("{what} ladder is empty"));
    }
    if values.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return config_error(format!("{what} ladder values must be positive"));
    }
    let up = values.windows(2).all(|w| w[1] > w[0]);
    let down = values.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return config_error(format!("{what} ladder must be strictly monotone"));
    }
    Ok(())
}

/// Whether `values` never increase as the parameter moves towards the
/// adiabatic end (`T` up or `ε` down).
fn monotone_towards(parameters: &[f64], values: &[f64], increasing_is_adiabatic: bool) -> bool {
    let mut pairs: Vec<(f64, f64)> = parameters.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if !increasing_is_adiabatic {
        pairs.reverse();
    }
    is_nonincreasing(&pairs.iter().map(|p| p.1).collect::<Vec<_>>())
}

fn cubic_params(g: f64, duration: f64) -> Run<()> {
    if !g.is_finite() {
        return config_error("g must be finite");
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return config_error("duration must be positive");
    }
    Ok(())
}

// --------------------------------------------------------------- commands

fn cmd_evolve(cfg: &ModelConfig) -> Run<Report> {
    let s = &cfg.solver;
    match &cfg.model {
        Model::Matrix { schedule, theta0, .. } => {
            let dim = validated_schedule(schedule)?;
            let theta0 = initial_metric(theta0, dim)?;
            let traj = evolve(schedule, &theta0, s.t0, s.t1, &s.flow)?;
            let mut table = Table::new(std::iter::once("t".to_string()).chain(matrix_columns("theta", dim)));
            for (t, m) in traj.times.iter().zip(&traj.metrics) {
                let mut row = vec![Cell::Num(*t)];
                row.extend(matrix_cells(m));
                table.push(row);
            }
            let (t_end, theta_end) = traj.last();
            let diagnostics = json!({
                "samples": traj.len(),
                "max_hermiticity_defect": traj.max_hermiticity_defect(),
                "conservation_defect": traj.conservation_defect(schedule, s.flow.steps_per_unit),
                "final_quasi_hermiticity_residual":
                    quasi_hermiticity_residual(&schedule.hamiltonian_at(t_end), theta_end),
            });
            Ok(Report {
                result: to_value(&traj),
                table: Some(table),
                diagnostics,
            })
        }
        Model::TwoLevel {
            params,
            ramp,
            initial,
            static_branch,
        } => match two_level_source(params, ramp)? {
            TwoLevelSource::Ramp(r) => {
                let res = fig1_experiment(&r, &s.ramp)?;
                let table = component_table(&res.times, &res.components);
                let diagnostics = json!({
                    "samples": res.times.len(),
                    "deviation": res.deviation,
                    "final_static": res.final_static,
                });
                Ok(Report {
                    result: to_value(&res),
                    table: Some(table),
                    diagnostics,
                })
            }
            TwoLevelSource::Constant(p) => {
                let start = match initial {
                    Some(m) => *m,
                    None => static_solution(&p, static_branch.theta0, static_branch.alpha)?,
                };
                let schedule = HamiltonianSchedule::Constant { h: pauli_compose(&p) };
                let traj = evolve(&schedule, &start.to_matrix(), s.t0, s.t1, &s.flow)?;
                let comps = traj
                    .metrics
                    .iter()
                    .map(MetricComponents::from_matrix)
                    .collect::<crate::Result<Vec<_>>>()?;
                let drift = comps.iter().map(|m| m.distance(&start)).fold(0.0, f64::max);
                let diagnostics = json!({
                    "samples": comps.len(),
                    "regime": classify_regime(&p).ok(),
                    "max_drift": drift,
                    "max_hermiticity_defect": traj.max_hermiticity_defect(),
                });
                Ok(Report {
                    result: json!({ "times": traj.times, "components": comps, "solver": traj.solver }),
                    table: Some(component_table(&traj.times, &comps)),
                    diagnostics,
                })
            }
        },
        Model::Cubic { g, duration } => {
            cubic_params(*g, *duration)?;
            let grid = uniform_grid(0.0, *duration, s.flow.samples.max(1) + 1);
            let traj = cubic_linear_switch_evolve(*g, *duration, &grid, &s.cubic)?;
            let mut cols = vec!["t".to_string()];
            for l in ANSATZ_LABELS {
                cols.push(format!("c_{l}_re"));
                cols.push(format!("c_{l}_im"));
            }
            let mut table = Table::new(cols);
            let mut closed_form_error: f64 = 0.0;
            for (t, v) in traj.times.iter().zip(&traj.values) {
                let mut row = vec![Cell::Num(*t)];
                for z in v {
                    row.push(z.re.into());
                    row.push(z.im.into());
                }
                table.push(row);
                let exact = pig_closed_form(*g, *duration, *t)?.to_ansatz();
                for (a, b) in v.iter().zip(&exact) {
                    closed_form_error = closed_form_error.max((a - b).norm());
                }
            }
            let diagnostics = json!({
                "samples": traj.times.len(),
                "max_imag": traj.max_imag(),
                "closed_form_max_abs_error": closed_form_error,
            });
            Ok(Report {
                result: to_value(&traj),
                table: Some(table),
                diagnostics,
            })
        }
    }
}

#[derive(Serialize)]
struct DurationRow {
    duration: f64,
    deviation: f64,
    final_static: Option<MetricComponents>,
}

#[derive(Serialize)]
struct CubicRow {
    duration: f64,
    p3: f64,
    p2q: f64,
    pq2: f64,
    q3: f64,
}

fn cmd_sweep(cfg: &ModelConfig) -> Run<Report> {
    let Some(sweep) = &cfg.sweep else {
        return config_error("sweep needs a `sweep` section");
    };
    let values = &sweep.values;
    match (sweep.parameter, &cfg.model) {
        (SweepParameter::Duration, Model::TwoLevel { params, ramp, .. }) => {
            let TwoLevelSource::Ramp(base) = two_level_source(params, ramp)? else {
                return config_error("duration sweeps need a two-level ramp");
            };
            check_ladder(values, "duration")?;
            let ramp_cfg = cfg.solver.ramp;
            let rows = adiabatic_sweep(values, |t| {
                let r = fig1_experiment(&FigOneParams { duration: t, ..base }, &ramp_cfg)?;
                Ok(DurationRow {
                    duration: t,
                    deviation: r.deviation,
                    final_static: r.final_static,
                })
            })?;
            let devs: Vec<f64> = rows.iter().map(|r| r.result.deviation).collect();
            let monotone = monotone_towards(values, &devs, true);
            let mut table = Table::new(["duration", "deviation", "monotone"]);
            for r in &rows {
                table.push(vec![r.parameter.into(), r.result.deviation.into(), monotone.into()]);
            }
            let results: Vec<&DurationRow> = rows.iter().map(|r| &r.result).collect();
            Ok(Report {
                result: json!({ "rows": results, "monotone": monotone }),
                table: Some(table),
                diagnostics: json!({ "points": rows.len() }),
            })
        }
        (SweepParameter::Duration, Model::Cubic { g, .. }) => {
            check_ladder(values, "duration")?;
            cubic_params(*g, 1.0)?;
            let cubic_cfg = cfg.solver.cubic;
            let rows = adiabatic_sweep(values, |t| {
                let traj = cubic_linear_switch_evolve(*g, t, &[t], &cubic_cfg)?;
                let v = traj.values[0];
                Ok(CubicRow {
                    duration: t,
                    p3: v[6].re,
                    p2q: v[7].re,
                    pq2: v[8].re,
                    q3: v[9].re,
                })
            })?;
            let transient: Vec<f64> = rows.iter().map(|r| r.result.p2q.abs() + r.result.q3.abs()).collect();
            let monotone = monotone_towards(values, &transient, true);
            let mut table = Table::new(["duration", "c_p3", "c_p2q", "c_pq2", "c_q3", "monotone"]);
            for r in &rows {
                let c = &r.result;
                table.push(vec![
                    c.duration.into(),
                    c.p3.into(),
                    c.p2q.into(),
                    c.pq2.into(),
                    c.q3.into(),
                    monotone.into(),
                ]);
            }
            let results: Vec<&CubicRow> = rows.iter().map(|r| &r.result).collect();
            Ok(Report {
                result: json!({ "rows": results, "monotone": monotone }),
                table: Some(table),
                diagnostics: json!({ "points": rows.len() }),
            })
        }
        (SweepParameter::Epsilon, _) => {
            check_ladder(values, "epsilon")?;
            let (pair, theta0) = scattering_setup(cfg)?;
            let ladder = run_ladder(&pair, values, &theta0, cfg)?;
            let defects: Vec<f64> = ladder.rows.iter().map(|r| r.result.unitarity_defect).collect();
            let monotone = monotone_towards(values, &defects, false);
            let mut table = Table::new([
                "epsilon",
                "unitarity_defect",
                "isometry_defect",
                "static_residual",
                "monotone",
            ]);
            for r in &ladder.rows {
                table.push(vec![
                    r.parameter.into(),
                    r.result.unitarity_defect.into(),
                    r.result.isometry_defect.into(),
                    r.result.static_residual.into(),
                    monotone.into(),
                ]);
            }
            Ok(Report {
                result: ladder_json(&ladder),
                table: Some(table),
                diagnostics: json!({ "points": ladder.rows.len(), "monotone": monotone }),
            })
        }
        (SweepParameter::Duration, Model::Matrix { .. }) => {
            config_error("duration sweeps need a two-level ramp or cubic model")
        }
    }
}

#[derive(Clone)]
enum Shape {
    Exponential,
    Smooth { scale: f64 },
}

struct ScatteringPair {
    h0: ComplexMatrix,
    interaction: ComplexMatrix,
    schedule: HamiltonianSchedule,
    shape: Shape,
}

fn scattering_setup(cfg: &ModelConfig) -> Run<(ScatteringPair, ComplexMatrix)> {
    match &cfg.model {
        Model::Matrix { schedule, theta0, .. } => {
            let dim = validated_schedule(schedule)?;
            let theta0 = initial_metric(theta0, dim)?;
            let pair = match schedule {
                HamiltonianSchedule::ExponentialSwitch { h0, interaction, .. } => ScatteringPair {
                    h0: h0.clone(),
                    interaction: interaction.clone(),
                    schedule: schedule.clone(),
                    shape: Shape::Exponential,
                },
                HamiltonianSchedule::SmoothSwitch {
                    h0,
                    interaction,
                    half_width,
                } => ScatteringPair {
                    h0: h0.clone(),
                    interaction: interaction.clone(),
                    schedule: schedule.clone(),
                    shape: Shape::Smooth {
                        scale: cfg.scattering.smooth_scale.unwrap_or(half_width * cfg.scattering.epsilon),
                    },
                },
                _ => return config_error("scattering needs an exponential-switch or smooth-switch schedule"),
            };
            Ok((pair, theta0))
        }
        Model::TwoLevel { params: Some(p), ramp: None, .. } => {
            let eps = cfg.scattering.epsilon;
            if !(eps > 0.0 && eps.is_finite()) {
                return config_error("scattering.epsilon must be positive");
            }
            let (h0, interaction) = split_two_level(p);
            let schedule = HamiltonianSchedule::exponential(h0.clone(), interaction.clone(), eps);
            Ok((
                ScatteringPair {
                    h0,
                    interaction,
                    schedule,
                    shape: Shape::Exponential,
                },
                identity(2),
            ))
        }
        _ => config_error("scattering needs a matrix model or constant two-level params"),
    }
}

fn run_ladder(pair: &ScatteringPair, eps: &[f64], theta0: &ComplexMatrix, cfg: &ModelConfig) -> Run<EpsilonLadder> {
    let sc = &cfg.scattering.config;
    Ok(match pair.shape {
        Shape::Exponential => epsilon_ladder(&pair.h0, &pair.interaction, eps, theta0, sc)?,
        Shape::Smooth { scale } => smooth_ladder(&pair.h0, &pair.interaction, eps, scale, theta0, sc)?,
    })
}

fn ladder_json(ladder: &EpsilonLadder) -> Value {
    let rows: Vec<Value> = ladder
        .rows
        .iter()
        .map(|r| {
            json!({
                "epsilon": r.parameter,
                "unitarity_defect": r.result.unitarity_defect,
                "isometry_defect": r.result.isometry_defect,
                "static_residual": r.result.static_residual,
                "theta_adiabatic": matrix_json(&r.result.theta_adiabatic),
            })
        })
        .collect();
    json!({
        "rows": rows,
        "extrapolated_defect": ladder.extrapolated_defect,
        "extrapolated_metric": matrix_json(&ladder.extrapolated_metric),
        "defect_decreasing": ladder.defect_decreasing,
    })
}

fn cmd_smatrix(cfg: &ModelConfig) -> Run<Report> {
    let (pair, theta0) = scattering_setup(cfg)?;
    let sc = &cfg.scattering;
    let res = s_matrix(&pair.schedule, &theta0, &sc.config)?;
    let unitary = res.unitarity_defect < sc.unitarity_threshold;

    let non_hermitian = hermiticity_defect(&pair.interaction) > 1e-12 * pair.interaction.norm().max(1.0);
    let extrapolation = if non_hermitian && !sc.ladder.is_empty() {
        check_ladder(&sc.ladder, "scattering")?;
        let primary = epsilon_ladder(&pair.h0, &pair.interaction, &sc.ladder, &theta0, &sc.config)?;
        let mut block = json!({ "exponential": ladder_json(&primary) });
        if let Some(scale) = sc.smooth_scale {
            let smooth = smooth_ladder(&pair.h0, &pair.interaction, &sc.ladder, scale, &theta0, &sc.config)?;
            block["smooth"] = ladder_json(&smooth);
            block["shape_metric_difference"] =
                json!((&primary.extrapolated_metric - &smooth.extrapolated_metric).norm());
            block["shape_defect_difference"] =
                json!((primary.extrapolated_defect - smooth.extrapolated_defect).abs());
        }
        Some(block)
    } else {
        None
    };

    let mut result = json!({
        "rate": res.rate,
        "s": matrix_json(&res.s),
        "theta_adiabatic": matrix_json(&res.theta_adiabatic),
        "moller_minus": matrix_json(&res.moller_minus),
        "moller_plus": matrix_json(&res.moller_plus),
        "basis": matrix_json(&res.basis),
        "unitarity_defect": res.unitarity_defect,
        "isometry_defect": res.isometry_defect,
        "static_residual": res.static_residual,
        "unitary": unitary,
    });
    if let Some(block) = extrapolation {
        result["extrapolation"] = block;
    }
    Ok(Report {
        result,
        table: Some(entry_table(&res.s)),
        diagnostics: json!({
            "interaction_hermitian": !non_hermitian,
            "unitarity_threshold": sc.unitarity_threshold,
        }),
    })
}

fn cmd_static(cfg: &ModelConfig) -> Run<Report> {
    match &cfg.model {
        Model::Matrix { schedule, weights, .. } => {
            let dim = validated_schedule(schedule)?;
            let h = schedule.hamiltonian_at(cfg.solver.t0);
            let weights = weights.clone().unwrap_or_else(|| vec![1.0; dim]);
            if weights.len() != dim {
                return config_error(format!("{} weights for a {dim}-level model", weights.len()));
            }
            let system = biorthogonal_decompose(&h)?;
            let theta = static_metric(&system, &weights)?;
            let positivity = positivity_check(&theta)?;
            let residual = quasi_hermiticity_residual(&h, &theta);
            let eigenvalues: Vec<[f64; 2]> = system.eigenvalues.iter().map(|z| [z.re, z.im]).collect();
            Ok(Report {
                result: json!({
                    "theta": matrix_json(&theta),
                    "eigenvalues": eigenvalues,
                    "residual": residual,
                    "positive": positivity.positive,
                    "min_eigenvalue": positivity.min_eigenvalue,
                }),
                table: Some(entry_table(&theta)),
                diagnostics: json!({
                    "biorthogonality_residual": system.biorthogonality_residual(),
                    "hermiticity_defect": hermiticity_defect(&theta),
                }),
            })
        }
        Model::TwoLevel {
            params,
            ramp,
            static_branch,
            ..
        } => {
            let p = match two_level_source(params, ramp)? {
                TwoLevelSource::Constant(p) => p,
                TwoLevelSource::Ramp(r) => r.params_at(cfg.solver.t0),
            };
            match classify_regime(&p)? {
                Regime::ExponentialGrowth { rate } => {
                    return Err(Error::ComplexSpectrum { max_imag: rate / 2.0 }.into())
                }
                Regime::Degenerate => {
                    return Err(Error::NotDiagonalizable {
                        condition: f64::INFINITY,
                    }
                    .into())
                }
                Regime::Oscillatory { .. } => {}
            }
            let m = static_solution(&p, static_branch.theta0, static_branch.alpha)?;
            let theta = m.to_matrix();
            let residual = quasi_hermiticity_residual(&pauli_compose(&p), &theta);
            let mut table = Table::new(["theta0", "theta1", "theta2", "theta3"]);
            table.push(m.as_array().iter().map(|&x| Cell::Num(x)).collect());
            Ok(Report {
                result: json!({
                    "components": m,
                    "theta": matrix_json(&theta),
                    "residual": residual,
                    "positive": m.is_positive(),
                }),
                table: Some(table),
                diagnostics: json!({ "regime": classify_regime(&p)? }),
            })
        }
        Model::Cubic { .. } => {
            // The order-g static family with c = d = 0.
            let theta1 = cubic_static_first_order(Exact::zero(), Exact::zero());
            let residual = first_order_residual(&theta1);
            let mut table = Table::new(["p_power", "q_power", "re", "im"]);
            let mut terms = Vec::new();
            for (&(i, j), c) in theta1.terms() {
                let z = c.to_complex64();
                table.push(vec![(i as f64).into(), (j as f64).into(), z.re.into(), z.im.into()]);
                terms.push(json!({ "p_power": i, "q_power": j, "value": [z.re, z.im], "exact": c.re.to_string() }));
            }
            Ok(Report {
                result: json!({
                    "order": 1,
                    "terms": terms,
                    "residual_terms": residual.len(),
                    "residual_zero": residual.is_zero(),
                }),
                table: Some(table),
                diagnostics: json!({}),
            })
        }
    }
}

struct CheckOutcome {
    name: &'static str,
    passed: bool,
    value: f64,
}

fn cmd_moyal_check(cfg: Option<&ModelConfig>) -> Run<Report> {
    let checks = cfg.map(|c| c.checks).unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(checks.seed);
    let mut outcomes = Vec::new();

    let p = ExactPolynomial::p();
    let q = ExactPolynomial::q();
    let commutator = &q.star(&p) - &p.star(&q);
    let canonical = commutator == ExactPolynomial::constant(Exact::i());
    outcomes.push(CheckOutcome {
        name: "canonical-commutator",
        passed: canonical,
        value: (&commutator - &ExactPolynomial::constant(Exact::i())).len() as f64,
    });

    let mut failures = 0usize;
    for _ in 0..checks.samples {
        let f: ExactPolynomial = random_polynomial(&mut rng, checks.max_degree);
        let g: ExactPolynomial = random_polynomial(&mut rng, checks.max_degree);
        let h: ExactPolynomial = random_polynomial(&mut rng, checks.max_degree);
        if f.star(&g).star(&h) != f.star(&g.star(&h)) {
            failures += 1;
        }
    }
    outcomes.push(CheckOutcome {
        name: "associativity",
        passed: failures == 0,
        value: failures as f64,
    });

    let h0 = harmonic_hamiltonian::<Exact>();
    let mut mismatches = 0usize;
    for d in 0..=6u32 {
        for i in 0..=d {
            let m = ExactPolynomial::monomial(i, d - i, Exact::one());
            if star_flow_rhs(&m, &h0) != harmonic_flow(&m) {
                mismatches += 1;
            }
        }
    }
    outcomes.push(CheckOutcome {
        name: "harmonic-flow",
        passed: mismatches == 0,
        value: mismatches as f64,
    });

    let theta = random_polynomial::<Exact, _>(&mut rng, checks.max_degree).to_float();
    let pi = std::f64::consts::PI;
    let exact_period = [pi, 2.0 * pi, 4.0 * pi]
        .iter()
        .all(|&t| harmonic_transport(&theta, t) == theta);
    let mut shift: f64 = 0.0;
    for _ in 0..8 {
        let t = rng.gen_range(0.0..pi);
        let a = harmonic_transport(&theta, t);
        let b = harmonic_transport(&theta, t + pi);
        shift = shift.max((&a - &b).max_abs() / theta.max_abs().max(1.0));
    }
    outcomes.push(CheckOutcome {
        name: "transport-periodicity",
        passed: exact_period && shift < 1e-12,
        value: shift,
    });

    if let Some(Model::Cubic { g, duration }) = cfg.map(|c| &c.model) {
        cubic_params(*g, *duration)?;
        let c = cfg.expect("model present");
        let times = [duration / 4.0, duration / 2.0, *duration];
        let traj = cubic_linear_switch_evolve(*g, *duration, &times, &c.solver.cubic)?;
        let mut worst: f64 = 0.0;
        for (t, v) in traj.times.iter().zip(&traj.values) {
            let exact = pig_closed_form(*g, *duration, *t)?.to_ansatz();
            for (a, b) in v.iter().zip(&exact) {
                let err = (a - b).norm();
                worst = worst.max(if b.norm() > 0.0 { err / b.norm() } else { err / g.abs().max(1e-300) });
            }
        }
        outcomes.push(CheckOutcome {
            name: "cubic-closed-form",
            passed: worst < checks.closed_form_tol,
            value: worst,
        });
    }

    let mut table = Table::new(["check", "passed", "value"]);
    let mut rows = Vec::new();
    for o in &outcomes {
        table.push(vec![o.name.into(), o.passed.into(), o.value.into()]);
        rows.push(json!({ "check": o.name, "passed": o.passed, "value": o.value }));
    }
    let all = outcomes.iter().all(|o| o.passed);
    let report = Report {
        result: json!({ "checks": rows, "passed": all }),
        table: Some(table),
        diagnostics: json!({ "seed": checks.seed, "samples": checks.samples }),
    };
    if all {
        Ok(report)
    } else {
        Err(Failure::Check(report))
    }
}
