//! Command-line front end.
//!
//! Every subcommand resolves its parameters in the order flag, `--config`
//! JSON file, built-in default. The seed additionally falls back to
//! `SYMPB_SEED` before the built-in default. The resolved configuration is
//! echoed into the header of every CSV so a run can be repeated exactly.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::ensemble::{
    default_t_max, sample_ensemble_with, transmission_scan, EnsembleKind, EnsembleSpec, DEFAULT_CENTRAL_ENERGY,
    DEFAULT_DELTA_E_FRACTION, DEFAULT_N_TRAJ, DEFAULT_Q1_RANGE,
};
use crate::error::{Error, Result};
use crate::evolution::{
    radius_scan, uniform_grid, MixerSpec, DEFAULT_MIXER_SIGMA, DEFAULT_TAU_EFOLDINGS, DEFAULT_TAU_POINTS,
};
use crate::exec::Exec;
use crate::geometry::scan_energies;
use crate::integrate::{integrate_with, EckartMorseSystem, IntegratorConfig, SeparableHamiltonian};
use crate::io::{read_cnf_model, read_matrix, read_params};
use crate::linalg::{ellipsoid_capacity, symplectic_spectrum, SymmetricPd};
use crate::models::{
    builtin_eckart_morse_2dof, builtin_eckart_morse_morse_3dof, CnfModel, EckartMorseParams, QuadraticSaddleModel,
};
use crate::report::{Cell, Table};

/// Seed used when neither a flag, a config file nor `SYMPB_SEED` gives one.
pub const DEFAULT_SEED: u64 = 2024;
pub const SEED_ENV: &str = "SYMPB_SEED";

#[derive(Debug, Parser)]
#[command(name = "sympb", version, about = "Symplectic diagnostics of reaction bottlenecks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON file with parameter values; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout if omitted).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symplectic spectrum and capacity of the ellipsoid {z : zᵀMz ≤ 1}.
    Capacity(CapacityArgs),
    /// Maximal bath actions, candidate width and flux over an energy grid.
    Widths(WidthsArgs),
    /// Saddle-plane projection areas of mixed, evolved balls.
    Exp1(Exp1Args),
    /// Finite-time transmission of bath-localized ensembles.
    Exp2(Exp2Args),
    /// Störmer–Verlet trajectory of the Eckart–Morse(–Morse) Hamiltonian.
    Integrate(IntegrateArgs),
    /// Dump a sampled reactive ensemble.
    Sample(SampleArgs),
}

/// Built-in normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// Eckart–Morse, two degrees of freedom.
    Em2,
    /// Eckart–Morse–Morse, three degrees of freedom.
    Emm3,
}

impl Builtin {
    fn model(self) -> CnfModel {
        match self {
            Builtin::Em2 => builtin_eckart_morse_2dof(),
            Builtin::Emm3 => builtin_eckart_morse_morse_3dof(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CapacityArgs {
    /// Matrix as CSV rows or a JSON array of rows.
    #[serde(skip)]
    pub matrix: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct WidthsArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    /// CNF coefficient table (overrides --builtin).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Monte Carlo samples per energy.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct Exp1Args {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    /// Comma-separated ball radii.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    /// Entry scale of the mixer's Hamiltonian generator; 0 disables mixing.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_points: Option<usize>,
    /// End of the backward-time grid (default 3/λ).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_end: Option<f64>,
    /// Energy of the candidate-width reference column.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Also write the full A(τ) curves here.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curves: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EnsembleArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_center: Option<f64>,
    /// Half-width of the energy window (default 0.01 (E − E0)).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_e: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q1_range: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct Exp2Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    /// Comma-separated bath-localization values in [0, 1].
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    /// Observation time (default 5/λ).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<KindArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum KindArg {
    A,
    B,
}

#[derive(Debug, Args, Serialize)]
pub struct IntegrateArgs {
    /// Eckart–Morse parameter file (built-in parameters if omitted).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof: Option<usize>,
    /// Initial state q_1,…,q_n,p_1,…,p_n.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monitor_stride: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_epsilon: Option<f64>,
    /// Also write the drift / symplecticity summary JSON here.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

// Resolved configurations. These are what the provenance header records.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WidthsConfig {
    pub builtin: Builtin,
    pub model: Option<PathBuf>,
    pub e_min: f64,
    pub e_max: f64,
    pub steps: usize,
    pub samples: u64,
    pub seed: u64,
}

impl Default for WidthsConfig {
    fn default() -> Self {
        WidthsConfig {
            builtin: Builtin::Em2,
            model: None,
            e_min: -0.9,
            e_max: 1.0,
            steps: 20,
            samples: 100_000,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp1Config {
    pub builtin: Builtin,
    pub model: Option<PathBuf>,
    pub radii: Vec<f64>,
    pub sigma: f64,
    pub tau_points: usize,
    pub tau_end: Option<f64>,
    pub energy: f64,
    pub seed: u64,
    pub curves: Option<PathBuf>,
}

impl Default for Exp1Config {
    fn default() -> Self {
        Exp1Config {
            builtin: Builtin::Em2,
            model: None,
            radii: vec![0.05, 0.1, 0.2, 0.4],
            sigma: DEFAULT_MIXER_SIGMA,
            tau_points: DEFAULT_TAU_POINTS,
            tau_end: None,
            energy: DEFAULT_CENTRAL_ENERGY,
            seed: DEFAULT_SEED,
            curves: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp2Config {
    pub model: Option<PathBuf>,
    pub n: usize,
    pub e_center: f64,
    pub delta_e: Option<f64>,
    pub q1_range: f64,
    pub seed: u64,
    pub xi: Vec<f64>,
    pub t_max: Option<f64>,
}

impl Default for Exp2Config {
    fn default() -> Self {
        Exp2Config {
            model: None,
            n: DEFAULT_N_TRAJ,
            e_center: DEFAULT_CENTRAL_ENERGY,
            delta_e: None,
            q1_range: DEFAULT_Q1_RANGE,
            seed: DEFAULT_SEED,
            xi: (0..=10).map(|i| i as f64 / 10.0).collect(),
            t_max: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub model: Option<PathBuf>,
    pub n: usize,
    pub e_center: f64,
    pub delta_e: Option<f64>,
    pub q1_range: f64,
    pub seed: u64,
    pub kind: KindArg,
    pub xi: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            model: None,
            n: DEFAULT_N_TRAJ,
            e_center: DEFAULT_CENTRAL_ENERGY,
            delta_e: None,
            q1_range: DEFAULT_Q1_RANGE,
            seed: DEFAULT_SEED,
            kind: KindArg::A,
            xi: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateConfig {
    pub params: Option<PathBuf>,
    pub dof: Option<usize>,
    pub state: Option<Vec<f64>>,
    pub h: f64,
    pub t_final: f64,
    pub monitor_stride: usize,
    pub fd_epsilon: f64,
    pub summary: Option<PathBuf>,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        IntegrateConfig {
            params: None,
            dof: None,
            state: None,
            h: d.h,
            t_final: d.t_final,
            monitor_stride: d.monitor_stride,
            fd_epsilon: d.fd_epsilon,
            summary: None,
        }
    }
}

/// Overlays flag values on the config file and fills the rest from defaults.
fn resolve<A: Serialize, R: DeserializeOwned>(flags: &A, config: Option<&Path>, seeded: bool) -> Result<R> {
    let mut merged = match config {
        Some(path) => match serde_json::from_str::<Value>(&fs::read_to_string(path)?)? {
            Value::Object(m) => m,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "{}: config must be a JSON object",
                    path.display()
                )))
            }
        },
        None => Map::new(),
    };
    if seeded && !merged.contains_key("seed") {
        if let Some(seed) = env_seed()? {
            merged.insert("seed".into(), json!(seed));
        }
    }
    if let Value::Object(f) = serde_json::to_value(flags)? {
        merged.extend(f);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Error::InvalidInput(format!("configuration: {e}")))
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidInput(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn load_model(file: Option<&Path>, builtin: Builtin) -> Result<CnfModel> {
    match file {
        Some(p) => read_cnf_model(p),
        None => Ok(builtin.model()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn emit(table: &Table, global: &GlobalArgs) -> Result<()> {
    let text = match global.format {
        Format::Csv => table.to_csv_string(),
        Format::Json => serde_json::to_string_pretty(&table.to_json())? + "\n",
    };
    match &global.out {
        Some(p) => write_file(p, &text),
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            w.write_all(text.as_bytes())?;
            w.flush()?;
            Ok(())
        }
    }
}

/// Parses arguments and runs the command. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sympb: {e}");
            exit_code(&e)
        }
    }
}

/// 1 for numerical-domain errors, 2 for I/O and usage errors.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        1
    } else {
        2
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let exec = if cli.global.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    let config = cli.global.config.as_deref();
    let table = match &cli.command {
        Command::Capacity(a) => cmd_capacity(&a.matrix)?,
        Command::Widths(a) => cmd_widths(&resolve(a, config, true)?, exec)?,
        Command::Exp1(a) => cmd_exp1(&resolve(a, config, true)?, &cli.global, exec)?,
        Command::Exp2(a) => cmd_exp2(&resolve(a, config, true)?, exec)?,
        Command::Integrate(a) => cmd_integrate(&resolve(a, config, false)?, exec)?,
        Command::Sample(a) => cmd_sample(&resolve(a, config, true)?, exec)?,
    };
    emit(&table, &cli.global)
}

pub fn cmd_capacity(matrix: &Path) -> Result<Table> {
    let rows = read_matrix(matrix)?;
    let m = SymmetricPd::from_rows(&rows)?;
    if m.dim() % 2 != 0 {
        return Err(Error::Dimension(format!("matrix dimension {} is odd", m.dim())));
    }
    let spectrum = symplectic_spectrum(&m)?;
    let capacity = ellipsoid_capacity(&m)?;
    let mut t = Table::new(
        "capacity",
        &["quantity", "index", "value"],
        &json!({ "matrix": matrix, "dim": m.dim() }),
    )?;
    for (k, v) in spectrum.values().iter().enumerate() {
        t.push(vec!["symplectic_eigenvalue".into(), (k + 1).into(), (*v).into()]);
    }
    t.push(vec!["capacity".into(), Cell::Empty, capacity.into()]);
    Ok(t)
}

pub fn cmd_widths(cfg: &WidthsConfig, exec: Exec) -> Result<Table> {
    let model = load_model(cfg.model.as_deref(), cfg.builtin)?;
    if cfg.steps == 0 {
        return Err(Error::InvalidInput("steps must be at least 1".into()));
    }
    if !(cfg.e_min > model.e0()) {
        return Err(Error::BelowSaddle {
            energy: cfg.e_min,
            e0: model.e0(),
        });
    }
    if !(cfg.e_max >= cfg.e_min) {
        return Err(Error::InvalidInput(format!(
            "e_max = {} is below e_min = {}",
            cfg.e_max, cfg.e_min
        )));
    }
    let energies = uniform_grid(cfg.e_min, cfg.e_max, cfg.steps);
    let rows = scan_energies(&model, &energies, cfg.samples, cfg.seed, exec)?;

    let mut columns = vec!["E".to_owned()];
    columns.extend((0..model.bath_count()).map(|b| format!("J_max_{}", b + 2)));
    columns.extend(["c_cand", "limiting_mode", "V", "phi", "std_error", "seed"].map(String::from));
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut t = Table::new("widths", &columns, cfg)?;
    for (w, f) in rows {
        let mut row: Vec<Cell> = vec![w.energy.into()];
        row.extend(w.j_max.iter().map(|&j| Cell::from(j)));
        row.extend([
            w.c_cand.into(),
            w.limiting_mode.into(),
            f.volume.into(),
            f.flux.into(),
            f.std_error.into(),
            f.seed.into(),
        ]);
        t.push(row);
    }
    Ok(t)
}

pub fn cmd_exp1(cfg: &Exp1Config, global: &GlobalArgs, exec: Exec) -> Result<Table> {
    let model = QuadraticSaddleModel::from_cnf(&load_model(cfg.model.as_deref(), cfg.builtin)?);
    if cfg.tau_points == 0 {
        return Err(Error::InvalidInput("tau_points must be at least 1".into()));
    }
    let tau_end = cfg.tau_end.unwrap_or(DEFAULT_TAU_EFOLDINGS / model.lambda);
    if !(tau_end >= 0.0 && tau_end.is_finite()) {
        return Err(Error::InvalidInput(format!("tau_end = {tau_end} must be >= 0")));
    }
    let taus = uniform_grid(0.0, tau_end, cfg.tau_points);
    let mixer = MixerSpec {
        seed: cfg.seed,
        sigma: cfg.sigma,
    };
    let (rows, curves) = radius_scan(&model, &cfg.radii, mixer, &taus, cfg.energy, exec)?;

    let mut t = Table::new("exp1", &["r", "min_area", "pi_r2", "c_cand_ref"], cfg)?;
    for r in &rows {
        t.push(vec![
            r.radius.into(),
            r.min_area.into(),
            r.pi_r2.into(),
            r.c_cand_ref.into(),
        ]);
    }
    if let Some(path) = &cfg.curves {
        let mut c = Table::new("exp1-curves", &["r", "tau", "area"], cfg)?;
        for curve in &curves {
            for (tau, a) in curve.taus.iter().zip(&curve.areas) {
                c.push(vec![curve.radius.into(), (*tau).into(), (*a).into()]);
            }
        }
        let text = match global.format {
            Format::Csv => c.to_csv_string(),
            Format::Json => serde_json::to_string_pretty(&c.to_json())? + "\n",
        };
        write_file(path, &text)?;
    }
    Ok(t)
}

fn ensemble_spec(
    model: &CnfModel,
    n: usize,
    e_center: f64,
    delta_e: Option<f64>,
    q1_range: f64,
    seed: u64,
) -> EnsembleSpec {
    EnsembleSpec {
        n_traj: n,
        e_center,
        delta_e: delta_e.unwrap_or(DEFAULT_DELTA_E_FRACTION * (e_center - model.e0())),
        xi: 0.0,
        q1_range,
        seed,
    }
}

pub fn cmd_exp2(cfg: &Exp2Config, exec: Exec) -> Result<Table> {
    let model = load_model(cfg.model.as_deref(), Builtin::Em2)?;
    let spec = ensemble_spec(&model, cfg.n, cfg.e_center, cfg.delta_e, cfg.q1_range, cfg.seed);
    let t_max = cfg.t_max.unwrap_or_else(|| default_t_max(&model));
    let results = transmission_scan(&model, &spec, &cfg.xi, t_max, exec)?;
    let mut t = Table::new(
        "exp2",
        &["kind", "xi", "fraction", "n_transmitted", "n_total", "t_max", "seed"],
        cfg,
    )?;
    for r in results {
        t.push(vec![
            r.kind.to_string().as_str().into(),
            r.xi.into(),
            r.fraction.into(),
            r.n_transmitted.into(),
            r.n_total.into(),
            r.t_max.into(),
            r.seed.into(),
        ]);
    }
    Ok(t)
}

pub fn cmd_sample(cfg: &SampleConfig, exec: Exec) -> Result<Table> {
    let model = load_model(cfg.model.as_deref(), Builtin::Em2)?;
    let mut spec = ensemble_spec(&model, cfg.n, cfg.e_center, cfg.delta_e, cfg.q1_range, cfg.seed);
    spec.xi = cfg.xi;
    let kind = match cfg.kind {
        KindArg::A => EnsembleKind::A,
        KindArg::B => EnsembleKind::B,
    };
    let ics = sample_ensemble_with(&model, &spec, kind, exec)?;
    let nb = model.bath_count();
    let mut columns = vec!["index".to_owned(), "Q1".into(), "P1".into()];
    columns.extend((0..nb).map(|b| format!("J{}", b + 2)));
    columns.extend((0..nb).map(|b| format!("phase{}", b + 2)));
    columns.extend(["E".into(), "I".into()]);
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut t = Table::new("sample", &columns, cfg)?;
    for (i, ic) in ics.iter().enumerate() {
        let mut row: Vec<Cell> = vec![i.into(), ic.q1.into(), ic.p1.into()];
        row.extend(ic.j.iter().chain(&ic.phases).map(|&x| Cell::from(x)));
        row.extend([ic.energy.into(), ic.i_action.into()]);
        t.push(row);
    }
    Ok(t)
}

/// Reactant-side start with forward momentum along the reaction coordinate.
fn default_state(params: &EckartMorseParams, dof: usize) -> Vec<f64> {
    let mut s = vec![0.0; 2 * dof];
    s[0] = params.x0 - 2.0;
    s[dof] = 1.0;
    for (k, q) in s[1..dof].iter_mut().enumerate() {
        *q = if k % 2 == 0 { 0.3 } else { -0.2 };
    }
    s
}

pub fn cmd_integrate(cfg: &IntegrateConfig, exec: Exec) -> Result<Table> {
    let params = match &cfg.params {
        Some(p) => read_params(p)?,
        None => EckartMorseParams::default(),
    };
    let dof = cfg.dof.unwrap_or(params.max_dof());
    let sys = EckartMorseSystem::new(params, dof)?;
    let state = cfg.state.clone().unwrap_or_else(|| default_state(sys.params(), dof));
    let icfg = IntegratorConfig {
        h: cfg.h,
        t_final: cfg.t_final,
        monitor_stride: cfg.monitor_stride,
        fd_epsilon: cfg.fd_epsilon,
    };
    let record = integrate_with(&sys, &state, &icfg, exec)?;

    let mut columns = vec!["t".to_owned()];
    columns.extend((1..=dof).map(|k| format!("q{k}")));
    columns.extend((1..=dof).map(|k| format!("p{k}")));
    columns.push("H".into());
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let resolved = json!({ "config": cfg, "dof": dof, "state": state, "params": sys.params() });
    let mut t = Table::new("integrate", &columns, &resolved)?;
    for ((time, z), e) in record.times.iter().zip(&record.states).zip(&record.energies) {
        let mut row: Vec<Cell> = vec![(*time).into()];
        row.extend(z.iter().map(|&x| Cell::from(x)));
        row.push((*e).into());
        t.push(row);
    }
    debug_assert_eq!(sys.dof(), dof);
    if let Some(path) = &cfg.summary {
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, &record.summary())?;
        writeln!(f)?;
        f.flush()?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("sympb").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"e_min": -0.5, "steps": 3, "samples": 10}"#).unwrap();
        let cli = parse(&["widths", "--steps", "5", "--seed", "9"]);
        let Command::Widths(a) = &cli.command else { panic!() };
        let r: WidthsConfig = resolve(a, Some(&cfg), true).unwrap();
        assert_eq!((r.e_min, r.steps, r.samples, r.seed), (-0.5, 5, 10, 9));
        assert_eq!(r.e_max, WidthsConfig::default().e_max);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"e_mni": -0.5}"#).unwrap();
        let cli = parse(&["widths"]);
        let Command::Widths(a) = &cli.command else { panic!() };
        let e = resolve::<_, WidthsConfig>(a, Some(&cfg), true).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn widths_row_at_omega_has_unit_action() {
        let cfg = WidthsConfig {
            e_min: crate::models::EM_E0 + crate::models::EM_OMEGA2,
            e_max: crate::models::EM_E0 + crate::models::EM_OMEGA2,
            steps: 1,
            samples: 1000,
            ..WidthsConfig::default()
        };
        let t = cmd_widths(&cfg, Exec::Sequential).unwrap();
        assert_eq!(t.rows.len(), 1);
        let Cell::Float(j) = t.rows[0][1] else { panic!() };
        assert!((j - 1.0).abs() < 1e-12);
    }

    #[test]
    fn below_saddle_is_numerical() {
        let cfg = WidthsConfig {
            e_min: -2.0,
            ..WidthsConfig::default()
        };
        assert_eq!(exit_code(&cmd_widths(&cfg, Exec::Sequential).unwrap_err()), 1);
    }

    #[test]
    fn empty_radii_is_usage_error() {
        let cfg = Exp1Config {
            radii: vec![],
            ..Exp1Config::default()
        };
        let g = GlobalArgs {
            config: None,
            out: None,
            format: Format::Csv,
            sequential: true,
        };
        assert_eq!(exit_code(&cmd_exp1(&cfg, &g, Exec::Sequential).unwrap_err()), 2);
    }

    #[test]
    fn list_flags_parse() {
        let cli = parse(&["exp2", "--xi", "0,0.5,1", "--n", "10"]);
        let Command::Exp2(a) = &cli.command else { panic!() };
        assert_eq!(a.xi.as_deref(), Some(&[0.0, 0.5, 1.0][..]));
        let cli = parse(&["integrate", "--state", "-1,0,0,1,0,0"]);
        let Command::Integrate(a) = &cli.command else { panic!() };
        assert_eq!(a.state.as_deref(), Some(&[-1.0, 0.0, 0.0, 1.0, 0.0, 0.0][..]));
    }
}
