//! `nhtop` command-line front end. Every command writes CSV to stdout or
//! `--output`; bare commands use the reference parameters (see README).
//!
//! Exit codes: 0 ok, 2 bad configuration, 3 numerical failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use nhtop::analytics::{table1, TABLE1_SIZES};
use nhtop::disorder::{run_ensemble, DisorderConfig};
use nhtop::dynamics::{coherence_trace, coherence_trace_with, linear_time_grid, log_time_grid, Method};
use nhtop::io::{
    write_bulk_edge_csv, write_disorder_csv, write_matrix_csv, write_spectrum_csv, write_table1_csv, write_trace_csv,
    ImpurityConfig, ModelConfig, SshConfig, ThreeSiteConfig,
};
use nhtop::spectral::{decompose, describe_modes};
use nhtop::topology::{bloch_of, bulk_edge_report, closed_form_winding, winding_number_numeric, MIN_K_POINTS};
use nhtop::Error;

#[derive(Parser)]
#[command(name = "nhtop", version, about = "Qubit coherence in dissipative cavity networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the generator with decay rates, qubit overlaps and localization.
    Spectrum(Common),
    /// Qubit coherence C(t) on a time grid.
    Coherence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Evaluation method.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Winding number of the lattice model's Bloch generator.
    Winding {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "numeric")]
        method: WindingArg,
        /// Initial k-point count for the numeric integration (doubled as needed).
        #[arg(long = "k-points")]
        k_points: Option<usize>,
    },
    /// Exact vs. predicted edge-state lifetime and qubit overlap for even SSH chains.
    Table1 {
        #[command(flatten)]
        common: Common,
        /// Chain lengths (even).
        #[arg(long = "Ns", value_delimiter = ',')]
        ns: Option<Vec<usize>>,
    },
    /// Decay-rate scaling with system size and edge-mode counts.
    Scaling {
        #[command(flatten)]
        common: Common,
        /// System sizes, at least four, ascending.
        #[arg(long = "Ns", value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        /// Decay-rate threshold for a quasi-dark mode [default: 1e-3 * gamma].
        #[arg(long = "eps-dark")]
        eps_dark: Option<f64>,
    },
    /// Coherence averaged over random on-site detuning.
    Disorder {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Half-width of the uniform detuning distribution.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        realizations: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Disorder only the qubit site instead of every site.
        #[arg(long = "qubit-only")]
        qubit_only: bool,
    },
    /// Dump the dense matrix H (L = -iH) as row,col,re,im.
    Model(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file [default: stdout].
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Prepend gnuplot-ready comment lines.
    #[arg(long = "gnuplot-header")]
    gnuplot_header: bool,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Number of sites, qubit included.
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "J")]
    j: Option<f64>,
    #[arg(long = "J1")]
    j1: Option<f64>,
    #[arg(long = "J2")]
    j2: Option<f64>,
    #[arg(long = "J3")]
    j3: Option<f64>,
    /// Qubit-cavity coupling of the impurity model.
    #[arg(long)]
    kappa: Option<f64>,
    /// Cavity loss rate.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    eps2: Option<f64>,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long = "t-points")]
    t_points: Option<usize>,
    /// Logarithmic grid from t = 0.01 instead of a linear grid from 0.
    #[arg(long = "log-time")]
    log_time: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Impurity,
    Ssh,
    ThreeSite,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Spectral,
    Expm,
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WindingArg {
    Numeric,
    ClosedForm,
}

/// Contents of `--config`; every field is optional.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    log_time: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    qubit_only: Option<bool>,
    #[serde(rename = "Ns", skip_serializing_if = "Option::is_none")]
    ns: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_dark: Option<f64>,
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Spec(_) | Error::Size(_) | Error::Argument(_) => Failure::Config(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

type Res<T> = Result<T, Failure>;

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn load_config(common: &Common) -> Res<RunConfig> {
    let Some(path) = &common.config else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn kind_of(m: &ModelConfig) -> ModelKind {
    match m {
        ModelConfig::Impurity(_) => ModelKind::Impurity,
        ModelConfig::Ssh(_) => ModelKind::Ssh,
        ModelConfig::ThreeSite(_) => ModelKind::ThreeSite,
        ModelConfig::Custom(_) => ModelKind::Custom,
    }
}

fn strong_loss_chain() -> ModelConfig {
    ModelConfig::ThreeSite(ThreeSiteConfig {
        n: 6,
        j1: 1.4,
        j2: 0.3,
        j3: 3.0,
        j: 0.7,
        gamma: 1.5,
        ..Default::default()
    })
}

fn default_for(kind: ModelKind) -> Res<ModelConfig> {
    Ok(match kind {
        ModelKind::Impurity => ModelConfig::Impurity(ImpurityConfig::default()),
        ModelKind::Ssh => ModelConfig::Ssh(SshConfig::default()),
        ModelKind::ThreeSite => ModelConfig::ThreeSite(ThreeSiteConfig::default()),
        ModelKind::Custom => return Err(config_err("a custom network must come from --config")),
    })
}

/// Layers command default < config file < flags.
fn resolve_model(common: &Common, file: &RunConfig, fallback: ModelConfig) -> Res<ModelConfig> {
    let mut m = match (common.model, &file.model) {
        (Some(k), Some(f)) if kind_of(f) == k => f.clone(),
        (Some(k), _) if kind_of(&fallback) == k => fallback,
        (Some(k), _) => default_for(k)?,
        (None, Some(f)) => f.clone(),
        (None, None) => fallback,
    };
    let mut unused = Vec::new();
    let mut set = |name: &str, flag: Option<f64>, slot: Option<&mut f64>| match (flag, slot) {
        (Some(v), Some(s)) => *s = v,
        (Some(_), None) => unused.push(name.to_string()),
        _ => {}
    };
    match &mut m {
        ModelConfig::Impurity(c) => {
            set("--J", common.j, Some(&mut c.j));
            set("--kappa", common.kappa, Some(&mut c.kappa));
            set("--gamma", common.gamma, Some(&mut c.gamma));
            set("--J1", common.j1, None);
            set("--J2", common.j2, None);
            set("--J3", common.j3, None);
            set("--eps1", common.eps1, None);
            set("--eps2", common.eps2, None);
        }
        ModelConfig::Ssh(c) => {
            set("--J1", common.j1, Some(&mut c.j1));
            set("--J2", common.j2, Some(&mut c.j2));
            set("--gamma", common.gamma, Some(&mut c.gamma));
            set("--J", common.j, None);
            set("--J3", common.j3, None);
            set("--kappa", common.kappa, None);
            set("--eps1", common.eps1, None);
            set("--eps2", common.eps2, None);
        }
        ModelConfig::ThreeSite(c) => {
            set("--J1", common.j1, Some(&mut c.j1));
            set("--J2", common.j2, Some(&mut c.j2));
            set("--J3", common.j3, Some(&mut c.j3));
            set("--J", common.j, Some(&mut c.j));
            set("--eps1", common.eps1, Some(&mut c.eps1));
            set("--eps2", common.eps2, Some(&mut c.eps2));
            set("--gamma", common.gamma, Some(&mut c.gamma));
            set("--kappa", common.kappa, None);
        }
        ModelConfig::Custom(_) => {
            for (name, v) in [
                ("--J", common.j),
                ("--J1", common.j1),
                ("--J2", common.j2),
                ("--J3", common.j3),
                ("--kappa", common.kappa),
                ("--gamma", common.gamma),
                ("--eps1", common.eps1),
                ("--eps2", common.eps2),
            ] {
                set(name, v, None);
            }
        }
    }
    if !unused.is_empty() {
        return Err(config_err(format!("{} not used by this model", unused.join(", "))));
    }
    if let Some(n) = common.n {
        m = m.with_len(n)?;
    }
    Ok(m)
}

fn model_echo(m: &ModelConfig) -> String {
    format!("model={}", serde_json::to_string(m).expect("model config serializes"))
}

fn time_grid(grid: &GridArgs, file: &RunConfig, t_max: f64, t_points: usize) -> Res<Vec<f64>> {
    let t_max = grid.t_max.or(file.t_max).unwrap_or(t_max);
    let n = grid.t_points.or(file.t_points).unwrap_or(t_points);
    if grid.log_time || file.log_time.unwrap_or(false) {
        Ok(log_time_grid(1e-2, t_max, n)?)
    } else {
        Ok(linear_time_grid(t_max, n)?)
    }
}

fn is_log(grid: &GridArgs, file: &RunConfig) -> bool {
    grid.log_time || file.log_time.unwrap_or(false)
}

fn gnuplot(columns: &[usize], log_x: bool, log_y: bool) -> Vec<String> {
    let mut out = vec![
        "set datafile separator \",\"".to_string(),
        "set key autotitle columnhead".to_string(),
    ];
    if log_x {
        out.push("set logscale x".into());
    }
    if log_y {
        out.push("set logscale y".into());
    }
    let plots: Vec<String> = columns[1..]
        .iter()
        .map(|c| format!("'<file>' using {}:{} with lines", columns[0], c))
        .collect();
    out.push(format!("plot {}", plots.join(", ")));
    out
}

fn ns_arg(flag: &Option<Vec<usize>>, file: &RunConfig, default: &[usize]) -> Vec<usize> {
    flag.clone()
        .or_else(|| file.ns.clone())
        .unwrap_or_else(|| default.to_vec())
}

fn cmd_spectrum(c: &Common, out: &mut Vec<u8>) -> Res<()> {
    let file = load_config(c)?;
    let m = resolve_model(c, &file, ModelConfig::Ssh(SshConfig::default()))?;
    let h = m.to_model::<f64>()?.build()?;
    let sd = decompose(&h)?;
    let mut modes = describe_modes(&sd)?;
    modes.sort_by(|a, b| a.decay_rate.total_cmp(&b.decay_rate).then(a.index.cmp(&b.index)));
    let mut head = vec![model_echo(&m)];
    if sd.degeneracy_warning {
        head.push(format!(
            "warning: near-defective spectrum, condition={:e}",
            sd.condition
        ));
    }
    if c.gnuplot_header {
        head.extend(gnuplot(&[2, 3], false, false));
    }
    write_spectrum_csv(out, &modes, &head).map_err(io_err)
}

fn cmd_coherence(c: &Common, grid: &GridArgs, method: Option<MethodArg>, out: &mut Vec<u8>) -> Res<()> {
    let file = load_config(c)?;
    let m = resolve_model(c, &file, ModelConfig::Impurity(ImpurityConfig::default()))?;
    let times = time_grid(grid, &file, 40.0, 401)?;
    let h = m.to_model::<f64>()?.build()?;
    let tr = match method.unwrap_or(MethodArg::Auto) {
        MethodArg::Auto => coherence_trace(&h, &times)?,
        MethodArg::Spectral => coherence_trace_with(&h, &times, Method::Spectral)?,
        MethodArg::Expm => coherence_trace_with(&h, &times, Method::Expm)?,
        MethodArg::Full => coherence_trace_with(&h, &times, Method::FullSuperoperator)?,
    };
    let mut head = vec![model_echo(&m), format!("method={}", tr.method.as_str())];
    if c.gnuplot_header {
        head.extend(gnuplot(&[1, 2], is_log(grid, &file), false));
    }
    write_trace_csv(out, &tr, &head).map_err(io_err)
}

fn cmd_winding(c: &Common, method: WindingArg, k_points: Option<usize>, out: &mut Vec<u8>) -> Res<()> {
    let file = load_config(c)?;
    let m = resolve_model(c, &file, ModelConfig::Ssh(SshConfig::default()))?;
    let model = m.to_model::<f64>()?;
    let result = match method {
        WindingArg::Numeric => {
            let b = bloch_of(&model).ok_or_else(|| config_err("winding needs a lattice model (ssh or three-site)"))?;
            winding_number_numeric(&b, k_points.unwrap_or(MIN_K_POINTS))?
        }
        WindingArg::ClosedForm => {
            closed_form_winding(&model).ok_or_else(|| config_err("no closed form for this model"))??
        }
    };
    writeln!(out, "W={} method={}", result.w, result.method.as_str()).map_err(io_err)
}

fn cmd_table1(c: &Common, ns: &Option<Vec<usize>>, out: &mut Vec<u8>) -> Res<()> {
    let file = load_config(c)?;
    let m = resolve_model(c, &file, ModelConfig::Ssh(SshConfig::default()))?;
    let ModelConfig::Ssh(p) = m else {
        return Err(config_err("table1 is defined for the ssh model only"));
    };
    let ns = ns_arg(ns, &file, &TABLE1_SIZES);
    let rows = table1(p.j1, p.j2, p.gamma, &ns)?;
    let mut head = vec![format!("J1={:e} J2={:e} gamma={:e}", p.j1, p.j2, p.gamma)];
    if c.gnuplot_header {
        head.extend(gnuplot(&[1, 2, 3], false, true));
    }
    write_table1_csv(out, &rows, &head).map_err(io_err)
}

fn cmd_scaling(c: &Common, ns: &Option<Vec<usize>>, eps_dark: Option<f64>, out: &mut Vec<u8>) -> Res<()> {
    let file = load_config(c)?;
    if c.n.is_some() {
        return Err(config_err("scaling takes sizes from --Ns, not --N"));
    }
    let m = resolve_model(c, &file, strong_loss_chain())?;
    let ns = ns_arg(ns, &file, &[6, 9, 12, 15, 18]);
    let eps = eps_dark.or(file.eps_dark);
    let report = bulk_edge_report(&m.to_model::<f64>()?, &ns, eps)?;
    let mut head = vec![model_echo(&m)];
    if c.gnuplot_header {
        head.extend(gnuplot(&[1, 5], false, true));
    }
    write_bulk_edge_csv(out, &report, &head).map_err(io_err)
}

#[allow(clippy::too_many_arguments)]
fn cmd_disorder(
    c: &Common,
    grid: &GridArgs,
    mu: Option<f64>,
    realizations: Option<usize>,
    seed: Option<u64>,
    qubit_only: bool,
    out: &mut Vec<u8>,
) -> Res<()> {
    let file = load_config(c)?;
    let m = resolve_model(c, &file, ModelConfig::Ssh(SshConfig::default()))?;
    let times = time_grid(grid, &file, 100.0, 101)?;
    let model = m.to_model::<f64>()?;
    let n_sites = model.len();
    let mut cfg = DisorderConfig::new(
        model,
        mu.or(file.mu).unwrap_or(0.4),
        realizations.or(file.realizations).unwrap_or(1000),
        seed.or(file.seed).unwrap_or(0),
        times,
    );
    let qubit_only = qubit_only || file.qubit_only.unwrap_or(false);
    if qubit_only {
        cfg.site_mask = Some((0..n_sites).map(|i| i == 0).collect());
    }
    cfg.validate()?;
    let res = run_ensemble(&cfg)?;
    let echo = RunConfig {
        model: Some(m),
        t_max: cfg.times.last().copied(),
        t_points: Some(cfg.times.len()),
        log_time: Some(is_log(grid, &file)),
        mu: Some(cfg.mu),
        realizations: Some(cfg.n_realizations),
        seed: Some(cfg.base_seed),
        qubit_only: Some(qubit_only),
        ..Default::default()
    };
    let mut head = vec![
        format!("config={}", serde_json::to_string(&echo).expect("config serializes")),
        "rng=chacha8 seed_mix=splitmix64 variate=top53".to_string(),
    ];
    if c.gnuplot_header {
        head.extend(gnuplot(&[1, 2], is_log(grid, &file), false));
    }
    write_disorder_csv(out, &res, &head).map_err(io_err)
}

fn cmd_model(c: &Common, out: &mut Vec<u8>) -> Res<()> {
    let file = load_config(c)?;
    let m = resolve_model(c, &file, ModelConfig::Ssh(SshConfig::default()))?;
    let h = m.to_model::<f64>()?.build()?;
    write_matrix_csv(out, &h, &[model_echo(&m)]).map_err(io_err)
}

fn io_err(e: io::Error) -> Failure {
    config_err(format!("writing output: {e}"))
}

fn common_of(cmd: &Command) -> &Common {
    match cmd {
        Command::Spectrum(c) | Command::Model(c) => c,
        Command::Coherence { common, .. }
        | Command::Winding { common, .. }
        | Command::Table1 { common, .. }
        | Command::Scaling { common, .. }
        | Command::Disorder { common, .. } => common,
    }
}

fn run(cli: &Cli) -> Res<()> {
    if let Ok(v) = std::env::var("NHTOP_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| config_err(format!("NHTOP_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_err(e.to_string()))?;
    }
    // compute into memory first so a failed run leaves no partial file
    let mut buf = Vec::new();
    match &cli.command {
        Command::Spectrum(c) => cmd_spectrum(c, &mut buf)?,
        Command::Coherence { common, grid, method } => cmd_coherence(common, grid, *method, &mut buf)?,
        Command::Winding {
            common,
            method,
            k_points,
        } => cmd_winding(common, *method, *k_points, &mut buf)?,
        Command::Table1 { common, ns } => cmd_table1(common, ns, &mut buf)?,
        Command::Scaling { common, ns, eps_dark } => cmd_scaling(common, ns, *eps_dark, &mut buf)?,
        Command::Disorder {
            common,
            grid,
            mu,
            realizations,
            seed,
            qubit_only,
        } => cmd_disorder(common, grid, *mu, *realizations, *seed, *qubit_only, &mut buf)?,
        Command::Model(c) => cmd_model(c, &mut buf)?,
    }
    match &common_of(&cli.command).output {
        Some(path) => {
            let f = File::create(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            w.write_all(&buf).and_then(|_| w.flush()).map_err(io_err)
        }
        None => io::stdout().lock().write_all(&buf).map_err(io_err),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("nhtop: configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("nhtop: numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
