//! The `mvphase` command line: every command writes CSV or JSON.
//!
//! Exit codes are 0 on success, 2 for usage errors (bad flags, invalid
//! parameters, unreadable config) and 3 for numerical or I/O failures.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub use config::{config_tokens, parse_config, parse_range, ConfigError, RangeError};

use crate::asymptotics::{gradient_at_critical, large_sigma_m_sign_change};
use crate::error::Error as ModelError;
use crate::model::ModelParams;
use crate::numerics::QuadratureSpec;
use crate::particles::{
    simulate, transition_stats, InitialCondition, NoiseForm, SimulationConfig, DEFAULT_DELTA,
};
use crate::phase::{
    bifurcation, critical_sigma_dawson, estimate_nu_thresholds, linspace, trace_contour_with,
    BifurcationPath, ContourGrid, Nu1Search,
};
use crate::selfconsistency::find_stationary_means;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const SUBCOMMANDS: [&str; 5] = [
    "classify",
    "bifurcation",
    "contour",
    "simulate",
    "asymptotics",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Model(ModelError::InvalidParameter(_)) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mvphase",
    version,
    about = "Phase structure of a bistable McKean-Vlasov diffusion"
)]
pub struct Cli {
    /// `key = value` file of default flags; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for grid sweeps and particle updates.
    #[arg(long, global = true, env = "MVPHASE_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stable/unstable phase, F'[0] and the stationary means at one point.
    Classify(ClassifyArgs),
    /// Stationary means along a one-parameter path.
    Bifurcation(BifurcationArgs),
    /// Zero set of F'[0] in the (sigma_a, sigma_m) plane.
    Contour(ContourArgs),
    /// Euler-Maruyama run of the interacting particle system.
    Simulate(SimulateArgs),
    /// Critical noise, the nu thresholds and the asymptotic formulas.
    Asymptotics(AsymptoticsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    #[arg(long, default_value_t = QuadratureSpec::default().rel_tol)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = QuadratureSpec::default().abs_tol)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = QuadratureSpec::default().max_subdivisions)]
    pub max_subdivisions: usize,
}

impl QuadArgs {
    fn spec(&self) -> Result<QuadratureSpec, CliError> {
        QuadratureSpec::new(self.rel_tol, self.abs_tol, self.max_subdivisions).map_err(Into::into)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long)]
    pub sigma_a: f64,
    #[arg(long)]
    pub sigma_m: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
}

impl ParamArgs {
    fn params(&self) -> ModelParams {
        ModelParams {
            nu: self.nu,
            sigma_a: self.sigma_a,
            sigma_m: self.sigma_m,
            a: self.a,
            theta: self.theta,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathKind {
    /// `sigma_m = k sigma_a`, sweeping `sigma_a`.
    Ray,
    SigmaA,
    SigmaM,
    Theta,
}

fn range_arg(s: &str) -> Result<(f64, f64), String> {
    parse_range(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct BifurcationArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub nu: f64,
    /// Base `sigma_a` (unused on `ray` and `sigma-a` paths).
    #[arg(long, default_value_t = 1.0)]
    pub sigma_a: f64,
    /// Base `sigma_m` (unused on `ray` and `sigma-m` paths).
    #[arg(long, default_value_t = 0.0)]
    pub sigma_m: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = PathKind::Ray)]
    pub path: PathKind,
    /// Ray slope `sigma_m / sigma_a`.
    #[arg(long, default_value_t = 0.0)]
    pub k: f64,
    /// Swept parameter range, `lo:hi`.
    #[arg(long, value_parser = range_arg, allow_hyphen_values = true)]
    pub range: (f64, f64),
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
    pub samples: u64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ContourArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, value_parser = range_arg, default_value = "0.1:2")]
    pub sigma_a_range: (f64, f64),
    #[arg(long, value_parser = range_arg, default_value = "0:3")]
    pub sigma_m_range: (f64, f64),
    /// Grid points per axis (at least 32).
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Sidecar metadata; defaults to `<output>.json`.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub quad: QuadArgs,
}

/// Initial particle states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitArg {
    Positive,
    Symmetric,
    Gaussian,
    /// The positive stationary mean if there is one, otherwise symmetric.
    Root,
    Constant(f64),
}

fn init_arg(s: &str) -> Result<InitArg, String> {
    match s {
        "positive" => Ok(InitArg::Positive),
        "symmetric" => Ok(InitArg::Symmetric),
        "gaussian" => Ok(InitArg::Gaussian),
        "root" => Ok(InitArg::Root),
        _ => s
            .strip_prefix("constant:")
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .map(InitArg::Constant)
            .ok_or_else(|| {
                format!("expected positive|symmetric|gaussian|root|constant:<x>, got `{s}`")
            }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Two,
    Single,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Particle count.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long)]
    pub dt: f64,
    #[arg(long)]
    pub seed: u64,
    /// Start of the averaging window; defaults to a fifth of `t_end`.
    #[arg(long)]
    pub burn_in: Option<f64>,
    #[arg(long, value_parser = init_arg, default_value = "positive")]
    pub init: InitArg,
    #[arg(long, value_enum, default_value_t = NoiseArg::Two)]
    pub noise: NoiseArg,
    /// Dead band for counting sign changes of the mean.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Summary JSON; defaults to `<output>.json`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AsymptoticsArgs {
    /// `nu` range of the tabulated formulas.
    #[arg(long, value_parser = range_arg, default_value = "0:0.45")]
    pub nu_range: (f64, f64),
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
    pub samples: u64,
    /// Contour resolution used for `nu_1`.
    #[arg(long, default_value_t = Nu1Search::default().resolution)]
    pub resolution: usize,
    #[arg(long, default_value_t = Nu1Search::default().sigma_m_max)]
    pub sigma_m_max: f64,
    #[arg(long, default_value_t = Nu1Search::default().tol)]
    pub nu1_tol: f64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

/// Inserts config-file flags right after the subcommand, dropping any the
/// user also gave on the command line.
fn expand_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some((at, len, path)) = config::find_config(&args) else {
        return Ok(args);
    };
    args.drain(at..at + len);
    let path = PathBuf::from(path);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let entries =
        parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let given = |key: &str| {
        let flag = format!("--{key}");
        args.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&format!("{flag}="))
        })
    };
    let kept: Vec<_> = entries.into_iter().filter(|(k, _)| !given(k)).collect();
    let sub = args
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.iter().any(|s| a == s))
        .map_or(args.len(), |i| i + 2);
    let tail = args.split_off(sub);
    args.extend(config_tokens(&kept));
    args.extend(tail);
    Ok(args)
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match expand_config(args).map(Cli::try_parse_from) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t as usize);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    // Stdout output is buffered: the command runs inside the pool.
    let mut buf = Vec::new();
    let res = pool.install(|| match &cli.command {
        Command::Classify(a) => cmd_classify(a, &mut buf),
        Command::Bifurcation(a) => cmd_bifurcation(a, &mut buf),
        Command::Contour(a) => cmd_contour(a, &mut buf),
        Command::Simulate(a) => cmd_simulate(a, &mut buf),
        Command::Asymptotics(a) => cmd_asymptotics(a, &mut buf),
    });
    out.write_all(&buf).map_err(io_err(Path::new("<stdout>")))?;
    res
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn create(path: &Path) -> Result<io::BufWriter<fs::File>, CliError> {
    Ok(io::BufWriter::new(
        fs::File::create(path).map_err(io_err(path))?,
    ))
}

fn write_json<T: Serialize + ?Sized>(value: &T, mut w: impl Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| CliError::Io {
        path: "<output>".into(),
        source: e,
    })
}

/// `foo.csv` -> `foo.csv.json`.
fn sidecar(output: &Path, explicit: Option<&PathBuf>) -> PathBuf {
    explicit.cloned().unwrap_or_else(|| {
        let mut s = output.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    })
}

fn cmd_classify(args: &ClassifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let r = find_stationary_means(&args.params.params(), &args.quad.spec()?)?;
    let v = json!({
        "phase": r.phase,
        "dF0": r.derivative_at_zero,
        "roots": r.roots,
    });
    serde_json::to_writer(&mut *out, &v)?;
    writeln!(out).map_err(io_err(Path::new("<stdout>")))
}

fn cmd_bifurcation(args: &BifurcationArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let base = ModelParams {
        nu: args.nu,
        sigma_a: args.sigma_a,
        sigma_m: args.sigma_m,
        a: args.a,
        theta: args.theta,
    };
    let range = args.range;
    let path = match args.path {
        PathKind::Ray => BifurcationPath::Ray { k: args.k, range },
        PathKind::SigmaA => BifurcationPath::SigmaA { range },
        PathKind::SigmaM => BifurcationPath::SigmaM { range },
        PathKind::Theta => BifurcationPath::Theta { range },
    };
    let d = bifurcation(&base, path, args.samples as usize, &args.quad.spec()?)?;
    let sink: Box<dyn Write + '_> = match &args.output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(&mut *out),
    };
    if args.format == Format::Json {
        return write_json(&d, sink);
    }
    let mut w = csv_writer(sink);
    w.write_record(["param_value", "root_neg", "root_zero", "root_pos"])?;
    for s in &d.samples {
        let f = |x: f64| x.to_string();
        let row = match s.roots.as_slice() {
            [r0] => [f(s.value), String::new(), f(*r0), String::new()],
            [n, z, p] => [f(s.value), f(*n), f(*z), f(*p)],
            other => {
                return Err(ModelError::InconsistentRootCount {
                    count: other.len(),
                    roots: other.to_vec(),
                }
                .into())
            }
        };
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(Path::new("<output>")))
}

fn cmd_contour(args: &ContourArgs, _out: &mut dyn Write) -> Result<(), CliError> {
    let spec = args.quad.spec()?;
    let grid = ContourGrid::new(
        args.sigma_a_range,
        args.sigma_m_range,
        args.resolution,
        args.resolution,
    )?;
    let c = trace_contour_with(args.nu, args.a, args.theta, &grid, &spec)?;
    // The additive critical point only exists for a positive coupling and well depth.
    let sigma_c = if args.a > 0.0 && args.theta > 0.0 {
        Some(critical_sigma_dawson(args.theta, args.a, &spec)?)
    } else {
        None
    };
    let mut starts = Vec::with_capacity(c.polylines.len());
    let mut at = 0;
    for l in &c.polylines {
        starts.push(at);
        at += l.len();
    }
    if args.format == Format::Json {
        write_json(
            &json!({ "contour": &c, "sigma_c": sigma_c }),
            create(&args.output)?,
        )?;
    } else {
        let mut w = csv_writer(create(&args.output)?);
        w.write_record(["sigma_a", "sigma_m"])?;
        for (sa, sm) in c.points() {
            w.write_record([sa.to_string(), sm.to_string()])?;
        }
        w.flush().map_err(io_err(&args.output))?;
    }
    let meta = json!({
        "nu": args.nu,
        "a": args.a,
        "theta": args.theta,
        "grid": grid,
        "sigma_c": sigma_c,
        "points": at,
        "polyline_starts": starts,
        "refined": c.refined,
        "quadrature": spec,
    });
    let meta_path = sidecar(&args.output, args.meta.as_ref());
    write_json(&meta, create(&meta_path)?)
}

fn cmd_simulate(args: &SimulateArgs, _out: &mut dyn Write) -> Result<(), CliError> {
    let p = args.params.params();
    p.validate_sde()?;
    let burn_in = args.burn_in.unwrap_or(0.2 * args.t_end);
    let mut root = None;
    let init = match args.init {
        InitArg::Positive => InitialCondition::AllPositive,
        InitArg::Symmetric => InitialCondition::Symmetric,
        InitArg::Gaussian => InitialCondition::Gaussian,
        InitArg::Constant(x) => InitialCondition::Constant(x),
        InitArg::Root => {
            if p.sigma_a == 0.0 {
                return Err(CliError::Usage("--init root needs sigma_a > 0".into()));
            }
            root = find_stationary_means(&p, &args.quad.spec()?)?.positive_root();
            root.map_or(InitialCondition::Symmetric, InitialCondition::Constant)
        }
    };
    let noise = match args.noise {
        NoiseArg::Two => NoiseForm::TwoNoise,
        NoiseArg::Single => NoiseForm::SingleNoise,
    };
    let config = SimulationConfig::new(args.n, args.t_end, args.dt, args.seed, burn_in)
        .with_init(init)
        .with_noise(noise);
    let traj = simulate(&p, &config)?;
    let stats = transition_stats(&traj, args.delta)?;

    if args.format == Format::Json {
        write_json(&traj, create(&args.output)?)?;
    } else {
        let mut w = csv_writer(create(&args.output)?);
        w.write_record(["time", "mean"])?;
        for (t, m) in traj.times.iter().zip(&traj.means) {
            w.write_record([t.to_string(), m.to_string()])?;
        }
        w.flush().map_err(io_err(&args.output))?;
    }
    let avg = traj.time_average();
    let summary = json!({
        "params": p,
        "n": args.n,
        "t_end": args.t_end,
        "dt": args.dt,
        "seed": args.seed,
        "burn_in": burn_in,
        "noise": noise,
        "initial_root": root,
        "time_average": avg.mean,
        "se": avg.se,
        "abs_time_average": traj.abs_time_average(),
        "second_moment_average": traj.second_moment_average(),
        "final_mean": traj.final_mean(),
        "transition_count": stats.count,
        "mean_residence": stats.mean_residence,
        "delta": args.delta,
    });
    write_json(
        &summary,
        create(&sidecar(&args.output, args.summary.as_ref()))?,
    )
}

fn cmd_asymptotics(args: &AsymptoticsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = args.quad.spec()?;
    let search = Nu1Search {
        resolution: args.resolution,
        sigma_m_max: args.sigma_m_max,
        tol: args.nu1_tol,
        ..Nu1Search::default()
    };
    let th = estimate_nu_thresholds(&search, &spec)?;
    let (lo, hi) = args.nu_range;
    let grid = linspace(lo, hi, args.samples as usize);
    let gradient = grid
        .iter()
        .map(|&nu| Ok(json!({ "nu": nu, "value": gradient_at_critical(nu, th.m2)? })))
        .collect::<Result<Vec<_>, ModelError>>()?;
    // The threshold is undefined from nu = 1/2 on; report null there.
    let sign_change: Vec<_> = grid
        .iter()
        .map(|&nu| json!({ "nu": nu, "value": large_sigma_m_sign_change(nu).ok() }))
        .collect();
    let v = json!({
        "sigma_c": th.sigma_c,
        "m2": th.m2,
        "nu1": th.nu1,
        "nu2": th.nu2,
        "nu3": th.nu3,
        "nu3_closed_form": th.nu3_closed_form,
        "nu1_search": search,
        "gradient_at_critical": gradient,
        "sign_change_threshold": sign_change,
    });
    match &args.output {
        Some(p) => write_json(&v, create(p)?),
        None => write_json(&v, out),
    }
}
