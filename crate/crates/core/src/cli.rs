//! The `favlab` command line.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage, configuration,
//! input or I/O error, 3 enumeration cap exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::favard::{buffon_estimate, favard_length, QuadratureConfig};
use crate::ifs::{preset, SimilaritySystem, DEFAULT_ENUMERATION_CAP};
use crate::lemmas::{run_suite, Suite};
use crate::report::{emit, fmt_f64, render, Format, Report};
use crate::shadow::{maximal_profile_with_cap, multiplicity_with_cap, StepFunction};
use crate::spectral::ergodic::{analyze, ErgodicReport, Lambda};
use crate::spectral::parseval::{parseval_check, ParsevalReport, DEFAULT_STEP};
use crate::spectral::ssv::ssv_scan_with;
use crate::spectral::{phi, split_with, Direction, ProductSpec};
use crate::stacks::{bad_direction_scan, bootstrap_report, e_scan, l2_bound_report, product_inequality_report, theta_grid, EScanConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "favlab", version, about = "Projections of self-similar Cantor sets")]
struct Cli {
    /// Emit JSON instead of CSV (errors too, on stderr).
    #[arg(long, global = true)]
    json: bool,
    /// JSON object of flag values; its entries override the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "FAVLAB_THREADS")]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// gasket, corner4 or random-<L>-<seed>.
    #[arg(long, conflicts_with = "system_file")]
    preset: Option<String>,
    /// System file (JSON) as written by `gen`.
    #[arg(long, visible_alias = "system")]
    system_file: Option<PathBuf>,
    /// Largest number of pieces to enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u64,
}

impl SystemArgs {
    fn load(&self) -> Result<SimilaritySystem> {
        match (&self.preset, &self.system_file) {
            (Some(name), _) => preset(name),
            (None, Some(path)) => SimilaritySystem::from_json(&std::fs::read_to_string(path)?),
            (None, None) => Err(Error::InvalidInput("one of --preset or --system-file is required".into())),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a system file, or with --n list the depth-n pieces.
    #[command(args_override_self = true)]
    Gen {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Multiplicity function f_{n,θ}, or the maximal profile with --maximal.
    #[command(args_override_self = true)]
    Shadow {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        maximal: bool,
    },
    /// Favard length by adaptive quadrature over directions.
    #[command(args_override_self = true)]
    Favard {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        n: usize,
        /// Initial number of directions.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 6)]
        refinements: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Exit 1 when the target error is not reached.
        #[arg(long)]
        strict: bool,
    },
    /// Monte Carlo (Buffon needle) estimate of the Favard length.
    #[command(args_override_self = true)]
    Buffon {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Fourier-side products on [base^{n-m}, base^n], Parseval check, or the coefficient sequence.
    #[command(args_override_self = true)]
    Spectral(SpectralArgs),
    /// Run a verification suite.
    #[command(args_override_self = true)]
    Verify {
        /// blaschke, cover, turan, doubling, cetsq (randomized) or keyobs, sine, dist (grids).
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Required for randomized suites.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Level-set scans of the maximal profile across directions.
    #[command(args_override_self = true)]
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
struct SpectralArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Projection angle.
    #[arg(long, conflicts_with = "t")]
    theta: Option<f64>,
    /// Slope parameter of the normalized form.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 6)]
    ell: usize,
    /// Also report the small-value cover of the low-frequency block.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    /// Compare the L² norm of f_{n,θ} on both sides of Plancherel.
    #[arg(long)]
    parseval: bool,
    /// Frequency cutoff for --parseval (default base^{n+3}).
    #[arg(long)]
    range: Option<f64>,
    /// Coefficient sequence 2(1 + cos(4^k λ)) for a real λ.
    #[arg(long, conflicts_with = "turn")]
    lambda: Option<f64>,
    /// Same, for λ = 2π p/q given as p/q.
    #[arg(long)]
    turn: Option<String>,
    /// Number of coefficients.
    #[arg(long, default_value_t = 1000)]
    count: usize,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// product, escan, l2, bootstrap or baddir.
    #[arg(long)]
    check: String,
    #[arg(long = "N", default_value_t = 4)]
    depth: usize,
    #[arg(long = "K", value_delimiter = ',', default_value = "2")]
    k: Vec<u32>,
    #[arg(long = "M", value_delimiter = ',', default_value = "2")]
    level_m: Vec<u32>,
    /// Number of equally spaced angles in [0, π).
    #[arg(long = "theta-grid", default_value_t = 64)]
    theta_grid: usize,
    /// Exponent in the E-set threshold K^{-beta}.
    #[arg(long, default_value_t = 3.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.05)]
    tau: f64,
    /// Direction for bootstrap.
    #[arg(long, default_value_t = 0.2)]
    theta: f64,
    #[arg(long = "l-max", default_value_t = 4)]
    l_max: usize,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    ell: usize,
    #[arg(long = "x-grid", default_value_t = 40_000)]
    x_grid: usize,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let json_errors = args.iter().any(|a| a == "--json");
    let cli = match parse_with_config(args) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
        Err(ParseFailure::Config(e)) => return report_error(&e, json_errors),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => return report_error(&Error::InvalidInput(e.to_string()), cli.json),
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        // a closed downstream pipe (`| head`) is not an error
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => report_error(&e, cli.json),
    }
}

enum ParseFailure {
    Clap(clap::Error),
    Config(Error),
}

/// Parses once to find `--config`, then reparses with the config entries appended
/// as flags so that they take precedence.
fn parse_with_config(mut args: Vec<OsString>) -> std::result::Result<Cli, ParseFailure> {
    let first = Cli::try_parse_from(&args).map_err(ParseFailure::Clap)?;
    let Some(path) = &first.config else {
        return Ok(first);
    };
    let text = std::fs::read_to_string(path).map_err(|e| ParseFailure::Config(e.into()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| ParseFailure::Config(e.into()))?;
    let serde_json::Value::Object(map) = value else {
        return Err(ParseFailure::Config(Error::Parse("config must be a JSON object".into())));
    };
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            serde_json::Value::Bool(true) => args.push(flag.into()),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => args.extend([flag.into(), s.into()]),
            serde_json::Value::Number(n) => args.extend([flag.into(), n.to_string().into()]),
            serde_json::Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(|i| i.to_string().trim_matches('"').to_string()).collect();
                args.extend([flag.into(), joined.join(",").into()]);
            }
            serde_json::Value::Object(_) => {
                return Err(ParseFailure::Config(Error::Parse(format!("config entry `{key}` is an object"))));
            }
        }
    }
    Cli::try_parse_from(&args).map_err(ParseFailure::Clap)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::EnumerationCapExceeded { .. } => EXIT_CAP,
        _ => EXIT_USAGE,
    }
}

fn report_error(e: &Error, json: bool) -> i32 {
    if json {
        #[derive(Serialize)]
        struct ErrorReport<'a> {
            error: &'a str,
            message: String,
        }
        eprintln!("{}", crate::report::to_json(&ErrorReport { error: e.kind(), message: e.to_string() }));
    } else {
        eprintln!("favlab: {e}");
    }
    exit_code(e)
}

/// Runs the command; `Ok(false)` means a verification check failed.
fn dispatch(cli: &Cli) -> Result<bool> {
    let format = if cli.json { Format::Json } else { Format::Csv };
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Gen { sys, n } => {
            let system = sys.load()?;
            match n {
                None => emit(&SystemReport(system.to_file()), format, out)?,
                Some(n) => emit(&PiecesReport::new(&system, *n, sys.cap)?, format, out)?,
            }
            Ok(true)
        }
        Command::Shadow { sys, n, theta, maximal } => {
            let system = sys.load()?;
            let f = if *maximal {
                maximal_profile_with_cap(&system, *n, *theta, sys.cap)?.0
            } else {
                multiplicity_with_cap(&system, *n, *theta, sys.cap)?
            };
            emit(&ShadowReport::new(&system, *n, *theta, *maximal, f), format, out)?;
            Ok(true)
        }
        Command::Favard { sys, n, grid, refinements, tol, strict } => {
            let system = sys.load()?;
            let cfg =
                QuadratureConfig { grid_size: *grid, refinement_limit: *refinements, target_rel_error: *tol, enumeration_cap: sys.cap };
            let result = favard_length(&system, *n, &cfg)?;
            emit(&result, format, out)?;
            Ok(result.converged || !strict)
        }
        Command::Buffon { sys, n, trials, seed } => {
            let system = sys.load()?;
            system.checked_piece_count(*n, sys.cap)?;
            emit(&buffon_estimate(&system, *n, *trials, *seed)?, format, out)?;
            Ok(true)
        }
        Command::Spectral(args) => spectral(args, format, out),
        Command::Verify { suite, trials, seed } => {
            let suite: Suite = suite.parse()?;
            let randomized = matches!(suite, Suite::Blaschke | Suite::Cover | Suite::Turan | Suite::Doubling | Suite::Cetsq);
            let seed = match (seed, randomized) {
                (Some(s), _) => *s,
                (None, false) => 0,
                (None, true) => return Err(Error::InvalidInput(format!("suite {} needs --seed", suite.name()))),
            };
            let report = run_suite(suite, *trials, seed)?;
            emit(&report, format, out)?;
            Ok(report.pass)
        }
        Command::Scan(args) => scan(args, format, out),
    }
}

fn spectral(args: &SpectralArgs, format: Format, out: Option<&std::path::Path>) -> Result<bool> {
    if args.lambda.is_some() || args.turn.is_some() {
        let lambda = match (&args.lambda, &args.turn) {
            (Some(x), _) => Lambda::Real(*x),
            (None, Some(turn)) => parse_turn(turn)?,
            (None, None) => unreachable!("checked above"),
        };
        emit(&ErgodicOutput(analyze(lambda, args.count)?), format, out)?;
        return Ok(true);
    }
    let system = args.sys.load()?;
    if args.parseval {
        let theta = args.theta.ok_or_else(|| Error::InvalidInput("--parseval needs --theta".into()))?;
        system.checked_piece_count(args.n, args.sys.cap)?;
        let range = args.range.unwrap_or_else(|| system.base().powi(args.n as i32 + 3));
        emit(&ParsevalOutput(parseval_check(&system, theta, args.n, range, DEFAULT_STEP)?), format, out)?;
        return Ok(true);
    }
    let dir = match (args.theta, args.t) {
        (Some(theta), _) => Direction::Theta(theta),
        (None, Some(t)) => Direction::T(t),
        (None, None) => return Err(Error::InvalidInput("one of --theta or --t is required".into())),
    };
    let spec = ProductSpec::new(args.n, args.m, args.ell)?;
    if args.grid < 2 {
        return Err(Error::InvalidInput("--grid must be at least 2".into()));
    }
    let p = phi(&system, dir)?;
    let ratio = system.ratio();
    let (a, b) = spec.interval(ratio);
    let rows = (0..args.grid)
        .map(|i| {
            let x = if i + 1 == args.grid { b } else { a + (b - a) * i as f64 / (args.grid - 1) as f64 };
            let s = split_with(&p, ratio, spec, x);
            [x, s.p1.norm(), s.p2.norm(), s.p_sharp.norm(), s.p_flat.norm(), s.nu_hat.norm()]
        })
        .collect();
    let ssv = match args.threshold {
        Some(th) => {
            let cover = ssv_scan_with(&p, ratio, spec, th, args.grid)?;
            Some(SsvSummary {
                threshold: th,
                component_count: cover.component_count,
                samples_below: cover.samples_below,
                intervals: cover.intervals.intervals().iter().map(|iv| (iv.lo, iv.hi)).collect(),
            })
        }
        None => None,
    };
    emit(&SpectralOutput { spec, rows, ssv }, format, out)?;
    Ok(true)
}

fn parse_turn(s: &str) -> Result<Lambda> {
    let (p, q) = s.split_once('/').ok_or_else(|| Error::Parse(format!("expected p/q, got `{s}`")))?;
    let parse = |v: &str| v.trim().parse::<u64>().map_err(|e| Error::Parse(format!("`{v}`: {e}")));
    Ok(Lambda::RationalTurn { p: parse(p)?, q: parse(q)? })
}

fn scan(args: &ScanArgs, format: Format, out: Option<&std::path::Path>) -> Result<bool> {
    let system = args.sys.load()?;
    let thetas = theta_grid(args.theta_grid.max(1));
    match args.check.as_str() {
        "product" => {
            system.checked_piece_count(args.depth, args.sys.cap)?;
            let pairs: Vec<(u32, u32)> = args.k.iter().flat_map(|&k| args.level_m.iter().map(move |&m| (k, m))).collect();
            let report = product_inequality_report(&system, args.depth, &thetas, &pairs)?;
            emit(&report, format, out)?;
            Ok(report.min_mass_level_slack >= 0.0)
        }
        "escan" | "l2" => {
            system.checked_piece_count(args.depth, args.sys.cap)?;
            let mut text = String::new();
            let mut reports = Vec::new();
            for &k in &args.k {
                let mut cfg = EScanConfig::new(args.depth, k, thetas.clone())?;
                cfg.exponent = args.beta;
                if args.check == "escan" {
                    let r = e_scan(&cfg, &system)?;
                    text += &render_tagged(k, &r, format);
                    reports.push(serde_json::to_value(&r)?);
                } else {
                    let r = l2_bound_report(&system, &cfg)?;
                    text += &render_tagged(k, &r, format);
                    reports.push(serde_json::to_value(&r)?);
                }
            }
            emit(&Rendered { text, json: reports }, format, out)?;
            Ok(true)
        }
        "bootstrap" => {
            system.checked_piece_count(args.depth * args.l_max, args.sys.cap)?;
            emit(&bootstrap_report(&system, args.theta, args.depth, args.l_max)?, format, out)?;
            Ok(true)
        }
        "baddir" => {
            let spec = ProductSpec::new(args.n, args.m, args.ell)?;
            emit(&bad_direction_scan(&system, spec, args.tau, &thetas, args.x_grid)?, format, out)?;
            Ok(true)
        }
        other => Err(Error::InvalidInput(format!("unknown check `{other}` (product, escan, l2, bootstrap, baddir)"))),
    }
}

fn render_tagged(k: u32, report: &impl Report, format: Format) -> String {
    match format {
        Format::Csv => format!("# K={k}\n{}", report.to_csv()),
        Format::Json => String::new(),
    }
}

/// Pre-rendered CSV plus a JSON array, for commands that produce several reports.
#[derive(Serialize)]
#[serde(transparent)]
struct Rendered {
    #[serde(skip)]
    text: String,
    json: Vec<serde_json::Value>,
}

impl Report for Rendered {
    fn to_csv(&self) -> String {
        self.text.clone()
    }
}

#[derive(Serialize)]
#[serde(transparent)]
struct SystemReport(crate::ifs::SystemFile);

/// Always rendered as JSON so that `gen` output loads with `--system-file`.
impl Report for SystemReport {
    fn to_csv(&self) -> String {
        render(self, Format::Json)
    }
}

#[derive(Serialize)]
struct PiecesReport {
    system: String,
    n: usize,
    size: f64,
    words: Vec<String>,
    centers: Vec<[f64; 2]>,
}

impl PiecesReport {
    fn new(system: &SimilaritySystem, n: usize, cap: u64) -> Result<Self> {
        let mut words = Vec::new();
        let mut centers = Vec::new();
        let mut iter = system.enumerate_pieces_with_cap(n, cap)?;
        while let Some(word) = iter.peek_word() {
            let piece = iter.next().expect("peeked");
            words.push(word.letters().iter().map(|l| l.to_string()).collect::<Vec<_>>().join("."));
            centers.push([piece.center.re, piece.center.im]);
        }
        Ok(PiecesReport { system: system.label().to_string(), n, size: system.piece_size(n), words, centers })
    }
}

impl Report for PiecesReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("word,center_re,center_im,size\n");
        for (w, c) in self.words.iter().zip(&self.centers) {
            let _ = writeln!(out, "{w},{},{},{}", fmt_f64(c[0]), fmt_f64(c[1]), fmt_f64(self.size));
        }
        out
    }
}

#[derive(Serialize)]
struct ShadowReport {
    system: String,
    n: usize,
    theta: f64,
    maximal: bool,
    support: f64,
    mass: f64,
    l2_norm_sq: f64,
    max_value: u32,
    breakpoints: Vec<f64>,
    values: Vec<u32>,
    #[serde(skip)]
    function: StepFunction,
}

impl ShadowReport {
    fn new(system: &SimilaritySystem, n: usize, theta: f64, maximal: bool, f: StepFunction) -> Self {
        ShadowReport {
            system: system.label().to_string(),
            n,
            theta,
            maximal,
            support: f.support_measure(),
            mass: f.mass(),
            l2_norm_sq: f.l2_norm_sq(),
            max_value: f.max_value(),
            breakpoints: f.breakpoints().to_vec(),
            values: f.values().to_vec(),
            function: f,
        }
    }
}

impl Report for ShadowReport {
    fn to_csv(&self) -> String {
        self.function.to_csv(&self.system, self.n, self.theta)
    }
}

#[derive(Serialize)]
#[serde(transparent)]
struct ErgodicOutput(ErgodicReport);

impl Report for ErgodicOutput {
    fn to_csv(&self) -> String {
        let mut out = format!(
            "# case={}\nk,a_k,running_average\n",
            serde_json::to_value(self.0.case).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
        );
        for (k, (a, avg)) in self.0.values.iter().zip(&self.0.running_average).enumerate() {
            let _ = writeln!(out, "{},{},{}", k + 1, fmt_f64(*a), fmt_f64(*avg));
        }
        out
    }
}

#[derive(Serialize)]
#[serde(transparent)]
struct ParsevalOutput(ParsevalReport);

impl Report for ParsevalOutput {
    fn to_csv(&self) -> String {
        let r = &self.0;
        format!(
            "space_side,frequency_side,relative_error,range\n{},{},{},{}\n",
            fmt_f64(r.space_side),
            fmt_f64(r.frequency_side),
            fmt_f64(r.relative_error),
            fmt_f64(r.range)
        )
    }
}

#[derive(Serialize)]
struct SsvSummary {
    threshold: f64,
    component_count: usize,
    samples_below: usize,
    intervals: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct SpectralOutput {
    spec: ProductSpec,
    /// `(x, |P1|, |P2|, |P♯|, |P♭|, |ν̂_n|)`.
    rows: Vec<[f64; 6]>,
    ssv: Option<SsvSummary>,
}

impl Report for SpectralOutput {
    fn to_csv(&self) -> String {
        let mut out = String::from("x,p1,p2,p_sharp,p_flat,nu_hat\n");
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            out += &cells.join(",");
            out.push('\n');
        }
        if let Some(ssv) = &self.ssv {
            let _ = write!(
                out,
                "\n# threshold={},components={},samples_below={}\nlo,hi\n",
                fmt_f64(ssv.threshold),
                ssv.component_count,
                ssv.samples_below
            );
            for (lo, hi) in &ssv.intervals {
                let _ = writeln!(out, "{},{}", fmt_f64(*lo), fmt_f64(*hi));
            }
        }
        out
    }
}
