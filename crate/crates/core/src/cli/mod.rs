//! Command-line front end.
//!
//! Commands: `mz-joint`, `mz-scan`, `mz-check`, `twoslit-pattern` and
//! `twoslit-sample`. Every command accepts `--lambda`, `--seed`,
//! `--format csv|json` and `--out <path>` (standard output by default).
//!
//! Exit status is 0 on success, 2 on a usage error and 1 when a command
//! fails at run time, including an `mz-check` invariant beyond tolerance.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::Value as Json;
use thiserror::Error;

use crate::montecarlo::{
    self, sample_two_slit, scan, stream_rng, BasisPolicy, MonteCarloError, RngSeed, ScanSpec,
};
use crate::mz_eraser::{adaptive_basis, analytic_checks, correlation_table, Detector, MzConfig};
use crate::optics::{canonical_angle, mub_pair, BasisFamily, BasisPair, OpticsError, Outcome};
use crate::two_slit::{linspace, pattern, TwoSlitConfig, TwoSlitError, DEFAULT_SIGMA_PERIODS};

pub mod emit;
pub mod fixture;

pub use emit::Format;
use emit::{Meta, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Grid half-width, in envelope widths, when no grid bounds are given.
pub const DEFAULT_GRID_HALF_WIDTH: f64 = 3.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    TwoSlit(#[from] TwoSlitError),
    #[error(transparent)]
    MonteCarlo(#[from] MonteCarloError),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },
}

#[derive(Parser, Debug)]
#[command(
    name = "qeraser",
    version,
    about = "Delayed-choice quantum eraser simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct CommonArgs {
    /// Wavelength, in the same unit as every other length.
    #[arg(long, value_parser = parse_positive)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Linear,
    Circular,
    Pq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    FixedLinear,
    FixedCircular,
    FixedPq,
    Adaptive,
}

/// Envelope width: explicit, or five fringe periods.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sigma {
    Auto,
    Width(f64),
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct MzJointArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Displacement of the first splitter.
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, value_enum, required_unless_present = "adaptive")]
    pub basis: Option<BasisArg>,
    /// P/Q basis angle in radians (pq only, default 0).
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Use the P/Q basis at θ = 2πx/λ.
    #[arg(long, conflicts_with_all = ["basis", "theta"])]
    pub adaptive: bool,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct MzScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub x_max: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub steps: u64,
    /// Events per position.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    #[arg(long, value_enum)]
    pub policy: PolicyArg,
    /// P/Q basis angle in radians (fixed-pq only, default 0).
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Draw each position's shot count from a Poisson law.
    #[arg(long)]
    pub poisson: bool,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct MzCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of random displacements in [0, λ).
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 1e-12, value_parser = parse_non_negative)]
    pub tolerance: f64,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct GeometryArgs {
    /// Slit separation.
    #[arg(long = "d", value_parser = parse_positive)]
    pub d: f64,
    /// Slit-to-screen distance.
    #[arg(long = "D", id = "screen_distance", value_parser = parse_positive)]
    pub screen_distance: f64,
    /// Envelope width, or `auto` for five fringe periods.
    #[arg(long, default_value = "auto", value_parser = parse_sigma)]
    pub sigma: Sigma,
    /// Defaults to −3σ.
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub grid_min: Option<f64>,
    /// Defaults to +3σ.
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub grid_max: Option<f64>,
    #[arg(long, default_value_t = 1001, value_parser = clap::value_parser!(u64).range(2..))]
    pub grid_steps: u64,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct TwoSlitPatternArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Which-way detector basis angle in radians.
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub theta: f64,
    /// Scale the pattern so that p₊ + p₋ integrates to 1 over the grid.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct TwoSlitSampleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Exact joint detector/idler probabilities at one splitter position.
    MzJoint(MzJointArgs),
    /// Sampled coincidence counts over a range of splitter positions.
    MzScan(MzScanArgs),
    /// Analytic invariant suite; exits 1 on any violation.
    MzCheck(MzCheckArgs),
    /// Two-slit screen patterns conditioned on the which-way outcome.
    TwoslitPattern(TwoSlitPatternArgs),
    /// Sampled screen hits with their erasing basis and detector outcome.
    TwoslitSample(TwoSlitSampleArgs),
}

/// A fully parsed and validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self.command {
            Command::MzJoint(_) => "mz-joint",
            Command::MzScan(_) => "mz-scan",
            Command::MzCheck(_) => "mz-check",
            Command::TwoslitPattern(_) => "twoslit-pattern",
            Command::TwoslitSample(_) => "twoslit-sample",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match &self.command {
            Command::MzJoint(a) => &a.common,
            Command::MzScan(a) => &a.common,
            Command::MzCheck(a) => &a.common,
            Command::TwoslitPattern(a) => &a.common,
            Command::TwoslitSample(a) => &a.common,
        }
    }

    pub fn format(&self) -> Format {
        self.common().format
    }

    pub fn seed(&self) -> RngSeed {
        RngSeed(self.common().seed)
    }

    pub fn output_path(&self) -> Option<&PathBuf> {
        self.common().out.as_ref()
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive"))
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must not be negative"))
    }
}

fn parse_sigma(s: &str) -> Result<Sigma, String> {
    if s == "auto" {
        Ok(Sigma::Auto)
    } else {
        parse_positive(s).map(Sigma::Width)
    }
}

fn usage_error(kind: ErrorKind, msg: &str) -> clap::Error {
    Cli::command().error(kind, msg)
}

/// Parses `argv` (program name first) into a validated [`RunConfig`].
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    match &cli.command {
        Command::MzJoint(a) if a.theta.is_some() && a.basis != Some(BasisArg::Pq) => {
            return Err(usage_error(
                ErrorKind::ArgumentConflict,
                "--theta only applies to --basis pq",
            ));
        }
        Command::MzScan(a) if a.theta.is_some() && a.policy != PolicyArg::FixedPq => {
            return Err(usage_error(
                ErrorKind::ArgumentConflict,
                "--theta only applies to --policy fixed-pq",
            ));
        }
        Command::MzScan(a) if !(a.x_min < a.x_max) => {
            return Err(usage_error(
                ErrorKind::ValueValidation,
                "--x-min must be below --x-max",
            ));
        }
        Command::TwoslitPattern(TwoSlitPatternArgs { geometry: g, .. })
        | Command::TwoslitSample(TwoSlitSampleArgs { geometry: g, .. }) => {
            if let (Some(lo), Some(hi)) = (g.grid_min, g.grid_max) {
                if !(lo < hi) {
                    return Err(usage_error(
                        ErrorKind::ValueValidation,
                        "--grid-min must be below --grid-max",
                    ));
                }
            }
        }
        _ => {}
    }
    Ok(RunConfig {
        command: cli.command,
    })
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub meta: Meta,
    pub table: Table,
    /// Set when the command ran but found a violated invariant.
    pub failure: Option<String>,
}

fn meta(config: &RunConfig, params: Vec<(&str, Json)>) -> Meta {
    let mut map: BTreeMap<String, Json> = params
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    map.insert("lambda".into(), Json::from(config.common().lambda));
    Meta {
        command: config.name().to_string(),
        params: map,
        seed: config.common().seed,
        version: VERSION.to_string(),
    }
}

fn idler_basis(arg: BasisArg, theta: Option<f64>) -> Result<BasisPair, OpticsError> {
    match arg {
        BasisArg::Linear => mub_pair(BasisFamily::LinearHV, 0.0),
        BasisArg::Circular => mub_pair(BasisFamily::CircularRL, 0.0),
        BasisArg::Pq => mub_pair(BasisFamily::PolarizationPQ, theta.unwrap_or(0.0)),
    }
}

/// Runs a parsed command without writing anything.
pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    match &config.command {
        Command::MzJoint(a) => mz_joint(config, a),
        Command::MzScan(a) => mz_scan(config, a),
        Command::MzCheck(a) => mz_check(config, a),
        Command::TwoslitPattern(a) => twoslit_pattern(config, a),
        Command::TwoslitSample(a) => twoslit_sample(config, a),
    }
}

fn mz_joint(config: &RunConfig, a: &MzJointArgs) -> Result<Report, CliError> {
    let cfg = MzConfig::new(a.x, a.common.lambda)?;
    let basis = match a.basis {
        Some(arg) if !a.adaptive => idler_basis(arg, a.theta)?,
        _ => adaptive_basis(&cfg),
    };
    let joint = correlation_table(&cfg, &basis)?;
    let mut table = Table::new(&["detector", "outcome", "probability"]);
    for (d, o, p) in joint.cells() {
        table.push(vec![d.label().into(), basis.label(o).into(), p.into()]);
    }
    let meta = meta(
        config,
        vec![
            ("x", Json::from(a.x)),
            ("family", Json::from(basis.family().name())),
            ("theta", Json::from(basis.theta())),
        ],
    );
    Ok(Report {
        meta,
        table,
        failure: None,
    })
}

fn mz_scan(config: &RunConfig, a: &MzScanArgs) -> Result<Report, CliError> {
    let template = MzConfig::new(0.0, a.common.lambda)?;
    let policy = match a.policy {
        PolicyArg::FixedLinear => BasisPolicy::Fixed(idler_basis(BasisArg::Linear, None)?),
        PolicyArg::FixedCircular => BasisPolicy::Fixed(idler_basis(BasisArg::Circular, None)?),
        PolicyArg::FixedPq => BasisPolicy::Fixed(idler_basis(BasisArg::Pq, a.theta)?),
        PolicyArg::Adaptive => BasisPolicy::Adaptive,
    };
    let spec =
        ScanSpec::new(a.x_min, a.x_max, a.steps as usize, a.shots, policy)?.with_poisson(a.poisson);
    let hist = scan(&template, &spec, config.seed())?;

    let mut table = Table::new(&[
        "step",
        "x",
        "family",
        "theta",
        "detector",
        "outcome",
        "count",
        "shots",
        "frequency",
        "expected",
    ]);
    for row in &hist.rows {
        for d in Detector::ALL {
            for o in Outcome::ALL {
                table.push(vec![
                    row.step.into(),
                    row.x.into(),
                    row.basis.family().name().into(),
                    row.basis.theta().into(),
                    d.label().into(),
                    row.basis.label(o).into(),
                    row.count(d, o).into(),
                    row.shots.into(),
                    row.frequency(d, o).into(),
                    row.expected.get(d, o).into(),
                ]);
            }
        }
    }
    let policy_name = a
        .policy
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let mut params = vec![
        ("x_min", Json::from(a.x_min)),
        ("x_max", Json::from(a.x_max)),
        ("steps", Json::from(a.steps)),
        ("shots", Json::from(a.shots)),
        ("policy", Json::from(policy_name)),
        ("poisson", Json::from(a.poisson)),
    ];
    if let Some(theta) = a.theta {
        params.push(("theta", Json::from(canonical_angle(theta))));
    }
    Ok(Report {
        meta: meta(config, params),
        table,
        failure: None,
    })
}

fn mz_check(config: &RunConfig, a: &MzCheckArgs) -> Result<Report, CliError> {
    let lambda = a.common.lambda;
    let mut rng = stream_rng(config.seed(), 0);
    let xs: Vec<f64> = (0..a.samples)
        .map(|_| montecarlo::uniform(&mut rng) * lambda)
        .collect();
    let thetas: Vec<f64> = (0..a.samples)
        .map(|_| montecarlo::uniform(&mut rng) * std::f64::consts::TAU)
        .collect();
    let checks = analytic_checks(lambda, &xs, &thetas)?;

    let mut table = Table::new(&["check", "cases", "max_deviation", "tolerance", "passed"]);
    let mut failed = Vec::new();
    for c in &checks {
        let passed = c.max_deviation <= a.tolerance;
        if !passed {
            failed.push(c.name);
        }
        table.push(vec![
            c.name.into(),
            c.cases.into(),
            c.max_deviation.into(),
            a.tolerance.into(),
            passed.into(),
        ]);
    }
    let failure = (!failed.is_empty()).then(|| {
        format!(
            "{} invariant(s) exceeded tolerance {:e}: {}",
            failed.len(),
            a.tolerance,
            failed.join(", ")
        )
    });
    let meta = meta(
        config,
        vec![
            ("samples", Json::from(a.samples)),
            ("tolerance", Json::from(a.tolerance)),
        ],
    );
    Ok(Report {
        meta,
        table,
        failure,
    })
}

fn two_slit_config(lambda: f64, g: &GeometryArgs) -> Result<TwoSlitConfig, TwoSlitError> {
    let sigma = match g.sigma {
        Sigma::Auto => None,
        Sigma::Width(s) => Some(s),
    };
    // Resolve the envelope first so the default grid can depend on it.
    let probe = TwoSlitConfig::new(g.d, g.screen_distance, lambda, sigma, vec![0.0])?;
    let half = DEFAULT_GRID_HALF_WIDTH * probe.envelope_sigma();
    let grid = linspace(
        g.grid_min.unwrap_or(-half),
        g.grid_max.unwrap_or(half),
        g.grid_steps as usize,
    )?;
    TwoSlitConfig::new(
        g.d,
        g.screen_distance,
        lambda,
        Some(probe.envelope_sigma()),
        grid,
    )
}

fn geometry_params(cfg: &TwoSlitConfig, g: &GeometryArgs) -> Vec<(&'static str, Json)> {
    let sigma_mode = match g.sigma {
        Sigma::Auto => format!("auto ({DEFAULT_SIGMA_PERIODS} fringe periods)"),
        Sigma::Width(_) => "explicit".to_string(),
    };
    let grid = cfg.grid();
    vec![
        ("d", Json::from(cfg.slit_separation())),
        ("D", Json::from(cfg.screen_distance())),
        ("sigma", Json::from(cfg.envelope_sigma())),
        ("sigma_mode", Json::from(sigma_mode)),
        ("grid_min", Json::from(grid[0])),
        ("grid_max", Json::from(grid[grid.len() - 1])),
        ("grid_steps", Json::from(grid.len())),
    ]
}

/// Trapezoid-rule integral of `values` sampled on `grid`.
fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

fn twoslit_pattern(config: &RunConfig, a: &TwoSlitPatternArgs) -> Result<Report, CliError> {
    let cfg = two_slit_config(a.common.lambda, &a.geometry)?;
    let samples = pattern(&cfg, a.theta);
    let scale = if a.normalize {
        let total: Vec<f64> = samples.iter().map(|s| s.p_plus + s.p_minus).collect();
        let z = trapezoid(cfg.grid(), &total);
        if z > 0.0 {
            1.0 / z
        } else {
            1.0
        }
    } else {
        1.0
    };
    let mut table = Table::new(&["x", "envelope", "p_plus", "p_minus"]);
    for s in &samples {
        table.push(vec![
            s.x.into(),
            (s.envelope * scale).into(),
            (s.p_plus * scale).into(),
            (s.p_minus * scale).into(),
        ]);
    }
    let mut params = geometry_params(&cfg, &a.geometry);
    params.push(("theta", Json::from(a.theta)));
    params.push(("normalize", Json::from(a.normalize)));
    Ok(Report {
        meta: meta(config, params),
        table,
        failure: None,
    })
}

fn twoslit_sample(config: &RunConfig, a: &TwoSlitSampleArgs) -> Result<Report, CliError> {
    let cfg = two_slit_config(a.common.lambda, &a.geometry)?;
    let events = sample_two_slit(&cfg, a.n as usize, config.seed())?;
    let mut table = Table::new(&["trial", "x", "theta_star", "outcome"]);
    for e in &events {
        table.push(vec![
            e.trial.into(),
            e.x.into(),
            e.theta_star.into(),
            e.outcome.label().into(),
        ]);
    }
    let mut params = geometry_params(&cfg, &a.geometry);
    params.push(("n", Json::from(a.n)));
    Ok(Report {
        meta: meta(config, params),
        table,
        failure: None,
    })
}

/// Renders a report in the requested format.
pub fn render(format: Format, report: &Report) -> Vec<u8> {
    let mut buf = Vec::new();
    emit::emit(format, &report.meta, &report.table, &mut buf).expect("writing to memory");
    buf
}

/// Entry point with explicit output streams. Returns the exit status.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
                    if e.exit_code() == 0 =>
                {
                    let _ = stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    2
                }
            };
        }
    };

    let report = match execute(&config) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "qeraser {}: error: {e}", config.name());
            return 1;
        }
    };

    let bytes = render(config.format(), &report);
    let written = match config.output_path() {
        Some(path) => fs::write(path, &bytes).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => stdout
            .write_all(&bytes)
            .and_then(|_| stdout.flush())
            .map_err(|source| CliError::Write {
                path: "<stdout>".into(),
                source,
            }),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "qeraser {}: error: {e}", config.name());
        return 1;
    }

    if let Some(msg) = report.failure {
        let _ = writeln!(stderr, "qeraser {}: {msg}", config.name());
        return 1;
    }
    0
}

/// Entry point used by the binary.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(line: &str) -> Vec<String> {
        std::iter::once("qeraser".to_string())
            .chain(line.split_whitespace().map(str::to_string))
            .collect()
    }

    fn run_line(line: &str) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(args(line), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn theta_requires_pq() {
        let e =
            parse_args(args("mz-joint --x 0 --lambda 1 --basis circular --theta 1")).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::ArgumentConflict);
        assert!(parse_args(args("mz-joint --x 0 --lambda 1 --basis pq --theta 1")).is_ok());
        assert!(parse_args(args("mz-joint --x 0 --lambda 1 --adaptive")).is_ok());
    }

    #[test]
    fn basis_or_adaptive_is_required() {
        assert!(parse_args(args("mz-joint --x 0 --lambda 1")).is_err());
        assert!(parse_args(args("mz-joint --x 0 --lambda 1 --basis pq --adaptive")).is_err());
    }

    #[test]
    fn numeric_flags_must_be_finite_and_in_range() {
        assert!(parse_args(args("mz-joint --x nan --lambda 1 --basis linear")).is_err());
        assert!(parse_args(args("mz-joint --x 0 --lambda 0 --basis linear")).is_err());
        assert!(parse_args(args("mz-joint --x -0.5 --lambda 1 --basis linear")).is_ok());
        assert!(parse_args(args(
            "mz-scan --lambda 1 --x-min 1 --x-max 0 --steps 3 --shots 1 --policy adaptive"
        ))
        .is_err());
        assert!(parse_args(args(
            "mz-scan --lambda 1 --x-min 0 --x-max 1 --steps 1 --shots 1 --policy adaptive"
        ))
        .is_err());
        assert!(parse_args(args(
            "mz-scan --lambda 1 --x-min 0 --x-max 1 --steps 3 --shots 0 --policy adaptive"
        ))
        .is_err());
    }

    #[test]
    fn sigma_parses_auto_and_widths() {
        assert_eq!(parse_sigma("auto"), Ok(Sigma::Auto));
        assert_eq!(parse_sigma("2.5"), Ok(Sigma::Width(2.5)));
        assert!(parse_sigma("-1").is_err());
        assert!(parse_sigma("wide").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, out, err) = run_line("frobnicate");
        assert_eq!(code, 2);
        assert!(out.is_empty());
        assert!(err.starts_with("error:"));
        let (code, _, _) = run_line("mz-scan --lambda 1");
        assert_eq!(code, 2);
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = run_line("--help");
        assert_eq!(code, 0);
        assert!(out.contains("mz-joint"));
    }

    #[test]
    fn joint_table_rows() {
        let (code, out, _) = run_line("mz-joint --x 0 --lambda 1 --basis circular");
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "detector,outcome,probability");
        assert!(lines[2].starts_with("D1,L,0.5"));
        assert!(lines[3].starts_with("D2,R,0.5"));
    }

    #[test]
    fn unwritable_output_exits_1() {
        let (code, _, err) =
            run_line("mz-joint --x 0 --lambda 1 --basis linear --out /nonexistent/dir/out.csv");
        assert_eq!(code, 1);
        assert_eq!(err.lines().count(), 1);
        assert!(err.contains("cannot write"));
    }

    #[test]
    fn check_failure_exits_1() {
        let (code, out, err) = run_line("mz-check --lambda 1 --samples 20 --tolerance 0");
        assert_eq!(code, 1);
        assert!(out.contains("false"));
        assert!(err.contains("exceeded tolerance"));
        let (code, _, _) = run_line("mz-check --lambda 1 --samples 20");
        assert_eq!(code, 0);
    }

    #[test]
    fn trapezoid_of_constant() {
        assert!((trapezoid(&[0.0, 1.0, 3.0], &[2.0, 2.0, 2.0]) - 6.0).abs() < 1e-15);
    }
}
