//! Command-line front end: single-point bounds and CSV sweeps.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::baselines::{ie_total_variance, regime_classify};
use crate::cq_bounds::{cq_matrix, diagonalizing_delta, optimize_delta, CqBound, DeltaGauge};
use crate::error::Error;
use crate::exact_qfi::{qfi_mixed, qfi_pure};
use crate::fock::{ModeOccupation, PureState};
use crate::loss_channel::{apply_loss, LossChannel};
use crate::probes::ProbeSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_OUTPUT: i32 = 4;

pub const DEFAULT_DENSE_CAP: u32 = 12;

pub const CSV_HEADER: [&str; 6] = ["x", "se_ideal", "se_cq", "se_exact", "ie_bound", "regime"];

#[derive(Debug, Parser)]
#[command(name = "multiphase", version, about = "Multi-phase estimation bounds under photon loss")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// C_Q bound for a single (d, N, η) point.
    Bound(BoundArgs),
    /// All four strategies over an N or η grid, as CSV.
    Compare(GridArgs),
    /// Selected strategies over an N or η grid, as CSV.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProbeFamily {
    /// Generalized N00N state.
    Gnoon,
    /// Explicit superposition given by --amps.
    Custom,
    /// Two-mode IE probe, coefficients given by --amps (d = 1).
    Ie2,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[arg(long = "d", default_value_t = 2)]
    pub d: u32,
    #[arg(long, value_enum, default_value_t = ProbeFamily::Gnoon)]
    pub probe: ProbeFamily,
    /// `occupation:amp;...` for custom (occupation as `0,4,0` or `040`, `N`
    /// standing for the photon number), `c0,c1,...` for ie2.
    #[arg(long)]
    pub amps: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub probe: ProbeArgs,
    #[arg(long = "n")]
    pub n: u32,
    #[arg(long)]
    pub eta: f64,
    /// zero | diag | opt | value=<x>
    #[arg(long, default_value = "opt")]
    pub delta: String,
    /// Phases for the θ-covariance self-check of the exact QFI.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: u32,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub probe: ProbeArgs,
    #[arg(long = "n")]
    pub n: Option<u32>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// a:b:step, inclusive.
    #[arg(long)]
    pub eta_range: Option<String>,
    /// a:b:step, inclusive.
    #[arg(long)]
    pub n_range: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: u32,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Comma list drawn from se-ideal, se-cq, se-exact, ie; empty for none.
    #[arg(long, default_value = "se-ideal,se-cq,se-exact,ie")]
    pub strategies: String,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Singular { .. } | Error::NoPhotons(_) => EXIT_SINGULAR,
            Error::InvalidEta(_)
            | Error::InvalidArgument(_)
            | Error::OccupationNotInBasis(_)
            | Error::ZeroVector
            | Error::Indivisible { .. }
            | Error::DimensionMismatch { .. }
            | Error::ModeOutOfRange { .. }
            | Error::DenseCapExceeded { .. } => EXIT_USAGE,
            Error::NotDensityOperator(_) => EXIT_FAILURE,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv` and runs the command, writing reports to `stdout`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        CliError { code, message: e.to_string() }
    })?;
    match cli.command {
        Command::Bound(args) => cmd_bound(&args, stdout),
        Command::Compare(args) => {
            let config = SweepConfig::from_args(&args, Strategy::ALL.to_vec(), false)?;
            emit(&config, stdout)
        }
        Command::Sweep(args) => {
            let strategies = parse_strategies(&args.strategies)?;
            let config = SweepConfig::from_args(&args.grid, strategies, true)?;
            emit(&config, stdout)
        }
    }
}

fn probe_spec(args: &ProbeArgs, n: u32) -> CliResult<ProbeSpec> {
    if args.d == 0 {
        return Err(CliError::usage("--d must be at least 1"));
    }
    match args.probe {
        ProbeFamily::Gnoon => {
            if n == 0 {
                return Err(CliError::usage("--n must be at least 1"));
            }
            Ok(ProbeSpec::GeneralizedNoon { d: args.d, n })
        }
        ProbeFamily::Custom => {
            let amps = args.amps.as_deref().ok_or_else(|| CliError::usage("--probe custom needs --amps"))?;
            let terms = parse_amps(amps, args.d as usize + 1, n)?;
            Ok(ProbeSpec::Custom { d: args.d, n, terms })
        }
        ProbeFamily::Ie2 => {
            if args.d != 1 {
                return Err(CliError::usage("--probe ie2 is a single-phase probe; use --d 1"));
            }
            let amps = args.amps.as_deref().ok_or_else(|| CliError::usage("--probe ie2 needs --amps"))?;
            let coefficients = amps
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::usage(format!("bad ie2 coefficient: {e}")))?;
            Ok(ProbeSpec::IeTwoMode { n, coefficients })
        }
    }
}

/// Parses `occupation:amp;...`. An occupation is either comma-separated
/// counts or one character per mode; `N` stands for `n`. Entries past the
/// mode count must be zero and are dropped.
pub fn parse_amps(spec: &str, modes: usize, n: u32) -> CliResult<Vec<(ModeOccupation, f64)>> {
    let mut terms = Vec::new();
    for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (occ, amp) = item
            .rsplit_once(':')
            .ok_or_else(|| CliError::usage(format!("expected occupation:amp, got `{item}`")))?;
        let amp: f64 = amp
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad amplitude in `{item}`")))?;
        let token = |t: &str| -> CliResult<u32> {
            match t {
                "N" | "n" => Ok(n),
                _ => t.parse().map_err(|_| CliError::usage(format!("bad occupation in `{item}`"))),
            }
        };
        let mut counts: Vec<u32> = if occ.contains(',') {
            occ.split(',').map(|t| token(t.trim())).collect::<CliResult<_>>()?
        } else {
            occ.trim()
                .chars()
                .map(|c| token(&c.to_string()))
                .collect::<CliResult<_>>()?
        };
        if counts.len() > modes {
            if counts[modes..].iter().any(|&c| c != 0) {
                return Err(CliError::usage(format!("`{occ}` has more than {modes} modes")));
            }
            counts.truncate(modes);
        }
        if counts.len() != modes {
            return Err(CliError::usage(format!("`{occ}` needs {modes} modes")));
        }
        terms.push((ModeOccupation::new(counts), amp));
    }
    if terms.is_empty() {
        return Err(CliError::usage("--amps is empty"));
    }
    Ok(terms)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaStrategy {
    Zero,
    Diagonalizing,
    Optimized,
    Value(f64),
}

impl std::str::FromStr for DeltaStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" => Ok(Self::Zero),
            "diag" => Ok(Self::Diagonalizing),
            "opt" => Ok(Self::Optimized),
            _ => match s.strip_prefix("value=") {
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(Self::Value)
                    .ok_or_else(|| format!("bad δ value `{v}`")),
                None => Err(format!("unknown δ strategy `{s}`")),
            },
        }
    }
}

fn bound_for(probe: &PureState, eta: f64, strategy: DeltaStrategy) -> crate::Result<CqBound> {
    let d = probe.phases();
    let etas = vec![eta; d];
    match strategy {
        DeltaStrategy::Zero => cq_matrix(probe, &etas, &DeltaGauge::uniform(d, 0.0)?),
        DeltaStrategy::Diagonalizing => {
            cq_matrix(probe, &etas, &DeltaGauge::uniform(d, diagonalizing_delta(eta)?)?)
        }
        DeltaStrategy::Optimized => optimize_delta(probe, &etas, true),
        DeltaStrategy::Value(x) => cq_matrix(probe, &etas, &DeltaGauge::uniform(d, x)?),
    }
}

fn check_eta(eta: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(CliError::usage(format!("--eta {eta} outside [0, 1]")))
    }
}

fn cmd_bound(args: &BoundArgs, out: &mut dyn Write) -> CliResult<()> {
    check_eta(args.eta)?;
    let strategy: DeltaStrategy = args.delta.parse().map_err(CliError::usage)?;
    let spec = probe_spec(&args.probe, args.n)?;
    let probe = spec.build()?;
    let bound = bound_for(&probe, args.eta, strategy)?;
    let variance = crate::cq_bounds::bound_total_variance(&bound)?;

    let mut report = String::new();
    let d = probe.phases();
    let _ = writeln!(report, "probe: {:?} d={} N={}", args.probe.probe, d, args.n);
    let _ = writeln!(report, "eta: {}", fmt_sig9(args.eta));
    let deltas: Vec<String> = bound.delta().values().iter().map(|&x| fmt_sig9(x)).collect();
    let _ = writeln!(report, "delta: {}", deltas.join(" "));
    let _ = writeln!(report, "C_Q:");
    for i in 0..d {
        let row: Vec<String> = (0..d).map(|j| fmt_sig9(bound.matrix()[(i, j)])).collect();
        let _ = writeln!(report, "  [{}]", row.join(", "));
    }
    let _ = writeln!(report, "Tr[C_Q^-1]: {}", fmt_sig9(variance));
    match regime_classify(args.n, args.eta) {
        Ok(r) => {
            let _ = writeln!(report, "regime: {r}");
        }
        Err(_) => {
            let _ = writeln!(report, "regime: undefined");
        }
    }
    if let Some(theta) = &args.theta {
        if theta.len() != d {
            return Err(CliError::usage(format!("--theta needs {d} values")));
        }
        if args.n > args.dense_cap {
            return Err(Error::DenseCapExceeded { n: args.n, cap: args.dense_cap }.into());
        }
        let channel = LossChannel::uniform(d + 1, args.eta, probe.max_photons())?;
        let rho = apply_loss(&probe, &channel)?;
        let at_zero = qfi_mixed(&rho, d)?;
        let at_theta = qfi_mixed(&rho.rotated(theta)?, d)?;
        let drift = (at_zero.matrix() - at_theta.matrix()).amax();
        let _ = writeln!(
            report,
            "exact Tr[I_Q^-1]: {}",
            at_zero.trace_inverse().map(fmt_sig9).unwrap_or_else(|| "singular".into())
        );
        let _ = writeln!(report, "theta covariance drift: {}", fmt_sig9(drift));
    }
    out.write_all(report.as_bytes())
        .map_err(|e| CliError { code: EXIT_OUTPUT, message: e.to_string() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    SeIdeal,
    SeCq,
    SeExact,
    Ie,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::SeIdeal, Strategy::SeCq, Strategy::SeExact, Strategy::Ie];

    fn parse(s: &str) -> CliResult<Self> {
        match s {
            "se-ideal" => Ok(Self::SeIdeal),
            "se-cq" => Ok(Self::SeCq),
            "se-exact" => Ok(Self::SeExact),
            "ie" => Ok(Self::Ie),
            other => Err(CliError::usage(format!("unknown strategy `{other}`"))),
        }
    }
}

fn parse_strategies(list: &str) -> CliResult<Vec<Strategy>> {
    let mut out = Vec::new();
    for s in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let s = Strategy::parse(s)?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

/// The varying axis of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub enum Axis {
    /// N varies, η fixed.
    Photons { values: Vec<u32>, eta: f64 },
    /// η varies, N fixed.
    Transmissivity { values: Vec<f64>, n: u32 },
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub probe: ProbeArgs,
    pub axis: Axis,
    pub strategies: Vec<Strategy>,
    pub out: Option<PathBuf>,
    pub dense_cap: u32,
}

fn parse_range<T: std::str::FromStr>(s: &str) -> CliResult<(T, T, T)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("range `{s}` is not a:b:step")));
    }
    let p = |t: &str| t.trim().parse::<T>().map_err(|_| CliError::usage(format!("bad range `{s}`")));
    Ok((p(parts[0])?, p(parts[1])?, p(parts[2])?))
}

/// Inclusive float grid a, a+step, …, b.
pub fn float_grid(a: f64, b: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
        return Err(CliError::usage(format!("invalid range {a}:{b}:{step}")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| a + step * k as f64).collect())
}

impl SweepConfig {
    fn from_args(args: &GridArgs, strategies: Vec<Strategy>, strict_exact: bool) -> CliResult<Self> {
        let axis = match (&args.n_range, &args.eta_range) {
            (Some(r), None) => {
                let (a, b, step) = parse_range::<i64>(r)?;
                if step <= 0 || a < 1 || b < a {
                    return Err(CliError::usage(format!("invalid N range `{r}`")));
                }
                let eta = args.eta.ok_or_else(|| CliError::usage("--n-range needs --eta"))?;
                check_eta(eta)?;
                let values = (a..=b).step_by(step as usize).map(|v| v as u32).collect();
                Axis::Photons { values, eta }
            }
            (None, Some(r)) => {
                let (a, b, step) = parse_range::<f64>(r)?;
                let values = float_grid(a, b, step)?;
                for &v in &values {
                    check_eta(v)?;
                }
                let n = args.n.ok_or_else(|| CliError::usage("--eta-range needs --n"))?;
                if n == 0 {
                    return Err(CliError::usage("--n must be at least 1"));
                }
                Axis::Transmissivity { values, n }
            }
            _ => return Err(CliError::usage("give exactly one of --n-range / --eta-range")),
        };
        let max_n = match &axis {
            Axis::Photons { values, .. } => values.iter().copied().max().unwrap_or(0),
            Axis::Transmissivity { n, .. } => *n,
        };
        if strict_exact && strategies.contains(&Strategy::SeExact) && max_n > args.dense_cap {
            return Err(Error::DenseCapExceeded { n: max_n, cap: args.dense_cap }.into());
        }
        // probe arguments are validated once up front
        probe_spec(&args.probe, max_n.max(1))?;
        Ok(Self {
            probe: args.probe.clone(),
            axis,
            strategies,
            out: args.out.clone(),
            dense_cap: args.dense_cap,
        })
    }

    fn points(&self) -> Vec<(f64, u32, f64)> {
        match &self.axis {
            Axis::Photons { values, eta } => values.iter().map(|&n| (f64::from(n), n, *eta)).collect(),
            Axis::Transmissivity { values, n } => values.iter().map(|&e| (e, *n, e)).collect(),
        }
    }
}

/// One CSV row; `None` fields are emitted empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub x: f64,
    pub se_ideal: Option<f64>,
    pub se_cq: Option<f64>,
    pub se_exact: Option<f64>,
    pub ie_bound: Option<f64>,
    pub regime: Option<String>,
}

fn finite(v: crate::Result<f64>) -> Option<f64> {
    v.ok().filter(|x| x.is_finite() && *x >= 0.0)
}

/// Total-variance bound from the exact QFI of the lossy probe (loss on every
/// mode, reference included).
pub fn se_exact_value(probe: &PureState, eta: f64) -> crate::Result<f64> {
    let d = probe.phases();
    let channel = LossChannel::uniform(d + 1, eta, probe.max_photons())?;
    qfi_mixed(&apply_loss(probe, &channel)?, d)?.total_variance()
}

fn compute_row(config: &SweepConfig, x: f64, n: u32, eta: f64) -> CliResult<Row> {
    let probe = probe_spec(&config.probe, n)?.build()?;
    let d = probe.phases();
    let wants = |s: Strategy| config.strategies.contains(&s);
    let se_ideal = wants(Strategy::SeIdeal).then(|| finite(qfi_pure(&probe).total_variance())).flatten();
    let se_cq = wants(Strategy::SeCq)
        .then(|| finite(optimize_delta(&probe, &vec![eta; d], true).and_then(|b| crate::cq_bounds::bound_total_variance(&b))))
        .flatten();
    let se_exact = (wants(Strategy::SeExact) && n <= config.dense_cap)
        .then(|| finite(se_exact_value(&probe, eta)))
        .flatten();
    let ie_bound = wants(Strategy::Ie)
        .then(|| finite(ie_total_variance(d as u32, n, eta).map(|r| r.total)))
        .flatten();
    let regime = regime_classify(n, eta).ok().map(|r| r.to_string());
    Ok(Row { x, se_ideal, se_cq, se_exact, ie_bound, regime })
}

/// Evaluates every grid point (concurrently) and returns rows in grid order.
pub fn compute_rows(config: &SweepConfig) -> CliResult<Vec<Row>> {
    if config.strategies.is_empty() {
        return Ok(Vec::new());
    }
    config
        .points()
        .into_par_iter()
        .map(|(x, n, eta)| compute_row(config, x, n, eta))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[Row], sink: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(CSV_HEADER)?;
    let cell = |v: Option<f64>| v.map(fmt_sig9).unwrap_or_default();
    for r in rows {
        w.write_record([
            fmt_sig9(r.x),
            cell(r.se_ideal),
            cell(r.se_cq),
            cell(r.se_exact),
            cell(r.ie_bound),
            r.regime.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()
}

fn emit(config: &SweepConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let rows = compute_rows(config)?;
    let output_err = |e: io::Error| CliError { code: EXIT_OUTPUT, message: e.to_string() };
    match &config.out {
        Some(path) => {
            let file = File::create(path).map_err(output_err)?;
            write_csv(&rows, io::BufWriter::new(file)).map_err(output_err)
        }
        None => write_csv(&rows, stdout).map_err(output_err),
    }
}

/// Formats with 9 significant digits, `%g` style, independent of locale.
pub fn fmt_sig9(v: f64) -> String {
    const P: i32 = 9;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(2.0), "2");
        assert_eq!(fmt_sig9(0.1821320343559642), "0.182132034");
        assert_eq!(fmt_sig9(1.1111111111111112e-7), "1.11111111e-07");
        assert_eq!(fmt_sig9(123456789012.0), "1.23456789e+11");
        assert_eq!(fmt_sig9(0.30000000000000004), "0.3");
        assert_eq!(fmt_sig9(0.0001), "0.0001");
    }

    #[test]
    fn amps_parsing() {
        let t = parse_amps("N000:1", 3, 4).unwrap();
        assert_eq!(t, vec![(ModeOccupation::new(vec![4, 0, 0]), 1.0)]);
        let t = parse_amps("0,2,0:1; 0,0,2:-0.5", 3, 2).unwrap();
        assert_eq!(t[1], (ModeOccupation::new(vec![0, 0, 2]), -0.5));
        assert!(parse_amps("0N01:1", 3, 4).is_err());
        assert!(parse_amps("04:1", 3, 4).is_err());
        assert!(parse_amps("", 3, 4).is_err());
        assert!(parse_amps("040", 3, 4).is_err());
    }

    #[test]
    fn delta_strategies() {
        assert_eq!("value=2.5".parse::<DeltaStrategy>(), Ok(DeltaStrategy::Value(2.5)));
        assert_eq!("diag".parse::<DeltaStrategy>(), Ok(DeltaStrategy::Diagonalizing));
        assert!("value=x".parse::<DeltaStrategy>().is_err());
        assert!("best".parse::<DeltaStrategy>().is_err());
    }

    #[test]
    fn grids() {
        let g = float_grid(0.1, 0.9, 0.1).unwrap();
        assert_eq!(g.len(), 9);
        assert!(float_grid(0.1, 0.9, 0.0).is_err());
        assert!(float_grid(0.9, 0.1, 0.1).is_err());
        assert_eq!(parse_strategies("").unwrap(), vec![]);
        assert!(parse_strategies("se-ideal,foo").is_err());
    }
}
