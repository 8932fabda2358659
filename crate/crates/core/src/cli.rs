//! The `pqcircle` command line front end.
//!
//! Every subcommand builds a [`Report`] in memory and only then writes it,
//! so a failing run leaves the output path untouched.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::atomic::{build_atomic_measure, generic_point_check, measure_moment};
use crate::cantor::{lipschitz_witness, self_similarity_check, UnitPoint};
use crate::equidist::weyl_sum_square;
use crate::mod1::{
    random_point, required_bits, CirclePoint, Mod1Fixed, Mod1Rational, MultiplierPair, OrbitGrid,
    OUTPUT_BITS,
};
use crate::transfer::{
    fixpoint_search, invariant_integral_check, tn_residual, Evaluable, GridFunction, SearchMode,
};
use crate::Error;

#[derive(Parser, Debug)]
#[command(
    name = "pqcircle",
    version,
    about = "Experiments with ×p,×q orbits on the circle"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Weyl sums over the squares for k = 1..k-max and N up a doubling ladder.
    Weyl,
    /// Ergodic averages at a rational point against its atomic measure.
    Generic,
    /// Projected fixed-point search for a common T_p, T_q fixed point.
    Fixpoint,
    /// Invariance, Lipschitz and self-similarity checks of the Cantor function.
    Cantor,
    /// Re-runs the configuration echoed in a JSON report and compares rows.
    Replay {
        /// A report written with `--format json`.
        report: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct Options {
    #[arg(long, global = true)]
    pub p: Option<u64>,
    #[arg(long, global = true)]
    pub q: Option<u64>,
    /// `a/b`, an integer, a decimal, `0x<hex>@<bits>` or `random`.
    #[arg(long, global = true)]
    pub base: Option<String>,
    /// Side of the largest square.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Number of grid intervals on [0, 1].
    #[arg(long = "K", global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub k_max: Option<i64>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub iters: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Precision of decimal and random bases; defaults to the orbit budget.
    #[arg(long, global = true)]
    pub bits: Option<u32>,
    #[arg(long, global = true, value_enum)]
    pub init: Option<Init>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Starting function of the fixed-point search.
#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Identity,
    #[default]
    Square,
    Cantor,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Mean,
    Alternate,
}

impl From<Mode> for SearchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Mean => SearchMode::Mean,
            Mode::Alternate => SearchMode::Alternate,
        }
    }
}

/// Fully resolved settings of one run, echoed in every report.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub p: u64,
    pub q: u64,
    pub base: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub k_max: i64,
    pub depth: usize,
    pub iters: usize,
    /// Stop once the residual is at most this; unset runs all iterations.
    pub tol: Option<f64>,
    pub seed: u64,
    pub bits: Option<u32>,
    pub init: Init,
    pub mode: Mode,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Fills unset options with per-command defaults and validates ranges.
    pub fn resolve(command: &str, o: &Options) -> Result<Self, CliError> {
        let (n, k) = match command {
            "weyl" => (64, 216),
            "generic" => (512, 216),
            "cantor" => (64, 2187),
            _ => (64, 216),
        };
        let cfg = Self {
            command: command.to_string(),
            p: o.p.unwrap_or(2),
            q: o.q.unwrap_or(3),
            base: o.base.clone().unwrap_or_else(|| "1/5".into()),
            n: o.n.unwrap_or(n),
            k: o.k.unwrap_or(k),
            k_max: o.k_max.unwrap_or(if command == "weyl" { 4 } else { 1 }),
            depth: o.depth.unwrap_or(30),
            iters: o.iters.unwrap_or(50),
            tol: o.tol,
            seed: o.seed.unwrap_or(0),
            bits: o.bits,
            init: o.init.unwrap_or_default(),
            mode: o.mode.unwrap_or_default(),
            out: o.out.clone(),
            format: o.format.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(msg.to_string()));
        if self.n == 0 {
            return bad("--N must be at least 1");
        }
        if self.k == 0 {
            return bad("--K must be at least 1");
        }
        if self.k_max < 1 {
            return bad("--k-max must be at least 1");
        }
        if self.depth == 0 {
            return bad("--depth must be at least 1");
        }
        if self.tol.is_some_and(|t| !t.is_finite()) {
            return bad("--tol must be finite");
        }
        MultiplierPair::new(self.p, self.q)?;
        Ok(())
    }

    fn pair(&self) -> Result<MultiplierPair, CliError> {
        Ok(MultiplierPair::new(self.p, self.q)?)
    }

    /// Bits needed to keep `p^(N-1) q^(N-1) x` accurate to double precision.
    fn budget_bits(&self) -> Result<u32, CliError> {
        let last = (self.n - 1) as u32;
        u32::try_from(required_bits(self.p, last, self.q, last, OUTPUT_BITS))
            .map_err(|_| CliError::Config("--N too large for any precision".into()))
    }
}

/// A parsed base point.
#[derive(Clone, Debug, PartialEq)]
pub enum BasePoint {
    Rational(Mod1Rational),
    Fixed(Mod1Fixed),
}

impl BasePoint {
    /// Exact wire form, reparseable by [`BasePoint::parse`].
    pub fn exact_form(&self) -> String {
        match self {
            BasePoint::Rational(x) => x.to_string(),
            BasePoint::Fixed(x) => x.to_string(),
        }
    }

    pub fn parse(s: &str, bits: u32, seed: u64) -> Result<Self, CliError> {
        let s = s.trim();
        if s == "random" {
            return Ok(BasePoint::Fixed(random_point(bits.max(64), seed)?));
        }
        if s.starts_with("0x") {
            return Ok(BasePoint::Fixed(s.parse()?));
        }
        if s.contains('.') {
            let r = parse_decimal(s)
                .ok_or_else(|| CliError::Config(format!("cannot parse base point {s:?}")))?;
            return Ok(BasePoint::Fixed(Mod1Fixed::from_ratio(&r, bits)?));
        }
        Ok(BasePoint::Rational(s.parse()?))
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.')?;
    let digits = format!("{int}{frac}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(num, den))
}

/// One CSV field.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn to_field(&self) -> String {
        match self {
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:?}"),
            Cell::Text(t) => t.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Metadata {
    pub command: String,
    pub config: RunConfig,
    pub version: String,
    /// Exact form of the base point that was used, when there is one.
    pub base_exact: Option<String>,
    pub elapsed_seconds: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Report {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(io_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field))
                .map_err(io_error)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut v = serde_json::to_vec_pretty(self).map_err(io_error)?;
        v.push(b'\n');
        Ok(v)
    }

    /// Rows compared through their serialized form, which is bit-exact for
    /// floats.
    pub fn same_rows(&self, other: &Report) -> bool {
        self.columns == other.columns
            && serde_json::to_string(&self.rows).ok() == serde_json::to_string(&other.rows).ok()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("replay mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Precision(_) => 3,
            CliError::Io(_) | CliError::Mismatch(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::PrecisionExhausted { .. } | Error::MantissaOverflow(_) => {
                CliError::Precision(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

fn io_error(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// `1, 2, 4, …` below `n`, then `n`.
fn ladder(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = std::iter::successors(Some(1usize), |&s| s.checked_mul(2))
        .take_while(|&s| s < n)
        .collect();
    v.push(n);
    v
}

struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    summary: Map<String, Value>,
}

fn weyl_rows<P: CirclePoint>(base: P, cfg: &RunConfig) -> Result<Table, CliError> {
    let pair = cfg.pair()?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 1..=cfg.k_max {
        for side in ladder(cfg.n) {
            let grid = OrbitGrid::new(base.clone(), pair, side)?;
            let w = weyl_sum_square(&grid, k)?;
            if side == cfg.n {
                worst = worst.max(w.value.norm());
            }
            rows.push(vec![
                k.into(),
                side.into(),
                w.value.re.into(),
                w.value.im.into(),
                w.value.norm().into(),
                w.err.into(),
            ]);
        }
    }
    let mut summary = Map::new();
    summary.insert("max_modulus_at_N".into(), json!(worst));
    Ok(Table {
        columns: cols(&["k", "N", "re", "im", "modulus", "err"]),
        rows,
        summary,
    })
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn cmd_weyl(cfg: &RunConfig, base: &BasePoint) -> Result<Table, CliError> {
    match base {
        BasePoint::Rational(x) => weyl_rows(x.clone(), cfg),
        BasePoint::Fixed(x) => weyl_rows(x.clone(), cfg),
    }
}

fn cmd_generic(cfg: &RunConfig, base: &BasePoint) -> Result<Table, CliError> {
    let BasePoint::Rational(x) = base else {
        return Err(CliError::Config("generic needs a rational base a/b".into()));
    };
    let m = build_atomic_measure(x, cfg.pair()?)?;
    let mut rows = Vec::new();
    let mut last = None;
    for side in ladder(cfg.n) {
        for k in 1..=cfg.k_max {
            let r = generic_point_check(x, &m, k, side)?;
            rows.push(vec![side.into(), k.into(), r.gap.into()]);
            last = Some(r);
        }
    }
    let last = last.expect("ladder is nonempty");
    let target = measure_moment(&m, 1);
    let mut summary = Map::new();
    summary.insert("modulus".into(), json!(m.modulus()));
    summary.insert("support".into(), json!(m.support().collect::<Vec<_>>()));
    summary.insert("target_re".into(), json!(target.re));
    summary.insert("target_im".into(), json!(target.im));
    summary.insert("final_gap".into(), json!(last.gap));
    summary.insert("exploratory".into(), json!(last.exploratory));
    Ok(Table {
        columns: cols(&["N", "k", "gap"]),
        rows,
        summary,
    })
}

fn cmd_fixpoint(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.pair()?;
    let f0 = match cfg.init {
        Init::Identity => GridFunction::identity(cfg.k),
        Init::Square => GridFunction::sample(&Evaluable::monomial(2), cfg.k)?,
        Init::Cantor => GridFunction::sample(&Evaluable::Cantor, cfg.k)?,
    };
    let trace = fixpoint_search(
        &f0,
        cfg.p,
        cfg.q,
        cfg.iters,
        cfg.tol.unwrap_or(f64::NEG_INFINITY),
        cfg.mode.into(),
    )?;
    let rows = trace
        .residuals
        .iter()
        .zip(&trace.distances)
        .enumerate()
        .map(|(i, (r, d))| vec![i.into(), (*r).into(), (*d).into()])
        .collect();
    let mut summary = Map::new();
    summary.insert("initial_residual".into(), json!(trace.residuals[0]));
    summary.insert("final_residual".into(), json!(trace.residuals.last()));
    summary.insert(
        "final_distance_to_identity".into(),
        json!(trace.distances.last()),
    );
    summary.insert("converged".into(), json!(trace.converged));
    summary.insert(
        "all_feasible".into(),
        json!(trace.feasible.iter().all(|&f| f)),
    );
    Ok(Table {
        columns: cols(&["iter", "residual", "distance_to_identity"]),
        rows,
        summary,
    })
}

/// Self-similarity is checked at `t/27`, `0 ≤ t ≤ 27`.
const SIMILARITY_POINTS: i64 = 27;

fn cmd_cantor(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut rows: Vec<Vec<Cell>> = Vec::new();
    let cantor = Evaluable::Cantor;

    let inv = tn_residual(&cantor, &[3], cfg.k)?;
    rows.push(vec![
        "t3_invariance".into(),
        3i64.into(),
        inv.into(),
        true.into(),
        (inv == 0.0).into(),
    ]);

    for n in 1..=cfg.depth {
        let n32 = u32::try_from(n).map_err(|_| CliError::Config("--depth too large".into()))?;
        let w = lipschitz_witness(n32)?;
        let expected = BigRational::new(BigInt::one(), BigInt::from(2))
            * num_traits::pow(BigRational::new(BigInt::from(3), BigInt::from(2)), n);
        let ok = w.quotient == expected;
        let value = w.quotient.to_f64().unwrap_or(f64::NAN);
        rows.push(vec![
            "lipschitz_quotient".into(),
            n.into(),
            value.into(),
            ok.into(),
            ok.into(),
        ]);
    }

    for t in 0..=SIMILARITY_POINTS {
        let x = UnitPoint::from_ratio(&BigRational::new(
            BigInt::from(t),
            BigInt::from(SIMILARITY_POINTS),
        ))?;
        let checks = self_similarity_check(&x, cfg.depth.max(64))?;
        let held = checks.iter().filter(|&&c| c).count();
        let ok = held == checks.len();
        rows.push(vec![
            "self_similarity".into(),
            t.into(),
            (held as f64).into(),
            true.into(),
            ok.into(),
        ]);
    }

    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for n in [2u64, 3] {
        let ic = invariant_integral_check(&cantor, n)?;
        let exact_half = ic.node_sum_exact.as_ref() == Some(&half);
        rows.push(vec![
            "integral_node_sum".into(),
            (n as i64).into(),
            ic.node_sum.into(),
            ic.node_sum_exact.is_some().into(),
            exact_half.into(),
        ]);
        let close = (ic.quadrature - 0.5).abs() <= 1e-5;
        rows.push(vec![
            "integral_quadrature".into(),
            (n as i64).into(),
            ic.quadrature.into(),
            false.into(),
            close.into(),
        ]);
    }

    let all_pass = rows.iter().all(|r| r[4] == Cell::Bool(true));
    let mut summary = Map::new();
    summary.insert("t3_invariance_max".into(), json!(inv));
    summary.insert("all_pass".into(), json!(all_pass));
    Ok(Table {
        columns: cols(&["check", "index", "value", "exact", "pass"]),
        rows,
        summary,
    })
}

/// Runs one experiment and builds its report without writing anything.
pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut base_exact = None;
    let table = match cfg.command.as_str() {
        "weyl" | "generic" => {
            let bits = match cfg.bits {
                Some(b) => b,
                None => cfg.budget_bits()?,
            };
            let base = BasePoint::parse(&cfg.base, bits, cfg.seed)?;
            base_exact = Some(base.exact_form());
            if cfg.command == "weyl" {
                cmd_weyl(cfg, &base)?
            } else {
                cmd_generic(cfg, &base)?
            }
        }
        "fixpoint" => cmd_fixpoint(cfg)?,
        "cantor" => cmd_cantor(cfg)?,
        other => return Err(CliError::Config(format!("unknown command {other:?}"))),
    };
    Ok(Report {
        metadata: Metadata {
            command: cfg.command.clone(),
            config: cfg.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            base_exact,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        },
        columns: table.columns,
        rows: table.rows,
        summary: table.summary,
    })
}

pub fn read_report(path: &Path) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Re-runs the configuration stored in `old` and checks the rows match.
pub fn replay(old: &Report) -> Result<Report, CliError> {
    let new = execute(&old.metadata.config)?;
    if !new.same_rows(old) {
        return Err(CliError::Mismatch(format!(
            "{} run produced different rows",
            old.metadata.command
        )));
    }
    Ok(new)
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let bytes = match format {
        Format::Csv => report.to_csv()?,
        Format::Json => report.to_json()?,
    };
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(&bytes).map_err(io_error),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let name = match &cli.command {
        Command::Weyl => "weyl",
        Command::Generic => "generic",
        Command::Fixpoint => "fixpoint",
        Command::Cantor => "cantor",
        Command::Replay { report } => {
            let old = read_report(report)?;
            let new = replay(&old)?;
            eprintln!("replay: {} rows identical", new.rows.len());
            if let Some(out) = &cli.opts.out {
                emit(&new, cli.opts.format.unwrap_or(Format::Json), Some(out))?;
            }
            return Ok(());
        }
    };
    let cfg = RunConfig::resolve(name, &cli.opts)?;
    let report = execute(&cfg)?;
    emit(&report, cfg.format, cfg.out.as_deref())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pqcircle: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(command: &str, args: &[&str]) -> RunConfig {
        let mut argv = vec!["pqcircle", command];
        argv.extend_from_slice(args);
        let cli = Cli::try_parse_from(argv).unwrap();
        RunConfig::resolve(command, &cli.opts).unwrap()
    }

    #[test]
    fn ladder_doubles_up_to_n() {
        assert_eq!(ladder(1), vec![1]);
        assert_eq!(ladder(4), vec![1, 2, 4]);
        assert_eq!(ladder(6), vec![1, 2, 4, 6]);
    }

    #[test]
    fn parses_base_forms() {
        assert_eq!(
            BasePoint::parse("1/5", 100, 0).unwrap(),
            BasePoint::Rational(Mod1Rational::new(1, 5).unwrap())
        );
        assert_eq!(
            BasePoint::parse("3", 100, 0).unwrap(),
            BasePoint::Rational(Mod1Rational::zero())
        );
        let BasePoint::Fixed(x) = BasePoint::parse("0.25", 80, 0).unwrap() else {
            panic!()
        };
        assert_eq!(x.to_f64(), 0.25);
        assert_eq!(x.precision(), 80);
        let BasePoint::Fixed(r) = BasePoint::parse("random", 0, 7).unwrap() else {
            panic!()
        };
        assert_eq!(r.precision(), 64);
        let hex = BasePoint::parse(&r.to_string(), 0, 0).unwrap();
        assert_eq!(hex, BasePoint::Fixed(r));
        assert!(BasePoint::parse("1.2.3", 80, 0).is_err());
        assert!(BasePoint::parse("abc", 80, 0).is_err());
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(
            parse_decimal("0.125"),
            Some(BigRational::new(1.into(), 8.into()))
        );
        assert_eq!(
            parse_decimal("-.5"),
            Some(BigRational::new((-1).into(), 2.into()))
        );
        assert_eq!(parse_decimal("."), None);
    }

    #[test]
    fn weyl_small_square_matches_enumeration() {
        let cfg = config("weyl", &["--N", "4", "--k-max", "4"]);
        let report = execute(&cfg).unwrap();
        assert_eq!(
            report.columns,
            cols(&["k", "N", "re", "im", "modulus", "err"])
        );
        assert_eq!(report.rows.len(), 12);
        for row in report.rows.iter().filter(|r| r[1] == Cell::Int(4)) {
            let Cell::Int(k) = row[0] else { panic!() };
            let mut sum = num_complex::Complex64::new(0.0, 0.0);
            for i in 0..4u32 {
                for j in 0..4u32 {
                    let r = (k as u64 * 2u64.pow(i) * 3u64.pow(j)) % 5;
                    sum += num_complex::Complex64::from_polar(
                        1.0,
                        2.0 * std::f64::consts::PI * r as f64 / 5.0,
                    );
                }
            }
            sum /= 16.0;
            assert!((row[2].as_f64().unwrap() - sum.re).abs() < 1e-12);
            assert!((row[3].as_f64().unwrap() - sum.im).abs() < 1e-12);
        }
    }

    #[test]
    fn weyl_at_zero_has_unit_modulus() {
        let report = execute(&config(
            "weyl",
            &["--base", "0", "--N", "8", "--k-max", "1"],
        ))
        .unwrap();
        assert!(report
            .column("modulus")
            .unwrap()
            .iter()
            .all(|c| c.as_f64() == Some(1.0)));
    }

    #[test]
    fn dependent_pair_is_a_config_error() {
        let cli = Cli::try_parse_from(["pqcircle", "weyl", "--p", "4", "--q", "2"]).unwrap();
        let err = RunConfig::resolve("weyl", &cli.opts).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("rational"));
    }

    #[test]
    fn generic_examples() {
        let report = execute(&config("generic", &["--base", "1/7", "--N", "16"])).unwrap();
        let target = report.summary["target_re"].as_f64().unwrap();
        assert!((target + 1.0 / 6.0).abs() < 1e-15);
        let report = execute(&config("generic", &["--base", "0", "--N", "16"])).unwrap();
        assert!(report
            .column("gap")
            .unwrap()
            .iter()
            .all(|c| c.as_f64() == Some(0.0)));
        assert_eq!(report.summary["support"], json!([0]));
        let err = execute(&config("generic", &["--base", "0.2"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn fixpoint_examples() {
        let report = execute(&config(
            "fixpoint",
            &["--init", "identity", "--K", "36", "--iters", "5"],
        ))
        .unwrap();
        assert_eq!(report.rows.len(), 6);
        assert!(report
            .column("residual")
            .unwrap()
            .iter()
            .all(|c| c.as_f64() == Some(0.0)));
        let err = execute(&config("fixpoint", &["--K", "100"])).unwrap_err();
        assert!(err.to_string().contains("grid not commensurate"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn cantor_checks_pass() {
        let report = execute(&config("cantor", &["--K", "243", "--depth", "12"])).unwrap();
        assert_eq!(report.summary["all_pass"], json!(true));
    }

    #[test]
    fn precision_shortfall_exits_3() {
        let err = execute(&config(
            "weyl",
            &["--base", "0.3", "--bits", "60", "--N", "16"],
        ))
        .unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn json_round_trip_preserves_rows() {
        let report = execute(&config("weyl", &["--base", "0.3", "--N", "8"])).unwrap();
        let back: Report = serde_json::from_slice(&report.to_json().unwrap()).unwrap();
        assert!(back.same_rows(&report));
        assert!(replay(&back).is_ok());
    }
}
