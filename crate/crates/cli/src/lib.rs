//! The `mtpde` command line.
//!
//! Exit status: 0 on success, 1 on usage, config or input errors, 2 on
//! numerical failure (including a failed `verify`).

pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use mtpde::characteristics::{characteristic_constant, trace, FamilySign};
use mtpde::epd::{fit_beta, reduce, transform_field, Side, DEFAULT_X_CUT};
use mtpde::equation::{classify_point_eps, CoefficientK, EquationSpec, Form};
use mtpde::exact::{lookup, registry};
use mtpde::grid::{Field, Grid2D};
use mtpde::io;
use mtpde::solver::{convergence_study, solve_with_oracle, Mode, RelaxOptions, Schedule};
use mtpde::verify::{self, VerifyOptions};
use mtpde::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mtpde", version, about = "Mixed elliptic-hyperbolic equations of Tricomi and Keldysh type")]
#[command(args_override_self = true, allow_negative_numbers = true)]
struct Cli {
    /// JSON file with default flag values; command-line flags win
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Type of the equation at points x: elliptic, hyperbolic or degenerate
    Classify(ClassifyArgs),
    /// Trace a characteristic from a hyperbolic seed toward the sonic line
    Trace(TraceArgs),
    /// Reduction to Euler-Poisson-Darboux form and the index beta
    Epd(EpdArgs),
    /// List or sample the exact solutions
    Oracle(OracleArgs),
    /// Finite-difference solve against an exact solution
    Solve(SolveArgs),
    /// Run the acceptance checks and write their artifacts
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormArg {
    Tricomi,
    Keldysh,
}

#[derive(Debug, Args)]
struct EquationArgs {
    /// Equation form: u_xx + K u_yy = 0 (tricomi) or K u_xx + u_yy = 0 (keldysh)
    #[arg(long, value_enum, default_value = "tricomi")]
    form: FormArg,
    /// Exponent of K(x) = sign(x) |x|^m
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Tabulated K from a CSV file with header `x,K`; replaces --m
    #[arg(long, value_name = "PATH")]
    k_table: Option<PathBuf>,
}

impl EquationArgs {
    fn spec(&self) -> Result<EquationSpec, Error> {
        let form = match self.form {
            FormArg::Tricomi => Form::Tricomi,
            FormArg::Keldysh => Form::Keldysh,
        };
        let coeff = match &self.k_table {
            Some(p) => CoefficientK::Tabulated(io::parse_k_table(&io::read_text(p)?)?),
            None => CoefficientK::power_law(self.m)?,
        };
        Ok(EquationSpec::new(form, coeff))
    }
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    eq: EquationArgs,
    /// Points to classify, comma separated
    #[arg(long, required = true, value_delimiter = ',', action = ArgAction::Set, allow_hyphen_values = true)]
    x: Vec<f64>,
    /// |K| at or below this counts as degenerate
    #[arg(long, default_value_t = 0.0)]
    eps_k: f64,
    /// Append (subsonic) / (supersonic) / (sonic)
    #[arg(long)]
    transonic_labels: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Plus,
    Minus,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[command(flatten)]
    eq: EquationArgs,
    #[arg(long, value_enum, default_value = "plus")]
    family: FamilyArg,
    /// Seed point `x,y` with x < 0
    #[arg(long, required = true, value_delimiter = ',', action = ArgAction::Set, num_args = 1, allow_hyphen_values = true)]
    seed: Vec<f64>,
    /// Stop abscissa, at most 0 (the sonic line)
    #[arg(long, default_value_t = 0.0)]
    x_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Write the curve as CSV here instead of standard output
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Elliptic,
    Hyperbolic,
}

#[derive(Debug, Args)]
struct EpdArgs {
    #[command(flatten)]
    eq: EquationArgs,
    #[arg(long, value_enum, default_value = "elliptic")]
    side: SideArg,
    /// Fit beta on this exact solution after the transform
    #[arg(long)]
    oracle: Option<String>,
    /// x range of the sampled grid, `a,b`
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, allow_hyphen_values = true)]
    x_range: Option<Vec<f64>>,
    /// y range of the sampled grid, `a,b`
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, allow_hyphen_values = true)]
    y_range: Option<Vec<f64>>,
    /// Points per direction of the sampled grid
    #[arg(long, default_value_t = 129)]
    n: usize,
    /// Smallest |x| allowed in the sampled grid
    #[arg(long, default_value_t = DEFAULT_X_CUT)]
    x_cut: f64,
    /// Write the transformed field (tau, y, u) as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Grid size `NX` or `NXxNY`
    #[arg(long)]
    grid: Option<String>,
    /// Rectangle `x_min,x_max,y_min,y_max`
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, allow_hyphen_values = true)]
    domain: Option<Vec<f64>>,
}

impl GridArgs {
    fn size(&self) -> Result<Option<(usize, usize)>, Error> {
        let Some(g) = &self.grid else { return Ok(None) };
        let bad = || Error::InvalidArgument(format!("grid must be NX or NXxNY, got '{g}'"));
        let mut parts = g.split('x').map(|p| p.trim().parse::<usize>().map_err(|_| bad()));
        let nx = parts.next().ok_or_else(bad)??;
        let ny = parts.next().transpose()?.unwrap_or(nx);
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(Some((nx, ny)))
    }

    fn domain(&self) -> Result<Option<((f64, f64), (f64, f64))>, Error> {
        match self.domain.as_deref() {
            None => Ok(None),
            Some([a, b, c, d]) => Ok(Some(((*a, *b), (*c, *d)))),
            Some(v) => Err(Error::InvalidArgument(format!("domain needs 4 numbers, got {}", v.len()))),
        }
    }
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// List the registered solutions
    #[arg(long, conflicts_with = "sample")]
    list: bool,
    /// Sample this solution on a grid
    #[arg(long, value_name = "ID")]
    sample: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
    /// Write the sampled field as CSV here instead of standard output
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Also write a PGM heatmap
    #[arg(long, value_name = "PATH")]
    pgm: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Elliptic,
    Cauchy,
    Mixed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Elliptic => Mode::Elliptic,
            ModeArg::Cauchy => Mode::Cauchy,
            ModeArg::Mixed => Mode::Mixed,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Exact solution supplying boundary data and the error reference
    #[arg(long, default_value = "quartic")]
    oracle: String,
    #[command(flatten)]
    grid: GridArgs,
    /// Stopping tolerance on the scaled residual
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1.5)]
    omega: f64,
    #[arg(long, default_value_t = 200_000)]
    max_iter: usize,
    /// Worker threads for relaxation; 1 runs the sequential sweep
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Run a refinement study with this many levels instead of one solve
    #[arg(long, value_name = "LEVELS")]
    study: Option<usize>,
    /// Solution field as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Report (or study) as JSON
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Solution heatmap as PGM
    #[arg(long, value_name = "PATH")]
    pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Directory for the artifacts and summary.json
    #[arg(long, default_value = "verify-out", value_name = "DIR")]
    out: PathBuf,
    /// Worker threads for relaxation; 1 runs the sequential sweep
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Run only these checks, comma separated
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    only: Option<Vec<u8>>,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Checks(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type CmdResult = Result<(), Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit status.
pub fn run(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let argv = match prepare(args) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Classify(a) => classify(a, out),
        Command::Trace(a) => trace_cmd(a, out),
        Command::Epd(a) => epd(a, out),
        Command::Oracle(a) => oracle(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Verify(a) => verify_cmd(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
        Err(Failure::Checks(n)) => {
            let _ = writeln!(err, "error: {n} check(s) failed");
            EXIT_NUMERICAL
        }
    }
}

fn prepare(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut it = args.into_iter();
    let program = it.next().unwrap_or_else(|| "mtpde".into());
    let mut rest: Vec<OsString> = it.collect();
    let Some(path) = config::take_config_path(&mut rest).map_err(|e| e.to_string())? else {
        let mut v = vec![program];
        v.extend(rest);
        return Ok(v);
    };
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(&path)
        .map_err(|e| config::ConfigError::Read { path: shown.clone(), reason: e.to_string() }.to_string())?;
    let flags = config::parse_config(&shown, &text).map_err(|e| e.to_string())?;
    config::merge(program, rest, flags).map_err(|e| e.to_string())
}

fn classify(a: ClassifyArgs, out: &mut dyn Write) -> CmdResult {
    let spec = a.eq.spec()?;
    if !(a.eps_k >= 0.0) {
        return Err(Failure::Usage(format!("--eps-k must be non-negative, got {}", a.eps_k)));
    }
    for &x in &a.x {
        let t = classify_point_eps(&spec, x, a.eps_k)?;
        if a.transonic_labels {
            writeln!(out, "{t} ({})", t.transonic_label())?;
        } else {
            writeln!(out, "{t}")?;
        }
    }
    Ok(())
}

fn trace_cmd(a: TraceArgs, out: &mut dyn Write) -> CmdResult {
    let spec = a.eq.spec()?;
    let &[x, y] = a.seed.as_slice() else {
        return Err(Failure::Usage(format!("--seed needs `x,y`, got {} numbers", a.seed.len())));
    };
    let family = match a.family {
        FamilyArg::Plus => FamilySign::Plus,
        FamilyArg::Minus => FamilySign::Minus,
    };
    let curve = trace(&spec, family, (x, y), a.x_end, a.step)?;
    let csv = io::curve_to_csv(&curve);
    match &a.csv {
        Some(p) => {
            io::write_text(p, &csv)?;
            let (ex, ey) = curve.end();
            write!(out, "{} samples, end ({ex:.12}, {ey:.12}), reached sonic line: {}", curve.samples.len(), curve.reached_sonic)?;
            if spec.is_canonical() {
                write!(out, ", C = {:.12}", characteristic_constant(&spec, family, x, y)?)?;
            }
            writeln!(out)?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

/// `p/q` with a small denominator when `v` is such a fraction.
fn fraction(v: f64) -> Option<String> {
    (1..=64i64).find_map(|q| {
        let p = (v * q as f64).round();
        ((v - p / q as f64).abs() <= 1e-12 * v.abs().max(1.0)).then(|| {
            if q == 1 {
                format!("{p}")
            } else {
                format!("{p}/{q}")
            }
        })
    })
}

fn beta_text(v: f64) -> String {
    match fraction(v) {
        Some(f) => format!("{f} ({v:.15})"),
        None => format!("{v:.15}"),
    }
}

fn pair(v: &Option<Vec<f64>>, default: (f64, f64), name: &str) -> Result<(f64, f64), Failure> {
    match v.as_deref() {
        None => Ok(default),
        Some(&[a, b]) => Ok((a, b)),
        Some(v) => Err(Failure::Usage(format!("--{name} needs `a,b`, got {} numbers", v.len()))),
    }
}

fn epd(a: EpdArgs, out: &mut dyn Write) -> CmdResult {
    let spec = a.eq.spec()?;
    let side = match a.side {
        SideArg::Elliptic => Side::Elliptic,
        SideArg::Hyperbolic => Side::Hyperbolic,
    };
    let red = reduce(&spec, side)?;
    writeln!(out, "equation: {spec}")?;
    writeln!(out, "beta = {}", beta_text(red.beta))?;
    if let Some(q) = red.quoted_beta {
        writeln!(out, "quoted beta = {} (differs from the chain-rule value above)", beta_text(q))?;
    }
    writeln!(out, "{}", red.describe_map())?;
    writeln!(out, "y~ = {} * y", red.y_scale)?;
    let Some(id) = &a.oracle else {
        if a.csv.is_some() {
            return Err(Failure::Usage("--csv needs --oracle".into()));
        }
        return Ok(());
    };
    let sol = lookup(id)?;
    let default_x = match side {
        Side::Elliptic => (0.5, 1.5),
        Side::Hyperbolic => (-1.5, -0.5),
    };
    let xr = pair(&a.x_range, default_x, "x-range")?;
    let yr = pair(&a.y_range, (-1.0, 1.0), "y-range")?;
    let g = Grid2D::new(a.n, a.n, xr, yr)?;
    let field = Field::try_from_fn(g, |x, y| sol.eval(x, y))?;
    let tf = transform_field(&field, &red, a.x_cut, id)?;
    let fitted = fit_beta(&tf, side.sign())?;
    writeln!(out, "fitted beta ({id}, {}x{}) = {fitted:.15}", a.n, a.n)?;
    if let Some(p) = &a.csv {
        io::write_text(p, &io::tau_field_to_csv(&tf))?;
    }
    Ok(())
}

fn oracle(a: OracleArgs, out: &mut dyn Write) -> CmdResult {
    if a.list {
        for s in registry() {
            writeln!(out, "{}\t{}\t{}", s.id, s.spec, s.formula)?;
        }
        return Ok(());
    }
    let Some(id) = &a.sample else {
        return Err(Failure::Usage("oracle needs --list or --sample ID".into()));
    };
    let sol = lookup(id)?;
    let (nx, ny) = a.grid.size()?.unwrap_or((33, 33));
    let (xr, yr) = a.grid.domain()?.unwrap_or(((-1.0, 1.0), (-1.0, 1.0)));
    let field = Field::try_from_fn(Grid2D::new(nx, ny, xr, yr)?, |x, y| sol.eval(x, y))?;
    emit_field(&field, a.csv.as_deref(), a.pgm.as_deref(), out)
}

fn emit_field(field: &Field, csv: Option<&Path>, pgm: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    match csv {
        Some(p) => io::save_field(field, p)?,
        None => out.write_all(io::field_to_csv(field).as_bytes())?,
    }
    if let Some(p) = pgm {
        io::write_text(p, &io::field_to_pgm(field))?;
    }
    Ok(())
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> CmdResult {
    if a.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let mode = Mode::from(a.mode);
    let schedule = if a.threads > 1 { Schedule::RedBlack { threads: a.threads } } else { Schedule::Sequential };
    let opts = RelaxOptions { tol: a.tol, max_iter: a.max_iter, omega: a.omega, schedule };
    if let Some(levels) = a.study {
        if a.grid.domain.is_some() || a.csv.is_some() || a.pgm.is_some() {
            return Err(Failure::Usage("--study uses the default domain and writes only --json".into()));
        }
        let n0 = a.grid.size()?.map_or(33, |(nx, _)| nx);
        let s = convergence_study(mode, &a.oracle, n0, levels, &opts)?;
        for l in &s.levels {
            writeln!(out, "{}x{}: iterations {}, error_max {:.6e}, error_l2 {:.6e}", l.nx, l.ny, l.iterations, l.error_max, l.error_l2)?;
        }
        match s.report.order_estimate.and_then(|o| o.value()) {
            Some(p) => writeln!(out, "observed order {p:.4}")?,
            None => writeln!(out, "observed order not applicable (errors at rounding level)")?,
        }
        if let Some(p) = &a.json {
            io::write_text(p, &io::to_json(&s)?)?;
        }
        return Ok(());
    }
    let sol = lookup(&a.oracle)?;
    let grid = match (a.grid.size()?, a.grid.domain()?) {
        (None, None) => mode.level_grid(33)?,
        (size, dom) => {
            let (x, y) = dom.unwrap_or_else(|| mode.default_domain());
            let (nx, ny) = size.unwrap_or((33, 33));
            Grid2D::new(nx, ny, x, y)?
        }
    };
    let (field, report) = solve_with_oracle(mode, &sol, grid, &opts)?;
    write!(out, "{} {}x{}: iterations {}, residual {:.3e}", mode, grid.nx, grid.ny, report.iterations, report.final_residual)?;
    if let Some(e) = report.error_max {
        write!(out, ", error_max {e:.6e}")?;
    }
    if let Some(c) = report.cfl_margin {
        write!(out, ", cfl_margin {c:.4}")?;
    }
    writeln!(out)?;
    if let Some(p) = &a.csv {
        io::save_field(&field, p)?;
    }
    if let Some(p) = &a.pgm {
        io::write_text(p, &io::field_to_pgm(&field))?;
    }
    if let Some(p) = &a.json {
        io::write_text(p, &io::to_json(&report)?)?;
    }
    Ok(())
}

fn verify_cmd(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    if a.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let opts = VerifyOptions { threads: a.threads };
    let outcomes = match &a.only {
        None => verify::run_all(&opts, Some(&a.out))?,
        Some(ids) => {
            let outcomes = ids.iter().map(|&id| verify::run(id, &opts)).collect::<Result<Vec<_>, _>>()?;
            for o in &outcomes {
                for art in &o.artifacts {
                    io::write_text(&a.out.join(&art.name), &String::from_utf8_lossy(&art.bytes))?;
                }
            }
            io::write_text(&a.out.join("summary.json"), &verify::summary_json(&outcomes)?)?;
            outcomes
        }
    };
    for o in &outcomes {
        writeln!(out, "{}", o.line())?;
    }
    let failed = outcomes.iter().filter(|o| !o.ok()).count();
    writeln!(out, "{} of {} checks passed; artifacts in {}", outcomes.len() - failed, outcomes.len(), a.out.display())?;
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(fraction(1.0 / 3.0).as_deref(), Some("1/3"));
        assert_eq!(fraction(-0.25).as_deref(), Some("-1/4"));
        assert_eq!(fraction(-1.0).as_deref(), Some("-1"));
        assert_eq!(fraction(std::f64::consts::PI), None);
        assert_eq!(beta_text(0.5), "1/2 (0.500000000000000)");
    }

    #[test]
    fn grid_sizes() {
        let g = |s: &str| GridArgs { grid: Some(s.into()), domain: None }.size();
        assert_eq!(g("33").unwrap(), Some((33, 33)));
        assert_eq!(g("17x65").unwrap(), Some((17, 65)));
        assert!(g("17x").is_err());
        assert!(g("3x4x5").is_err());
    }
}
