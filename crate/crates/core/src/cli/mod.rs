//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 invalid configuration,
//! 3 numerical error (divergence, non-convergence, overflow).

pub mod svg;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coherent::CoherentState;
use crate::error::Error;
use crate::observables::{
    expect_a, expect_a_dagger, expect_bilinears, expect_p, expect_p2, expect_trilinears, expect_x, expect_x2,
    g_functions, uncertainty, uncertainty_scan, PhysicalScales,
};
use crate::qkernel::{Deformation, Truncation, DEFAULT_N_MAX, DEFAULT_TOL};
use crate::revival::{autocorrelation_scan, format_csv_number, revival_times, Execution, ScanResult};
use crate::verify::{run_suite, Fault};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVARIANT: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Default deformation, `q = e^{-0.005}`.
pub const DEFAULT_TAU: f64 = 0.005;
pub const DEFAULT_J: f64 = 6.0;

#[derive(Debug, Parser)]
#[command(
    name = "qklauder",
    version,
    about = "q-deformed Klauder coherent states: expectations, uncertainty, revivals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant suite on the standard grid plus the configured point
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Uncertainty product and bound along the time evolution, as CSV
    Uncertainty {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Autocorrelation |<J,0|J,omega t>|^2 along the time evolution, as CSV
    Autocorr {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Classical period, revival and superrevival times
    RevivalTimes {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// All closed-form expectation values at (J, gamma)
    Expect {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Line plot of two CSV columns as SVG
    Plot {
        /// CSV file with a header line
        input: PathBuf,
        /// Column for the horizontal axis
        #[arg(long, default_value = "t")]
        x: String,
        /// Column for the vertical axis
        #[arg(long, default_value = "abs2")]
        y: String,
        /// Output SVG path
        #[arg(long, visible_alias = "out")]
        svg: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FaultArg {
    ImaginarySine,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Deformation parameter in (0, 1]
    #[arg(long, conflicts_with = "tau")]
    pub q: Option<f64>,
    /// Deformation as q = exp(-tau) [default: 0.005]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Action variable J >= 0
    #[arg(long = "J", default_value_t = DEFAULT_J)]
    pub j: f64,
    /// Angle variable at t = 0
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Absolute series tail tolerance
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Hard cap on series terms
    #[arg(long = "n-max", default_value_t = DEFAULT_N_MAX)]
    pub n_max: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RangeArgs {
    #[arg(long = "t-min", default_value_t = 0.0, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long = "t-max", default_value_t = 20.0, allow_negative_numbers = true)]
    pub t_max: f64,
    #[arg(long, default_value_t = 2001)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot of the main column
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// Validated parameters shared by every computing command.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub deformation: Deformation,
    pub j: f64,
    pub gamma: f64,
    pub scales: PhysicalScales,
    pub truncation: Truncation,
}

impl RunConfig {
    pub fn from_args(p: &ParamArgs) -> Result<Self, Error> {
        let deformation = match (p.q, p.tau) {
            (Some(_), Some(_)) => return Err(Error::invalid("give either --q or --tau, not both")),
            (Some(q), None) => Deformation::new(q)?,
            (None, tau) => Deformation::from_tau(tau.unwrap_or(DEFAULT_TAU))?,
        };
        let scales = PhysicalScales::new(p.hbar, p.mass, p.omega)?;
        let truncation = Truncation::new(p.tol, p.n_max)?;
        if !p.gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must be finite, got {}", p.gamma)));
        }
        if !p.j.is_finite() || p.j < 0.0 {
            return Err(Error::invalid(format!("J must be finite and >= 0, got {}", p.j)));
        }
        Ok(Self { deformation, j: p.j, gamma: p.gamma, scales, truncation })
    }

    pub fn state(&self) -> Result<CoherentState, Error> {
        CoherentState::new(self.j, self.gamma, self.deformation, self.truncation)
    }
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

fn describe(err: &Error, cfg: Option<&RunConfig>) -> Failure {
    let code = match err {
        e if e.is_numerical() => EXIT_NUMERICAL,
        Error::InternalConsistency { .. } => EXIT_INVARIANT,
        _ => EXIT_CONFIG,
    };
    let mut message = err.to_string();
    if let (true, Some(cfg)) = (err.is_numerical(), cfg) {
        message.push_str(&format!(
            " [J = {}, q = {}, convergence radius {}]",
            cfg.j,
            cfg.deformation.q(),
            cfg.deformation.radius()
        ));
    }
    Failure { code, message }
}

/// Writes `bytes` to `path` via a temporary sibling and a rename, so the
/// target is either complete or absent.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let file_name =
        path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => {
            write_atomic(p, text.as_bytes()).map_err(|e| Failure::config(format!("cannot write {}: {e}", p.display())))
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::config(format!("stdout: {e}"))),
    }
}

fn plot_scan(scan: &ScanResult, x: &str, y: &str, title: &str, path: &Path) -> Result<(), Failure> {
    let xs = scan.column(x).map_err(|e| describe(&e, None))?;
    let ys = scan.column(y).map_err(|e| describe(&e, None))?;
    let svg = svg::LineChart { x: &xs, y: &ys, x_label: x, y_label: y, title }.render();
    write_atomic(path, svg.as_bytes()).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

/// A parsed CSV table: header and numeric rows.
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let headers: Vec<String> =
            lines.next().ok_or("CSV input is empty")?.split(',').map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| format!("line {}: {e}", i + 2))?;
            if row.len() != headers.len() {
                return Err(format!("line {}: expected {} fields, found {}", i + 2, headers.len(), row.len()));
            }
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, String> {
        let idx = self
            .headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("unknown column '{name}' (have {})", self.headers.join(", ")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Formats with 10 significant digits in plain decimal notation.
pub fn format_significant(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

fn complex_line(label: &str, z: num_complex::Complex64) -> String {
    format!(
        "{label} = {} {} {}i\n",
        format_csv_number(z.re),
        if z.im < 0.0 { '-' } else { '+' },
        format_csv_number(z.im.abs())
    )
}

fn real_line(label: &str, v: f64) -> String {
    format!("{label} = {}\n", format_csv_number(v))
}

/// Runs one command, writing normal output to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Verify { params, inject_fault } => {
            let cfg = RunConfig::from_args(&params).map_err(|e| describe(&e, None))?;
            let fault = inject_fault.map(|FaultArg::ImaginarySine| Fault::ImaginarySine);
            let outcomes = run_suite(Some((cfg.deformation, cfg.j)), &cfg.scales, &cfg.truncation, fault);
            let mut text = String::new();
            for o in &outcomes {
                text.push_str(&o.to_string());
                text.push('\n');
            }
            let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
            text.push_str(&format!("{} checks, {} failed\n", outcomes.len(), failed.len()));
            emit(None, &text, stdout)?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure { code: EXIT_INVARIANT, message: format!("invariant violated: {}", failed.join(", ")) })
            }
        }
        Command::Uncertainty { params, range, output } => {
            let cfg = RunConfig::from_args(&params).map_err(|e| describe(&e, None))?;
            let state = cfg.state().map_err(|e| describe(&e, Some(&cfg)))?;
            let scan =
                uncertainty_scan(&state, &cfg.scales, range.t_min, range.t_max, range.steps, Execution::Parallel)
                    .map_err(|e| describe(&e, Some(&cfg)))?;
            emit(output.out.as_deref(), &scan.to_csv_string(), stdout)?;
            if let Some(p) = output.svg.as_deref() {
                plot_scan(&scan, "t", "ratio", "uncertainty product / bound", p)?;
            }
            Ok(())
        }
        Command::Autocorr { params, range, output } => {
            let cfg = RunConfig::from_args(&params).map_err(|e| describe(&e, None))?;
            let scan = autocorrelation_scan(
                cfg.j,
                &cfg.deformation,
                &cfg.scales,
                &cfg.truncation,
                range.t_min,
                range.t_max,
                range.steps,
            )
            .map_err(|e| describe(&e, Some(&cfg)))?;
            emit(output.out.as_deref(), &scan.to_csv_string(), stdout)?;
            if let Some(p) = output.svg.as_deref() {
                plot_scan(&scan, "t", "abs2", "autocorrelation |A(t)|^2", p)?;
            }
            Ok(())
        }
        Command::RevivalTimes { params } => {
            let cfg = RunConfig::from_args(&params).map_err(|e| describe(&e, None))?;
            let r = revival_times(cfg.j, &cfg.deformation, &cfg.scales, &cfg.truncation)
                .map_err(|e| describe(&e, Some(&cfg)))?;
            let text = format!(
                "n_bar = {}\nT_cl = {}\nT_rev = {}\nT_suprev = {}\n",
                format_significant(r.n_bar),
                format_significant(r.t_cl),
                format_significant(r.t_rev),
                format_significant(r.t_suprev)
            );
            emit(None, &text, stdout)
        }
        Command::Expect { params } => {
            let cfg = RunConfig::from_args(&params).map_err(|e| describe(&e, None))?;
            let text = expect_report(&cfg).map_err(|e| describe(&e, Some(&cfg)))?;
            emit(None, &text, stdout)
        }
        Command::Plot { input, x, y, svg: out, title } => {
            let text = fs::read_to_string(&input)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", input.display())))?;
            let table = CsvTable::parse(&text).map_err(Failure::config)?;
            if table.rows.is_empty() {
                return Err(Failure::config(format!("{} has no data rows", input.display())));
            }
            let xs = table.column(&x).map_err(Failure::config)?;
            let ys = table.column(&y).map_err(Failure::config)?;
            let title = title.unwrap_or_else(|| format!("{y} vs {x}"));
            let svg = svg::LineChart { x: &xs, y: &ys, x_label: &x, y_label: &y, title: &title }.render();
            write_atomic(&out, svg.as_bytes())
                .map_err(|e| Failure::config(format!("cannot write {}: {e}", out.display())))
        }
    }
}

fn expect_report(cfg: &RunConfig) -> Result<String, Error> {
    let s = cfg.state()?;
    let scales = &cfg.scales;
    let b = expect_bilinears(&s)?;
    let t = expect_trilinears(&s)?;
    let g = g_functions(&s)?;
    let u = uncertainty(&s, scales)?;
    let mut out = String::new();
    out.push_str(&complex_line("<A>", expect_a(&s)?));
    out.push_str(&complex_line("<A+>", expect_a_dagger(&s)?));
    out.push_str(&complex_line("<A+A+>", b.adag_adag));
    out.push_str(&complex_line("<AA>", b.a_a));
    out.push_str(&complex_line("<A+A>", b.adag_a));
    out.push_str(&complex_line("<AA+>", b.a_adag));
    out.push_str(&complex_line("<A+A+A>", t.adag_adag_a));
    out.push_str(&complex_line("<A+AA+>", t.adag_a_adag));
    out.push_str(&complex_line("<A+AA>", t.adag_a_a));
    out.push_str(&complex_line("<AA+A>", t.a_adag_a));
    out.push_str(&real_line("<X>", expect_x(&s, scales)?));
    out.push_str(&real_line("<P>", expect_p(&s, scales)?));
    out.push_str(&real_line("<X^2>", expect_x2(&s, scales)?));
    out.push_str(&real_line("<P^2>", expect_p2(&s, scales)?));
    out.push_str(&real_line("G_c", g.gc));
    out.push_str(&real_line("g_s", g.gs));
    out.push_str(&real_line("G_q", g.gq));
    out.push_str(&real_line("dX", u.dx));
    out.push_str(&real_line("dP", u.dp));
    out.push_str(&real_line("dX*dP", u.product));
    out.push_str(&real_line("bound", u.bound));
    out.push_str(&real_line("ratio", u.ratio));
    Ok(out)
}

/// Parses `args`, runs, and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => {
            let _ = lock.flush();
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(extra: &[&str]) -> ParamArgs {
        let mut args = vec!["qklauder", "expect"];
        args.extend_from_slice(extra);
        match Cli::try_parse_from(args).unwrap().command {
            Command::Expect { params } => params,
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults_mirror_the_reference_point() {
        let cfg = RunConfig::from_args(&params(&[])).unwrap();
        assert_eq!(cfg.deformation, Deformation::from_tau(0.005).unwrap());
        assert_eq!(cfg.j, 6.0);
        assert_eq!(cfg.scales, PhysicalScales::default());
    }

    #[test]
    fn q_and_tau_are_exclusive() {
        assert!(Cli::try_parse_from(["qklauder", "expect", "--q", "0.5", "--tau", "0.1"]).is_err());
        assert!(RunConfig::from_args(&params(&["--q", "1.5"])).is_err());
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(6.650929503182492), "6.650929503");
        assert_eq!(format_significant(1330.1859006364984), "1330.185901");
        assert_eq!(format_significant(399055.7701909495), "399055.7702");
        assert_eq!(format_significant(0.0123456789012), "0.01234567890");
    }

    #[test]
    fn csv_parsing() {
        let t = CsvTable::parse("t,abs2\n0,1\n1,0.5\n").unwrap();
        assert_eq!(t.column("abs2").unwrap(), vec![1.0, 0.5]);
        assert!(t.column("re").is_err());
        assert!(CsvTable::parse("t,abs2\n0\n").is_err());
        assert!(CsvTable::parse("").is_err());
    }
}
