//! Command-line front end for `gjms-core`.
//!
//! Each subcommand resolves its settings (config file, then flags), runs,
//! and writes either a JSON report or the command's CSV table.

pub mod commands;
pub mod error;
pub mod report;
pub mod settings;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Outcome;
use crate::error::{usage, CliError, CliResult, EXIT_ACCEPTANCE, EXIT_OK};
use crate::report::{Provenance, Report};
use crate::settings::Settings;

#[derive(Debug, Parser)]
#[command(
    name = "gjms",
    version,
    about = "GJMS spectra, sharp Sobolev constants and Lane-Emden solvers on spheres"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of k, Lambda_k, mu_hat_k and g mu_hat_k Lambda_k.
    Eigenvalues(Opts),
    /// Closed-form sharp constants over a grid of exponents.
    SharpConstant(Opts),
    /// Multistart minimization of the Rayleigh quotient.
    Minimize(Opts),
    /// Solve P_m u = f(u) from an initial guess.
    Solve(Opts),
    /// Seeded Newton starts looking for nonconstant positive solutions.
    Probe(Opts),
    /// Run the invariant suite and report a margin per check.
    Verify(Opts),
    /// Minimizations or bubble quotients over a parameter grid.
    Sweep(Opts),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eigenvalues(_) => "eigenvalues",
            Command::SharpConstant(_) => "sharp-constant",
            Command::Minimize(_) => "minimize",
            Command::Solve(_) => "solve",
            Command::Probe(_) => "probe",
            Command::Verify(_) => "verify",
            Command::Sweep(_) => "sweep",
        }
    }

    fn opts(&self) -> &Opts {
        match self {
            Command::Eigenvalues(o)
            | Command::SharpConstant(o)
            | Command::Minimize(o)
            | Command::Solve(o)
            | Command::Probe(o)
            | Command::Verify(o)
            | Command::Sweep(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Shared options. Values are strings here and parsed once file and flag
/// settings are merged, so both go through the same diagnostics.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Operator order.
    #[arg(long)]
    pub m: Option<String>,
    /// Sphere dimension.
    #[arg(long)]
    pub n: Option<String>,
    /// Exponent, or comma separated exponents; fractions such as 5/2 are accepted.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Nonlinearity as terms a:p, e.g. "1:1,1:2" for t + t^2.
    #[arg(long)]
    pub f: Option<String>,
    /// Truncation degree.
    #[arg(long = "K")]
    pub k: Option<String>,
    /// Quadrature order.
    #[arg(long = "Q")]
    pub q: Option<String>,
    #[arg(long)]
    pub starts: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub max_iter: Option<String>,
    /// Initial guess for solve: constant, random or bubble:<lambda>.
    #[arg(long)]
    pub init: Option<String>,
    /// newton or green.
    #[arg(long)]
    pub method: Option<String>,
    /// Bubble dilations for sweep; switches sweep to quotient series.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Comma separated check groups for verify.
    #[arg(long)]
    pub only: Option<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Opts {
    fn settings(&self) -> CliResult<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let flags = [
            ("m", &self.m),
            ("n", &self.n),
            ("p", &self.p),
            ("f", &self.f),
            ("K", &self.k),
            ("Q", &self.q),
            ("starts", &self.starts),
            ("seed", &self.seed),
            ("tol", &self.tol),
            ("max-iter", &self.max_iter),
            ("init", &self.init),
            ("method", &self.method),
            ("lambda", &self.lambda),
            ("only", &self.only),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set_flag(key, v);
            }
        }
        if let Some(out) = &self.out {
            s.set_flag("out", &out.display().to_string());
        }
        if let Some(f) = self.format {
            s.set_flag("format", if f == Format::Json { "json" } else { "csv" });
        }
        Ok(s)
    }
}

fn format_of(s: &Settings) -> CliResult<Format> {
    match s.text("format") {
        None | Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        Some(_) => Err(s.invalid("format", "expected json or csv")),
    }
}

/// Runs one command and returns the report together with its CSV table.
pub fn execute(command: &Command) -> CliResult<(Report, report::Table, Settings)> {
    let name = command.name();
    let s = command.opts().settings()?;
    commands::reject_unused_flags(&s, name)?;
    format_of(&s)?;
    let start = Instant::now();
    let outcome: Outcome = match command {
        Command::Eigenvalues(_) => commands::eigenvalues(&s)?,
        Command::SharpConstant(_) => commands::sharp_constant_table(&s)?,
        Command::Minimize(_) => commands::minimize(&s)?,
        Command::Solve(_) => commands::solve(&s)?,
        Command::Probe(_) => commands::probe(&s)?,
        Command::Verify(_) => suite::verify(&s)?,
        Command::Sweep(_) => commands::sweep(&s)?,
    };
    let wall_time_s = start.elapsed().as_secs_f64();
    let failures = outcome
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.clone())
        .collect();
    let report = Report {
        command: name.to_string(),
        inputs: outcome.inputs,
        results: outcome.results,
        checks: outcome.checks,
        failures,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION"),
            seed: outcome.seed,
            degree: outcome.degree,
            order: outcome.order,
            wall_time_s,
        },
    };
    Ok((report, outcome.table, s))
}

fn emit(report: &Report, table: &report::Table, s: &Settings) -> CliResult<()> {
    let mut sink: Box<dyn Write> = match s.text("out") {
        Some(path) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| usage(format!("cannot create output {path}: {e}")))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    match format_of(s)? {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, report)?;
            writeln!(sink)?;
        }
        Format::Csv => table.write(&mut sink)?,
    }
    sink.flush()?;
    Ok(())
}

/// Entry point shared by the binary and the tests; returns the exit status.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = execute(&cli.command).and_then(|(report, table, s)| {
        emit(&report, &table, &s)?;
        Ok(report)
    });
    match result {
        Ok(report) if report.failures.is_empty() => EXIT_OK,
        Ok(report) => {
            eprintln!("failed checks: {}", report.failures.join(", "));
            EXIT_ACCEPTANCE
        }
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
