//! Command-line interface.
//!
//! Exit codes: 0 success, 1 IO failure or failed checks, 2 invalid input,
//! 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use phasestep_core::bench::{diagnostics, BenchmarkSpec, Problem};
use phasestep_core::radial::{
    balance_parameter, compute_constants, compute_profile, radius_iteration_be, radius_iteration_eyre,
};
use phasestep_core::{Error as CoreError, SchemeId};

use crate::check::run_checks;
use crate::config::{parse_reaction, Config};
use crate::error::{LabError, LabResult, EXIT_FAILURE, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};
use crate::io::{self, RadialDocument, RunDocument, TableDocument, TableRow};
use crate::sweep;
use crate::table;

#[derive(Debug, Parser)]
#[command(name = "phasestep", version, about = "Allen-Cahn and Cahn-Hilliard time-stepping lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one benchmark cell and write its record, diagnostics and plot series.
    Run(RunArgs),
    /// Run a scheme × eps × sigma grid and write the table.
    Sweep(SweepArgs),
    /// Profile, front constants and radius iterations for a reaction.
    Radial(RadialArgs),
    /// Render a stored table (JSON or CSV) as aligned text.
    Table(TableArgs),
    /// Run the invariant suite.
    Check,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: $PHASESTEP_OUT or ./phasestep-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// ac-circle or ch-annulus.
    #[arg(long)]
    problem: Option<Problem>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    /// classic, quintic or cubic-shifted.
    #[arg(long)]
    reaction: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scheme: Option<SchemeId>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',')]
    schemes: Vec<SchemeId>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long = "sigma", value_delimiter = ',')]
    sigma: Vec<f64>,
    /// Compute reference times for the E column.
    #[arg(long)]
    reference: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct RadialArgs {
    #[arg(long, default_value = "classic")]
    reaction: String,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Initial radius of the iterations.
    #[arg(long, default_value_t = 2.0)]
    r0: f64,
    /// BE step [default: eps^{3/2}].
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// A table or run document (.json) or a table CSV.
    input: PathBuf,
}

impl Common {
    fn config(&self) -> LabResult<Config> {
        let base = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let reaction = match (&self.reaction, self.beta) {
            (Some(kind), beta) => Some(parse_reaction(kind, beta)?),
            (None, Some(_)) => return Err(LabError::Invalid("--beta needs --reaction".into())),
            (None, None) => None,
        };
        Ok(base.merged(Config {
            problem: self.problem,
            n: self.n,
            t_max: self.t_max,
            reaction,
            threads: self.threads,
            output: self.out.clone(),
            ..Config::default()
        }))
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> LabResult<i32> {
    match command {
        Command::Run(a) => cmd_run(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Radial(a) => cmd_radial(a, out),
        Command::Table(a) => cmd_table(a, out),
        Command::Check => cmd_check(out),
    }
}

fn say(out: &mut dyn Write, text: impl AsRef<str>) -> LabResult<()> {
    write!(out, "{}", text.as_ref()).map_err(|e| LabError::io("<stdout>", e))
}

/// Up to 7 decimals with trailing zeros removed.
fn short(x: f64) -> String {
    let s = format!("{x:.7}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn cell_stem(spec: &BenchmarkSpec) -> String {
    format!(
        "{}-{}-eps{}-sigma{:e}",
        spec.problem,
        spec.scheme.name().to_ascii_lowercase(),
        spec.epsilon,
        spec.sigma
    )
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> LabResult<i32> {
    let config = a.common.config()?.merged(Config {
        scheme: a.scheme,
        eps: a.eps,
        sigma: a.sigma,
        ..Config::default()
    });
    let spec = config.benchmark_spec()?;
    let result = sweep::run_cell(&spec)?;
    let diag = diagnostics(&result.record);
    let dir = config.output_dir();
    let stem = cell_stem(&spec);
    let row = TableRow::from(&result);
    io::write_atomic(&dir.join(format!("{stem}.csv")), io::table_to_csv(std::slice::from_ref(&row))?.as_bytes())?;
    io::write_atomic(&dir.join(format!("{stem}-k.csv")), io::series_csv(("t", "k"), &diag.k_profile).as_bytes())?;
    io::write_atomic(
        &dir.join(format!("{stem}-energy.csv")),
        io::series_csv(("t", "energy"), &diag.energy_series).as_bytes(),
    )?;
    let doc = RunDocument { result, diagnostics: diag };
    io::write_document(&dir.join(format!("{stem}.json")), &doc)?;
    say(
        out,
        format!(
            "{} {} eps={} sigma={:e} n={}: M={} CG={} T={:.6} rejected={} energy_increases={}{}\n",
            spec.problem,
            spec.scheme,
            spec.epsilon,
            spec.sigma,
            spec.n,
            row.m,
            row.cg,
            row.t,
            doc.result.rejected,
            doc.diagnostics.energy_increases,
            if spec.problem == Problem::ChAnnulus {
                format!(" mass_drift={:.1e}", doc.diagnostics.mass_drift)
            } else {
                String::new()
            },
        ),
    )?;
    Ok(EXIT_OK)
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write) -> LabResult<i32> {
    let mut over = Config::default();
    over.sweep.schemes = a.schemes;
    over.sweep.eps = a.eps;
    over.sweep.sigma = a.sigma;
    over.sweep.reference = a.reference;
    let config = a.common.config()?.merged(over);
    let doc = sweep::sweep(&config)?;
    let dir = config.output_dir();
    io::write_document(&dir.join("table.json"), &doc)?;
    io::write_atomic(&dir.join("table.csv"), io::table_to_csv(&doc.rows)?.as_bytes())?;
    say(out, table::render(&doc.rows))?;
    say(out, table::render_fits(&doc.fits))?;
    for f in &doc.failures {
        say(out, format!("failed: {} eps={} sigma={:e}: {}\n", f.scheme, f.eps, f.sigma, f.message))?;
    }
    Ok(if doc.failures.is_empty() { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_radial(a: RadialArgs, out: &mut dyn Write) -> LabResult<i32> {
    let reaction = parse_reaction(&a.reaction, a.beta)?;
    if !(a.eps > 0.0 && a.r0 > 1.0) {
        return Err(LabError::Invalid("radial needs eps > 0 and r0 > 1".into()));
    }
    let k = a.k.unwrap_or(a.eps * a.eps.sqrt());
    if !(k > 0.0) {
        return Err(LabError::Invalid("k must be positive".into()));
    }
    let profile = compute_profile(&reaction)?;
    let gamma = balance_parameter(&profile, &reaction)?;
    let constants = match compute_constants(&profile, &reaction) {
        Ok(c) => Some(c),
        Err(CoreError::BalanceDiverged(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let b1 = match constants {
        Some(c) => c.b1,
        None => 0.0,
    };
    let be_radii = radius_iteration_be(a.r0, k, a.eps, b1, a.max_steps);
    let eyre_radii = match constants {
        Some(c) => radius_iteration_eyre(a.r0, a.eps, c.c_e, a.max_steps),
        None => Vec::new(),
    };
    let doc = RadialDocument {
        reaction,
        constants,
        gamma,
        profile_residual: profile.residual(&reaction),
        epsilon: a.eps,
        be_step: k,
        be_radii,
        eyre_radii,
    };
    let dir = a.out.unwrap_or_else(io::default_output_dir);
    io::write_document(&dir.join("radial.json"), &doc)?;
    let steps = |r: &[f64]| phasestep_core::radial::iteration_count(r).map_or("-".to_string(), |n| n.to_string());
    match constants {
        Some(c) => {
            say(
                out,
                format!(
                    "b1 = {}\nc_minus = {}\ngamma = {}\nc_E = {}\n",
                    short(c.b1),
                    short(c.c_minus),
                    short(c.gamma),
                    short(c.c_e)
                ),
            )?;
            say(
                out,
                format!(
                    "BE steps to R <= 1 (k = {}): {}\nEyre steps to R <= 1: {}\n",
                    short(k),
                    steps(&doc.be_radii),
                    steps(&doc.eyre_radii)
                ),
            )?;
            Ok(EXIT_OK)
        }
        None => {
            say(out, format!("gamma = {}\n", short(gamma)))?;
            Err(CoreError::BalanceDiverged(gamma).into())
        }
    }
}

fn cmd_table(a: TableArgs, out: &mut dyn Write) -> LabResult<i32> {
    let text = io::read_to_string(&a.input)?;
    let (rows, fits) = if is_json(&a.input, &text) {
        if io::document_kind(&text)? == <RunDocument as io::Document>::KIND {
            let doc: RunDocument = io::from_json(&text)?;
            (vec![TableRow::from(&doc.result)], Vec::new())
        } else {
            let doc: TableDocument = io::from_json(&text)?;
            (doc.rows, doc.fits)
        }
    } else {
        let rows = io::table_from_csv(&text)?;
        let fits = sweep::fits(&rows);
        (rows, fits)
    };
    say(out, table::render(&rows))?;
    say(out, table::render_fits(&fits))?;
    Ok(EXIT_OK)
}

fn is_json(path: &Path, text: &str) -> bool {
    path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{')
}

fn cmd_check(out: &mut dyn Write) -> LabResult<i32> {
    let results = run_checks();
    for r in &results {
        say(out, format!("{} {}: {}\n", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail))?;
    }
    Ok(if results.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_FAILURE })
}
