//! Command-line front end: single solves, sweeps, asymptotic fits, anchor
//! checks, profiles and PDE validation with CSV or JSON output.

pub mod alpha;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cone_spectra::asymptotics::{fit_exponent_in, sweep, DEFAULT_POINTS, DEFAULT_WINDOW};
use cone_spectra::pdevalidate::{minimize_energy, MeridianGrid, COLLAR};
use cone_spectra::profile::{profile_for, second_order_residual, spacing_for};
use cone_spectra::reference::anchor_table;
use cone_spectra::{solve_lambda, Branch, ConeProblem, EigenResult, Error, Tolerances};

pub use output::{Document, Record};
use output::{fmt_f64, Output};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "CONE_SPECTRA_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "cone-spectra", version, about = "Homogeneous p-harmonic functions on circular cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write to this file instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (overridden by CONE_SPECTRA_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Include per-solve wall times (makes output run-dependent)
    #[arg(long, global = true)]
    timings: bool,

    #[arg(long, global = true)]
    lambda_tol: Option<f64>,
    #[arg(long, global = true)]
    alpha_tol: Option<f64>,
    #[arg(long, global = true)]
    ode_rtol: Option<f64>,
    #[arg(long, global = true)]
    ode_atol: Option<f64>,
    #[arg(long, global = true)]
    blowup_threshold: Option<f64>,
    #[arg(long, global = true)]
    theta_start: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for one exponent
    Solve(ProblemArgs),
    /// Solve over a list of apertures
    Sweep(SweepArgs),
    /// Sweep toward the slit and fit the asymptotic law of the fundamental exponent
    Fit(FitArgs),
    /// Compare the solver with every exact value known for (p, n)
    Anchors(PnArgs),
    /// Angular profile phi on a uniform grid
    Profile(ProfileArgs),
    /// Minimize the discrete energy with the computed boundary data
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct PnArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    n: u32,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    #[command(flatten)]
    pn: PnArgs,
    /// Half-aperture: a number or a token such as pi, pi/2, pi-1e-3
    #[arg(long, value_parser = alpha::parse_alpha, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value = "fundamental")]
    branch: Branch,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    pn: PnArgs,
    #[arg(long, default_value = "fundamental")]
    branch: Branch,
    /// Comma-separated apertures
    #[arg(long, value_delimiter = ',', value_parser = alpha::parse_alpha, conflicts_with = "alpha_spec")]
    alpha: Vec<f64>,
    /// geometric:CENTER,EPS_MIN,EPS_MAX,COUNT or linear:START,STOP,COUNT
    #[arg(long)]
    alpha_spec: Option<String>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    pn: PnArgs,
    #[arg(long, default_value_t = DEFAULT_WINDOW.0)]
    eps_min: f64,
    #[arg(long, default_value_t = DEFAULT_WINDOW.1)]
    eps_max: f64,
    /// Sweep points inside the window
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Use this exponent instead of solving for it
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Grid spacing in theta
    #[arg(long)]
    spacing: Option<f64>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Cells per direction
    #[arg(long, default_value_t = 32)]
    cells: usize,
    #[arg(long, default_value_t = 1.0)]
    r_min: f64,
    #[arg(long, default_value_t = 2.0)]
    r_max: f64,
}

/// Why a run failed, mapped onto the exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Domain(_) => EXIT_DOMAIN,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_domain() {
            Failure::Domain(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn parallelism(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a positive integer (got '{v}')")))?,
        ),
        Err(_) => None,
    };
    let threads = from_env.or(flag);
    if threads == Some(0) {
        return Err(Failure::Usage("parallelism must be at least 1".into()));
    }
    Ok(threads)
}

fn tolerances(g: &GlobalArgs) -> Result<Tolerances, Failure> {
    let d = Tolerances::default();
    Tolerances {
        lambda_tol: g.lambda_tol.unwrap_or(d.lambda_tol),
        alpha_tol: g.alpha_tol.unwrap_or(d.alpha_tol),
        ode_rel_tol: g.ode_rtol.unwrap_or(d.ode_rel_tol),
        ode_abs_tol: g.ode_atol.unwrap_or(d.ode_abs_tol),
        psi_blowup_threshold: g.blowup_threshold.unwrap_or(d.psi_blowup_threshold),
        theta_start: g.theta_start.unwrap_or(d.theta_start),
    }
    .validate()
    .map_err(Failure::from)
}

fn execute(cli: &Cli) -> Result<i32, Failure> {
    let tol = tolerances(&cli.global)?;
    let threads = parallelism(cli.global.threads)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::Numerical(format!("cannot start worker pool: {e}")))?;
    let out = Output::new(cli.global.format, cli.global.output.clone());
    pool.install(|| match &cli.command {
        Command::Solve(a) => cmd_solve(a, &tol, &out),
        Command::Sweep(a) => cmd_sweep(a, &tol, &out, cli.global.timings),
        Command::Fit(a) => cmd_fit(a, &tol, &out, cli.global.timings),
        Command::Anchors(a) => cmd_anchors(a, &tol, &out),
        Command::Profile(a) => cmd_profile(a, &tol, &out),
        Command::Validate(a) => cmd_validate(a, &tol, &out),
    })
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    version: &'a str,
    p: f64,
    n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    branch: Option<Branch>,
    tolerances: Tolerances,
}

fn meta<'a>(command: &'a str, pn: &PnArgs, branch: Option<Branch>, tol: &Tolerances) -> Meta<'a> {
    Meta {
        command,
        version: env!("CARGO_PKG_VERSION"),
        p: pn.p,
        n: pn.n,
        branch,
        tolerances: *tol,
    }
}

fn problem(a: &ProblemArgs) -> Result<ConeProblem, Failure> {
    Ok(ConeProblem::new(a.pn.p, a.pn.n, a.alpha, a.branch)?)
}

fn cmd_solve(a: &ProblemArgs, tol: &Tolerances, out: &Output) -> Result<i32, Failure> {
    let pb = problem(a)?;
    let r = solve_lambda(&pb, tol)?;
    let rec = Record::from_result(&r);
    out.write_records(&meta("solve", &a.pn, Some(a.branch), tol), &[rec], None)?;
    Ok(EXIT_OK)
}

fn cmd_sweep(a: &SweepArgs, tol: &Tolerances, out: &Output, timings: bool) -> Result<i32, Failure> {
    let alphas = match (&a.alpha_spec, a.alpha.is_empty()) {
        (Some(spec), true) => alpha::parse_alpha_spec(spec).map_err(Failure::Usage)?,
        (None, false) => {
            let mut v = a.alpha.clone();
            v.sort_by(f64::total_cmp);
            v
        }
        _ => return Err(Failure::Usage("sweep needs exactly one of --alpha or --alpha-spec".into())),
    };
    let records = sweep(a.pn.p, a.pn.n, a.branch, &alphas, tol);
    let rows: Vec<Record> = records
        .iter()
        .map(|r| Record::from_sweep(r, a.pn.p, a.pn.n, a.branch, timings))
        .collect();
    out.write_records(&meta("sweep", &a.pn, Some(a.branch), tol), &rows, None)?;
    Ok(sweep_exit(&records))
}

fn sweep_exit(records: &[cone_spectra::asymptotics::SweepRecord]) -> i32 {
    if records.iter().any(|r| !r.is_ok() && !r.domain_error) {
        EXIT_NUMERICAL
    } else if records.iter().any(|r| !r.is_ok()) {
        EXIT_DOMAIN
    } else {
        EXIT_OK
    }
}

fn cmd_fit(a: &FitArgs, tol: &Tolerances, out: &Output, timings: bool) -> Result<i32, Failure> {
    let alphas = cone_spectra::asymptotics::geometric_alphas(a.eps_min, a.eps_max, a.points)?;
    let branch = Branch::Fundamental;
    let records = sweep(a.pn.p, a.pn.n, branch, &alphas, tol);
    let fit = fit_exponent_in(&records, a.pn.p, a.pn.n, (a.eps_min, a.eps_max))?;
    let rows: Vec<Record> = records
        .iter()
        .map(|r| Record::from_sweep(r, a.pn.p, a.pn.n, branch, timings))
        .collect();
    let m = meta("fit", &a.pn, Some(branch), tol);
    match out.format() {
        Format::Json => out.write_records(&m, &rows, Some(("fit", serde_json::to_value(&fit).unwrap())))?,
        Format::Csv => out.write_csv(
            &[
                "law",
                "fitted_exponent",
                "theoretical_exponent",
                "fitted_prefactor",
                "r_squared",
                "eps_min",
                "eps_max",
                "records_used",
                "flagged",
            ],
            &[vec![
                fit.law.name().to_string(),
                fmt_f64(fit.fitted_exponent),
                fmt_f64(fit.theoretical_exponent),
                fmt_f64(fit.fitted_prefactor),
                fmt_f64(fit.r_squared),
                fmt_f64(fit.window.0),
                fmt_f64(fit.window.1),
                fit.records_used.to_string(),
                fit.flagged().to_string(),
            ]],
        )?,
    }
    Ok(EXIT_OK)
}

fn cmd_anchors(a: &PnArgs, tol: &Tolerances, out: &Output) -> Result<i32, Failure> {
    let anchors = anchor_table(a.p, a.n)?;
    let mut rows = Vec::with_capacity(anchors.len());
    let mut code = EXIT_OK;
    for an in &anchors {
        let mut rec = match solve_lambda(&an.problem, tol) {
            Ok(r) => Record::from_result(&r),
            Err(e) => {
                code = code.max(if e.is_domain() { EXIT_DOMAIN } else { EXIT_NUMERICAL });
                Record::failed(an.problem.alpha(), a.p, a.n, an.problem.branch(), &e)
            }
        };
        rec.lambda_exact = Some(an.lambda_exact);
        rec.provenance = Some(an.provenance.clone());
        rows.push(rec);
    }
    rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    out.write_records(&meta("anchors", a, None, tol), &rows, None)?;
    Ok(code)
}

/// Exponent for commands that accept `--lambda` as a shortcut.
fn exponent_for(a: &ProblemArgs, lambda: Option<f64>, tol: &Tolerances) -> Result<(ConeProblem, f64), Failure> {
    let pb = problem(a)?;
    let lambda = match lambda {
        Some(l) => {
            if l.signum() != a.branch.sign() {
                return Err(Failure::Domain(format!(
                    "lambda={l} has the wrong sign for the {} branch",
                    a.branch
                )));
            }
            l
        }
        None => solve_lambda(&pb, tol)?.lambda,
    };
    Ok((pb, lambda))
}

fn cmd_profile(a: &ProfileArgs, tol: &Tolerances, out: &Output) -> Result<i32, Failure> {
    let (pb, lambda) = exponent_for(&a.problem, a.lambda, tol)?;
    let spacing = a.spacing.unwrap_or_else(|| spacing_for(pb.alpha()));
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Failure::Usage(format!("--spacing must be positive (got {spacing})")));
    }
    let prof = profile_for(lambda, pb.p(), pb.n(), tol, spacing)?;
    let residual = second_order_residual(&prof, pb.p(), pb.n()).ok();
    match out.format() {
        Format::Json => {
            #[derive(Serialize)]
            struct Node {
                theta: f64,
                phi: f64,
                dphi: f64,
            }
            let nodes: Vec<Node> = (0..prof.len())
                .map(|i| Node {
                    theta: prof.theta[i],
                    phi: prof.phi[i],
                    dphi: prof.dphi[i],
                })
                .collect();
            let extra = serde_json::json!({
                "lambda": lambda,
                "alpha_star": prof.alpha,
                "spacing": spacing,
                "residual_ode": residual,
            });
            out.write_json(&meta("profile", &a.problem.pn, Some(pb.branch()), tol), &nodes, Some(("profile", extra)))?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = (0..prof.len())
                .map(|i| vec![fmt_f64(prof.theta[i]), fmt_f64(prof.phi[i]), fmt_f64(prof.dphi[i])])
                .collect();
            out.write_csv(&["theta", "phi", "dphi"], &rows)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_validate(a: &ValidateArgs, tol: &Tolerances, out: &Output) -> Result<i32, Failure> {
    let (pb, lambda) = exponent_for(&a.problem, a.lambda, tol)?;
    let alpha_cap = (pb.alpha() - COLLAR).min(std::f64::consts::PI - 0.1);
    let grid = MeridianGrid::new((a.r_min, a.r_max), alpha_cap, a.cells, a.cells, pb.n())?;
    let prof = profile_for(lambda, pb.p(), pb.n(), tol, spacing_for(pb.alpha()))?;
    let report = minimize_energy(&grid, lambda, &prof, pb.p(), pb.n())?;
    let m = meta("validate", &a.problem.pn, Some(pb.branch()), tol);
    match out.format() {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                alpha: f64,
                lambda: f64,
                max_rel_deviation: f64,
                max_abs_deviation: f64,
                energy: f64,
                iterations: usize,
                gradient_ratio: f64,
                cells: usize,
                alpha_cap: f64,
            }
            let row = Row {
                alpha: pb.alpha(),
                lambda,
                max_rel_deviation: report.max_rel_deviation,
                max_abs_deviation: report.max_abs_deviation,
                energy: report.energy,
                iterations: report.iterations,
                gradient_ratio: report.gradient_ratio,
                cells: a.cells,
                alpha_cap,
            };
            out.write_json(&m, &[row], None)?;
        }
        Format::Csv => out.write_csv(
            &["alpha", "lambda", "max_rel_deviation", "max_abs_deviation", "energy", "iterations", "cells"],
            &[vec![
                fmt_f64(pb.alpha()),
                fmt_f64(lambda),
                fmt_f64(report.max_rel_deviation),
                fmt_f64(report.max_abs_deviation),
                fmt_f64(report.energy),
                report.iterations.to_string(),
                a.cells.to_string(),
            ]],
        )?,
    }
    Ok(EXIT_OK)
}

impl Record {
    fn from_result(r: &EigenResult) -> Self {
        let pb = &r.problem;
        Record {
            alpha: pb.alpha(),
            p: pb.p(),
            n: pb.n(),
            branch: pb.branch(),
            lambda: Some(r.lambda),
            residual_alpha: Some(r.residual_alpha),
            residual_ode: Some(r.residual_ode),
            status: "ok".into(),
            alpha_achieved: Some(r.alpha_achieved),
            bracket: Some(r.bracket),
            iterations: Some(r.iterations),
            ..Record::empty(pb.alpha(), pb.p(), pb.n(), pb.branch())
        }
    }

    fn from_sweep(r: &cone_spectra::asymptotics::SweepRecord, p: f64, n: u32, branch: Branch, timings: bool) -> Self {
        let base = Record::empty(r.alpha, p, n, branch);
        let wall_time = timings.then_some(r.wall_time);
        match &r.error {
            None => Record {
                lambda: Some(r.lambda),
                residual_alpha: Some(r.residual_alpha),
                residual_ode: Some(r.residual_ode),
                status: "ok".into(),
                wall_time,
                ..base
            },
            Some(msg) => Record {
                status: status_for(r.domain_error).into(),
                error: Some(msg.clone()),
                wall_time,
                ..base
            },
        }
    }

    fn failed(alpha: f64, p: f64, n: u32, branch: Branch, e: &Error) -> Self {
        Record {
            status: status_for(e.is_domain()).into(),
            error: Some(e.to_string()),
            ..Record::empty(alpha, p, n, branch)
        }
    }
}

fn status_for(domain: bool) -> &'static str {
    if domain {
        "domain_error"
    } else {
        "numerical_error"
    }
}
