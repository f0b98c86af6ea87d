use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qjacobi::harness::io::{parse_grid_function, write_grid_function, write_spectral_function};
use qjacobi::harness::{emit_report, render_report, run_suites, suite_names, RunConfig, Summary};
use qjacobi::spectral::{enumerate_gamma, n_weight, TruncatedOperator};
use qjacobi::Error;

#[derive(Parser)]
#[command(name = "qjacobi", version, about = "Big q-Jacobi transform on a two-sided q-lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a line-delimited JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Suites to run; overrides the list in the config.
        #[arg(long = "suite", value_name = "NAME")]
        suites: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Report path; overrides `report_path` in the config.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the discrete spectrum and the truncated-operator eigenvalues
    /// outside [-2, 2].
    Spectrum {
        #[arg(long)]
        config: PathBuf,
    },
    /// Transform a grid function and print the spectral function.
    Transform {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "in", value_name = "GRIDFN")]
        input: PathBuf,
        /// Also apply the inverse transform and print the reconstruction.
        #[arg(long)]
        roundtrip: bool,
    },
    /// List the available suites and their checks.
    Suites,
}

enum Failure {
    Checks,
    Config(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::ParameterDomain(_) | Error::NonGenericParameters(_) | Error::Parse(_) => Failure::Config(e),
            other => Failure::Runtime(other),
        }
    }
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::from_file(path).map_err(Failure::Config)
}

fn verify(config: PathBuf, suites: Vec<String>, seed: Option<u64>, report: Option<PathBuf>) -> Result<(), Failure> {
    let mut cfg = load(&config)?;
    if !suites.is_empty() {
        cfg.suites = suites;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if report.is_some() {
        cfg.report_path = report;
    }
    let result = run_suites(&cfg)?;
    for r in &result.results {
        let res = r.residual.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<32} residual {res:>10} tol {:.0e}", r.check_id, r.tolerance);
        if !r.passed {
            if let Some(e) = &r.error {
                println!("     error: {e}");
            }
            if !r.inputs.is_empty() {
                println!("     at: {}", r.inputs);
            }
        }
    }
    for s in &result.skipped {
        println!("SKIP {:<32} {}", s.check_id, s.reason);
    }
    let summary = Summary::new(&result, cfg.seed);
    println!("{} checks, {} passed, {} failed, {} skipped", summary.total, summary.passed, summary.failed, summary.skipped.len());
    match &cfg.report_path {
        Some(p) => emit_report(p, &result, cfg.seed).map_err(Failure::Runtime)?,
        None => eprint!("{}", render_report(&result, cfg.seed)),
    }
    if result.all_passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn spectrum(config: PathBuf) -> Result<(), Failure> {
    let ctx = load(&config)?.context()?;
    let p = &ctx.params;
    println!("# family k gamma mu N");
    for g in enumerate_gamma(p, 1e-14)? {
        println!("{} {} {:e} {:e} {:e}", g.family.label(), g.k, g.gamma, g.mu(), n_weight(p, &g)?);
    }
    let op = TruncatedOperator::new(p, ctx.window)?;
    println!("# truncated eigenvalues outside [-2, 2] on window [{}, {}]", ctx.window.k_min, ctx.window.k_max);
    for e in op.eigenvalues().into_iter().filter(|e| e.abs() > 2.0) {
        println!("{e:e}");
    }
    Ok(())
}

fn transform(config: PathBuf, input: PathBuf, roundtrip: bool) -> Result<(), Failure> {
    let ctx = load(&config)?.context()?;
    let text = std::fs::read_to_string(&input).map_err(|e| Failure::Config(Error::Io(format!("{}: {e}", input.display()))))?;
    let file = parse_grid_function(&text)?;
    if let Some(p) = file.params {
        if p != ctx.params {
            return Err(Failure::Config(Error::Config("grid function was written for different parameters".into())));
        }
    }
    let t = ctx.transform()?;
    let f = file.function.regrid(t.grid);
    if f.support().len() != file.function.support().len() {
        return Err(Failure::Config(Error::Config(format!("input support leaves the transform window [{}, {}]", t.grid.k_min, t.grid.k_max))));
    }
    let g = t.forward(&f)?;
    print!("{}", write_spectral_function(t, &g));
    if roundtrip {
        let back = t.inverse(&g)?;
        let err = back.axpy(qjacobi::c64(-1.0, 0.0), &f).sup_norm();
        println!("# roundtrip max error {err:e}");
        print!("{}", write_grid_function(&back, Some(&ctx.params)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Verify { config, suites, seed, report } => verify(config, suites, seed, report),
        Command::Spectrum { config } => spectrum(config),
        Command::Transform { config, input, roundtrip } => transform(config, input, roundtrip),
        Command::Suites => {
            for s in suite_names() {
                let ids: Vec<&str> = qjacobi::harness::REGISTRY.iter().filter(|c| c.suite == s).map(|c| c.id).collect();
                println!("{s}: {}", ids.join(" "));
            }
            Ok(())
        }
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
