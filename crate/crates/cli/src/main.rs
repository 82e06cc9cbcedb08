//! `ineqlab`: evaluate constants, run verification suites and parameter
//! sweeps from JSON scenario files.

mod constants;
mod format;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use ineqlab_core::verify::{run_scenario, run_sweep, ConfigFile, VerdictCounts};

#[derive(Parser)]
#[command(name = "ineqlab", version, about = "Finite-lattice checks of Sobolev, CLR and Lieb–Thirring inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate closed-form constants and exponent relations.
    Constants(ConstantsArgs),
    /// Run every scenario of a config and write report.json and report.csv.
    Verify(RunArgs),
    /// Run every sweep of a config and write one CSV per sweep.
    Sweep(RunArgs),
}

#[derive(Args)]
struct ConstantsArgs {
    /// Sharp Hardy constant for `(−Δ)^s` in dimension d: `s,d`.
    #[arg(long, value_name = "S,D")]
    hardy: Vec<String>,
    /// CLR constant from a heat kernel bound: `K,kappa`.
    #[arg(long = "lieb-bound", value_name = "K,KAPPA")]
    lieb_bound: Vec<String>,
    /// Moment lifting factor: `gamma,gamma_tilde,kappa`.
    #[arg(long = "al-factor", value_name = "G,GT,K")]
    al_factor: Vec<String>,
    /// Sobolev exponents `q` and `theta` for `gamma,kappa`.
    #[arg(long, value_name = "G,K")]
    exponents: Vec<String>,
    /// Also write the table as JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, env = "INEQLAB_JOBS")]
    jobs: Option<usize>,
    /// Replaces the file-level seed of the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Constants(a) => cmd_constants(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_constants(a: ConstantsArgs) -> Result<ExitCode> {
    let req = constants::Requests {
        hardy: a.hardy,
        lieb_bound: a.lieb_bound,
        al_factor: a.al_factor,
        exponents: a.exponents,
    };
    if req.is_empty() {
        anyhow::bail!("nothing to evaluate; pass at least one of --hardy, --lieb-bound, --al-factor, --exponents");
    }
    let rows = constants::evaluate(&req)?;
    print!("{}", constants::render(&rows));
    if let Some(path) = a.out {
        output::write_json(&path, &rows)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn load(args: &RunArgs) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg: ConfigFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = jobs.unwrap_or(0);
    rayon::ThreadPoolBuilder::new().num_threads(n).build().context("starting worker pool")
}

fn out_dir(args: &RunArgs) -> Result<&Path> {
    let dir = args.out.as_deref().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn cmd_verify(args: RunArgs) -> Result<ExitCode> {
    let cfg = load(&args)?;
    let outcomes = pool(args.jobs)?
        .install(|| cfg.scenarios.par_iter().map(|sc| run_scenario(sc, cfg.seed)).collect::<Result<Vec<_>, _>>())?;

    let dir = out_dir(&args)?;
    let report = output::Report::new(&cfg, &outcomes);
    output::write_json(&dir.join("report.json"), &report)?;
    output::write_report_csv(&dir.join("report.csv"), &outcomes)?;

    for o in &outcomes {
        let c = VerdictCounts::tally(&o.reports);
        println!(
            "{:<36} pass {:>4}/{:<4} fail {:>3}  n/a {:>3}  vacuous {:>3}",
            o.id, c.pass, c.total, c.fail, c.not_applicable, c.vacuous
        );
    }
    let total = report.summary;
    println!(
        "total: {} checks, {} pass, {} fail, {} not applicable, {} vacuous",
        total.total, total.pass, total.fail, total.not_applicable, total.vacuous
    );
    Ok(if total.fail > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_sweep(args: RunArgs) -> Result<ExitCode> {
    let cfg = load(&args)?;
    let tables = pool(args.jobs)?
        .install(|| cfg.sweeps.par_iter().map(|sw| run_sweep(&cfg, sw)).collect::<Result<Vec<_>, _>>())?;
    match &args.out {
        Some(_) => {
            let dir = out_dir(&args)?;
            for t in &tables {
                let path = dir.join(format!("{}.csv", t.id));
                std::fs::write(&path, output::sweep_csv(t)?).with_context(|| format!("writing {}", path.display()))?;
                println!("{}: {} rows -> {}", t.id, t.rows.len(), path.display());
            }
        }
        None => {
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                print!("{}", output::sweep_csv(t)?);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
