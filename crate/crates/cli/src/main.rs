use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use imcf::report::{self, EIGEN_DRAWS};
use imcf::scenario::{catalog_list, ScenarioKind, ScenarioSpec};
use imcf::FlowConfig;

const EXIT_FAIL: u8 = 1;
const EXIT_ABORT: u8 = 2;
const EXIT_INVALID: u8 = 3;

/// Intrinsic mean curvature flow of spacelike hypersurfaces.
#[derive(Debug, Parser)]
#[command(name = "imcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the built-in scenarios with their default parameters (JSON).
    Catalog,
    /// Evolve a scenario and write trajectory CSV, verdict JSON and plots.
    Run {
        #[arg(long)]
        scenario: String,
        /// JSON flow configuration; missing fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Nodes per axis.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        cfl: Option<f64>,
        /// Seed for the custom scenario.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "imcf-run")]
        out: PathBuf,
        /// Skip SVG plots.
        #[arg(long)]
        no_plots: bool,
    },
    /// Compare the two Gauss–Bonnet–Chern densities on random inputs.
    Oracle {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,4")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = EIGEN_DRAWS)]
        draws: usize,
    },
    /// Recompute the verdicts of a run directory from its stored CSV.
    Verify {
        #[arg(long)]
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Catalog => {
            println!("{}", serde_json::to_string_pretty(&catalog_list())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            scenario,
            config,
            t_end,
            grid,
            cfl,
            seed,
            out,
            no_plots,
        } => {
            let kind: ScenarioKind = scenario
                .parse()
                .with_context(|| format!("scenario {scenario:?}"))?;
            let mut spec = ScenarioSpec::defaults(kind);
            if let Some(grid) = grid {
                spec.grid = grid;
            }
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let mut cfg = match &config {
                Some(path) => load_config(path)?,
                None => FlowConfig::default(),
            };
            if let Some(t) = t_end {
                cfg.t_end = t;
            }
            if let Some(c) = cfl {
                cfg.cfl_constant = c;
            }
            cfg.validate()?;
            spec.validate()
                .with_context(|| format!("scenario {}", kind.as_str()))?;
            run(&spec, &cfg, &out, !no_plots)
        }
        Command::Oracle {
            trials,
            dims,
            seed,
            draws,
        } => {
            let rep = report::oracle(trials, &dims, seed, draws)?;
            let mut ok = true;
            for d in &rep.dimensions {
                let tol = if d.n == 2 { 1e-12 } else { 1e-10 };
                let pass = d.max_deviation < tol && d.eigen_violations == 0;
                ok &= pass;
                println!(
                    "n={} trials={} max_deviation={:e} draws={} violations={} {}",
                    d.n,
                    d.trials,
                    d.max_deviation,
                    d.eigen_draws,
                    d.eigen_violations,
                    verdict(pass)
                );
            }
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            })
        }
        Command::Verify { report: dir } => {
            let rep = report::verify(&dir).with_context(|| format!("report {}", dir.display()))?;
            for c in &rep.checks {
                println!(
                    "{:<22} {} value={:e} threshold={:e}",
                    c.name,
                    verdict(c.pass),
                    c.value,
                    c.threshold
                );
            }
            for m in &rep.mismatches {
                println!("mismatch: {m}");
            }
            Ok(if rep.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            })
        }
    }
}

fn run(spec: &ScenarioSpec, cfg: &FlowConfig, out: &Path, svg: bool) -> anyhow::Result<ExitCode> {
    let rep = report::run(spec, cfg, out, svg)
        .with_context(|| format!("scenario {}", spec.name.as_str()))?;
    for (name, c) in &rep.summary.verdicts {
        println!(
            "{:<22} {} value={:e} threshold={:e}",
            name,
            verdict(c.pass),
            c.value,
            c.threshold
        );
    }
    println!("wrote {}", rep.csv_path.display());
    if let Some(reason) = &rep.summary.meta.abort {
        eprintln!("flow aborted: {reason}");
        return Ok(ExitCode::from(EXIT_ABORT));
    }
    Ok(if rep.summary.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    })
}

fn load_config(path: &Path) -> anyhow::Result<FlowConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
