use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use partagree::config::read_scenario_file;
use partagree::sweep::{format_table, sweep};
use partagree::trace::{format_trace, format_verdict, parse_trace, verify_trace};
use partagree_core::oracle::brute_force_worst_rounds;
use partagree_core::protocol::budget_p_agreement;
use partagree_core::{run, Value};

#[derive(Parser)]
#[command(name = "partagree")]
#[command(about = "Min-flooding agreement in p-partitioned dynamic networks")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Replace the scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the scenario horizon
    #[arg(long)]
    horizon: Option<u64>,
    /// Print nothing; report through the exit code only
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and emit its trace
    Run {
        config: PathBuf,
        /// Write the trace here instead of stdout
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the scenario over the ranges in its [sweep] section
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Exhaustive worst case for distinct inputs 1..n (n <= 4)
    Oracle { n: usize, p: usize },
    /// Re-verify a saved trace
    Check { trace: PathBuf },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            config,
            trace_out,
            overrides,
        } => {
            let mut file = read_scenario_file(&config)?;
            file.params.seed = overrides.seed.unwrap_or(file.params.seed);
            file.params.horizon = overrides.horizon.or(file.params.horizon);
            let scenario = file.resolve()?;
            let trace = run(&scenario);
            let text = format_trace(&scenario, &trace);
            match &trace_out {
                Some(path) => {
                    std::fs::write(path, &text)
                        .with_context(|| format!("writing {}", path.display()))?;
                    if !overrides.quiet {
                        println!("{}", format_verdict(&trace.verdict));
                    }
                }
                None if !overrides.quiet => print!("{text}"),
                None => {}
            }
            if let (Some(abort), false) = (&trace.abort, overrides.quiet) {
                eprintln!("run aborted at round {}: {}", abort.round, abort.error);
            }
            Ok(scenario.outcome_ok(&trace))
        }
        Command::Sweep { config, overrides } => {
            let mut file = read_scenario_file(&config)?;
            let Some(spec) = file.sweep.clone() else {
                bail!("{} has no [sweep] section", config.display());
            };
            file.params.seed = overrides.seed.unwrap_or(file.params.seed);
            file.params.horizon = overrides.horizon.or(file.params.horizon);
            let rows = sweep(&file.params, &spec);
            if !overrides.quiet {
                print!("{}", format_table(&rows));
            }
            Ok(rows
                .iter()
                .all(|r| r.failures.is_empty() && r.ok_trials == r.trials))
        }
        Command::Oracle { n, p } => {
            let inputs: Vec<Value> = (1..=n as Value).collect();
            let budget = budget_p_agreement(n as u64, p as u64);
            // generous guard; the potential argument caps the search far lower
            let worst = brute_force_worst_rounds(n, p, &inputs, budget + n as u64 * n as u64)?;
            let ok = worst <= budget;
            println!("n={n} p={p} worst_rounds={worst} budget={budget} ok={ok}");
            Ok(ok)
        }
        Command::Check { trace } => {
            let text = std::fs::read_to_string(&trace)
                .with_context(|| format!("reading {}", trace.display()))?;
            let parsed = parse_trace(&text)?;
            let issues = verify_trace(&parsed);
            for issue in &issues {
                println!("FAIL {issue}");
            }
            if issues.is_empty() {
                println!(
                    "ok rounds={} {}",
                    parsed.records.len() - 1,
                    format_verdict(&parsed.verdict)
                );
            }
            Ok(issues.is_empty())
        }
    }
}
