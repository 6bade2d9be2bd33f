//! Command-line front end. Subcommands: `generate` draws a scenario file,
//! `solve` runs one strategy on one scenario and prints the allocation,
//! `experiment` sweeps a Monte Carlo config into results CSVs, `compare`
//! summarizes results CSVs. Exit codes: 0 success (infeasible snapshots
//! are results, not failures), 1 usage error, 2 I/O or parse error.

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use mecsim_cli::{config, csv_io, runner};
use mecsim_core::lower_level::{LowerHyper, Target};
use mecsim_core::metrics::{aggregate, DropRecord};
use mecsim_core::outcome::{solve_with, SolveOutcome, Strategy};
use mecsim_core::scenario::{generate_scenario, GenConfig, Scenario};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mecsim",
    version,
    about = "Energy-minimal task offloading and OFDMA allocation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_strategy(s: &str) -> Result<Strategy, mecsim_core::outcome::UnknownStrategy> {
    s.parse()
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random scenario and write it to a file
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        users: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        servers: u64,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
        subcarriers: u64,
        /// Output scenario file
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run one strategy on a scenario file and print the allocation
    Solve {
        /// Scenario file from `generate`
        scenario: PathBuf,
        #[arg(long, default_value = "eejs", value_parser = parse_strategy)]
        strategy: Strategy,
        /// Seed for the random-assignment strategy (default: the scenario seed)
        #[arg(long)]
        roa_seed: Option<u64>,
        /// Also append the outcome as a one-row results CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a Monte Carlo sweep from a TOML config into results CSVs
    Experiment {
        /// Experiment config (TOML)
        config: PathBuf,
        /// Results CSV path; deadline profiles suffix their name to the stem
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Summarize results CSVs: per-strategy energy means and satisfaction
    Compare {
        /// Results CSVs from `experiment` or `solve --csv`
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate {
            seed,
            users,
            servers,
            subcarriers,
            output,
        } => {
            let cfg = GenConfig {
                seed,
                num_users: users as usize,
                num_servers: servers as usize,
                num_subcarriers: subcarriers as usize,
                ..GenConfig::default()
            };
            let scenario = generate_scenario(&cfg);
            scenario.save(&output)?;
            println!(
                "wrote {}: seed {seed}, {users} users, {servers} servers, {subcarriers} subcarriers",
                output.display()
            );
            Ok(())
        }
        Command::Solve {
            scenario,
            strategy,
            roa_seed,
            csv,
        } => {
            let scn = Scenario::load(&scenario)
                .with_context(|| format!("cannot load scenario {}", scenario.display()))?;
            let outcome = solve_with(
                strategy,
                &scn,
                &LowerHyper::default(),
                roa_seed.unwrap_or(scn.seed),
            );
            print_outcome(&scenario, &scn, &outcome);
            if let Some(path) = csv {
                let row = DropRecord {
                    seed: scn.seed,
                    num_servers: scn.num_servers(),
                    i_prime: outcome.offloader_count,
                    num_subcarriers: scn.params.num_subcarriers,
                    strategy: strategy.name().to_string(),
                    total_j: outcome.total_j(),
                    compute_j: outcome.compute_j,
                    transmit_j: outcome.transmit_j,
                    served: outcome.served_count,
                    offloaders: outcome.offloader_count,
                    converged_fraction: outcome.converged_fraction,
                    wall_ms: 0.0,
                };
                csv_io::write_records_to_path(&path, &[row])?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Experiment { config, output } => {
            let exp = config::Experiment::from_toml_file(&config)?;
            for profile in &exp.profiles {
                let rows = runner::run_profile(&exp, profile);
                let path = runner::profile_output_path(&output, profile);
                csv_io::write_records_to_path(&path, &rows)?;
                println!(
                    "wrote {}: {} rows ({} drops x {} strategies x {} server counts)",
                    path.display(),
                    rows.len(),
                    exp.drops,
                    exp.strategies.len(),
                    exp.servers.len()
                );
            }
            Ok(())
        }
        Command::Compare { files } => {
            for path in &files {
                let rows = csv_io::read_records_from_path(path)?;
                println!("{} ({} rows)", path.display(), rows.len());
                print_aggregate(&rows);
            }
            Ok(())
        }
    }
}

fn target_label(target: Target) -> String {
    match target {
        Target::Local => "local".to_string(),
        Target::Server(k) => format!("server {k}"),
        Target::Unserved => "unserved".to_string(),
    }
}

fn print_outcome(path: &std::path::Path, scenario: &Scenario, outcome: &SolveOutcome) {
    println!(
        "scenario {}: seed {}, {} users, {} servers, {} subcarriers",
        path.display(),
        scenario.seed,
        scenario.num_users(),
        scenario.num_servers(),
        scenario.params.num_subcarriers
    );
    println!("strategy: {}", outcome.strategy);
    for (i, u) in outcome.per_user.iter().enumerate() {
        let deadline = if u.deadline_met {
            "deadline met"
        } else {
            "deadline missed"
        };
        let time = if u.time_s.is_finite() {
            format!("{:.3e} s", u.time_s)
        } else {
            "never".to_string()
        };
        let rate = if u.rate_bps > 0.0 {
            format!("{:.4e} bps", u.rate_bps)
        } else {
            "-".to_string()
        };
        println!(
            "  user {i} -> {:<9}  {deadline:<15}  time {time:<10}  rate {rate:<12}  transmit {:.3e} J  compute {:.3e} J",
            target_label(u.target),
            u.transmit_j,
            u.compute_j
        );
    }
    if outcome.offloader_count > 0 {
        println!(
            "served {} of {} offloaders (satisfaction {:.3})",
            outcome.served_count,
            outcome.offloader_count,
            outcome.served_count as f64 / outcome.offloader_count as f64
        );
    } else {
        println!("no offloaders: every task ran on its own device");
    }
    println!(
        "lower-level convergence: {:.1}% of assignment solves",
        outcome.converged_fraction * 100.0
    );
    println!(
        "energy: total {:.6e} J = compute {:.6e} J + transmit {:.6e} J (gated local extra: {:.6e} J)",
        outcome.total_j(),
        outcome.compute_j,
        outcome.transmit_j,
        outcome.local_j
    );
}

fn print_aggregate(rows: &[DropRecord]) {
    println!(
        "{:<10} {:>3} {:>6} {:>14} {:>14} {:>14} {:>14} {:>7}",
        "strategy", "K", "drops", "mean_total_j", "stddev_total", "mean_compute", "mean_transmit", "sop"
    );
    for row in aggregate(rows) {
        let sop = row
            .sop
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{:<10} {:>3} {:>6} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>7}",
            row.strategy,
            row.num_servers,
            row.drops,
            row.mean_total_j,
            row.stddev_total_j,
            row.mean_compute_j,
            row.mean_transmit_j,
            sop
        );
    }
}
