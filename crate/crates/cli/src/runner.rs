//! Monte Carlo sweeps. Every strategy in a drop sees the identical
//! scenario (seed = base_seed + drop index), so comparisons are paired;
//! deadline profiles reuse the same seeds with only the deadline draw
//! changed, so they pair across profiles too. Drops run in parallel, and
//! rows come out in (drop, strategy, server count) order regardless of
//! which worker finished first.

use crate::config::{Experiment, Profile};
use mecsim_core::metrics::DropRecord;
use mecsim_core::outcome::solve_with;
use mecsim_core::scenario::{generate_scenario, GenConfig, Scenario};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Where a profile's rows land: the requested path for the implicit
/// profile, otherwise the stem gains `_<name>` before the extension.
pub fn profile_output_path(requested: &Path, profile: &Profile) -> PathBuf {
    match &profile.name {
        None => requested.to_path_buf(),
        Some(name) => {
            let stem = requested
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("results");
            let file = match requested.extension().and_then(|e| e.to_str()) {
                Some(ext) => format!("{stem}_{name}.{ext}"),
                None => format!("{stem}_{name}"),
            };
            requested.with_file_name(file)
        }
    }
}

fn scenario_for(exp: &Experiment, profile: &Profile, seed: u64, num_servers: usize) -> Scenario {
    let mut cfg = GenConfig {
        seed,
        num_users: exp.users,
        num_servers,
        num_subcarriers: exp.subcarriers,
        ..GenConfig::default()
    };
    if let Some(span) = profile.deadline_s {
        cfg.deadline_s = span;
    }
    generate_scenario(&cfg)
}

fn run_drop(exp: &Experiment, profile: &Profile, drop_index: usize) -> Vec<DropRecord> {
    let seed = exp.base_seed.wrapping_add(drop_index as u64);
    let scenarios: Vec<Scenario> = exp
        .servers
        .iter()
        .map(|&k| scenario_for(exp, profile, seed, k))
        .collect();
    let mut rows = Vec::with_capacity(exp.strategies.len() * exp.servers.len());
    for &strategy in &exp.strategies {
        for scenario in &scenarios {
            let started = Instant::now();
            let outcome = solve_with(strategy, scenario, &exp.hyper, seed);
            let wall_ms = if exp.timing {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            rows.push(DropRecord {
                seed,
                num_servers: scenario.num_servers(),
                i_prime: outcome.offloader_count,
                num_subcarriers: exp.subcarriers,
                strategy: strategy.name().to_string(),
                total_j: outcome.total_j(),
                compute_j: outcome.compute_j,
                transmit_j: outcome.transmit_j,
                served: outcome.served_count,
                offloaders: outcome.offloader_count,
                converged_fraction: outcome.converged_fraction,
                wall_ms,
            });
        }
    }
    rows
}

/// All drops of one profile, in deterministic row order.
pub fn run_profile(exp: &Experiment, profile: &Profile) -> Vec<DropRecord> {
    (0..exp.drops)
        .into_par_iter()
        .map(|d| run_drop(exp, profile, d))
        .collect::<Vec<_>>()
        .concat()
}
