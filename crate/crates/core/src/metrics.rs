//! Aggregation of per-drop results into the summary statistics the
//! experiment harness reports: mean energies, satisfaction probability,
//! and spread across drops.

use std::collections::BTreeMap;

/// One (drop, strategy, server count) result row. `served` counts
/// offloaders whose deadline held in the final allocation; `offloaders`
/// counts users that attempted offloading at all.
#[derive(Clone, Debug, PartialEq)]
pub struct DropRecord {
    pub seed: u64,
    pub num_servers: usize,
    pub i_prime: usize,
    pub num_subcarriers: usize,
    pub strategy: String,
    pub total_j: f64,
    pub compute_j: f64,
    pub transmit_j: f64,
    pub served: usize,
    pub offloaders: usize,
    pub converged_fraction: f64,
    pub wall_ms: f64,
}

/// Satisfaction probability pooled over user-attempts, not averaged over
/// drops: every offloader counts once in the denominator. None when no
/// user offloaded anywhere.
pub fn sop<'a>(records: impl IntoIterator<Item = &'a DropRecord>) -> Option<f64> {
    let (mut served, mut attempted) = (0usize, 0usize);
    for r in records {
        served += r.served;
        attempted += r.offloaders;
    }
    if attempted == 0 {
        None
    } else {
        Some(served as f64 / attempted as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub strategy: String,
    pub num_servers: usize,
    pub drops: usize,
    pub mean_total_j: f64,
    pub mean_compute_j: f64,
    pub mean_transmit_j: f64,
    pub stddev_total_j: f64,
    pub sop: Option<f64>,
}

/// Groups records by (strategy, server count) and reduces each group.
/// `mean_total_j` is rebuilt as `mean_compute_j + mean_transmit_j` so the
/// decomposition in plots adds up exactly.
pub fn aggregate(records: &[DropRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(String, usize), Vec<&DropRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.strategy.clone(), r.num_servers))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((strategy, num_servers), rows)| {
            let n = rows.len() as f64;
            let mean_compute_j = rows.iter().map(|r| r.compute_j).sum::<f64>() / n;
            let mean_transmit_j = rows.iter().map(|r| r.transmit_j).sum::<f64>() / n;
            let mean_total_j = mean_compute_j + mean_transmit_j;
            let mean_of_totals = rows.iter().map(|r| r.total_j).sum::<f64>() / n;
            let variance = if rows.len() > 1 {
                rows.iter()
                    .map(|r| (r.total_j - mean_of_totals).powi(2))
                    .sum::<f64>()
                    / (n - 1.0)
            } else {
                0.0
            };
            AggregateRow {
                strategy,
                num_servers,
                drops: rows.len(),
                mean_total_j,
                mean_compute_j,
                mean_transmit_j,
                stddev_total_j: variance.sqrt(),
                sop: sop(rows.iter().copied()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(strategy: &str, k: usize, total: f64, served: usize, offloaders: usize) -> DropRecord {
        DropRecord {
            seed: 0,
            num_servers: k,
            i_prime: offloaders,
            num_subcarriers: 64,
            strategy: strategy.into(),
            total_j: total,
            compute_j: total * 0.8,
            transmit_j: total * 0.2,
            served,
            offloaders,
            converged_fraction: 1.0,
            wall_ms: 0.0,
        }
    }

    #[test]
    fn sop_pools_attempts_across_drops() {
        let rows = [record("eejs", 3, 1.0, 2, 3)];
        assert_eq!(sop(&rows), Some(2.0 / 3.0));
        let pooled = [record("eejs", 3, 1.0, 2, 3), record("eejs", 3, 1.0, 3, 3)];
        assert_eq!(sop(&pooled), Some(5.0 / 6.0));
        let none = [record("local", 3, 1.0, 0, 0)];
        assert_eq!(sop(&none), None);
    }

    #[test]
    fn aggregate_reduces_single_groups() {
        let rows = [record("eejs", 3, 2.0, 3, 3)];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 1);
        let a = &agg[0];
        assert_eq!((a.strategy.as_str(), a.num_servers, a.drops), ("eejs", 3, 1));
        assert!((a.mean_total_j - 2.0).abs() < 1e-12);
        assert_eq!(a.stddev_total_j, 0.0);
        assert_eq!(a.sop, Some(1.0));
    }

    #[test]
    fn aggregate_means_and_stddev_over_two_drops() {
        let rows = [record("mdoa", 5, 1.0, 3, 3), record("mdoa", 5, 3.0, 2, 3)];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 1);
        let a = &agg[0];
        assert!((a.mean_total_j - 2.0).abs() < 1e-12);
        assert!((a.mean_compute_j - 1.6).abs() < 1e-12);
        assert!((a.mean_transmit_j - 0.4).abs() < 1e-12);
        // Sample stddev of {1, 3} is sqrt(2).
        assert!((a.stddev_total_j - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(a.sop, Some(5.0 / 6.0));
    }

    #[test]
    fn aggregate_groups_by_strategy_then_server_count() {
        let rows = [
            record("roa", 9, 1.0, 1, 1),
            record("eejs", 3, 1.0, 1, 1),
            record("eejs", 9, 1.0, 1, 1),
            record("eejs", 3, 2.0, 1, 1),
        ];
        let agg = aggregate(&rows);
        let keys: Vec<(&str, usize, usize)> = agg
            .iter()
            .map(|a| (a.strategy.as_str(), a.num_servers, a.drops))
            .collect();
        assert_eq!(keys, vec![("eejs", 3, 2), ("eejs", 9, 1), ("roa", 9, 1)]);

        // Input order must not matter.
        let mut shuffled = rows.to_vec();
        shuffled.reverse();
        assert_eq!(aggregate(&shuffled), agg);
    }
}
