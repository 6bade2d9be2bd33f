//! Offloading assignment search on top of the radio-resource solver.
//!
//! The exhaustive strategy enumerates every injective offloader-to-server
//! map, prices each through the lower level, and keeps the cheapest one that
//! serves everyone (or, failing that, the one serving the most users at the
//! least energy). The alternative builds a decoupled cost matrix and runs
//! one assignment-problem solve instead of enumerating.

use crate::hungarian::min_cost_assignment;
use crate::lower_level::{
    slack_time_s, solve_lower, Assignment, LowerHyper, LowerSolveResult, Target,
};
use crate::model;
use crate::scenario::Scenario;

/// What one enumerated assignment cost. `total_energy_j` sums transmit plus
/// server compute over the users this assignment actually serves, which for
/// a fully feasible assignment is everyone.
#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentRecord {
    pub assignment: Assignment,
    pub total_energy_j: f64,
    pub feasible: bool,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EejsResult {
    pub best_assignment: Assignment,
    /// Lower-level detail for the winning assignment; `None` only when no
    /// assignment could be priced (more offloaders than servers, or every
    /// candidate rejected before iterating).
    pub best_outcome: Option<LowerSolveResult>,
    /// Transmit + server compute over served users of the winner.
    pub total_energy_j: f64,
    pub per_assignment_log: Vec<AssignmentRecord>,
    /// Per scenario user: true iff offloaded and feasible under the winner.
    /// Locally-executed users are not "served" by any server.
    pub users_served: Vec<bool>,
}

impl EejsResult {
    pub fn served_count(&self) -> usize {
        self.users_served.iter().filter(|&&s| s).count()
    }
}

/// Initial per-user targets: `Local` for users whose local run beats both
/// the energy budget and the deadline, `Unserved` (pending a server) for the
/// rest.
pub fn gate_targets(scenario: &Scenario) -> Vec<Target> {
    scenario
        .users
        .iter()
        .map(|u| {
            if model::local_gate(&u.task, u.cpu_frequency_hz, &scenario.params) {
                Target::Local
            } else {
                Target::Unserved
            }
        })
        .collect()
}

/// All injective maps of `i_prime` offloaders onto `num_servers` servers, in
/// lexicographic order of the server tuple. Empty when there are more
/// offloaders than servers; the single empty map when there are no
/// offloaders.
pub fn enumerate_server_choices(i_prime: usize, num_servers: usize) -> Vec<Vec<usize>> {
    if i_prime > num_servers {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(i_prime);
    let mut taken = vec![false; num_servers];
    fn rec(
        depth: usize,
        i_prime: usize,
        taken: &mut Vec<bool>,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == i_prime {
            out.push(current.clone());
            return;
        }
        for k in 0..taken.len() {
            if !taken[k] {
                taken[k] = true;
                current.push(k);
                rec(depth + 1, i_prime, taken, current, out);
                current.pop();
                taken[k] = false;
            }
        }
    }
    rec(0, i_prime, &mut taken, &mut current, &mut out);
    out
}

/// Energy over served users plus the served flags for one priced assignment.
fn score(scenario: &Scenario, result: &LowerSolveResult) -> (f64, usize, Vec<bool>) {
    let mut energy = 0.0;
    let mut served = vec![false; scenario.users.len()];
    let mut count = 0;
    for (slot, &(user, server)) in result.offloaders.iter().enumerate() {
        if result.feasible[slot] {
            energy += result.transmit_energy_j[slot]
                + model::server_compute_energy_j(
                    &scenario.users[user].task,
                    scenario.servers[server].cpu_frequency_hz,
                    scenario.params.server_energy_coeff,
                );
            served[user] = true;
            count += 1;
        }
    }
    (energy, count, served)
}

/// Result shell for the case where no server tuple exists at all.
pub(crate) fn unserved_result(base: Vec<Target>) -> EejsResult {
    let users_served = vec![false; base.len()];
    EejsResult {
        best_assignment: Assignment { targets: base },
        best_outcome: None,
        total_energy_j: 0.0,
        per_assignment_log: Vec::new(),
        users_served,
    }
}

/// Prices one concrete assignment: runs the coupled solve, demoting any user
/// whose pair cannot make its deadline to Unserved, and packages the result.
/// Shared by the strategies that commit to a single assignment up front.
pub(crate) fn price_assignment(
    scenario: &Scenario,
    hyper: &LowerHyper,
    mut assignment: Assignment,
) -> EejsResult {
    loop {
        match solve_lower(&assignment, scenario, hyper) {
            Ok(result) => {
                let (energy, _, served) = score(scenario, &result);
                return EejsResult {
                    best_assignment: assignment.clone(),
                    total_energy_j: energy,
                    per_assignment_log: vec![AssignmentRecord {
                        assignment,
                        total_energy_j: energy,
                        feasible: result.all_feasible(),
                        converged: result.converged,
                    }],
                    best_outcome: Some(result),
                    users_served: served,
                };
            }
            Err(crate::lower_level::LowerError::DeadlineImpossible { user, .. }) => {
                assignment.targets[user] = Target::Unserved;
            }
            Err(e) => unreachable!("single-assignment strategies build valid assignments: {e}"),
        }
    }
}

/// Exhaustive search: prices every injective assignment through the lower
/// level and keeps the one serving the most users, breaking ties by lower
/// energy and then by enumeration order (so the lexicographically smallest
/// server tuple wins exact ties).
pub fn eejs_solve(scenario: &Scenario, hyper: &LowerHyper) -> EejsResult {
    let base = gate_targets(scenario);
    let offloaders: Vec<usize> = (0..base.len())
        .filter(|&i| base[i] == Target::Unserved)
        .collect();
    let choices = enumerate_server_choices(offloaders.len(), scenario.servers.len());
    if choices.is_empty() {
        return unserved_result(base);
    }

    struct Best {
        log_index: usize,
        served_count: usize,
        energy: f64,
        result: LowerSolveResult,
        served: Vec<bool>,
    }
    let mut log = Vec::with_capacity(choices.len());
    let mut best: Option<Best> = None;
    for servers in &choices {
        let mut targets = base.clone();
        for (slot, &u) in offloaders.iter().enumerate() {
            targets[u] = Target::Server(servers[slot]);
        }
        let assignment = Assignment { targets };
        match solve_lower(&assignment, scenario, hyper) {
            Ok(result) => {
                let (energy, count, served) = score(scenario, &result);
                let better = match &best {
                    None => true,
                    Some(b) => {
                        count > b.served_count
                            || (count == b.served_count && energy < b.energy)
                    }
                };
                log.push(AssignmentRecord {
                    assignment,
                    total_energy_j: energy,
                    feasible: result.all_feasible(),
                    converged: result.converged,
                });
                if better {
                    best = Some(Best {
                        log_index: log.len() - 1,
                        served_count: count,
                        energy,
                        result,
                        served,
                    });
                }
            }
            // A pair in this assignment cannot make its deadline at all; it
            // serves nobody and never beats a priced candidate.
            Err(_) => log.push(AssignmentRecord {
                assignment,
                total_energy_j: 0.0,
                feasible: false,
                converged: false,
            }),
        }
    }

    match best {
        Some(b) => EejsResult {
            best_assignment: log[b.log_index].assignment.clone(),
            best_outcome: Some(b.result),
            total_energy_j: b.energy,
            per_assignment_log: log,
            users_served: b.served,
        },
        None => {
            // Every candidate was rejected before iterating.
            let mut shell = unserved_result(base);
            shell.per_assignment_log = log;
            shell
        }
    }
}

/// Assignment via a decoupled cost matrix: each (user, server) pair is
/// priced as if that user offloaded alone with the whole spectrum, the
/// assignment problem is solved on those costs, and the chosen map is then
/// priced once, coupled, for the reported result. Cheaper than enumeration
/// (one solve per pair plus one final) but blind to spectrum contention.
pub fn hungarian_solve(scenario: &Scenario, hyper: &LowerHyper) -> EejsResult {
    const FORBIDDEN: f64 = 1e30;
    let base = gate_targets(scenario);
    let offloaders: Vec<usize> = (0..base.len())
        .filter(|&i| base[i] == Target::Unserved)
        .collect();
    let num_servers = scenario.servers.len();
    if offloaders.len() > num_servers {
        return unserved_result(base);
    }

    let mut cost = Vec::with_capacity(offloaders.len());
    for &u in &offloaders {
        let mut row = Vec::with_capacity(num_servers);
        for k in 0..num_servers {
            let chi = slack_time_s(&scenario.users[u].task, &scenario.servers[k]);
            if chi <= 0.0 {
                row.push(FORBIDDEN);
                continue;
            }
            let mut targets = base.clone();
            for &other in &offloaders {
                targets[other] = Target::Local;
            }
            targets[u] = Target::Server(k);
            let solo = solve_lower(&Assignment { targets }, scenario, hyper)
                .expect("solo assignment is valid");
            if solo.feasible[0] {
                row.push(
                    solo.transmit_energy_j[0]
                        + model::server_compute_energy_j(
                            &scenario.users[u].task,
                            scenario.servers[k].cpu_frequency_hz,
                            scenario.params.server_energy_coeff,
                        ),
                );
            } else {
                row.push(FORBIDDEN);
            }
        }
        cost.push(row);
    }

    let matched = min_cost_assignment(&cost);
    let mut targets = base.clone();
    for (slot, &u) in offloaders.iter().enumerate() {
        let k = matched[slot];
        // A forced forbidden pair with negative slack cannot even enter the
        // coupled solve; that user goes unserved.
        if slack_time_s(&scenario.users[u].task, &scenario.servers[k]) > 0.0 {
            targets[u] = Target::Server(k);
        } else {
            targets[u] = Target::Unserved;
        }
    }
    let assignment = Assignment { targets };
    let result = solve_lower(&assignment, scenario, hyper).expect("matched assignment is valid");
    let (energy, _, served) = score(scenario, &result);
    EejsResult {
        best_assignment: assignment.clone(),
        total_energy_j: energy,
        per_assignment_log: vec![AssignmentRecord {
            assignment,
            total_energy_j: energy,
            feasible: result.all_feasible(),
            converged: result.converged,
        }],
        best_outcome: Some(result),
        users_served: served,
    }
}
