//! Brute-force reference optimizer for the radio-resource subproblem.
//!
//! Enumerates every subcarrier ownership pattern and every per-subcarrier
//! power choice from a uniform grid, and minimizes the same surrogate the
//! solver minimizes: per-user slack times total transmit power, summed over
//! users, subject to each user reaching the rate its slack demands within
//! its power budget. Exponential in subcarriers and grid size, so it only
//! runs on tiny instances; it exists to check the real solver, so it shares
//! no code with it and recomputes rates from scratch.

use std::collections::HashMap;

/// One user as the oracle sees it, with gains already resolved to the server
/// the user was assigned.
#[derive(Debug, Clone)]
pub struct OracleUser {
    pub data_bits: f64,
    pub slack_s: f64,
    /// Gain per subcarrier, toward this user's assigned server.
    pub gains: Vec<f64>,
    pub max_power_w: f64,
}

/// Minimum of `sum_i slack_i * total_power_i` over the discrete grid, or
/// `None` if no ownership/power combination serves every user. `levels`
/// uniform power levels span `[0, max_power_w]`.
pub fn grid_minimum(
    bandwidth_hz: f64,
    noise_w: f64,
    users: &[OracleUser],
    levels: usize,
) -> Option<f64> {
    assert!(levels >= 2, "need at least the zero and full-power levels");
    assert!(!users.is_empty());
    let n_subs = users[0].gains.len();
    assert!(users.iter().all(|u| u.gains.len() == n_subs));
    assert!(n_subs <= 24, "pattern space would be astronomical");

    let n_owners = users.len() + 1; // each subcarrier: unused or one user
    let mut memo: HashMap<(usize, u32), Option<f64>> = HashMap::new();
    let mut best: Option<f64> = None;

    let mut pattern = vec![0usize; n_subs];
    loop {
        let mut masks = vec![0u32; users.len()];
        for (n, &owner) in pattern.iter().enumerate() {
            if owner > 0 {
                masks[owner - 1] |= 1 << n;
            }
        }
        let mut total = 0.0;
        let mut feasible = true;
        for (i, user) in users.iter().enumerate() {
            let power = *memo
                .entry((i, masks[i]))
                .or_insert_with(|| cheapest_power(bandwidth_hz, noise_w, user, masks[i], levels));
            match power {
                Some(p) => total += user.slack_s * p,
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible && best.is_none_or(|b| total < b) {
            best = Some(total);
        }

        // Next pattern: counting in base `n_owners`.
        let mut digit = 0;
        loop {
            if digit == n_subs {
                return best;
            }
            pattern[digit] += 1;
            if pattern[digit] < n_owners {
                break;
            }
            pattern[digit] = 0;
            digit += 1;
        }
    }
}

/// Smallest total power for one user owning the subcarriers in `mask`,
/// trying every grid power tuple. `None` when no tuple reaches the rate the
/// slack demands while staying under the power cap.
fn cheapest_power(
    bandwidth_hz: f64,
    noise_w: f64,
    user: &OracleUser,
    mask: u32,
    levels: usize,
) -> Option<f64> {
    let subs: Vec<usize> = (0..user.gains.len()).filter(|n| mask >> n & 1 == 1).collect();
    let grid: Vec<f64> = (0..levels)
        .map(|j| user.max_power_w * j as f64 / (levels - 1) as f64)
        .collect();
    // log2(1 + g p / noise) per (owned subcarrier, level), so the hot loop
    // is pure additions.
    let table: Vec<Vec<f64>> = subs
        .iter()
        .map(|&n| {
            grid.iter()
                .map(|&p| (1.0 + user.gains[n] * p / noise_w).log2())
                .collect()
        })
        .collect();
    let need_log2 = user.data_bits / user.slack_s / bandwidth_hz;
    let power_cap = user.max_power_w * (1.0 + 1e-9);

    let mut best: Option<f64> = None;
    descend(&grid, &table, 0, 0.0, 0.0, power_cap, need_log2, &mut best);
    best
}

/// Depth-first walk over the level choices for each owned subcarrier.
/// Powers only accumulate, so any prefix already at or over the incumbent
/// (or the cap) is dead.
#[allow(clippy::too_many_arguments)]
fn descend(
    grid: &[f64],
    table: &[Vec<f64>],
    depth: usize,
    sum_p: f64,
    sum_log2: f64,
    power_cap: f64,
    need_log2: f64,
    best: &mut Option<f64>,
) {
    if sum_p > power_cap || best.is_some_and(|b| sum_p >= b) {
        return;
    }
    if depth == table.len() {
        if sum_log2 >= need_log2 {
            *best = Some(sum_p);
        }
        return;
    }
    for (level, &p) in grid.iter().enumerate() {
        descend(
            grid,
            table,
            depth + 1,
            sum_p + p,
            sum_log2 + table[depth][level],
            power_cap,
            need_log2,
            best,
        );
    }
}
