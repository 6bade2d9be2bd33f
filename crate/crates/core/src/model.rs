//! System model: tasks, devices, servers and the closed-form time, rate and
//! energy expressions.
//!
//! Everything is SI internally (bits, seconds, watts, joules, hertz). Values
//! quoted in dBm or GHz are converted once at ingestion, never inside the
//! formulas.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Global constants of a deployment. Defaults follow the standard evaluation
/// setup: 12.5 kHz subcarriers, -113 dBm noise, 600 mW transmit budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Bandwidth of one OFDMA subcarrier, Hz.
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub subcarrier_bandwidth_hz: f64,
    /// Noise power per subcarrier, W.
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub noise_power_w: f64,
    /// Per-user transmit power budget, W.
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub max_tx_power_w: f64,
    /// Effective switched-capacitance coefficient of user CPUs, J/(cycle Hz^2).
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub local_energy_coeff: f64,
    /// Effective switched-capacitance coefficient of server CPUs.
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub server_energy_coeff: f64,
    /// Local-execution energy budget used by the offload gate, J.
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub local_energy_budget_j: f64,
    /// Number of OFDMA subcarriers shared by all offloading users.
    pub num_subcarriers: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            subcarrier_bandwidth_hz: 12.5e3,
            noise_power_w: dbm_to_watts(-113.0),
            max_tx_power_w: 0.6,
            local_energy_coeff: 1e-24,
            server_energy_coeff: 1e-26,
            local_energy_budget_j: 0.1,
            num_subcarriers: 64,
        }
    }
}

/// One computation task, described by its input size, its per-bit CPU cost
/// and its completion deadline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub data_size_bits: u64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub intensity_cycles_per_bit: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub deadline_s: f64,
}

impl TaskSpec {
    /// Total CPU cycles the task needs.
    pub fn cycles(&self) -> f64 {
        self.data_size_bits as f64 * self.intensity_cycles_per_bit
    }
}

/// A mobile device with one task to run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserDevice {
    #[serde(with = "crate::hexfloat::serde_pos")]
    pub position_m: [f64; 2],
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub cpu_frequency_hz: f64,
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub max_tx_power_w: f64,
    pub task: TaskSpec,
}

/// An edge server with a fixed CPU frequency, assumed idle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeServer {
    #[serde(with = "crate::hexfloat::serde_pos")]
    pub position_m: [f64; 2],
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub cpu_frequency_hz: f64,
}

/// Energy split of one offloaded task. `total_j` is compute + transmit by
/// construction, so the decomposition can never drift from the total.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub compute_j: f64,
    pub transmit_j: f64,
}

impl EnergyBreakdown {
    pub fn total_j(&self) -> f64 {
        self.compute_j + self.transmit_j
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    /// A zero aggregate rate means no subcarrier carries signal to the
    /// assigned server; remote time and transmit energy are undefined.
    #[error("unreachable server: aggregate rate is {rate_bps} bits/s")]
    UnreachableServer { rate_bps: f64 },
}

/// Converts a dBm figure to watts: P_w = 10^((P_dBm - 30) / 10).
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Time to run the task on the local CPU, seconds: D * X / f.
pub fn local_time_s(task: &TaskSpec, cpu_frequency_hz: f64) -> f64 {
    task.cycles() / cpu_frequency_hz
}

/// Energy to run the task on the local CPU, joules: k0 * f^2 * D * X.
pub fn local_energy_j(task: &TaskSpec, cpu_frequency_hz: f64, local_energy_coeff: f64) -> f64 {
    local_energy_coeff * cpu_frequency_hz * cpu_frequency_hz * task.cycles()
}

/// Local execution wins only when it beats both the energy budget and the
/// deadline, strictly. Everything else is offloaded.
pub fn local_gate(task: &TaskSpec, cpu_frequency_hz: f64, params: &SystemParams) -> bool {
    local_energy_j(task, cpu_frequency_hz, params.local_energy_coeff)
        < params.local_energy_budget_j
        && local_time_s(task, cpu_frequency_hz) < task.deadline_s
}

/// Shannon rate summed over a set of subcarriers, bits/s. `link` yields
/// (channel gain, transmit power) pairs for the subcarriers the user owns.
pub fn aggregate_rate_bps(
    params: &SystemParams,
    link: impl IntoIterator<Item = (f64, f64)>,
) -> f64 {
    let noise = params.noise_power_w;
    link.into_iter()
        .map(|(gain, power)| {
            params.subcarrier_bandwidth_hz * (1.0 + gain * power / noise).log2()
        })
        .sum()
}

/// End-to-end remote completion time, seconds: upload D/R plus server
/// compute D*X/f_ser. Result feedback is neglected (results are small).
pub fn remote_time_s(
    task: &TaskSpec,
    rate_bps: f64,
    server_cpu_hz: f64,
) -> Result<f64, ModelError> {
    if rate_bps <= 0.0 {
        return Err(ModelError::UnreachableServer { rate_bps });
    }
    Ok(task.data_size_bits as f64 / rate_bps + task.cycles() / server_cpu_hz)
}

/// Radio energy spent uploading the task, joules: (sum of powers) * D / R.
pub fn transmit_energy_j(
    total_power_w: f64,
    data_size_bits: u64,
    rate_bps: f64,
) -> Result<f64, ModelError> {
    if rate_bps <= 0.0 {
        return Err(ModelError::UnreachableServer { rate_bps });
    }
    Ok(total_power_w * data_size_bits as f64 / rate_bps)
}

/// Energy the server spends computing the task, joules: k1 * f_ser^2 * D * X.
pub fn server_compute_energy_j(
    task: &TaskSpec,
    server_cpu_hz: f64,
    server_energy_coeff: f64,
) -> f64 {
    server_energy_coeff * server_cpu_hz * server_cpu_hz * task.cycles()
}

/// Full remote energy of one offloaded task: server compute plus upload.
pub fn remote_energy(
    task: &TaskSpec,
    server_cpu_hz: f64,
    total_power_w: f64,
    rate_bps: f64,
    params: &SystemParams,
) -> Result<EnergyBreakdown, ModelError> {
    Ok(EnergyBreakdown {
        compute_j: server_compute_energy_j(task, server_cpu_hz, params.server_energy_coeff),
        transmit_j: transmit_energy_j(total_power_w, task.data_size_bits, rate_bps)?,
    })
}
