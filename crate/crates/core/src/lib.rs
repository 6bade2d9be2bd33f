//! Energy-minimal joint task offloading and OFDMA resource allocation for
//! multi-server mobile edge computing, plus the Monte Carlo harness pieces
//! needed to study it.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the physical quantities: task descriptions, device and
//!   server parameters, and the time/energy/rate formulas everything else is
//!   built from.
//! * [`scenario`] generates random deployments (seeded, reproducible) and
//!   reads/writes them as versioned JSON with lossless hex-float reals.
//! * [`lower_level`] solves the per-assignment power and subcarrier
//!   allocation by Lagrangian duality with water-filling.
//! * [`upper_level`] searches over offloading assignments, exhaustively or
//!   with the Hungarian method on decoupled costs.
//! * [`baselines`] implements the comparison strategies: minimum-distance
//!   assignment, random assignment, average (equal-split) allocation, and
//!   all-local execution.
//! * [`metrics`] aggregates per-drop records into means, deviations and
//!   service-outage probability.
//! * [`outcome`] is the uniform strategy dispatch used by the CLI and the
//!   Python bindings.
//!
//! Randomness is ChaCha8 (`rand_chacha`) seeded via `seed_from_u64`, so seeds
//! are portable across platforms and builds.

pub mod baselines;
pub mod hexfloat;
pub mod hungarian;
pub mod lower_level;
pub mod metrics;
pub mod model;
#[cfg(any(test, feature = "test-oracle"))]
pub mod oracle;
pub mod outcome;
pub mod scenario;
pub mod upper_level;
