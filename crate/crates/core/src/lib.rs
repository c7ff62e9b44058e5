//! Simulation library for relays whose antennas can be repositioned inside a
//! bounded planar region between the receive and transmit stages.
//!
//! The crate models multipath channels as a function of antenna position
//! (field-response model), optimizes the per-stage antenna placements with
//! projected gradient ascent under region and minimum-spacing constraints,
//! constructs the optimal amplify-and-forward beamforming matrix, and
//! evaluates closed-form upper bounds on the achievable rates. A seeded
//! Monte Carlo campaign runner sweeps region size, SNR, or antenna count
//! across the proposed scheme and fixed-antenna baselines and writes the
//! aggregated rates to CSV.
//!
//! Module map:
//!
//! * [`channel`] — path sets, placements, field-response vectors, seeded
//!   channel realization sampling.
//! * [`rate`] — decode-and-forward / amplify-and-forward rate evaluation and
//!   AF beamformer construction, including an independent solver used as a
//!   correctness oracle.
//! * [`bounds`] — deterministic and average-rate upper bounds in closed form.
//! * [`optimizer`] — per-antenna projected gradient ascent and the two-stage
//!   alternating optimization drivers.
//! * [`baselines`] — fixed-position array, antenna selection, one-time
//!   position adjustment, and exhaustive grid search benchmarks.
//! * [`experiments`] — campaign configuration, seeding, trial evaluation,
//!   aggregation, and CSV output.
//! * [`validate`] — self-check suite exposed through the CLI.
//!
//! All numerical work is in `f64`; rates are in bits/s/Hz (base-2 logs).
//! Every randomized operation takes an explicit seed and is a pure function
//! of its inputs, so results are reproducible across platforms and thread
//! counts.

pub mod baselines;
pub mod bounds;
pub mod channel;
mod error;
pub mod experiments;
pub mod optimizer;
pub mod rate;
pub mod validate;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub use channel::{PathSet, Placement, Position, Region};
pub use rate::{AfBeamformer, Relaying, SystemParams};
