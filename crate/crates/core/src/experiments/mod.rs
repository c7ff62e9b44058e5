//! Seeded Monte Carlo campaigns over the relaying schemes.
//!
//! A campaign sweeps one axis (region size, SNR, or antenna count), runs a
//! fixed number of independent trials per sweep value, and reports the
//! per-scheme mean rate with its standard error. Every trial derives its
//! own seed from the campaign base seed, the sweep value, and the trial
//! index, and every scheme inside a trial consumes the same channel
//! realization, so per-trial scheme differences are paired. Trials may run
//! on any number of worker threads; the output is byte-identical
//! regardless.

mod campaign;
mod config;
mod seed;

pub use campaign::{parse_csv, run_campaign, run_trial, write_csv, CampaignRow, CampaignTable, TrialResult};
pub use config::{CampaignConfig, FixedParams, ScheduleConfig, Scheme, Sweep};
pub use seed::{child_seed, path_seeds};
