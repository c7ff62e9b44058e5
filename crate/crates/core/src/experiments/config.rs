//! Campaign configuration: the TOML schema, defaults, and validation.
//!
//! A config file has four sections. Top level: `relaying`, `trials`,
//! `base_seed`, `schemes`. `[sweep]`: `kind` (one of `region_size`,
//! `snr_db`, `num_antennas`) plus `values`. `[fixed]`: everything held
//! constant across the sweep — geometry in wavelengths, path counts,
//! average powers, the SNR in dB (converted internally to linear transmit
//! power against unit noise). `[schedule]`: optimizer hyperparameters in
//! wavelengths. `[fixed]` and `[schedule]` may be omitted entirely; every
//! field has the default shown in the annotated example shipped with the
//! repository.

use serde::{Deserialize, Serialize};

use crate::rate::Relaying;
use crate::{Error, Result};

/// A scheme evaluated inside each trial. The enum order fixes the row
/// order within a sweep value in the output CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Two-stage position optimization initialized at the fixed layout.
    Proposed,
    /// Fixed half-wavelength array.
    Fpa,
    /// Best-N-of-2N antenna selection.
    As,
    /// One-time position adjustment shared by both stages.
    Otpa,
    /// Exhaustive single-antenna grid search (requires one antenna).
    GridExhaustive,
    /// Per-realization closed-form rate bound.
    BoundDeterministic,
    /// Average-rate closed-form bound (constant across trials).
    BoundAar,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Scheme::Proposed => "proposed",
            Scheme::Fpa => "fpa",
            Scheme::As => "as",
            Scheme::Otpa => "otpa",
            Scheme::GridExhaustive => "grid_exhaustive",
            Scheme::BoundDeterministic => "bound_deterministic",
            Scheme::BoundAar => "bound_aar",
        };
        write!(f, "{name}")
    }
}

/// The swept axis and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sweep {
    /// Region side lengths in wavelengths.
    RegionSize { values: Vec<f64> },
    /// Average SNR values in dB.
    SnrDb { values: Vec<f64> },
    /// Relay antenna counts.
    NumAntennas { values: Vec<usize> },
}

impl Sweep {
    /// Column name written to the CSV.
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::RegionSize { .. } => "region_size",
            Sweep::SnrDb { .. } => "snr_db",
            Sweep::NumAntennas { .. } => "num_antennas",
        }
    }

    /// Sweep values as floats, in config order.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::RegionSize { values } | Sweep::SnrDb { values } => values.clone(),
            Sweep::NumAntennas { values } => values.iter().map(|&n| n as f64).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Sweep::RegionSize { values } => !values.is_empty() && values.iter().all(|&v| v > 0.0 && v.is_finite()),
            Sweep::SnrDb { values } => !values.is_empty() && values.iter().all(|&v| v.is_finite()),
            Sweep::NumAntennas { values } => !values.is_empty() && values.iter().all(|&n| n >= 1),
        };
        if !ok {
            return Err(Error::InvalidConfig(format!("sweep `{}` has an empty or out-of-range value list", self.name())));
        }
        Ok(())
    }
}

/// Parameters held fixed across the sweep. Lengths are in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedParams {
    /// Relay antenna count (when not the sweep axis).
    pub num_antennas: usize,
    /// Average SNR in dB (when not the sweep axis); transmit powers are
    /// `10^(snr_db/10)` against unit noise at both hops.
    pub snr_db: f64,
    /// Region side length in wavelengths (when not the sweep axis).
    pub region_size: f64,
    /// Receive-side path count.
    pub num_paths_rx: usize,
    /// Transmit-side path count.
    pub num_paths_tx: usize,
    /// Receive-side average channel power.
    pub rho1_sq: f64,
    /// Transmit-side average channel power.
    pub rho2_sq: f64,
    /// Carrier wavelength in meters; all geometry scales with it.
    pub wavelength: f64,
    /// Minimum inter-antenna spacing in wavelengths.
    pub min_spacing: f64,
    /// Exhaustive-search cell size in wavelengths.
    pub grid_step: f64,
    /// Use one shared subset for both antenna-selection stages instead of
    /// independent per-stage subsets.
    pub as_shared_subset: bool,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            num_antennas: 1,
            snr_db: 10.0,
            region_size: 10.0,
            num_paths_rx: 5,
            num_paths_tx: 5,
            rho1_sq: 1.0,
            rho2_sq: 1.0,
            wavelength: 1.0,
            min_spacing: 0.5,
            grid_step: 0.01,
            as_shared_subset: false,
        }
    }
}

/// Optimizer hyperparameters in wavelength units; see
/// [`crate::optimizer::PgaSchedule`] for semantics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub eta_init: f64,
    pub eta_min: f64,
    pub shrink: f64,
    pub max_iters: usize,
    pub ao_tol: f64,
    pub max_ao_rounds: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { eta_init: 10.0, eta_min: 1e-4, shrink: 0.5, max_iters: 300, ao_tol: 1e-3, max_ao_rounds: 100 }
    }
}

impl ScheduleConfig {
    pub fn to_schedule(&self, wavelength: f64) -> crate::optimizer::PgaSchedule {
        crate::optimizer::PgaSchedule {
            eta_init: self.eta_init * wavelength,
            eta_min: self.eta_min * wavelength,
            shrink: self.shrink,
            max_iters: self.max_iters,
            ao_tol: self.ao_tol,
            max_ao_rounds: self.max_ao_rounds,
        }
    }
}

/// A full campaign description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub relaying: Relaying,
    pub trials: usize,
    pub base_seed: u64,
    /// Schemes to evaluate; stored sorted and deduplicated.
    pub schemes: Vec<Scheme>,
    pub sweep: Sweep,
    #[serde(default)]
    pub fixed: FixedParams,
    #[serde(default)]
    pub schedule: ScheduleConfig,
}

impl CampaignConfig {
    /// Parses a TOML config and validates it.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: CampaignConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("TOML parse error: {e}")))?;
        cfg.schemes.sort_unstable();
        cfg.schemes.dedup();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a config file.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("at least one scheme is required".into()));
        }
        self.sweep.validate()?;
        let f = &self.fixed;
        if f.num_paths_rx == 0 || f.num_paths_tx == 0 {
            return Err(Error::InvalidConfig("path counts must be at least 1".into()));
        }
        for (name, v) in [
            ("rho1_sq", f.rho1_sq),
            ("rho2_sq", f.rho2_sq),
            ("wavelength", f.wavelength),
            ("min_spacing", f.min_spacing),
            ("grid_step", f.grid_step),
            ("region_size", f.region_size),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("fixed.{name} must be positive and finite, got {v}")));
            }
        }
        if self.schemes.contains(&Scheme::GridExhaustive) {
            let all_single = match &self.sweep {
                Sweep::NumAntennas { values } => values.iter().all(|&n| n == 1),
                _ => f.num_antennas == 1,
            };
            if !all_single {
                return Err(Error::InvalidConfig(
                    "grid_exhaustive is only available with a single antenna".into(),
                ));
            }
        }
        if matches!(self.sweep, Sweep::NumAntennas { .. }) && f.num_antennas != FixedParams::default().num_antennas {
            // Harmless but almost certainly a config mistake.
            return Err(Error::InvalidConfig(
                "fixed.num_antennas is ignored when num_antennas is the sweep axis; remove it".into(),
            ));
        }
        self.schedule.to_schedule(f.wavelength).validate().map_err(|e| match e {
            Error::InvalidArgument(m) => Error::InvalidConfig(format!("schedule: {m}")),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
relaying = "df"
trials = 4
base_seed = 42
schemes = ["proposed", "fpa", "bound_deterministic"]

[sweep]
kind = "region_size"
values = [2.0, 4.0]

[fixed]
num_antennas = 2
snr_db = 10.0
"#;

    #[test]
    fn parses_a_minimal_config() {
        let cfg = CampaignConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.relaying, Relaying::Df);
        assert_eq!(cfg.trials, 4);
        assert_eq!(cfg.sweep.name(), "region_size");
        assert_eq!(cfg.fixed.num_antennas, 2);
        assert_eq!(cfg.fixed.num_paths_rx, 5); // default
        assert_eq!(cfg.schedule, ScheduleConfig::default());
    }

    #[test]
    fn schemes_are_sorted_and_deduplicated() {
        let text = EXAMPLE.replace(
            r#"schemes = ["proposed", "fpa", "bound_deterministic"]"#,
            r#"schemes = ["fpa", "proposed", "fpa"]"#,
        );
        let cfg = CampaignConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.schemes, vec![Scheme::Proposed, Scheme::Fpa]);
    }

    #[test]
    fn rejects_malformed_and_invalid_configs() {
        assert!(matches!(CampaignConfig::from_toml_str("not toml ["), Err(Error::InvalidConfig(_))));
        let zero_trials = EXAMPLE.replace("trials = 4", "trials = 0");
        assert!(CampaignConfig::from_toml_str(&zero_trials).is_err());
        let unknown = EXAMPLE.replace("num_antennas = 2", "num_antennas = 2\nbogus_field = 1");
        assert!(CampaignConfig::from_toml_str(&unknown).is_err());
    }

    #[test]
    fn grid_exhaustive_requires_a_single_antenna() {
        let text = EXAMPLE.replace(
            r#"schemes = ["proposed", "fpa", "bound_deterministic"]"#,
            r#"schemes = ["grid_exhaustive"]"#,
        );
        assert!(CampaignConfig::from_toml_str(&text).is_err());
        let ok = text.replace("num_antennas = 2", "num_antennas = 1");
        CampaignConfig::from_toml_str(&ok).unwrap();
    }
}
