//! Trial evaluation, campaign aggregation, and the CSV output format.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::baselines::{
    antenna_selection, as_candidate_layout, fpa_layout, grid_exhaustive, otpa_optimize, SelectionMode,
};
use crate::bounds::{aar_af_upper, aar_df_upper, rate_af_upper, rate_df_upper};
use crate::channel::{channel_vector, sample_paths, PathSet, Region};
use crate::experiments::config::{CampaignConfig, Scheme, Sweep};
use crate::experiments::seed::{child_seed, path_seeds};
use crate::optimizer::{optimize_af, optimize_df, PgaSchedule};
use crate::rate::{af_beamformer, af_snr_optimal, rate_af, rate_df, Relaying, SystemParams};
use crate::{Error, Result};

/// Rates of every requested scheme on one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Trial seed derived from (base seed, sweep value, trial index).
    pub seed: u64,
    pub sweep_value: f64,
    /// Rate per scheme in bits/s/Hz, keyed in canonical scheme order.
    pub rates: BTreeMap<Scheme, f64>,
}

/// Everything a single trial needs, resolved from config plus sweep value.
struct TrialSettings {
    relaying: Relaying,
    params: SystemParams,
    region: Region,
    schedule: PgaSchedule,
    num_paths_rx: usize,
    num_paths_tx: usize,
    rho1_sq: f64,
    rho2_sq: f64,
    grid_step: f64,
    selection_mode: SelectionMode,
}

impl TrialSettings {
    fn resolve(cfg: &CampaignConfig, sweep_value: f64) -> Result<Self> {
        let f = &cfg.fixed;
        let mut num_antennas = f.num_antennas;
        let mut snr_db = f.snr_db;
        let mut region_size = f.region_size;
        match cfg.sweep {
            Sweep::RegionSize { .. } => region_size = sweep_value,
            Sweep::SnrDb { .. } => snr_db = sweep_value,
            Sweep::NumAntennas { .. } => {
                if sweep_value.fract() != 0.0 || sweep_value < 1.0 {
                    return Err(Error::InvalidConfig(format!("antenna count sweep value {sweep_value} is not a positive integer")));
                }
                num_antennas = sweep_value as usize;
            }
        }
        let lambda = f.wavelength;
        let power = 10f64.powf(snr_db / 10.0);
        Ok(Self {
            relaying: cfg.relaying,
            params: SystemParams::symmetric(num_antennas, power)?,
            region: Region::new(region_size * lambda, f.min_spacing * lambda, lambda)?,
            schedule: cfg.schedule.to_schedule(lambda),
            num_paths_rx: f.num_paths_rx,
            num_paths_tx: f.num_paths_tx,
            rho1_sq: f.rho1_sq,
            rho2_sq: f.rho2_sq,
            grid_step: f.grid_step * lambda,
            selection_mode: if f.as_shared_subset { SelectionMode::SharedSubset } else { SelectionMode::PerStage },
        })
    }

    /// Draws the trial's channel realization from the trial seed. Called
    /// once per scheme so every scheme provably consumes the same
    /// realization.
    fn realization(&self, trial_seed: u64) -> Result<(PathSet, PathSet)> {
        let (seed_sr, seed_rd) = path_seeds(trial_seed);
        Ok((
            sample_paths(self.num_paths_rx, self.rho1_sq, seed_sr)?,
            sample_paths(self.num_paths_tx, self.rho2_sq, seed_rd)?,
        ))
    }
}

fn end_to_end_rate_from_gains(g1: f64, g2: f64, relaying: Relaying, params: &SystemParams) -> f64 {
    let snr = match relaying {
        Relaying::Df => {
            let s1 = params.p_source() * g1 / params.noise_relay();
            let s2 = params.p_relay() * g2 / params.noise_dest();
            s1.min(s2)
        }
        Relaying::Af => af_snr_optimal(g1, g2, params),
    };
    0.5 * (1.0 + snr).log2()
}

/// Evaluates every requested scheme on one seeded channel realization.
///
/// The trial seed is a pure function of `(base_seed, sweep_value,
/// trial_index)`, so a trial's result does not depend on which other
/// trials or sweep values run, nor on thread scheduling.
pub fn run_trial(cfg: &CampaignConfig, sweep_value: f64, trial_index: usize) -> Result<TrialResult> {
    let s = TrialSettings::resolve(cfg, sweep_value)?;
    let seed = child_seed(cfg.base_seed, sweep_value.to_bits(), trial_index as u64);
    let canonical = s.realization(seed)?;
    let lambda = s.region.wavelength();

    let mut rates = BTreeMap::new();
    for &scheme in &cfg.schemes {
        let (g1, f2) = s.realization(seed)?;
        debug_assert!(g1 == canonical.0 && f2 == canonical.1, "realization drifted between schemes");
        let rate = match scheme {
            Scheme::Fpa => {
                let layout = fpa_layout(s.params.num_antennas(), &s.region)?;
                let h1 = channel_vector(&layout, &g1, lambda);
                let h2 = channel_vector(&layout, &f2, lambda);
                match s.relaying {
                    Relaying::Df => rate_df(&h1, &h2, &s.params)?,
                    Relaying::Af => {
                        let w = af_beamformer(&h1, &h2, &s.params)?;
                        rate_af(&h1, &h2, w.matrix(), &s.params)?
                    }
                }
            }
            Scheme::Proposed => {
                // Initialized at the fixed layout, so the optimized rate
                // dominates the fixed baseline realization by realization.
                let init = fpa_layout(s.params.num_antennas(), &s.region)?;
                init.validate(&s.region).map_err(|e| {
                    Error::InfeasibleGeometry(format!("fixed-layout initialization is infeasible: {e}"))
                })?;
                let out = match s.relaying {
                    Relaying::Df => optimize_df(&g1, &f2, &s.region, &s.params, &s.schedule, &init, &init)?,
                    Relaying::Af => optimize_af(&g1, &f2, &s.region, &s.params, &s.schedule, &init, &init)?,
                };
                out.rate
            }
            Scheme::As => {
                let candidates = as_candidate_layout(s.params.num_antennas(), &s.region)?;
                antenna_selection(&candidates, &g1, &f2, &s.params, s.relaying, s.selection_mode, &s.region)?.rate
            }
            Scheme::Otpa => {
                let init = fpa_layout(s.params.num_antennas(), &s.region)?;
                init.validate(&s.region).map_err(|e| {
                    Error::InfeasibleGeometry(format!("fixed-layout initialization is infeasible: {e}"))
                })?;
                otpa_optimize(&g1, &f2, &s.region, &s.params, &s.schedule, s.relaying, &init)?.rate
            }
            Scheme::GridExhaustive => {
                if s.params.num_antennas() != 1 {
                    return Err(Error::InvalidConfig("grid_exhaustive requires a single antenna".into()));
                }
                let (_, best1, _) = grid_exhaustive(&g1, &s.region, s.grid_step)?;
                let (_, best2, _) = grid_exhaustive(&f2, &s.region, s.grid_step)?;
                end_to_end_rate_from_gains(best1, best2, s.relaying, &s.params)
            }
            Scheme::BoundDeterministic => match s.relaying {
                Relaying::Df => rate_df_upper(&g1, &f2, &s.params),
                Relaying::Af => rate_af_upper(&g1, &f2, &s.params),
            },
            Scheme::BoundAar => match s.relaying {
                Relaying::Df => aar_df_upper(s.num_paths_rx, s.num_paths_tx, s.rho1_sq, s.rho2_sq, &s.params)?,
                Relaying::Af => aar_af_upper(s.num_paths_rx, s.num_paths_tx, s.rho1_sq, s.rho2_sq, &s.params)?,
            },
        };
        rates.insert(scheme, rate);
    }

    #[cfg(debug_assertions)]
    check_trial_dominance(&rates);

    Ok(TrialResult { seed, sweep_value, rates })
}

/// Per-realization ordering relations that hold exactly (up to 1e-9) by
/// construction; checked on every trial in test builds.
#[cfg(debug_assertions)]
fn check_trial_dominance(rates: &BTreeMap<Scheme, f64>) {
    const TOL: f64 = 1e-9;
    let get = |s: Scheme| rates.get(&s).copied();
    if let (Some(p), Some(f)) = (get(Scheme::Proposed), get(Scheme::Fpa)) {
        debug_assert!(p >= f - TOL, "proposed {p} below fpa {f}");
    }
    if let (Some(a), Some(f)) = (get(Scheme::As), get(Scheme::Fpa)) {
        debug_assert!(a >= f - TOL, "selection {a} below fpa {f}");
    }
    if let (Some(o), Some(f)) = (get(Scheme::Otpa), get(Scheme::Fpa)) {
        debug_assert!(o >= f - TOL, "otpa {o} below fpa {f}");
    }
    if let Some(bound) = get(Scheme::BoundDeterministic) {
        for s in [Scheme::Proposed, Scheme::Fpa, Scheme::As, Scheme::Otpa, Scheme::GridExhaustive] {
            if let Some(r) = get(s) {
                debug_assert!(r <= bound + TOL, "{s} rate {r} exceeds the deterministic bound {bound}");
            }
        }
    }
}

/// One aggregated output row.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignRow {
    pub sweep_value: f64,
    /// Scheme name, or `"error"` for a sweep value whose trials failed.
    pub scheme: String,
    pub mean_rate: f64,
    pub std_err: f64,
    pub trials: usize,
}

/// Aggregated campaign output plus any per-sweep-value failures.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignTable {
    pub sweep_name: String,
    pub base_seed: u64,
    pub rows: Vec<CampaignRow>,
    /// Human-readable messages for sweep values that produced error rows.
    pub errors: Vec<(f64, String)>,
}

/// Runs `cfg.trials` trials for every sweep value and aggregates.
///
/// Trials run in parallel on the current rayon pool; results are reduced
/// in `(sweep_value, trial_index)` order, so the table (and its CSV form)
/// is byte-identical for any worker count. A sweep value whose trials
/// error is recorded as a single `"error"` row and the sweep continues.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignTable> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for sweep_value in cfg.sweep.values() {
        let results: Vec<Result<TrialResult>> =
            (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, sweep_value, t)).collect();
        match results.into_iter().collect::<Result<Vec<_>>>() {
            Ok(trials) => {
                for &scheme in &cfg.schemes {
                    let samples: Vec<f64> = trials.iter().map(|t| t.rates[&scheme]).collect();
                    let n = samples.len();
                    let mean = samples.iter().sum::<f64>() / n as f64;
                    let std_err = if n < 2 {
                        0.0
                    } else {
                        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                        (var / n as f64).sqrt()
                    };
                    rows.push(CampaignRow {
                        sweep_value,
                        scheme: scheme.to_string(),
                        mean_rate: mean,
                        std_err,
                        trials: n,
                    });
                }
            }
            Err(e) => {
                errors.push((sweep_value, e.to_string()));
                rows.push(CampaignRow {
                    sweep_value,
                    scheme: "error".into(),
                    mean_rate: f64::NAN,
                    std_err: f64::NAN,
                    trials: cfg.trials,
                });
            }
        }
    }
    Ok(CampaignTable { sweep_name: cfg.sweep.name().into(), base_seed: cfg.base_seed, rows, errors })
}

/// CSV header written by [`write_csv`].
pub const CSV_HEADER: &str = "sweep_name,sweep_value,scheme,mean_rate_bps_hz,std_err,trials,base_seed";

/// Writes the aggregated table as CSV. Floating-point columns carry nine
/// significant digits in scientific notation, enough to use the file as a
/// regression artifact.
pub fn write_csv<W: Write>(table: &CampaignTable, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in &table.rows {
        writeln!(
            out,
            "{},{:.8e},{},{:.8e},{:.8e},{},{}",
            table.sweep_name, row.sweep_value, row.scheme, row.mean_rate, row.std_err, row.trials, table.base_seed
        )?;
    }
    Ok(())
}

/// Parses a CSV produced by [`write_csv`] back into a table.
pub fn parse_csv(text: &str) -> Result<CampaignTable> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::InvalidConfig("empty CSV".into()))?;
    if header != CSV_HEADER {
        return Err(Error::InvalidConfig(format!("unexpected CSV header: {header}")));
    }
    let mut sweep_name: Option<String> = None;
    let mut base_seed: Option<u64> = None;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::InvalidConfig(format!("line {}: expected 7 fields, got {}", i + 2, fields.len())));
        }
        let parse_f = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| Error::InvalidConfig(format!("line {}: bad {what}: {s}", i + 2)))
        };
        let name = fields[0].to_string();
        if *sweep_name.get_or_insert_with(|| name.clone()) != name {
            return Err(Error::InvalidConfig("inconsistent sweep_name column".into()));
        }
        let seed: u64 = fields[6]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("line {}: bad base_seed: {}", i + 2, fields[6])))?;
        if *base_seed.get_or_insert(seed) != seed {
            return Err(Error::InvalidConfig("inconsistent base_seed column".into()));
        }
        rows.push(CampaignRow {
            sweep_value: parse_f(fields[1], "sweep_value")?,
            scheme: fields[2].to_string(),
            mean_rate: parse_f(fields[3], "mean_rate")?,
            std_err: parse_f(fields[4], "std_err")?,
            trials: fields[5]
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("line {}: bad trials: {}", i + 2, fields[5])))?,
        });
    }
    Ok(CampaignTable {
        sweep_name: sweep_name.ok_or_else(|| Error::InvalidConfig("CSV has no data rows".into()))?,
        base_seed: base_seed.unwrap_or(0),
        rows,
        errors: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> CampaignConfig {
        CampaignConfig::from_toml_str(
            r#"
relaying = "df"
trials = 3
base_seed = 7
schemes = ["proposed", "fpa", "otpa", "as", "bound_deterministic", "bound_aar"]

[sweep]
kind = "region_size"
values = [3.0, 5.0]

[fixed]
num_antennas = 2
snr_db = 10.0
num_paths_rx = 3
num_paths_tx = 3
"#,
        )
        .unwrap()
    }

    #[test]
    fn trials_are_bit_reproducible() {
        let cfg = small_config();
        let a = run_trial(&cfg, 3.0, 1).unwrap();
        let b = run_trial(&cfg, 3.0, 1).unwrap();
        assert_eq!(a, b);
        let c = run_trial(&cfg, 3.0, 2).unwrap();
        assert_ne!(a.rates, c.rates);
    }

    #[test]
    fn trial_rates_respect_the_paired_orderings() {
        let cfg = small_config();
        for t in 0..10 {
            let r = run_trial(&cfg, 4.0, t).unwrap();
            let bound = r.rates[&Scheme::BoundDeterministic];
            assert!(r.rates[&Scheme::Proposed] >= r.rates[&Scheme::Fpa] - 1e-9);
            assert!(r.rates[&Scheme::As] >= r.rates[&Scheme::Fpa] - 1e-9);
            assert!(r.rates[&Scheme::Otpa] >= r.rates[&Scheme::Fpa] - 1e-9);
            for (_, &rate) in r.rates.iter().filter(|(s, _)| **s != Scheme::BoundAar) {
                assert!(rate <= bound + 1e-9);
            }
        }
    }

    #[test]
    fn single_trial_campaign_reports_the_trial_values() {
        let mut cfg = small_config();
        cfg.trials = 1;
        let table = run_campaign(&cfg).unwrap();
        let trial = run_trial(&cfg, 3.0, 0).unwrap();
        for row in table.rows.iter().filter(|r| r.sweep_value == 3.0) {
            let scheme = cfg.schemes.iter().find(|s| s.to_string() == row.scheme).unwrap();
            assert_eq!(row.mean_rate, trial.rates[scheme]);
            assert_eq!(row.std_err, 0.0);
            assert_eq!(row.trials, 1);
        }
    }

    #[test]
    fn failed_sweep_values_become_error_rows() {
        let mut cfg = small_config();
        // A two-antenna half-wavelength grid cannot fit a 0.3λ region.
        cfg.sweep = Sweep::RegionSize { values: vec![0.3, 6.0] };
        let table = run_campaign(&cfg).unwrap();
        let error_rows: Vec<_> = table.rows.iter().filter(|r| r.scheme == "error").collect();
        assert_eq!(error_rows.len(), 1);
        assert_eq!(error_rows[0].sweep_value, 0.3);
        assert!(error_rows[0].mean_rate.is_nan());
        assert_eq!(table.errors.len(), 1);
        // The healthy sweep value still aggregated.
        assert!(table.rows.iter().any(|r| r.sweep_value == 6.0 && r.scheme == "proposed"));
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let mut cfg = small_config();
        cfg.trials = 2;
        let table = run_campaign(&cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed = parse_csv(&text).unwrap();
        let mut buf2 = Vec::new();
        write_csv(&parsed, &mut buf2).unwrap();
        assert_eq!(text, String::from_utf8(buf2).unwrap());
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(parsed.rows.len(), table.rows.len());
    }

    #[test]
    fn output_is_identical_across_thread_counts() {
        let mut cfg = small_config();
        cfg.trials = 4;
        let csv_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let table = pool.install(|| run_campaign(&cfg)).unwrap();
            let mut buf = Vec::new();
            write_csv(&table, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        assert_eq!(csv_with(1), csv_with(3));
    }

    #[test]
    fn fixed_snr_scales_power_on_the_same_realization() {
        let base = r#"
relaying = "af"
trials = 1
base_seed = 1
schemes = ["fpa"]

[sweep]
kind = "region_size"
values = [4.0]

[fixed]
num_antennas = 1
num_paths_rx = 2
num_paths_tx = 2
snr_db = SNR
"#;
        let low_cfg = CampaignConfig::from_toml_str(&base.replace("SNR", "0.0")).unwrap();
        let high_cfg = CampaignConfig::from_toml_str(&base.replace("SNR", "20.0")).unwrap();
        let low = run_trial(&low_cfg, 4.0, 0).unwrap();
        let high = run_trial(&high_cfg, 4.0, 0).unwrap();
        // Identical seed and realization; only the transmit power differs.
        assert_eq!(low.seed, high.seed);
        assert!(high.rates[&Scheme::Fpa] > low.rates[&Scheme::Fpa]);
    }
}
