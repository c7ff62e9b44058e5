//! Antenna position optimization.
//!
//! Each stage objective decomposes over antennas (antenna `n`'s channel
//! entry depends only on its own position), so positions are optimized one
//! antenna at a time by projected gradient ascent with a backtracking step
//! search, cycling over antennas until a full round no longer improves the
//! stage gain. The receive-stage and transmit-stage problems share no
//! variables and are optimized independently; the amplify-and-forward
//! pipeline runs the identical two stages and then constructs the optimal
//! beamformer for the resulting channels.
//!
//! The step search starts from a step much larger than the region
//! (default 10λ) and halves it until the projected candidate both respects
//! the minimum spacing against the other antennas' current positions and
//! does not decrease the objective. The initial oversized step makes the
//! search probe the whole gradient ray across the region before settling
//! into a local refinement, which is what lets a single ascent escape most
//! shallow local basins. A step that cannot improve at any scale down to
//! `eta_min` leaves the antenna in place and ends its ascent.

use num_complex::Complex64;

use crate::baselines::fpa_layout;
use crate::channel::{channel_gain, channel_vector, PathSet, Placement, Position, Region};
use crate::rate::{af_beamformer, rate_af, rate_df, AfBeamformer, SystemParams};
use crate::{Error, Result};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Step-size and iteration-control hyperparameters for the gradient
/// ascent and the alternating-optimization loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgaSchedule {
    /// Initial backtracking step in meters (default 10λ).
    pub eta_init: f64,
    /// Step below which an antenna's ascent terminates (default 1e-4·λ).
    pub eta_min: f64,
    /// Multiplicative step shrink factor in (0, 1) (default 0.5).
    pub shrink: f64,
    /// Maximum gradient iterations per antenna update (default 300).
    pub max_iters: usize,
    /// Stage-objective increment below which the antenna sweep stops
    /// (default 1e-3), measured between consecutive full rounds.
    pub ao_tol: f64,
    /// Hard cap on the number of antenna sweeps per stage (default 100).
    pub max_ao_rounds: usize,
}

impl PgaSchedule {
    /// Default schedule for a given carrier wavelength.
    pub fn for_wavelength(wavelength: f64) -> Self {
        Self {
            eta_init: 10.0 * wavelength,
            eta_min: 1e-4 * wavelength,
            shrink: 0.5,
            max_iters: 300,
            ao_tol: 1e-3,
            max_ao_rounds: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_min > 0.0 && self.eta_init > self.eta_min) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < eta_min < eta_init, got eta_min={} eta_init={}",
                self.eta_min, self.eta_init
            )));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidArgument(format!("shrink must lie in (0,1), got {}", self.shrink)));
        }
        if self.max_iters == 0 || self.max_ao_rounds == 0 {
            return Err(Error::InvalidArgument("iteration caps must be at least 1".into()));
        }
        if !(self.ao_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("ao_tol must be positive, got {}", self.ao_tol)));
        }
        Ok(())
    }
}

/// Output of a two-stage position optimization.
#[derive(Debug, Clone)]
pub struct OptimizeResult {
    /// Optimized receive-stage placement.
    pub placement_rx: Placement,
    /// Optimized transmit-stage placement.
    pub placement_tx: Placement,
    /// Final receive-stage channel gain ‖h₁‖².
    pub gain_rx: f64,
    /// Final transmit-stage channel gain ‖h₂‖².
    pub gain_tx: f64,
    /// Receive-stage gain after each antenna sweep, starting at the
    /// initialization value. Non-decreasing by construction.
    pub trace_rx: Vec<f64>,
    /// Transmit-stage gain trace, same convention.
    pub trace_tx: Vec<f64>,
    /// End-to-end rate at the optimized placements, in bits/s/Hz.
    pub rate: f64,
    /// Relay beamformer (amplify-and-forward pipeline only).
    pub beamformer: Option<AfBeamformer>,
}

/// Closed-form gradient of the single-antenna channel gain `|h(p)|²` with
/// respect to the position.
///
/// Writing the gain as `Σ_{ℓ₁,ℓ₂} |c_{ℓ₁}||c_{ℓ₂}|·cos(ϑ_{ℓ₁,ℓ₂})` with
/// `ϑ_{ℓ₁,ℓ₂} = (2π/λ)(ω_{ℓ₁} − ω_{ℓ₂}) − (arg c_{ℓ₁} − arg c_{ℓ₂})`, the
/// partials are `−(2π/λ)·Σ |c_{ℓ₁}||c_{ℓ₂}|·sin(ϑ_{ℓ₁,ℓ₂})` times the
/// difference of the per-path direction cosines along the coordinate. A
/// single path gives a position-independent gain and an exactly zero
/// gradient.
pub fn gain_gradient(position: Position, paths: &PathSet, wavelength: f64) -> [f64; 2] {
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let dirs = paths.direction_cosines();
    let l = paths.num_paths();
    let mut amp = Vec::with_capacity(l);
    let mut phase = Vec::with_capacity(l);
    for (coeff, &(u, v)) in paths.coefficients().iter().zip(&dirs) {
        amp.push(coeff.norm());
        phase.push(k * (position.x * u + position.y * v) - coeff.arg());
    }
    let mut gx = 0.0;
    let mut gy = 0.0;
    for l1 in 0..l {
        for l2 in 0..l {
            let s = amp[l1] * amp[l2] * (phase[l1] - phase[l2]).sin();
            gx += s * (dirs[l1].0 - dirs[l2].0);
            gy += s * (dirs[l1].1 - dirs[l2].1);
        }
    }
    [-k * gx, -k * gy]
}

/// Clamps each coordinate into the region's square, independently.
pub fn project(position: Position, region: &Region) -> Position {
    let h = region.half_side();
    Position::new(position.x.clamp(-h, h), position.y.clamp(-h, h))
}

/// Gradient ascent of a single antenna against an arbitrary objective.
///
/// Shared by the per-stage gain ascent and the one-time-adjustment
/// baseline, which ascends a combined objective of both stages. Objective
/// and gradient are closures of the candidate position; spacing is checked
/// against the other antennas' current positions. Returns the final
/// position; the objective at the return value never falls below the
/// objective at `start`.
pub(crate) fn ascend_antenna<S, F, G>(
    start: Position,
    region: &Region,
    schedule: &PgaSchedule,
    spacing_ok: S,
    objective: F,
    gradient: G,
) -> Position
where
    S: Fn(Position) -> bool,
    F: Fn(Position) -> f64,
    G: Fn(Position) -> [f64; 2],
{
    let mut pos = start;
    let mut obj = objective(pos);
    for _ in 0..schedule.max_iters {
        let g = gradient(pos);
        let mut eta = schedule.eta_init;
        let mut cand = project(Position::new(pos.x + eta * g[0], pos.y + eta * g[1]), region);
        let accepted = loop {
            if spacing_ok(cand) {
                let cand_obj = objective(cand);
                if cand_obj >= obj {
                    break Some((cand, cand_obj));
                }
            }
            if eta <= schedule.eta_min {
                break None;
            }
            eta *= schedule.shrink;
            cand = project(Position::new(pos.x + eta * g[0], pos.y + eta * g[1]), region);
        };
        match accepted {
            // A zero-improvement candidate keeps the old position; since
            // the ascent is deterministic, the antenna is at a fixed point
            // and further iterations cannot move it.
            Some((c, co)) if co > obj => {
                pos = c;
                obj = co;
            }
            _ => break,
        }
        if eta <= schedule.eta_min {
            break;
        }
    }
    pos
}

/// One projected-gradient position update for antenna `index` against its
/// own channel gain, holding all other antennas fixed. The returned
/// position respects the region and the minimum spacing to the other
/// antennas' current positions, and its gain is never below the input's.
pub fn pga_single(
    index: usize,
    placement: &Placement,
    paths: &PathSet,
    region: &Region,
    schedule: &PgaSchedule,
) -> Result<Position> {
    schedule.validate()?;
    if index >= placement.len() {
        return Err(Error::InvalidArgument(format!(
            "antenna index {index} out of range for {} antennas",
            placement.len()
        )));
    }
    placement.validate(region)?;
    let lambda = region.wavelength();
    Ok(ascend_antenna(
        placement.get(index),
        region,
        schedule,
        |p| placement.spacing_ok(index, p, region),
        |p| channel_gain(p, paths, lambda),
        |p| gain_gradient(p, paths, lambda),
    ))
}

struct StageResult {
    placement: Placement,
    trace: Vec<f64>,
    gain: f64,
}

/// Alternating per-antenna ascent of one stage's channel gain until a full
/// round improves it by less than `ao_tol` (or the round cap is hit).
fn optimize_stage(init: &Placement, paths: &PathSet, region: &Region, schedule: &PgaSchedule) -> Result<StageResult> {
    schedule.validate()?;
    init.validate(region)?;
    let lambda = region.wavelength();
    let n = init.len();
    let mut placement = init.clone();
    let mut gains: Vec<f64> = placement.positions().iter().map(|&p| channel_gain(p, paths, lambda)).collect();
    let mut total: f64 = gains.iter().sum();
    let mut trace = vec![total];
    for _ in 0..schedule.max_ao_rounds {
        let before = total;
        for idx in 0..n {
            let updated = ascend_antenna(
                placement.get(idx),
                region,
                schedule,
                |p| placement.spacing_ok(idx, p, region),
                |p| channel_gain(p, paths, lambda),
                |p| gain_gradient(p, paths, lambda),
            );
            placement.set(idx, updated);
            let g = channel_gain(updated, paths, lambda);
            debug_assert!(g >= gains[idx] - 1e-12, "antenna update decreased its gain");
            gains[idx] = g;
            debug_assert!(placement.validate(region).is_ok(), "update left an infeasible placement");
        }
        total = gains.iter().sum();
        debug_assert!(total >= before - 1e-9, "antenna sweep decreased the stage gain");
        trace.push(total);
        if total - before < schedule.ao_tol {
            break;
        }
    }
    Ok(StageResult { placement, trace, gain: total })
}

/// Runs the two independent stage optimizations and returns the optimized
/// placements together with the resulting channel vectors.
#[allow(clippy::type_complexity)]
fn optimize_positions(
    paths_sr: &PathSet,
    paths_rd: &PathSet,
    region: &Region,
    schedule: &PgaSchedule,
    init_rx: &Placement,
    init_tx: &Placement,
) -> Result<(StageResult, StageResult, Vec<Complex64>, Vec<Complex64>)> {
    if init_rx.len() != init_tx.len() {
        return Err(Error::DimensionMismatch { expected: init_rx.len(), got: init_tx.len() });
    }
    let rx = optimize_stage(init_rx, paths_sr, region, schedule)?;
    let tx = optimize_stage(init_tx, paths_rd, region, schedule)?;
    let h1 = channel_vector(&rx.placement, paths_sr, region.wavelength());
    let h2 = channel_vector(&tx.placement, paths_rd, region.wavelength());
    Ok((rx, tx, h1, h2))
}

/// Two-stage position optimization for the decode-and-forward relay:
/// ascend ‖h₁‖² over the receive placement, independently ascend ‖h₂‖²
/// over the transmit placement, and report the resulting rate.
pub fn optimize_df(
    paths_sr: &PathSet,
    paths_rd: &PathSet,
    region: &Region,
    params: &SystemParams,
    schedule: &PgaSchedule,
    init_rx: &Placement,
    init_tx: &Placement,
) -> Result<OptimizeResult> {
    let (rx, tx, h1, h2) = optimize_positions(paths_sr, paths_rd, region, schedule, init_rx, init_tx)?;
    let rate = rate_df(&h1, &h2, params)?;
    Ok(OptimizeResult {
        placement_rx: rx.placement,
        placement_tx: tx.placement,
        gain_rx: rx.gain,
        gain_tx: tx.gain,
        trace_rx: rx.trace,
        trace_tx: tx.trace,
        rate,
        beamformer: None,
    })
}

/// Amplify-and-forward pipeline: the identical two-stage position
/// optimization, followed by the optimal beamformer construction for the
/// optimized channels. The placements are bit-identical to the
/// decode-and-forward ones from the same inputs.
pub fn optimize_af(
    paths_sr: &PathSet,
    paths_rd: &PathSet,
    region: &Region,
    params: &SystemParams,
    schedule: &PgaSchedule,
    init_rx: &Placement,
    init_tx: &Placement,
) -> Result<OptimizeResult> {
    let (rx, tx, h1, h2) = optimize_positions(paths_sr, paths_rd, region, schedule, init_rx, init_tx)?;
    let beamformer = af_beamformer(&h1, &h2, params)?;
    let rate = rate_af(&h1, &h2, beamformer.matrix(), params)?;
    Ok(OptimizeResult {
        placement_rx: rx.placement,
        placement_tx: tx.placement,
        gain_rx: rx.gain,
        gain_tx: tx.gain,
        trace_rx: rx.trace,
        trace_tx: tx.trace,
        rate,
        beamformer: Some(beamformer),
    })
}

/// Initialization strategy for a feasible starting placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Half-wavelength-spaced square grid centered at the origin;
    /// deterministic, identical to the fixed-antenna baseline layout.
    UniformGrid,
    /// Seeded rejection sampling of uniform positions in the region.
    Random { seed: u64 },
}

/// Maximum placement attempts per antenna in random mode.
const MAX_REJECTION_ATTEMPTS: usize = 10_000;

/// Builds a feasible placement of `n` antennas in the region.
pub fn feasible_init(n: usize, region: &Region, mode: InitMode) -> Result<Placement> {
    match mode {
        InitMode::UniformGrid => {
            let placement = fpa_layout(n, region)?;
            placement.validate(region).map_err(|e| {
                Error::InfeasibleGeometry(format!("uniform grid violates the spacing constraint: {e}"))
            })?;
            Ok(placement)
        }
        InitMode::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = region.half_side();
            let mut accepted: Vec<Position> = Vec::with_capacity(n);
            for antenna in 0..n {
                let mut placed = false;
                for _ in 0..MAX_REJECTION_ATTEMPTS {
                    let cand = Position::new(rng.random_range(-h..=h), rng.random_range(-h..=h));
                    if accepted.iter().all(|p| p.distance(&cand) >= region.min_spacing()) {
                        accepted.push(cand);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(Error::InfeasibleGeometry(format!(
                        "could not place antenna {antenna} of {n} at spacing {} within {} attempts",
                        region.min_spacing(),
                        MAX_REJECTION_ATTEMPTS
                    )));
                }
            }
            let placement = Placement::new(accepted)?;
            placement.validate(region)?;
            Ok(placement)
        }
    }
}
