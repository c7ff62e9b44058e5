//! Built-in self checks behind the CLI `validate` subcommand.
//!
//! Each check re-derives a core quantity by an independent route (finite
//! differences, dense linear algebra, quadrature, Monte Carlo) and compares
//! against the closed-form implementation at a fixed tolerance. All checks
//! are seeded and deterministic.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    aar_df_upper, min_square_moment_split, rate_af_upper, rate_df_upper, rayleigh_sum_cdf, rayleigh_sum_pdf,
    AarParams,
};
use crate::channel::{channel_gain, channel_vector, sample_paths, Placement, Position};
use crate::optimizer::gain_gradient;
use crate::rate::{af_beamformer, af_beamformer_oracle, rate_af, rate_df, relay_power, SystemParams};
use crate::Result;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation and the tolerance it is held to.
    pub detail: String,
}

/// Runs the whole suite; `fast` trades sample counts for runtime.
pub fn run_all(fast: bool) -> Result<Vec<CheckReport>> {
    Ok(vec![
        gradient_check(if fast { 100 } else { 1000 })?,
        oracle_equivalence_check(if fast { 25 } else { 250 })?,
        bound_dominance_check(if fast { 100 } else { 1000 })?,
        moment_identity_check(if fast { 20_000 } else { 100_000 })?,
        integral_consistency_check(if fast { 4 } else { 6 })?,
    ])
}

/// Closed-form gain gradient against central finite differences.
fn gradient_check(instances: usize) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e61);
    let step = 1e-6;
    let mut worst = 0.0f64;
    for i in 0..instances {
        let l = 2 + (i % 7);
        let paths = sample_paths(l, 1.0, 0x1000 + i as u64)?;
        let p = Position::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let g = gain_gradient(p, &paths, 1.0);
        let fx = (channel_gain(Position::new(p.x + step, p.y), &paths, 1.0)
            - channel_gain(Position::new(p.x - step, p.y), &paths, 1.0))
            / (2.0 * step);
        let fy = (channel_gain(Position::new(p.x, p.y + step), &paths, 1.0)
            - channel_gain(Position::new(p.x, p.y - step), &paths, 1.0))
            / (2.0 * step);
        let err = ((g[0] - fx).powi(2) + (g[1] - fy).powi(2)).sqrt();
        let scale = (fx * fx + fy * fy).sqrt().max(1e-9);
        worst = worst.max(err / scale);
    }
    Ok(CheckReport {
        name: "gradient_finite_difference",
        passed: worst < 1e-5,
        detail: format!("worst relative error {worst:.3e} (tolerance 1e-5, {instances} instances)"),
    })
}

/// Rank-one construction against the vectorized dense solver.
fn oracle_equivalence_check(instances_per_n: usize) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f72);
    let mut worst_rate = 0.0f64;
    let mut worst_rank = 0.0f64;
    let mut worst_slack = 0.0f64;
    for &n in &[1usize, 2, 4, 8] {
        let params = SystemParams::symmetric(n, 10.0)?;
        for _ in 0..instances_per_n {
            let draw = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
                (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
            };
            let h1 = draw(&mut rng);
            let h2 = draw(&mut rng);
            let direct = af_beamformer(&h1, &h2, &params)?;
            let direct_rate = rate_af(&h1, &h2, direct.matrix(), &params)?;
            let oracle = af_beamformer_oracle(&h1, &h2, &params)?;
            worst_rate = worst_rate.max((direct_rate - oracle.rate).abs() / direct_rate.max(oracle.rate));
            let sv = oracle.matrix.clone().svd(false, false).singular_values;
            if n > 1 {
                worst_rank = worst_rank.max(sv[1] / sv[0]);
            }
            let slack = (relay_power(&oracle.matrix, &h1, &params) - params.p_relay()).abs() / params.p_relay();
            worst_slack = worst_slack.max(slack);
        }
    }
    Ok(CheckReport {
        name: "beamformer_oracle_equivalence",
        passed: worst_rate <= 1e-9 && worst_rank <= 1e-8 && worst_slack <= 1e-9,
        detail: format!(
            "rate gap {worst_rate:.3e} (tol 1e-9), singular ratio {worst_rank:.3e} (tol 1e-8), power slack {worst_slack:.3e} (tol 1e-9)"
        ),
    })
}

/// Deterministic bounds dominate every random placement's rate.
fn bound_dominance_check(instances: usize) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x626f);
    let params = SystemParams::symmetric(3, 10.0)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..instances {
        let g1 = sample_paths(5, 1.0, 0x2000 + i as u64)?;
        let f2 = sample_paths(5, 1.0, 0x3000 + i as u64)?;
        let positions = (0..3)
            .map(|_| Position::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect();
        let placement = Placement::new(positions)?;
        let h1 = channel_vector(&placement, &g1, 1.0);
        let h2 = channel_vector(&placement, &f2, 1.0);
        let df_excess = rate_df(&h1, &h2, &params)? - rate_df_upper(&g1, &f2, &params);
        let w = af_beamformer(&h1, &h2, &params)?;
        let af_excess = rate_af(&h1, &h2, w.matrix(), &params)? - rate_af_upper(&g1, &f2, &params);
        worst = worst.max(df_excess).max(af_excess);
    }
    Ok(CheckReport {
        name: "bound_dominance",
        passed: worst <= 1e-9,
        detail: format!("worst rate-minus-bound {worst:.3e} (tolerance 1e-9, {instances} instances)"),
    })
}

/// Monte Carlo second moment of the coefficient-magnitude sum against the
/// closed form ρ²(1 + (L−1)π/4).
fn moment_identity_check(draws: usize) -> Result<CheckReport> {
    let l = 5;
    let mut acc = 0.0;
    for i in 0..draws {
        let p = sample_paths(l, 1.0, 0x4000_0000 + i as u64)?;
        acc += p.coeff_abs_sum().powi(2);
    }
    let mean = acc / draws as f64;
    let expect = 1.0 + (l as f64 - 1.0) * std::f64::consts::PI / 4.0;
    let rel = (mean - expect).abs() / expect;
    Ok(CheckReport {
        name: "moment_identity",
        passed: rel < 0.02,
        detail: format!("relative deviation {rel:.3e} over {draws} draws (tolerance 2e-2)"),
    })
}

/// Closed-form split moments against direct quadrature of
/// `∫ z²(1−F_a)(z) f_b(z) dz`.
fn integral_consistency_check(max_l: usize) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for l_r in 1..=max_l {
        for l_t in 1..=max_l {
            let params = SystemParams::symmetric(1, 10.0)?;
            let aar = AarParams::new(l_r, l_t, 1.0, 1.0, &params)?;
            let (i1, i2) = min_square_moment_split(l_r, l_t, aar.alpha1, aar.alpha2);
            let q1 = quad_min_half(l_r, aar.alpha1, l_t, aar.alpha2)?;
            let q2 = quad_min_half(l_t, aar.alpha2, l_r, aar.alpha1)?;
            worst = worst.max((i1 - q1).abs() / q1).max((i2 - q2).abs() / q2);
        }
    }
    // Also exercise the DF bound end to end so regressions in the wiring
    // are caught, not just in the split terms.
    let params = SystemParams::symmetric(1, 10.0)?;
    let _ = aar_df_upper(5, 5, 1.0, 1.0, &params)?;
    Ok(CheckReport {
        name: "integral_consistency",
        passed: worst <= 1e-8,
        detail: format!("worst relative gap {worst:.3e} for path counts up to {max_l} (tolerance 1e-8)"),
    })
}

/// Composite-Simpson evaluation of `∫₀^∞ z²(1−F_surv)(z)·f_dens(z) dz`.
fn quad_min_half(l_surv: usize, alpha_surv: f64, l_dens: usize, alpha_dens: f64) -> Result<f64> {
    let hi = 50.0 * alpha_surv.max(alpha_dens).sqrt() * (l_surv.max(l_dens) as f64).sqrt();
    let n = 1 << 19;
    let h = hi / n as f64;
    let f = |z: f64| -> Result<f64> {
        Ok(z * z * (1.0 - rayleigh_sum_cdf(z, l_surv, alpha_surv)?) * rayleigh_sum_pdf(z, l_dens, alpha_dens)?)
    };
    let mut acc = f(0.0)? + f(hi)?;
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(k as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}
