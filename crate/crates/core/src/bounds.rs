//! Closed-form upper bounds on the achievable rates.
//!
//! With an arbitrarily large moving region every antenna can reach a
//! position where all path phases align, so the per-antenna channel gain is
//! bounded by the squared sum of coefficient magnitudes and the placement
//! gain by `N` times that ([`gain_upper_bound`]). Substituting the bound
//! into the two rate expressions gives the deterministic per-realization
//! bounds [`rate_df_upper`] and [`rate_af_upper`].
//!
//! Averaging over random path coefficients gives the average-rate bounds.
//! For decode-and-forward this needs the distribution of a sum of i.i.d.
//! Rayleigh magnitudes, approximated by the standard chi-shaped form with
//! the double-factorial-matched parameter ([`rayleigh_sum_cdf`] /
//! [`rayleigh_sum_pdf`]); the expectation of the minimum then has the
//! closed form evaluated by [`min_square_moment_split`]. The approximation
//! error is quantified against Monte Carlo in the tests rather than assumed
//! away. For amplify-and-forward only the exact second moment
//! `ρ²(1 + (L−1)π/4)` is needed.
//!
//! Factorial-type quantities are evaluated through log-gamma sums so the
//! formulas stay finite well beyond the path counts used in practice.

use crate::channel::PathSet;
use crate::rate::SystemParams;
use crate::{Error, Result};

/// ln(n!) as a sum of logs, i.e. the log-gamma function at integer
/// arguments. Exact to f64 rounding for the small n used here and immune
/// to the overflow that hits n! itself past n = 170.
fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// ln((2n−1)!!) via (2n−1)!! = (2n)! / (2ⁿ·n!).
fn ln_double_factorial_odd(n: usize) -> f64 {
    ln_factorial(2 * n) - (n as f64) * 2f64.ln() - ln_factorial(n)
}

/// Constants of the average-rate bounds.
///
/// `alpha1`/`alpha2` parameterize the approximate distribution of the two
/// per-hop Rayleigh-magnitude sums (SNR-scaled); `v1`/`v2` are the exact
/// second moments `ρ²(1 + (L−1)π/4)` of the unscaled sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AarParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl AarParams {
    /// Computes the constants for given path counts and average powers.
    ///
    /// The sum of `L` i.i.d. Rayleigh magnitudes with per-path mean square
    /// `m` is approximated by the chi-shaped distribution whose parameter
    /// is `(m/2)·[(2L−1)!!]^{1/L}`; here `m` is the per-path mean square
    /// after SNR scaling, `ρ²·P/(L·σ²)`.
    pub fn new(l_r: usize, l_t: usize, rho1_sq: f64, rho2_sq: f64, params: &SystemParams) -> Result<Self> {
        if l_r == 0 || l_t == 0 {
            return Err(Error::InvalidArgument("path counts must be at least 1".into()));
        }
        for (name, v) in [("rho1_sq", rho1_sq), ("rho2_sq", rho2_sq)] {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        let alpha = |l: usize, rho_sq: f64, power: f64, noise: f64| {
            let df_root = (ln_double_factorial_odd(l) / l as f64).exp();
            rho_sq * power * df_root / (2.0 * l as f64 * noise)
        };
        let moment = |l: usize, rho_sq: f64| rho_sq * (1.0 + (l as f64 - 1.0) * std::f64::consts::PI / 4.0);
        Ok(Self {
            alpha1: alpha(l_r, rho1_sq, params.p_source(), params.noise_relay()),
            alpha2: alpha(l_t, rho2_sq, params.p_relay(), params.noise_dest()),
            v1: moment(l_r, rho1_sq),
            v2: moment(l_t, rho2_sq),
        })
    }
}

/// Upper bound on the placement channel gain: `N·(Σ|c_ℓ|)²`, attained when
/// every antenna sits where all path phases align.
pub fn gain_upper_bound(paths: &PathSet, num_antennas: usize) -> f64 {
    num_antennas as f64 * paths.coeff_abs_sum().powi(2)
}

/// Deterministic upper bound on the decode-and-forward rate:
/// `½·log₂(1 + N·min{P_s·G₁/σ_r², P_r·G₂/σ_d²})` with `Gᵢ = (Σ|c_ℓ|)²`.
pub fn rate_df_upper(g1: &PathSet, f2: &PathSet, params: &SystemParams) -> f64 {
    let n = params.num_antennas() as f64;
    let s1 = params.p_source() * g1.coeff_abs_sum().powi(2) / params.noise_relay();
    let s2 = params.p_relay() * f2.coeff_abs_sum().powi(2) / params.noise_dest();
    0.5 * (1.0 + n * s1.min(s2)).log2()
}

/// Deterministic upper bound on the amplify-and-forward rate with the
/// optimal beamformer at best-case gains.
pub fn rate_af_upper(g1: &PathSet, f2: &PathSet, params: &SystemParams) -> f64 {
    af_rate_from_gains(
        g1.coeff_abs_sum().powi(2),
        f2.coeff_abs_sum().powi(2),
        params,
    )
}

/// `½·log₂(1 + N²·P_s·P_r·G₁·G₂ / (N·σ_r²·P_r·G₂ + N·σ_d²·P_s·G₁ + σ_r²σ_d²))`,
/// i.e. the optimal-beamformer AF rate at per-antenna gains `N·G₁`, `N·G₂`.
fn af_rate_from_gains(g1: f64, g2: f64, params: &SystemParams) -> f64 {
    let n = params.num_antennas() as f64;
    0.5 * (1.0 + crate::rate::af_snr_optimal(n * g1, n * g2, params)).log2()
}

/// The two halves of `E[min{X̃², Ỹ²}]` for independent chi-shaped variables
/// with `(l_r, alpha1)` and `(l_t, alpha2)`:
///
/// `I₁ = Σ_{k=0}^{l_r−1} 2·α₁^{l_t+1}·α₂^{k+1}·(k+l_t)! /
///       ((α₁+α₂)^{k+l_t+1}·k!·(l_t−1)!)`
///
/// and `I₂` with the two roles swapped. Terms are evaluated in log space.
pub fn min_square_moment_split(l_r: usize, l_t: usize, alpha1: f64, alpha2: f64) -> (f64, f64) {
    let half = |l_a: usize, l_b: usize, a: f64, b: f64| {
        let ln_sum = (a + b).ln();
        (0..l_a)
            .map(|k| {
                (2f64.ln() + (l_b as f64 + 1.0) * a.ln() + (k as f64 + 1.0) * b.ln()
                    + ln_factorial(k + l_b)
                    - (k as f64 + l_b as f64 + 1.0) * ln_sum
                    - ln_factorial(k)
                    - ln_factorial(l_b - 1))
                .exp()
            })
            .sum()
    };
    (half(l_r, l_t, alpha1, alpha2), half(l_t, l_r, alpha2, alpha1))
}

/// Closed-form upper bound on the average decode-and-forward rate:
/// `½·log₂(1 + N·(I₁ + I₂))` with the split moments from
/// [`min_square_moment_split`] at the [`AarParams`] constants.
pub fn aar_df_upper(l_r: usize, l_t: usize, rho1_sq: f64, rho2_sq: f64, params: &SystemParams) -> Result<f64> {
    let aar = AarParams::new(l_r, l_t, rho1_sq, rho2_sq, params)?;
    let (i1, i2) = min_square_moment_split(l_r, l_t, aar.alpha1, aar.alpha2);
    let n = params.num_antennas() as f64;
    Ok(0.5 * (1.0 + n * i1 + n * i2).log2())
}

/// Closed-form upper bound on the average amplify-and-forward rate, using
/// the exact second moments `V₁`, `V₂` in the AF SNR expression.
pub fn aar_af_upper(l_r: usize, l_t: usize, rho1_sq: f64, rho2_sq: f64, params: &SystemParams) -> Result<f64> {
    let aar = AarParams::new(l_r, l_t, rho1_sq, rho2_sq, params)?;
    Ok(af_rate_from_gains(aar.v1, aar.v2, params))
}

fn check_rayleigh_args(zeta: f64, l: usize, alpha: f64) -> Result<()> {
    if zeta < 0.0 || !zeta.is_finite() {
        return Err(Error::InvalidArgument(format!("zeta must be nonnegative, got {zeta}")));
    }
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// CDF of the chi-shaped approximation to a sum of `l` i.i.d. Rayleigh
/// magnitudes: `1 − e^{−ζ²/2α}·Σ_{k=0}^{l−1} (ζ²/2α)^k / k!`.
pub fn rayleigh_sum_cdf(zeta: f64, l: usize, alpha: f64) -> Result<f64> {
    check_rayleigh_args(zeta, l, alpha)?;
    let q = zeta * zeta / (2.0 * alpha);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..l {
        term *= q / k as f64;
        sum += term;
    }
    Ok(1.0 - (-q).exp() * sum)
}

/// Density matching [`rayleigh_sum_cdf`]:
/// `ζ^{2l−1}·e^{−ζ²/2α} / (2^{l−1}·α^l·(l−1)!)`.
pub fn rayleigh_sum_pdf(zeta: f64, l: usize, alpha: f64) -> Result<f64> {
    check_rayleigh_args(zeta, l, alpha)?;
    if zeta == 0.0 {
        return Ok(0.0);
    }
    let ln_pdf = (2.0 * l as f64 - 1.0) * zeta.ln() - zeta * zeta / (2.0 * alpha)
        - (l as f64 - 1.0) * 2f64.ln()
        - l as f64 * alpha.ln()
        - ln_factorial(l - 1);
    Ok(ln_pdf.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_gain, sample_paths, PathSet, Position};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs())
    }

    fn unit_path_set(abs: &[f64]) -> PathSet {
        let coeffs: Vec<Complex64> = abs.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        let l = abs.len();
        PathSet::new(vec![0.1; l], vec![0.2; l], coeffs, 1.0).unwrap()
    }

    #[test]
    fn gain_upper_bound_direct() {
        let paths = PathSet::new(
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
            1.0,
        )
        .unwrap();
        assert!(close(gain_upper_bound(&paths, 2), 3.92, 1e-12));
        let single = unit_path_set(&[1.0]);
        assert!(close(gain_upper_bound(&single, 1), 1.0, 1e-12));
    }

    #[test]
    fn gain_upper_bound_dominates_random_search() {
        // Random single-antenna placements in a 20λ box never beat the
        // bound, and the best of them gets reasonably close to it. Full
        // phase alignment needs a growing region, so only a coarse floor is
        // asserted for the approach.
        let paths = sample_paths(5, 1.0, 2024).unwrap();
        let bound = gain_upper_bound(&paths, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut best = 0.0f64;
        for _ in 0..10_000 {
            let p = Position::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
            let g = channel_gain(p, &paths, 1.0);
            assert!(g <= bound + 1e-9);
            best = best.max(g);
        }
        assert!(best >= 0.9 * bound, "best {best} vs bound {bound}");
    }

    #[test]
    fn rate_df_upper_direct() {
        let params = SystemParams::symmetric(1, 10.0).unwrap();
        let g1 = unit_path_set(&[1.0]);
        let f2 = unit_path_set(&[1.0]);
        let r = rate_df_upper(&g1, &f2, &params);
        assert!(close(r, 0.5 * 11f64.log2(), 1e-12));
        let zero = unit_path_set(&[0.0, 0.0]);
        assert_eq!(rate_df_upper(&zero, &f2, &params), 0.0);
    }

    #[test]
    fn rate_af_upper_direct() {
        let params = SystemParams::symmetric(1, 10.0).unwrap();
        let g1 = unit_path_set(&[1.0]);
        let f2 = unit_path_set(&[1.0]);
        let r = rate_af_upper(&g1, &f2, &params);
        assert!(close(r, 0.5 * (1.0 + 100.0 / 21.0f64).log2(), 1e-12), "rate {r}");
        // Frozen value of the same expression.
        assert!(close(r, 1.263_272_907_247_917, 1e-12));
        let zero = unit_path_set(&[0.0]);
        assert_eq!(rate_af_upper(&zero, &f2, &params), 0.0);
    }

    #[test]
    fn deterministic_bounds_dominate_random_placements() {
        use crate::channel::{channel_vector, Placement};
        use crate::rate::{af_beamformer, rate_af, rate_df};
        let params = SystemParams::symmetric(3, 10.0).unwrap();
        let g1 = sample_paths(4, 1.0, 5).unwrap();
        let f2 = sample_paths(4, 1.0, 6).unwrap();
        let df_up = rate_df_upper(&g1, &f2, &params);
        let af_up = rate_af_upper(&g1, &f2, &params);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let mut pos = Vec::new();
            for _ in 0..3 {
                pos.push(Position::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)));
            }
            let placement = Placement::new(pos).unwrap();
            let h1 = channel_vector(&placement, &g1, 1.0);
            let h2 = channel_vector(&placement, &f2, 1.0);
            assert!(rate_df(&h1, &h2, &params).unwrap() <= df_up + 1e-9);
            let w = af_beamformer(&h1, &h2, &params).unwrap();
            assert!(rate_af(&h1, &h2, w.matrix(), &params).unwrap() <= af_up + 1e-9);
        }
    }

    #[test]
    fn aar_params_reduce_at_single_path() {
        let params = SystemParams::new(1, 10.0, 8.0, 2.0, 4.0).unwrap();
        let aar = AarParams::new(1, 1, 3.0, 5.0, &params).unwrap();
        assert!(close(aar.alpha1, 3.0 * 10.0 / (2.0 * 2.0), 1e-12));
        assert!(close(aar.alpha2, 5.0 * 8.0 / (2.0 * 4.0), 1e-12));
        assert!(close(aar.v1, 3.0, 1e-12));
        assert!(close(aar.v2, 5.0, 1e-12));
    }

    #[test]
    fn aar_df_upper_single_path_closed_form() {
        let params = SystemParams::symmetric(1, 10.0).unwrap();
        let aar = AarParams::new(1, 1, 1.0, 1.0, &params).unwrap();
        assert!(close(aar.alpha1, 5.0, 1e-12));
        let (i1, i2) = min_square_moment_split(1, 1, aar.alpha1, aar.alpha2);
        assert!(close(i1, 2.5, 1e-12));
        assert!(close(i2, 2.5, 1e-12));
        let r = aar_df_upper(1, 1, 1.0, 1.0, &params).unwrap();
        assert!(close(r, 0.5 * 6f64.log2(), 1e-12));
        // With both sums exponential-squared, I₁+I₂ is the mean of the
        // minimum of two exponentials with means 2α₁ and 2α₂.
        let asym = AarParams::new(1, 1, 2.0, 0.5, &params).unwrap();
        let (j1, j2) = min_square_moment_split(1, 1, asym.alpha1, asym.alpha2);
        let expect = 2.0 * asym.alpha1 * asym.alpha2 / (asym.alpha1 + asym.alpha2);
        assert!(rel_close(j1 + j2, expect, 1e-12));
    }

    #[test]
    fn min_moment_matches_single_branch_in_the_large_alpha_limit() {
        // When one branch is far larger, the minimum is the other branch
        // alone, whose mean square under the chi-shaped form is 2·l·α.
        let l_t = 4;
        let alpha2 = 1.7;
        let (i1, i2) = min_square_moment_split(3, l_t, 1e9 * alpha2, alpha2);
        let expect = 2.0 * l_t as f64 * alpha2;
        assert!(rel_close(i1 + i2, expect, 1e-6), "{} vs {expect}", i1 + i2);
    }

    #[test]
    fn aar_df_upper_matches_monte_carlo_oracle() {
        // Monte Carlo estimate of the average best-case rate, drawing the
        // two coefficient sums directly and applying the phase-aligned gain
        // to each hop.
        let params = SystemParams::symmetric(1, 10.0).unwrap();
        let closed = aar_df_upper(5, 5, 1.0, 1.0, &params).unwrap();
        let draws = 100_000;
        let mut acc = 0.0;
        for seed in 0..draws {
            let g1 = sample_paths(5, 1.0, 40_000_000 + seed).unwrap();
            let f2 = sample_paths(5, 1.0, 41_000_000 + seed).unwrap();
            let x2 = params.p_source() * g1.coeff_abs_sum().powi(2) / params.noise_relay();
            let y2 = params.p_relay() * f2.coeff_abs_sum().powi(2) / params.noise_dest();
            acc += 0.5 * (1.0 + x2.min(y2)).log2();
        }
        let mc = acc / draws as f64;
        assert!(
            (closed - mc).abs() / mc < 0.03,
            "closed {closed} vs Monte Carlo {mc}"
        );
    }

    #[test]
    fn aar_af_upper_values() {
        let params = SystemParams::symmetric(1, 10.0).unwrap();
        let r = aar_af_upper(1, 1, 1.0, 1.0, &params).unwrap();
        assert!(close(r, 1.263_272_907_247_917, 1e-12), "rate {r}");
        let aar = AarParams::new(5, 5, 1.0, 1.0, &params).unwrap();
        assert!(close(aar.v1, 1.0 + std::f64::consts::PI, 1e-12));
        // Monotone in the antenna count.
        let mut prev = r;
        for n in [2usize, 4, 8, 16] {
            let p = params.with_num_antennas(n).unwrap();
            let next = aar_af_upper(1, 1, 1.0, 1.0, &p).unwrap();
            assert!(next > prev, "bound not increasing at n={n}");
            prev = next;
        }
    }

    #[test]
    fn rayleigh_sum_cdf_pdf_boundaries() {
        for l in 1..=6 {
            assert_eq!(rayleigh_sum_cdf(0.0, l, 1.3).unwrap(), 0.0);
            assert_eq!(rayleigh_sum_pdf(0.0, l, 1.3).unwrap(), 0.0);
            assert!(close(rayleigh_sum_cdf(1e6, l, 1.3).unwrap(), 1.0, 1e-12));
        }
        assert!(rayleigh_sum_cdf(-0.1, 2, 1.0).is_err());
        assert!(rayleigh_sum_pdf(-0.1, 2, 1.0).is_err());
        assert!(rayleigh_sum_cdf(1.0, 0, 1.0).is_err());
        assert!(rayleigh_sum_cdf(1.0, 2, 0.0).is_err());
    }

    #[test]
    fn pdf_integrates_to_cdf_difference() {
        // Composite Simpson over [0, 50√α].
        for l in 1..=6 {
            let alpha = 0.9f64;
            let hi = 50.0 * alpha.sqrt();
            let n = 200_000;
            let h = hi / n as f64;
            let mut acc = rayleigh_sum_pdf(0.0, l, alpha).unwrap() + rayleigh_sum_pdf(hi, l, alpha).unwrap();
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * rayleigh_sum_pdf(k as f64 * h, l, alpha).unwrap();
            }
            let integral = acc * h / 3.0;
            let cdf_diff = rayleigh_sum_cdf(hi, l, alpha).unwrap() - rayleigh_sum_cdf(0.0, l, alpha).unwrap();
            assert!(close(integral, cdf_diff, 1e-6), "l={l}: {integral} vs {cdf_diff}");
        }
    }

    #[test]
    fn cdf_derivative_matches_pdf() {
        let h = 1e-6;
        for l in 1..=6 {
            for &z in &[0.3, 0.9, 1.7, 3.1] {
                let alpha = 1.1;
                let d = (rayleigh_sum_cdf(z + h, l, alpha).unwrap() - rayleigh_sum_cdf(z - h, l, alpha).unwrap())
                    / (2.0 * h);
                let p = rayleigh_sum_pdf(z, l, alpha).unwrap();
                assert!((d - p).abs() <= 1e-6 * p.max(1.0), "l={l} z={z}: {d} vs {p}");
            }
        }
    }
}
