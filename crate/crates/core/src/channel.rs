//! Field-response channel model.
//!
//! A propagation side (source→relay or relay→destination) is described by a
//! [`PathSet`]: per-path elevation/azimuth angles and complex response
//! coefficients referred to the relay's reference point at the origin. The
//! channel seen by an antenna at position `p` is the conjugated
//! field-response vector at `p` combined with the path coefficients, so the
//! whole channel vector is a deterministic function of the antenna
//! placement. Receive and transmit sides share the same math; only the
//! `PathSet` differs.
//!
//! Random realizations are drawn with [`sample_paths`]: angles uniform on
//! [−π/2, π/2], coefficients circularly-symmetric complex Gaussian with
//! per-path variance `avg_power / L`. The generator is ChaCha8 seeded with
//! a caller-supplied `u64`, which makes every realization a pure function
//! of its seed on every platform.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Relative slack applied to constraint checks so that layouts designed to
/// sit exactly on a boundary (e.g. half-wavelength grids with minimum
/// spacing of half a wavelength) do not fail on floating-point dust.
const CONSTRAINT_SLACK: f64 = 1e-9;

/// A 2-D antenna position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance to another position.
    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One propagation side's multipath description: angles and complex
/// response coefficients, plus the total average power carried by the side.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    elevations: Vec<f64>,
    azimuths: Vec<f64>,
    coefficients: Vec<Complex64>,
    avg_power: f64,
}

impl PathSet {
    /// Builds a path set, validating that all three per-path lists have the
    /// same nonzero length, every angle lies in [−π/2, π/2], and the average
    /// power is positive.
    pub fn new(
        elevations: Vec<f64>,
        azimuths: Vec<f64>,
        coefficients: Vec<Complex64>,
        avg_power: f64,
    ) -> Result<Self> {
        let l = elevations.len();
        if l == 0 {
            return Err(Error::InvalidArgument("path set needs at least one path".into()));
        }
        if azimuths.len() != l || coefficients.len() != l {
            return Err(Error::DimensionMismatch { expected: l, got: azimuths.len().min(coefficients.len()) });
        }
        if !(avg_power > 0.0) {
            return Err(Error::InvalidArgument(format!("avg_power must be positive, got {avg_power}")));
        }
        let in_range = |a: &f64| (-FRAC_PI_2..=FRAC_PI_2).contains(a);
        if !elevations.iter().all(in_range) || !azimuths.iter().all(in_range) {
            return Err(Error::InvalidArgument("angles must lie in [-pi/2, pi/2]".into()));
        }
        Ok(Self { elevations, azimuths, coefficients, avg_power })
    }

    pub fn num_paths(&self) -> usize {
        self.coefficients.len()
    }

    pub fn elevations(&self) -> &[f64] {
        &self.elevations
    }

    pub fn azimuths(&self) -> &[f64] {
        &self.azimuths
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn avg_power(&self) -> f64 {
        self.avg_power
    }

    /// Sum of coefficient magnitudes, the quantity whose square bounds the
    /// per-antenna channel gain.
    pub fn coeff_abs_sum(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).sum()
    }

    /// Per-path spatial frequency pair `(sin θ · cos φ, cos θ)`: the phase
    /// advance per meter of antenna displacement along x and y.
    pub(crate) fn direction_cosines(&self) -> Vec<(f64, f64)> {
        self.elevations
            .iter()
            .zip(&self.azimuths)
            .map(|(&th, &ph)| (th.sin() * ph.cos(), th.cos()))
            .collect()
    }
}

/// Square antenna moving region centered at the origin, plus the minimum
/// inter-antenna spacing and the carrier wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    side_length: f64,
    min_spacing: f64,
    wavelength: f64,
}

impl Region {
    pub fn new(side_length: f64, min_spacing: f64, wavelength: f64) -> Result<Self> {
        for (name, v) in [("side_length", side_length), ("min_spacing", min_spacing), ("wavelength", wavelength)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { side_length, min_spacing, wavelength })
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn min_spacing(&self) -> f64 {
        self.min_spacing
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Half the side length: coordinates live in [−half, half].
    pub fn half_side(&self) -> f64 {
        self.side_length / 2.0
    }

    /// True if the position lies inside the square (with boundary slack).
    pub fn contains(&self, p: Position) -> bool {
        let lim = self.half_side() * (1.0 + CONSTRAINT_SLACK) + f64::MIN_POSITIVE;
        p.x.abs() <= lim && p.y.abs() <= lim
    }
}

/// An ordered list of antenna positions for one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    positions: Vec<Position>,
}

impl Placement {
    pub fn new(positions: Vec<Position>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("placement needs at least one antenna".into()));
        }
        Ok(Self { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn get(&self, n: usize) -> Position {
        self.positions[n]
    }

    pub(crate) fn set(&mut self, n: usize, p: Position) {
        self.positions[n] = p;
    }

    /// Checks the region-containment and pairwise minimum-spacing
    /// constraints, with a small relative slack on both.
    pub fn validate(&self, region: &Region) -> Result<()> {
        for (n, p) in self.positions.iter().enumerate() {
            if !region.contains(*p) {
                return Err(Error::InfeasiblePlacement(format!(
                    "antenna {n} at ({}, {}) is outside the {}x{} region",
                    p.x, p.y, region.side_length, region.side_length
                )));
            }
        }
        let d_min = region.min_spacing * (1.0 - CONSTRAINT_SLACK);
        for i in 0..self.positions.len() {
            for j in (i + 1)..self.positions.len() {
                let d = self.positions[i].distance(&self.positions[j]);
                if d < d_min {
                    return Err(Error::InfeasiblePlacement(format!(
                        "antennas {i} and {j} are {d} m apart, below the minimum spacing {}",
                        region.min_spacing
                    )));
                }
            }
        }
        Ok(())
    }

    /// True if replacing antenna `n` with `candidate` keeps it at least the
    /// minimum spacing away from every other antenna's current position.
    pub(crate) fn spacing_ok(&self, n: usize, candidate: Position, region: &Region) -> bool {
        let d_min = region.min_spacing * (1.0 - CONSTRAINT_SLACK);
        self.positions
            .iter()
            .enumerate()
            .all(|(m, p)| m == n || candidate.distance(p) >= d_min)
    }
}

/// Field-response vector at `position`: one unit-modulus phase factor per
/// path, `exp(j·(2π/λ)·(x·sinθ·cosφ + y·cosθ))`. At the origin this is the
/// all-ones vector. The same function serves the receive and transmit sides;
/// the convention difference is carried entirely by the `PathSet`.
pub fn field_response(position: Position, paths: &PathSet, wavelength: f64) -> Vec<Complex64> {
    let k = 2.0 * PI / wavelength;
    paths
        .elevations
        .iter()
        .zip(&paths.azimuths)
        .map(|(&th, &ph)| {
            let omega = position.x * th.sin() * ph.cos() + position.y * th.cos();
            Complex64::from_polar(1.0, k * omega)
        })
        .collect()
}

/// Channel coefficient of a single antenna at `position`: the conjugated
/// field-response vector dotted with the path coefficients.
pub fn channel_entry(position: Position, paths: &PathSet, wavelength: f64) -> Complex64 {
    let k = 2.0 * PI / wavelength;
    let mut acc = Complex64::ZERO;
    for ((&th, &ph), &c) in paths.elevations.iter().zip(&paths.azimuths).zip(&paths.coefficients) {
        let omega = position.x * th.sin() * ph.cos() + position.y * th.cos();
        acc += Complex64::from_polar(1.0, -k * omega) * c;
    }
    acc
}

/// Channel power gain `|h(position)|²` of a single antenna.
pub fn channel_gain(position: Position, paths: &PathSet, wavelength: f64) -> f64 {
    channel_entry(position, paths, wavelength).norm_sqr()
}

/// Channel vector of a placement: entry `n` is [`channel_entry`] at antenna
/// `n`'s position. With the receive-side path set this is the source→relay
/// channel; with the transmit-side set, the relay→destination channel.
pub fn channel_vector(placement: &Placement, paths: &PathSet, wavelength: f64) -> Vec<Complex64> {
    placement
        .positions
        .iter()
        .map(|&p| channel_entry(p, paths, wavelength))
        .collect()
}

/// Draws a random path realization: elevations and azimuths i.i.d. uniform
/// on [−π/2, π/2], coefficients i.i.d. circularly-symmetric complex Gaussian
/// with per-path variance `avg_power / num_paths`.
///
/// The stream is ChaCha8 keyed by `seed`; the draw order is fixed
/// (elevations, then azimuths, then per-path real/imaginary normal pairs),
/// so a given `(num_paths, avg_power, seed)` always yields the same
/// realization.
pub fn sample_paths(num_paths: usize, avg_power: f64, seed: u64) -> Result<PathSet> {
    if num_paths == 0 {
        return Err(Error::InvalidArgument("num_paths must be at least 1".into()));
    }
    if !(avg_power > 0.0) {
        return Err(Error::InvalidArgument(format!("avg_power must be positive, got {avg_power}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elevations: Vec<f64> = (0..num_paths).map(|_| rng.random_range(-FRAC_PI_2..FRAC_PI_2)).collect();
    let azimuths: Vec<f64> = (0..num_paths).map(|_| rng.random_range(-FRAC_PI_2..FRAC_PI_2)).collect();
    let sigma = (avg_power / (2.0 * num_paths as f64)).sqrt();
    let coefficients: Vec<Complex64> = (0..num_paths)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sigma * re, sigma * im)
        })
        .collect();
    PathSet::new(elevations, azimuths, coefficients, avg_power)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Straight-line re-evaluation of the per-path phase factor, kept
    /// independent of `field_response` on purpose.
    fn frv_oracle(p: Position, th: &[f64], ph: &[f64], lambda: f64) -> Vec<Complex64> {
        th.iter()
            .zip(ph)
            .map(|(&t, &f)| {
                let w = p.x * t.sin() * f.cos() + p.y * t.cos();
                let arg = 2.0 * PI / lambda * w;
                Complex64::new(arg.cos(), arg.sin())
            })
            .collect()
    }

    #[test]
    fn frv_at_reference_point_is_all_ones() {
        let paths = sample_paths(4, 1.0, 9).unwrap();
        for e in field_response(Position::ORIGIN, &paths, 1.0) {
            assert_eq!(e, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn frv_half_wavelength_single_path_is_minus_one() {
        let paths = PathSet::new(vec![FRAC_PI_2], vec![0.0], vec![Complex64::new(1.0, 0.0)], 1.0).unwrap();
        let lambda = 0.125;
        let v = field_response(Position::new(lambda / 2.0, 0.0), &paths, lambda);
        assert_eq!(v.len(), 1);
        assert!(close(v[0].re, -1.0, 1e-12), "re = {}", v[0].re);
        assert!(close(v[0].im, 0.0, 1e-12), "im = {}", v[0].im);
    }

    #[test]
    fn frv_matches_scalar_oracle() {
        let lambda = 0.7;
        let paths = sample_paths(3, 2.0, 31).unwrap();
        let p = Position::new(0.3 * lambda, -0.7 * lambda);
        let got = field_response(p, &paths, lambda);
        let want = frv_oracle(p, paths.elevations(), paths.azimuths(), lambda);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn channel_vector_single_antenna_single_path() {
        let paths = PathSet::new(vec![0.3], vec![-0.2], vec![Complex64::new(0.5, 0.0)], 1.0).unwrap();
        let placement = Placement::new(vec![Position::ORIGIN]).unwrap();
        let h = channel_vector(&placement, &paths, 1.0);
        assert_eq!(h, vec![Complex64::new(0.5, 0.0)]);
    }

    #[test]
    fn channel_vector_identical_positions_are_identical_entries() {
        let paths = PathSet::new(
            vec![0.4, -1.1],
            vec![0.9, 0.2],
            vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
            1.0,
        )
        .unwrap();
        let placement = Placement::new(vec![Position::ORIGIN, Position::ORIGIN]).unwrap();
        let h = channel_vector(&placement, &paths, 1.0);
        let expect = Complex64::new(0.6, 0.8);
        for e in &h {
            assert!((e - expect).norm() < 1e-12);
        }
        let norm_sq: f64 = h.iter().map(|e| e.norm_sqr()).sum();
        assert!(close(norm_sq, 2.0, 1e-12));
    }

    #[test]
    fn channel_vector_matches_double_sum_oracle() {
        let lambda = 1.0;
        let paths = sample_paths(5, 1.0, 77).unwrap();
        let placement = Placement::new(vec![
            Position::new(0.13, -0.42),
            Position::new(-1.7, 0.88),
            Position::new(2.01, 2.5),
        ])
        .unwrap();
        let h = channel_vector(&placement, &paths, lambda);
        for (n, &p) in placement.positions().iter().enumerate() {
            let frv = frv_oracle(p, paths.elevations(), paths.azimuths(), lambda);
            let mut want = Complex64::ZERO;
            for (l, c) in paths.coefficients().iter().enumerate() {
                want += frv[l].conj() * c;
            }
            assert!((h[n] - want).norm() < 1e-12, "entry {n}");
        }
    }

    #[test]
    fn sample_paths_is_deterministic() {
        let a = sample_paths(5, 1.0, 42).unwrap();
        let b = sample_paths(5, 1.0, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_paths(5, 1.0, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_paths_rejects_bad_arguments() {
        assert!(sample_paths(0, 1.0, 1).is_err());
        assert!(sample_paths(5, 0.0, 1).is_err());
        assert!(sample_paths(5, -1.0, 1).is_err());
    }

    #[test]
    fn sample_paths_total_power_moment() {
        // E[Σ|g_l|²] = avg_power by construction.
        let draws = 100_000;
        let mut acc = 0.0;
        for seed in 0..draws {
            let p = sample_paths(5, 1.0, seed).unwrap();
            acc += p.coefficients().iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        let mean = acc / draws as f64;
        assert!(close(mean, 1.0, 0.01), "mean total power {mean}");
    }

    #[test]
    fn sample_paths_abs_sum_square_moment() {
        // E[(Σ|g_l|)²] = avg_power · (1 + (L−1)π/4); Monte Carlo check.
        let l = 5;
        let draws = 100_000;
        let mut acc = 0.0;
        for seed in 0..draws {
            let p = sample_paths(l, 1.0, 1_000_000 + seed).unwrap();
            acc += p.coeff_abs_sum().powi(2);
        }
        let mean = acc / draws as f64;
        let expect = 1.0 + (l as f64 - 1.0) * PI / 4.0;
        assert!(
            (mean - expect).abs() / expect < 0.02,
            "mean {mean} vs expected {expect}"
        );
    }

    #[test]
    fn placement_validation() {
        let region = Region::new(4.0, 0.5, 1.0).unwrap();
        // Exactly on the spacing boundary and on the region edge: both fine.
        let p = Placement::new(vec![Position::new(-2.0, 0.0), Position::new(-1.5, 0.0)]).unwrap();
        p.validate(&region).unwrap();
        let outside = Placement::new(vec![Position::new(2.1, 0.0)]).unwrap();
        assert!(matches!(outside.validate(&region), Err(Error::InfeasiblePlacement(_))));
        let cramped = Placement::new(vec![Position::ORIGIN, Position::new(0.4, 0.0)]).unwrap();
        assert!(matches!(cramped.validate(&region), Err(Error::InfeasiblePlacement(_))));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn angle() -> impl Strategy<Value = f64> {
            -FRAC_PI_2..FRAC_PI_2
        }

        proptest! {
            #[test]
            fn frv_entries_have_unit_modulus(
                x in -20.0f64..20.0,
                y in -20.0f64..20.0,
                th in prop::collection::vec(angle(), 1..8),
                seed in 0u64..1000,
            ) {
                let l = th.len();
                let mut paths = sample_paths(l, 1.0, seed).unwrap();
                paths = PathSet::new(th, paths.azimuths().to_vec(), paths.coefficients().to_vec(), 1.0).unwrap();
                for e in field_response(Position::new(x, y), &paths, 1.0) {
                    prop_assert!((e.norm() - 1.0).abs() <= 1e-12);
                }
            }

            #[test]
            fn gain_bounded_by_abs_sum_square(
                x in -20.0f64..20.0,
                y in -20.0f64..20.0,
                seed in 0u64..1000,
            ) {
                // Per-antenna version of the max-gain bound: |h(p)|² ≤ (Σ|g|)².
                let paths = sample_paths(5, 1.0, seed).unwrap();
                let bound = paths.coeff_abs_sum().powi(2);
                let gain = channel_gain(Position::new(x, y), &paths, 1.0);
                prop_assert!(gain <= bound + 1e-9);
            }

            #[test]
            fn norm_bounded_by_gain_upper_bound(
                xs in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 1..6),
                seed in 0u64..500,
            ) {
                let paths = sample_paths(4, 1.5, seed).unwrap();
                let placement = Placement::new(xs.into_iter().map(|(x, y)| Position::new(x, y)).collect()).unwrap();
                let h = channel_vector(&placement, &paths, 1.0);
                let norm_sq: f64 = h.iter().map(|e| e.norm_sqr()).sum();
                let bound = placement.len() as f64 * paths.coeff_abs_sum().powi(2);
                prop_assert!(norm_sq <= bound + 1e-9);
            }

            #[test]
            fn single_path_gain_is_translation_invariant(
                x in -5.0f64..5.0,
                y in -5.0f64..5.0,
                dx in -5.0f64..5.0,
                dy in -5.0f64..5.0,
                seed in 0u64..1000,
            ) {
                let paths = sample_paths(1, 1.0, seed).unwrap();
                let a = channel_entry(Position::new(x, y), &paths, 1.0);
                let b = channel_entry(Position::new(x + dx, y + dy), &paths, 1.0);
                prop_assert!((a.norm() - b.norm()).abs() <= 1e-12);
            }
        }
    }
}
