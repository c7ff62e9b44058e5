//! End-to-end achievable rates and amplify-and-forward beamforming.
//!
//! Decode-and-forward combines the two hops with maximum-ratio processing,
//! so its rate depends only on the two channel norms. Amplify-and-forward
//! applies an N×N relay matrix `W` that also amplifies relay noise; for
//! fixed channels the optimal `W` is the rank-one matched filter
//! `β·h₂·h₁ᴴ` with `β` chosen so the relay power constraint is met with
//! equality ([`af_beamformer`]).
//!
//! [`af_beamformer_oracle`] solves the same problem by a completely
//! different route: the matrix is vectorized, the power constraint is used
//! to turn the SNR into a generalized Rayleigh quotient over the N²-vector,
//! and the quotient is maximized by a dense linear solve. It exists so that
//! the closed-form construction can be cross-checked numerically, and the
//! two paths are kept independent on purpose.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Relaying strategy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relaying {
    Df,
    Af,
}

impl std::fmt::Display for Relaying {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Relaying::Df => write!(f, "df"),
            Relaying::Af => write!(f, "af"),
        }
    }
}

/// Transmit powers and noise variances, all in linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    num_antennas: usize,
    p_source: f64,
    p_relay: f64,
    noise_relay: f64,
    noise_dest: f64,
}

impl SystemParams {
    pub fn new(num_antennas: usize, p_source: f64, p_relay: f64, noise_relay: f64, noise_dest: f64) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::InvalidArgument("num_antennas must be at least 1".into()));
        }
        for (name, v) in [
            ("p_source", p_source),
            ("p_relay", p_relay),
            ("noise_relay", noise_relay),
            ("noise_dest", noise_dest),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { num_antennas, p_source, p_relay, noise_relay, noise_dest })
    }

    /// Symmetric setup used throughout the experiments: source power equal
    /// to the relay budget, unit noise at both hops.
    pub fn symmetric(num_antennas: usize, power: f64) -> Result<Self> {
        Self::new(num_antennas, power, power, 1.0, 1.0)
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn p_source(&self) -> f64 {
        self.p_source
    }

    pub fn p_relay(&self) -> f64 {
        self.p_relay
    }

    pub fn noise_relay(&self) -> f64 {
        self.noise_relay
    }

    pub fn noise_dest(&self) -> f64 {
        self.noise_dest
    }

    /// Returns a copy with a different antenna count.
    pub fn with_num_antennas(&self, n: usize) -> Result<Self> {
        Self::new(n, self.p_source, self.p_relay, self.noise_relay, self.noise_dest)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.num_antennas {
            return Err(Error::DimensionMismatch { expected: self.num_antennas, got: len });
        }
        Ok(())
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Half-duplex decode-and-forward rate in bits/s/Hz:
/// `½·log₂(1 + min{P_s‖h₁‖²/σ_r², P_r‖h₂‖²/σ_d²})`.
pub fn rate_df(h1: &[Complex64], h2: &[Complex64], params: &SystemParams) -> Result<f64> {
    params.check_len(h1.len())?;
    params.check_len(h2.len())?;
    let snr_hop1 = params.p_source * norm_sqr(h1) / params.noise_relay;
    let snr_hop2 = params.p_relay * norm_sqr(h2) / params.noise_dest;
    Ok(0.5 * (1.0 + snr_hop1.min(snr_hop2)).log2())
}

/// Half-duplex amplify-and-forward rate in bits/s/Hz for a given relay
/// matrix: `½·log₂(1 + P_s|h₂ᴴWh₁|² / (σ_r²‖h₂ᴴW‖² + σ_d²))`.
pub fn rate_af(h1: &[Complex64], h2: &[Complex64], w: &DMatrix<Complex64>, params: &SystemParams) -> Result<f64> {
    params.check_len(h1.len())?;
    params.check_len(h2.len())?;
    if w.nrows() != params.num_antennas || w.ncols() != params.num_antennas {
        return Err(Error::DimensionMismatch { expected: params.num_antennas, got: w.nrows().max(w.ncols()) });
    }
    let h1v = DVector::from_column_slice(h1);
    let h2v = DVector::from_column_slice(h2);
    let wh1 = w * &h1v;
    let signal = h2v.dotc(&wh1).norm_sqr() * params.p_source;
    let wh_h2 = w.ad_mul(&h2v); // (h₂ᴴW)ᴴ
    let noise = params.noise_relay * wh_h2.norm_squared() + params.noise_dest;
    Ok(0.5 * (1.0 + signal / noise).log2())
}

/// Relay transmit power spent by `w` on channel `h1`:
/// `P_s‖Wh₁‖² + σ_r²‖W‖_F²`, the left side of the power constraint.
pub fn relay_power(w: &DMatrix<Complex64>, h1: &[Complex64], params: &SystemParams) -> f64 {
    let h1v = DVector::from_column_slice(h1);
    params.p_source * (w * &h1v).norm_squared() + params.noise_relay * w.norm_squared()
}

/// End-to-end AF SNR under the optimal beamformer, as a function of the
/// two channel gains `g1 = ‖h₁‖²`, `g2 = ‖h₂‖²`:
/// `P_s·P_r·g₁·g₂ / (σ_r²·P_r·g₂ + σ_d²·P_s·g₁ + σ_r²σ_d²)`.
///
/// Monotonically increasing in both gains, which is what lets the position
/// stages and subset selections be optimized on the gains alone.
pub fn af_snr_optimal(g1: f64, g2: f64, params: &SystemParams) -> f64 {
    let num = params.p_source * params.p_relay * g1 * g2;
    let den = params.noise_relay * params.p_relay * g2
        + params.noise_dest * params.p_source * g1
        + params.noise_relay * params.noise_dest;
    num / den
}

/// Optimal AF relay matrix for fixed channels: `W = β·h₂·h₁ᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AfBeamformer {
    matrix: DMatrix<Complex64>,
    scale: f64,
}

impl AfBeamformer {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// The power-normalizing scale factor β.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Builds the optimal AF beamformer `W = β·h₂·h₁ᴴ` with
/// `β = 1/√(‖h₁‖²‖h₂‖²(P_s‖h₁‖² + σ_r²)/P_r)`, which meets the relay power
/// constraint with equality. Zero channel vectors are rejected so callers
/// can distinguish a missing link from a rate that happens to be zero.
pub fn af_beamformer(h1: &[Complex64], h2: &[Complex64], params: &SystemParams) -> Result<AfBeamformer> {
    params.check_len(h1.len())?;
    params.check_len(h2.len())?;
    let g1 = norm_sqr(h1);
    let g2 = norm_sqr(h2);
    if g1 == 0.0 {
        return Err(Error::DegenerateChannel("source-relay channel is zero"));
    }
    if g2 == 0.0 {
        return Err(Error::DegenerateChannel("relay-destination channel is zero"));
    }
    let scale = 1.0 / (g1 * g2 * (params.p_source * g1 + params.noise_relay) / params.p_relay).sqrt();
    let h1v = DVector::from_column_slice(h1);
    let h2v = DVector::from_column_slice(h2);
    let matrix = (h2v * h1v.adjoint()) * Complex64::from(scale);
    Ok(AfBeamformer { matrix, scale })
}

/// Solution of the vectorized AF beamforming problem.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    /// The optimal N²-vector `w★ = ξ·X₃⁻¹·h`.
    pub w_vec: DVector<Complex64>,
    /// `w★` reshaped back into the N×N relay matrix (column-major).
    pub matrix: DMatrix<Complex64>,
    /// AF rate achieved by the reshaped matrix.
    pub rate: f64,
}

/// Solves the fixed-channel AF beamforming problem as a generalized
/// Rayleigh quotient over `w = vec(W)`.
///
/// With `h = h₁* ⊗ h₂`, `A = I ⊗ h₂`, `B = h₁* ⊗ I`, the constraint matrix
/// is `X₂ = P_s·BBᴴ + σ_r²·I` (active at the optimum) and the quotient
/// denominator is `X₃ = σ_r²·AAᴴ + σ_d²·P_r⁻¹·X₂`. The maximizer is
/// `w★ = ξ·X₃⁻¹·h` with `ξ = √(P_r / (uᴴX₂u))`, `u = X₃⁻¹h`; the
/// Hermitian form replaces the matrix square root in the usual
/// normalization. The N²×N² system is solved by dense LU — at the antenna
/// counts used here that is at most a 100×100 solve.
pub fn af_beamformer_oracle(h1: &[Complex64], h2: &[Complex64], params: &SystemParams) -> Result<OracleSolution> {
    params.check_len(h1.len())?;
    params.check_len(h2.len())?;
    if norm_sqr(h1) == 0.0 || norm_sqr(h2) == 0.0 {
        return Err(Error::DegenerateChannel("zero channel vector"));
    }
    let n = params.num_antennas;
    let h1c = DMatrix::from_iterator(n, 1, h1.iter().map(|c| c.conj()));
    let h2m = DMatrix::from_column_slice(n, 1, h2);
    let eye_n = DMatrix::<Complex64>::identity(n, n);

    let h = h1c.kronecker(&h2m); // N² × 1
    let a = eye_n.kronecker(&h2m); // N² × N
    let b = h1c.kronecker(&eye_n); // N² × N

    let eye_n2 = DMatrix::<Complex64>::identity(n * n, n * n);
    let x2 = (&b * b.adjoint()) * Complex64::from(params.p_source) + &eye_n2 * Complex64::from(params.noise_relay);
    let x3 = (&a * a.adjoint()) * Complex64::from(params.noise_relay)
        + &x2 * Complex64::from(params.noise_dest / params.p_relay);

    let h_vec = DVector::from_column_slice(h.as_slice());
    let u = x3
        .lu()
        .solve(&h_vec)
        .ok_or(Error::SingularSystem("quotient denominator matrix did not factor"))?;
    let quad = u.dotc(&(&x2 * &u)).re; // uᴴX₂u, real for Hermitian X₂
    if !(quad > 0.0) {
        return Err(Error::SingularSystem("power form is not positive definite"));
    }
    let xi = (params.p_relay / quad).sqrt();
    let w_vec = u * Complex64::from(xi);
    let matrix = DMatrix::from_column_slice(n, n, w_vec.as_slice());
    let rate = rate_af(h1, h2, &matrix, params)?;
    Ok(OracleSolution { w_vec, matrix, rate })
}
