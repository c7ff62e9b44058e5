//! Deterministic seed derivation for campaign trials.
//!
//! Trial seeds are derived by absorbing the base seed, the sweep value's
//! bit pattern, and the trial index into a SplitMix64-style mixing chain.
//! Keying on the sweep *value* (not its list position) means adding or
//! reordering sweep values never changes the realizations of existing
//! trials. The derivation is part of the output contract: identical
//! configs reproduce identical CSVs on any platform.

/// SplitMix64 finalizer: a fixed-point-free bijection on u64 with good
/// avalanche behavior.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one trial: `mix(mix(mix(base) ^ sweep_bits) ^ trial_index)`.
///
/// `sweep_value_bits` is the IEEE-754 bit pattern of the sweep value as an
/// `f64` (antenna counts are converted to `f64` first).
pub fn child_seed(base_seed: u64, sweep_value_bits: u64, trial_index: u64) -> u64 {
    mix64(mix64(mix64(base_seed) ^ sweep_value_bits) ^ trial_index)
}

/// The two per-side path-realization seeds of a trial: the receive side
/// uses `mix(trial_seed ^ 1)`, the transmit side `mix(trial_seed ^ 2)`.
pub fn path_seeds(trial_seed: u64) -> (u64, u64) {
    (mix64(trial_seed ^ 1), mix64(trial_seed ^ 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_frozen() {
        // Pinned values: any change to the mixing chain breaks output
        // reproducibility and must show up here.
        let c = child_seed(42, 10.0f64.to_bits(), 5);
        assert_eq!(c, 16434929031468552919);
        assert_eq!(path_seeds(c), (10971850918683813838, 9622175551309822887));
    }

    #[test]
    fn distinct_inputs_give_distinct_seeds() {
        let a = child_seed(42, 10f64.to_bits(), 0);
        let b = child_seed(42, 10f64.to_bits(), 1);
        let c = child_seed(42, 12f64.to_bits(), 0);
        let d = child_seed(43, 10f64.to_bits(), 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
        let (sr, rd) = path_seeds(a);
        assert_ne!(sr, rd);
    }

    #[test]
    fn adding_sweep_values_does_not_perturb_existing_trials() {
        let before = child_seed(7, 4f64.to_bits(), 3);
        // The same (base, value, trial) triple is independent of any other
        // values in the sweep list by construction.
        let after = child_seed(7, 4f64.to_bits(), 3);
        assert_eq!(before, after);
    }
}
