//! Schedule-independent per-trial seeds.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of a group key (as 64-bit words) and a trial index.
pub fn stable_hash(key: &[u64], trial: u64) -> u64 {
    let mut h = mix(key.len() as u64);
    for &w in key {
        h = mix(h ^ w);
    }
    mix(h ^ trial)
}

/// `base_seed XOR stable_hash(key, trial)`.
pub fn derive_seed(base_seed: u64, key: &[u64], trial: u64) -> u64 {
    base_seed ^ stable_hash(key, trial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_values() {
        // Pinned so that published seeds stay valid across releases.
        assert_eq!(mix(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(0, &[], 0), stable_hash(&[], 0));
    }

    #[test]
    fn distinct_keys_and_trials() {
        let a = derive_seed(7, &[55], 0);
        assert_ne!(a, derive_seed(7, &[55], 1));
        assert_ne!(a, derive_seed(7, &[70], 0));
        assert_ne!(derive_seed(7, &[1, 2], 0), derive_seed(7, &[2, 1], 0));
        assert_eq!(a, derive_seed(7, &[55], 0));
    }
}
