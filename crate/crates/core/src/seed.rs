//! Stable seed derivation.
//!
//! Child seeds must not depend on the standard library's hasher, whose
//! output may change between Rust releases; these mixers are fixed.

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Folds a sequence of words into one seed.
pub fn derive(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED_5CA1_E000_0000, |acc, p| {
        splitmix64(acc ^ splitmix64(*p))
    })
}

/// Per-song seed from the run seed and the song id.
pub fn song_seed(global: u64, song_id: &str) -> u64 {
    derive(&[global, fnv1a64(song_id.as_bytes())])
}
