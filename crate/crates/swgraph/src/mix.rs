//! Tiny counter-based hash used for per-(site, round) contraction coins and
//! per-edge sampling levels. Keyed hashing keeps every decision reproducible
//! from the structure seed alone, independent of platform or process.

const M1: u64 = 0x9e37_79b9_7f4a_7c15;
const M2: u64 = 0xbf58_476d_1ce4_e5b9;
const M3: u64 = 0x94d0_49bb_1331_11eb;

#[inline]
fn finalize(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(M2);
    x ^= x >> 27;
    x = x.wrapping_mul(M3);
    x ^= x >> 31;
    x
}

/// Mixes three words into one well-scrambled word.
#[inline]
pub fn mix3(a: u64, b: u64, c: u64) -> u64 {
    let x = a
        .wrapping_add(b.wrapping_mul(M1))
        .wrapping_add(c.wrapping_mul(M2));
    finalize(finalize(x).wrapping_add(M1))
}

/// Fair coin keyed by `(seed, id, round)`.
#[inline]
pub fn coin(seed: u64, id: u64, round: u64) -> bool {
    mix3(seed, id, round) & 1 == 1
}

/// Geometric level: number of consecutive successful halvings, so
/// `P(level >= i) = 2^-i`. Capped at 63.
#[inline]
pub fn geometric_level(seed: u64, id: u64, salt: u64) -> u32 {
    mix3(seed, id, salt).trailing_ones()
}
