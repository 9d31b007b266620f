//! Deterministic seed derivation.
//!
//! Every stochastic kernel derives its RNG stream from a master seed plus a
//! string context via FNV-1a, so results are independent of scheduling and,
//! where the context is a feature name, independent of column order.

/// 64-bit FNV-1a over the given bytes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Derives a child seed from a master seed and a list of context parts.
pub fn derive_seed(master: u64, parts: &[&[u8]]) -> u64 {
    let mut buf = Vec::with_capacity(8 + parts.iter().map(|p| p.len() + 1).sum::<usize>());
    buf.extend_from_slice(&master.to_le_bytes());
    for p in parts {
        buf.push(0x1f); // unit separator keeps ("ab","c") distinct from ("a","bc")
        buf.extend_from_slice(p);
    }
    fnv1a(&buf)
}
