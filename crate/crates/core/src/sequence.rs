//! Deterministic low-discrepancy sequences used to pick audit locations.

/// Radical inverse of `index` in the given base (the van der Corput /
/// one-dimensional Halton point).
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * factor;
        index /= base;
        factor *= inv;
    }
    value
}

/// First `count` Halton points in base 2, skipping index 0.
pub fn halton(count: usize) -> impl Iterator<Item = f64> {
    (1..=count as u64).map(|i| radical_inverse(i, 2))
}
