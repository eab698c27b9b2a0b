//! In-place fast Walsh–Hadamard transform (unnormalized).
//!
//! `fwht_in_place` computes `y = H x` where `H` is the Hadamard matrix of
//! order `len` (a power of two) with entries ±1, so `H Hᵀ = len · I`.

/// Smallest power of two >= n (n >= 1).
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Unnormalized Walsh–Hadamard transform; `data.len()` must be a power of two.
pub fn fwht_in_place(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(h * 2) {
            for i in block..block + h {
                let a = data[i];
                let b = data[i + h];
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}
