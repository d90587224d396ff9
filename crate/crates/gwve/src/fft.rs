//! In-place radix-2 complex FFT, just large enough for pmf recovery.
//!
//! `exact::law_of_zn` evaluates a composed pgf at the K-th roots of unity and
//! needs the inverse transform `p_k = (1/K) Σ_j g_j ω^{-jk}` to read off
//! coefficients.  K is always a power of two here, so a plain iterative
//! Cooley-Tukey pass is all that's required; no external FFT crate is pulled
//! in (the core stays `no_std`).

use alloc::vec::Vec;
use num_complex::Complex64;
// Needed for f64 math in no_std builds; redundant (and flagged unused) under
// cfg(test), where the harness links std and its inherent methods win.
#[allow(unused_imports)]
use num_traits::Float;

/// In-place transform with kernel `exp(sign · 2πi jk / K)`.
///
/// `sign = -1.0` gives the forward DFT convention `Σ x_j e^{-2πi jk/K}`;
/// no normalization is applied.
pub fn fft_in_place(x: &mut [Complex64], sign: f64) {
    let k = x.len();
    debug_assert!(k.is_power_of_two());
    if k <= 1 {
        return;
    }

    // Bit-reversal permutation.
    let bits = k.trailing_zeros();
    for i in 0..k {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            x.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= k {
        let ang = sign * 2.0 * core::f64::consts::PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        for chunk in x.chunks_mut(len) {
            let mut w = Complex64::new(1.0, 0.0);
            let half = len / 2;
            for i in 0..half {
                let u = chunk[i];
                let v = chunk[i + half] * w;
                chunk[i] = u + v;
                chunk[i + half] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
}

/// Roots of unity `ω^j = exp(2πi j / K)` for `j = 0..K/2` (the upper half is
/// recovered by conjugate symmetry at the call site).
pub fn half_spectrum_roots(k: usize) -> Vec<Complex64> {
    debug_assert!(k.is_power_of_two());
    let mut out = Vec::with_capacity(k / 2 + 1);
    for j in 0..=(k / 2) {
        let ang = 2.0 * core::f64::consts::PI * j as f64 / k as f64;
        out.push(Complex64::new(ang.cos(), ang.sin()));
    }
    out
}
