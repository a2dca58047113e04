//! Slow, independent reference computations used to cross-check the fast paths.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::primes::checked_pow;

/// Trace histogram of `SL₂(ℤ/pᴺ)` by enumerating all `p^{4N}` matrices.
///
/// Entry `b` is `#{g : det g = 1, tr g = b}`. Intended for `p^{4N} ≤ 10⁷`.
pub fn brute_force_trace_counts(p: u64, n: u32) -> Vec<u64> {
    let q = checked_pow(p, n).expect("small modulus");
    let mut hist = vec![0u64; q as usize];
    for a in 0..q {
        for d in 0..q {
            let ad = a * d % q;
            let tr = (a + d) % q;
            for b in 0..q {
                for c in 0..q {
                    if (ad + q * q - b * c) % q == 1 % q {
                        hist[tr as usize] += 1;
                    }
                }
            }
        }
    }
    hist
}

/// `|SL₂(ℤ/pᴺ)| = p^{3N}(1 − p⁻²)` by counting determinant-one matrices.
pub fn brute_force_group_order(p: u64, n: u32) -> u64 {
    brute_force_trace_counts(p, n).iter().sum()
}

/// `∫ f(x) e(−xξ) dx` over `[−L, L]` by composite Simpson quadrature.
pub fn fourier_quadrature(f: impl Fn(f64) -> f64, xi: f64, half_width: f64, panels: usize) -> Complex64 {
    let panels = panels + panels % 2;
    let h = 2.0 * half_width / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=panels {
        let x = -half_width + h * k as f64;
        let w = if k == 0 || k == panels {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += Complex64::from_polar(w * f(x), -2.0 * PI * x * xi);
    }
    acc * (h / 3.0)
}

/// Fourier transform of `1_{pᵏℤ_p}` at `ξ` with additive character `e(ξx)` on
/// `ℚ_p`, computed as a finite average over `pᵏℤ_p / p^Mℤ_p` for `M` deep
/// enough that `ξx` is integral on `p^Mℤ_p`.
///
/// `ξ` is given as `num / p^e` with `p ∤ num` (or `num = 0`).
pub fn padic_indicator_transform_by_sum(p: u64, k: i32, num: i64, e: i32) -> f64 {
    let m = k.max(e);
    // ξ·x for x = pᵏ j, j mod p^{m−k}: phase num·pᵏ·j / pᵉ
    let steps = (p as f64).powi(m - k) as u64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..steps {
        let shift = k - e;
        let phase = if shift >= 0 {
            0.0
        } else {
            let den = (p as f64).powi(-shift);
            ((num as f64) * j as f64 / den).rem_euclid(1.0)
        };
        acc += Complex64::from_polar(1.0, 2.0 * PI * phase);
    }
    // each coset has measure p^{−m}
    acc.re * (p as f64).powi(-m)
}
