//! The exponential-integrator weight functions
//!
//! ```text
//! phi0(z) = (e^z - 1) / z
//! phi1(z) = (e^z - 1 - z) / z^2
//! phi2(z) = (e^z - 1 - z - z^2/2) / z^3
//! ```
//!
//! The direct quotients cancel catastrophically near `z = 0`. Inside
//! `|z| <= CONTOUR_THRESHOLD` the value is instead taken as the mean of the
//! direct formula over `CONTOUR_POINTS` equispaced points on the unit circle
//! centred at `z` (a trapezoidal Cauchy integral), which is accurate to
//! rounding for these entire functions.

use std::f64::consts::PI;

use num_complex::Complex64;

pub const CONTOUR_THRESHOLD: f64 = 0.5;
pub const CONTOUR_POINTS: usize = 32;
pub const CONTOUR_RADIUS: f64 = 1.0;

/// `1 / k!` for `k = 0, 1, 2, 3`.
const INV_FACT: [f64; 4] = [1.0, 1.0, 0.5, 1.0 / 6.0];

fn direct(k: usize, z: Complex64) -> Complex64 {
    let ez = z.exp();
    match k {
        0 => (ez - 1.0) / z,
        1 => (ez - 1.0 - z) / (z * z),
        2 => (ez - 1.0 - z - z * z * 0.5) / (z * z * z),
        _ => panic!("phi index must be 0, 1 or 2, got {k}"),
    }
}

/// `phi_k(z)` for complex `z`, `k` in `{0, 1, 2}`.
pub fn phi_complex(k: usize, z: Complex64) -> Complex64 {
    if z.norm() > CONTOUR_THRESHOLD {
        return direct(k, z);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..CONTOUR_POINTS {
        let theta = 2.0 * PI * j as f64 / CONTOUR_POINTS as f64;
        acc += direct(k, z + Complex64::from_polar(CONTOUR_RADIUS, theta));
    }
    acc / CONTOUR_POINTS as f64
}

/// `phi_k(x)` for real `x`.
pub fn phi(k: usize, x: f64) -> f64 {
    assert!(k <= 2, "phi index must be 0, 1 or 2, got {k}");
    if x.abs() > CONTOUR_THRESHOLD {
        let ex = x.exp();
        return match k {
            0 => (ex - 1.0) / x,
            1 => (ex - 1.0 - x) / (x * x),
            _ => (ex - 1.0 - x - 0.5 * x * x) / (x * x * x),
        };
    }
    if x == 0.0 {
        return INV_FACT[k + 1];
    }
    phi_complex(k, Complex64::new(x, 0.0)).re
}

/// Elementwise `phi_k` over a slice.
pub fn phi_slice(k: usize, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| phi(k, x)).collect()
}

/// `1 / k!` for `k <= 3`; with this indexing the recurrence reads
/// `z phi_{k+1}(z) = phi_k(z) - 1/(k+1)!`.
pub fn inv_factorial(k: usize) -> f64 {
    INV_FACT[k]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn series(k: usize, z: f64) -> f64 {
        // sum_j z^j / (j + k + 1)!
        let mut term = 1.0;
        for m in 1..=(k + 1) {
            term /= m as f64;
        }
        let mut sum = 0.0;
        for j in 0..30 {
            sum += term;
            term *= z / (j + k + 2) as f64;
        }
        sum
    }

    #[test]
    fn limits_at_zero() {
        assert_eq!(phi(0, 0.0), 1.0);
        assert_eq!(phi(1, 0.0), 0.5);
        assert_eq!(phi(2, 0.0), 1.0 / 6.0);
        for k in 0..3 {
            let z = phi_complex(k, Complex64::new(0.0, 0.0));
            assert_relative_eq!(z.re, INV_FACT[k + 1], epsilon = 1e-15);
            assert!(z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn phi0_at_one() {
        assert_relative_eq!(phi(0, 1.0), std::f64::consts::E - 1.0, epsilon = 1e-15);
    }

    #[test]
    fn small_arguments_match_series() {
        for &z in &[1e-8, -1e-8, 1e-4, -0.3, 0.49, -0.5, 0.5] {
            for k in 0..3 {
                assert!((phi(k, z) - series(k, z)).abs() < 1e-14, "k={k} z={z}");
            }
        }
    }

    #[test]
    fn threshold_is_continuous() {
        for k in 0..3 {
            let inside = phi(k, -CONTOUR_THRESHOLD);
            let outside = phi(k, -CONTOUR_THRESHOLD * (1.0 + 1e-15));
            assert!((inside - outside).abs() < 1e-13, "k={k} {inside} {outside}");
        }
    }

    #[test]
    fn complex_branch_recurrence() {
        let z = Complex64::new(-0.2, 0.3);
        for k in 0..2 {
            let lhs = z * phi_complex(k + 1, z);
            let rhs = phi_complex(k, z) - INV_FACT[k + 1];
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }
}
