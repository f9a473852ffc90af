use alloc::vec::Vec;

use crate::C64;

/// Roots of Σ_k coeffs[k] z^k by Aberth–Ehrlich iteration. Trailing zero
/// coefficients are dropped.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<C64> {
    let mut degree = coeffs.len().saturating_sub(1);
    while degree > 0 && coeffs[degree] == 0.0 {
        degree -= 1;
    }
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let monic: Vec<f64> = coeffs[..=degree].iter().map(|c| c / lead).collect();

    // Start on a circle of the Cauchy radius, rotated off the real axis.
    let radius = 1.0 + monic[..degree].iter().map(|c| libm::fabs(*c)).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * core::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            C64::from_polar(radius * 0.5, angle)
        })
        .collect();

    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..degree {
            let (p, dp) = eval_with_derivative(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| C64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

fn eval_with_derivative(coeffs: &[f64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Smallest root modulus of the AR polynomial 1 − φ₁z − … − φ_p z^p, or
/// +∞ when it has no roots.
pub fn min_ar_root_modulus(ar: &[f64]) -> f64 {
    let mut coeffs = Vec::with_capacity(ar.len() + 1);
    coeffs.push(1.0);
    coeffs.extend(ar.iter().map(|c| -c));
    polynomial_roots(&coeffs)
        .iter()
        .map(|r| r.norm())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots() {
        // (z − 2)(z + 3) = z² + z − 6
        let mut r: Vec<f64> = polynomial_roots(&[-6.0, 1.0, 1.0]).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] + 3.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ar_root_moduli() {
        assert!((min_ar_root_modulus(&[0.5]) - 2.0).abs() < 1e-12);
        assert!((min_ar_root_modulus(&[0.9]) - 1.0 / 0.9).abs() < 1e-12);
        assert_eq!(min_ar_root_modulus(&[]), f64::INFINITY);
        // Complex pair with modulus 1/r for φ = (2r cos ω, −r²).
        let (r, w) = (0.95f64, 0.3f64);
        let m = min_ar_root_modulus(&[2.0 * r * libm::cos(w), -r * r]);
        assert!((m - 1.0 / r).abs() < 1e-10);
        assert!(min_ar_root_modulus(&[1.2]) < 1.0);
    }
}
