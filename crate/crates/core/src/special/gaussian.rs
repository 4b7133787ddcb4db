use core::f64::consts::FRAC_1_SQRT_2;

use libm::{erfc, exp, log, sqrt};

use crate::error::{Error, Result};

/// 1/√(2π)
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// ln √(2π)
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub(crate) fn std_normal_pdf(k: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp(-0.5 * k * k)
}

#[inline]
pub(crate) fn q(k: f64) -> f64 {
    0.5 * erfc(k * FRAC_1_SQRT_2)
}

/// Standard normal survival function `Q(k) = ½·erfc(k/√2)`.
///
/// `erfc` keeps full relative precision in the upper tail, so no
/// cancellation occurs for large `k`; the result underflows gracefully to
/// subnormals and finally zero beyond `k ≈ 38.5`.
pub fn gaussian_sf(k: f64) -> Result<f64> {
    if !k.is_finite() {
        return Err(Error::Domain {
            what: "gaussian_sf",
            value: k,
        });
    }
    Ok(q(k))
}

/// Natural logarithm of `Q(k)`, usable far beyond the point where `Q(k)`
/// itself underflows.
///
/// For `k > 8` the Mills ratio `Q(k)/φ(k)` is evaluated by its continued
/// fraction and combined with `ln φ(k)`.
pub fn log_gaussian_sf(k: f64) -> Result<f64> {
    if !k.is_finite() {
        return Err(Error::Domain {
            what: "log_gaussian_sf",
            value: k,
        });
    }
    if k <= 8.0 {
        return Ok(log(q(k)));
    }
    // Q(k)/φ(k) = 1/(k + 1/(k + 2/(k + 3/(k + ...)))), evaluated bottom-up.
    let mut tail = k;
    for n in (1..=60).rev() {
        tail = k + n as f64 / tail;
    }
    Ok(-0.5 * k * k - LN_SQRT_2PI - log(tail))
}

/// Inverse of [`gaussian_sf`].
///
/// `p = 0` maps to `+∞` and `p = 1` to `-∞`; anything outside `[0, 1]` is a
/// domain error.
pub fn gaussian_sf_inv(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            what: "gaussian_sf_inv",
            value: p,
        });
    }
    Ok(q_inv(p))
}

pub(crate) fn q_inv(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    if p >= 1.0 {
        return f64::NEG_INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    if p > 0.5 {
        // 1 - p is exact for p in [0.5, 1].
        return -upper_quantile(1.0 - p);
    }
    upper_quantile(p)
}

/// `Q⁻¹(p)` for `p ∈ (0, ½)`: Acklam's rational approximation of the normal
/// quantile, polished by Halley steps on `Q(z) - p`.
fn upper_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    // Acklam approximates the lower quantile Φ⁻¹(p) = -Q⁻¹(p).
    let lower = if p < P_LOW {
        let r = sqrt(-2.0 * log(p));
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    } else {
        let u = p - 0.5;
        let r = u * u;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * u
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let mut z = -lower;

    for _ in 0..4 {
        let density = std_normal_pdf(z);
        if density <= 0.0 || !density.is_finite() {
            break;
        }
        let u = (q(z) - p) / density;
        let step = u / (1.0 - 0.5 * z * u);
        z += step;
        if step.abs() <= 1e-16 * z.abs().max(1.0) {
            break;
        }
    }
    z
}

/// Marcum Q-function of order ½, `Q(b - a) + Q(a + b)`; the survival function
/// of a unit-scale noncentral chi-squared law with one degree of freedom and
/// noncentrality `a²`, evaluated at `b²`.
pub fn marcum_q_half(a: f64, b: f64) -> Result<f64> {
    if a.is_nan() || a < 0.0 {
        return Err(Error::Domain {
            what: "marcum_q_half",
            value: a,
        });
    }
    if b.is_nan() || b < 0.0 {
        return Err(Error::Domain {
            what: "marcum_q_half",
            value: b,
        });
    }
    Ok(q(b - a) + q(a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn sf_reference_values() {
        assert_eq!(gaussian_sf(0.0).unwrap(), 0.5);
        // 40-digit erfc references.
        let cases = [
            (1.6448536269514722, 0.050000000000000053101),
            (-3.0, 0.99865010196836990547),
            (0.5, 0.30853753872598689636),
            (2.0, 0.0227501319481792072),
            (5.0, 2.8665157187919391167e-7),
            (8.0, 6.2209605742717841235e-16),
            (12.0, 1.7764821120776789977e-33),
            (20.0, 2.7536241186062336951e-89),
            (30.0, 4.9067139271481870595e-198),
        ];
        for (k, want) in cases {
            let got = gaussian_sf(k).unwrap();
            let tol = if k.abs() <= 8.0 { 1e-12 } else { 1e-10 };
            assert!(rel(got, want) < tol, "Q({k}) = {got}, want {want}");
        }
    }

    #[test]
    fn sf_reflection() {
        for k in [0.1, 0.7, 1.3, 2.9, 4.4, 7.9] {
            let s = gaussian_sf(k).unwrap() + gaussian_sf(-k).unwrap();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sf_rejects_non_finite() {
        assert!(gaussian_sf(f64::NAN).is_err());
        assert!(gaussian_sf(f64::INFINITY).is_err());
        assert!(log_gaussian_sf(f64::NAN).is_err());
    }

    #[test]
    fn log_sf_far_tail() {
        // ln Q(30) and ln Q(50) from the references above / mpmath.
        let l30 = log_gaussian_sf(30.0).unwrap();
        assert!((l30 - log(4.9067139271481870595e-198)).abs() < 1e-12);
        let l8 = log_gaussian_sf(8.000001).unwrap();
        let l8b = log(q(8.000001));
        assert!((l8 - l8b).abs() < 1e-12);
        // Q(50) underflows; the log path keeps going.
        let l50 = log_gaussian_sf(50.0).unwrap();
        assert!((l50 - (-1254.8313611394199)).abs() < 1e-9, "{l50}");
    }

    #[test]
    fn inverse_reference_values() {
        assert_eq!(gaussian_sf_inv(0.5).unwrap(), 0.0);
        let z = gaussian_sf_inv(0.05).unwrap();
        assert!((z - 1.6448536269514722).abs() < 1e-14);
        assert_eq!(gaussian_sf_inv(0.0).unwrap(), f64::INFINITY);
        assert_eq!(gaussian_sf_inv(1.0).unwrap(), f64::NEG_INFINITY);
        assert!(gaussian_sf_inv(-0.1).is_err());
        assert!(gaussian_sf_inv(1.5).is_err());
        assert!(gaussian_sf_inv(f64::NAN).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let mut p = 1e-300;
        while p < 0.999_999 {
            let z = gaussian_sf_inv(p).unwrap();
            let back = gaussian_sf(z).unwrap();
            assert!(rel(back, p) < 1e-12, "p = {p}: Q(Q^-1(p)) = {back}");
            p *= 3.7;
        }
        let p = 1e-9;
        assert!(rel(gaussian_sf(gaussian_sf_inv(p).unwrap()).unwrap(), p) <= 1e-9);
    }

    #[test]
    fn marcum_reductions() {
        for b in [0.0, 0.3, 1.0, 2.5, 6.0] {
            assert!((marcum_q_half(0.0, b).unwrap() - 2.0 * q(b)).abs() < 1e-16);
        }
        assert!((marcum_q_half(1.0, 1.0).unwrap() - (0.5 + q(2.0))).abs() < 1e-16);
        assert!(marcum_q_half(-1.0, 1.0).is_err());
        assert!(marcum_q_half(1.0, -1.0).is_err());
    }
}
