//! From ROC curves to `(ε, δ)` privacy profiles.
//!
//! For a concave, symmetric curve `R_s` the profile is its Legendre-Fenchel
//! conjugate: `δ(ε) = sup_x R_s(x) − e^ε·x`. The supremum sits where the
//! slope of `R_s` equals `e^ε`, so each `δ` is a tangent intercept
//! `R_s(x*) − x*·R_s′(x*)` found by a root search on the derivative.

use alloc::vec::Vec;

use libm::{cbrt, exp, expm1, log1p, pow};

use crate::error::{Error, Result};
use crate::trade_off::{slope_crossing, RocCurve, SEARCH_X_HI};

/// Central-difference derivative of `curve` at `x ∈ (0, 1)`.
///
/// The step is `min(x, 1 − x)·ε_mach^{1/3}`, so it scales with the distance
/// to the nearest boundary and the stencil stays inside the unit interval.
/// Where that step is lost to rounding it grows to half the distance to the
/// boundary.
pub fn numerical_derivative(curve: &RocCurve, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain {
            what: "numerical_derivative",
            value: x,
        });
    }
    let room = x.min(1.0 - x);
    let mut h = room * cbrt(f64::EPSILON);
    if x + h == x || x - h == x {
        h = 0.5 * room;
    }
    let (up, down) = (x + h, x - h);
    Ok((curve.eval(up) - curve.eval(down)) / (up - down))
}

/// Root of a continuous `f` on `[lo, hi]` with `f(lo)·f(hi) ≤ 0`.
///
/// Regula falsi steps are taken while they shrink the bracket by at least
/// half; otherwise the step is a bisection. The returned point lies in a
/// bracket no wider than `tol` (or at floating-point resolution).
/// Non-finite function values are only used for their sign.
pub fn find_root(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut force_bisect = false;
    for _ in 0..2000 {
        let width = b - a;
        if width <= tol {
            break;
        }
        let mid = a + 0.5 * width;
        if mid <= a || mid >= b {
            break;
        }
        let x = if !force_bisect && fa.is_finite() && fb.is_finite() {
            let s = b - fb * (b - a) / (fb - fa);
            if s > a && s < b {
                s
            } else {
                mid
            }
        } else {
            mid
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.is_nan() {
            return Err(Error::NoBracket { lo: a, hi: b });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        force_bisect = b - a > 0.5 * width;
    }
    Ok(a + 0.5 * (b - a))
}

/// How the conjugation obtains slopes of the source curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Differentiation {
    /// Closed-form slopes supplied by the curve.
    #[default]
    Analytic,
    /// Central differences of curve evaluations.
    Numerical,
}

/// One `(ε, δ(ε))` pair. `floored` marks a `δ` below `1e-15` reported as 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfilePoint {
    pub epsilon: f64,
    pub delta: f64,
    pub floored: bool,
}

/// Result of an inverse query. `exact_zero` is set when `δ(0)` itself is 0,
/// i.e. the curve is the diagonal and every `ε ≥ 0` holds with `δ = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonValue {
    pub epsilon: f64,
    pub exact_zero: bool,
}

const DELTA_FLOOR: f64 = 1e-15;
/// Largest `ε` considered by inverse queries.
pub const EPSILON_MAX: f64 = 50.0;

/// The privacy profile `ε ↦ δ(ε)` of a concave ROC curve.
#[derive(Clone, Debug)]
pub struct PrivacyProfile {
    source: RocCurve,
    differentiation: Differentiation,
}

impl PrivacyProfile {
    /// Wraps `source`, which must be concave (checked on a sample grid).
    /// Symmetric curves give valid `(ε, δ)` guarantees in both directions;
    /// pass the output of [`crate::symmetrize`] for GLRT curves.
    pub fn new(source: RocCurve) -> Result<Self> {
        check_concave(&source)?;
        Ok(PrivacyProfile {
            source,
            differentiation: Differentiation::default(),
        })
    }

    pub fn with_differentiation(mut self, differentiation: Differentiation) -> Self {
        self.differentiation = differentiation;
        self
    }

    pub fn source(&self) -> &RocCurve {
        &self.source
    }

    fn slope(&self, x: f64) -> f64 {
        match self.differentiation {
            Differentiation::Analytic => self.source.slope(x),
            Differentiation::Numerical => numerical_derivative(&self.source, x).unwrap_or(f64::NAN),
        }
    }

    /// `δ(ε) = R_s(x*) − e^ε·x*` where `R_s′(x*) = e^ε`.
    pub fn delta(&self, epsilon: f64) -> Result<ProfilePoint> {
        if !(epsilon >= 0.0) || epsilon.is_infinite() {
            return Err(Error::Domain {
                what: "delta_at_epsilon",
                value: epsilon,
            });
        }
        let point = |delta: f64| {
            let delta = delta.clamp(0.0, 1.0);
            if delta < DELTA_FLOOR {
                ProfilePoint {
                    epsilon,
                    delta: 0.0,
                    floored: true,
                }
            } else {
                ProfilePoint {
                    epsilon,
                    delta,
                    floored: false,
                }
            }
        };
        if self.source.is_diagonal() {
            return Ok(point(0.0));
        }
        let m = exp(epsilon);
        let curve = &self.source;
        match slope_crossing(|x| self.slope(x), m) {
            Some(x) => Ok(point(curve.eval(x) - m * x)),
            None => {
                // The slope never reaches e^ε inside the search range: either
                // it stays above (supremum at x = 1) or below down to 1e-300.
                let hi = SEARCH_X_HI;
                if self.slope(hi) >= m {
                    Ok(point(1.0 - m))
                } else {
                    let lo = 1e-300;
                    Ok(point(curve.eval(lo) - m * lo))
                }
            }
        }
    }

    /// Smallest `ε ∈ [0, 50]` with `δ(ε) ≤ delta`.
    pub fn epsilon(&self, delta: f64) -> Result<EpsilonValue> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain {
                what: "epsilon_at_delta",
                value: delta,
            });
        }
        let at_zero = self.delta(0.0)?;
        if at_zero.delta <= delta {
            return Ok(EpsilonValue {
                epsilon: 0.0,
                exact_zero: at_zero.delta == 0.0,
            });
        }
        if self.delta(EPSILON_MAX)?.delta > delta {
            return Err(Error::OutOfRange {
                target: delta,
                limit: EPSILON_MAX,
            });
        }
        let (mut lo, mut hi) = (0.0, EPSILON_MAX);
        while hi - lo > 1e-7 {
            let mid = 0.5 * (lo + hi);
            if self.delta(mid)?.delta > delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(EpsilonValue {
            epsilon: hi,
            exact_zero: false,
        })
    }

    /// `δ` on `n` values of `ε` from `eps_min` to `eps_max`, spaced evenly in
    /// `ln(1 + ε)` so that `ε_min = 0` is allowed.
    pub fn grid(&self, eps_min: f64, eps_max: f64, n: usize) -> Result<Vec<ProfilePoint>> {
        if !(eps_min >= 0.0) || !(eps_max > eps_min) || !eps_max.is_finite() {
            return Err(Error::InvalidParameter {
                name: "epsilon range",
                value: eps_max,
            });
        }
        if n < 2 {
            return Err(Error::InvalidParameter {
                name: "n_points",
                value: n as f64,
            });
        }
        let (a, b) = (log1p(eps_min), log1p(eps_max));
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let eps = match i {
                0 => eps_min,
                _ if i + 1 == n => eps_max,
                _ => expm1(a + (b - a) * i as f64 / (n - 1) as f64),
            };
            let mut p = self.delta(eps)?;
            // Enforce monotonicity against root-finding noise.
            if let Some(prev) = out.last().map(|q: &ProfilePoint| q.delta) {
                if p.delta > prev {
                    p.delta = prev;
                }
            }
            out.push(p);
        }
        Ok(out)
    }
}

/// Rejects curves whose sampled segment slopes increase anywhere.
fn check_concave(curve: &RocCurve) -> Result<()> {
    let mut xs: Vec<f64> = Vec::new();
    for i in 0..=24 {
        let x = pow(10.0, -12.0 + 12.0 * i as f64 / 24.0) * 0.5;
        xs.push(x);
        xs.push(1.0 - x);
    }
    for i in 0..=64 {
        xs.push(i as f64 / 64.0);
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    let ys: Vec<f64> = xs.iter().map(|&x| curve.eval(x)).collect();
    let mut prev = f64::INFINITY;
    for i in 1..xs.len() {
        let dx = xs[i] - xs[i - 1];
        let s = (ys[i] - ys[i - 1]) / dx;
        // Relative slack plus the slope error from rounding in both evaluations.
        let slack = 1e-6 * prev.abs().clamp(1.0, 1e6) + 8.0 * f64::EPSILON / dx;
        if prev.is_finite() && s > prev + slack {
            return Err(Error::NotConcave { at: xs[i - 1] });
        }
        prev = s;
    }
    Ok(())
}

/// See [`PrivacyProfile::delta`].
pub fn delta_at_epsilon(profile: &PrivacyProfile, epsilon: f64) -> Result<ProfilePoint> {
    profile.delta(epsilon)
}

/// See [`PrivacyProfile::epsilon`].
pub fn epsilon_at_delta(profile: &PrivacyProfile, delta: f64) -> Result<EpsilonValue> {
    profile.epsilon(delta)
}

/// See [`PrivacyProfile::grid`].
pub fn profile_grid(
    profile: &PrivacyProfile,
    eps_min: f64,
    eps_max: f64,
    n_points: usize,
) -> Result<Vec<ProfilePoint>> {
    profile.grid(eps_min, eps_max, n_points)
}

/// Closed-form profile of the Gaussian mechanism with shift `μ`:
/// `δ(ε) = Q(ε/μ − μ/2) − e^ε·Q(ε/μ + μ/2)`.
pub fn gaussian_profile_delta(mu: f64, epsilon: f64) -> f64 {
    use crate::special::q;
    if mu == 0.0 {
        return 0.0;
    }
    let a = epsilon / mu;
    (q(a - 0.5 * mu) - exp(epsilon) * q(a + 0.5 * mu)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::GdpParam;
    use crate::trade_off::{symmetrize, CurveKind, MechanismParams};

    fn glrt_sym(delta: f64, var: f64, d: u32, n: u32) -> RocCurve {
        let p = MechanismParams::new(delta, var, d, n).unwrap();
        symmetrize(&RocCurve::glrt(&p), &RocCurve::glrt_prime(&p)).unwrap()
    }

    #[test]
    fn find_root_sqrt_two() {
        let r = find_root(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn find_root_handles_infinite_endpoint_values() {
        let r = find_root(
            |x| if x < 1e-3 { f64::INFINITY } else { 0.5 - x },
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!((r - 0.5).abs() < 1e-11);
    }

    #[test]
    fn find_root_without_sign_change() {
        assert!(matches!(
            find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-9),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn numerical_slope_tracks_analytic() {
        let p = MechanismParams::single(1.0, 1.0, 4).unwrap();
        let c = RocCurve::glrt(&p);
        for &x in &[1e-9, 1e-4, 0.01, 0.3, 0.7, 0.99, 1.0 - 1e-4] {
            let num = numerical_derivative(&c, x).unwrap();
            let ana = c.slope(x);
            assert!(
                (num - ana).abs() <= 1e-6 * ana.abs().max(1.0),
                "x={x}: {num} vs {ana}"
            );
        }
        assert!(numerical_derivative(&c, 0.0).is_err());
        assert!(numerical_derivative(&c, 1.0).is_err());
    }

    #[test]
    fn gaussian_profile_oracle() {
        for &mu in &[0.3, 1.0, 2.5] {
            let curve = RocCurve::asymptotic_gdp(GdpParam::new(mu).unwrap());
            for mode in [Differentiation::Numerical, Differentiation::Analytic] {
                let prof = PrivacyProfile::new(curve.clone())
                    .unwrap()
                    .with_differentiation(mode);
                for &eps in &[0.0, 0.25, 1.0, 3.0, 6.0] {
                    let got = prof.delta(eps).unwrap().delta;
                    let want = gaussian_profile_delta(mu, eps);
                    assert!(
                        (got - want).abs() < 1e-6,
                        "mu={mu} eps={eps} {mode:?}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn delta_is_a_supporting_line() {
        let prof = PrivacyProfile::new(glrt_sym(1.0, 1.0, 3, 2)).unwrap();
        for &eps in &[0.0, 0.5, 1.5, 3.0] {
            let d = prof.delta(eps).unwrap().delta;
            let m = exp(eps);
            for (x, y) in prof.source().sample(400) {
                assert!(y - m * x <= d + 1e-7, "eps={eps} x={x}");
            }
        }
    }

    #[test]
    fn magnitude_adversary_needs_less_delta_than_optimal_one() {
        let p = MechanismParams::single(1.0, 1.0, 1).unwrap();
        let npo = PrivacyProfile::new(RocCurve::npo(&p)).unwrap();
        let glrt = PrivacyProfile::new(glrt_sym(1.0, 1.0, 1, 1)).unwrap();
        for &eps in &[0.0, 0.5, 1.0, 2.0] {
            let a = glrt.delta(eps).unwrap().delta;
            let b = npo.delta(eps).unwrap().delta;
            assert!(a < b, "eps={eps}: {a} !< {b}");
        }
    }

    #[test]
    fn epsilon_inverts_delta() {
        let prof = PrivacyProfile::new(glrt_sym(1.0, 1.0, 2, 1)).unwrap();
        for &target in &[1e-1, 1e-3, 1e-6] {
            let e = prof.epsilon(target).unwrap();
            assert!(!e.exact_zero);
            let back = prof.delta(e.epsilon).unwrap().delta;
            assert!(back <= target * (1.0 + 1e-6));
            let before = prof.delta((e.epsilon - 1e-5).max(0.0)).unwrap().delta;
            assert!(before >= target * (1.0 - 1e-6));
        }
    }

    #[test]
    fn diagonal_profile_is_zero() {
        let prof = PrivacyProfile::new(RocCurve::diagonal(CurveKind::Npo)).unwrap();
        assert_eq!(prof.delta(0.0).unwrap().delta, 0.0);
        let e = prof.epsilon(1e-5).unwrap();
        assert_eq!(e.epsilon, 0.0);
        assert!(e.exact_zero);
    }

    #[test]
    fn tiny_delta_is_floored() {
        let prof = PrivacyProfile::new(RocCurve::npo(
            &MechanismParams::single(0.1, 1.0, 1).unwrap(),
        ))
        .unwrap();
        let p = prof.delta(10.0).unwrap();
        assert_eq!(p.delta, 0.0);
        assert!(p.floored);
    }

    #[test]
    fn out_of_range_inverse() {
        let prof = PrivacyProfile::new(RocCurve::npo(
            &MechanismParams::single(30.0, 1.0, 1).unwrap(),
        ))
        .unwrap();
        assert!(matches!(prof.epsilon(1e-12), Err(Error::OutOfRange { .. })));
        assert!(prof.epsilon(0.0).is_err());
        assert!(prof.delta(-1.0).is_err());
    }

    #[test]
    fn grid_is_monotone_and_spans_range() {
        let prof = PrivacyProfile::new(glrt_sym(1.0, 2.0, 5, 3)).unwrap();
        let g = prof.grid(0.0, 8.0, 40).unwrap();
        assert_eq!(g.len(), 40);
        assert_eq!(g[0].epsilon, 0.0);
        assert_eq!(g[39].epsilon, 8.0);
        for w in g.windows(2) {
            assert!(w[1].epsilon > w[0].epsilon);
            assert!(w[1].delta <= w[0].delta);
        }
        assert!(prof.grid(1.0, 1.0, 10).is_err());
        assert!(prof.grid(0.0, 1.0, 1).is_err());
    }
}
