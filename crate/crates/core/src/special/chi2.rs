use core::f64::consts::LN_2;

use libm::{exp, floor, lgamma, log, sqrt};

use super::gamma::gamma_pq;
use super::gaussian::q_inv;
use crate::error::{Error, Result};

/// Relative size below which a mixture term is dropped.
const SERIES_EPS: f64 = 1e-17;
/// Probabilities below this saturate in the quantile functions.
const TINY_PROB: f64 = 1e-300;

/// Chi-squared law with `dof` degrees of freedom, noncentrality `λ` and a
/// scale factor: the law of `scale · ‖z‖²` with `z ~ N(ν, I_dof)` and
/// `‖ν‖² = λ`. `λ = 0` is the central law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledChi2 {
    dof: u32,
    noncentrality: f64,
    scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Tail {
    Lower,
    Upper,
}

impl Tail {
    fn flip(self) -> Tail {
        match self {
            Tail::Lower => Tail::Upper,
            Tail::Upper => Tail::Lower,
        }
    }
}

impl ScaledChi2 {
    pub fn new(dof: u32, noncentrality: f64, scale: f64) -> Result<Self> {
        if dof == 0 {
            return Err(Error::InvalidParameter {
                name: "dof",
                value: 0.0,
            });
        }
        if !(noncentrality >= 0.0) || !noncentrality.is_finite() {
            return Err(Error::InvalidParameter {
                name: "noncentrality",
                value: noncentrality,
            });
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: scale,
            });
        }
        Ok(ScaledChi2 {
            dof,
            noncentrality,
            scale,
        })
    }

    pub fn central(dof: u32, scale: f64) -> Result<Self> {
        Self::new(dof, 0.0, scale)
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    pub fn noncentrality(&self) -> f64 {
        self.noncentrality
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        self.scale * (self.dof as f64 + self.noncentrality)
    }

    fn half_dof(&self) -> f64 {
        0.5 * self.dof as f64
    }

    /// Survival function `P(X > x)`; `x` below zero is treated as zero.
    pub(crate) fn sf(&self, x: f64) -> f64 {
        self.tail(x, Tail::Upper)
    }

    /// Distribution function `P(X ≤ x)`.
    pub(crate) fn cdf(&self, x: f64) -> f64 {
        self.tail(x, Tail::Lower)
    }

    pub(crate) fn tail(&self, x: f64, tail: Tail) -> f64 {
        if !(x > 0.0) {
            return match tail {
                Tail::Lower => 0.0,
                Tail::Upper => 1.0,
            };
        }
        self.unit_tail(x / self.scale, tail)
    }

    /// Tail probability of the unit-scale law at `t`.
    fn unit_tail(&self, t: f64, tail: Tail) -> f64 {
        let a = self.half_dof();
        let y = 0.5 * t;
        let pick = |k: u64| {
            let (p, q) = gamma_pq(a + k as f64, y);
            match tail {
                Tail::Lower => p,
                Tail::Upper => q,
            }
        };
        if self.noncentrality == 0.0 {
            return pick(0);
        }
        poisson_mixture(0.5 * self.noncentrality, pick).min(1.0)
    }

    /// Log-density of the central law with the same dof and scale.
    fn log_pdf_central(&self, x: f64) -> f64 {
        central_log_pdf_unit(self.half_dof(), x / self.scale) - log(self.scale)
    }

    /// Log-density at `x > 0`.
    pub(crate) fn log_pdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        self.log_pdf_central(x) + self.log_density_ratio(x)
    }

    pub(crate) fn pdf(&self, x: f64) -> f64 {
        exp(self.log_pdf(x))
    }

    /// `ln(f_λ(x) / f_0(x))`: log-likelihood ratio between this law and the
    /// central law sharing its dof and scale. Nondecreasing in `x`.
    ///
    /// The ratio is `e^{-λ/2} Σ_k (λt/4)^k Γ(d/2) / (k! Γ(d/2 + k))`, a series of
    /// positive terms summed outward from its largest term.
    pub(crate) fn log_density_ratio(&self, x: f64) -> f64 {
        let h = 0.5 * self.noncentrality;
        if h == 0.0 {
            return 0.0;
        }
        let t = if x > 0.0 { x / self.scale } else { 0.0 };
        if t == f64::INFINITY {
            return f64::INFINITY;
        }
        let z = 0.5 * h * t;
        if z == 0.0 {
            return -h;
        }
        let a = self.half_dof();
        // Largest term: (k + 1)(a + k) ≈ z.
        let b = a + 1.0;
        let disc = b * b - 4.0 * (a - z);
        let k_star = if disc > 0.0 {
            floor(((-b + sqrt(disc)) * 0.5).max(0.0))
        } else {
            0.0
        };
        let log_peak = k_star * log(z) - lgamma(k_star + 1.0) - lgamma(a + k_star) + lgamma(a);

        let mut sum = 1.0;
        let mut r = 1.0;
        let mut k = k_star;
        loop {
            r *= z / ((k + 1.0) * (a + k));
            k += 1.0;
            sum += r;
            if r < SERIES_EPS * sum {
                break;
            }
        }
        let mut r = 1.0;
        let mut k = k_star;
        while k >= 1.0 {
            r *= k * (a + k - 1.0) / z;
            k -= 1.0;
            sum += r;
            if r < SERIES_EPS * sum {
                break;
            }
        }
        -h + log_peak + log(sum)
    }

    /// Quantile for the given tail: the `x` with `tail(x) = p`.
    ///
    /// Upper: `p = 1 → 0`, `p = 0 → ∞`. Lower: `p = 0 → 0`, `p = 1 → ∞`.
    /// Probabilities below `1e-300` saturate at the corresponding endpoint.
    pub(crate) fn quantile(&self, p: f64, tail: Tail) -> f64 {
        if p.is_nan() {
            return f64::NAN;
        }
        if p > 0.5 {
            return self.quantile(1.0 - p, tail.flip());
        }
        if p < TINY_PROB {
            return match tail {
                Tail::Lower => 0.0,
                Tail::Upper => f64::INFINITY,
            };
        }
        let below = |x: f64| match tail {
            // `true` when x lies left of the root.
            Tail::Upper => self.sf(x) > p,
            Tail::Lower => self.cdf(x) < p,
        };

        let mut x0 = self.initial_guess(p, tail);
        if !(x0 > f64::MIN_POSITIVE && x0.is_finite()) {
            x0 = self.mean();
        }
        // Expand geometrically with a growing factor so extreme tails are
        // bracketed in a few dozen steps.
        let (mut lo, mut hi) = (x0, x0);
        let mut factor = 2.0;
        while below(hi) {
            hi *= factor;
            factor *= factor;
            if hi == f64::INFINITY {
                return hi;
            }
        }
        let mut factor = 0.5;
        while !below(lo) {
            lo *= factor;
            factor *= factor;
            if lo == 0.0 {
                return 0.0;
            }
        }

        // Bisection in log-x to a relative width of 1e-8.
        while hi / lo - 1.0 > 1e-8 {
            let mid = sqrt(lo) * sqrt(hi);
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }

        // Newton polish on ln tail(x) - ln p.
        let target = log(p);
        let sign = match tail {
            Tail::Upper => -1.0,
            Tail::Lower => 1.0,
        };
        let mut x = sqrt(lo) * sqrt(hi);
        for _ in 0..5 {
            let prob = self.tail(x, tail);
            let dens = self.pdf(x);
            if !(prob > 0.0) || !(dens > 0.0) {
                break;
            }
            let step = (log(prob) - target) * prob / (sign * dens);
            let next = x - step;
            if !(next > lo * (1.0 - 1e-8)) || !(next < hi * (1.0 + 1e-8)) {
                break;
            }
            x = next;
            if step.abs() <= 4.0 * f64::EPSILON * x {
                break;
            }
        }
        x
    }

    /// Wilson-Hilferty cube-root normal approximation, applied to the
    /// two-moment matched central law for λ > 0.
    fn initial_guess(&self, p: f64, tail: Tail) -> f64 {
        let d = self.dof as f64;
        let lam = self.noncentrality;
        let nu = (d + lam) * (d + lam) / (d + 2.0 * lam);
        let c = (d + 2.0 * lam) / (d + lam);
        let z = match tail {
            Tail::Upper => q_inv(p),
            Tail::Lower => -q_inv(p),
        };
        let w = 2.0 / (9.0 * nu);
        let base = 1.0 - w + z * sqrt(w);
        let guess = c * nu * base * base * base * self.scale;
        let floor_guess = self.mean() * 1e-6;
        if guess.is_finite() && guess > floor_guess {
            guess
        } else {
            floor_guess.max(f64::MIN_POSITIVE)
        }
    }
}

fn central_log_pdf_unit(a: f64, t: f64) -> f64 {
    (a - 1.0) * log(t) - 0.5 * t - a * LN_2 - lgamma(a)
}

/// `Σ_k Poisson(k; h) · f(k)` for nonnegative `f`, summed outward from the
/// Poisson mode. Each direction stops once terms are decreasing and the
/// geometric bound on the remainder is negligible against the running sum.
fn poisson_mixture(h: f64, f: impl Fn(u64) -> f64) -> f64 {
    let mode = floor(h) as u64;
    let log_h = log(h);
    let log_weight = |k: u64| -h + k as f64 * log_h - lgamma(k as f64 + 1.0);

    let peak = exp(log_weight(mode)) * f(mode);
    let mut sum = peak;
    let mut omitted = 0.0_f64;

    let mut prev = peak;
    let mut k = mode;
    loop {
        k += 1;
        let term = exp(log_weight(k)) * f(k);
        sum += term;
        if term < prev && prev > 0.0 {
            let r = term / prev;
            let bound = term * r / (1.0 - r);
            if bound <= SERIES_EPS * sum {
                omitted += bound;
                break;
            }
        }
        if term == 0.0 && prev == 0.0 && k > mode + 64 {
            break;
        }
        prev = term;
    }

    let mut prev = peak;
    let mut k = mode;
    while k > 0 {
        k -= 1;
        let term = exp(log_weight(k)) * f(k);
        sum += term;
        if term < prev && prev > 0.0 {
            let r = term / prev;
            let bound = term * r / (1.0 - r);
            if bound <= SERIES_EPS * sum {
                omitted += bound;
                break;
            }
        }
        if term == 0.0 && prev == 0.0 && k + 64 < mode {
            break;
        }
        prev = term;
    }
    debug_assert!(omitted <= 1e-15, "mixture truncation bound {omitted}");
    sum
}

fn validate_x(x: f64, what: &'static str) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain { what, value: x });
    }
    Ok(())
}

/// Survival function of a scaled (noncentral) chi-squared law.
///
/// Central laws reduce to the regularized upper incomplete gamma function
/// `Q(d/2, x/(2s))`; noncentral laws are the Poisson mixture
/// `Σ_k Poisson(k; λ/2) · Q(d/2 + k, x/(2s))`.
pub fn chi2_sf(dist: &ScaledChi2, x: f64) -> Result<f64> {
    validate_x(x, "chi2_sf")?;
    Ok(dist.sf(x))
}

/// Distribution function, computed from its own positive series rather than
/// as `1 - sf` so that the lower tail keeps relative precision.
pub fn chi2_cdf(dist: &ScaledChi2, x: f64) -> Result<f64> {
    validate_x(x, "chi2_cdf")?;
    Ok(dist.cdf(x))
}

/// Inverse survival function for `p ∈ (0, 1]`; `p = 1` returns `0` and
/// `p < 1e-300` saturates to `+∞`.
pub fn chi2_sf_inv(dist: &ScaledChi2, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain {
            what: "chi2_sf_inv",
            value: p,
        });
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    Ok(dist.quantile(p, Tail::Upper))
}

/// Quantile function for `p ∈ [0, 1)`; `p = 0` returns `0` and
/// `1 - p < 1e-300` saturates to `+∞`.
pub fn chi2_cdf_inv(dist: &ScaledChi2, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain {
            what: "chi2_cdf_inv",
            value: p,
        });
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(dist.quantile(p, Tail::Lower))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gaussian::q;

    fn dist(d: u32, lam: f64, s: f64) -> ScaledChi2 {
        ScaledChi2::new(d, lam, s).unwrap()
    }

    #[test]
    fn construction_checks_invariants() {
        assert!(ScaledChi2::new(0, 0.0, 1.0).is_err());
        assert!(ScaledChi2::new(1, -0.1, 1.0).is_err());
        assert!(ScaledChi2::new(1, 0.0, 0.0).is_err());
        assert!(ScaledChi2::new(1, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn survival_at_origin_is_one() {
        assert_eq!(chi2_sf(&dist(1, 0.0, 1.0), 0.0).unwrap(), 1.0);
        assert_eq!(chi2_sf(&dist(4, 3.0, 2.0), 0.0).unwrap(), 1.0);
        assert!(chi2_sf(&dist(1, 0.0, 1.0), -1.0).is_err());
        assert!(chi2_cdf(&dist(1, 0.0, 1.0), f64::NAN).is_err());
    }

    #[test]
    fn one_dof_central_tail_is_twice_gaussian_tail() {
        let d1 = dist(1, 0.0, 1.0);
        for x0 in [0.9, 0.3, 0.05, 1e-3, 1e-8] {
            let c = q_inv(x0 / 2.0);
            let got = chi2_sf(&d1, c * c).unwrap();
            assert!((got - 2.0 * q(c)).abs() < 1e-13, "{x0}: {got}");
        }
    }

    #[test]
    fn noncentral_matches_monte_carlo_oracle() {
        // 10^8 draws of |N(ν, I_3)|² with |ν|² = 2.5: 0.56860606, SE 4.95e-5.
        let got = chi2_sf(&dist(3, 2.5, 1.0), 4.0).unwrap();
        assert!((got - 0.56860606).abs() < 3.0 * 4.95e-5, "{got}");
        // Exact series value (40-digit reference).
        assert!((got - 0.56853850081303682728).abs() < 1e-13);
    }

    #[test]
    fn noncentral_reference_values() {
        // (d, λ, x, sf) from 40-digit explicit Poisson sums.
        let cases = [
            (10, 7.0, 100.0, 3.0002539952234897697e-11),
            (1, 2.0, 1500.0, 4.5797376116414060771e-305),
            (300, 10.0, 350.0, 0.061198719937235922904),
            (4, 100.0, 150.0, 0.017344495339110834613),
        ];
        for (d, lam, x, want) in cases {
            let got = chi2_sf(&dist(d, lam, 1.0), x).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-11,
                "sf({d},{lam},{x}) = {got} vs {want}"
            );
        }
        let lower = [
            (4, 100.0, 30.0, 1.1610206773456849245e-6),
            (1, 2.0, 1e-6, 0.00029352537526835529415),
        ];
        for (d, lam, x, want) in lower {
            let got = chi2_cdf(&dist(d, lam, 1.0), x).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-11,
                "cdf({d},{lam},{x}) = {got} vs {want}"
            );
        }
    }

    #[test]
    fn inverse_reference_values() {
        let d1 = dist(1, 0.0, 1.0);
        assert_eq!(chi2_sf_inv(&d1, 1.0).unwrap(), 0.0);
        let x = chi2_sf_inv(&d1, 0.05).unwrap();
        assert!((x - 3.841458820694124).abs() < 1e-12, "{x}");
        let x = chi2_cdf_inv(&d1, 0.95).unwrap();
        assert!((x - 3.841458820694124).abs() < 1e-12, "{x}");
        assert!(chi2_sf_inv(&d1, 0.0).is_err());
        assert!(chi2_sf_inv(&d1, 1.5).is_err());
        assert!(chi2_cdf_inv(&d1, 1.0).is_err());
        assert_eq!(chi2_cdf_inv(&d1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_round_trip_noncentral_scaled() {
        let d = dist(10, 7.0, 4.0);
        let p = 1e-4;
        let x = chi2_sf_inv(&d, p).unwrap();
        assert!((chi2_sf(&d, x).unwrap() - p).abs() <= 1e-10);
    }

    #[test]
    fn complementarity() {
        for d in [dist(1, 0.0, 1.0), dist(3, 2.5, 1.0), dist(20, 11.0, 0.5)] {
            for x in [0.1, 1.0, 10.0] {
                let s = chi2_cdf(&d, x).unwrap() + chi2_sf(&d, x).unwrap();
                assert!((s - 1.0).abs() <= 1e-15 * 2.0, "{d:?} {x}: {s}");
            }
        }
    }

    #[test]
    fn fifty_dof_median() {
        let c = chi2_cdf(&dist(50, 0.0, 1.0), 49.33).unwrap();
        assert!((c - 0.5).abs() < 0.01);
        assert!((c - 0.49980149883046294433).abs() < 1e-13);
    }

    #[test]
    fn density_ratio_matches_density_quotient() {
        let alt = dist(5, 3.0, 2.0);
        let null = dist(5, 0.0, 2.0);
        for x in [0.01, 0.5, 3.0, 12.0, 40.0] {
            let lr = alt.log_density_ratio(x);
            // Compare against numerically differentiated tails.
            let h = 1e-6 * x;
            let fa = (alt.cdf(x + h) - alt.cdf(x - h)) / (2.0 * h);
            let f0 = (null.cdf(x + h) - null.cdf(x - h)) / (2.0 * h);
            assert!(
                (lr - log(fa / f0)).abs() < 1e-6,
                "{x}: {lr} vs {}",
                log(fa / f0)
            );
            assert!((alt.pdf(x) - fa).abs() < 1e-6 * fa.max(1e-3));
        }
        assert!((alt.log_density_ratio(0.0) + 1.5).abs() < 1e-15);
    }

    #[test]
    fn scale_covariance_is_exact() {
        for (d, lam, s) in [(1, 0.0, 36.0), (3, 2.5, 0.25), (50, 4.0, 12.25 / 50.0)] {
            let scaled = dist(d, lam, s);
            let unit = dist(d, lam, 1.0);
            for x in [0.01, 0.7, 3.0, 25.0] {
                assert_eq!(scaled.sf(x), unit.sf(x / s));
            }
        }
    }

    #[test]
    fn extreme_tail_quantiles_round_trip() {
        let law = ScaledChi2::new(2, 1.0, 1.0).unwrap();
        for &p in &[1e-30, 1e-120, 1e-250] {
            for tail in [Tail::Lower, Tail::Upper] {
                let x = law.quantile(p, tail);
                assert!(x > 0.0 && x.is_finite(), "{p} {tail:?}");
                let back = law.tail(x, tail);
                assert!((back / p - 1.0).abs() < 1e-8, "{p} {tail:?}: {back}");
            }
        }
    }
}
