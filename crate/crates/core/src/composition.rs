//! Homogeneous composition and the large-dimension Gaussian limit.
//!
//! An adversary who sees `N` releases of the same query averages them, so the
//! averaged output is one Gaussian release with variance `σ²/N`. Composition
//! is therefore a substitution of parameters, not a convolution.

use libm::sqrt;

use crate::error::{Error, Result};
use crate::special::{q, q_inv};
use crate::trade_off::MechanismParams;

/// Parameters of the `N`-fold composed test statistic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComposedParams {
    base: MechanismParams,
    noncentrality: f64,
    variance: f64,
}

impl ComposedParams {
    pub fn base(&self) -> &MechanismParams {
        &self.base
    }

    /// `λ = NΔ²/σ²`
    pub fn noncentrality(&self) -> f64 {
        self.noncentrality
    }

    /// `σ²/N`
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Effective single-release signal-to-noise ratio `√λ`.
    pub fn shift(&self) -> f64 {
        sqrt(self.noncentrality)
    }
}

/// `λ_comp = NΔ²/σ²` and `σ²_comp = σ²/N`.
pub fn compose_homogeneous(params: &MechanismParams) -> ComposedParams {
    let n = params.rounds() as f64;
    let delta = params.sensitivity();
    let var = params.noise_variance();
    ComposedParams {
        base: *params,
        noncentrality: n * delta * delta / var,
        variance: var / n,
    }
}

/// Composes a sequence of releases. All entries must share sensitivity,
/// noise variance and dimension; their round counts add up.
pub fn compose_sequence(releases: &[MechanismParams]) -> Result<ComposedParams> {
    let first = releases.first().ok_or(Error::InvalidParameter {
        name: "releases",
        value: 0.0,
    })?;
    let mut rounds: u32 = 0;
    for r in releases {
        if r.sensitivity() != first.sensitivity()
            || r.noise_variance() != first.noise_variance()
            || r.dim() != first.dim()
        {
            return Err(Error::Heterogeneous);
        }
        rounds = rounds
            .checked_add(r.rounds())
            .ok_or(Error::InvalidParameter {
                name: "rounds",
                value: f64::INFINITY,
            })?;
    }
    let combined = MechanismParams::new(
        first.sensitivity(),
        first.noise_variance(),
        first.dim(),
        rounds,
    )?;
    Ok(compose_homogeneous(&combined))
}

/// The `μ` of a `μ`-GDP guarantee.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GdpParam {
    mu: f64,
}

impl GdpParam {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
            });
        }
        Ok(GdpParam { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// `μ = (NΔ²/σ²)·√(1/(2d))`.
///
/// Meant for `d ≫ 1` and `Δ/σ ≪ 1`; the regime is not enforced.
pub fn asymptotic_gdp_mu(params: &MechanismParams) -> GdpParam {
    let lam = compose_homogeneous(params).noncentrality();
    GdpParam {
        mu: lam * sqrt(1.0 / (2.0 * params.dim() as f64)),
    }
}

fn check_x(x: f64, what: &'static str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain { what, value: x });
    }
    Ok(())
}

/// Normal approximation of both chi-squared laws before the small-`λ/d`
/// expansion: `Q((Q⁻¹(x) − λ/√(2d)) / √(1 + 2λ/d))`.
pub fn asymptotic_roc_exact_clt(params: &MechanismParams, x: f64) -> Result<f64> {
    check_x(x, "asymptotic_roc_exact_clt")?;
    let lam = compose_homogeneous(params).noncentrality();
    let d = params.dim() as f64;
    if lam == 0.0 {
        return Ok(x);
    }
    let spread = sqrt(2.0 * lam / d + 1.0);
    Ok(q(q_inv(x) / spread - lam / (sqrt(2.0 * d) * spread)))
}

/// `Q(Q⁻¹(x) − μ)` with `μ` from [`asymptotic_gdp_mu`].
pub fn asymptotic_roc_gdp(params: &MechanismParams, x: f64) -> Result<f64> {
    check_x(x, "asymptotic_roc_gdp")?;
    let mu = asymptotic_gdp_mu(params).mu();
    if mu == 0.0 {
        return Ok(x);
    }
    Ok(q(q_inv(x) - mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trade_off::npo_roc;

    fn params(delta: f64, var: f64, d: u32, n: u32) -> MechanismParams {
        MechanismParams::new(delta, var, d, n).unwrap()
    }

    #[test]
    fn single_round_is_identity_substitution() {
        let c = compose_homogeneous(&params(1.5, 4.0, 3, 1));
        assert_eq!(c.noncentrality(), 1.5 * 1.5 / 4.0);
        assert_eq!(c.variance(), 4.0);
    }

    #[test]
    fn composed_values() {
        let c = compose_homogeneous(&params(1.0, 36.0, 1, 70));
        assert!((c.noncentrality() - 70.0 / 36.0).abs() < 1e-15);
        assert!((c.variance() - 36.0 / 70.0).abs() < 1e-15);
    }

    #[test]
    fn sequence_requires_homogeneity() {
        let a = params(1.0, 2.0, 3, 4);
        let b = params(1.0, 2.0, 3, 6);
        let c = compose_sequence(&[a, b]).unwrap();
        assert_eq!(c.base().rounds(), 10);
        assert_eq!(c, compose_homogeneous(&params(1.0, 2.0, 3, 10)));
        let other = params(1.0, 2.5, 3, 1);
        assert_eq!(compose_sequence(&[a, other]), Err(Error::Heterogeneous));
        assert!(compose_sequence(&[]).is_err());
    }

    #[test]
    fn mu_values() {
        assert_eq!(asymptotic_gdp_mu(&params(0.0, 1.0, 10, 5)).mu(), 0.0);
        let mu = asymptotic_gdp_mu(&params(1.0, 100.0, 300, 1000)).mu();
        assert!((mu - 10.0 * sqrt(1.0 / 600.0)).abs() < 1e-15);
        let m1 = asymptotic_gdp_mu(&params(0.7, 3.0, 16, 9)).mu();
        let m2 = asymptotic_gdp_mu(&params(0.7, 3.0, 32, 9)).mu();
        assert!((m1 / m2 - core::f64::consts::SQRT_2).abs() < 1e-14);
        let m4 = asymptotic_gdp_mu(&params(1.4, 3.0, 16, 9)).mu();
        assert!((m4 - 4.0 * m1).abs() < 1e-14 * m4);
    }

    #[test]
    fn gdp_curve_is_gaussian_shift() {
        let p = params(1.0, 100.0, 300, 1000);
        let mu = asymptotic_gdp_mu(&p).mu();
        assert!((asymptotic_roc_gdp(&p, 0.5).unwrap() - q(-mu)).abs() < 1e-16);
        for x in [0.0, 1e-6, 0.01, 0.3, 0.9, 1.0] {
            let npo = npo_roc(mu, 1.0, x).unwrap();
            assert_eq!(asymptotic_roc_gdp(&p, x).unwrap(), npo);
        }
        let zero = params(0.0, 1.0, 4, 3);
        assert_eq!(asymptotic_roc_gdp(&zero, 0.37).unwrap(), 0.37);
        assert_eq!(asymptotic_roc_exact_clt(&zero, 0.37).unwrap(), 0.37);
        assert!(asymptotic_roc_gdp(&p, 1.5).is_err());
    }

    #[test]
    fn clt_forms_agree_at_large_dimension() {
        let p = params(1.0, 100.0, 300, 1000);
        let mut worst: f64 = 0.0;
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let a = asymptotic_roc_exact_clt(&p, x).unwrap();
            let b = asymptotic_roc_gdp(&p, x).unwrap();
            worst = worst.max((a - b).abs());
        }
        assert!(worst <= 0.01, "{worst}");
    }
}
