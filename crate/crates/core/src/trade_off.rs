//! ROC curves of membership-inference tests against the Gaussian mechanism.
//!
//! The magnitude-based adversary thresholds `T(y) = ‖y‖²`. Under the null the
//! statistic is a scaled central chi-squared variable, under the alternative a
//! noncentral one, which yields two directional curves:
//!
//! * `R(x)  = Ψ_alt(Ψ_null⁻¹(x))` testing "no shift" against "shift",
//! * `R′(x) = Φ_null(Φ_alt⁻¹(x))` with the roles of the hypotheses swapped.
//!
//! Neither is symmetric, so conversion to `(ε, δ)` uses their concave,
//! symmetric envelope built by [`symmetrize`].

use alloc::boxed::Box;
use alloc::vec::Vec;

use libm::{exp, log, log10, pow, sqrt};

use crate::composition::{compose_homogeneous, GdpParam};
use crate::conversion::find_root;
use crate::error::{Error, Result};
use crate::special::{q, q_inv, ScaledChi2, Tail};

/// Gaussian mechanism parameters: sensitivity `Δ`, noise variance `σ²`,
/// query dimension `d` and number of homogeneous releases `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MechanismParams {
    sensitivity: f64,
    noise_variance: f64,
    dim: u32,
    rounds: u32,
}

impl MechanismParams {
    /// `Δ = 0` is accepted as the degenerate perfectly private mechanism.
    pub fn new(sensitivity: f64, noise_variance: f64, dim: u32, rounds: u32) -> Result<Self> {
        if !(sensitivity >= 0.0) || !sensitivity.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sensitivity",
                value: sensitivity,
            });
        }
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::InvalidParameter {
                name: "noise_variance",
                value: noise_variance,
            });
        }
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                value: 0.0,
            });
        }
        if rounds == 0 {
            return Err(Error::InvalidParameter {
                name: "rounds",
                value: 0.0,
            });
        }
        Ok(MechanismParams {
            sensitivity,
            noise_variance,
            dim,
            rounds,
        })
    }

    /// A single release (`N = 1`).
    pub fn single(sensitivity: f64, noise_variance: f64, dim: u32) -> Result<Self> {
        Self::new(sensitivity, noise_variance, dim, 1)
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    /// Same mechanism released `rounds` times.
    pub fn with_rounds(&self, rounds: u32) -> Result<Self> {
        Self::new(self.sensitivity, self.noise_variance, self.dim, rounds)
    }

    /// Same mechanism with a different query dimension.
    pub fn with_dim(&self, dim: u32) -> Result<Self> {
        Self::new(self.sensitivity, self.noise_variance, dim, self.rounds)
    }

    /// Single-release signal-to-noise ratio `Δ/σ`.
    pub fn snr(&self) -> f64 {
        self.sensitivity / sqrt(self.noise_variance)
    }

    pub fn is_degenerate(&self) -> bool {
        self.sensitivity == 0.0
    }

    fn null_and_alt(&self) -> (ScaledChi2, ScaledChi2) {
        let composed = compose_homogeneous(self);
        // Both constructions are valid: dim ≥ 1, λ ≥ 0 finite, σ²/N > 0.
        let null = ScaledChi2::central(self.dim, composed.variance()).expect("valid null law");
        let alt = ScaledChi2::new(self.dim, composed.noncentrality(), composed.variance())
            .expect("valid alternative law");
        (null, alt)
    }
}

/// Which test a curve describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveKind {
    /// Magnitude test, null = no shift.
    GlrtR,
    /// Magnitude test, null = shifted.
    GlrtRPrime,
    /// Closed form of [`CurveKind::GlrtR`] for `d = 1`.
    GlrtD1Closed,
    /// Neyman-Pearson optimal (likelihood ratio) test.
    Npo,
    /// Concave symmetric envelope of a curve pair.
    Symmetrized,
    /// Gaussian limit `Q(Q⁻¹(x) − μ)` for many rounds in high dimension.
    AsymptoticGdp,
}

/// An evaluatable ROC curve `x = P_f ↦ y = P_d` on `[0, 1]`.
///
/// Curves are immutable once built and cheap to clone, except symmetrized
/// curves which own their two components.
#[derive(Clone, Debug)]
pub struct RocCurve {
    kind: CurveKind,
    shape: Shape,
}

#[derive(Clone, Debug)]
enum Shape {
    Diagonal,
    /// `x = P(T > c | null)`, `y = P(T > c | alt)`.
    Upper {
        null: ScaledChi2,
        alt: ScaledChi2,
    },
    /// `x = P(T ≤ c | alt)`, `y = P(T ≤ c | null)`.
    Lower {
        null: ScaledChi2,
        alt: ScaledChi2,
    },
    /// `Q(Q⁻¹(x/2) − s) + Q(Q⁻¹(x/2) + s)`.
    TwoSided {
        shift: f64,
    },
    /// `Q(Q⁻¹(x) − s)`.
    Shift {
        shift: f64,
    },
    Envelope(Box<Envelope>),
    /// Piecewise-linear concave hull through sorted points.
    Hull(Vec<(f64, f64)>),
}

#[derive(Clone, Debug)]
struct Envelope {
    first: RocCurve,
    second: RocCurve,
    chord: Option<Chord>,
}

#[derive(Clone, Copy, Debug)]
struct Chord {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

impl Chord {
    fn contains(&self, x: f64) -> bool {
        x >= self.x1 && x <= self.x2
    }

    fn slope(&self) -> f64 {
        (self.y2 - self.y1) / (self.x2 - self.x1)
    }

    fn at(&self, x: f64) -> f64 {
        self.y1 + (x - self.x1) * self.slope()
    }
}

impl RocCurve {
    /// The diagonal `y = x` (identical hypotheses), tagged with `kind`.
    pub fn diagonal(kind: CurveKind) -> Self {
        RocCurve {
            kind,
            shape: Shape::Diagonal,
        }
    }

    /// `R` for `params`, with `N`-fold composition applied.
    pub fn glrt(params: &MechanismParams) -> Self {
        if params.is_degenerate() {
            return Self::diagonal(CurveKind::GlrtR);
        }
        let (null, alt) = params.null_and_alt();
        RocCurve {
            kind: CurveKind::GlrtR,
            shape: Shape::Upper { null, alt },
        }
    }

    /// `R′` for `params`, with `N`-fold composition applied.
    pub fn glrt_prime(params: &MechanismParams) -> Self {
        if params.is_degenerate() {
            return Self::diagonal(CurveKind::GlrtRPrime);
        }
        let (null, alt) = params.null_and_alt();
        RocCurve {
            kind: CurveKind::GlrtRPrime,
            shape: Shape::Lower { null, alt },
        }
    }

    /// Closed form of `R` for a scalar query. Fails unless `dim == 1`.
    pub fn glrt_d1_closed(params: &MechanismParams) -> Result<Self> {
        if params.dim() != 1 {
            return Err(Error::InvalidParameter {
                name: "dim",
                value: params.dim() as f64,
            });
        }
        let shift = compose_homogeneous(params).shift();
        Ok(Self::two_sided(shift))
    }

    fn two_sided(shift: f64) -> Self {
        if shift == 0.0 {
            return Self::diagonal(CurveKind::GlrtD1Closed);
        }
        RocCurve {
            kind: CurveKind::GlrtD1Closed,
            shape: Shape::TwoSided { shift },
        }
    }

    /// Neyman-Pearson optimal curve for `params`; composition gives the
    /// shift `√N·Δ/σ`. The curve does not depend on the dimension.
    pub fn npo(params: &MechanismParams) -> Self {
        Self::gaussian_shift(CurveKind::Npo, compose_homogeneous(params).shift())
    }

    /// `Q(Q⁻¹(x) − μ)` for a `μ`-GDP mechanism.
    pub fn asymptotic_gdp(mu: GdpParam) -> Self {
        Self::gaussian_shift(CurveKind::AsymptoticGdp, mu.mu())
    }

    fn gaussian_shift(kind: CurveKind, shift: f64) -> Self {
        if shift == 0.0 {
            return Self::diagonal(kind);
        }
        RocCurve {
            kind,
            shape: Shape::Shift { shift },
        }
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.shape, Shape::Diagonal)
    }

    /// `P_d` at `P_f = x`. Arguments outside `[0, 1]` are clamped.
    pub fn eval(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let x = x.clamp(0.0, 1.0);
        match &self.shape {
            Shape::Diagonal => x,
            Shape::Upper { null, alt } => {
                if x == 0.0 || x == 1.0 {
                    return x;
                }
                alt.sf(null.quantile(x, Tail::Upper))
            }
            Shape::Lower { null, alt } => {
                if x == 0.0 || x == 1.0 {
                    return x;
                }
                null.cdf(alt.quantile(x, Tail::Lower))
            }
            Shape::TwoSided { shift } => {
                let t = q_inv(0.5 * x);
                (q(t - shift) + q(t + shift)).min(1.0)
            }
            Shape::Shift { shift } => q(q_inv(x) - shift),
            Shape::Envelope(env) => match env.chord {
                Some(chord) if chord.contains(x) => chord.at(x),
                _ => env.first.eval(x).max(env.second.eval(x)),
            },
            Shape::Hull(points) => hull_eval(points, x),
        }
    }

    /// Analytic slope `dP_d/dP_f` at `x`. Infinite slopes are returned as
    /// `+∞` (for instance at `x = 0` when the curve is vertical there).
    pub fn slope(&self, x: f64) -> f64 {
        self.eval_with_slope(x).1
    }

    /// Value and analytic slope at `x`, sharing the threshold computation.
    pub fn eval_with_slope(&self, x: f64) -> (f64, f64) {
        if x.is_nan() {
            return (f64::NAN, f64::NAN);
        }
        let x = x.clamp(0.0, 1.0);
        match &self.shape {
            Shape::Diagonal => (x, 1.0),
            Shape::Upper { null, alt } => {
                let c = null.quantile(x, Tail::Upper);
                let y = if x == 0.0 || x == 1.0 { x } else { alt.sf(c) };
                // Slope of (Ψ_null(c), Ψ_alt(c)) is f_alt(c)/f_null(c).
                (y, exp(alt.log_density_ratio(c)))
            }
            Shape::Lower { null, alt } => {
                let c = alt.quantile(x, Tail::Lower);
                let y = if x == 0.0 || x == 1.0 { x } else { null.cdf(c) };
                (y, exp(-alt.log_density_ratio(c)))
            }
            Shape::TwoSided { shift } => {
                let t = q_inv(0.5 * x);
                let y = (q(t - shift) + q(t + shift)).min(1.0);
                // e^{-s²/2} cosh(s t)
                let half = 0.5 * shift * shift;
                let slope = 0.5 * (exp(shift * t - half) + exp(-shift * t - half));
                (y, slope)
            }
            Shape::Shift { shift } => {
                let t = q_inv(x);
                (q(t - shift), exp(shift * t - 0.5 * shift * shift))
            }
            Shape::Envelope(env) => match env.chord {
                Some(chord) if chord.contains(x) => (chord.at(x), chord.slope()),
                _ => {
                    let a = env.first.eval_with_slope(x);
                    let b = env.second.eval_with_slope(x);
                    if a.0 >= b.0 {
                        a
                    } else {
                        b
                    }
                }
            },
            Shape::Hull(points) => (hull_eval(points, x), hull_slope(points, x)),
        }
    }

    /// Samples the curve at `n ≥ 2` evenly spaced abscissae including both
    /// endpoints.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let x = if i + 1 == n {
                    1.0
                } else {
                    i as f64 / (n - 1) as f64
                };
                (x, self.eval(x))
            })
            .collect()
    }
}

fn hull_eval(points: &[(f64, f64)], x: f64) -> f64 {
    let i = segment_index(points, x);
    let (x0, y0) = points[i];
    let (x1, y1) = points[i + 1];
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn hull_slope(points: &[(f64, f64)], x: f64) -> f64 {
    let i = segment_index(points, x);
    let (x0, y0) = points[i];
    let (x1, y1) = points[i + 1];
    (y1 - y0) / (x1 - x0)
}

fn segment_index(points: &[(f64, f64)], x: f64) -> usize {
    let upper = points.partition_point(|p| p.0 <= x);
    upper.clamp(1, points.len() - 1) - 1
}

fn check_probability(x: f64, what: &'static str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain { what, value: x });
    }
    Ok(())
}

fn single_params(sensitivity: f64, noise_variance: f64) -> Result<MechanismParams> {
    MechanismParams::single(sensitivity, noise_variance, 1)
}

/// `R(x) = Ψ_{χ²_d(NΔ²/σ², σ²/N)}(Ψ⁻¹_{χ²_d(0, σ²/N)}(x))`.
pub fn glrt_roc(params: &MechanismParams, x: f64) -> Result<f64> {
    check_probability(x, "glrt_roc")?;
    Ok(RocCurve::glrt(params).eval(x))
}

/// `R′(x) = Φ_{χ²_d(0, σ²/N)}(Φ⁻¹_{χ²_d(NΔ²/σ², σ²/N)}(x))`.
pub fn glrt_roc_prime(params: &MechanismParams, x: f64) -> Result<f64> {
    check_probability(x, "glrt_roc_prime")?;
    Ok(RocCurve::glrt_prime(params).eval(x))
}

/// `Q(Q⁻¹(x/2) − Δ/σ) + Q(Q⁻¹(x/2) + Δ/σ)` for a single scalar release.
pub fn glrt_roc_d1_closed(sensitivity: f64, noise_variance: f64, x: f64) -> Result<f64> {
    check_probability(x, "glrt_roc_d1_closed")?;
    let params = single_params(sensitivity, noise_variance)?;
    Ok(RocCurve::glrt_d1_closed(&params)?.eval(x))
}

/// `Q(Q⁻¹(x) − Δ/σ)` for a single release.
pub fn npo_roc(sensitivity: f64, noise_variance: f64, x: f64) -> Result<f64> {
    check_probability(x, "npo_roc")?;
    let params = single_params(sensitivity, noise_variance)?;
    Ok(RocCurve::npo(&params).eval(x))
}

/// Lower end of the initial log₁₀ search range for slope-one points.
const SEARCH_LOG10_LO: f64 = -14.0;
/// Furthest the lower end is pushed when the slope at `1e-14` is still small.
const SEARCH_LOG10_FLOOR: f64 = -300.0;
/// Largest abscissa probed below one; keeps numerical slopes interior.
pub(crate) const SEARCH_X_HI: f64 = 1.0 - 1.0 / 1_099_511_627_776.0;

/// Abscissa where a concave curve's slope falls through `target`, searched in
/// log-x. `None` when the slope stays on one side over `(0, 1)`.
pub(crate) fn slope_crossing(slope: impl Fn(f64) -> f64, target: f64) -> Option<f64> {
    let log_target = log(target);
    let g = |u: f64| log(slope(pow(10.0, u))) - log_target;
    let hi = log10(SEARCH_X_HI);
    if !(g(hi) < 0.0) {
        return None;
    }
    let mut lo = SEARCH_LOG10_LO;
    while !(g(lo) > 0.0) {
        if lo <= SEARCH_LOG10_FLOOR {
            return None;
        }
        lo = (lo - 20.0).max(SEARCH_LOG10_FLOOR);
    }
    find_root(g, lo, hi, 1e-12).ok().map(|u| pow(10.0, u))
}

/// Concave, symmetric envelope of a pair of directional curves.
///
/// Each curve is followed up to the point where its slope equals one; the two
/// points are joined by a chord. If the chord does not lie on or above both
/// curves the pointwise maximum is used instead. If a slope-one point cannot
/// be bracketed the envelope falls back to the upper concave hull of the
/// sampled pointwise maximum.
pub fn symmetrize(r: &RocCurve, r_prime: &RocCurve) -> Result<RocCurve> {
    let kind = CurveKind::Symmetrized;
    if r.is_diagonal() && r_prime.is_diagonal() {
        return Ok(RocCurve::diagonal(kind));
    }
    let x1 = slope_crossing(|x| r.slope(x), 1.0);
    let x2 = slope_crossing(|x| r_prime.slope(x), 1.0);
    let (x1, x2) = match (x1, x2) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Ok(RocCurve {
                kind,
                shape: Shape::Hull(concave_hull_of_max(r, r_prime)),
            })
        }
    };

    let chord = Chord {
        x1,
        y1: r.eval(x1),
        x2,
        y2: r_prime.eval(x2),
    };
    let chord = if x1 < x2 && chord_dominates(&chord, r, r_prime) {
        Some(chord)
    } else {
        None
    };
    Ok(RocCurve {
        kind,
        shape: Shape::Envelope(Box::new(Envelope {
            first: r.clone(),
            second: r_prime.clone(),
            chord,
        })),
    })
}

fn chord_dominates(chord: &Chord, r: &RocCurve, r_prime: &RocCurve) -> bool {
    const PROBES: usize = 16;
    (1..PROBES).all(|i| {
        let x = chord.x1 + (chord.x2 - chord.x1) * i as f64 / PROBES as f64;
        let top = r.eval(x).max(r_prime.eval(x));
        chord.at(x) >= top - 1e-12
    })
}

/// Upper concave hull of `max(r, r′)` sampled on a grid that is dense near
/// both ends of the unit interval.
fn concave_hull_of_max(r: &RocCurve, r_prime: &RocCurve) -> Vec<(f64, f64)> {
    let mut xs: Vec<f64> = Vec::new();
    for i in 0..=120 {
        let e = -14.0 + 14.0 * i as f64 / 120.0;
        let x = pow(10.0, e) * 0.5;
        xs.push(x);
        xs.push(1.0 - x);
    }
    for i in 0..=512 {
        xs.push(i as f64 / 512.0);
    }
    xs.push(0.0);
    xs.push(1.0);
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();

    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(xs.len());
    for x in xs {
        let y = r.eval(x).max(r_prime.eval(x));
        let p = (x, y);
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b while it lies on or below the segment a-p.
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}
