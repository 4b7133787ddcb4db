//! Monte Carlo membership-inference game.
//!
//! Each trial flips a fair coin, draws `N` outputs of the Gaussian mechanism
//! in `d` dimensions from either the null (mean 0) or the alternative (mean
//! shifted by `Δ` along the first axis) and records the adversary's
//! statistic. Thresholding those statistics over a cutoff grid gives an
//! empirical ROC curve, once with each class taken as the negative one.
//!
//! Trial `i` draws from `ChaCha8Rng::seed_from_u64(seed)` switched to stream
//! `i`, so results do not depend on how trials are scheduled across threads.

use std::fmt;

use glrt_core::special::{chi2_cdf_inv, gaussian_sf_inv};
use glrt_core::{compose_homogeneous, MechanismParams, RocCurve, ScaledChi2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_CUTOFFS: usize = 100;
pub const DEFAULT_SEED: u64 = 42;
/// Null quantiles spanned by the cutoff grid.
const QUANTILE_RANGE: (f64, f64) = (1e-4, 1.0 - 1e-4);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adversary {
    /// Thresholds `‖ȳ‖²`, the squared norm of the averaged outputs.
    GlrtMagnitude,
    /// Thresholds the exact log-likelihood ratio; knows the shift direction.
    NpoLikelihood,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Outputs with mean 0 are the negative class; large statistics flag the
    /// shifted database.
    NullIsZero,
    /// Outputs with mean `Δ` are the negative class; small statistics flag
    /// the unshifted database.
    NullIsDelta,
}

#[derive(Clone, Debug)]
pub struct AuditConfig {
    pub params: MechanismParams,
    pub trials: usize,
    pub cutoffs: usize,
    pub seed: u64,
    pub adversary: Adversary,
}

impl AuditConfig {
    pub fn new(params: MechanismParams, adversary: Adversary) -> Self {
        AuditConfig {
            params,
            trials: DEFAULT_TRIALS,
            cutoffs: DEFAULT_CUTOFFS,
            seed: DEFAULT_SEED,
            adversary,
        }
    }

    pub fn validate(&self) -> Result<(), AuditError> {
        if self.trials == 0 {
            return Err(AuditError::InvalidConfig("trials must be at least 1"));
        }
        if self.cutoffs < 2 {
            return Err(AuditError::InvalidConfig("cutoffs must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AuditError {
    InvalidConfig(&'static str),
    /// One of the two classes received no trials, so a rate is undefined.
    EmptyClass {
        negatives: usize,
        positives: usize,
    },
}

impl fmt::Display for AuditError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditError::InvalidConfig(msg) => write!(f, "invalid audit configuration: {msg}"),
            AuditError::EmptyClass { negatives, positives } => write!(
                f,
                "cannot estimate rates: {negatives} trials from the unshifted and {positives} from the shifted database"
            ),
        }
    }
}

impl std::error::Error for AuditError {}

/// Outcome of one trial: which database generated the outputs and the
/// adversary's statistic on them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trial {
    pub shifted: bool,
    pub statistic: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    pub cutoff: f64,
    pub p_false: f64,
    pub p_detect: f64,
    pub false_alarms: usize,
    pub detections: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalRoc {
    pub direction: Direction,
    /// Sorted by `p_false`, ties by `p_detect`.
    pub points: Vec<RocPoint>,
    pub negatives: usize,
    pub positives: usize,
}

/// Statistic of one trial from `n` rounds of `d`-dimensional outputs.
pub fn draw_statistic<R: Rng + ?Sized>(
    rng: &mut R,
    params: &MechanismParams,
    adversary: Adversary,
    shifted: bool,
) -> f64 {
    let d = params.dim() as usize;
    let n = params.rounds();
    let sigma = params.noise_variance().sqrt();
    let shift = if shifted { params.sensitivity() } else { 0.0 };
    let mut sum = vec![0.0f64; d];
    for _ in 0..n {
        for (j, s) in sum.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            let mean = if j == 0 { shift } else { 0.0 };
            *s += mean + sigma * z;
        }
    }
    match adversary {
        Adversary::GlrtMagnitude => {
            let n = n as f64;
            sum.iter().map(|s| (s / n) * (s / n)).sum()
        }
        Adversary::NpoLikelihood => {
            // Σᵢ (‖yᵢ‖² − ‖yᵢ − ν‖²) / 2σ² = (⟨Σᵢ yᵢ, ν⟩ − N‖ν‖²/2) / σ².
            let delta = params.sensitivity();
            (sum[0] * delta - 0.5 * n as f64 * delta * delta) / params.noise_variance()
        }
    }
}

/// All trials of the game, in trial order.
pub fn simulate(config: &AuditConfig) -> Result<Vec<Trial>, AuditError> {
    config.validate()?;
    Ok((0..config.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            let shifted = rng.random::<bool>();
            let statistic = draw_statistic(&mut rng, &config.params, config.adversary, shifted);
            Trial { shifted, statistic }
        })
        .collect())
}

/// Cutoffs at `cutoffs` null quantiles spaced evenly over `[1e-4, 1 − 1e-4]`,
/// increasing. The null law is `χ²_d(0, σ²/N)` for the magnitude statistic
/// and `N(−λ/2, λ)` for the log-likelihood ratio, `λ = NΔ²/σ²`.
pub fn cutoff_grid(params: &MechanismParams, adversary: Adversary, cutoffs: usize) -> Vec<f64> {
    let (lo, hi) = QUANTILE_RANGE;
    let composed = compose_homogeneous(params);
    let quantile = |q: f64| -> f64 {
        match adversary {
            Adversary::GlrtMagnitude => {
                let null = ScaledChi2::central(params.dim(), composed.variance())
                    .expect("validated parameters");
                chi2_cdf_inv(&null, q).expect("quantile in (0, 1)")
            }
            Adversary::NpoLikelihood => {
                let lam = composed.noncentrality();
                let z = -gaussian_sf_inv(q).expect("quantile in (0, 1)");
                if lam == 0.0 {
                    z
                } else {
                    -0.5 * lam + lam.sqrt() * z
                }
            }
        }
    };
    let n = cutoffs.max(2);
    (0..n)
        .map(|i| match i {
            0 => quantile(lo),
            _ if i + 1 == n => quantile(hi),
            _ => quantile(lo + (hi - lo) * (i as f64 / (n - 1) as f64)),
        })
        .collect()
}

/// Empirical ROC points from recorded trials for one class assignment.
pub fn empirical_roc(
    trials: &[Trial],
    cutoffs: &[f64],
    direction: Direction,
) -> Result<EmpiricalRoc, AuditError> {
    let positives_shifted = trials.iter().filter(|t| t.shifted).count();
    let unshifted = trials.len() - positives_shifted;
    if unshifted == 0 || positives_shifted == 0 {
        return Err(AuditError::EmptyClass {
            negatives: unshifted,
            positives: positives_shifted,
        });
    }
    let (negatives, positives) = match direction {
        Direction::NullIsZero => (unshifted, positives_shifted),
        Direction::NullIsDelta => (positives_shifted, unshifted),
    };
    let mut points: Vec<RocPoint> = cutoffs
        .iter()
        .map(|&c| {
            let (mut false_alarms, mut detections) = (0, 0);
            for t in trials {
                let (flagged, positive) = match direction {
                    Direction::NullIsZero => (t.statistic > c, t.shifted),
                    Direction::NullIsDelta => (t.statistic < c, !t.shifted),
                };
                if flagged {
                    if positive {
                        detections += 1;
                    } else {
                        false_alarms += 1;
                    }
                }
            }
            RocPoint {
                cutoff: c,
                p_false: false_alarms as f64 / negatives as f64,
                p_detect: detections as f64 / positives as f64,
                false_alarms,
                detections,
            }
        })
        .collect();
    points.sort_by(|a, b| {
        a.p_false
            .total_cmp(&b.p_false)
            .then(a.p_detect.total_cmp(&b.p_detect))
    });
    Ok(EmpiricalRoc {
        direction,
        points,
        negatives,
        positives,
    })
}

/// Plays the game and returns the empirical curves with the unshifted and
/// with the shifted database as the negative class.
pub fn run_game(config: &AuditConfig) -> Result<(EmpiricalRoc, EmpiricalRoc), AuditError> {
    let trials = simulate(config)?;
    let cutoffs = cutoff_grid(&config.params, config.adversary, config.cutoffs);
    Ok((
        empirical_roc(&trials, &cutoffs, Direction::NullIsZero)?,
        empirical_roc(&trials, &cutoffs, Direction::NullIsDelta)?,
    ))
}

/// Largest vertical gap between the empirical points and `theory`.
pub fn compare_to_theory(empirical: &EmpiricalRoc, theory: &RocCurve) -> f64 {
    empirical
        .points
        .iter()
        .map(|p| (p.p_detect - theory.eval(p.p_false)).abs())
        .fold(0.0, f64::max)
}

/// Theoretical curve an empirical curve should follow.
pub fn theory_for(
    params: &MechanismParams,
    adversary: Adversary,
    direction: Direction,
) -> RocCurve {
    match (adversary, direction) {
        (Adversary::GlrtMagnitude, Direction::NullIsZero) => RocCurve::glrt(params),
        (Adversary::GlrtMagnitude, Direction::NullIsDelta) => RocCurve::glrt_prime(params),
        (Adversary::NpoLikelihood, _) => RocCurve::npo(params),
    }
}
