//! Privacy amplification by Poisson subsampling.
//!
//! A mechanism that is `(ε, δ)`-DP on the full dataset becomes
//! `(ln(1 + γ(e^ε − 1)), γδ)`-DP when each record is included independently
//! with probability `γ`.

use alloc::vec::Vec;

use libm::{expm1, log1p};

use crate::conversion::ProfilePoint;
use crate::error::{Error, Result};

/// Inclusion probability `γ ∈ (0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubsamplingConfig {
    gamma: f64,
}

impl SubsamplingConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
            });
        }
        Ok(SubsamplingConfig { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn apply(&self, epsilon: f64, delta: f64) -> (f64, f64) {
        (log1p(self.gamma * expm1(epsilon)), self.gamma * delta)
    }
}

/// Amplified `(ε′, δ′)` for a single guarantee.
pub fn amplify_point(epsilon: f64, delta: f64, gamma: f64) -> Result<(f64, f64)> {
    let cfg = SubsamplingConfig::new(gamma)?;
    if !(epsilon >= 0.0) || epsilon.is_infinite() {
        return Err(Error::Domain {
            what: "epsilon",
            value: epsilon,
        });
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
        });
    }
    Ok(cfg.apply(epsilon, delta))
}

/// Amplifies every point of a profile; `floored` flags are carried over.
pub fn amplify_profile(profile: &[ProfilePoint], gamma: f64) -> Result<Vec<ProfilePoint>> {
    profile
        .iter()
        .map(|p| {
            let (epsilon, delta) = amplify_point(p.epsilon, p.delta, gamma)?;
            Ok(ProfilePoint {
                epsilon,
                delta,
                floored: p.floored,
            })
        })
        .collect()
}
