//! Privacy accounting for the Gaussian mechanism against an adversary that
//! does not know the direction of the mean shift and therefore tests by output
//! magnitude (a generalized likelihood ratio test).
//!
//! The crate builds exact ROC curves for that adversary from noncentral
//! chi-squared laws, symmetrizes them, converts them to `(ε, δ)` privacy
//! profiles by Legendre-Fenchel conjugation, and supports homogeneous
//! composition and Poisson subsampling. The Neyman-Pearson optimal Gaussian
//! curve is available alongside for comparison.
//!
//! Everything here is pure computation; the crate is `no_std` and needs only
//! `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

pub mod amplification;
pub mod composition;
pub mod conversion;
mod error;
pub mod special;
pub mod trade_off;

pub use amplification::{amplify_point, amplify_profile, SubsamplingConfig};
pub use composition::{
    asymptotic_gdp_mu, asymptotic_roc_exact_clt, asymptotic_roc_gdp, compose_homogeneous,
    compose_sequence, ComposedParams, GdpParam,
};
pub use conversion::{
    delta_at_epsilon, epsilon_at_delta, find_root, numerical_derivative, profile_grid,
    EpsilonValue, PrivacyProfile, ProfilePoint,
};
pub use error::{Error, Result};
pub use special::ScaledChi2;
pub use trade_off::{
    glrt_roc, glrt_roc_d1_closed, glrt_roc_prime, npo_roc, symmetrize, CurveKind, MechanismParams,
    RocCurve,
};
