//! Probability special functions: the standard normal tail, the regularized
//! incomplete gamma function, scaled (noncentral) chi-squared laws and the
//! Marcum Q-function of order one half.

mod chi2;
mod gamma;
mod gaussian;

pub use chi2::{chi2_cdf, chi2_cdf_inv, chi2_sf, chi2_sf_inv, ScaledChi2};
pub use gamma::{gamma_p, gamma_q};
pub use gaussian::{gaussian_sf, gaussian_sf_inv, log_gaussian_sf, marcum_q_half};

pub(crate) use chi2::Tail;
pub(crate) use gaussian::{q, q_inv};
