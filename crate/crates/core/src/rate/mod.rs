//! Rate machinery: recurrence polynomials, `g(η)`, the variance scale `K`
//! and checks of the supporting matrix inequalities.

mod eta;
mod lemmas;
mod poly;
mod predict;
mod variance;

pub use eta::{
    alpha_of_eta, beta_of_eta, g_of_eta, g_ratio_form, gamma_of_eta, vr_hb_g, vr_pca_g, vr_power_m_g, RateParams,
};
pub use lemmas::{
    commutator_identity_check, projector, projector_sandwich, quadratic_form_bound_check, rank_one_sandwich,
    trace_bound_check,
};
pub use poly::{closed_form_pair, p_closed_form, p_poly, q_closed_form, q_poly, r_poly, Regime};
pub use predict::predicted_full_batch_gap;
pub use variance::{batch_deviation, estimate_k, estimate_k_with, KMethod, VarianceEstimate, MAX_ENUMERATED_BATCHES};
