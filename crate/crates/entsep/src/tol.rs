//! Numerical tolerances used throughout the crate.
//!
//! All matrices handled here are at most 81×81, so double precision leaves
//! plenty of headroom; the values below are deliberately loose compared to
//! what the eigensolver actually delivers (~1e-14 relative).

/// Hermiticity drift allowed before an operator is rejected: max |M - M†|.
pub const TAU_HERM: f64 = 1e-10;

/// Allowed deviation of a density matrix trace from 1.
pub const TAU_TRACE: f64 = 1e-10;

/// Allowed deviation of a pure-state vector norm from 1.
pub const TAU_NORM: f64 = 1e-10;

/// Positivity slack: an operator counts as positive when its minimum
/// eigenvalue is ≥ -TAU_POS. Boundary states (e.g. the Størmer family at
/// α = 4) sit exactly on thresholds, hence the tri-state verdicts.
pub const TAU_POS: f64 = 1e-9;

/// Relative eigenpair residual bound: ‖M v - λ v‖ ≤ TAU_EIG · ‖M‖.
pub const TAU_EIG: f64 = 1e-12;

/// Slack for the entropic inequalities S(ρ_A) ≤ S(ρ); a violation must
/// exceed this margin to count.
pub const TAU_ENT: f64 = 1e-9;

/// Numerical rank cutoff, relative to the largest eigenvalue. Rank-based
/// quantities are discontinuous; a relative cutoff keeps verdicts
/// scale-free.
pub const TAU_RANK_REL: f64 = 1e-8;
