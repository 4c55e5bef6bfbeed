//! Numerical constants shared across the engine. Reports embed them so that
//! stored results are self-describing.

use serde::{Deserialize, Serialize};

/// Relative tolerance for pure quaternion algebra.
pub const ALGEBRA: f64 = 1e-12;
/// Conformal defect allowed when jets are exact.
pub const ANALYTIC_CONFORMAL: f64 = 1e-9;
/// Multiplier in `FD_FACTOR · h² · scale`.
pub const FD_FACTOR: f64 = 10.0;
/// Transform denominators below this times the chart median are masked.
pub const SINGULARITY_FLOOR: f64 = 1e-7;
/// `|f_u|` below this times the chart median is not an immersion.
pub const IMMERSION_FLOOR: f64 = 1e-8;
/// Super-conformality verdict threshold on exact jets.
pub const SUPERCONFORMAL_ANALYTIC: f64 = 1e-6;
/// Verdict threshold on sampled charts, as a multiple of `h² max(1, κ)²`.
pub const SUPERCONFORMAL_FD_FACTOR: f64 = 5.0;
/// Threshold for the CR residual of a twistor lift, as a multiple of `h² max(1, κ)²`.
pub const LIFT_FD_FACTOR: f64 = 5.0;
/// Neither relative defect above counts as small beyond this, however coarse the grid.
pub const VERDICT_CAP: f64 = 0.25;
/// Samples closer than this to an open edge are left out of checks built from
/// three or more nested differences; one-sided edge stencils have a different
/// error constant and nesting turns that jump into O(1) noise.
pub const NESTED_MARGIN: usize = 6;
/// A period of an integrated 1-form counts as zero below this.
pub const PERIOD: f64 = 1e-6;

/// `FD_FACTOR · h² · max(1, scale)`
pub fn fd_tol(h: f64, scale: f64) -> f64 {
    FD_FACTOR * h * h * scale.max(1.0)
}

/// Snapshot of the constants, for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub algebra: f64,
    pub analytic_conformal: f64,
    pub fd_factor: f64,
    pub singularity_floor: f64,
    pub immersion_floor: f64,
    pub superconformal_analytic: f64,
    pub superconformal_fd_factor: f64,
    pub lift_fd_factor: f64,
    pub verdict_cap: f64,
    pub period: f64,
    pub nested_margin: usize,
}

impl Default for Ledger {
    fn default() -> Self {
        Ledger {
            algebra: ALGEBRA,
            analytic_conformal: ANALYTIC_CONFORMAL,
            fd_factor: FD_FACTOR,
            singularity_floor: SINGULARITY_FLOOR,
            immersion_floor: IMMERSION_FLOOR,
            superconformal_analytic: SUPERCONFORMAL_ANALYTIC,
            superconformal_fd_factor: SUPERCONFORMAL_FD_FACTOR,
            lift_fd_factor: LIFT_FD_FACTOR,
            verdict_cap: VERDICT_CAP,
            period: PERIOD,
            nested_margin: NESTED_MARGIN,
        }
    }
}

/// `factor · h² · max(1, κ)²`, capped at [`VERDICT_CAP`].
pub fn verdict_tol(factor: f64, h: f64, curvature_scale: f64) -> f64 {
    let k = curvature_scale.max(1.0);
    (factor * h * h * k * k).min(VERDICT_CAP)
}
