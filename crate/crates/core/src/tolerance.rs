//! Numerical floors and verification tolerances shared by the library, the
//! CLI and the test suites.

use serde::Serialize;

/// Below this visibility the meter phase is reported as undefined.
pub const PHASE_FLOOR: f64 = 1e-14;

/// Postselection probabilities at or below this value are treated as
/// vanishing; the QFI is not evaluated there.
pub const P_FLOOR: f64 = 1e-300;

/// Oracle vs analytic `I_perp`: relative part of `max(rel * I, abs)`.
pub const ORACLE_QFI_REL: f64 = 1e-6;
/// Oracle vs analytic `I_perp`: absolute floor.
pub const ORACLE_QFI_ABS: f64 = 1e-8;
/// Projection norm vs postselection probability.
pub const ORACLE_PROB_ABS: f64 = 1e-10;

/// Argument tolerance of the golden-section refinement.
pub const THETA_TOL: f64 = 1e-12;
/// Relative gap below which two optima count as tied.
pub const TIE_REL: f64 = 1e-9;

/// Snapshot written into run manifests.
#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub phase_floor: f64,
    pub p_floor: f64,
    pub oracle_qfi_rel: f64,
    pub oracle_qfi_abs: f64,
    pub oracle_prob_abs: f64,
    pub theta_tol: f64,
    pub tie_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            phase_floor: PHASE_FLOOR,
            p_floor: P_FLOOR,
            oracle_qfi_rel: ORACLE_QFI_REL,
            oracle_qfi_abs: ORACLE_QFI_ABS,
            oracle_prob_abs: ORACLE_PROB_ABS,
            theta_tol: THETA_TOL,
            tie_rel: TIE_REL,
        }
    }
}
