//! Discrete counterparts of the well-posedness argument and the
//! verification experiments built on them.
//!
//! - [`solve_source_shift`] and [`interface_charge_source`] move the
//!   stimuli into a static field `ũ` and an interface charge `q`;
//!   [`shifted_equivalence_check`] confirms the two formulations agree.
//! - [`solve_lifting`] builds `W(w, r)`; [`two_stage_lifting`] is the
//!   constructive alternative used as an oracle.
//! - [`bilinear_form`], [`coercivity_estimate`], [`poincare_constant`].
//! - [`energy_report`], [`mms_convergence`], [`energy_study`],
//!   [`stability_study`], [`beta_limit_study`].

mod bilinear;
mod energy;
mod lifting;
mod mms;
mod shift;
mod studies;

pub use bilinear::{
    bilinear_form, bilinear_from_liftings, bilinear_matrix, coercivity_estimate, norm_gram_matrix, poincare_constant,
    CoercivityEstimate,
};
pub use energy::{energy_report, EnergyData, EnergyReport, LedgerRow};
pub use lifting::{
    broken_norm_sq, half_norm_sq, harmonic_extension, solve_lifting, two_stage_lifting, LiftingSolution,
};
pub use mms::{
    l2_error, mms_convergence, ConvergenceRow, ConvergenceTable, Ladder, ManufacturedKind, ManufacturedSolution,
    MmsLevel, MmsStudy,
};
pub use shift::{
    interface_charge_source, shift_jump, shifted_equivalence_check, solve_source_shift, EquivalenceReport,
};
pub use studies::{
    beta_limit_study, energy_study, loglog_slope, stability_study, BetaRow, BetaStudyConfig, BetaStudyResult,
    EnergyStudyConfig, EnergyStudyResult, RandomData, StabilityInput, StabilityReport, StabilityRow,
};
