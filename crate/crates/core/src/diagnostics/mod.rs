//! Independent recomputation of every estimate the regularized problem
//! satisfies, evaluated on finished trajectories.

mod cutoff;
mod ledger;
pub mod recompute;
mod report;
mod traces;
mod weak;

pub use cutoff::{cutoff_experiment, cutoff_integrals, CutoffReport, DEFAULT_K_LIST};
pub use ledger::{
    check_bounds, check_first_energy, check_ledger_agreement, check_mass, check_second_energy, BoundsReport,
    FirstEnergyReport, LedgerAgreement, MassReport, SecondEnergyReport, SLACK_C,
};
pub use report::{Report, ReportRow, Verdict, REPORT_HEADER};
pub use traces::{
    boundary_weight, dirichlet_layers, dirichlet_scaling, dirichlet_scaling_of, fit_line, gamma1_load_pairing,
    initial_trace, shell_flux, shell_flux_at, DirichletScalingReport, InitialTraceReport, ShellFluxReport,
};
pub use weak::{
    double_evaluation, residual, smooth_step, smooth_step_derivative, test_bank, weak_residual, DoubleEvaluation,
    Evaluation, TestFunction, TimeProfile, WeakForm, WeakResidualReport,
};
