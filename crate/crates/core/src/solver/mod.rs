//! IMEX time stepping for the regularized problem: implicit viscosity,
//! explicit nonlocal transport, optional Picard tightening.

mod config;
mod flux;
mod initial;
mod step;
mod sweep;
mod trajectory;

pub use config::SolverConfig;
pub use flux::{flux_form, flux_with_potential, FluxEvaluation};
pub use initial::{InitialData, InitialProfile};
pub use step::{boundary_outflow, StepOutcome, Stepper};
pub use sweep::{limit_sweep, space_time_distance, LegKind, RunSummary, SweepLeg, SweepReport, SweepRun};
pub use trajectory::{eta, run, AdaptEvent, StateTrajectory, StepLedger};
