//! Error curves, order fits, GEM–EM coupling and one-step probes, and exact
//! empirical Wasserstein distances.

mod curve;
mod estimators;
mod wasserstein;

pub use curve::{fit_order, CurveEntry, ErrorCurve, ErrorKind, OrderFit};
pub use estimators::{
    batched_moment, coupling_discrepancy_curve, one_step_bias, simulate_paths, strong_error_curve, CurveSetup,
    SE_BATCHES,
};
pub use wasserstein::{
    assignment_cost, min_cost_assignment, wasserstein_p, EmpiricalMeasure, GroundMetric, MAX_POINTS,
};
