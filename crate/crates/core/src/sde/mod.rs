//! Domain types for scalar SDEs `dX = a(t,X) dt + σ(t,X)^γ dW`.

mod grid;
mod inequality;
mod model;
mod param;
mod prototype;
mod validate;

pub use grid::TimeGrid;
pub use inequality::{concavity_gap, power_gap_bound};
pub use model::{clamped_power, eval_diffusion, CoefficientFn, CoefficientMeta, Domain, SdeModel};
pub use param::ParamFn;
pub use prototype::{
    make_prototype, mean_reverting_drift, PrototypeKind, PrototypeParams, THETA_CHECK_GRID,
};
pub use validate::{validate_assumptions, SamplingBox, ValidationReport, TOL_REL};
