//! Predicted convergence orders and the analytic criteria behind them.

mod approach;
pub mod autonomous;
pub mod feller;
pub mod ito;
pub mod rate;
pub mod timechange;

pub use approach::Side;
pub use autonomous::{AutonomousModel, ScalarFn};
pub use feller::{
    feller_test, feller_test_with, EndpointClass, EndpointResult, FellerConclusion, FellerOptions, FellerResult,
};
pub use ito::{check_derivatives, ito_criterion, CriterionReport, EndpointScan, ItoGrid, Trend};
pub use rate::{is_vacuous, mu0, mu1, predict_rate, theorem_rate, Provenance, RatePrediction};
pub use timechange::{build_timechange, TimeChange};
