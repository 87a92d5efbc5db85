//! Monte Carlo estimators: strong error and fitted order, the inverse-moment
//! functional, pathwise comparison and the time-change check.
//!
//! Paths are processed in fixed blocks whose partial results are merged in
//! block order, so every estimate is independent of the worker count.

mod blocks;
pub mod compare;
pub mod config;
pub mod fit;
pub mod moments;
pub mod seed;
pub mod strong;
pub mod timechange;

pub use blocks::BLOCK_PATHS;
pub use compare::{comparison_check, comparison_trend, ComparisonReport};
pub use config::{ExperimentConfig, MIN_PATHS, REFERENCE_GAP};
pub use fit::{fit_order, OrderFit, MAX_RELATIVE_STDERR};
pub use moments::{estimate_inverse_moment, MomentCondition, MomentEstimate, MomentOptions, RefinementPoint};
pub use seed::derive_seed;
pub use strong::{estimate_strong_error, fit_levels, ConvergenceReport, LevelError, NodeStats};
pub use timechange::{timechange_check, TimeChangeReport, Z_CRITICAL_1E3};
