//! Configuration-driven experiment runner for the `holder_euler` library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod commands;
pub mod config;
pub mod csv;
pub mod expr;
mod model;

pub use app::run;
