//! Equidistant Euler scheme for scalar SDEs whose diffusion coefficient is a
//! fractional power `σ(t,x)^γ`, `γ ∈ [1/2, 1)`, of a Lipschitz function, with
//! Monte Carlo strong-error estimation and the rate criteria that predict the
//! attainable order.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brownian;
pub mod criteria;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod schemes;
pub mod sde;

pub use error::{Error, Result};
