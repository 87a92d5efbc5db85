//! Time-dependent scalar parameters κ(t), λ(t), θ(t) for the prototype models.
//!
//! The family is deliberately closed: every member has a closed-form sup norm
//! and a closed-form bound on its Hölder-1/2 seminorm over `[0, T]`, which is
//! what makes the (HLG) constants of the prototype coefficients computable.

use std::fmt;

/// A parameter function from a small closed family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamFn {
    /// `t ↦ p`
    Constant(f64),
    /// `t ↦ p + q·t`
    Affine { p: f64, q: f64 },
    /// `t ↦ p + q·sin(ω t)`
    Sinusoidal { p: f64, q: f64, omega: f64 },
}

impl ParamFn {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ParamFn::Constant(p) => p,
            ParamFn::Affine { p, q } => p + q * t,
            ParamFn::Sinusoidal { p, q, omega } => p + q * (omega * t).sin(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            ParamFn::Constant(_) => true,
            ParamFn::Affine { q, .. } => q == 0.0,
            ParamFn::Sinusoidal { q, omega, .. } => q == 0.0 || omega == 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            ParamFn::Constant(p) => p.is_finite(),
            ParamFn::Affine { p, q } => p.is_finite() && q.is_finite(),
            ParamFn::Sinusoidal { p, q, omega } => {
                p.is_finite() && q.is_finite() && omega.is_finite()
            }
        }
    }

    /// `sup_{t ∈ [0,T]} |f(t)|`, possibly an upper bound for the sinusoid.
    pub fn sup_abs(&self, horizon: f64) -> f64 {
        match *self {
            ParamFn::Constant(p) => p.abs(),
            ParamFn::Affine { p, q } => p.abs().max((p + q * horizon).abs()),
            ParamFn::Sinusoidal { p, q, .. } => p.abs() + q.abs(),
        }
    }

    /// Upper bound on `sup_{s<t} |f(t) − f(s)| / |t − s|^{1/2}` over `[0, T]`.
    ///
    /// For the sinusoid, `|sin a − sin b| ≤ min(2, |a − b|) ≤ sqrt(2|a − b|)`.
    pub fn holder_half_bound(&self, horizon: f64) -> f64 {
        match *self {
            ParamFn::Constant(_) => 0.0,
            ParamFn::Affine { q, .. } => q.abs() * horizon.sqrt(),
            ParamFn::Sinusoidal { q, omega, .. } => q.abs() * (2.0 * omega.abs()).sqrt(),
        }
    }

    /// Minimum over a uniform grid of `n + 1` points on `[0, T]`.
    pub fn grid_min(&self, horizon: f64, n: usize) -> f64 {
        (0..=n)
            .map(|k| self.eval(horizon * k as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for ParamFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ParamFn::Constant(p) => write!(f, "{p}"),
            ParamFn::Affine { p, q } => write!(f, "affine:{p},{q}"),
            ParamFn::Sinusoidal { p, q, omega } => write!(f, "sin:{p},{q},{omega}"),
        }
    }
}

impl From<f64> for ParamFn {
    fn from(p: f64) -> Self {
        ParamFn::Constant(p)
    }
}
