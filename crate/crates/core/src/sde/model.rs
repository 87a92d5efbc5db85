use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Known analytic constants of a coefficient `f(t, x)`.
///
/// `None` means "not declared"; validators then only report observations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoefficientMeta {
    /// Constant `K` of `|f(t,x) − f(t,y)| ≤ K|x − y|`.
    pub lipschitz_k: Option<f64>,
    /// Constant `K` of `|f(t,x) − f(s,x)| ≤ K(1 + |x|)|t − s|^{1/2}`.
    pub holder_half_k: Option<f64>,
    /// Claim that `f ≥ 0` everywhere.
    pub nonnegative: bool,
}

type Eval = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A coefficient function `(t, x) ↦ f(t, x)` with its declared constants.
#[derive(Clone)]
pub struct CoefficientFn {
    eval: Arc<Eval>,
    pub meta: CoefficientMeta,
    label: Arc<str>,
}

impl CoefficientFn {
    pub fn new<F>(label: impl Into<Arc<str>>, meta: CoefficientMeta, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        CoefficientFn {
            eval: Arc::new(f),
            meta,
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        CoefficientFn::new(
            format!("{c}"),
            CoefficientMeta {
                lipschitz_k: Some(0.0),
                holder_half_k: Some(0.0),
                nonnegative: c >= 0.0,
            },
            move |_, _| c,
        )
    }

    #[inline]
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        (self.eval)(t, x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same function pointer as `other` (shared diffusion of a comparison pair).
    pub fn same_fn(&self, other: &CoefficientFn) -> bool {
        Arc::ptr_eq(&self.eval, &other.eval)
    }
}

impl fmt::Debug for CoefficientFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientFn")
            .field("label", &self.label)
            .field("meta", &self.meta)
            .finish()
    }
}

/// Open interval `(left, right)`, endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub left: f64,
    pub right: f64,
}

impl Domain {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if left.is_nan() || right.is_nan() || left >= right {
            return Err(Error::InvalidDomain(format!("({left}, {right}) is empty")));
        }
        if left == f64::INFINITY || right == f64::NEG_INFINITY {
            return Err(Error::InvalidDomain(format!("({left}, {right}) is empty")));
        }
        Ok(Domain { left, right })
    }

    pub fn real_line() -> Self {
        Domain {
            left: f64::NEG_INFINITY,
            right: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.left < x && x < self.right
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.left, self.right)
    }
}

/// `dX_t = a(t, X_t) dt + σ(t, X_t)^γ dW_t` on `[0, T]`, `X_0 = x0`.
#[derive(Debug, Clone)]
pub struct SdeModel {
    pub name: String,
    pub drift: CoefficientFn,
    pub base_sigma: CoefficientFn,
    gamma: f64,
    pub x0: f64,
    pub horizon: f64,
    pub domain: Option<Domain>,
}

impl SdeModel {
    pub fn new(
        name: impl Into<String>,
        drift: CoefficientFn,
        base_sigma: CoefficientFn,
        gamma: f64,
        x0: f64,
        horizon: f64,
        domain: Option<Domain>,
    ) -> Result<Self> {
        if !(0.5..1.0).contains(&gamma) {
            return Err(Error::param("gamma", format!("must lie in [1/2, 1), got {gamma}")));
        }
        if !x0.is_finite() {
            return Err(Error::param("x0", format!("must be finite, got {x0}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::param("horizon", format!("must be positive, got {horizon}")));
        }
        if let Some(d) = domain {
            if !d.contains(x0) {
                return Err(Error::param("x0", format!("{x0} is outside the domain {d}")));
            }
        }
        Ok(SdeModel {
            name: name.into(),
            drift,
            base_sigma,
            gamma,
            x0,
            horizon,
            domain,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn drift(&self, t: f64, x: f64) -> f64 {
        self.drift.eval(t, x)
    }

    /// Effective diffusion `c(t, x) = max(σ(t, x), 0)^γ`.
    #[inline]
    pub fn diffusion(&self, t: f64, x: f64) -> Result<f64> {
        let s = self.base_sigma.eval(t, x);
        if !s.is_finite() {
            return Err(Error::InvalidCoefficient { t, x, value: s });
        }
        Ok(clamped_power(s, self.gamma))
    }
}

/// `max(s, 0)^γ` with `0^γ = 0`; `γ = 1/2` goes through `sqrt`.
#[inline]
pub fn clamped_power(s: f64, gamma: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if gamma == 0.5 {
        s.sqrt()
    } else {
        s.powf(gamma)
    }
}

/// Free-function form of [`SdeModel::diffusion`].
pub fn eval_diffusion(model: &SdeModel, t: f64, x: f64) -> Result<f64> {
    model.diffusion(t, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos_part_model(gamma: f64) -> SdeModel {
        SdeModel::new(
            "test",
            CoefficientFn::constant(0.0),
            CoefficientFn::new("x+", CoefficientMeta::default(), |_, x: f64| x.max(0.0)),
            gamma,
            1.0,
            1.0,
            None,
        )
        .unwrap()
    }

    #[test]
    fn diffusion_examples() {
        let m = pos_part_model(0.5);
        assert_eq!(eval_diffusion(&m, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(eval_diffusion(&m, 0.0, 9.0).unwrap(), 3.0);
        assert_eq!(eval_diffusion(&m, 0.0, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_rounding_is_clamped() {
        let m = SdeModel::new(
            "tiny-negative",
            CoefficientFn::constant(0.0),
            CoefficientFn::constant(-1e-17),
            0.75,
            0.0,
            1.0,
            None,
        )
        .unwrap();
        assert_eq!(m.diffusion(0.3, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_sigma_is_reported() {
        let m = SdeModel::new(
            "bad",
            CoefficientFn::constant(0.0),
            CoefficientFn::new("1/x", CoefficientMeta::default(), |_, x| 1.0 / x),
            0.5,
            1.0,
            1.0,
            None,
        )
        .unwrap();
        match m.diffusion(0.5, 0.0) {
            Err(Error::InvalidCoefficient { t, x, .. }) => assert_eq!((t, x), (0.5, 0.0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gamma_range_enforced() {
        let mk = |g| {
            SdeModel::new(
                "g",
                CoefficientFn::constant(0.0),
                CoefficientFn::constant(1.0),
                g,
                0.0,
                1.0,
                None,
            )
        };
        assert!(mk(0.5).is_ok());
        assert!(mk(0.99).is_ok());
        assert!(mk(1.0).is_err());
        assert!(mk(0.49).is_err());
    }

    #[test]
    fn x0_must_lie_in_domain() {
        let r = SdeModel::new(
            "d",
            CoefficientFn::constant(0.0),
            CoefficientFn::constant(1.0),
            0.5,
            0.0,
            1.0,
            Some(Domain::new(0.0, f64::INFINITY).unwrap()),
        );
        assert!(r.is_err());
    }
}
