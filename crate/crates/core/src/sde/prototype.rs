//! CIR, CKLS and Wright–Fisher prototypes with time-dependent parameters:
//! `dX = κ(t)(λ(t) − X) dt + θ(t) h(X) dW` with
//! `h(x) = √x⁺`, `(x⁺)^γ` or `√((x(1−x))⁺)`.

use std::fmt;
use std::str::FromStr;

use super::model::{CoefficientFn, CoefficientMeta, Domain, SdeModel};
use super::param::ParamFn;
use crate::error::{Error, Result};

/// Number of grid intervals used to check `θ > 0` on `[0, T]`.
pub const THETA_CHECK_GRID: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrototypeKind {
    Cir,
    Ckls,
    Wf,
}

impl PrototypeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrototypeKind::Cir => "cir",
            PrototypeKind::Ckls => "ckls",
            PrototypeKind::Wf => "wf",
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            PrototypeKind::Wf => Domain {
                left: 0.0,
                right: 1.0,
            },
            _ => Domain {
                left: 0.0,
                right: f64::INFINITY,
            },
        }
    }

    /// The unit-scale base diffusion `h(x)^{1/γ}`, i.e. the `σ` of the model with `θ ≡ 1`.
    #[inline]
    pub fn unit_sigma(&self, x: f64) -> f64 {
        match self {
            PrototypeKind::Cir | PrototypeKind::Ckls => x.max(0.0),
            PrototypeKind::Wf => (x * (1.0 - x)).max(0.0),
        }
    }
}

impl fmt::Display for PrototypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrototypeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cir" => Ok(PrototypeKind::Cir),
            "ckls" => Ok(PrototypeKind::Ckls),
            "wf" | "wright-fisher" => Ok(PrototypeKind::Wf),
            other => Err(Error::param("kind", format!("unknown prototype `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeParams {
    pub kind: PrototypeKind,
    pub kappa: ParamFn,
    pub lambda: ParamFn,
    pub theta: ParamFn,
    /// Exponent for CKLS; ignored (fixed to 1/2) for CIR and WF.
    pub gamma: f64,
    pub x0: f64,
    pub horizon: f64,
}

impl PrototypeParams {
    /// Constant-coefficient prototype with `T = 1`.
    pub fn constant(kind: PrototypeKind, kappa: f64, lambda: f64, theta: f64, x0: f64) -> Self {
        PrototypeParams {
            kind,
            kappa: kappa.into(),
            lambda: lambda.into(),
            theta: theta.into(),
            gamma: if kind == PrototypeKind::Ckls { 0.75 } else { 0.5 },
            x0,
            horizon: 1.0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn effective_gamma(&self) -> f64 {
        match self.kind {
            PrototypeKind::Ckls => self.gamma,
            _ => 0.5,
        }
    }

    pub fn is_autonomous(&self) -> bool {
        self.kappa.is_constant() && self.lambda.is_constant() && self.theta.is_constant()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::param("horizon", format!("must be positive, got {}", self.horizon)));
        }
        for (name, f) in [("kappa", &self.kappa), ("lambda", &self.lambda), ("theta", &self.theta)] {
            if !f.is_finite() {
                return Err(Error::param(name, format!("{f} has non-finite coefficients")));
            }
        }
        let theta_min = self.theta.grid_min(self.horizon, THETA_CHECK_GRID);
        if theta_min.is_nan() || theta_min <= 0.0 {
            return Err(Error::param(
                "theta",
                format!("must be positive on [0, T]; grid minimum is {theta_min}"),
            ));
        }
        if self.kind == PrototypeKind::Ckls && !(self.gamma > 0.5 && self.gamma < 1.0) {
            return Err(Error::param(
                "gamma",
                format!("CKLS requires gamma in (1/2, 1), got {}", self.gamma),
            ));
        }
        if !self.kind.domain().contains(self.x0) {
            return Err(Error::param(
                "x0",
                format!("{} is outside the domain {}", self.x0, self.kind.domain()),
            ));
        }
        Ok(())
    }

    /// `C` with `|a(t,x)| + c(t,x) ≤ C(1 + |x|)`.
    pub fn linear_growth_constant(&self) -> f64 {
        let t = self.horizon;
        self.kappa.sup_abs(t) * self.lambda.sup_abs(t).max(1.0) + self.theta.sup_abs(t)
    }

    fn drift_meta(&self) -> CoefficientMeta {
        let t = self.horizon;
        let (k_inf, l_inf) = (self.kappa.sup_abs(t), self.lambda.sup_abs(t));
        let (k_h, l_h) = (self.kappa.holder_half_bound(t), self.lambda.holder_half_bound(t));
        CoefficientMeta {
            lipschitz_k: Some(k_inf),
            holder_half_k: Some((k_inf * l_h + l_inf * k_h).max(k_h)),
            nonnegative: false,
        }
    }

    fn sigma_meta(&self) -> CoefficientMeta {
        let t = self.horizon;
        let th_inf = self.theta.sup_abs(t);
        let th_h = self.theta.holder_half_bound(t);
        let (lip, hol) = match self.kind {
            PrototypeKind::Cir | PrototypeKind::Wf => (th_inf * th_inf, 2.0 * th_inf * th_h),
            PrototypeKind::Ckls => {
                let p = 1.0 / self.gamma;
                (th_inf.powf(p), p * th_inf.powf(p - 1.0) * th_h)
            }
        };
        CoefficientMeta {
            lipschitz_k: Some(lip),
            holder_half_k: Some(hol),
            nonnegative: true,
        }
    }
}

/// Drift `κ(t)(λ(t) − x)` as a coefficient.
pub fn mean_reverting_drift(params: &PrototypeParams) -> CoefficientFn {
    let (kappa, lambda) = (params.kappa, params.lambda);
    CoefficientFn::new(
        format!("({kappa})*(({lambda})-x)"),
        params.drift_meta(),
        move |t, x| kappa.eval(t) * (lambda.eval(t) - x),
    )
}

pub fn make_prototype(params: &PrototypeParams) -> Result<SdeModel> {
    params.validate()?;
    let theta = params.theta;
    let kind = params.kind;
    let gamma = params.effective_gamma();
    let sigma = match kind {
        PrototypeKind::Cir | PrototypeKind::Wf => CoefficientFn::new(
            format!("({theta})^2*{}", if kind == PrototypeKind::Cir { "x+" } else { "(x(1-x))+" }),
            params.sigma_meta(),
            move |t, x| {
                let th = theta.eval(t);
                th * th * kind.unit_sigma(x)
            },
        ),
        PrototypeKind::Ckls => {
            let p = 1.0 / gamma;
            CoefficientFn::new(
                format!("({theta})^{p}*x+"),
                params.sigma_meta(),
                move |t, x| theta.eval(t).powf(p) * x.max(0.0),
            )
        }
    };
    SdeModel::new(
        format!("{kind}"),
        mean_reverting_drift(params),
        sigma,
        gamma,
        params.x0,
        params.horizon,
        Some(kind.domain()),
    )
}
