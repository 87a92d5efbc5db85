use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sde::{clamped_power, Domain, PrototypeKind, PrototypeParams};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of interior points on which `σ > 0` is checked at construction.
const POSITIVITY_GRID: usize = 2048;

/// Autonomous `dX = a(X) dt + σ(X)^γ dW` on `I = (l, r)`, with user-supplied
/// derivatives `a′`, `σ′`, `σ″`.
#[derive(Clone)]
pub struct AutonomousModel {
    pub a: ScalarFn,
    pub a_prime: ScalarFn,
    pub sigma: ScalarFn,
    pub sigma_prime: ScalarFn,
    pub sigma_second: ScalarFn,
    pub gamma: f64,
    pub domain: Domain,
    pub x0: f64,
}

impl fmt::Debug for AutonomousModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AutonomousModel")
            .field("gamma", &self.gamma)
            .field("domain", &self.domain)
            .field("x0", &self.x0)
            .finish_non_exhaustive()
    }
}

/// `n` points spread over the interior of `d`, denser toward finite endpoints.
pub(crate) fn interior_points(d: Domain, n: usize) -> Vec<f64> {
    (1..n)
        .map(|i| {
            let u = i as f64 / n as f64;
            match (d.left.is_finite(), d.right.is_finite()) {
                (true, true) => d.left + (d.right - d.left) * u,
                (true, false) => d.left + u / (1.0 - u),
                (false, true) => d.right - (1.0 - u) / u,
                (false, false) => (u - 0.5) / (u * (1.0 - u)),
            }
        })
        .filter(|x| d.contains(*x))
        .collect()
}

impl AutonomousModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: ScalarFn,
        a_prime: ScalarFn,
        sigma: ScalarFn,
        sigma_prime: ScalarFn,
        sigma_second: ScalarFn,
        gamma: f64,
        domain: Domain,
        x0: f64,
    ) -> Result<Self> {
        if !(0.5..1.0).contains(&gamma) {
            return Err(Error::param("gamma", format!("must lie in [1/2, 1), got {gamma}")));
        }
        if !domain.contains(x0) {
            return Err(Error::param("x0", format!("{x0} is outside the domain {domain}")));
        }
        let m = AutonomousModel {
            a,
            a_prime,
            sigma,
            sigma_prime,
            sigma_second,
            gamma,
            domain,
            x0,
        };
        for x in interior_points(domain, POSITIVITY_GRID) {
            m.check_positive(x)?;
        }
        Ok(m)
    }

    pub(crate) fn check_positive(&self, x: f64) -> Result<f64> {
        let s = (self.sigma)(x);
        if s > 0.0 && s.is_finite() {
            Ok(s)
        } else {
            Err(Error::InvalidDomain(format!(
                "sigma({x}) = {s} is not positive inside {}",
                self.domain
            )))
        }
    }

    /// `c(x)² = σ(x)^{2γ}`.
    pub fn c_squared(&self, x: f64) -> f64 {
        let c = clamped_power((self.sigma)(x), self.gamma);
        c * c
    }

    /// Autonomous form of a constant-parameter prototype.
    pub fn from_prototype(params: &PrototypeParams) -> Result<Self> {
        params.validate()?;
        if !params.is_autonomous() {
            return Err(Error::Hypothesis(
                "criterion needs constant kappa, lambda, theta (autonomous model)".into(),
            ));
        }
        let (k, l, th) = (params.kappa.eval(0.0), params.lambda.eval(0.0), params.theta.eval(0.0));
        let gamma = params.effective_gamma();
        let a: ScalarFn = Arc::new(move |x| k * (l - x));
        let a_prime: ScalarFn = Arc::new(move |_| -k);
        let (sigma, sigma_prime, sigma_second): (ScalarFn, ScalarFn, ScalarFn) = match params.kind {
            PrototypeKind::Cir => {
                let s = th * th;
                (Arc::new(move |x| s * x), Arc::new(move |_| s), Arc::new(|_| 0.0))
            }
            PrototypeKind::Ckls => {
                let s = th.powf(1.0 / gamma);
                (Arc::new(move |x| s * x), Arc::new(move |_| s), Arc::new(|_| 0.0))
            }
            PrototypeKind::Wf => {
                let s = th * th;
                (
                    Arc::new(move |x| s * x * (1.0 - x)),
                    Arc::new(move |x| s * (1.0 - 2.0 * x)),
                    Arc::new(move |_| -2.0 * s),
                )
            }
        };
        AutonomousModel::new(
            a,
            a_prime,
            sigma,
            sigma_prime,
            sigma_second,
            gamma,
            params.kind.domain(),
            params.x0,
        )
    }
}
