use std::fmt;

use crate::error::{Error, Result};
use crate::sde::{PrototypeKind, PrototypeParams};

/// Which result produced a rate prediction. The string forms are part of the
/// CLI output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// General inverse-moment criterion: order `1/2 − 𝔰`.
    InverseMoment,
    /// Autonomous model on a domain with the Itô lower-bound condition.
    ItoCriterion,
    /// Square-root diffusion on `(0, ∞)`: `min{1/2, μ₀}`.
    SquareRootBoundary,
    /// Square-root diffusion on `(0, 1)`: `min{1/2, μ₀, μ₁}`.
    UnitIntervalBoundary,
    /// Power diffusion `θ(t)(x⁺)^γ`, `γ > 1/2`: always `1/2`.
    PowerDiffusion,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::InverseMoment => "Thm1.3",
            Provenance::ItoCriterion => "Prop2.1",
            Provenance::SquareRootBoundary => "Prop2.2i",
            Provenance::UnitIntervalBoundary => "Prop2.2ii",
            Provenance::PowerDiffusion => "Prop2.3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Provenance::InverseMoment,
            Provenance::ItoCriterion,
            Provenance::SquareRootBoundary,
            Provenance::UnitIntervalBoundary,
            Provenance::PowerDiffusion,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePrediction {
    pub mu0: Option<f64>,
    pub mu1: Option<f64>,
    /// Compensation exponent `𝔰`; the order is `1/2 − 𝔰`.
    pub s: f64,
    /// Every order `λ < lambda_sup` is guaranteed.
    pub lambda_sup: f64,
    pub provenance: Provenance,
}

/// Order guaranteed by the inverse-moment condition with exponent `s`.
pub fn theorem_rate(gamma: f64, s: f64) -> Result<f64> {
    if !(0.5..1.0).contains(&gamma) {
        return Err(Error::param("gamma", format!("must lie in [1/2, 1), got {gamma}")));
    }
    if !(s >= 0.0 && s <= 1.0 - gamma) {
        return Err(Error::param("s", format!("must lie in [0, 1 - gamma] = [0, {}], got {s}", 1.0 - gamma)));
    }
    Ok(0.5 - s)
}

/// A zero guaranteed order carries no information.
pub fn is_vacuous(rate: f64) -> bool {
    rate <= 0.0
}

const MU_START_GRID: usize = 64;
const MU_MAX_GRID: usize = 1 << 22;
const MU_AGREEMENT: f64 = 1e-6;

/// `min_{t ∈ [0,T]} f(t)` by grid doubling until successive minima agree.
fn refined_min<F: Fn(f64) -> f64>(f: F, horizon: f64) -> f64 {
    let grid_min = |n: usize| {
        (0..=n)
            .map(|k| f(horizon * k as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    };
    let mut n = MU_START_GRID;
    let mut prev = grid_min(n);
    while n < MU_MAX_GRID {
        n *= 2;
        let cur = grid_min(n);
        if (cur - prev).abs() <= MU_AGREEMENT {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Normalized boundary drift at 0: `min_t κ(t)λ(t)/θ(t)²`.
pub fn mu0(params: &PrototypeParams) -> f64 {
    let (k, l, th) = (params.kappa, params.lambda, params.theta);
    refined_min(
        |t| {
            let theta = th.eval(t);
            k.eval(t) * l.eval(t) / (theta * theta)
        },
        params.horizon,
    )
}

/// Normalized boundary drift at 1: `−max_t a(t,1)/θ(t)² = min_t κ(t)(1 − λ(t))/θ(t)²`.
pub fn mu1(params: &PrototypeParams) -> f64 {
    let (k, l, th) = (params.kappa, params.lambda, params.theta);
    refined_min(
        |t| {
            let theta = th.eval(t);
            k.eval(t) * (1.0 - l.eval(t)) / (theta * theta)
        },
        params.horizon,
    )
}

pub fn predict_rate(params: &PrototypeParams) -> Result<RatePrediction> {
    params.validate()?;
    let m0 = mu0(params);
    if !(m0 > 0.0) {
        return Err(Error::Hypothesis(format!(
            "mu0 <= 0: min_t a(t,0)/theta(t)^2 = {m0} must be positive"
        )));
    }
    Ok(match params.kind {
        PrototypeKind::Cir => {
            let lambda_sup = m0.min(0.5);
            RatePrediction {
                mu0: Some(m0),
                mu1: None,
                s: 0.5 - lambda_sup,
                lambda_sup,
                provenance: Provenance::SquareRootBoundary,
            }
        }
        PrototypeKind::Wf => {
            let m1 = mu1(params);
            if !(m1 > 0.0) {
                return Err(Error::Hypothesis(format!(
                    "mu1 <= 0: -max_t a(t,1)/theta(t)^2 = {m1} must be positive"
                )));
            }
            let lambda_sup = m0.min(m1).min(0.5);
            RatePrediction {
                mu0: Some(m0),
                mu1: Some(m1),
                s: 0.5 - lambda_sup,
                lambda_sup,
                provenance: Provenance::UnitIntervalBoundary,
            }
        }
        PrototypeKind::Ckls => RatePrediction {
            mu0: Some(m0),
            mu1: None,
            s: 0.0,
            lambda_sup: 0.5,
            provenance: Provenance::PowerDiffusion,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::ParamFn;

    #[test]
    fn cir_constants() {
        let p = predict_rate(&PrototypeParams::constant(PrototypeKind::Cir, 1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(p.mu0, Some(1.0));
        assert_eq!(p.lambda_sup, 0.5);
        assert_eq!(p.s, 0.0);
        assert_eq!(p.provenance.as_str(), "Prop2.2i");

        let p = predict_rate(&PrototypeParams::constant(PrototypeKind::Cir, 1.0, 0.25, 1.0, 1.0)).unwrap();
        assert_eq!(p.mu0, Some(0.25));
        assert_eq!(p.lambda_sup, 0.25);
        assert_eq!(p.s, 0.25);
    }

    #[test]
    fn wf_constants() {
        let p = predict_rate(&PrototypeParams::constant(PrototypeKind::Wf, 1.0, 0.5, 1.0, 0.5)).unwrap();
        assert_eq!((p.mu0, p.mu1, p.lambda_sup), (Some(0.5), Some(0.5), 0.5));
        let p = predict_rate(&PrototypeParams::constant(PrototypeKind::Wf, 2.0, 0.5, 1.0, 0.5)).unwrap();
        assert_eq!((p.mu0, p.mu1), (Some(1.0), Some(1.0)));
        let p = predict_rate(&PrototypeParams::constant(PrototypeKind::Wf, 1.0, 0.9, 1.0, 0.5)).unwrap();
        assert!((p.mu1.unwrap() - 0.1).abs() < 1e-15);
        assert!((p.lambda_sup - 0.1).abs() < 1e-15);
    }

    #[test]
    fn ckls_is_always_half() {
        let p = predict_rate(
            &PrototypeParams::constant(PrototypeKind::Ckls, 1.0, 0.01, 3.0, 1.0).with_gamma(0.75),
        )
        .unwrap();
        assert_eq!(p.lambda_sup, 0.5);
        assert_eq!(p.provenance, Provenance::PowerDiffusion);
    }

    #[test]
    fn hypothesis_failures() {
        let e = predict_rate(&PrototypeParams::constant(PrototypeKind::Cir, 1.0, 0.0, 1.0, 1.0)).unwrap_err();
        assert!(e.to_string().contains("mu0 <= 0"));
        let e = predict_rate(&PrototypeParams::constant(PrototypeKind::Wf, 1.0, 1.0, 1.0, 0.5)).unwrap_err();
        assert!(e.to_string().contains("mu1 <= 0"));
    }

    #[test]
    fn time_dependent_mu0_is_grid_minimum() {
        // κλ/θ² = 1 / (1 + 0.5 sin 2πt)^2, minimum 1/2.25 at t = 1/4
        let p = PrototypeParams {
            theta: ParamFn::Sinusoidal { p: 1.0, q: 0.5, omega: 2.0 * std::f64::consts::PI },
            ..PrototypeParams::constant(PrototypeKind::Cir, 1.0, 1.0, 1.0, 1.0)
        };
        assert!((mu0(&p) - 1.0 / 2.25).abs() < 1e-6);
    }

    #[test]
    fn theorem_rate_examples() {
        assert_eq!(theorem_rate(0.5, 0.0).unwrap(), 0.5);
        assert_eq!(theorem_rate(0.75, 0.25).unwrap(), 0.25);
        let r = theorem_rate(0.5, 0.5).unwrap();
        assert_eq!(r, 0.0);
        assert!(is_vacuous(r));
        assert!(theorem_rate(0.75, 0.3).is_err());
        assert!(theorem_rate(1.0, 0.0).is_err());
        assert!(theorem_rate(0.6, -0.1).is_err());
    }

    #[test]
    fn provenance_round_trip() {
        for p in [
            Provenance::InverseMoment,
            Provenance::ItoCriterion,
            Provenance::SquareRootBoundary,
            Provenance::UnitIntervalBoundary,
            Provenance::PowerDiffusion,
        ] {
            assert_eq!(Provenance::parse(p.as_str()), Some(p));
        }
    }
}
