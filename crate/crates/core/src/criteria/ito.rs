//! Lower-bound check of
//! `g(x) = σ′a/σ + ½σ″σ^{2γ−1} + (γ − 3/2)(σ′)²σ^{2γ−2}` on the domain interior.
//! A finite infimum gives the inverse-moment condition with `𝔰 = 0`.

use super::approach::{Approach, Side};
use super::autonomous::{interior_points, AutonomousModel, ScalarFn};
use super::rate::{Provenance, RatePrediction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    BoundedBelow,
    DivergingToMinusInfinity,
    Inconclusive,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::BoundedBelow => "bounded-below",
            Trend::DivergingToMinusInfinity => "diverging-to-minus-infinity",
            Trend::Inconclusive => "inconclusive",
        }
    }
}

/// How the interior is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItoGrid {
    /// Interior origin; defaults to `x0`.
    pub origin: Option<f64>,
    /// Halvings (or doublings) toward each endpoint.
    pub shells: usize,
    pub points_per_shell: usize,
    /// A shell minimum below `-divergence_threshold` on a strictly decreasing
    /// run counts as divergence.
    pub divergence_threshold: f64,
}

impl Default for ItoGrid {
    fn default() -> Self {
        ItoGrid {
            origin: None,
            shells: 60,
            points_per_shell: 32,
            divergence_threshold: 1e6,
        }
    }
}

const TREND_WINDOW: usize = 5;
const STABLE_WINDOW: usize = 10;
const STABLE_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-6;
const FD_STEP_SECOND: f64 = 1e-4;
const FD_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointScan {
    pub side: Side,
    pub endpoint: f64,
    /// `(x at shell end, min g over the shell)`
    pub shell_minima: Vec<(f64, f64)>,
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub inf_estimate: f64,
    pub trend: Trend,
    pub left: EndpointScan,
    pub right: EndpointScan,
    /// Present only when bounded below.
    pub prediction: Option<RatePrediction>,
}

/// `g(x)` and a bound on its rounding error.
fn g_value(m: &AutonomousModel, x: f64) -> Result<(f64, f64)> {
    let s = m.check_positive(x)?;
    let sp = (m.sigma_prime)(x);
    let spp = (m.sigma_second)(x);
    let g = m.gamma;
    let terms = [
        sp * (m.a)(x) / s,
        0.5 * spp * s.powf(2.0 * g - 1.0),
        (g - 1.5) * sp * sp * s.powf(2.0 * g - 2.0),
    ];
    let noise = 8.0 * f64::EPSILON * terms.iter().map(|t| t.abs()).sum::<f64>();
    Ok((terms.iter().sum(), noise))
}

fn check_derivative(name: &str, f: &ScalarFn, df: &ScalarFn, x: f64, h: f64, second: bool) -> Result<()> {
    let supplied = df(x);
    let fd = if second {
        (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    } else {
        (f(x + h) - f(x - h)) / (2.0 * h)
    };
    let scale = supplied.abs().max(fd.abs()).max(1.0);
    if !(supplied.is_finite() && (supplied - fd).abs() <= FD_REL_TOL * scale) {
        return Err(Error::param(
            "derivative",
            format!("{name}({x}) = {supplied} disagrees with central difference {fd}"),
        ));
    }
    Ok(())
}

/// Cross-check the supplied derivatives by central differences on interior points
/// at least `1e-3` away from the endpoints.
pub fn check_derivatives(m: &AutonomousModel) -> Result<()> {
    let d = m.domain;
    let sigma_deriv: ScalarFn = m.sigma_prime.clone();
    for x in interior_points(d, 64) {
        let scale = x.abs().max(1.0);
        if x - d.left < 1e3 * FD_STEP_SECOND * scale || d.right - x < 1e3 * FD_STEP_SECOND * scale {
            continue;
        }
        check_derivative("a'", &m.a, &m.a_prime, x, FD_STEP * scale, false)?;
        check_derivative("sigma'", &m.sigma, &m.sigma_prime, x, FD_STEP * scale, false)?;
        check_derivative("sigma''", &sigma_deriv, &m.sigma_second, x, FD_STEP * scale, false)
            .or_else(|_| check_derivative("sigma''", &m.sigma, &m.sigma_second, x, FD_STEP_SECOND * scale, true))?;
    }
    Ok(())
}

fn scan(m: &AutonomousModel, origin: f64, side: Side, grid: &ItoGrid) -> Result<EndpointScan> {
    let endpoint = match side {
        Side::Left => m.domain.left,
        Side::Right => m.domain.right,
    };
    let path = Approach::new(origin, endpoint, side);
    let mut minima = Vec::with_capacity(grid.shells);
    let mut prev = f64::NAN;
    let mut saw_nan = false;
    'shells: for k in 0..grid.shells {
        let mut shell_min = f64::INFINITY;
        let mut last_x = prev;
        for j in 1..=grid.points_per_shell {
            let u = Approach::shell_start(k) + std::f64::consts::LN_2 * j as f64 / grid.points_per_shell as f64;
            let x = path.point(u);
            if !path.is_interior(x, last_x) || !m.domain.contains(x) {
                break 'shells;
            }
            let (g, noise) = g_value(m, x)?;
            if g.is_nan() {
                saw_nan = true;
                break 'shells;
            }
            // cancellation swamps g; nothing finer is resolvable
            if noise > STABLE_TOL * g.abs().max(1.0) {
                break 'shells;
            }
            shell_min = shell_min.min(g);
            last_x = x;
        }
        prev = last_x;
        minima.push((last_x, shell_min));
    }
    let trend = if saw_nan { Trend::Inconclusive } else { classify(&minima, grid.divergence_threshold) };
    Ok(EndpointScan {
        side,
        endpoint,
        shell_minima: minima,
        trend,
    })
}

fn classify(minima: &[(f64, f64)], threshold: f64) -> Trend {
    let vals: Vec<f64> = minima.iter().map(|m| m.1).collect();
    if vals.len() > TREND_WINDOW {
        let tail = &vals[vals.len() - TREND_WINDOW - 1..];
        let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
        if decreasing && *tail.last().unwrap() < -threshold {
            return Trend::DivergingToMinusInfinity;
        }
        if vals.last().unwrap() == &f64::NEG_INFINITY {
            return Trend::DivergingToMinusInfinity;
        }
    }
    if vals.len() > STABLE_WINDOW {
        let split = vals.len() - STABLE_WINDOW;
        let before = vals[..split].iter().copied().fold(f64::INFINITY, f64::min);
        let all = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if all.is_finite() && before - all <= STABLE_TOL * all.abs().max(1.0) {
            return Trend::BoundedBelow;
        }
    }
    Trend::Inconclusive
}

pub fn ito_criterion(model: &AutonomousModel, grid: &ItoGrid) -> Result<CriterionReport> {
    check_derivatives(model)?;
    let origin = grid.origin.unwrap_or(model.x0);
    if !model.domain.contains(origin) {
        return Err(Error::param("origin", format!("{origin} is outside {}", model.domain)));
    }
    let left = scan(model, origin, Side::Left, grid)?;
    let right = scan(model, origin, Side::Right, grid)?;
    let inf_estimate = left
        .shell_minima
        .iter()
        .chain(&right.shell_minima)
        .map(|m| m.1)
        .fold(f64::INFINITY, f64::min);
    let trend = match (left.trend, right.trend) {
        (Trend::DivergingToMinusInfinity, _) | (_, Trend::DivergingToMinusInfinity) => Trend::DivergingToMinusInfinity,
        (Trend::BoundedBelow, Trend::BoundedBelow) => Trend::BoundedBelow,
        _ => Trend::Inconclusive,
    };
    let prediction = (trend == Trend::BoundedBelow).then_some(RatePrediction {
        mu0: None,
        mu1: None,
        s: 0.0,
        lambda_sup: 0.5,
        provenance: Provenance::ItoCriterion,
    });
    Ok(CriterionReport {
        inf_estimate,
        trend,
        left,
        right,
        prediction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::Domain;
    use std::sync::Arc;

    fn model(a: ScalarFn, sigma: ScalarFn, sp: ScalarFn, spp: ScalarFn, gamma: f64, d: Domain, x0: f64) -> AutonomousModel {
        let zero: ScalarFn = Arc::new(|_| 0.0);
        AutonomousModel::new(a, zero, sigma, sp, spp, gamma, d, x0).unwrap()
    }

    #[test]
    fn constant_sigma_gives_zero() {
        let c: ScalarFn = Arc::new(|_| 2.0);
        let zero: ScalarFn = Arc::new(|_| 0.0);
        let m = model(zero.clone(), c, zero.clone(), zero, 0.6, Domain::real_line(), 0.0);
        let r = ito_criterion(&m, &ItoGrid::default()).unwrap();
        assert_eq!(r.inf_estimate, 0.0);
        assert_eq!(r.trend, Trend::BoundedBelow);
        let p = r.prediction.unwrap();
        assert_eq!((p.s, p.lambda_sup), (0.0, 0.5));
    }

    #[test]
    fn linear_sigma_cir_like() {
        // σ(x) = x, γ = 1/2: g(x) = (κλ − 1)/x − κ
        let mk = |kappa: f64, lambda: f64| {
            let a: ScalarFn = Arc::new(move |x| kappa * (lambda - x));
            let ap: ScalarFn = Arc::new(move |_| -kappa);
            let zero: ScalarFn = Arc::new(|_| 0.0);
            AutonomousModel::new(
                a,
                ap,
                Arc::new(|x| x),
                Arc::new(|_| 1.0),
                zero,
                0.5,
                Domain::new(0.0, f64::INFINITY).unwrap(),
                1.0,
            )
            .unwrap()
        };
        let r = ito_criterion(&mk(1.0, 0.5), &ItoGrid::default()).unwrap();
        assert_eq!(r.trend, Trend::DivergingToMinusInfinity);
        assert_eq!(r.left.trend, Trend::DivergingToMinusInfinity);
        assert!(r.prediction.is_none());

        let r = ito_criterion(&mk(1.0, 1.0), &ItoGrid::default()).unwrap();
        assert_eq!(r.trend, Trend::BoundedBelow);
        assert!((r.inf_estimate + 1.0).abs() < 1e-4, "{}", r.inf_estimate);

        let r = ito_criterion(&mk(1.0, 3.0), &ItoGrid::default()).unwrap();
        assert_eq!(r.trend, Trend::BoundedBelow);
    }

    #[test]
    fn elliptic_bounded_sigma() {
        // σ = 2 + sin x, a = cos x on ℝ
        let a: ScalarFn = Arc::new(f64::cos);
        let ap: ScalarFn = Arc::new(|x: f64| -x.sin());
        let m = AutonomousModel::new(
            a,
            ap,
            Arc::new(|x: f64| 2.0 + x.sin()),
            Arc::new(f64::cos),
            Arc::new(|x: f64| -x.sin()),
            0.75,
            Domain::real_line(),
            0.0,
        )
        .unwrap();
        let r = ito_criterion(&m, &ItoGrid::default()).unwrap();
        assert_eq!(r.trend, Trend::BoundedBelow);
        assert!(r.inf_estimate > -10.0);
    }

    #[test]
    fn wrong_derivative_rejected() {
        let a: ScalarFn = Arc::new(|_| 0.0);
        let r = AutonomousModel::new(
            a.clone(),
            a,
            Arc::new(|x: f64| 1.0 + x * x),
            Arc::new(|x: f64| x),
            Arc::new(|_| 2.0),
            0.5,
            Domain::real_line(),
            0.0,
        )
        .unwrap();
        assert!(ito_criterion(&r, &ItoGrid::default()).is_err());
    }
}
