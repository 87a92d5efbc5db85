//! Feller's test for explosions on `I = (l, r)`.
//!
//! With `S(y) = ∫_o^y a/c²`, `p′ = exp(−2S)` and `I(y) = ∫_o^y 2/(p′c²)`, the
//! process never leaves `I` iff `v(y) = ∫_o^y p′ I` diverges at both ends.
//! The walk toward each endpoint is parametrized by `u` (see [`Approach`]) and
//! carries `J = p′·I` instead of `p′` and `I` separately, which keeps the
//! cached quantities finite when `p′` over- or underflows.

use std::f64::consts::LN_2;

use super::approach::{Approach, Side};
use super::autonomous::AutonomousModel;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

const CELLS_PER_SHELL: usize = 16;
const QUAD_REL: f64 = 1e-10;
const GROWTH_WINDOW: usize = 5;
const TREND_WINDOW: usize = 64;
/// Per-shell `log2` slope of the increments above which growth counts as
/// non-decaying.
const FLAT_SLOPE: f64 = -1e-3;
const TAIL_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FellerOptions {
    pub divergence_threshold: f64,
    pub max_shells: usize,
}

impl Default for FellerOptions {
    fn default() -> Self {
        FellerOptions {
            divergence_threshold: 1e8,
            max_shells: 1100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointClass {
    Divergent,
    /// Estimated limit of `v`.
    Finite(f64),
    Inconclusive,
}

impl EndpointClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            EndpointClass::Divergent => "divergent",
            EndpointClass::Finite(_) => "finite",
            EndpointClass::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointResult {
    pub side: Side,
    pub endpoint: f64,
    pub class: EndpointClass,
    /// `(y, v(y))` at the end of every completed shell.
    pub sequence: Vec<(f64, f64)>,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FellerConclusion {
    NoExit,
    ExitPossible,
    Inconclusive,
}

impl FellerConclusion {
    pub fn as_str(&self) -> &'static str {
        match self {
            FellerConclusion::NoExit => "no-exit",
            FellerConclusion::ExitPossible => "exit-possible",
            FellerConclusion::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FellerResult {
    pub origin: f64,
    pub left: EndpointResult,
    pub right: EndpointResult,
    /// `∫ (1 + |a|)/c²` converged on a neighbourhood of the origin.
    pub locally_integrable: bool,
    pub conclusion: FellerConclusion,
}

/// `∫_a^b f` with tolerance relative to a coarse estimate of `∫|f|`.
fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    let h = (b - a) / 4.0;
    let scale: f64 = (0..=4).map(|i| f(a + i as f64 * h).abs()).sum::<f64>() * (b - a).abs() / 5.0;
    if !scale.is_finite() {
        return Err(Error::Quadrature { a, b });
    }
    adaptive_simpson(&f, a, b, QUAD_REL * scale.max(f64::MIN_POSITIVE))
}

fn locally_integrable(m: &AutonomousModel, o: f64) -> bool {
    let mut delta = 1e-3 * o.abs().max(1.0);
    for e in [m.domain.left, m.domain.right] {
        if e.is_finite() {
            delta = delta.min(0.5 * (o - e).abs());
        }
    }
    let f = |x: f64| (1.0 + (m.a)(x).abs()) / m.c_squared(x);
    quad(f, o - delta, o + delta).is_ok_and(|v| v.is_finite())
}

struct Walk<'a> {
    m: &'a AutonomousModel,
    path: Approach,
}

impl Walk<'_> {
    /// `dS/du`
    fn s_rate(&self, u: f64) -> f64 {
        let y = self.path.point(u);
        (self.m.a)(y) / self.m.c_squared(y) * self.path.speed(u)
    }

    /// `2 y′(u) / c²(y(u))`
    fn source(&self, u: f64) -> f64 {
        let y = self.path.point(u);
        2.0 * self.path.speed(u) / self.m.c_squared(y)
    }

    /// Advance `J` over `[u0, u1]`, returning `(J(u1), S(u1) − S(u0))`.
    fn step(&self, u0: f64, u1: f64, j0: f64) -> Result<(f64, f64)> {
        let d = quad(|u| self.s_rate(u), u0, u1)?;
        let inner = |w: f64| match quad(|u| self.s_rate(u), u0, w) {
            Ok(sw) => self.source(w) * (-2.0 * (d - sw)).exp(),
            Err(_) => f64::NAN,
        };
        let carried = if j0 == 0.0 { 0.0 } else { j0 * (-2.0 * d).exp() };
        let j1 = carried + quad(inner, u0, u1)?;
        if j1.is_finite() {
            Ok((j1, d))
        } else {
            Err(Error::Quadrature { a: u0, b: u1 })
        }
    }

    fn v_rate(&self, u: f64, j: f64) -> f64 {
        j * self.path.speed(u)
    }
}

fn increments(seq: &[(f64, f64)]) -> Vec<f64> {
    let mut prev = 0.0;
    seq.iter()
        .map(|&(_, v)| {
            let inc = v - prev;
            prev = v;
            inc
        })
        .collect()
}

fn log2_slope(incs: &[f64]) -> f64 {
    let n = incs.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = incs.iter().map(|v| v.log2()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in incs.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (v.log2() - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

fn growing(incs: &[f64]) -> bool {
    incs.len() >= GROWTH_WINDOW
        && incs[incs.len() - GROWTH_WINDOW..]
            .windows(2)
            .all(|w| w[0] > 0.0 && w[1] >= w[0])
}

fn classify(seq: &[(f64, f64)], opts: &FellerOptions) -> Option<(EndpointClass, String)> {
    let incs = increments(seq);
    let v = seq.last()?.1;
    if v > opts.divergence_threshold && growing(&incs) {
        return Some((EndpointClass::Divergent, format!("v = {v:e} with growing increments")));
    }
    if incs.len() >= TREND_WINDOW {
        let tail = &incs[incs.len() - TREND_WINDOW..];
        if tail.iter().all(|d| *d > 0.0) {
            let slope = log2_slope(tail);
            if slope >= FLAT_SLOPE {
                return Some((
                    EndpointClass::Divergent,
                    format!("increments not decaying (log2 slope {slope:.3e} per halving)"),
                ));
            }
        }
    }
    if incs.len() > GROWTH_WINDOW {
        let tail = &incs[incs.len() - GROWTH_WINDOW - 1..];
        if tail.iter().all(|d| *d >= 0.0) {
            let last = *tail.last().unwrap();
            if last == 0.0 {
                return Some((EndpointClass::Finite(v), "increments vanished".into()));
            }
            let r = tail.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
            if r < 1.0 && last * r / (1.0 - r) <= TAIL_REL * v {
                let limit = v + last * r / (1.0 - r);
                return Some((EndpointClass::Finite(limit), format!("geometric decay, ratio {r:.4}")));
            }
        }
    }
    None
}

fn scan(m: &AutonomousModel, origin: f64, side: Side, opts: &FellerOptions) -> EndpointResult {
    let endpoint = match side {
        Side::Left => m.domain.left,
        Side::Right => m.domain.right,
    };
    let walk = Walk {
        m,
        path: Approach::new(origin, endpoint, side),
    };
    let h = LN_2 / CELLS_PER_SHELL as f64;
    let mut seq = Vec::new();
    let (mut j, mut v, mut y_prev) = (0.0, 0.0, origin);
    let finish = |seq: Vec<(f64, f64)>, class, reason| EndpointResult {
        side,
        endpoint,
        class,
        sequence: seq,
        reason,
    };
    for shell in 0..opts.max_shells {
        for cell in 0..CELLS_PER_SHELL {
            let u0 = (shell * CELLS_PER_SHELL + cell) as f64 * h;
            let (um, u1) = (u0 + 0.5 * h, u0 + h);
            let y1 = walk.path.point(u1);
            if !walk.path.is_interior(y1, y_prev) || !m.domain.contains(y1) {
                return finish(seq, EndpointClass::Inconclusive, format!("floating-point stagnation at y = {y_prev:e}"));
            }
            let stepped = walk
                .step(u0, um, j)
                .and_then(|(jm, _)| walk.step(um, u1, jm).map(|(j1, _)| (jm, j1)));
            let (jm, j1) = match stepped {
                Ok(p) => p,
                Err(_) => return overflow(seq, v, finish, "quadrature failed"),
            };
            let dv = h / 6.0 * (walk.v_rate(u0, j) + 4.0 * walk.v_rate(um, jm) + walk.v_rate(u1, j1));
            v += dv;
            j = j1;
            y_prev = y1;
            if !v.is_finite() {
                return overflow(seq, v, finish, "v overflowed");
            }
        }
        seq.push((y_prev, v));
        if let Some((class, reason)) = classify(&seq, opts) {
            return finish(seq, class, reason);
        }
    }
    finish(seq, EndpointClass::Inconclusive, format!("{} shells exhausted", opts.max_shells))
}

fn overflow(
    seq: Vec<(f64, f64)>,
    v: f64,
    finish: impl FnOnce(Vec<(f64, f64)>, EndpointClass, String) -> EndpointResult,
    what: &str,
) -> EndpointResult {
    let incs = increments(&seq);
    if (v == f64::INFINITY || seq.last().is_some_and(|s| s.1 > 0.0)) && growing(&incs) {
        finish(seq, EndpointClass::Divergent, format!("{what} while growing"))
    } else {
        finish(seq, EndpointClass::Inconclusive, what.to_string())
    }
}

pub fn feller_test(model: &AutonomousModel, origin: f64) -> Result<FellerResult> {
    feller_test_with(model, origin, &FellerOptions::default())
}

pub fn feller_test_with(model: &AutonomousModel, origin: f64, opts: &FellerOptions) -> Result<FellerResult> {
    if !model.domain.contains(origin) {
        return Err(Error::param("origin", format!("{origin} is outside {}", model.domain)));
    }
    model.check_positive(origin)?;
    let integrable = locally_integrable(model, origin);
    let left = scan(model, origin, Side::Left, opts);
    let right = scan(model, origin, Side::Right, opts);
    let conclusion = match (integrable, left.class, right.class) {
        (false, ..) => FellerConclusion::Inconclusive,
        (true, EndpointClass::Divergent, EndpointClass::Divergent) => FellerConclusion::NoExit,
        (true, EndpointClass::Finite(_), _) | (true, _, EndpointClass::Finite(_)) => FellerConclusion::ExitPossible,
        _ => FellerConclusion::Inconclusive,
    };
    Ok(FellerResult {
        origin,
        left,
        right,
        locally_integrable: integrable,
        conclusion,
    })
}
