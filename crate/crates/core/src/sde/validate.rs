//! Sampling-based falsification of the coefficient assumptions (HLG), (L), (P).
//!
//! Sampling cannot prove an analytic bound; a passing report only means no
//! counterexample was observed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::model::CoefficientFn;
use crate::error::{Error, Result};

/// Relative slack applied to declared constants.
pub const TOL_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingBox {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl SamplingBox {
    pub fn new(t: (f64, f64), x: (f64, f64)) -> Self {
        SamplingBox {
            t_min: t.0,
            t_max: t.1,
            x_min: x.0,
            x_max: x.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    /// max `|f(t,x) − f(s,x)| / ((1 + |x|)|t − s|^{1/2})`
    pub max_holder_ratio: f64,
    /// max `|f(t,x) − f(t,y)| / |x − y|`
    pub max_lipschitz_ratio: f64,
    pub min_value: f64,
    /// `None` when no constant was declared.
    pub holder_ok: Option<bool>,
    pub lipschitz_ok: Option<bool>,
    /// No negative value observed.
    pub nonnegative_observed: bool,
    /// `Some(nonnegative_observed)` when (P) was claimed.
    pub nonnegative_ok: Option<bool>,
    /// Always `true`: the report is heuristic evidence, not a proof.
    pub heuristic: bool,
}

impl ValidationReport {
    /// Observations contradict none of the declared claims.
    pub fn consistent(&self) -> bool {
        [self.holder_ok, self.lipschitz_ok, self.nonnegative_ok]
            .iter()
            .all(|c| *c != Some(false))
    }
}

pub fn validate_assumptions(
    f: &CoefficientFn,
    region: SamplingBox,
    n_samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let SamplingBox { t_min, t_max, x_min, x_max } = region;
    let finite = [t_min, t_max, x_min, x_max].iter().all(|v| v.is_finite());
    if !finite || t_min > t_max || x_min > x_max {
        return Err(Error::param("box", format!("{region:?} is not a bounded box")));
    }
    if n_samples == 0 {
        return Err(Error::param("n_samples", "must be at least 1"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut draw = |lo: f64, hi: f64| if lo == hi { lo } else { rng.random_range(lo..=hi) };
    let eval = |t: f64, x: f64| -> Result<f64> {
        let v = f.eval(t, x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidCoefficient { t, x, value: v })
        }
    };

    let mut max_holder: f64 = 0.0;
    let mut max_lip: f64 = 0.0;
    let mut min_value = f64::INFINITY;
    for _ in 0..n_samples {
        let (s, t) = (draw(t_min, t_max), draw(t_min, t_max));
        let (x, y) = (draw(x_min, x_max), draw(x_min, x_max));
        let ftx = eval(t, x)?;
        let fsx = eval(s, x)?;
        let fty = eval(t, y)?;
        min_value = min_value.min(ftx).min(fsx).min(fty);
        if s != t {
            let r = (ftx - fsx).abs() / ((1.0 + x.abs()) * (t - s).abs().sqrt());
            max_holder = max_holder.max(r);
        }
        if x != y {
            max_lip = max_lip.max((ftx - fty).abs() / (x - y).abs());
        }
    }

    let within = |declared: Option<f64>, observed: f64| {
        declared.map(|k| observed <= k * (1.0 + TOL_REL) + f64::MIN_POSITIVE)
    };
    Ok(ValidationReport {
        samples: n_samples,
        max_holder_ratio: max_holder,
        max_lipschitz_ratio: max_lip,
        min_value,
        holder_ok: within(f.meta.holder_half_k, max_holder),
        lipschitz_ok: within(f.meta.lipschitz_k, max_lip),
        nonnegative_observed: min_value >= 0.0,
        nonnegative_ok: f.meta.nonnegative.then_some(min_value >= 0.0),
        heuristic: true,
    })
}
