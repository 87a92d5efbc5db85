//! Deterministic clock `Θ(t) = ∫_0^t θ(s)² ds` and its inverse `A = Θ⁻¹`.

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::sde::{ParamFn, THETA_CHECK_GRID};

const TABLE_INTERVALS: usize = 1024;
const THETA_REL_TOL: f64 = 1e-12;
const INVERSE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct TimeChange {
    theta: ParamFn,
    horizon: f64,
    /// `Θ` at `t_i = i·T/TABLE_INTERVALS`.
    table: Vec<f64>,
    seg_tol: f64,
}

pub fn build_timechange(theta: ParamFn, horizon: f64) -> Result<TimeChange> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::param("horizon", format!("must be positive, got {horizon}")));
    }
    let min = theta.grid_min(horizon, THETA_CHECK_GRID);
    if !(min > 0.0) {
        return Err(Error::param("theta", format!("must be positive on [0, T]; grid minimum is {min}")));
    }
    let sq = |t: f64| {
        let v = theta.eval(t);
        v * v
    };
    let h = horizon / TABLE_INTERVALS as f64;
    // crude total to scale the absolute tolerance
    let rough: f64 = (0..TABLE_INTERVALS)
        .map(|i| {
            let a = i as f64 * h;
            h / 6.0 * (sq(a) + 4.0 * sq(a + 0.5 * h) + sq(a + h))
        })
        .sum();
    let seg_tol = THETA_REL_TOL * rough / TABLE_INTERVALS as f64;
    let mut table = Vec::with_capacity(TABLE_INTERVALS + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for i in 0..TABLE_INTERVALS {
        let a = i as f64 * h;
        let b = if i + 1 == TABLE_INTERVALS { horizon } else { (i + 1) as f64 * h };
        acc += adaptive_simpson(sq, a, b, seg_tol)?;
        table.push(acc);
    }
    Ok(TimeChange {
        theta,
        horizon,
        table,
        seg_tol,
    })
}

impl TimeChange {
    pub fn theta(&self) -> ParamFn {
        self.theta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `Θ(T)`, the length of the changed clock.
    pub fn horizon_image(&self) -> f64 {
        *self.table.last().unwrap()
    }

    fn node(&self, i: usize) -> f64 {
        if i == TABLE_INTERVALS {
            self.horizon
        } else {
            i as f64 * self.horizon / TABLE_INTERVALS as f64
        }
    }

    fn theta_sq(&self, t: f64) -> f64 {
        let v = self.theta.eval(t);
        v * v
    }

    /// `Θ(t)` for `t ∈ [0, T]`.
    pub fn big_theta(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::param("t", format!("{t} outside [0, {}]", self.horizon)));
        }
        let i = ((t / self.horizon * TABLE_INTERVALS as f64) as usize).min(TABLE_INTERVALS);
        let base = self.node(i);
        if base == t {
            return Ok(self.table[i]);
        }
        Ok(self.table[i] + adaptive_simpson(|s| self.theta_sq(s), base, t, self.seg_tol)?)
    }

    /// `A(τ)` for `τ ∈ [0, Θ(T)]`: safeguarded Newton on the tabulated clock.
    pub fn inverse(&self, tau: f64) -> Result<f64> {
        let top = self.horizon_image();
        if tau > top && tau <= top * (1.0 + INVERSE_REL_TOL) {
            return Ok(self.horizon);
        }
        if !(0.0..=top).contains(&tau) {
            return Err(Error::param("tau", format!("{tau} outside [0, {top}]")));
        }
        // table[i] <= tau < table[i + 1]
        let i = match self.table.partition_point(|&v| v <= tau) {
            0 => 0,
            p => (p - 1).min(TABLE_INTERVALS - 1),
        };
        let (mut lo, mut hi) = (self.node(i), self.node(i + 1));
        let (glo, ghi) = (self.table[i], self.table[i + 1]);
        if tau == glo {
            return Ok(lo);
        }
        if tau == ghi {
            return Ok(hi);
        }
        let tol = INVERSE_REL_TOL * self.horizon;
        let mut t = lo + (hi - lo) * (tau - glo) / (ghi - glo);
        for _ in 0..100 {
            let g = self.big_theta(t)? - tau;
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - g / self.theta_sq(t);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 0.25 * tol || hi - lo <= tol {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::Quadrature { a: lo, b: hi })
    }
}
