use crate::error::{Error, Result};

/// Equidistant dyadic grid `t_k = k·T/2^level`, `k = 0..=2^level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    level: u32,
}

impl TimeGrid {
    pub fn new(horizon: f64, level: u32) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::param("horizon", format!("must be positive, got {horizon}")));
        }
        if level > 62 {
            return Err(Error::param("level", format!("{level} is too large")));
        }
        Ok(TimeGrid { horizon, level })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of steps `N = 2^level`.
    pub fn steps(&self) -> usize {
        1usize << self.level
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    /// Node `t_k`. The last node is pinned to `T` exactly.
    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps() {
            self.horizon
        } else {
            k as f64 * self.dt()
        }
    }

    /// Index of `η(t) = max{t_k ≤ t}`.
    pub fn floor_index(&self, t: f64) -> usize {
        if t >= self.horizon {
            return self.steps();
        }
        if t <= 0.0 {
            return 0;
        }
        let mut k = (t / self.dt()).floor() as usize;
        k = k.min(self.steps());
        // guard against the division landing one cell off
        while k > 0 && self.node(k) > t {
            k -= 1;
        }
        while k < self.steps() && self.node(k + 1) <= t {
            k += 1;
        }
        k
    }

    /// `η(t)`.
    pub fn eta(&self, t: f64) -> f64 {
        self.node(self.floor_index(t))
    }

    /// Index `k` with `t_k == t` exactly, if any.
    pub fn exact_index(&self, t: f64) -> Option<usize> {
        if !(0.0..=self.horizon).contains(&t) {
            return None;
        }
        let k = self.floor_index(t);
        (self.node(k) == t).then_some(k)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps()).map(move |k| self.node(k))
    }
}
