//! Geometric approach from an interior origin toward one endpoint of a domain.
//!
//! The path is parametrized by `u ≥ 0`; each "shell" `[k ln 2, (k+1) ln 2]`
//! halves the distance to a finite endpoint or doubles the distance from the
//! origin toward an infinite one.

use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Approach {
    origin: f64,
    endpoint: f64,
    dir: f64,
}

impl Approach {
    pub fn new(origin: f64, endpoint: f64, side: Side) -> Self {
        let dir = match side {
            Side::Left => -1.0,
            Side::Right => 1.0,
        };
        Approach { origin, endpoint, dir }
    }

    /// Point at parameter `u`.
    #[inline]
    pub fn point(&self, u: f64) -> f64 {
        if self.endpoint.is_finite() {
            self.endpoint + (self.origin - self.endpoint) * (-u).exp()
        } else {
            self.origin + self.dir * u.exp_m1()
        }
    }

    /// `dy/du`.
    #[inline]
    pub fn speed(&self, u: f64) -> f64 {
        if self.endpoint.is_finite() {
            (self.endpoint - self.origin) * (-u).exp()
        } else {
            self.dir * u.exp()
        }
    }

    /// `u` where shell `k` starts.
    pub fn shell_start(k: usize) -> f64 {
        k as f64 * LN_2
    }

    /// Whether `y` is still a usable interior point (not collapsed onto the
    /// endpoint in floating point).
    pub fn is_interior(&self, y: f64, prev: f64) -> bool {
        y.is_finite() && y != self.endpoint && y != prev
    }
}
