//! Brownian paths sampled once at the finest dyadic level and coarsened by
//! exact pairwise summation, so every Euler level and the reference solution
//! see the same path.
//!
//! Randomness is counter-based: increment `j` of path `path_index` is a pure
//! function of `(master_seed, path_index, j)`. The stream is ChaCha12 keyed by
//! `master_seed` (expanded with `seed_from_u64`), the ChaCha stream id is the
//! path index and the word position is `2j`. Each 64-bit word `u` becomes the
//! uniform `((u >> 11) + 1/2) · 2^-53 ∈ (0, 1)`, which is mapped to a standard
//! normal by the inverse CDF `Φ⁻¹(p) = −√2 · erfc⁻¹(2p)`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// Default ceiling on the lattice level (2^26 doubles = 512 MiB).
pub const DEFAULT_LEVEL_GUARD: u32 = 26;

#[derive(Debug, Clone, PartialEq)]
pub struct BrownianLattice {
    horizon: f64,
    level: u32,
    increments: Vec<f64>,
    path_index: u64,
    master_seed: u64,
}

#[inline]
fn unit_open(u: u64) -> f64 {
    ((u >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal quantile.
#[inline]
pub fn standard_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

pub fn sample_lattice(master_seed: u64, path_index: u64, level: u32, horizon: f64) -> Result<BrownianLattice> {
    sample_lattice_with_guard(master_seed, path_index, level, horizon, DEFAULT_LEVEL_GUARD)
}

pub fn sample_lattice_with_guard(
    master_seed: u64,
    path_index: u64,
    level: u32,
    horizon: f64,
    guard: u32,
) -> Result<BrownianLattice> {
    if level > guard {
        return Err(Error::LevelGuard { level, guard });
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::param("horizon", format!("must be positive, got {horizon}")));
    }
    let n = 1usize << level;
    let scale = (horizon / n as f64).sqrt();
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    rng.set_word_pos(0);
    let increments = (0..n)
        .map(|_| scale * standard_normal_quantile(unit_open(rng.next_u64())))
        .collect();
    Ok(BrownianLattice {
        horizon,
        level,
        increments,
        path_index,
        master_seed,
    })
}

/// Halve a dyadic increment array by summing adjacent pairs.
pub fn halve(increments: &[f64]) -> Vec<f64> {
    increments.chunks_exact(2).map(|p| p[0] + p[1]).collect()
}

impl BrownianLattice {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Increments at `level`: each is the pairwise (tree) sum of the finest
    /// increments it spans.
    pub fn coarsen(&self, level: u32) -> Result<Vec<f64>> {
        if level > self.level {
            return Err(Error::LevelTooFine { level, max: self.level });
        }
        let mut cur = self.increments.clone();
        for _ in level..self.level {
            cur = halve(&cur);
        }
        Ok(cur)
    }

    /// All increment levels `0..=L`, index = level.
    pub fn pyramid(&self) -> BrownianPyramid {
        let mut levels = Vec::with_capacity(self.level as usize + 1);
        levels.push(self.increments.clone());
        for _ in 0..self.level {
            let next = halve(levels.last().unwrap());
            levels.push(next);
        }
        levels.reverse();
        BrownianPyramid {
            horizon: self.horizon,
            levels,
        }
    }
}

/// Increments of one path at every dyadic level, with Brownian values built
/// along the dyadic tree so they agree bit-exactly across levels.
#[derive(Debug, Clone)]
pub struct BrownianPyramid {
    horizon: f64,
    levels: Vec<Vec<f64>>,
}

impl BrownianPyramid {
    pub fn finest_level(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn increments(&self, level: u32) -> Result<&[f64]> {
        self.levels
            .get(level as usize)
            .map(Vec::as_slice)
            .ok_or(Error::LevelTooFine { level, max: self.finest_level() })
    }

    /// `W_{t_k}` on the level-`level` grid.
    ///
    /// Sums, from coarse to fine, the increment of every level at which the
    /// node sits at an odd position; a node shared with a finer level yields
    /// the identical sequence of additions.
    pub fn value(&self, level: u32, k: usize) -> Result<f64> {
        if level > self.finest_level() {
            return Err(Error::LevelTooFine { level, max: self.finest_level() });
        }
        let n = 1usize << level;
        if k > n {
            return Err(Error::param("k", format!("{k} exceeds {n} steps")));
        }
        let mut w = 0.0;
        if k == n {
            w += self.levels[0][0];
            return Ok(w);
        }
        for j in 1..=level {
            let p = k >> (level - j);
            if p & 1 == 1 {
                w += self.levels[j as usize][p - 1];
            }
        }
        Ok(w)
    }

    /// `W` at every node of the level-`level` grid (length `2^level + 1`).
    pub fn path(&self, level: u32) -> Result<Vec<f64>> {
        if level > self.finest_level() {
            return Err(Error::LevelTooFine { level, max: self.finest_level() });
        }
        let mut w = vec![0.0, self.levels[0][0]];
        for j in 1..=level as usize {
            let inc = &self.levels[j];
            let prev = w;
            w = Vec::with_capacity(2 * (prev.len() - 1) + 1);
            for i in 0..prev.len() - 1 {
                w.push(prev[i]);
                w.push(prev[i] + inc[2 * i]);
            }
            w.push(*prev.last().unwrap());
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed_and_index() {
        let a = sample_lattice(42, 3, 10, 1.0).unwrap();
        let b = sample_lattice(42, 3, 10, 1.0).unwrap();
        assert_eq!(a, b);
        let c = sample_lattice(42, 4, 10, 1.0).unwrap();
        assert_ne!(a.increments(), c.increments());
        let d = sample_lattice(43, 3, 10, 1.0).unwrap();
        assert_ne!(a.increments(), d.increments());
    }

    #[test]
    fn prefix_is_shared_across_levels() {
        // increment j depends only on (seed, index, j)
        let a = sample_lattice(1, 0, 6, 1.0).unwrap();
        let b = sample_lattice(1, 0, 8, 1.0).unwrap();
        let s = (2f64.powi(6) / 2f64.powi(8)).sqrt();
        for j in 0..64 {
            assert!((a.increments()[j] * s - b.increments()[j]).abs() <= 1e-15);
        }
    }

    #[test]
    fn guard_and_level_errors() {
        assert!(matches!(
            sample_lattice_with_guard(0, 0, 12, 1.0, 10),
            Err(Error::LevelGuard { level: 12, guard: 10 })
        ));
        let l = sample_lattice(0, 0, 3, 1.0).unwrap();
        assert!(matches!(l.coarsen(4), Err(Error::LevelTooFine { .. })));
    }

    #[test]
    fn coarsen_definition() {
        let lat = BrownianLattice {
            horizon: 1.0,
            level: 2,
            increments: vec![1.0, 2.0, 3.0, 4.0],
            path_index: 0,
            master_seed: 0,
        };
        assert_eq!(lat.coarsen(2).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(lat.coarsen(1).unwrap(), vec![3.0, 7.0]);
        assert_eq!(lat.coarsen(0).unwrap(), vec![10.0]);
    }

    #[test]
    fn quantile_is_odd_and_monotone() {
        assert_eq!(standard_normal_quantile(0.5), 0.0);
        assert!(standard_normal_quantile(1e-300) < -37.0);
        for p in [1e-10, 0.01, 0.2, 0.4] {
            let (lo, hi) = (standard_normal_quantile(p), standard_normal_quantile(1.0 - p));
            assert!(lo < 0.0 && (lo + hi).abs() < 1e-5 * hi.abs().max(1.0), "{p}");
        }
        assert!((standard_normal_quantile(0.975) - 1.959963984540054).abs() < 1e-12);
    }
}
