use super::blocks::{run_blocks, Merge};
use crate::brownian::{halve, sample_lattice};
use crate::error::{Error, Result};
use crate::schemes::euler_run;
use crate::sde::{SdeModel, TimeGrid};

/// Points per axis on which the comparison preconditions are sampled.
const PRECONDITION_GRID: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub level: u32,
    pub paths: u64,
    pub tolerance: f64,
    /// Paths with `min_k (x_hi,k − x_lo,k) < −tolerance`.
    pub violations: u64,
    pub violation_fraction: f64,
    /// Largest `−min_k (x_hi,k − x_lo,k)` over all paths, floored at 0.
    pub worst_violation: f64,
}

fn check_preconditions(lo: &SdeModel, hi: &SdeModel) -> Result<()> {
    let fail = |msg: String| Err(Error::Hypothesis(msg));
    if lo.horizon != hi.horizon || lo.gamma() != hi.gamma() {
        return fail("models must share horizon and gamma".into());
    }
    if lo.x0 > hi.x0 {
        return fail(format!("x0 ordering violated: {} > {}", lo.x0, hi.x0));
    }
    let span = 10.0 * (1.0 + lo.x0.abs().max(hi.x0.abs()));
    let (xa, xb) = match lo.domain.or(hi.domain) {
        Some(d) if d.left.is_finite() && d.right.is_finite() => (d.left, d.right),
        Some(d) if d.left.is_finite() => (d.left, d.left + span),
        Some(d) if d.right.is_finite() => (d.right - span, d.right),
        _ => (-span, span),
    };
    let same_sigma = lo.base_sigma.same_fn(&hi.base_sigma);
    for i in 0..=PRECONDITION_GRID {
        let t = lo.horizon * i as f64 / PRECONDITION_GRID as f64;
        for j in 0..=PRECONDITION_GRID {
            let x = xa + (xb - xa) * j as f64 / PRECONDITION_GRID as f64;
            if !same_sigma && lo.base_sigma.eval(t, x) != hi.base_sigma.eval(t, x) {
                return fail(format!("diffusion coefficients differ at (t = {t}, x = {x})"));
            }
            let (a, b) = (lo.drift(t, x), hi.drift(t, x));
            if a > b {
                return fail(format!("drift ordering violated at (t = {t}, x = {x}): {a} > {b}"));
            }
        }
    }
    Ok(())
}

struct Acc {
    violations: Vec<u64>,
    worst: Vec<f64>,
}

impl Merge for Acc {
    fn merge(&mut self, other: Self) {
        for i in 0..self.violations.len() {
            self.violations[i] += other.violations[i];
            self.worst[i] = self.worst[i].max(other.worst[i]);
        }
    }
}

pub fn comparison_check(lo: &SdeModel, hi: &SdeModel, level: u32, paths: u64, seed: u64, tolerance: f64) -> Result<ComparisonReport> {
    Ok(comparison_trend(lo, hi, &[level], paths, seed, tolerance)?.remove(0))
}

/// One report per level, all driven by lattices sampled at the finest
/// requested level.
pub fn comparison_trend(
    lo: &SdeModel,
    hi: &SdeModel,
    levels: &[u32],
    paths: u64,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<ComparisonReport>> {
    if levels.is_empty() {
        return Err(Error::param("levels", "no level requested".to_string()));
    }
    if !(tolerance >= 0.0) {
        return Err(Error::param("tolerance", format!("must be >= 0, got {tolerance}")));
    }
    check_preconditions(lo, hi)?;
    let fine = *levels.iter().max().unwrap();
    let grids: Vec<TimeGrid> = levels.iter().map(|&l| TimeGrid::new(lo.horizon, l)).collect::<Result<_>>()?;
    let init = || Acc {
        violations: vec![0; levels.len()],
        worst: vec![0.0; levels.len()],
    };
    let acc = run_blocks(paths, init, |acc, m| {
        let lattice = sample_lattice(seed, m, fine, lo.horizon)?;
        for (i, grid) in grids.iter().enumerate() {
            let mut incs = lattice.increments().to_vec();
            for _ in grid.level()..fine {
                incs = halve(&incs);
            }
            let explode = |step| Error::Explosion { path_index: m, level: grid.level(), step };
            let mut xs = Vec::with_capacity(grid.steps() + 1);
            euler_run(lo, grid, &incs, |_, x| xs.push(x)).map_err(explode)?;
            let mut gap = f64::INFINITY;
            euler_run(hi, grid, &incs, |k, x| gap = gap.min(x - xs[k])).map_err(explode)?;
            if gap < -tolerance {
                acc.violations[i] += 1;
            }
            if -gap > acc.worst[i] {
                acc.worst[i] = -gap;
            }
        }
        Ok(())
    })?;
    Ok(levels
        .iter()
        .enumerate()
        .map(|(i, &level)| ComparisonReport {
            level,
            paths,
            tolerance,
            violations: acc.violations[i],
            violation_fraction: acc.violations[i] as f64 / paths as f64,
            worst_violation: acc.worst[i],
        })
        .collect())
}
