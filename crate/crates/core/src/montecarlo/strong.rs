use super::blocks::{run_blocks, Merge};
use super::config::ExperimentConfig;
use super::fit::{fit_order, OrderFit, MAX_RELATIVE_STDERR};
use crate::brownian::sample_lattice;
use crate::criteria::RatePrediction;
use crate::error::{Error, Result};
use crate::schemes::{euler_run, reference_on_level};
use crate::sde::TimeGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelError {
    pub level: u32,
    pub steps: u64,
    pub dt: f64,
    /// `max_k` of the node means `mean_m |ref(t_k) − x_k|`.
    pub l1_error: f64,
    /// Standard error of the node mean at `argmax_k`.
    pub stderr: f64,
    pub argmax_k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelError>,
    pub fit: Option<OrderFit>,
    pub excluded_levels: Vec<u32>,
    pub paths: u64,
    pub exploded_paths: u64,
    pub ref_level: u32,
    /// Filled in by callers that know which criterion applies.
    pub prediction: Option<RatePrediction>,
}

/// Running per-node sums of `|error|` and `|error|²` for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: u64,
}

impl NodeStats {
    pub fn new(nodes: usize) -> Self {
        NodeStats {
            sum: vec![0.0; nodes],
            sum_sq: vec![0.0; nodes],
            count: 0,
        }
    }

    pub fn push(&mut self, abs_errors: &[f64]) {
        for (k, e) in abs_errors.iter().enumerate() {
            self.sum[k] += e;
            self.sum_sq[k] += e * e;
        }
        self.count += 1;
    }

    #[inline]
    fn add(&mut self, k: usize, e: f64) {
        self.sum[k] += e;
        self.sum_sq[k] += e * e;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `(max_k mean_k, stderr at the maximizer, maximizer)`; ties go to the
    /// smallest `k`.
    pub fn sup_of_means(&self) -> (f64, f64, usize) {
        let m = self.count as f64;
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, s) in self.sum.iter().enumerate() {
            let mean = s / m;
            if mean > best.0 {
                best = (mean, k);
            }
        }
        let (mean, k) = best;
        let var = ((self.sum_sq[k] - m * mean * mean) / (m - 1.0)).max(0.0);
        (mean, (var / m).sqrt(), k)
    }
}

impl Merge for NodeStats {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(other.sum_sq) {
            *a += b;
        }
        self.count += other.count;
    }
}

struct Acc {
    levels: Vec<NodeStats>,
    exploded: u64,
}

impl Merge for Acc {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.levels.iter_mut().zip(other.levels) {
            a.merge(b);
        }
        self.exploded += other.exploded;
    }
}

/// Strong L¹ error of Euler at every configured level against the fine-grid
/// reference, all driven by one Brownian path per sample.
pub fn estimate_strong_error(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let model = &cfg.model;
    let horizon = model.horizon;
    let fine = TimeGrid::new(horizon, cfg.ref_level)?;
    let grids: Vec<TimeGrid> = cfg.levels().map(|l| TimeGrid::new(horizon, l)).collect::<Result<_>>()?;
    let init = || Acc {
        levels: grids.iter().map(|g| NodeStats::new(g.steps() + 1)).collect(),
        exploded: 0,
    };
    let acc = run_blocks(cfg.paths, init, |acc, m| {
        let lattice = sample_lattice(cfg.master_seed, m, cfg.ref_level, horizon)?;
        let explode = |level, step| Error::Explosion { path_index: m, level, step };
        let reference = match reference_on_level(model, &fine, lattice.increments(), cfg.max_level) {
            Ok(r) => r,
            Err(_) if cfg.allow_explosions => {
                acc.exploded += 1;
                return Ok(());
            }
            Err(step) => return Err(explode(cfg.ref_level, step)),
        };
        let mut incs = lattice.increments().to_vec();
        for _ in cfg.max_level..cfg.ref_level {
            incs = crate::brownian::halve(&incs);
        }
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(grids.len());
        for grid in grids.iter().rev() {
            let stride = 1usize << (cfg.max_level - grid.level());
            let mut row = vec![0.0; grid.steps() + 1];
            if let Err(step) = euler_run(model, grid, &incs, |k, x| row[k] = (reference[k * stride] - x).abs()) {
                if cfg.allow_explosions {
                    acc.exploded += 1;
                    return Ok(());
                }
                return Err(explode(grid.level(), step));
            }
            rows.push(row);
            if grid.level() > cfg.min_level {
                incs = crate::brownian::halve(&incs);
            }
        }
        for (stats, row) in acc.levels.iter_mut().zip(rows.iter().rev()) {
            for (k, e) in row.iter().enumerate() {
                stats.add(k, *e);
            }
            stats.count += 1;
        }
        Ok(())
    })?;
    if acc.levels[0].count() < 2 {
        return Err(Error::param("paths", "fewer than two paths survived".to_string()));
    }
    let levels: Vec<LevelError> = grids
        .iter()
        .zip(&acc.levels)
        .map(|(g, s)| {
            let (e, se, k) = s.sup_of_means();
            LevelError {
                level: g.level(),
                steps: g.steps() as u64,
                dt: g.dt(),
                l1_error: e,
                stderr: se,
                argmax_k: k,
            }
        })
        .collect();
    let (fit, excluded_levels) = fit_levels(&levels);
    Ok(ConvergenceReport {
        levels,
        fit,
        excluded_levels,
        paths: cfg.paths,
        exploded_paths: acc.exploded,
        ref_level: cfg.ref_level,
        prediction: None,
    })
}

/// Fit over levels with positive error and stderr at most 25% of it; returns
/// the fit (if at least three remain) and the excluded levels.
pub fn fit_levels(levels: &[LevelError]) -> (Option<OrderFit>, Vec<u32>) {
    let (keep, drop): (Vec<&LevelError>, Vec<&LevelError>) = levels
        .iter()
        .partition(|l| l.l1_error > 0.0 && l.stderr <= MAX_RELATIVE_STDERR * l.l1_error);
    let points: Vec<(u32, f64)> = keep.iter().map(|l| (l.level, l.l1_error)).collect();
    (fit_order(&points), drop.iter().map(|l| l.level).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_of_means_by_hand() {
        let mut s = NodeStats::new(3);
        s.push(&[0.0, 1.0, 2.0]);
        s.push(&[0.0, 3.0, 2.0]);
        let (e, se, k) = s.sup_of_means();
        assert_eq!((e, k), (2.0, 1));
        // sample sd of {1, 3} is √2, stderr = √2/√2 = 1
        assert!((se - 1.0).abs() < 1e-15);
    }
}
