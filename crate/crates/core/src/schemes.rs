//! Equidistant Euler scheme, its continuous-time interpolation, and the
//! fine-grid reference solution.

use crate::brownian::{BrownianLattice, BrownianPyramid};
use crate::error::{Error, Result};
use crate::sde::{clamped_power, SdeModel, TimeGrid};

pub const REFERENCE_TAG: &str = "euler-fine";

#[derive(Debug, Clone, PartialEq)]
pub struct EulerTrajectory {
    pub grid: TimeGrid,
    /// `x_0..=x_N`; truncated after the first non-finite value when exploded.
    pub values: Vec<f64>,
    pub model: String,
    pub path_index: u64,
    /// First step index whose value is non-finite.
    pub explosion: Option<usize>,
}

impl EulerTrajectory {
    pub fn exploded(&self) -> bool {
        self.explosion.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub solver: &'static str,
    pub path_index: u64,
    pub explosion: Option<usize>,
}

/// Run `x_{k+1} = x_k + a(t_k, x_k)·dt + c(t_k, x_k)·ΔW_k`, calling `visit(k, x_k)`
/// for every node including `k = 0`.
///
/// Returns `Err(k)` with the first index `k` whose value is not finite; `visit`
/// is not called for it.
#[inline]
pub fn euler_run<F>(model: &SdeModel, grid: &TimeGrid, increments: &[f64], mut visit: F) -> std::result::Result<(), usize>
where
    F: FnMut(usize, f64),
{
    debug_assert_eq!(increments.len(), grid.steps());
    let dt = grid.dt();
    let gamma = model.gamma();
    let mut x = model.x0;
    visit(0, x);
    for (k, dw) in increments.iter().enumerate() {
        let t = grid.node(k);
        let a = model.drift.eval(t, x);
        let c = clamped_power(model.base_sigma.eval(t, x), gamma);
        x = x + a * dt + c * dw;
        if !x.is_finite() {
            return Err(k + 1);
        }
        visit(k + 1, x);
    }
    Ok(())
}

fn check_horizon(model: &SdeModel, horizon: f64) -> Result<()> {
    if model.horizon != horizon {
        return Err(Error::param(
            "horizon",
            format!("model horizon {} differs from lattice horizon {horizon}", model.horizon),
        ));
    }
    Ok(())
}

/// Euler trajectory driven by explicit increments on `grid`.
pub fn euler_with_increments(model: &SdeModel, grid: TimeGrid, increments: &[f64], path_index: u64) -> Result<EulerTrajectory> {
    if increments.len() != grid.steps() {
        return Err(Error::param(
            "increments",
            format!("expected {} increments, got {}", grid.steps(), increments.len()),
        ));
    }
    let mut values = Vec::with_capacity(grid.steps() + 1);
    let explosion = euler_run(model, &grid, increments, |_, x| values.push(x)).err();
    Ok(EulerTrajectory {
        grid,
        values,
        model: model.name.clone(),
        path_index,
        explosion,
    })
}

pub fn euler_path(model: &SdeModel, lattice: &BrownianLattice, level: u32) -> Result<EulerTrajectory> {
    check_horizon(model, lattice.horizon())?;
    let increments = lattice.coarsen(level)?;
    let grid = TimeGrid::new(lattice.horizon(), level)?;
    euler_with_increments(model, grid, &increments, lattice.path_index())
}

/// Euler at the lattice's own level; stands in for the exact solution.
pub fn reference_path(model: &SdeModel, lattice: &BrownianLattice) -> Result<ReferenceTrajectory> {
    let t = euler_path(model, lattice, lattice.level())?;
    Ok(ReferenceTrajectory {
        grid: t.grid,
        values: t.values,
        solver: REFERENCE_TAG,
        path_index: t.path_index,
        explosion: t.explosion,
    })
}

/// Reference solution on the fine grid, keeping only the nodes of the
/// coarser `keep_level` grid.
pub fn reference_on_level(
    model: &SdeModel,
    fine_grid: &TimeGrid,
    fine_increments: &[f64],
    keep_level: u32,
) -> std::result::Result<Vec<f64>, usize> {
    let stride = 1usize << (fine_grid.level() - keep_level);
    let mut kept = Vec::with_capacity((1usize << keep_level) + 1);
    euler_run(model, fine_grid, fine_increments, |k, x| {
        if k % stride == 0 {
            kept.push(x);
        }
    })?;
    Ok(kept)
}

/// Continuous Euler value `x̄_t` with coefficients frozen at `η(t)`.
///
/// `t` must be a node of the pyramid's finest grid.
pub fn euler_interpolate(model: &SdeModel, traj: &EulerTrajectory, brownian: &BrownianPyramid, t: f64) -> Result<f64> {
    let fine = TimeGrid::new(brownian.horizon(), brownian.finest_level())?;
    let level = traj.grid.level();
    if level > fine.level() {
        return Err(Error::LevelTooFine { level, max: fine.level() });
    }
    let fine_k = fine.exact_index(t).ok_or(Error::OffLattice { t, level: fine.level() })?;
    let shift = fine.level() - level;
    let k = fine_k >> shift;
    let xk = *traj
        .values
        .get(k)
        .ok_or_else(|| Error::param("trajectory", format!("no finite value at step {k}")))?;
    if fine_k == k << shift {
        return Ok(xk);
    }
    let tk = traj.grid.node(k);
    let w_t = brownian.value(fine.level(), fine_k)?;
    let w_eta = brownian.value(level, k)?;
    let a = model.drift(tk, xk);
    let c = model.diffusion(tk, xk)?;
    Ok(xk + a * (t - tk) + c * (w_t - w_eta))
}
