use std::sync::Arc;

use super::blocks::{run_blocks, Samples};
use super::seed::{derive_seed, TIMECHANGE_CHANGED, TIMECHANGE_ORIGINAL};
use crate::brownian::sample_lattice;
use crate::criteria::{build_timechange, TimeChange};
use crate::error::{Error, Result};
use crate::schemes::euler_run;
use crate::sde::{make_prototype, CoefficientFn, CoefficientMeta, PrototypeParams, SdeModel, TimeGrid};

/// `Φ⁻¹(1 − 5·10⁻⁴)`: two-sided critical value at significance `10⁻³`.
pub const Z_CRITICAL_1E3: f64 = 3.290_526_731_491_926;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMoments {
    pub mean: f64,
    pub mean_stderr: f64,
    pub variance: f64,
    pub variance_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeChangeReport {
    pub level: u32,
    pub paths: u64,
    /// `Θ(T)`.
    pub horizon_image: f64,
    pub original: SampleMoments,
    pub changed: SampleMoments,
    pub z_mean: f64,
    pub z_variance: f64,
    pub z_critical: f64,
    pub pass: bool,
}

fn moments(xs: &[f64]) -> SampleMoments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in xs {
        let d = (x - mean) * (x - mean);
        m2 += d;
        m4 += d * d;
    }
    let variance = m2 / (n - 1.0);
    let m4 = m4 / n;
    let v = m2 / n;
    SampleMoments {
        mean,
        mean_stderr: (variance / n).sqrt(),
        variance,
        variance_stderr: ((m4 - v * v).max(0.0) / n).sqrt(),
    }
}

/// Time-changed prototype on `[0, Θ(T)]`: drift `a(A(s), x)/θ(A(s))²`, unit
/// diffusion. `A` is tabulated at the nodes of `grid`.
fn changed_model(params: &PrototypeParams, tc: &TimeChange, grid: &TimeGrid) -> Result<SdeModel> {
    let n = grid.steps();
    let mut table = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = tc.inverse(grid.node(k).min(tc.horizon_image()))?;
        let th = params.theta.eval(t);
        table.push((params.kappa.eval(t) / (th * th), params.lambda.eval(t)));
    }
    let ds = grid.dt();
    let table = Arc::new(table);
    let drift = CoefficientFn::new(
        "timechanged-drift",
        CoefficientMeta {
            lipschitz_k: None,
            holder_half_k: None,
            nonnegative: false,
        },
        move |s, x| {
            let k = ((s / ds).round() as usize).min(table.len() - 1);
            let (rate, level) = table[k];
            rate * (level - x)
        },
    );
    let kind = params.kind;
    let sigma = CoefficientFn::new(
        "unit-sigma",
        CoefficientMeta {
            lipschitz_k: None,
            holder_half_k: None,
            nonnegative: true,
        },
        move |_, x| kind.unit_sigma(x),
    );
    SdeModel::new(
        format!("{}-timechanged", kind.as_str()),
        drift,
        sigma,
        params.effective_gamma(),
        params.x0,
        tc.horizon_image(),
        None,
    )
}

fn terminal_values(model: &SdeModel, level: u32, paths: u64, seed: u64) -> Result<Vec<f64>> {
    let grid = TimeGrid::new(model.horizon, level)?;
    let out = run_blocks(paths, Samples::default, |acc, m| {
        let lattice = sample_lattice(seed, m, level, model.horizon)?;
        let mut last = f64::NAN;
        euler_run(model, &grid, lattice.increments(), |_, x| last = x)
            .map_err(|step| Error::Explosion { path_index: m, level, step })?;
        acc.0.push(last);
        Ok(())
    })?;
    Ok(out.0)
}

/// Compare the law of `X_T` with that of the time-changed `X̃_{Θ(T)}` by
/// two-sample z-tests on mean and variance, using independent paths.
pub fn timechange_check(params: &PrototypeParams, level: u32, paths: u64, seed: u64) -> Result<TimeChangeReport> {
    params.validate()?;
    if paths < 2 {
        return Err(Error::param("paths", format!("need at least 2, got {paths}")));
    }
    let tc = build_timechange(params.theta, params.horizon)?;
    let original = make_prototype(params)?;
    let changed_grid = TimeGrid::new(tc.horizon_image(), level)?;
    let changed = changed_model(params, &tc, &changed_grid)?;
    let a = moments(&terminal_values(&original, level, paths, derive_seed(seed, TIMECHANGE_ORIGINAL))?);
    let b = moments(&terminal_values(&changed, level, paths, derive_seed(seed, TIMECHANGE_CHANGED))?);
    let z = |x: f64, y: f64, sx: f64, sy: f64| {
        let s = (sx * sx + sy * sy).sqrt();
        if s > 0.0 {
            (x - y) / s
        } else if x == y {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let z_mean = z(a.mean, b.mean, a.mean_stderr, b.mean_stderr);
    let z_variance = z(a.variance, b.variance, a.variance_stderr, b.variance_stderr);
    let pass = z_mean.abs() <= Z_CRITICAL_1E3 && z_variance.abs() <= Z_CRITICAL_1E3;
    Ok(TimeChangeReport {
        level,
        paths,
        horizon_image: tc.horizon_image(),
        original: a,
        changed: b,
        z_mean,
        z_variance,
        z_critical: Z_CRITICAL_1E3,
        pass,
    })
}
