use super::blocks::{run_blocks, Merge};
use crate::brownian::{halve, sample_lattice};
use crate::error::{Error, Result};
use crate::schemes::euler_run;
use crate::sde::{SdeModel, TimeGrid};

/// Exponent of the inverse-moment functional `∫_0^T E[σ(s, X_s)^q] ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCondition {
    /// `𝔰`, when the exponent was derived from it.
    pub s: Option<f64>,
    pub epsilon: f64,
    pub q: f64,
    /// `β = 1 − (𝔰 + ε/2)/(1 − γ)` and the exponent `2(γ−1)β − ε` used in the
    /// error analysis; recorded only.
    pub beta: Option<f64>,
    pub proof_exponent: Option<f64>,
}

impl MomentCondition {
    /// `q = 2(γ + 𝔰 − 1)`.
    pub fn from_s(gamma: f64, s: f64, epsilon: f64) -> Result<Self> {
        if !(0.5..1.0).contains(&gamma) {
            return Err(Error::param("gamma", format!("must lie in [1/2, 1), got {gamma}")));
        }
        if !(s >= 0.0 && s + gamma <= 1.0) {
            return Err(Error::param("s", format!("must lie in [0, 1 - gamma] = [0, {}], got {s}", 1.0 - gamma)));
        }
        if !(epsilon > 0.0) {
            return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
        }
        let beta = 1.0 - (s + 0.5 * epsilon) / (1.0 - gamma);
        Ok(MomentCondition {
            s: Some(s),
            epsilon,
            q: 2.0 * (gamma + s - 1.0),
            beta: Some(beta),
            proof_exponent: Some(2.0 * (gamma - 1.0) * beta - epsilon),
        })
    }

    pub fn from_exponent(q: f64) -> Result<Self> {
        if !(q <= 0.0 && q.is_finite()) {
            return Err(Error::param("q", format!("must be finite and <= 0, got {q}")));
        }
        Ok(MomentCondition {
            s: None,
            epsilon: 0.0,
            q,
            beta: None,
            proof_exponent: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    /// Value used for `σ^q` where `σ ≤ 0`; larger values are clipped to it.
    pub cap: f64,
    /// Consecutive refinements must each grow by more than this factor to
    /// raise the divergence flag.
    pub growth_factor: f64,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions {
            cap: 1e12,
            growth_factor: 1.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementPoint {
    pub ref_level: u32,
    pub estimate: f64,
    pub stderr: f64,
    pub cap_hits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub q: f64,
    /// Estimates at `L_ref − 2`, `L_ref − 1`, `L_ref` (fewer if `L_ref < 2`);
    /// the last is the headline value.
    pub refinement: Vec<RefinementPoint>,
    pub divergence_flag: bool,
}

impl MomentEstimate {
    pub fn headline(&self) -> &RefinementPoint {
        self.refinement.last().unwrap()
    }
}

/// Smallest `σ` an Euler step of size `dt` can resolve: one step moves `x` by
/// about `σ^γ √dt`, which is of the order of `σ` itself when
/// `σ = dt^{1/(2(1−γ))}`. Values of `σ^q` beyond that scale are discretization
/// artifacts and are capped there (and at `cap`).
pub fn effective_cap(cap: f64, dt: f64, gamma: f64, q: f64) -> f64 {
    let floor = dt.powf(0.5 / (1.0 - gamma));
    cap.min(floor.powf(q))
}

struct Acc {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    caps: Vec<u64>,
    count: u64,
}

impl Merge for Acc {
    fn merge(&mut self, other: Self) {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
            self.caps[i] += other.caps[i];
        }
        self.count += other.count;
    }
}

/// `∫_0^T E[σ(t, X_t)^q] dt` by left-endpoint sums along Euler paths at
/// `L_ref` and two coarser levels driven by the same lattices.
pub fn estimate_inverse_moment(
    model: &SdeModel,
    cond: &MomentCondition,
    ref_level: u32,
    paths: u64,
    seed: u64,
    opts: &MomentOptions,
) -> Result<MomentEstimate> {
    if !(opts.cap > 0.0 && opts.growth_factor >= 1.0) {
        return Err(Error::param("cap", "cap must be positive and growth_factor >= 1".to_string()));
    }
    if paths < 2 {
        return Err(Error::param("paths", format!("need at least 2, got {paths}")));
    }
    let levels: Vec<u32> = (ref_level.saturating_sub(2)..=ref_level).collect();
    let q = cond.q;
    if q == 0.0 {
        let refinement = levels
            .iter()
            .map(|&l| RefinementPoint {
                ref_level: l,
                estimate: model.horizon,
                stderr: 0.0,
                cap_hits: 0,
            })
            .collect();
        return Ok(MomentEstimate {
            q,
            refinement,
            divergence_flag: false,
        });
    }
    let grids: Vec<TimeGrid> = levels.iter().map(|&l| TimeGrid::new(model.horizon, l)).collect::<Result<_>>()?;
    let n = grids.len();
    let init = || Acc {
        sum: vec![0.0; n],
        sum_sq: vec![0.0; n],
        caps: vec![0; n],
        count: 0,
    };
    let acc = run_blocks(paths, init, |acc, m| {
        let lattice = sample_lattice(seed, m, ref_level, model.horizon)?;
        let mut incs = lattice.increments().to_vec();
        for (i, grid) in grids.iter().enumerate().rev() {
            let dt = grid.dt();
            let steps = grid.steps();
            let cap = effective_cap(opts.cap, dt, model.gamma(), q);
            let (mut integral, mut caps) = (0.0, 0u64);
            euler_run(model, grid, &incs, |k, x| {
                if k < steps {
                    let s = model.base_sigma.eval(grid.node(k), x);
                    let v = if s > 0.0 { s.powf(q) } else { f64::INFINITY };
                    if v >= cap {
                        caps += 1;
                        integral += cap * dt;
                    } else {
                        integral += v * dt;
                    }
                }
            })
            .map_err(|step| Error::Explosion { path_index: m, level: grid.level(), step })?;
            acc.sum[i] += integral;
            acc.sum_sq[i] += integral * integral;
            acc.caps[i] += caps;
            if i > 0 {
                incs = halve(&incs);
            }
        }
        acc.count += 1;
        Ok(())
    })?;
    let mm = acc.count as f64;
    let refinement: Vec<RefinementPoint> = (0..n)
        .map(|i| {
            let mean = acc.sum[i] / mm;
            let var = ((acc.sum_sq[i] - mm * mean * mean) / (mm - 1.0)).max(0.0);
            RefinementPoint {
                ref_level: levels[i],
                estimate: mean,
                stderr: (var / mm).sqrt(),
                cap_hits: acc.caps[i],
            }
        })
        .collect();
    let divergence_flag = refinement.len() == 3
        && refinement
            .windows(2)
            .all(|w| w[1].estimate > opts.growth_factor * w[0].estimate);
    Ok(MomentEstimate {
        q,
        refinement,
        divergence_flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_exponents() {
        let c = MomentCondition::from_s(0.5, 0.0, 0.1).unwrap();
        assert_eq!(c.q, -1.0);
        let c = MomentCondition::from_s(0.75, 0.25, 0.1).unwrap();
        assert_eq!(c.q, 0.0);
        assert!(MomentCondition::from_s(0.75, 0.3, 0.1).is_err());
        assert!(MomentCondition::from_s(0.5, 0.0, 0.0).is_err());
        assert!(MomentCondition::from_exponent(0.5).is_err());
    }
}
