use crate::error::{Error, Result};
use crate::sde::SdeModel;

/// Smallest reference gap `L_ref − ℓ_max`.
pub const REFERENCE_GAP: u32 = 4;
pub const MIN_PATHS: u64 = 100;

/// Error metric: `sup_k` over the level's own grid of the per-node mean
/// `E|X_{t_k} − x_k|`.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: SdeModel,
    pub min_level: u32,
    pub max_level: u32,
    pub ref_level: u32,
    pub paths: u64,
    pub master_seed: u64,
    /// Drop exploded paths (and count them) instead of aborting.
    pub allow_explosions: bool,
}

impl ExperimentConfig {
    pub fn new(model: SdeModel, levels: (u32, u32), ref_level: u32, paths: u64, master_seed: u64) -> Result<Self> {
        let cfg = ExperimentConfig {
            model,
            min_level: levels.0,
            max_level: levels.1,
            ref_level,
            paths,
            master_seed,
            allow_explosions: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_level > self.max_level {
            return Err(Error::param(
                "levels",
                format!("empty range {}..{}", self.min_level, self.max_level),
            ));
        }
        if self.ref_level < self.max_level + REFERENCE_GAP {
            return Err(Error::param(
                "ref_level",
                format!(
                    "gap rule violated: ref_level must be >= max level + {REFERENCE_GAP} = {}, got {}",
                    self.max_level + REFERENCE_GAP,
                    self.ref_level
                ),
            ));
        }
        if self.paths < MIN_PATHS {
            return Err(Error::param("paths", format!("need at least {MIN_PATHS}, got {}", self.paths)));
        }
        Ok(())
    }

    pub fn levels(&self) -> impl Iterator<Item = u32> {
        self.min_level..=self.max_level
    }
}
