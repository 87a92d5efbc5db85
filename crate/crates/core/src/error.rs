use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coefficient returned a non-finite value {value} at (t = {t}, x = {x})")]
    InvalidCoefficient { t: f64, x: f64, value: f64 },

    #[error("level {level} exceeds the lattice level {max}")]
    LevelTooFine { level: u32, max: u32 },

    #[error("lattice level {level} exceeds the memory guard {guard}")]
    LevelGuard { level: u32, guard: u32 },

    #[error("time {t} is not a node of the level-{level} grid")]
    OffLattice { t: f64, level: u32 },

    #[error("path {path_index} exploded at level {level}, step {step}")]
    Explosion { path_index: u64, level: u32, step: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
