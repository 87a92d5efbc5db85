//! Power-gap inequalities for `x ↦ x^γ`, exposed so they can be property tested.

use crate::error::{Error, Result};

/// Both sides of `|x^γ − y^γ| ≤ 2 x^{−(1−γ)β} |x − y|^{β + γ(1−β)}`.
///
/// With `beta = 1` this is `|x^γ − y^γ| ≤ 2 x^{−(1−γ)} |x − y|`.
pub fn power_gap_bound(x: f64, y: f64, gamma: f64, beta: f64) -> Result<(f64, f64)> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::param("x", format!("must be positive and finite, got {x}")));
    }
    if !(y.is_finite() && y >= 0.0) {
        return Err(Error::param("y", format!("must be nonnegative and finite, got {y}")));
    }
    if !(0.5..1.0).contains(&gamma) {
        return Err(Error::param("gamma", format!("must lie in [1/2, 1), got {gamma}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param("beta", format!("must lie in (0, 1], got {beta}")));
    }
    let lhs = (x.powf(gamma) - y.powf(gamma)).abs();
    let rhs = 2.0 * x.powf(-(1.0 - gamma) * beta) * (x - y).abs().powf(beta + gamma * (1.0 - beta));
    Ok((lhs, rhs))
}

/// Both sides of the concavity bound `|x^γ − y^γ| ≤ |x − y|^γ` for `x, y ≥ 0`.
pub fn concavity_gap(x: f64, y: f64, gamma: f64) -> (f64, f64) {
    ((x.powf(gamma) - y.powf(gamma)).abs(), (x - y).abs().powf(gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        assert_eq!(power_gap_bound(1.0, 1.0, 0.7, 0.3).unwrap(), (0.0, 0.0));
        assert_eq!(power_gap_bound(4.0, 0.0, 0.5, 1.0).unwrap(), (2.0, 4.0));
        let (l, r) = power_gap_bound(1.0, 4.0, 0.5, 0.5).unwrap();
        assert_eq!(l, 1.0);
        assert!((r - 2.0 * 3f64.powf(0.75)).abs() < 1e-15);
        assert!((r - 4.559).abs() < 1e-3);
    }

    #[test]
    fn domain_violations() {
        assert!(power_gap_bound(0.0, 1.0, 0.5, 1.0).is_err());
        assert!(power_gap_bound(1.0, -1.0, 0.5, 1.0).is_err());
        assert!(power_gap_bound(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(power_gap_bound(1.0, 1.0, 0.5, 0.0).is_err());
        assert!(power_gap_bound(1.0, 1.0, 0.5, 1.5).is_err());
    }
}
