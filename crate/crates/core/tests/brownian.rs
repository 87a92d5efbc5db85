use holder_euler::brownian::*;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided KS critical constant at α = 10⁻³: `sqrt(−ln(α/2)/2)`.
fn ks_critical(n: usize) -> f64 {
    (-(5e-4f64).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

fn ks_statistic(mut xs: Vec<f64>) -> f64 {
    let phi = Normal::standard();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = phi.cdf(*x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[test]
fn standardized_increments_pass_ks() {
    for seed in [1u64, 42, 7_777] {
        let lat = sample_lattice(seed, 3, 14, 2.0).unwrap();
        let scale = (lat.horizon() / lat.increments().len() as f64).sqrt();
        let z: Vec<f64> = lat.increments().iter().map(|d| d / scale).collect();
        let n = z.len();
        assert!(ks_statistic(z) < ks_critical(n), "seed {seed}");
        let coarse = lat.coarsen(9).unwrap();
        let scale = (lat.horizon() / coarse.len() as f64).sqrt();
        let z: Vec<f64> = coarse.iter().map(|d| d / scale).collect();
        let n = z.len();
        assert!(ks_statistic(z) < ks_critical(n), "seed {seed}, coarse");
    }
}

#[test]
fn increment_moments_over_a_million_draws() {
    let lat = sample_lattice(99, 0, 20, 1.0).unwrap();
    let n = lat.increments().len() as f64;
    let dt = 1.0 / n;
    let z: Vec<f64> = lat.increments().iter().map(|d| d / dt.sqrt()).collect();
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let lag1 = z.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1.0);
    // 5 standard errors: 1/√n for mean and lag-1 product, √(2/n) for variance
    assert!(mean.abs() < 5.0 / n.sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 5.0 * (2.0 / n).sqrt(), "var {var}");
    assert!(lag1.abs() < 5.0 / n.sqrt(), "lag-1 {lag1}");
}

#[test]
fn distinct_paths_are_uncorrelated() {
    let a = sample_lattice(5, 0, 16, 1.0).unwrap();
    let b = sample_lattice(5, 1, 16, 1.0).unwrap();
    let n = a.increments().len() as f64;
    let dt = 1.0 / n;
    let c = a.increments().iter().zip(b.increments()).map(|(x, y)| x * y / dt).sum::<f64>() / n;
    assert!(c.abs() < 5.0 / n.sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coarse_values_equal_fine_values(seed in any::<u64>(), path in 0u64..1_000_000, top in 1u32..12) {
        let pyr = sample_lattice(seed, path, top, 1.0).unwrap().pyramid();
        for level in 0..top {
            let shift = top - level;
            for k in 0..=(1usize << level) {
                prop_assert_eq!(pyr.value(level, k).unwrap().to_bits(), pyr.value(top, k << shift).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn coarsen_matches_pyramid(seed in any::<u64>(), top in 1u32..12, level in 0u32..12) {
        let level = level.min(top);
        let lat = sample_lattice(seed, 0, top, 1.5).unwrap();
        prop_assert_eq!(lat.coarsen(level).unwrap(), lat.pyramid().increments(level).unwrap().to_vec());
    }

    #[test]
    fn lattice_is_a_pure_function(seed in any::<u64>(), path in any::<u64>()) {
        prop_assert_eq!(sample_lattice(seed, path, 6, 1.0).unwrap(), sample_lattice(seed, path, 6, 1.0).unwrap());
    }
}
