use holder_euler::brownian::sample_lattice;
use holder_euler::schemes::*;
use holder_euler::sde::*;

fn constant_model(drift: CoefficientFn, sigma: f64, x0: f64) -> SdeModel {
    SdeModel::new("m", drift, CoefficientFn::constant(sigma), 0.5, x0, 1.0, None).unwrap()
}

fn decay() -> CoefficientFn {
    let meta = CoefficientMeta { lipschitz_k: Some(1.0), holder_half_k: Some(0.0), nonnegative: false };
    CoefficientFn::new("-x", meta, |_, x| -x)
}

#[test]
fn deterministic_decay_matches_closed_form_euler() {
    let m = constant_model(decay(), 0.0, 1.0);
    for level in [3u32, 6, 10] {
        let lat = sample_lattice(1, 0, level, 1.0).unwrap();
        let tr = euler_path(&m, &lat, level).unwrap();
        let dt = tr.grid.dt();
        for (k, x) in tr.values.iter().enumerate() {
            assert!((x - (1.0 - dt).powi(k as i32)).abs() < 1e-13);
        }
        // global error of the exponential ≈ dt·e^{-1}/2 at T = 1
        let err = (tr.values.last().unwrap() - (-1.0f64).exp()).abs();
        let lead = dt * (-1.0f64).exp() / 2.0;
        assert!((err - lead).abs() < 0.5 * lead, "level {level}: {err} vs {lead}");
    }
}

#[test]
fn additive_noise_is_exact_at_every_level() {
    let m = constant_model(CoefficientFn::constant(0.0), 1.0, 0.25);
    let lat = sample_lattice(11, 4, 12, 1.0).unwrap();
    let pyr = lat.pyramid();
    for level in [0u32, 5, 12] {
        let tr = euler_path(&m, &lat, level).unwrap();
        for (k, x) in tr.values.iter().enumerate() {
            assert!((x - 0.25 - pyr.value(level, k).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn cir_euler_mean_follows_linear_recursion() {
    // E x_{k+1} = E x_k + κ(λ − E x_k)dt since the noise has mean zero given x_k
    let (kappa, lambda, x0) = (1.5, 0.8, 0.2);
    let m = make_prototype(&PrototypeParams::constant(PrototypeKind::Cir, kappa, lambda, 1.0, x0)).unwrap();
    let level = 8;
    let paths = 4000;
    let xs: Vec<f64> = (0..paths)
        .map(|p| *euler_path(&m, &sample_lattice(3, p, level, 1.0).unwrap(), level).unwrap().values.last().unwrap())
        .collect();
    let n = paths as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let dt = 1.0 / 256.0;
    let want = lambda + (x0 - lambda) * (1.0 - kappa * dt).powi(256);
    assert!((mean - want).abs() < 5.0 * se, "{mean} vs {want} ± {se}");
    let exact = lambda + (x0 - lambda) * (-kappa).exp();
    assert!((want - exact).abs() < 1e-3);
}

/// Mean and standard error of `sup_k |x_k|^p` for `p = 1, 2, 4`.
fn sup_moments(m: &SdeModel, level: u32, paths: u64, seed: u64) -> [(f64, f64); 3] {
    let mut sum = [0.0; 3];
    let mut sum_sq = [0.0; 3];
    for p in 0..paths {
        let tr = euler_path(m, &sample_lattice(seed, p, level, 1.0).unwrap(), level).unwrap();
        let sup = tr.values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for (i, e) in [1, 2, 4].iter().enumerate() {
            let v = sup.powi(*e);
            sum[i] += v;
            sum_sq[i] += v * v;
        }
    }
    let n = paths as f64;
    std::array::from_fn(|i| {
        let mean = sum[i] / n;
        (mean, ((sum_sq[i] / n - mean * mean) / (n - 1.0)).sqrt())
    })
}

#[test]
fn sup_moments_are_stable_in_path_count() {
    for p in [
        PrototypeParams::constant(PrototypeKind::Cir, 1.0, 1.0, 1.0, 1.0),
        PrototypeParams::constant(PrototypeKind::Wf, 1.0, 0.5, 1.0, 0.5),
        PrototypeParams::constant(PrototypeKind::Ckls, 1.0, 1.0, 1.0, 1.0),
    ] {
        let m = make_prototype(&p).unwrap();
        let a = sup_moments(&m, 6, 4000, 1);
        let b = sup_moments(&m, 6, 8000, 2);
        for i in 0..3 {
            let ((ma, sa), (mb, sb)) = (a[i], b[i]);
            assert!(ma.is_finite() && mb.is_finite());
            // no heavy-tail blow-up: relative stderr small and the two runs agree
            assert!(sa < 0.2 * ma && sb < 0.2 * mb, "{}: moment {i}: {ma}±{sa}, {mb}±{sb}", p.kind);
            assert!((ma - mb).abs() < 5.0 * sa.hypot(sb), "{}: moment {i}: {ma} vs {mb}", p.kind);
        }
    }
}

#[test]
fn interpolated_increments_are_regular() {
    let m = make_prototype(&PrototypeParams::constant(PrototypeKind::Cir, 1.0, 1.0, 1.0, 1.0)).unwrap();
    let (level, fine) = (5u32, 9u32);
    let pairs = [(0usize, 1usize), (3, 17), (40, 41), (100, 300), (0, 512), (255, 256), (17, 18)];
    let paths = 2000;
    let mut sums = vec![0.0; pairs.len()];
    let g = TimeGrid::new(1.0, fine).unwrap();
    for p in 0..paths {
        let lat = sample_lattice(8, p, fine, 1.0).unwrap();
        let pyr = lat.pyramid();
        let tr = euler_path(&m, &lat, level).unwrap();
        for (i, (a, b)) in pairs.iter().enumerate() {
            let xa = euler_interpolate(&m, &tr, &pyr, g.node(*a)).unwrap();
            let xb = euler_interpolate(&m, &tr, &pyr, g.node(*b)).unwrap();
            sums[i] += (xb - xa).powi(2) / (g.node(*b) - g.node(*a));
        }
    }
    for (i, s) in sums.iter().enumerate() {
        let r = s / paths as f64;
        assert!(r < 5.0, "pair {:?}: {r}", pairs[i]);
    }
}

#[test]
fn wright_fisher_rarely_leaves_enlarged_interval() {
    let m = make_prototype(&PrototypeParams::constant(PrototypeKind::Wf, 1.0, 0.5, 1.0, 0.5)).unwrap();
    let level = 8;
    let paths = 5000u64;
    let exits = (0..paths)
        .filter(|p| {
            let tr = euler_path(&m, &sample_lattice(21, *p, level, 1.0).unwrap(), level).unwrap();
            tr.values.iter().any(|x| !(-0.5..=1.5).contains(x))
        })
        .count();
    assert!((exits as f64) < 1e-3 * paths as f64, "{exits} exits");
}
