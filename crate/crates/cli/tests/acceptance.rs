//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero exit
//! if any criterion fails. Everything except the inequality sweep goes
//! through the `holder-euler` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use holder_euler::sde::{concavity_gap, power_gap_bound};
use holder_euler_cli::csv::{parse_converge, parse_moments};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

const BIN: &str = env!("CARGO_BIN_EXE_holder-euler");

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

struct Env {
    dir: tempfile::TempDir,
}

impl Env {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Result<String, String> {
        let out: Output = Command::new(BIN).args(args).output().map_err(|e| e.to_string())?;
        if out.status.success() {
            Ok(String::from_utf8_lossy(&out.stdout).into_owned())
        } else {
            Err(format!(
                "exit {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr).trim()
            ))
        }
    }

    fn converge(&self, name: &str, model: &str, extra: &[&str]) -> Result<(String, PathBuf), String> {
        let cfg = self.config(
            &format!("{name}.conf"),
            &format!("{model}\n[experiment]\nlevels = 4:9\nref_level = 13\npaths = 10000\nseed = 42\n"),
        );
        let csv = self.path(&format!("{name}.csv"));
        let mut args = vec!["converge", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()];
        args.extend_from_slice(extra);
        self.run(&args)?;
        Ok((std::fs::read_to_string(&csv).map_err(|e| e.to_string())?, csv))
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn within_ulps(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 4.0 * f64::EPSILON * rhs.abs()
}

fn inequality_sweep() -> Outcome {
    let mut rng = ChaCha12Rng::seed_from_u64(33);
    let mag = |rng: &mut ChaCha12Rng| 10f64.powf(rng.random_range(-8.0..=8.0));
    let mut violations = 0;
    let n = 100_000;
    for i in 0..n {
        let x = mag(&mut rng);
        let y = if i % 10 == 0 { 0.0 } else { mag(&mut rng) };
        let gamma = rng.random_range(0.5..1.0);
        let beta = 1.0 - rng.random_range(0.0..1.0);
        let (l1, r1) = power_gap_bound(x, y, gamma, 1.0).unwrap();
        let (l2, r2) = power_gap_bound(x, y, gamma, beta).unwrap();
        let (l3, r3) = concavity_gap(x, y, gamma);
        if !(within_ulps(l1, r1) && within_ulps(l2, r2) && within_ulps(l3, r3)) {
            violations += 1;
        }
    }
    Outcome::new(violations == 0, format!("{n} samples, {violations} violations beyond 4 ulps"))
}

fn exact_cases(env: &Env) -> Result<Outcome, String> {
    let additive = env.config("additive.conf", "[model]\nkind = custom\ndrift = 0\nsigma = 1\nx0 = 0\n[experiment]\nlevels = 4:9\nref_level = 13\npaths = 200\n");
    let report = parse_converge(&env.run(&["converge", "--config", p(&additive)])?).map_err(|e| e.to_string())?;
    let worst = report.levels.iter().map(|l| l.l1_error).fold(0.0, f64::max);

    let q0 = env.config("q0.conf", "[model]\nkind = cir\nlambda = 0.25\nhorizon = 1.3\n[condition]\nq = 0\n[experiment]\nref_level = 10\npaths = 1000\n");
    let m = parse_moments(&env.run(&["moments", "--config", p(&q0)])?).map_err(|e| e.to_string())?;
    let exact_t = m.refinement.iter().all(|r| r.estimate == 1.3 && r.stderr == 0.0) && !m.divergence_flag;

    let tc = env.run(&["timechange", "--paths", "10000", "--seed", "42"])?;
    let tc_pass = tc.starts_with("verdict=pass");
    Ok(Outcome::new(
        worst <= 1e-12 && exact_t && tc_pass,
        format!("additive-noise max error {worst:e}; q=0 estimate=T: {exact_t}; theta=1 {}", tc.trim()),
    ))
}

fn ode_order(env: &Env) -> Result<Outcome, String> {
    let cfg = env.config("ode.conf", "[model]\nkind = custom\ndrift = -x\nsigma = 0\nx0 = 1\n[experiment]\nlevels = 4:10\nref_level = 14\npaths = 100\n");
    let r = parse_converge(&env.run(&["converge", "--config", p(&cfg)])?).map_err(|e| e.to_string())?;
    let lambda = r.fit.map_or(f64::NAN, |f| f.lambda_hat);
    Ok(Outcome::new((lambda - 1.0).abs() <= 0.05, format!("lambda_hat={lambda:.4} (target 1.00 +- 0.05)")))
}

fn rate(env: &Env, name: &str, model: &str, lo: f64, hi: f64) -> Result<(Outcome, String), String> {
    let (text, _) = env.converge(name, model, &[])?;
    let r = parse_converge(&text).map_err(|e| e.to_string())?;
    let fit = r.fit.ok_or("no fit")?;
    let predicted = r.prediction.map_or("none".to_string(), |p| format!("{} ({})", p.lambda_sup, p.provenance));
    let detail = format!(
        "lambda_hat={:.4} +- {:.4} r2={:.5} in [{lo}, {hi}]; predicted {predicted}",
        fit.lambda_hat, fit.slope_stderr, fit.r2
    );
    Ok((Outcome::new((lo..=hi).contains(&fit.lambda_hat), detail), text))
}

fn moments(env: &Env) -> Result<Outcome, String> {
    let run = |name: &str, lambda: f64| -> Result<holder_euler::montecarlo::MomentEstimate, String> {
        let cfg = env.config(
            name,
            &format!("[model]\nkind = cir\nkappa = 1\nlambda = {lambda}\ntheta = 1\n[condition]\nq = -1\n[experiment]\nref_level = 13\npaths = 10000\nseed = 42\n"),
        );
        parse_moments(&env.run(&["moments", "--config", p(&cfg)])?).map_err(|e| e.to_string())
    };
    let high = run("nu2.conf", 1.0)?;
    let est: Vec<f64> = high.refinement.iter().map(|r| r.estimate).collect();
    let (min, max) = est.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    let spread = max / min - 1.0;
    let low = run("nu025.conf", 0.125)?;
    let low_est: Vec<String> = low.refinement.iter().map(|r| format!("{:.3}", r.estimate)).collect();
    Ok(Outcome::new(
        !high.divergence_flag && spread < 0.1 && low.divergence_flag,
        format!(
            "nu=2: flag={} spread={:.2}% ({:.4?}); nu=0.25: flag={} ({})",
            high.divergence_flag,
            100.0 * spread,
            est,
            low.divergence_flag,
            low_est.join(", ")
        ),
    ))
}

fn feller(env: &Env) -> Result<Outcome, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (nu, expected) in [(0.25, "exit-possible"), (0.5, "exit-possible"), (2.0, "no-exit"), (4.0, "no-exit")] {
        let cfg = env.config("feller.conf", &format!("[model]\nkind = cir\nkappa = 1\nlambda = {}\ntheta = 1\n", nu / 2.0));
        let out = env.run(&["feller", "--config", p(&cfg)])?;
        let got = out.split(' ').next().unwrap_or("").trim_start_matches("conclusion=").to_string();
        pass &= got == expected;
        parts.push(format!("nu={nu}: {got}"));
    }
    let bm = env.config("bm.conf", "[model]\nkind = custom\ndrift = 0\nsigma = 1\nx0 = 0\n");
    let out = env.run(&["feller", "--config", p(&bm)])?;
    let got = out.split(' ').next().unwrap_or("").trim_start_matches("conclusion=").to_string();
    pass &= got == "no-exit";
    parts.push(format!("BM: {got}"));
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn comparison(env: &Env) -> Result<Outcome, String> {
    let cfg = env.config(
        "compare.conf",
        "[model]\nkind = cir\nlambda = 0.5\n[model_hi]\nkind = cir\nlambda = 1\n[compare]\nlevels = 8,10\n[experiment]\npaths = 1000\nseed = 42\n",
    );
    let out = env.run(&["compare", "--config", p(&cfg)])?;
    let fraction = |level: u32| -> f64 {
        out.lines()
            .find(|l| l.starts_with(&format!("level={level} ")))
            .and_then(|l| l.split(' ').find_map(|kv| kv.strip_prefix("violation_fraction=")))
            .and_then(|v| v.parse().ok())
            .unwrap_or(f64::NAN)
    };
    let (f8, f10) = (fraction(8), fraction(10));
    Ok(Outcome::new(
        f10 < 0.01 && f10 <= f8,
        format!("violation fraction level 8: {f8}, level 10: {f10}"),
    ))
}

fn timechange(env: &Env) -> Result<Outcome, String> {
    let cfg = env.config(
        "tc.conf",
        "[model]\nkind = cir\ntheta = sin:1,0.5,2*pi\n[timechange]\nlevel = 12\n[experiment]\npaths = 100000\nseed = 42\n",
    );
    let out = env.run(&["timechange", "--config", p(&cfg)])?;
    Ok(Outcome::new(out.starts_with("verdict=pass"), out.trim().to_string()))
}

fn determinism(env: &Env, reference: &str) -> Result<Outcome, String> {
    let model = "[model]\nkind = cir\nkappa = 1\nlambda = 1\ntheta = 1\nx0 = 1\n";
    let (one, _) = env.converge("w1", model, &["--workers", "1"])?;
    let (eight, _) = env.converge("w8", model, &["--workers", "8"])?;
    Ok(Outcome::new(
        one == eight && one == reference,
        format!("workers 1 vs 8: {} bytes, identical={}", one.len(), one == eight && one == reference),
    ))
}

fn main() {
    let env = Env {
        dir: tempfile::tempdir().expect("temp dir"),
    };
    let cir = "[model]\nkind = cir\nkappa = 1\nlambda = 1\ntheta = 1\nx0 = 1\n";
    let mut reference = String::new();
    let mut results: Vec<(u32, Outcome, f64, f64)> = Vec::new();
    let criteria: Vec<(u32, f64)> = vec![
        (1, 5.0),
        (2, 10.0),
        (3, 10.0),
        (4, 300.0),
        (5, 300.0),
        (6, 300.0),
        (7, 300.0),
        (8, 240.0),
        (9, 30.0),
        (10, 60.0),
        (11, 180.0),
        (12, 600.0),
    ];
    for (id, budget) in criteria {
        let start = Instant::now();
        let outcome = match id {
            1 => Ok(inequality_sweep()),
            2 => exact_cases(&env),
            3 => ode_order(&env),
            4 => rate(&env, "cir", cir, 0.40, 0.60).map(|(o, text)| {
                reference = text;
                o
            }),
            5 => rate(&env, "cir_low", "[model]\nkind = cir\nkappa = 1\nlambda = 0.25\ntheta = 1\nx0 = 1\n", 0.15, f64::INFINITY).map(|r| r.0),
            6 => rate(&env, "ckls", "[model]\nkind = ckls\ngamma = 0.75\nkappa = 1\nlambda = 1\ntheta = 1\nx0 = 1\n", 0.40, 0.60).map(|r| r.0),
            7 => rate(&env, "wf", "[model]\nkind = wf\nkappa = 2\nlambda = 0.5\ntheta = 1\nx0 = 0.5\n", 0.40, 0.60).map(|r| r.0),
            8 => moments(&env),
            9 => feller(&env),
            10 => comparison(&env),
            11 => timechange(&env),
            _ => determinism(&env, &reference),
        };
        let secs = start.elapsed().as_secs_f64();
        let outcome = outcome.unwrap_or_else(|e| Outcome::new(false, format!("run failed: {e}")));
        let status = if outcome.pass && secs <= budget { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status}  {:.1} s (budget {budget} s)  {}", secs, outcome.detail);
        results.push((id, outcome, secs, budget));
    }
    let failed: Vec<u32> = results.iter().filter(|r| !(r.1.pass && r.2 <= r.3)).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
