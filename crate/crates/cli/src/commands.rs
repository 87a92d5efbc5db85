use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use holder_euler::criteria::{
    feller_test_with, ito_criterion, predict_rate, theorem_rate, FellerOptions, ItoGrid, Provenance, RatePrediction,
};
use holder_euler::montecarlo::seed::{COMPARE, CONVERGE, MOMENTS};
use holder_euler::montecarlo::{
    comparison_trend, derive_seed, estimate_inverse_moment, estimate_strong_error, timechange_check,
    ExperimentConfig, MomentCondition, MomentOptions,
};
use holder_euler::Error;
use thiserror::Error;

use crate::config::{ConfigError, Location, ModelSpec, RunConfig};
use crate::csv;
use crate::model::{build_autonomous, build_sde};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Converge,
    Predict,
    Moments,
    Feller,
    Ito,
    TimeChange,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Converge => "converge",
            Command::Predict => "predict",
            Command::Moments => "moments",
            Command::Feller => "feller",
            Command::Ito => "ito",
            Command::TimeChange => "timechange",
            Command::Compare => "compare",
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ABORT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Usage(_) => EXIT_CONFIG,
            CliError::Core(e) => match e {
                Error::Hypothesis(_) | Error::InvalidDomain(_) => EXIT_HYPOTHESIS,
                Error::InvalidParameter { .. } | Error::LevelGuard { .. } => EXIT_CONFIG,
                _ => EXIT_ABORT,
            },
        }
    }
}

fn config_error(field: &str, message: &str) -> CliError {
    CliError::Config(ConfigError {
        location: Location::File,
        field: field.to_string(),
        message: message.to_string(),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

/// The applicable rate criterion: prototype boundary drifts, else the
/// inverse-moment exponent `condition.s`, else the Itô lower bound.
pub fn prediction(cfg: &RunConfig) -> Result<RatePrediction, CliError> {
    match &cfg.model {
        ModelSpec::Prototype(p) => Ok(predict_rate(p)?),
        ModelSpec::Custom(c) => {
            if let Some(s) = cfg.condition.s {
                return Ok(RatePrediction {
                    mu0: None,
                    mu1: None,
                    s,
                    lambda_sup: theorem_rate(c.gamma, s)?,
                    provenance: Provenance::InverseMoment,
                });
            }
            let report = ito_criterion(&build_autonomous(&cfg.model)?, &ito_grid(cfg))?;
            report.prediction.ok_or_else(|| {
                CliError::Core(Error::Hypothesis(format!(
                    "no rate criterion applies: set condition.s (Ito criterion trend: {})",
                    report.trend.as_str()
                )))
            })
        }
    }
}

fn ito_grid(cfg: &RunConfig) -> ItoGrid {
    ItoGrid {
        origin: cfg.ito.origin,
        shells: cfg.ito.shells,
        points_per_shell: cfg.ito.points_per_shell,
        divergence_threshold: cfg.ito.divergence_threshold,
    }
}

fn fmt_prediction(p: &RatePrediction) -> String {
    let mut s = String::new();
    if let Some(m) = p.mu0 {
        s += &format!("mu0={m} ");
    }
    if let Some(m) = p.mu1 {
        s += &format!("mu1={m} ");
    }
    s + &format!("s={} lambda_sup={} provenance={}", p.s, p.lambda_sup, p.provenance)
}

/// Writes `text` to the configured CSV path, or to `out` when there is none.
/// Returns whether it went to a file.
fn emit_csv(cfg: &RunConfig, text: &str, out: &mut dyn Write) -> Result<bool, CliError> {
    match &cfg.output.csv {
        Some(path) => write_file(path, text).map(|_| true),
        None => out.write_all(text.as_bytes()).map(|_| false).map_err(io),
    }
}

fn converge(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let e = &cfg.experiment;
    let mut exp = ExperimentConfig::new(
        build_sde(&cfg.model)?,
        e.levels,
        e.ref_level,
        e.paths,
        derive_seed(e.seed, CONVERGE),
    )?;
    exp.allow_explosions = e.allow_explosions;
    let mut report = estimate_strong_error(&exp)?;
    report.prediction = prediction(cfg).ok();
    if report.exploded_paths > 0 {
        writeln!(err, "warning: {} exploded paths were dropped", report.exploded_paths).map_err(io)?;
    }
    let text = csv::write_converge(&report);
    if emit_csv(cfg, &text, out)? {
        writeln!(out, "{}", text.lines().nth(report.levels.len() + 1).unwrap().trim_start_matches("# ")).map_err(io)?;
    }
    if let Some(path) = &cfg.output.plot {
        write_file(path, &csv::write_plot(&report))?;
    }
    Ok(())
}

fn moments(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let c = &cfg.condition;
    let cond = match (c.q, c.s) {
        (Some(q), _) => MomentCondition::from_exponent(q)?,
        (None, Some(s)) => MomentCondition::from_s(cfg.model.gamma(), s, c.epsilon)?,
        (None, None) => return Err(config_error("condition.q", "moments needs condition.q or condition.s")),
    };
    let opts = MomentOptions {
        cap: c.cap,
        growth_factor: c.growth_factor,
    };
    let e = &cfg.experiment;
    let est = estimate_inverse_moment(
        &build_sde(&cfg.model)?,
        &cond,
        e.ref_level,
        e.paths,
        derive_seed(e.seed, MOMENTS),
        &opts,
    )?;
    if emit_csv(cfg, &csv::write_moments(&est), out)? {
        let h = est.headline();
        writeln!(
            out,
            "q={} estimate={} stderr={} ref_level={} cap_hits={} divergence_flag={}",
            est.q, h.estimate, h.stderr, h.ref_level, h.cap_hits, est.divergence_flag
        )
        .map_err(io)?;
    }
    Ok(())
}

fn feller(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = build_autonomous(&cfg.model)?;
    let opts = FellerOptions {
        divergence_threshold: cfg.feller.divergence_threshold,
        max_shells: cfg.feller.max_shells,
    };
    let r = feller_test_with(&model, cfg.feller.origin.unwrap_or(model.x0), &opts)?;
    writeln!(
        out,
        "conclusion={} left={} right={} locally_integrable={}",
        r.conclusion.as_str(),
        r.left.class.as_str(),
        r.right.class.as_str(),
        r.locally_integrable
    )
    .map_err(io)?;
    if let Some(path) = &cfg.output.csv {
        let rows: Vec<_> = [&r.left, &r.right]
            .iter()
            .flat_map(|e| e.sequence.iter().map(move |(y, v)| (e.side, *y, *v)))
            .collect();
        write_file(path, &csv::write_sequence(["y", "v"], &rows))?;
    }
    Ok(())
}

fn ito(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let r = ito_criterion(&build_autonomous(&cfg.model)?, &ito_grid(cfg))?;
    let mut line = format!(
        "trend={} inf={} left={} right={}",
        r.trend.as_str(),
        r.inf_estimate,
        r.left.trend.as_str(),
        r.right.trend.as_str()
    );
    if let Some(p) = &r.prediction {
        line += &format!(" {}", fmt_prediction(p));
    }
    writeln!(out, "{line}").map_err(io)?;
    if let Some(path) = &cfg.output.csv {
        let rows: Vec<_> = [&r.left, &r.right]
            .iter()
            .flat_map(|e| e.shell_minima.iter().map(move |(x, g)| (e.side, *x, *g)))
            .collect();
        write_file(path, &csv::write_sequence(["x", "min_g"], &rows))?;
    }
    Ok(())
}

fn timechange(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let ModelSpec::Prototype(p) = &cfg.model else {
        return Err(Error::Hypothesis("the time change applies to prototype models only".into()).into());
    };
    let r = timechange_check(p, cfg.timechange.level, cfg.experiment.paths, cfg.experiment.seed)?;
    writeln!(
        out,
        "verdict={} z_mean={} z_variance={} z_critical={}",
        if r.pass { "pass" } else { "fail" },
        r.z_mean,
        r.z_variance,
        r.z_critical
    )
    .map_err(io)?;
    if let Some(path) = &cfg.output.csv {
        write_file(path, &csv::write_timechange(&r))?;
    }
    Ok(())
}

fn compare(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let Some(hi) = &cfg.model_hi else {
        return Err(config_error("model_hi", "compare needs a [model_hi] section"));
    };
    let e = &cfg.experiment;
    let reports = comparison_trend(
        &build_sde(&cfg.model)?,
        &build_sde(hi)?,
        &cfg.compare.levels,
        e.paths,
        derive_seed(e.seed, COMPARE),
        cfg.compare.tolerance,
    )?;
    for r in &reports {
        writeln!(
            out,
            "level={} violations={} violation_fraction={} worst_violation={}",
            r.level, r.violations, r.violation_fraction, r.worst_violation
        )
        .map_err(io)?;
    }
    let nonincreasing = reports.windows(2).all(|w| w[1].violation_fraction <= w[0].violation_fraction);
    writeln!(out, "nonincreasing={nonincreasing}").map_err(io)?;
    if let Some(path) = &cfg.output.csv {
        write_file(path, &csv::write_compare(&reports))?;
    }
    Ok(())
}

pub fn execute(cmd: Command, cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    match cmd {
        Command::Converge => converge(cfg, out, err)?,
        Command::Predict => writeln!(out, "{}", fmt_prediction(&prediction(cfg)?)).map_err(io)?,
        Command::Moments => moments(cfg, out)?,
        Command::Feller => feller(cfg, out)?,
        Command::Ito => ito(cfg, out)?,
        Command::TimeChange => timechange(cfg, out)?,
        Command::Compare => compare(cfg, out)?,
    }
    if cfg.output.verbosity > 0 {
        writeln!(err, "{} finished in {:.3} s", cmd.name(), start.elapsed().as_secs_f64()).map_err(io)?;
    }
    Ok(())
}
