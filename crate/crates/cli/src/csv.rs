//! CSV writers and their parsers. Floats are written with 17 significant
//! digits, so parsing a written file recovers the report bit for bit.

use std::fmt::Write;

use holder_euler::criteria::{Provenance, RatePrediction, Side};
use holder_euler::montecarlo::{
    ComparisonReport, ConvergenceReport, LevelError, MomentEstimate, OrderFit, RefinementPoint, TimeChangeReport,
};
use holder_euler::montecarlo::timechange::SampleMoments;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("csv line {line}: {msg}")]
pub struct CsvError {
    pub line: usize,
    pub msg: String,
}

pub const CONVERGE_HEADER: &str = "level,N,dt,l1_error,stderr,argmax_k";
pub const MOMENTS_HEADER: &str = "q,estimate,stderr,ref_level,cap_hits,divergence_flag";
pub const PLOT_HEADER: &str = "log2N,log2err";
pub const COMPARE_HEADER: &str = "level,paths,tolerance,violations,violation_fraction,worst_violation";
pub const TIMECHANGE_HEADER: &str = "sample,level,paths,horizon_image,mean,mean_stderr,variance,variance_stderr";

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), fmt_f64)
}

fn fmt_list(levels: &[u32]) -> String {
    levels.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

fn side_str(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

/// Line cursor over a CSV text.
struct Lines<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            lines: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CsvError> {
        Err(CsvError {
            line: self.last,
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Option<&'a str> {
        let (i, l) = self.lines.next()?;
        self.last = i + 1;
        Some(l)
    }

    fn peek_is_comment(&mut self) -> bool {
        self.lines.peek().is_some_and(|(_, l)| l.starts_with('#'))
    }

    fn header(&mut self, expected: &str) -> Result<(), CsvError> {
        match self.next() {
            Some(h) if h == expected => Ok(()),
            Some(h) => self.err(format!("expected header `{expected}`, got `{h}`")),
            None => self.err("empty input"),
        }
    }

    fn row(&mut self, cols: usize) -> Result<Option<Vec<&'a str>>, CsvError> {
        if self.peek_is_comment() {
            return Ok(None);
        }
        let Some(l) = self.next() else { return Ok(None) };
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != cols {
            return self.err(format!("expected {cols} fields, got {}", fields.len()));
        }
        Ok(Some(fields))
    }

    /// A `# k1=v1 k2=v2 ...` line with exactly the given keys, in order.
    fn footer(&mut self, keys: &[&str]) -> Result<Vec<&'a str>, CsvError> {
        let Some(l) = self.next() else {
            return self.err(format!("missing footer `{}`", keys[0]));
        };
        let Some(body) = l.strip_prefix("# ") else {
            return self.err("expected a `# ` footer line");
        };
        let parts: Vec<&str> = body.split(' ').collect();
        if parts.len() != keys.len() {
            return self.err(format!("expected {} footer fields, got {}", keys.len(), parts.len()));
        }
        let mut out = Vec::with_capacity(keys.len());
        for (p, k) in parts.iter().zip(keys) {
            match p.split_once('=') {
                Some((key, v)) if key == *k => out.push(v),
                _ => return self.err(format!("expected `{k}=...`, got `{p}`")),
            }
        }
        Ok(out)
    }

    fn end(&mut self) -> Result<(), CsvError> {
        match self.next() {
            None => Ok(()),
            Some(l) => self.err(format!("unexpected trailing line `{l}`")),
        }
    }

    fn f64(&self, s: &str) -> Result<f64, CsvError> {
        s.parse().or_else(|_| self.err(format!("bad number `{s}`")))
    }

    fn opt_f64(&self, s: &str) -> Result<Option<f64>, CsvError> {
        if s == "none" {
            Ok(None)
        } else {
            self.f64(s).map(Some)
        }
    }

    fn int<T: std::str::FromStr>(&self, s: &str) -> Result<T, CsvError> {
        s.parse().or_else(|_| self.err(format!("bad integer `{s}`")))
    }

    fn bool(&self, s: &str) -> Result<bool, CsvError> {
        match s {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => self.err(format!("bad flag `{s}`")),
        }
    }

    fn list(&self, s: &str) -> Result<Vec<u32>, CsvError> {
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(';').map(|v| self.int(v)).collect()
    }

    fn side(&self, s: &str) -> Result<Side, CsvError> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            _ => self.err(format!("bad side `{s}`")),
        }
    }
}

pub fn write_converge(r: &ConvergenceReport) -> String {
    let mut s = String::new();
    writeln!(s, "{CONVERGE_HEADER}").unwrap();
    for l in &r.levels {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            l.level,
            l.steps,
            fmt_f64(l.dt),
            fmt_f64(l.l1_error),
            fmt_f64(l.stderr),
            l.argmax_k
        )
        .unwrap();
    }
    let fit = r.fit.as_ref();
    let p = r.prediction.as_ref();
    writeln!(
        s,
        "# lambda_hat={} stderr={} r2={} predicted_lambda={} provenance={}",
        fmt_opt(fit.map(|f| f.lambda_hat)),
        fmt_opt(fit.map(|f| f.slope_stderr)),
        fmt_opt(fit.map(|f| f.r2)),
        fmt_opt(p.map(|p| p.lambda_sup)),
        p.map_or("none", |p| p.provenance.as_str()),
    )
    .unwrap();
    writeln!(s, "# excluded_levels={}", fmt_list(&r.excluded_levels)).unwrap();
    writeln!(
        s,
        "# intercept={} used_levels={} paths={} exploded_paths={} ref_level={}",
        fmt_opt(fit.map(|f| f.intercept)),
        fmt_list(fit.map_or(&[][..], |f| &f.used_levels)),
        r.paths,
        r.exploded_paths,
        r.ref_level
    )
    .unwrap();
    writeln!(
        s,
        "# mu0={} mu1={} s={}",
        fmt_opt(p.and_then(|p| p.mu0)),
        fmt_opt(p.and_then(|p| p.mu1)),
        fmt_opt(p.map(|p| p.s))
    )
    .unwrap();
    s
}

pub fn parse_converge(text: &str) -> Result<ConvergenceReport, CsvError> {
    let mut c = Lines::new(text);
    c.header(CONVERGE_HEADER)?;
    let mut levels = Vec::new();
    while let Some(f) = c.row(6)? {
        levels.push(LevelError {
            level: c.int(f[0])?,
            steps: c.int(f[1])?,
            dt: c.f64(f[2])?,
            l1_error: c.f64(f[3])?,
            stderr: c.f64(f[4])?,
            argmax_k: c.int(f[5])?,
        });
    }
    let head = c.footer(&["lambda_hat", "stderr", "r2", "predicted_lambda", "provenance"])?;
    let (lambda_hat, slope_stderr, r2) = (c.opt_f64(head[0])?, c.opt_f64(head[1])?, c.opt_f64(head[2])?);
    let lambda_sup = c.opt_f64(head[3])?;
    let provenance = match head[4] {
        "none" => None,
        p => Some(Provenance::parse(p).map_or_else(|| c.err(format!("unknown provenance `{p}`")), Ok)?),
    };
    let excluded = c.footer(&["excluded_levels"])?;
    let excluded_levels = c.list(excluded[0])?;
    let run = c.footer(&["intercept", "used_levels", "paths", "exploded_paths", "ref_level"])?;
    let intercept = c.opt_f64(run[0])?;
    let used_levels = c.list(run[1])?;
    let (paths, exploded_paths, ref_level) = (c.int(run[2])?, c.int(run[3])?, c.int(run[4])?);
    let mus = c.footer(&["mu0", "mu1", "s"])?;
    let (mu0, mu1, s) = (c.opt_f64(mus[0])?, c.opt_f64(mus[1])?, c.opt_f64(mus[2])?);
    c.end()?;

    let fit = match (lambda_hat, slope_stderr, r2, intercept) {
        (Some(lambda_hat), Some(slope_stderr), Some(r2), Some(intercept)) => Some(OrderFit {
            lambda_hat,
            intercept,
            r2,
            slope_stderr,
            used_levels,
        }),
        (None, None, None, None) if used_levels.is_empty() => None,
        _ => return c.err("fit fields must be all present or all `none`"),
    };
    let prediction = match (lambda_sup, provenance, s) {
        (Some(lambda_sup), Some(provenance), Some(s)) => Some(RatePrediction {
            mu0,
            mu1,
            s,
            lambda_sup,
            provenance,
        }),
        (None, None, None) if mu0.is_none() && mu1.is_none() => None,
        _ => return c.err("prediction fields must be all present or all `none`"),
    };
    Ok(ConvergenceReport {
        levels,
        fit,
        excluded_levels,
        paths,
        exploded_paths,
        ref_level,
        prediction,
    })
}

/// `log2N,log2err` rows for a log-log plot.
pub fn write_plot(r: &ConvergenceReport) -> String {
    let mut s = format!("{PLOT_HEADER}\n");
    for l in &r.levels {
        writeln!(s, "{},{}", l.level, fmt_f64(l.l1_error.log2())).unwrap();
    }
    s
}

pub fn parse_plot(text: &str) -> Result<Vec<(u32, f64)>, CsvError> {
    let mut c = Lines::new(text);
    c.header(PLOT_HEADER)?;
    let mut out = Vec::new();
    while let Some(f) = c.row(2)? {
        out.push((c.int(f[0])?, c.f64(f[1])?));
    }
    c.end()?;
    Ok(out)
}

pub fn write_moments(m: &MomentEstimate) -> String {
    let mut s = format!("{MOMENTS_HEADER}\n");
    for p in &m.refinement {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_f64(m.q),
            fmt_f64(p.estimate),
            fmt_f64(p.stderr),
            p.ref_level,
            p.cap_hits,
            m.divergence_flag
        )
        .unwrap();
    }
    s
}

pub fn parse_moments(text: &str) -> Result<MomentEstimate, CsvError> {
    let mut c = Lines::new(text);
    c.header(MOMENTS_HEADER)?;
    let mut shared: Option<(f64, bool)> = None;
    let mut refinement = Vec::new();
    while let Some(f) = c.row(6)? {
        let (q, flag) = (c.f64(f[0])?, c.bool(f[5])?);
        if let Some((q0, flag0)) = shared {
            if q0.to_bits() != q.to_bits() || flag0 != flag {
                return c.err("q and divergence_flag must agree across rows");
            }
        }
        shared = Some((q, flag));
        refinement.push(RefinementPoint {
            ref_level: c.int(f[3])?,
            estimate: c.f64(f[1])?,
            stderr: c.f64(f[2])?,
            cap_hits: c.int(f[4])?,
        });
    }
    c.end()?;
    let Some((q, divergence_flag)) = shared else {
        return c.err("no rows");
    };
    Ok(MomentEstimate {
        q,
        refinement,
        divergence_flag,
    })
}

pub fn write_compare(reports: &[ComparisonReport]) -> String {
    let mut s = format!("{COMPARE_HEADER}\n");
    for r in reports {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.level,
            r.paths,
            fmt_f64(r.tolerance),
            r.violations,
            fmt_f64(r.violation_fraction),
            fmt_f64(r.worst_violation)
        )
        .unwrap();
    }
    s
}

pub fn parse_compare(text: &str) -> Result<Vec<ComparisonReport>, CsvError> {
    let mut c = Lines::new(text);
    c.header(COMPARE_HEADER)?;
    let mut out = Vec::new();
    while let Some(f) = c.row(6)? {
        out.push(ComparisonReport {
            level: c.int(f[0])?,
            paths: c.int(f[1])?,
            tolerance: c.f64(f[2])?,
            violations: c.int(f[3])?,
            violation_fraction: c.f64(f[4])?,
            worst_violation: c.f64(f[5])?,
        });
    }
    c.end()?;
    Ok(out)
}

pub fn write_timechange(r: &TimeChangeReport) -> String {
    let mut s = format!("{TIMECHANGE_HEADER}\n");
    for (name, m) in [("original", &r.original), ("changed", &r.changed)] {
        writeln!(
            s,
            "{name},{},{},{},{},{},{},{}",
            r.level,
            r.paths,
            fmt_f64(r.horizon_image),
            fmt_f64(m.mean),
            fmt_f64(m.mean_stderr),
            fmt_f64(m.variance),
            fmt_f64(m.variance_stderr)
        )
        .unwrap();
    }
    writeln!(
        s,
        "# z_mean={} z_variance={} z_critical={} pass={}",
        fmt_f64(r.z_mean),
        fmt_f64(r.z_variance),
        fmt_f64(r.z_critical),
        r.pass
    )
    .unwrap();
    s
}

pub fn parse_timechange(text: &str) -> Result<TimeChangeReport, CsvError> {
    let mut c = Lines::new(text);
    c.header(TIMECHANGE_HEADER)?;
    let mut samples = Vec::new();
    for name in ["original", "changed"] {
        let Some(f) = c.row(8)? else {
            return c.err(format!("missing `{name}` row"));
        };
        if f[0] != name {
            return c.err(format!("expected `{name}` row, got `{}`", f[0]));
        }
        let head: (u32, u64, f64) = (c.int(f[1])?, c.int(f[2])?, c.f64(f[3])?);
        let m = SampleMoments {
            mean: c.f64(f[4])?,
            mean_stderr: c.f64(f[5])?,
            variance: c.f64(f[6])?,
            variance_stderr: c.f64(f[7])?,
        };
        samples.push((head, m));
    }
    let z = c.footer(&["z_mean", "z_variance", "z_critical", "pass"])?;
    let (z_mean, z_variance, z_critical, pass) = (c.f64(z[0])?, c.f64(z[1])?, c.f64(z[2])?, c.bool(z[3])?);
    c.end()?;
    let changed = samples.pop().unwrap();
    let original = samples.pop().unwrap();
    if original.0 .0 != changed.0 .0 || original.0 .1 != changed.0 .1 || original.0 .2.to_bits() != changed.0 .2.to_bits() {
        return c.err("level, paths and horizon_image must agree across rows");
    }
    let (level, paths, horizon_image) = original.0;
    Ok(TimeChangeReport {
        level,
        paths,
        horizon_image,
        original: original.1,
        changed: changed.1,
        z_mean,
        z_variance,
        z_critical,
        pass,
    })
}

/// Diagnostic sequence `side,<a>,<b>` (Feller `y,v`; Itô `x,min_g`).
pub fn write_sequence(columns: [&str; 2], rows: &[(Side, f64, f64)]) -> String {
    let mut s = format!("side,{},{}\n", columns[0], columns[1]);
    for (side, a, b) in rows {
        writeln!(s, "{},{},{}", side_str(*side), fmt_f64(*a), fmt_f64(*b)).unwrap();
    }
    s
}

pub fn parse_sequence(columns: [&str; 2], text: &str) -> Result<Vec<(Side, f64, f64)>, CsvError> {
    let mut c = Lines::new(text);
    c.header(&format!("side,{},{}", columns[0], columns[1]))?;
    let mut out = Vec::new();
    while let Some(f) = c.row(3)? {
        out.push((c.side(f[0])?, c.f64(f[1])?, c.f64(f[2])?));
    }
    c.end()?;
    Ok(out)
}
