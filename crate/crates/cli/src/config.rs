//! Run configuration: flat `[section]` headers followed by `key = value`
//! lines. `#` starts a comment; `;` at the start of a line does too.
//!
//! ```text
//! [model]
//! kind = cir
//! kappa = 1
//! theta = sin:1,0.5,2*pi
//!
//! [experiment]
//! levels = 4:9
//! ref_level = 13
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use holder_euler::montecarlo::MIN_PATHS;
use holder_euler::sde::{Domain, ParamFn, PrototypeKind, PrototypeParams};
use thiserror::Error;

use crate::expr::{parse_constant, Formula};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Flag(&'static str),
    File,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Flag(name) => write!(f, "flag --{name}"),
            Location::File => f.write_str("config"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{location}: {field}: {message}")]
pub struct ConfigError {
    pub location: Location,
    pub field: String,
    pub message: String,
}

const SECTIONS: [&str; 9] = [
    "model",
    "model_hi",
    "experiment",
    "condition",
    "compare",
    "timechange",
    "feller",
    "ito",
    "output",
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    loc: Location,
}

/// Key/value pairs by section, before typing.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, (Location, BTreeMap<String, Entry>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut current: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let err = |field: &str, message: String| ConfigError {
                location: Location::Line(n),
                field: field.to_string(),
                message,
            };
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err("section", "unterminated section header".into()))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err("section", format!("unknown section [{name}]")));
                }
                if raw.sections.contains_key(name) {
                    return Err(err("section", format!("duplicate section [{name}]")));
                }
                raw.sections.insert(name.to_string(), (Location::Line(n), BTreeMap::new()));
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err("line", format!("expected `key = value`, got `{line}`")));
            };
            let key = key.trim();
            let Some(section) = &current else {
                return Err(err(key, "key outside of any section".into()));
            };
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(key, format!("invalid key `{key}`")));
            }
            let entries = &mut raw.sections.get_mut(section).unwrap().1;
            if entries.contains_key(key) {
                return Err(err(&format!("{section}.{key}"), "duplicate key".into()));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.trim().to_string(),
                    loc: Location::Line(n),
                },
            );
        }
        Ok(raw)
    }

    /// Command-line value for `section.key`, replacing any file value.
    pub fn set_flag(&mut self, section: &str, key: &str, value: &str, flag: &'static str) {
        let entries = &mut self
            .sections
            .entry(section.to_string())
            .or_insert_with(|| (Location::Flag(flag), BTreeMap::new()))
            .1;
        entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                loc: Location::Flag(flag),
            },
        );
    }

    fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    fn section(&mut self, name: &'static str) -> Section {
        let (loc, entries) = self.sections.remove(name).unwrap_or((Location::File, BTreeMap::new()));
        Section { name, loc, entries }
    }
}

/// One section being typed; keys are consumed as they are read.
struct Section {
    name: &'static str,
    loc: Location,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn field(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn error(&self, key: &str, loc: Location, message: impl Into<String>) -> ConfigError {
        ConfigError {
            location: loc,
            field: self.field(key),
            message: message.into(),
        }
    }

    fn get<T>(&mut self, key: &str, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<(T, Location)>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(e) => match parse(&e.value) {
                Ok(v) => Ok(Some((v, e.loc))),
                Err(msg) => Err(self.error(key, e.loc, msg)),
            },
        }
    }

    fn value<T>(&mut self, key: &str, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        Ok(self.get(key, parse)?.map(|v| v.0))
    }

    fn or<T>(&mut self, key: &str, default: T, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        Ok(self.value(key, parse)?.unwrap_or(default))
    }

    fn required<T>(&mut self, key: &str, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<(T, Location), ConfigError> {
        match self.get(key, parse)? {
            Some(v) => Ok(v),
            None => Err(self.error(key, self.loc.clone(), "missing required key")),
        }
    }

    /// Errors on the first key nobody read.
    fn finish(self) -> Result<(), ConfigError> {
        let first = self.entries.iter().min_by_key(|(_, e)| match e.loc {
            Location::Line(n) => n,
            _ => 0,
        });
        match first {
            Some((key, e)) => Err(self.error(key, e.loc.clone(), format!("unknown key in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v = parse_constant(s).map_err(|e| e.to_string())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not a finite number"))
    }
}

fn integer<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse::<T>().map_err(|_| format!("`{s}` is not a valid non-negative integer"))
}

fn boolean(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("`{s}` is not `true` or `false`")),
    }
}

/// Splits on commas outside parentheses.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts = split_top(s);
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated values, got {}", parts.len()));
    }
    parts.into_iter().map(number).collect()
}

pub fn parse_param_fn(s: &str) -> Result<ParamFn, String> {
    if let Some(rest) = s.strip_prefix("affine:") {
        let v = numbers(rest, 2)?;
        Ok(ParamFn::Affine { p: v[0], q: v[1] })
    } else if let Some(rest) = s.strip_prefix("sin:") {
        let v = numbers(rest, 3)?;
        Ok(ParamFn::Sinusoidal {
            p: v[0],
            q: v[1],
            omega: v[2],
        })
    } else {
        number(s).map(ParamFn::Constant)
    }
}

fn endpoint(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => number(s),
    }
}

fn domain(s: &str) -> Result<Domain, String> {
    let parts = split_top(s);
    if parts.len() != 2 {
        return Err("expected `left, right`".into());
    }
    Domain::new(endpoint(parts[0])?, endpoint(parts[1])?).map_err(|e| e.to_string())
}

fn level_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected `min:max`, got `{s}`"))?;
    let (a, b) = (integer(a.trim())?, integer(b.trim())?);
    if a > b {
        return Err(format!("empty level range {a}:{b}"));
    }
    Ok((a, b))
}

fn level_list(s: &str) -> Result<Vec<u32>, String> {
    let levels: Vec<u32> = s.split(',').map(|p| integer(p.trim())).collect::<Result<_, _>>()?;
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err("levels must be strictly increasing".into());
    }
    Ok(levels)
}

fn formula(s: &str) -> Result<Formula, String> {
    Formula::parse(s).map_err(|e| e.to_string())
}

fn fmt_domain(d: &Domain) -> String {
    let e = |v: f64| if v.is_infinite() { if v > 0.0 { "inf".to_string() } else { "-inf".to_string() } } else { v.to_string() };
    format!("{}, {}", e(d.left), e(d.right))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CustomModel {
    pub drift: Formula,
    pub sigma: Formula,
    pub gamma: f64,
    pub x0: f64,
    pub horizon: f64,
    pub domain: Option<Domain>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Prototype(PrototypeParams),
    Custom(CustomModel),
}

impl ModelSpec {
    pub fn gamma(&self) -> f64 {
        match self {
            ModelSpec::Prototype(p) => p.effective_gamma(),
            ModelSpec::Custom(c) => c.gamma,
        }
    }

    pub fn x0(&self) -> f64 {
        match self {
            ModelSpec::Prototype(p) => p.x0,
            ModelSpec::Custom(c) => c.x0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub levels: (u32, u32),
    pub ref_level: u32,
    pub paths: u64,
    pub seed: u64,
    pub allow_explosions: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSpec {
    pub q: Option<f64>,
    pub s: Option<f64>,
    pub epsilon: f64,
    pub cap: f64,
    pub growth_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareSpec {
    pub levels: Vec<u32>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeChangeSpec {
    pub level: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FellerSpec {
    pub origin: Option<f64>,
    pub max_shells: usize,
    pub divergence_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItoSpec {
    pub origin: Option<f64>,
    pub shells: usize,
    pub points_per_shell: usize,
    pub divergence_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub verbosity: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    /// Upper model of a comparison pair.
    pub model_hi: Option<ModelSpec>,
    pub experiment: ExperimentSpec,
    pub condition: ConditionSpec,
    pub compare: CompareSpec,
    pub timechange: TimeChangeSpec,
    pub feller: FellerSpec,
    pub ito: ItoSpec,
    pub output: OutputSpec,
}

/// Command-line values that replace config keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub paths: Option<String>,
    pub seed: Option<String>,
    pub levels: Option<String>,
    pub ref_level: Option<String>,
    pub out: Option<String>,
    pub allow_explosions: bool,
}

impl Overrides {
    fn apply(&self, raw: &mut RawConfig) {
        let pairs = [
            (&self.paths, "experiment", "paths", "paths"),
            (&self.seed, "experiment", "seed", "seed"),
            (&self.levels, "experiment", "levels", "levels"),
            (&self.ref_level, "experiment", "ref_level", "ref-level"),
            (&self.out, "output", "csv", "out"),
        ];
        for (value, section, key, flag) in pairs {
            if let Some(v) = value {
                raw.set_flag(section, key, v, flag);
            }
        }
        if self.allow_explosions {
            raw.set_flag("experiment", "allow_explosions", "true", "allow-explosions");
        }
    }
}

fn parse_model(sec: &mut Section) -> Result<ModelSpec, ConfigError> {
    let (kind, kind_loc) = sec
        .get("kind", |s| Ok(s.to_string()))?
        .unwrap_or_else(|| ("cir".to_string(), sec.loc.clone()));
    if kind == "custom" {
        let (drift, _) = sec.required("drift", formula)?;
        let (sigma, _) = sec.required("sigma", formula)?;
        let (gamma, gamma_loc) = sec.get("gamma", number)?.unwrap_or((0.5, sec.loc.clone()));
        if !(0.5..1.0).contains(&gamma) {
            return Err(sec.error("gamma", gamma_loc, format!("must lie in [1/2, 1), got {gamma}")));
        }
        let domain = sec.value("domain", domain)?;
        let (x0, x0_loc) = sec.get("x0", number)?.unwrap_or((0.0, sec.loc.clone()));
        if let Some(d) = domain {
            if !d.contains(x0) {
                return Err(sec.error("x0", x0_loc, format!("{x0} is outside the domain ({})", fmt_domain(&d))));
            }
        }
        let (horizon, h_loc) = sec.get("horizon", number)?.unwrap_or((1.0, sec.loc.clone()));
        if !(horizon > 0.0) {
            return Err(sec.error("horizon", h_loc, format!("must be positive, got {horizon}")));
        }
        return Ok(ModelSpec::Custom(CustomModel {
            drift,
            sigma,
            gamma,
            x0,
            horizon,
            domain,
        }));
    }
    let kind: PrototypeKind = kind
        .parse()
        .map_err(|_| sec.error("kind", kind_loc.clone(), format!("unknown kind `{kind}` (cir, ckls, wf, custom)")))?;
    let default_x0 = if kind == PrototypeKind::Wf { 0.5 } else { 1.0 };
    let mut params = PrototypeParams::constant(kind, 1.0, 1.0, 1.0, default_x0);
    params.kappa = sec.or("kappa", params.kappa, parse_param_fn)?;
    params.lambda = sec.or("lambda", params.lambda, parse_param_fn)?;
    params.theta = sec.or("theta", params.theta, parse_param_fn)?;
    params.x0 = sec.or("x0", params.x0, number)?;
    params.horizon = sec.or("horizon", params.horizon, number)?;
    if kind == PrototypeKind::Ckls {
        params.gamma = sec.or("gamma", params.gamma, number)?;
    }
    params.validate().map_err(|e| sec.error("kind", kind_loc, e.to_string()))?;
    Ok(ModelSpec::Prototype(params))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::load(text, &Overrides::default())
    }

    pub fn load(text: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::parse(text)?;
        overrides.apply(&mut raw);

        let mut sec = raw.section("model");
        let model = parse_model(&mut sec)?;
        sec.finish()?;

        let model_hi = if raw.has_section("model_hi") {
            let mut sec = raw.section("model_hi");
            let m = parse_model(&mut sec)?;
            sec.finish()?;
            Some(m)
        } else {
            None
        };

        let mut sec = raw.section("experiment");
        let (levels, _) = sec.get("levels", level_range)?.unwrap_or(((4, 9), Location::File));
        let ref_level = sec.or("ref_level", 13, integer)?;
        let (paths, paths_loc) = sec.get("paths", integer)?.unwrap_or((10_000, sec.loc.clone()));
        if paths < MIN_PATHS {
            return Err(sec.error("paths", paths_loc, format!("need at least {MIN_PATHS}, got {paths}")));
        }
        let experiment = ExperimentSpec {
            levels,
            ref_level,
            paths,
            seed: sec.or("seed", 42, integer)?,
            allow_explosions: sec.or("allow_explosions", false, boolean)?,
        };
        sec.finish()?;

        let mut sec = raw.section("condition");
        let q = sec.get("q", number)?;
        let s = sec.get("s", number)?;
        if let (Some(_), Some((_, loc))) = (&q, &s) {
            return Err(sec.error("s", loc.clone(), "give either q or s, not both"));
        }
        let condition = ConditionSpec {
            q: q.map(|v| v.0),
            s: s.map(|v| v.0),
            epsilon: sec.or("epsilon", 0.01, number)?,
            cap: sec.or("cap", 1e12, number)?,
            growth_factor: sec.or("growth_factor", 1.1, number)?,
        };
        sec.finish()?;

        let mut sec = raw.section("compare");
        let compare = CompareSpec {
            levels: sec.or("levels", vec![8, 10], level_list)?,
            tolerance: sec.or("tolerance", 0.0, number)?,
        };
        sec.finish()?;

        let mut sec = raw.section("timechange");
        let timechange = TimeChangeSpec {
            level: sec.or("level", 12, integer)?,
        };
        sec.finish()?;

        let mut sec = raw.section("feller");
        let feller = FellerSpec {
            origin: sec.value("origin", number)?,
            max_shells: sec.or("max_shells", 1100, integer)?,
            divergence_threshold: sec.or("divergence_threshold", 1e8, number)?,
        };
        sec.finish()?;

        let mut sec = raw.section("ito");
        let ito = ItoSpec {
            origin: sec.value("origin", number)?,
            shells: sec.or("shells", 60, integer)?,
            points_per_shell: sec.or("points_per_shell", 32, integer)?,
            divergence_threshold: sec.or("divergence_threshold", 1e6, number)?,
        };
        sec.finish()?;

        let mut sec = raw.section("output");
        let output = OutputSpec {
            csv: sec.value("csv", |s| Ok(PathBuf::from(s)))?,
            plot: sec.value("plot", |s| Ok(PathBuf::from(s)))?,
            verbosity: sec.or("verbosity", 0, integer)?,
        };
        sec.finish()?;

        Ok(RunConfig {
            model,
            model_hi,
            experiment,
            condition,
            compare,
            timechange,
            feller,
            ito,
            output,
        })
    }
}

fn write_model(f: &mut fmt::Formatter<'_>, section: &str, m: &ModelSpec) -> fmt::Result {
    writeln!(f, "[{section}]")?;
    match m {
        ModelSpec::Prototype(p) => {
            writeln!(f, "kind = {}", p.kind)?;
            writeln!(f, "kappa = {}", p.kappa)?;
            writeln!(f, "lambda = {}", p.lambda)?;
            writeln!(f, "theta = {}", p.theta)?;
            if p.kind == PrototypeKind::Ckls {
                writeln!(f, "gamma = {}", p.gamma)?;
            }
            writeln!(f, "x0 = {}", p.x0)?;
            writeln!(f, "horizon = {}", p.horizon)?;
        }
        ModelSpec::Custom(c) => {
            writeln!(f, "kind = custom")?;
            writeln!(f, "drift = {}", c.drift.source)?;
            writeln!(f, "sigma = {}", c.sigma.source)?;
            writeln!(f, "gamma = {}", c.gamma)?;
            if let Some(d) = &c.domain {
                writeln!(f, "domain = {}", fmt_domain(d))?;
            }
            writeln!(f, "x0 = {}", c.x0)?;
            writeln!(f, "horizon = {}", c.horizon)?;
        }
    }
    writeln!(f)
}

/// The resolved configuration in its own file format.
impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_model(f, "model", &self.model)?;
        if let Some(hi) = &self.model_hi {
            write_model(f, "model_hi", hi)?;
        }
        let e = &self.experiment;
        writeln!(f, "[experiment]")?;
        writeln!(f, "levels = {}:{}", e.levels.0, e.levels.1)?;
        writeln!(f, "ref_level = {}", e.ref_level)?;
        writeln!(f, "paths = {}", e.paths)?;
        writeln!(f, "seed = {}", e.seed)?;
        writeln!(f, "allow_explosions = {}", e.allow_explosions)?;
        writeln!(f)?;
        let c = &self.condition;
        writeln!(f, "[condition]")?;
        if let Some(q) = c.q {
            writeln!(f, "q = {q}")?;
        }
        if let Some(s) = c.s {
            writeln!(f, "s = {s}")?;
        }
        writeln!(f, "epsilon = {}", c.epsilon)?;
        writeln!(f, "cap = {}", c.cap)?;
        writeln!(f, "growth_factor = {}", c.growth_factor)?;
        writeln!(f)?;
        writeln!(f, "[compare]")?;
        let levels: Vec<String> = self.compare.levels.iter().map(u32::to_string).collect();
        writeln!(f, "levels = {}", levels.join(","))?;
        writeln!(f, "tolerance = {}", self.compare.tolerance)?;
        writeln!(f)?;
        writeln!(f, "[timechange]")?;
        writeln!(f, "level = {}", self.timechange.level)?;
        writeln!(f)?;
        writeln!(f, "[feller]")?;
        if let Some(o) = self.feller.origin {
            writeln!(f, "origin = {o}")?;
        }
        writeln!(f, "max_shells = {}", self.feller.max_shells)?;
        writeln!(f, "divergence_threshold = {}", self.feller.divergence_threshold)?;
        writeln!(f)?;
        writeln!(f, "[ito]")?;
        if let Some(o) = self.ito.origin {
            writeln!(f, "origin = {o}")?;
        }
        writeln!(f, "shells = {}", self.ito.shells)?;
        writeln!(f, "points_per_shell = {}", self.ito.points_per_shell)?;
        writeln!(f, "divergence_threshold = {}", self.ito.divergence_threshold)?;
        writeln!(f)?;
        writeln!(f, "[output]")?;
        if let Some(p) = &self.output.csv {
            writeln!(f, "csv = {}", p.display())?;
        }
        if let Some(p) = &self.output.plot {
            writeln!(f, "plot = {}", p.display())?;
        }
        writeln!(f, "verbosity = {}", self.output.verbosity)
    }
}
