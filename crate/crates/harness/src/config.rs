//! Experiment configuration.
//!
//! A config file is TOML: top-level keys are defaults shared by every
//! section, and each `[section]` is one experiment. A section may set
//! `vary = "<key>"` with `values = [...]` to expand into one run per value.
//! Command-line overrides are applied last and win over file values.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mgrit_modes::advection::AdvectionParams;
use mgrit_modes::elasticity::ElasticityParams;
use mgrit_modes::mgrit::{ErrorScope, DEFAULT_SEED};
use mgrit_modes::sama::{NormKind, SamaVariant, Scope};
use mgrit_modes::sweep;
use mgrit_modes::{Cycle, Hierarchy, HierarchyError, MethodSpec, Relaxation};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("no experiment named `{0}`")]
    UnknownSection(String),
}

impl ConfigError {
    /// The offending key, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } | ConfigError::UnknownKey(key) => Some(key),
            _ => None,
        }
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

const KEYS: &[&str] = &[
    "problem",
    "methods",
    "relax",
    "levels",
    "cycle",
    "m",
    "m2",
    "nx",
    "nt",
    "dx",
    "dt",
    "c",
    "rho",
    "mu",
    "nu",
    "htheta",
    "homega",
    "norm",
    "scope",
    "ra_scope",
    "kmax",
    "seed",
    "guess",
    "initial",
    "error_scope",
    "window",
    "emit_argmax_map",
    "allow_exact_elasticity",
    "vary",
    "values",
    "description",
];

/// Largest dense block (rows) for which elasticity runs Exact2 on the full
/// grid without an explicit override.
pub const EXACT_BLOCK_LIMIT: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Problem {
    Advection(AdvectionParams),
    Elasticity(ElasticityParams),
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Advection(_) => "advection",
            Problem::Elasticity(_) => "elasticity",
        }
    }

    /// Block size of the spatial symbol.
    pub fn block_size(&self) -> usize {
        match self {
            Problem::Advection(_) => 1,
            Problem::Elasticity(_) => 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MethodKind {
    Lfa,
    Sama,
    Ra,
    Measured,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Lfa => "lfa",
            MethodKind::Sama => "sama",
            MethodKind::Ra => "ra",
            MethodKind::Measured => "measured",
        }
    }

    pub fn is_analysis(self) -> bool {
        self != MethodKind::Measured
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuessKind {
    Random,
    Zero,
}

impl GuessKind {
    pub fn name(self) -> &'static str {
        match self {
            GuessKind::Random => "random",
            GuessKind::Zero => "zero",
        }
    }
}

/// One fully resolved and validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub problem: Problem,
    pub methods: Vec<MethodKind>,
    pub relax: Vec<Relaxation>,
    pub cycle: Cycle,
    pub m: usize,
    pub m2: usize,
    pub nx: usize,
    pub nt: usize,
    pub h_theta: f64,
    pub h_omega: f64,
    pub k_max: usize,
    pub norms: Vec<NormKind>,
    pub scopes: Vec<Scope>,
    pub ra_scopes: Vec<Scope>,
    pub seed: u64,
    pub guesses: Vec<GuessKind>,
    /// `(amplitude, wavenumber/π)` of `u0(x) = Σ a·cos(wπx)`.
    pub initial: Vec<(f64, f64)>,
    pub error_scope: ErrorScope,
    /// Inclusive averaging window over k.
    pub window: (usize, usize),
    pub emit_argmax_map: bool,
    pub allow_exact_elasticity: bool,
    /// `key=value` pairs identifying the run in CSV annotations.
    pub annotations: Vec<(String, String)>,
}

impl Experiment {
    pub fn hierarchy(&self) -> Hierarchy {
        Hierarchy::new(self.nt, self.m, self.m2).expect("validated")
    }

    pub fn method(&self, relax: Relaxation) -> MethodSpec {
        MethodSpec::new(relax, self.cycle)
    }

    pub fn levels(&self) -> usize {
        self.cycle.levels()
    }

    /// SAMA variants as scope × norm, with the elasticity Exact2 gate
    /// applied. The flag is set when a variant was replaced.
    pub fn sama_variants(&self) -> Vec<(SamaVariant, bool)> {
        let mut out = Vec::new();
        for &scope in &self.scopes {
            for &norm in &self.norms {
                let gated = norm == NormKind::Exact2
                    && scope == Scope::Full
                    && matches!(self.problem, Problem::Elasticity(_))
                    && !self.allow_exact_elasticity
                    && (self.nt + 1) * self.problem.block_size() > EXACT_BLOCK_LIMIT;
                let v = if gated {
                    SamaVariant::new(scope, NormKind::OneInfBound)
                } else {
                    SamaVariant::new(scope, norm)
                };
                if !out.iter().any(|(w, _)| *w == v) {
                    out.push((v, gated));
                }
            }
        }
        out
    }

    /// Per-index wavenumbers of the initial condition.
    pub fn initial_terms(&self) -> Vec<(f64, f64)> {
        let dx = match self.problem {
            Problem::Advection(p) => p.dx,
            Problem::Elasticity(p) => p.dx,
        };
        self.initial.iter().map(|&(a, w)| (a, w * PI * dx)).collect()
    }
}

/// A parsed config file: shared defaults and named sections, sorted by
/// name.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub path: Option<PathBuf>,
    pub defaults: Table,
    pub sections: Vec<(String, Table)>,
}

impl ConfigFile {
    pub fn parse(text: &str, label: &str) -> Result<Self, ConfigError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse {
            path: label.to_string(),
            message: e.message().to_string(),
        })?;
        let mut cfg = ConfigFile::default();
        for (key, value) in table {
            match value {
                Value::Table(t) => cfg.sections.push((key, t)),
                v => {
                    cfg.defaults.insert(key, v);
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        cfg.path = Some(path.to_path_buf());
        Ok(cfg)
    }

    pub fn section_names(&self) -> Vec<&str> {
        self.sections.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Resolves every run of the selected section (all sections when
    /// `only` is `None`; the defaults alone when the file has none).
    pub fn experiments(&self, only: Option<&str>, overrides: &Table) -> Result<Vec<Experiment>, ConfigError> {
        let mut selected: Vec<(&str, &Table)> = Vec::new();
        match only {
            Some(name) => {
                let (n, t) = self
                    .sections
                    .iter()
                    .find(|(n, _)| n == name)
                    .ok_or_else(|| ConfigError::UnknownSection(name.to_string()))?;
                selected.push((n, t));
            }
            None => selected.extend(self.sections.iter().map(|(n, t)| (n.as_str(), t))),
        }
        let empty = Table::new();
        if selected.is_empty() {
            selected.push(("default", &empty));
        }
        let mut out = Vec::new();
        for (name, section) in selected {
            let mut merged = self.defaults.clone();
            for (k, v) in section {
                merged.insert(k.clone(), v.clone());
            }
            for key in merged.keys() {
                if !KEYS.contains(&key.as_str()) {
                    return Err(ConfigError::UnknownKey(key.clone()));
                }
            }
            for (table, note) in expand(&merged)? {
                let mut table = table;
                for (k, v) in overrides {
                    table.insert(k.clone(), v.clone());
                }
                let mut annotations = vec![("experiment".to_string(), name.to_string())];
                annotations.extend(note);
                out.push(resolve(name, &table, annotations)?);
            }
        }
        Ok(out)
    }
}

type Expanded = Vec<(Table, Option<(String, String)>)>;

fn expand(t: &Table) -> Result<Expanded, ConfigError> {
    let Some(vary) = t.get("vary") else {
        if t.contains_key("values") {
            return Err(invalid("values", "given without `vary`"));
        }
        return Ok(vec![(t.clone(), None)]);
    };
    let key = vary
        .as_str()
        .ok_or_else(|| invalid("vary", "expected a key name"))?
        .to_string();
    if !KEYS.contains(&key.as_str()) || key == "vary" || key == "values" {
        return Err(invalid("vary", format!("unknown key `{key}`")));
    }
    let values = t
        .get("values")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("values", "expected an array"))?;
    if values.is_empty() {
        return Err(invalid("values", "empty"));
    }
    let mut out = Vec::new();
    for v in values {
        let mut run = t.clone();
        run.remove("vary");
        run.remove("values");
        run.insert(key.clone(), v.clone());
        out.push((run, Some((key.clone(), display_value(v)))));
    }
    Ok(out)
}

fn display_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Float(f) => format!("{f}"),
        other => other.to_string(),
    }
}

fn number(v: &Value, key: &str) -> Result<f64, ConfigError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(invalid(key, format!("expected a number, got {v}"))),
    }
}

fn get_f64(t: &Table, key: &str, default: f64) -> Result<f64, ConfigError> {
    t.get(key).map_or(Ok(default), |v| number(v, key))
}

fn get_positive(t: &Table, key: &str, default: f64) -> Result<f64, ConfigError> {
    let v = get_f64(t, key, default)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(key, format!("must be positive, got {v}")));
    }
    Ok(v)
}

fn get_usize(t: &Table, key: &str, default: usize) -> Result<usize, ConfigError> {
    match t.get(key) {
        None => Ok(default),
        Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
        Some(v) => Err(invalid(key, format!("expected a nonnegative integer, got {v}"))),
    }
}

fn get_bool(t: &Table, key: &str) -> Result<bool, ConfigError> {
    match t.get(key) {
        None => Ok(false),
        Some(Value::Boolean(b)) => Ok(*b),
        Some(v) => Err(invalid(key, format!("expected true or false, got {v}"))),
    }
}

/// Strings of a key that is either one string or an array of them.
fn get_strings(t: &Table, key: &str, default: &[&str]) -> Result<Vec<String>, ConfigError> {
    match t.get(key) {
        None => Ok(default.iter().map(|s| s.to_string()).collect()),
        Some(Value::String(s)) => Ok(s.split(',').map(|x| x.trim().to_string()).collect()),
        Some(Value::Array(a)) => a
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| invalid(key, format!("expected strings, got {v}")))
            })
            .collect(),
        Some(v) => Err(invalid(
            key,
            format!("expected a string or an array of strings, got {v}"),
        )),
    }
}

fn choose<T: Copy>(key: &str, names: Vec<String>, table: &[(&str, T)]) -> Result<Vec<T>, ConfigError> {
    let mut out = Vec::new();
    for name in names {
        let lower = name.to_ascii_lowercase();
        let Some((_, v)) = table.iter().find(|(n, _)| *n == lower) else {
            let allowed: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
            return Err(invalid(key, format!("`{name}` is not one of {}", allowed.join(", "))));
        };
        out.push(*v);
    }
    if out.is_empty() {
        return Err(invalid(key, "empty list"));
    }
    Ok(out)
}

fn choose_one<T: Copy>(t: &Table, key: &str, default: &str, table: &[(&str, T)]) -> Result<T, ConfigError> {
    let names = get_strings(t, key, &[default])?;
    if names.len() != 1 {
        return Err(invalid(key, "expected a single value"));
    }
    Ok(choose(key, names, table)?[0])
}

/// Parses an angle given as a number or as `pi`, `pi/N`, `Kpi/N`, `K*pi/N`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (coef, rest) = s.split_once("pi")?;
    let coef = coef.trim_end_matches('*');
    let coef = if coef.is_empty() {
        1.0
    } else {
        coef.parse::<f64>().ok()?
    };
    let div = if rest.is_empty() {
        1.0
    } else {
        rest.strip_prefix('/')?.parse::<f64>().ok()?
    };
    Some(coef * PI / div)
}

fn get_angle(t: &Table, key: &str, default: f64) -> Result<f64, ConfigError> {
    let v = match t.get(key) {
        None => default,
        Some(Value::String(s)) => parse_angle(s).ok_or_else(|| invalid(key, format!("cannot parse angle `{s}`")))?,
        Some(v) => number(v, key)?,
    };
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(key, format!("must be positive, got {v}")));
    }
    Ok(v)
}

fn resolve(name: &str, t: &Table, annotations: Vec<(String, String)>) -> Result<Experiment, ConfigError> {
    let problem_name = choose_one(t, "problem", "advection", &[("advection", 0), ("elasticity", 1)])?;
    let nx = get_usize(t, "nx", 64)?;
    if nx < 2 {
        return Err(invalid("nx", "at least 2 points are required"));
    }
    let dx = get_positive(t, "dx", 0.5)?;
    let dt = get_positive(t, "dt", 0.1)?;
    let problem = if problem_name == 0 {
        let c = get_positive(t, "c", 1.0)?;
        Problem::Advection(AdvectionParams::new(c, dx, dt, nx).map_err(|e| invalid("c", e.to_string()))?)
    } else {
        let mu = get_positive(t, "mu", 1.0)?;
        // ν = (Δt/Δx²)(μ/ρ) determines ρ when given.
        let rho = if t.contains_key("nu") {
            if t.contains_key("rho") {
                return Err(invalid("nu", "give either `nu` or `rho`, not both"));
            }
            dt / (dx * dx) * mu / get_positive(t, "nu", 1.0)?
        } else {
            get_positive(t, "rho", 1.0)?
        };
        Problem::Elasticity(ElasticityParams::new(rho, mu, dx, dt).map_err(|e| invalid("rho", e.to_string()))?)
    };

    let methods = choose(
        "methods",
        get_strings(t, "methods", &["sama"])?,
        &[
            ("lfa", MethodKind::Lfa),
            ("sama", MethodKind::Sama),
            ("ra", MethodKind::Ra),
            ("measured", MethodKind::Measured),
        ],
    )?;
    let relax = choose(
        "relax",
        get_strings(t, "relax", &["f", "fcf"])?,
        &[("f", Relaxation::F), ("fcf", Relaxation::FCF)],
    )?;
    let levels = get_usize(t, "levels", 2)?;
    let cycle = match levels {
        2 => Cycle::TwoLevel,
        3 => choose_one(t, "cycle", "v", &[("v", Cycle::ThreeLevelV), ("f", Cycle::ThreeLevelF)])?,
        other => return Err(invalid("levels", format!("must be 2 or 3, got {other}"))),
    };
    let m = get_usize(t, "m", 2)?;
    let m2 = if levels == 3 { get_usize(t, "m2", 2)? } else { 1 };
    let nt = get_usize(t, "nt", 64)?;
    if levels == 3 && m2 < 2 {
        return Err(invalid("m2", "three levels need m2 >= 2"));
    }
    Hierarchy::new(nt, m, m2).map_err(|e| match e {
        HierarchyError::InvalidM(_) => invalid("m", e.to_string()),
        HierarchyError::InvalidM2(_) | HierarchyError::ThreeLevelNeedsM2 { .. } => invalid("m2", e.to_string()),
        _ => invalid("nt", e.to_string()),
    })?;

    let h_theta = get_angle(t, "htheta", 2.0 * PI / nx as f64)?;
    sweep::theta_grid(h_theta).map_err(|e| invalid("htheta", e.to_string()))?;
    let h_omega = get_angle(t, "homega", h_theta)?;
    let factor = if levels == 3 { m * m2 } else { m };
    if methods.contains(&MethodKind::Lfa) {
        sweep::omega_grid(h_omega, factor).map_err(|e| invalid("homega", e.to_string()))?;
    }

    let k_max = get_usize(t, "kmax", 10)?;
    if k_max == 0 {
        return Err(invalid("kmax", "must be at least 1"));
    }
    let norms = choose(
        "norm",
        get_strings(t, "norm", &["exact2"])?,
        &[("exact2", NormKind::Exact2), ("oneinf", NormKind::OneInfBound)],
    )?;
    let scopes = choose(
        "scope",
        get_strings(t, "scope", &["full"])?,
        &[("full", Scope::Full), ("cpoints", Scope::CPoints)],
    )?;
    let ra_scopes = choose(
        "ra_scope",
        get_strings(t, "ra_scope", &["cpoints"])?,
        &[("full", Scope::Full), ("cpoints", Scope::CPoints)],
    )?;
    let seed = match t.get("seed") {
        None => DEFAULT_SEED,
        Some(Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(v) => return Err(invalid("seed", format!("expected a nonnegative integer, got {v}"))),
    };
    let guesses = choose(
        "guess",
        get_strings(t, "guess", &["random"])?,
        &[("random", GuessKind::Random), ("zero", GuessKind::Zero)],
    )?;
    let initial = match t.get("initial") {
        None => vec![(2.0, 1.0 / 16.0)],
        Some(Value::Array(a)) => a
            .iter()
            .map(|pair| match pair.as_array().map(Vec::as_slice) {
                Some([a, w]) => Ok((number(a, "initial")?, number(w, "initial")?)),
                _ => Err(invalid("initial", "expected [amplitude, wavenumber/pi] pairs")),
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(v) => return Err(invalid("initial", format!("expected an array, got {v}"))),
    };
    let error_scope = choose_one(
        t,
        "error_scope",
        "all",
        &[("all", ErrorScope::AllPoints), ("cpoints", ErrorScope::CPoints)],
    )?;
    let window = match t.get("window") {
        None => (1, k_max),
        Some(Value::Array(a)) => match a.as_slice() {
            [Value::Integer(lo), Value::Integer(hi)] if *lo >= 1 && lo <= hi => (*lo as usize, *hi as usize),
            _ => return Err(invalid("window", "expected [k_lo, k_hi] with 1 <= k_lo <= k_hi")),
        },
        Some(v) => return Err(invalid("window", format!("expected [k_lo, k_hi], got {v}"))),
    };
    if window.1 > k_max {
        return Err(invalid("window", format!("k_hi = {} exceeds kmax = {k_max}", window.1)));
    }

    if methods.contains(&MethodKind::Ra) && levels == 3 {
        return Err(invalid("methods", "reduction analysis covers two-level methods only"));
    }
    if methods.contains(&MethodKind::Measured) {
        if !matches!(problem, Problem::Advection(_)) {
            return Err(invalid("methods", "measured runs are available for advection only"));
        }
        for &(_, w) in &initial {
            let cycles = w * dx * nx as f64 / 2.0;
            if (cycles - cycles.round()).abs() > 1e-9 {
                return Err(invalid(
                    "initial",
                    format!("wavenumber {w}pi is not periodic on {nx} points"),
                ));
            }
        }
    }

    Ok(Experiment {
        name: name.to_string(),
        problem,
        methods,
        relax,
        cycle,
        m,
        m2,
        nx,
        nt,
        h_theta,
        h_omega,
        k_max,
        norms,
        scopes,
        ra_scopes,
        seed,
        guesses,
        initial,
        error_scope,
        window,
        emit_argmax_map: get_bool(t, "emit_argmax_map")?,
        allow_exact_elasticity: get_bool(t, "allow_exact_elasticity")?,
        annotations,
    })
}

/// Renders a resolved experiment as a one-line summary.
pub fn describe(e: &Experiment) -> String {
    let mut s = String::new();
    let methods: Vec<&str> = e.methods.iter().map(|m| m.name()).collect();
    let _ = write!(
        s,
        "{} {} levels={} m={} nt={} nx={} kmax={} methods={}",
        e.name,
        e.problem.name(),
        e.levels(),
        e.m,
        e.nt,
        e.nx,
        e.k_max,
        methods.join("+")
    );
    for (k, v) in e.annotations.iter().skip(1) {
        let _ = write!(s, " {k}={v}");
    }
    s
}
