//! Run configuration: an INI-style text format parsed by hand.
//!
//! ```text
//! seed = 7
//!
//! [physics]
//! alpha = 2
//! nu = 1
//! gamma = 0
//!
//! [grid]
//! n = 1024
//! half_length = 16
//!
//! [initial]
//! kind = semicircle
//! ```
//!
//! Keys before the first section header belong to the root. Unknown sections
//! and unknown keys are rejected so typos do not silently fall back to
//! defaults.

use std::cell::Cell;
use std::fmt;
use std::path::{Path, PathBuf};

use fracflux::evolve::{DysonSubstep, Scheme};
use fracflux::{initial, mollify, Grid, PhysicsParams, Profile, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}, field `{}`: {}", self.field, self.message),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    used: Cell<bool>,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

/// Parsed but untyped configuration text.
#[derive(Debug)]
pub struct Ini {
    sections: Vec<Section>,
}

const SECTIONS: &[&str] = &[
    "", "physics", "solver", "grid", "initial", "output", "exact", "decay", "mild", "particles", "compare",
];

impl Ini {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections = vec![Section {
            name: String::new(),
            line: 0,
            entries: Vec::new(),
        }];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(Some(line), content, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) || name.is_empty() {
                    return Err(err(Some(line), format!("[{name}]"), "unknown section"));
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(err(Some(line), format!("[{name}]"), "section appears twice"));
                }
                sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(Some(line), content, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(err(Some(line), content, "empty key"));
            }
            let section = sections.last_mut().expect("root section");
            if section.entries.iter().any(|e| e.key == key) {
                return Err(err(Some(line), qualified(&section.name, key), "key appears twice"));
            }
            section.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line,
                used: Cell::new(false),
            });
        }
        Ok(Self { sections })
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.iter().any(|s| s.name == name)
    }

    fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn fields<'a>(&'a self, name: &'a str) -> Fields<'a> {
        Fields {
            name,
            section: self.section(name),
        }
    }

    /// Every `section.key=value` in file order, for the metadata sidecar.
    pub fn flatten(&self) -> Vec<(String, String)> {
        self.sections
            .iter()
            .flat_map(|s| s.entries.iter().map(|e| (qualified(&s.name, &e.key), e.value.clone())))
            .collect()
    }

    /// Fails on the first key no accessor asked for.
    pub fn reject_unused(&self) -> Result<(), ConfigError> {
        for s in &self.sections {
            if let Some(e) = s.entries.iter().find(|e| !e.used.get()) {
                return Err(err(Some(e.line), qualified(&s.name, &e.key), "unknown key"));
            }
        }
        Ok(())
    }
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

/// Typed access to one section. A missing section behaves as empty.
pub struct Fields<'a> {
    name: &'a str,
    section: Option<&'a Section>,
}

impl<'a> Fields<'a> {
    fn entry(&self, key: &str) -> Option<&'a Entry> {
        let e = self.section?.entries.iter().find(|e| e.key == key)?;
        e.used.set(true);
        Some(e)
    }

    fn field(&self, key: &str) -> String {
        qualified(self.name, key)
    }

    fn line(&self) -> Option<usize> {
        self.section.map(|s| s.line).filter(|l| *l > 0)
    }

    pub fn missing(&self, key: &str) -> ConfigError {
        err(self.line(), self.field(key), "required key is missing")
    }

    pub fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let line = self
            .section
            .and_then(|s| s.entries.iter().find(|e| e.key == key))
            .map(|e| e.line)
            .or(self.line());
        err(line, self.field(key), message)
    }

    fn parsed<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>, ConfigError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .ok_or_else(|| err(Some(e.line), self.field(key), format!("expected {what}, got `{}`", e.value))),
        }
    }

    pub fn str(&self, key: &str) -> Option<&'a str> {
        self.entry(key).map(|e| e.value.as_str())
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parsed(key, "a number", parse_f64)
    }

    pub fn req_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.parsed(key, "a nonnegative integer", |s| s.parse().ok())
    }

    pub fn req_usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.usize(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.parsed(key, "an unsigned integer", |s| s.parse().ok())
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.parsed(key, "true or false", |s| match s {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.parsed(key, "a comma-separated list of numbers", |s| {
            s.split(',').map(|x| parse_f64(x.trim())).collect()
        })
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    (!v.is_nan()).then_some(v)
}

/// Initial data menu.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Semicircle,
    Gaussian { sigma: f64 },
    Cauchy { eps: f64 },
    /// Semicircle mollified at width `h`, blended with a wide Gaussian of
    /// weight `floor`.
    SmoothedSemicircle { h: f64, floor: f64 },
    CriticalPower { amplitude: f64 },
    Shifted { base: Box<InitialData>, offset: f64 },
    /// One value per line (`#` comments allowed), exactly `n` of them.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub data: InitialData,
    pub mass: f64,
    /// Optional mollification applied after construction.
    pub mollify: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub dir: Option<PathBuf>,
    pub trajectory: bool,
    pub energy: bool,
    pub analyticity: bool,
    pub weak_residual: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOptions {
    pub times: Vec<f64>,
    /// `None` takes `μ = max(0, −min ρ₀)`.
    pub mu: Option<f64>,
    /// Half width of the window for the steady-state comparison.
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayOptions {
    /// `(q, θ)` pairs.
    pub norms: Vec<(f64, u32)>,
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MildOptions {
    pub t_final: f64,
    pub mesh: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub require_small: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepperKind {
    Euler,
    Implicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleOptions {
    pub positions: Option<Vec<f64>>,
    pub count: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub noise: bool,
    pub dt: f64,
    pub t_end: f64,
    pub stepper: StepperKind,
    pub neighbours: usize,
    pub ensembles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Splitting,
    Exact,
    Mild,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Splitting => "splitting",
            Method::Exact => "exact",
            Method::Mild => "mild",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub methods: (Method, Method),
    pub times: Vec<f64>,
}

/// A validated configuration. Sections a command does not need may be absent;
/// each command asks for what it uses through the `require_*` accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub physics: Option<PhysicsParams>,
    pub solver: Option<SolverConfig>,
    pub grid: Option<Grid>,
    pub initial: Option<InitialSpec>,
    pub output: OutputOptions,
    pub exact: Option<ExactOptions>,
    pub decay: Option<DecayOptions>,
    pub mild: Option<MildOptions>,
    pub particles: Option<ParticleOptions>,
    pub compare: Option<CompareOptions>,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_ini(ini: &Ini, base_dir: &Path) -> Result<Self, ConfigError> {
        let root = ini.fields("");
        let seed = root.u64("seed")?.unwrap_or(0);
        let physics = ini.has_section("physics").then(|| parse_physics(ini)).transpose()?;
        let solver = ini.has_section("solver").then(|| parse_solver(ini)).transpose()?;
        let grid = ini.has_section("grid").then(|| parse_grid(ini)).transpose()?;
        let initial = ini
            .has_section("initial")
            .then(|| parse_initial(ini, base_dir))
            .transpose()?;
        let output = parse_output(ini)?;
        let exact = ini.has_section("exact").then(|| parse_exact(ini)).transpose()?;
        let decay = ini.has_section("decay").then(|| parse_decay(ini)).transpose()?;
        let mild = ini.has_section("mild").then(|| parse_mild(ini)).transpose()?;
        let particles = ini.has_section("particles").then(|| parse_particles(ini)).transpose()?;
        let compare = ini.has_section("compare").then(|| parse_compare(ini)).transpose()?;
        ini.reject_unused()?;
        Ok(Self {
            seed,
            physics,
            solver,
            grid,
            initial,
            output,
            exact,
            decay,
            mild,
            particles,
            compare,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn require_physics(&self) -> Result<PhysicsParams, ConfigError> {
        self.physics.ok_or_else(|| err(None, "[physics]", "section is required for this command"))
    }

    pub fn require_solver(&self) -> Result<&SolverConfig, ConfigError> {
        self.solver.as_ref().ok_or_else(|| err(None, "[solver]", "section is required for this command"))
    }

    pub fn require_grid(&self) -> Result<Grid, ConfigError> {
        self.grid.ok_or_else(|| err(None, "[grid]", "section is required for this command"))
    }

    pub fn require<'a, T>(&self, opt: &'a Option<T>, section: &str) -> Result<&'a T, ConfigError> {
        opt.as_ref()
            .ok_or_else(|| err(None, format!("[{section}]"), "section is required for this command"))
    }

    /// Initial profile on the configured grid.
    pub fn initial_profile(&self) -> Result<Profile, ConfigError> {
        let grid = self.require_grid()?;
        let spec = self.require(&self.initial, "initial")?;
        let p = build(&spec.data, grid, spec.mass, self.physics.map(|p| p.alpha))?;
        match spec.mollify {
            Some(h) => mollify(&p, h).map_err(|e| err(None, "initial.mollify", e.to_string())),
            None => Ok(p),
        }
    }
}

fn build(data: &InitialData, grid: Grid, mass: f64, alpha: Option<f64>) -> Result<Profile, ConfigError> {
    let core = |e: fracflux::Error| err(None, "[initial]", e.to_string());
    Ok(match data {
        InitialData::Semicircle => initial::semicircle_with(grid, 2.0, mass).map_err(core)?,
        InitialData::Gaussian { sigma } => initial::gaussian(grid, *sigma, mass).map_err(core)?,
        InitialData::Cauchy { eps } => initial::cauchy(grid, *eps, mass, 0.0).map_err(core)?,
        InitialData::SmoothedSemicircle { h, floor } => initial::smoothed_semicircle(grid, *h, *floor)
            .map_err(core)?
            .scaled(mass),
        InitialData::CriticalPower { amplitude } => {
            let alpha = alpha.ok_or_else(|| err(None, "initial.kind", "critical_power needs a [physics] section"))?;
            initial::critical_power(grid, alpha, *amplitude).map_err(core)?
        }
        InitialData::Shifted { base, offset } => initial::shifted(&build(base, grid, mass, alpha)?, *offset),
        InitialData::File { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| err(None, "initial.path", format!("{}: {e}", path.display())))?;
            let mut values = Vec::new();
            for (i, raw) in text.lines().enumerate() {
                let s = raw.split('#').next().unwrap_or("").trim();
                if s.is_empty() {
                    continue;
                }
                let v = parse_f64(s).ok_or_else(|| {
                    err(Some(i + 1), "initial.path", format!("{}: expected a number, got `{s}`", path.display()))
                })?;
                values.push(v);
            }
            if values.len() != grid.n_points() {
                return Err(err(
                    None,
                    "initial.path",
                    format!("{} holds {} values, grid has {}", path.display(), values.len(), grid.n_points()),
                ));
            }
            Profile::new(grid, values).map_err(core)?
        }
    })
}

fn parse_physics(ini: &Ini) -> Result<PhysicsParams, ConfigError> {
    let f = ini.fields("physics");
    let alpha = f.req_f64("alpha")?;
    let nu = f.req_f64("nu")?;
    let gamma = f.f64("gamma")?.unwrap_or(0.0);
    PhysicsParams::new(alpha, nu, gamma).map_err(|e| f.invalid(param_key(&e, "alpha"), e.to_string()))
}

/// Best guess at which key a core validation error is about.
fn param_key(e: &fracflux::Error, fallback: &'static str) -> &'static str {
    match e {
        fracflux::Error::InvalidParameter { name, .. } => name,
        _ => fallback,
    }
}

fn parse_solver(ini: &Ini) -> Result<SolverConfig, ConfigError> {
    let f = ini.fields("solver");
    let dt = f.req_f64("dt")?;
    let t_end = f.req_f64("t_end")?;
    let mut cfg = SolverConfig::new(dt, t_end).map_err(|e| f.invalid(param_key(&e, "dt"), e.to_string()))?;
    if let Some(s) = f.str("scheme") {
        cfg.scheme = match s {
            "direct" => Scheme::Direct,
            "splitting" => Scheme::Splitting,
            other => return Err(f.invalid("scheme", format!("expected direct or splitting, got `{other}`"))),
        };
    }
    if let Some(s) = f.str("dyson_substep") {
        cfg.dyson_substep = match s {
            "spectral" => DysonSubstep::Spectral,
            "characteristics" => DysonSubstep::Characteristics,
            other => {
                return Err(f.invalid("dyson_substep", format!("expected spectral or characteristics, got `{other}`")))
            }
        };
    }
    if let Some(b) = f.bool("dealias")? {
        cfg.dealias = b;
    }
    if let Some(k) = f.usize("record_every")? {
        if k == 0 {
            return Err(f.invalid("record_every", "must be at least 1"));
        }
        cfg.record_every = k;
    }
    if let Some(w) = f.f64("mollify_width")? {
        cfg.mollify_width = Some(w);
    }
    Ok(cfg)
}

fn parse_grid(ini: &Ini) -> Result<Grid, ConfigError> {
    let f = ini.fields("grid");
    let n = f.req_usize("n")?;
    let l = f.req_f64("half_length")?;
    Grid::new(n, l).map_err(|e| f.invalid("n", e.to_string()))
}

fn parse_initial(ini: &Ini, base_dir: &Path) -> Result<InitialSpec, ConfigError> {
    let f = ini.fields("initial");
    let kind = f.str("kind").ok_or_else(|| f.missing("kind"))?;
    let data = match kind {
        "shifted" => {
            let base = f.str("base").ok_or_else(|| f.missing("base"))?;
            if base == "shifted" {
                return Err(f.invalid("base", "cannot shift a shifted profile"));
            }
            InitialData::Shifted {
                base: Box::new(initial_kind(&f, base, "base", base_dir)?),
                offset: f.req_f64("offset")?,
            }
        }
        other => initial_kind(&f, other, "kind", base_dir)?,
    };
    let mass = f.f64("mass")?.unwrap_or(1.0);
    let mollify = f.f64("mollify")?;
    if let Some(h) = mollify {
        if !(h > 0.0) {
            return Err(f.invalid("mollify", "must be positive"));
        }
    }
    Ok(InitialSpec { data, mass, mollify })
}

fn initial_kind(f: &Fields<'_>, kind: &str, key: &str, base_dir: &Path) -> Result<InitialData, ConfigError> {
    Ok(match kind {
        "semicircle" => InitialData::Semicircle,
        "gaussian" => InitialData::Gaussian { sigma: f.req_f64("sigma")? },
        "cauchy" => InitialData::Cauchy { eps: f.req_f64("eps")? },
        "smoothed_semicircle" => InitialData::SmoothedSemicircle {
            h: f.req_f64("h")?,
            floor: f.f64("floor")?.unwrap_or(0.0),
        },
        "critical_power" => InitialData::CriticalPower {
            amplitude: f.f64("amplitude")?.unwrap_or(1.0),
        },
        "file" => {
            let p = f.str("path").ok_or_else(|| f.missing("path"))?;
            let path = base_dir.join(p);
            if !path.is_file() {
                return Err(f.invalid("path", format!("{} does not exist", path.display())));
            }
            InitialData::File { path }
        }
        other => {
            return Err(f.invalid(
                key,
                format!(
                    "unknown initial data `{other}` (semicircle, gaussian, cauchy, smoothed_semicircle, \
                     critical_power, shifted, file)"
                ),
            ))
        }
    })
}

fn parse_output(ini: &Ini) -> Result<OutputOptions, ConfigError> {
    let f = ini.fields("output");
    Ok(OutputOptions {
        dir: f.str("dir").map(PathBuf::from),
        trajectory: f.bool("trajectory")?.unwrap_or(true),
        energy: f.bool("energy")?.unwrap_or(false),
        analyticity: f.bool("analyticity")?.unwrap_or(false),
        weak_residual: f.bool("weak_residual")?.unwrap_or(false),
    })
}

fn parse_exact(ini: &Ini) -> Result<ExactOptions, ConfigError> {
    let f = ini.fields("exact");
    let times = f.f64_list("times")?.ok_or_else(|| f.missing("times"))?;
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(f.invalid("times", "need finite nonnegative times"));
    }
    let window = f.f64("window")?.unwrap_or(3.0);
    if !(window > 0.0) {
        return Err(f.invalid("window", "must be positive"));
    }
    Ok(ExactOptions {
        times,
        mu: f.f64("mu")?,
        window,
    })
}

fn parse_decay(ini: &Ini) -> Result<DecayOptions, ConfigError> {
    let f = ini.fields("decay");
    let norms = match f.str("norms") {
        None => vec![(f64::INFINITY, 0)],
        Some(s) => s
            .split(',')
            .map(|item| {
                let (q, theta) = item.trim().split_once(':')?;
                let q = parse_f64(q.trim()).filter(|q| *q >= 1.0)?;
                let theta: u32 = theta.trim().parse().ok().filter(|t| *t <= 2)?;
                Some((q, theta))
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| f.invalid("norms", "expected `q:theta` pairs with q >= 1 and theta in 0..=2"))?,
    };
    let window = match f.f64_list("window")? {
        None => None,
        Some(w) if w.len() == 2 && w[0] < w[1] => Some((w[0], w[1])),
        Some(_) => return Err(f.invalid("window", "expected `t0, t1` with t0 < t1")),
    };
    Ok(DecayOptions { norms, window })
}

fn parse_mild(ini: &Ini) -> Result<MildOptions, ConfigError> {
    let f = ini.fields("mild");
    Ok(MildOptions {
        t_final: f.req_f64("t_final")?,
        mesh: f.usize("mesh")?.unwrap_or(64),
        max_iter: f.usize("max_iter")?.unwrap_or(30),
        tol: f.f64("tol")?.unwrap_or(1e-8),
        require_small: f.bool("require_small")?.unwrap_or(false),
    })
}

fn parse_particles(ini: &Ini) -> Result<ParticleOptions, ConfigError> {
    let f = ini.fields("particles");
    let positions = f.f64_list("positions")?;
    let count = match (&positions, f.usize("count")?) {
        (Some(p), Some(n)) if p.len() != n => {
            return Err(f.invalid("count", format!("{} positions listed but count = {n}", p.len())))
        }
        (Some(p), _) => p.len(),
        (None, Some(n)) => n,
        (None, None) => return Err(f.missing("count")),
    };
    let stepper = match f.str("stepper").unwrap_or("euler") {
        "euler" => StepperKind::Euler,
        "implicit" => StepperKind::Implicit,
        other => return Err(f.invalid("stepper", format!("expected euler or implicit, got `{other}`"))),
    };
    let opts = ParticleOptions {
        positions,
        count,
        sigma: f.f64("sigma")?.unwrap_or(1.0),
        gamma: f.f64("gamma")?.unwrap_or(1.0),
        noise: f.bool("noise")?.unwrap_or(true),
        dt: f.req_f64("dt")?,
        t_end: f.req_f64("t_end")?,
        stepper,
        neighbours: f.usize("neighbours")?.unwrap_or(16),
        ensembles: f.usize("ensembles")?.unwrap_or(1),
    };
    if !(opts.dt > 0.0) {
        return Err(f.invalid("dt", "must be positive"));
    }
    if !(opts.t_end >= 0.0) {
        return Err(f.invalid("t_end", "must be nonnegative"));
    }
    if opts.ensembles == 0 {
        return Err(f.invalid("ensembles", "must be at least 1"));
    }
    if !(opts.gamma >= 0.0) {
        return Err(f.invalid("gamma", "must be nonnegative"));
    }
    Ok(opts)
}

fn parse_compare(ini: &Ini) -> Result<CompareOptions, ConfigError> {
    let f = ini.fields("compare");
    let method = |s: &str| match s.trim() {
        "direct" => Some(Method::Direct),
        "splitting" => Some(Method::Splitting),
        "exact" => Some(Method::Exact),
        "mild" => Some(Method::Mild),
        _ => None,
    };
    let list = f.str("methods").ok_or_else(|| f.missing("methods"))?;
    let parsed: Option<Vec<Method>> = list.split(',').map(method).collect();
    let methods = match parsed.as_deref() {
        Some([a, b]) if a != b => (*a, *b),
        _ => {
            return Err(f.invalid(
                "methods",
                "expected two different methods out of direct, splitting, exact, mild",
            ))
        }
    };
    let times = f.f64_list("times")?.ok_or_else(|| f.missing("times"))?;
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(f.invalid("times", "need increasing positive times"));
    }
    Ok(CompareOptions { methods, times })
}
