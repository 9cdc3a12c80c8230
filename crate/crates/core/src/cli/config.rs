//! Line-oriented scenario configuration.
//!
//! ```text
//! # comment
//! [scenario]
//! name = mechanical-a1
//! families = maximal, diverging
//!
//! [grid]
//! n = 64
//! ```
//!
//! Keys may also be written fully qualified outside a section (`grid.n = 64`).
//! Values are plain tokens; potentials use `cosine(A, f, phase, offset)`,
//! `sum_of_cosines(A, f, phase, offset)`, `constant(v)` or `table(path)`.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::grid::{make_grid, TorusGrid};
use crate::limit::Verdict;
use crate::models::{PotentialSpec, BUILTIN_MODELS};
use crate::weakkam::BarrierWindow;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line, or the line after the last one for missing entries.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Maximal,
    Diverging,
    ContactConstants,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Maximal => "maximal",
            Family::Diverging => "diverging",
            Family::ContactConstants => "contact-constants",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "maximal" => Some(Family::Maximal),
            "diverging" => Some(Family::Diverging),
            "contact-constants" => Some(Family::ContactConstants),
            _ => None,
        }
    }
}

/// Where a potential comes from; tables are read during validation.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSource {
    Spec(PotentialSpec),
    Table(PathBuf),
}

impl PotentialSource {
    fn to_text(&self) -> String {
        match self {
            PotentialSource::Spec(PotentialSpec::Cosine { amplitude, frequency, phase, offset }) => {
                format!("cosine({amplitude}, {frequency}, {phase}, {offset})")
            }
            PotentialSource::Spec(PotentialSpec::SumOfCosines { amplitude, frequency, phase, offset }) => {
                format!("sum_of_cosines({amplitude}, {frequency}, {phase}, {offset})")
            }
            PotentialSource::Spec(PotentialSpec::Table(_)) => "table(<inline>)".to_string(),
            PotentialSource::Table(path) => format!("table({})", path.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub name: String,
    pub base: String,
    pub potential: PotentialSpec,
    pub coefficient: Option<PotentialSpec>,
    /// As written, for the config echo.
    pub potential_source: PotentialSource,
    pub coefficient_source: Option<PotentialSource>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSchedule {
    pub lambda0: f64,
    pub factor: f64,
    pub count: usize,
}

impl LambdaSchedule {
    /// `λ_k = λ₀ factor^k`, `k = 0..count`.
    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.lambda0 * self.factor.powi(k as i32)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub solver: f64,
    pub aubry: f64,
    /// `None` selects `5 (dx + λ_min)`.
    pub theta: Option<f64>,
    /// `None` selects `10 (1 + ‖u0‖∞)`.
    pub big_theta: Option<f64>,
    pub max_iters: usize,
    pub ergodic_lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub dim: usize,
    pub n: usize,
    pub m: usize,
    pub dt_over_dx: f64,
    pub model: ModelConfig,
    pub lambda: LambdaSchedule,
    pub tolerances: Tolerances,
    pub window: Option<BarrierWindow>,
    pub output_dir: Option<PathBuf>,
    pub families: Vec<Family>,
    /// Expected verdict per family name (`maximal`, `diverging`, `zero`, `plus`, `minus`).
    pub expect: Vec<(String, Verdict)>,
}

impl ScenarioConfig {
    pub fn grid(&self) -> TorusGrid {
        make_grid(self.dim, self.n).expect("validated grid")
    }

    pub fn dt(&self) -> f64 {
        self.dt_over_dx / self.n as f64
    }

    /// The configuration in the input grammar, with every default spelled out.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fams: Vec<&str> = self.families.iter().map(Family::as_str).collect();
        out.push_str(&format!("[scenario]\nname = {}\nfamilies = {}\n", self.name, fams.join(", ")));
        if let Some(dir) = &self.output_dir {
            out.push_str(&format!("output_dir = {}\n", dir.display()));
        }
        out.push_str(&format!("\n[grid]\ndim = {}\nn = {}\n", self.dim, self.n));
        out.push_str(&format!("\n[control]\nm = {}\ndt_over_dx = {}\n", self.m, self.dt_over_dx));
        out.push_str(&format!(
            "\n[model]\nname = {}\nbase = {}\npotential = {}\n",
            self.model.name,
            self.model.base,
            self.model.potential_source.to_text()
        ));
        if let Some(c) = &self.model.coefficient_source {
            out.push_str(&format!("coefficient = {}\n", c.to_text()));
        }
        out.push_str(&format!(
            "\n[lambda]\nlambda0 = {}\nfactor = {}\ncount = {}\n",
            self.lambda.lambda0, self.lambda.factor, self.lambda.count
        ));
        let t = &self.tolerances;
        let auto = |v: Option<f64>| v.map_or("auto".to_string(), |x| x.to_string());
        out.push_str(&format!(
            "\n[tolerances]\nsolver = {}\naubry = {}\ntheta = {}\nbig_theta = {}\nmax_iters = {}\nergodic_lambda = {}\n",
            t.solver,
            t.aubry,
            auto(t.theta),
            auto(t.big_theta),
            t.max_iters,
            t.ergodic_lambda
        ));
        if let Some(w) = &self.window {
            out.push_str(&format!("\n[barrier]\nburn_in = {}\nhorizon = {}\n", w.burn_in, w.horizon));
        }
        if !self.expect.is_empty() {
            out.push_str("\n[expect]\n");
            for (family, verdict) in &self.expect {
                out.push_str(&format!("{family} = {verdict}\n"));
            }
        }
        out
    }
}

const KEYS: [&str; 24] = [
    "scenario.name",
    "scenario.families",
    "scenario.output_dir",
    "grid.dim",
    "grid.n",
    "control.m",
    "control.dt_over_dx",
    "model.name",
    "model.base",
    "model.potential",
    "model.coefficient",
    "lambda.lambda0",
    "lambda.factor",
    "lambda.count",
    "tolerances.solver",
    "tolerances.aubry",
    "tolerances.theta",
    "tolerances.big_theta",
    "tolerances.max_iters",
    "tolerances.ergodic_lambda",
    "barrier.burn_in",
    "barrier.horizon",
    "expect.*",
    "",
];

const REQUIRED_SECTIONS: [&str; 3] = ["scenario", "grid", "model"];

struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Raw {
    entries: Vec<Entry>,
    sections: Vec<String>,
    end_line: usize,
}

fn tokenize(text: &str, errors: &mut Vec<ConfigError>) -> Raw {
    let mut entries: Vec<Entry> = Vec::new();
    let mut sections = Vec::new();
    let mut section: Option<String> = None;
    let mut count = 0;
    for (i, raw) in text.lines().enumerate() {
        count = i + 1;
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) if !name.trim().is_empty() => {
                    let name = name.trim().to_string();
                    if !sections.contains(&name) {
                        sections.push(name.clone());
                    }
                    section = Some(name);
                }
                _ => errors.push(ConfigError { line, message: format!("malformed section header {content:?}") }),
            }
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            errors.push(ConfigError { line, message: format!("expected `key = value`, got {content:?}") });
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            errors.push(ConfigError { line, message: "empty key".into() });
            continue;
        }
        let key = match (&section, k.contains('.')) {
            (_, true) => k.to_string(),
            (Some(s), false) => format!("{s}.{k}"),
            (None, false) => {
                errors.push(ConfigError { line, message: format!("key {k:?} outside any section") });
                continue;
            }
        };
        if let Some((s, _)) = key.split_once('.') {
            if !sections.iter().any(|x| x == s) {
                sections.push(s.to_string());
            }
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            errors.push(ConfigError { line, message: format!("duplicate key {key} (first set on line {})", prev.line) });
            continue;
        }
        entries.push(Entry { key, value: v.to_string(), line });
    }
    Raw { entries, sections, end_line: count + 1 }
}

fn known(key: &str) -> bool {
    KEYS.contains(&key) || key.strip_prefix("expect.").is_some_and(|f| !f.is_empty())
}

struct Reader<'a> {
    raw: &'a Raw,
    errors: &'a mut Vec<ConfigError>,
}

impl Reader<'_> {
    fn entry(&self, key: &str) -> Option<&Entry> {
        self.raw.entries.iter().find(|e| e.key == key)
    }

    fn line_of(&self, key: &str) -> usize {
        self.entry(key).map_or(self.raw.end_line, |e| e.line)
    }

    fn fail(&mut self, line: usize, message: String) {
        self.errors.push(ConfigError { line, message });
    }

    fn string(&mut self, key: &str) -> Option<String> {
        self.entry(key).map(|e| e.value.clone())
    }

    fn required_string(&mut self, key: &str) -> Option<String> {
        let v = self.string(key);
        if v.is_none() {
            let line = self.raw.end_line;
            self.fail(line, format!("missing required key {key}"));
        }
        v
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, kind: &str) -> Option<Option<T>> {
        let Some(e) = self.entry(key) else { return Some(None) };
        let (line, value) = (e.line, e.value.clone());
        match value.parse::<T>() {
            Ok(v) => Some(Some(v)),
            Err(_) => {
                self.fail(line, format!("{key} expects {kind}, got {value:?}"));
                None
            }
        }
    }

    fn float(&mut self, key: &str, default: f64) -> f64 {
        match self.parsed::<f64>(key, "a number") {
            Some(Some(v)) if v.is_finite() => v,
            Some(Some(v)) => {
                let line = self.line_of(key);
                self.fail(line, format!("{key} must be finite, got {v}"));
                default
            }
            Some(None) | None => default,
        }
    }

    fn auto_float(&mut self, key: &str) -> Option<f64> {
        if self.entry(key).is_some_and(|e| e.value == "auto") {
            return None;
        }
        self.parsed::<f64>(key, "a number or `auto`").flatten()
    }

    fn integer(&mut self, key: &str, default: usize) -> usize {
        match self.parsed::<usize>(key, "a non-negative integer") {
            Some(Some(v)) => v,
            _ => default,
        }
    }

    fn auto_integer(&mut self, key: &str) -> Option<usize> {
        if self.entry(key).is_some_and(|e| e.value == "auto") {
            return None;
        }
        self.parsed::<usize>(key, "a non-negative integer or `auto`").flatten()
    }
}

fn parse_call(text: &str) -> Option<(&str, Vec<&str>)> {
    let open = text.find('(')?;
    let inner = text[open + 1..].strip_suffix(')')?;
    let args = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').map(str::trim).collect() };
    Some((text[..open].trim(), args))
}

fn parse_potential(text: &str) -> Result<PotentialSource, String> {
    let Some((name, args)) = parse_call(text) else {
        return Err(format!("expected cosine(...), sum_of_cosines(...), constant(v) or table(path), got {text:?}"));
    };
    if name == "table" {
        return match args.as_slice() {
            [path] if !path.is_empty() => Ok(PotentialSource::Table(PathBuf::from(path))),
            _ => Err("table(path) takes one path".into()),
        };
    }
    let nums: Result<Vec<f64>, _> = args.iter().map(|a| a.parse::<f64>()).collect();
    let nums = nums.map_err(|_| format!("non-numeric argument in {text:?}"))?;
    if nums.iter().any(|v| !v.is_finite()) {
        return Err(format!("non-finite argument in {text:?}"));
    }
    match (name, nums.as_slice()) {
        ("cosine", [a, f, p, o]) => Ok(PotentialSource::Spec(PotentialSpec::cosine(*a, *f, *p, *o))),
        ("sum_of_cosines", [a, f, p, o]) => Ok(PotentialSource::Spec(PotentialSpec::SumOfCosines {
            amplitude: *a,
            frequency: *f,
            phase: *p,
            offset: *o,
        })),
        ("constant", [v]) => Ok(PotentialSource::Spec(PotentialSpec::constant(*v))),
        ("cosine" | "sum_of_cosines", _) => Err(format!("{name} takes 4 arguments (amplitude, frequency, phase, offset)")),
        ("constant", _) => Err("constant takes 1 argument".into()),
        _ => Err(format!("unknown potential kind {name:?}")),
    }
}

fn resolve(source: &PotentialSource, base_dir: &Path, grid: Option<&TorusGrid>) -> Result<PotentialSpec, String> {
    match source {
        PotentialSource::Spec(spec) => Ok(spec.clone()),
        PotentialSource::Table(path) => {
            let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
            let Some(grid) = grid else { return Err("table needs a valid grid".into()) };
            PotentialSpec::from_table_file(&full, grid).map_err(|e| e.to_string())
        }
    }
}

/// Parses and validates a configuration; relative table paths resolve against the working directory.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    parse_config_in(text, Path::new("."))
}

/// Reads a configuration file; relative table paths resolve against its directory.
pub fn parse_config_file(path: &Path) -> Result<ScenarioConfig, ConfigErrors> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigErrors(vec![ConfigError { line: 0, message: format!("cannot read {}: {e}", path.display()) }])
    })?;
    parse_config_in(&text, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config_in(text: &str, base_dir: &Path) -> Result<ScenarioConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let raw = tokenize(text, &mut errors);
    for e in &raw.entries {
        if !known(&e.key) {
            errors.push(ConfigError { line: e.line, message: format!("unknown key {}", e.key) });
        }
    }
    for s in REQUIRED_SECTIONS {
        if !raw.sections.iter().any(|x| x == s) {
            errors.push(ConfigError { line: raw.end_line, message: format!("missing required section [{s}]") });
        }
    }
    let mut r = Reader { raw: &raw, errors: &mut errors };

    let name = r.required_string("scenario.name").unwrap_or_default();
    let output_dir = r.string("scenario.output_dir").map(PathBuf::from);
    let mut families = Vec::new();
    if let Some(list) = r.string("scenario.families") {
        let line = r.line_of("scenario.families");
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty() && *s != "none") {
            match Family::parse(item) {
                Some(f) if !families.contains(&f) => families.push(f),
                Some(_) => r.fail(line, format!("family {item} listed twice")),
                None => r.fail(line, format!("unknown family {item:?} (maximal | diverging | contact-constants)")),
            }
        }
    }

    let dim = r.integer("grid.dim", 1);
    if !(dim == 1 || dim == 2) {
        let line = r.line_of("grid.dim");
        r.fail(line, format!("dim must be 1 or 2, got {dim}"));
    }
    let n_line = r.line_of("grid.n");
    let n = match r.parsed::<usize>("grid.n", "a non-negative integer") {
        Some(Some(v)) => v,
        Some(None) => {
            if raw.sections.iter().any(|s| s == "grid") {
                r.fail(n_line, "missing required key grid.n".into());
            }
            0
        }
        None => 0,
    };
    let n_ok = n >= 4;
    if !n_ok && r.entry("grid.n").is_some() && r.parsed::<usize>("grid.n", "").is_some() {
        r.fail(n_line, format!("n must be ≥ 4, got {n}"));
    }
    let grid = if n_ok && (dim == 1 || dim == 2) { make_grid(dim, n).ok() } else { None };

    let m = r.integer("control.m", 3);
    if m < 1 || (n_ok && m >= n / 2) {
        let line = r.line_of("control.m");
        r.fail(line, format!("m must satisfy 1 ≤ m < n/2, got m = {m}, n = {n}"));
    }
    let dt_over_dx = r.float("control.dt_over_dx", 1.0);
    if dt_over_dx <= 0.0 {
        let line = r.line_of("control.dt_over_dx");
        r.fail(line, format!("dt_over_dx must be positive, got {dt_over_dx}"));
    }

    let model_name = r.required_string("model.name").unwrap_or_default();
    if !model_name.is_empty() && !BUILTIN_MODELS.contains(&model_name.as_str()) {
        let line = r.line_of("model.name");
        r.fail(line, format!("unknown model {model_name:?}; known: {}", BUILTIN_MODELS.join(", ")));
    }
    let base = r.string("model.base").unwrap_or_else(|| "mechanical".to_string());
    if !(base == "mechanical" || base == "eikonal2") {
        let line = r.line_of("model.base");
        r.fail(line, format!("base must be mechanical or eikonal2, got {base:?}"));
    }
    let read_potential = |r: &mut Reader, key: &str| -> Option<(PotentialSource, PotentialSpec)> {
        let text = r.string(key)?;
        let line = r.line_of(key);
        match parse_potential(&text).and_then(|src| resolve(&src, base_dir, grid.as_ref()).map(|spec| (src, spec))) {
            Ok(pair) => Some(pair),
            Err(msg) => {
                r.fail(line, format!("{key}: {msg}"));
                None
            }
        }
    };
    let (potential_source, potential) = read_potential(&mut r, "model.potential").unwrap_or_else(|| {
        let spec = PotentialSpec::cosine(1.0, 1.0, 0.0, 0.0);
        (PotentialSource::Spec(spec.clone()), spec)
    });
    let coefficient = read_potential(&mut r, "model.coefficient");
    if model_name == "linear-discount" && coefficient.is_none() && r.entry("model.coefficient").is_none() {
        let line = r.line_of("model.name");
        r.fail(line, "linear-discount requires model.coefficient".into());
    }

    let lambda = LambdaSchedule {
        lambda0: r.float("lambda.lambda0", 0.1),
        factor: r.float("lambda.factor", 0.5),
        count: r.integer("lambda.count", 6),
    };
    if lambda.lambda0 <= 0.0 {
        let line = r.line_of("lambda.lambda0");
        r.fail(line, format!("lambda0 must be positive, got {}", lambda.lambda0));
    }
    if !(lambda.factor > 0.0 && lambda.factor < 1.0) {
        let line = r.line_of("lambda.factor");
        r.fail(line, format!("factor must lie in (0, 1), got {}", lambda.factor));
    }
    if !families.is_empty() && lambda.count < 4 {
        let line = r.line_of("lambda.count");
        r.fail(line, format!("count must be ≥ 4 to classify families, got {}", lambda.count));
    }

    let tolerances = Tolerances {
        solver: r.float("tolerances.solver", 1e-10),
        aubry: r.float("tolerances.aubry", 1e-6),
        theta: r.auto_float("tolerances.theta"),
        big_theta: r.auto_float("tolerances.big_theta"),
        max_iters: r.integer("tolerances.max_iters", crate::discounted::DEFAULT_MAX_ITERS),
        ergodic_lambda: r.float("tolerances.ergodic_lambda", 1e-3),
    };
    for (key, v) in [
        ("tolerances.solver", tolerances.solver),
        ("tolerances.aubry", tolerances.aubry),
        ("tolerances.ergodic_lambda", tolerances.ergodic_lambda),
    ] {
        if v <= 0.0 {
            let line = r.line_of(key);
            r.fail(line, format!("{key} must be positive, got {v}"));
        }
    }
    for (key, v) in [("tolerances.theta", tolerances.theta), ("tolerances.big_theta", tolerances.big_theta)] {
        if v.is_some_and(|x| x.is_nan() || x <= 0.0) {
            let line = r.line_of(key);
            r.fail(line, format!("{key} must be positive or auto"));
        }
    }
    if tolerances.max_iters == 0 {
        let line = r.line_of("tolerances.max_iters");
        r.fail(line, "max_iters must be positive".into());
    }

    let burn_in = r.auto_integer("barrier.burn_in");
    let horizon = r.auto_integer("barrier.horizon");
    let window = match (burn_in, horizon) {
        (None, None) => None,
        (b, h) => {
            let nodes = grid.map_or(0, |g| g.node_count());
            let d = BarrierWindow::for_nodes(nodes);
            let w = BarrierWindow { burn_in: b.unwrap_or(d.burn_in), horizon: h.unwrap_or(d.horizon) };
            if grid.is_some() {
                if let Err(e) = w.validate(nodes) {
                    let line = r.line_of(if b.is_some() { "barrier.burn_in" } else { "barrier.horizon" });
                    r.fail(line, e.to_string());
                }
            }
            Some(w)
        }
    };

    let mut expect = Vec::new();
    for e in raw.entries.iter().filter(|e| e.key.starts_with("expect.")) {
        let family = e.key["expect.".len()..].to_string();
        let verdict = match e.value.as_str() {
            "Converges" => Some(Verdict::Converges),
            "DivergesPlus" => Some(Verdict::DivergesPlus),
            "DivergesMinus" => Some(Verdict::DivergesMinus),
            "Undetermined" => Some(Verdict::Undetermined),
            _ => None,
        };
        match verdict {
            Some(v) => expect.push((family, v)),
            None => r.fail(e.line, format!("unknown verdict {:?}", e.value)),
        }
    }

    // model-dependent checks
    let is_contact = model_name == "linear-discount" || model_name == "sin-contact";
    if !is_contact && !families.is_empty() {
        let line = r.line_of("scenario.families");
        r.fail(line, format!("families need a contact model (linear-discount or sin-contact), got {model_name}"));
    }
    for f in &families {
        let ok = match f {
            Family::Maximal | Family::Diverging => model_name == "linear-discount",
            Family::ContactConstants => model_name == "sin-contact",
        };
        if !ok && is_contact {
            let line = r.line_of("scenario.families");
            r.fail(line, format!("family {} is not available for model {model_name}", f.as_str()));
        }
    }
    if let (Some((_, spec)), Some(g)) = (&coefficient, grid.as_ref()) {
        if let Ok(pot) = crate::models::Potential::new(spec.clone(), g) {
            let amax = pot.sample().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let dt = dt_over_dx / n as f64;
            if families.iter().any(|f| *f != Family::ContactConstants) && lambda.lambda0 * dt * amax >= 0.5 {
                let line = r.line_of("lambda.lambda0");
                r.fail(line, format!("λ₀·dt·max|a| = {} must be < 0.5", lambda.lambda0 * dt * amax));
            }
        }
    }
    if model_name == "sin-contact" && lambda.lambda0 > 0.0 && grid.is_some() {
        let dt = dt_over_dx / n as f64;
        if lambda.lambda0 * dt >= 0.5 {
            let line = r.line_of("lambda.lambda0");
            r.fail(line, format!("λ₀·dt = {} must be < 0.5", lambda.lambda0 * dt));
        }
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| e.line);
        return Err(ConfigErrors(errors));
    }
    let (coefficient_source, coefficient) = match coefficient {
        Some((src, spec)) => (Some(src), Some(spec)),
        None => (None, None),
    };
    Ok(ScenarioConfig {
        name,
        dim,
        n,
        m,
        dt_over_dx,
        model: ModelConfig { name: model_name, base, potential, coefficient, potential_source, coefficient_source },
        lambda,
        tolerances,
        window,
        output_dir,
        families,
        expect,
    })
}
