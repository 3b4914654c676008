//! Line-oriented run configuration: `[section]` headers followed by
//! `key = value` lines. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use selfsim_core::kernels::MemoryKernel;
use selfsim_core::spectral::{InitialData, ModeGrid};
use selfsim_core::visco::VectorInitialData;
use selfsim_core::Hypothesis;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Converge,
    Rate,
    Visco,
    ValidateKernel,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Converge => "converge",
            Command::Rate => "rate",
            Command::Visco => "visco",
            Command::ValidateKernel => "validate-kernel",
        }
    }

    fn required_sections(self) -> &'static [&'static str] {
        match self {
            Command::ValidateKernel => &["kernel"],
            Command::Visco => &["kernel", "kernel.bulk", "initial", "grid", "time"],
            _ => &["kernel", "initial", "grid", "time"],
        }
    }
}

const SECTIONS: [&str; 6] = ["kernel", "kernel.bulk", "initial", "grid", "time", "experiment"];

/// One problem found in the configuration. `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every error found, in line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl std::error::Error for ConfigErrors {}

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

#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Scalar(InitialData),
    Vector(VectorInitialData),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    Canonical,
    Rescaled(f64),
    Power(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_list: Vec<f64>,
    pub big_t_list: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub kernel: MemoryKernel,
    pub bulk: Option<MemoryKernel>,
    pub initial: Option<Initial>,
    pub grid: Option<ModeGrid>,
    pub time: Option<TimeSpec>,
    pub s: f64,
    /// Claimed regular-variation index for `converge`.
    pub beta: Option<f64>,
    pub scaling: Scaling,
    pub output: Option<PathBuf>,
    /// Hex SHA-256 of the configuration text.
    pub hash: String,
}

#[derive(Debug, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

/// Key lookups on one section, recording errors and which keys were used.
struct Reader<'a> {
    name: &'a str,
    section: &'a Section,
    used: Vec<&'a str>,
    errors: &'a mut Vec<ConfigError>,
}

impl<'a> Reader<'a> {
    fn raw(&mut self, key: &'a str) -> Option<(usize, &'a str)> {
        self.used.push(key);
        self.section.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn line_of(&self, key: &str) -> usize {
        self.section.entries.get(key).map_or(self.section.line, |e| e.0)
    }

    fn real(&mut self, key: &'a str) -> Option<f64> {
        let (line, v) = self.raw(key)?;
        match parse_real(v) {
            Some(x) => Some(x),
            None => {
                self.errors.push(ConfigError::at(line, format!("`{key}` expects a real number, got `{v}`")));
                None
            }
        }
    }

    fn real_or(&mut self, key: &'a str, default: f64) -> f64 {
        if self.section.entries.contains_key(key) {
            self.real(key).unwrap_or(f64::NAN)
        } else {
            self.used.push(key);
            default
        }
    }

    fn required_real(&mut self, key: &'a str) -> Option<f64> {
        if !self.section.entries.contains_key(key) {
            self.missing(key);
            return None;
        }
        self.real(key)
    }

    fn list(&mut self, key: &'a str) -> Option<Vec<f64>> {
        let (line, v) = self.raw(key)?;
        let items: Vec<Option<f64>> = v.split(',').map(|p| parse_real(p.trim())).collect();
        if items.iter().any(Option::is_none) {
            self.errors.push(ConfigError::at(line, format!("`{key}` expects a comma-separated list of reals, got `{v}`")));
            return None;
        }
        Some(items.into_iter().flatten().collect())
    }

    fn word(&mut self, key: &'a str) -> Option<(usize, &'a str)> {
        self.raw(key)
    }

    fn missing(&mut self, key: &str) {
        let line = self.section.line;
        self.errors.push(ConfigError::at(line, format!("[{}] is missing required key `{key}`", self.name)));
    }

    fn check(&mut self, cond: bool, key: &str, message: impl Into<String>) {
        if !cond {
            let line = self.line_of(key);
            self.errors.push(ConfigError::at(line, message));
        }
    }

    /// Reports keys that were present but never asked for.
    fn finish(self) {
        for (key, (line, _)) in &self.section.entries {
            if !self.used.contains(&key.as_str()) {
                self.errors.push(ConfigError::at(*line, format!("unknown key `{key}` in [{}]", self.name)));
            }
        }
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_snake_case(key: &str) -> bool {
    let mut chars = key.chars();
    matches!(chars.next(), Some('a'..='z'))
        && key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn tokenize(text: &str, errors: &mut Vec<ConfigError>) -> BTreeMap<String, Section> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    // keys under a rejected header are covered by the header's error
    let mut skipping = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            skipping = true;
            let Some(name) = name.strip_suffix(']').map(str::trim) else {
                errors.push(ConfigError::at(line, format!("malformed section header `{content}`")));
                current = None;
                continue;
            };
            if !SECTIONS.contains(&name) {
                errors.push(ConfigError::at(line, format!("unknown section [{name}]")));
                current = None;
                continue;
            }
            if let Some(prev) = sections.get(name) {
                errors.push(ConfigError::at(
                    line,
                    format!("duplicate section [{name}] (lines {} and {line})", prev.line),
                ));
                current = None;
                continue;
            }
            sections.insert(name.to_string(), Section { line, entries: BTreeMap::new() });
            current = Some(name.to_string());
            skipping = false;
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ConfigError::at(line, format!("expected `key = value`, got `{content}`")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !is_snake_case(key) {
            errors.push(ConfigError::at(line, format!("key `{key}` is not lower_snake_case")));
            continue;
        }
        let Some(name) = &current else {
            if !skipping {
                errors.push(ConfigError::at(line, format!("key `{key}` outside any section")));
            }
            continue;
        };
        let section = sections.get_mut(name).expect("current section exists");
        if let Some((prev, _)) = section.entries.get(key) {
            errors.push(ConfigError::at(line, format!("duplicate key `{key}` in [{name}] (lines {prev} and {line})")));
            continue;
        }
        section.entries.insert(key.to_string(), (line, value.to_string()));
    }
    sections
}

fn kernel_from(r: &mut Reader) -> Option<MemoryKernel> {
    let before = r.errors.len();
    let Some((line, family)) = r.word("family") else {
        r.missing("family");
        return None;
    };
    let built = match family {
        "heat" => {
            let a0 = r.real_or("a0", 1.0);
            MemoryKernel::heat(a0)
        }
        "wave" => {
            let c = r.real_or("c", 1.0);
            MemoryKernel::wave(c)
        }
        "power_law" => {
            let (beta, c, a0) = (r.required_real("beta"), r.required_real("c"), r.real_or("a0", 0.0));
            MemoryKernel::power_law(beta?, c?, a0)
        }
        "fractional" => {
            let beta = r.required_real("beta")?;
            MemoryKernel::fractional(beta)
        }
        "exponential" => {
            let mu = r.real_or("mu", 1.0);
            let c = r.real_or("c", 1.0);
            let a0 = r.real_or("a0", 0.0);
            MemoryKernel::exponential(mu, c, a0)
        }
        "neg_exponential" => Ok(MemoryKernel::neg_exponential()),
        "cosine" => Ok(MemoryKernel::cosine()),
        "log_modified" => {
            let (m, shift) = (r.required_real("m"), r.real_or("shift", std::f64::consts::E));
            MemoryKernel::log_modified(m?, shift)
        }
        other => {
            r.errors.push(ConfigError::at(
                line,
                format!(
                    "unknown kernel family `{other}` (expected heat, wave, power_law, fractional, \
                     exponential, neg_exponential, cosine or log_modified)"
                ),
            ));
            // the parameters cannot be checked without a family
            r.used.extend(r.section.entries.keys().map(String::as_str));
            return None;
        }
    };
    if r.errors.len() > before {
        return None;
    }
    match built {
        Ok(k) => Some(k),
        Err(e) => {
            r.errors.push(ConfigError::at(line, format!("invalid {family} kernel: {e}")));
            None
        }
    }
}

fn profile_from(r: &mut Reader) -> Option<InitialData> {
    let (line, profile) = r.word("profile").unwrap_or((r.section.line, "gaussian"));
    let mass = r.real_or("mass", 1.0);
    let data = match profile {
        "gaussian" => {
            let width = r.real_or("width", 1.0);
            r.check(width > 0.0, "width", "`width` must be positive");
            InitialData::Gaussian { width, mass }
        }
        "box" => {
            let half_width = r.real_or("half_width", 1.0);
            r.check(half_width > 0.0, "half_width", "`half_width` must be positive");
            InitialData::Box { half_width, mass }
        }
        other => {
            r.errors.push(ConfigError::at(line, format!("unknown profile `{other}` (expected gaussian or box)")));
            r.used.extend(["width", "half_width"]);
            return None;
        }
    };
    Some(data)
}

fn vector3(r: &mut Reader, key: &'static str) -> Option<[f64; 3]> {
    let line = r.line_of(key);
    let v = r.list(key)?;
    if v.len() != 3 {
        r.errors.push(ConfigError::at(line, format!("`{key}` needs three components")));
        return None;
    }
    Some([v[0], v[1], v[2]])
}

fn initial_from(r: &mut Reader, vector: bool) -> Option<Initial> {
    let profile = profile_from(r);
    if !vector {
        return profile.map(Initial::Scalar);
    }
    let (line, field) = r.word("field").unwrap_or((r.section.line, "directional"));
    let v0 = match field {
        "directional" => {
            let direction = vector3(r, "direction").or_else(|| {
                if !r.section.entries.contains_key("direction") {
                    r.missing("direction");
                }
                None
            })?;
            VectorInitialData::Directional { profile: profile?, direction }
        }
        "gradient" => {
            let amplitude = r.real_or("amplitude", 1.0);
            VectorInitialData::Gradient { profile: profile?, amplitude }
        }
        "rotational" => {
            let axis = vector3(r, "axis").or_else(|| {
                if !r.section.entries.contains_key("axis") {
                    r.missing("axis");
                }
                None
            })?;
            VectorInitialData::Rotational { profile: profile?, axis }
        }
        other => {
            r.errors.push(ConfigError::at(
                line,
                format!("unknown field `{other}` (expected directional, gradient or rotational)"),
            ));
            r.used.extend(["direction", "amplitude", "axis"]);
            return None;
        }
    };
    Some(Initial::Vector(v0))
}

fn grid_from(r: &mut Reader, command: Command) -> Option<ModeGrid> {
    let n = r.real_or("dimension", if command == Command::Visco { 3.0 } else { 1.0 });
    let modes = r.required_real("modes");
    let xi_max = r.required_real("xi_max");
    let radial = match r.word("radial") {
        None | Some((_, "false")) => false,
        Some((_, "true")) => true,
        Some((line, other)) => {
            r.errors.push(ConfigError::at(line, format!("`radial` expects true or false, got `{other}`")));
            false
        }
    };
    r.check(n.fract() == 0.0 && (1.0..=3.0).contains(&n), "dimension", "`dimension` must be 1, 2 or 3");
    if let Some(m) = modes {
        r.check(m.fract() == 0.0 && m >= 2.0 && m % 2.0 == 0.0, "modes", "`modes` must be an even integer >= 2");
    }
    if let Some(x) = xi_max {
        r.check(x > 0.0, "xi_max", "`xi_max` must be positive");
    }
    let (modes, xi_max) = (modes?, xi_max?);
    if command == Command::Visco {
        r.check(n == 3.0 && !radial, "dimension", "visco runs on a three-dimensional Cartesian grid");
    }
    ModeGrid::new(n as usize, modes as usize, xi_max, radial).ok()
}

fn time_from(r: &mut Reader, command: Command) -> Option<TimeSpec> {
    let dt = r.required_real("dt");
    let t_list = if r.section.entries.contains_key("t_list") {
        r.list("t_list")
    } else {
        r.missing("t_list");
        None
    };
    // other commands ignore the ladder, so one file can drive several runs
    let big_t_list = match (command, r.section.entries.contains_key("big_t_list")) {
        (Command::Converge, true) => r.list("big_t_list"),
        (Command::Converge, false) => {
            r.missing("big_t_list");
            None
        }
        _ => {
            r.used.push("big_t_list");
            Some(Vec::new())
        }
    };
    let (dt, t_list, big_t_list) = (dt?, t_list?, big_t_list?);
    r.check(dt > 0.0, "dt", "`dt` must be positive");
    let min_t = if command == Command::Solve { 0.0 } else { f64::MIN_POSITIVE };
    r.check(
        !t_list.is_empty() && t_list.iter().all(|&t| t >= min_t),
        "t_list",
        if command == Command::Solve {
            "`t_list` entries must be >= 0"
        } else {
            "`t_list` entries must be > 0"
        },
    );
    if command == Command::Rate {
        r.check(t_list.windows(2).all(|w| w[1] > w[0]), "t_list", "`t_list` must be increasing");
    }
    if command == Command::Converge {
        r.check(
            !big_t_list.is_empty() && big_t_list.iter().all(|&t| t > 0.0) && big_t_list.windows(2).all(|w| w[1] > w[0]),
            "big_t_list",
            "`big_t_list` must be positive and increasing",
        );
    }
    Some(TimeSpec { dt, t_list, big_t_list })
}

struct Experiment {
    s: f64,
    beta: Option<f64>,
    scaling: Scaling,
    output: Option<PathBuf>,
}

fn experiment_from(r: &mut Reader) -> Experiment {
    let s = r.real_or("s", 0.0);
    let beta = r.real("beta");
    if let Some(b) = beta {
        r.check(
            b > -1.0 && b <= 1.0,
            "beta",
            format!("beta = {b} violates the admissible range: {}", Hypothesis::BetaRange),
        );
    }
    let scaling = match r.word("scaling") {
        None | Some((_, "canonical")) => {
            r.used.push("scaling_constant");
            match r.section.entries.get("scaling_constant") {
                Some(_) => {
                    let c = r.real("scaling_constant").unwrap_or(f64::NAN);
                    r.check(c > 0.0, "scaling_constant", "`scaling_constant` must be positive");
                    Scaling::Rescaled(c)
                }
                None => Scaling::Canonical,
            }
        }
        Some((_, "power")) => match r.section.entries.get("scaling_exponent") {
            Some(_) => Scaling::Power(r.real("scaling_exponent").unwrap_or(f64::NAN)),
            None => {
                r.missing("scaling_exponent");
                Scaling::Canonical
            }
        },
        Some((line, other)) => {
            r.errors.push(ConfigError::at(line, format!("unknown scaling `{other}` (expected canonical or power)")));
            Scaling::Canonical
        }
    };
    let output = r.word("output").map(|(_, v)| PathBuf::from(v));
    Experiment { s, beta, scaling, output }
}

/// Parses and validates `text` for `command`, collecting every error.
pub fn parse_config(command: Command, text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let sections = tokenize(text, &mut errors);
    let empty = Section::default();

    for name in command.required_sections() {
        if !sections.contains_key(*name) {
            errors.push(ConfigError::global(format!("missing section [{name}] required by {}", command.name())));
        }
    }
    if command != Command::Visco {
        if let Some(s) = sections.get("kernel.bulk") {
            errors.push(ConfigError::at(s.line, "section [kernel.bulk] is only used by visco"));
        }
    }

    let section = |name: &str| sections.get(name).unwrap_or(&empty);

    let kernel = {
        let mut r = Reader { name: "kernel", section: section("kernel"), used: Vec::new(), errors: &mut errors };
        let k = sections.contains_key("kernel").then(|| kernel_from(&mut r)).flatten();
        r.finish();
        k
    };
    let bulk = if command == Command::Visco {
        let mut r = Reader { name: "kernel.bulk", section: section("kernel.bulk"), used: Vec::new(), errors: &mut errors };
        let k = sections.contains_key("kernel.bulk").then(|| kernel_from(&mut r)).flatten();
        r.finish();
        k
    } else {
        None
    };
    let needs_problem = command != Command::ValidateKernel;
    let (initial, grid, time) = if needs_problem {
        let mut r = Reader { name: "initial", section: section("initial"), used: Vec::new(), errors: &mut errors };
        let initial = sections.contains_key("initial").then(|| initial_from(&mut r, command == Command::Visco)).flatten();
        r.finish();
        let mut r = Reader { name: "grid", section: section("grid"), used: Vec::new(), errors: &mut errors };
        let grid = sections.contains_key("grid").then(|| grid_from(&mut r, command)).flatten();
        r.finish();
        let mut r = Reader { name: "time", section: section("time"), used: Vec::new(), errors: &mut errors };
        let time = sections.contains_key("time").then(|| time_from(&mut r, command)).flatten();
        r.finish();
        (initial, grid, time)
    } else {
        (None, None, None)
    };
    let mut r = Reader { name: "experiment", section: section("experiment"), used: Vec::new(), errors: &mut errors };
    let experiment = experiment_from(&mut r);
    r.finish();

    if let (Some(Initial::Scalar(u0)), Some(g)) = (&initial, &grid) {
        if g.radial && !u0.is_radial() {
            let line = sections["grid"].entries.get("radial").map_or(sections["grid"].line, |e| e.0);
            errors.push(ConfigError::at(line, "a radial grid needs radially symmetric (gaussian) data"));
        }
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| e.line.unwrap_or(0));
        return Err(ConfigErrors(errors));
    }
    let (Some(kernel), true) = (kernel, !needs_problem || (initial.is_some() && grid.is_some() && time.is_some())) else {
        return Err(ConfigErrors(vec![ConfigError::global("incomplete configuration")]));
    };
    Ok(RunConfig {
        command,
        kernel,
        bulk,
        initial,
        grid,
        time,
        s: experiment.s,
        beta: experiment.beta,
        scaling: experiment.scaling,
        output: experiment.output,
        hash: hex::encode(Sha256::digest(text.as_bytes())),
    })
}
