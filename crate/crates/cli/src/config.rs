//! Run configuration: an INI-like `key = value` text format with sections.
//!
//! ```text
//! scenario = four-level
//!
//! [bath]
//! gamma0 = 1e-3
//! temperature = 20*delta_ref
//! ```
//!
//! Every key has a scenario-dependent default; [`parse_config`] reports which
//! ones were defaulted so the run report can echo them.

use std::fmt;
use std::str::FromStr;

use crossnav_core::models::BathSubstitution;
use crossnav_core::numfmt::format_number;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: syntax error: {message}: `{text}`")]
    Syntax { line: usize, column: usize, message: String, text: String },
    #[error("line {line}: unknown key `{key}` in section [{section}]: `{text}`")]
    UnknownKey { line: usize, section: String, key: String, text: String },
    #[error("line {line}: `{key}` out of range: {message}: `{text}`")]
    OutOfRange { line: usize, key: String, message: String, text: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    Spectrum,
    LzCheck,
    TwoLevelSs,
    TwoLevelAdiabatic,
    FourLevel,
    GammaSweep,
    PathSearch,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Spectrum,
        Scenario::LzCheck,
        Scenario::TwoLevelSs,
        Scenario::TwoLevelAdiabatic,
        Scenario::FourLevel,
        Scenario::GammaSweep,
        Scenario::PathSearch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spectrum => "spectrum",
            Scenario::LzCheck => "lz-check",
            Scenario::TwoLevelSs => "two-level-ss",
            Scenario::TwoLevelAdiabatic => "two-level-adiabatic",
            Scenario::FourLevel => "four-level",
            Scenario::GammaSweep => "gamma-sweep",
            Scenario::PathSearch => "path-search",
        }
    }

    fn default_kind(self) -> ModelKindName {
        match self {
            Scenario::LzCheck | Scenario::TwoLevelSs | Scenario::TwoLevelAdiabatic => ModelKindName::Lz,
            _ => ModelKindName::TwoSpin,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}` (expected one of {})", scenario_names()))
    }
}

pub fn scenario_names() -> String {
    Scenario::ALL.map(Scenario::name).join(", ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKindName {
    Lz,
    TwoSpin,
}

impl ModelKindName {
    fn name(self) -> &'static str {
        match self {
            ModelKindName::Lz => "lz",
            ModelKindName::TwoSpin => "two-spin",
        }
    }
}

/// A value that is either computed at run time or fixed in the config.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Auto<T> {
    Auto,
    Fixed(T),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Temperature {
    Absolute(f64),
    /// Multiple of the reference gap.
    TimesDeltaRef(f64),
}

impl Temperature {
    pub fn resolve(self, delta_ref: f64) -> f64 {
        match self {
            Temperature::Absolute(t) => t,
            Temperature::TimesDeltaRef(k) => k * delta_ref,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepAction {
    Diabatic,
    Swap,
    Adiabatic,
}

/// One protocol step: an action at a crossing site, sites numbered from 1
/// in increasing `lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepRef {
    pub action: StepAction,
    pub site: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub scenario: Scenario,
    // [model]
    pub kind: ModelKindName,
    pub alpha: f64,
    pub delta: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub coupling: f64,
    pub bath_substitution: BathSubstitution,
    pub scan_min: f64,
    pub scan_max: f64,
    pub scan_points: usize,
    pub lambda_ref: Auto<f64>,
    // [bath]
    pub gamma0: Vec<f64>,
    pub temperature: Temperature,
    // [schedule]
    pub lambda0: f64,
    pub velocity_multiples: Vec<f64>,
    pub swap_fraction: f64,
    pub diabatic_multiple: f64,
    pub adiabatic_fraction: f64,
    pub window_half_widths: f64,
    pub transit_multiple: f64,
    pub steps: Vec<StepRef>,
    pub lambda_start: Auto<f64>,
    pub lambda_end: Auto<f64>,
    pub start_label: Auto<usize>,
    pub goal_label: Auto<usize>,
    pub max_steps: usize,
    /// Required action pattern (e.g. `D-S-D-S`) when discovering labels.
    pub pattern: Option<String>,
    pub tie_tolerance: f64,
    pub threshold: f64,
    pub delta_ref: Auto<f64>,
    // [integrator]
    pub dt_max: f64,
    pub eta: f64,
    pub sample_stride: usize,
    // [output]
    pub dir: String,
}

impl RunSpec {
    pub fn defaults(scenario: Scenario) -> Self {
        let two_level = scenario.default_kind() == ModelKindName::Lz;
        Self {
            scenario,
            kind: scenario.default_kind(),
            alpha: 1.0,
            delta: 1.0,
            delta_a: 50.0,
            delta_b: 2.5,
            coupling: 25.0,
            bath_substitution: BathSubstitution::Literal,
            scan_min: if two_level { -10.0 } else { -3.0 },
            scan_max: if two_level { 10.0 } else { 3.0 },
            scan_points: 601,
            lambda_ref: Auto::Auto,
            gamma0: match scenario {
                Scenario::TwoLevelSs | Scenario::TwoLevelAdiabatic => vec![1e-3, 1e-2],
                Scenario::FourLevel => vec![1e-3],
                Scenario::GammaSweep => vec![1e-5, 1e-4, 1e-3, 1e-2],
                _ => vec![],
            },
            temperature: Temperature::TimesDeltaRef(if two_level { 10.0 } else { 20.0 }),
            lambda0: 20.0,
            velocity_multiples: vec![0.25, 1.0, 4.0],
            swap_fraction: 1.0,
            diabatic_multiple: 100.0,
            adiabatic_fraction: 0.01,
            window_half_widths: 10.0,
            transit_multiple: 100.0,
            steps: vec![
                StepRef { action: StepAction::Diabatic, site: 1 },
                StepRef { action: StepAction::Swap, site: 2 },
                StepRef { action: StepAction::Diabatic, site: 2 },
                StepRef { action: StepAction::Swap, site: 1 },
            ],
            lambda_start: Auto::Auto,
            lambda_end: Auto::Auto,
            start_label: Auto::Fixed(1),
            goal_label: Auto::Fixed(2),
            max_steps: 4,
            pattern: Some("D-S-D-S".into()),
            tie_tolerance: 1e-3,
            threshold: 0.95,
            delta_ref: Auto::Auto,
            dt_max: 0.05,
            eta: 0.01,
            sample_stride: 10,
            dir: format!("output/{}", scenario.name()),
        }
    }

    /// Canonical text form; `parse_config(&spec.serialize())` reproduces
    /// `spec`.
    pub fn serialize(&self) -> String {
        let mut out = format!("scenario = {}\n", self.scenario);
        for section in SECTIONS {
            out.push_str(&format!("\n[{section}]\n"));
            for key in KEYS.iter().filter(|k| k.section == section) {
                out.push_str(&format!("{} = {}\n", key.name, (key.get)(self)));
            }
        }
        out
    }
}

pub fn format_steps(steps: &[StepRef]) -> String {
    if steps.is_empty() {
        return "none".into();
    }
    steps
        .iter()
        .map(|s| {
            let code = match s.action {
                StepAction::Diabatic => 'D',
                StepAction::Swap => 'S',
                StepAction::Adiabatic => 'A',
            };
            format!("{code}@{}", s.site)
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_steps(v: &str) -> Result<Vec<StepRef>, String> {
    if v == "none" {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|item| {
            let item = item.trim();
            let (code, site) = item.split_once('@').ok_or_else(|| format!("step `{item}` is not ACTION@SITE"))?;
            let action = match code.trim() {
                "D" => StepAction::Diabatic,
                "S" => StepAction::Swap,
                "A" => StepAction::Adiabatic,
                other => return Err(format!("unknown action `{other}` (expected D, S or A)")),
            };
            let site: usize = site.trim().parse().map_err(|_| format!("bad site in `{item}`"))?;
            if site == 0 {
                return Err("sites are numbered from 1".into());
            }
            Ok(StepRef { action, site })
        })
        .collect()
}

const SECTIONS: [&str; 5] = ["model", "bath", "schedule", "integrator", "output"];

fn fmt_list(v: &[f64]) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.iter().map(|x| format_number(*x)).collect::<Vec<_>>().join(", ")
    }
}

fn fmt_auto_f(v: &Auto<f64>) -> String {
    match v {
        Auto::Auto => "auto".into(),
        Auto::Fixed(x) => format_number(*x),
    }
}

fn fmt_auto_u(v: &Auto<usize>) -> String {
    match v {
        Auto::Auto => "auto".into(),
        Auto::Fixed(x) => x.to_string(),
    }
}

type Setter = fn(&mut RunSpec, &str) -> Result<(), String>;

struct Key {
    section: &'static str,
    name: &'static str,
    get: fn(&RunSpec) -> String,
    set: Setter,
}

fn number(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` is not finite"))
    }
}

fn positive(v: &str) -> Result<f64, String> {
    let x = number(v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn integer(v: &str) -> Result<usize, String> {
    v.parse().map_err(|_| format!("`{v}` is not a non-negative integer"))
}

fn auto_or<T>(v: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Auto<T>, String> {
    if v == "auto" {
        Ok(Auto::Auto)
    } else {
        f(v).map(Auto::Fixed)
    }
}

fn number_list(v: &str) -> Result<Vec<f64>, String> {
    if v == "none" {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| number(x.trim())).collect()
}

fn fraction_open_closed(v: &str) -> Result<f64, String> {
    let x = number(v)?;
    if x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err(format!("must be in (0, 1], got {v}"))
    }
}

fn label(v: &str) -> Result<usize, String> {
    let k = integer(v)?;
    if k >= 1 {
        Ok(k)
    } else {
        Err("labels are numbered from 1".into())
    }
}

macro_rules! key {
    ($section:literal, $name:ident, $get:expr, $set:expr) => {
        Key {
            section: $section,
            name: stringify!($name),
            get: |s: &RunSpec| -> String {
                let f: fn(&RunSpec) -> String = $get;
                f(s)
            },
            set: |s: &mut RunSpec, v: &str| -> Result<(), String> {
                let f: fn(&str) -> Result<_, String> = $set;
                s.$name = f(v)?;
                Ok(())
            },
        }
    };
}

const KEYS: &[Key] = &[
    key!("model", kind, |s| s.kind.name().into(), |v| match v {
        "lz" => Ok(ModelKindName::Lz),
        "two-spin" => Ok(ModelKindName::TwoSpin),
        _ => Err(format!("expected lz or two-spin, got `{v}`")),
    }),
    key!("model", alpha, |s| format_number(s.alpha), |v| {
        let x = number(v)?;
        if x != 0.0 { Ok(x) } else { Err("alpha must be non-zero".into()) }
    }),
    key!("model", delta, |s| format_number(s.delta), positive),
    key!("model", delta_a, |s| format_number(s.delta_a), positive),
    key!("model", delta_b, |s| format_number(s.delta_b), number),
    key!("model", coupling, |s| format_number(s.coupling), number),
    key!("model", bath_substitution, |s| match s.bath_substitution {
        BathSubstitution::Literal => "literal".into(),
        BathSubstitution::SigmaXCoefficient => "sigma-x-coefficient".into(),
    }, |v| match v {
        "literal" => Ok(BathSubstitution::Literal),
        "sigma-x-coefficient" => Ok(BathSubstitution::SigmaXCoefficient),
        _ => Err(format!("expected literal or sigma-x-coefficient, got `{v}`")),
    }),
    key!("model", scan_min, |s| format_number(s.scan_min), number),
    key!("model", scan_max, |s| format_number(s.scan_max), number),
    key!("model", scan_points, |s| s.scan_points.to_string(), |v| {
        let n = integer(v)?;
        if n >= 3 { Ok(n) } else { Err("need at least 3 scan points".into()) }
    }),
    key!("model", lambda_ref, |s| fmt_auto_f(&s.lambda_ref), |v| auto_or(v, number)),
    key!("bath", gamma0, |s| fmt_list(&s.gamma0), |v| {
        let list = number_list(v)?;
        match list.iter().find(|g| **g < 0.0) {
            Some(g) => Err(format!("gamma0 must be >= 0, got {}", format_number(*g))),
            None => Ok(list),
        }
    }),
    key!("bath", temperature, |s| match s.temperature {
        Temperature::Absolute(t) => format_number(t),
        Temperature::TimesDeltaRef(k) => format!("{}*delta_ref", format_number(k)),
    }, |v| {
        let t = match v.strip_suffix("*delta_ref") {
            Some(k) => Temperature::TimesDeltaRef(positive(k.trim())?),
            None => Temperature::Absolute(positive(v)?),
        };
        Ok(t)
    }),
    key!("schedule", lambda0, |s| format_number(s.lambda0), positive),
    key!("schedule", velocity_multiples, |s| fmt_list(&s.velocity_multiples), |v| {
        let list = number_list(v)?;
        if list.iter().all(|x| *x > 0.0) { Ok(list) } else { Err("velocity multiples must be positive".into()) }
    }),
    key!("schedule", swap_fraction, |s| format_number(s.swap_fraction), fraction_open_closed),
    key!("schedule", diabatic_multiple, |s| format_number(s.diabatic_multiple), |v| {
        let x = number(v)?;
        if x > 1.0 { Ok(x) } else { Err(format!("must exceed 1, got {v}")) }
    }),
    key!("schedule", adiabatic_fraction, |s| format_number(s.adiabatic_fraction), |v| {
        let x = number(v)?;
        if x > 0.0 && x < 1.0 { Ok(x) } else { Err(format!("must be in (0, 1), got {v}")) }
    }),
    key!("schedule", window_half_widths, |s| format_number(s.window_half_widths), positive),
    key!("schedule", transit_multiple, |s| format_number(s.transit_multiple), positive),
    key!("schedule", steps, |s| format_steps(&s.steps), parse_steps),
    key!("schedule", lambda_start, |s| fmt_auto_f(&s.lambda_start), |v| auto_or(v, number)),
    key!("schedule", lambda_end, |s| fmt_auto_f(&s.lambda_end), |v| auto_or(v, number)),
    key!("schedule", start_label, |s| fmt_auto_u(&s.start_label), |v| auto_or(v, label)),
    key!("schedule", goal_label, |s| fmt_auto_u(&s.goal_label), |v| auto_or(v, label)),
    key!("schedule", max_steps, |s| s.max_steps.to_string(), |v| {
        let n = integer(v)?;
        if n <= 6 { Ok(n) } else { Err(format!("must be at most 6, got {n}")) }
    }),
    key!("schedule", pattern, |s| s.pattern.clone().unwrap_or_else(|| "any".into()), |v| {
        if v == "any" {
            return Ok(None);
        }
        if v.split('-').all(|c| c == "D" || c == "S") {
            Ok(Some(v.to_string()))
        } else {
            Err(format!("expected `any` or D/S codes joined by dashes, got `{v}`"))
        }
    }),
    key!("schedule", tie_tolerance, |s| format_number(s.tie_tolerance), |v| {
        let x = number(v)?;
        if x >= 0.0 { Ok(x) } else { Err("must be >= 0".into()) }
    }),
    key!("schedule", threshold, |s| format_number(s.threshold), |v| {
        let x = number(v)?;
        if (0.0..=1.0).contains(&x) { Ok(x) } else { Err(format!("must be in [0, 1], got {v}")) }
    }),
    key!("schedule", delta_ref, |s| fmt_auto_f(&s.delta_ref), |v| auto_or(v, positive)),
    key!("integrator", dt_max, |s| format_number(s.dt_max), positive),
    key!("integrator", eta, |s| format_number(s.eta), |v| {
        let x = number(v)?;
        if x > 0.0 && x <= 0.1 { Ok(x) } else { Err(format!("must be in (0, 0.1], got {v}")) }
    }),
    key!("integrator", sample_stride, |s| s.sample_stride.to_string(), |v| {
        let n = integer(v)?;
        if n >= 1 { Ok(n) } else { Err("must be at least 1".into()) }
    }),
    key!("output", dir, |s| s.dir.clone(), |v| {
        if v.is_empty() { Err("output directory must not be empty".into()) } else { Ok(v.to_string()) }
    }),
];

/// Section owning `key`, if the key exists.
pub fn section_of(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|k| k.name == key).map(|k| k.section)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedConfig {
    pub spec: RunSpec,
    /// `section.key` names left at their defaults.
    pub defaulted: Vec<String>,
}

struct Line<'a> {
    number: usize,
    text: &'a str,
    kind: LineKind<'a>,
}

enum LineKind<'a> {
    Section(&'a str),
    Pair { key: &'a str, value: &'a str },
}

fn tokenize(text: &str) -> Result<Vec<Line<'_>>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let column = content.len() - content.trim_start().len() + 1;
        let syntax = |message: &str, column: usize| ConfigError::Syntax {
            line: number,
            column,
            message: message.into(),
            text: raw.to_string(),
        };
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| syntax("unterminated section header", column))?.trim();
            if !SECTIONS.contains(&name) {
                return Err(syntax(&format!("unknown section [{name}]"), column));
            }
            out.push(Line { number, text: raw, kind: LineKind::Section(name) });
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| syntax("expected `key = value`", column))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
            return Err(syntax("keys are snake_case identifiers", column));
        }
        if value.is_empty() {
            let eq = content.find('=').unwrap_or(0) + 2;
            return Err(syntax("missing value", eq));
        }
        out.push(Line { number, text: raw, kind: LineKind::Pair { key, value } });
    }
    Ok(out)
}

/// Parse and validate a config. `fallback` is used when the text names no
/// scenario.
pub fn parse_config_with(text: &str, fallback: Option<Scenario>) -> Result<ParsedConfig, ConfigError> {
    let lines = tokenize(text)?;

    // The scenario picks the defaults, so find it first.
    let mut scenario = None;
    let mut section: Option<&str> = None;
    for line in &lines {
        match line.kind {
            LineKind::Section(name) => section = Some(name),
            LineKind::Pair { key: "scenario", value } if section.is_none() => {
                let sc = value.parse::<Scenario>().map_err(|message| ConfigError::OutOfRange {
                    line: line.number,
                    key: "scenario".into(),
                    message,
                    text: line.text.into(),
                })?;
                scenario = Some(sc);
            }
            _ => {}
        }
    }
    let scenario = scenario
        .or(fallback)
        .ok_or_else(|| ConfigError::Invalid("config does not name a scenario (`scenario = ...`)".into()))?;

    let mut spec = RunSpec::defaults(scenario);
    let mut set: Vec<(&str, &str)> = Vec::new();
    let mut section: Option<&str> = None;
    for line in &lines {
        match line.kind {
            LineKind::Section(name) => section = Some(name),
            LineKind::Pair { key, value } => {
                let Some(sec) = section else {
                    if key == "scenario" {
                        continue;
                    }
                    return Err(ConfigError::UnknownKey {
                        line: line.number,
                        section: "top level".into(),
                        key: key.into(),
                        text: line.text.into(),
                    });
                };
                let descriptor = KEYS.iter().find(|k| k.section == sec && k.name == key).ok_or_else(|| {
                    ConfigError::UnknownKey { line: line.number, section: sec.into(), key: key.into(), text: line.text.into() }
                })?;
                (descriptor.set)(&mut spec, value).map_err(|message| ConfigError::OutOfRange {
                    line: line.number,
                    key: key.into(),
                    message,
                    text: line.text.into(),
                })?;
                set.push((sec, key));
            }
        }
    }
    validate(&spec)?;
    let defaulted = KEYS
        .iter()
        .filter(|k| !set.contains(&(k.section, k.name)))
        .map(|k| format!("{}.{}", k.section, k.name))
        .collect();
    Ok(ParsedConfig { spec, defaulted })
}

pub fn parse_config(text: &str) -> Result<ParsedConfig, ConfigError> {
    parse_config_with(text, None)
}

fn validate(spec: &RunSpec) -> Result<(), ConfigError> {
    let invalid = |m: String| Err(ConfigError::Invalid(m));
    if spec.scan_min >= spec.scan_max {
        return invalid(format!("scan_min ({}) must be below scan_max ({})", spec.scan_min, spec.scan_max));
    }
    if spec.scenario != Scenario::Spectrum && spec.kind != spec.scenario.default_kind() {
        return invalid(format!("scenario {} requires kind = {}", spec.scenario, spec.scenario.default_kind().name()));
    }
    if spec.kind == ModelKindName::TwoSpin && spec.delta_b == 0.0 {
        return invalid("delta_b = 0 closes the crossings".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_lz_check_uses_defaults() {
        let parsed = parse_config("scenario = lz-check\n").unwrap();
        let s = &parsed.spec;
        assert_eq!(s.scenario, Scenario::LzCheck);
        assert_eq!((s.alpha, s.delta, s.lambda0), (1.0, 1.0, 20.0));
        assert_eq!(s.velocity_multiples, vec![0.25, 1.0, 4.0]);
        assert!(parsed.defaulted.contains(&"schedule.lambda0".to_string()));
        assert_eq!(parsed.defaulted.len(), KEYS.len());
    }

    #[test]
    fn four_level_open_setup() {
        let text = "scenario = four-level\n[model]\ndelta_a = 50\ndelta_b = 2.5\ncoupling = 25\n\
                    [bath]\ngamma0 = 1e-3\ntemperature = 20*delta_ref  # reference value\n";
        let parsed = parse_config(text).unwrap();
        assert_eq!(parsed.spec.temperature, Temperature::TimesDeltaRef(20.0));
        assert_eq!(parsed.spec.gamma0, vec![1e-3]);
        assert!(!parsed.defaulted.contains(&"model.delta_a".to_string()));
    }

    #[test]
    fn negative_gamma_is_out_of_range() {
        let err = parse_config("scenario = four-level\n[bath]\ngamma0 = -1\n").unwrap_err();
        match err {
            ConfigError::OutOfRange { line, key, .. } => {
                assert_eq!(line, 3);
                assert_eq!(key, "gamma0");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_lines() {
        assert!(matches!(
            parse_config("scenario = spectrum\n[model]\nbogus = 1\n"),
            Err(ConfigError::UnknownKey { line: 3, .. })
        ));
        assert!(matches!(parse_config("scenario = spectrum\n[model\n"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!(parse_config("scenario = spectrum\nwhat\n"), Err(ConfigError::Syntax { line: 2, .. })));
        assert!(matches!(parse_config("scenario = spectrum\n[model]\nalpha =\n"), Err(ConfigError::Syntax { line: 3, column: 8, .. })));
        assert!(matches!(parse_config("scenario = fig9\n"), Err(ConfigError::OutOfRange { line: 1, .. })));
        assert!(matches!(parse_config("[model]\nalpha = 2\n"), Err(ConfigError::Invalid(_))));
        assert!(matches!(parse_config("scenario = lz-check\n[model]\nkind = two-spin\n"), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn serialize_round_trips() {
        for sc in Scenario::ALL {
            let mut spec = RunSpec::defaults(sc);
            spec.gamma0 = vec![0.1 + 0.2, 1e-7];
            spec.lambda_start = Auto::Fixed(-1.5643527987140184);
            spec.temperature = Temperature::Absolute(48.6);
            let back = parse_config(&spec.serialize()).unwrap();
            assert_eq!(back.spec, spec);
            assert!(back.defaulted.is_empty());
        }
    }

    #[test]
    fn steps_syntax() {
        let s = parse_steps("D@1, S@2,A@3").unwrap();
        assert_eq!(s[2], StepRef { action: StepAction::Adiabatic, site: 3 });
        assert_eq!(format_steps(&s), "D@1,S@2,A@3");
        assert!(parse_steps("X@1").is_err());
        assert!(parse_steps("D1").is_err());
        assert!(parse_steps("D@0").is_err());
        assert_eq!(parse_steps("none").unwrap(), vec![]);
    }
}
