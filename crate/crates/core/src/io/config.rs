use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::amplitude::Backend;
use crate::error::{Error, Result};
use crate::model::{validate_params, PureQubitInit, SiteParams, TimeGrid};
use crate::sweeps::{preset, Observable, SweepSpec, System};
use crate::two_qubit::{BellLikeInit, TwoSiteParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Coherence,
    Nonmarkov,
    Twoqubit,
    Sweep,
    Reproduce,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Coherence => "coherence",
            Mode::Nonmarkov => "nonmarkov",
            Mode::Twoqubit => "twoqubit",
            Mode::Sweep => "sweep",
            Mode::Reproduce => "reproduce",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::parse(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::parse(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

/// Unit of the rates (and of time) in a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Rates in multiples of `gamma1`, times in `1/gamma1`.
    #[default]
    Gamma1,
    /// Rates in MHz, times in microseconds.
    Mhz,
}

/// A run description. Every field is optional so that a file and command-line
/// flags can be layered; [`RunConfig::validate`] checks that the fields the
/// mode needs are present and consistent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<Observable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
}

pub const DEFAULT_T_END: f64 = 15.0;
pub const DEFAULT_POINTS: usize = 1501;
/// Deviation of `|alpha|² + |beta|²` from 1 tolerated in input files.
pub const INPUT_NORM_TOL: f64 = 1e-6;

#[derive(Clone, Copy)]
enum Kind {
    Real,
    Count,
    Word,
    Path,
    List,
}

const KEYS: [(&str, Kind); 26] = [
    ("mode", Kind::Word),
    ("kappa", Kind::Real),
    ("j", Kind::Real),
    ("gamma1", Kind::Real),
    ("gamma2", Kind::Real),
    ("delta", Kind::Real),
    ("omega", Kind::Real),
    ("alpha", Kind::Real),
    ("beta", Kind::Real),
    ("alpha_im", Kind::Real),
    ("beta_im", Kind::Real),
    ("kappa_b", Kind::Real),
    ("j_b", Kind::Real),
    ("gamma2_b", Kind::Real),
    ("delta_b", Kind::Real),
    ("t_end", Kind::Real),
    ("n", Kind::Count),
    ("backend", Kind::Word),
    ("out", Kind::Path),
    ("format", Kind::Word),
    ("vary", Kind::Word),
    ("values", Kind::List),
    ("observable", Kind::Word),
    ("preset", Kind::Word),
    ("out_dir", Kind::Path),
    ("units", Kind::Word),
];

/// Names of all recognised configuration keys.
pub fn config_keys() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|(k, _)| *k)
}

fn parse_error(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        key: key.map(str::to_string),
        message: message.into(),
    }
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    for q in ['"', '\''] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return &s[1..s.len() - 1];
        }
    }
    s
}

fn parse_real(raw: &str) -> Option<f64> {
    unquote(raw).parse::<f64>().ok()
}

fn typed_value(kind: Kind, raw: &str) -> std::result::Result<Value, String> {
    let raw = raw.trim();
    match kind {
        Kind::Real => parse_real(raw)
            .and_then(|x| serde_json::Number::from_f64(x).map(Value::Number))
            .ok_or_else(|| format!("expected a finite number, got `{raw}`")),
        Kind::Count => unquote(raw)
            .parse::<u64>()
            .map(|n| Value::Number(n.into()))
            .map_err(|_| format!("expected a non-negative integer, got `{raw}`")),
        Kind::Word | Kind::Path => {
            let s = unquote(raw);
            if s.is_empty() {
                Err("empty value".into())
            } else {
                Ok(Value::String(s.to_string()))
            }
        }
        Kind::List => {
            let inner = raw.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(raw);
            inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    parse_real(s)
                        .and_then(serde_json::Number::from_f64)
                        .map(Value::Number)
                        .ok_or_else(|| format!("expected a list of numbers, got `{s}`"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Value::Array)
        }
    }
}

/// Splits at top-level commas, leaving bracketed lists intact.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn key_value_map(entries: Vec<(Option<usize>, &str)>) -> Result<Map<String, Value>> {
    let mut map = Map::new();
    let mut seen = BTreeSet::new();
    for (line, entry) in entries {
        let Some(pos) = entry.find(['=', ':']) else {
            return Err(parse_error(line, None, format!("expected `key = value`, got `{}`", entry.trim())));
        };
        let key = unquote(&entry[..pos]);
        let Some(&(_, kind)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(parse_error(line, Some(key), "unknown key"));
        };
        if !seen.insert(key.to_string()) {
            return Err(parse_error(line, Some(key), "duplicate key"));
        }
        let value = typed_value(kind, &entry[pos + 1..]).map_err(|m| parse_error(line, Some(key), m))?;
        map.insert(key.to_string(), value);
    }
    Ok(map)
}

fn from_json_object(map: Map<String, Value>) -> Result<RunConfig> {
    for key in map.keys() {
        if !KEYS.iter().any(|(k, _)| k == key) {
            return Err(parse_error(None, Some(key), "unknown key"));
        }
    }
    // deserialize key by key so errors name the offending key
    for (key, value) in &map {
        let mut single = Map::new();
        single.insert(key.clone(), value.clone());
        serde_json::from_value::<RunConfig>(Value::Object(single))
            .map_err(|e| parse_error(None, Some(key), e.to_string()))?;
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| Error::parse(e.to_string()))
}

impl RunConfig {
    /// Parses configuration text without validating it.
    ///
    /// Accepted forms: a JSON object (optionally a result file whose `meta`
    /// block carries a `config` object), a brace-delimited flow mapping
    /// `{key: value, ...}`, or `key = value` / `key: value` lines with `#`
    /// comments.
    pub fn from_text(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(Error::parse("empty configuration"));
        }
        if trimmed.starts_with('{') {
            if let Ok(Value::Object(map)) = serde_json::from_str::<Value>(trimmed) {
                let map = if map.contains_key("meta") {
                    match map.get("meta").and_then(|m| m.get("config")) {
                        Some(Value::Object(cfg)) => cfg.clone(),
                        _ => return Err(parse_error(None, Some("meta"), "result file carries no run configuration")),
                    }
                } else {
                    map
                };
                return from_json_object(map);
            }
            let inner = trimmed
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or_else(|| Error::parse("unterminated `{`"))?;
            let entries = split_top_level(inner)
                .into_iter()
                .filter(|e| !e.trim().is_empty())
                .map(|e| (None, e))
                .collect();
            return from_json_object(key_value_map(entries)?);
        }
        let entries = text
            .lines()
            .enumerate()
            .map(|(i, l)| (Some(i + 1), l.split('#').next().unwrap_or("")))
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        from_json_object(key_value_map(entries)?)
    }

    /// Field-wise overlay: values set in `other` win.
    pub fn overlay(mut self, other: &RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            mode, kappa, j, gamma1, gamma2, delta, omega, alpha, beta, alpha_im, beta_im, kappa_b, j_b, gamma2_b,
            delta_b, t_end, n, backend, out, format, vary, values, observable, preset, out_dir, units
        );
        self
    }

    pub fn mode(&self) -> Result<Mode> {
        self.mode.ok_or_else(|| parse_error(None, Some("mode"), "missing mode"))
    }

    fn units(&self) -> Units {
        self.units.unwrap_or_default()
    }

    fn gamma1_raw(&self) -> f64 {
        self.gamma1.unwrap_or(1.0)
    }

    fn scale(&self, p: SiteParams) -> Result<SiteParams> {
        let p = validate_params(p)?;
        Ok(match self.units() {
            Units::Gamma1 => p,
            Units::Mhz => p.scaled_to_gamma1(),
        })
    }

    pub fn site_params(&self) -> Result<SiteParams> {
        let kappa = self.kappa.ok_or_else(|| parse_error(None, Some("kappa"), "missing qubit-cavity coupling"))?;
        self.scale(SiteParams {
            kappa,
            j_coupling: self.j.unwrap_or(0.0),
            gamma1: self.gamma1_raw(),
            gamma2: self.gamma2.unwrap_or(0.0),
            detuning: self.delta.unwrap_or(0.0),
            omega: self.omega.unwrap_or(0.0),
        })
    }

    /// Site A from the plain keys, site B from the `_b` keys falling back to
    /// site A.
    pub fn two_site_params(&self) -> Result<TwoSiteParams> {
        let a = self.site_params()?;
        let b = self.scale(SiteParams {
            kappa: self.kappa_b.or(self.kappa).unwrap_or(0.0),
            j_coupling: self.j_b.or(self.j).unwrap_or(0.0),
            gamma1: self.gamma1_raw(),
            gamma2: self.gamma2_b.or(self.gamma2).unwrap_or(0.0),
            detuning: self.delta_b.or(self.delta).unwrap_or(0.0),
            omega: self.omega.unwrap_or(0.0),
        })?;
        TwoSiteParams::new(a, b)
    }

    fn weights(&self, default_alpha: f64) -> (Complex64, Complex64) {
        let alpha = Complex64::new(self.alpha.unwrap_or(default_alpha), self.alpha_im.unwrap_or(0.0));
        let beta = match (self.beta, self.beta_im) {
            (None, None) => Complex64::new((1.0 - alpha.norm_sqr()).max(0.0).sqrt(), 0.0),
            (re, im) => Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)),
        };
        // weights typed with a handful of digits are renormalized; anything
        // further off is left for the state constructors to reject
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sq - 1.0).abs() <= INPUT_NORM_TOL {
            let k = norm_sq.sqrt();
            (alpha / k, beta / k)
        } else {
            (alpha, beta)
        }
    }

    /// `alpha|0> + beta|1>`, by default `|+>`.
    pub fn qubit_init(&self) -> Result<PureQubitInit> {
        let (alpha, beta) = self.weights(FRAC_1_SQRT_2);
        PureQubitInit::new(alpha, beta)
    }

    /// `alpha|00> + beta|11>`, by default `alpha = sqrt(1/3)`.
    pub fn bell_init(&self) -> Result<BellLikeInit> {
        let (alpha, beta) = self.weights((1.0_f64 / 3.0).sqrt());
        BellLikeInit::new(alpha, beta)
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        let t_end = self.t_end.unwrap_or(DEFAULT_T_END);
        let t_end = match self.units() {
            Units::Gamma1 => t_end,
            Units::Mhz => t_end * self.gamma1_raw(),
        };
        TimeGrid::span(t_end, self.n.unwrap_or(DEFAULT_POINTS))
    }

    pub fn backend(&self) -> Backend {
        self.backend.unwrap_or_default()
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    fn uses_two_sites(&self, observable: Observable) -> bool {
        match observable {
            Observable::Coherence | Observable::Blp => false,
            Observable::Concurrence | Observable::EsdTime => true,
            Observable::Trapped => {
                self.kappa_b.is_some() || self.j_b.is_some() || self.gamma2_b.is_some() || self.delta_b.is_some()
            }
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let vary = self.vary.clone().ok_or_else(|| parse_error(None, Some("vary"), "missing swept parameter"))?;
        let values = self.values.clone().ok_or_else(|| parse_error(None, Some("values"), "missing value list"))?;
        let observable = self
            .observable
            .ok_or_else(|| parse_error(None, Some("observable"), "missing observable"))?;
        let system = if self.uses_two_sites(observable) {
            System::TwoSite {
                params: self.two_site_params()?,
                init: self.bell_init()?,
            }
        } else {
            System::Site {
                params: self.site_params()?,
                init: self.qubit_init()?,
            }
        };
        Ok(SweepSpec::new(vary, values, system, observable, self.grid()?)?.with_backend(self.backend()))
    }

    /// Checks that everything the mode needs is present and valid.
    /// Domain errors come back wrapped in [`Error::Validation`].
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Parse { .. } | Error::UnknownPreset(_) => e,
            other => Error::Validation(Box::new(other)),
        };
        match self.mode()? {
            Mode::Simulate | Mode::Coherence | Mode::Nonmarkov => {
                self.site_params().map_err(wrap)?;
                self.qubit_init().map_err(wrap)?;
                self.grid().map_err(wrap)?;
            }
            Mode::Twoqubit => {
                self.two_site_params().map_err(wrap)?;
                self.bell_init().map_err(wrap)?;
                self.grid().map_err(wrap)?;
            }
            Mode::Sweep => {
                self.sweep_spec().map_err(wrap)?;
            }
            Mode::Reproduce => {
                let name = self
                    .preset
                    .as_deref()
                    .ok_or_else(|| parse_error(None, Some("preset"), "missing preset name"))?;
                preset(name)?;
            }
        }
        Ok(())
    }

    /// Pretty JSON with a trailing newline; `from_text` of the result gives
    /// back an equal configuration, and emitting that again gives the same
    /// bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("configuration serializes");
        s.push('\n');
        s
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg = RunConfig::from_text(text)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "{mode: coherence, kappa: 0.24, j: 1.0, gamma1: 1, gamma2: 0.5, alpha: 0.70710678, beta: 0.70710678, t_end: 15, n: 1501}";

    #[test]
    fn minimal_flow_config_is_valid() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.mode, Some(Mode::Coherence));
        assert_eq!(cfg.site_params().unwrap(), SiteParams::resonant(0.24, 1.0, 0.5));
        assert_eq!(cfg.grid().unwrap().len(), 1501);
    }

    #[test]
    fn line_config_with_comments() {
        let text = "# fig 2 point\nmode = coherence\nkappa = 0.24   # weak\nj: 1\nvalues = [0, 0.5, 1]\n";
        let cfg = RunConfig::from_text(text).unwrap();
        assert_eq!(cfg.kappa, Some(0.24));
        assert_eq!(cfg.values, Some(vec![0.0, 0.5, 1.0]));
    }

    #[test]
    fn empty_text_is_a_parse_error() {
        assert!(matches!(parse_config(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_config("  \n "), Err(Error::Parse { .. })));
    }

    #[test]
    fn unnormalized_weights_fail_validation() {
        let err = parse_config("mode = coherence\nkappa = 0.24\nalpha = 0.9\nbeta = 0.9\n").unwrap_err();
        assert!(matches!(err, Error::Validation(ref inner) if matches!(**inner, Error::NotNormalized { .. })));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn errors_carry_line_and_key() {
        match RunConfig::from_text("mode = coherence\nkapa = 0.2\n").unwrap_err() {
            Error::Parse { line, key, .. } => {
                assert_eq!(line, Some(2));
                assert_eq!(key.as_deref(), Some("kapa"));
            }
            e => panic!("{e}"),
        }
        match RunConfig::from_text("mode = coherence\nkappa = abc\n").unwrap_err() {
            Error::Parse { line, key, .. } => assert_eq!((line, key.as_deref()), (Some(2), Some("kappa"))),
            e => panic!("{e}"),
        }
        assert!(matches!(
            RunConfig::from_text(r#"{"mode": "coherence", "extra": 1}"#),
            Err(Error::Parse { key: Some(_), .. })
        ));
        assert!(matches!(RunConfig::from_text("mode = nosuch"), Err(Error::Parse { .. })));
    }

    #[test]
    fn negative_rate_fails_validation() {
        let err = parse_config("mode = coherence\nkappa = -0.1\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let cfg = parse_config(MINIMAL).unwrap();
        let once = cfg.to_json();
        let again = parse_config(&once).unwrap().to_json();
        assert_eq!(once, again);
    }

    #[test]
    fn overlay_prefers_later_values() {
        let file = RunConfig::from_text("mode = coherence\nkappa = 0.24\nj = 1").unwrap();
        let flags = RunConfig {
            j: Some(2.0),
            ..RunConfig::default()
        };
        let merged = file.overlay(&flags);
        assert_eq!((merged.kappa, merged.j), (Some(0.24), Some(2.0)));
    }

    #[test]
    fn mhz_units_are_rescaled() {
        let cfg = parse_config("mode = coherence\nunits = mhz\ngamma1 = 5\nkappa = 1.2\ngamma2 = 2.5\nt_end = 3\nn = 31").unwrap();
        let p = cfg.site_params().unwrap();
        assert!((p.kappa - 0.24).abs() < 1e-15 && (p.gamma2 - 0.5).abs() < 1e-15 && p.gamma1 == 1.0);
        assert_eq!(cfg.grid().unwrap().t_end(), 15.0);
    }

    #[test]
    fn two_site_keys_default_to_site_a() {
        let cfg = parse_config("mode = twoqubit\nkappa = 0.2\nkappa_b = 0.3\nj = 0.5").unwrap();
        let p = cfg.two_site_params().unwrap();
        assert_eq!(p.site_b.kappa, 0.3);
        assert_eq!(p.site_b.j_coupling, 0.5);
        assert!((cfg.bell_init().unwrap().concurrence() - 2.0 * (2.0_f64).sqrt() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reproduce_requires_known_preset() {
        assert!(parse_config("mode = reproduce\npreset = fig3").is_ok());
        assert!(matches!(parse_config("mode = reproduce\npreset = nosuch"), Err(Error::UnknownPreset(_))));
    }
}
