//! Run configuration in a flat `key = value` format with `[section]` headers and
//! `#` comments.
//!
//! ```text
//! [physics]
//! a = 1.0
//! mu = 0.1
//! lambda = 0.0
//! n = 1
//!
//! [grid]
//! L = 2.0
//! N = 256
//!
//! [initial]
//! R = 1.0
//! density = quartic_bump      # quartic_bump | squared_tent | tapered_plateau
//! velocity = zero             # zero | outward | sine
//!
//! [scheme]
//! t_end = 0.1
//! ```
//!
//! Every key is validated where it is read, and errors carry the line of the
//! offending key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::grid::{Geometry, GridSpec};
use crate::initial::{DensityProfile, InitialData, VelocityProfile};
use crate::params::PhysParams;
use crate::solver::{OuterBoundary, Reconstruction, SchemeConfig, ViscousTreatment};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub origin: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.origin, line, self.message),
            None => write!(f, "{}: {}", self.origin, self.message),
        }
    }
}

const SECTIONS: [&str; 5] = ["physics", "grid", "initial", "scheme", "output"];

/// Allowed keys per section and whether they are required.
const KEYS: &[(&str, &str, bool)] = &[
    ("physics", "a", true),
    ("physics", "mu", true),
    ("physics", "lambda", true),
    ("physics", "n", true),
    ("grid", "L", true),
    ("grid", "N", true),
    ("initial", "R", true),
    ("initial", "density", false),
    ("initial", "amplitude", false),
    ("initial", "width", false),
    ("initial", "velocity", false),
    ("initial", "velocity_scale", false),
    ("scheme", "cfl", false),
    ("scheme", "rho_cut", false),
    ("scheme", "t_end", false),
    ("scheme", "output_every", false),
    ("scheme", "viscous", false),
    ("scheme", "reconstruction", false),
    ("scheme", "boundary", false),
    ("scheme", "clip_budget", false),
    ("output", "dir", false),
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// Parsed but not yet validated `section.key -> value` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    origin: String,
    entries: BTreeMap<(String, String), Entry>,
}

impl RawConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let err = |line: usize, message: String| ConfigError {
            origin: origin.to_string(),
            line: Some(line),
            message,
        };
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, format!("malformed section header `{content}`")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(
                        line,
                        format!(
                            "unknown section [{name}]; expected one of {}",
                            SECTIONS.map(|s| format!("[{s}]")).join(" ")
                        ),
                    ));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = &section else {
                return Err(err(line, format!("key `{key}` appears before any section")));
            };
            if key.is_empty() || value.is_empty() {
                return Err(err(
                    line,
                    format!("expected `key = value`, got `{content}`"),
                ));
            }
            if !KEYS.iter().any(|(s, k, _)| s == sec && *k == key) {
                return Err(err(line, format!("unknown key `{key}` in [{sec}]")));
            }
            let slot = (sec.clone(), key.to_string());
            if let Some(prev) = entries.get(&slot) {
                let prev: &Entry = prev;
                return Err(err(
                    line,
                    format!(
                        "duplicate key `{key}` in [{sec}] (first set on line {})",
                        prev.line.unwrap_or(0)
                    ),
                ));
            }
            entries.insert(
                slot,
                Entry {
                    value: value.to_string(),
                    line: Some(line),
                },
            );
        }
        for (sec, key, required) in KEYS {
            if *required && !entries.contains_key(&(sec.to_string(), key.to_string())) {
                return Err(ConfigError {
                    origin: origin.to_string(),
                    line: None,
                    message: format!("missing required key `{key}` in [{sec}]"),
                });
            }
        }
        Ok(Self {
            origin: origin.to_string(),
            entries,
        })
    }

    /// Resolves `section.key` or a bare key that names exactly one allowed key.
    pub fn resolve_key(&self, key: &str) -> Result<(String, String), ConfigError> {
        let fail = |message: String| ConfigError {
            origin: self.origin.clone(),
            line: None,
            message,
        };
        let matches: Vec<(&str, &str)> = match key.split_once('.') {
            Some((s, k)) => KEYS
                .iter()
                .filter(|(ks, kk, _)| *ks == s && *kk == k)
                .map(|(s, k, _)| (*s, *k))
                .collect(),
            None => KEYS
                .iter()
                .filter(|(_, kk, _)| *kk == key)
                .map(|(s, k, _)| (*s, *k))
                .collect(),
        };
        match matches.as_slice() {
            [(s, k)] => Ok((s.to_string(), k.to_string())),
            [] => Err(fail(format!("unknown key `{key}`"))),
            _ => Err(fail(format!("ambiguous key `{key}`; use section.key"))),
        }
    }

    /// Replaces (or adds) the value of `key`, which may be `section.key` or a bare key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let slot = self.resolve_key(key)?;
        let line = self.entries.get(&slot).and_then(|e| e.line);
        self.entries.insert(
            slot,
            Entry {
                value: value.to_string(),
                line,
            },
        );
        Ok(())
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn error_at(&self, section: &str, key: &str, message: String) -> ConfigError {
        ConfigError {
            origin: self.origin.clone(),
            line: self.get(section, key).and_then(|e| e.line),
            message,
        }
    }

    fn parse_value<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|_| {
                self.error_at(
                    section,
                    key,
                    format!(
                        "`{key}` expects {}, got `{}`",
                        std::any::type_name::<T>(),
                        e.value
                    ),
                )
            }),
        }
    }

    fn number(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.parse_value::<f64>(section, key)?.unwrap_or(default);
        if !v.is_finite() {
            return Err(self.error_at(section, key, format!("`{key}` must be finite, got {v}")));
        }
        Ok(v)
    }

    fn required_number(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        self.number(section, key, f64::NAN)
    }

    fn count(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.parse_value::<usize>(section, key)?.unwrap_or(default))
    }

    fn choice<'a>(
        &self,
        section: &str,
        key: &str,
        default: &'a str,
        allowed: &[&'a str],
    ) -> Result<&'a str, ConfigError> {
        let Some(e) = self.get(section, key) else {
            return Ok(default);
        };
        allowed
            .iter()
            .find(|a| **a == e.value)
            .copied()
            .ok_or_else(|| {
                self.error_at(
                    section,
                    key,
                    format!(
                        "`{key}` must be one of {}, got `{}`",
                        allowed.join(", "),
                        e.value
                    ),
                )
            })
    }

    pub fn build(&self) -> Result<RunConfig, ConfigError> {
        // physics
        let n = self.count("physics", "n", 0)?;
        let a = self.required_number("physics", "a")?;
        let mu = self.required_number("physics", "mu")?;
        let lambda = self.required_number("physics", "lambda")?;
        let params = PhysParams::new(a, mu, lambda, n).map_err(|e| {
            // Attribute the failure to the key whose condition is checked first.
            let key = if n != 1 && n != 2 {
                "n"
            } else if a <= 0.0 {
                "a"
            } else if mu <= 0.0 {
                "mu"
            } else {
                "lambda"
            };
            self.error_at("physics", key, e.to_string())
        })?;
        let geometry = Geometry::from_dimension(n).expect("dimension checked above");

        // grid
        let extent = self.required_number("grid", "L")?;
        let cells = self.count("grid", "N", 0)?;
        let grid = GridSpec::new(geometry, extent, cells);
        grid.validate().map_err(|e| {
            let key = if extent <= 0.0 { "L" } else { "N" };
            self.error_at("grid", key, e.to_string())
        })?;

        // initial data
        let radius = self.required_number("initial", "R")?;
        if !(radius > 0.0 && radius < extent) {
            return Err(self.error_at(
                "initial",
                "R",
                format!(
                    "support radius must satisfy 0 < R < L so the support lies inside the \
                     domain, got R = {radius}, L = {extent}"
                ),
            ));
        }
        let amplitude = self.number("initial", "amplitude", 1.0)?;
        let density = match self.choice(
            "initial",
            "density",
            "quartic_bump",
            &["quartic_bump", "squared_tent", "tapered_plateau"],
        )? {
            "quartic_bump" => DensityProfile::QuarticBump { amplitude },
            "squared_tent" => DensityProfile::SquaredTent { amplitude },
            _ => DensityProfile::TaperedPlateau {
                amplitude,
                width: self.number("initial", "width", 0.25 * radius)?,
            },
        };
        let scale = self.number("initial", "velocity_scale", 1.0)?;
        let velocity =
            match self.choice("initial", "velocity", "zero", &["zero", "outward", "sine"])? {
                "zero" => VelocityProfile::Zero,
                "outward" => VelocityProfile::Outward { scale },
                _ => VelocityProfile::Sine { scale },
            };
        let initial = InitialData::new(geometry, radius, density, velocity).map_err(|e| {
            let key = match e.to_string() {
                m if m.contains("taper") => "width",
                m if m.contains("velocity scale") => "velocity_scale",
                m if m.contains("velocity") => "velocity",
                m if m.contains("amplitude") || m.contains("identically zero") => "amplitude",
                _ => "density",
            };
            self.error_at("initial", key, e.to_string())
        })?;

        // scheme
        let d = SchemeConfig::default();
        let scheme = SchemeConfig {
            cfl: self.number("scheme", "cfl", d.cfl)?,
            rho_cut: self.number("scheme", "rho_cut", d.rho_cut)?,
            t_end: self.number("scheme", "t_end", d.t_end)?,
            output_every: self.count("scheme", "output_every", d.output_every)?,
            viscous: match self.choice(
                "scheme",
                "viscous",
                "implicit",
                &["implicit", "explicit"],
            )? {
                "implicit" => ViscousTreatment::Implicit,
                _ => ViscousTreatment::Explicit,
            },
            reconstruction: match self.choice(
                "scheme",
                "reconstruction",
                "muscl",
                &["muscl", "first_order"],
            )? {
                "muscl" => Reconstruction::Muscl,
                _ => Reconstruction::FirstOrder,
            },
            boundary: match self.choice(
                "scheme",
                "boundary",
                "vacuum",
                &["vacuum", "reflecting"],
            )? {
                "vacuum" => OuterBoundary::Vacuum,
                _ => OuterBoundary::Reflecting,
            },
            clip_budget: self.number("scheme", "clip_budget", d.clip_budget)?,
        };
        scheme.validate().map_err(|e| {
            let m = e.to_string();
            let key = ["cfl", "rho_cut", "t_end", "output_every", "clip"]
                .into_iter()
                .find(|k| m.contains(k))
                .map(|k| if k == "clip" { "clip_budget" } else { k })
                .unwrap_or("cfl");
            self.error_at("scheme", key, m)
        })?;

        let output_dir = self.get("output", "dir").map(|e| PathBuf::from(&e.value));
        Ok(RunConfig {
            params,
            grid,
            initial,
            scheme,
            output_dir,
        })
    }
}

/// Everything needed for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PhysParams,
    pub grid: GridSpec,
    pub initial: InitialData,
    pub scheme: SchemeConfig,
    pub output_dir: Option<PathBuf>,
}

/// Parses and validates `text`; `origin` names the source in error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig, ConfigError> {
    RawConfig::parse(text, origin)?.build()
}
