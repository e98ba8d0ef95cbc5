//! Scenario configuration files.
//!
//! ```toml
//! [constants]
//! mu = 1.0
//! kappa = 1.0
//! beta = 100.0
//! delta = 0.0
//! L = 1.0
//! theta = 1.0
//!
//! [fields]
//! psi1 = "0"
//! psi2 = "1 + x1^2"
//! T0 = "1 + x2"
//! F1 = "x2"
//! F2 = "0"
//! Q = "0"
//!
//! [window]
//! xmin = -2.0
//! xmax = 2.0
//! ymin = -2.0
//! ymax = 2.0
//! ```
//!
//! Expressions may also be given as bare numbers. `[window]` defaults to
//! `[-2, 2]^2`; every other key is required and unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Constants, InitialFields, ModelError, Scenario, Window};
use crate::fields::{ParseError, ScalarExpr, VectorFieldSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario config: {0}")]
    Syntax(String),
    #[error("missing `[{0}]` section")]
    MissingSection(&'static str),
    #[error("field `{key}`: {source}")]
    Expression {
        key: &'static str,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ExprValue {
    Number(f64),
    Text(String),
}

impl ExprValue {
    fn parse(&self, key: &'static str) -> Result<ScalarExpr, ConfigError> {
        match self {
            ExprValue::Number(v) => Ok(ScalarExpr::constant(*v)),
            ExprValue::Text(s) => s.parse().map_err(|source| ConfigError::Expression { key, source }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldsSection {
    psi1: ExprValue,
    psi2: ExprValue,
    #[serde(rename = "T0")]
    t0: ExprValue,
    #[serde(rename = "F1")]
    f1: ExprValue,
    #[serde(rename = "F2")]
    f2: ExprValue,
    #[serde(rename = "Q")]
    q: ExprValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsSection {
    mu: f64,
    kappa: f64,
    beta: f64,
    delta: f64,
    #[serde(rename = "L")]
    length: f64,
    theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowSection {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    constants: Option<ConstantsSection>,
    fields: Option<FieldsSection>,
    window: Option<WindowSection>,
}

/// A parsed scenario config; keeps the scenario it describes.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let c = raw.constants.ok_or(ConfigError::MissingSection("constants"))?;
        let f = raw.fields.ok_or(ConfigError::MissingSection("fields"))?;
        let window = match raw.window {
            Some(w) => Window::new(w.xmin, w.xmax, w.ymin, w.ymax)?,
            None => Window::default(),
        };
        let constants = Constants {
            mu: c.mu,
            kappa: c.kappa,
            beta: c.beta,
            delta: c.delta,
            length: c.length,
            theta: c.theta,
        };
        let fields = InitialFields {
            psi: VectorFieldSpec::new(f.psi1.parse("psi1")?, f.psi2.parse("psi2")?),
            temp0: f.t0.parse("T0")?,
            force0: VectorFieldSpec::new(f.f1.parse("F1")?, f.f2.parse("F2")?),
            heat_source: f.q.parse("Q")?,
        };
        Ok(Self { scenario: Scenario::new(fields, constants, window)? })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Canonical text form; parses back to an equivalent scenario.
    pub fn to_toml_string(scenario: &Scenario) -> String {
        let c = &scenario.constants;
        let f = &scenario.fields;
        let w = &scenario.window;
        let mut out = String::new();
        let _ = writeln!(out, "[constants]");
        for (k, v) in [
            ("mu", c.mu),
            ("kappa", c.kappa),
            ("beta", c.beta),
            ("delta", c.delta),
            ("L", c.length),
            ("theta", c.theta),
        ] {
            let _ = writeln!(out, "{k} = {v:?}");
        }
        let _ = writeln!(out, "\n[fields]");
        for (k, e) in [
            ("psi1", &f.psi.c1),
            ("psi2", &f.psi.c2),
            ("T0", &f.temp0),
            ("F1", &f.force0.c1),
            ("F2", &f.force0.c2),
            ("Q", &f.heat_source),
        ] {
            let _ = writeln!(out, "{k} = \"{e}\"");
        }
        let _ = writeln!(out, "\n[window]");
        for (k, v) in [("xmin", w.xmin), ("xmax", w.xmax), ("ymin", w.ymin), ("ymax", w.ymax)] {
            let _ = writeln!(out, "{k} = {v:?}");
        }
        out
    }

    /// SHA-256 of the canonical text form, hex encoded.
    pub fn fingerprint(scenario: &Scenario) -> String {
        let digest = Sha256::digest(Self::to_toml_string(scenario).as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"
[constants]
mu = 1
kappa = 1.0
beta = 100.0
delta = 0.0
L = 1.0
theta = 1.0

[fields]
psi1 = 0
psi2 = "1 + x1^2"
T0 = "1 + x2"
F1 = "x2"
F2 = "0"
Q = "0"
"#;

    #[test]
    fn parses_canonical_config() {
        let cfg = ScenarioConfig::from_toml_str(CANONICAL).unwrap();
        let s = &cfg.scenario;
        assert_eq!(s.constants.beta, 100.0);
        assert_eq!(s.window, Window::default());
        assert_eq!(s.fields.psi.eval([2.0, 0.0]).unwrap(), [0.0, 5.0]);
    }

    #[test]
    fn canonical_text_round_trips() {
        let s = ScenarioConfig::from_toml_str(CANONICAL).unwrap().scenario;
        let text = ScenarioConfig::to_toml_string(&s);
        let again = ScenarioConfig::from_toml_str(&text).unwrap().scenario;
        assert_eq!(again, s);
        assert_eq!(ScenarioConfig::fingerprint(&again), ScenarioConfig::fingerprint(&s));
    }

    #[test]
    fn missing_section_is_named() {
        let text = CANONICAL.replace("[constants]", "[constantz]");
        let err = ScenarioConfig::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(_)), "{err}");
        let only_fields: String = CANONICAL.split("[fields]").nth(1).map(|s| format!("[fields]{s}")).unwrap();
        let err = ScenarioConfig::from_toml_str(&only_fields).unwrap_err();
        assert_eq!(err.to_string(), "missing `[constants]` section");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = CANONICAL.replace("theta = 1.0", "theta = 1.0\nalpha = 2.0");
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn bad_expression_names_the_key() {
        let text = CANONICAL.replace("\"1 + x2\"", "\"1 + y\"");
        let err = ScenarioConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().starts_with("field `T0`"), "{err}");
    }

    #[test]
    fn invalid_constants_are_rejected() {
        let text = CANONICAL.replace("mu = 1", "mu = -1");
        assert!(matches!(ScenarioConfig::from_toml_str(&text), Err(ConfigError::Model(_))));
    }
}
