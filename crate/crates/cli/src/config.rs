//! INI run configuration.

use crate::presets::{Preset, PresetKind};
use ini::Ini;
use micromorph::assembly::ModelKind;
use micromorph::constitutive::IsotropicParams;
use micromorph::tensor::Vec3;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Read(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("malformed value for `{key}`: `{value}`")]
    Malformed { key: String, value: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("key `{0}` outside any section")]
    NoSection(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub cells: [usize; 3],
    pub lo: Vec3,
    pub hi: Vec3,
    pub params: IsotropicParams,
    pub body_force: Preset,
    pub moment: Preset,
    pub background_stress: Preset,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

const KEYS: &[(&str, &[&str])] = &[
    ("model", &["kind"]),
    ("mesh", &["n", "bounds"]),
    ("params", &["mu_e", "lambda_e", "mu_c", "mu_h", "lambda_h", "alpha1", "alpha2", "alpha3"]),
    ("loads", &["f", "M", "sigma0"]),
    ("solver", &["tol", "max_iter"]),
    ("output", &["dir"]),
];

pub const DEFAULT_TOL: f64 = 1e-10;

struct Entries(Vec<(String, String)>);

impl Entries {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }
}

fn malformed(key: &str, value: &str) -> ConfigError {
    ConfigError::Malformed { key: key.to_string(), value: value.to_string() }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| malformed(key, value))
}

fn finite(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = number(key, value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(malformed(key, value))
    }
}

fn list<T: std::str::FromStr, const N: usize>(key: &str, value: &str) -> Result<[T; N], ConfigError> {
    let parts: Vec<T> = value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| malformed(key, value)))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| malformed(key, value))
}

fn preset(key: &str, value: Option<&str>) -> Result<Preset, ConfigError> {
    let Some(value) = value else {
        return Ok(Preset::zero());
    };
    let mut parts = value.split_whitespace();
    let name = parts.next().unwrap_or("zero");
    let kind: PresetKind = name.parse().map_err(|_| ConfigError::UnknownPreset(name.to_string()))?;
    let amplitude = match parts.next() {
        Some(a) => finite(key, a)?,
        None => 1.0,
    };
    if parts.next().is_some() {
        return Err(malformed(key, value));
    }
    Ok(Preset { kind, amplitude })
}

fn strip_comment(v: &str) -> &str {
    v.split('#').next().unwrap_or("").trim()
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Read(e.to_string()))?;
    let mut entries = Entries(Vec::new());
    for (section, props) in ini.iter() {
        let Some(section) = section else {
            if let Some((k, _)) = props.iter().next() {
                return Err(ConfigError::NoSection(k.to_string()));
            }
            continue;
        };
        let allowed = KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .map(|(_, keys)| *keys)
            .ok_or_else(|| ConfigError::UnknownSection(section.to_string()))?;
        for (k, v) in props.iter() {
            let full = format!("{section}.{k}");
            if !allowed.contains(&k) {
                return Err(ConfigError::UnknownKey(full));
            }
            entries.0.push((full, strip_comment(v).to_string()));
        }
    }

    let model_value = entries.require("model.kind")?;
    let model: ModelKind = model_value.parse().map_err(|_| malformed("model.kind", model_value))?;
    let cells: [usize; 3] = list("mesh.n", entries.require("mesh.n")?)?;
    if cells.contains(&0) {
        return Err(malformed("mesh.n", entries.require("mesh.n")?));
    }
    let (lo, hi) = match entries.get("mesh.bounds") {
        Some(b) => {
            let v: [f64; 6] = list("mesh.bounds", b)?;
            ([v[0], v[1], v[2]], [v[3], v[4], v[5]])
        }
        None => ([0.0; 3], [1.0; 3]),
    };

    let scalar = |key: &str, required: bool| -> Result<f64, ConfigError> {
        match entries.get(key) {
            Some(v) => finite(key, v),
            None if required => Err(ConfigError::Missing(key.to_string())),
            None => Ok(0.0),
        }
    };
    let micro_required = model != ModelKind::Gauge;
    let params = IsotropicParams {
        mu_e: scalar("params.mu_e", true)?,
        lambda_e: scalar("params.lambda_e", true)?,
        mu_c: scalar("params.mu_c", false)?,
        mu_h: scalar("params.mu_h", micro_required)?,
        lambda_h: scalar("params.lambda_h", micro_required)?,
        a1: scalar("params.alpha1", true)?,
        a2: scalar("params.alpha2", true)?,
        a3: scalar("params.alpha3", true)?,
    };

    let tol = match entries.get("solver.tol") {
        Some(v) => {
            let t = finite("solver.tol", v)?;
            if t <= 0.0 {
                return Err(malformed("solver.tol", v));
            }
            t
        }
        None => DEFAULT_TOL,
    };
    let max_iter = entries.get("solver.max_iter").map(|v| number("solver.max_iter", v)).transpose()?;

    Ok(RunConfig {
        model,
        cells,
        lo,
        hi,
        params,
        body_force: preset("loads.f", entries.get("loads.f"))?,
        moment: preset("loads.M", entries.get("loads.M"))?,
        background_stress: preset("loads.sigma0", entries.get("loads.sigma0"))?,
        tol,
        max_iter,
        output_dir: entries.get("output.dir").map(PathBuf::from),
    })
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[model]
kind = relaxed
[mesh]
n = 2 2 2
[params]
mu_e = 1
lambda_e = 1
mu_h = 1
lambda_h = 1
alpha1 = 1
alpha2 = 1
alpha3 = 1
";

    #[test]
    fn minimal_file_uses_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.model, ModelKind::Relaxed);
        assert_eq!(c.cells, [2, 2, 2]);
        assert_eq!(c.tol, 1e-10);
        assert_eq!(c.params.mu_c, 0.0);
        assert_eq!(c.body_force, Preset::zero());
        assert_eq!(c.hi, [1.0; 3]);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = format!("{MINIMAL}mu_x = 2\n");
        assert_eq!(parse_config_str(&text).unwrap_err(), ConfigError::UnknownKey("params.mu_x".into()));
    }

    #[test]
    fn unknown_section_and_preset() {
        assert!(matches!(parse_config_str(&format!("{MINIMAL}[extra]\na = 1\n")), Err(ConfigError::UnknownSection(_))));
        assert!(matches!(
            parse_config_str(&format!("{MINIMAL}[loads]\nf = wobble 2\n")),
            Err(ConfigError::UnknownPreset(_))
        ));
    }

    #[test]
    fn malformed_and_missing() {
        assert!(matches!(
            parse_config_str(&MINIMAL.replace("mu_e = 1", "mu_e = one")),
            Err(ConfigError::Malformed { .. })
        ));
        assert_eq!(
            parse_config_str(&MINIMAL.replace("alpha3 = 1\n", "")).unwrap_err(),
            ConfigError::Missing("params.alpha3".into())
        );
        assert!(parse_config_str(&MINIMAL.replace("n = 2 2 2", "n = 2 2")).is_err());
    }

    #[test]
    fn loads_and_comments() {
        let text = format!("# header\n{MINIMAL}[loads]\nf = trig 2.5 # note\nM = poly\n[solver]\ntol = 1e-8\n");
        let c = parse_config_str(&text).unwrap();
        assert_eq!(c.body_force, Preset { kind: PresetKind::Trig, amplitude: 2.5 });
        assert_eq!(c.moment, Preset { kind: PresetKind::Poly, amplitude: 1.0 });
        assert_eq!(c.tol, 1e-8);
    }
}
