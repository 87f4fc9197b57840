//! Flat `key = value` run configuration.
//!
//! Recognised keys: `model`, `scheme`, `n`, `L`, `dt`, `tol`, `t_final`,
//! `snap_every`, `out`, `dealias`, `adi_variant` and `param.<name>` for model
//! parameters. Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rdspectral::adi::AdiReaction;
use rdspectral::{GridSpec, IntegrateOptions, ModelSpec, Scheme, StepControl, StepSize};

use crate::{CliError, Result};

const KEYS: [&str; 11] = [
    "model",
    "scheme",
    "n",
    "L",
    "dt",
    "tol",
    "t_final",
    "snap_every",
    "out",
    "dealias",
    "adi_variant",
];

pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_T_FINAL: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    Spectral(Scheme),
    Adi,
}

impl SchemeChoice {
    pub fn name(self) -> &'static str {
        match self {
            Self::Spectral(s) => s.name(),
            Self::Adi => "adi",
        }
    }
}

impl fmt::Display for SchemeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "adi" {
            return Ok(Self::Adi);
        }
        Scheme::from_str(s)
            .map(Self::Spectral)
            .map_err(|_| format!("unknown scheme `{s}` (valid: rk4, ck45, etdrk4, etdrk4b, adi)"))
    }
}

/// Raw key/value pairs, as read from a file and overridden by flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut problems = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) if !k.trim().is_empty() => {
                    map.insert(k.trim().to_string(), v.trim().to_string());
                }
                _ => problems.push(format!("line {}: expected `key = value`, got `{line}`", no + 1)),
            }
        }
        if problems.is_empty() {
            Ok(Self(map))
        } else {
            Err(CliError::Invalid(problems))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

/// A validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: String,
    pub params: Vec<(String, f64)>,
    pub n: usize,
    pub half_length: f64,
    pub scheme: SchemeChoice,
    /// Fixed step, or the initial step for `ck45`.
    pub dt: f64,
    pub tol: f64,
    pub t_final: f64,
    pub snap_every: Option<f64>,
    pub out: PathBuf,
    pub dealias: bool,
    pub adi_variant: AdiReaction,
}

fn parse_num<T: FromStr>(map: &ConfigMap, key: &str, problems: &mut Vec<String>) -> Option<T> {
    let raw = map.get(key)?;
    match raw.parse() {
        Ok(v) => Some(v),
        Err(_) => {
            problems.push(format!("{key}: cannot parse `{raw}`"));
            None
        }
    }
}

impl RunConfig {
    /// Validates `map`, reporting every problem at once.
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let mut problems = Vec::new();
        for key in map.0.keys() {
            if !KEYS.contains(&key.as_str()) && !key.starts_with("param.") {
                problems.push(format!("unknown key `{key}`"));
            }
        }

        let model_name = map.get("model").map(str::to_string);
        if model_name.is_none() {
            problems.push("model: required".into());
        }
        let mut params = Vec::new();
        for (k, v) in &map.0 {
            if let Some(name) = k.strip_prefix("param.") {
                match v.parse::<f64>() {
                    Ok(x) => params.push((name.to_string(), x)),
                    Err(_) => problems.push(format!("{k}: cannot parse `{v}`")),
                }
            }
        }
        let model = model_name
            .as_deref()
            .and_then(|m| match ModelSpec::by_name(m, &params) {
                Ok(spec) => Some(spec),
                Err(e) => {
                    problems.push(format!("model: {e}"));
                    None
                }
            });

        let scheme = match map.get("scheme").unwrap_or("rk4").parse::<SchemeChoice>() {
            Ok(s) => Some(s),
            Err(e) => {
                problems.push(format!("scheme: {e}"));
                None
            }
        };
        if let (Some(SchemeChoice::Adi), Some(m)) = (scheme, &model) {
            if m.name != "fisher2d" {
                problems.push(format!("scheme: adi is only available for fisher2d, not {}", m.name));
            }
        }

        let n = parse_num::<usize>(map, "n", &mut problems).or(model.as_ref().map(|m| m.default_grid.0));
        let half_length = parse_num::<f64>(map, "L", &mut problems).or(model.as_ref().map(|m| m.default_grid.1));
        if let (Some(n), Some(l), Some(m)) = (n, half_length, &model) {
            if let Err(e) = GridSpec::new(n, l, m.dims) {
                problems.push(format!("grid: {e}"));
            }
        }
        let dt = parse_num::<f64>(map, "dt", &mut problems).or(model.as_ref().map(|m| m.default_dt));
        if let Some(dt) = dt {
            if !(dt > 0.0 && dt.is_finite()) {
                problems.push(format!("dt: must be positive, got {dt}"));
            }
        }
        let tol = parse_num::<f64>(map, "tol", &mut problems).unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol < 1.0) {
            problems.push(format!("tol: must lie in (0, 1), got {tol}"));
        }
        let t_final = parse_num::<f64>(map, "t_final", &mut problems).unwrap_or(DEFAULT_T_FINAL);
        if !(t_final >= 0.0 && t_final.is_finite()) {
            problems.push(format!("t_final: must be non-negative, got {t_final}"));
        }
        let snap_every = parse_num::<f64>(map, "snap_every", &mut problems);
        if let Some(s) = snap_every {
            if !(s > 0.0 && s.is_finite()) {
                problems.push(format!("snap_every: must be positive, got {s}"));
            }
        }
        let dealias = match map.get("dealias") {
            None | Some("false") | Some("0") | Some("no") => false,
            Some("true") | Some("1") | Some("yes") => true,
            Some(other) => {
                problems.push(format!("dealias: expected true or false, got `{other}`"));
                false
            }
        };
        let adi_variant = match map.get("adi_variant") {
            None | Some("extrapolated") => AdiReaction::Extrapolated,
            Some("printed") => AdiReaction::AsPrinted,
            Some(other) => {
                problems.push(format!("adi_variant: expected extrapolated or printed, got `{other}`"));
                AdiReaction::Extrapolated
            }
        };

        if !problems.is_empty() {
            return Err(CliError::Invalid(problems));
        }
        let model = model.expect("checked above");
        let scheme = scheme.expect("checked above");
        let out = map
            .get("out")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(format!("runs/{}_{}", model.name, scheme)));
        params.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self {
            model: model.name.clone(),
            params,
            n: n.expect("checked above"),
            half_length: half_length.expect("checked above"),
            scheme,
            dt: dt.expect("checked above"),
            tol,
            t_final,
            snap_every,
            out,
            dealias,
            adi_variant,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(&ConfigMap::parse(text)?)
    }

    pub fn to_map(&self) -> ConfigMap {
        let mut m = ConfigMap::default();
        m.set("model", &self.model);
        m.set("scheme", self.scheme);
        m.set("n", self.n);
        m.set("L", self.half_length);
        m.set("dt", self.dt);
        m.set("tol", self.tol);
        m.set("t_final", self.t_final);
        if let Some(s) = self.snap_every {
            m.set("snap_every", s);
        }
        m.set("out", self.out.display());
        m.set("dealias", self.dealias);
        if self.scheme == SchemeChoice::Adi {
            let v = match self.adi_variant {
                AdiReaction::AsPrinted => "printed",
                AdiReaction::Extrapolated => "extrapolated",
            };
            m.set("adi_variant", v);
        }
        for (k, v) in &self.params {
            m.set(&format!("param.{k}"), v);
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# rdspectral run configuration\n");
        for (k, v) in &self.to_map().0 {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        Ok(ModelSpec::by_name(&self.model, &self.params)?)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let dims = self.model_spec()?.dims;
        Ok(GridSpec::new(self.n, self.half_length, dims)?)
    }

    /// Options for the spectral integrator; `None` for ADI runs.
    pub fn integrate_options(&self) -> Option<IntegrateOptions> {
        let SchemeChoice::Spectral(scheme) = self.scheme else {
            return None;
        };
        let step = if scheme.is_adaptive() {
            StepSize::Adaptive(StepControl::new(self.dt, self.tol))
        } else {
            StepSize::Fixed(self.dt)
        };
        Some(IntegrateOptions {
            scheme,
            step,
            t_final: self.t_final,
            snapshot_every: self.snap_every,
            dealias: self.dealias,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_come_from_the_model() {
        let c = RunConfig::parse("model = gray1d\n").unwrap();
        assert_eq!((c.n, c.half_length, c.dt), (512, 50.0, 0.1));
        assert_eq!(c.scheme, SchemeChoice::Spectral(Scheme::Rk4));
        assert_eq!(c.t_final, DEFAULT_T_FINAL);
        let c = RunConfig::parse("model = auto\nparam.m = 11").unwrap();
        assert_eq!(c.dt, 0.02);
    }

    #[test]
    fn text_round_trip() {
        let c = RunConfig::parse(
            "# comment\nmodel = labyrinthe2d\nscheme = ck45\nn = 64\nL = 100\ndt = 0.05\ntol = 1e-5\n\
             t_final = 12.5\nsnap_every = 2.5\nout = /tmp/x\ndealias = true\nparam.delta = 3.5 # trailing\n",
        )
        .unwrap();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        assert_eq!(c.params, vec![("delta".into(), 3.5)]);
        assert!(c.dealias);
    }

    #[test]
    fn every_problem_is_reported() {
        let err = RunConfig::parse("model = gray1d\nscheme = rk5\nn = 7\ndt = -1\nbogus = 3\nparam.zz = 1").unwrap_err();
        let CliError::Invalid(p) = err else { panic!() };
        let all = p.join("\n");
        assert!(all.contains("rk4, ck45, etdrk4, etdrk4b, adi"), "{all}");
        assert!(all.contains("unknown key `bogus`"));
        assert!(all.contains("dt"));
        assert!(all.contains("`zz`"));
        let err = RunConfig::parse("scheme = rk4\n").unwrap_err();
        assert!(err.to_string().contains("model: required"));
    }

    #[test]
    fn grid_problems_need_a_valid_model() {
        let err = RunConfig::parse("model = gray1d\nn = 7").unwrap_err();
        assert!(err.to_string().contains("grid"), "{err}");
    }

    #[test]
    fn adi_only_for_fisher2d() {
        assert!(RunConfig::parse("model = fisher2d\nscheme = adi").is_ok());
        let err = RunConfig::parse("model = gray2d\nscheme = adi").unwrap_err();
        assert!(err.to_string().contains("only available for fisher2d"));
        let c = RunConfig::parse("model = fisher2d\nscheme = adi\nadi_variant = printed").unwrap();
        assert_eq!(c.adi_variant, AdiReaction::AsPrinted);
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn malformed_lines() {
        assert!(ConfigMap::parse("just words").is_err());
        assert!(ConfigMap::parse("= 3").is_err());
    }
}
