use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use susyj::complex::parse_complex;
use susyj::models::{
    model_custom, model_inverse_square, model_rank2, model_single, model_two_level, CustomModel, ModelBundle, RoiSpec,
};
use susyj::operators::GridSpec;
use susyj::quadrature::QuadratureSpec;
use susyj::{ComplexScalar, C64};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Intertwine,
    Chains,
    Binorms,
    Jordan,
    Index,
    Symmetry,
    Roi,
    Confluence,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Intertwine,
        Suite::Chains,
        Suite::Binorms,
        Suite::Jordan,
        Suite::Index,
        Suite::Symmetry,
        Suite::Roi,
        Suite::Confluence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Intertwine => "intertwine",
            Suite::Chains => "chains",
            Suite::Binorms => "binorms",
            Suite::Jordan => "jordan",
            Suite::Index => "index",
            Suite::Symmetry => "symmetry",
            Suite::Roi => "roi",
            Suite::Confluence => "confluence",
        }
    }
}

/// A real number or an `{re, im}` object.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Complex(ComplexScalar),
}

impl ParamValue {
    pub fn complex(self) -> C64 {
        match self {
            ParamValue::Real(r) => C64::new(r, 0.0),
            ParamValue::Complex(c) => c.into(),
        }
    }

    /// Plain numbers or `a+bi` literals.
    pub fn parse(text: &str) -> Result<Self, String> {
        if let Ok(r) = text.trim().parse::<f64>() {
            return Ok(ParamValue::Real(r));
        }
        parse_complex(text).map(|c| ParamValue::Complex(c.into()))
    }
}

pub const DEFAULT_TOLERANCES: [(&str, f64); 14] = [
    ("annihilation", 1e-9),
    ("binorms", 1e-6),
    ("chains", 1e-9),
    ("confluence_dyad", 1e-5),
    ("confluence_exact", 1e-9),
    ("confluence_fd", 1e-6),
    ("intertwine", 1e-8),
    ("jordan", 1e-7),
    ("limits", 1e-6),
    ("roi", 1e-4),
    ("roi_threshold", 1e-3),
    ("smatrix", 1e-8),
    ("symmetry", 1e-7),
    ("zero_modes", 1e-8),
];

/// Everything a run needs; a JSON file of this shape is accepted by `--config`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<String>,
    pub params: BTreeMap<String, ParamValue>,
    pub custom: Option<CustomModel>,
    pub suites: Vec<Suite>,
    pub grid: Option<GridSpec>,
    pub quadrature: Option<QuadratureSpec>,
    pub tolerances: BTreeMap<String, f64>,
    pub roi: Option<RoiSpec>,
    pub k_values: Option<Vec<f64>>,
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
}

pub fn parse_grid(text: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("grid `{text}` must read x_min:x_max:n"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad grid bound `{s}`"));
    let n: usize = n.trim().parse().map_err(|_| format!("bad grid size `{n}`"))?;
    GridSpec::new(num(a)?, num(b)?, n).map_err(|e| e.to_string())
}

pub fn parse_tolerance(text: &str) -> Result<(String, f64), String> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| format!("tolerance `{text}` must read name=value"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("bad tolerance value `{v}`"))?;
    Ok((k.trim().to_string(), v))
}

pub fn parse_axis(text: &str) -> Result<(String, Vec<ParamValue>), String> {
    let (name, values) = text
        .split_once('=')
        .ok_or_else(|| format!("axis `{text}` must read name=v1,v2,..."))?;
    let values: Vec<ParamValue> = values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(ParamValue::parse)
        .collect::<Result<_, _>>()?;
    Ok((name.trim().to_string(), values))
}

impl RunConfig {
    pub fn model_name(&self) -> &str {
        self.model.as_deref().unwrap_or("rank2")
    }

    pub fn suites(&self) -> Vec<Suite> {
        let mut s = if self.suites.is_empty() {
            Suite::ALL.to_vec()
        } else {
            self.suites.clone()
        };
        s.sort();
        s.dedup();
        s
    }

    /// Defaults merged with overrides; unknown names and non-positive values are rejected.
    pub fn tolerances(&self) -> Result<BTreeMap<String, f64>, CliError> {
        let mut t: BTreeMap<String, f64> = DEFAULT_TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        for (k, &v) in &self.tolerances {
            if !t.contains_key(k) {
                return Err(CliError::Config(format!("unknown tolerance `{k}`")));
            }
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("tolerance `{k}` must be positive, got {v}")));
            }
            t.insert(k.clone(), v);
        }
        Ok(t)
    }

    /// Model parameters with defaults filled in.
    pub fn resolved_params(&self) -> Result<BTreeMap<String, ParamValue>, CliError> {
        let z05 = ParamValue::Complex(C64::new(0.0, 0.5).into());
        let defaults: Vec<(&str, ParamValue)> = match self.model_name() {
            "rank2" => vec![("alpha", ParamValue::Real(1.0)), ("x0", ParamValue::Real(0.0)), ("z", z05)],
            "two_level" => vec![
                ("alpha", ParamValue::Real(1.0)),
                ("beta", ParamValue::Real(0.3)),
                ("x0", ParamValue::Real(0.0)),
                ("z", z05),
            ],
            "single" => vec![("alpha", ParamValue::Real(1.0)), ("x0", ParamValue::Real(0.0))],
            "inverse_square" => vec![
                ("z", ParamValue::Complex(C64::new(0.0, 1.0).into())),
                ("n", ParamValue::Real(1.0)),
            ],
            "custom" => vec![],
            other => return Err(CliError::Config(format!("unknown model `{other}`"))),
        };
        let mut out: BTreeMap<String, ParamValue> = defaults.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        for (k, &v) in &self.params {
            if !out.contains_key(k) {
                return Err(CliError::Config(format!(
                    "parameter `{k}` does not apply to model `{}`",
                    self.model_name()
                )));
            }
            out.insert(k.clone(), v);
        }
        Ok(out)
    }

    pub fn build(&self) -> Result<ModelBundle, CliError> {
        let p = self.resolved_params()?;
        let c = |k: &str| p[k].complex();
        let real = |k: &str| -> Result<f64, CliError> {
            let v = c(k);
            if v.im != 0.0 {
                return Err(CliError::Model(susyj::Error::ParameterDomain(format!("{k} must be real"))));
            }
            Ok(v.re)
        };
        let mut bundle = match self.model_name() {
            "rank2" => model_rank2(real("alpha")?, real("x0")?, c("z"))?,
            "two_level" => model_two_level(c("alpha"), real("beta")?, real("x0")?, c("z"))?,
            "single" => model_single(real("alpha")?, real("x0")?)?,
            "inverse_square" => {
                let n = real("n")?;
                if n.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&n) {
                    return Err(CliError::Model(susyj::Error::ParameterDomain(format!(
                        "n must be a positive integer, got {n}"
                    ))));
                }
                model_inverse_square(c("z"), n as u32)?
            }
            _ => {
                let mut spec = self
                    .custom
                    .clone()
                    .ok_or_else(|| CliError::Config("model `custom` needs a `custom` block in --config".into()))?;
                if spec.grid.is_none() {
                    spec.grid = self.grid;
                }
                model_custom(&spec)?
            }
        };
        if let Some(g) = self.grid {
            bundle.grid = g;
        }
        Ok(bundle)
    }
}
