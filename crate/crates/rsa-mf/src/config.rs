//! Run configuration: merged from an optional flat TOML file and CLI flags
//! (flags win), exported into output metadata, and reconstructible from it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Beta, FieldDistribution, ModelSpec};

/// Flat run configuration. Every field is optional so that a config file,
/// CLI flags, and defaults can be merged; validation happens on use.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<String>,
    pub p: Option<u32>,
    pub c: Option<f64>,
    /// "none" | "bimodal" | "gaussian".
    pub field: Option<String>,
    pub h0: Option<f64>,
    pub sigma: Option<f64>,
    pub nodes: Option<usize>,
    pub nu: Option<f64>,
    /// Inverse temperature, a positive number or "inf".
    pub beta: Option<String>,
    pub s: Option<f64>,
    pub lambda: Option<f64>,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub s_step: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_step: Option<f64>,
    /// Comma-separated system sizes for the finite-size scan.
    pub n_list: Option<String>,
    /// Comma-separated inverse temperatures for the rotor-model check.
    pub beta_list: Option<String>,
    pub output: Option<String>,
    /// "csv" | "json".
    pub format: Option<String>,
    pub workers: Option<usize>,
}

macro_rules! overlay_fields {
    ($base:ident, $over:ident; $($field:ident),+ $(,)?) => {
        $(if $over.$field.is_some() { $base.$field = $over.$field.clone(); })+
    };
}

impl RunConfig {
    /// Read a flat TOML file; unknown keys are rejected.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parameter(format!("config file: {e}")))
    }

    /// Overlay `other` on `self`: set fields of `other` win.
    pub fn overlay(mut self, other: &RunConfig) -> Self {
        overlay_fields!(self, other;
            command, p, c, field, h0, sigma, nodes, nu, beta, s, lambda,
            s_min, s_max, s_step, lambda_min, lambda_max, lambda_step,
            n_list, beta_list, output, format, workers);
        self
    }

    fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| Error::Parameter(format!("missing required field {key}")))
    }

    /// Build the validated model description.
    pub fn model_spec(&self) -> Result<ModelSpec> {
        let p = Self::require(self.p, "p")?;
        let c = Self::require(self.c, "c")?;
        let field = match self.field.as_deref().unwrap_or("none") {
            "none" => FieldDistribution::None,
            "bimodal" => FieldDistribution::Bimodal {
                h0: Self::require(self.h0, "h0")?,
            },
            "gaussian" => FieldDistribution::Gaussian {
                sigma: Self::require(self.sigma, "sigma")?,
                nodes: self.nodes.unwrap_or(64),
            },
            other => {
                return Err(Error::Parameter(format!(
                    "field must be none, bimodal or gaussian, got {other}"
                )))
            }
        };
        let spec = ModelSpec::new(p, c, field)?;
        match self.nu {
            Some(nu) => spec.with_nu(nu),
            None => Ok(spec),
        }
    }

    pub fn beta(&self) -> Result<Beta> {
        match self.beta.as_deref() {
            None => Ok(Beta::Infinite),
            Some(text) => text.parse(),
        }
    }

    /// Grid triple (min, max, step) with defaults, validated.
    pub fn lambda_grid(&self) -> Result<Vec<f64>> {
        Self::grid_of(
            self.lambda_min.unwrap_or(0.0),
            self.lambda_max.unwrap_or(1.0),
            self.lambda_step.unwrap_or(0.005),
            "lambda",
        )
    }

    pub fn s_grid(&self) -> Result<Vec<f64>> {
        Self::grid_of(
            self.s_min.unwrap_or(0.0),
            self.s_max.unwrap_or(1.0),
            self.s_step.unwrap_or(0.002),
            "s",
        )
    }

    fn grid_of(lo: f64, hi: f64, step: f64, name: &str) -> Result<Vec<f64>> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Parameter(format!("{name}_step must be > 0, got {step}")));
        }
        if !(lo <= hi) {
            return Err(Error::Parameter(format!(
                "{name} range is empty: [{lo}, {hi}]"
            )));
        }
        Ok(crate::phase::grid(lo, hi, step))
    }

    /// Parse a comma-separated list field.
    pub fn parse_list<T: std::str::FromStr>(text: &str, key: &str) -> Result<Vec<T>> {
        text.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<T>()
                    .map_err(|_| Error::Parameter(format!("bad value {tok:?} in {key}")))
            })
            .collect()
    }

    /// Key-value export for output metadata, keys in declaration order.
    pub fn to_metadata(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("command", self.command.clone());
        push("p", self.p.map(|v| v.to_string()));
        push("c", self.c.map(|v| v.to_string()));
        push("field", self.field.clone());
        push("h0", self.h0.map(|v| v.to_string()));
        push("sigma", self.sigma.map(|v| v.to_string()));
        push("nodes", self.nodes.map(|v| v.to_string()));
        push("nu", self.nu.map(|v| v.to_string()));
        push("beta", self.beta.clone());
        push("s", self.s.map(|v| v.to_string()));
        push("lambda", self.lambda.map(|v| v.to_string()));
        push("s_min", self.s_min.map(|v| v.to_string()));
        push("s_max", self.s_max.map(|v| v.to_string()));
        push("s_step", self.s_step.map(|v| v.to_string()));
        push("lambda_min", self.lambda_min.map(|v| v.to_string()));
        push("lambda_max", self.lambda_max.map(|v| v.to_string()));
        push("lambda_step", self.lambda_step.map(|v| v.to_string()));
        push("n_list", self.n_list.clone());
        push("beta_list", self.beta_list.clone());
        push("format", self.format.clone());
        out
    }

    /// Rebuild a configuration from emitted metadata (inverse of
    /// [`RunConfig::to_metadata`] up to unset fields).
    pub fn from_metadata(meta: &[(String, String)]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        fn num<T: std::str::FromStr>(v: &str, k: &str) -> Result<T> {
            v.parse::<T>()
                .map_err(|_| Error::Parameter(format!("bad metadata value {v:?} for {k}")))
        }
        for (k, v) in meta {
            match k.as_str() {
                "command" => cfg.command = Some(v.clone()),
                "p" => cfg.p = Some(num(v, k)?),
                "c" => cfg.c = Some(num(v, k)?),
                "field" => cfg.field = Some(v.clone()),
                "h0" => cfg.h0 = Some(num(v, k)?),
                "sigma" => cfg.sigma = Some(num(v, k)?),
                "nodes" => cfg.nodes = Some(num(v, k)?),
                "nu" => cfg.nu = Some(num(v, k)?),
                "beta" => cfg.beta = Some(v.clone()),
                "s" => cfg.s = Some(num(v, k)?),
                "lambda" => cfg.lambda = Some(num(v, k)?),
                "s_min" => cfg.s_min = Some(num(v, k)?),
                "s_max" => cfg.s_max = Some(num(v, k)?),
                "s_step" => cfg.s_step = Some(num(v, k)?),
                "lambda_min" => cfg.lambda_min = Some(num(v, k)?),
                "lambda_max" => cfg.lambda_max = Some(num(v, k)?),
                "lambda_step" => cfg.lambda_step = Some(num(v, k)?),
                "n_list" => cfg.n_list = Some(v.clone()),
                "beta_list" => cfg.beta_list = Some(v.clone()),
                "format" => cfg.format = Some(v.clone()),
                // Informational keys (version, axis convention) are not
                // part of the configuration.
                _ => {}
            }
        }
        Ok(cfg)
    }
}
