//! Problem definition: model parameters, annealing coordinates, and the
//! site-class decomposition used for disorder and initial-condition averages.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_hermite;

/// Distribution of the longitudinal random field h_i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldDistribution {
    None,
    /// h_i = +-h0 with probability 1/2 each.
    Bimodal { h0: f64 },
    /// h_i ~ N(0, sigma^2), evaluated by Gauss-Hermite quadrature.
    Gaussian { sigma: f64, nodes: usize },
}

/// Model definition: interaction order p, initial up-spin fraction c,
/// field distribution, and optional antiferromagnetic-transverse strength nu.
///
/// `nu` absent means nu = 1 (stoquastic Hamiltonian).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub p: u32,
    pub c: f64,
    pub field: FieldDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl ModelSpec {
    pub fn new(p: u32, c: f64, field: FieldDistribution) -> Result<Self> {
        let spec = ModelSpec { p, c, field, nu: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        self.nu = Some(nu);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::Parameter(format!("p must be >= 2, got {}", self.p)));
        }
        if !(0.0..=1.0).contains(&self.c) {
            return Err(Error::Parameter(format!("c must be in [0,1], got {}", self.c)));
        }
        if let Some(nu) = self.nu {
            if !(0.0..=1.0).contains(&nu) {
                return Err(Error::Parameter(format!("nu must be in [0,1], got {nu}")));
            }
        }
        match self.field {
            FieldDistribution::None => {}
            FieldDistribution::Bimodal { h0 } => {
                if !(h0 > 0.0) || !h0.is_finite() {
                    return Err(Error::Parameter(format!("h0 must be > 0, got {h0}")));
                }
            }
            FieldDistribution::Gaussian { sigma, nodes } => {
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::Parameter(format!("sigma must be > 0, got {sigma}")));
                }
                if nodes < 1 || nodes > crate::quad::MAX_NODES {
                    return Err(Error::Parameter(format!(
                        "gauss-hermite nodes must be in 1..={}, got {nodes}",
                        crate::quad::MAX_NODES
                    )));
                }
            }
        }
        Ok(())
    }

    /// Effective nu; 1 when absent (stoquastic).
    pub fn nu_value(&self) -> f64 {
        self.nu.unwrap_or(1.0)
    }

    /// True when the antiferromagnetic transverse term is actually active.
    pub fn is_nonstoquastic(&self) -> bool {
        self.nu_value() < 1.0
    }
}

/// One disorder/initial-condition class: all sites sharing (h, epsilon).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteClass {
    pub weight: f64,
    pub h: f64,
    /// Initial spin, +-1.
    pub epsilon: f64,
}

/// A location (s, lambda) on the annealing control plane; nu present only
/// in non-stoquastic mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealPoint {
    pub s: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl AnnealPoint {
    /// Coordinates are clamped to the unit box; NaN is rejected.
    pub fn new(s: f64, lambda: f64) -> Result<Self> {
        if s.is_nan() || lambda.is_nan() {
            return Err(Error::Parameter("anneal point coordinates may not be NaN".into()));
        }
        Ok(AnnealPoint { s: s.clamp(0.0, 1.0), lambda: lambda.clamp(0.0, 1.0), nu: None })
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        if nu.is_nan() {
            return Err(Error::Parameter("nu may not be NaN".into()));
        }
        self.nu = Some(nu.clamp(0.0, 1.0));
        Ok(self)
    }

    /// Point for a spec: carries nu exactly when the spec does.
    pub fn for_spec(s: f64, lambda: f64, spec: &ModelSpec) -> Result<Self> {
        let point = AnnealPoint::new(s, lambda)?;
        match spec.nu {
            Some(nu) => point.with_nu(nu),
            None => Ok(point),
        }
    }

    pub fn nu_value(&self) -> f64 {
        self.nu.unwrap_or(1.0)
    }
}

/// Inverse temperature: finite beta or the zero-temperature limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn validate(&self) -> Result<()> {
        match self {
            Beta::Finite(b) if !(*b > 0.0) || !b.is_finite() => {
                Err(Error::Parameter(format!("beta must be > 0, got {b}")))
            }
            _ => Ok(()),
        }
    }
}

impl std::str::FromStr for Beta {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinite") {
            return Ok(Beta::Infinite);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Parameter(format!("beta must be a positive real or 'inf', got {s:?}")))?;
        let beta = Beta::Finite(v);
        beta.validate()?;
        Ok(beta)
    }
}

impl std::fmt::Display for Beta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => write!(f, "inf"),
        }
    }
}

/// Decompose the disorder/initial-condition average into weighted site classes.
///
/// Weights sum to 1 and the epsilon=+1 subset carries total weight c.
pub fn site_classes(spec: &ModelSpec) -> Result<Vec<SiteClass>> {
    spec.validate()?;
    let c = spec.c;
    match spec.field {
        FieldDistribution::None => Ok(vec![
            SiteClass { weight: c, h: 0.0, epsilon: 1.0 },
            SiteClass { weight: 1.0 - c, h: 0.0, epsilon: -1.0 },
        ]),
        FieldDistribution::Bimodal { h0 } => Ok(vec![
            SiteClass { weight: c / 2.0, h: h0, epsilon: 1.0 },
            SiteClass { weight: (1.0 - c) / 2.0, h: h0, epsilon: -1.0 },
            SiteClass { weight: c / 2.0, h: -h0, epsilon: 1.0 },
            SiteClass { weight: (1.0 - c) / 2.0, h: -h0, epsilon: -1.0 },
        ]),
        FieldDistribution::Gaussian { sigma, nodes } => {
            let (t, w) = gauss_hermite(nodes)?;
            let total: f64 = w.iter().sum();
            let mut classes = Vec::with_capacity(2 * nodes);
            for k in 0..nodes {
                // Change of variables h = sqrt(2) sigma t maps the Gaussian
                // average onto the e^{-t^2} rule; weights normalized to 1.
                let h = std::f64::consts::SQRT_2 * sigma * t[k];
                let wk = w[k] / total;
                classes.push(SiteClass { weight: c * wk, h, epsilon: 1.0 });
                classes.push(SiteClass { weight: (1.0 - c) * wk, h, epsilon: -1.0 });
            }
            Ok(classes)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weight_checks(spec: &ModelSpec) {
        let classes = site_classes(spec).unwrap();
        let total: f64 = classes.iter().map(|sc| sc.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let up: f64 = classes.iter().filter(|sc| sc.epsilon > 0.0).map(|sc| sc.weight).sum();
        assert!((up - spec.c).abs() < 1e-12);
    }

    #[test]
    fn zero_field_classes() {
        let spec = ModelSpec::new(3, 0.7, FieldDistribution::None).unwrap();
        let classes = site_classes(&spec).unwrap();
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0], SiteClass { weight: 0.7, h: 0.0, epsilon: 1.0 });
        assert!((classes[1].weight - 0.3).abs() < 1e-15);
        assert_eq!((classes[1].h, classes[1].epsilon), (0.0, -1.0));
        weight_checks(&spec);
    }

    #[test]
    fn bimodal_classes() {
        let spec = ModelSpec::new(3, 0.8, FieldDistribution::Bimodal { h0: 0.5 }).unwrap();
        let classes = site_classes(&spec).unwrap();
        assert_eq!(classes.len(), 4);
        let expect = [
            (0.4, 0.5, 1.0),
            (0.1, 0.5, -1.0),
            (0.4, -0.5, 1.0),
            (0.1, -0.5, -1.0),
        ];
        for (sc, (w, h, e)) in classes.iter().zip(expect) {
            assert!((sc.weight - w).abs() < 1e-15);
            assert_eq!(sc.h, h);
            assert_eq!(sc.epsilon, e);
        }
        weight_checks(&spec);
    }

    #[test]
    fn gaussian_two_node_classes() {
        let spec = ModelSpec::new(3, 0.5, FieldDistribution::Gaussian { sigma: 1.0, nodes: 2 }).unwrap();
        let classes = site_classes(&spec).unwrap();
        assert_eq!(classes.len(), 4);
        // Two-point rule: nodes +-1/sqrt(2) scaled by sqrt(2) sigma give h = +-1,
        // each with normalized weight 1/2, split equally by c = 1/2.
        for sc in &classes {
            assert!((sc.h.abs() - 1.0).abs() < 1e-13);
            assert!((sc.weight - 0.25).abs() < 1e-13);
        }
        weight_checks(&spec);
    }

    #[test]
    fn gaussian_many_nodes_normalized() {
        let spec =
            ModelSpec::new(5, 0.8, FieldDistribution::Gaussian { sigma: 0.5, nodes: 64 }).unwrap();
        weight_checks(&spec);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(ModelSpec::new(1, 0.5, FieldDistribution::None).is_err());
        assert!(ModelSpec::new(3, 1.3, FieldDistribution::None).is_err());
        assert!(ModelSpec::new(3, 0.5, FieldDistribution::Bimodal { h0: -1.0 }).is_err());
        assert!(ModelSpec::new(3, 0.5, FieldDistribution::Gaussian { sigma: 0.0, nodes: 8 }).is_err());
        assert!(ModelSpec::new(3, 0.5, FieldDistribution::None).unwrap().with_nu(1.5).is_err());
    }

    #[test]
    fn anneal_point_clamps_and_rejects_nan() {
        let pt = AnnealPoint::new(1.2, -0.1).unwrap();
        assert_eq!((pt.s, pt.lambda), (1.0, 0.0));
        assert!(AnnealPoint::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn beta_parsing() {
        assert_eq!("inf".parse::<Beta>().unwrap(), Beta::Infinite);
        assert_eq!("100".parse::<Beta>().unwrap(), Beta::Finite(100.0));
        assert!("-1".parse::<Beta>().is_err());
        assert!("abc".parse::<Beta>().is_err());
    }
}
