//! Two-order-parameter free energy and stationarity for the Hamiltonian with
//! antiferromagnetic transverse interactions (strength controlled by nu; the
//! stoquastic model is recovered at nu = 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mf::{site_term, tanh_weight};
use crate::model::{site_classes, AnnealPoint, Beta, ModelSpec, SiteClass};

/// Longitudinal and transverse magnetization pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderPair {
    pub mz: f64,
    pub mx: f64,
}

/// Effective fields for one site class in non-stoquastic mode.
///
/// a = p s nu mz^{p-1} + s nu h + (1-s)(1-lambda) epsilon,
/// b = (1-s) lambda - 2 s (1-nu) mx.
pub fn effective_fields_ns(
    pair: &OrderPair,
    point: &AnnealPoint,
    sc: &SiteClass,
    spec: &ModelSpec,
) -> (f64, f64) {
    effective_fields_ns_raw(pair, point, sc, spec.p, point.nu_value())
}

#[inline]
pub(crate) fn effective_fields_ns_raw(
    pair: &OrderPair,
    point: &AnnealPoint,
    sc: &SiteClass,
    p: u32,
    nu: f64,
) -> (f64, f64) {
    let s = point.s;
    let a = p as f64 * s * nu * pair.mz.powi(p as i32 - 1)
        + s * nu * sc.h
        + (1.0 - s) * (1.0 - point.lambda) * sc.epsilon;
    let b = (1.0 - s) * point.lambda - 2.0 * s * (1.0 - nu) * pair.mx;
    (a, b)
}

pub(crate) fn free_energy_ns_classes(
    pair: &OrderPair,
    point: &AnnealPoint,
    classes: &[SiteClass],
    p: u32,
    nu: f64,
    beta: Beta,
) -> f64 {
    let s = point.s;
    let mut f = (p as f64 - 1.0) * s * nu * pair.mz.powi(p as i32)
        - s * (1.0 - nu) * pair.mx * pair.mx;
    for sc in classes {
        let (a, b) = effective_fields_ns_raw(pair, point, sc, p, nu);
        f += sc.weight * site_term((a * a + b * b).sqrt(), beta);
    }
    f
}

pub(crate) fn self_rhs_ns_classes(
    pair: &OrderPair,
    point: &AnnealPoint,
    classes: &[SiteClass],
    p: u32,
    nu: f64,
    beta: Beta,
) -> OrderPair {
    let mut mz = 0.0;
    let mut mx = 0.0;
    for sc in classes {
        let (a, b) = effective_fields_ns_raw(pair, point, sc, p, nu);
        let r = (a * a + b * b).sqrt();
        if r == 0.0 {
            continue;
        }
        let t = tanh_weight(r, beta) / r;
        mz += sc.weight * a * t;
        mx += sc.weight * b * t;
    }
    OrderPair { mz, mx }
}

fn check_pair(pair: &OrderPair) -> Result<()> {
    for (name, v) in [("mz", pair.mz), ("mx", pair.mx)] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} must be in [-1,1], got {v}")));
        }
    }
    Ok(())
}

/// Free energy per site as a function of (mz, mx).
pub fn free_energy_ns(
    pair: &OrderPair,
    point: &AnnealPoint,
    spec: &ModelSpec,
    beta: Beta,
) -> Result<f64> {
    check_pair(pair)?;
    beta.validate()?;
    let classes = site_classes(spec)?;
    Ok(free_energy_ns_classes(pair, point, &classes, spec.p, point.nu_value(), beta))
}

/// Component-wise right-hand sides of the stationarity conditions.
pub fn self_rhs_ns(pair: &OrderPair, point: &AnnealPoint, spec: &ModelSpec) -> Result<OrderPair> {
    check_pair(pair)?;
    let classes = site_classes(spec)?;
    Ok(self_rhs_ns_classes(pair, point, &classes, spec.p, point.nu_value(), Beta::Infinite))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mf;
    use crate::model::FieldDistribution;

    fn ns_spec(p: u32, c: f64, nu: f64) -> ModelSpec {
        ModelSpec::new(p, c, FieldDistribution::None).unwrap().with_nu(nu).unwrap()
    }

    fn ns_point(s: f64, lambda: f64, nu: f64) -> AnnealPoint {
        AnnealPoint::new(s, lambda).unwrap().with_nu(nu).unwrap()
    }

    #[test]
    fn nu_one_reduces_to_stoquastic_fields() {
        let spec = ns_spec(3, 0.8, 1.0);
        let stoq = ModelSpec::new(3, 0.8, FieldDistribution::Bimodal { h0: 0.3 }).unwrap();
        let sc = SiteClass { weight: 0.4, h: 0.3, epsilon: -1.0 };
        for (s, lambda, m) in [(0.2, 0.7, 0.5), (0.9, 0.1, -0.3), (0.5, 0.5, 0.0)] {
            let pt = ns_point(s, lambda, 1.0);
            let pair = OrderPair { mz: m, mx: 0.37 };
            let (a_ns, b_ns) = effective_fields_ns(&pair, &pt, &sc, &spec);
            let (a, b) = mf::effective_fields(m, &AnnealPoint::new(s, lambda).unwrap(), &sc, &stoq);
            assert!((a_ns - a).abs() < 1e-14);
            assert!((b_ns - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pure_transverse_point() {
        let spec = ns_spec(3, 0.8, 0.5);
        let pt = ns_point(0.0, 1.0, 0.5);
        let sc = SiteClass { weight: 1.0, h: 0.0, epsilon: 1.0 };
        let pair = OrderPair { mz: 0.3, mx: -0.8 };
        assert_eq!(effective_fields_ns(&pair, &pt, &sc, &spec), (0.0, 1.0));
        assert!((free_energy_ns(&pair, &pt, &spec, Beta::Infinite).unwrap() - (-1.0)).abs() < 1e-14);
        let rhs = self_rhs_ns(&pair, &pt, &spec).unwrap();
        assert!((rhs.mz, rhs.mx) == (0.0, 1.0));
    }

    #[test]
    fn target_endpoint_substitution() {
        // s=1, lambda=1, nu=0.5, mz=1, mx=0, p=3: a = 3*0.5 = 1.5, b = 0.
        let spec = ns_spec(3, 0.8, 0.5);
        let pt = ns_point(1.0, 1.0, 0.5);
        let sc = SiteClass { weight: 1.0, h: 0.0, epsilon: 1.0 };
        let pair = OrderPair { mz: 1.0, mx: 0.0 };
        let (a, b) = effective_fields_ns(&pair, &pt, &sc, &spec);
        assert!((a - 1.5).abs() < 1e-14);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn nu_one_free_energy_matches_stoquastic() {
        let spec = ns_spec(3, 0.8, 1.0);
        let stoq = ModelSpec::new(3, 0.8, FieldDistribution::None).unwrap();
        for (s, lambda) in [(0.3, 0.4), (0.7, 0.9), (0.0, 1.0), (1.0, 1.0)] {
            let pt = ns_point(s, lambda, 1.0);
            let pt_stoq = AnnealPoint::new(s, lambda).unwrap();
            for m in [-0.9, 0.0, 0.4, 1.0] {
                let pair = OrderPair { mz: m, mx: 0.6 };
                let f_ns = free_energy_ns(&pair, &pt, &spec, Beta::Infinite).unwrap();
                let f = mf::free_energy(m, &pt_stoq, &stoq, Beta::Infinite).unwrap();
                assert!((f_ns - f).abs() < 1e-14);
                let rhs = self_rhs_ns(&pair, &pt, &spec).unwrap();
                let rhs_z = mf::self_rhs(m, &pt_stoq, &stoq, Beta::Infinite).unwrap();
                assert!((rhs.mz - rhs_z).abs() < 1e-14);
                assert!(rhs.mz.abs() <= 1.0 + 1e-15 && rhs.mx.abs() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn mx_rhs_minus_mx_decreasing() {
        // For s(1-nu) > 0 the inner mx equation has a unique fixed point.
        let spec = ns_spec(5, 0.8, 0.3);
        let pt = ns_point(0.6, 0.7, 0.3);
        let classes = site_classes(&spec).unwrap();
        for mz in [-0.5, 0.0, 0.8] {
            let mut prev = f64::INFINITY;
            for i in 0..=40 {
                let mx = -1.0 + 2.0 * i as f64 / 40.0;
                let pair = OrderPair { mz, mx };
                let g = self_rhs_ns_classes(&pair, &pt, &classes, 5, 0.3, Beta::Infinite).mx - mx;
                assert!(g < prev);
                prev = g;
            }
        }
    }

    #[test]
    fn pair_domain_errors() {
        let spec = ns_spec(3, 0.8, 0.5);
        let pt = ns_point(0.5, 0.5, 0.5);
        let bad = OrderPair { mz: 1.5, mx: 0.0 };
        assert!(free_energy_ns(&bad, &pt, &spec, Beta::Infinite).is_err());
    }
}
