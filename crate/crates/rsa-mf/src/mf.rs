//! Mean-field free energy and self-consistency for the stoquastic Hamiltonian.
//!
//! All quantities are per site. The disorder/initial-condition average is a
//! weighted sum over site classes; each class contributes through the
//! effective-field magnitude r = sqrt(a^2 + b^2).

use crate::error::{Error, Result};
use crate::model::{site_classes, AnnealPoint, Beta, ModelSpec, SiteClass};

/// ln(2 cosh x), overflow-safe: |x| + ln(1 + e^{-2|x|}).
pub fn ln_2cosh(x: f64) -> f64 {
    x.abs() + (-2.0 * x.abs()).exp().ln_1p()
}

/// Longitudinal (a) and transverse (b) effective fields for one site class.
///
/// a = s p m^{p-1} + s h + (1-s)(1-lambda) epsilon,  b = (1-s) lambda.
pub fn effective_fields(m: f64, point: &AnnealPoint, sc: &SiteClass, spec: &ModelSpec) -> (f64, f64) {
    let s = point.s;
    let a = s * spec.p as f64 * m.powi(spec.p as i32 - 1)
        + s * sc.h
        + (1.0 - s) * (1.0 - point.lambda) * sc.epsilon;
    let b = (1.0 - s) * point.lambda;
    (a, b)
}

/// Single-site term -T ln 2cosh(beta r) for finite beta, -r at beta = inf.
#[inline]
pub(crate) fn site_term(r: f64, beta: Beta) -> f64 {
    match beta {
        Beta::Infinite => -r,
        Beta::Finite(b) => -ln_2cosh(b * r) / b,
    }
}

/// tanh(beta r) weight of the self-consistency; 1 at beta = inf.
#[inline]
pub(crate) fn tanh_weight(r: f64, beta: Beta) -> f64 {
    match beta {
        Beta::Infinite => 1.0,
        Beta::Finite(b) => (b * r).tanh(),
    }
}

pub(crate) fn free_energy_classes(
    m: f64,
    point: &AnnealPoint,
    classes: &[SiteClass],
    p: u32,
    beta: Beta,
) -> f64 {
    let mut f = point.s * (p as f64 - 1.0) * m.powi(p as i32);
    for sc in classes {
        let (a, b) = effective_fields_raw(m, point, sc, p);
        f += sc.weight * site_term((a * a + b * b).sqrt(), beta);
    }
    f
}

pub(crate) fn self_rhs_classes(
    m: f64,
    point: &AnnealPoint,
    classes: &[SiteClass],
    p: u32,
    beta: Beta,
) -> f64 {
    let mut rhs = 0.0;
    for sc in classes {
        let (a, b) = effective_fields_raw(m, point, sc, p);
        let r = (a * a + b * b).sqrt();
        if r == 0.0 {
            // Degenerate class: a = b = 0 at an isolated parameter point; the
            // two sign branches cancel, contribution defined as 0.
            continue;
        }
        rhs += sc.weight * (a / r) * tanh_weight(r, beta);
    }
    rhs
}

#[inline]
fn effective_fields_raw(m: f64, point: &AnnealPoint, sc: &SiteClass, p: u32) -> (f64, f64) {
    let s = point.s;
    let a = s * p as f64 * m.powi(p as i32 - 1)
        + s * sc.h
        + (1.0 - s) * (1.0 - point.lambda) * sc.epsilon;
    (a, (1.0 - s) * point.lambda)
}

fn check_m(m: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&m) {
        return Err(Error::Domain(format!("magnetization must be in [-1,1], got {m}")));
    }
    Ok(())
}

/// Mean-field free energy per site at magnetization `m`.
pub fn free_energy(m: f64, point: &AnnealPoint, spec: &ModelSpec, beta: Beta) -> Result<f64> {
    check_m(m)?;
    beta.validate()?;
    let classes = site_classes(spec)?;
    Ok(free_energy_classes(m, point, &classes, spec.p, beta))
}

/// Right-hand side of the self-consistent equation for `m`.
pub fn self_rhs(m: f64, point: &AnnealPoint, spec: &ModelSpec, beta: Beta) -> Result<f64> {
    check_m(m)?;
    beta.validate()?;
    let classes = site_classes(spec)?;
    Ok(self_rhs_classes(m, point, &classes, spec.p, beta))
}
