//! Equilibrium free energy of the spin-vector model (planar rotors replacing
//! qubits) and its zero-temperature agreement with the quantum mean field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mf::{effective_fields, free_energy_classes};
use crate::model::{site_classes, AnnealPoint, Beta, ModelSpec};
use crate::solver::{global_min_cfg, SolverConfig};

/// Series/asymptotic crossover for ln I0; both branches agree to 1e-12 here.
const I0_CROSSOVER: f64 = 20.0;

/// ln I0(x), the log of the modified Bessel function of the first kind,
/// to relative accuracy 1e-12.
///
/// Power series below the crossover, scaled asymptotic series above.
pub fn log_bessel_i0(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("log_bessel_i0 requires x >= 0, got {x}")));
    }
    if x < I0_CROSSOVER {
        // I0(x) = sum_k (x/2)^{2k} / (k!)^2.
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        Ok(sum.ln())
    } else {
        // I0(x) ~ e^x / sqrt(2 pi x) * sum_k t_k, t_0 = 1,
        // t_k = t_{k-1} (2k-1)^2 / (8 k x); truncate at the smallest term.
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            let next = term * ((2 * k - 1) * (2 * k - 1)) as f64 / (8.0 * k as f64 * x);
            if next >= term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        Ok(x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln())
    }
}

/// Free energy of the rotor model with the per-class field magnitudes kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmcEval {
    pub f: f64,
    /// sqrt(a^2 + b^2) per site class.
    pub z_per_class: Vec<f64>,
    pub beta: f64,
}

/// Rotor-model free energy per site:
/// f = s(p-1)m^p - (1/beta) [ln(2 pi I0(beta z))] averaged over classes.
pub fn svmc_free_energy(
    m: f64,
    point: &AnnealPoint,
    spec: &ModelSpec,
    beta: f64,
) -> Result<SvmcEval> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be a positive real, got {beta}")));
    }
    if !(-1.0..=1.0).contains(&m) {
        return Err(Error::Domain(format!("magnetization must be in [-1,1], got {m}")));
    }
    let classes = site_classes(spec)?;
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    let mut f = point.s * (spec.p as f64 - 1.0) * m.powi(spec.p as i32);
    let mut z_per_class = Vec::with_capacity(classes.len());
    for sc in &classes {
        let (a, b) = effective_fields(m, point, sc, spec);
        let z = (a * a + b * b).sqrt();
        z_per_class.push(z);
        f -= sc.weight * (ln_2pi + log_bessel_i0(beta * z)?) / beta;
    }
    Ok(SvmcEval { f, z_per_class, beta })
}

/// One row of the rotor-vs-quantum zero-temperature comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub beta: f64,
    /// max over the point grid of |f_svmc(beta) - f_quantum(T=0)|, with m at
    /// the quantum minimizer.
    pub max_gap: f64,
}

/// Compare the rotor free energy against the quantum T=0 free energy over a
/// point grid, per beta. The gap decays like (ln beta)/beta.
pub fn svmc_quantum_gap(
    point_grid: &[AnnealPoint],
    spec: &ModelSpec,
    beta_list: &[f64],
) -> Result<Vec<GapRow>> {
    spec.validate()?;
    let classes = site_classes(spec)?;
    let cfg = SolverConfig::default();
    // Quantum minimizer and T=0 free energy per grid point.
    let mut reference = Vec::with_capacity(point_grid.len());
    for point in point_grid {
        let branch = global_min_cfg(point, spec, Beta::Infinite, &cfg)?;
        let f0 = free_energy_classes(branch.m(), point, &classes, spec.p, Beta::Infinite);
        reference.push((branch.m(), f0));
    }
    let mut rows = Vec::with_capacity(beta_list.len());
    for &beta in beta_list {
        let mut max_gap = 0.0_f64;
        for (point, &(m, f0)) in point_grid.iter().zip(&reference) {
            let eval = svmc_free_energy(m, point, spec, beta)?;
            max_gap = max_gap.max((eval.f - f0).abs());
        }
        rows.push(GapRow { beta, max_gap });
    }
    Ok(rows)
}
