//! Phase-transition location and classification on the (s, lambda) plane:
//! sweeps, first-order line tracing with break detection, magnetization
//! jumps, critical initial-overlap thresholds, and the closed-form and
//! analytic special cases at lambda = 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{site_classes, AnnealPoint, Beta, FieldDistribution, ModelSpec, SiteClass};
use crate::solver::{
    global_min_cfg, inner_mx_solve_classes, Branch, BranchOrder, BranchSource, SolverConfig,
};

/// First-order transitions jump in m; second-order transitions are continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionOrder {
    First,
    Second,
}

impl std::fmt::Display for TransitionOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransitionOrder::First => write!(f, "first"),
            TransitionOrder::Second => write!(f, "second"),
        }
    }
}

/// A located phase transition at fixed lambda.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub lambda: f64,
    pub s_star: f64,
    pub order: TransitionOrder,
    /// |m_high - m_low|, the jump in the global order parameter.
    pub delta_m: f64,
    /// Global-minimum order parameter just below s_star.
    pub m_low: f64,
    /// Global-minimum order parameter just above s_star.
    pub m_high: f64,
}

/// First-order transition line over a lambda grid, with break intervals
/// (lambda ranges where no first-order transition exists along s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionLine {
    /// Points ordered by (lambda, s_star); a lambda may carry several points.
    pub points: Vec<TransitionPoint>,
    /// Disjoint [lambda_lo, lambda_hi] intervals with no transition.
    pub breaks: Vec<(f64, f64)>,
}

/// Scan resolution and classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseConfig {
    /// s resolution of global-minimum scans.
    pub s_step: f64,
    /// lambda resolution of traced lines.
    pub lambda_step: f64,
    /// Minimum grid-to-grid change in m that triggers transition refinement.
    pub detect: f64,
    /// Jump threshold separating first from second order.
    pub eps_jump: f64,
    /// Steepness threshold (maximum grid-step change in m) above which a
    /// continuous crossover still counts as part of the transition line.
    /// Tuned for the default `s_step`; near the endpoint of a first-order
    /// line the jump dips below `eps_jump` while the crossover stays much
    /// steeper than anywhere transition-free.
    pub steep: f64,
    pub solver: SolverConfig,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            s_step: 0.002,
            lambda_step: 0.005,
            detect: 5e-3,
            eps_jump: 1e-3,
            steep: 0.048,
            solver: SolverConfig::scan(),
        }
    }
}

/// Ascending grid over [lo, hi] with the given step (endpoint included).
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    let mut g: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
    if let Some(last) = g.last_mut() {
        *last = hi;
    }
    g
}

/// Global minimum at every s of the grid, for fixed lambda.
pub fn sweep_s(lambda: f64, spec: &ModelSpec, s_grid: &[f64]) -> Result<Vec<(f64, Branch)>> {
    sweep_s_cfg(lambda, spec, s_grid, &PhaseConfig::default())
}

pub fn sweep_s_cfg(
    lambda: f64,
    spec: &ModelSpec,
    s_grid: &[f64],
    cfg: &PhaseConfig,
) -> Result<Vec<(f64, Branch)>> {
    spec.validate()?;
    let mut out: Vec<(usize, f64, Branch)> = s_grid
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let point = AnnealPoint::for_spec(s, lambda, spec)?;
            Ok((i, s, global_min_cfg(&point, spec, Beta::Infinite, &cfg.solver)?))
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|e| e.0);
    Ok(out.into_iter().map(|(_, s, b)| (s, b)).collect())
}

/// Bisect the global-branch switch inside `bracket` at fixed lambda.
///
/// Returns `None` when the global branch is the same at both ends. The
/// crossing is localized well below 1e-8 in s; the jump is classified second
/// order when it falls under `eps_jump`.
pub fn locate_transition(
    lambda: f64,
    spec: &ModelSpec,
    bracket: (f64, f64),
) -> Result<Option<TransitionPoint>> {
    locate_transition_cfg(lambda, spec, bracket, &PhaseConfig::default())
}

pub fn locate_transition_cfg(
    lambda: f64,
    spec: &ModelSpec,
    bracket: (f64, f64),
    cfg: &PhaseConfig,
) -> Result<Option<TransitionPoint>> {
    spec.validate()?;
    let (mut s_lo, mut s_hi) = bracket;
    let m_at = |s: f64| -> Result<f64> {
        let point = AnnealPoint::for_spec(s, lambda, spec)?;
        Ok(global_min_cfg(&point, spec, Beta::Infinite, &cfg.solver)?.m())
    };
    let mut m_lo = m_at(s_lo)?;
    let mut m_hi = m_at(s_hi)?;
    if (m_hi - m_lo).abs() < cfg.eps_jump {
        return Ok(None);
    }
    while s_hi - s_lo > 1e-10 {
        let mid = 0.5 * (s_lo + s_hi);
        let m_mid = m_at(mid)?;
        if (m_mid - m_lo).abs() <= (m_mid - m_hi).abs() {
            s_lo = mid;
            m_lo = m_mid;
        } else {
            s_hi = mid;
            m_hi = m_mid;
        }
    }
    let delta_m = (m_hi - m_lo).abs();
    let order = if delta_m < cfg.eps_jump {
        TransitionOrder::Second
    } else {
        TransitionOrder::First
    };
    Ok(Some(TransitionPoint {
        lambda,
        s_star: 0.5 * (s_lo + s_hi),
        order,
        delta_m,
        m_low: m_lo,
        m_high: m_hi,
    }))
}

/// Transitions along s at fixed lambda.
///
/// A detected crossover is kept when its refined jump is first order, or when
/// the scan-grid crossover is steeper than `cfg.steep` (the tail of a
/// first-order line whose jump has dipped below the classification
/// threshold). Gentle continuous crossovers are discarded; only their absence
/// marks a lambda as transition-free.
pub fn transitions_at_lambda(
    lambda: f64,
    spec: &ModelSpec,
    cfg: &PhaseConfig,
) -> Result<Vec<TransitionPoint>> {
    let s_grid = grid(0.0, 1.0, cfg.s_step);
    let sweep = sweep_s_cfg(lambda, spec, &s_grid, cfg)?;
    let mut points = Vec::new();
    let mut i = 0;
    while i + 1 < sweep.len() {
        if (sweep[i + 1].1.m() - sweep[i].1.m()).abs() > cfg.detect {
            // Merge contiguous detections into one bracket.
            let lo = sweep[i].0;
            let mut run_steep = (sweep[i + 1].1.m() - sweep[i].1.m()).abs();
            let mut j = i + 1;
            while j + 1 < sweep.len() && (sweep[j + 1].1.m() - sweep[j].1.m()).abs() > cfg.detect {
                run_steep = run_steep.max((sweep[j + 1].1.m() - sweep[j].1.m()).abs());
                j += 1;
            }
            if let Some(tp) = locate_transition_cfg(lambda, spec, (lo, sweep[j].0), cfg)? {
                if tp.order == TransitionOrder::First || run_steep >= cfg.steep {
                    points.push(tp);
                }
            }
            i = j;
        } else {
            i += 1;
        }
    }
    Ok(points)
}

/// Trace the first-order transition line over a lambda grid; lambda values
/// with no transition populate the break intervals.
pub fn trace_line(spec: &ModelSpec, lambda_grid: &[f64]) -> Result<TransitionLine> {
    trace_line_cfg(spec, lambda_grid, &PhaseConfig::default())
}

pub fn trace_line_cfg(
    spec: &ModelSpec,
    lambda_grid: &[f64],
    cfg: &PhaseConfig,
) -> Result<TransitionLine> {
    spec.validate()?;
    let per_lambda: Vec<Vec<TransitionPoint>> = lambda_grid
        .iter()
        .map(|&lambda| transitions_at_lambda(lambda, spec, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::new();
    let mut breaks: Vec<(f64, f64)> = Vec::new();
    for (idx, mut pts) in per_lambda.into_iter().enumerate() {
        if pts.is_empty() {
            let lambda = lambda_grid[idx];
            match breaks.last_mut() {
                Some(last) if idx > 0 && last.1 == lambda_grid[idx - 1] => last.1 = lambda,
                _ => breaks.push((lambda, lambda)),
            }
        } else {
            pts.sort_by(|a, b| a.s_star.partial_cmp(&b.s_star).unwrap());
            points.extend(pts);
        }
    }
    Ok(TransitionLine { points, breaks })
}

/// Magnetization jump per lambda: the largest first-order jump, 0 on breaks.
pub fn jump_profile(spec: &ModelSpec, lambda_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    jump_profile_cfg(spec, lambda_grid, &PhaseConfig::default())
}

pub fn jump_profile_cfg(
    spec: &ModelSpec,
    lambda_grid: &[f64],
    cfg: &PhaseConfig,
) -> Result<Vec<(f64, f64)>> {
    lambda_grid
        .iter()
        .map(|&lambda| {
            let pts = transitions_at_lambda(lambda, spec, cfg)?;
            let dm = pts.iter().map(|p| p.delta_m).fold(0.0, f64::max);
            Ok((lambda, dm))
        })
        .collect()
}

/// Whether the first-order line has at least one break lambda.
///
/// Checks lambda values middle-out so an interior break exits early.
fn has_break(spec: &ModelSpec, cfg: &PhaseConfig) -> Result<bool> {
    let lambda_grid = grid(0.0, 1.0, cfg.lambda_step);
    let n = lambda_grid.len();
    let mid = n / 2;
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for off in 0..=mid {
        if mid >= off {
            order.push(mid - off);
        }
        if off > 0 && mid + off < n {
            order.push(mid + off);
        }
    }
    for idx in order {
        if transitions_at_lambda(lambda_grid[idx], spec, cfg)?.is_empty() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Smallest c beyond which the first-order line breaks, for the template's
/// field distribution (and nu, if any), located by bisection over [0.5, 1]
/// to width 1e-3.
pub fn critical_c(spec_template: &ModelSpec, p: u32) -> Result<f64> {
    critical_c_cfg(spec_template, p, &PhaseConfig::default())
}

pub fn critical_c_cfg(spec_template: &ModelSpec, p: u32, cfg: &PhaseConfig) -> Result<f64> {
    let spec_at = |c: f64| -> Result<ModelSpec> {
        let mut spec = ModelSpec::new(p, c, spec_template.field)?;
        spec.nu = spec_template.nu;
        spec.validate()?;
        Ok(spec)
    };
    let mut lo = 0.5;
    let mut hi = 1.0;
    if has_break(&spec_at(lo)?, cfg)? {
        return Err(Error::NoThreshold(format!(
            "break already present at c = {lo} for p = {p}"
        )));
    }
    if !has_break(&spec_at(hi)?, cfg)? {
        return Err(Error::NoThreshold(format!(
            "no break up to c = {hi} for p = {p}"
        )));
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if has_break(&spec_at(mid)?, cfg)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Report at table resolution: two decimals.
    Ok((0.5 * (lo + hi) * 100.0).round() / 100.0)
}

/// Closed-form lambda = 0 transition point for the zero-field model:
/// s_c = 2(1-c) / (1 - (2c-1)^p + 2(1-c)).
pub fn sc_lambda0(c: f64, p: u32) -> Result<f64> {
    if !(0.5..=1.0).contains(&c) {
        return Err(Error::Parameter(format!("sc_lambda0 requires c in [1/2, 1], got {c}")));
    }
    let num = 2.0 * (1.0 - c);
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(num / (1.0 - (2.0 * c - 1.0).powi(p as i32) + num))
}

/// Analytic solution structure at lambda = 0 with a bimodal field.
///
/// The sign-function self-consistency admits only m in {1, c, 2c-1, 0, c-1};
/// candidates whose sign pattern reproduces themselves are kept, with exact
/// piecewise-linear-in-s free energies, sorted by f ascending.
pub fn lambda0_solutions(spec: &ModelSpec, s: f64) -> Result<Vec<Branch>> {
    spec.validate()?;
    let h0 = match spec.field {
        FieldDistribution::Bimodal { h0 } => h0,
        _ => {
            return Err(Error::Parameter(
                "lambda0_solutions requires a bimodal field distribution".into(),
            ))
        }
    };
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Parameter(format!("s must be in [0,1], got {s}")));
    }
    let c = spec.c;
    let p = spec.p as i32;
    let pf = spec.p as f64;
    let candidates = [1.0, c, 2.0 * c - 1.0, 0.0, c - 1.0];
    // (weight, h, epsilon) class arguments at lambda = 0.
    let classes = [
        (c / 2.0, h0, 1.0),
        ((1.0 - c) / 2.0, h0, -1.0),
        (c / 2.0, -h0, 1.0),
        ((1.0 - c) / 2.0, -h0, -1.0),
    ];
    let arg = |m: f64, h: f64, eps: f64| s * pf * m.powi(p - 1) + s * h + (1.0 - s) * eps;
    let f_of = |m: f64| {
        s * (pf - 1.0) * m.powi(p)
            - classes.iter().map(|&(w, h, eps)| w * arg(m, h, eps).abs()).sum::<f64>()
    };

    let mut admitted: Vec<Branch> = Vec::new();
    for &m in &candidates {
        let rhs: f64 = classes.iter().map(|&(w, h, eps)| w * arg(m, h, eps).signum()).sum();
        if (rhs - m).abs() < 1e-9 {
            admitted.push(Branch {
                order: BranchOrder::Scalar(m),
                f: f_of(m),
                stable: true,
                source: BranchSource::AnalyticLambda0,
                degenerate: false,
            });
        }
    }
    admitted.sort_by(|a, b| a.f.partial_cmp(&b.f).unwrap().then(a.m().partial_cmp(&b.m()).unwrap()));
    if admitted.len() > 1 && (admitted[1].f - admitted[0].f).abs() < 1e-12 {
        admitted[0].degenerate = true;
    }
    Ok(admitted)
}

/// Derivative of the (reduced, in non-stoquastic mode) self-consistency
/// right-hand side, by central difference.
fn rhs_derivative(spec: &ModelSpec, classes: &[SiteClass], point: &AnnealPoint, m: f64) -> f64 {
    let h = 1e-5;
    let rhs = |m: f64| reduced_rhs(spec, classes, point, m);
    (rhs((m + h).min(1.0)) - rhs((m - h).max(-1.0))) / (((m + h).min(1.0)) - ((m - h).max(-1.0)))
}

fn reduced_rhs(spec: &ModelSpec, classes: &[SiteClass], point: &AnnealPoint, m: f64) -> f64 {
    if spec.is_nonstoquastic() {
        let nu = point.nu_value();
        let mx = inner_mx_solve_classes(m, point, classes, spec.p, nu);
        crate::nonstoq::self_rhs_ns_classes(
            &crate::nonstoq::OrderPair { mz: m, mx },
            point,
            classes,
            spec.p,
            nu,
            Beta::Infinite,
        )
        .mz
    } else {
        crate::mf::self_rhs_classes(m, point, classes, spec.p, Beta::Infinite)
    }
}

/// Root of rhs(m) - m nearest `near`, searched in a local window.
fn continue_root(
    spec: &ModelSpec,
    classes: &[SiteClass],
    point: &AnnealPoint,
    near: f64,
) -> Option<f64> {
    let g = |m: f64| reduced_rhs(spec, classes, point, m) - m;
    let lo = (near - 0.3).max(-1.0);
    let hi = (near + 0.3).min(1.0);
    let n = 121;
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&m| g(m)).collect();
    let mut best: Option<f64> = None;
    for i in 0..n - 1 {
        let root = if vals[i] == 0.0 {
            Some(xs[i])
        } else if vals[i] * vals[i + 1] < 0.0 {
            // Plain bisection; roots here are simple except at the stability
            // change itself, where the symmetric root persists.
            let (mut a, mut b) = (xs[i], xs[i + 1]);
            let mut ga = vals[i];
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let gm = g(mid);
                if (gm > 0.0) == (ga > 0.0) {
                    a = mid;
                    ga = gm;
                } else {
                    b = mid;
                }
            }
            Some(0.5 * (a + b))
        } else {
            None
        };
        if let Some(r) = root {
            if best.map_or(true, |b| (r - near).abs() < (b - near).abs()) {
                best = Some(r);
            }
        }
    }
    best
}

/// Second-order transition points: where the low-m solution branch loses
/// local stability (d rhs/dm crossing 1) while still being the global
/// minimum.
pub fn second_order_locus(
    spec: &ModelSpec,
    lambda_grid: &[f64],
    cfg: &PhaseConfig,
) -> Result<Vec<TransitionPoint>> {
    spec.validate()?;
    let classes = site_classes(spec)?;
    let mut out = Vec::new();
    for &lambda in lambda_grid {
        let point_at = |s: f64| AnnealPoint::for_spec(s, lambda, spec);
        let s_grid = grid(0.0, 1.0, cfg.s_step.max(0.002));
        let start = global_min_cfg(&point_at(0.0)?, spec, Beta::Infinite, &cfg.solver)?;
        let mut m_prev = start.m();
        let mut prev: Option<(f64, f64, f64)> = None; // (s, m, phi)
        for &s in &s_grid {
            let point = point_at(s)?;
            let Some(m_star) = continue_root(spec, &classes, &point, m_prev) else {
                break;
            };
            let phi = rhs_derivative(spec, &classes, &point, m_star) - 1.0;
            if let Some((s_prev, m_at_prev, phi_prev)) = prev {
                if phi_prev < 0.0 && phi >= 0.0 {
                    // Branch must still be the global minimum just below.
                    let g_prev =
                        global_min_cfg(&point_at(s_prev)?, spec, Beta::Infinite, &cfg.solver)?;
                    let f_branch = branch_f(spec, &classes, &point_at(s_prev)?, m_at_prev);
                    if f_branch <= g_prev.f + 1e-8 {
                        let (mut a, mut b) = (s_prev, s);
                        let mut m_cross = m_star;
                        for _ in 0..30 {
                            let mid = 0.5 * (a + b);
                            let pmid = point_at(mid)?;
                            let Some(mm) = continue_root(spec, &classes, &pmid, m_cross) else {
                                break;
                            };
                            m_cross = mm;
                            if rhs_derivative(spec, &classes, &pmid, mm) - 1.0 < 0.0 {
                                a = mid;
                            } else {
                                b = mid;
                            }
                        }
                        out.push(TransitionPoint {
                            lambda,
                            s_star: 0.5 * (a + b),
                            order: TransitionOrder::Second,
                            delta_m: 0.0,
                            m_low: m_cross,
                            m_high: m_cross,
                        });
                        break;
                    }
                }
            }
            prev = Some((s, m_star, phi));
            m_prev = m_star;
        }
    }
    Ok(out)
}

fn branch_f(spec: &ModelSpec, classes: &[SiteClass], point: &AnnealPoint, m: f64) -> f64 {
    if spec.is_nonstoquastic() {
        let nu = point.nu_value();
        let mx = inner_mx_solve_classes(m, point, classes, spec.p, nu);
        crate::nonstoq::free_energy_ns_classes(
            &crate::nonstoq::OrderPair { mz: m, mx },
            point,
            classes,
            spec.p,
            nu,
            Beta::Infinite,
        )
    } else {
        crate::mf::free_energy_classes(m, point, classes, spec.p, Beta::Infinite)
    }
}
