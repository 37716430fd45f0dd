//! Enumeration of stationary solutions and global free-energy minimization,
//! in one (stoquastic) and two (non-stoquastic) order-parameter dimensions.
//!
//! Two routes are combined: fixed points of the self-consistent equation and
//! direct grid minima of the free energy. The second route catches the m = 0
//! stationary point for p >= 3 and the |.| kinks at lambda = 0 that the
//! fixed-point route can miss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mf::{free_energy_classes, self_rhs_classes};
use crate::model::{site_classes, AnnealPoint, Beta, ModelSpec, SiteClass};
use crate::nonstoq::{free_energy_ns_classes, self_rhs_ns_classes, OrderPair};

/// Grid sizes for the dual enumeration. `rhs_grid = 0` disables the
/// fixed-point route (used for cheap phase-diagram scans).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rhs_grid: usize,
    pub f_grid: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { rhs_grid: 2001, f_grid: 4001 }
    }
}

impl SolverConfig {
    /// Cheaper configuration for dense (s, lambda) scans. The fixed-point
    /// route stays on: it is what finds the m = 0 solution at lambda = 1
    /// (a stationary inflection of f for odd p, invisible to grid minima).
    pub fn scan() -> Self {
        SolverConfig { rhs_grid: 401, f_grid: 401 }
    }
}

const ROOT_TOL: f64 = 1e-12;
const BOUNDARY_TOL: f64 = 1e-9;
const ENDPOINT_RES_TOL: f64 = 1e-6;
const GOLDEN_TOL: f64 = 1e-10;
const DEDUPE_TOL: f64 = 1e-8;
const SNAP_WINDOW: f64 = 1e-5;
const TIE_TOL: f64 = 1e-12;
const STABILITY_TOL: f64 = -1e-7;
const CURVATURE_STEP: f64 = 1e-5;

/// How a branch was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchSource {
    FixedPoint,
    GridRefined,
    Boundary,
    AnalyticLambda0,
}

impl std::fmt::Display for BranchSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BranchSource::FixedPoint => "fixed-point",
            BranchSource::GridRefined => "grid-refined",
            BranchSource::Boundary => "boundary",
            BranchSource::AnalyticLambda0 => "analytic-lambda0",
        };
        write!(f, "{s}")
    }
}

/// Order parameter of a branch: scalar m or (mz, mx).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BranchOrder {
    Scalar(f64),
    Pair(OrderPair),
}

/// One stationary solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub order: BranchOrder,
    /// Free energy per site.
    pub f: f64,
    /// Local-minimum flag.
    pub stable: bool,
    pub source: BranchSource,
    /// Set on the global branch when another branch ties in f within 1e-12.
    pub degenerate: bool,
}

impl Branch {
    /// Longitudinal order parameter (m, or mz for a pair).
    pub fn m(&self) -> f64 {
        match self.order {
            BranchOrder::Scalar(m) => m,
            BranchOrder::Pair(p) => p.mz,
        }
    }

    pub fn mx(&self) -> Option<f64> {
        match self.order {
            BranchOrder::Scalar(_) => None,
            BranchOrder::Pair(p) => Some(p.mx),
        }
    }
}

struct Candidate {
    m: f64,
    source: BranchSource,
}

/// Golden-section minimization of `f` on [lo, hi] to interval width `tol`.
fn golden_section(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Bisection refinement of a sign change of `g` on [lo, hi].
///
/// Returns `None` when the bracket collapses onto a jump discontinuity of `g`
/// (no actual root, e.g. across a sign-function kink at lambda = 0).
fn bisect_root(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut glo = g(lo);
    if glo == 0.0 {
        return Some(lo);
    }
    if g(hi) == 0.0 {
        return Some(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gmid = g(mid);
        if gmid.abs() < ROOT_TOL {
            return Some(mid);
        }
        if (gmid > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gmid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    if g(mid).abs() < ROOT_TOL {
        Some(mid)
    } else {
        None
    }
}

/// Dual-route enumeration of candidate order parameters on [-1, 1].
///
/// `res` is the self-consistency residual rhs(m) - m, always available; it
/// gates boundary candidates (an endpoint is a solution only when the local
/// field keeps it saturated, i.e. rhs(+-1) = +-1). Without that gate the
/// free energy of odd-p models, which decreases without bound toward m = -1
/// off the stationary manifold, would produce a spurious global minimum.
fn enumerate_1d(
    f: &dyn Fn(f64) -> f64,
    g: Option<&dyn Fn(f64) -> f64>,
    res: &dyn Fn(f64) -> f64,
    cfg: &SolverConfig,
) -> Result<Vec<Candidate>> {
    let mut candidates: Vec<Candidate> = Vec::new();

    // Route (i): fixed points of the self-consistency, g(m) = rhs(m) - m.
    if let Some(g) = g {
        let n = cfg.rhs_grid.max(0);
        if n >= 2 {
            let grid: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
            let vals: Vec<f64> = grid.iter().map(|&m| g(m)).collect();
            for i in 0..n {
                if vals[i].is_nan() {
                    return Err(Error::Convergence(format!(
                        "self-consistency NaN at m={}",
                        grid[i]
                    )));
                }
                if vals[i].abs() < ROOT_TOL {
                    candidates.push(Candidate { m: grid[i], source: BranchSource::FixedPoint });
                } else if i + 1 < n && vals[i] * vals[i + 1] < 0.0 {
                    if let Some(root) = bisect_root(g, grid[i], grid[i + 1]) {
                        candidates.push(Candidate { m: root, source: BranchSource::FixedPoint });
                    }
                }
            }
        }
    }

    // Golden section bottoms out around sqrt(eps) in m; when the minimum is
    // also a fixed point, snap onto the (much sharper) root of the residual
    // so the two routes produce coincident candidates.
    let snap = |m: f64| -> f64 {
        let w = SNAP_WINDOW;
        let (lo, hi) = ((m - w).max(-1.0), (m + w).min(1.0));
        if res(lo) * res(hi) < 0.0 {
            if let Some(root) = bisect_root(res, lo, hi) {
                return root;
            }
        }
        m
    };

    // Route (ii): discrete local minima of f, refined by golden section.
    let n = cfg.f_grid;
    if n < 3 {
        return Err(Error::Parameter(format!("f_grid must be >= 3, got {n}")));
    }
    let grid: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&m| f(m)).collect();
    if vals.iter().any(|v| v.is_nan()) {
        return Err(Error::Convergence("free energy NaN on enumeration grid".into()));
    }
    for i in 1..n - 1 {
        if vals[i] < vals[i - 1] && vals[i] <= vals[i + 1] {
            let m = snap(golden_section(f, grid[i - 1], grid[i + 1], GOLDEN_TOL));
            candidates.push(Candidate { m, source: BranchSource::GridRefined });
        }
    }

    // Route (iii): endpoint cells. f decreasing into the first or last cell
    // can mean a saturated solution exactly at the boundary, a stationary
    // point inside the cell, or the odd-p runaway toward m = -1; the
    // self-consistency residual separates the three.
    let endpoint_cell = |cell_lo: f64, cell_hi: f64, boundary: f64, cands: &mut Vec<Candidate>| {
        if res(boundary).abs() < BOUNDARY_TOL {
            cands.push(Candidate { m: boundary, source: BranchSource::Boundary });
            return;
        }
        let m = snap(golden_section(f, cell_lo, cell_hi, GOLDEN_TOL));
        if res(m).abs() < ENDPOINT_RES_TOL {
            cands.push(Candidate { m, source: BranchSource::GridRefined });
        }
    };
    if vals[0] < vals[1] {
        endpoint_cell(grid[0], grid[1], -1.0, &mut candidates);
    }
    if vals[n - 1] < vals[n - 2] {
        endpoint_cell(grid[n - 2], grid[n - 1], 1.0, &mut candidates);
    }

    // Fallback for flat landscapes (s = 0 makes f independent of m): locate
    // fixed points of the self-consistency on the f grid instead.
    if candidates.is_empty() {
        let rvals: Vec<f64> = grid.iter().map(|&m| res(m)).collect();
        for i in 0..n {
            if rvals[i].abs() < ROOT_TOL {
                candidates.push(Candidate { m: grid[i], source: BranchSource::FixedPoint });
            } else if i + 1 < n && rvals[i] * rvals[i + 1] < 0.0 {
                if let Some(root) = bisect_root(res, grid[i], grid[i + 1]) {
                    candidates.push(Candidate { m: root, source: BranchSource::FixedPoint });
                }
            }
        }
        if candidates.is_empty() {
            let i = (0..n)
                .min_by(|&a, &b| rvals[a].abs().partial_cmp(&rvals[b].abs()).unwrap())
                .unwrap();
            candidates.push(Candidate { m: grid[i], source: BranchSource::GridRefined });
        }
    }

    // Merge, deduplicating at distance DEDUPE_TOL. Fixed-point provenance wins.
    candidates.sort_by(|a, b| a.m.partial_cmp(&b.m).unwrap());
    let mut merged: Vec<Candidate> = Vec::new();
    for cand in candidates {
        match merged.last_mut() {
            Some(last) if (cand.m - last.m).abs() < DEDUPE_TOL => {
                if last.source != BranchSource::FixedPoint
                    && cand.source == BranchSource::FixedPoint
                {
                    last.m = cand.m;
                    last.source = BranchSource::FixedPoint;
                } else if last.source == BranchSource::GridRefined
                    && cand.source == BranchSource::Boundary
                {
                    last.m = cand.m;
                    last.source = BranchSource::Boundary;
                }
            }
            _ => merged.push(cand),
        }
    }
    Ok(merged)
}

/// Curvature sign check: central second difference of f, one-sided slope at
/// the boundary.
fn local_min_flag(f: &dyn Fn(f64) -> f64, m: f64) -> bool {
    let h = CURVATURE_STEP;
    if m - h < -1.0 {
        (f(m + h) - f(m)) / h >= STABILITY_TOL
    } else if m + h > 1.0 {
        (f(m - h) - f(m)) / h >= STABILITY_TOL
    } else {
        (f(m - h) - 2.0 * f(m) + f(m + h)) / (h * h) >= STABILITY_TOL
    }
}

fn assemble_branches(
    f: &dyn Fn(f64) -> f64,
    candidates: Vec<Candidate>,
    order_of: &dyn Fn(f64) -> BranchOrder,
) -> Vec<Branch> {
    let mut branches: Vec<Branch> = candidates
        .into_iter()
        .map(|cand| Branch {
            order: order_of(cand.m),
            f: f(cand.m),
            stable: local_min_flag(f, cand.m),
            source: cand.source,
            degenerate: false,
        })
        .collect();
    branches.sort_by(|a, b| {
        a.f.partial_cmp(&b.f).unwrap().then(a.m().partial_cmp(&b.m()).unwrap())
    });
    branches
}

/// All stationary solutions at `point`, sorted by free energy ascending.
pub fn enumerate_branches(point: &AnnealPoint, spec: &ModelSpec, beta: Beta) -> Result<Vec<Branch>> {
    enumerate_branches_cfg(point, spec, beta, &SolverConfig::default())
}

pub fn enumerate_branches_cfg(
    point: &AnnealPoint,
    spec: &ModelSpec,
    beta: Beta,
    cfg: &SolverConfig,
) -> Result<Vec<Branch>> {
    spec.validate()?;
    beta.validate()?;
    let classes = site_classes(spec)?;
    let p = spec.p;
    let f = |m: f64| free_energy_classes(m, point, &classes, p, beta);
    let g = |m: f64| self_rhs_classes(m, point, &classes, p, beta) - m;
    let candidates = if cfg.rhs_grid >= 2 {
        enumerate_1d(&f, Some(&g), &g, cfg)?
    } else {
        enumerate_1d(&f, None, &g, cfg)?
    };
    Ok(assemble_branches(&f, candidates, &BranchOrder::Scalar))
}

/// Unique solution of the inner transverse stationarity mx = rhs_x(mz, mx).
///
/// The map rhs_x(mz, .) - mx is strictly decreasing for s(1-nu) > 0, so the
/// fixed point is unique; for s(1-nu) = 0 there is no self-coupling and the
/// right-hand side is evaluated directly.
pub fn inner_mx_solve(mz: f64, point: &AnnealPoint, spec: &ModelSpec) -> Result<f64> {
    spec.validate()?;
    let classes = site_classes(spec)?;
    Ok(inner_mx_solve_classes(mz, point, &classes, spec.p, point.nu_value()))
}

pub(crate) fn inner_mx_solve_classes(
    mz: f64,
    point: &AnnealPoint,
    classes: &[SiteClass],
    p: u32,
    nu: f64,
) -> f64 {
    let rhs_x = |mx: f64| {
        let pair = OrderPair { mz, mx };
        self_rhs_ns_classes(&pair, point, classes, p, nu, Beta::Infinite).mx
    };
    if point.s * (1.0 - nu) == 0.0 {
        return rhs_x(0.0);
    }
    let g = |mx: f64| rhs_x(mx) - mx;
    // g(-1) >= 0 and g(1) <= 0 since |rhs_x| <= 1; bisect the decreasing map.
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.abs() < ROOT_TOL {
            return mid;
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Stationary solutions of the two-parameter problem, reduced over mz with
/// the inner mx fixed point substituted.
pub fn enumerate_branches_ns(
    point: &AnnealPoint,
    spec: &ModelSpec,
    beta: Beta,
) -> Result<Vec<Branch>> {
    enumerate_branches_ns_cfg(point, spec, beta, &SolverConfig::default())
}

pub fn enumerate_branches_ns_cfg(
    point: &AnnealPoint,
    spec: &ModelSpec,
    beta: Beta,
    cfg: &SolverConfig,
) -> Result<Vec<Branch>> {
    spec.validate()?;
    beta.validate()?;
    let classes = site_classes(spec)?;
    let p = spec.p;
    let nu = point.nu_value();
    let mx_of = |mz: f64| inner_mx_solve_classes(mz, point, &classes, p, nu);
    let f = |mz: f64| {
        let pair = OrderPair { mz, mx: mx_of(mz) };
        free_energy_ns_classes(&pair, point, &classes, p, nu, beta)
    };
    let g = |mz: f64| {
        let pair = OrderPair { mz, mx: mx_of(mz) };
        self_rhs_ns_classes(&pair, point, &classes, p, nu, beta).mz - mz
    };
    let candidates = if cfg.rhs_grid >= 2 {
        enumerate_1d(&f, Some(&g), &g, cfg)?
    } else {
        enumerate_1d(&f, None, &g, cfg)?
    };
    let order_of = |mz: f64| BranchOrder::Pair(OrderPair { mz, mx: mx_of(mz) });
    Ok(assemble_branches(&f, candidates, &order_of))
}

/// The global free-energy minimum at `point`.
///
/// Dispatches to the two-parameter solver when the spec is non-stoquastic.
/// Exact ties (|df| < 1e-12) report the smaller-m branch with the degeneracy
/// flag set.
pub fn global_min(point: &AnnealPoint, spec: &ModelSpec, beta: Beta) -> Result<Branch> {
    global_min_cfg(point, spec, beta, &SolverConfig::default())
}

pub fn global_min_cfg(
    point: &AnnealPoint,
    spec: &ModelSpec,
    beta: Beta,
    cfg: &SolverConfig,
) -> Result<Branch> {
    let branches = if spec.is_nonstoquastic() {
        enumerate_branches_ns_cfg(point, spec, beta, cfg)?
    } else {
        enumerate_branches_cfg(point, spec, beta, cfg)?
    };
    let best_f = branches[0].f;
    let mut tied: Vec<&Branch> = branches.iter().take_while(|b| (b.f - best_f).abs() < TIE_TOL).collect();
    tied.sort_by(|a, b| a.m().partial_cmp(&b.m()).unwrap());
    let mut result = *tied[0];
    result.degenerate = tied.iter().any(|b| (b.m() - result.m()).abs() > DEDUPE_TOL);
    Ok(result)
}
