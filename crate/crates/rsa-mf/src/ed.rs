//! Finite-N exact diagonalization in the permutation-symmetric collective
//! basis, used as an independent check of the mean-field limit.
//!
//! Sites within one class (same h, epsilon) are interchangeable, so the
//! ground-state search is restricted to the maximal-spin sector of each
//! class block. This is an assumption, checked against full 2^N
//! diagonalization at small N, not a theorem.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mf::free_energy_classes;
use crate::model::{site_classes, AnnealPoint, Beta, FieldDistribution, ModelSpec, SiteClass};
use crate::solver::{global_min_cfg, SolverConfig};

/// Hard cap on the collective-basis dimension.
pub const DIM_CAP: usize = 5000;
/// Dense eigensolver below this dimension, Lanczos above.
const DENSE_LIMIT: usize = 2000;
const RESIDUAL_TOL: f64 = 1e-10;

/// One permutation-symmetric block: all sites of one class, in the
/// maximal-spin sector j = n_sites / 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisBlock {
    pub class: SiteClass,
    pub n_sites: usize,
}

/// Composite collective basis: the product of per-class maximal-spin blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveBasis {
    pub blocks: Vec<BasisBlock>,
    pub n_total: usize,
    pub dimension: usize,
    strides: Vec<usize>,
}

impl CollectiveBasis {
    /// Per-block raising-operator occupation numbers n_k in 0..=N_k for a
    /// flat basis index (mixed-radix decoding).
    pub fn occupations(&self, index: usize) -> Vec<usize> {
        let mut occ = Vec::with_capacity(self.blocks.len());
        let mut rem = index;
        for (block, &stride) in self.blocks.iter().zip(&self.strides) {
            let n = rem / stride;
            debug_assert!(n <= block.n_sites);
            occ.push(n);
            rem %= stride;
        }
        occ
    }

    pub fn index_of(&self, occ: &[usize]) -> usize {
        occ.iter().zip(&self.strides).map(|(&n, &s)| n * s).sum()
    }

    /// Total sigma-z of a basis state: sum over blocks of 2 n_k - N_k.
    pub fn total_sz(&self, occ: &[usize]) -> i64 {
        occ.iter()
            .zip(&self.blocks)
            .map(|(&n, b)| 2 * n as i64 - b.n_sites as i64)
            .sum()
    }
}

/// Lowest eigenpair summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateResult {
    pub energy_per_site: f64,
    pub magnetization_per_site: f64,
    pub n: usize,
    /// Eigen-residual ||Hv - Ev||.
    pub residual: f64,
}

/// Assign class site counts N_k ~ weight_k N and build the composite basis.
pub fn build_basis(n: usize, spec: &ModelSpec) -> Result<CollectiveBasis> {
    spec.validate()?;
    if n == 0 || n > 400 {
        return Err(Error::Parameter(format!("N must be in 1..=400, got {n}")));
    }
    if matches!(spec.field, FieldDistribution::Gaussian { .. }) {
        return Err(Error::Unsupported(
            "Gaussian fields have no finite class decomposition for ED".into(),
        ));
    }
    let classes = site_classes(spec)?;
    let mut counts: Vec<usize> = classes.iter().map(|sc| (sc.weight * n as f64).round() as usize).collect();
    // Fix rounding drift on the largest block.
    let total: usize = counts.iter().sum();
    if total != n {
        let largest = counts
            .iter()
            .enumerate()
            .max_by_key(|(_, &c)| c)
            .map(|(i, _)| i)
            .unwrap();
        counts[largest] = counts[largest] + n - total;
    }
    let blocks: Vec<BasisBlock> = classes
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&class, &c)| BasisBlock { class, n_sites: c })
        .collect();
    let dimension: usize = blocks.iter().map(|b| b.n_sites + 1).product();
    if dimension > DIM_CAP {
        return Err(Error::Size(format!(
            "collective-basis dimension {dimension} exceeds cap {DIM_CAP}"
        )));
    }
    let mut strides = vec![1usize; blocks.len()];
    for i in (0..blocks.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * (blocks[i + 1].n_sites + 1);
    }
    Ok(CollectiveBasis { blocks, n_total: n, dimension, strides })
}

/// Dense symmetric Hamiltonian in the collective basis.
///
/// Diagonal: target + field + initialization terms; off-diagonal: the
/// transverse field through per-block ladder elements. All off-diagonal
/// entries are nonpositive (stoquastic).
pub fn build_hamiltonian(
    basis: &CollectiveBasis,
    point: &AnnealPoint,
    spec: &ModelSpec,
) -> Result<DMatrix<f64>> {
    if spec.is_nonstoquastic() {
        return Err(Error::Unsupported(
            "ED covers the stoquastic Hamiltonian only".into(),
        ));
    }
    let n = basis.n_total as f64;
    let s = point.s;
    let lambda = point.lambda;
    let dim = basis.dimension;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for idx in 0..dim {
        let occ = basis.occupations(idx);
        let total_sz = basis.total_sz(&occ) as f64;
        let mut diag = -n * (total_sz / n).powi(spec.p as i32);
        for (&nk, block) in occ.iter().zip(&basis.blocks) {
            let block_sz = (2 * nk as i64 - block.n_sites as i64) as f64;
            diag -= block.class.h * block_sz;
            h[(idx, idx)] += -(1.0 - s) * (1.0 - lambda) * block.class.epsilon * block_sz;
        }
        h[(idx, idx)] += s * diag;
        // Transverse field: sum over blocks of 2 J_x = J_+ + J_-.
        for (k, block) in basis.blocks.iter().enumerate() {
            let nk = occ[k];
            if nk < block.n_sites {
                let j = block.n_sites as f64 / 2.0;
                let mu = nk as f64 - j;
                let elem = (j * (j + 1.0) - mu * (mu + 1.0)).sqrt();
                let nbr = idx + basis.strides[k];
                let val = -(1.0 - s) * lambda * elem;
                h[(idx, nbr)] = val;
                h[(nbr, idx)] = val;
            }
        }
    }
    Ok(h)
}

fn dense_ground(h: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = h.clone().symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

/// Lanczos with full reorthogonalization and Ritz restarts. The start vector
/// is uniform positive, valid for the stoquastic matrix by Perron-Frobenius.
fn lanczos_ground(h: &DMatrix<f64>) -> Result<(f64, DVector<f64>, f64)> {
    let dim = h.nrows();
    let mut v = DVector::<f64>::from_element(dim, 1.0 / (dim as f64).sqrt());
    let max_iter = 300.min(dim);
    for _restart in 0..8 {
        let mut basis: Vec<DVector<f64>> = vec![v.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        for j in 0..max_iter {
            let mut w = h * &basis[j];
            let alpha = basis[j].dot(&w);
            alphas.push(alpha);
            for u in &basis {
                let proj = u.dot(&w);
                w.axpy(-proj, u, 1.0);
            }
            // second reorthogonalization pass for safety against drift
            for u in &basis {
                let proj = u.dot(&w);
                w.axpy(-proj, u, 1.0);
            }
            let beta = w.norm();
            if beta < 1e-13 || j + 1 == max_iter {
                break;
            }
            betas.push(beta);
            basis.push(w / beta);
        }
        let k = alphas.len();
        let mut tri = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            tri[(i, i)] = alphas[i];
            if i + 1 < k {
                tri[(i, i + 1)] = betas[i];
                tri[(i + 1, i)] = betas[i];
            }
        }
        let (theta, y) = dense_ground(&tri);
        let mut x = DVector::<f64>::zeros(dim);
        for (i, u) in basis.iter().take(k).enumerate() {
            x.axpy(y[i], u, 1.0);
        }
        x /= x.norm();
        let residual = (h * &x - theta * &x).norm();
        if residual < RESIDUAL_TOL {
            return Ok((theta, x, residual));
        }
        v = x;
    }
    Err(Error::Convergence(format!(
        "Lanczos did not reach residual {RESIDUAL_TOL} at dimension {dim}"
    )))
}

/// Lowest eigenpair of the built Hamiltonian.
pub fn ground_state(h: &DMatrix<f64>, basis: &CollectiveBasis) -> Result<GroundStateResult> {
    let dim = h.nrows();
    if dim != basis.dimension {
        return Err(Error::Parameter("matrix and basis dimensions disagree".into()));
    }
    if dim > DIM_CAP {
        return Err(Error::Size(format!("dimension {dim} exceeds cap {DIM_CAP}")));
    }
    let (energy, vector, residual) = if dim <= DENSE_LIMIT {
        let (e, vec) = dense_ground(h);
        let residual = (h * &vec - e * &vec).norm();
        (e, vec, residual)
    } else {
        lanczos_ground(h)?
    };
    if residual >= RESIDUAL_TOL {
        return Err(Error::Convergence(format!(
            "eigen-residual {residual} at dimension {dim}"
        )));
    }
    let mut sz_expect = 0.0;
    for idx in 0..dim {
        let occ = basis.occupations(idx);
        sz_expect += vector[idx] * vector[idx] * basis.total_sz(&occ) as f64;
    }
    let n = basis.n_total as f64;
    Ok(GroundStateResult {
        energy_per_site: energy / n,
        magnetization_per_site: sz_expect / n,
        n: basis.n_total,
        residual,
    })
}

/// One row of the finite-size-scaling comparison against the mean field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub energy_per_site: f64,
    pub mf_free_energy: f64,
    /// |e0(N)/N - f_mf|.
    pub gap: f64,
    /// gap(previous N) / gap(N); ~2 for O(1/N) convergence when N doubles.
    pub ratio: Option<f64>,
}

/// Per-N gap between the ED ground energy per site and the mean-field
/// global minimum, with successive ratios.
pub fn scaling_report(
    spec: &ModelSpec,
    point: &AnnealPoint,
    n_list: &[usize],
) -> Result<Vec<ScalingRow>> {
    spec.validate()?;
    let classes = site_classes(spec)?;
    let branch = global_min_cfg(point, spec, Beta::Infinite, &SolverConfig::default())?;
    let f_mf = free_energy_classes(branch.m(), point, &classes, spec.p, Beta::Infinite);
    let mut rows: Vec<ScalingRow> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let basis = build_basis(n, spec)?;
        let h = build_hamiltonian(&basis, point, spec)?;
        let gs = ground_state(&h, &basis)?;
        let gap = (gs.energy_per_site - f_mf).abs();
        let ratio = rows.last().map(|prev: &ScalingRow| prev.gap / gap);
        rows.push(ScalingRow { n, energy_per_site: gs.energy_per_site, mf_free_energy: f_mf, gap, ratio });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: u32, c: f64) -> ModelSpec {
        ModelSpec::new(p, c, FieldDistribution::None).unwrap()
    }

    #[test]
    fn basis_counting_examples() {
        let b = build_basis(10, &spec(3, 0.8)).unwrap();
        let sizes: Vec<usize> = b.blocks.iter().map(|bl| bl.n_sites).collect();
        assert_eq!(sizes, vec![8, 2]);
        assert_eq!(b.dimension, 27);

        let b = build_basis(100, &spec(3, 0.8)).unwrap();
        assert_eq!(b.dimension, 81 * 21);

        let bimodal = ModelSpec::new(3, 0.5, FieldDistribution::Bimodal { h0: 0.5 }).unwrap();
        let b = build_basis(4, &bimodal).unwrap();
        assert_eq!(b.blocks.len(), 4);
        assert!(b.blocks.iter().all(|bl| bl.n_sites == 1));
        assert_eq!(b.dimension, 16);
    }

    #[test]
    fn basis_weight_deviation_bound() {
        let sp = ModelSpec::new(3, 0.8, FieldDistribution::Bimodal { h0: 0.5 }).unwrap();
        for n in [8, 12, 20] {
            let b = build_basis(n, &sp).unwrap();
            assert_eq!(b.blocks.iter().map(|bl| bl.n_sites).sum::<usize>(), n);
            for bl in &b.blocks {
                assert!((bl.n_sites as f64 / n as f64 - bl.class.weight).abs() < 1.0 / n as f64);
            }
        }
    }

    #[test]
    fn gaussian_rejected() {
        let sp = ModelSpec::new(3, 0.8, FieldDistribution::Gaussian { sigma: 1.0, nodes: 8 }).unwrap();
        assert!(matches!(build_basis(10, &sp), Err(Error::Unsupported(_))));
    }

    #[test]
    fn single_spin_transverse() {
        let sp = spec(3, 1.0);
        let basis = build_basis(1, &sp).unwrap();
        let pt = AnnealPoint::new(0.0, 1.0).unwrap();
        let h = build_hamiltonian(&basis, &pt, &sp).unwrap();
        assert_eq!(h.nrows(), 2);
        let gs = ground_state(&h, &basis).unwrap();
        assert!((gs.energy_per_site - (-1.0)).abs() < 1e-12);
        assert!(gs.magnetization_per_site.abs() < 1e-10);
    }

    #[test]
    fn two_spin_classical_endpoint() {
        let sp = spec(3, 1.0);
        let basis = build_basis(2, &sp).unwrap();
        let pt = AnnealPoint::new(1.0, 1.0).unwrap();
        let h = build_hamiltonian(&basis, &pt, &sp).unwrap();
        assert_eq!(h.nrows(), 3);
        // Diagonal: -2 (all up), 0 (mixed), +2 (all down) for odd p.
        let gs = ground_state(&h, &basis).unwrap();
        assert!((gs.energy_per_site - (-1.0)).abs() < 1e-12);
        assert!((gs.magnetization_per_site - 1.0).abs() < 1e-10);
    }

    #[test]
    fn classical_diagonal_all_up() {
        let sp = spec(3, 0.8);
        let basis = build_basis(20, &sp).unwrap();
        let pt = AnnealPoint::new(1.0, 0.0).unwrap();
        let h = build_hamiltonian(&basis, &pt, &sp).unwrap();
        let gs = ground_state(&h, &basis).unwrap();
        assert!((gs.energy_per_site - (-1.0)).abs() < 1e-12);
        assert!((gs.magnetization_per_site - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stoquastic_and_symmetric() {
        let sp = ModelSpec::new(3, 0.8, FieldDistribution::Bimodal { h0: 0.5 }).unwrap();
        let basis = build_basis(12, &sp).unwrap();
        let pt = AnnealPoint::new(0.3, 0.6).unwrap();
        let h = build_hamiltonian(&basis, &pt, &sp).unwrap();
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                assert!((h[(i, j)] - h[(j, i)]).abs() < 1e-14);
                if i != j {
                    assert!(h[(i, j)] <= 0.0);
                }
            }
        }
    }

    #[test]
    fn nonstoquastic_rejected() {
        let sp = spec(3, 0.8).with_nu(0.5).unwrap();
        let basis = build_basis(10, &spec(3, 0.8)).unwrap();
        let pt = AnnealPoint::new(0.3, 0.6).unwrap();
        assert!(matches!(build_hamiltonian(&basis, &pt, &sp), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lanczos_matches_dense_on_mid_size() {
        let sp = spec(3, 0.8);
        let basis = build_basis(60, &sp).unwrap(); // dim 49 * 13 = 637
        let pt = AnnealPoint::new(0.4, 0.7).unwrap();
        let h = build_hamiltonian(&basis, &pt, &sp).unwrap();
        let (dense_e, _) = dense_ground(&h);
        let (lanczos_e, _, residual) = lanczos_ground(&h).unwrap();
        assert!((dense_e - lanczos_e).abs() < 1e-9);
        assert!(residual < RESIDUAL_TOL);
    }

    #[test]
    fn endpoint_rows_match_mean_field_exactly() {
        let sp = spec(3, 0.8);
        for (s, lambda) in [(1.0, 1.0), (0.0, 1.0)] {
            let pt = AnnealPoint::new(s, lambda).unwrap();
            let rows = scaling_report(&sp, &pt, &[20, 40]).unwrap();
            for row in rows {
                assert!(row.gap < 1e-10, "gap {} at s={s}, lambda={lambda}", row.gap);
            }
        }
    }
}
