//! Gauss-Hermite quadrature for the weight e^{-t^2} on (-inf, inf).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_NODES: usize = 512;

/// Nodes and weights for `int e^{-t^2} g(t) dt ~= sum_k w_k g(t_k)`.
///
/// Computed by eigen-decomposition of the Jacobi matrix (Golub-Welsch).
/// Nodes are returned in ascending order and are exactly symmetric about 0;
/// weights are positive and sum to sqrt(pi).
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 1 || n > MAX_NODES {
        return Err(Error::Parameter(format!(
            "gauss_hermite nodes must be in 1..={MAX_NODES}, got {n}"
        )));
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    if n == 1 {
        return Ok((vec![0.0], vec![sqrt_pi]));
    }

    // Jacobi matrix for Hermite polynomials: zero diagonal, off-diagonal sqrt(k/2).
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eig = jacobi.symmetric_eigen();

    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (node, sqrt_pi * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Symmetrize node/weight pairs so the rule is exactly even.
    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let t = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -t;
        nodes[j] = t;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}
