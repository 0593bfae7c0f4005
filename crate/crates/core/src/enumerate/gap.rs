//! Exact Glauber transition matrix and spectral gap on small graphs.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphgen::BipartiteMultigraph;

/// Dense eigen-decomposition is cubic in the state count.
pub const MAX_KERNEL_STATES: usize = 2500;

/// Single-site heat-bath kernel on all independent sets, each state stored
/// as `(left bits, right bits)`.
#[derive(Debug, Clone)]
pub struct GlauberKernel {
    pub n: usize,
    pub lambda: f64,
    pub states: Vec<(u64, u64)>,
    /// Hard-core measure of each state.
    pub mu: Vec<f64>,
    /// Row-stochastic transition matrix.
    pub matrix: DMatrix<f64>,
    index: HashMap<(u64, u64), usize>,
}

impl GlauberKernel {
    pub fn index_of(&self, left: u64, right: u64) -> Option<usize> {
        self.index.get(&(left, right)).copied()
    }

    /// `max |μ_i P_ij − μ_j P_ji|`.
    pub fn detailed_balance_residual(&self) -> f64 {
        let k = self.states.len();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in (i + 1)..k {
                let r = (self.mu[i] * self.matrix[(i, j)] - self.mu[j] * self.matrix[(j, i)]).abs();
                worst = worst.max(r);
            }
        }
        worst
    }
}

fn neighbor_masks(g: &BipartiteMultigraph) -> (Vec<u64>, Vec<u64>) {
    let n = g.n();
    let left = (0..n).map(|u| g.left_neighbors(u).iter().fold(0u64, |m, &v| m | 1 << v)).collect();
    let right = (0..n).map(|v| g.right_neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u)).collect();
    (left, right)
}

/// All independent sets, left side ascending then right side ascending.
fn independent_sets(g: &BipartiteMultigraph, cap: usize) -> Result<Vec<(u64, u64)>> {
    let n = g.n();
    if n > 20 {
        return Err(Error::SizeCap { what: "n", actual: n, cap: 20 });
    }
    let (left_nb, _) = neighbor_masks(g);
    let full = (1u64 << n) - 1;
    let mut out = Vec::new();
    for s in 0..=full {
        let covered = (0..n).filter(|&u| s >> u & 1 == 1).fold(0u64, |m, u| m | left_nb[u]);
        let free = full & !covered;
        // Every subset of `free`, in increasing order.
        let mut t = 0u64;
        loop {
            out.push((s, t));
            if out.len() > cap {
                return Err(Error::SizeCap { what: "independent sets", actual: out.len(), cap });
            }
            if t == free {
                break;
            }
            t = (t.wrapping_sub(free)) & free;
        }
    }
    Ok(out)
}

pub fn glauber_kernel(g: &BipartiteMultigraph, lambda: f64) -> Result<GlauberKernel> {
    let n = g.n();
    let states = independent_sets(g, MAX_KERNEL_STATES)?;
    let index: HashMap<(u64, u64), usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let (left_nb, right_nb) = neighbor_masks(g);
    let weights: Vec<f64> =
        states.iter().map(|&(s, t)| lambda.powi((s.count_ones() + t.count_ones()) as i32)).collect();
    let z: f64 = weights.iter().sum();
    let mu = weights.iter().map(|w| w / z).collect();
    let k = states.len();
    let mut matrix = DMatrix::zeros(k, k);
    let pick = 1.0 / (2 * n) as f64;
    let p_on = lambda / (1.0 + lambda);
    for (i, &(s, t)) in states.iter().enumerate() {
        let mut leave = 0.0;
        let mut go = |target: (u64, u64), p: f64, matrix: &mut DMatrix<f64>| {
            let j = index[&target];
            matrix[(i, j)] += p;
            leave += p;
        };
        for u in 0..n {
            let bit = 1u64 << u;
            if s & bit != 0 {
                go((s & !bit, t), pick * (1.0 - p_on), &mut matrix);
            } else if t & left_nb[u] == 0 {
                go((s | bit, t), pick * p_on, &mut matrix);
            }
        }
        for v in 0..n {
            let bit = 1u64 << v;
            if t & bit != 0 {
                go((s, t & !bit), pick * (1.0 - p_on), &mut matrix);
            } else if s & right_nb[v] == 0 {
                go((s, t | bit), pick * p_on, &mut matrix);
            }
        }
        matrix[(i, i)] += 1.0 - leave;
    }
    Ok(GlauberKernel { n, lambda, states, mu, matrix, index })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralGap {
    pub n_states: usize,
    /// `1 − max(|λ₂|, |λ_min|)`.
    pub gap: f64,
    pub second_eigenvalue_modulus: f64,
    /// Eigenvalues in decreasing order.
    pub eigenvalues: Vec<f64>,
    pub detailed_balance_residual: f64,
}

/// Spectral gap of the Glauber chain, from the eigenvalues of the
/// symmetrised kernel `D^{1/2} P D^{−1/2}`, `D = diag(μ)`.
pub fn exact_spectral_gap(g: &BipartiteMultigraph, lambda: f64) -> Result<SpectralGap> {
    let kern = glauber_kernel(g, lambda)?;
    let k = kern.states.len();
    let sq: Vec<f64> = kern.mu.iter().map(|m| m.sqrt()).collect();
    let sym = DMatrix::from_fn(k, k, |i, j| {
        // Average the two triangles to remove rounding asymmetry.
        0.5 * (sq[i] * kern.matrix[(i, j)] / sq[j] + sq[j] * kern.matrix[(j, i)] / sq[i])
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let slem = if k == 1 { 0.0 } else { ev[1].abs().max(ev[k - 1].abs()) };
    Ok(SpectralGap {
        n_states: k,
        gap: 1.0 - slem,
        second_eigenvalue_modulus: slem,
        eigenvalues: ev,
        detailed_balance_residual: kern.detailed_balance_residual(),
    })
}
