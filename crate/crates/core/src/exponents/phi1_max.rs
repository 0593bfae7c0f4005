//! Global maximisation of `Φ₁` over the open triangle by grid scan and
//! safeguarded Newton ascent.

use serde::Serialize;

use super::{phi1, phi1_gradient, phi1_hessian, DensityPoint};
use crate::error::Result;
use crate::treegibbs::{semi_invariant_fixed_points, TreeFixedPoints};

const GRID: usize = 240;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Phi1Optimum {
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
    pub gradient_norm: f64,
    /// Ascending eigenvalues of the Hessian.
    pub eigenvalues: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct Phi1Maxima {
    pub lambda: f64,
    pub d: u32,
    /// All strict local maxima, sorted by decreasing value then by `α`.
    pub local_maxima: Vec<Phi1Optimum>,
    /// The local maxima whose value ties the largest within `1e-10`.
    pub global_maxima: Vec<Phi1Optimum>,
    /// `Φ₁` data at the symmetric point `(p*, p*)`.
    pub symmetric: Phi1Optimum,
    pub tree: TreeFixedPoints,
}

fn eig2(h: [[f64; 2]; 2]) -> [f64; 2] {
    let m = 0.5 * (h[0][0] + h[1][1]);
    let r = (0.25 * (h[0][0] - h[1][1]).powi(2) + h[0][1] * h[0][1]).sqrt();
    [m - r, m + r]
}

fn inside(a: f64, b: f64) -> bool {
    a > 0.0 && b > 0.0 && a + b < 1.0
}

fn describe(a: f64, b: f64, lambda: f64, d: u32) -> Phi1Optimum {
    let p = DensityPoint { alpha: a, beta: b };
    let g = phi1_gradient(&p, lambda, d);
    Phi1Optimum {
        alpha: a,
        beta: b,
        value: phi1(&p, lambda, d),
        gradient_norm: (g[0] * g[0] + g[1] * g[1]).sqrt(),
        eigenvalues: eig2(phi1_hessian(&p, d)),
    }
}

/// Newton ascent with the Hessian shifted to be negative definite, so every
/// step is an ascent direction; Armijo backtracking keeps the iterate inside.
fn ascend(mut a: f64, mut b: f64, lambda: f64, d: u32) -> (f64, f64) {
    for _ in 0..2000 {
        let p = DensityPoint { alpha: a, beta: b };
        let g = phi1_gradient(&p, lambda, d);
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if gn < 1e-13 {
            break;
        }
        let mut h = phi1_hessian(&p, d);
        let top = eig2(h)[1];
        if top > -1e-8 {
            let shift = top + 1e-3f64.max(top.abs());
            h[0][0] -= shift;
            h[1][1] -= shift;
        }
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let da = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let db = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        let f0 = phi1(&p, lambda, d);
        let slope = g[0] * da + g[1] * db;
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let (na, nb) = (a + t * da, b + t * db);
            if inside(na, nb) && phi1(&DensityPoint { alpha: na, beta: nb }, lambda, d) >= f0 + 1e-4 * t * slope {
                a = na;
                b = nb;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (a, b)
}

pub fn maximize_phi1(lambda: f64, d: u32) -> Result<Phi1Maxima> {
    let tree = semi_invariant_fixed_points(lambda, d)?;
    let h = 1.0 / GRID as f64;
    let value = |i: usize, j: usize| -> Option<f64> {
        let (a, b) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
        inside(a, b).then(|| phi1(&DensityPoint { alpha: a, beta: b }, lambda, d))
    };
    let mut seeds = Vec::new();
    for i in 0..GRID {
        for j in 0..GRID {
            let Some(v) = value(i, j) else { continue };
            let mut is_peak = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= GRID as i64 || nj >= GRID as i64 {
                        continue;
                    }
                    if let Some(w) = value(ni as usize, nj as usize) {
                        if w > v {
                            is_peak = false;
                        }
                    }
                }
            }
            if is_peak {
                seeds.push(((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
            }
        }
    }
    let mut local_maxima: Vec<Phi1Optimum> = Vec::new();
    // Φ₁ is symmetric in (α, β); near the edges the ascent from one seed can
    // stall where its mirror converges, so every converged point is also
    // tried reflected.
    let mut starts: Vec<(f64, f64)> = seeds.iter().map(|&(a0, b0)| ascend(a0, b0, lambda, d)).collect();
    starts.extend(starts.clone().into_iter().map(|(a, b)| (b, a)));
    for (a0, b0) in starts {
        let (a, b) = ascend(a0, b0, lambda, d);
        let opt = describe(a, b, lambda, d);
        if opt.eigenvalues[1] >= 0.0 || opt.gradient_norm > 1e-8 {
            continue;
        }
        if !local_maxima.iter().any(|m| (m.alpha - a).abs() < 1e-7 && (m.beta - b).abs() < 1e-7) {
            local_maxima.push(opt);
        }
    }
    local_maxima.sort_by(|x, y| y.value.total_cmp(&x.value).then(x.alpha.total_cmp(&y.alpha)));
    let top = local_maxima.first().map_or(f64::NEG_INFINITY, |m| m.value);
    let mut global_maxima: Vec<Phi1Optimum> = local_maxima.iter().copied().filter(|m| m.value >= top - 1e-10).collect();
    global_maxima.sort_by(|x, y| x.alpha.total_cmp(&y.alpha));
    let symmetric = describe(tree.p_star, tree.p_star, lambda, d);
    Ok(Phi1Maxima { lambda, d, local_maxima, global_maxima, symmetric, tree })
}
