//! Multistart Newton search for every stationary point of `f(γ, δ, ε)` in
//! the interior of the overlap region.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use super::derivs::{grad_unchecked, hessian_unchecked};
use super::{f_unchecked, in_region, DensityPoint, OverlapPoint};
use crate::error::{invalid, Result};

const MAX_ITER: usize = 200;
const GRAD_TOL: f64 = 1e-11;
const CLUSTER_RADIUS: f64 = 1e-6;
const START_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct StationaryPoint {
    pub point: OverlapPoint,
    pub value: f64,
    pub gradient_norm: f64,
    pub hessian: [[f64; 3]; 3],
    /// Ascending.
    pub eigenvalues: [f64; 3],
    /// `(c2, c1, c0)` of the monic characteristic polynomial
    /// `x³ + c2·x² + c1·x + c0 = det(xI − H)`.
    pub char_poly: [f64; 3],
    pub is_max: bool,
    /// Number of starts that converged into this cluster.
    pub hits: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryReport {
    pub density: DensityPoint,
    pub d: u32,
    pub n_starts: usize,
    pub failed_starts: usize,
    /// Distinct stationary points, sorted by `(γ, δ, ε)`.
    pub clusters: Vec<StationaryPoint>,
    /// Exactly one cluster was found and it is a strict local maximum.
    pub unique_in_region: bool,
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn to_point(v: &Vector3<f64>) -> OverlapPoint {
    OverlapPoint::new(v[0], v[1], v[2])
}

fn mat(h: [[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| h[i][j])
}

/// Newton on `∇f = 0` with a backtracking line search on `½|∇f|²` that never
/// leaves the interior, falling back to Levenberg–Marquardt steps when the
/// Newton direction does not decrease the residual.
fn solve_from(p: &DensityPoint, start: OverlapPoint, d: u32) -> Option<OverlapPoint> {
    let mut x = Vector3::new(start.gamma, start.delta, start.epsilon);
    let mut g = grad_unchecked(p, &start, d);
    let mut mu = 1e-3;
    for _ in 0..MAX_ITER {
        let gn = norm(&g);
        if gn <= GRAD_TOL {
            return Some(to_point(&x));
        }
        let h = mat(hessian_unchecked(p, &to_point(&x), d));
        let gv = Vector3::from(g);
        let try_step = |dir: Vector3<f64>| -> Option<(Vector3<f64>, [f64; 3])> {
            let mut t = 1.0;
            for _ in 0..50 {
                let cand = x + dir * t;
                let o = to_point(&cand);
                if in_region(p, &o, 1e-14) {
                    let gc = grad_unchecked(p, &o, d);
                    if gc.iter().all(|v| v.is_finite()) && norm(&gc) < (1.0 - 1e-4 * t) * gn {
                        return Some((cand, gc));
                    }
                }
                t *= 0.5;
            }
            None
        };
        let newton = h.lu().solve(&(-gv));
        let mut accepted = newton.and_then(try_step);
        if accepted.is_none() {
            let jtj = h.transpose() * h;
            let scale = jtj.diagonal().max().max(1.0);
            for _ in 0..30 {
                let dir = (jtj + Matrix3::identity() * (mu * scale)).lu().solve(&(-(h.transpose() * gv)));
                if let Some(acc) = dir.and_then(try_step) {
                    mu = (mu * 0.3).max(1e-12);
                    accepted = Some(acc);
                    break;
                }
                mu *= 10.0;
            }
        }
        let (nx, ng) = accepted?;
        x = nx;
        g = ng;
    }
    (norm(&g) <= GRAD_TOL).then(|| to_point(&x))
}

fn classify(p: &DensityPoint, o: OverlapPoint, lambda: f64, d: u32, hits: usize) -> StationaryPoint {
    let g = grad_unchecked(p, &o, d);
    let h = hessian_unchecked(p, &o, d);
    let m = mat(h);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let trace = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    StationaryPoint {
        point: o,
        value: f_unchecked(p, &o, lambda, d),
        gradient_norm: norm(&g),
        hessian: h,
        eigenvalues: [ev[0], ev[1], ev[2]],
        char_poly: [-trace, minors, -m.determinant()],
        is_max: ev[2] < -1e-9,
        hits,
    }
}

/// Quasi-random (Halton) starts inside the region, each polished by
/// safeguarded Newton. Converged points within `1e-6` of one another form one
/// cluster. Starts that fail to converge in 200 iterations are counted in
/// `failed_starts`.
pub fn find_stationary_points(p: &DensityPoint, lambda: f64, d: u32, n_starts: usize) -> Result<StationaryReport> {
    if n_starts == 0 {
        return Err(invalid("n_starts must be positive"));
    }
    if !(p.alpha > 0.0 && p.beta > 0.0 && p.alpha + p.beta < 1.0) {
        return Err(invalid("stationary search needs (alpha, beta) in the open triangle"));
    }
    let mut starts = Vec::with_capacity(n_starts);
    let mut i = 1u64;
    while starts.len() < n_starts && i < 1000 * n_starts as u64 + 1000 {
        let o = OverlapPoint::new(halton(i, 2) * p.alpha, halton(i, 3) * p.beta, halton(i, 5) * p.alpha);
        if in_region(p, &o, START_MARGIN) {
            starts.push(o);
        }
        i += 1;
    }
    let results: Vec<Option<OverlapPoint>> = starts.par_iter().map(|&s| solve_from(p, s, d)).collect();
    let failed_starts = results.iter().filter(|r| r.is_none()).count() + (n_starts - starts.len());

    let mut found: Vec<OverlapPoint> = results.into_iter().flatten().collect();
    found.sort_by(|a, b| a.as_array().partial_cmp(&b.as_array()).unwrap());
    let mut groups: Vec<(OverlapPoint, usize)> = Vec::new();
    for o in found {
        let close = groups.iter_mut().find(|(c, _)| {
            let (a, b) = (c.as_array(), o.as_array());
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt() <= CLUSTER_RADIUS
        });
        match close {
            Some((_, n)) => *n += 1,
            None => groups.push((o, 1)),
        }
    }
    let clusters: Vec<StationaryPoint> = groups.into_iter().map(|(o, n)| classify(p, o, lambda, d, n)).collect();
    let unique_in_region = clusters.len() == 1 && clusters[0].is_max;
    Ok(StationaryReport { density: *p, d, n_starts, failed_starts, clusters, unique_in_region })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessScan {
    pub d: u32,
    pub radius: f64,
    /// One report per `(α, β)` on the square grid of half-width `radius`
    /// around `(1/d, 1/d)`.
    pub points: Vec<StationaryReport>,
    /// Every grid point has a single stationary point, a strict maximum.
    pub all_unique: bool,
}

/// Run the stationary search on a `(2·steps+1)²` grid within `radius` of
/// `α = β = 1/d`. The size of the neighbourhood on which the maximum stays
/// unique is not known in closed form, so it is left to the caller.
pub fn uniqueness_scan(d: u32, lambda: f64, radius: f64, steps: usize, n_starts: usize) -> Result<UniquenessScan> {
    if !(radius >= 0.0 && radius < 1.0 / d as f64) {
        return Err(invalid(format!("radius must lie in [0, 1/d), got {radius}")));
    }
    let c = 1.0 / d as f64;
    let h = if steps == 0 { 0.0 } else { radius / steps as f64 };
    let k = steps as i64;
    let mut points = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let p = DensityPoint::new(c + i as f64 * h, c + j as f64 * h)?;
            points.push(find_stationary_points(&p, lambda, d, n_starts)?);
        }
    }
    let all_unique = points.iter().all(|r| r.unique_in_region);
    Ok(UniquenessScan { d, radius, points, all_unique })
}
