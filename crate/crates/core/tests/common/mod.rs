#![allow(dead_code)]

use hardcore::exponents::{
    eps_hat, g_fn, grad_f, grad_g, hessian_f, hessian_g, region_slacks, second_moment_f, DensityPoint, OverlapPoint,
};
use hardcore::graphgen::BipartiteMultigraph;
use rand::Rng;

pub fn permutations(n: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, (n - 1) as u32);
            out.push(q);
        }
    }
    out
}

/// Every graph of RG(n, d), one per ordered tuple of matchings.
pub fn all_graphs(n: usize, d: usize) -> Vec<BipartiteMultigraph> {
    let perms = permutations(n);
    let mut tuples: Vec<Vec<Vec<u32>>> = vec![vec![]];
    for _ in 0..d {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                perms.iter().map(move |p| {
                    let mut t = t.clone();
                    t.push(p.clone());
                    t
                })
            })
            .collect();
    }
    tuples.into_iter().map(|m| BipartiteMultigraph::from_matchings(n, m).unwrap()).collect()
}

/// Independent-set count at occupancy `(a, b)` by checking every pair of subsets.
pub fn count_pairs(g: &BipartiteMultigraph, a: usize, b: usize) -> u128 {
    let n = g.n();
    let mut c = 0;
    for s in 0u32..1 << n {
        if s.count_ones() as usize != a {
            continue;
        }
        for t in 0u32..1 << n {
            if t.count_ones() as usize != b {
                continue;
            }
            let ok = g.matchings().iter().all(|m| (0..n).all(|u| s >> u & 1 == 0 || t >> m[u] & 1 == 0));
            if ok {
                c += 1;
            }
        }
    }
    c
}

/// `(ln E[Z^{a,b}], ln E[(Z^{a,b})²])` averaged over every graph.
pub fn exhaustive_log_moments(n: usize, a: usize, b: usize, lambda: f64, d: usize) -> (f64, f64) {
    let graphs = all_graphs(n, d);
    let (mut s1, mut s2) = (0u128, 0u128);
    for g in &graphs {
        let c = count_pairs(g, a, b);
        s1 += c;
        s2 += c * c;
    }
    let ln_n = (graphs.len() as f64).ln();
    let w = (a + b) as f64 * lambda.ln();
    let lg = |s: u128| if s == 0 { f64::NEG_INFINITY } else { (s as f64).ln() };
    (lg(s1) - ln_n + w, lg(s2) - ln_n + 2.0 * w)
}

/// A random strictly interior `(α, β, γ, δ, ε)` with every region slack at
/// least `margin`.
pub fn random_interior<R: Rng>(rng: &mut R, margin: f64) -> (DensityPoint, OverlapPoint) {
    loop {
        let a = rng.gen_range(0.05..0.45);
        let b = rng.gen_range(0.05..0.45);
        if a + b > 0.9 {
            continue;
        }
        let p = DensityPoint::new(a, b).unwrap();
        let o = OverlapPoint::new(rng.gen_range(0.0..a), rng.gen_range(0.0..b), rng.gen_range(0.0..a));
        if region_slacks(&p, &o).iter().all(|&s| s >= margin) {
            return (p, o);
        }
    }
}

/// A random `(α, β, γ, δ)` for which `(γ, δ, ε̂)` has every slack at least `margin`.
pub fn random_hat_point<R: Rng>(rng: &mut R, margin: f64) -> (DensityPoint, f64, f64) {
    loop {
        let (p, o) = random_interior(rng, margin);
        let e = eps_hat(&p, o.gamma, o.delta).unwrap();
        if region_slacks(&p, &OverlapPoint::new(o.gamma, o.delta, e)).iter().all(|&s| s >= margin) {
            return (p, o.gamma, o.delta);
        }
    }
}

fn scaled_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = analytic.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    analytic.iter().zip(numeric).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// Largest central-difference discrepancy of the gradient and Hessian of
/// `f`, relative to the largest analytic entry (at least 1).
pub fn fd_error_f(p: &DensityPoint, o: &OverlapPoint, d: u32, h: f64) -> (f64, f64) {
    let x = o.as_array();
    let at = |v: [f64; 3]| OverlapPoint::new(v[0], v[1], v[2]);
    let g = grad_f(p, o, d).unwrap();
    let hm = hessian_f(p, o, d).unwrap();
    let mut num_g = [0.0; 3];
    let mut num_h = [[0.0; 3]; 3];
    for k in 0..3 {
        let (mut xp, mut xm) = (x, x);
        xp[k] += h;
        xm[k] -= h;
        num_g[k] =
            (second_moment_f(p, &at(xp), 1.0, d).unwrap() - second_moment_f(p, &at(xm), 1.0, d).unwrap()) / (2.0 * h);
        let (gp, gm) = (grad_f(p, &at(xp), d).unwrap(), grad_f(p, &at(xm), d).unwrap());
        for j in 0..3 {
            num_h[j][k] = (gp[j] - gm[j]) / (2.0 * h);
        }
    }
    (scaled_err(&g, &num_g), scaled_err(hm.as_flattened(), num_h.as_flattened()))
}

pub fn fd_error_g(p: &DensityPoint, gamma: f64, delta: f64, d: u32, h: f64) -> (f64, f64) {
    let gr = grad_g(p, gamma, delta, d).unwrap();
    let hm = hessian_g(p, gamma, delta, d).unwrap();
    let x = [gamma, delta];
    let mut num_g = [0.0; 2];
    let mut num_h = [[0.0; 2]; 2];
    for k in 0..2 {
        let (mut xp, mut xm) = (x, x);
        xp[k] += h;
        xm[k] -= h;
        num_g[k] = (g_fn(p, xp[0], xp[1], 1.0, d).unwrap() - g_fn(p, xm[0], xm[1], 1.0, d).unwrap()) / (2.0 * h);
        let (gp, gm) = (grad_g(p, xp[0], xp[1], d).unwrap(), grad_g(p, xm[0], xm[1], d).unwrap());
        for j in 0..2 {
            num_h[j][k] = (gp[j] - gm[j]) / (2.0 * h);
        }
    }
    (scaled_err(&gr, &num_g), scaled_err(hm.as_flattened(), num_h.as_flattened()))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(mut x: Vec<f64>, mut y: Vec<f64>) -> f64 {
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        best = best.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    best
}
