//! Exact finite-n moments of `Z^{a,b}` over RG(n, d), the limiting ratio
//! `τ^{α,β}(d)` and the short-cycle statistics that explain it.
//!
//! `Z^{a,b}` is the weighted count `λ^{a+b}·#{independent sets S ∪ T with
//! |S| = a on the left and |T| = b on the right}`.

mod cycles;
mod tau;

pub use cycles::{
    conditioning_summary, cycle_delta, cycle_lambda, rho, size_biased_cycle_check, ConditioningSummary, CycleEstimate,
    SizeBiasedReport, MAX_SIZE_BIASED_N,
};
pub use tau::{
    abc_coefficients, inner_amplitude, star_hessian, tau, tau_by_quadrature, tau_minus_numerator, TauQuadrature,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numeric::{ln_binomial_i, LogSum};

fn check_counts(n: usize, a: usize, b: usize) -> Result<()> {
    if n == 0 || a > n || b > n {
        return Err(invalid(format!("need 0 <= a, b <= n and n >= 1, got n={n}, a={a}, b={b}")));
    }
    Ok(())
}

/// `ln E[Z^{a,b}] = ln[C(n,a)·C(n,b)·λ^{a+b}·(C(n−b,a)/C(n,a))^d]`; `-inf`
/// when `a + b > n`.
pub fn expected_z(n: usize, a: usize, b: usize, lambda: f64, d: u32) -> Result<f64> {
    check_counts(n, a, b)?;
    if a + b > n {
        return Ok(f64::NEG_INFINITY);
    }
    let (n, a, b) = (n as i64, a as i64, b as i64);
    let per_matching = ln_binomial_i(n - b, a) - ln_binomial_i(n, a);
    Ok(ln_binomial_i(n, a) + ln_binomial_i(n, b) + (a + b) as f64 * lambda.ln() + d as f64 * per_matching)
}

/// Log-probability that one uniform matching keeps both `(S₁, T₁)` and
/// `(S₂, T₂)` independent, where `|S₁ ∩ S₂| = c`, `|T₁ ∩ T₂| = e` and
/// exactly `k` vertices of `S₁ \ S₂` land outside `T₁ ∪ T₂`.
pub fn log_avoidance_term(n: usize, a: usize, b: usize, c: usize, e: usize, k: usize) -> f64 {
    let (n, a, b, c, e, k) = (n as i64, a as i64, b as i64, c as i64, e as i64, k as i64);
    let outside = n - 2 * b + e;
    // S₁∩S₂ avoids T₁∪T₂; S₁\S₂ avoids T₁, k of it also avoids T₂; S₂\S₁
    // avoids T₂ among what is left.
    ln_binomial_i(outside, c) - ln_binomial_i(n, c) + ln_binomial_i(outside - c, k) + ln_binomial_i(b - e, a - c - k)
        - ln_binomial_i(n - c, a - c)
        + ln_binomial_i(n - b - c - k, a - c)
        - ln_binomial_i(n - a, a - c)
}

/// Log of the per-matching probability that both sets stay independent,
/// summed over `k`.
fn log_pair_probability(n: usize, a: usize, b: usize, c: usize, e: usize) -> f64 {
    let mut acc = LogSum::new();
    for k in 0..=(a - c) {
        acc.add(log_avoidance_term(n, a, b, c, e, k));
    }
    acc.value()
}

/// `ln E[(Z^{a,b})²]`, the exact sum over ordered pairs of sets by their
/// overlaps `(c, e)`. The outer index `c` is spread over threads; partial
/// sums are combined in index order so the result is thread-count free.
pub fn expected_z2(n: usize, a: usize, b: usize, lambda: f64, d: u32) -> Result<f64> {
    check_counts(n, a, b)?;
    if a + b > n {
        return Ok(f64::NEG_INFINITY);
    }
    let (ni, ai, bi) = (n as i64, a as i64, b as i64);
    let partial: Vec<f64> = (0..=a)
        .into_par_iter()
        .map(|c| {
            let ci = c as i64;
            let pairs_left = ln_binomial_i(ai, ci) + ln_binomial_i(ni - ai, ai - ci);
            let mut acc = LogSum::new();
            for e in 0..=b {
                let ei = e as i64;
                let pairs_right = ln_binomial_i(bi, ei) + ln_binomial_i(ni - bi, bi - ei);
                if pairs_left.is_infinite() || pairs_right.is_infinite() {
                    continue;
                }
                let p = log_pair_probability(n, a, b, c, e);
                acc.add(pairs_left + pairs_right + d as f64 * p);
            }
            acc.value()
        })
        .collect();
    let mut total = LogSum::new();
    for v in partial {
        total.add(v);
    }
    let base = ln_binomial_i(ni, ai) + ln_binomial_i(ni, bi) + 2.0 * (a + b) as f64 * lambda.ln();
    Ok(base + total.value())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentPoint {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub lambda: f64,
    pub d: u32,
    pub log_ez: f64,
    pub log_ez2: f64,
    /// `E[Z²]/E[Z]²`, independent of `λ`.
    pub ratio: f64,
}

pub fn moment_point(n: usize, a: usize, b: usize, lambda: f64, d: u32) -> Result<MomentPoint> {
    let log_ez = expected_z(n, a, b, lambda, d)?;
    let log_ez2 = expected_z2(n, a, b, lambda, d)?;
    let ratio = if log_ez == f64::NEG_INFINITY { f64::NAN } else { (log_ez2 - 2.0 * log_ez).exp() };
    Ok(MomentPoint { n, a, b, lambda, d, log_ez, log_ez2, ratio })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub d: u32,
    pub seed: u64,
    /// `ln E[Z^{a,b}]` at `λ = 1`.
    pub log_ez: f64,
    /// `ln Z^{a,b}(G)` per sampled graph (`-inf` if no such set exists).
    pub log_z: Vec<f64>,
    /// Fraction of graphs with `Z^{a,b}(G) ≥ E[Z^{a,b}]/n`.
    pub fraction_above: f64,
}

/// Sample graphs and count how often `Z^{a,b}(G) ≥ E[Z^{a,b}]/n`, the
/// finite-`n` form of the almost-sure lower bound. `λ` cancels from both
/// sides, so plain counts are compared.
pub fn concentration_check(
    n: usize,
    a: usize,
    b: usize,
    d: u32,
    n_samples: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    check_counts(n, a, b)?;
    if n_samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let log_ez = expected_z(n, a, b, 1.0, d)?;
    let log_z = (0..n_samples as u64)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let g = crate::graphgen::sample_graph_indexed(n, d as usize, seed, k)?;
            let c = crate::enumerate::occupancy_counts(&g)?[a][b];
            Ok(if c == 0 { f64::NEG_INFINITY } else { (c as f64).ln() })
        })
        .collect::<Result<Vec<_>>>()?;
    let bar = log_ez - (n as f64).ln();
    let above = log_z.iter().filter(|&&z| z >= bar - 1e-12).count();
    Ok(ConcentrationReport { n, a, b, d, seed, log_ez, fraction_above: above as f64 / n_samples as f64, log_z })
}
