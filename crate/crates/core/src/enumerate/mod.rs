//! Exact per-graph quantities by enumeration: occupancy profile, partition
//! function, barrier measures, conductance bound and the Glauber spectral gap.
//!
//! Counting runs over subsets `S ⊆ V₁` only. Since `V₁` has no internal
//! edges, every `S` is admissible and contributes `C(free(S), b)` sets with
//! `|T| = b`, where `free(S) = n − |N(S)|`.

mod gap;

pub use gap::{exact_spectral_gap, glauber_kernel, GlauberKernel, SpectralGap, MAX_KERNEL_STATES};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphgen::BipartiteMultigraph;
use crate::numeric::{binomial_u128, LogSum};

pub const MAX_ENUM_N: usize = 26;
/// Largest `n` accepted by the double-sided oracle.
pub const MAX_BRUTE_FORCE_N: usize = 10;

/// Bits of the subset index fixed per parallel task.
const PREFIX_BITS: usize = 6;

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::SizeCap { what: "n", actual: n, cap });
    }
    Ok(())
}

/// `hist[a][f]` = number of `S ⊆ V₁` with `|S| = a` and `n − |N(S)| = f`.
fn free_histogram(g: &BipartiteMultigraph) -> Vec<Vec<u64>> {
    let n = g.n();
    let high = PREFIX_BITS.min(n);
    let low = n - high;
    let parts: Vec<Vec<Vec<u64>>> = (0..1u64 << high)
        .into_par_iter()
        .map(|prefix| {
            let mut hist = vec![vec![0u64; n + 1]; n + 1];
            let mut cover = vec![0u32; n];
            let mut covered = 0usize;
            let mut size = 0usize;
            let toggle = |u: usize, add: bool, cover: &mut [u32], covered: &mut usize| {
                for &v in g.left_neighbors(u) {
                    let c = &mut cover[v as usize];
                    if add {
                        *c += 1;
                        if *c == 1 {
                            *covered += 1;
                        }
                    } else {
                        *c -= 1;
                        if *c == 0 {
                            *covered -= 1;
                        }
                    }
                }
            };
            for bit in 0..high {
                if prefix >> bit & 1 == 1 {
                    toggle(low + bit, true, &mut cover, &mut covered);
                    size += 1;
                }
            }
            let mut in_s = vec![false; low];
            hist[size][n - covered] += 1;
            // Gray code: step i flips the lowest set bit of i.
            for i in 1..1u64 << low {
                let u = i.trailing_zeros() as usize;
                let add = !in_s[u];
                in_s[u] = add;
                toggle(u, add, &mut cover, &mut covered);
                if add {
                    size += 1;
                } else {
                    size -= 1;
                }
                hist[size][n - covered] += 1;
            }
            hist
        })
        .collect();
    let mut hist = vec![vec![0u64; n + 1]; n + 1];
    for part in parts {
        for (a, row) in part.into_iter().enumerate() {
            for (f, c) in row.into_iter().enumerate() {
                hist[a][f] += c;
            }
        }
    }
    hist
}

/// Exact counts of independent sets by occupancy, with `λ` weighting done in
/// log space on demand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyProfile {
    pub n: usize,
    pub lambda: f64,
    /// `counts[a][b]` = number of independent sets with `a` left and `b`
    /// right vertices.
    pub counts: Vec<Vec<u128>>,
}

impl OccupancyProfile {
    /// `ln W[a][b] = ln counts[a][b] + (a+b) ln λ`, or `-inf` for an exact zero.
    pub fn log_weight(&self, a: usize, b: usize) -> f64 {
        let c = self.counts[a][b];
        if c == 0 {
            f64::NEG_INFINITY
        } else {
            (c as f64).ln() + (a + b) as f64 * self.lambda.ln()
        }
    }

    /// `ln Σ W[a][b]` over cells accepted by `keep`.
    pub fn log_sum_where(&self, keep: impl Fn(usize, usize) -> bool) -> f64 {
        let mut acc = LogSum::new();
        for a in 0..=self.n {
            for b in 0..=self.n {
                if keep(a, b) {
                    acc.add(self.log_weight(a, b));
                }
            }
        }
        acc.value()
    }

    pub fn log_partition(&self) -> f64 {
        self.log_sum_where(|_, _| true)
    }

    pub fn total_count(&self) -> u128 {
        self.counts.iter().flatten().sum()
    }

    /// CSV with rows `a` and columns `b`, log-weights, `-inf` for exact zeros.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a");
        for b in 0..=self.n {
            out.push_str(&format!(",b{b}"));
        }
        out.push('\n');
        for a in 0..=self.n {
            out.push_str(&a.to_string());
            for b in 0..=self.n {
                let w = self.log_weight(a, b);
                if w == f64::NEG_INFINITY {
                    out.push_str(",-inf");
                } else {
                    out.push_str(&format!(",{w:.17e}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Number of independent sets at each occupancy `(a, b)`.
pub fn occupancy_counts(g: &BipartiteMultigraph) -> Result<Vec<Vec<u128>>> {
    let n = g.n();
    check_cap(n, MAX_ENUM_N)?;
    let hist = free_histogram(g);
    let mut counts = vec![vec![0u128; n + 1]; n + 1];
    for a in 0..=n {
        for f in 0..=n {
            let h = hist[a][f] as u128;
            if h == 0 {
                continue;
            }
            for b in 0..=f {
                counts[a][b] += h * binomial_u128(f as u64, b as u64);
            }
        }
    }
    Ok(counts)
}

pub fn occupancy_profile(g: &BipartiteMultigraph, lambda: f64) -> Result<OccupancyProfile> {
    Ok(OccupancyProfile { n: g.n(), lambda, counts: occupancy_counts(g)? })
}

/// `ln Z_{G,λ} = ln Σ_{S ⊆ V₁} λ^{|S|}(1+λ)^{free(S)}`.
pub fn partition_function(g: &BipartiteMultigraph, lambda: f64) -> Result<f64> {
    check_cap(g.n(), MAX_ENUM_N)?;
    let hist = free_histogram(g);
    let mut acc = LogSum::new();
    for (a, row) in hist.iter().enumerate() {
        for (f, &h) in row.iter().enumerate() {
            if h > 0 {
                acc.add((h as f64).ln() + a as f64 * lambda.ln() + f as f64 * lambda.ln_1p());
            }
        }
    }
    Ok(acc.value())
}

/// Independent-set counts by occupancy from all `2^{2n}` pairs `(S, T)`,
/// checking every edge. Slow; used as an oracle.
pub fn brute_force_counts(g: &BipartiteMultigraph) -> Result<Vec<Vec<u128>>> {
    let n = g.n();
    check_cap(n, MAX_BRUTE_FORCE_N)?;
    let edges: Vec<(usize, usize)> =
        g.matchings().iter().flat_map(|m| m.iter().enumerate().map(|(u, &v)| (u, v as usize))).collect();
    let mut counts = vec![vec![0u128; n + 1]; n + 1];
    for s in 0u32..1 << n {
        for t in 0u32..1 << n {
            if edges.iter().all(|&(u, v)| s >> u & 1 == 0 || t >> v & 1 == 0) {
                counts[s.count_ones() as usize][t.count_ones() as usize] += 1;
            }
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierMeasures {
    /// Occupancy-difference threshold.
    pub t: usize,
    /// `μ[a − b > t]`
    pub mu_i1: f64,
    /// `μ[b − a > t]`
    pub mu_i2: f64,
    /// `μ[|a − b| ≤ t]`
    pub mu_ib: f64,
    pub bottleneck_ratio: f64,
}

pub fn barrier_from_profile(p: &OccupancyProfile, t: usize) -> BarrierMeasures {
    let z = p.log_partition();
    let t = t as i64;
    let diff = |a: usize, b: usize| a as i64 - b as i64;
    let mu_i1 = (p.log_sum_where(|a, b| diff(a, b) > t) - z).exp();
    let mu_i2 = (p.log_sum_where(|a, b| -diff(a, b) > t) - z).exp();
    let mu_ib = (p.log_sum_where(|a, b| diff(a, b).abs() <= t) - z).exp();
    BarrierMeasures { t: t as usize, mu_i1, mu_i2, mu_ib, bottleneck_ratio: mu_ib / mu_i1.min(mu_i2) }
}

pub fn barrier_measures(g: &BipartiteMultigraph, lambda: f64, t: usize) -> Result<BarrierMeasures> {
    Ok(barrier_from_profile(&occupancy_profile(g, lambda)?, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConductanceBound {
    /// Lobe joined with the barrier to form `A`: 1 for `I₁`, 2 for `I₂`.
    pub lobe: u8,
    pub mu_a: f64,
    pub mu_b: f64,
    /// `μ[A] / (8 μ[B])` with `A = lobe ∪ barrier`, `B = barrier`.
    pub bound: f64,
    /// Whether `μ[A] ≤ 1/2`, the hypothesis under which `bound` is a
    /// mixing-time lower bound.
    pub applicable: bool,
    /// `min(μ[I₁], μ[I₂]) / (8 μ[B])`.
    pub lobe_only_bound: f64,
}

/// Mixing-time lower bound from the barrier. `A` is the smaller lobe plus
/// the barrier; if that exceeds half the mass the other lobe is tried, and
/// if both do the result is flagged inapplicable.
pub fn conductance_from_barrier(m: &BarrierMeasures) -> ConductanceBound {
    let (small, large) = if m.mu_i1 <= m.mu_i2 { ((1, m.mu_i1), (2, m.mu_i2)) } else { ((2, m.mu_i2), (1, m.mu_i1)) };
    let pick = [small, large].into_iter().find(|&(_, mu)| mu + m.mu_ib <= 0.5).unwrap_or(small);
    let mu_a = pick.1 + m.mu_ib;
    ConductanceBound {
        lobe: pick.0,
        mu_a,
        mu_b: m.mu_ib,
        bound: mu_a / (8.0 * m.mu_ib),
        applicable: mu_a <= 0.5,
        lobe_only_bound: small.1 / (8.0 * m.mu_ib),
    }
}

pub fn conductance_lower_bound(g: &BipartiteMultigraph, lambda: f64, t: usize) -> Result<ConductanceBound> {
    Ok(conductance_from_barrier(&barrier_measures(g, lambda, t)?))
}
