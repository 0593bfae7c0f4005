//! Short-cycle statistics: Poisson means `λ_i`, size-biased tilts `δ_i`, and a
//! Monte Carlo check of `E[Y·X_i]/E[Y] → λ_i(1 + δ_i)`.

use rayon::prelude::*;
use serde::Serialize;

use super::tau::tau;
use crate::enumerate::occupancy_counts;
use crate::error::{invalid, Error, Result};
use crate::graphgen::{count_cycles, sample_graph_indexed};

/// Largest `n` for which `Y` is computed by enumeration.
pub const MAX_SIZE_BIASED_N: usize = 14;

fn check_even(i: usize) -> Result<()> {
    if i < 2 || i % 2 != 0 {
        return Err(invalid(format!("cycle length must be even and >= 2, got {i}")));
    }
    Ok(())
}

/// `λ_i = ((d−1)^i + (d−1))/i`, the limiting mean number of `i`-cycles.
pub fn cycle_lambda(d: u32, i: usize) -> Result<f64> {
    check_even(i)?;
    let r = d as f64 - 1.0;
    Ok((r.powi(i as i32) + r) / i as f64)
}

/// `δ_i = (αβ/((1−α)(1−β)))^{i/2}`.
pub fn cycle_delta(alpha: f64, beta: f64, i: usize) -> Result<f64> {
    check_even(i)?;
    let x = alpha * beta / ((1.0 - alpha) * (1.0 - beta));
    Ok(x.powi(i as i32 / 2))
}

/// `ρ(y) = −½ ln(1 − y²) = Σ_{i even ≥ 2} y^i / i`.
pub fn rho(y: f64) -> f64 {
    -0.5 * (-(y * y)).ln_1p()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditioningSummary {
    pub d: u32,
    pub alpha: f64,
    pub beta: f64,
    /// Even cycle lengths `2, 4, …, i_max`.
    pub lengths: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub deltas: Vec<f64>,
    /// `Σ λ_i δ_i²` over the listed lengths.
    pub partial_sum: f64,
    /// `ρ((d−1)x) + (d−1)ρ(x)`, the full series.
    pub closed_form_sum: f64,
    pub tau_closed_form: f64,
}

pub fn conditioning_summary(alpha: f64, beta: f64, d: u32, i_max: usize) -> Result<ConditioningSummary> {
    check_even(i_max)?;
    let lengths: Vec<usize> = (2..=i_max).step_by(2).collect();
    let lambdas = lengths.iter().map(|&i| cycle_lambda(d, i)).collect::<Result<Vec<_>>>()?;
    let deltas = lengths.iter().map(|&i| cycle_delta(alpha, beta, i)).collect::<Result<Vec<_>>>()?;
    let partial_sum = lambdas.iter().zip(&deltas).map(|(l, dl)| l * dl * dl).sum();
    let x = alpha * beta / ((1.0 - alpha) * (1.0 - beta));
    let r = d as f64 - 1.0;
    let tau_closed_form = tau(alpha, beta, d)?;
    Ok(ConditioningSummary {
        d,
        alpha,
        beta,
        lengths,
        lambdas,
        deltas,
        partial_sum,
        closed_form_sum: rho(r * x) + r * rho(x),
        tau_closed_form,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleEstimate {
    /// Cycle lengths whose counts are multiplied, e.g. `[2]` or `[2, 4]`.
    pub lengths: Vec<usize>,
    /// `Σ Y·∏X_i / Σ Y`.
    pub estimate: f64,
    pub standard_error: f64,
    /// `∏ λ_i(1 + δ_i)` at `α = a/n`, `β = b/n`.
    pub target: f64,
    /// `|estimate − target| / standard_error`.
    pub z_score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeBiasedReport {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub d: u32,
    pub n_samples: usize,
    pub seed: u64,
    /// One entry per requested length, then the joint product over all of them
    /// when more than one length was requested.
    pub estimates: Vec<CycleEstimate>,
    /// No sampled graph had `Y > 0`.
    pub inconclusive: bool,
}

/// Ratio estimator `Σ w·x / Σ w` with its delta-method standard error.
fn ratio_estimate(w: &[f64], x: &[f64]) -> (f64, f64) {
    let m = w.len() as f64;
    let sw: f64 = w.iter().sum();
    let r = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mean_w = sw / m;
    let resid_var = w.iter().zip(x).map(|(a, b)| (a * b - r * a).powi(2)).sum::<f64>() / (m - 1.0);
    (r, (resid_var / m).sqrt() / mean_w)
}

/// Monte Carlo estimate of `E[Y·X_i]/E[Y]` over RG(n, d), with `Y` the exact
/// number of independent sets at occupancy `(a, b)` in each sampled graph.
/// With `a = b = 0`, `Y ≡ 1` and the estimates are plain cycle means; any `n`
/// is then allowed.
pub fn size_biased_cycle_check(
    n: usize,
    a: usize,
    b: usize,
    lengths: &[usize],
    d: u32,
    n_samples: usize,
    seed: u64,
) -> Result<SizeBiasedReport> {
    if lengths.is_empty() || n_samples < 2 {
        return Err(invalid("need at least one cycle length and two samples"));
    }
    for &i in lengths {
        check_even(i)?;
    }
    if a + b > 0 && n > MAX_SIZE_BIASED_N {
        return Err(Error::SizeCap { what: "n", actual: n, cap: MAX_SIZE_BIASED_N });
    }
    if a > n || b > n {
        return Err(invalid("occupancies must not exceed n"));
    }
    let i_max = *lengths.iter().max().expect("non-empty");
    let rows: Vec<(f64, Vec<f64>)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|k| -> Result<(f64, Vec<f64>)> {
            let g = sample_graph_indexed(n, d as usize, seed, k)?;
            let census = count_cycles(&g, i_max)?;
            let y = if a + b == 0 { 1.0 } else { occupancy_counts(&g)?[a][b] as f64 };
            Ok((y, lengths.iter().map(|&i| census.get(i) as f64).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    let w: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let inconclusive = w.iter().all(|&y| y == 0.0);
    let (alpha, beta) = (a as f64 / n as f64, b as f64 / n as f64);
    let mut estimates = Vec::new();
    let mut groups: Vec<Vec<usize>> = (0..lengths.len()).map(|j| vec![j]).collect();
    if lengths.len() > 1 {
        groups.push((0..lengths.len()).collect());
    }
    for group in groups {
        let x: Vec<f64> = rows.iter().map(|r| group.iter().map(|&j| r.1[j]).product()).collect();
        let mut target = 1.0;
        for &j in &group {
            target *= cycle_lambda(d, lengths[j])? * (1.0 + cycle_delta(alpha, beta, lengths[j])?);
        }
        let (estimate, standard_error) = if inconclusive { (f64::NAN, f64::NAN) } else { ratio_estimate(&w, &x) };
        estimates.push(CycleEstimate {
            lengths: group.iter().map(|&j| lengths[j]).collect(),
            estimate,
            standard_error,
            target,
            z_score: (estimate - target).abs() / standard_error,
        });
    }
    Ok(SizeBiasedReport { n, a, b, d, n_samples, seed, estimates, inconclusive })
}
