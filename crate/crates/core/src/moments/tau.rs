//! The limiting ratio `τ^{α,β}(d) = lim E[Z²]/E[Z]²` in closed form and by
//! Gaussian integration around the star overlap.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exponents::{hessian_f, DensityPoint};
use crate::quadrature::{integrate, integrate_2d, QuadResult};

/// Half-width of the integration box in standard deviations.
const BOX_SIGMAS: f64 = 8.0;

fn tau_denominator(alpha: f64, beta: f64, d: u32) -> Result<f64> {
    let df = d as f64;
    let r = 1.0 - alpha - beta;
    let last = r - (df - 2.0) * alpha * beta;
    if !(alpha >= 0.0 && beta >= 0.0) || r <= 0.0 || last <= 0.0 {
        return Err(Error::TauDiverges { alpha, beta, d });
    }
    let half = 0.5 * (df - 1.0);
    Ok((r + 2.0 * alpha * beta).powf(half) * r.powf(half) * (r + df * alpha * beta).sqrt() * last.sqrt())
}

/// Closed-form `τ` with numerator `((1−α)(1−β))^d`. This is the value the
/// cycle decomposition `exp(Σ λ_i δ_i²)` and the Gaussian integral both give.
pub fn tau(alpha: f64, beta: f64, d: u32) -> Result<f64> {
    let den = tau_denominator(alpha, beta, d)?;
    Ok(((1.0 - alpha) * (1.0 - beta)).powi(d as i32) / den)
}

/// The same denominator over `(1−α−β−αβ)^d`. Kept for comparison only; it
/// disagrees with both independent routes.
pub fn tau_minus_numerator(alpha: f64, beta: f64, d: u32) -> Result<f64> {
    let den = tau_denominator(alpha, beta, d)?;
    Ok((1.0 - alpha - beta - alpha * beta).powi(d as i32) / den)
}

/// Closed-form entries of the Hessian of `f` at the star overlap
/// `(α², β², α(1−α−β))`, in `(γ, δ, ε)` order.
pub fn star_hessian(alpha: f64, beta: f64, d: u32) -> [[f64; 3]; 3] {
    let (a, b, d) = (alpha, beta, d as f64);
    let r = 1.0 - a - b;
    let h11 = (a + d - 2.0) / (a * (a - 1.0).powi(2)) - (b + d * a) / (a * a * b) + d / ((1.0 - a) * (1.0 - b))
        - d / (b * (1.0 - b) * r);
    let h12 = d / (b * (1.0 - b) * r);
    let h13 = -d * (1.0 - a - 2.0 * b + 2.0 * a * b + b * b) / (a * b * (1.0 - a) * (1.0 - b) * r);
    let h22 = -(r + d * a * b) / (b * b * (1.0 - b).powi(2) * r);
    let h23 = d / (b * (1.0 - b) * r);
    let h33 = -d * (r + 2.0 * a * b) / (a * b * (1.0 - a) * (1.0 - b) * r);
    [[h11, h12, h13], [h12, h22, h23], [h13, h23, h33]]
}

/// `(A, B, C)` with `(1/2d)·vᵀH v = Aε² + Bε + C` for `v = (γ, δ, ε)`,
/// written out as explicit rational functions of `(α, β, γ, δ)`.
pub fn abc_coefficients(alpha: f64, beta: f64, d: u32, gamma: f64, delta: f64) -> (f64, f64, f64) {
    let (a, b, d, g, dl) = (alpha, beta, d as f64, gamma, delta);
    let q = -a + b * a + 1.0 - 2.0 * b + b * b;
    let big_a = (2.0 * b * a - b + 1.0 - a) / (2.0 * b * a * (1.0 - b - a + b * a) * (b + a - 1.0));
    let big_b =
        (-a * g + 2.0 * b * g * a + g - 2.0 * b * g + b * b * g + dl * a * a - dl * a) / (b * a * q * (a - 1.0));
    let poly = 2.0 * d * b * a.powi(3) - d * a.powi(3) + 2.0 * d * b * b * a * a - 5.0 * d * a * a * b
        + 2.0 * d * a * a
        + d * b.powi(3) * a
        - 3.0 * d * b * b * a
        - b * b * a
        + 3.0 * d * b * a
        + b * a
        - d * a
        - b.powi(3)
        + 2.0 * b * b
        - b;
    let big_c = g * g * poly / (2.0 * d * a * a * (b - 1.0) * (-1.0 + b + a) * (a - 1.0).powi(2) * b)
        + dl * g / (2.0 * b * q)
        + (g * d * b * b - g * d * b + d * b * a * dl - dl * a + dl - dl * b) * dl / (2.0 * d * b * b * q * (b - 1.0));
    (big_a, big_b, big_c)
}

/// `A_d = (1−α)(1−β)/√((1−α−β+2αβ)(1−α−β))`, the amplitude of the inner
/// Gaussian integral over `ε` including its prefactors.
pub fn inner_amplitude(alpha: f64, beta: f64) -> f64 {
    let r = 1.0 - alpha - beta;
    (1.0 - alpha) * (1.0 - beta) / ((r + 2.0 * alpha * beta) * r).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct TauQuadrature {
    pub alpha: f64,
    pub beta: f64,
    pub d: u32,
    pub closed_form: f64,
    /// Inner `ε` integral done in closed form through `A_d` and `B_d`.
    pub two_d: f64,
    pub two_d_error: f64,
    /// All three directions integrated numerically with `H_f` from the
    /// analytic derivatives.
    pub three_d: f64,
    pub three_d_error: f64,
    pub converged: bool,
    pub max_pairwise_diff: f64,
}

/// Standard deviations of the 2-D Gaussian `exp(q(u))`, `q` negative
/// definite quadratic given by its values at `e₁`, `e₂`, `e₁ + e₂`.
fn box_from_quadratic(q1: f64, q2: f64, q12: f64) -> Result<(f64, f64)> {
    // q(u) = ½ uᵀ M u
    let (m11, m22) = (2.0 * q1, 2.0 * q2);
    let m12 = q12 - q1 - q2;
    let det = m11 * m22 - m12 * m12;
    if !(m11 < 0.0 && det > 0.0) {
        return Err(domain("the outer Gaussian is not negative definite"));
    }
    // Covariance (−M)⁻¹.
    Ok(((-m22 / det).sqrt(), (-m11 / det).sqrt()))
}

/// Evaluate `τ` by integrating the Gaussian approximation of the
/// second-moment sum, once with the inner `ε` integral in closed form and
/// once fully numerically, on boxes of ±8 standard deviations.
pub fn tau_by_quadrature(alpha: f64, beta: f64, d: u32) -> Result<TauQuadrature> {
    let closed_form = tau(alpha, beta, d)?;
    let p = DensityPoint::new(alpha, beta)?;
    let h = hessian_f(&p, &p.star(), d)?;
    let hm = Matrix3::from_fn(|i, j| h[i][j]);
    if SymmetricEigen::new(hm).eigenvalues.max() >= 0.0 {
        return Err(domain(format!("Hessian at the star is not negative definite for ({alpha}, {beta}), d={d}")));
    }
    let df = d as f64;
    let prefactor = 1.0 / (2.0 * std::f64::consts::PI * alpha * (1.0 - alpha) * beta * (1.0 - beta));
    let rel = 1e-10;

    // Route through A_d and B_d.
    let amp = inner_amplitude(alpha, beta);
    let neg_bd = |g: f64, dl: f64| {
        let (a, b, c) = abc_coefficients(alpha, beta, d, g, dl);
        c - b * b / (4.0 * a)
    };
    let (sg, sd) = box_from_quadratic(df * neg_bd(1.0, 0.0), df * neg_bd(0.0, 1.0), df * neg_bd(1.0, 1.0))?;
    let r2: QuadResult = integrate_2d(
        |g, dl| (amp * neg_bd(g, dl).exp()).powi(d as i32),
        (-BOX_SIGMAS * sg, BOX_SIGMAS * sg),
        (-BOX_SIGMAS * sd, BOX_SIGMAS * sd),
        rel,
    );

    // Route through the full Hessian.
    let schur = |i: usize, j: usize| h[i][j] - h[i][2] * h[j][2] / h[2][2];
    let q =
        |u: [f64; 2]| 0.5 * (schur(0, 0) * u[0] * u[0] + 2.0 * schur(0, 1) * u[0] * u[1] + schur(1, 1) * u[1] * u[1]);
    let (tg, td) = box_from_quadratic(q([1.0, 0.0]), q([0.0, 1.0]), q([1.0, 1.0]))?;
    let k = ((1.0 - alpha) * (1.0 - beta) / (alpha * beta)).sqrt() / (1.0 - alpha - beta);
    let inner_scale = k / (2.0 * std::f64::consts::PI).sqrt();
    let se = (df / -h[2][2]).sqrt();
    let r3 = integrate_2d(
        |g, dl| {
            let v = [g, dl];
            let mu = -(h[0][2] * g + h[1][2] * dl) / h[2][2];
            let inner = integrate(
                |e| {
                    let w = [v[0], v[1], e];
                    let mut s = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            s += w[i] * h[i][j] * w[j];
                        }
                    }
                    (s / (2.0 * df)).exp()
                },
                mu - BOX_SIGMAS * se,
                mu + BOX_SIGMAS * se,
                1e-300,
                1e-12,
                200,
            );
            (inner_scale * inner.value).powi(d as i32)
        },
        (-BOX_SIGMAS * tg, BOX_SIGMAS * tg),
        (-BOX_SIGMAS * td, BOX_SIGMAS * td),
        rel,
    );

    let (two_d, three_d) = (prefactor * r2.value, prefactor * r3.value);
    let diffs = [(two_d - closed_form).abs(), (three_d - closed_form).abs(), (two_d - three_d).abs()];
    Ok(TauQuadrature {
        alpha,
        beta,
        d,
        closed_form,
        two_d,
        two_d_error: prefactor * r2.error,
        three_d,
        three_d_error: prefactor * r3.error,
        converged: r2.converged && r3.converged,
        max_pairwise_diff: diffs.into_iter().fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::hessian_f;

    #[test]
    fn tau_values() {
        let t = tau(1.0 / 3.0, 1.0 / 3.0, 3).unwrap();
        // exp(ρ(1/2) + 2ρ(1/4)) with ρ(x) = −½ ln(1 − x²)
        let want = (-0.5 * (0.75f64).ln() - (15.0f64 / 16.0).ln()).exp();
        assert!((t - want).abs() < 1e-14);
        assert!((t - 1.2316805742712016).abs() < 1e-12);
        assert!((tau(1e-9, 1e-9, 3).unwrap() - 1.0).abs() < 1e-7);
        assert!(matches!(tau(0.5, 0.45, 3), Err(Error::TauDiverges { .. })));
    }

    #[test]
    fn star_hessian_matches_analytic_derivatives() {
        for &(a, b, d) in &[(1.0 / 3.0, 1.0 / 3.0, 3), (0.3, 0.35, 3), (0.25, 0.24, 4), (0.2, 0.19, 5)] {
            let p = DensityPoint::new(a, b).unwrap();
            let h = hessian_f(&p, &p.star(), d).unwrap();
            let c = star_hessian(a, b, d);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((h[i][j] - c[i][j]).abs() <= 1e-10 * h[i][j].abs().max(1.0), "{i}{j} {a} {b} {d}");
                }
            }
        }
    }

    #[test]
    fn abc_matches_quadratic_form() {
        let (a, b, d) = (0.3, 0.28, 3);
        let h = star_hessian(a, b, d);
        for &(g, dl) in &[(0.1, -0.2), (0.5, 0.3), (-1.0, 0.7)] {
            let (ca, cb, cc) = abc_coefficients(a, b, d, g, dl);
            let df = d as f64;
            assert!((ca - h[2][2] / (2.0 * df)).abs() < 1e-10 * ca.abs());
            assert!((cb - (h[0][2] * g + h[1][2] * dl) / df).abs() < 1e-10 * cb.abs().max(1.0));
            let want_c = (h[0][0] * g * g + 2.0 * h[0][1] * g * dl + h[1][1] * dl * dl) / (2.0 * df);
            assert!((cc - want_c).abs() < 1e-10 * want_c.abs().max(1.0));
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        for d in [3u32, 4] {
            let x = 1.0 / d as f64;
            let r = tau_by_quadrature(x, x, d).unwrap();
            assert!(r.converged);
            assert!(r.max_pairwise_diff < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn minus_numerator_differs() {
        let t = tau(1.0 / 3.0, 1.0 / 3.0, 3).unwrap();
        let tp = tau_minus_numerator(1.0 / 3.0, 1.0 / 3.0, 3).unwrap();
        assert!((t - tp).abs() > 0.5);
    }
}
