//! Exponential growth rates of the first and second moments of `Z^{α,β}`.
//!
//! All functions use natural logarithms and the convention `0 ln 0 = 0`, so
//! values are defined on the closed region. Derivatives live in [`derivs`]
//! and require a strictly interior point.

mod derivs;
mod phi1_max;
mod polys;
mod stationary;

pub use derivs::{eps_hat, eps_hat_gradient, g_fn, grad_f, grad_g, hessian_f, hessian_g, DERIV_MIN_SLACK};
pub use phi1_max::{maximize_phi1, Phi1Maxima, Phi1Optimum};
pub use polys::{verify_appendix_polynomials, IdentityCheck, PolyCheck, PolyClaim, PolynomialReport};
pub use stationary::{find_stationary_points, uniqueness_scan, StationaryPoint, StationaryReport, UniquenessScan};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::numeric::xlogx;

/// Tolerance for closed-region membership of value functions.
const REGION_TOL: f64 = 1e-13;

pub fn entropy(x: f64) -> f64 {
    -xlogx(x) - xlogx(1.0 - x)
}

/// `H1(x, y) = −x(ln x − ln y) + (x − y)(ln(y − x) − ln y)`, which equals
/// `y·Ent(x/y)` for `y > 0`.
pub fn h1(x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0) || x > y * (1.0 + 1e-15) + 1e-300 {
        return Err(domain(format!("h1 needs 0 <= x <= y, got x={x}, y={y}")));
    }
    Ok(h1_unchecked(x, y))
}

pub(crate) fn h1_unchecked(x: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let r = (y - x).max(0.0);
    let a = if x == 0.0 { 0.0 } else { -x * (x.ln() - y.ln()) };
    let b = if r == 0.0 { 0.0 } else { -r * (r.ln() - y.ln()) };
    a + b
}

/// `y·Ent(x/y)` written with the entropy function, used where the moment
/// formulas are stated in entropy form.
fn scaled_entropy(x: f64, y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        y * entropy((x / y).clamp(0.0, 1.0))
    }
}

/// Side densities `(α, β)` in the triangle `α, β ≥ 0`, `α + β ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    pub alpha: f64,
    pub beta: f64,
}

impl DensityPoint {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha + beta <= 1.0 + REGION_TOL) {
            return Err(domain(format!("({alpha}, {beta}) is outside the triangle")));
        }
        Ok(Self { alpha, beta })
    }

    /// The overlap at which two independent sets of these densities look
    /// uncorrelated: `(α², β², α(1−α−β))`.
    pub fn star(&self) -> OverlapPoint {
        let (a, b) = (self.alpha, self.beta);
        OverlapPoint { gamma: a * a, delta: b * b, epsilon: a * (1.0 - a - b) }
    }
}

/// Overlap of two independent sets: `γ` on the first side, `δ` on the
/// second, and the matching-avoidance slack `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapPoint {
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl OverlapPoint {
    pub fn new(gamma: f64, delta: f64, epsilon: f64) -> Self {
        Self { gamma, delta, epsilon }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.gamma, self.delta, self.epsilon]
    }
}

/// Every quantity that must be nonnegative for the second-moment terms to
/// make sense. The first six are the defining constraints; the rest follow
/// from requiring each `H1(x, y)` argument pair to satisfy `x ≤ y`.
pub fn region_slacks(p: &DensityPoint, o: &OverlapPoint) -> [f64; 12] {
    let (a, b) = (p.alpha, p.beta);
    let (g, dl, e) = (o.gamma, o.delta, o.epsilon);
    let s1 = a - g - e;
    [
        g,
        dl,
        e,
        s1,
        b - dl,
        1.0 - 2.0 * b + dl - g - e,
        b - dl - s1,
        a - g,
        1.0 - a - b - e,
        1.0 - 2.0 * a + g,
        1.0 - 2.0 * b + dl,
        1.0 - b - g - e,
    ]
}

pub fn in_region(p: &DensityPoint, o: &OverlapPoint, margin: f64) -> bool {
    region_slacks(p, o).iter().all(|&s| s >= margin)
}

fn check_region(p: &DensityPoint, o: &OverlapPoint) -> Result<()> {
    if in_region(p, o, -REGION_TOL) {
        Ok(())
    } else {
        Err(domain(format!("overlap {o:?} is outside the region for {p:?}")))
    }
}

/// `Ψ₁(α,β) = (1−β)Ent(α/(1−β)) − Ent(α)`.
pub fn psi1(p: &DensityPoint) -> f64 {
    scaled_entropy(p.alpha, 1.0 - p.beta) - entropy(p.alpha)
}

/// `Φ₁(α,β) = (α+β)ln λ + Ent(α) + Ent(β) + d·Ψ₁(α,β)`.
pub fn phi1(p: &DensityPoint, lambda: f64, d: u32) -> f64 {
    (p.alpha + p.beta) * lambda.ln() + entropy(p.alpha) + entropy(p.beta) + d as f64 * psi1(p)
}

pub fn phi1_gradient(p: &DensityPoint, lambda: f64, d: u32) -> [f64; 2] {
    let (a, b, d) = (p.alpha, p.beta, d as f64);
    let r = 1.0 - a - b;
    [
        lambda.ln() + ((1.0 - a) / a).ln() + d * (r / (1.0 - a)).ln(),
        lambda.ln() + ((1.0 - b) / b).ln() + d * (r / (1.0 - b)).ln(),
    ]
}

pub fn phi1_hessian(p: &DensityPoint, d: u32) -> [[f64; 2]; 2] {
    let (a, b, d) = (p.alpha, p.beta, d as f64);
    let r = 1.0 - a - b;
    let haa = -1.0 / (1.0 - a) - 1.0 / a + d * (1.0 / (1.0 - a) - 1.0 / r);
    let hbb = -1.0 / (1.0 - b) - 1.0 / b + d * (1.0 / (1.0 - b) - 1.0 / r);
    let hab = -d / r;
    [[haa, hab], [hab, hbb]]
}

/// `Ψ₂` in entropy form: log-probability that two independent sets with
/// the given overlap both stay independent after adding one matching.
pub fn psi2(p: &DensityPoint, o: &OverlapPoint) -> Result<f64> {
    check_region(p, o)?;
    let (a, b) = (p.alpha, p.beta);
    let (g, dl, e) = (o.gamma, o.delta, o.epsilon);
    let free = 1.0 - 2.0 * b + dl;
    Ok(scaled_entropy(g, free) - entropy(g) + scaled_entropy(e, free - g) + scaled_entropy(a - g - e, b - dl)
        - scaled_entropy(a - g, 1.0 - g)
        + scaled_entropy(a - g, 1.0 - b - g - e)
        - scaled_entropy(a - g, 1.0 - a))
}

/// `Φ₂` in entropy form at a fixed `ε`.
pub fn phi2(p: &DensityPoint, o: &OverlapPoint, lambda: f64, d: u32) -> Result<f64> {
    let psi = psi2(p, o)?;
    let (a, b) = (p.alpha, p.beta);
    Ok(2.0 * (a + b) * lambda.ln()
        + entropy(a)
        + scaled_entropy(o.gamma, a)
        + scaled_entropy(a - o.gamma, 1.0 - a)
        + entropy(b)
        + scaled_entropy(o.delta, b)
        + scaled_entropy(b - o.delta, 1.0 - b)
        + d as f64 * psi)
}

/// The second-moment exponent written with `H1`; algebraically equal to
/// [`phi2`] but coded independently.
pub fn second_moment_f(p: &DensityPoint, o: &OverlapPoint, lambda: f64, d: u32) -> Result<f64> {
    check_region(p, o)?;
    Ok(f_unchecked(p, o, lambda, d))
}

pub(crate) fn f_unchecked(p: &DensityPoint, o: &OverlapPoint, lambda: f64, d: u32) -> f64 {
    let (a, b) = (p.alpha, p.beta);
    let (g, dl, e) = (o.gamma, o.delta, o.epsilon);
    let psi = h1_unchecked(g, 1.0 - 2.0 * b + dl) - entropy(g)
        + h1_unchecked(e, 1.0 - 2.0 * b + dl - g)
        + h1_unchecked(a - g - e, b - dl)
        - h1_unchecked(a - g, 1.0 - g)
        + h1_unchecked(a - g, 1.0 - b - g - e)
        - h1_unchecked(a - g, 1.0 - a);
    2.0 * (a + b) * lambda.ln()
        + entropy(a)
        + h1_unchecked(g, a)
        + h1_unchecked(a - g, 1.0 - a)
        + entropy(b)
        + h1_unchecked(dl, b)
        + h1_unchecked(b - dl, 1.0 - b)
        + d as f64 * psi
}

/// `Γ = H(α) + H(β) − [overlap entropies] + d(2Ψ₁ − Ψ₂)`, the deficit
/// `2Φ₁ − Φ₂`. It vanishes at the star overlap and is nonnegative where
/// the star is the maximum of `Φ₂`.
pub fn gamma_fn(p: &DensityPoint, o: &OverlapPoint, d: u32) -> Result<f64> {
    let psi = psi2(p, o)?;
    let (a, b) = (p.alpha, p.beta);
    let overlap = scaled_entropy(o.gamma, a)
        + scaled_entropy(a - o.gamma, 1.0 - a)
        + scaled_entropy(o.delta, b)
        + scaled_entropy(b - o.delta, 1.0 - b);
    Ok(entropy(a) + entropy(b) - overlap + d as f64 * (2.0 * psi1(p) - psi))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(0.0), 0.0);
        assert_eq!(entropy(1.0), 0.0);
        assert!((entropy(0.5) - LN2).abs() < 1e-15);
        assert!((entropy(1.0 / 3.0) - (3f64.ln() - 2.0 / 3.0 * LN2)).abs() < 1e-15);
    }

    #[test]
    fn h1_identities() {
        assert_eq!(h1(0.0, 0.4).unwrap(), 0.0);
        assert!((h1(1.0 / 9.0, 1.0 / 3.0).unwrap() - entropy(1.0 / 3.0) / 3.0).abs() < 1e-15);
        for &(x, y) in &[(0.1, 0.3), (0.2, 0.9), (0.05, 0.05), (0.0, 0.0)] {
            assert!((h1(x, y).unwrap() - scaled_entropy(x, y)).abs() < 1e-15);
        }
        assert!(h1(0.5, 0.4).is_err());
    }

    #[test]
    fn phi1_at_empty_set_and_critical_gradient() {
        assert_eq!(phi1(&DensityPoint::new(0.0, 0.0).unwrap(), 3.0, 3), 0.0);
        let p = DensityPoint::new(1.0 / 3.0, 1.0 / 3.0).unwrap();
        let g = phi1_gradient(&p, 4.0, 3);
        assert!(g[0].abs() < 1e-14 && g[1].abs() < 1e-14, "{g:?}");
    }

    #[test]
    fn star_identities() {
        let p = DensityPoint::new(0.3, 0.25).unwrap();
        let s = p.star();
        assert!((psi2(&p, &s).unwrap() - 2.0 * psi1(&p)).abs() < 1e-14);
        assert!(gamma_fn(&p, &s, 4).unwrap().abs() < 1e-14);
        let two_phi1 = 2.0 * phi1(&p, 2.5, 4);
        assert!((phi2(&p, &s, 2.5, 4).unwrap() - two_phi1).abs() < 1e-13);
    }

    #[test]
    fn region_rejected() {
        let p = DensityPoint::new(0.3, 0.3).unwrap();
        assert!(psi2(&p, &OverlapPoint::new(0.2, 0.1, 0.2)).is_err());
        assert!(DensityPoint::new(0.7, 0.4).is_err());
        assert!(psi2(&DensityPoint::new(0.0, 0.0).unwrap(), &OverlapPoint::new(0.0, 0.0, 0.0)).unwrap() == 0.0);
    }
}
