//! Analytic first and second derivatives of the second-moment exponent `f`
//! in `(γ, δ, ε)`, the maximising slack `ε̂(γ, δ)`, and `g = f(·,·,ε̂)`.

use super::{region_slacks, DensityPoint, OverlapPoint};
use crate::error::{domain, Result};

/// Derivatives diverge on the boundary; every region slack must exceed this.
pub const DERIV_MIN_SLACK: f64 = 1e-12;

fn check_interior(p: &DensityPoint, o: &OverlapPoint) -> Result<()> {
    let s = region_slacks(p, o);
    if s.iter().all(|&x| x >= DERIV_MIN_SLACK) {
        Ok(())
    } else {
        Err(domain(format!("derivatives need a strictly interior overlap, got {o:?} for {p:?}")))
    }
}

struct Slacks {
    g: f64,
    dl: f64,
    e: f64,
    // α−γ−ε
    s1: f64,
    // β−δ−(α−γ−ε)
    s2: f64,
    // 1−2β+δ−γ−ε
    s3: f64,
    a_g: f64,
    b_d: f64,
    one_ab_e: f64,
    one_2a_g: f64,
    one_2b_d: f64,
    one_b_g_e: f64,
}

fn slacks(p: &DensityPoint, o: &OverlapPoint) -> Slacks {
    let (a, b) = (p.alpha, p.beta);
    let (g, dl, e) = (o.gamma, o.delta, o.epsilon);
    let s1 = a - g - e;
    Slacks {
        g,
        dl,
        e,
        s1,
        s2: b - dl - s1,
        s3: 1.0 - 2.0 * b + dl - g - e,
        a_g: a - g,
        b_d: b - dl,
        one_ab_e: 1.0 - a - b - e,
        one_2a_g: 1.0 - 2.0 * a + g,
        one_2b_d: 1.0 - 2.0 * b + dl,
        one_b_g_e: 1.0 - b - g - e,
    }
}

/// `(∂f/∂γ, ∂f/∂δ, ∂f/∂ε)`; `λ` cancels from every component.
pub fn grad_f(p: &DensityPoint, o: &OverlapPoint, d: u32) -> Result<[f64; 3]> {
    check_interior(p, o)?;
    Ok(grad_unchecked(p, o, d))
}

pub(crate) fn grad_unchecked(p: &DensityPoint, o: &OverlapPoint, d: u32) -> [f64; 3] {
    let s = slacks(p, o);
    let d = d as f64;
    let fg = d * s.s3.ln() + d * s.s1.ln() + (d - 1.0) * s.one_2a_g.ln()
        - d * s.one_b_g_e.ln()
        - d * s.s2.ln()
        - (d - 2.0) * s.a_g.ln()
        - s.g.ln();
    let fd = d * s.s2.ln() + (d - 1.0) * s.one_2b_d.ln() - d * s.s3.ln() - (d - 2.0) * s.b_d.ln() - s.dl.ln();
    let fe = d * (s.s3.ln() + s.s1.ln() + s.one_ab_e.ln() - s.e.ln() - s.s2.ln() - s.one_b_g_e.ln());
    [fg, fd, fe]
}

pub fn hessian_f(p: &DensityPoint, o: &OverlapPoint, d: u32) -> Result<[[f64; 3]; 3]> {
    check_interior(p, o)?;
    Ok(hessian_unchecked(p, o, d))
}

pub(crate) fn hessian_unchecked(p: &DensityPoint, o: &OverlapPoint, d: u32) -> [[f64; 3]; 3] {
    let s = slacks(p, o);
    let d = d as f64;
    let hgg =
        -d / s.s3 - d / s.s1 + (d - 1.0) / s.one_2a_g - d / s.s2 + d / s.one_b_g_e + (d - 2.0) / s.a_g - 1.0 / s.g;
    let hdg = d / s.s3 + d / s.s2;
    let heg = -d / s.s3 - d / s.s1 - d / s.s2 + d / s.one_b_g_e;
    let hdd = -d / s.s2 + (d - 1.0) / s.one_2b_d - d / s.s3 + (d - 2.0) / s.b_d - 1.0 / s.dl;
    let hed = d / s.s2 + d / s.s3;
    let hee = -d / s.s3 - d / s.s1 - d / s.one_ab_e + d / s.one_b_g_e - d / s.s2 - d / s.e;
    [[hgg, hdg, heg], [hdg, hdd, hed], [heg, hed, hee]]
}

fn discriminant(p: &DensityPoint, gamma: f64, delta: f64) -> f64 {
    let r = 1.0 - p.alpha - p.beta;
    r * r + 4.0 * (p.alpha - gamma) * (p.beta - delta)
}

/// `ε̂ = ½[1 + α − β − 2γ − √((1−α−β)² + 4(α−γ)(β−δ))]`, the root of
/// `∂f/∂ε = 0` inside the region.
pub fn eps_hat(p: &DensityPoint, gamma: f64, delta: f64) -> Result<f64> {
    if gamma > p.alpha || delta > p.beta || gamma < 0.0 || delta < 0.0 {
        return Err(domain(format!(
            "eps_hat needs 0 <= gamma <= alpha and 0 <= delta <= beta, got ({gamma}, {delta})"
        )));
    }
    let disc = discriminant(p, gamma, delta);
    debug_assert!(disc >= 0.0);
    let big = 1.0 + p.alpha - p.beta - 2.0 * gamma;
    // The roots multiply to (α−γ)(1−2β+δ−γ); dividing by the larger root
    // avoids cancellation when ε̂ is tiny.
    let product = (p.alpha - gamma) * (1.0 - 2.0 * p.beta + delta - gamma);
    let larger = 0.5 * (big + disc.sqrt());
    Ok(if larger > 0.0 { product / larger } else { 0.0 })
}

/// `(∂ε̂/∂γ, ∂ε̂/∂δ)`.
pub fn eps_hat_gradient(p: &DensityPoint, gamma: f64, delta: f64) -> [f64; 2] {
    let sq = discriminant(p, gamma, delta).sqrt();
    [-1.0 + (p.beta - delta) / sq, (p.alpha - gamma) / sq]
}

fn hat_point(p: &DensityPoint, gamma: f64, delta: f64) -> Result<OverlapPoint> {
    Ok(OverlapPoint::new(gamma, delta, eps_hat(p, gamma, delta)?))
}

pub fn g_fn(p: &DensityPoint, gamma: f64, delta: f64, lambda: f64, d: u32) -> Result<f64> {
    let o = hat_point(p, gamma, delta)?;
    super::second_moment_f(p, &o, lambda, d)
}

/// `(∂g/∂γ, ∂g/∂δ)`, equal to the `f` partials at `ε̂` since `∂f/∂ε = 0` there.
pub fn grad_g(p: &DensityPoint, gamma: f64, delta: f64, d: u32) -> Result<[f64; 2]> {
    let o = hat_point(p, gamma, delta)?;
    let gr = grad_f(p, &o, d)?;
    Ok([gr[0], gr[1]])
}

pub fn hessian_g(p: &DensityPoint, gamma: f64, delta: f64, d: u32) -> Result<[[f64; 2]; 2]> {
    let o = hat_point(p, gamma, delta)?;
    let h = hessian_f(p, &o, d)?;
    let [eg, ed] = eps_hat_gradient(p, gamma, delta);
    let ggg = h[0][0] + eg * h[0][2];
    let ggd = h[1][0] + eg * h[1][2];
    let gdd = h[1][1] + ed * h[1][2];
    Ok([[ggg, ggd], [ggd, gdd]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn third() -> DensityPoint {
        DensityPoint::new(1.0 / 3.0, 1.0 / 3.0).unwrap()
    }

    #[test]
    fn gradient_vanishes_at_star() {
        for &(a, b, d) in &[(1.0 / 3.0, 1.0 / 3.0, 3), (0.3, 0.22, 3), (0.25, 0.25, 4), (0.18, 0.2, 5)] {
            let p = DensityPoint::new(a, b).unwrap();
            let g = grad_f(&p, &p.star(), d).unwrap();
            assert!(g.iter().all(|x| x.abs() < 1e-10), "{g:?}");
        }
    }

    #[test]
    fn hessian_at_critical_point_in_closed_form() {
        let h = hessian_f(&third(), &OverlapPoint::new(1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0), 3).unwrap();
        let want = [
            [-243.0 / 4.0, 81.0 / 2.0, -243.0 / 4.0],
            [81.0 / 2.0, -81.0 / 2.0, 81.0 / 2.0],
            [-243.0 / 4.0, 81.0 / 2.0, -405.0 / 4.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((h[i][j] - want[i][j]).abs() < 1e-10, "{i}{j}: {} vs {}", h[i][j], want[i][j]);
            }
        }
    }

    #[test]
    fn eps_hat_examples() {
        let p = DensityPoint::new(0.3, 0.2).unwrap();
        assert!((eps_hat(&p, 0.09, 0.04).unwrap() - 0.3 * 0.5).abs() < 1e-15);
        assert!((eps_hat(&third(), 1.0 / 9.0, 1.0 / 9.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        let o = OverlapPoint::new(0.05, 0.1, eps_hat(&p, 0.05, 0.1).unwrap());
        assert!(grad_f(&p, &o, 3).unwrap()[2].abs() < 1e-10);
        assert!(eps_hat(&p, 0.4, 0.1).is_err());
    }

    #[test]
    fn boundary_rejected() {
        let p = third();
        assert!(grad_f(&p, &OverlapPoint::new(0.0, 0.1, 0.1), 3).is_err());
        assert!(hessian_f(&p, &OverlapPoint::new(0.1, 0.1, 1.0 / 3.0 - 0.1 + 1e-3), 3).is_err());
    }
}
