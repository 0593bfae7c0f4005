//! Hard-core occupancy recursion on the infinite `d`-regular tree.
//!
//! `f(x) = (1−x)[1 − (x/(λ(1−x)))^{1/d}]` links the two side densities of a
//! stationary point of the first-moment exponent (`β = f(α)`, `α = f(β)`).
//! Note that `f` has the reverse stability of the usual belief-propagation
//! map: above `λ_c` the symmetric point attracts `f∘f` and the two-cycle
//! `(p1, p2)` repels. The two-cycle is therefore found by bracketing a root of
//! `f∘f(x) − x` below `p*`, not by iteration.

use serde::Serialize;

use crate::error::{invalid, Result};

pub fn lambda_c(d: u32) -> Result<f64> {
    if d < 3 {
        return Err(invalid(format!("lambda_c needs d >= 3, got {d}")));
    }
    let d = d as f64;
    Ok((d - 1.0).powf(d - 1.0) / (d - 2.0).powf(d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recursion {
    /// `max(raw, 0)`.
    pub value: f64,
    /// The closed form before clamping; negative above `x = λ/(1+λ)`.
    pub raw: f64,
}

pub fn tree_recursion(x: f64, lambda: f64, d: u32) -> Result<Recursion> {
    if !(0.0..1.0).contains(&x) {
        return Err(invalid(format!("tree recursion needs 0 <= x < 1, got {x}")));
    }
    if !(lambda > 0.0) || d == 0 {
        return Err(invalid("tree recursion needs lambda > 0 and d >= 1"));
    }
    let raw = f_raw(x, lambda, d);
    Ok(Recursion { value: raw.max(0.0), raw })
}

fn f_raw(x: f64, lambda: f64, d: u32) -> f64 {
    (1.0 - x) * (1.0 - (x / (lambda * (1.0 - x))).powf(1.0 / d as f64))
}

/// Clamped `f`, extended by `f(x) = 0` for `x ≥ 1`.
pub(crate) fn f_clamped(x: f64, lambda: f64, d: u32) -> f64 {
    if x >= 1.0 {
        0.0
    } else {
        f_raw(x, lambda, d).max(0.0)
    }
}

fn check(lambda: f64, d: u32) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be positive and finite, got {lambda}")));
    }
    if d < 3 {
        return Err(invalid(format!("d must be at least 3, got {d}")));
    }
    Ok(())
}

/// The unique root of `f(x) = x`.
pub fn symmetric_fixed_point(lambda: f64, d: u32) -> Result<f64> {
    check(lambda, d)?;
    // f(0) = 1 > 0 and f vanishes at λ/(1+λ), so the root lies in between.
    let (mut lo, mut hi) = (0.0, lambda / (1.0 + lambda));
    while hi - lo > 1e-17 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f_clamped(mid, lambda, d) > mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    // Newton polish on f(x) − x with a central-difference slope.
    for _ in 0..3 {
        let r = f_clamped(x, lambda, d) - x;
        let h = 1e-7 * x.max(1e-12);
        let slope = (f_clamped(x + h, lambda, d) - f_clamped(x - h, lambda, d)) / (2.0 * h) - 1.0;
        let step = r / slope;
        let next = x - step;
        if !(next > lo && next < hi) || (f_clamped(next, lambda, d) - next).abs() >= r.abs() {
            break;
        }
        x = next;
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeFixedPoints {
    pub lambda: f64,
    pub d: u32,
    pub p_star: f64,
    pub p1: f64,
    pub p2: f64,
    pub is_unique: bool,
}

pub const UNIQUE_TOLERANCE: f64 = 1e-9;

/// `p*` and the semi-translation-invariant pair `p1 ≤ p* ≤ p2` with
/// `f(p1) = p2`, `f(p2) = p1`.
pub fn semi_invariant_fixed_points(lambda: f64, d: u32) -> Result<TreeFixedPoints> {
    let p = symmetric_fixed_point(lambda, d)?;
    let collapsed = TreeFixedPoints { lambda, d, p_star: p, p1: p, p2: p, is_unique: true };
    let ff = |x: f64| f_clamped(f_clamped(x, lambda, d), lambda, d) - x;

    // Below p*, f∘f(x) − x is positive on (p1, p*) and negative on (0, p1)
    // when the two-cycle exists; otherwise it is negative all the way down.
    // Scan offsets geometrically away from p*, then geometrically towards 0.
    let ratio = 2f64.powf(0.125);
    let mut probes = Vec::new();
    let mut h = p * 1e-9;
    while h < 0.5 * p {
        probes.push(p - h);
        h *= ratio;
    }
    let mut x = 0.5 * p;
    while x > 1e-300 {
        probes.push(x);
        x /= ratio;
    }
    let mut best: Option<(f64, f64)> = None;
    let mut negative = None;
    for &x in &probes {
        let v = ff(x);
        if v > best.map_or(0.0, |b| b.1) {
            best = Some((x, v));
        }
        if best.is_some() && v < -1e-14 * x {
            negative = Some(x);
            break;
        }
    }
    let (Some((pos, pos_v)), Some(neg)) = (best, negative) else {
        return Ok(collapsed);
    };
    if pos_v < 1e-15 * p {
        return Ok(collapsed);
    }
    let (mut lo, mut hi) = (neg, pos);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ff(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p1 = if ff(lo).abs() < ff(hi).abs() { lo } else { hi };
    let p2 = f_clamped(p1, lambda, d);
    Ok(TreeFixedPoints { lambda, d, p_star: p, p1, p2, is_unique: (p2 - p1).abs() <= UNIQUE_TOLERANCE })
}
