//! Sign checks for the polynomials that close the interior-maximum argument:
//! dense grid evaluation plus interval-arithmetic certification by bisection.

use serde::Serialize;

use super::{eps_hat, DensityPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PolyClaim {
    Positive,
    /// No root in the interval: the sign is constant, whichever it is.
    NoRoot,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolyCheck {
    pub name: String,
    pub interval: (f64, f64),
    pub claim: PolyClaim,
    pub grid_points: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    /// Grid points contradicting the claim.
    pub grid_violations: usize,
    /// Whether interval arithmetic proved the claim on the whole interval.
    pub certified: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Largest `|lhs − rhs| / max(1, |lhs|)` on the grid.
    pub max_residual: f64,
    pub holds: bool,
    /// Whether the identity is supposed to hold. False for the one built on
    /// the `(d−1)(d−2)²` constant term of `Q₂`, which breaks it.
    pub expected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolynomialReport {
    pub d: u32,
    pub checks: Vec<PolyCheck>,
    pub identities: Vec<IdentityCheck>,
}

impl PolynomialReport {
    pub fn check(&self, name: &str) -> Option<&PolyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn identity(&self, name: &str) -> Option<&IdentityCheck> {
        self.identities.iter().find(|c| c.name == name)
    }

    /// Every sign claim holds and every identity behaves as expected.
    pub fn all_as_expected(&self) -> bool {
        self.checks.iter().all(|c| c.holds) && self.identities.iter().all(|i| i.holds == i.expected)
    }
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    fn add(self, o: Self) -> Self {
        Self { lo: (self.lo + o.lo).next_down(), hi: (self.hi + o.hi).next_up() }
    }

    fn mul(self, o: Self) -> Self {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { lo: lo.next_down(), hi: hi.next_up() }
    }
}

/// Coefficients from the highest degree down.
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_interval(coeffs: &[f64], x: Interval) -> Interval {
    coeffs.iter().fold(Interval::point(0.0), |acc, &c| acc.mul(x).add(Interval::point(c)))
}

/// `Some(sign)` if every subinterval of a bisection of depth ≤ 48 has a
/// certified sign and all signs agree.
fn certify_sign(coeffs: &[f64], lo: f64, hi: f64) -> Option<i8> {
    fn rec(coeffs: &[f64], lo: f64, hi: f64, depth: u32, budget: &mut usize) -> Option<i8> {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let v = horner_interval(coeffs, Interval { lo, hi });
        if v.lo > 0.0 {
            return Some(1);
        }
        if v.hi < 0.0 {
            return Some(-1);
        }
        if depth == 0 {
            return None;
        }
        let mid = 0.5 * (lo + hi);
        let a = rec(coeffs, lo, mid, depth - 1, budget)?;
        let b = rec(coeffs, mid, hi, depth - 1, budget)?;
        (a == b).then_some(a)
    }
    let mut budget = 1 << 20;
    rec(coeffs, lo, hi, 48, &mut budget)
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn poly_check(name: &str, coeffs: &[f64], lo: f64, hi: f64, claim: PolyClaim, n: usize) -> PolyCheck {
    let values: Vec<f64> = grid(lo, hi, n).map(|x| horner(coeffs, x)).collect();
    let grid_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let grid_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let grid_violations = match claim {
        PolyClaim::Positive => values.iter().filter(|&&v| v <= 0.0).count(),
        PolyClaim::NoRoot => {
            let s = values[0] > 0.0;
            values.iter().filter(|&&v| (v > 0.0) != s || v == 0.0).count()
        }
    };
    let sign = certify_sign(coeffs, lo, hi.next_up());
    let certified = match claim {
        PolyClaim::Positive => sign == Some(1),
        PolyClaim::NoRoot => sign.is_some(),
    };
    PolyCheck {
        name: name.to_string(),
        interval: (lo, hi),
        claim,
        grid_points: n,
        grid_min,
        grid_max,
        grid_violations,
        certified,
        holds: certified && grid_violations == 0,
    }
}

/// `P(d, δ, ε)` in its factored form.
fn p_factored(d: f64, dl: f64, e: f64) -> f64 {
    d * (dl * d * d - 1.0) * e * e - (d - 2.0) * (dl * d * d - 1.0) * e + d * dl * (1.0 - d * dl) * (d - 2.0 + d * dl)
}

/// `P(d, δ, ε)` as the expanded sum of monomials.
fn p_expanded(d: f64, dl: f64, e: f64) -> f64 {
    let d2 = d * d;
    let d3 = d2 * d;
    -dl * d3 * e - d3 * dl * dl - d3 * dl.powi(3) + dl * d3 * e * e + 3.0 * d2 * dl * dl + 2.0 * d2 * dl * e + dl * d2
        - e * e * d
        + e * d
        - 2.0 * d * dl
        - 2.0 * e
}

/// Left side of the inequality that finishes the `d ≥ 4` argument.
fn to_show(d: f64, dl: f64, e: f64) -> f64 {
    p_factored(d, dl, e) * (1.0 - 2.0 / d) - 2.0 * dl * (d - 2.0 + d * dl) * (1.0 - d * dl).powi(2)
}

fn q1(d: f64) -> [f64; 3] {
    [2.0 * d.powi(3) * (d - 3.0), -d * (d - 1.0) * (d - 2.0), (d - 2.0) * (d - 3.0)]
}

fn q2(d: f64, corrected: bool) -> [f64; 6] {
    let constant = if corrected { (d - 1.0) * (d - 2.0).powi(3) } else { (d - 1.0) * (d - 2.0).powi(2) };
    [
        8.0 * d.powi(6),
        4.0 * d.powi(5) * (d - 8.0),
        d.powi(4) * (-6.0 * d * d + 8.0 * d + 32.0),
        d.powi(3) * (10.0 * d * d - 20.0 * d - 8.0),
        d * (d - 2.0) * (d.powi(3) - 9.0 * d * d + 8.0 * d - 4.0),
        constant,
    ]
}

fn identity(
    name: &str,
    lo: f64,
    hi: f64,
    n: usize,
    lhs: impl Fn(f64) -> f64,
    rhs: impl Fn(f64) -> f64,
) -> IdentityCheck {
    let max_residual = grid(lo, hi, n)
        .map(|x| {
            let l = lhs(x);
            (l - rhs(x)).abs() / l.abs().max(1.0)
        })
        .fold(0.0, f64::max);
    IdentityCheck { name: name.to_string(), max_residual, holds: max_residual <= 1e-9, expected: true }
}

/// For `d = 3`: the factors left after eliminating variables from the
/// stationarity equations, each claimed root-free on the admissible range.
/// For `d ≥ 4`: `Q₁`, `Q₂` and the inequality they establish, together with
/// the algebraic identities that link them.
pub fn verify_appendix_polynomials(d: u32) -> PolynomialReport {
    let third = 1.0 / 3.0;
    let mut checks = Vec::new();
    let mut identities = Vec::new();
    if d == 3 {
        checks.push(poly_check("27e^2-9e+1", &[27.0, -9.0, 1.0], 0.0, third, PolyClaim::Positive, 100_001));
        checks.push(poly_check(
            "81e^4-81e^3-27e^2+12e-1",
            &[81.0, -81.0, -27.0, 12.0, -1.0],
            0.0,
            third,
            PolyClaim::NoRoot,
            100_001,
        ));
        checks.push(poly_check(
            "1296e^4-1917e^3+840e^2-97e+6",
            &[1296.0, -1917.0, 840.0, -97.0, 6.0],
            0.0,
            third,
            PolyClaim::Positive,
            100_001,
        ));
        checks.push(poly_check(
            "1458x^3+405x^2+24x+1",
            &[1458.0, 405.0, 24.0, 1.0],
            0.0,
            third,
            PolyClaim::Positive,
            100_001,
        ));
        checks.push(poly_check(
            "P(delta)",
            &[
                1549681956.0,
                2970223749.0,
                -157837977.0,
                -36669429.0,
                42830208.0,
                -35446896.0,
                -4331961.0,
                1160487.0,
                22734.0,
                47529.0,
                12720.0,
                64.0,
            ],
            0.0,
            third,
            PolyClaim::Positive,
            1_000_001,
        ));
        checks.push(poly_check(
            "6561g^5-5832g^4+1377g^3+18g^2-36g+8",
            &[6561.0, -5832.0, 1377.0, 18.0, -36.0, 8.0],
            0.0,
            third,
            PolyClaim::Positive,
            100_001,
        ));
    } else if d >= 4 {
        let df = d as f64;
        let inv = 1.0 / df;
        let inv2 = inv * inv;
        let [a, b, c] = q1(df);
        let vertex = df * (df - 1.0) * (df - 2.0) / (4.0 * df.powi(3) * (df - 3.0));
        let closed_min = -(df - 1.0).powi(2) * (df - 2.0).powi(2) / (8.0 * df * (df - 3.0)) + (df - 2.0) * (df - 3.0);
        identities.push(IdentityCheck {
            name: "Q1 minimum closed form".into(),
            max_residual: (horner(&[a, b, c], vertex) - closed_min).abs() / closed_min.abs().max(1.0),
            holds: (horner(&[a, b, c], vertex) - closed_min).abs() <= 1e-9 * closed_min.abs().max(1.0),
            expected: true,
        });
        checks.push(poly_check("Q1 minimum value", &[closed_min], 0.0, 0.0, PolyClaim::Positive, 2));
        checks.push(poly_check("2d^4 x^3 + Q1", &[2.0 * df.powi(4), a, b, c], inv2, inv, PolyClaim::Positive, 100_001));
        checks.push(poly_check("Q2 with (d-2)^2 constant", &q2(df, false), 0.0, inv2, PolyClaim::Positive, 100_001));
        checks.push(poly_check("Q2 with (d-2)^3 constant", &q2(df, true), 0.0, inv2, PolyClaim::Positive, 100_001));

        identities.push(identity(
            "P expanded = factored",
            0.0,
            inv,
            10_001,
            |x| p_expanded(df, x, 0.5 * (inv - x)),
            |x| p_factored(df, x, 0.5 * (inv - x)),
        ));
        identities.push(identity(
            "lhs at eps = 1/d - delta",
            0.0,
            inv,
            10_001,
            |x| to_show(df, x, inv - x),
            |x| (1.0 - df * x) * (2.0 * df.powi(4) * x.powi(3) + horner(&[a, b, c], x)) / (df * df),
        ));
        let eps_min = move |x: f64| (1.0 - 2.0 / df) * (inv - x) / (1.0 - 2.0 * x);
        for (label, corrected) in
            [("lhs at eps_min, Q2 with (d-2)^2 constant", false), ("lhs at eps_min, Q2 with (d-2)^3 constant", true)]
        {
            let q = q2(df, corrected);
            let mut id = identity(
                label,
                0.0,
                inv2,
                10_001,
                |x| to_show(df, x, eps_min(x)),
                |x| (1.0 - df * x) * horner(&q, x) / (df.powi(4) * (1.0 - 2.0 * x).powi(2)),
            );
            id.expected = corrected;
            identities.push(id);
        }

        // The inequality itself, at the exact maximising slack on the
        // diagonal γ = δ.
        let p = DensityPoint { alpha: inv, beta: inv };
        let n = 100_001;
        let values: Vec<f64> = grid(0.0, inv, n)
            .skip(1)
            .take(n - 2)
            .map(|x| to_show(df, x, eps_hat(&p, x, x).expect("diagonal lies in the region")))
            .collect();
        let grid_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let grid_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let grid_violations = values.iter().filter(|&&v| v <= 0.0).count();
        checks.push(PolyCheck {
            name: "diagonal inequality at eps_hat".into(),
            interval: (0.0, inv),
            claim: PolyClaim::Positive,
            grid_points: n - 2,
            grid_min,
            grid_max,
            grid_violations,
            certified: false,
            holds: grid_violations == 0,
        });
    }
    PolynomialReport { d, checks, identities }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_horner_encloses_point_values() {
        let c = [3.0, -2.0, 0.5, -7.0];
        for &(lo, hi) in &[(0.0, 0.1), (-1.0, 1.0), (0.3, 0.30001)] {
            let iv = horner_interval(&c, Interval { lo, hi });
            for x in grid(lo, hi, 101) {
                let v = horner(&c, x);
                assert!(iv.lo <= v && v <= iv.hi);
            }
        }
    }

    #[test]
    fn quadratic_vertex() {
        let r = verify_appendix_polynomials(3);
        let q = r.check("27e^2-9e+1").unwrap();
        assert!(q.holds && (q.grid_min - 0.25).abs() < 1e-9);
    }

    #[test]
    fn degree_three_claims_hold() {
        let r = verify_appendix_polynomials(3);
        for c in &r.checks {
            assert!(c.holds, "{c:?}");
        }
        assert!((r.check("P(delta)").unwrap().grid_min - 64.0).abs() < 1e-9);
    }

    #[test]
    fn root_in_interval_is_not_certified() {
        assert_eq!(certify_sign(&[1.0, -0.5], 0.0, 1.0), None);
        assert_eq!(certify_sign(&[1.0, -2.0], 0.0, 1.0), Some(-1));
    }

    #[test]
    fn higher_degree_claims_and_q2_typo() {
        for d in [4, 5, 6, 7, 10] {
            let r = verify_appendix_polynomials(d);
            assert!(r.check("Q1 minimum value").unwrap().holds);
            assert!(r.check("2d^4 x^3 + Q1").unwrap().holds);
            assert!(r.check("Q2 with (d-2)^3 constant").unwrap().holds);
            assert!(r.check("diagonal inequality at eps_hat").unwrap().holds, "d={d}");
            assert!(r.identity("P expanded = factored").unwrap().holds);
            assert!(r.identity("lhs at eps = 1/d - delta").unwrap().holds);
            assert!(r.identity("lhs at eps_min, Q2 with (d-2)^3 constant").unwrap().holds);
            assert!(!r.identity("lhs at eps_min, Q2 with (d-2)^2 constant").unwrap().holds);
            assert!(r.all_as_expected());
        }
    }
}
