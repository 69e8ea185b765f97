//! Exact values and asymptotic laws used as oracles.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{Branch, ConeProblem};

/// An exponent known in closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorValue {
    pub problem: ConeProblem,
    pub lambda_exact: f64,
    /// Where the value comes from.
    pub provenance: String,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Left-hand side `+-1 - (lambda-1)/sqrt(lambda^2 + lambda (2-p)/(p-1))` of
/// the planar relation, which equals `2 alpha / pi` at the eigenvalue.
pub fn closed_form_2d_lhs(lambda: f64, p: f64, branch: Branch) -> f64 {
    let q = (2.0 - p) / (p - 1.0);
    branch.sign() - (lambda - 1.0) / (lambda * lambda + lambda * q).sqrt()
}

fn closed_form_2d_lhs_derivative(lambda: f64, p: f64) -> f64 {
    // d/dl [-(l-1) R^{-1/2}], R = l^2 + q l
    let q = (2.0 - p) / (p - 1.0);
    let r = lambda * lambda + lambda * q;
    let dr = 2.0 * lambda + q;
    -(1.0 / r.sqrt()) + 0.5 * (lambda - 1.0) * dr / (r * r.sqrt())
}

/// Planar (`n = 2`) exponent for half-aperture `alpha`, obtained by solving
/// the closed-form relation with a safeguarded Newton iteration.
pub fn lambda_closed_form_2d(p: f64, alpha: f64, branch: Branch) -> Result<f64> {
    ConeProblem::new(p, 2, alpha, branch)?;
    let target = 2.0 * alpha / PI;
    let q = (2.0 - p) / (p - 1.0);
    // Admissible lambda: radicand positive and sign matching the branch.
    // Parameterise by the distance d > 0 from the singular end `edge`.
    let (edge, dir) = match branch {
        Branch::Fundamental => ((-q).max(0.0), 1.0),
        Branch::Exterior => ((-q).min(0.0), -1.0),
    };
    let at = |d: f64| closed_form_2d_lhs(edge + dir * d, p, branch) - target;

    // lhs decreases from +inf (d -> 0) to 0 (d -> inf)
    let (mut lo, mut hi): (f64, f64) = (0.5, 1.0);
    let mut guard = 0;
    while at(hi) > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::NoRoot(format!("no upper bracket (p={p}, alpha={alpha})")));
        }
    }
    lo = lo.min(hi * 0.5);
    guard = 0;
    while at(lo) < 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 1000 || lo == 0.0 {
            return Err(Error::NoRoot(format!("no lower bracket (p={p}, alpha={alpha})")));
        }
    }

    // rtsafe on d in [lo, hi], f(lo) >= 0 >= f(hi)
    let mut d = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = at(d);
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            lo = d;
        } else {
            hi = d;
        }
        let df = dir * closed_form_2d_lhs_derivative(edge + dir * d, p);
        let newton = d - f / df;
        let next = if df.is_finite() && df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let done = (next - d).abs() <= 4.0 * f64::EPSILON * (edge + dir * next).abs().max(1.0)
            || hi - lo <= 4.0 * f64::EPSILON * hi;
        d = next;
        if done {
            break;
        }
    }
    let lambda = edge + dir * d;
    if !(lambda * lambda + lambda * q > 0.0) {
        return Err(Error::NoRoot(format!("radicand not positive at lambda={lambda}")));
    }
    Ok(lambda)
}

/// Planar `lambda_2(pi/2) = (p - 3 - 2 sqrt(p^2 - 3p + 3)) / (3(p-1))`.
pub fn lambda2_half_space_2d(p: f64) -> f64 {
    (p - 3.0 - 2.0 * (p * p - 3.0 * p + 3.0).sqrt()) / (3.0 * (p - 1.0))
}

/// Planar `lambda_2(pi) = (7p - 16 - sqrt(81p^2 - 288p + 288)) / (16(p-1))`.
pub fn lambda2_slit_2d(p: f64) -> f64 {
    (7.0 * p - 16.0 - (81.0 * p * p - 288.0 * p + 288.0).sqrt()) / (16.0 * (p - 1.0))
}

/// `lambda_1(pi) = 1 - (n-1)/p`, valid for `p > n-1`.
pub fn lambda1_slit(p: f64, n: u32) -> f64 {
    1.0 - (f64::from(n) - 1.0) / p
}

/// Every exact exponent that applies to `(p, n)`.
pub fn anchor_table(p: f64, n: u32) -> Result<Vec<AnchorValue>> {
    let nf = f64::from(n);
    let mut out = Vec::new();
    let mut push = |alpha: f64, branch: Branch, lambda: f64, provenance: &str| -> Result<()> {
        out.push(AnchorValue {
            problem: ConeProblem::new(p, n, alpha, branch)?,
            lambda_exact: lambda,
            provenance: provenance.to_string(),
        });
        Ok(())
    };

    push(FRAC_PI_2, Branch::Fundamental, 1.0, "half-space: x_1 = r cos(theta) is p-harmonic")?;
    if p > nf - 1.0 {
        push(PI, Branch::Fundamental, lambda1_slit(p, n), "slit: lambda_1(pi) = 1 - (n-1)/p")?;
    }
    if same(p, 2.0) {
        push(FRAC_PI_2, Branch::Exterior, 1.0 - nf, "half-space, p = 2: Kelvin transform gives 1 - n")?;
    }
    if same(p, nf) {
        push(FRAC_PI_2, Branch::Exterior, -1.0, "half-space, p = n: conformal invariance gives -1")?;
    }
    if same(p, (4.0 * nf - 2.0) / 3.0) {
        let beta = (nf + 1.0) / (4.0 * nf - 5.0);
        push(PI, Branch::Exterior, -0.5 * beta, "slit, p = (4n-2)/3: r^(-beta/2) cos(theta/2)^beta")?;
    }
    if n == 2 {
        push(FRAC_PI_2, Branch::Exterior, lambda2_half_space_2d(p), "planar closed form at alpha = pi/2")?;
        push(PI, Branch::Exterior, lambda2_slit_2d(p), "planar closed form at alpha = pi")?;
    }
    Ok(out)
}

/// Which quantity follows a power (or logarithmic) law as `alpha -> pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AsymptoticLaw {
    /// `lambda_1(alpha) - limit ~ (pi - alpha)^exponent`, `p > n - 1`.
    Gap { exponent: f64, limit: f64 },
    /// `lambda_1(alpha) ~ (pi - alpha)^exponent`, `1 < p < n - 1`.
    Value { exponent: f64 },
    /// `lambda_1(alpha) ~ -1/log(pi - alpha)`, `p = n - 1`.
    Log,
}

impl AsymptoticLaw {
    /// Theoretical exponent; the log law is reported as slope 1 of
    /// `-1/lambda` against `-log(pi - alpha)` up to a constant factor, so it
    /// has no exponent.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            AsymptoticLaw::Gap { exponent, .. } | AsymptoticLaw::Value { exponent } => Some(*exponent),
            AsymptoticLaw::Log => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AsymptoticLaw::Gap { .. } => "gap",
            AsymptoticLaw::Value { .. } => "value",
            AsymptoticLaw::Log => "log",
        }
    }
}

/// The law governing `lambda_1(alpha)` as `alpha -> pi`.
pub fn theoretical_exponent(p: f64, n: u32) -> Result<AsymptoticLaw> {
    ConeProblem::new(p, n, FRAC_PI_2, Branch::Fundamental)?;
    let nf = f64::from(n);
    Ok(if same(p, nf - 1.0) {
        AsymptoticLaw::Log
    } else if p > nf - 1.0 {
        AsymptoticLaw::Gap {
            exponent: (p + 1.0 - nf) / (p - 1.0),
            limit: lambda1_slit(p, n),
        }
    } else {
        AsymptoticLaw::Value {
            exponent: (nf - 1.0 - p) / (p - 1.0),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_examples() {
        let l = lambda_closed_form_2d(2.0, FRAC_PI_2, Branch::Fundamental).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        let l = lambda_closed_form_2d(4.0, PI, Branch::Fundamental).unwrap();
        assert!((l - 0.75).abs() < 1e-12);
        let l = lambda_closed_form_2d(3.0, FRAC_PI_2, Branch::Exterior).unwrap();
        assert!((l + 3f64.sqrt() / 3.0).abs() < 1e-12, "{l}");
        assert!((lambda2_half_space_2d(3.0) + 3f64.sqrt() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn the_two_planar_exterior_expressions_agree_at_p_two() {
        let l = lambda_closed_form_2d(2.0, FRAC_PI_2, Branch::Exterior).unwrap();
        assert!((l + 1.0).abs() < 1e-12);
        assert!((lambda2_half_space_2d(2.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn planar_slit_values() {
        for p in [1.5, 2.0, 3.0, 5.0, 10.0] {
            let l1 = lambda_closed_form_2d(p, PI, Branch::Fundamental).unwrap();
            assert!((l1 - (1.0 - 1.0 / p)).abs() < 1e-12);
            let l2 = lambda_closed_form_2d(p, PI, Branch::Exterior).unwrap();
            assert!((l2 - lambda2_slit_2d(p)).abs() < 1e-12, "p={p}: {l2}");
        }
        assert!((lambda2_slit_2d(2.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn anchors_for_p2_n3() {
        let t = anchor_table(2.0, 3).unwrap();
        assert!(t.iter().any(|a| a.problem.alpha() == FRAC_PI_2
            && a.problem.branch() == Branch::Fundamental
            && a.lambda_exact == 1.0));
        assert!(t.iter().any(|a| a.problem.branch() == Branch::Exterior && a.lambda_exact == -2.0));
        assert!(!t.iter().any(|a| a.problem.alpha() == PI));
    }

    #[test]
    fn anchors_for_slit_exponent() {
        let t = anchor_table(10.0 / 3.0, 3).unwrap();
        let slit2 = t
            .iter()
            .find(|a| a.problem.alpha() == PI && a.problem.branch() == Branch::Exterior)
            .unwrap();
        assert!((slit2.lambda_exact + 2.0 / 7.0).abs() < 1e-15);
        let slit1 = t
            .iter()
            .find(|a| a.problem.alpha() == PI && a.problem.branch() == Branch::Fundamental)
            .unwrap();
        assert!((slit1.lambda_exact - 0.4).abs() < 1e-15);
    }

    #[test]
    fn anchors_only_half_space_when_nothing_else_applies() {
        let t = anchor_table(1.2, 5).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].lambda_exact, 1.0);
    }

    #[test]
    fn laws() {
        match theoretical_exponent(3.0, 3).unwrap() {
            AsymptoticLaw::Gap { exponent, limit } => {
                assert_eq!(exponent, 0.5);
                assert!((limit - 1.0 / 3.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(theoretical_exponent(2.0, 4).unwrap(), AsymptoticLaw::Value { exponent: 1.0 });
        assert_eq!(theoretical_exponent(2.0, 3).unwrap(), AsymptoticLaw::Log);
    }

    proptest! {
        #[test]
        fn closed_form_solves_its_relation(p in 1.05f64..20.0, frac in 0.01f64..=1.0, ext in any::<bool>()) {
            let alpha = frac * PI;
            let branch = if ext { Branch::Exterior } else { Branch::Fundamental };
            let l = lambda_closed_form_2d(p, alpha, branch).unwrap();
            prop_assert!(l.signum() == branch.sign());
            let lhs = closed_form_2d_lhs(l, p, branch);
            prop_assert!((lhs - 2.0 * alpha / PI).abs() < 1e-12, "lhs={} target={}", lhs, 2.0 * alpha / PI);
        }

        #[test]
        fn closed_form_is_monotone_in_alpha(p in 1.1f64..10.0, a in 0.05f64..3.0) {
            let b = (a + 0.1).min(PI);
            let f1 = lambda_closed_form_2d(p, a, Branch::Fundamental).unwrap();
            let f2 = lambda_closed_form_2d(p, b, Branch::Fundamental).unwrap();
            prop_assert!(f2 < f1);
            let e1 = lambda_closed_form_2d(p, a, Branch::Exterior).unwrap();
            let e2 = lambda_closed_form_2d(p, b, Branch::Exterior).unwrap();
            prop_assert!(e2 > e1);
        }
    }
}
