//! Inverts the shooting map: finds `lambda` with `alpha*(lambda) = alpha`.
//!
//! Both branches are handled through the magnitude `mu = |lambda|`, in which
//! the blow-up angle is decreasing for either sign. Interior apertures use
//! Brent's method on `g(mu) = alpha*(mu) - alpha`; the slit `alpha = pi` has
//! no finite blow-up to match and is bisected on [`slit_side`] instead.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{Branch, ConeProblem, Tolerances, LAMBDA_CAP};
use crate::profile::{profile_for, second_order_residual, spacing_for};
use crate::reference::lambda1_slit;
use crate::shooting::{alpha_star, slit_side, SlitSide};

/// Bracket expansions before giving up.
pub const MAX_EXPANSIONS: usize = 60;
/// Root-finder iterations before giving up.
pub const MAX_ITERATIONS: usize = 200;

/// A converged exponent with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub problem: ConeProblem,
    pub lambda: f64,
    /// Blow-up angle of the returned `lambda`.
    pub alpha_achieved: f64,
    /// Bracket produced by the expansion stage, `lo <= lambda <= hi`.
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub residual_alpha: f64,
    /// Relative residual of the second-order angular equation.
    pub residual_ode: f64,
}

/// `g(mu)`, decreasing in `mu`. At the slit only its sign is meaningful.
struct Objective<'a> {
    problem: &'a ConeProblem,
    tol: &'a Tolerances,
    /// `(mu, g)` pairs seen so far, sorted by `mu`.
    samples: Vec<(f64, f64)>,
}

impl<'a> Objective<'a> {
    fn new(problem: &'a ConeProblem, tol: &'a Tolerances) -> Self {
        Objective {
            problem,
            tol,
            samples: Vec::new(),
        }
    }

    fn lambda(&self, mu: f64) -> f64 {
        self.problem.branch().sign() * mu
    }

    fn eval(&mut self, mu: f64) -> Result<f64> {
        let pb = self.problem;
        let lambda = self.lambda(mu);
        let g = if pb.is_slit() {
            match slit_side(lambda, pb.p(), pb.n(), self.tol)? {
                SlitSide::ReachesPi => 1.0,
                SlitSide::BlowsUpBefore => -1.0,
            }
        } else {
            alpha_star(lambda, pb.p(), pb.n(), self.tol)? - pb.alpha()
        };
        self.record(mu, g)?;
        Ok(g)
    }

    /// Inserts a sample and checks that `g` is still non-increasing in `mu`.
    fn record(&mut self, mu: f64, g: f64) -> Result<()> {
        let i = self.samples.partition_point(|s| s.0 < mu);
        self.samples.insert(i, (mu, g));
        let slack = self.tol.alpha_tol;
        let bad = |a: &(f64, f64), b: &(f64, f64)| b.1 > a.1 + slack;
        if (i > 0 && bad(&self.samples[i - 1], &self.samples[i]))
            || (i + 1 < self.samples.len() && bad(&self.samples[i], &self.samples[i + 1]))
        {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(self.samples.len() - 1));
            let window: Vec<String> = self.samples[lo..=hi]
                .iter()
                .map(|(m, g)| format!("({:.6e}, {:+.3e})", self.lambda(*m), g))
                .collect();
            return Err(Error::NonMonotone(format!(
                "blow-up angle not monotone in lambda near {} for {:?}: {}",
                self.lambda(mu),
                self.problem,
                window.join(" ")
            )));
        }
        Ok(())
    }
}

/// Magnitude bracket `(mu_lo, mu_hi)` with `g(mu_lo) >= 0 >= g(mu_hi)`.
/// Equal endpoints mean the seed already matches.
fn bracket_magnitude(obj: &mut Objective) -> Result<((f64, f64), (f64, f64))> {
    let pb = obj.problem;
    let seed = 1.0;
    let g0 = obj.eval(seed)?;
    if !pb.is_slit() && g0.abs() <= obj.tol.alpha_tol {
        return Ok(((seed, g0), (seed, g0)));
    }
    // g > 0: the blow-up comes too late, so |lambda| must grow.
    let grow = g0 > 0.0;
    let (mut mu, mut g) = (seed, g0);
    for k in 1..=MAX_EXPANSIONS {
        let next = if grow { 2.0 * mu } else { 0.5 * mu };
        if next > LAMBDA_CAP {
            return Err(Error::BracketNotFound {
                alpha: pb.alpha(),
                expansions: k,
            });
        }
        let g_next = obj.eval(next)?;
        let crossed = if grow { g_next <= 0.0 } else { g_next >= 0.0 };
        if crossed {
            return Ok(if grow {
                ((mu, g), (next, g_next))
            } else {
                ((next, g_next), (mu, g))
            });
        }
        mu = next;
        g = g_next;
    }
    Err(Error::BracketNotFound {
        alpha: pb.alpha(),
        expansions: MAX_EXPANSIONS,
    })
}

/// Returns `(lo, hi)` with `lo <= lambda <= hi` for the sought exponent.
pub fn bracket_lambda(problem: &ConeProblem, tol: &Tolerances) -> Result<(f64, f64)> {
    let mut obj = Objective::new(problem, tol);
    let ((a, _), (b, _)) = bracket_magnitude(&mut obj)?;
    Ok(ordered(obj.lambda(a), obj.lambda(b)))
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Solves for the exponent of `problem`.
pub fn solve_lambda(problem: &ConeProblem, tol: &Tolerances) -> Result<EigenResult> {
    let tol = tol.validate()?;
    let problem = problem.validate()?;
    let mut obj = Objective::new(&problem, &tol);
    let (lo, hi) = bracket_magnitude(&mut obj)?;
    let bracket = ordered(obj.lambda(lo.0), obj.lambda(hi.0));

    let (mu, iterations) = if lo.0 == hi.0 {
        (lo.0, 0)
    } else if problem.is_slit() {
        bisect_sign(&mut obj, lo.0, hi.0, tol.lambda_tol)?
    } else {
        brent(&mut obj, lo, hi, tol.lambda_tol, tol.alpha_tol)?
    };
    let mut lambda = obj.lambda(mu);
    if problem.is_slit() && problem.branch() == Branch::Fundamental {
        // The slit value of the fundamental branch is known exactly.
        let exact = lambda1_slit(problem.p(), problem.n());
        if (lambda - exact).abs() < 10.0 * tol.lambda_tol {
            lambda = exact;
        }
    }

    let (p, n) = (problem.p(), problem.n());
    let alpha_achieved = alpha_star(lambda, p, n, &tol)?;
    let prof = profile_for(lambda, p, n, &tol, spacing_for(problem.alpha()))?;
    let residual_ode = second_order_residual(&prof, p, n)?;
    Ok(EigenResult {
        problem,
        lambda,
        alpha_achieved,
        bracket,
        iterations,
        residual_alpha: (alpha_achieved - problem.alpha()).abs(),
        residual_ode,
    })
}

/// Bisection on the sign of `g`; used where only the sign is available.
fn bisect_sign(obj: &mut Objective, mut lo: f64, mut hi: f64, xtol: f64) -> Result<(f64, usize)> {
    for it in 1..=MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            return Ok((mid, it - 1));
        }
        if obj.eval(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::MaxIterations(MAX_ITERATIONS))
}

/// Brent's method on `g`, stopping once the root is located to `xtol` and
/// `|g| <= ftol`, or once the bracket cannot shrink further in `f64`.
fn brent(
    obj: &mut Objective,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    xtol: f64,
    ftol: f64,
) -> Result<(f64, usize)> {
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for it in 1..=MAX_ITERATIONS {
        if (fb > 0.0) == (fc > 0.0) && fb != 0.0 && fc != 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if fb == 0.0 || (xm.abs() <= tol1 && fb.abs() <= ftol) {
            return Ok((b, it - 1));
        }
        if xm.abs() <= 4.0 * f64::EPSILON * b.abs() {
            // Bracket exhausted at f64 resolution.
            return Ok((b, it - 1));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation, or secant when only two
            // distinct points are known.
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 {
            d
        } else if xm.abs() > tol1 {
            tol1.copysign(xm)
        } else {
            xm
        };
        fb = obj.eval(b)?;
    }
    Err(Error::MaxIterations(MAX_ITERATIONS))
}
