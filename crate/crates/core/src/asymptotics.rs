//! Sweeps of the fundamental exponent toward the slit and fits of its
//! asymptotic law.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::eigensolver::solve_lambda;
use crate::error::{Error, Result};
use crate::parallel::{self, Execution};
use crate::problem::{Branch, ConeProblem, Tolerances};
use crate::reference::{theoretical_exponent, AsymptoticLaw};

/// Default fit window in `pi - alpha`.
pub const DEFAULT_WINDOW: (f64, f64) = (1e-4, 1e-2);
/// Default number of sweep points inside the window.
pub const DEFAULT_POINTS: usize = 9;
/// Fewest records a fit accepts.
pub const MIN_FIT_RECORDS: usize = 4;
/// `r^2` below which a fit is flagged.
pub const R_SQUARED_FLAG: f64 = 0.99;

/// One solve of a sweep. Failed solves carry `NaN` numbers and an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub lambda: f64,
    pub residual_alpha: f64,
    pub residual_ode: f64,
    /// Seconds spent in the solve.
    pub wall_time: f64,
    pub error: Option<String>,
    /// Whether the error was caused by the input rather than the numerics.
    #[serde(default)]
    pub domain_error: bool,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// `count` apertures `pi - eps` with `eps` log-spaced over `[eps_min, eps_max]`,
/// sorted ascending in `alpha`.
pub fn geometric_alphas(eps_min: f64, eps_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(eps_min > 0.0 && eps_max >= eps_min && eps_max < PI && eps_min.is_finite()) {
        return Err(Error::Domain(format!(
            "need 0 < eps_min <= eps_max < pi (got {eps_min}, {eps_max})"
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if count == 1 {
        return Ok(vec![PI - eps_min]);
    }
    let (lo, hi) = (eps_min.ln(), eps_max.ln());
    let step = (hi - lo) / (count - 1) as f64;
    // Largest gap first, so alpha ascends.
    Ok((0..count)
        .map(|k| PI - (hi - k as f64 * step).exp())
        .collect())
}

pub fn sweep(p: f64, n: u32, branch: Branch, alphas: &[f64], tol: &Tolerances) -> Vec<SweepRecord> {
    sweep_with(p, n, branch, alphas, tol, Execution::default())
}

/// Solves every aperture independently. Failures are kept per record.
pub fn sweep_with(
    p: f64,
    n: u32,
    branch: Branch,
    alphas: &[f64],
    tol: &Tolerances,
    exec: Execution,
) -> Vec<SweepRecord> {
    let mut records = parallel::map(alphas, exec, |&alpha| solve_record(p, n, branch, alpha, tol));
    records.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    records
}

fn solve_record(p: f64, n: u32, branch: Branch, alpha: f64, tol: &Tolerances) -> SweepRecord {
    let start = Instant::now();
    let outcome = ConeProblem::new(p, n, alpha, branch).and_then(|pb| solve_lambda(&pb, tol));
    let wall_time = start.elapsed().as_secs_f64();
    match outcome {
        Ok(r) => SweepRecord {
            alpha,
            lambda: r.lambda,
            residual_alpha: r.residual_alpha,
            residual_ode: r.residual_ode,
            wall_time,
            error: None,
            domain_error: false,
        },
        Err(e) => SweepRecord {
            alpha,
            lambda: f64::NAN,
            residual_alpha: f64::NAN,
            residual_ode: f64::NAN,
            wall_time,
            domain_error: e.is_domain(),
            error: Some(e.to_string()),
        },
    }
}

/// Least-squares fit of the asymptotic law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub law: AsymptoticLaw,
    pub fitted_exponent: f64,
    pub fitted_prefactor: f64,
    pub r_squared: f64,
    /// `(eps_min, eps_max)` actually spanned by the fitted records.
    pub window: (f64, f64),
    pub theoretical_exponent: f64,
    pub records_used: usize,
}

impl FitResult {
    /// Relative error of the fitted exponent.
    pub fn relative_error(&self) -> f64 {
        ((self.fitted_exponent - self.theoretical_exponent) / self.theoretical_exponent).abs()
    }

    /// True when `r^2` is below [`R_SQUARED_FLAG`].
    pub fn flagged(&self) -> bool {
        self.r_squared < R_SQUARED_FLAG
    }
}

pub fn fit_exponent(records: &[SweepRecord], p: f64, n: u32) -> Result<FitResult> {
    fit_exponent_in(records, p, n, DEFAULT_WINDOW)
}

/// Fits `log Q = k log X + log C` over the records whose gap `pi - alpha`
/// lies in `window`, where
///
/// * gap law: `Q = lambda - lambda(pi)`, `X = pi - alpha`;
/// * value law: `Q = lambda`, `X = pi - alpha`;
/// * log law: `Q = 1/lambda`, `X = -log(pi - alpha)`, exponent 1.
///
/// For the log law `r^2` is that of the straight-line fit of `-1/lambda`
/// against `log(pi - alpha)`, which is the relation the law predicts.
pub fn fit_exponent_in(
    records: &[SweepRecord],
    p: f64,
    n: u32,
    window: (f64, f64),
) -> Result<FitResult> {
    let law = theoretical_exponent(p, n)?;
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("invalid fit window ({lo}, {hi})")));
    }
    let slack = 1e-9;
    let mut used: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.is_ok())
        .filter(|r| {
            let eps = PI - r.alpha;
            eps >= lo * (1.0 - slack) && eps <= hi * (1.0 + slack)
        })
        .collect();
    used.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.lambda.total_cmp(&b.lambda)));
    if used.len() < MIN_FIT_RECORDS {
        return Err(Error::InsufficientData(format!(
            "{} records in window ({lo:e}, {hi:e}); need at least {MIN_FIT_RECORDS}",
            used.len()
        )));
    }
    let eps_max = PI - used[0].alpha;
    let eps_min = PI - used[used.len() - 1].alpha;
    if eps_max < 10.0 * eps_min * (1.0 - slack) {
        return Err(Error::InsufficientData(format!(
            "records span ({eps_min:e}, {eps_max:e}), less than one decade"
        )));
    }

    let mut xs = Vec::with_capacity(used.len());
    let mut ys = Vec::with_capacity(used.len());
    for r in &used {
        let eps = PI - r.alpha;
        let (q, x) = match law {
            AsymptoticLaw::Gap { limit, .. } => (r.lambda - limit, eps),
            AsymptoticLaw::Value { .. } => (r.lambda, eps),
            AsymptoticLaw::Log => (1.0 / r.lambda, -eps.ln()),
        };
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::NonPositiveQuantity { alpha: r.alpha, value: q });
        }
        xs.push(x);
        ys.push(q);
    }

    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (slope, intercept, r2_loglog) = least_squares(&lx, &ly);
    let (fitted_exponent, theoretical, r_squared) = match law {
        AsymptoticLaw::Gap { exponent, .. } | AsymptoticLaw::Value { exponent } => {
            (slope, exponent, r2_loglog)
        }
        AsymptoticLaw::Log => {
            let logs: Vec<f64> = used.iter().map(|r| (PI - r.alpha).ln()).collect();
            let inv: Vec<f64> = used.iter().map(|r| -1.0 / r.lambda).collect();
            (slope, 1.0, least_squares(&logs, &inv).2)
        }
    };
    Ok(FitResult {
        law,
        fitted_exponent,
        fitted_prefactor: intercept.exp(),
        r_squared,
        window: (eps_min, eps_max),
        theoretical_exponent: theoretical,
        records_used: used.len(),
    })
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, r^2)`.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::lambda_closed_form_2d;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn synthetic(law: impl Fn(f64) -> f64, count: usize) -> Vec<SweepRecord> {
        geometric_alphas(1e-4, 1e-2, count)
            .unwrap()
            .into_iter()
            .map(|alpha| SweepRecord {
                alpha,
                lambda: law(PI - alpha),
                residual_alpha: 0.0,
                residual_ode: 0.0,
                wall_time: 0.0,
                error: None,
                domain_error: false,
            })
            .collect()
    }

    #[test]
    fn geometric_grid() {
        let a = geometric_alphas(1e-4, 1e-2, 9).unwrap();
        assert_eq!(a.len(), 9);
        assert!((PI - a[0] - 1e-2).abs() < 1e-15);
        assert!((PI - a[8] - 1e-4).abs() < 1e-15);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(geometric_alphas(0.0, 1e-2, 3).is_err());
    }

    #[test]
    fn exact_power_laws_are_recovered() {
        // gap law for p = 3, n = 3: limit 1/3, exponent 1/2
        let recs = synthetic(|e| 1.0 / 3.0 + 0.7 * e.sqrt(), 9);
        let fit = fit_exponent(&recs, 3.0, 3).unwrap();
        assert!((fit.fitted_exponent - 0.5).abs() < 1e-12);
        assert!((fit.fitted_prefactor - 0.7).abs() < 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);

        // value law for p = 2, n = 4: exponent 1
        let recs = synthetic(|e| 0.3 * e, 5);
        let fit = fit_exponent(&recs, 2.0, 4).unwrap();
        assert!((fit.fitted_exponent - 1.0).abs() < 1e-12);

        // log law for p = 2, n = 3
        let recs = synthetic(|e| -0.5 / e.ln(), 6);
        let fit = fit_exponent(&recs, 2.0, 3).unwrap();
        assert_eq!(fit.law, AsymptoticLaw::Log);
        assert!((fit.fitted_exponent - 1.0).abs() < 1e-12);
        assert!((fit.fitted_prefactor - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        let recs = synthetic(|e| 1.0 / 3.0 + e.sqrt(), 3);
        assert!(matches!(fit_exponent(&recs, 3.0, 3), Err(Error::InsufficientData(_))));
        let narrow: Vec<SweepRecord> = synthetic(|e| 1.0 / 3.0 + e.sqrt(), 9)
            .into_iter()
            .filter(|r| PI - r.alpha < 5e-4)
            .collect();
        assert!(narrow.len() < 4 || fit_exponent(&narrow, 3.0, 3).is_err());
        let below = synthetic(|e| 1.0 / 3.0 - e, 9);
        assert!(matches!(
            fit_exponent(&below, 3.0, 3),
            Err(Error::NonPositiveQuantity { .. })
        ));
    }

    #[test]
    fn empty_sweep() {
        assert!(sweep(2.0, 2, Branch::Fundamental, &[], &Tolerances::default()).is_empty());
    }

    #[test]
    fn planar_sweep_matches_closed_form() {
        let alphas = [FRAC_PI_2, 0.75 * PI, PI - 1e-3];
        let recs = sweep(2.0, 2, Branch::Fundamental, &alphas, &Tolerances::default());
        assert!((recs[0].lambda - 1.0).abs() < 1e-8);
        for r in &recs {
            let exact = lambda_closed_form_2d(2.0, r.alpha, Branch::Fundamental).unwrap();
            assert!((r.lambda - exact).abs() < 1e-8, "{} {}", r.lambda, exact);
        }
        assert!((recs[2].lambda - 0.5).abs() < 1e-3);
    }

    #[test]
    fn sweep_keeps_failures() {
        let recs = sweep(2.0, 3, Branch::Fundamental, &[1.0, 4.0], &Tolerances::default());
        assert!(recs[0].is_ok());
        assert!(!recs[1].is_ok() && recs[1].domain_error);
        assert!(recs[1].lambda.is_nan());
    }

    #[test]
    fn sweep_toward_slit_decreases_to_limit() {
        let alphas: Vec<f64> = (1..=4).map(|k| PI - 10f64.powi(-k)).collect();
        let recs = sweep(3.0, 3, Branch::Fundamental, &alphas, &Tolerances::default());
        assert!(recs.windows(2).all(|w| w[1].lambda < w[0].lambda));
        assert!(recs.iter().all(|r| r.lambda > 1.0 / 3.0));
        assert!(recs[3].lambda - 1.0 / 3.0 < 0.01);
    }

    #[test]
    fn execution_modes_agree() {
        let alphas = geometric_alphas(1e-3, 1e-1, 5).unwrap();
        let tol = Tolerances::default();
        let a = sweep_with(5.0, 4, Branch::Fundamental, &alphas, &tol, Execution::Parallel);
        let b = sweep_with(5.0, 4, Branch::Fundamental, &alphas, &tol, Execution::Sequential);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.lambda.to_bits(), y.lambda.to_bits());
        }
    }

    proptest! {
        #[test]
        fn fit_is_order_invariant(seed in 0u64..1000) {
            let mut recs = synthetic(|e| 1.0 / 3.0 + 0.9 * e.powf(0.52) * (1.0 + 0.3 * e), 9);
            // deterministic shuffle
            let mut s = seed;
            for i in (1..recs.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                recs.swap(i, (s >> 33) as usize % (i + 1));
            }
            let base = fit_exponent(&synthetic(|e| 1.0 / 3.0 + 0.9 * e.powf(0.52) * (1.0 + 0.3 * e), 9), 3.0, 3).unwrap();
            let fit = fit_exponent(&recs, 3.0, 3).unwrap();
            prop_assert!((fit.fitted_exponent - base.fitted_exponent).abs() <= 1e-12);
            prop_assert!((fit.r_squared - base.r_squared).abs() <= 1e-12);
            prop_assert!(fit.r_squared >= 0.0 && fit.r_squared <= 1.0);
            prop_assert!(fit.window.0 > 0.0 && fit.window.0 < fit.window.1);
        }
    }
}
