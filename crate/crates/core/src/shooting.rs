//! Shooting on the first-order angular equation for `psi = phi'/phi`.
//!
//! Starting from the regular series `psi ~ a theta` at `theta_start`, the
//! integrator follows `psi` until it blows up to `-inf`. Once `psi <= -1` the
//! state is switched to `w = 1/psi`, in which the blow-up is a regular zero
//! crossing with `w' -> 1`; the run stops when `|psi|` reaches the blow-up
//! threshold and the remaining distance to the singularity is taken from the
//! dominant balance `psi' = -psi^2`, i.e. `alpha* = theta + 1/|psi|`.
//!
//! `log(phi)` is integrated alongside so that profiles can be rebuilt without
//! re-quadrature.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{dopri_step, PiController};
use crate::problem::{Tolerances, LAMBDA_CAP, P_MAX, P_MIN};

/// `|psi|` at which the state switches from `psi` to `1/psi`.
const SWITCH_MAGNITUDE: f64 = 1.0;
/// Default cap on the step between recorded trajectory nodes.
pub const DEFAULT_MAX_STEP: f64 = 0.05;
const MAX_STEPS: usize = 2_000_000;
/// Within this distance of `pi` the relative rounding error of `pi - theta`
/// exceeds the integration tolerances; a step-size collapse there ends the
/// run instead of failing it.
const PI_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrajectoryStatus {
    BlewUp,
    ReachedPi,
    Failed,
}

/// A `lambda`-parameterised integration of `psi` from the axis to blow-up.
#[derive(Debug, Clone, Serialize)]
pub struct ShootingTrajectory {
    pub lambda: f64,
    pub p: f64,
    pub n: u32,
    pub theta: Vec<f64>,
    pub psi: Vec<f64>,
    /// `log(phi)` at each node, with `phi(0) = 1`.
    pub log_phi: Vec<f64>,
    pub alpha_star: f64,
    pub status: TrajectoryStatus,
}

impl ShootingTrajectory {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Regular slope `a` of `psi ~ a theta` at the axis.
pub fn series_slope(lambda: f64, p: f64, n: u32) -> f64 {
    let n = f64::from(n);
    -lambda * (lambda * (p - 1.0) + (n - p)) / (n - 1.0)
}

/// Series start value `psi(theta0) = a theta0`.
pub fn series_start(lambda: f64, p: f64, n: u32, theta0: f64) -> Result<f64> {
    if !(theta0 > 0.0 && theta0 <= 1e-3) {
        return Err(Error::Domain(format!(
            "series start needs 0 < theta0 <= 1e-3 (got {theta0})"
        )));
    }
    Ok(series_slope(lambda, p, n) * theta0)
}

#[inline]
fn zeroth_coefficient(lambda: f64, p: f64, n: f64) -> f64 {
    lambda * lambda * (p - 1.0) + lambda * (n - p)
}

#[inline]
fn psi_rhs_unchecked(theta: f64, psi: f64, lambda: f64, p: f64, n: f64) -> f64 {
    let l2 = lambda * lambda;
    let psi2 = psi * psi;
    let cot = theta.cos() / theta.sin();
    let bracket = (p - 1.0) * psi2 + (n - 2.0) * cot * psi + zeroth_coefficient(lambda, p, n);
    -(l2 + psi2) * bracket / ((p - 1.0) * psi2 + l2)
}

/// Right-hand side `d psi / d theta` of the first-order angular equation.
pub fn psi_rhs(theta: f64, psi: f64, lambda: f64, p: f64, n: u32) -> Result<f64> {
    let denom = (p - 1.0) * psi * psi + lambda * lambda;
    if !(denom > 0.0) {
        return Err(Error::DegenerateDenominator(denom));
    }
    Ok(psi_rhs_unchecked(theta, psi, lambda, p, f64::from(n)))
}

/// `d w / d theta` for `w = 1/psi`. Regular at the blow-up, where it tends to 1.
#[inline]
fn inverse_rhs(theta: f64, w: f64, lambda: f64, p: f64, n: f64) -> f64 {
    let l2w2 = lambda * lambda * w * w;
    let cot = theta.cos() / theta.sin();
    let num = (p - 1.0) + (n - 2.0) * cot * w + zeroth_coefficient(lambda, p, n) * w * w;
    (l2w2 + 1.0) * num / ((p - 1.0) + l2w2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// state[0] = psi
    Direct,
    /// state[0] = 1/psi
    Inverse,
}

/// Knobs for a single shooting run.
#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    /// Largest integration step.
    pub max_step: f64,
    /// Angle at which a bounded run is stopped. `None` means `pi - alpha_tol`.
    pub theta_end: Option<f64>,
    /// When set, steps are cut to land on the multiples of this spacing and
    /// only those nodes are recorded (plus the start and stop nodes).
    pub uniform_spacing: Option<f64>,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            max_step: DEFAULT_MAX_STEP,
            theta_end: None,
            uniform_spacing: None,
        }
    }
}

impl ShootOptions {
    /// No step cap and no recording constraints; used when only the stop
    /// angle matters.
    pub fn unconstrained() -> Self {
        ShootOptions {
            max_step: f64::INFINITY,
            theta_end: None,
            uniform_spacing: None,
        }
    }

    pub fn uniform(spacing: f64) -> Self {
        ShootOptions {
            max_step: spacing,
            theta_end: None,
            uniform_spacing: Some(spacing),
        }
    }
}

fn check_inputs(lambda: f64, p: f64, n: u32, tol: &Tolerances) -> Result<()> {
    tol.validate()?;
    if !lambda.is_finite() || lambda == 0.0 || lambda.abs() > LAMBDA_CAP {
        return Err(Error::Domain(format!(
            "lambda must be nonzero with |lambda| <= {LAMBDA_CAP} (got {lambda})"
        )));
    }
    if !(P_MIN..=P_MAX).contains(&p) {
        return Err(Error::Domain(format!("p out of range (got {p})")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("n must be >= 2 (got {n})")));
    }
    Ok(())
}

/// Integrate `psi` for a trial `lambda` until blow-up or until `theta`
/// reaches `pi - alpha_tol`.
pub fn integrate_psi(lambda: f64, p: f64, n: u32, tol: &Tolerances) -> Result<ShootingTrajectory> {
    integrate_psi_with(lambda, p, n, tol, &ShootOptions::default())
}

pub fn integrate_psi_with(
    lambda: f64,
    p: f64,
    n: u32,
    tol: &Tolerances,
    opts: &ShootOptions,
) -> Result<ShootingTrajectory> {
    check_inputs(lambda, p, n, tol)?;
    if let Some(d) = opts.uniform_spacing {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Domain(format!("uniform spacing must be positive (got {d})")));
        }
    }
    let theta_end = opts.theta_end.unwrap_or(PI - tol.alpha_tol);
    let nf = f64::from(n);

    let direct = move |t: f64, y: &[f64; 2]| [psi_rhs_unchecked(t, y[0], lambda, p, nf), y[0]];
    let inverse = move |t: f64, y: &[f64; 2]| [inverse_rhs(t, y[0], lambda, p, nf), 1.0 / y[0]];

    let theta0 = tol.theta_start;
    let a = series_slope(lambda, p, n);
    let psi0 = a * theta0;
    let mut theta = theta0;
    // log phi over [0, theta0] from the same series
    let mut y = [psi0, 0.5 * a * theta0 * theta0];
    let mut phase = Phase::Direct;

    let mut thetas = vec![theta];
    let mut psis = vec![psi0];
    let mut logs = vec![y[1]];

    let eval = |phase: Phase, t: f64, y: &[f64; 2]| match phase {
        Phase::Direct => direct(t, y),
        Phase::Inverse => inverse(t, y),
    };

    let mut k = eval(phase, theta, &y);
    let mut h = theta0.min(opts.max_step);
    let mut ctl = PiController::new();
    let threshold_w = 1.0 / tol.psi_blowup_threshold;
    let mut rejected = false;

    for _ in 0..MAX_STEPS {
        if theta >= theta_end {
            return Ok(finish(lambda, p, n, thetas, psis, logs, PI, TrajectoryStatus::ReachedPi, opts));
        }
        let mut limit = opts.max_step.min(theta_end - theta);
        if phase == Phase::Inverse {
            // w' ~ 1 near the singularity, so this keeps each step short of it.
            limit = limit.min(0.5 * y[0].abs());
        }
        h = h.min(limit);
        let mut lands_on_grid = false;
        if let Some(d) = opts.uniform_spacing {
            let next = next_grid_point(theta, d);
            // Also land when a full step would stop just short of the node,
            // so no sliver step is ever left over.
            // A rejected step must not be stretched back to the same node.
            let stretch = if rejected { 1.0 } else { 1.5 };
            if next - theta <= (stretch * h).min(limit) * (1.0 + 1e-9) {
                h = next - theta;
                lands_on_grid = true;
            }
        }
        let min_step = 1e-14 * theta.abs().max(1.0);
        if h < min_step && theta_end - theta > min_step {
            if PI - theta < PI_RESOLUTION {
                // Rounding in theta now dominates cot(theta); the run has
                // reached the end of what f64 can resolve.
                let (alpha_star, status) = match phase {
                    Phase::Inverse if theta + y[0].abs() < PI => (theta + y[0].abs(), TrajectoryStatus::BlewUp),
                    _ => (PI, TrajectoryStatus::ReachedPi),
                };
                return Ok(finish(lambda, p, n, thetas, psis, logs, alpha_star, status, opts));
            }
            return Err(Error::StepSizeUnderflow { theta, step: h });
        }

        let step = match phase {
            Phase::Direct => dopri_step(&direct, theta, &y, &k, h, tol.ode_rel_tol, tol.ode_abs_tol),
            Phase::Inverse => dopri_step(&inverse, theta, &y, &k, h, tol.ode_rel_tol, tol.ode_abs_tol),
        };
        let crossed = phase == Phase::Inverse && step.y[0] >= 0.0;
        if step.err > 1.0 || crossed || !step.y.iter().all(|v| v.is_finite()) {
            h *= if crossed { 0.25 } else { ctl.reject(step.err) };
            rejected = true;
            continue;
        }

        rejected = false;
        theta = if theta_end - (theta + h) <= 1e-15 * theta_end {
            theta_end
        } else if lands_on_grid {
            next_grid_point(theta, opts.uniform_spacing.unwrap_or(h))
        } else {
            theta + h
        };
        y = step.y;
        k = step.k_end;
        h *= ctl.accept(step.err);

        let psi = match phase {
            Phase::Direct => y[0],
            Phase::Inverse => 1.0 / y[0],
        };
        let stopping = theta >= theta_end
            || (phase == Phase::Inverse && y[0].abs() <= threshold_w);
        if opts.uniform_spacing.is_none() || lands_on_grid || stopping {
            thetas.push(theta);
            psis.push(psi);
            logs.push(y[1]);
        }

        match phase {
            Phase::Direct if psi <= -SWITCH_MAGNITUDE => {
                phase = Phase::Inverse;
                y[0] = 1.0 / psi;
                k = eval(phase, theta, &y);
            }
            Phase::Inverse if y[0] < -1.0 / SWITCH_MAGNITUDE => {
                phase = Phase::Direct;
                y[0] = psi;
                k = eval(phase, theta, &y);
            }
            Phase::Inverse if y[0].abs() <= threshold_w => {
                let alpha_star = theta + y[0].abs();
                let (alpha_star, status) = if alpha_star >= PI {
                    (PI, TrajectoryStatus::ReachedPi)
                } else {
                    (alpha_star, TrajectoryStatus::BlewUp)
                };
                return Ok(finish(lambda, p, n, thetas, psis, logs, alpha_star, status, opts));
            }
            _ => {}
        }
    }
    Err(Error::StepSizeUnderflow { theta, step: h })
}

/// Smallest multiple of `d` strictly above `theta` (by more than rounding).
fn next_grid_point(theta: f64, d: f64) -> f64 {
    let mut k = (theta / d).floor() + 1.0;
    if k * d - theta <= 1e-6 * d {
        k += 1.0;
    }
    k * d
}

#[allow(clippy::too_many_arguments)]
fn finish(
    lambda: f64,
    p: f64,
    n: u32,
    theta: Vec<f64>,
    psi: Vec<f64>,
    log_phi: Vec<f64>,
    alpha_star: f64,
    status: TrajectoryStatus,
    opts: &ShootOptions,
) -> ShootingTrajectory {
    // A truncated run (custom theta_end) reports where it stopped.
    let alpha_star = match (status, opts.theta_end) {
        (TrajectoryStatus::ReachedPi, Some(end)) if end < PI => *theta.last().unwrap_or(&end),
        _ => alpha_star,
    };
    ShootingTrajectory {
        lambda,
        p,
        n,
        theta,
        psi,
        log_phi,
        alpha_star,
        status,
    }
}

/// Blow-up angle of the shooting solution for `lambda`; `pi` when `psi`
/// stays bounded up to `pi - alpha_tol`.
pub fn alpha_star(lambda: f64, p: f64, n: u32, tol: &Tolerances) -> Result<f64> {
    let traj = integrate_psi_with(
        lambda,
        p,
        n,
        tol,
        &ShootOptions::unconstrained(),
    )?;
    Ok(match traj.status {
        TrajectoryStatus::ReachedPi => PI,
        _ => traj.alpha_star,
    })
}

/// Fate of a shooting solution at the slit `theta = pi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlitSide {
    /// `psi` blows up strictly before `pi`.
    BlowsUpBefore,
    /// `phi` stays positive up to `pi`.
    ReachesPi,
}

/// Distance from `pi` at which the slit classifier switches to log variables.
const SLIT_SWITCH: f64 = 0.5;
/// `pi - theta` below which the classifier trusts the asymptotic phase plane.
const SLIT_DECIDE: f64 = 1e-3;
/// Largest `-log(pi - theta)` followed by the classifier.
const SLIT_T_MAX: f64 = 300.0;

/// Decides on which side of the slit eigenvalue `lambda` lies.
///
/// Near `theta = pi` put `s = pi - theta`, `t = -log s` and `m = -s psi`.
/// Then
///
/// `dm/dt = (l^2 s^2 + m^2)((p-1)m^2 + (n-2) s cot(s) m + c s^2) / ((p-1)m^2 + l^2 s^2) - m`
///
/// with `c = l^2 (p-1) + l (n-p)`, which tends to `m (m - beta)` as
/// `s -> 0`, `beta = (p+1-n)/(p-1)`. The slit solution is the unstable
/// fixed point `m = beta` (`phi ~ s^beta`); nearby trajectories either
/// escape to `+inf` (blow-up before `pi`) or decay to `0` (`phi(pi) > 0`).
/// Requires `p > n - 1`.
pub fn slit_side(lambda: f64, p: f64, n: u32, tol: &Tolerances) -> Result<SlitSide> {
    let nf = f64::from(n);
    if p <= nf - 1.0 {
        return Err(Error::Domain(format!(
            "alpha=pi requires p > n-1 (p={p}, n={n})"
        )));
    }
    let beta = (p + 1.0 - nf) / (p - 1.0);
    let traj = integrate_psi_with(
        lambda,
        p,
        n,
        tol,
        &ShootOptions {
            theta_end: Some(PI - SLIT_SWITCH),
            ..ShootOptions::unconstrained()
        },
    )?;
    if traj.status == TrajectoryStatus::BlewUp {
        return Ok(SlitSide::BlowsUpBefore);
    }
    let theta = *traj.theta.last().unwrap();
    let psi = *traj.psi.last().unwrap();
    let s0 = PI - theta;
    let m0 = -s0 * psi;

    let c = zeroth_coefficient(lambda, p, nf);
    let l2 = lambda * lambda;
    let rhs = move |t: f64, y: &[f64; 1]| {
        let s = (-t).exp();
        let m = y[0];
        let s2 = s * s;
        let m2 = m * m;
        let s_cot_s = if s < 1e-8 { 1.0 - s2 / 3.0 } else { s * s.cos() / s.sin() };
        let num = (p - 1.0) * m2 + (nf - 2.0) * s_cot_s * m + c * s2;
        [(l2 * s2 + m2) * num / ((p - 1.0) * m2 + l2 * s2) - m]
    };

    let mut t = -s0.ln();
    let mut y = [m0];
    let mut k = rhs(t, &y);
    let mut h: f64 = 1e-3;
    let mut ctl = PiController::new();
    let t_decide = -SLIT_DECIDE.ln();
    let escape = 1e6_f64.max(10.0 * beta);

    for _ in 0..MAX_STEPS {
        let m = y[0];
        if m > escape {
            return Ok(SlitSide::BlowsUpBefore);
        }
        if t >= t_decide {
            if m > 1.5 * beta {
                return Ok(SlitSide::BlowsUpBefore);
            }
            if m < 0.5 * beta {
                return Ok(SlitSide::ReachesPi);
            }
        }
        if t >= SLIT_T_MAX {
            return Ok(if m > beta { SlitSide::BlowsUpBefore } else { SlitSide::ReachesPi });
        }
        h = h.min(SLIT_T_MAX - t);
        // m' ~ m^2 for large m: keep the step well inside the escape time
        if m > 1.0 {
            h = h.min(0.5 / m);
        }
        let step = dopri_step(&rhs, t, &y, &k, h, tol.ode_rel_tol, tol.ode_abs_tol);
        if step.err > 1.0 || !step.y[0].is_finite() {
            h *= ctl.reject(step.err);
            if h < 1e-14 * t.max(1.0) {
                return Err(Error::StepSizeUnderflow { theta: PI - (-t).exp(), step: h });
            }
            continue;
        }
        t += h;
        y = step.y;
        k = step.k_end;
        h *= ctl.accept(step.err);
    }
    Err(Error::StepSizeUnderflow { theta: PI - (-t).exp(), step: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn rhs_half_space_solution() {
        // psi = -tan(theta) with lambda = 1: psi' = -sec^2(theta)
        let v = psi_rhs(FRAC_PI_4, -1.0, 1.0, 2.0, 2).unwrap();
        assert!((v + 2.0).abs() < 1e-14);
        let v = psi_rhs(FRAC_PI_3, -FRAC_PI_3.tan(), 1.0, 5.0, 7).unwrap();
        assert!((v + 4.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn rhs_at_axis_value() {
        let v = psi_rhs(0.7, 0.0, 1.0, 2.0, 3).unwrap();
        assert!((v + 2.0).abs() < 1e-14);
    }

    #[test]
    fn rhs_degenerate_denominator() {
        assert!(matches!(
            psi_rhs(0.5, 0.0, 0.0, 2.0, 3),
            Err(Error::DegenerateDenominator(_))
        ));
    }

    #[test]
    fn series_start_examples() {
        for p in [1.5, 2.0, 7.0] {
            for n in [2, 3, 9] {
                let v = series_start(1.0, p, n, 1e-7).unwrap();
                assert!((v + 1e-7).abs() < 1e-20);
            }
        }
        let v = series_start(-1.0, 3.0, 3, 1e-7).unwrap();
        assert!((v + 1e-7).abs() < 1e-20);
        assert!(series_start(0.5, 2.0, 2, 0.0).is_err());
        assert!(series_start(0.5, 2.0, 2, 1e-2).is_err());
    }

    #[test]
    fn series_slope_matches_finite_differences() {
        // The integrated psi(theta)/theta must approach the series slope as theta -> 0.
        let (lambda, p, n) = (0.8, 2.7, 4);
        let a = series_slope(lambda, p, n);
        let traj = integrate_psi(lambda, p, n, &tol()).unwrap();
        let (t, ps) = traj
            .theta
            .iter()
            .zip(&traj.psi)
            .find(|(t, _)| **t > 1e-3)
            .unwrap();
        let slope = ps / t;
        assert!((slope - a).abs() < 1e-3 * a.abs(), "{slope} vs {a}");
    }

    #[test]
    fn half_space_trajectory_is_minus_tan() {
        let traj = integrate_psi(1.0, 3.0, 4, &tol()).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::BlewUp);
        assert!((traj.alpha_star - FRAC_PI_2).abs() < 1e-8, "{}", traj.alpha_star);
        for (t, ps) in traj.theta.iter().zip(&traj.psi) {
            if *t < FRAC_PI_2 - 0.01 {
                assert!((ps + t.tan()).abs() < 1e-8, "theta={t} psi={ps}");
            }
        }
    }

    #[test]
    fn conformal_exterior_trajectory() {
        let traj = integrate_psi(-1.0, 3.0, 3, &tol()).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::BlewUp);
        assert!((traj.alpha_star - FRAC_PI_2).abs() < 1e-8);
    }

    #[test]
    fn slit_trajectory_three_dims() {
        let (p, lambda, beta) = (10.0 / 3.0, -2.0 / 7.0, 4.0 / 7.0);
        let traj = integrate_psi(lambda, p, 3, &tol()).unwrap();
        assert!((traj.alpha_star - PI).abs() < 1e-6, "{}", traj.alpha_star);
        for (t, ps) in traj.theta.iter().zip(&traj.psi) {
            if *t < PI - 0.01 {
                let exact = -0.5 * beta * (0.5 * t).tan();
                assert!((ps - exact).abs() < 1e-6, "theta={t} psi={ps} exact={exact}");
            }
        }
    }

    #[test]
    fn alpha_star_anchors() {
        let a = alpha_star(1.0, 2.0, 5, &tol()).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-8);
        let a = alpha_star(-4.0, 2.0, 5, &tol()).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-8);
        let a = alpha_star(0.5, 4.0, 3, &tol()).unwrap();
        assert!((a - PI).abs() < 1e-4, "{a}");
    }

    #[test]
    fn trajectory_invariants() {
        let traj = integrate_psi(1.7, 2.5, 3, &tol()).unwrap();
        assert!(traj.theta.windows(2).all(|w| w[1] > w[0]));
        assert!(traj.psi.iter().all(|v| *v <= 0.0));
        assert!(traj.alpha_star >= *traj.theta.last().unwrap());
        assert!(traj.alpha_star <= PI + tol().alpha_tol);
        assert_eq!(traj.psi[0], series_start(1.7, 2.5, 3, 1e-7).unwrap());
    }

    #[test]
    fn threshold_halving_moves_alpha_star_little() {
        let t = tol();
        let half = Tolerances {
            psi_blowup_threshold: t.psi_blowup_threshold / 2.0,
            ..t
        };
        for (lambda, p, n) in [(1.3, 2.0, 3), (-2.5, 3.0, 4), (0.6, 1.5, 2)] {
            let a = alpha_star(lambda, p, n, &t).unwrap();
            let b = alpha_star(lambda, p, n, &half).unwrap();
            assert!((a - b).abs() < 10.0 * t.alpha_tol, "{lambda}: {a} vs {b}");
        }
    }

    #[test]
    fn subcritical_lambda_reaches_pi() {
        // below 1 - (n-1)/p the fundamental solution never vanishes
        let a = alpha_star(0.3, 3.0, 3, &tol()).unwrap();
        assert_eq!(a, PI);
    }

    #[test]
    fn slit_classifier_brackets_known_values() {
        let t = tol();
        // Fundamental, lambda_1(pi) = 1 - (n-1)/p
        assert_eq!(slit_side(1.0 / 3.0 + 1e-4, 3.0, 3, &t).unwrap(), SlitSide::BlowsUpBefore);
        assert_eq!(slit_side(1.0 / 3.0 - 1e-4, 3.0, 3, &t).unwrap(), SlitSide::ReachesPi);
        // Exterior slit solution at p = (4n-2)/3
        let (p, l) = (10.0 / 3.0, -2.0 / 7.0);
        assert_eq!(slit_side(l - 1e-6, p, 3, &t).unwrap(), SlitSide::BlowsUpBefore);
        assert_eq!(slit_side(l + 1e-6, p, 3, &t).unwrap(), SlitSide::ReachesPi);
        assert!(slit_side(0.5, 2.0, 3, &t).is_err());
    }

    #[test]
    fn rejects_zero_lambda() {
        assert!(integrate_psi(0.0, 2.0, 3, &tol()).is_err());
    }
}
