//! Angular profiles `phi(theta)` and the homogeneous solution `u = r^lambda phi`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::Tolerances;
use crate::shooting::{integrate_psi_with, ShootOptions, ShootingTrajectory, TrajectoryStatus};

/// Node spacing used for the residual check attached to solver results.
pub const PROFILE_SPACING: f64 = 5e-4;
/// Fewest interior nodes accepted by [`second_order_residual`].
pub const MIN_INTERIOR_NODES: usize = 50;

/// Angular profile on a grid, normalised by `phi(0) = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// `phi' = psi phi`
    pub dphi: Vec<f64>,
    pub lambda: f64,
    /// Zero of `phi`.
    pub alpha: f64,
}

/// Rebuilds `phi = exp(int_0^theta psi)` from a trajectory. The axis node
/// `theta = 0` is prepended.
pub fn reconstruct_phi(traj: &ShootingTrajectory) -> Result<Profile> {
    if traj.status == TrajectoryStatus::Failed || traj.is_empty() {
        return Err(Error::Domain("cannot build a profile from a failed trajectory".into()));
    }
    let len = traj.len() + 1;
    let mut theta = Vec::with_capacity(len);
    let mut phi = Vec::with_capacity(len);
    let mut dphi = Vec::with_capacity(len);
    theta.push(0.0);
    phi.push(1.0);
    dphi.push(0.0);
    for ((t, ps), lp) in traj.theta.iter().zip(&traj.psi).zip(&traj.log_phi) {
        let f = lp.exp();
        theta.push(*t);
        phi.push(f);
        dphi.push(ps * f);
    }
    Ok(Profile {
        theta,
        phi,
        dphi,
        lambda: traj.lambda,
        alpha: traj.alpha_star,
    })
}

/// Grid spacing for a cone of half-aperture `alpha`: [`PROFILE_SPACING`],
/// refined for narrow cones so the residual always sees a few hundred nodes.
pub fn spacing_for(alpha: f64) -> f64 {
    PROFILE_SPACING.min(alpha / 4000.0)
}

/// Shoots on a uniform grid of the given spacing and rebuilds the profile.
pub fn profile_for(lambda: f64, p: f64, n: u32, tol: &Tolerances, spacing: f64) -> Result<Profile> {
    let traj = integrate_psi_with(lambda, p, n, tol, &ShootOptions::uniform(spacing))?;
    reconstruct_phi(&traj)
}

/// Relative residual of the second-order (divergence form) angular equation
///
/// `d/dtheta [G^{(p-2)/2} phi' sin^{n-2}] + l(l(p-1)+n-p) G^{(p-2)/2} phi sin^{n-2} = 0`,
/// `G = l^2 phi^2 + phi'^2`.
///
/// The flux is differentiated with the three-point formula for uneven
/// spacing. The maximum pointwise residual over interior nodes is divided by
/// the largest magnitude of either term. Nodes within two full cells of the
/// zero of `phi` are skipped: the blow-up tail is resolved by steps far
/// shorter than the grid spacing, and differencing there only measures
/// integrator noise.
pub fn second_order_residual(prof: &Profile, p: f64, n: u32) -> Result<f64> {
    let len = prof.theta.len();
    let last = last_residual_node(prof);
    let interior = (last + 1).saturating_sub(FIRST_RESIDUAL_NODE);
    if interior < MIN_INTERIOR_NODES {
        return Err(Error::GridTooCoarse {
            interior,
            required: MIN_INTERIOR_NODES,
        });
    }
    let nf = f64::from(n);
    let l = prof.lambda;
    let coef = l * (l * (p - 1.0) + (nf - p));
    let weight = |i: usize| {
        let g = l * l * prof.phi[i] * prof.phi[i] + prof.dphi[i] * prof.dphi[i];
        g.powf(0.5 * (p - 2.0)) * prof.theta[i].sin().powi(n as i32 - 2)
    };
    let flux: Vec<f64> = (0..len).map(|i| weight(i) * prof.dphi[i]).collect();

    let mut max_res: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in FIRST_RESIDUAL_NODE..=last {
        let (x0, x1, x2) = (prof.theta[i - 1], prof.theta[i], prof.theta[i + 1]);
        let (h1, h2) = (x1 - x0, x2 - x1);
        let d = -h2 / (h1 * (h1 + h2)) * flux[i - 1]
            + (h2 - h1) / (h1 * h2) * flux[i]
            + h1 / (h2 * (h1 + h2)) * flux[i + 1];
        let z = coef * weight(i) * prof.phi[i];
        max_res = max_res.max((d + z).abs());
        scale = scale.max(d.abs()).max(z.abs());
    }
    if scale == 0.0 {
        return Ok(max_res);
    }
    Ok(max_res / scale)
}

/// The axis and series-start nodes carry boundary data, not grid values.
const FIRST_RESIDUAL_NODE: usize = 2;

/// Last node index entering the residual.
fn last_residual_node(prof: &Profile) -> usize {
    let len = prof.theta.len();
    if len < 3 {
        return 0;
    }
    let cell = prof
        .theta
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    let cutoff = prof.alpha - 2.0 * cell;
    let k = prof.theta.partition_point(|t| *t <= cutoff);
    k.saturating_sub(1).min(len - 2)
}

impl Profile {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Monotone cubic Hermite interpolant of `phi`. Past the last node the
    /// profile is continued linearly to zero at `alpha`.
    pub fn phi_at(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) {
            return Err(Error::Domain(format!("theta must be >= 0 (got {theta})")));
        }
        if theta == self.alpha {
            return Ok(0.0);
        }
        if theta > self.alpha {
            return Err(Error::OutOfCone {
                theta,
                alpha: self.alpha,
            });
        }
        let last = self.theta.len() - 1;
        let t_last = self.theta[last];
        if theta >= t_last {
            let gap = self.alpha - t_last;
            if gap <= 0.0 {
                return Ok(self.phi[last]);
            }
            return Ok(self.phi[last] * (self.alpha - theta) / gap);
        }
        let i = match self.theta.partition_point(|t| *t <= theta) {
            0 => 0,
            k => k - 1,
        };
        let (x0, x1) = (self.theta[i], self.theta[i + 1]);
        let (y0, y1) = (self.phi[i], self.phi[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = monotone_slopes(h, y0, y1, self.dphi[i], self.dphi[i + 1]);
        let s = (theta - x0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        Ok((2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * m1)
    }
}

/// Fritsch-Carlson limiter applied to the exact end slopes of one interval.
fn monotone_slopes(h: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> (f64, f64) {
    let delta = (y1 - y0) / h;
    if delta == 0.0 {
        return (0.0, 0.0);
    }
    let a = m0 / delta;
    let b = m1 / delta;
    let (a, b) = (a.max(0.0), b.max(0.0));
    let r2 = a * a + b * b;
    if r2 > 9.0 {
        let tau = 3.0 / r2.sqrt();
        (tau * a * delta, tau * b * delta)
    } else {
        (a * delta, b * delta)
    }
}

/// `u(r, theta) = r^lambda phi(theta)`.
pub fn eval_u(prof: &Profile, r: f64, theta: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("r must be positive (got {r})")));
    }
    Ok(r.powf(prof.lambda) * prof.phi_at(theta)?)
}
