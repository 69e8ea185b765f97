//! Problem statement shared by every solver stage: the exponent `p`, the
//! ambient dimension `n`, the half-aperture `alpha` of the cone and the
//! solution branch.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible `p`. Below this the angular ODE degenerates in `f64`.
pub const P_MIN: f64 = 1.0 + 1e-6;
/// Largest admissible `p`.
pub const P_MAX: f64 = 1e3;
/// Bound on `|lambda|` accepted by the shooting integrator.
pub const LAMBDA_CAP: f64 = 1e6;

/// Which homogeneous solution is sought.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `lambda > 0`: vanishes on the whole boundary, grows at infinity.
    Fundamental,
    /// `lambda < 0`: vanishes on the boundary away from the vertex, decays at
    /// infinity.
    Exterior,
}

impl Branch {
    /// `+1.0` for the fundamental branch, `-1.0` for the exterior one.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Fundamental => 1.0,
            Branch::Exterior => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Fundamental => "fundamental",
            Branch::Exterior => "exterior",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fundamental" | "f" | "1" | "lambda1" => Ok(Branch::Fundamental),
            "exterior" | "e" | "2" | "lambda2" => Ok(Branch::Exterior),
            other => Err(Error::Domain(format!("unknown branch '{other}'"))),
        }
    }
}

/// A validated `(p, n, alpha, branch)` quadruple.
///
/// Fields are private so that every value reaching the solvers went through
/// [`ConeProblem::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeProblem {
    p: f64,
    n: u32,
    alpha: f64,
    branch: Branch,
}

impl ConeProblem {
    pub fn new(p: f64, n: u32, alpha: f64, branch: Branch) -> Result<Self> {
        ConeProblem { p, n, alpha, branch }.validate()
    }

    /// Checks every invariant and returns the problem unchanged.
    pub fn validate(self) -> Result<Self> {
        let ConeProblem { p, n, alpha, branch } = self;
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::Domain(format!("p must satisfy p > 1 (got {p})")));
        }
        if !(P_MIN..=P_MAX).contains(&p) {
            return Err(Error::Domain(format!(
                "p must lie in [{P_MIN}, {P_MAX}] (got {p})"
            )));
        }
        if n < 2 {
            return Err(Error::Domain(format!("n must satisfy n >= 2 (got {n})")));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Domain(format!(
                "alpha must satisfy alpha > 0 (got {alpha})"
            )));
        }
        if alpha > PI {
            return Err(Error::Domain(format!(
                "alpha must satisfy alpha <= pi (got {alpha})"
            )));
        }
        if alpha == PI && p <= f64::from(n) - 1.0 {
            return Err(Error::Domain(format!(
                "alpha=pi requires p > n-1 for {branch} branch (p={p}, n={n})"
            )));
        }
        Ok(self)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// True when the cone is the complement of a ray.
    pub fn is_slit(&self) -> bool {
        self.alpha == PI
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        ConeProblem { alpha, ..*self }.validate()
    }
}

/// Numerical tolerances for the shooting and root-finding stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Absolute tolerance on `lambda`.
    pub lambda_tol: f64,
    /// Absolute tolerance on the blow-up angle (radians).
    pub alpha_tol: f64,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    /// `|psi|` at which the trajectory is declared blown up.
    pub psi_blowup_threshold: f64,
    /// Angle at which integration starts from the series solution.
    pub theta_start: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lambda_tol: 1e-10,
            alpha_tol: 1e-9,
            ode_rel_tol: 1e-10,
            ode_abs_tol: 1e-12,
            psi_blowup_threshold: 1e8,
            theta_start: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn validate(self) -> Result<Self> {
        let named = [
            ("lambda_tol", self.lambda_tol),
            ("alpha_tol", self.alpha_tol),
            ("ode_rel_tol", self.ode_rel_tol),
            ("ode_abs_tol", self.ode_abs_tol),
            ("psi_blowup_threshold", self.psi_blowup_threshold),
            ("theta_start", self.theta_start),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive (got {v})")));
            }
        }
        if self.theta_start > 1e-3 {
            return Err(Error::Domain(format!(
                "theta_start must not exceed 1e-3 (got {})",
                self.theta_start
            )));
        }
        if self.psi_blowup_threshold < 1e6 {
            return Err(Error::Domain(format!(
                "psi_blowup_threshold must be at least 1e6 (got {})",
                self.psi_blowup_threshold
            )));
        }
        Ok(self)
    }

    /// Every tolerance divided by `factor`; the blow-up threshold is left alone.
    pub fn tightened(&self, factor: f64) -> Self {
        Tolerances {
            lambda_tol: self.lambda_tol / factor,
            alpha_tol: self.alpha_tol / factor,
            ode_rel_tol: self.ode_rel_tol / factor,
            ode_abs_tol: self.ode_abs_tol / factor,
            ..*self
        }
    }
}
