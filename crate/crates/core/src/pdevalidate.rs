//! Independent check of a computed exponent at the PDE level.
//!
//! By rotational symmetry the n-dimensional energy `int |grad u|^p / p` of an
//! axisymmetric function reduces to the meridian half-plane with the weight
//! `r^{n-1} sin^{n-2}(theta)`. The discrete energy of continuous piecewise
//! linear functions on a triangulated `(r, theta)` rectangle is minimized with
//! the Dirichlet data `r^lambda phi(theta)` on the three outer edges; the
//! axis edge is free, which is the natural symmetry condition. If `lambda`
//! and `phi` are right, the minimizer reproduces `r^lambda phi` inside.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel::{self, Execution};
use crate::profile::{eval_u, Profile};

/// Gap kept below the cone boundary, where `phi` vanishes.
pub const COLLAR: f64 = 0.05;
/// Smallest number of cells per direction.
pub const MIN_CELLS: usize = 16;
/// Required drop of the gradient norm.
pub const GRADIENT_DROP: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 100_000;
const STALL_ITERATIONS: usize = 200;

/// Uniform `nr x ntheta` cell grid on `[r_min, r_max] x [0, alpha_cap]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeridianGrid {
    pub r_range: (f64, f64),
    pub theta_range: (f64, f64),
    pub nr: usize,
    pub ntheta: usize,
    /// `r^{n-1} sin^{n-2}(theta)` at each cell centre, indexed
    /// `i * ntheta + j` with `i` along `r`.
    pub weight: Vec<f64>,
    pub n: u32,
}

impl MeridianGrid {
    pub fn new(r_range: (f64, f64), alpha_cap: f64, nr: usize, ntheta: usize, n: u32) -> Result<Self> {
        let (r_min, r_max) = r_range;
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::Domain(format!(
                "need 0 < r_min < r_max (got {r_min}, {r_max})"
            )));
        }
        if !(alpha_cap > 0.0 && alpha_cap <= PI - 0.1) {
            return Err(Error::Domain(format!(
                "alpha_cap must lie in (0, pi - 0.1] (got {alpha_cap})"
            )));
        }
        if nr < MIN_CELLS || ntheta < MIN_CELLS {
            return Err(Error::Domain(format!(
                "need at least {MIN_CELLS} cells per direction (got {nr} x {ntheta})"
            )));
        }
        if n < 2 {
            return Err(Error::Domain(format!("n must satisfy n >= 2 (got {n})")));
        }
        let dr = (r_max - r_min) / nr as f64;
        let dt = alpha_cap / ntheta as f64;
        let mut weight = Vec::with_capacity(nr * ntheta);
        for i in 0..nr {
            for j in 0..ntheta {
                let r = r_min + (i as f64 + 0.5) * dr;
                let t = (j as f64 + 0.5) * dt;
                weight.push(radial_weight(r, n) * angular_weight(t, n));
            }
        }
        Ok(MeridianGrid {
            r_range,
            theta_range: (0.0, alpha_cap),
            nr,
            ntheta,
            weight,
            n,
        })
    }

    /// `[1, 2] x [0, alpha - COLLAR]` (capped at `pi - 0.1`) with `cells`
    /// cells per direction.
    pub fn for_cone(alpha: f64, cells: usize, n: u32) -> Result<Self> {
        MeridianGrid::new((1.0, 2.0), (alpha - COLLAR).min(PI - 0.1), cells, cells, n)
    }

    fn dr(&self) -> f64 {
        (self.r_range.1 - self.r_range.0) / self.nr as f64
    }

    fn dtheta(&self) -> f64 {
        self.theta_range.1 / self.ntheta as f64
    }

    fn r(&self, i: usize) -> f64 {
        self.r_range.0 + i as f64 * self.dr()
    }

    fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    fn node(&self, i: usize, j: usize) -> usize {
        i * (self.ntheta + 1) + j
    }

    fn nodes(&self) -> usize {
        (self.nr + 1) * (self.ntheta + 1)
    }

    /// Nodes carrying unknowns: everything but the two arcs and the outer ray.
    fn is_free(&self, i: usize, j: usize) -> bool {
        i > 0 && i < self.nr && j < self.ntheta
    }
}

fn radial_weight(r: f64, n: u32) -> f64 {
    r.powi(n as i32 - 1)
}

fn angular_weight(t: f64, n: u32) -> f64 {
    t.sin().powi(n as i32 - 2)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// Max over free nodes of `|u - r^lambda phi| / (r^lambda phi + 1e-12)`.
    pub max_rel_deviation: f64,
    /// Max over free nodes of `|u - r^lambda phi|`.
    pub max_abs_deviation: f64,
    pub energy: f64,
    pub initial_energy: f64,
    pub iterations: usize,
    /// Final over initial gradient norm.
    pub gradient_ratio: f64,
    pub grid: MeridianGrid,
}

/// Minimizes the energy with boundary data `r^lambda phi(theta)` from `prof`
/// and compares the minimizer with the same function inside.
pub fn minimize_energy(grid: &MeridianGrid, lambda: f64, prof: &Profile, p: f64, n: u32) -> Result<ValidationReport> {
    minimize_energy_with(grid, lambda, prof, p, n, Execution::default())
}

pub fn minimize_energy_with(
    grid: &MeridianGrid,
    lambda: f64,
    prof: &Profile,
    p: f64,
    n: u32,
    exec: Execution,
) -> Result<ValidationReport> {
    if n != grid.n {
        return Err(Error::Domain(format!("grid built for n={} but n={n}", grid.n)));
    }
    if (prof.lambda - lambda).abs() > 1e-12 * lambda.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "profile belongs to lambda={} but lambda={lambda}",
            prof.lambda
        )));
    }
    if grid.theta_range.1 >= prof.alpha {
        return Err(Error::OutOfCone {
            theta: grid.theta_range.1,
            alpha: prof.alpha,
        });
    }
    let target = |r: f64, t: f64| eval_u(prof, r, t);
    validate_against(grid, p, target, exec)
}

/// Core of [`minimize_energy`] for arbitrary Dirichlet data `target`.
pub(crate) fn validate_against<F>(grid: &MeridianGrid, p: f64, target: F, exec: Execution) -> Result<ValidationReport>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must satisfy p > 1 (got {p})")));
    }
    let mut exact = vec![0.0; grid.nodes()];
    for i in 0..=grid.nr {
        for j in 0..=grid.ntheta {
            exact[grid.node(i, j)] = target(grid.r(i), grid.theta(j))?;
        }
    }
    let u0 = initial_guess(grid, &exact);
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let energy = Energy::new(grid, p, 1e-10 * scale, exec);
    let run = energy.minimize(u0)?;

    let (mut rel, mut abs) = (0.0f64, 0.0f64);
    for i in 0..=grid.nr {
        for j in 0..=grid.ntheta {
            if grid.is_free(i, j) {
                let k = grid.node(i, j);
                let d = (run.u[k] - exact[k]).abs();
                abs = abs.max(d);
                rel = rel.max(d / (exact[k].abs() + 1e-12));
            }
        }
    }
    Ok(ValidationReport {
        max_rel_deviation: rel,
        max_abs_deviation: abs,
        energy: *run.energies.last().unwrap(),
        initial_energy: run.energies[0],
        iterations: run.iterations,
        gradient_ratio: run.gradient_ratio,
        grid: grid.clone(),
    })
}

/// Boundary values everywhere on the boundary; free nodes interpolate
/// linearly in `r` between the two arcs at the same angle.
fn initial_guess(grid: &MeridianGrid, exact: &[f64]) -> Vec<f64> {
    let mut u = exact.to_vec();
    for i in 1..grid.nr {
        let s = i as f64 / grid.nr as f64;
        for j in 0..grid.ntheta {
            let inner = exact[grid.node(0, j)];
            let outer = exact[grid.node(grid.nr, j)];
            u[grid.node(i, j)] = (1.0 - s) * inner + s * outer;
        }
    }
    u
}

/// Outcome of a minimization.
pub(crate) struct Minimum {
    pub u: Vec<f64>,
    /// Energy after every accepted step, starting with the initial value.
    pub energies: Vec<f64>,
    pub iterations: usize,
    pub gradient_ratio: f64,
}

/// `sum_T area_T w_T (|grad u|^2 + eps^2)^{p/2} / p` over the two triangles
/// `(a, b, d)` and `(a, d, c)` of every cell, where `a = (i, j)`,
/// `b = (i+1, j)`, `c = (i, j+1)`, `d = (i+1, j+1)`.
pub(crate) struct Energy<'g> {
    grid: &'g MeridianGrid,
    p: f64,
    eps2: f64,
    exec: Execution,
    cells: Vec<usize>,
    /// Per cell: weight and `1/r^2` at the centroids of the two triangles.
    geometry: Vec<[f64; 4]>,
}

/// Per-cell contributions to the four corner nodes `a, b, c, d`.
type Corners = [f64; 4];

impl<'g> Energy<'g> {
    pub fn new(grid: &'g MeridianGrid, p: f64, eps: f64, exec: Execution) -> Self {
        let (dr, dt) = (grid.dr(), grid.dtheta());
        let n = grid.n;
        let cells: Vec<usize> = (0..grid.nr * grid.ntheta).collect();
        let geometry = cells
            .iter()
            .map(|&c| {
                let (i, j) = (c / grid.ntheta, c % grid.ntheta);
                let (r0, t0) = (grid.r(i), grid.theta(j));
                let (r1, t1) = (r0 + 2.0 * dr / 3.0, t0 + dt / 3.0);
                let (r2, t2) = (r0 + dr / 3.0, t0 + 2.0 * dt / 3.0);
                [
                    radial_weight(r1, n) * angular_weight(t1, n),
                    1.0 / (r1 * r1),
                    radial_weight(r2, n) * angular_weight(t2, n),
                    1.0 / (r2 * r2),
                ]
            })
            .collect();
        Energy {
            grid,
            p,
            eps2: eps * eps,
            exec,
            cells,
            geometry,
        }
    }

    fn corners(&self, c: usize) -> [usize; 4] {
        let g = self.grid;
        let (i, j) = (c / g.ntheta, c % g.ntheta);
        [g.node(i, j), g.node(i + 1, j), g.node(i, j + 1), g.node(i + 1, j + 1)]
    }

    /// Gradient components `(u_r, u_theta)` of the two triangles.
    fn slopes(&self, u: &[f64], c: usize) -> [(f64, f64); 2] {
        let [a, b, cc, d] = self.corners(c);
        let (dr, dt) = (self.grid.dr(), self.grid.dtheta());
        [
            ((u[b] - u[a]) / dr, (u[d] - u[b]) / dt),
            ((u[d] - u[cc]) / dr, (u[cc] - u[a]) / dt),
        ]
    }

    fn area(&self) -> f64 {
        0.5 * self.grid.dr() * self.grid.dtheta()
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let half_p = 0.5 * self.p;
        let area = self.area();
        let per_cell = |k: usize| {
            let c = self.cells[k];
            let g = &self.geometry[c];
            let [(r1, t1), (r2, t2)] = self.slopes(u, c);
            let s1 = r1 * r1 + t1 * t1 * g[1] + self.eps2;
            let s2 = r2 * r2 + t2 * t2 * g[3] + self.eps2;
            area * (g[0] * s1.powf(half_p) + g[2] * s2.powf(half_p)) / self.p
        };
        parallel::sum_indexed(self.cells.len(), self.exec, per_cell)
    }

    /// Gradient and Hessian diagonal at the corners of one cell.
    fn cell_terms(&self, u: &[f64], c: usize) -> (Corners, Corners) {
        let g = &self.geometry[c];
        let (dr, dt) = (self.grid.dr(), self.grid.dtheta());
        let area = self.area();
        let [(r1, t1), (r2, t2)] = self.slopes(u, c);
        let mut grad = [0.0; 4];
        let mut diag = [0.0; 4];
        // (triangle slopes, weight, 1/r^2, [(corner, d u_r, d u_theta); 3])
        let tris = [
            ((r1, t1), g[0], g[1], [(0, -1.0 / dr, 0.0), (1, 1.0 / dr, -1.0 / dt), (3, 0.0, 1.0 / dt)]),
            ((r2, t2), g[2], g[3], [(0, 0.0, -1.0 / dt), (2, -1.0 / dr, 1.0 / dt), (3, 1.0 / dr, 0.0)]),
        ];
        for ((ur, ut), w, inv_r2, stencil) in tris {
            let s = ur * ur + ut * ut * inv_r2 + self.eps2;
            let f1 = area * w * s.powf(0.5 * self.p - 1.0);
            let f2 = area * w * (self.p - 2.0) * s.powf(0.5 * self.p - 2.0);
            for (corner, dur, dut) in stencil {
                let dot = ur * dur + ut * dut * inv_r2;
                let norm2 = dur * dur + dut * dut * inv_r2;
                grad[corner] += f1 * dot;
                diag[corner] += f1 * norm2 + f2 * dot * dot;
            }
        }
        (grad, diag)
    }

    /// Gradient with respect to the free nodes (zero on fixed ones), and the
    /// Hessian diagonal. Each node gathers from its cells in a fixed order,
    /// so the result does not depend on scheduling.
    fn gradient(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let per_cell = parallel::map(&self.cells, self.exec, |&c| self.cell_terms(u, c));
        let g = self.grid;
        let nodes: Vec<usize> = (0..g.nodes()).collect();
        let gathered = parallel::map(&nodes, self.exec, |&k| {
            let (i, j) = (k / (g.ntheta + 1), k % (g.ntheta + 1));
            if !g.is_free(i, j) {
                return (0.0, 1.0);
            }
            let mut acc = (0.0, 0.0);
            // (cell i offset, cell j offset, corner index within that cell)
            for (di, dj, corner) in [(1, 1, 3), (0, 1, 2), (1, 0, 1), (0, 0, 0)] {
                if i < di || j < dj {
                    continue;
                }
                let (ci, cj) = (i - di, j - dj);
                if ci >= g.nr || cj >= g.ntheta {
                    continue;
                }
                let (gr, dg) = &per_cell[ci * g.ntheta + cj];
                acc.0 += gr[corner];
                acc.1 += dg[corner];
            }
            acc
        });
        gathered.into_iter().unzip()
    }

    /// Jacobi-preconditioned Polak-Ribiere+ conjugate gradients with a
    /// bracketing secant line search on the directional derivative.
    pub fn minimize(&self, mut u: Vec<f64>) -> Result<Minimum> {
        let len = u.len();
        let mut energies = vec![self.value(&u)];
        let (mut g, diag) = self.gradient(&u);
        let g0 = norm(&g);
        if g0 == 0.0 {
            return Ok(Minimum {
                u,
                energies,
                iterations: 0,
                gradient_ratio: 0.0,
            });
        }
        let precond = |g: &[f64], diag: &[f64]| -> Vec<f64> {
            g.iter()
                .zip(diag)
                .map(|(g, d)| if *d > 0.0 { g / d } else { *g })
                .collect()
        };
        let mut z = precond(&g, &diag);
        let mut dir: Vec<f64> = z.iter().map(|v| -v).collect();
        let mut gz = dot(&g, &z);
        let mut step = 1.0;
        let mut ratio = 1.0;
        // Stop well below the required drop so the deviation is not
        // polluted by the optimizer.
        let target = 1e-2 * GRADIENT_DROP;
        // Rounding eventually caps the attainable drop; stop once progress
        // stalls past the required level.
        let (mut best, mut best_at) = (1.0f64, 0usize);

        for it in 1..=MAX_ITERATIONS {
            let mut slope0 = dot(&g, &dir);
            if slope0 >= 0.0 {
                // Lost descent: restart along the preconditioned gradient.
                dir = z.iter().map(|v| -v).collect();
                slope0 = -gz;
            }
            let Some((t, u_new, g_new, diag_new)) = self.line_search(&u, &dir, slope0, step) else {
                // No decrease representable in f64: the minimum is reached
                // to working precision.
                return finish(u, energies, it - 1, ratio);
            };
            step = t;
            u = u_new;
            energies.push(self.value(&u));
            ratio = norm(&g_new) / g0;
            if ratio <= target {
                return finish(u, energies, it, ratio);
            }
            if ratio < 0.5 * best {
                best = ratio;
                best_at = it;
            } else if best <= GRADIENT_DROP && it - best_at > STALL_ITERATIONS {
                return finish(u, energies, it, ratio.min(best));
            }
            let z_new = precond(&g_new, &diag_new);
            let gz_new = dot(&g_new, &z_new);
            let mut cross = 0.0;
            for k in 0..len {
                cross += g[k] * z_new[k];
            }
            let beta = ((gz_new - cross) / gz).max(0.0);
            for k in 0..len {
                dir[k] = -z_new[k] + beta * dir[k];
            }
            g = g_new;
            z = z_new;
            gz = gz_new;
        }
        if ratio <= GRADIENT_DROP {
            return finish(u, energies, MAX_ITERATIONS, ratio);
        }
        Err(Error::NonConvergence {
            iterations: MAX_ITERATIONS,
            ratio,
        })
    }

    /// Finds `t > 0` with `-0.1 |phi'(0)| <= phi'(t) <= 0` for
    /// `phi(t) = E(u + t dir)`. Since `phi` is convex,
    /// `phi(t) <= phi(0) + t phi'(t)`, so any accepted step provably does not
    /// raise the energy, even once the decrease is below the rounding level
    /// of `E` itself. Returns `None` when no such step exists in `f64`.
    #[allow(clippy::type_complexity)]
    fn line_search(
        &self,
        u: &[f64],
        dir: &[f64],
        slope0: f64,
        guess: f64,
    ) -> Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> {
        let probe = |t: f64| {
            let x: Vec<f64> = u.iter().zip(dir).map(|(a, d)| a + t * d).collect();
            let (g, diag) = self.gradient(&x);
            let s = dot(&g, dir);
            (x, g, diag, s)
        };
        let accept = |s: f64| s <= 0.0 && s >= 0.1 * slope0;
        // Best point known to lie left of the minimizer.
        let mut lo = (0.0, slope0, None);
        let mut hi = guess;
        let mut cur = probe(hi);
        let mut expansions = 0;
        while cur.3 < 0.0 && !accept(cur.3) && expansions < 60 {
            lo = (hi, cur.3, Some(cur));
            hi *= 2.0;
            cur = probe(hi);
            expansions += 1;
        }
        if accept(cur.3) {
            return Some((hi, cur.0, cur.1, cur.2));
        }
        if cur.3 < 0.0 {
            // Still descending after all expansions: take the last point.
            return Some((hi, cur.0, cur.1, cur.2));
        }
        let mut slope_hi = cur.3;
        for _ in 0..60 {
            let (t_lo, s_lo) = (lo.0, lo.1);
            // Secant on phi', kept away from the bracket ends.
            let width = hi - t_lo;
            let mut t = t_lo - s_lo * width / (slope_hi - s_lo);
            if !(t > t_lo + 0.01 * width && t < hi - 0.01 * width) {
                t = t_lo + 0.5 * width;
            }
            if t <= t_lo || t >= hi {
                break;
            }
            let next = probe(t);
            if accept(next.3) {
                return Some((t, next.0, next.1, next.2));
            }
            if next.3 < 0.0 {
                lo = (t, next.3, Some(next));
            } else {
                hi = t;
                slope_hi = next.3;
            }
        }
        let (t, _, point) = lo;
        point.map(|(x, g, diag, _)| (t, x, g, diag))
    }
}

fn finish(u: Vec<f64>, energies: Vec<f64>, iterations: usize, ratio: f64) -> Result<Minimum> {
    if ratio > GRADIENT_DROP && iterations >= MAX_ITERATIONS {
        return Err(Error::NonConvergence { iterations, ratio });
    }
    Ok(Minimum {
        u,
        energies,
        iterations,
        gradient_ratio: ratio,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
