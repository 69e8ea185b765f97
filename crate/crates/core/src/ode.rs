//! Dormand-Prince 5(4) embedded pair with a PI step-size controller.
//!
//! Only the single-step kernel and the controller live here; the drivers in
//! `shooting` own the loop because each of them has its own stopping and
//! variable-switching logic.

// Butcher tableau (Hairer, Norsett, Wanner).
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Error coefficients: 5th order weights minus embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub(crate) struct Step<const N: usize> {
    pub y: [f64; N],
    /// RHS at the new point (first stage of the next step).
    pub k_end: [f64; N],
    /// Scaled RMS error; the step is acceptable when `err <= 1`.
    pub err: f64,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand-Prince step from `(t, y)` with size `h`; `k1 = f(t, y)`.
pub(crate) fn dopri_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
) -> Step<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y_new);

    let mut sum = 0.0;
    for i in 0..N {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
        sum += (e / scale).powi(2);
    }
    let err = (sum / N as f64).sqrt();
    Step {
        y: y_new,
        k_end: k7,
        err: if err.is_finite() { err } else { f64::INFINITY },
    }
}

/// PI controller (Gustafsson) tuned for a 5th order method.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PiController {
    err_old: f64,
}

impl PiController {
    const SAFETY: f64 = 0.9;
    const ALPHA: f64 = 0.7 / 5.0;
    const BETA: f64 = 0.4 / 5.0;
    const MIN_FACTOR: f64 = 0.2;
    const MAX_FACTOR: f64 = 5.0;

    pub fn new() -> Self {
        PiController { err_old: 1e-4 }
    }

    /// Factor for the next step after an accepted step with error `err`.
    pub fn accept(&mut self, err: f64) -> f64 {
        let err = err.max(1e-10);
        let fac = Self::SAFETY * err.powf(-Self::ALPHA) * self.err_old.powf(Self::BETA);
        self.err_old = err;
        fac.clamp(Self::MIN_FACTOR, Self::MAX_FACTOR)
    }

    /// Factor for retrying after a rejected step.
    pub fn reject(&self, err: f64) -> f64 {
        if !err.is_finite() {
            return 0.1;
        }
        (Self::SAFETY * err.powf(-1.0 / 5.0)).clamp(0.1, 0.9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate<F: Fn(f64, &[f64; 1]) -> [f64; 1]>(f: F, y0: f64, t_end: f64, tol: f64) -> f64 {
        let mut t = 0.0;
        let mut y = [y0];
        let mut k = f(t, &y);
        let mut h: f64 = 1e-3;
        let mut ctl = PiController::new();
        while t < t_end {
            h = h.min(t_end - t);
            let s = dopri_step(&f, t, &y, &k, h, tol, tol * 1e-2);
            if s.err <= 1.0 {
                t += h;
                y = s.y;
                k = s.k_end;
                h *= ctl.accept(s.err);
            } else {
                h *= ctl.reject(s.err);
            }
        }
        y[0]
    }

    #[test]
    fn exponential_decay_to_tolerance() {
        let y = integrate(|_, y| [-y[0]], 1.0, 5.0, 1e-10);
        assert!((y - (-5.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn fifth_order_on_polynomial() {
        // y' = 5 t^4 is integrated exactly by a 5th order method.
        let f = |t: f64, _: &[f64; 1]| [5.0 * t.powi(4)];
        let s = dopri_step(&f, 0.0, &[0.0], &[0.0], 1.0, 1e-8, 1e-8);
        assert!((s.y[0] - 1.0).abs() < 1e-14);
    }
}
