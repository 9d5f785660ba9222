//! Dormand–Prince 5(4) integration for autonomous fields with a switching
//! function.
//!
//! Steps never straddle a sign change of the switching function: when an
//! accepted step changes sign, the step is shortened by bisection until the
//! endpoint lies within `event_tol` of the manifold, on the far side.

use crate::error::{Error, Result};

/// An autonomous vector field, optionally with a switching function whose
/// zero set splits phase space into smooth pieces.
pub trait Field<const D: usize> {
    fn rhs(&self, y: &[f64; D]) -> [f64; D];

    fn switching(&self, _y: &[f64; D]) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    /// Target |H| when an event is localized.
    pub event_tol: f64,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-3,
            h_max: 1.0,
            h_min: 1e-14,
            event_tol: 1e-12,
        }
    }
}

/// One accepted step. `crossing` is `+1` when the step ends inside `H > 0`
/// having started outside it, `-1` for the opposite direction.
#[derive(Debug, Clone, Copy)]
pub struct Step<const D: usize> {
    pub t0: f64,
    pub y0: [f64; D],
    pub t1: f64,
    pub y1: [f64; D],
    pub crossing: Option<i8>,
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates a [`Field`] forward in time, or backward when `reverse` is set
/// (times then decrease from `t0`).
pub struct Stepper<'a, F: Field<D>, const D: usize> {
    field: &'a F,
    sign: f64,
    opts: OdeOptions,
    t: f64,
    y: [f64; D],
    f: [f64; D],
    h: f64,
    last_h_rate: Option<f64>,
    steps: usize,
}

impl<'a, F: Field<D>, const D: usize> Stepper<'a, F, D> {
    pub fn new(field: &'a F, t0: f64, y0: [f64; D], opts: OdeOptions, reverse: bool) -> Self {
        let sign = if reverse { -1.0 } else { 1.0 };
        let mut s = Self {
            field,
            sign,
            opts,
            t: t0,
            y: y0,
            f: [0.0; D],
            h: opts.h_init.min(opts.h_max),
            last_h_rate: None,
            steps: 0,
        };
        s.f = s.eval(&y0);
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; D] {
        self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_reverse(&self) -> bool {
        self.sign < 0.0
    }

    fn eval(&self, y: &[f64; D]) -> [f64; D] {
        let mut f = self.field.rhs(y);
        if self.sign < 0.0 {
            for v in f.iter_mut() {
                *v = -*v;
            }
        }
        f
    }

    /// One Dormand–Prince step of length `h` from `(y, f)`. Returns the new
    /// state, its derivative and the scaled error norm.
    fn dp(&self, y: &[f64; D], k1: &[f64; D], h: f64) -> ([f64; D], [f64; D], f64) {
        let k2 = self.eval(&axpy(y, h, &[(A21, k1)]));
        let k3 = self.eval(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = self.eval(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = self.eval(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = self.eval(&axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = self.eval(&y_new);
        let mut err = 0.0f64;
        for i in 0..D {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !y_new.iter().all(|v| v.is_finite()) {
            err = f64::INFINITY;
        }
        (y_new, k7, err)
    }

    /// State reached from the start of `step` after integration time `theta`.
    pub fn state_within(&self, step: &Step<D>, theta: f64) -> [f64; D] {
        let k1 = self.eval(&step.y0);
        self.dp(&step.y0, &k1, theta).0
    }

    /// Localizes a sign change of `g` inside `step` by bisection on the
    /// sub-step length. Returns the time and state at the end of the bracket
    /// on the far side of the change.
    pub fn locate<G: Fn(&[f64; D]) -> f64>(&self, step: &Step<D>, g: G, g_tol: f64) -> (f64, [f64; D]) {
        let k1 = self.eval(&step.y0);
        let g0 = g(&step.y0);
        let h = (step.t1 - step.t0).abs();
        let (mut lo, mut hi) = (0.0, h);
        let mut y_hi = step.y1;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let ym = self.dp(&step.y0, &k1, mid).0;
            let gm = g(&ym);
            if (gm > 0.0) == (g0 > 0.0) {
                lo = mid;
            } else {
                hi = mid;
                y_hi = ym;
                if gm.abs() < g_tol {
                    break;
                }
            }
            if hi - lo <= 4.0 * f64::EPSILON * (step.t0.abs() + h) {
                break;
            }
        }
        (step.t0 + self.sign * hi, y_hi)
    }

    /// Takes one accepted step, never passing `t_stop` (in the direction of
    /// integration) when given.
    pub fn step(&mut self, t_stop: Option<f64>) -> Result<Step<D>> {
        let mut h = self.h;
        loop {
            h = h.min(self.opts.h_max);
            if let Some(rate) = self.last_h_rate {
                h = h.min(rate.max(1e-4));
            }
            let mut hit_stop = false;
            if let Some(ts) = t_stop {
                let remaining = (ts - self.t) * self.sign;
                if remaining <= h {
                    h = remaining;
                    hit_stop = true;
                }
            }
            if h < self.opts.h_min {
                if hit_stop && h > 0.0 {
                    // tiny remainder: take it with a single Euler step
                    let y1 = axpy(&self.y, h, &[(1.0, &self.f)]);
                    return Ok(self.accept(h, y1, None, None));
                }
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }
            let (y1, f1, err) = self.dp(&self.y, &self.f, h);
            if err > 1.0 {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };

            let h0 = self.field.switching(&self.y);
            let h1 = self.field.switching(&y1);
            if let (Some(a), Some(b)) = (h0, h1) {
                if (a > 0.0) != (b > 0.0) {
                    let trial = Step {
                        t0: self.t,
                        y0: self.y,
                        t1: self.t + self.sign * h,
                        y1,
                        crossing: None,
                    };
                    let field = self.field;
                    let (tc, yc) = self.locate(&trial, |y| field.switching(y).unwrap_or(0.0), self.opts.event_tol);
                    let theta = (tc - self.t).abs();
                    let (_, _, sub_err) = self.dp(&self.y, &self.f, theta);
                    if sub_err > 1.0 && theta > self.opts.h_min {
                        h = 0.5 * theta;
                        continue;
                    }
                    let dir = if b > 0.0 { 1 } else { -1 };
                    let out = self.accept(theta, yc, None, Some(dir));
                    self.h = h;
                    self.last_h_rate = None;
                    return Ok(out);
                }
                let rate = (b - a).abs() / h;
                self.last_h_rate = if rate > 0.0 && (b.abs() < a.abs()) {
                    Some(b.abs() / rate)
                } else {
                    None
                };
            }
            let out = self.accept(h, y1, Some(f1), None);
            if !hit_stop {
                self.h = h * factor;
            }
            return Ok(out);
        }
    }

    fn accept(&mut self, h: f64, y1: [f64; D], f1: Option<[f64; D]>, crossing: Option<i8>) -> Step<D> {
        let step = Step {
            t0: self.t,
            y0: self.y,
            t1: self.t + self.sign * h,
            y1,
            crossing,
        };
        self.t = step.t1;
        self.y = y1;
        self.f = f1.unwrap_or_else(|| self.eval(&y1));
        self.steps += 1;
        step
    }
}
