//! Limit cycles by direct simulation: stable cycles forward in time,
//! unstable ones in reverse time. Returns are taken on the ray `w = eta s`,
//! which holds every nontrivial equilibrium and so meets every cycle
//! surrounding one.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::{integrate, IntegrateOptions, LimitCycleSummary, MeanField, MeanFieldState, System};
use crate::models::ModelParams;
use crate::numerics::ode::{OdeOptions, Stepper};

#[derive(Debug, Clone, Copy)]
pub struct CycleOptions {
    pub tol: f64,
    /// Consecutive section points closer than this count as converged.
    pub return_tol: f64,
    pub period_rtol: f64,
    /// Give up after this many multiples of `tau_w`.
    pub max_time_factor: f64,
    /// Orbits whose `w` range is below this are treated as equilibria.
    pub min_amplitude: f64,
    /// Samples per period when measuring the orbit.
    pub samples: usize,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            return_tol: 1e-8,
            period_rtol: 1e-6,
            max_time_factor: 500.0,
            min_amplitude: 1e-7,
            samples: 10_000,
        }
    }
}

fn eta_of(params: &ModelParams) -> f64 {
    (params.tau_w * params.w_jump) / (params.tau_s * params.s_jump)
}

/// Default starting point: the origin for stable cycles (outside any
/// cycle around `e+`), a point next to `e+` for unstable ones.
fn default_hint(params: &ModelParams, want_stable: bool) -> MeanFieldState {
    if want_stable {
        return MeanFieldState::ORIGIN;
    }
    let eta = eta_of(params);
    let k = params.rate_gain();
    let lambda_s = params.tau_s * params.s_jump * k;
    // largest root of s = lambda_s sqrt(H(s, eta s)), by fixed-point-free scan
    let phi = |s: f64| s - lambda_s * params.switching_h(s, eta * s).max(0.0).sqrt();
    let mut s_plus = 0.0;
    let mut s = 1e-6;
    while s < 1e3 {
        if phi(s) < 0.0 {
            s_plus = s;
        }
        s *= 1.01;
    }
    MeanFieldState::new(s_plus * (1.0 + 1e-6), eta * s_plus * (1.0 + 1e-6))
}

/// Finds the limit cycle reached from `hint` (forward in time when
/// `want_stable`, backward otherwise).
pub fn track_limit_cycle(
    params: &ModelParams,
    want_stable: bool,
    hint: Option<MeanFieldState>,
    opts: &CycleOptions,
) -> Result<LimitCycleSummary> {
    params.validate()?;
    let start = hint.unwrap_or_else(|| default_hint(params, want_stable));
    let eta = eta_of(params);
    let section = move |y: &[f64; 2]| y[1] - eta * y[0];
    let field = MeanField::new(System::Reduced, params);
    let reverse = !want_stable;
    let ode = OdeOptions {
        h_max: 1.0,
        ..OdeOptions::with_tol(opts.tol)
    };
    let mut st = Stepper::new(&field, 0.0, start.as_array(), ode, reverse);
    let cap = opts.max_time_factor * params.tau_w;

    let mut returns: Vec<(f64, MeanFieldState)> = Vec::new();
    let (mut w_lo, mut w_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    while st.t().abs() < cap {
        let step = st.step(None)?;
        let y = step.y1;
        w_lo = w_lo.min(y[1]);
        w_hi = w_hi.max(y[1]);
        if y[0].hypot(y[1]) < 1e-12 {
            break;
        }
        if !y.iter().all(|v| v.is_finite()) || y[0].abs() > 1e12 {
            break;
        }
        let (a, b) = (section(&step.y0), section(&step.y1));
        if !(a > 0.0 && b <= 0.0) {
            continue;
        }
        let (t, yc) = st.locate(&step, section, 1e-14);
        let point = MeanFieldState::from(yc);
        if let Some(&(t_prev, p_prev)) = returns.last() {
            let period = (t - t_prev).abs();
            let amplitude = w_hi - w_lo;
            if point.dist(&p_prev) < opts.return_tol {
                if amplitude < opts.min_amplitude {
                    break;
                }
                if let Some(&(t_pp, _)) = returns.iter().rev().nth(1) {
                    let prev_period = (t_prev - t_pp).abs();
                    if ((period - prev_period) / period).abs() < opts.period_rtol {
                        return measure(params, point, period, want_stable, opts);
                    }
                }
            }
        }
        returns.push((t, point));
        w_lo = f64::INFINITY;
        w_hi = f64::NEG_INFINITY;
    }
    Err(Error::NoCycleFound { time: st.t().abs() })
}

/// Integrates one period from a section point with steps of at most
/// `period / samples` and records amplitude, manifold crossings and the
/// minimum of `H`, the latter refined by golden-section search inside the
/// steps around the smallest sampled value.
fn measure(
    params: &ModelParams,
    point: MeanFieldState,
    period: f64,
    stable: bool,
    opts: &CycleOptions,
) -> Result<LimitCycleSummary> {
    let field = MeanField::new(System::Reduced, params);
    let ode = OdeOptions {
        h_max: period / opts.samples as f64,
        ..OdeOptions::with_tol(opts.tol)
    };
    let mut st = Stepper::new(&field, 0.0, point.as_array(), ode, !stable);
    let mut steps = Vec::new();
    let mut crossings = 0;
    while st.t().abs() < period {
        let sign = if stable { 1.0 } else { -1.0 };
        let step = st.step(Some(sign * period))?;
        crossings += usize::from(step.crossing.is_some());
        steps.push(step);
    }
    let h_at = |y: &[f64; 2]| params.switching_h(y[0], y[1]);
    let w: Vec<f64> = std::iter::once(point.w).chain(steps.iter().map(|s| s.y1[1])).collect();
    let w_max = refined_extreme(&w, true);
    let w_min = refined_extreme(&w, false);
    let (i_min, _) = steps
        .iter()
        .enumerate()
        .min_by(|a, b| h_at(&a.1.y1).total_cmp(&h_at(&b.1.y1)))
        .expect("at least one step");
    let mut min_h = h_at(&steps[i_min].y1);
    for step in &steps[i_min..(i_min + 2).min(steps.len())] {
        let len = (step.t1 - step.t0).abs();
        let inner = golden_min(|theta| h_at(&st.state_within(step, theta)), 0.0, len);
        min_h = min_h.min(inner);
    }
    Ok(LimitCycleSummary {
        amplitude_w: w_max - w_min,
        period,
        stable,
        nonsmooth: crossings >= 2 || min_h < 0.0,
        section_point: point,
        min_h,
        crossings_per_period: crossings,
    })
}

/// Minimum of a unimodal function on `[a, b]` by golden-section search.
fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd).min(f(a)).min(f(b))
}

/// Extreme value of uniformly sampled data with a parabolic correction
/// through the neighbours of the extreme sample.
fn refined_extreme(x: &[f64], max: bool) -> f64 {
    let sign = if max { 1.0 } else { -1.0 };
    let (i, &best) = x
        .iter()
        .enumerate()
        .max_by(|a, b| (sign * a.1).total_cmp(&(sign * b.1)))
        .expect("non-empty samples");
    if i == 0 || i + 1 >= x.len() {
        return best;
    }
    let (a, b, c) = (x[i - 1], x[i], x[i + 1]);
    let curv = a - 2.0 * b + c;
    if curv * sign >= 0.0 {
        return best;
    }
    b - (c - a) * (c - a) / (8.0 * curv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrazingKind {
    Persistence,
    Destruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrazingPoint {
    pub current: f64,
    pub kind: GrazingKind,
    pub cycle: LimitCycleSummary,
}

/// Current at which the cycle tracked with `want_stable` touches the
/// manifold. `bracket.0` must carry a smooth cycle (`min H > 0`); at
/// `bracket.1` the cycle crosses the manifold or no longer exists.
///
/// Cycles are converged to at least `1e-11` so that `min H` is resolved
/// below the `1e-9` target.
pub fn grazing_point(
    params: &ModelParams,
    g: f64,
    bracket: (f64, f64),
    want_stable: bool,
    opts: &CycleOptions,
) -> Result<GrazingPoint> {
    let opts = CycleOptions {
        tol: opts.tol.min(1e-12),
        return_tol: opts.return_tol.min(1e-11),
        period_rtol: opts.period_rtol.min(1e-8),
        ..*opts
    };
    let at = |i: f64| {
        let p = params.with_point(g, i);
        track_limit_cycle(&p, want_stable, None, &opts)
    };
    let (mut lo, mut hi) = bracket;
    let mut best = at(lo)?;
    if best.min_h <= 0.0 {
        return Err(Error::BracketInvalid {
            a: lo,
            b: hi,
            fa: best.min_h,
            fb: f64::NAN,
        });
    }
    if let Ok(c) = at(hi) {
        if c.min_h > 0.0 {
            return Err(Error::BracketInvalid {
                a: lo,
                b: hi,
                fa: best.min_h,
                fb: c.min_h,
            });
        }
    }
    let mut best_i = lo;
    for _ in 0..100 {
        if best.min_h.abs() < 1e-9 || (hi - lo) < 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match at(mid) {
            Ok(c) if c.min_h > 0.0 => {
                lo = mid;
                best = c;
                best_i = mid;
            }
            Ok(c) => {
                hi = mid;
                if c.min_h.abs() < best.min_h.abs() {
                    best = c;
                    best_i = mid;
                }
            }
            Err(Error::NoCycleFound { .. }) => hi = mid,
            Err(e) => return Err(e),
        }
    }
    let i_rh = params.i_rh();
    Ok(GrazingPoint {
        current: best_i,
        kind: if best_i > i_rh {
            GrazingKind::Persistence
        } else {
            GrazingKind::Destruction
        },
        cycle: best,
    })
}

/// Whether a stable oscillation launched from the origin is still present
/// after the transient cap, rather than having settled onto an equilibrium.
pub fn stable_cycle_persists(params: &ModelParams, opts: &CycleOptions) -> Result<bool> {
    match track_limit_cycle(params, true, None, opts) {
        Ok(c) => Ok(c.amplitude_w >= opts.min_amplitude),
        Err(Error::NoCycleFound { .. }) => {
            // a slow passage near a vanished cycle still oscillates at the cap
            let io = IntegrateOptions {
                tol: opts.tol,
                ..IntegrateOptions::default()
            };
            let span = opts.max_time_factor * params.tau_w;
            let tr = integrate(System::Reduced, params, MeanFieldState::ORIGIN, span, &io)?;
            let tail = &tr.states[tr.len() * 9 / 10..];
            let (lo, hi) = tail
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.w), b.max(p.w)));
            Ok(hi - lo > 1e-3)
        }
        Err(e) => Err(e),
    }
}

/// Current at which the stable non-smooth cycle disappears in a saddle-node
/// of limit cycles; the cycle must exist at `bracket.0` and not at
/// `bracket.1`. Bisection to a current resolution of `1e-6`.
pub fn snlc_point(params: &ModelParams, g: f64, bracket: (f64, f64), opts: &CycleOptions) -> Result<f64> {
    let exists = |i: f64| stable_cycle_persists(&params.with_point(g, i), opts);
    let (mut lo, mut hi) = bracket;
    if !exists(lo)? || exists(hi)? {
        return Err(Error::BracketInvalid {
            a: lo,
            b: hi,
            fa: f64::NAN,
            fb: f64::NAN,
        });
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if exists(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
