//! Mean-field dynamics in the `(s, w)` plane.
//!
//! ```text
//! s' = -s / tau_s + s_jump R
//! w' = -w / tau_w + w_jump R
//! ```
//!
//! with `R` the network-averaged firing rate: the exact integral rate
//! ([`System::Full`]), `k sqrt(H)` ([`System::Reduced`]) or zero everywhere
//! ([`System::Quiescent`], the quiescent piece extended across the manifold).
//! Both `R` are continuous but not differentiable on `H = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{firing_rate_full, ModelParams, H_ZERO};
use crate::numerics::ode::{Field, OdeOptions, Step, Stepper};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldState {
    pub s: f64,
    pub w: f64,
}

impl MeanFieldState {
    pub const ORIGIN: Self = Self { s: 0.0, w: 0.0 };

    pub fn new(s: f64, w: f64) -> Self {
        Self { s, w }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.s, self.w]
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (self.s - other.s).hypot(self.w - other.w)
    }
}

impl From<[f64; 2]> for MeanFieldState {
    fn from(y: [f64; 2]) -> Self {
        Self { s: y[0], w: y[1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum System {
    Full,
    Reduced,
    Quiescent,
}

/// The mean-field vector field for one parameter point.
#[derive(Debug, Clone)]
pub struct MeanField {
    params: ModelParams,
    system: System,
    k: f64,
}

impl MeanField {
    pub fn new(system: System, params: &ModelParams) -> Self {
        Self {
            params: params.clone(),
            system,
            k: params.rate_gain(),
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn rate(&self, s: f64, w: f64) -> f64 {
        match self.system {
            System::Quiescent => 0.0,
            System::Reduced => {
                let h = self.params.switching_h(s, w);
                if h <= H_ZERO {
                    0.0
                } else {
                    self.k * h.sqrt()
                }
            }
            System::Full => firing_rate_full(&self.params, s, w).unwrap_or(f64::NAN),
        }
    }

    pub fn eval(&self, s: f64, w: f64) -> [f64; 2] {
        let r = self.rate(s, w);
        [
            -s / self.params.tau_s + self.params.s_jump * r,
            -w / self.params.tau_w + self.params.w_jump * r,
        ]
    }
}

impl Field<2> for MeanField {
    fn rhs(&self, y: &[f64; 2]) -> [f64; 2] {
        self.eval(y[0], y[1])
    }

    fn switching(&self, y: &[f64; 2]) -> Option<f64> {
        Some(self.params.switching_h(y[0], y[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub time: f64,
    /// `+1` entering `H > 0`, `-1` leaving it.
    pub direction: i8,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MeanFieldState>,
    pub crossings: Vec<Crossing>,
    /// Firing-rate coordinate of the embedded system; empty otherwise.
    pub rates: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<MeanFieldState> {
        self.states.last().copied()
    }

    /// Index of the first sample at or after the given fraction of the run.
    fn tail_start(&self, settle_fraction: f64) -> usize {
        let (t0, t1) = (self.times[0], *self.times.last().unwrap());
        let cut = t0 + (1.0 - settle_fraction.clamp(0.0, 1.0)) * (t1 - t0);
        self.times.partition_point(|&t| if t1 >= t0 { t < cut } else { t > cut })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub tol: f64,
    pub reverse_time: bool,
    /// Record only on this time grid (plus crossings); every step otherwise.
    pub sample_dt: Option<f64>,
    pub h_max: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            reverse_time: false,
            sample_dt: None,
            h_max: 1.0,
        }
    }
}

impl IntegrateOptions {
    pub fn ode(&self) -> OdeOptions {
        OdeOptions {
            h_max: self.h_max,
            ..OdeOptions::with_tol(self.tol)
        }
    }
}

fn run<F: Field<D>, const D: usize>(
    field: &F,
    y0: [f64; D],
    duration: f64,
    opts: &IntegrateOptions,
    mut record: impl FnMut(&mut Trajectory, f64, &[f64; D]),
) -> Result<Trajectory> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol must be > 0, got {}", opts.tol)));
    }
    if !(duration >= 0.0) {
        return Err(Error::InvalidParams(format!("duration must be >= 0, got {duration}")));
    }
    let mut traj = Trajectory::default();
    record(&mut traj, 0.0, &y0);
    if duration == 0.0 {
        return Ok(traj);
    }
    let sign = if opts.reverse_time { -1.0 } else { 1.0 };
    let t_end = sign * duration;
    let mut st = Stepper::new(field, 0.0, y0, opts.ode(), opts.reverse_time);
    let mut next_sample = opts.sample_dt.map(|dt| sign * dt);
    while (t_end - st.t()) * sign > 0.0 {
        let stop = match next_sample {
            Some(ts) if (t_end - ts) * sign > 0.0 => ts,
            _ => t_end,
        };
        let step: Step<D> = st.step(Some(stop))?;
        if let Some(dir) = step.crossing {
            traj.crossings.push(Crossing {
                time: step.t1,
                direction: dir,
            });
        }
        match (opts.sample_dt, next_sample) {
            (Some(dt), Some(ts)) => {
                if step.t1 == ts {
                    record(&mut traj, step.t1, &step.y1);
                    next_sample = Some(ts + sign * dt);
                } else if step.t1 == t_end {
                    record(&mut traj, step.t1, &step.y1);
                }
            }
            _ => record(&mut traj, step.t1, &step.y1),
        }
    }
    Ok(traj)
}

/// Integrates a mean-field system from `init` for `duration` time units
/// (backwards when `reverse_time` is set; recorded times are then negative).
pub fn integrate(
    system: System,
    params: &ModelParams,
    init: MeanFieldState,
    duration: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(init.s >= 0.0 && init.w >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "initial state ({}, {}) outside the positive quadrant",
            init.s, init.w
        )));
    }
    let field = MeanField::new(system, params);
    run(&field, init.as_array(), duration, opts, |tr, t, y| {
        tr.times.push(t);
        tr.states.push(MeanFieldState::from(*y));
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddedState {
    pub s: f64,
    pub w: f64,
    pub r: f64,
    pub epsilon: f64,
}

/// Singularly perturbed embedding `eps R' = R (H - R^2)` of the reduced
/// system, with `R` replacing `sqrt(H)` in the `s` and `w` equations.
///
/// Integrated in `(s, w, ln R)` so that `R` can become arbitrarily small
/// during quiescent phases without underflowing to the invariant plane
/// `R = 0`. An optional `r_floor` stops `ln R` from decreasing below
/// `ln r_floor`.
struct Embedded {
    params: ModelParams,
    epsilon: f64,
    k: f64,
    log_floor: Option<f64>,
}

impl Field<3> for Embedded {
    fn rhs(&self, y: &[f64; 3]) -> [f64; 3] {
        let p = &self.params;
        let r = y[2].exp();
        let h = p.switching_h(y[0], y[1]);
        let mut drho = (h - r * r) / self.epsilon;
        if let Some(lf) = self.log_floor {
            if y[2] <= lf && drho < 0.0 {
                drho = 0.0;
            }
        }
        [
            -y[0] / p.tau_s + p.s_jump * self.k * r,
            -y[1] / p.tau_w + p.w_jump * self.k * r,
            drho,
        ]
    }

    fn switching(&self, y: &[f64; 3]) -> Option<f64> {
        Some(self.params.switching_h(y[0], y[1]))
    }
}

/// Integrates the embedded system. `R(0) = 0` is invariant and reduces to
/// the quiescent flow.
pub fn integrate_embedded(
    params: &ModelParams,
    init: EmbeddedState,
    duration: f64,
    tol: f64,
    r_floor: Option<f64>,
) -> Result<Trajectory> {
    if !(init.epsilon > 0.0) {
        return Err(Error::InvalidParams(format!("epsilon must be > 0, got {}", init.epsilon)));
    }
    if !(init.r >= 0.0) {
        return Err(Error::InvalidParams(format!("R must be >= 0, got {}", init.r)));
    }
    let opts = IntegrateOptions {
        tol,
        ..IntegrateOptions::default()
    };
    if init.r == 0.0 {
        let mut tr = integrate(
            System::Quiescent,
            params,
            MeanFieldState::new(init.s, init.w),
            duration,
            &opts,
        )?;
        tr.rates = vec![0.0; tr.len()];
        return Ok(tr);
    }
    let field = Embedded {
        params: params.clone(),
        epsilon: init.epsilon,
        k: params.rate_gain(),
        log_floor: r_floor.filter(|f| *f > 0.0).map(f64::ln),
    };
    run(&field, [init.s, init.w, init.r.ln()], duration, &opts, |tr, t, y| {
        tr.times.push(t);
        tr.states.push(MeanFieldState::new(y[0], y[1]));
        tr.rates.push(y[2].exp());
    })
}

/// Summary of a periodic orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCycleSummary {
    /// `max w - min w` over one period.
    pub amplitude_w: f64,
    pub period: f64,
    pub stable: bool,
    /// The orbit crosses `H = 0`.
    pub nonsmooth: bool,
    pub section_point: MeanFieldState,
    /// Minimum of `H` over one period.
    pub min_h: f64,
    pub crossings_per_period: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Attractor {
    Equilibrium(MeanFieldState),
    LimitCycle(LimitCycleSummary),
    Origin,
}

const ORIGIN_NORM: f64 = 1e-10;
const EQUILIBRIUM_DIAMETER: f64 = 1e-8;
const PERIOD_REL_TOL: f64 = 1e-6;

/// Classifies the attractor reached by `traj` from its final
/// `settle_fraction`.
///
/// Periods are measured between successive entries into `H > 0` when the
/// tail crosses the manifold, and between upward crossings of the vertical
/// line through the tail's mean `s` otherwise.
pub fn classify_attractor(traj: &Trajectory, settle_fraction: f64) -> Result<Attractor> {
    if traj.len() < 8 {
        return Err(Error::Indeterminate("trajectory too short".into()));
    }
    let start = traj.tail_start(settle_fraction);
    let tail = &traj.states[start..];
    let times = &traj.times[start..];
    if tail.len() < 4 {
        return Err(Error::Indeterminate("tail has too few samples".into()));
    }
    let max_norm = tail.iter().map(|p| p.s.hypot(p.w)).fold(0.0, f64::max);
    if max_norm < ORIGIN_NORM {
        return Ok(Attractor::Origin);
    }
    let (s_lo, s_hi, w_lo, w_hi) = tail.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), p| (a.min(p.s), b.max(p.s), c.min(p.w), d.max(p.w)),
    );
    if (s_hi - s_lo).hypot(w_hi - w_lo) < EQUILIBRIUM_DIAMETER {
        return Ok(Attractor::Equilibrium(*tail.last().unwrap()));
    }

    let (t_start, t_end) = (times[0], *times.last().unwrap());
    let entries: Vec<f64> = traj
        .crossings
        .iter()
        .filter(|c| c.direction > 0 && within(c.time, t_start, t_end))
        .map(|c| c.time)
        .collect();
    let (returns, nonsmooth) = if entries.len() >= 3 {
        (entries, true)
    } else {
        let s_mid = tail.iter().map(|p| p.s).sum::<f64>() / tail.len() as f64;
        (section_returns(times, tail, s_mid), false)
    };
    if returns.len() < 3 {
        return Err(Error::Indeterminate(
            "neither settled to a point nor recurrent in the tail".into(),
        ));
    }
    let periods: Vec<f64> = returns.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let n = periods.len();
    let (p1, p2) = (periods[n - 2], periods[n - 1]);
    if ((p1 - p2) / p2).abs() > PERIOD_REL_TOL {
        return Err(Error::Indeterminate(format!(
            "returns not periodic yet (last periods {p1} and {p2})"
        )));
    }
    // statistics over the final period
    let last_start = returns[returns.len() - 2];
    let last_end = returns[returns.len() - 1];
    let mut w_min = f64::INFINITY;
    let mut w_max = f64::NEG_INFINITY;
    let mut section_point = *tail.last().unwrap();
    for (t, p) in times.iter().zip(tail) {
        if within(*t, last_start, last_end) {
            w_min = w_min.min(p.w);
            w_max = w_max.max(p.w);
            section_point = *p;
        }
    }
    let crossings_per_period = traj
        .crossings
        .iter()
        .filter(|c| within(c.time, last_start, last_end) && c.time != last_start)
        .count();
    Ok(Attractor::LimitCycle(LimitCycleSummary {
        amplitude_w: w_max - w_min,
        period: p2,
        stable: true,
        nonsmooth,
        section_point,
        min_h: f64::NAN,
        crossings_per_period,
    }))
}

fn within(t: f64, a: f64, b: f64) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    t >= lo && t <= hi
}

/// Times where `s` crosses `level` in the increasing-time-index direction
/// with `s` growing, located on a cubic through four neighbouring samples.
fn section_returns(times: &[f64], states: &[MeanFieldState], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..states.len() {
        let (a, b) = (states[i - 1].s - level, states[i].s - level);
        if a < 0.0 && b >= 0.0 {
            let lo = i.saturating_sub(2).min(states.len().saturating_sub(4));
            let idx: Vec<usize> = (lo..(lo + 4).min(states.len())).collect();
            let interp = |t: f64| lagrange(&idx, times, states, t) - level;
            let (mut t0, mut t1) = (times[i - 1], times[i]);
            let f0 = interp(t0);
            for _ in 0..100 {
                let tm = 0.5 * (t0 + t1);
                if (interp(tm) < 0.0) == (f0 < 0.0) {
                    t0 = tm;
                } else {
                    t1 = tm;
                }
            }
            out.push(0.5 * (t0 + t1));
        }
    }
    out
}

fn lagrange(idx: &[usize], times: &[f64], states: &[MeanFieldState], t: f64) -> f64 {
    let mut sum = 0.0;
    for &j in idx {
        let mut basis = 1.0;
        for &m in idx {
            if m != j {
                basis *= (t - times[m]) / (times[j] - times[m]);
            }
        }
        sum += basis * states[j].s;
    }
    sum
}

/// Symmetric Hausdorff distance between two point clouds in `(s, w)`.
pub fn hausdorff(a: &[MeanFieldState], b: &[MeanFieldState]) -> f64 {
    fn directed(a: &[MeanFieldState], b: &[MeanFieldState]) -> f64 {
        a.iter()
            .map(|p| b.iter().map(|q| p.dist(q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }
    directed(a, b).max(directed(b, a))
}
