//! Direct simulation of `N` all-to-all coupled adapting neurons:
//!
//! ```text
//! v_i' = F(v_i) - w_i + I + g s (e_r - v_i)
//! w_i' = a (b v_i - w_i)
//! s'   = -s / tau_s
//! ```
//!
//! A neuron reaching `v_peak` spikes: `v_i -> v_reset`, `w_i -> w_i + w_jump`
//! and `s -> s + s_jump / N`. The slow network replaces `s` by `mean(w) / eta`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeuronState {
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spike {
    pub neuron: usize,
    pub time: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct NetworkTrace {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    pub w_mean: Vec<f64>,
    /// Applied current at each recorded time.
    pub current: Vec<f64>,
    pub spikes: Vec<Spike>,
    pub n: usize,
}

impl NetworkTrace {
    pub fn duration(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    fn window_mean(&self, values: &[f64], t0: f64, t1: f64) -> f64 {
        let sel: Vec<f64> = self
            .times
            .iter()
            .zip(values)
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .map(|(_, x)| *x)
            .collect();
        sel.iter().sum::<f64>() / sel.len().max(1) as f64
    }

    /// Mean of `(s, w_mean)` over the final `window` time units.
    pub fn tail_mean(&self, window: f64) -> (f64, f64) {
        let t1 = self.times.last().copied().unwrap_or(0.0);
        (
            self.window_mean(&self.s, t1 - window, t1),
            self.window_mean(&self.w_mean, t1 - window, t1),
        )
    }

    /// Spikes per neuron per unit time over `[t0, t1]`.
    pub fn rate_between(&self, t0: f64, t1: f64) -> f64 {
        let count = self.spikes.iter().filter(|sp| sp.time >= t0 && sp.time < t1).count();
        count as f64 / (self.n.max(1) as f64 * (t1 - t0))
    }
}

#[derive(Debug, Clone)]
pub enum NetworkInit {
    /// `v` uniform in `[v_reset, v_peak]`, `w = 0`, `s = 0`.
    Seeded(u64),
    States { neurons: Vec<NeuronState>, s: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct NetworkOptions {
    pub n: usize,
    pub duration: f64,
    pub dt: f64,
    /// Sampling interval of the trace; every step when `None`.
    pub record_dt: Option<f64>,
    /// `|v|` above this is reported as a blow-up; defaults to `1e3 (|v_peak| + 1)`.
    pub v_ceiling: Option<f64>,
    pub parallel: bool,
    pub record_spikes: bool,
}

impl NetworkOptions {
    pub fn new(n: usize, duration: f64, dt: f64) -> Self {
        Self {
            n,
            duration,
            dt,
            record_dt: None,
            v_ceiling: None,
            parallel: true,
            record_spikes: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("network needs at least one neuron".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParams(format!("duration must be >= 0, got {}", self.duration)));
        }
        if let Some(r) = self.record_dt {
            if !(r > 0.0) {
                return Err(Error::InvalidParams(format!("record_dt must be > 0, got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum Coupling {
    Synaptic,
    /// `s = mean(w) / eta`.
    Slow { eta: f64 },
}

struct Stepper<'a> {
    p: &'a ModelParams,
    a: f64,
    b: f64,
    ceiling: f64,
}

impl Stepper<'_> {
    #[inline]
    fn dv(&self, v: f64, w: f64, s: f64, current: f64) -> f64 {
        self.p.f(v) - w + current + self.p.g * s * (self.p.e_r - v)
    }

    #[inline]
    fn dw(&self, v: f64, w: f64) -> f64 {
        self.a * (self.b * v - w)
    }

    /// Advances one neuron over `[t, t + dt]` (Heun, Euler after a reset),
    /// appending its spikes to `out`.
    #[allow(clippy::too_many_arguments)]
    fn advance(
        &self,
        idx: usize,
        x: &mut NeuronState,
        t: f64,
        dt: f64,
        s0: f64,
        s1: f64,
        current: f64,
        out: &mut Vec<Spike>,
    ) -> Result<()> {
        let p = self.p;
        let (mut v, mut w) = (x.v, x.w);
        let k1v = self.dv(v, w, s0, current);
        let k1w = self.dw(v, w);
        let (ve, we) = (v + dt * k1v, w + dt * k1w);
        let (mut vn, mut wn) = (ve, we);
        if ve < p.v_peak {
            let k2v = self.dv(ve, we, s1, current);
            let k2w = self.dw(ve, we);
            vn = v + 0.5 * dt * (k1v + k2v);
            wn = w + 0.5 * dt * (k1w + k2w);
        }
        let mut t_at = t;
        let mut left = dt;
        for _ in 0..16 {
            if !vn.is_finite() || vn.abs() > self.ceiling {
                return Err(Error::BlowUp { neuron: idx, t: t_at + left, v: vn });
            }
            if vn < p.v_peak {
                break;
            }
            let theta = ((p.v_peak - v) / (vn - v)).clamp(0.0, 1.0);
            let t_spike = t_at + theta * left;
            out.push(Spike {
                neuron: idx,
                time: t_spike,
            });
            w = w + theta * (wn - w) + p.w_jump;
            v = p.v_reset;
            t_at = t_spike;
            left = t + dt - t_spike;
            vn = v + left * self.dv(v, w, s1, current);
            wn = w + left * self.dw(v, w);
        }
        x.v = vn;
        x.w = wn;
        Ok(())
    }
}

fn initial_state(params: &ModelParams, n: usize, init: &NetworkInit) -> Result<(Vec<NeuronState>, f64)> {
    match init {
        NetworkInit::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let neurons = (0..n)
                .map(|_| NeuronState {
                    v: rng.gen_range(params.v_reset..params.v_peak),
                    w: 0.0,
                })
                .collect();
            Ok((neurons, 0.0))
        }
        NetworkInit::States { neurons, s } => {
            if neurons.len() != n {
                return Err(Error::InvalidParams(format!(
                    "{} initial states given for {} neurons",
                    neurons.len(),
                    n
                )));
            }
            Ok((neurons.clone(), *s))
        }
    }
}

// Below this size the per-step fork/join costs more than it saves.
const PARALLEL_MIN_NEURONS: usize = 4096;
const PARALLEL_CHUNK: usize = 1024;

fn simulate(
    params: &ModelParams,
    opts: &NetworkOptions,
    init: &NetworkInit,
    coupling: Coupling,
    current: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<NetworkTrace> {
    params.validate()?;
    opts.validate()?;
    let n = opts.n;
    let (mut neurons, mut s) = initial_state(params, n, init)?;
    let st = Stepper {
        p: params,
        a: params.adaptation_rate(),
        b: params.adaptation_coupling(),
        ceiling: opts.v_ceiling.unwrap_or(1e3 * (params.v_peak.abs() + 1.0)),
    };
    let w_mean = |ns: &[NeuronState]| ns.iter().map(|x| x.w).sum::<f64>() / n as f64;
    if let Coupling::Slow { eta } = coupling {
        s = w_mean(&neurons) / eta;
    }
    let steps = (opts.duration / opts.dt).round() as usize;
    let every = opts.record_dt.map_or(1, |r| ((r / opts.dt).round() as usize).max(1));
    let decay = (-opts.dt / params.tau_s).exp();

    let mut trace = NetworkTrace {
        n,
        ..NetworkTrace::default()
    };
    let record = |tr: &mut NetworkTrace, t: f64, s: f64, ns: &[NeuronState]| {
        tr.times.push(t);
        tr.s.push(s);
        tr.w_mean.push(w_mean(ns));
        tr.current.push(current(t));
    };
    record(&mut trace, 0.0, s, &neurons);

    let mut events: Vec<Spike> = Vec::new();
    for k in 0..steps {
        let t = k as f64 * opts.dt;
        let i_now = current(t);
        let (s0, s1) = match coupling {
            Coupling::Synaptic => (s, s * decay),
            Coupling::Slow { .. } => (s, s),
        };
        events.clear();
        if opts.parallel && n >= PARALLEL_MIN_NEURONS {
            let chunks: Vec<Vec<Spike>> = neurons
                .par_chunks_mut(PARALLEL_CHUNK)
                .enumerate()
                .map(|(c, chunk)| {
                    let mut out = Vec::new();
                    for (j, x) in chunk.iter_mut().enumerate() {
                        st.advance(c * PARALLEL_CHUNK + j, x, t, opts.dt, s0, s1, i_now, &mut out)?;
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            events.extend(chunks.into_iter().flatten());
        } else {
            for (idx, x) in neurons.iter_mut().enumerate() {
                st.advance(idx, x, t, opts.dt, s0, s1, i_now, &mut events)?;
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.neuron.cmp(&b.neuron)));
        let t_end = (k + 1) as f64 * opts.dt;
        match coupling {
            Coupling::Synaptic => {
                s *= decay;
                for sp in &events {
                    s += params.s_jump / n as f64 * (-(t_end - sp.time) / params.tau_s).exp();
                }
            }
            Coupling::Slow { eta } => s = w_mean(&neurons) / eta,
        }
        if opts.record_spikes {
            trace.spikes.extend_from_slice(&events);
        }
        if (k + 1) % every == 0 || k + 1 == steps {
            record(&mut trace, t_end, s, &neurons);
        }
    }
    Ok(trace)
}

/// Simulates the network at the constant current `params.current`.
pub fn simulate_network(params: &ModelParams, opts: &NetworkOptions, init: &NetworkInit) -> Result<NetworkTrace> {
    let i = params.current;
    simulate(params, opts, init, Coupling::Synaptic, &move |_| i)
}

fn slow_eta(params: &ModelParams) -> f64 {
    (params.tau_w * params.w_jump) / (params.tau_s * params.s_jump)
}

/// Simulates the slow network, whose synaptic variable is slaved to
/// `mean(w) / eta`.
pub fn simulate_slow_network(params: &ModelParams, opts: &NetworkOptions, init: &NetworkInit) -> Result<NetworkTrace> {
    let i = params.current;
    let coupling = Coupling::Slow { eta: slow_eta(params) };
    simulate(params, opts, init, coupling, &move |_| i)
}

#[derive(Debug, Clone, Copy)]
pub struct RampOptions {
    pub n: usize,
    pub dt: f64,
    /// Time spent at the starting current before the ramp begins.
    pub settle: f64,
    pub record_dt: Option<f64>,
    pub seed: u64,
    pub slow: bool,
}

/// Rate for which a ramp over `[i_start, i_end]` lasts `50 tau_w`, slow
/// enough for the adaptation to track the branch it is on.
pub fn default_ramp_rate(params: &ModelParams, i_start: f64, i_end: f64) -> f64 {
    (i_end - i_start).abs() / (50.0 * params.tau_w)
}

/// Runs the same network up and down a linear current ramp between
/// `i_start` and `i_end` (in either order). Returns `(ascending, descending)`.
/// A zero rate holds the current at `i_start` for `settle` time units.
pub fn ramp_protocol(
    params: &ModelParams,
    i_start: f64,
    i_end: f64,
    ramp_rate: f64,
    opts: &RampOptions,
) -> Result<(NetworkTrace, NetworkTrace)> {
    if !(ramp_rate >= 0.0) {
        return Err(Error::InvalidParams(format!("ramp rate must be >= 0, got {ramp_rate}")));
    }
    let (lo, hi) = (i_start.min(i_end), i_start.max(i_end));
    let ramp_time = if ramp_rate == 0.0 { 0.0 } else { (hi - lo) / ramp_rate };
    let (lo, hi) = if ramp_rate == 0.0 { (i_start, i_start) } else { (lo, hi) };
    let run = |from: f64, to: f64| {
        let settle = opts.settle;
        let schedule = move |t: f64| {
            if t <= settle || ramp_time == 0.0 {
                from
            } else {
                from + (to - from) * ((t - settle) / ramp_time).min(1.0)
            }
        };
        let net = NetworkOptions {
            record_dt: opts.record_dt,
            ..NetworkOptions::new(opts.n, settle + ramp_time, opts.dt)
        };
        let coupling = if opts.slow {
            Coupling::Slow { eta: slow_eta(params) }
        } else {
            Coupling::Synaptic
        };
        simulate(params, &net, &NetworkInit::Seeded(opts.seed), coupling, &schedule)
    };
    Ok((run(lo, hi)?, run(hi, lo)?))
}

/// Population firing rate against current, in `bins` equal current bins,
/// restricted to the ramp portion of the trace (after `settle`).
pub fn rate_vs_current(trace: &NetworkTrace, settle: f64, bins: usize) -> Vec<(f64, f64)> {
    let ramp: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.current)
        .filter(|(t, _)| **t > settle)
        .map(|(t, i)| (*t, *i))
        .collect();
    if ramp.len() < 2 || bins == 0 {
        return vec![];
    }
    let (t0, t1) = (ramp[0].0, ramp[ramp.len() - 1].0);
    let (i0, i1) = (ramp[0].1, ramp[ramp.len() - 1].1);
    let width = (t1 - t0) / bins as f64;
    (0..bins)
        .map(|b| {
            let (a, z) = (t0 + b as f64 * width, t0 + (b + 1) as f64 * width);
            let mid = (b as f64 + 0.5) / bins as f64;
            (i0 + (i1 - i0) * mid, trace.rate_between(a, z))
        })
        .collect()
}

/// Current interval over which the ascending and descending sweeps disagree
/// on whether the population fires: one rate is below `rate_floor` while the
/// other is above `10 rate_floor`. `None` when they agree everywhere.
pub fn hysteresis_interval(
    ascending: &NetworkTrace,
    descending: &NetworkTrace,
    settle: f64,
    bins: usize,
    rate_floor: f64,
) -> Option<(f64, f64)> {
    let up = rate_vs_current(ascending, settle, bins);
    let mut down = rate_vs_current(descending, settle, bins);
    down.reverse();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for ((i_up, r_up), (_, r_down)) in up.iter().zip(&down) {
        let (a, b) = (r_up.min(*r_down), r_up.max(*r_down));
        if a < rate_floor && b > 10.0 * rate_floor {
            lo = lo.min(*i_up);
            hi = hi.max(*i_up);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Quiescent,
    Tonic,
    Bursting,
}

/// A population silence counts as an inter-burst gap when it exceeds this
/// multiple of the median single-neuron interspike interval.
const BURST_GAP_FACTOR: f64 = 10.0;

/// Classifies the final `window` of a trace. Bursting needs at least two
/// population silences inside the window that are long compared with the
/// typical interspike interval of one neuron; tonic firing needs the mean
/// synaptic drive of the last two windows to agree within 10%.
pub fn detect_regime(trace: &NetworkTrace, window: f64) -> Result<Regime> {
    if !(window > 0.0) || trace.duration() < 2.0 * window {
        return Err(Error::Indeterminate(format!(
            "trace of length {} is shorter than two windows of {window}",
            trace.duration()
        )));
    }
    let t_end = *trace.times.last().unwrap();
    let t_start = t_end - window;
    let recent: Vec<&Spike> = trace
        .spikes
        .iter()
        .filter(|sp| sp.time >= t_start && sp.time <= t_end)
        .collect();
    if recent.is_empty() {
        return Ok(Regime::Quiescent);
    }
    let mut last_spike = vec![f64::NAN; trace.n];
    let mut isis = Vec::new();
    for sp in &recent {
        let prev = last_spike[sp.neuron];
        if prev.is_finite() {
            isis.push(sp.time - prev);
        }
        last_spike[sp.neuron] = sp.time;
    }
    let mut times: Vec<f64> = recent.iter().map(|sp| sp.time).collect();
    times.sort_by(f64::total_cmp);
    times.insert(0, t_start);
    times.push(t_end);
    let typical = if isis.is_empty() {
        window / times.len() as f64
    } else {
        isis.sort_by(f64::total_cmp);
        isis[isis.len() / 2]
    };
    let long_gaps = times
        .windows(2)
        .filter(|w| w[1] - w[0] > BURST_GAP_FACTOR * typical)
        .count();
    if long_gaps >= 2 {
        return Ok(Regime::Bursting);
    }
    if long_gaps == 1 {
        return Err(Error::Indeterminate("single silent epoch in the window".into()));
    }
    let last = trace.window_mean(&trace.s, t_start, t_end);
    let prev = trace.window_mean(&trace.s, t_start - window, t_start);
    if ((last - prev) / last).abs() <= 0.1 {
        Ok(Regime::Tonic)
    } else {
        Err(Error::Indeterminate(format!(
            "mean synaptic drive still drifting ({prev} -> {last})"
        )))
    }
}
