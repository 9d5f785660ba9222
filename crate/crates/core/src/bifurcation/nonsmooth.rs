//! Non-smooth organizing points: the homoclinic return map of the
//! quiescent flow and the codimension-two points on `I = I_rh`.

use serde::Serialize;

use crate::error::Result;
use crate::models::{derive, ModelParams};
use crate::numerics::roots::brent;

use super::curves::{bt_points, g_hat, i_sn};
use super::cycles::{grazing_point, CycleOptions};

/// Second intersection of the quiescent orbit `w = w0 (s / s0)^gamma`
/// through the manifold point `(s0, w0)` with the manifold itself, at
/// `I = I_rh`:
///
/// ```text
/// (1 - k s0) (s / s0)^(gamma - 1) = 1 - k s,   k = g v*'(0) / (2 (e_r - v*(0)))
/// ```
///
/// with `gamma = tau_s / tau_w`. For `gamma >= 1` the orbits are at least
/// as curved as the manifold and `(s0, w0)` is the only intersection. The
/// left side is convex in `s`, so apart from tangency there is exactly one
/// further root in `(0, 1/k)`: above `s0` when `k s0 < (1 - gamma)/(2 - gamma)`
/// and below it otherwise.
pub fn homoclinic_return(params: &ModelParams, g: f64, s0: f64) -> Result<Option<f64>> {
    let (d, _) = derive(params)?;
    let gamma = params.tau_s / params.tau_w;
    let k = g * d.v_star_prime_0 / (2.0 * (params.e_r - d.v_star_0));
    if gamma >= 1.0 || !(s0 > 0.0) || k <= 0.0 || k * s0 >= 1.0 {
        return Ok(None);
    }
    let c = 1.0 - k * s0;
    let f = |s: f64| c * (s / s0).powf(gamma - 1.0) - (1.0 - k * s);
    // minimizer of the convex function f
    let s_min = (k * s0.powf(gamma - 1.0) / (c * (1.0 - gamma))).powf(1.0 / (gamma - 2.0));
    if ((s_min - s0) / s0).abs() < 1e-9 || f(s_min) >= 0.0 {
        return Ok(None);
    }
    let root = if s_min > s0 {
        brent(f, s_min, 1.0 / k, 1e-15 * s0)?
    } else {
        let mut lo = 0.5 * s_min;
        while f(lo) <= 0.0 {
            lo *= 0.5;
        }
        brent(f, lo, s_min, 1e-15 * s0)?
    };
    Ok(Some(root))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Codim2Label {
    SaddleNodeBeb,
    HopfBeb,
    BtCandidate,
    GlobalGrazing,
    Codim3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabeledPoint {
    pub label: Codim2Label,
    pub g: f64,
    pub current: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GlobalPointOptions {
    /// Upper end of the coupling search interval.
    pub g_max: f64,
    /// Coupling resolution of the bisection.
    pub g_tol: f64,
    pub cycle: CycleOptions,
}

/// Grazing current of the unstable Hopf cycle at coupling `g`, searched
/// between the Hopf current and `I_rh + span`.
fn grazing_current(params: &ModelParams, g: f64, span: f64, opts: &CycleOptions) -> Result<f64> {
    let (d, c) = derive(&params.with_g(g))?;
    let i_ah = super::curves::i_ah(&c, g);
    let lo = i_ah + 1e-6 * span;
    let hi = d.i_rh.max(i_ah) + span;
    Ok(grazing_point(params, g, (lo, hi), false, opts)?.current)
}

/// Coupling beyond `ĝ` at which the grazing curve crosses `I = I_rh`,
/// located by bisection on the sign of `I_graze(g) - I_rh`.
pub fn global_grazing_point(params: &ModelParams, opts: &GlobalPointOptions) -> Result<Option<f64>> {
    let (d, _) = derive(params)?;
    let Some(gh) = g_hat(params)? else {
        return Ok(None);
    };
    let span = 0.5 * d.i_rh.abs().max(0.1);
    let above = |g: f64| grazing_current(params, g, span, &opts.cycle).map(|i| i > d.i_rh);
    let (mut lo, mut hi) = (gh, opts.g_max);
    // at ĝ the Hopf cycle is born on I_rh and grazes above it; every probe
    // must succeed, since a missing grazing point says nothing about its side
    if above(hi)? {
        return Ok(None);
    }
    while hi - lo > opts.g_tol {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Codimension-two points on or near `I = I_rh`. The global grazing point
/// needs cycle tracking and is only searched when `global` is given.
pub fn codim2_points(params: &ModelParams, global: Option<&GlobalPointOptions>) -> Result<Vec<LabeledPoint>> {
    let (d, c) = derive(params)?;
    let mut out = Vec::new();
    let bt = bt_points(params)?;
    if bt.codim3 {
        out.push(LabeledPoint {
            label: Codim2Label::Codim3,
            g: d.g_star,
            current: d.i_rh,
        });
        return Ok(out);
    }
    out.push(LabeledPoint {
        label: Codim2Label::SaddleNodeBeb,
        g: d.g_star,
        current: d.i_rh,
    });
    if d.g_bar < d.g_star {
        out.push(LabeledPoint {
            label: Codim2Label::HopfBeb,
            g: d.g_bar,
            current: d.i_rh,
        });
    }
    for g in bt.g {
        out.push(LabeledPoint {
            label: Codim2Label::BtCandidate,
            g,
            current: i_sn(&c, g),
        });
    }
    if let Some(opts) = global {
        if let Some(g) = global_grazing_point(params, opts)? {
            out.push(LabeledPoint {
                label: Codim2Label::GlobalGrazing,
                g,
                current: d.i_rh,
            });
        }
    }
    Ok(out)
}
