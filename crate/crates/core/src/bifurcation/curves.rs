//! Closed-form smooth bifurcation curves of the reduced system in the
//! `(g, I)` plane.
//!
//! With `beta = M(g)(g - g*)` the saddle-node curve is where `e+` and `e-`
//! merge at `s_SN = M(g)(g - g*)`; the Hopf curve is where the trace at
//! `e+` vanishes, at `s_AH = N(g)(g - g_bar)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{derive, CoefficientFns, DerivedParams, ModelParams};
use crate::numerics::roots::brent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub g: f64,
    pub current: f64,
}

fn grid(g_lo: f64, g_hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![g_lo],
        _ => (0..n).map(|i| g_lo + (g_hi - g_lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `I_SN(g) = I_rh - A2 M^2 (g - g*)^2`.
pub fn i_sn(c: &CoefficientFns, g: f64) -> f64 {
    let d = c.derived();
    let x = c.m(g) * (g - d.g_star);
    d.i_rh - c.a2(g) * x * x
}

/// `I_AH(g) = I_rh + A2 [N^2 (g - g_bar)^2 - 2 M N (g - g_bar)(g - g*)]`.
pub fn i_ah(c: &CoefficientFns, g: f64) -> f64 {
    let d = c.derived();
    let (m, n) = (c.m(g), c.n(g));
    let x = g - d.g_bar;
    d.i_rh + c.a2(g) * (n * n * x * x - 2.0 * m * n * x * (g - d.g_star))
}

pub fn s_sn(c: &CoefficientFns, g: f64) -> f64 {
    c.m(g) * (g - c.derived().g_star)
}

pub fn s_ah(c: &CoefficientFns, g: f64) -> f64 {
    c.n(g) * (g - c.derived().g_bar)
}

fn check_domain(g_lo: f64, g_hi: f64, lo: f64) -> Result<()> {
    // allow the left endpoint to be the threshold up to rounding
    if g_lo < lo - 1e-12 * lo.abs().max(1.0) || g_hi < g_lo || !g_hi.is_finite() {
        return Err(Error::DomainError {
            g: g_lo.min(g_hi),
            lo,
            hi: f64::INFINITY,
        });
    }
    Ok(())
}

/// Saddle-node curve sampled at `n` points of `[g_lo, g_hi] ⊂ [g*, ∞)`.
pub fn saddle_node_curve(params: &ModelParams, g_lo: f64, g_hi: f64, n: usize) -> Result<Vec<CurvePoint>> {
    let (d, c) = derive(params)?;
    check_domain(g_lo, g_hi, d.g_star)?;
    Ok(grid(g_lo.max(d.g_star), g_hi, n)
        .into_iter()
        .map(|g| CurvePoint { g, current: i_sn(&c, g) })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfPoint {
    pub g: f64,
    pub current: f64,
    /// Within `1e-9` of the saddle-node curve: a Bogdanov–Takens candidate.
    pub bt_candidate: bool,
}

fn hopf_regime(d: &DerivedParams) -> Result<()> {
    if d.g_star <= d.g_bar {
        return Err(Error::NoHopfRegime {
            g_star: d.g_star,
            g_bar: d.g_bar,
        });
    }
    Ok(())
}

/// Hopf curve sampled at `n` points of `[g_lo, g_hi] ⊂ [g_bar, ∞)`.
pub fn hopf_curve(params: &ModelParams, g_lo: f64, g_hi: f64, n: usize) -> Result<Vec<HopfPoint>> {
    let (d, c) = derive(params)?;
    hopf_regime(&d)?;
    check_domain(g_lo, g_hi, d.g_bar)?;
    Ok(grid(g_lo.max(d.g_bar), g_hi, n)
        .into_iter()
        .map(|g| {
            let current = i_ah(&c, g);
            let bt_candidate = g >= d.g_star && (current - i_sn(&c, g)).abs() < 1e-9;
            HopfPoint { g, current, bt_candidate }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BtPoints {
    /// Couplings of Bogdanov–Takens candidates, increasing.
    pub g: Vec<f64>,
    /// `tau_w = tau_s`: the Hopf and saddle-node BEB points merge at
    /// `g = g* = g_bar`.
    pub codim3: bool,
}

const CODIM3_TOL: f64 = 1e-12;

/// Couplings where the Hopf and saddle-node curves meet, from
/// `N(g)(g - g_bar) = M(g)(g - g*)`, which reduces to
/// `a2 g^2 + a1 g + a0 = 0` with
/// `a2 = k^2 s_jump w_jump v*'(0) (tau_w - tau_s) / (e_r - v*(0))`,
/// `a1 = -2 / tau_w` and `a0 = 2 eta / (tau_s (e_r - v*(0)))`.
pub fn bt_points(params: &ModelParams) -> Result<BtPoints> {
    let (d, _) = derive(params)?;
    let (ts, tw) = (params.tau_s, params.tau_w);
    if (tw - ts).abs() < CODIM3_TOL {
        return Ok(BtPoints {
            g: vec![d.g_star],
            codim3: true,
        });
    }
    if d.g_star <= d.g_bar {
        return Ok(BtPoints { g: vec![], codim3: false });
    }
    let k = d.rate_gain;
    let gap = params.e_r - d.v_star_0;
    let a2 = k * k * params.s_jump * params.w_jump * d.v_star_prime_0 * (tw - ts) / gap;
    let a1 = -2.0 / tw;
    let a0 = 2.0 * d.eta / (ts * gap);
    let disc = a1 * a1 - 4.0 * a2 * a0;
    if disc < 0.0 {
        return Ok(BtPoints { g: vec![], codim3: false });
    }
    let r = disc.sqrt();
    // numerically stable pair of roots
    let q = -0.5 * (a1 - r);
    let mut g: Vec<f64> = [q / a2, a0 / q]
        .into_iter()
        .filter(|g| g.is_finite() && *g > d.g_star.max(d.g_bar))
        .collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(BtPoints { g, codim3: false })
}

/// Coupling `ĝ > g*` where the Hopf curve returns to `I = I_rh`, i.e.
/// `N(g)(g - g_bar) = 2 M(g)(g - g*)`. `None` outside the Hopf regime or
/// when the curve stays above `I_rh`.
pub fn g_hat(params: &ModelParams) -> Result<Option<f64>> {
    let (d, c) = derive(params)?;
    if d.g_star <= d.g_bar {
        return Ok(None);
    }
    let f = |g: f64| c.n(g) * (g - d.g_bar) - 2.0 * c.m(g) * (g - d.g_star);
    let lo = d.g_star;
    let mut hi = 2.0 * d.g_star;
    for _ in 0..64 {
        if f(hi) < 0.0 {
            return brent(f, lo, hi, 1e-15).map(Some);
        }
        hi *= 2.0;
    }
    Ok(None)
}

/// Slopes at the origin, at `I = I_rh`, of the equilibrium ray (`eta`) and
/// of the switching manifold (`g (e_r - v*(0))`); equal only at `g = g*`.
pub fn tangency_check(params: &ModelParams) -> Result<(f64, f64)> {
    let (d, _) = derive(params)?;
    Ok((d.eta, params.g * (params.e_r - d.v_star_0)))
}
