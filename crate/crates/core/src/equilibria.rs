//! Equilibria of the reduced mean-field system and their linear stability.
//!
//! Nontrivial equilibria lie on the ray `w = eta s` and solve
//! `s = lambda_s sqrt(H(s, eta s))`. Expanding `I*` to second order in `g s`
//! turns this into `A2 s^2 + A1 s + A0 = 0`, i.e.
//! `s± = beta ± sqrt(beta^2 + I~)` with `beta = M(g)(g - g*)` and
//! `I~ = (I - I_rh) / A2(g)`. The expansion is exact for Izhikevich.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::MeanFieldState;
use crate::models::{derive, ModelKind, ModelParams, H_ZERO};
use crate::numerics::roots::all_roots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    E0,
    EPlus,
    EMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reality {
    Real,
    Virtual,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumKind {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    Saddle,
    NonHyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub point: MeanFieldState,
    pub branch: Branch,
    pub reality: Reality,
    /// Filled by [`classify`] for real equilibria.
    pub kind: Option<EquilibriumKind>,
    pub trace: f64,
    pub det: f64,
}

impl Equilibrium {
    fn unclassified(point: MeanFieldState, branch: Branch, reality: Reality) -> Self {
        Self {
            point,
            branch,
            reality,
            kind: None,
            trace: f64::NAN,
            det: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedCoordinates {
    pub beta: f64,
    pub i_tilde: f64,
}

impl ReducedCoordinates {
    pub fn discriminant(&self) -> f64 {
        self.beta * self.beta + self.i_tilde
    }

    /// `(s+, s-)`, or `None` when `beta^2 + I~ < 0`.
    pub fn roots(&self) -> Option<(f64, f64)> {
        let d = self.discriminant();
        (d >= 0.0).then(|| {
            let r = d.sqrt();
            (self.beta + r, self.beta - r)
        })
    }
}

pub fn reduced_coordinates(params: &ModelParams) -> Result<ReducedCoordinates> {
    let (d, c) = derive(params)?;
    let g = params.g;
    Ok(ReducedCoordinates {
        beta: c.m(g) * (g - d.g_star),
        i_tilde: (params.current - d.i_rh) / c.a2(g),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveMode {
    WeakCoupling,
    FullIzhikevich,
    FullNumeric,
}

/// The equilibrium at the origin: real (a stable node) below rheobase,
/// virtual above it.
pub fn trivial_equilibrium(params: &ModelParams) -> Equilibrium {
    let h = params.switching_h(0.0, 0.0);
    let reality = if h.abs() <= H_ZERO {
        Reality::Boundary
    } else if h < 0.0 {
        Reality::Real
    } else {
        Reality::Virtual
    };
    let mut eq = Equilibrium::unclassified(MeanFieldState::ORIGIN, Branch::E0, reality);
    // quiescent piece: s' = -s/tau_s, w' = -w/tau_w
    eq.trace = -1.0 / params.tau_s - 1.0 / params.tau_w;
    eq.det = 1.0 / (params.tau_s * params.tau_w);
    if reality == Reality::Real {
        eq.kind = Some(EquilibriumKind::StableNode);
    }
    eq
}

fn lambdas(params: &ModelParams) -> (f64, f64) {
    let k = params.rate_gain();
    let lambda_s = params.tau_s * params.s_jump * k;
    let lambda_w = params.tau_w * params.w_jump * k;
    (lambda_s, lambda_w / lambda_s)
}

/// Nontrivial equilibria with `s > 0`, classified. The boundary case `s = 0`
/// coincides with the origin and is reported by [`trivial_equilibrium`].
pub fn nontrivial_equilibria(params: &ModelParams, mode: SolveMode) -> Result<Vec<Equilibrium>> {
    let (_, eta) = lambdas(params);
    let mut roots: Vec<(f64, Branch)> = match mode {
        SolveMode::WeakCoupling => {
            let rc = reduced_coordinates(params)?;
            match rc.roots() {
                Some((sp, sm)) => vec![(sp, Branch::EPlus), (sm, Branch::EMinus)],
                None => vec![],
            }
        }
        SolveMode::FullIzhikevich => {
            if params.kind != ModelKind::Izhikevich {
                return Err(Error::UnsupportedModel(params.kind));
            }
            full_izhikevich_roots(params)
        }
        SolveMode::FullNumeric => numeric_roots(params)?,
    };
    roots.retain(|(s, _)| *s > 0.0);
    Ok(roots
        .into_iter()
        .map(|(s, branch)| {
            let eq = Equilibrium::unclassified(MeanFieldState::new(s, eta * s), branch, Reality::Real);
            classify(params, &eq)
        })
        .collect())
}

/// Quadratic `s^2 (1/lambda_s^2 + g^2/4) + s (eta - g (e_r - alpha/2)) + alpha^2/4 - I = 0`
/// obtained by squaring `s = lambda_s sqrt(H)` with the Izhikevich rheobase.
fn full_izhikevich_roots(params: &ModelParams) -> Vec<(f64, Branch)> {
    let (lambda_s, eta) = lambdas(params);
    let g = params.g;
    let a = 1.0 / (lambda_s * lambda_s) + 0.25 * g * g;
    let b = eta - g * (params.e_r - 0.5 * params.alpha);
    let c = 0.25 * params.alpha * params.alpha - params.current;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let r = disc.sqrt();
    vec![
        ((-b + r) / (2.0 * a), Branch::EPlus),
        ((-b - r) / (2.0 * a), Branch::EMinus),
    ]
}

const SCAN_POINTS: usize = 4000;

/// Sign-change scan plus Brent on `s - lambda_s sqrt(H(s, eta s))` over
/// `(0, s_max]`, `s_max = lambda_s sqrt(I + |I_rh| + 1)`, doubled while the
/// right end still lies below the equilibrium curve.
fn numeric_roots(params: &ModelParams) -> Result<Vec<(f64, Branch)>> {
    let (lambda_s, eta) = lambdas(params);
    let phi = |s: f64| s - lambda_s * params.switching_h(s, eta * s).max(0.0).sqrt();
    let base = params.current + params.i_rh().abs() + 1.0;
    let mut s_max = lambda_s * base.max(0.0).sqrt();
    for _ in 0..60 {
        if phi(s_max) > 0.0 {
            break;
        }
        s_max *= 2.0;
    }
    let lo = s_max * 1e-12;
    let found = all_roots(phi, lo, s_max, SCAN_POINTS, 1e-15)?;
    // the largest root is e+, a second one below it is e-
    let mut out: Vec<(f64, Branch)> = Vec::new();
    for (i, s) in found.iter().rev().enumerate() {
        let branch = if i == 0 { Branch::EPlus } else { Branch::EMinus };
        out.push((*s, branch));
    }
    Ok(out)
}

/// Jacobian of the reduced system at a point with `H > 0`.
pub fn jacobian(params: &ModelParams, at: MeanFieldState) -> Result<[[f64; 2]; 2]> {
    let h = params.switching_h(at.s, at.w);
    if h <= H_ZERO {
        return Err(Error::OnOrBelowManifold { h });
    }
    let k = params.rate_gain();
    let root = h.sqrt();
    // d sqrt(H)/ds and d sqrt(H)/dw
    let dr_ds = -params.rheobase_ds(at.s) / (2.0 * root);
    let dr_dw = -1.0 / (2.0 * root);
    let (se, we) = (k * params.s_jump, k * params.w_jump);
    Ok([
        [-1.0 / params.tau_s + se * dr_ds, se * dr_dw],
        [we * dr_ds, -1.0 / params.tau_w + we * dr_dw],
    ])
}

pub const HYPERBOLICITY_TOL: f64 = 1e-10;

pub fn kind_from_trace_det(tr: f64, det: f64) -> EquilibriumKind {
    if tr.abs() < HYPERBOLICITY_TOL || det.abs() < HYPERBOLICITY_TOL {
        return EquilibriumKind::NonHyperbolic;
    }
    if det < 0.0 {
        return EquilibriumKind::Saddle;
    }
    let focus = tr * tr - 4.0 * det < 0.0;
    match (tr < 0.0, focus) {
        (true, true) => EquilibriumKind::StableFocus,
        (true, false) => EquilibriumKind::StableNode,
        (false, true) => EquilibriumKind::UnstableFocus,
        (false, false) => EquilibriumKind::UnstableNode,
    }
}

/// Fills trace, determinant and kind. Non-real equilibria are returned
/// unchanged apart from trace and determinant when available.
pub fn classify(params: &ModelParams, eq: &Equilibrium) -> Equilibrium {
    let mut out = *eq;
    if eq.branch == Branch::E0 {
        let t = trivial_equilibrium(params);
        out.trace = t.trace;
        out.det = t.det;
        if eq.reality == Reality::Real {
            out.kind = Some(kind_from_trace_det(t.trace, t.det));
        }
        return out;
    }
    if let Ok(j) = jacobian(params, eq.point) {
        out.trace = j[0][0] + j[1][1];
        out.det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if eq.reality == Reality::Real {
            out.kind = Some(kind_from_trace_det(out.trace, out.det));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BebType {
    Persistence,
    HomoclinicPersistence,
    #[serde(rename = "SNIC_BEB")]
    SnicBeb,
    NonsmoothSaddleNode,
}

/// Type of the boundary equilibrium bifurcation crossed at `I = I_rh` for
/// coupling `g`.
///
/// `fold_threshold` is the coupling above which the saddle-node BEB is no
/// longer on an invariant circle (the global codimension-two point, or `ĝ`
/// as a proxy); it is only consulted when `g* < g` and `ḡ < g*`.
pub fn beb_classify(params: &ModelParams, g: f64, fold_threshold: Option<f64>) -> Result<BebType> {
    let (d, _) = derive(&params.with_g(g))?;
    if d.g_bar < d.g_star {
        if g < d.g_bar {
            Ok(BebType::Persistence)
        } else if g < d.g_star {
            Ok(BebType::HomoclinicPersistence)
        } else {
            match fold_threshold {
                None => Err(Error::ThresholdUnavailable),
                Some(t) if g < t => Ok(BebType::SnicBeb),
                Some(_) => Ok(BebType::NonsmoothSaddleNode),
            }
        }
    } else if g < d.g_star {
        Ok(BebType::Persistence)
    } else {
        Ok(BebType::NonsmoothSaddleNode)
    }
}

/// Eigenvalue of the one-dimensional mean field of the slow network
/// (`s = w / eta`) at the equilibrium `w± = eta s±`:
/// `-(lambda_w^2 / tau_w) A2 (1 - beta / (beta ± sqrt(beta^2 + I~)))`.
pub fn slow_network_eigenvalue(params: &ModelParams, branch: Branch) -> Result<Option<f64>> {
    let (d, c) = derive(params)?;
    let rc = reduced_coordinates(params)?;
    let Some((sp, sm)) = rc.roots() else {
        return Ok(None);
    };
    let s = match branch {
        Branch::EPlus => sp,
        Branch::EMinus => sm,
        Branch::E0 => return Ok(Some(-1.0 / params.tau_w)),
    };
    if s <= 0.0 {
        return Ok(None);
    }
    let lw = d.lambda_w;
    Ok(Some(-(lw * lw / params.tau_w) * c.a2(params.g) * (1.0 - rc.beta / s)))
}
