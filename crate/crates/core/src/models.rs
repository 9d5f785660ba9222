//! Neuron models of the form `v' = F(v) - w + I + g s (e_r - v)` and the
//! closed-form quantities derived from them.
//!
//! `G(v, s, w) = F(v) - w + I + g s (e_r - v)` is minimized over `v` at
//! `v*(s)`; its minimum `H(s, w) = I - I*(s, w)` defines the switching
//! manifold `H = 0` between the quiescent and firing regions of the
//! mean-field phase plane.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{self, QuadratureOptions};

/// Below this value of `H` the firing rate is reported as exactly zero.
pub const H_ZERO: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// `F(v) = -v / tau_m`
    Lif,
    /// `F(v) = v (v - alpha)`
    Izhikevich,
    /// `F(v) = e^v - v`
    Adex,
    /// `F(v) = v^4 - 2 a v`
    Quartic,
}

/// Dimensionless constants of one neuron model plus network coupling.
///
/// Field names double as the keys of the TOML/JSON parameter files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub g: f64,
    #[serde(rename = "I")]
    pub current: f64,
    pub tau_s: f64,
    pub tau_w: f64,
    pub s_jump: f64,
    pub w_jump: f64,
    pub e_r: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub a_quartic: f64,
    #[serde(default)]
    pub tau_m: f64,
    pub v_peak: f64,
    pub v_reset: f64,
    /// Single-neuron adaptation rate `a`; defaults to `1 / tau_w`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_adapt: Option<f64>,
    /// Subthreshold adaptation coupling `b`; defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_adapt: Option<f64>,
    /// Gain `k` of the reduced rate `k sqrt(H)`; defaults per model, see
    /// [`ModelParams::rate_gain`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_gain: Option<f64>,
}

const IZHIKEVICH_TOML: &str = include_str!("../presets/izhikevich.toml");
const ADEX_TOML: &str = include_str!("../presets/adex.toml");
const QUARTIC_TOML: &str = include_str!("../presets/quartic.toml");

impl ModelParams {
    /// Izhikevich network constants (CA3 fit) at `g = 1.2308`, `I = 0.4260`.
    pub fn izhikevich() -> Self {
        Self::from_toml_str(IZHIKEVICH_TOML).expect("bundled preset parses")
    }

    pub fn adex() -> Self {
        Self::from_toml_str(ADEX_TOML).expect("bundled preset parses")
    }

    pub fn quartic() -> Self {
        Self::from_toml_str(QUARTIC_TOML).expect("bundled preset parses")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "izhikevich" => Some(Self::izhikevich()),
            "adex" => Some(Self::adex()),
            "quartic" => Some(Self::quartic()),
            _ => None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let p: Self = toml::from_str(s).map_err(|e| Error::InvalidParams(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s).map_err(|e| Error::InvalidParams(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// Loads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParams(format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }

    pub fn with_current(&self, current: f64) -> Self {
        Self {
            current,
            ..self.clone()
        }
    }

    pub fn with_point(&self, g: f64, current: f64) -> Self {
        Self {
            g,
            current,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        let finite = [
            self.g,
            self.current,
            self.tau_s,
            self.tau_w,
            self.s_jump,
            self.w_jump,
            self.e_r,
            self.alpha,
            self.a_quartic,
            self.tau_m,
            self.v_peak,
            self.v_reset,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all parameters must be finite".into());
        }
        if self.g < 0.0 {
            return bad(format!("g must be >= 0, got {}", self.g));
        }
        for (name, v) in [
            ("tau_s", self.tau_s),
            ("tau_w", self.tau_w),
            ("s_jump", self.s_jump),
            ("w_jump", self.w_jump),
        ] {
            if v <= 0.0 {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        if self.kind == ModelKind::Lif && self.tau_m <= 0.0 {
            return bad(format!("tau_m must be > 0 for LIF, got {}", self.tau_m));
        }
        if self.kind == ModelKind::Quartic && self.a_quartic <= 0.0 {
            return bad(format!("a_quartic must be > 0, got {}", self.a_quartic));
        }
        if let Some(a) = self.a_adapt {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("a_adapt must be > 0, got {a}"));
            }
        }
        if self.rate_gain.is_some_and(|k| !(k > 0.0 && k.is_finite())) {
            return bad("rate_gain must be > 0".into());
        }
        if self.v_reset >= self.v_peak {
            return bad(format!("v_reset ({}) must be below v_peak ({})", self.v_reset, self.v_peak));
        }
        if self.kind != ModelKind::Lif {
            let v0 = self.v_star(0.0);
            if self.e_r <= v0 {
                return bad(format!("e_r ({}) must exceed v*(0) = {v0}", self.e_r));
            }
        }
        Ok(())
    }

    pub fn adaptation_rate(&self) -> f64 {
        self.a_adapt.unwrap_or(1.0 / self.tau_w)
    }

    pub fn adaptation_coupling(&self) -> f64 {
        self.b_adapt.unwrap_or(0.0)
    }

    /// Gain `k` in the reduced rate `k sqrt(H)`: 1/2 for Izhikevich (global
    /// fit), `1/pi` (saddle-node normal form) otherwise.
    pub fn rate_gain(&self) -> f64 {
        self.rate_gain.unwrap_or(match self.kind {
            ModelKind::Izhikevich => 0.5,
            _ => std::f64::consts::FRAC_1_PI,
        })
    }

    pub fn f(&self, v: f64) -> f64 {
        match self.kind {
            ModelKind::Lif => -v / self.tau_m,
            ModelKind::Izhikevich => v * (v - self.alpha),
            ModelKind::Adex => v.exp() - v,
            ModelKind::Quartic => v.powi(4) - 2.0 * self.a_quartic * v,
        }
    }

    pub fn f_prime(&self, v: f64) -> f64 {
        match self.kind {
            ModelKind::Lif => -1.0 / self.tau_m,
            ModelKind::Izhikevich => 2.0 * v - self.alpha,
            ModelKind::Adex => v.exp() - 1.0,
            ModelKind::Quartic => 4.0 * v.powi(3) - 2.0 * self.a_quartic,
        }
    }

    pub fn f_second(&self, v: f64) -> f64 {
        match self.kind {
            ModelKind::Lif => 0.0,
            ModelKind::Izhikevich => 2.0,
            ModelKind::Adex => v.exp(),
            ModelKind::Quartic => 12.0 * v * v,
        }
    }

    /// `G(v, s, w)`, the denominator of the firing-rate integral.
    pub fn g_of_v(&self, v: f64, s: f64, w: f64) -> f64 {
        self.f(v) - w + self.current + self.g * s * (self.e_r - v)
    }

    /// Minimizer of `G` over `v`, from `F'(v*) = g s` (right endpoint for LIF).
    pub fn v_star(&self, s: f64) -> f64 {
        let gs = self.g * s;
        match self.kind {
            ModelKind::Lif => self.v_peak,
            ModelKind::Izhikevich => 0.5 * (self.alpha + gs),
            ModelKind::Adex => gs.ln_1p(),
            ModelKind::Quartic => ((gs + 2.0 * self.a_quartic) / 4.0).cbrt(),
        }
    }

    /// The `(s, w)`-dependent rheobase `I*(s, w)`.
    pub fn rheobase(&self, s: f64, w: f64) -> f64 {
        let gs = self.g * s;
        let shape = match self.kind {
            ModelKind::Lif => self.v_peak * (1.0 / self.tau_m + gs),
            ModelKind::Izhikevich => 0.25 * (self.alpha + gs).powi(2),
            ModelKind::Adex => (1.0 + gs) * (gs.ln_1p() - 1.0),
            ModelKind::Quartic => 3.0 * ((gs + 2.0 * self.a_quartic) / 4.0).powf(4.0 / 3.0),
        };
        w - gs * self.e_r + shape
    }

    /// `dI*/ds = -g (e_r - v*(s))`; `dI*/dw = 1`.
    pub fn rheobase_ds(&self, s: f64) -> f64 {
        -self.g * (self.e_r - self.v_star(s))
    }

    /// `H(s, w) = I - I*(s, w)`.
    pub fn switching_h(&self, s: f64, w: f64) -> f64 {
        self.current - self.rheobase(s, w)
    }

    /// Rheobase of the uncoupled, non-adapting neuron, `-F(v*(0))`.
    pub fn i_rh(&self) -> f64 {
        self.rheobase(0.0, 0.0)
    }
}

/// `k sqrt(H)` inside the firing region, 0 outside.
pub fn firing_rate_reduced(params: &ModelParams, s: f64, w: f64, k: f64) -> f64 {
    let h = params.switching_h(s, w);
    if h <= H_ZERO {
        0.0
    } else {
        k * h.sqrt()
    }
}

/// Reciprocal of `∫ dv / G(v, s, w)` over `[v_reset, v_peak]`, or 0 when
/// `H <= 0`. Closed form for LIF and Izhikevich, quadrature otherwise.
pub fn firing_rate_full(params: &ModelParams, s: f64, w: f64) -> Result<f64> {
    let h = params.switching_h(s, w);
    if h <= H_ZERO {
        return Ok(0.0);
    }
    let gs = params.g * s;
    match params.kind {
        ModelKind::Izhikevich => {
            let root = h.sqrt();
            let vs = params.v_star(s);
            let span = ((params.v_peak - vs) / root).atan() - ((params.v_reset - vs) / root).atan();
            Ok(root / span)
        }
        ModelKind::Lif => {
            let slope = 1.0 / params.tau_m + gs;
            let drive = params.current + gs * params.e_r - w;
            let num = -params.v_reset * slope + drive;
            let den = -params.v_peak * slope + drive;
            Ok(slope / (num / den).ln())
        }
        ModelKind::Adex | ModelKind::Quartic => firing_rate_quadrature(params, s, w),
    }
}

/// Firing rate by adaptive quadrature, valid for every model.
///
/// Around the minimizer the integrand is close to `1 / (H + F'' u^2 / 2)`;
/// substituting `u = a tan(theta)` with `a = sqrt(2 H / F''(v*))` flattens
/// it, so the integral stays cheap as `H -> 0+`. The interval is split at
/// `v*` when the minimizer is interior.
pub fn firing_rate_quadrature(params: &ModelParams, s: f64, w: f64) -> Result<f64> {
    let h = params.switching_h(s, w);
    if h <= H_ZERO {
        return Ok(0.0);
    }
    let opts = QuadratureOptions::default();
    let (lo, hi) = (params.v_reset, params.v_peak);
    let vs = params.v_star(s);
    let curvature = params.f_second(vs);
    let total = if curvature > 0.0 && vs.is_finite() {
        let a = (2.0 * h / curvature).sqrt();
        let integrand = |theta: f64| {
            let t = theta.tan();
            let c = theta.cos();
            a / (c * c * params.g_of_v(vs + a * t, s, w))
        };
        let th_lo = ((lo - vs) / a).atan();
        let th_hi = ((hi - vs) / a).atan();
        if th_lo < 0.0 && th_hi > 0.0 {
            quadrature::integrate(integrand, th_lo, 0.0, opts)? + quadrature::integrate(integrand, 0.0, th_hi, opts)?
        } else {
            quadrature::integrate(integrand, th_lo, th_hi, opts)?
        }
    } else {
        quadrature::integrate(|v| 1.0 / params.g_of_v(v, s, w), lo, hi, opts)?
    };
    Ok(1.0 / total)
}

/// Range of `g s` on which the full Izhikevich rate vanishes continuously at
/// the switching manifold: `(2 v_reset - alpha, 2 v_peak - alpha)`.
pub fn discontinuity_window(params: &ModelParams) -> Result<(f64, f64)> {
    if params.kind != ModelKind::Izhikevich {
        return Err(Error::UnsupportedModel(params.kind));
    }
    Ok((2.0 * params.v_reset - params.alpha, 2.0 * params.v_peak - params.alpha))
}

/// Scalar constants entering the equilibrium and bifurcation formulas.
///
/// `lambda_s` and `lambda_w` use the effective jumps `k s_jump` and
/// `k w_jump` of the reduced system, so that nontrivial equilibria satisfy
/// `s = lambda_s sqrt(H)` for the system that is actually integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub rate_gain: f64,
    pub lambda_s: f64,
    pub lambda_w: f64,
    pub eta: f64,
    pub i_rh: f64,
    pub v_star_0: f64,
    pub v_star_prime_0: f64,
    pub g_star: f64,
    pub g_bar: f64,
}

/// Weak-coupling coefficient functions of `g` (exact for Izhikevich).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientFns {
    d: DerivedParams,
    tau_s: f64,
    tau_w: f64,
    s_eff: f64,
    current: f64,
}

impl CoefficientFns {
    pub fn derived(&self) -> &DerivedParams {
        &self.d
    }

    fn gap(&self) -> f64 {
        // e_r - v*(0); recovered from g_star = eta / gap
        self.d.eta / self.d.g_star
    }

    pub fn a2(&self, g: f64) -> f64 {
        1.0 / (self.d.lambda_s * self.d.lambda_s) + 0.5 * self.d.v_star_prime_0 * g * g
    }

    pub fn a1(&self, g: f64) -> f64 {
        self.d.eta - g * self.gap()
    }

    pub fn a0(&self) -> f64 {
        self.d.i_rh - self.current
    }

    pub fn a0_at(&self, current: f64) -> f64 {
        self.d.i_rh - current
    }

    pub fn m(&self, g: f64) -> f64 {
        self.gap() / (2.0 * self.a2(g))
    }

    pub fn n(&self, g: f64) -> f64 {
        let ls = self.d.lambda_s * self.s_eff;
        let num = 0.5 * ls * self.gap();
        let den = 1.0 / self.tau_s + 1.0 / self.tau_w + 0.5 * ls * g * g * self.d.v_star_prime_0;
        num / den
    }

    /// Positive prefactor of the trace at `e+`:
    /// `1/tau_s + 1/tau_w + lambda_s s_jump g^2 v*'(0) / 2`.
    pub fn trace_prefactor(&self, g: f64) -> f64 {
        1.0 / self.tau_s + 1.0 / self.tau_w + 0.5 * self.d.lambda_s * self.s_eff * g * g * self.d.v_star_prime_0
    }
}

/// Derived constants and coefficient functions. The weak-coupling machinery
/// needs `F'' > 0`, so the LIF model is rejected.
pub fn derive(params: &ModelParams) -> Result<(DerivedParams, CoefficientFns)> {
    if params.kind == ModelKind::Lif {
        return Err(Error::UnsupportedModel(ModelKind::Lif));
    }
    let k = params.rate_gain();
    let lambda_s = params.tau_s * params.s_jump * k;
    let lambda_w = params.tau_w * params.w_jump * k;
    let eta = lambda_w / lambda_s;
    let v0 = params.v_star(0.0);
    let gap = params.e_r - v0;
    let d = DerivedParams {
        rate_gain: k,
        lambda_s,
        lambda_w,
        eta,
        i_rh: -params.f(v0),
        v_star_0: v0,
        v_star_prime_0: 1.0 / params.f_second(v0),
        g_star: eta / gap,
        g_bar: params.w_jump / (params.s_jump * gap),
    };
    let c = CoefficientFns {
        d,
        tau_s: params.tau_s,
        tau_w: params.tau_w,
        s_eff: params.s_jump * k,
        current: params.current,
    };
    Ok((d, c))
}
