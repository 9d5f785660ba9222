//! Assembly of every curve and point into one two-parameter diagram.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::BebType;
use crate::error::Result;
use crate::models::{derive, ModelParams};

use super::curves::{g_hat, i_ah, i_sn, CurvePoint, HopfPoint};
use super::cycles::{grazing_point, snlc_point, stable_cycle_persists, CycleOptions, GrazingKind};
use super::nonsmooth::{codim2_points, global_grazing_point, Codim2Label, GlobalPointOptions, LabeledPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrazingEntry {
    pub g: f64,
    pub current: f64,
    pub kind: GrazingKind,
}

/// Stretch of the line `I = I_rh` with one BEB type; `label` is `None`
/// where the type depends on a threshold that was not computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BebSegment {
    pub g_lo: f64,
    pub g_hi: f64,
    pub label: Option<BebType>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveFailure {
    pub curve: String,
    pub g: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BifurcationDiagram {
    pub i_rh: f64,
    pub sn_curve: Vec<CurvePoint>,
    pub hopf_curve: Vec<HopfPoint>,
    pub grazing_curve: Vec<GrazingEntry>,
    pub snlc_curve: Vec<CurvePoint>,
    pub beb_line: Vec<BebSegment>,
    pub codim2: Vec<LabeledPoint>,
    pub codim3: Option<LabeledPoint>,
    pub failures: Vec<CurveFailure>,
}

#[derive(Debug, Clone, Copy)]
pub struct DiagramOptions {
    /// Compute grazing and saddle-node-of-cycles curves by simulation.
    pub cycles: bool,
    /// Search for the global grazing point on `I = I_rh`.
    pub global_point: Option<GlobalPointOptions>,
    pub cycle: CycleOptions,
    /// Width of the current window above the Hopf curve searched for the
    /// cycle curves.
    pub current_span: f64,
}

impl Default for DiagramOptions {
    fn default() -> Self {
        Self {
            cycles: false,
            global_point: None,
            cycle: CycleOptions::default(),
            current_span: 0.5,
        }
    }
}

/// Cycle curves at one coupling inside the Hopf lobe: the saddle-node of
/// cycles first, then grazing of the unstable cycle below it.
fn cycle_curves_at(params: &ModelParams, g: f64, opts: &DiagramOptions) -> (Result<f64>, Result<GrazingEntry>) {
    let c = match derive(&params.with_g(g)) {
        Ok((_, c)) => c,
        Err(e) => return (Err(e.clone()), Err(e)),
    };
    let i_hopf = i_ah(&c, g);
    let mut hi = i_hopf + opts.current_span;
    let snlc = (|| {
        // shrink the window until its top no longer carries the stable cycle
        while stable_cycle_persists(&params.with_point(g, hi), &opts.cycle)? {
            hi += opts.current_span;
        }
        snlc_point(params, g, (i_hopf, hi), &opts.cycle)
    })();
    let grazing = match &snlc {
        Ok(i_snlc) => {
            let lo = i_hopf + 0.1 * (i_snlc - i_hopf);
            grazing_point(params, g, (lo, *i_snlc), false, &opts.cycle).map(|gp| GrazingEntry {
                g,
                current: gp.current,
                kind: gp.kind,
            })
        }
        Err(e) => Err(e.clone()),
    };
    (snlc, grazing)
}

/// Evaluates all curves on `g_grid` and collects the labelled points.
/// Curve-level failures are recorded in `failures` rather than aborting.
pub fn assemble_diagram(params: &ModelParams, g_grid: &[f64], opts: &DiagramOptions) -> Result<BifurcationDiagram> {
    let (d, c) = derive(params)?;
    let mut diag = BifurcationDiagram {
        i_rh: d.i_rh,
        ..BifurcationDiagram::default()
    };
    let hopf_regime = d.g_bar < d.g_star;
    let gh = g_hat(params)?;

    for &g in g_grid {
        if g >= d.g_star {
            diag.sn_curve.push(CurvePoint { g, current: i_sn(&c, g) });
        }
        if hopf_regime && g >= d.g_bar {
            let current = i_ah(&c, g);
            // e+ only exists above the saddle-node curve
            if g < d.g_star || current >= i_sn(&c, g) {
                let bt_candidate = g >= d.g_star && (current - i_sn(&c, g)).abs() < 1e-9;
                diag.hopf_curve.push(HopfPoint { g, current, bt_candidate });
            }
        }
    }

    if opts.cycles && hopf_regime {
        let upper = gh.unwrap_or(f64::INFINITY);
        let lobe: Vec<f64> = g_grid.iter().copied().filter(|&g| g > d.g_bar && g < upper).collect();
        let results: Vec<_> = lobe.par_iter().map(|&g| (g, cycle_curves_at(params, g, opts))).collect();
        for (g, (snlc, grazing)) in results {
            match snlc {
                Ok(current) => diag.snlc_curve.push(CurvePoint { g, current }),
                Err(e) => diag.failures.push(CurveFailure {
                    curve: "snlc".into(),
                    g,
                    message: e.to_string(),
                }),
            }
            match grazing {
                Ok(entry) => diag.grazing_curve.push(entry),
                Err(e) => diag.failures.push(CurveFailure {
                    curve: "grazing".into(),
                    g,
                    message: e.to_string(),
                }),
            }
        }
    }

    match codim2_points(params, None) {
        Ok(points) => {
            for p in points {
                if p.label == Codim2Label::Codim3 {
                    diag.codim3 = Some(p);
                } else {
                    diag.codim2.push(p);
                }
            }
        }
        Err(e) => diag.failures.push(CurveFailure {
            curve: "codim2".into(),
            g: f64::NAN,
            message: e.to_string(),
        }),
    }

    if let Some(global) = &opts.global_point {
        match global_grazing_point(params, global) {
            Ok(Some(g)) => diag.codim2.push(LabeledPoint {
                label: Codim2Label::GlobalGrazing,
                g,
                current: d.i_rh,
            }),
            Ok(None) => {}
            Err(e) => diag.failures.push(CurveFailure {
                curve: "global_grazing".into(),
                g: f64::NAN,
                message: e.to_string(),
            }),
        }
    }

    let global = diag
        .codim2
        .iter()
        .find(|p| p.label == Codim2Label::GlobalGrazing)
        .map(|p| p.g);
    diag.beb_line = beb_segments(d.g_bar, d.g_star, global);
    Ok(diag)
}

fn beb_segments(g_bar: f64, g_star: f64, threshold: Option<f64>) -> Vec<BebSegment> {
    let seg = |g_lo, g_hi, label| BebSegment { g_lo, g_hi, label };
    if g_star <= g_bar {
        return vec![
            seg(0.0, g_star, Some(BebType::Persistence)),
            seg(g_star, f64::INFINITY, Some(BebType::NonsmoothSaddleNode)),
        ];
    }
    let mut out = vec![
        seg(0.0, g_bar, Some(BebType::Persistence)),
        seg(g_bar, g_star, Some(BebType::HomoclinicPersistence)),
    ];
    match threshold {
        Some(t) => {
            out.push(seg(g_star, t, Some(BebType::SnicBeb)));
            out.push(seg(t, f64::INFINITY, Some(BebType::NonsmoothSaddleNode)));
        }
        None => out.push(seg(g_star, f64::INFINITY, None)),
    }
    out
}
