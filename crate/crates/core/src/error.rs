use thiserror::Error;

use crate::models::ModelKind;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("operation not supported for the {0:?} model")]
    UnsupportedModel(ModelKind),

    #[error("quadrature did not reach tolerance after {evaluations} evaluations (estimate {estimate:e}, error {error:e})")]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("root finding failed: {0}")]
    RootFindingFailure(String),

    #[error("no sign change on [{a}, {b}]: f(a) = {fa:e}, f(b) = {fb:e}")]
    BracketInvalid { a: f64, b: f64, fa: f64, fb: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integration did not converge: {0}")]
    NonConvergence(String),

    #[error("membrane potential blew up (v = {v:e}) in neuron {neuron} at t = {t}")]
    BlowUp { neuron: usize, t: f64, v: f64 },

    #[error("state lies on or below the switching manifold (H = {h:e})")]
    OnOrBelowManifold { h: f64 },

    #[error("value {g} is outside the domain [{lo}, {hi}] of the curve")]
    DomainError { g: f64, lo: f64, hi: f64 },

    #[error("no Hopf bifurcation for these parameters (g* = {g_star} <= g_bar = {g_bar})")]
    NoHopfRegime { g_star: f64, g_bar: f64 },

    #[error("no limit cycle found after integrating for {time}")]
    NoCycleFound { time: f64 },

    #[error("the SNIC / fold threshold on I = I_rh has not been computed")]
    ThresholdUnavailable,

    #[error("classification is indeterminate: {0}")]
    Indeterminate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
