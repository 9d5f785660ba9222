//! Bifurcation structure of the reduced mean-field system in the `(g, I)`
//! plane: smooth curves in closed form, limit cycles by simulation and the
//! non-smooth points where both meet the switching manifold.

pub mod curves;
pub mod cycles;
pub mod diagram;
pub mod nonsmooth;

pub use crate::meanfield::LimitCycleSummary;
pub use curves::{bt_points, g_hat, hopf_curve, saddle_node_curve, tangency_check, BtPoints, CurvePoint, HopfPoint};
pub use cycles::{grazing_point, snlc_point, track_limit_cycle, CycleOptions, GrazingKind, GrazingPoint};
pub use diagram::{assemble_diagram, BifurcationDiagram, DiagramOptions};
pub use nonsmooth::{codim2_points, homoclinic_return, Codim2Label, LabeledPoint};
