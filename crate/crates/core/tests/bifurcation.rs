use proptest::prelude::*;

use pwsmf::bifurcation::curves::{i_ah, i_sn};
use pwsmf::bifurcation::{
    assemble_diagram, bt_points, codim2_points, g_hat, hopf_curve, homoclinic_return, saddle_node_curve,
    tangency_check, track_limit_cycle, Codim2Label, CycleOptions, DiagramOptions,
};
use pwsmf::equilibria::{beb_classify, BebType};
use pwsmf::models::derive;
use pwsmf::{Error, ModelParams};

proptest! {
    #[test]
    fn saddle_node_curve_stays_below_rheobase(g in 1.72f64..10.0) {
        let p = ModelParams::izhikevich();
        let (d, c) = derive(&p).unwrap();
        prop_assert!(i_sn(&c, g) < d.i_rh);
    }

    #[test]
    fn hopf_curve_lies_above_saddle_node_curve(g in 1.72f64..3.3) {
        let (_, c) = derive(&ModelParams::izhikevich()).unwrap();
        prop_assert!(i_ah(&c, g) >= i_sn(&c, g));
    }

    #[test]
    fn homoclinic_return_solves_its_equation(g in 0.2f64..3.0, s0 in 0.01f64..0.5) {
        let p = ModelParams::izhikevich();
        let (d, _) = derive(&p).unwrap();
        let gamma = p.tau_s / p.tau_w;
        let k = g * d.v_star_prime_0 / (2.0 * (p.e_r - d.v_star_0));
        if let Some(s) = homoclinic_return(&p, g, s0).unwrap() {
            let lhs = (1.0 - k * s0) * (s / s0).powf(gamma - 1.0);
            prop_assert!((lhs - (1.0 - k * s)).abs() < 1e-10);
            prop_assert!((s - s0).abs() > 1e-9 * s0);
        }
    }
}

#[test]
fn curves_respect_their_domains() {
    let p = ModelParams::izhikevich();
    let (d, _) = derive(&p).unwrap();
    assert!(matches!(saddle_node_curve(&p, 0.0, 3.0, 10), Err(Error::DomainError { .. })));
    assert!(matches!(hopf_curve(&p, 0.0, 1.0, 10), Err(Error::DomainError { .. })));
    let slow = ModelParams { tau_w: 1.0, ..p.clone() };
    assert!(matches!(hopf_curve(&slow, 1.0, 2.0, 10), Err(Error::NoHopfRegime { .. })));
    let sn = saddle_node_curve(&p, d.g_star, 4.0, 5).unwrap();
    assert!((sn[0].current - d.i_rh).abs() < 1e-12);
}

#[test]
fn hopf_curve_returns_to_rheobase_at_g_hat() {
    let p = ModelParams::izhikevich();
    let (d, c) = derive(&p).unwrap();
    let gh = g_hat(&p).unwrap().unwrap();
    assert!(gh > d.g_star);
    assert!((i_ah(&c, gh) - d.i_rh).abs() < 1e-12);
    assert!((i_ah(&c, d.g_bar) - d.i_rh).abs() < 1e-12);
}

#[test]
fn tangency_identity_holds_at_g_star() {
    let p = ModelParams::izhikevich();
    let (d, _) = derive(&p).unwrap();
    let (eta, rhs) = tangency_check(&p.with_g(d.g_star)).unwrap();
    assert!((eta - rhs).abs() < 1e-12);
}

#[test]
fn bogdanov_takens_roots_and_degenerate_time_scales() {
    let p = ModelParams { tau_w: 3.0, ..ModelParams::izhikevich() };
    assert_eq!(bt_points(&p).unwrap().g.len(), 2);
    let same = ModelParams { tau_w: 2.6, ..ModelParams::izhikevich() };
    assert!(bt_points(&same).unwrap().codim3);
}

#[test]
fn codim2_points_sit_on_the_rheobase_line() {
    let p = ModelParams::izhikevich();
    let (d, _) = derive(&p).unwrap();
    let pts = codim2_points(&p, None).unwrap();
    let sn = pts.iter().find(|x| x.label == Codim2Label::SaddleNodeBeb).unwrap();
    let hopf = pts.iter().find(|x| x.label == Codim2Label::HopfBeb).unwrap();
    assert!((sn.g - d.g_star).abs() < 1e-12 && (hopf.g - d.g_bar).abs() < 1e-12);
    assert!(pts.iter().all(|x| (x.current - d.i_rh).abs() < 1e-12));
}

#[test]
fn beb_types_need_a_threshold_above_g_star() {
    let p = ModelParams::izhikevich();
    assert_eq!(beb_classify(&p, 0.01, None).unwrap(), BebType::Persistence);
    assert_eq!(beb_classify(&p, 1.0, None).unwrap(), BebType::HomoclinicPersistence);
    assert!(matches!(beb_classify(&p, 2.0, None), Err(Error::ThresholdUnavailable)));
    assert_eq!(beb_classify(&p, 2.0, Some(3.0)).unwrap(), BebType::SnicBeb);
    assert_eq!(beb_classify(&p, 3.5, Some(3.0)).unwrap(), BebType::NonsmoothSaddleNode);
}

#[test]
fn unstable_smooth_cycle_inside_the_hopf_lobe() {
    let (_, c) = derive(&ModelParams::izhikevich()).unwrap();
    let g = 1.0;
    let p = ModelParams::izhikevich().with_point(g, i_ah(&c, g) + 0.005);
    let cy = track_limit_cycle(&p, false, None, &CycleOptions::default()).unwrap();
    assert!(!cy.stable && !cy.nonsmooth && cy.min_h > 0.0);
}

#[test]
fn diagram_without_cycles_lists_closed_form_curves() {
    let p = ModelParams::izhikevich();
    let grid: Vec<f64> = (0..=40).map(|i| 0.1 * i as f64).collect();
    let d = assemble_diagram(&p, &grid, &DiagramOptions::default()).unwrap();
    assert!(!d.sn_curve.is_empty() && !d.hopf_curve.is_empty());
    assert!(d.grazing_curve.is_empty() && d.snlc_curve.is_empty());
    assert_eq!(d.beb_line.len(), 3);
    assert!(d.failures.is_empty());
}
