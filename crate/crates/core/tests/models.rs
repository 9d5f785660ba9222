use proptest::prelude::*;

use pwsmf::models::{derive, firing_rate_full, firing_rate_quadrature, firing_rate_reduced, ModelKind};
use pwsmf::ModelParams;

fn models() -> impl Strategy<Value = ModelParams> {
    prop_oneof![
        Just(ModelParams::izhikevich()),
        Just(ModelParams::adex()),
        Just(ModelParams::quartic()),
    ]
}

proptest! {
    #[test]
    fn coefficient_functions_keep_their_signs(p in models(), g in 0.0f64..10.0) {
        let (_, c) = derive(&p).unwrap();
        prop_assert!(c.a2(g) > 0.0);
        prop_assert!(c.m(g) > 0.0);
        prop_assert!(c.n(g) > 0.0);
        prop_assert!(c.n(g) < c.m(g));
    }

    #[test]
    fn rheobase_derivatives_match_differences(p in models(), g in 0.0f64..4.0, s in 0.01f64..2.0, w in 0.0f64..1.0) {
        let p = p.with_g(g);
        let h = 1e-6;
        let fd_s = (p.rheobase(s + h, w) - p.rheobase(s - h, w)) / (2.0 * h);
        let fd_w = (p.rheobase(s, w + h) - p.rheobase(s, w - h)) / (2.0 * h);
        prop_assert!((fd_s - p.rheobase_ds(s)).abs() < 1e-6 * (1.0 + fd_s.abs()));
        prop_assert!((fd_w - 1.0).abs() < 1e-6);
    }

    #[test]
    fn v_star_minimizes_g(p in models(), g in 0.0f64..4.0, s in 0.0f64..2.0, dv in -0.5f64..0.5) {
        let p = p.with_g(g);
        let vs = p.v_star(s);
        prop_assert!(p.f_prime(vs) - g * s < 1e-9 * (1.0 + g * s));
        prop_assert!(p.g_of_v(vs + dv, s, 0.1) >= p.g_of_v(vs, s, 0.1) - 1e-12);
    }

    #[test]
    fn reduced_rate_is_continuous_across_the_manifold(p in models(), s in 0.0f64..1.0, eps in 1e-14f64..1e-10) {
        let w = p.current - p.rheobase(s, 0.0);
        let k = p.rate_gain();
        let inside = firing_rate_reduced(&p, s, w - eps, k);
        prop_assert!(inside <= k * (2.0 * eps).sqrt() + 1e-15);
        prop_assert_eq!(firing_rate_reduced(&p, s, w + eps, k), 0.0);
    }

    #[test]
    fn izhikevich_closed_form_matches_quadrature(g in 0.0f64..2.0, i in 0.0f64..1.0, s in 0.0f64..0.5, w in 0.0f64..0.3) {
        let p = ModelParams::izhikevich().with_point(g, i);
        prop_assume!(p.switching_h(s, w) > 1e-6);
        let exact = firing_rate_full(&p, s, w).unwrap();
        let quad = firing_rate_quadrature(&p, s, w).unwrap();
        prop_assert!(((exact - quad) / exact).abs() < 1e-9, "{} vs {}", exact, quad);
    }
}

#[test]
fn full_rate_vanishes_below_manifold() {
    for p in [ModelParams::izhikevich(), ModelParams::adex(), ModelParams::quartic()] {
        let w = p.current - p.rheobase(0.1, 0.0) + 0.01;
        assert_eq!(firing_rate_full(&p, 0.1, w).unwrap(), 0.0);
    }
}

#[test]
fn lif_is_not_analysable() {
    let p = ModelParams {
        kind: ModelKind::Lif,
        tau_m: 1.0,
        ..ModelParams::izhikevich()
    };
    assert!(derive(&p).is_err());
}

#[test]
fn thresholds_of_the_izhikevich_preset() {
    let (d, _) = derive(&ModelParams::izhikevich()).unwrap();
    assert!((d.i_rh - 0.0961).abs() < 1e-15);
    assert!((d.g_star - 1.7119565217391304).abs() < 1e-12);
    assert!((d.g_bar - 0.03423913043478261).abs() < 1e-14);
}

#[test]
fn parameter_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = ModelParams::izhikevich();
    let toml_path = dir.path().join("m.toml");
    std::fs::write(&toml_path, toml::to_string(&p).unwrap()).unwrap();
    assert_eq!(ModelParams::load(&toml_path).unwrap(), p);
    let json_path = dir.path().join("m.json");
    std::fs::write(&json_path, serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(ModelParams::load(&json_path).unwrap(), p);
    std::fs::write(&toml_path, "kind = \"izhikevich\"\n").unwrap();
    assert!(ModelParams::load(&toml_path).is_err());
}
