use pwsmf::netsim::{
    detect_regime, ramp_protocol, simulate_network, simulate_slow_network, NetworkInit, NetworkOptions, RampOptions,
    Regime,
};
use pwsmf::ModelParams;

fn tonic() -> ModelParams {
    ModelParams::izhikevich().with_point(1.2308, 0.4260)
}

#[test]
fn same_seed_same_trace() {
    let opts = NetworkOptions::new(200, 50.0, 0.01);
    let a = simulate_network(&tonic(), &opts, &NetworkInit::Seeded(5)).unwrap();
    let b = simulate_network(&tonic(), &opts, &NetworkInit::Seeded(5)).unwrap();
    assert_eq!(a.s, b.s);
    assert_eq!(a.spikes.len(), b.spikes.len());
    let c = simulate_network(&tonic(), &opts, &NetworkInit::Seeded(6)).unwrap();
    assert_ne!(a.s, c.s);
}

#[test]
fn zero_duration_is_an_empty_run() {
    let t = simulate_network(&tonic(), &NetworkOptions::new(10, 0.0, 0.01), &NetworkInit::Seeded(1)).unwrap();
    assert!(t.spikes.is_empty());
    assert!(t.times.len() <= 1);
}

#[test]
fn synaptic_variable_stays_non_negative() {
    let t = simulate_network(&tonic(), &NetworkOptions::new(300, 200.0, 0.01), &NetworkInit::Seeded(2)).unwrap();
    assert!(t.s.iter().all(|s| *s >= 0.0));
    assert!(!t.spikes.is_empty());
}

#[test]
fn silent_below_rheobase() {
    let p = ModelParams::izhikevich().with_point(1.2308, 0.0);
    let opts = NetworkOptions::new(100, 1000.0, 0.01);
    let t = simulate_network(&p, &opts, &NetworkInit::Seeded(3)).unwrap();
    assert_eq!(detect_regime(&t, 300.0).unwrap(), Regime::Quiescent);
}

#[test]
fn slow_network_fires_above_rheobase() {
    let p = ModelParams::izhikevich().with_point(1.0, 0.3);
    let t = simulate_slow_network(&p, &NetworkOptions::new(100, 500.0, 0.01), &NetworkInit::Seeded(4)).unwrap();
    assert!(t.rate_between(250.0, 500.0) > 0.0);
}

#[test]
fn ramps_run_in_both_directions() {
    let p = ModelParams::izhikevich().with_g(1.0);
    let opts = RampOptions { n: 50, dt: 0.02, settle: 50.0, record_dt: Some(1.0), seed: 9, slow: false };
    let (up, down) = ramp_protocol(&p, 0.0, 0.3, 0.3 / 200.0, &opts).unwrap();
    assert!(up.current.first().unwrap() < up.current.last().unwrap());
    assert!(down.current.first().unwrap() > down.current.last().unwrap());
    assert!(ramp_protocol(&p, 0.0, 0.3, -1.0, &opts).is_err());
}
