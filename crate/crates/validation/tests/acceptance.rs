//! Acceptance suite. Every criterion runs at its stated tolerance and prints
//! one `PASS`/`FAIL` line; the binary exits non-zero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use pwsmf::bifurcation::curves::{i_ah, i_sn};
use pwsmf::bifurcation::{
    g_hat, grazing_point, hopf_curve, homoclinic_return, saddle_node_curve, snlc_point, track_limit_cycle,
    CycleOptions,
};
use pwsmf::equilibria::{
    beb_classify, jacobian, nontrivial_equilibria, Branch, BebType, Equilibrium, Reality, SolveMode,
};
use pwsmf::meanfield::{
    classify_attractor, hausdorff, integrate, integrate_embedded, Attractor, EmbeddedState, IntegrateOptions,
    System,
};
use pwsmf::models::derive;
use pwsmf::netsim::{
    detect_regime, hysteresis_interval, ramp_protocol, simulate_network, NetworkInit, NetworkOptions, RampOptions,
    Regime,
};
use pwsmf::{MeanFieldState, ModelParams};

/// Outcome of one criterion: pass flag plus a one-line summary.
type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn izh(g: f64, current: f64) -> ModelParams {
    ModelParams::izhikevich().with_point(g, current)
}

fn real_branch(eqs: &[Equilibrium], branch: Branch) -> Option<Equilibrium> {
    eqs.iter().copied().find(|e| e.branch == branch && e.reality == Reality::Real)
}

fn e_plus(p: &ModelParams) -> Option<Equilibrium> {
    real_branch(&nontrivial_equilibria(p, SolveMode::FullIzhikevich).ok()?, Branch::EPlus)
}

fn det2(j: &[[f64; 2]; 2]) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

fn mean_field_attractor(system: System, p: &ModelParams) -> Result<Attractor, String> {
    let opts = IntegrateOptions {
        tol: 1e-10,
        ..IntegrateOptions::default()
    };
    let tr = integrate(system, p, MeanFieldState::new(0.05, 0.05), 40.0 * p.tau_w, &opts).map_err(|e| e.to_string())?;
    classify_attractor(&tr, 0.5).map_err(|e| e.to_string())
}

fn regime_reproduction() -> Outcome {
    let g = 1.2308;
    let mut ok = true;
    let mut notes = Vec::new();
    for (current, want) in [(0.4260, Regime::Tonic), (0.1893, Regime::Bursting)] {
        let p = izh(g, current);
        let opts = NetworkOptions {
            record_dt: Some(0.1),
            ..NetworkOptions::new(1000, 4000.0, 0.01)
        };
        let trace = match simulate_network(&p, &opts, &NetworkInit::Seeded(1)) {
            Ok(t) => t,
            Err(e) => return (false, format!("network at I={current}: {e}")),
        };
        let regime = detect_regime(&trace, 1000.0);
        let want_cycle = want == Regime::Bursting;
        let mf: Vec<_> = [System::Full, System::Reduced]
            .into_iter()
            .map(|sys| mean_field_attractor(sys, &p))
            .collect();
        let mf_ok = mf.iter().all(|a| match a {
            Ok(Attractor::LimitCycle(_)) => want_cycle,
            Ok(Attractor::Equilibrium(_)) => !want_cycle,
            _ => false,
        });
        ok &= matches!(regime, Ok(r) if r == want) && mf_ok;
        notes.push(format!("I={current}: network {regime:?}, mean field {mf_ok}"));
        if want == Regime::Tonic {
            let (s, w) = trace.tail_mean(1000.0);
            match e_plus(&p) {
                Some(e) => {
                    let rel = ((s - e.point.s) / e.point.s).abs().max(((w - e.point.w) / e.point.w).abs());
                    ok &= rel < 0.1;
                    notes.push(format!("tonic (s,w) off e+ by {rel:.3e}"));
                }
                None => {
                    ok = false;
                    notes.push("no real e+".into());
                }
            }
        }
    }
    (ok, notes.join("; "))
}

fn equilibrium_oracles() -> Outcome {
    let (d, _) = derive(&ModelParams::izhikevich()).unwrap();
    let mut worst_numeric = 0.0f64;
    let mut worst_weak = 0.0f64;
    let mut mismatched = 0;
    for i in 0..50 {
        for j in 0..50 {
            let g = 4.0 * i as f64 / 49.0;
            let current = d.i_rh - 0.2 + 0.8 * j as f64 / 49.0;
            let p = izh(g, current);
            let sols: Vec<Vec<(Branch, f64)>> = [SolveMode::FullIzhikevich, SolveMode::FullNumeric, SolveMode::WeakCoupling]
                .iter()
                .map(|m| {
                    nontrivial_equilibria(&p, *m)
                        .unwrap()
                        .iter()
                        .map(|e| (e.branch, e.point.s))
                        .collect()
                })
                .collect();
            let compare = |a: &[(Branch, f64)], b: &[(Branch, f64)]| -> Option<f64> {
                (a.len() == b.len()).then(|| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| if x.0 == y.0 { (x.1 - y.1).abs() } else { f64::INFINITY })
                        .fold(0.0, f64::max)
                })
            };
            match (compare(&sols[0], &sols[1]), compare(&sols[0], &sols[2])) {
                (Some(a), Some(b)) => {
                    worst_numeric = worst_numeric.max(a);
                    worst_weak = worst_weak.max(b);
                }
                _ => mismatched += 1,
            }
        }
    }
    (
        mismatched == 0 && worst_numeric < 1e-10 && worst_weak < 1e-12,
        format!("max |closed - bracketed| {worst_numeric:.2e}, max |weak - full| {worst_weak:.2e}, root-count mismatches {mismatched}"),
    )
}

fn jacobian_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut points = 0;
    while points < 100 {
        let p = izh(rng.gen_range(0.0..4.0), rng.gen_range(0.0..1.0));
        let at = MeanFieldState::new(rng.gen_range(0.0..0.6), rng.gen_range(0.0..0.6));
        if p.switching_h(at.s, at.w) < 1e-3 {
            continue;
        }
        points += 1;
        let j = jacobian(&p, at).unwrap();
        let field = pwsmf::meanfield::MeanField::new(System::Reduced, &p);
        let h = 1e-6;
        let fd_s = {
            let (a, b) = (field.eval(at.s + h, at.w), field.eval(at.s - h, at.w));
            [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
        };
        let fd_w = {
            let (a, b) = (field.eval(at.s, at.w + h), field.eval(at.s, at.w - h));
            [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
        };
        let fd = [[fd_s[0], fd_w[0]], [fd_s[1], fd_w[1]]];
        let scale = j.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((j[r][c] - fd[r][c]).abs() / scale);
            }
        }
    }

    let mut violations = 0;
    let mut checked = 0;
    for _ in 0..1000 {
        let p = ModelParams {
            tau_s: rng.gen_range(0.5..10.0),
            tau_w: rng.gen_range(10.0..500.0),
            s_jump: rng.gen_range(0.1..2.0),
            w_jump: rng.gen_range(0.001..0.1),
            alpha: rng.gen_range(0.1..1.0),
            e_r: rng.gen_range(0.8..1.5),
            ..izh(rng.gen_range(0.0..4.0), rng.gen_range(0.0..1.0))
        };
        let Ok(eqs) = nontrivial_equilibria(&p, SolveMode::FullIzhikevich) else {
            continue;
        };
        for e in eqs.iter().filter(|e| e.reality == Reality::Real) {
            let Ok(j) = jacobian(&p, e.point) else { continue };
            checked += 1;
            let det = det2(&j);
            match e.branch {
                Branch::EPlus if det < -1e-12 => violations += 1,
                Branch::EMinus if det > 1e-12 => violations += 1,
                _ => {}
            }
        }
    }
    (
        worst < 1e-6 && violations == 0,
        format!("max rel err {worst:.2e} over 100 points; {violations} det-sign violations in {checked} equilibria"),
    )
}

fn curve_consistency() -> Outcome {
    let base = ModelParams::izhikevich();
    let (d, c) = derive(&base).unwrap();
    let g_top = g_hat(&base).unwrap().unwrap_or(4.0).min(4.0);
    let hopf = hopf_curve(&base, d.g_bar * 1.01, g_top * 0.99, 20).unwrap();
    let mut worst_tr = 0.0f64;
    let mut min_det = f64::INFINITY;
    let mut missing = 0;
    for h in &hopf {
        match e_plus(&izh(h.g, h.current)) {
            Some(e) => {
                worst_tr = worst_tr.max(e.trace.abs());
                min_det = min_det.min(e.det);
            }
            None => missing += 1,
        }
    }
    let sn = saddle_node_curve(&base, d.g_star, 4.0, 20).unwrap();
    let mut worst_det = 0.0f64;
    for pt in &sn {
        let p = izh(pt.g, pt.current);
        let rc = pwsmf::equilibria::reduced_coordinates(&p).unwrap();
        let s = rc.beta;
        if s <= 0.0 {
            continue;
        }
        let eta = d.eta;
        match jacobian(&p, MeanFieldState::new(s, eta * s)) {
            Ok(j) => worst_det = worst_det.max(det2(&j).abs()),
            Err(_) => missing += 1,
        }
    }
    let below = sn.iter().all(|pt| pt.current <= d.i_rh + 1e-12);
    let at_star = (i_sn(&c, d.g_star) - d.i_rh).abs() < 1e-12;
    let strict = sn.iter().filter(|pt| pt.g > d.g_star * (1.0 + 1e-6)).all(|pt| pt.current < d.i_rh);
    (
        hopf.len() == 20 && sn.len() == 20 && missing == 0 && worst_tr < 1e-8 && min_det > 0.0 && worst_det < 1e-8 && below && at_star && strict,
        format!(
            "Hopf max |tr| {worst_tr:.2e}, min det {min_det:.2e}; saddle-node max |det| {worst_det:.2e}; I_SN <= I_rh {below}, equality at g* {at_star}"
        ),
    )
}

fn beb_taxonomy() -> Outcome {
    let base = ModelParams::izhikevich();
    let (d, _) = derive(&base).unwrap();
    let threshold = g_hat(&base).unwrap();
    let gs = [0.5 * d.g_bar, 1.0, 0.5 * (d.g_star + threshold.unwrap_or(d.g_star)), 4.0];
    let want = [
        BebType::Persistence,
        BebType::HomoclinicPersistence,
        BebType::SnicBeb,
        BebType::NonsmoothSaddleNode,
    ];
    let got: Vec<_> = gs.iter().map(|&g| beb_classify(&base, g, threshold)).collect();
    let types_ok = got.iter().zip(want).all(|(a, b)| matches!(a, Ok(t) if *t == b));

    // homoclinic persistence: cycle approaching I_rh from above
    let g = 1.0;
    let deltas = [0.1, 0.03, 0.01];
    let cycles: Vec<_> = deltas
        .iter()
        .map(|dl| track_limit_cycle(&izh(g, d.i_rh + dl), true, None, &CycleOptions::default()))
        .collect();
    let (period_ok, amp_ok, detail) = match (&cycles[0], &cycles[2]) {
        (Ok(top), Ok(bottom)) => {
            let ratio = bottom.period / top.period;
            let amp_ratio = cycles
                .iter()
                .filter_map(|c| c.as_ref().ok())
                .map(|c| c.amplitude_w / top.amplitude_w)
                .fold(f64::INFINITY, f64::min);
            (
                ratio >= 10.0,
                amp_ratio > 0.5,
                format!(
                    "periods {:?}; growth x{ratio:.2} over one decade; min amplitude ratio {amp_ratio:.2}",
                    cycles
                        .iter()
                        .map(|c| c.as_ref().map(|c| c.period.round()).unwrap_or(f64::NAN))
                        .collect::<Vec<_>>()
                ),
            )
        }
        _ => (false, false, "cycle not found".into()),
    };
    (
        types_ok && period_ok && amp_ok,
        format!("types {:?}; {detail}", got.iter().map(|t| t.as_ref().ok()).collect::<Vec<_>>()),
    )
}

fn hopf_collapse() -> Outcome {
    let (d, c) = derive(&ModelParams::izhikevich()).unwrap();
    let offsets = [1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001];
    let amps: Vec<f64> = offsets
        .par_iter()
        .map(|dg| {
            let g = d.g_bar + dg;
            track_limit_cycle(&izh(g, i_ah(&c, g)), true, None, &CycleOptions::default())
                .map(|cy| if cy.nonsmooth { cy.amplitude_w } else { f64::NAN })
                .unwrap_or(f64::NAN)
        })
        .collect();
    let monotone = amps.windows(2).all(|w| w[1] < w[0]);
    let collapsed = amps[amps.len() - 1] < 0.1 * amps[0];
    (
        monotone && collapsed,
        format!("amplitude_w {:?}", amps.iter().map(|a| format!("{a:.2e}")).collect::<Vec<_>>()),
    )
}

fn grazing_ordering() -> Outcome {
    let g = 1.0;
    let base = ModelParams::izhikevich();
    let (d, c) = derive(&base).unwrap();
    let opts = CycleOptions::default();
    let i_hopf = i_ah(&c, g);
    let snlc = match snlc_point(&base, g, (i_hopf, i_hopf + 0.5), &opts) {
        Ok(v) => v,
        Err(e) => return (false, format!("saddle-node of cycles: {e}")),
    };
    let lo = i_hopf + 0.1 * (snlc - i_hopf);
    match grazing_point(&base, g, (lo, snlc), false, &opts) {
        Ok(gp) => {
            let ordered = d.i_rh < i_hopf && i_hopf < gp.current && gp.current < snlc;
            (
                ordered && gp.cycle.min_h.abs() < 1e-9,
                format!(
                    "g={g}: I_rh {:.6} < I_AH {i_hopf:.6} < I_graze {:.7} < I_snlc {snlc:.7}: {ordered}; min H {:.1e}",
                    d.i_rh, gp.current, gp.cycle.min_h
                ),
            )
        }
        Err(e) => (false, format!("grazing: {e}")),
    }
}

fn quiescent_closed_form() -> Outcome {
    let p = izh(1.2308, 0.0);
    let gamma = p.tau_s / p.tau_w;
    let opts = IntegrateOptions {
        tol: 1e-12,
        ..IntegrateOptions::default()
    };
    let s0 = MeanFieldState::new(0.4, 0.3);
    let tr = integrate(System::Quiescent, &p, s0, 20.0, &opts).unwrap();
    let worst_power = tr
        .states
        .iter()
        .map(|x| (x.w - s0.w * (x.s / s0.s).powf(gamma)).abs() / x.w)
        .fold(0.0, f64::max);

    // homoclinic return at I = I_rh against integration of the quiescent flow
    let (d, _) = derive(&p).unwrap();
    let at_rh = p.with_current(d.i_rh);
    let g = at_rh.g;
    let mut worst_return = 0.0f64;
    let mut compared = 0;
    for s_start in [0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8] {
        let w_start = d.i_rh - at_rh.rheobase(s_start, 0.0);
        if w_start <= 0.0 {
            continue;
        }
        let Ok(Some(root)) = homoclinic_return(&at_rh, g, s_start) else { continue };
        let reverse = root > s_start;
        let o = IntegrateOptions {
            tol: 1e-12,
            reverse_time: reverse,
            ..IntegrateOptions::default()
        };
        // s(t) = s0 exp(-t / tau_s), so the duration needed is known
        let t_hit = (p.tau_s * (s_start / root).ln()).abs();
        let tr = integrate(System::Quiescent, &at_rh, MeanFieldState::new(s_start, w_start), 1.5 * t_hit, &o).unwrap();
        let crossing = tr.crossings.iter().find(|c| c.time.abs() > 1e-3 * t_hit);
        if let Some(c) = crossing {
            let s_hit = s_start * (-c.time / p.tau_s).exp();
            worst_return = worst_return.max(((s_hit - root) / root).abs());
            compared += 1;
        } else {
            worst_return = f64::INFINITY;
        }
    }
    (
        worst_power < 1e-8 && compared >= 3 && worst_return < 1e-6,
        format!("power law max rel err {worst_power:.2e}; homoclinic return max rel err {worst_return:.2e} over {compared} orbits"),
    )
}

fn hysteresis() -> Outcome {
    let base = ModelParams::izhikevich();
    let (d, c) = derive(&base).unwrap();
    let rate_floor = 1e-3;
    let run = |g: f64| {
        let p = base.with_g(g);
        let i_low = if g > d.g_star { i_sn(&c, g) } else { d.i_rh };
        let span = (d.i_rh - i_low).max(0.02);
        let (lo, hi) = (i_low - span, d.i_rh + span);
        let opts = RampOptions {
            n: 100,
            dt: 0.01,
            settle: 5.0 * p.tau_w,
            record_dt: Some(1.0),
            seed: 7,
            slow: true,
        };
        let rate = pwsmf::netsim::default_ramp_rate(&p, lo, hi);
        let (up, down) = ramp_protocol(&p, lo, hi, rate, &opts)?;
        Ok::<_, pwsmf::Error>((i_low, hysteresis_interval(&up, &down, opts.settle, 40, rate_floor)))
    };
    match (run(d.g_star + 1.0), run(d.g_star - 1.0)) {
        (Ok((i_low, above)), Ok((_, below))) => {
            let overlaps = above.is_some_and(|(a, b)| a < d.i_rh && b > i_low);
            (
                overlaps && below.is_none(),
                format!("g*+1: mismatch {above:?} vs (I_SN, I_rh) = ({i_low:.4}, {:.4}); g*-1: mismatch {below:?}", d.i_rh),
            )
        }
        (Err(e), _) | (_, Err(e)) => (false, e.to_string()),
    }
}

fn regularization() -> Outcome {
    let p = izh(1.2308, 0.1893);
    let cycle = match track_limit_cycle(&p, true, None, &CycleOptions::default()) {
        Ok(c) => c,
        Err(e) => return (false, e.to_string()),
    };
    let opts = IntegrateOptions {
        tol: 1e-11,
        h_max: cycle.period / 20000.0,
        ..IntegrateOptions::default()
    };
    let orbit = integrate(System::Reduced, &p, cycle.section_point, cycle.period, &opts).unwrap();
    let extent = |f: fn(&MeanFieldState) -> f64| {
        let v = orbit.states.iter().map(f);
        v.clone().fold(f64::NEG_INFINITY, f64::max) - v.fold(f64::INFINITY, f64::min)
    };
    let size = extent(|x| x.s).hypot(extent(|x| x.w));
    let start = cycle.section_point;
    let init = EmbeddedState {
        s: start.s,
        w: start.w,
        r: p.switching_h(start.s, start.w).max(1e-6).sqrt(),
        epsilon: 1e-4,
    };
    let tr = match integrate_embedded(&p, init, 10.0 * cycle.period, 1e-10, Some(1e-12)) {
        Ok(t) => t,
        Err(e) => return (false, e.to_string()),
    };
    let tail: Vec<_> = tr
        .times
        .iter()
        .zip(&tr.states)
        .filter(|(t, _)| **t > 8.0 * cycle.period)
        .map(|(_, x)| *x)
        .collect();
    let rel = hausdorff(&tail, &orbit.states) / size;
    (rel < 0.01, format!("Hausdorff distance {:.3}% of orbit size", 100.0 * rel))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("regime reproduction", regime_reproduction),
        ("equilibrium oracle equivalence", equilibrium_oracles),
        ("jacobian correctness", jacobian_correctness),
        ("curve consistency", curve_consistency),
        ("BEB taxonomy", beb_taxonomy),
        ("Hopf BEB collapse", hopf_collapse),
        ("grazing ordering", grazing_ordering),
        ("quiescent closed form", quiescent_closed_form),
        ("hysteresis", hysteresis),
        ("regularization consistency", regularization),
    ];
    let results: Vec<(Outcome, f64)> = criteria
        .par_iter()
        .map(|(_, f)| {
            let t0 = Instant::now();
            let out = f();
            (out, t0.elapsed().as_secs_f64())
        })
        .collect();
    let mut failed = 0;
    for (i, ((name, _), ((ok, detail), secs))) in criteria.iter().zip(results).enumerate() {
        println!(
            "[{}] criterion {:2} {name}: {detail} ({secs:.0} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
        failed += usize::from(!ok);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
