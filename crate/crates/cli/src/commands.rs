//! Subcommand implementations. Each validates its arguments, computes, and
//! only then writes its files.

use anyhow::{Context as _, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use pwsmf::bifurcation::curves::{i_ah, i_sn};
use pwsmf::bifurcation::nonsmooth::GlobalPointOptions;
use pwsmf::bifurcation::{
    assemble_diagram, bt_points, codim2_points, g_hat, grazing_point, snlc_point, track_limit_cycle, CurvePoint,
    CycleOptions, DiagramOptions,
};
use pwsmf::equilibria::{beb_classify, nontrivial_equilibria, trivial_equilibrium, Equilibrium, SolveMode};
use pwsmf::meanfield::{
    classify_attractor, integrate, integrate_embedded, Attractor, EmbeddedState, IntegrateOptions, System,
    Trajectory,
};
use pwsmf::models::derive;
use pwsmf::netsim::{
    default_ramp_rate, detect_regime, hysteresis_interval, ramp_protocol, rate_vs_current, simulate_network,
    simulate_slow_network, NetworkInit, NetworkOptions, NetworkTrace, RampOptions,
};
use pwsmf::{MeanFieldState, ModelParams};

use crate::output::{num, Outputs, Table};
use crate::{config_error, Context, Grid, Point, SystemArg};

/// Serialized name of an enum variant, e.g. `SNIC_BEB`.
fn label<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(config_error(format!("--{name} must be > 0, got {x}")))
    }
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(config_error(format!("--{name} must be >= 0, got {x}")))
    }
}

fn at_point(ctx: &Context, p: &Point) -> Result<ModelParams> {
    let mut params = ctx.params.clone();
    if let Some(g) = p.g {
        params.g = g;
    }
    if let Some(i) = p.current {
        params.current = i;
    }
    params.validate()?;
    Ok(params)
}

fn cycle_options(ctx: &Context) -> CycleOptions {
    CycleOptions {
        tol: ctx.tol,
        ..CycleOptions::default()
    }
}

fn trajectory_table(params: &ModelParams, tr: &Trajectory) -> Result<Table> {
    let mut t = Table::new(&["time", "s", "w", "H"])?;
    for (time, x) in tr.times.iter().zip(&tr.states) {
        t.row([num(*time), num(x.s), num(x.w), num(params.switching_h(x.s, x.w))])?;
    }
    Ok(t)
}

fn crossings_table(tr: &Trajectory) -> Result<Table> {
    let mut t = Table::new(&["time", "direction"])?;
    for c in &tr.crossings {
        t.row([num(c.time), c.direction.to_string()])?;
    }
    Ok(t)
}

fn network_tables(trace: &NetworkTrace) -> Result<(Table, Table)> {
    let mut net = Table::new(&["time", "s", "w_mean"])?;
    for ((t, s), w) in trace.times.iter().zip(&trace.s).zip(&trace.w_mean) {
        net.row([num(*t), num(*s), num(*w)])?;
    }
    let mut spikes = Table::new(&["neuron_id", "t_spike"])?;
    for sp in &trace.spikes {
        spikes.row([sp.neuron.to_string(), num(sp.time)])?;
    }
    Ok((net, spikes))
}

fn attractor_line(a: &pwsmf::Result<Attractor>) -> String {
    match a {
        Ok(Attractor::Origin) => "Origin".into(),
        Ok(Attractor::Equilibrium(x)) => format!("Equilibrium s={} w={}", x.s, x.w),
        Ok(Attractor::LimitCycle(c)) => format!(
            "LimitCycle period={} amplitude_w={} nonsmooth={}",
            c.period, c.amplitude_w, c.nonsmooth
        ),
        Err(e) => format!("Indeterminate ({e})"),
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    point: Point,
    /// Number of neurons.
    #[arg(long = "N", default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 4000.0)]
    duration: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Sampling interval of the written traces.
    #[arg(long, default_value_t = 0.1)]
    record_dt: f64,
    /// Length of the final window used for regime classification
    /// (default: a quarter of the duration).
    #[arg(long)]
    window: Option<f64>,
    /// Slave the synaptic variable to `w / eta` (slow network).
    #[arg(long)]
    slow: bool,
    /// Skip the spike raster.
    #[arg(long)]
    no_spikes: bool,
}

pub fn simulate(ctx: &Context, a: &SimulateArgs) -> Result<()> {
    let params = at_point(ctx, &a.point)?;
    if a.n == 0 {
        return Err(config_error("--N must be at least 1"));
    }
    non_negative("duration", a.duration)?;
    positive("dt", a.dt)?;
    positive("record-dt", a.record_dt)?;
    let window = a.window.unwrap_or(a.duration / 4.0);
    if a.duration > 0.0 {
        positive("window", window)?;
    }

    let opts = NetworkOptions {
        record_dt: Some(a.record_dt),
        record_spikes: !a.no_spikes,
        ..NetworkOptions::new(a.n, a.duration, a.dt)
    };
    let init = NetworkInit::Seeded(ctx.seed);
    let trace = if a.slow {
        simulate_slow_network(&params, &opts, &init)?
    } else {
        simulate_network(&params, &opts, &init)?
    };

    let start = match (trace.s.first(), trace.w_mean.first()) {
        (Some(s), Some(w)) => MeanFieldState::new(s.max(0.0), w.max(0.0)),
        _ => MeanFieldState::ORIGIN,
    };
    let mf_opts = IntegrateOptions {
        tol: ctx.tol,
        sample_dt: Some(a.record_dt),
        ..IntegrateOptions::default()
    };
    let mf = integrate(System::Reduced, &params, start, a.duration, &mf_opts)?;

    let regime = if a.duration == 0.0 {
        "Indeterminate".to_owned()
    } else {
        match detect_regime(&trace, window) {
            Ok(r) => label(&r),
            Err(pwsmf::Error::Indeterminate(why)) => format!("Indeterminate ({why})"),
            Err(e) => return Err(e.into()),
        }
    };

    let mut out = Outputs::default();
    let (net, spikes) = network_tables(&trace)?;
    out.table("network.csv", net)?;
    if !a.no_spikes {
        out.table("spikes.csv", spikes)?;
    }
    out.table("meanfield.csv", trajectory_table(&params, &mf)?)?;
    out.write(&ctx.out)?;
    println!("regime={regime}");
    if a.duration > 0.0 {
        let (s, w) = trace.tail_mean(window);
        println!("tail_mean s={s} w_mean={w}");
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct MeanfieldArgs {
    #[command(flatten)]
    point: Point,
    #[arg(long, value_enum, default_value = "reduced")]
    system: SystemArg,
    #[arg(long, default_value_t = 0.05)]
    s0: f64,
    #[arg(long, default_value_t = 0.05)]
    w0: f64,
    #[arg(long, default_value_t = 2000.0)]
    duration: f64,
    /// Integrate backwards in time.
    #[arg(long)]
    reverse: bool,
    /// Record on a fixed time grid instead of every accepted step.
    #[arg(long)]
    sample_dt: Option<f64>,
    /// Regularization parameter of the embedded system.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    /// Initial `R` of the embedded system (default: `sqrt(max(H, 0))`).
    #[arg(long)]
    r0: Option<f64>,
    /// Lower bound on `R` in the embedded system.
    #[arg(long)]
    r_floor: Option<f64>,
}

pub fn meanfield(ctx: &Context, a: &MeanfieldArgs) -> Result<()> {
    let params = at_point(ctx, &a.point)?;
    non_negative("duration", a.duration)?;
    non_negative("s0", a.s0)?;
    non_negative("w0", a.w0)?;
    if let Some(dt) = a.sample_dt {
        positive("sample-dt", dt)?;
    }
    let start = MeanFieldState::new(a.s0, a.w0);
    let tr = match a.system {
        SystemArg::Embedded => {
            positive("epsilon", a.epsilon)?;
            if a.reverse {
                return Err(config_error("the embedded system is integrated forwards only"));
            }
            let r = a.r0.unwrap_or_else(|| params.switching_h(a.s0, a.w0).max(0.0).sqrt());
            non_negative("r0", r)?;
            let init = EmbeddedState {
                s: a.s0,
                w: a.w0,
                r,
                epsilon: a.epsilon,
            };
            integrate_embedded(&params, init, a.duration, ctx.tol, a.r_floor)?
        }
        sys => {
            let system = match sys {
                SystemArg::Full => System::Full,
                SystemArg::Quiescent => System::Quiescent,
                _ => System::Reduced,
            };
            let opts = IntegrateOptions {
                tol: ctx.tol,
                reverse_time: a.reverse,
                sample_dt: a.sample_dt,
                ..IntegrateOptions::default()
            };
            integrate(system, &params, start, a.duration, &opts)?
        }
    };
    let attractor = classify_attractor(&tr, 0.5);
    let mut out = Outputs::default();
    out.table("trajectory.csv", trajectory_table(&params, &tr)?)?;
    out.table("crossings.csv", crossings_table(&tr)?)?;
    out.write(&ctx.out)?;
    println!("attractor={}", attractor_line(&attractor));
    Ok(())
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ModeArg {
    Weak,
    Full,
    Numeric,
}

#[derive(Args, Debug)]
pub struct EquilibriaArgs {
    /// Coupling values, `x` or `lo:hi:n` (default: the model's g).
    #[arg(long = "g-grid")]
    g_grid: Option<Grid>,
    /// Currents, `x` or `lo:hi:n` (default: the model's I).
    #[arg(long = "I-grid")]
    i_grid: Option<Grid>,
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
}

fn equilibrium_row(t: &mut Table, g: f64, current: f64, e: &Equilibrium) -> Result<()> {
    t.row([
        num(g),
        num(current),
        label(&e.branch),
        num(e.point.s),
        num(e.point.w),
        label(&e.reality),
        e.kind.map(|k| label(&k)).unwrap_or_default(),
        num(e.trace),
        num(e.det),
    ])
}

const EQUILIBRIUM_HEADER: [&str; 9] = ["g", "I", "branch", "s", "w", "reality", "kind", "tr", "det"];

pub fn equilibria(ctx: &Context, a: &EquilibriaArgs) -> Result<()> {
    let gs = a.g_grid.map(|g| g.points()).unwrap_or_else(|| vec![ctx.params.g]);
    let is = a.i_grid.map(|g| g.points()).unwrap_or_else(|| vec![ctx.params.current]);
    let mode = match a.mode {
        ModeArg::Weak => SolveMode::WeakCoupling,
        ModeArg::Full => SolveMode::FullIzhikevich,
        ModeArg::Numeric => SolveMode::FullNumeric,
    };
    derive(&ctx.params)?;
    let points: Vec<(f64, f64)> = gs.iter().flat_map(|&g| is.iter().map(move |&i| (g, i))).collect();
    let rows: Vec<(f64, f64, Vec<Equilibrium>)> = points
        .par_iter()
        .map(|&(g, i)| {
            let p = ctx.params.with_point(g, i);
            let mut eqs = vec![trivial_equilibrium(&p)];
            eqs.extend(nontrivial_equilibria(&p, mode)?);
            Ok((g, i, eqs))
        })
        .collect::<pwsmf::Result<_>>()?;
    let mut t = Table::new(&EQUILIBRIUM_HEADER)?;
    let mut count = 0;
    for (g, i, eqs) in &rows {
        for e in eqs {
            equilibrium_row(&mut t, *g, *i, e)?;
            count += 1;
        }
    }
    let mut out = Outputs::default();
    out.table("equilibria.csv", t)?;
    out.write(&ctx.out)?;
    println!("equilibria={count} points={}", rows.len());
    Ok(())
}

#[derive(Args, Debug)]
pub struct CurvesArgs {
    /// Coupling grid `lo:hi:n`.
    #[arg(long = "g-grid", default_value = "0:4:401")]
    g_grid: Grid,
}

fn curve_table(points: &[CurvePoint], name: &str) -> Result<Table> {
    let mut t = Table::new(&["g", "I", "label"])?;
    for p in points {
        t.row([num(p.g), num(p.current), name.to_owned()])?;
    }
    Ok(t)
}

pub fn curves(ctx: &Context, a: &CurvesArgs) -> Result<()> {
    let (d, c) = derive(&ctx.params)?;
    let mut t = Table::new(&["g", "I", "label"])?;
    let (mut n_sn, mut n_ah) = (0, 0);
    for g in a.g_grid.points() {
        if g >= d.g_star {
            t.row([num(g), num(i_sn(&c, g)), "SN".into()])?;
            n_sn += 1;
        }
        if d.g_bar < d.g_star && g >= d.g_bar && (g < d.g_star || i_ah(&c, g) >= i_sn(&c, g)) {
            t.row([num(g), num(i_ah(&c, g)), "AH".into()])?;
            n_ah += 1;
        }
    }
    let bt = bt_points(&ctx.params)?;
    let index = json!({
        "files": { "curves.csv": ["SN", "AH"] },
        "i_rh": d.i_rh,
        "g_star": d.g_star,
        "g_bar": d.g_bar,
        "g_hat": g_hat(&ctx.params)?,
        "bt": bt,
        "codim2": codim2_points(&ctx.params, None)?,
    });
    let mut out = Outputs::default();
    out.table("curves.csv", t)?;
    out.json("curves.json", &index)?;
    out.write(&ctx.out)?;
    println!("SN={n_sn} AH={n_ah}");
    Ok(())
}

#[derive(Args, Debug)]
pub struct DiagramArgs {
    #[arg(long = "g-grid", default_value = "0:4:81")]
    g_grid: Grid,
    /// Also compute grazing and saddle-node-of-cycles curves (slow).
    #[arg(long)]
    cycles: bool,
    /// Search for the global grazing point on `I = I_rh` up to this coupling.
    #[arg(long)]
    global_g_max: Option<f64>,
}

pub fn diagram(ctx: &Context, a: &DiagramArgs) -> Result<()> {
    let cycle = cycle_options(ctx);
    let global_point = match a.global_g_max {
        Some(g_max) => {
            positive("global-g-max", g_max)?;
            Some(GlobalPointOptions {
                g_max,
                g_tol: 1e-4,
                cycle,
            })
        }
        None => None,
    };
    let opts = DiagramOptions {
        cycles: a.cycles,
        global_point,
        cycle,
        ..DiagramOptions::default()
    };
    let diag = assemble_diagram(&ctx.params, &a.g_grid.points(), &opts)?;
    let hopf: Vec<CurvePoint> = diag
        .hopf_curve
        .iter()
        .map(|h| CurvePoint {
            g: h.g,
            current: h.current,
        })
        .collect();
    let grazing: Vec<CurvePoint> = diag
        .grazing_curve
        .iter()
        .map(|e| CurvePoint {
            g: e.g,
            current: e.current,
        })
        .collect();
    let mut out = Outputs::default();
    out.table("sn.csv", curve_table(&diag.sn_curve, "SN")?)?;
    out.table("hopf.csv", curve_table(&hopf, "AH")?)?;
    out.table("grazing.csv", curve_table(&grazing, "GRAZING")?)?;
    out.table("snlc.csv", curve_table(&diag.snlc_curve, "SNLC")?)?;
    out.json(
        "codim.json",
        &json!({
            "i_rh": diag.i_rh,
            "codim2": diag.codim2,
            "codim3": diag.codim3,
            "beb_line": diag.beb_line,
            "grazing": diag.grazing_curve,
            "failures": diag.failures,
        }),
    )?;
    out.write(&ctx.out)?;
    for f in &diag.failures {
        eprintln!("warning: {} curve failed at g={}: {}", f.curve, f.g, f.message);
    }
    println!(
        "codim2={} codim3={} failures={}",
        diag.codim2.len(),
        diag.codim3.is_some(),
        diag.failures.len()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct BebScanArgs {
    /// Comma-separated couplings (default: one per BEB type).
    #[arg(long, value_delimiter = ',')]
    g: Vec<f64>,
    /// SNIC / fold threshold on `I = I_rh` (default: the Hopf return point).
    #[arg(long)]
    threshold: Option<f64>,
    /// Current window `I_rh ± span` for the equilibrium branches.
    #[arg(long, default_value_t = 0.2)]
    span: f64,
    #[arg(long, default_value_t = 41)]
    steps: usize,
    /// Track the stable cycle at `I_rh + delta` for decades of `delta`.
    #[arg(long)]
    cycles: bool,
    /// Run slow-network ramps at every coupling.
    #[arg(long)]
    hysteresis: bool,
    #[arg(long = "N", default_value_t = 100)]
    n: usize,
}

pub fn beb_scan(ctx: &Context, a: &BebScanArgs) -> Result<()> {
    let (d, _) = derive(&ctx.params)?;
    positive("span", a.span)?;
    if a.steps < 2 {
        return Err(config_error("--steps must be at least 2"));
    }
    let threshold = match a.threshold {
        Some(t) => Some(t),
        None => g_hat(&ctx.params)?,
    };
    let gs = if a.g.is_empty() {
        vec![0.02, 1.0, d.g_star + 0.2, d.g_star + 2.0]
    } else {
        a.g.clone()
    };
    if let Some(g) = gs.iter().find(|g| !(**g >= 0.0)) {
        return Err(config_error(format!("coupling must be >= 0, got {g}")));
    }

    let mut types = Table::new(&["g", "type"])?;
    let mut summary = Vec::new();
    for &g in &gs {
        let t = beb_classify(&ctx.params, g, threshold)?;
        types.row([num(g), label(&t)])?;
        summary.push(format!("g={g} type={}", label(&t)));
    }

    let currents = Grid {
        lo: d.i_rh - a.span,
        hi: d.i_rh + a.span,
        n: a.steps,
    }
    .points();
    let mut branches = Table::new(&EQUILIBRIUM_HEADER)?;
    for &g in &gs {
        for &i in &currents {
            let p = ctx.params.with_point(g, i);
            equilibrium_row(&mut branches, g, i, &trivial_equilibrium(&p))?;
            for e in nontrivial_equilibria(&p, SolveMode::FullIzhikevich)? {
                equilibrium_row(&mut branches, g, i, &e)?;
            }
        }
    }

    let mut out = Outputs::default();
    out.table("beb.csv", types)?;
    out.table("branches.csv", branches)?;

    if a.cycles {
        let deltas = [0.1, 0.03, 0.01, 0.003, 0.001];
        let opts = cycle_options(ctx);
        let jobs: Vec<(f64, f64)> = gs.iter().flat_map(|&g| deltas.iter().map(move |&dl| (g, dl))).collect();
        let found: Vec<_> = jobs
            .par_iter()
            .map(|&(g, dl)| track_limit_cycle(&ctx.params.with_point(g, d.i_rh + dl), true, None, &opts))
            .collect();
        let mut t = Table::new(&["g", "I", "amplitude_w", "period", "nonsmooth"])?;
        for ((g, dl), c) in jobs.iter().zip(found) {
            match c {
                Ok(c) => t.row([
                    num(*g),
                    num(d.i_rh + dl),
                    num(c.amplitude_w),
                    num(c.period),
                    c.nonsmooth.to_string(),
                ])?,
                Err(pwsmf::Error::NoCycleFound { .. }) => {
                    t.row([num(*g), num(d.i_rh + dl), String::new(), String::new(), String::new()])?
                }
                Err(e) => return Err(e.into()),
            }
        }
        out.table("cycles.csv", t)?;
    }

    if a.hysteresis {
        let mut t = Table::new(&["g", "I", "rate_up", "rate_down"])?;
        for &g in &gs {
            let run = run_ramps(ctx, g, None, None, None, a.n, 0.01, 40, true)?;
            for (i, up, down) in &run.rows {
                t.row([num(g), num(*i), num(*up), num(*down)])?;
            }
            summary.push(format!("g={g} mismatch={}", interval_text(run.interval)));
        }
        out.table("hysteresis.csv", t)?;
    }

    out.write(&ctx.out)?;
    for line in summary {
        println!("{line}");
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct LimitCycleArgs {
    #[command(flatten)]
    point: Point,
    /// Look for the unstable cycle (reverse-time integration).
    #[arg(long)]
    unstable: bool,
    /// Starting point `s,w` (default: origin for stable, next to e+ otherwise).
    #[arg(long, value_delimiter = ',', num_args = 2)]
    hint: Option<Vec<f64>>,
}

pub fn limit_cycle(ctx: &Context, a: &LimitCycleArgs) -> Result<()> {
    let params = at_point(ctx, &a.point)?;
    let hint = match &a.hint {
        Some(v) if v.len() == 2 && v[0] >= 0.0 && v[1] >= 0.0 => Some(MeanFieldState::new(v[0], v[1])),
        Some(v) => return Err(config_error(format!("--hint needs two non-negative values, got {v:?}"))),
        None => None,
    };
    let cycle = track_limit_cycle(&params, !a.unstable, hint, &cycle_options(ctx))?;
    let opts = IntegrateOptions {
        tol: ctx.tol,
        reverse_time: a.unstable,
        sample_dt: Some(cycle.period / 2000.0),
        ..IntegrateOptions::default()
    };
    let orbit = integrate(System::Reduced, &params, cycle.section_point, cycle.period, &opts)?;
    let mut out = Outputs::default();
    out.json("cycle.json", &cycle)?;
    out.table("orbit.csv", trajectory_table(&params, &orbit)?)?;
    out.write(&ctx.out)?;
    println!(
        "period={} amplitude_w={} stable={} nonsmooth={} min_h={}",
        cycle.period, cycle.amplitude_w, cycle.stable, cycle.nonsmooth, cycle.min_h
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct GrazingArgs {
    #[arg(long)]
    g: Option<f64>,
    /// Lower end of the current bracket (a smooth cycle exists here).
    #[arg(long)]
    lo: Option<f64>,
    /// Upper end of the bracket (default: the saddle-node of cycles).
    #[arg(long)]
    hi: Option<f64>,
    /// Track the stable cycle instead of the unstable one.
    #[arg(long)]
    stable: bool,
}

pub fn grazing(ctx: &Context, a: &GrazingArgs) -> Result<()> {
    let g = a.g.unwrap_or(ctx.params.g);
    let (_, c) = derive(&ctx.params.with_g(g))?;
    let opts = cycle_options(ctx);
    let i_hopf = i_ah(&c, g);
    let hi = match a.hi {
        Some(h) => h,
        None => snlc_point(&ctx.params, g, (i_hopf, i_hopf + 0.5), &opts).context("locating the saddle-node of cycles")?,
    };
    let lo = a.lo.unwrap_or(i_hopf + 0.1 * (hi - i_hopf));
    if !(lo < hi) {
        return Err(config_error(format!("empty bracket [{lo}, {hi}]")));
    }
    let gp = grazing_point(&ctx.params, g, (lo, hi), a.stable, &opts)?;
    let mut out = Outputs::default();
    out.json(
        "grazing.json",
        &json!({ "g": g, "i_hopf": i_hopf, "bracket": [lo, hi], "grazing": gp }),
    )?;
    out.write(&ctx.out)?;
    println!("I_graze={} kind={} min_h={}", gp.current, label(&gp.kind), gp.cycle.min_h);
    Ok(())
}

#[derive(Args, Debug)]
pub struct HysteresisArgs {
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    i_start: Option<f64>,
    #[arg(long)]
    i_end: Option<f64>,
    /// Current change per unit time (default: whole ramp in 50 tau_w).
    #[arg(long)]
    ramp_rate: Option<f64>,
    #[arg(long = "N", default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 40)]
    bins: usize,
    /// Use the full synaptic network instead of the slow one.
    #[arg(long)]
    full: bool,
}

struct RampRun {
    rows: Vec<(f64, f64, f64)>,
    interval: Option<(f64, f64)>,
}

const RATE_FLOOR: f64 = 1e-3;

#[allow(clippy::too_many_arguments)]
fn run_ramps(
    ctx: &Context,
    g: f64,
    i_start: Option<f64>,
    i_end: Option<f64>,
    ramp_rate: Option<f64>,
    n: usize,
    dt: f64,
    bins: usize,
    slow: bool,
) -> Result<RampRun> {
    let params = ctx.params.with_g(g);
    let (d, c) = derive(&params)?;
    let i_low = if g > d.g_star { i_sn(&c, g) } else { d.i_rh };
    let span = (d.i_rh - i_low).max(0.02);
    let lo = i_start.unwrap_or(i_low - span);
    let hi = i_end.unwrap_or(d.i_rh + span);
    if n == 0 || bins == 0 {
        return Err(config_error("--N and --bins must be at least 1"));
    }
    positive("dt", dt)?;
    let rate = ramp_rate.unwrap_or_else(|| default_ramp_rate(&params, lo, hi));
    positive("ramp-rate", rate)?;
    let opts = RampOptions {
        n,
        dt,
        settle: 5.0 * params.tau_w,
        record_dt: Some(1.0),
        seed: ctx.seed,
        slow,
    };
    let (up, down) = ramp_protocol(&params, lo, hi, rate, &opts)?;
    let r_up = rate_vs_current(&up, opts.settle, bins);
    let mut r_down = rate_vs_current(&down, opts.settle, bins);
    r_down.reverse();
    let rows = r_up
        .iter()
        .zip(&r_down)
        .map(|((i, u), (_, dn))| (*i, *u, *dn))
        .collect();
    Ok(RampRun {
        rows,
        interval: hysteresis_interval(&up, &down, opts.settle, bins, RATE_FLOOR),
    })
}

fn interval_text(interval: Option<(f64, f64)>) -> String {
    match interval {
        Some((a, b)) => format!("[{a}, {b}]"),
        None => "none".into(),
    }
}

pub fn hysteresis(ctx: &Context, a: &HysteresisArgs) -> Result<()> {
    let g = a.g.unwrap_or(ctx.params.g);
    non_negative("g", g)?;
    let run = run_ramps(ctx, g, a.i_start, a.i_end, a.ramp_rate, a.n, a.dt, a.bins, !a.full)?;
    let mut t = Table::new(&["I", "rate_up", "rate_down"])?;
    for (i, up, down) in &run.rows {
        t.row([num(*i), num(*up), num(*down)])?;
    }
    let mut out = Outputs::default();
    out.table("hysteresis.csv", t)?;
    out.write(&ctx.out)?;
    println!("mismatch={}", interval_text(run.interval));
    Ok(())
}
