//! Dispatch of a resolved configuration to the library.

use coordwalk::diagnostics::{
    build_discrete_chain, cheeger_check, ess_series, lower_bound_experiment, mixing_curve, Binning, StartSpec,
};
use coordwalk::geometry::Body;
use coordwalk::isoperimetry::{worst_ratio_cube_grid, GridPartition, GridSet};
use coordwalk::kernel::{conductance, Region};
use coordwalk::rng::stream_rng;
use coordwalk::samplers::{record_trajectory, ChainState, PointSampler, UniformSampler, WarmStart};
use serde_json::{json, Value};

use crate::bench::bench_per_step;
use crate::config::{Command, Resolved, Start};
use crate::output::{Report, Table};
use crate::CliError;

pub fn execute(cfg: &Resolved) -> Result<Report, CliError> {
    match cfg.command {
        Command::Sample => sample(cfg),
        Command::Conductance => conductance_cmd(cfg),
        Command::Iso => iso(cfg),
        Command::Lowerbound => lowerbound(cfg),
        Command::Mixcurve => mixcurve(cfg),
        Command::Bench => bench(cfg),
        Command::Discrete => discrete(cfg),
    }
}

fn report(table: Table, extra: Value) -> Report {
    Report {
        table,
        extra,
        trajectory: None,
    }
}

fn start_point(body: &Body, start: &Start, seed: u64) -> Result<Vec<f64>, CliError> {
    Ok(match start {
        Start::Center => body.interior_point()?,
        Start::Uniform => UniformSampler::new(body)?.sample(body, &mut stream_rng(seed, 0))?,
        Start::Point(x) => x.clone(),
    })
}

fn sample(cfg: &Resolved) -> Result<Report, CliError> {
    let p = &cfg.config.sample;
    let body = cfg.body.build()?;
    let walk = cfg.walk.build()?;
    let x0 = start_point(&body, &p.start, cfg.seed)?;
    let mut state = ChainState::new(&body, x0, 0)?;
    let traj = record_trajectory(&body, &walk, &mut state, p.steps, p.thin, cfg.seed, &mut stream_rng(cfg.seed, 1))?;
    let n = body.dim();
    let names: Vec<String> = std::iter::once("step".to_string())
        .chain((0..n).map(|j| format!("x{j}")))
        .collect();
    let mut table = Table::new(&names.iter().map(String::as_str).collect::<Vec<_>>());
    for i in 0..traj.len() {
        let mut row = vec![json!(traj.steps[i])];
        row.extend(traj.point(i).iter().map(|&v| json!(v)));
        table.push(row);
    }
    let ess: Vec<Value> = (0..n)
        .map(|j| ess_series(&traj.coordinate(j)).map_or(Value::Null, |e| json!(e.ess)))
        .collect();
    Ok(Report {
        table,
        extra: json!({ "walk": cfg.walk, "body": cfg.body, "ess": ess }),
        trajectory: Some(traj),
    })
}

fn conductance_cmd(cfg: &Resolved) -> Result<Report, CliError> {
    let p = &cfg.config.conductance;
    let body = cfg.body.build()?;
    let walk = cfg.walk.build()?;
    let n = body.dim();
    let offset = match p.offset {
        Some(c) => c,
        None => {
            let b = body.bounding_box()?;
            0.5 * (b.lo[p.axis.min(n - 1)] + b.hi[p.axis.min(n - 1)])
        }
    };
    let region = match &p.normal {
        Some(a) => Region::halfspace(a.clone(), offset)?,
        None => Region::axis_cut(n, p.axis, offset),
    };
    let est = conductance(&body, &region, p.samples, &walk, cfg.seed)?;
    let mut table = Table::new(&[
        "walk", "lazy", "p_S", "pi_S", "phi", "se_p", "se_pi", "se_phi", "n_samples", "seed",
    ]);
    table.push(vec![
        json!(walk.kind.name()),
        json!(walk.lazy),
        json!(est.p_s),
        json!(est.pi_s),
        json!(est.phi),
        json!(est.se_p),
        json!(est.se_pi),
        json!(est.se_phi),
        json!(est.n_samples),
        json!(est.seed),
    ]);
    Ok(report(table, json!({ "region": region, "body": cfg.body })))
}

fn cell_list(s: &GridSet) -> Value {
    json!(s.iter().map(|c| s.partition().multi(c)).collect::<Vec<_>>())
}

fn iso(cfg: &Resolved) -> Result<Report, CliError> {
    let p = &cfg.config.iso;
    let w = worst_ratio_cube_grid(p.k, p.n, p.budget, cfg.seed)?;
    let mut table = Table::new(&[
        "k", "n", "ratio", "exhaustive", "evaluated", "s1_cells", "s2_cells", "s3_cells",
    ]);
    table.push(vec![
        json!(p.k),
        json!(p.n),
        json!(w.ratio),
        json!(w.exhaustive),
        json!(w.evaluated),
        json!(w.s1.len()),
        json!(w.s2.len()),
        json!(w.s3_cells),
    ]);
    Ok(report(table, json!({ "s1": cell_list(&w.s1), "s2": cell_list(&w.s2) })))
}

fn lowerbound(cfg: &Resolved) -> Result<Report, CliError> {
    let p = &cfg.config.lowerbound;
    let t = lower_bound_experiment(&p.ns, &p.lengths, p.samples, cfg.seed)?;
    let mut table = Table::new(&["n", "D", "walk", "phi", "se", "pi_S", "seed", "slope"]);
    for r in &t.rows {
        let slope = t
            .fits
            .iter()
            .find(|f| f.n == r.n && f.walk == r.walk)
            .map_or(Value::Null, |f| json!(f.slope));
        table.push(vec![
            json!(r.n),
            json!(r.length),
            json!(r.walk),
            json!(r.phi),
            json!(r.se),
            json!(r.pi_s),
            json!(r.seed),
            slope,
        ]);
    }
    Ok(report(table, json!({ "fits": t.fits })))
}

fn mixcurve(cfg: &Resolved) -> Result<Report, CliError> {
    let p = &cfg.config.mixcurve;
    let body = cfg.body.build()?;
    let walk = cfg.walk.build()?;
    let ts: Vec<u64> = p.checkpoints.clone().unwrap_or_else(|| (0..=p.t_max).collect());
    let start = match &p.start {
        Start::Center => StartSpec::Center,
        Start::Uniform => StartSpec::Warm {
            mode: WarmStart::RejectionFromBox,
        },
        Start::Point(x) => StartSpec::Point { x: x.clone() },
    };
    let binning = Binning::over_body(&body, p.bins)?;
    let c = mixing_curve(&body, &walk, &ts, p.replicas, &start, &binning, cfg.seed)?;
    let mut table = Table::new(&["t", "tv", "tv_smoothed", "stderr"]);
    for i in 0..c.t.len() {
        table.push(vec![json!(c.t[i]), json!(c.tv[i]), json!(c.tv_smoothed[i]), json!(c.stderr[i])]);
    }
    Ok(report(
        table,
        json!({
            "walk": c.walk,
            "body": c.body,
            "replicas": c.replicas,
            "binning": c.binning,
            "mixing_time_quarter": c.mixing_time(0.25),
        }),
    ))
}

fn bench(cfg: &Resolved) -> Result<Report, CliError> {
    let p = &cfg.config.bench;
    let r = bench_per_step(p.n, p.m, p.steps, p.repeats, cfg.seed)?;
    let mut table = Table::new(&[
        "n",
        "m",
        "steps",
        "repeats",
        "cached_ns_per_step",
        "naive_ns_per_step",
        "ratio",
        "max_coord_diff",
        "checksum",
    ]);
    table.push(vec![
        json!(r.n),
        json!(r.m),
        json!(r.steps),
        json!(r.repeats),
        json!(r.cached_ns_per_step),
        json!(r.naive_ns_per_step),
        json!(r.ratio),
        json!(r.max_coord_diff),
        json!(r.checksum),
    ]);
    Ok(report(table, Value::Null))
}

fn discrete(cfg: &Resolved) -> Result<Report, CliError> {
    let k = cfg.config.discrete.k;
    let body = cfg.body.build()?;
    let bounds = body.bounding_box()?;
    let side = bounds
        .lo
        .iter()
        .zip(&bounds.hi)
        .map(|(l, h)| h - l)
        .fold(0.0, f64::max);
    let grid = GridPartition::covering(&bounds, side / k as f64)?;
    let chain = build_discrete_chain(&body, grid)?;
    let check = chain.check();
    let cheeger = cheeger_check(&chain)?;
    let mut table = Table::new(&[
        "k",
        "states",
        "row_sum_error",
        "balance_error",
        "stationarity_error",
        "gap",
        "phi",
        "cheeger_lower",
        "cheeger_upper",
        "cut_axis",
        "cut_threshold",
    ]);
    table.push(vec![
        json!(k),
        json!(chain.len()),
        json!(check.row_sum_error),
        json!(check.balance_error),
        json!(check.stationarity_error),
        json!(cheeger.gap),
        json!(cheeger.phi),
        json!(cheeger.lower),
        json!(cheeger.upper),
        json!(cheeger.cut.axis),
        json!(cheeger.cut.threshold),
    ]);
    Ok(report(table, json!({ "body": cfg.body })))
}
