use crate::output::{num, OutDir, Summary};
use crate::{usage, Cli, SimulateArgs, StrategyId};
use anyhow::Result;
use rayon::prelude::*;
use semiham::baseline::{ThreeOut, UniformCircles};
use semiham::cleanup::{cleanup_run, CloseConfig};
use semiham::dg::DegreeGreedy;
use semiham::engine::{default_stride, run_on, Status, TraceRow};
use semiham::fr::FullyRandomized;
use semiham::pipeline::{run_full_with, FullConfig};
use semiham::{rng_for, Mode, ProcessState, StopCondition, Strategy, Trace};
use serde_json::json;
use std::collections::BTreeMap;

/// Parse `unsat:FRAC`, `budget:STEPS`, `budget:Kn`, `phase:Q` or `ham`.
pub fn parse_stop(s: &str, n: usize) -> Result<StopCondition> {
    let bad = || usage(format!("bad stop condition `{s}`"));
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    Ok(match kind {
        "ham" if arg.is_empty() => StopCondition::HamiltonianCycle,
        "unsat" => {
            let f: f64 = arg.parse().map_err(|_| bad())?;
            if !(f > 0.0 && f <= 1.0) {
                return Err(bad());
            }
            StopCondition::UnsaturatedBelow((f * n as f64).ceil() as usize)
        }
        "budget" => {
            let steps = match arg.strip_suffix('n') {
                Some(k) => (k.parse::<f64>().map_err(|_| bad())? * n as f64).ceil() as u64,
                None => arg.parse().map_err(|_| bad())?,
            };
            StopCondition::StepBudget(steps)
        }
        "phase" => StopCondition::PhaseReached(arg.parse().map_err(|_| bad())?),
        _ => return Err(bad()),
    })
}

type Table = (String, &'static [&'static str], Vec<Vec<String>>);

struct RunOut {
    tables: Vec<Table>,
    status: String,
    hitting: BTreeMap<String, f64>,
    details: serde_json::Value,
}

const FR_COLS: &[&str] = &["t", "X", "Y", "L1", "L2"];
const DG_COLS: &[&str] = &["t", "phase", "X", "Y", "R", "B", "M", "D"];
const PLAIN_COLS: &[&str] = &["t", "X", "Y"];

fn rows(trace: &Trace, cols: &[&str]) -> Vec<Vec<String>> {
    trace
        .rows
        .iter()
        .map(|r: &TraceRow| {
            cols.iter()
                .map(|c| {
                    match *c {
                        "t" => r.t as usize,
                        "X" => r.x,
                        "Y" => r.y,
                        "L1" => r.l1,
                        "L2" => r.l2,
                        "R" => r.r,
                        "B" => r.b,
                        "M" => r.m,
                        "D" => r.d,
                        "phase" => r.phase as usize,
                        _ => unreachable!("unknown column {c}"),
                    }
                    .to_string()
                })
                .collect()
        })
        .collect()
}

fn status_name(s: &Status) -> String {
    match s {
        Status::Exhausted => "budget".into(),
        Status::Stopped(StopCondition::UnsaturatedBelow(_)) => "unsaturated_below".into(),
        Status::Stopped(StopCondition::PhaseReached(_)) => "phase_reached".into(),
        Status::Stopped(StopCondition::HamiltonianCycle) => "spanning_path".into(),
        Status::Stopped(StopCondition::StepBudget(_)) => "budget".into(),
    }
}

fn stops_or(a: &SimulateArgs, n: usize, default: StopCondition) -> Result<Vec<StopCondition>> {
    let mut stops: Vec<StopCondition> = a.stop.iter().map(|s| parse_stop(s, n)).collect::<Result<_>>()?;
    if stops.is_empty() {
        stops.push(default);
    }
    // safety net far beyond any strategy's completion time
    stops.push(StopCondition::StepBudget(10 * n as u64));
    Ok(stops)
}

fn one_run(a: &SimulateArgs, n: usize, seed: u64, k: u64) -> Result<RunOut> {
    let stride = if a.stride == 0 { default_stride(n) } else { a.stride };
    let nf = n as f64;
    let mut hitting = BTreeMap::new();
    let tag = format!("seed{k}");
    let out = match a.strategy {
        StrategyId::Fr => {
            let stops = stops_or(a, n, StopCondition::UnsaturatedBelow((0.01 * nf).ceil() as usize))?;
            let mut st = ProcessState::with_mode(n, Mode::Fr)?;
            let tr = run_on(&mut st, &FullyRandomized, &stops, &mut rng_for(seed, k), stride);
            if let Some(t) = tr.hitting_time(|r| r.x as f64 >= 0.99 * nf) {
                hitting.insert("x_ge_0.99n".into(), t as f64 / nf);
            }
            hitting.insert("end".into(), st.t() as f64 / nf);
            RunOut {
                status: status_name(&tr.status),
                tables: vec![(format!("trace_fr_{tag}.csv"), FR_COLS, rows(&tr, FR_COLS))],
                hitting,
                details: json!({ "steps": st.t(), "decisions": tr.decision_counts }),
            }
        }
        StrategyId::Dg => {
            let stops = stops_or(a, n, StopCondition::PhaseReached(a.phases + 1))?;
            let mut st = ProcessState::with_mode(n, Mode::Dg)?;
            let tr = run_on(&mut st, &DegreeGreedy, &stops, &mut rng_for(seed, k), stride);
            for (q, &t) in tr.phase_times.iter().enumerate().skip(1) {
                hitting.insert(format!("tau_{q:03}"), t as f64 / nf);
            }
            hitting.insert("end".into(), st.t() as f64 / nf);
            RunOut {
                status: status_name(&tr.status),
                tables: vec![(format!("trace_dg_{tag}.csv"), DG_COLS, rows(&tr, DG_COLS))],
                hitting,
                details: json!({ "steps": st.t(), "decisions": tr.decision_counts }),
            }
        }
        StrategyId::Cleanup => {
            let mut st = ProcessState::with_mode(n, Mode::Fr)?;
            let mut rng = rng_for(seed, k);
            let stops = [
                StopCondition::UnsaturatedBelow(((a.eps * nf).ceil() as usize).max(1)),
                StopCondition::StepBudget(10 * n as u64),
            ];
            let tr = run_on(&mut st, &FullyRandomized, &stops, &mut rng, stride);
            let handoff = st.t();
            let rep = cleanup_run(&mut st, CloseConfig::standard(n), &mut rng)?;
            hitting.insert("handoff".into(), handoff as f64 / nf);
            hitting.insert("end".into(), st.t() as f64 / nf);
            RunOut {
                status: "hamiltonian_cycle".into(),
                tables: vec![(format!("trace_fr_{tag}.csv"), FR_COLS, rows(&tr, FR_COLS))],
                hitting,
                details: json!({ "fr_steps": handoff, "cleanup": rep }),
            }
        }
        StrategyId::Full => {
            let cfg = FullConfig { phases: a.phases, handoff: a.handoff, stride: a.stride, ..Default::default() };
            let rep = run_full_with(n, &mut rng_for(seed, k), &cfg)?;
            for (q, &t) in rep.phase_times.iter().enumerate() {
                hitting.insert(format!("tau_{:03}", q + 1), t as f64 / nf);
            }
            hitting.insert("dg_end".into(), rep.dg_steps as f64 / nf);
            hitting.insert("fr_end".into(), (rep.dg_steps + rep.fr_steps) as f64 / nf);
            hitting.insert("end".into(), rep.total_steps as f64 / nf);
            RunOut {
                status: "hamiltonian_cycle".into(),
                tables: vec![
                    (format!("trace_dg_{tag}.csv"), DG_COLS, rows(&rep.dg_trace, DG_COLS)),
                    (format!("trace_fr_{tag}.csv"), FR_COLS, rows(&rep.fr_trace, FR_COLS)),
                ],
                hitting,
                details: json!({
                    "dg_steps": rep.dg_steps,
                    "fr_steps": rep.fr_steps,
                    "cleanup_steps": rep.cleanup_steps,
                    "total_steps": rep.total_steps,
                    "cleanup": rep.cleanup,
                }),
            }
        }
        StrategyId::ThreeOut | StrategyId::Uniform => {
            let strat: &dyn Strategy = if a.strategy == StrategyId::ThreeOut { &ThreeOut } else { &UniformCircles };
            let stops = stops_or(a, n, StopCondition::StepBudget(3 * n as u64))?;
            let mut st = ProcessState::with_mode(n, Mode::Plain)?;
            let tr = run_on(&mut st, strat, &stops, &mut rng_for(seed, k), stride);
            let (mut sq, mut ci) = (vec![0u64; n], vec![0u64; n]);
            for &(u, v) in st.step_edges() {
                sq[u as usize] += 1;
                ci[v as usize] += 1;
            }
            let range = |v: &[u64]| json!([v.iter().min(), v.iter().max()]);
            hitting.insert("end".into(), st.t() as f64 / nf);
            RunOut {
                status: status_name(&tr.status),
                tables: vec![(format!("trace_plain_{tag}.csv"), PLAIN_COLS, rows(&tr, PLAIN_COLS))],
                hitting,
                details: json!({ "steps": st.t(), "squares_min_max": range(&sq), "circles_min_max": range(&ci) }),
            }
        }
    };
    Ok(out)
}

pub fn cmd_simulate(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    let n = cli.common.n;
    let mut out = OutDir::create(&cli.common.out)?;
    let runs: Vec<RunOut> =
        (0..cli.common.seeds).into_par_iter().map(|k| one_run(a, n, cli.common.seed, k)).collect::<Result<_>>()?;
    let mut plot = Vec::new();
    for (k, r) in runs.iter().enumerate() {
        for (name, cols, rows) in &r.tables {
            out.csv(name, cols, rows)?;
            let thin = rows.len().div_ceil(2000).max(1);
            for row in rows.iter().step_by(thin) {
                let t: f64 = row[0].parse().expect("integer step");
                for (c, v) in cols.iter().zip(row).skip(1) {
                    plot.push(vec![format!("seed{k}:{c}"), num(t / n as f64), v.clone()]);
                }
            }
        }
    }
    out.csv("plot.csv", &["series", "s_or_t", "value"], plot)?;
    let mut summary = Summary::new(if runs.iter().all(|r| r.status == runs[0].status) {
        runs[0].status.clone()
    } else {
        "mixed".into()
    });
    let mut keys: Vec<&String> = runs.iter().flat_map(|r| r.hitting.keys()).collect();
    keys.sort();
    keys.dedup();
    for key in keys {
        let vals: Vec<f64> = runs.iter().filter_map(|r| r.hitting.get(key).copied()).collect();
        summary.hitting_times.insert(key.clone(), vals.iter().sum::<f64>() / vals.len() as f64);
    }
    summary.details = json!({
        "strategy": a.strategy,
        "n": n,
        "runs": runs
            .iter()
            .enumerate()
            .map(|(k, r)| json!({ "run": k, "status": r.status, "hitting_times": r.hitting, "details": r.details }))
            .collect::<Vec<_>>(),
    });
    out.json("summary.json", &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary.hitting_times)?);
    out.manifest(cli, &summary)
}
