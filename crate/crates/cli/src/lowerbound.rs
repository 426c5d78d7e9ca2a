use crate::output::{num, OutDir, Summary};
use crate::{Cli, LbMode, LowerboundArgs, PolicyId, VerifyFailed};
use anyhow::Result;
use rayon::prelude::*;
use semiham::lower_bound::{
    beta_root, claim_check, closed_forms, count_structures, mindeg2_bound, quadrature_oracle, CirclePolicy, History,
    Structure,
};
use semiham::rng_for;
use serde_json::json;

pub fn policy(p: PolicyId) -> CirclePolicy {
    match p {
        PolicyId::Uniform => CirclePolicy::Uniform,
        PolicyId::RoundRobin => CirclePolicy::RoundRobin,
        PolicyId::ThreeOut => CirclePolicy::ThreeOut,
    }
}

/// Per-vertex counts and their limits at `s`: `(name, count / n, closed form)`.
pub fn montecarlo_row(n: usize, s: f64, p: CirclePolicy, seed: u64, k: u64) -> Vec<(&'static str, f64, f64)> {
    let t = (s * n as f64).round() as usize;
    let h = History::generate(n, t, p, &mut rng_for(seed, k));
    let c = count_structures(&h);
    let cf = closed_forms(s);
    let nf = n as f64;
    vec![
        ("z", c.z as f64 / nf, cf.z),
        ("w1", c.w1 as f64 / nf, cf.w1),
        ("w2", c.w2 as f64 / nf, cf.w2),
        ("t1", c.t1 as f64 / nf, cf.t1),
        ("t2", c.t2 as f64 / nf, cf.t2),
        ("bound", c.bound() as f64 / nf, cf.f),
    ]
}

pub fn cmd_lowerbound(cli: &Cli, a: &LowerboundArgs) -> Result<()> {
    let mut out = OutDir::create(&cli.common.out)?;
    let beta = beta_root()?;
    let s = a.s.unwrap_or(beta);
    let mut summary = Summary::new("ok");
    summary.constants.beta = Some(beta);
    match a.mode {
        LbMode::Analytic => {
            let table = (0..=60).map(|i| {
                let s = i as f64 * 0.05;
                let c = closed_forms(s);
                [s, c.f, c.z, c.w1, c.w2, c.t1, c.t2, c.bound()].map(num)
            });
            out.csv("f_table.csv", &["s", "f", "z", "w1", "w2", "t1", "t2", "bound"], table)?;
            let grid = [0.5, 1.0, beta, 1.5, 2.0];
            let rows: Vec<[String; 5]> = grid
                .par_iter()
                .flat_map_iter(|&s| {
                    let c = closed_forms(s);
                    Structure::ALL.map(|w| {
                        let o = quadrature_oracle(s, w).unwrap_or(f64::NAN);
                        [num(s), w.name().into(), num(c.get(w)), num(o), num(c.get(w) - o)]
                    })
                })
                .collect();
            let worst = rows.iter().map(|r| r[4].parse::<f64>().unwrap().abs()).fold(0.0, f64::max);
            out.csv("quadrature.csv", &["s", "structure", "closed_form", "oracle", "delta"], rows)?;
            summary.details = json!({ "beta": beta, "mindeg2": mindeg2_bound(), "max_quadrature_delta": worst });
        }
        LbMode::Montecarlo => {
            let p = policy(a.policy);
            let runs: Vec<_> = (0..cli.common.seeds)
                .into_par_iter()
                .map(|k| montecarlo_row(cli.common.n, s, p, cli.common.seed, k))
                .collect();
            let mut rows = Vec::new();
            let mut rel = std::collections::BTreeMap::new();
            for (k, run) in runs.iter().enumerate() {
                for &(name, got, want) in run {
                    let e = (got - want) / want;
                    rows.push([k.to_string(), name.into(), num(got), num(want), num(e)]);
                    *rel.entry(name).or_insert(0.0) += e / runs.len() as f64;
                }
            }
            out.csv("montecarlo.csv", &["seed", "structure", "count_over_n", "closed_form", "rel_err"], rows)?;
            summary.details = json!({ "s": s, "policy": a.policy, "mean_rel_err": rel });
        }
        LbMode::ClaimCheck => {
            let n = cli.common.n;
            let p = policy(a.policy);
            let verdicts: Vec<_> = (0..a.trials)
                .into_par_iter()
                .map(|k| claim_check(&History::generate(n, a.length_factor * n, p, &mut rng_for(cli.common.seed, k))))
                .collect();
            let violations: Vec<usize> = verdicts.iter().enumerate().filter(|(_, v)| v.violated).map(|(i, _)| i).collect();
            let with_cycle = verdicts.iter().filter(|v| v.cycles > 0).count();
            summary.status = if violations.is_empty() { "pass".into() } else { "fail".into() };
            summary.details = json!({
                "trials": a.trials,
                "passed": a.trials as usize - violations.len(),
                "with_hamiltonian_cycle": with_cycle,
                "violations": violations,
            });
            out.json("summary.json", &summary)?;
            println!("{}", serde_json::to_string_pretty(&summary.details)?);
            let failed = !violations.is_empty();
            out.manifest(cli, &summary)?;
            if failed {
                return Err(VerifyFailed(format!("{} histories violate the bound", violations.len())).into());
            }
            return Ok(());
        }
    }
    out.json("summary.json", &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary.details)?);
    out.manifest(cli, &summary)
}
