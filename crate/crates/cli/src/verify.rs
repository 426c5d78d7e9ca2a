//! Self-check scorecard, and the measurement helpers shared with the
//! acceptance tests.

use crate::{VerifyArgs, VerifyFailed};
use anyhow::Result;
use rand::Rng;
use semiham::baseline::UniformCircles;
use semiham::cleanup::{cleanup_run, CloseConfig};
use semiham::dg::DegreeGreedy;
use semiham::engine::{dg_observables, empirical_drift, fr_observables, run_on, step};
use semiham::fr::FullyRandomized;
use semiham::lower_bound::{
    beta_root, claim_check, closed_forms, f_eval, quadrature_oracle, CirclePolicy, History, Structure,
};
use semiham::ode::{dg_phase_rhs, fr_drift, fr_system, integrate, run_pipeline, DgPhaseLayout, Options, PipelineConfig};
use semiham::pipeline::{run_full, FullConfig};
use semiham::{rng_for, Mode, ProcessState, StopCondition, Strategy};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::time::Instant;

/// One drift comparison: empirical mean change vs the trajectory equations.
#[derive(Clone, Debug)]
pub struct DriftRow {
    pub t: u64,
    pub var: String,
    pub mean: f64,
    pub se: f64,
    pub expected: f64,
}

impl DriftRow {
    pub fn z(&self) -> f64 {
        (self.mean - self.expected).abs() / self.se.max(1e-12)
    }
}

fn snapshot_times(n: usize, k: usize, lo: f64, hi: f64, seed: u64) -> Vec<u64> {
    let mut rng = rng_for(seed, 1_000_001);
    let mut ts: Vec<u64> = (0..k).map(|_| (rng.random_range(lo..hi) * n as f64) as u64).collect();
    ts.sort_unstable();
    ts
}

/// Advance one fully randomised run through `k` snapshot times in
/// `[0.2n, 1.6n]`; at each, compare Monte Carlo drift of `(X, Y, L1, L2)`
/// with the right-hand side of the trajectory system.
pub fn fr_drift_rows(n: usize, k: usize, samples: usize, seed: u64) -> Vec<DriftRow> {
    let mut st = ProcessState::with_mode(n, Mode::Fr).expect("n >= 2");
    let mut rng = rng_for(seed, 0);
    let mut mc = rng_for(seed, 1);
    let names: Vec<String> = ["X", "Y", "L1", "L2"].iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    for t in snapshot_times(n, k, 0.2, 1.6, seed) {
        while st.t() < t {
            step(&mut st, &FullyRandomized, &mut rng);
        }
        let d = empirical_drift(&mut st, &FullyRandomized, samples, &mut mc, names.clone(), fr_observables);
        let v: Vec<f64> = fr_observables(&st).iter().map(|z| z / n as f64).collect();
        let mut want = [0.0; 4];
        fr_drift(&v, &mut want);
        for i in 0..4 {
            out.push(DriftRow { t, var: names[i].clone(), mean: d.mean[i], se: d.se[i], expected: want[i] });
        }
    }
    out
}

/// Degree-greedy counterpart over `[0.3n, 1.4n]`: `X`, `Y`, `R` and every
/// type count of the current phase against the phase system.
pub fn dg_drift_rows(n: usize, k: usize, samples: usize, seed: u64) -> Vec<DriftRow> {
    let mut st = ProcessState::with_mode(n, Mode::Dg).expect("n >= 2");
    let mut rng = rng_for(seed, 0);
    let mut mc = rng_for(seed, 1);
    let mut out = Vec::new();
    for t in snapshot_times(n, k, 0.3, 1.4, seed) {
        while st.t() < t {
            step(&mut st, &DegreeGreedy, &mut rng);
        }
        let q = st.phase().expect("unsaturated vertices remain");
        let (names, obs) = dg_observables(q);
        let d = empirical_drift(&mut st, &DegreeGreedy, samples, &mut mc, names.clone(), &obs);
        let lay = DgPhaseLayout { q };
        let nf = n as f64;
        let s = st.stats();
        let mut v = vec![0.0; lay.dim()];
        v[0] = s.x as f64 / nf;
        v[1] = s.y as f64 / nf;
        v[2] = s.r as f64 / nf;
        for j in 0..q as usize {
            v[lay.min_index(j)] = st.type_count(j as u16, (q as usize - 1 - j) as u16) as f64 / nf;
        }
        for j in 0..=q as usize {
            v[lay.max_index(j)] = st.type_count(j as u16, (q as usize - j) as u16) as f64 / nf;
        }
        let mut want = vec![0.0; lay.dim()];
        dg_phase_rhs(q, &v, &mut want);
        for (i, name) in names.iter().enumerate() {
            let idx = match name.as_str() {
                "X" => 0,
                "Y" => 1,
                "R" => 2,
                c => {
                    let mut it = c.trim_start_matches("C_").split('_').map(|p| p.parse::<usize>().unwrap());
                    let (k1, k2) = (it.next().unwrap(), it.next().unwrap());
                    if k1 + k2 + 1 == q as usize {
                        lay.min_index(k1)
                    } else {
                        lay.max_index(k1)
                    }
                }
            };
            out.push(DriftRow { t, var: format!("{name}@q{q}"), mean: d.mean[i], se: d.se[i], expected: want[idx] });
        }
    }
    out
}

/// Largest deviations of a fully randomised run from the trajectory system
/// over `t <= s_max n`, and the run's first step with `X >= 0.99 n`.
#[derive(Clone, Debug)]
pub struct TrajectoryCheck {
    pub sup: [f64; 4],
    pub hit_099: Option<f64>,
    pub ode_hit_099: f64,
}

pub fn fr_trajectory(n: usize, seed: u64, s_max: f64) -> TrajectoryCheck {
    let sys = fr_system(1e-6);
    let opts = Options { h_max: 2e-3, dense: true, ..Options::default() };
    let sol = integrate(&sys, 0.0, &[0.0; 4], &opts).expect("fully randomised system integrates");
    let mut st = ProcessState::with_mode(n, Mode::Fr).expect("n >= 2");
    let stops = [StopCondition::StepBudget((s_max * n as f64).floor() as u64)];
    let tr = run_on(&mut st, &FullyRandomized, &stops, &mut rng_for(seed, 0), 1);
    let nf = n as f64;
    let interp = |s: f64, i: usize| {
        let j = sol.s.partition_point(|&x| x <= s).clamp(1, sol.s.len() - 1);
        let (s0, s1) = (sol.s[j - 1], sol.s[j]);
        let w = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        sol.y[j - 1][i] * (1.0 - w) + sol.y[j][i] * w
    };
    let mut sup = [0.0f64; 4];
    for r in &tr.rows {
        let s = r.t as f64 / nf;
        for (i, got) in [r.x, r.y, r.l1, r.l2].into_iter().enumerate() {
            sup[i] = sup[i].max((got as f64 / nf - interp(s, i)).abs());
        }
    }
    let k = sol.y.iter().position(|y| y[0] >= 0.99).expect("x reaches 0.99");
    let (s0, s1, x0, x1) = (sol.s[k - 1], sol.s[k], sol.y[k - 1][0], sol.y[k][0]);
    TrajectoryCheck {
        sup,
        hit_099: tr.hitting_time(|r| r.x as f64 >= 0.99 * nf).map(|t| t as f64 / nf),
        ode_hit_099: s0 + (0.99 - x0) / (x1 - x0) * (s1 - s0),
    }
}

/// `τ_q / n` for `q = 1..=phases` of one degree-greedy run.
pub fn dg_phase_times(n: usize, phases: u32, seed: u64) -> Vec<f64> {
    let mut st = ProcessState::with_mode(n, Mode::Dg).expect("n >= 2");
    let stops = [StopCondition::PhaseReached(phases + 1), StopCondition::StepBudget(4 * n as u64)];
    let tr = run_on(&mut st, &DegreeGreedy, &stops, &mut rng_for(seed, 0), 1);
    tr.phase_times[1..].iter().map(|&t| t as f64 / n as f64).collect()
}

/// Worst `|z - w1 - w2 + t1 + t2 - f(s)|` over `k` random `s in [0, 3]`.
pub fn identity_residual(f: &dyn Fn(f64) -> f64, k: usize, seed: u64) -> f64 {
    let mut rng = rng_for(seed, 2_000_003);
    (0..k)
        .map(|_| {
            let s = rng.random_range(0.0..3.0);
            (closed_forms(s).bound() - f(s)).abs()
        })
        .fold(0.0, f64::max)
}

/// Worst closed-form vs quadrature gap over `k` random `s in [0, 2]`.
pub fn quadrature_residual(k: usize, seed: u64) -> f64 {
    let mut rng = rng_for(seed, 3_000_017);
    let ss: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.0)).collect();
    let mut worst = 0.0f64;
    for s in ss {
        let c = closed_forms(s);
        for w in Structure::ALL {
            let o = quadrature_oracle(s, w).unwrap_or(f64::NAN);
            let d = (c.get(w) - o).abs();
            worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
        }
    }
    worst
}

/// Chi-square p-value of the square draws over `steps` rounds.
pub fn square_uniformity_p(n: usize, steps: u64, seed: u64) -> f64 {
    let mut st = ProcessState::with_mode(n, Mode::Plain).expect("n >= 2");
    let mut rng = rng_for(seed, 0);
    let mut counts = vec![0u64; n];
    for _ in 0..steps {
        counts[step(&mut st, &UniformCircles, &mut rng).u as usize] += 1;
    }
    let e = steps as f64 / n as f64;
    let chi: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((n - 1) as f64).expect("dof > 0").cdf(chi)
}

/// Number of claim-check histories that violate the bound.
pub fn claim_violations(n: usize, trials: u64, seed: u64) -> usize {
    (0..trials)
        .filter(|&k| {
            claim_check(&History::generate(n, 2 * n, CirclePolicy::Uniform, &mut rng_for(seed, k))).violated
        })
        .count()
}

fn fingerprint(s: &ProcessState) -> String {
    let mut free: Vec<u32> = (0..s.n() as u32).filter(|&v| s.free_set().contains(v)).collect();
    free.sort_unstable();
    format!("{:?}|{:?}|{:?}|{:?}|{:?}|{}", s.stats(), s.path_vertices(), s.pairs(), s.colored_edges(), free, s.step_edges().len())
}

type Check = (&'static str, Box<dyn Fn() -> Result<String, String>>);

fn ok_if(cond: bool, detail: String) -> Result<String, String> {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// One snapshot from each of `runs` independent runs, pooled per variable:
/// the mean deviation is tested against the spread of the deviations, so
/// systematic error is caught while single-state noise averages out.
fn drift_verdict(runs: u64, rows_for: impl Fn(u64) -> Vec<DriftRow>) -> Result<String, String> {
    let rows: Vec<DriftRow> = (0..runs).flat_map(rows_for).collect();
    let mut pooled: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
    for r in &rows {
        pooled.entry(r.var.split('@').next().unwrap_or(&r.var)).or_default().push(r.mean - r.expected);
    }
    let (var, z) = pooled
        .iter()
        .map(|(v, d)| {
            let m = d.len() as f64;
            let mean = d.iter().sum::<f64>() / m;
            let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
            (*v, mean.abs() / (sd / m.sqrt()).max(1e-12))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    let single = rows.iter().map(DriftRow::z).fold(0.0, f64::max);
    ok_if(z <= 3.0, format!("{} comparisons, pooled worst {var} at {z:.2} SE, single worst {single:.2} SE", rows.len()))
}

fn invariant_walk(strategy: &dyn Strategy, n: usize, steps: u64, seed: u64) -> Result<(), String> {
    let mut st = ProcessState::with_mode(n, strategy.mode()).map_err(|e| e.to_string())?;
    let mut rng = rng_for(seed, 0);
    for i in 0..steps {
        step(&mut st, strategy, &mut rng);
        if i % 37 == 0 {
            st.check_invariants().map_err(|e| format!("{} at t={}: {e}", strategy.name(), st.t()))?;
        }
    }
    st.check_invariants()
}

pub fn fast_checks(fault: Option<&str>) -> Vec<Check> {
    let perturb = fault == Some("f-coefficient");
    vec![
        (
            "state invariants along fr / dg / plain runs",
            Box::new(|| {
                invariant_walk(&FullyRandomized, 3000, 5000, 1)?;
                invariant_walk(&DegreeGreedy, 3000, 5000, 2)?;
                invariant_walk(&UniformCircles, 500, 1500, 3)?;
                Ok("checked every 37 steps".into())
            }),
        ),
        (
            "seeded runs are reproducible",
            Box::new(|| {
                let go = || {
                    let mut st = ProcessState::with_mode(5000, Mode::Fr).unwrap();
                    let tr = run_on(&mut st, &FullyRandomized, &[StopCondition::StepBudget(8000)], &mut rng_for(9, 0), 1);
                    (tr.rows, fingerprint(&st))
                };
                ok_if(go() == go(), "two runs of seed 9 compared".into())
            }),
        ),
        (
            "trial rollback restores the state",
            Box::new(|| {
                let mut st = ProcessState::with_mode(4000, Mode::Dg).unwrap();
                let mut rng = rng_for(4, 0);
                for _ in 0..4000 {
                    step(&mut st, &DegreeGreedy, &mut rng);
                }
                let before = fingerprint(&st);
                st.begin_trial();
                for _ in 0..200 {
                    step(&mut st, &DegreeGreedy, &mut rng);
                }
                st.rollback_trial();
                st.check_invariants()?;
                ok_if(fingerprint(&st) == before, "200 steps undone".into())
            }),
        ),
        (
            "square draws are uniform",
            Box::new(|| {
                let p = square_uniformity_p(1000, 1_000_000, 5);
                ok_if(p > 1e-3, format!("chi-square p = {p:.4}"))
            }),
        ),
        ("fr drift matches its equations (n = 20000)", Box::new(|| drift_verdict(24, |k| fr_drift_rows(20_000, 1, 5_000, 600 + k)))),
        ("dg drift matches its equations (n = 20000)", Box::new(|| drift_verdict(24, |k| dg_drift_rows(20_000, 1, 5_000, 700 + k)))),
        (
            "fr trajectory constant",
            Box::new(|| {
                let r = run_pipeline(&PipelineConfig { phases: 0, ..Default::default() }).map_err(|e| e.to_string())?;
                ok_if((r.alpha_star - 1.84887).abs() <= 5e-4, format!("alpha* = {:.6}", r.alpha_star))
            }),
        ),
        (
            "lower-bound root and identity",
            Box::new(move || {
                let f = move |s: f64| if perturb { f_eval(s) + 1e-3 * s * s * (-s).exp() } else { f_eval(s) };
                let beta = beta_root().map_err(|e| e.to_string())?;
                let res = identity_residual(&f, 100, 8);
                ok_if(
                    (beta - 1.26575).abs() <= 1e-4 && f(0.0).abs() <= 1e-12 && res <= 1e-9,
                    format!("beta = {beta:.6}, identity residual {res:.2e}"),
                )
            }),
        ),
        (
            "closed forms agree with quadrature",
            Box::new(|| {
                let r = quadrature_residual(2, 9);
                ok_if(r <= 1e-6, format!("worst gap {r:.2e}"))
            }),
        ),
        (
            "usable squares never exceed the count (n = 7)",
            Box::new(|| {
                let v = claim_violations(7, 200, 10);
                ok_if(v == 0, format!("{v} violations in 200 histories"))
            }),
        ),
        (
            "clean-up closes a Hamiltonian cycle (n = 20000)",
            Box::new(|| {
                let n = 20_000;
                let mut st = ProcessState::with_mode(n, Mode::Fr).unwrap();
                let mut rng = rng_for(11, 0);
                run_on(&mut st, &FullyRandomized, &[StopCondition::UnsaturatedBelow(100)], &mut rng, 1000);
                let rep = cleanup_run(&mut st, CloseConfig::standard(n), &mut rng).map_err(|e| e.to_string())?;
                Ok(format!("{} clean-up steps", rep.steps))
            }),
        ),
        (
            "full pipeline yields a verified cycle (n = 20000)",
            Box::new(|| {
                let r = run_full(20_000, 12, &FullConfig::default()).map_err(|e| e.to_string())?;
                Ok(format!("{:.4} n steps", r.total_steps as f64 / 20_000.0))
            }),
        ),
    ]
}

pub fn full_checks() -> Vec<Check> {
    vec![
        (
            "fr trajectory follows the ODE (n = 100000)",
            Box::new(|| {
                let c = fr_trajectory(100_000, 13, 1.8);
                let worst = c.sup.iter().cloned().fold(0.0, f64::max);
                ok_if(worst <= 0.01, format!("sup deviations {:?}", c.sup.map(|x| format!("{x:.4}"))))
            }),
        ),
        (
            "dg phase ends follow the ODE (n = 100000)",
            Box::new(|| {
                let r = run_pipeline(&PipelineConfig { phases: 5, ..Default::default() }).map_err(|e| e.to_string())?;
                let tau = dg_phase_times(100_000, 5, 14);
                let worst = tau.iter().zip(&r.sigma).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                ok_if(tau.len() == 5 && worst <= 0.01, format!("worst |tau/n - sigma| = {worst:.4}"))
            }),
        ),
        (
            "N = 100 pipeline terminal time",
            Box::new(|| {
                let r = run_pipeline(&PipelineConfig::default()).map_err(|e| e.to_string())?;
                let s = *r.sigma.last().unwrap();
                ok_if((s - 1.80249).abs() <= 1e-3, format!("sigma_N = {s:.6}, alpha = {:.6}", r.alpha))
            }),
        ),
    ]
}

pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub fn run_checks(checks: Vec<Check>) -> Vec<Outcome> {
    checks
        .into_iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let r = f();
            let seconds = t.elapsed().as_secs_f64();
            let o = match r {
                Ok(detail) => Outcome { name, passed: true, detail, seconds },
                Err(detail) => Outcome { name, passed: false, detail, seconds },
            };
            println!("[{}] {:<48} {:>7.2}s  {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.seconds, o.detail);
            o
        })
        .collect()
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    let mut checks = fast_checks(a.inject_fault.as_deref());
    if a.full {
        checks.extend(full_checks());
    }
    let outcomes = run_checks(checks);
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        return Err(VerifyFailed(format!("{failed} check(s) failed")).into());
    }
    Ok(())
}
