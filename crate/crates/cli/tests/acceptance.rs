//! Acceptance criteria, one test each. Every test writes a single
//! `[PASS]`/`[FAIL]` line to the uncaptured stdout and then asserts.

use semiham::baseline::UniformCircles;
use semiham::cleanup::{cleanup_run, CloseConfig};
use semiham::engine::run_on;
use semiham::fr::FullyRandomized;
use semiham::lower_bound::{beta_root, closed_forms, count_structures, f_eval, History};
use semiham::ode::{run_pipeline, PipelineConfig};
use semiham::pipeline::{run_full, FullConfig};
use semiham::{rng_for, Mode, ProcessState, StopCondition};
use semiham_cli::verify::{
    claim_violations, dg_drift_rows, dg_phase_times, fr_drift_rows, fr_trajectory, identity_residual,
    quadrature_residual, DriftRow,
};
use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

const N: usize = 100_000;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let line = format!("\n[{}] C{id:02} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn semiham(args: &[&str], out: &Path) -> (serde_json::Value, f64) {
    let t = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_semiham"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary runs");
    let secs = t.elapsed().as_secs_f64();
    assert!(status.success(), "semiham {args:?} exited with {status}");
    let text = std::fs::read_to_string(out.join("summary.json")).expect("summary written");
    (serde_json::from_str(&text).expect("summary is JSON"), secs)
}

#[test]
fn c01_fr_constant() {
    let dir = tempfile::tempdir().unwrap();
    let (s, secs) = semiham(&["ode", "--system", "fr"], dir.path());
    let a = s["constants"]["alpha_star"].as_f64().unwrap();
    report(1, "fr ODE constant", within(a, 1.84887, 5e-4) && secs < 60.0, format!("alpha* = {a:.6} in {secs:.2}s"));
}

#[test]
fn c02_dg_pipeline_constants() {
    let dir = tempfile::tempdir().unwrap();
    let (s, secs) = semiham(&["ode", "--system", "dg-pipeline", "--N", "100"], dir.path());
    let d = &s["details"];
    let get = |k: &str| d[k].as_f64().unwrap();
    let sigma = s["hitting_times"]["sigma_100"].as_f64().unwrap();
    let checks = [
        ("sigma_N", sigma, within(sigma, 1.80249, 1e-3)),
        ("x_hat", get("x_hat"), within(get("x_hat"), 0.99991, 1e-4)),
        ("y_hat", get("y_hat"), within(get("y_hat"), 2.97e-6, 1e-6)),
        ("l1_hat", get("l1_hat"), within(get("l1_hat"), 1.943e-4, 1e-5)),
        ("alpha*", get("alpha_star"), within(get("alpha_star"), 0.014468, 5e-4)),
        ("alpha", get("alpha"), (1.8160..=1.8180).contains(&get("alpha"))),
    ];
    let detail = checks
        .iter()
        .map(|(k, v, ok)| format!("{k} = {v:.6e}{}", if *ok { "" } else { " (out of band)" }))
        .collect::<Vec<_>>()
        .join(", ");
    let pass = checks.iter().all(|c| c.2) && secs < 600.0;
    report(2, "N = 100 pipeline constants", pass, format!("{detail}; {secs:.2}s"));
}

#[test]
fn c03_lower_bound_root() {
    let beta = beta_root().unwrap();
    let f0 = f_eval(0.0);
    let res = identity_residual(&f_eval, 100, 3);
    report(
        3,
        "lower-bound root and identity",
        within(beta, 1.26575, 1e-4) && f0.abs() <= 1e-12 && res <= 1e-9,
        format!("beta = {beta:.7}, f(0) = {f0:.1e}, identity residual {res:.1e}"),
    );
}

#[test]
fn c04_quadrature_oracles() {
    let r = quadrature_residual(10, 4);
    report(4, "closed forms vs nested quadrature", r <= 1e-6, format!("worst gap {r:.2e} over 10 s"));
}

#[test]
fn c05_fr_simulation_vs_ode() {
    let mut worst = [0.0f64; 4];
    let mut hits = Vec::new();
    let mut ode_hit = 0.0;
    let mut slowest = 0.0f64;
    for seed in 0..5 {
        let t = Instant::now();
        let c = fr_trajectory(N, 500 + seed, 1.8);
        slowest = slowest.max(t.elapsed().as_secs_f64());
        for (w, s) in worst.iter_mut().zip(c.sup) {
            *w = w.max(s);
        }
        hits.push(c.hit_099.unwrap_or(f64::NAN));
        ode_hit = c.ode_hit_099;
    }
    let sup_ok = worst.iter().all(|&w| w <= 0.01);
    let hit_ok = hits.iter().all(|h| (1.82..=1.87).contains(h));
    report(
        5,
        "fr simulation follows the ODE",
        sup_ok && hit_ok && slowest < 300.0,
        format!(
            "sup |X,Y,L1,L2| = {:?}; X >= 0.99n at {:?} (ODE {ode_hit:.4}, band [1.82, 1.87]); slowest seed {slowest:.2}s",
            worst.map(|w| (w * 1e4).round() / 1e4),
            hits.iter().map(|h| (h * 1e4).round() / 1e4).collect::<Vec<_>>(),
        ),
    );
}

#[test]
fn c06_dg_phase_times() {
    let ode = run_pipeline(&PipelineConfig { phases: 5, ..Default::default() }).unwrap();
    let tau = dg_phase_times(N, 5, 600);
    let worst = tau.iter().zip(&ode.sigma).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report(
        6,
        "degree-greedy phase ends",
        tau.len() == 5 && worst <= 0.01,
        format!("tau/n = {tau:.4?}, sigma = {:.4?}, worst gap {worst:.4}", ode.sigma),
    );
}

fn drift_summary(rows: &[DriftRow]) -> (bool, String) {
    let worst = rows.iter().max_by(|a, b| a.z().total_cmp(&b.z())).unwrap();
    let over = rows.iter().filter(|r| r.z() > 3.0).count();
    (
        over == 0,
        format!("{} comparisons, {over} beyond 3 SE, worst {} at t = {} is {:.2} SE", rows.len(), worst.var, worst.t, worst.z()),
    )
}

#[test]
fn c07_drift_conformance() {
    let (fr_ok, fr) = drift_summary(&fr_drift_rows(N, 10, 100_000, 700));
    let (dg_ok, dg) = drift_summary(&dg_drift_rows(N, 10, 100_000, 701));
    report(7, "one-step drift matches the equations", fr_ok && dg_ok, format!("fr: {fr}; dg: {dg}"));
}

#[test]
fn c08_structure_counts() {
    let s = 1.26575;
    let t = (s * N as f64).round() as u64;
    let mut sums = [0.0f64; 6];
    for seed in 0..5 {
        let mut st = ProcessState::with_mode(N, Mode::Plain).unwrap();
        run_on(&mut st, &UniformCircles, &[StopCondition::StepBudget(t)], &mut rng_for(800 + seed, 0), N as u64);
        let c = count_structures(&History::from_edges(N, st.step_edges()));
        for (acc, v) in sums.iter_mut().zip([c.z as f64, c.w1 as f64, c.w2 as f64, c.t1 as f64, c.t2 as f64, c.bound() as f64]) {
            *acc += v / N as f64 / 5.0;
        }
    }
    let cf = closed_forms(s);
    let want = [cf.z, cf.w1, cf.w2, cf.t1, cf.t2];
    let rel: Vec<f64> = sums.iter().zip(want).map(|(g, w)| (g - w) / w).collect();
    let pass = rel.iter().all(|r| r.abs() <= 0.02) && within(sums[5], 1.0, 0.02);
    report(
        8,
        "Monte Carlo structure counts",
        pass,
        format!(
            "relative errors z/w1/w2/t1/t2 = {:?}, bound/n = {:.4}",
            rel.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>(),
            sums[5]
        ),
    );
}

#[test]
fn c09_claim_brute_force() {
    let v = claim_violations(7, 1000, 900);
    report(9, "usable squares bounded by the count", v == 0, format!("{v} violations in 1000 histories (n = 7)"));
}

fn is_cycle(n: usize, cycle: &[u32], edges: &[(u32, u32)]) -> bool {
    let set: HashSet<(u32, u32)> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let distinct: HashSet<u32> = cycle.iter().copied().collect();
    cycle.len() == n
        && distinct.len() == n
        && (0..n).all(|i| {
            let (a, b) = (cycle[i], cycle[(i + 1) % n]);
            set.contains(&(a.min(b), a.max(b)))
        })
}

#[test]
fn c10_end_to_end() {
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        match run_full(N, 1000 + seed, &FullConfig::default()) {
            Ok(r) => {
                let per_n = r.total_steps as f64 / N as f64;
                worst = worst.max(per_n);
                if is_cycle(N, &r.cycle, &r.edges) && per_n <= 1.85 {
                    ok += 1;
                }
            }
            Err(e) => eprintln!("seed {seed}: {e}"),
        }
    }
    report(10, "full pipeline builds a Hamiltonian cycle", ok == 10, format!("{ok}/10 verified, worst {worst:.4} n steps"));
}

fn cleanup_steps(eps: f64, seed: u64) -> u64 {
    let mut st = ProcessState::with_mode(N, Mode::Fr).unwrap();
    let mut rng = rng_for(seed, 0);
    let stops = [StopCondition::UnsaturatedBelow((eps * N as f64).ceil() as usize)];
    run_on(&mut st, &FullyRandomized, &stops, &mut rng, N as u64);
    let rep = cleanup_run(&mut st, CloseConfig::standard(N), &mut rng).expect("clean-up succeeds");
    rep.steps
}

#[test]
fn c11_cleanup_scaling() {
    let nf = N as f64;
    let mut means = Vec::new();
    let mut within_bound = true;
    for eps in [0.02f64, 0.005] {
        let bound = 20.0 * (eps.sqrt() * nf + nf.powf(0.75) * nf.ln().powi(2));
        let steps: Vec<u64> = (0..10).map(|k| cleanup_steps(eps, 1100 + k)).collect();
        within_bound &= steps.iter().all(|&s| s as f64 <= bound);
        means.push(steps.iter().sum::<u64>() as f64 / steps.len() as f64);
    }
    let ratio = means[0] / means[1];
    report(
        11,
        "clean-up cost scales with sqrt(eps)",
        within_bound && (1.4..=2.6).contains(&ratio),
        format!("mean steps {:.0} (eps 0.02) and {:.0} (eps 0.005), ratio {ratio:.3}", means[0], means[1]),
    );
}

#[test]
fn c12_performance() {
    let n = 1_000_000;
    let t = Instant::now();
    let mut st = ProcessState::with_mode(n, Mode::Fr).unwrap();
    run_on(&mut st, &FullyRandomized, &[StopCondition::StepBudget(1_000_000)], &mut rng_for(1200, 0), 10_000);
    let sim = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_semiham"))
        .arg("verify")
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    let ver = t.elapsed().as_secs_f64();
    report(
        12,
        "performance",
        st.t() == 1_000_000 && sim < 10.0 && ver < 300.0,
        format!("1e6 fr steps in {sim:.2}s, verify in {ver:.2}s (exit {})", status.code().unwrap_or(-1)),
    );
}
