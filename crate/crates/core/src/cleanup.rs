//! Finishing stage: absorb the last `εn` off-path vertices by repeatedly
//! building a reservoir of red path vertices and augmenting through them, then
//! close the Hamiltonian path into a cycle.

use crate::engine::{other_vertex, SimRng};
use crate::state::{Class, Loc, Mode, ProcessState, Vertex, RED0};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CleanupError {
    #[error("unsaturated fraction {0} is outside [0, 1)")]
    EpsilonOutOfRange(f64),
    #[error("path does not span all vertices")]
    NotSpanning,
    #[error("no cycle closed after {attempts} attempts ({steps} steps)")]
    Retry { attempts: u32, steps: u64 },
    #[error("closed cycle failed validation: {0}")]
    Invalid(String),
}

/// Iteration schedule: target unsaturated counts and reservoir sizes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plan {
    pub n: usize,
    pub eps: f64,
    /// Number of halving iterations.
    pub tau1: usize,
}

impl Plan {
    pub fn new(n: usize, unsaturated: usize) -> Self {
        let eps = unsaturated as f64 / n as f64;
        let quarter = ceil_root(n, 4);
        let mut j = unsaturated;
        let mut tau1 = 0;
        while j > quarter {
            j = j.div_ceil(2);
            tau1 += 1;
        }
        Plan { n, eps, tau1 }
    }

    /// Next unsaturated target from the current count.
    pub fn next_target(&self, j: usize) -> usize {
        if j > ceil_root(self.n, 4) {
            j.div_ceil(2)
        } else {
            j - 1
        }
    }

    /// Reservoir size for iteration `k >= 1`.
    pub fn reservoir(&self, k: usize) -> usize {
        if k <= self.tau1 {
            let m = self.eps.sqrt() * 0.5f64.powf(k as f64 / 2.0) * self.n as f64;
            m.ceil() as usize
        } else {
            ceil_root(self.n, 2)
        }
    }

    /// Full list of targets `j_1, j_2, ..., 0` from `j_0`.
    pub fn schedule(&self, j0: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut j = j0;
        while j > 0 {
            j = self.next_target(j);
            out.push(j);
        }
        out
    }
}

/// Smallest integer `m` with `m^k >= n`.
fn ceil_root(n: usize, k: u32) -> usize {
    let mut m = (n as f64).powf(1.0 / k as f64).round() as usize;
    while m.pow(k) < n {
        m += 1;
    }
    while m > 0 && (m - 1).pow(k) >= n {
        m -= 1;
    }
    m
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CleanupReport {
    pub eps: f64,
    pub iterations: usize,
    pub tau1: usize,
    pub reservoir_steps: u64,
    pub absorb_steps: u64,
    pub cap_hits: usize,
    pub close: Option<CloseReport>,
    pub steps: u64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CloseConfig {
    pub mark_steps: u64,
    pub budget: u64,
    pub attempts: u32,
}

impl CloseConfig {
    /// `√n ln n` marking rounds, twice that in total per attempt, ten attempts.
    pub fn standard(n: usize) -> Self {
        let m = ((n as f64).sqrt() * (n as f64).ln()).ceil() as u64;
        CloseConfig { mark_steps: m, budget: 2 * m, attempts: 10 }
    }

    /// `⌈√n⌉` marking rounds; the hit in the second stage then takes about
    /// `√n` more rounds.
    pub fn short(n: usize) -> Self {
        let c = Self::standard(n);
        CloseConfig { mark_steps: ceil_root(n, 2) as u64, ..c }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CloseReport {
    pub steps: u64,
    pub attempts: u32,
    #[serde(skip)]
    pub cycle: Vec<Vertex>,
}

/// Build the reservoir and absorb until the path is Hamiltonian, then close it.
pub fn cleanup_run(
    state: &mut ProcessState,
    close: CloseConfig,
    rng: &mut SimRng,
) -> Result<CleanupReport, CleanupError> {
    let n = state.n();
    let start = state.t();
    let plan = Plan::new(n, state.unsaturated_len());
    if !(0.0..1.0).contains(&plan.eps) {
        return Err(CleanupError::EpsilonOutOfRange(plan.eps));
    }
    if plan.eps > 1e-3 {
        log::warn!("clean-up started with eps = {:.5} above 1/1000", plan.eps);
    }
    state.clear_colors();
    state.dissolve_pairs();
    state.set_mode(Mode::Plain);
    let mut rep = CleanupReport { eps: plan.eps, tau1: plan.tau1, ..Default::default() };
    let mut k = 0;
    while state.unsaturated_len() > 0 {
        k += 1;
        let target = plan.next_target(state.unsaturated_len());
        let m = plan.reservoir(k).min(state.path_len() / 3).max(1);
        state.clear_colors();
        let t0 = state.t();
        build_reservoir(state, m, rng);
        let t1 = state.t();
        rep.reservoir_steps += t1 - t0;
        let need = state.unsaturated_len() - target;
        let cap = 10 * ((need as f64) * n as f64 / (2.0 * m as f64)).ceil() as u64 + 10;
        if !absorb(state, target, cap, rng) {
            rep.cap_hits += 1;
            log::warn!(
                "clean-up iteration {k}: absorption cap {cap} reached with {} unsaturated left (target {target})",
                state.unsaturated_len()
            );
        }
        rep.absorb_steps += state.t() - t1;
    }
    rep.iterations = k;
    state.clear_colors();
    let c = close_cycle(state, close, rng)?;
    rep.close = Some(c);
    rep.steps = state.t() - start;
    Ok(rep)
}

/// Step (ii): colour `m` pairwise non-adjacent path vertices red, each towards
/// an unsaturated vertex with fewest red neighbours.
fn build_reservoir(state: &mut ProcessState, m: usize, rng: &mut SimRng) {
    let n = state.n();
    while state.colored_len() < m {
        let u = rng.random_range(0..n as Vertex);
        let blocked = state.loc(u) != Loc::Path
            || state.class(u) != Class::Uncolored
            || [state.left_of(u), state.right_of(u)]
                .into_iter()
                .flatten()
                .any(|x| state.colored_set().contains(x));
        if blocked {
            state.pass(u, other_vertex(n, u, rng));
            continue;
        }
        let v = state.degree_buckets().sample_min(rng).expect("unsaturated vertices remain");
        state.color_edge(u, v, crate::state::Color::Red).expect("legal red edge");
    }
}

/// Step (iii): augment through red path neighbours until `target` unsaturated
/// vertices remain. Returns false if `cap` rounds or the reservoir ran out first.
fn absorb(state: &mut ProcessState, target: usize, cap: u64, rng: &mut SimRng) -> bool {
    let n = state.n();
    let mut used = 0;
    while state.unsaturated_len() > target {
        if used >= cap || state.colored_len() == 0 {
            return false;
        }
        used += 1;
        let u = rng.random_range(0..n as Vertex);
        let x = if state.loc(u) == Loc::Path {
            [state.left_of(u), state.right_of(u)]
                .into_iter()
                .flatten()
                .find(|&x| state.colored_set().contains(x))
        } else {
            None
        };
        match x {
            Some(x) => state.path_augment(u, x, RED0).expect("legal augmentation"),
            None => state.pass(u, other_vertex(n, u, rng)),
        }
    }
    true
}

/// Close a Hamiltonian path `a ... b` into a cycle. First stage: circles on
/// `a`, marking the left neighbour of every square. Second stage: circles on
/// `b`; a square on a marked `x` with `y` right of it yields the cycle
/// `a..x, x b, b..y, y a`.
pub fn close_cycle(
    state: &mut ProcessState,
    cfg: CloseConfig,
    rng: &mut SimRng,
) -> Result<CloseReport, CleanupError> {
    let n = state.n();
    if state.path_len() != n {
        return Err(CleanupError::NotSpanning);
    }
    let (a, b) = state.endpoints().expect("non-empty path");
    let start = state.t();
    let mut marked = vec![false; n];
    for attempt in 1..=cfg.attempts {
        marked.iter_mut().for_each(|m| *m = false);
        let mut used = 0;
        while used < cfg.mark_steps.min(cfg.budget) {
            used += 1;
            let u = rng.random_range(0..n as Vertex);
            if u == a {
                state.pass(u, other_vertex(n, u, rng));
                continue;
            }
            state.record_edge(u, a);
            marked[state.left_of(u).expect("u is not the left end") as usize] = true;
        }
        while used < cfg.budget {
            used += 1;
            let u = rng.random_range(0..n as Vertex);
            if u == b {
                state.pass(u, other_vertex(n, u, rng));
                continue;
            }
            state.record_edge(u, b);
            if marked[u as usize] {
                let path = state.path_vertices();
                let i = path.iter().position(|&v| v == u).unwrap();
                let mut cycle = path[..=i].to_vec();
                cycle.extend(path[i + 1..].iter().rev());
                state.verify_cycle(&cycle).map_err(CleanupError::Invalid)?;
                return Ok(CloseReport { steps: state.t() - start, attempts: attempt, cycle });
            }
        }
        log::warn!("cycle closing attempt {attempt} exhausted its budget of {}", cfg.budget);
    }
    Err(CleanupError::Retry { attempts: cfg.attempts, steps: state.t() - start })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng_for;

    #[test]
    fn roots_round_up() {
        assert_eq!(ceil_root(100_000, 4), 18);
        assert_eq!(ceil_root(100_000, 2), 317);
        assert_eq!(ceil_root(16, 4), 2);
        assert_eq!(ceil_root(17, 4), 3);
    }

    #[test]
    fn schedule_halves_then_counts_down() {
        let p = Plan::new(100_000, 2000);
        let s = p.schedule(2000);
        assert_eq!(&s[..4], &[1000, 500, 250, 125]);
        assert!(s.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(*s.last().unwrap(), 0);
        let tail = s.iter().position(|&j| j <= 18).unwrap();
        assert!(s[tail..].windows(2).all(|w| w[0] - w[1] == 1));
        assert_eq!(p.tau1, tail + 1);
    }

    #[test]
    fn closes_a_spanning_path() {
        let n = 400;
        let path: Vec<u32> = (0..n as u32).collect();
        let mut s = ProcessState::from_parts(n, &path, &[], &[]).unwrap();
        s.set_mode(Mode::Plain);
        let mut rng = rng_for(4, 0);
        let rep = close_cycle(&mut s, CloseConfig::standard(n), &mut rng).unwrap();
        assert_eq!(rep.cycle.len(), n);
    }

    #[test]
    fn zero_budget_asks_for_retry() {
        let n = 50;
        let path: Vec<u32> = (0..n as u32).collect();
        let mut s = ProcessState::from_parts(n, &path, &[], &[]).unwrap();
        let mut rng = rng_for(4, 0);
        let cfg = CloseConfig { mark_steps: 0, budget: 0, attempts: 3 };
        assert!(matches!(close_cycle(&mut s, cfg, &mut rng), Err(CleanupError::Retry { attempts: 3, .. })));
    }

    #[test]
    fn finishes_from_partial_path() {
        let n = 2000;
        let path: Vec<u32> = (0..1900).collect();
        let pairs: Vec<(u32, u32)> = (0..20).map(|i| (1900 + 2 * i, 1901 + 2 * i)).collect();
        let mut s = ProcessState::from_parts(n, &path, &pairs, &[(10, 1990)]).unwrap();
        let mut rng = rng_for(9, 0);
        let rep = cleanup_run(&mut s, CloseConfig::short(n), &mut rng).unwrap();
        assert_eq!(s.path_len(), n);
        assert!(rep.close.is_some());
        s.check_invariants().unwrap();
    }
}
