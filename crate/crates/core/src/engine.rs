//! Step loop of the process: draw a square, ask the strategy for a circle,
//! apply, record.

use crate::state::{Color, Mode, ProcessState, StateError, Vertex, BLUE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub type SimRng = ChaCha8Rng;

/// Independent stream `index` of the master seed.
pub fn rng_for(master: u64, index: u64) -> SimRng {
    let mut r = ChaCha8Rng::seed_from_u64(master);
    r.set_stream(index);
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    YExtend { v: Vertex },
    PathExtend,
    Augment { x: Vertex, slot: usize },
    ColorEdge { v: Vertex, color: Color },
    Pass { v: Vertex },
}

impl Decision {
    pub fn tag(&self) -> usize {
        match self {
            Decision::YExtend { .. } => 0,
            Decision::PathExtend => 1,
            Decision::Augment { .. } => 2,
            Decision::ColorEdge { .. } => 3,
            Decision::Pass { .. } => 4,
        }
    }
}

pub const DECISION_TAGS: [&str; 5] = ["y_extend", "path_extend", "augment", "color_edge", "pass"];

pub trait Strategy {
    fn name(&self) -> &'static str;
    /// Colour discipline the strategy expects the state to be in.
    fn mode(&self) -> Mode;
    fn decide(&self, state: &ProcessState, u: Vertex, rng: &mut SimRng) -> Decision;
}

/// Uniform vertex of `[n] \ {u}`.
#[inline]
pub fn other_vertex(n: usize, u: Vertex, rng: &mut SimRng) -> Vertex {
    let v = rng.random_range(0..n as u32 - 1);
    if v >= u {
        v + 1
    } else {
        v
    }
}

pub fn apply(state: &mut ProcessState, u: Vertex, d: Decision) -> Result<(), StateError> {
    match d {
        Decision::YExtend { v } => state.y_extend(u, v),
        Decision::PathExtend => state.path_extend(u),
        Decision::Augment { x, slot } => state.path_augment(u, x, slot),
        Decision::ColorEdge { v, color } => state.color_edge(u, v, color),
        Decision::Pass { v } => {
            state.pass(u, v);
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub u: Vertex,
    pub decision: Decision,
}

/// One round. Panics if the strategy produced an illegal decision.
pub fn step(state: &mut ProcessState, strategy: &dyn Strategy, rng: &mut SimRng) -> StepRecord {
    let u = rng.random_range(0..state.n() as u32);
    let decision = strategy.decide(state, u, rng);
    if let Err(e) = apply(state, u, decision) {
        panic!("strategy {} produced illegal {decision:?} for square {u}: {e}", strategy.name());
    }
    StepRecord { u, decision }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum StopCondition {
    StepBudget(u64),
    UnsaturatedBelow(usize),
    PhaseReached(u32),
    /// The path spans every vertex (closing it is left to the clean-up stage).
    HamiltonianCycle,
}

impl StopCondition {
    fn fires(&self, s: &ProcessState, steps: u64) -> bool {
        match *self {
            StopCondition::StepBudget(b) => steps >= b,
            StopCondition::UnsaturatedBelow(k) => s.unsaturated_len() < k,
            StopCondition::PhaseReached(q) => s.phase().is_none_or(|p| p >= q),
            StopCondition::HamiltonianCycle => s.path_len() == s.n(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Status {
    Stopped(StopCondition),
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: u64,
    pub x: usize,
    pub y: usize,
    pub l1: usize,
    pub l2: usize,
    pub r: usize,
    pub b: usize,
    pub m: usize,
    pub phase: u32,
    pub d: usize,
}

impl TraceRow {
    pub fn of(s: &ProcessState) -> Self {
        let st = s.stats();
        TraceRow {
            t: st.t,
            x: st.x,
            y: st.y,
            l1: st.l1,
            l2: st.l2,
            r: st.r,
            b: st.b,
            m: st.m,
            phase: s.phase().unwrap_or(0),
            d: if s.mode() == Mode::Dg { s.phase_deficit() } else { 0 },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    pub strategy: String,
    pub n: usize,
    pub stride: u64,
    pub rows: Vec<TraceRow>,
    /// `phase_times[q]` is the step at which phase `q + 1` began, i.e. τ_q.
    pub phase_times: Vec<u64>,
    pub decision_counts: [u64; 5],
    pub status: Status,
}

impl Trace {
    /// First recorded step at which `pred` holds.
    pub fn hitting_time(&self, pred: impl Fn(&TraceRow) -> bool) -> Option<u64> {
        self.rows.iter().find(|r| pred(r)).map(|r| r.t)
    }
}

/// Default recording stride: every step up to `n = 10^5`, about `10^4` rows above.
pub fn default_stride(n: usize) -> u64 {
    if n <= 100_000 {
        1
    } else {
        n.div_ceil(10_000) as u64
    }
}

/// Run until the first stop condition fires. `state` must already be in the
/// strategy's mode.
pub fn run_on(
    state: &mut ProcessState,
    strategy: &dyn Strategy,
    stops: &[StopCondition],
    rng: &mut SimRng,
    stride: u64,
) -> Trace {
    assert!(!stops.is_empty(), "at least one stop condition is required");
    assert_eq!(state.mode(), strategy.mode(), "state mode does not match strategy");
    let stride = stride.max(1);
    let mut trace = Trace {
        strategy: strategy.name().to_string(),
        n: state.n(),
        stride,
        rows: vec![TraceRow::of(state)],
        phase_times: vec![0],
        decision_counts: [0; 5],
        status: Status::Exhausted,
    };
    let mut steps = 0u64;
    loop {
        if let Some(c) = stops.iter().find(|c| c.fires(state, steps)) {
            trace.status = match c {
                StopCondition::StepBudget(_) => Status::Exhausted,
                other => Status::Stopped(*other),
            };
            break;
        }
        let rec = step(state, strategy, rng);
        steps += 1;
        trace.decision_counts[rec.decision.tag()] += 1;
        if let Some(p) = state.phase() {
            while (trace.phase_times.len() as u32) < p {
                trace.phase_times.push(state.t());
            }
        }
        if steps.is_multiple_of(stride) {
            trace.rows.push(TraceRow::of(state));
        }
    }
    if trace.rows.last().map(|r| r.t) != Some(state.t()) {
        trace.rows.push(TraceRow::of(state));
    }
    trace
}

/// Fresh state, fresh stream, run.
pub fn run(strategy: &dyn Strategy, n: usize, stops: &[StopCondition], seed: u64) -> Result<Trace, StateError> {
    let mut state = ProcessState::with_mode(n, strategy.mode())?;
    let mut rng = rng_for(seed, 0);
    Ok(run_on(&mut state, strategy, stops, &mut rng, default_stride(n)))
}

/// Monte Carlo mean and standard error of one-step changes.
#[derive(Clone, Debug, Serialize)]
pub struct Drift {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub samples: usize,
}

/// Mean one-step change of `observe` from the current state, over `samples`
/// independent rounds. The state is restored after each round.
pub fn empirical_drift(
    state: &mut ProcessState,
    strategy: &dyn Strategy,
    samples: usize,
    rng: &mut SimRng,
    names: Vec<String>,
    observe: impl Fn(&ProcessState) -> Vec<f64>,
) -> Drift {
    let base = observe(state);
    let k = base.len();
    assert_eq!(k, names.len());
    let mut mean = vec![0.0; k];
    let mut m2 = vec![0.0; k];
    for i in 0..samples {
        state.begin_trial();
        step(state, strategy, rng);
        let now = observe(state);
        state.rollback_trial();
        for j in 0..k {
            let d = now[j] - base[j];
            let delta = d - mean[j];
            mean[j] += delta / (i + 1) as f64;
            m2[j] += delta * (d - mean[j]);
        }
    }
    let se = m2
        .iter()
        .map(|&m| if samples > 1 { (m / (samples - 1) as f64 / samples as f64).sqrt() } else { f64::NAN })
        .collect();
    Drift { names, mean, se, samples }
}

/// `(X, Y, L1, L2)` as floats.
pub fn fr_observables(s: &ProcessState) -> Vec<f64> {
    let st = s.stats();
    vec![st.x as f64, st.y as f64, st.l1 as f64, st.l2 as f64]
}

/// `(X, Y, R, C_{k1,k2} for all k1 + k2 in {q-1, q})` for the current phase `q`.
pub fn dg_observables(q: u32) -> (Vec<String>, impl Fn(&ProcessState) -> Vec<f64>) {
    let mut names = vec!["X".to_string(), "Y".to_string(), "R".to_string()];
    let mut types = Vec::new();
    for s in [q.saturating_sub(1), q] {
        for k2 in 0..=s as u16 {
            let k1 = s as u16 - k2;
            names.push(format!("C_{k1}_{k2}"));
            types.push((k1, k2));
        }
    }
    let f = move |st: &ProcessState| {
        let s = st.stats();
        let mut v = vec![s.x as f64, s.y as f64, s.r as f64];
        v.extend(types.iter().map(|&(a, b)| st.type_count(a, b) as f64));
        v
    };
    (names, f)
}

/// Lowest-index red endpoint slot of `x`, if any.
pub fn lowest_red_slot(s: &ProcessState, x: Vertex) -> Option<usize> {
    use crate::state::{RED0, RED1};
    match (s.slot(x, RED0), s.slot(x, RED1)) {
        (Some(a), Some(b)) => Some(if b < a { RED1 } else { RED0 }),
        (Some(_), None) => Some(RED0),
        (None, Some(_)) => Some(RED1),
        (None, None) => None,
    }
}

/// Slot used to augment through `x`: blue if present, else the lowest red.
pub fn augment_slot(s: &ProcessState, x: Vertex) -> Option<usize> {
    if s.slot(x, BLUE).is_some() {
        Some(BLUE)
    } else {
        lowest_red_slot(s, x)
    }
}
