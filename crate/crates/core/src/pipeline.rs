//! Full construction: degree-greedy for `N` phases, fully-randomized until few
//! vertices are left off the path, then clean-up and closing.

use crate::cleanup::{cleanup_run, CleanupError, CleanupReport, CloseConfig};
use crate::dg::DegreeGreedy;
use crate::engine::{default_stride, rng_for, run_on, SimRng, StopCondition, Trace};
use crate::fr::FullyRandomized;
use crate::state::{Mode, ProcessState, StateError, Vertex};
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FullConfig {
    /// Number of degree-greedy phases.
    pub phases: u32,
    /// The fully-randomized stage stops once fewer than `max(handoff * n, 1)`
    /// vertices are off the path; 0 runs it until the path spans.
    pub handoff: f64,
    /// Safety budget per simulation stage, as a multiple of `n`.
    pub stage_budget: f64,
    /// Record every `stride`-th step in the traces; 0 picks a default.
    pub stride: u64,
}

impl Default for FullConfig {
    fn default() -> Self {
        FullConfig { phases: 100, handoff: 0.0, stage_budget: 4.0, stride: 0 }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Cleanup(#[from] CleanupError),
    #[error("{stage} stage used its whole budget of {budget} steps")]
    Budget { stage: &'static str, budget: u64 },
    #[error("handoff fraction {0} must lie in [0, 0.001]")]
    Handoff(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct FullReport {
    pub n: usize,
    pub phases: u32,
    pub dg_steps: u64,
    pub fr_steps: u64,
    pub cleanup_steps: u64,
    pub total_steps: u64,
    /// Step at which each degree-greedy phase ended.
    pub phase_times: Vec<u64>,
    pub cleanup: CleanupReport,
    #[serde(skip)]
    pub cycle: Vec<Vertex>,
    /// Every edge the process added, for independent checking of `cycle`.
    #[serde(skip)]
    pub edges: Vec<(Vertex, Vertex)>,
    #[serde(skip)]
    pub dg_trace: Trace,
    #[serde(skip)]
    pub fr_trace: Trace,
}

/// Run all three stages on stream 0 of `seed`.
pub fn run_full(n: usize, seed: u64, cfg: &FullConfig) -> Result<FullReport, PipelineError> {
    run_full_with(n, &mut rng_for(seed, 0), cfg)
}

pub fn run_full_with(n: usize, rng: &mut SimRng, cfg: &FullConfig) -> Result<FullReport, PipelineError> {
    if !(0.0..=1e-3).contains(&cfg.handoff) {
        return Err(PipelineError::Handoff(cfg.handoff));
    }
    let stride = if cfg.stride == 0 { default_stride(n) } else { cfg.stride };
    let budget = (cfg.stage_budget * n as f64).ceil() as u64;
    let mut state = ProcessState::with_mode(n, Mode::Dg)?;

    let dg_stops = [StopCondition::PhaseReached(cfg.phases + 1), StopCondition::StepBudget(budget)];
    let dg_trace = run_on(&mut state, &DegreeGreedy, &dg_stops, rng, stride);
    if dg_trace.status == crate::engine::Status::Exhausted {
        return Err(PipelineError::Budget { stage: "degree-greedy", budget });
    }
    let dg_steps = state.t();

    state.convert_to_fr();
    let threshold = (cfg.handoff * n as f64).ceil() as usize;
    let fr_stops = [StopCondition::UnsaturatedBelow(threshold.max(1)), StopCondition::StepBudget(budget)];
    let fr_trace = run_on(&mut state, &FullyRandomized, &fr_stops, rng, stride);
    if fr_trace.status == crate::engine::Status::Exhausted {
        return Err(PipelineError::Budget { stage: "fully-randomized", budget });
    }
    let fr_steps = state.t() - dg_steps;

    let cleanup = cleanup_run(&mut state, CloseConfig::short(n), rng)?;
    let cycle = cleanup.close.as_ref().map(|c| c.cycle.clone()).unwrap_or_default();
    Ok(FullReport {
        n,
        phases: cfg.phases,
        dg_steps,
        fr_steps,
        cleanup_steps: cleanup.steps,
        total_steps: state.t(),
        phase_times: dg_trace.phase_times[1..].to_vec(),
        cleanup,
        cycle,
        edges: state.all_edges().to_vec(),
        dg_trace,
        fr_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_closes_a_cycle() {
        let cfg = FullConfig { phases: 3, handoff: 1e-3, ..Default::default() };
        let r = run_full(2000, 11, &cfg).unwrap();
        assert_eq!(r.cycle.len(), 2000);
        assert_eq!(r.total_steps, r.dg_steps + r.fr_steps + r.cleanup_steps);
        assert_eq!(r.phase_times.len(), 3);
    }

    #[test]
    fn rejects_large_handoff() {
        let cfg = FullConfig { handoff: 0.01, ..Default::default() };
        assert!(matches!(run_full(100, 0, &cfg), Err(PipelineError::Handoff(_))));
    }
}
