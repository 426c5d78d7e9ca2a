//! Strategies that ignore the path machinery and only place circles. Used as
//! references for the square-counting statistics.

use crate::engine::{other_vertex, Decision, SimRng, Strategy};
use crate::state::{Mode, ProcessState, Vertex};

/// Circle uniform over `[n] \ {u}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformCircles;

impl Strategy for UniformCircles {
    fn name(&self) -> &'static str {
        "uniform"
    }
    fn mode(&self) -> Mode {
        Mode::Plain
    }
    fn decide(&self, s: &ProcessState, u: Vertex, rng: &mut SimRng) -> Decision {
        Decision::Pass { v: other_vertex(s.n(), u, rng) }
    }
}

/// Round `t` puts its circle on vertex `floor(t / 3) mod n` (the next vertex
/// if that equals the square), so after `3n` rounds every vertex owns three
/// circles: the 3-out process.
#[derive(Clone, Copy, Debug, Default)]
pub struct ThreeOut;

impl Strategy for ThreeOut {
    fn name(&self) -> &'static str {
        "three-out"
    }
    fn mode(&self) -> Mode {
        Mode::Plain
    }
    fn decide(&self, s: &ProcessState, u: Vertex, _rng: &mut SimRng) -> Decision {
        let n = s.n() as u64;
        let mut v = ((s.t() / 3) % n) as Vertex;
        if v == u {
            v = ((v as u64 + 1) % n) as Vertex;
        }
        Decision::Pass { v }
    }
}

/// Circle on the vertex with fewest circles so far, ties by index; spreads
/// circles as evenly as possible.
#[derive(Clone, Copy, Debug, Default)]
pub struct RoundRobin;

impl Strategy for RoundRobin {
    fn name(&self) -> &'static str {
        "round-robin"
    }
    fn mode(&self) -> Mode {
        Mode::Plain
    }
    fn decide(&self, s: &ProcessState, u: Vertex, _rng: &mut SimRng) -> Decision {
        let n = s.n() as u64;
        let mut v = (s.t() % n) as Vertex;
        if v == u {
            v = ((v as u64 + 1) % n) as Vertex;
        }
        Decision::Pass { v }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, StopCondition};

    #[test]
    fn three_out_gives_each_vertex_three_circles() {
        let n = 50;
        let mut s = ProcessState::with_mode(n, Mode::Plain).unwrap();
        let mut rng = crate::engine::rng_for(1, 0);
        crate::engine::run_on(&mut s, &ThreeOut, &[StopCondition::StepBudget(3 * n as u64)], &mut rng, 1);
        let mut circles = vec![0; n];
        for &(_, v) in s.step_edges() {
            circles[v as usize] += 1;
        }
        // bumps move at most a few circles to the next vertex
        let three = circles.iter().filter(|&&c| c == 3).count();
        assert!(three >= n - 10, "{circles:?}");
        assert_eq!(circles.iter().sum::<usize>(), 3 * n);
    }

    #[test]
    fn zero_budget_gives_empty_trace() {
        let t = run(&UniformCircles, 10, &[StopCondition::StepBudget(0)], 0).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].t, 0);
    }
}
