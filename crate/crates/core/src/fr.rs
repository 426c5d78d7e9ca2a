//! Fully randomised strategy: one-red / two-red vertices, circles placed
//! uniformly over the unsaturated vertices.

use crate::engine::{lowest_red_slot, other_vertex, Decision, SimRng, Strategy};
use crate::state::{Class, Color, Landing, Mode, ProcessState, Vertex};

#[derive(Clone, Copy, Debug, Default)]
pub struct FullyRandomized;

impl Strategy for FullyRandomized {
    fn name(&self) -> &'static str {
        "fr"
    }

    fn mode(&self) -> Mode {
        Mode::Fr
    }

    fn decide(&self, s: &ProcessState, u: Vertex, rng: &mut SimRng) -> Decision {
        let red_to_unsaturated = |rng: &mut SimRng| match s.unsaturated_set().sample(rng) {
            Some(v) => Decision::ColorEdge { v, color: Color::Red },
            None => Decision::Pass { v: other_vertex(s.n(), u, rng) },
        };
        match s.classify_landing(u) {
            Landing::Free => Decision::YExtend { v: s.free_set().sample_excluding(u, rng).expect("|U| >= 2") },
            Landing::Paired => Decision::PathExtend,
            Landing::NextToColored(x) => Decision::Augment {
                x,
                slot: lowest_red_slot(s, x).expect("coloured vertex has a red edge"),
            },
            Landing::Permissible => red_to_unsaturated(rng),
            Landing::Colored(Class::OneRed) => red_to_unsaturated(rng),
            _ => Decision::Pass { v: other_vertex(s.n(), u, rng) },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{rng_for, step};

    #[test]
    fn first_step_pairs_two_free_vertices() {
        let mut s = ProcessState::new(1000).unwrap();
        let mut rng = rng_for(3, 0);
        let rec = step(&mut s, &FullyRandomized, &mut rng);
        assert!(matches!(rec.decision, Decision::YExtend { .. }));
        assert_eq!(s.paired_len(), 2);
    }

    #[test]
    fn last_free_vertex_passes() {
        // 0..4 on the path, 4 free
        let s = ProcessState::from_parts(5, &[0, 1, 2, 3], &[], &[]).unwrap();
        let mut rng = rng_for(0, 0);
        assert!(matches!(FullyRandomized.decide(&s, 4, &mut rng), Decision::Pass { v } if v != 4));
    }

    #[test]
    fn one_red_gets_second_red_edge() {
        let s = ProcessState::from_parts(20, &(0..10).collect::<Vec<_>>(), &[], &[(5, 15)]).unwrap();
        let mut rng = rng_for(0, 0);
        for _ in 0..50 {
            match FullyRandomized.decide(&s, 5, &mut rng) {
                Decision::ColorEdge { v, color: Color::Red } => assert!(v >= 10),
                d => panic!("unexpected {d:?}"),
            }
        }
    }

    #[test]
    fn invariants_hold_along_a_run() {
        let mut s = ProcessState::new(300).unwrap();
        let mut rng = rng_for(11, 0);
        for i in 0..700 {
            step(&mut s, &FullyRandomized, &mut rng);
            if i % 7 == 0 {
                s.check_invariants().unwrap();
            }
        }
        s.check_invariants().unwrap();
        assert!(s.path_len() > 200);
    }
}
