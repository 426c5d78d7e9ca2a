//! Degree-greedy strategy: blue/red/magenta vertices, circles of new blue
//! edges placed on unsaturated vertices of minimum blue degree.

use crate::engine::{augment_slot, other_vertex, Decision, SimRng, Strategy};
use crate::state::{Class, Color, Landing, Mode, ProcessState, Vertex};

#[derive(Clone, Copy, Debug, Default)]
pub struct DegreeGreedy;

impl Strategy for DegreeGreedy {
    fn name(&self) -> &'static str {
        "dg"
    }

    fn mode(&self) -> Mode {
        Mode::Dg
    }

    fn decide(&self, s: &ProcessState, u: Vertex, rng: &mut SimRng) -> Decision {
        let pass = |rng: &mut SimRng| Decision::Pass { v: other_vertex(s.n(), u, rng) };
        match s.classify_landing(u) {
            Landing::Free => Decision::YExtend { v: s.free_set().sample_excluding(u, rng).expect("|U| >= 2") },
            Landing::Paired => Decision::PathExtend,
            Landing::NextToColored(x) => Decision::Augment {
                x,
                slot: augment_slot(s, x).expect("coloured vertex has a coloured edge"),
            },
            Landing::Permissible | Landing::Colored(Class::Red) => match s.degree_buckets().sample_min(rng) {
                Some(v) => Decision::ColorEdge { v, color: Color::Blue },
                None => pass(rng),
            },
            Landing::Colored(Class::Blue) => match s.unsaturated_set().sample(rng) {
                Some(v) => Decision::ColorEdge { v, color: Color::Red },
                None => pass(rng),
            },
            _ => pass(rng),
        }
    }
}

/// Path, matching and single red edges left after a degree-greedy stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Export {
    pub path: Vec<Vertex>,
    pub pairs: Vec<(Vertex, Vertex)>,
    pub red: Vec<(Vertex, Vertex)>,
}

/// `(P, Y, E)` with blue edges discarded and `E` the red edges of red and
/// magenta vertices.
pub fn dg_export(s: &ProcessState) -> Export {
    let red = s
        .colored_edges()
        .into_iter()
        .filter(|&(_, _, c)| c == Color::Red)
        .map(|(x, w, _)| (x, w))
        .collect();
    Export { path: s.path_vertices(), pairs: s.pairs(), red }
}
