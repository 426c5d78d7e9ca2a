//! Exact structure counts on a recorded history, and a brute-force check of
//! the usable-squares bound on tiny instances.

use crate::engine::SimRng;
use crate::state::Vertex;
use rand::Rng;
use serde::Serialize;

/// How circles are placed when generating a history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CirclePolicy {
    /// Uniform over `[n] \ {u}`.
    Uniform,
    /// Round `i` targets vertex `i mod n` (next one if equal to the square).
    RoundRobin,
    /// Round `i` targets vertex `floor(i / 3) mod n`, bumped likewise.
    ThreeOut,
}

/// Squares and circles of rounds `0..t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct History {
    pub n: usize,
    pub squares: Vec<Vertex>,
    pub circles: Vec<Vertex>,
}

impl History {
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Self {
        History { n, squares: edges.iter().map(|e| e.0).collect(), circles: edges.iter().map(|e| e.1).collect() }
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn generate(n: usize, t: usize, policy: CirclePolicy, rng: &mut SimRng) -> Self {
        let mut squares = Vec::with_capacity(t);
        let mut circles = Vec::with_capacity(t);
        let bump = |v: u64, u: Vertex| {
            let v = (v % n as u64) as Vertex;
            if v == u {
                ((v as u64 + 1) % n as u64) as Vertex
            } else {
                v
            }
        };
        for i in 0..t {
            let u = rng.random_range(0..n as Vertex);
            let v = match policy {
                CirclePolicy::Uniform => {
                    let v = rng.random_range(0..n as Vertex - 1);
                    if v >= u {
                        v + 1
                    } else {
                        v
                    }
                }
                CirclePolicy::RoundRobin => bump(i as u64, u),
                CirclePolicy::ThreeOut => bump(i as u64 / 3, u),
            };
            squares.push(u);
            circles.push(v);
        }
        History { n, squares, circles }
    }

    /// Largest number of circles on a single vertex.
    pub fn max_circles(&self) -> usize {
        let mut c = vec![0usize; self.n];
        for &v in &self.circles {
            c[v as usize] += 1;
        }
        c.into_iter().max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StructureCounts {
    pub z: u64,
    pub w1: u64,
    pub w2: u64,
    pub t1: u64,
    pub t2: u64,
}

impl StructureCounts {
    pub fn w(&self) -> u64 {
        self.t1 + self.t2
    }

    pub fn bound(&self) -> i64 {
        self.z as i64 - self.w1 as i64 - self.w2 as i64 + self.w() as i64
    }
}

pub fn count_structures(h: &History) -> StructureCounts {
    let n = h.n;
    // square times per vertex in CSR layout, sorted by construction
    let mut start = vec![0usize; n + 1];
    for &u in &h.squares {
        start[u as usize + 1] += 1;
    }
    for x in 0..n {
        start[x + 1] += start[x];
    }
    let mut fill = start.clone();
    let mut times = vec![0u32; h.len()];
    for (i, &u) in h.squares.iter().enumerate() {
        times[fill[u as usize]] = i as u32;
        fill[u as usize] += 1;
    }
    let at = |x: usize| &times[start[x]..start[x + 1]];
    // the first two squares on y both arrive after step i (the event the
    // limiting integrals describe; earlier squares on y disqualify the pair)
    let two_after = |y: Vertex, i: u32| {
        let ts = at(y as usize);
        ts.len() >= 2 && ts[0] > i
    };
    let mut out = StructureCounts::default();
    let mut w2_from = vec![0u64; n];
    let mut w1_pairs: Vec<(Vertex, Vertex)> = Vec::new();
    let mut w2_pairs: Vec<(Vertex, Vertex)> = Vec::new();
    for (x, w2x) in w2_from.iter_mut().enumerate() {
        let ts = at(x);
        out.z += ts.len().min(2) as u64;
        if ts.len() == 1 {
            let y = h.circles[ts[0] as usize];
            if two_after(y, ts[0]) {
                w1_pairs.push((x as Vertex, y));
            }
        } else if ts.len() == 2 {
            let mut ys: Vec<Vertex> = Vec::with_capacity(2);
            for &i in ts {
                let y = h.circles[i as usize];
                if two_after(y, i) && !ys.contains(&y) {
                    ys.push(y);
                }
            }
            *w2x = ys.len() as u64;
            w2_pairs.extend(ys.into_iter().map(|y| (x as Vertex, y)));
        }
    }
    out.w1 = w1_pairs.len() as u64;
    out.w2 = w2_pairs.len() as u64;
    out.t1 = w1_pairs.iter().map(|&(_, y)| w2_from[y as usize]).sum();
    out.t2 = w2_pairs.iter().map(|&(_, y)| w2_from[y as usize]).sum();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimVerdict {
    pub cycles: u64,
    pub bound: i64,
    /// Most squares any Hamiltonian cycle of the history uses.
    pub max_usable: Option<u64>,
    pub violated: bool,
    /// Vertex order of the cycle attaining `max_usable`.
    pub witness: Option<Vec<Vertex>>,
}

/// Enumerate every Hamiltonian cycle of the history's multigraph (`n <= 10`)
/// and compare the squares it can use against the counted bound.
pub fn claim_check(h: &History) -> ClaimVerdict {
    let n = h.n;
    assert!(n <= 10, "claim check is exhaustive; n = {n} is too large");
    let counts = count_structures(h);
    let bound = counts.bound();
    // edges between each ordered vertex pair, by step
    let mut between: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; n];
    for i in 0..h.len() {
        let (u, v) = (h.squares[i] as usize, h.circles[i] as usize);
        between[u][v].push(i);
        between[v][u].push(i);
    }
    let mut verdict = ClaimVerdict { cycles: 0, bound, max_usable: None, violated: false, witness: None };
    if n < 3 {
        return verdict;
    }
    let mut order = vec![0usize];
    let mut used = vec![false; n];
    used[0] = true;
    let mut visit = |order: &[usize], verdict: &mut ClaimVerdict| {
        // canonical direction: second vertex smaller than last
        if order[1] > order[n - 1] {
            return;
        }
        // pick one edge per consecutive pair; maximise usable squares over choices
        let best = best_edge_choice(h, &between, order);
        verdict.cycles += 1;
        if verdict.max_usable.is_none_or(|m| best > m) {
            verdict.max_usable = Some(best);
            verdict.witness = Some(order.iter().map(|&v| v as Vertex).collect());
        }
        if best as i64 > bound {
            verdict.violated = true;
        }
    };
    dfs(&between, &mut order, &mut used, &mut verdict, &mut visit);
    verdict
}

fn dfs(
    between: &[Vec<Vec<usize>>],
    order: &mut Vec<usize>,
    used: &mut [bool],
    verdict: &mut ClaimVerdict,
    visit: &mut impl FnMut(&[usize], &mut ClaimVerdict),
) {
    let n = used.len();
    let last = *order.last().unwrap();
    if order.len() == n {
        if !between[last][order[0]].is_empty() {
            visit(order, verdict);
        }
        return;
    }
    for v in 1..n {
        if !used[v] && !between[last][v].is_empty() {
            used[v] = true;
            order.push(v);
            dfs(between, order, used, verdict, visit);
            order.pop();
            used[v] = false;
        }
    }
}

/// Squares usable by the cycle `order` for the best choice of parallel edges:
/// each chosen edge contributes its square, truncated at two per vertex, and an
/// edge whose circle vertex already contributes two squares contributes none.
fn best_edge_choice(h: &History, between: &[Vec<Vec<usize>>], order: &[usize]) -> u64 {
    let n = order.len();
    let choices: Vec<&Vec<usize>> = (0..n).map(|k| &between[order[k]][order[(k + 1) % n]]).collect();
    let mut best = 0u64;
    let mut pick = vec![0usize; n];
    loop {
        let steps: Vec<usize> = (0..n).map(|k| choices[k][pick[k]]).collect();
        let mut per = vec![0u32; h.n];
        for &i in &steps {
            per[h.squares[i] as usize] += 1;
        }
        let mut usable = 0u64;
        for &i in &steps {
            let u = h.squares[i] as usize;
            let v = h.circles[i] as usize;
            let ok = per[u] <= 2 && per[v] < 2;
            usable += ok as u64;
        }
        best = best.max(usable);
        // next combination
        let mut k = 0;
        while k < n {
            pick[k] += 1;
            if pick[k] < choices[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng_for;

    fn hist(n: usize, steps: &[(u32, u32)]) -> History {
        History::from_edges(n, steps)
    }

    #[test]
    fn hand_example() {
        // rounds 1..3: (square, circle) = (0,1), (1,0), (1,2)
        let c = count_structures(&hist(3, &[(0, 1), (1, 0), (1, 2)]));
        assert_eq!(c, StructureCounts { z: 3, w1: 1, w2: 0, t1: 0, t2: 0 });
        assert_eq!(c.bound(), 2);
    }

    #[test]
    fn empty_history() {
        let c = count_structures(&hist(5, &[]));
        assert_eq!(c, StructureCounts::default());
    }

    #[test]
    fn triangle_uses_three_squares() {
        let h = hist(3, &[(0, 1), (1, 2), (2, 0)]);
        let v = claim_check(&h);
        assert_eq!(v.cycles, 1);
        assert_eq!(v.max_usable, Some(3));
        assert!(v.bound >= 3 && !v.violated);
    }

    #[test]
    fn squares_must_come_after_the_pairing_round() {
        // x = 0 has one square (round 2) with circle 3; 3 has squares at rounds 0, 1, 3
        let c = count_structures(&hist(4, &[(3, 1), (3, 2), (0, 3), (3, 2)]));
        assert_eq!(c.w1, 0);
        // one square on 3 before the pairing round is already too many
        let c = count_structures(&hist(4, &[(3, 1), (0, 3), (3, 2), (3, 2)]));
        assert_eq!(c.w1, 0);
        let c = count_structures(&hist(4, &[(0, 3), (3, 1), (3, 2)]));
        assert_eq!(c.w1, 1);
    }

    #[test]
    fn generated_histories_have_no_loops() {
        let mut rng = rng_for(1, 0);
        for p in [CirclePolicy::Uniform, CirclePolicy::RoundRobin, CirclePolicy::ThreeOut] {
            let h = History::generate(20, 200, p, &mut rng);
            assert!(h.squares.iter().zip(&h.circles).all(|(a, b)| a != b));
        }
    }
}
