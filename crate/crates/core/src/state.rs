//! Mutable state of one semi-random process run.
//!
//! Vertices are in exactly one of three places: `U` (free), `V(Y)` (matched in
//! an isolated pair) or `V(P)` (on the path). Coloured edges always join a path
//! vertex to an off-path vertex and live in per-path-vertex slots; each
//! off-path vertex keeps a doubly linked list of the slots pointing at it so
//! absorbing it into the path can uncolour them in time proportional to their
//! number.

use crate::store::{DegreeBuckets, IndexedSet, TrackedVec, NONE};
use serde::Serialize;
use thiserror::Error;

pub type Vertex = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StateError {
    #[error("need at least 3 vertices, got {0}")]
    TooSmall(usize),
    #[error("vertex {0} is not free")]
    NotFree(Vertex),
    #[error("vertex {0} is not matched in Y")]
    NotPaired(Vertex),
    #[error("vertices {0} and {1} are not adjacent on the path")]
    NotPathAdjacent(Vertex, Vertex),
    #[error("vertex {0} has no coloured edge in slot {1}")]
    EmptySlot(Vertex, usize),
    #[error("vertex {0} is not on the path")]
    NotOnPath(Vertex),
    #[error("vertex {0} is on the path")]
    OnPath(Vertex),
    #[error("square and circle coincide at {0}")]
    SelfLoop(Vertex),
    #[error("vertex {0} has no free slot for a {1:?} edge")]
    SlotFull(Vertex, Color),
    #[error("malformed initial configuration: {0}")]
    BadInit(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Color {
    Red,
    Blue,
}

/// Which colouring discipline is in force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// One-red / two-red vertices.
    Fr,
    /// Blue / red / magenta vertices with unsaturated-vertex types.
    Dg,
    /// Single red edges, no permissible set (clean-up).
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Class {
    Uncolored,
    OneRed,
    TwoRed,
    Blue,
    Red,
    Magenta,
}

impl Class {
    pub fn is_colored(self) -> bool {
        self != Class::Uncolored
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loc {
    Free = 0,
    Paired = 1,
    Path = 2,
}

/// Where a square landed, as seen by the case analysis of the strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Landing {
    Free,
    LastFree,
    Paired,
    NextToColored(Vertex),
    Permissible,
    Colored(Class),
    Pass,
}

pub const RED0: usize = 0;
pub const RED1: usize = 1;
pub const BLUE: usize = 2;

#[derive(Clone, Copy, Debug, Default)]
struct Counters {
    t: u64,
    x: usize,
    left_end: u32,
    right_end: u32,
    l1: usize,
    l2: usize,
    b: usize,
    r: usize,
    m: usize,
}

/// Snapshot of the tracked scalars.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub t: u64,
    pub x: usize,
    pub y: usize,
    pub free: usize,
    pub l1: usize,
    pub l2: usize,
    pub b: usize,
    pub r: usize,
    pub m: usize,
    pub colored: usize,
    pub q: usize,
}

#[derive(Clone, Debug)]
pub struct ProcessState {
    n: usize,
    mode: Mode,
    c: Counters,
    saved: Counters,
    loc: TrackedVec<u8>,
    partner: TrackedVec<u32>,
    left: TrackedVec<u32>,
    right: TrackedVec<u32>,
    free: IndexedSet,
    unsat: IndexedSet,
    colored: IndexedSet,
    q: IndexedSet,
    reserve: IndexedSet,
    slot_target: TrackedVec<u32>,
    slot_next: TrackedVec<u32>,
    slot_prev: TrackedVec<u32>,
    head: TrackedVec<u32>,
    k1: TrackedVec<u16>,
    k2: TrackedVec<u16>,
    ctype: TrackedVec<u32>,
    deg: DegreeBuckets,
    edges: TrackedVec<(u32, u32)>,
    base_edges: usize,
}

#[inline]
fn tri(k1: u16, k2: u16) -> usize {
    let s = (k1 + k2) as usize;
    s * (s + 1) / 2 + k2 as usize
}

impl ProcessState {
    /// Empty graph on `n` vertices, everything free.
    pub fn new(n: usize) -> Result<Self, StateError> {
        Self::with_mode(n, Mode::Fr)
    }

    pub fn with_mode(n: usize, mode: Mode) -> Result<Self, StateError> {
        if n < 3 {
            return Err(StateError::TooSmall(n));
        }
        let mut s = ProcessState {
            n,
            mode,
            c: Counters { left_end: NONE, right_end: NONE, ..Default::default() },
            saved: Counters::default(),
            loc: TrackedVec::filled(Loc::Free as u8, n),
            partner: TrackedVec::filled(NONE, n),
            left: TrackedVec::filled(NONE, n),
            right: TrackedVec::filled(NONE, n),
            free: IndexedSet::full(n),
            unsat: IndexedSet::full(n),
            colored: IndexedSet::new(n),
            q: IndexedSet::new(n),
            reserve: IndexedSet::new(n),
            slot_target: TrackedVec::filled(NONE, 3 * n),
            slot_next: TrackedVec::filled(NONE, 3 * n),
            slot_prev: TrackedVec::filled(NONE, 3 * n),
            head: TrackedVec::filled(NONE, n),
            k1: TrackedVec::filled(0, n),
            k2: TrackedVec::filled(0, n),
            ctype: TrackedVec::new(),
            deg: DegreeBuckets::new(n),
            edges: TrackedVec::new(),
            base_edges: 0,
        };
        s.init_degree_tracking();
        Ok(s)
    }

    /// Start from a given path, matching and set of red edges `(path vertex,
    /// off-path vertex)`. Red path endpoints must be distinct and pairwise at
    /// path distance at least 3.
    pub fn from_parts(
        n: usize,
        path: &[Vertex],
        pairs: &[(Vertex, Vertex)],
        red: &[(Vertex, Vertex)],
    ) -> Result<Self, StateError> {
        let mut s = Self::new(n)?;
        let bad = |m: String| Err(StateError::BadInit(m));
        let mut seen = vec![false; n];
        for &v in path.iter().chain(pairs.iter().flat_map(|p| [&p.0, &p.1])) {
            if v as usize >= n {
                return bad(format!("vertex {v} out of range"));
            }
            if seen[v as usize] {
                return bad(format!("vertex {v} listed twice"));
            }
            seen[v as usize] = true;
        }
        if path.len() == 1 {
            return bad("a path needs at least 2 vertices".into());
        }
        let mut position = vec![NONE; n];
        for (i, &v) in path.iter().enumerate() {
            position[v as usize] = i as u32;
            s.loc.set(v as usize, Loc::Path as u8);
            s.free.remove(v);
            s.unsat.remove(v);
            if i > 0 {
                s.left.set(v as usize, path[i - 1]);
                s.edges.push((path[i - 1], v));
            }
            if i + 1 < path.len() {
                s.right.set(v as usize, path[i + 1]);
            }
        }
        if !path.is_empty() {
            s.c.left_end = path[0];
            s.c.right_end = path[path.len() - 1];
            s.c.x = path.len();
        }
        for &(a, b) in pairs {
            s.partner.set(a as usize, b);
            s.partner.set(b as usize, a);
            s.loc.set(a as usize, Loc::Paired as u8);
            s.loc.set(b as usize, Loc::Paired as u8);
            s.free.remove(a);
            s.free.remove(b);
            s.edges.push((a, b));
        }
        let mut ends: Vec<u32> = Vec::with_capacity(red.len());
        for &(p, w) in red {
            if (p as usize) >= n || (w as usize) >= n {
                return bad("red edge endpoint out of range".into());
            }
            if position[p as usize] == NONE {
                return bad(format!("red edge ({p},{w}) has no endpoint on the path"));
            }
            if position[w as usize] != NONE {
                return bad(format!("red edge ({p},{w}) has both endpoints on the path"));
            }
            ends.push(position[p as usize]);
        }
        let mut sorted = ends.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[1] - w[0] < 3 {
                return bad(format!(
                    "red path endpoints at positions {} and {} are closer than 3",
                    w[0], w[1]
                ));
            }
        }
        for &(p, w) in red {
            s.link_slot(p, RED0, w);
            s.edges.push((p, w));
        }
        s.base_edges = s.edges.len();
        s.rebuild_permissible();
        Ok(s)
    }

    // ----- read access -------------------------------------------------

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }
    #[inline]
    pub fn mode(&self) -> Mode {
        self.mode
    }
    #[inline]
    pub fn t(&self) -> u64 {
        self.c.t
    }
    #[inline]
    pub fn path_len(&self) -> usize {
        self.c.x
    }
    /// Number of vertices in pairs of `Y`.
    #[inline]
    pub fn paired_len(&self) -> usize {
        self.unsat.len() - self.free.len()
    }
    #[inline]
    pub fn free_len(&self) -> usize {
        self.free.len()
    }
    #[inline]
    pub fn unsaturated_len(&self) -> usize {
        self.unsat.len()
    }
    #[inline]
    pub fn colored_len(&self) -> usize {
        self.colored.len()
    }
    #[inline]
    pub fn permissible_len(&self) -> usize {
        self.q.len()
    }
    #[inline]
    pub fn loc(&self, v: Vertex) -> Loc {
        match self.loc.get(v as usize) {
            0 => Loc::Free,
            1 => Loc::Paired,
            _ => Loc::Path,
        }
    }
    #[inline]
    pub fn partner(&self, v: Vertex) -> Option<Vertex> {
        let p = self.partner.get(v as usize);
        (p != NONE).then_some(p)
    }
    #[inline]
    pub fn left_of(&self, v: Vertex) -> Option<Vertex> {
        let p = self.left.get(v as usize);
        (p != NONE).then_some(p)
    }
    #[inline]
    pub fn right_of(&self, v: Vertex) -> Option<Vertex> {
        let p = self.right.get(v as usize);
        (p != NONE).then_some(p)
    }
    pub fn endpoints(&self) -> Option<(Vertex, Vertex)> {
        (self.c.x > 0).then_some((self.c.left_end, self.c.right_end))
    }
    pub fn free_set(&self) -> &IndexedSet {
        &self.free
    }
    pub fn unsaturated_set(&self) -> &IndexedSet {
        &self.unsat
    }
    pub fn colored_set(&self) -> &IndexedSet {
        &self.colored
    }
    pub fn permissible_set(&self) -> &IndexedSet {
        &self.q
    }
    /// Vertex-degree buckets over unsaturated vertices: blue in-degree in DG
    /// mode, red in-degree in plain mode, unused in FR mode.
    pub fn degree_buckets(&self) -> &DegreeBuckets {
        &self.deg
    }
    pub fn in_permissible(&self, v: Vertex) -> bool {
        self.q.contains(v)
    }
    /// Edges added since the start (excluding any initial graph).
    pub fn step_edges(&self) -> &[(u32, u32)] {
        &self.edges.as_slice()[self.base_edges..]
    }
    /// All recorded edges, initial graph included, as (square, circle).
    pub fn all_edges(&self) -> &[(u32, u32)] {
        self.edges.as_slice()
    }

    #[inline]
    pub fn slot(&self, x: Vertex, k: usize) -> Option<Vertex> {
        let w = self.slot_target.get(3 * x as usize + k);
        (w != NONE).then_some(w)
    }

    pub fn red_endpoints(&self, x: Vertex) -> Vec<Vertex> {
        [RED0, RED1].iter().filter_map(|&k| self.slot(x, k)).collect()
    }

    /// Path vertices whose coloured edge ends at the off-path vertex `w`, with slot.
    pub fn incoming(&self, w: Vertex) -> Vec<(Vertex, usize)> {
        let mut out = Vec::new();
        let mut s = self.head.get(w as usize);
        while s != NONE {
            out.push((s / 3, (s % 3) as usize));
            s = self.slot_next.get(s as usize);
        }
        out
    }

    pub fn class(&self, x: Vertex) -> Class {
        self.try_class(x).unwrap_or_else(|| panic!("impossible colour configuration at {x}"))
    }

    fn try_class(&self, x: Vertex) -> Option<Class> {
        let base = 3 * x as usize;
        let reds = (self.slot_target.get(base) != NONE) as u8
            + (self.slot_target.get(base + 1) != NONE) as u8;
        let blue = self.slot_target.get(base + 2) != NONE;
        Some(match (self.mode, reds, blue) {
            (_, 0, false) => Class::Uncolored,
            (Mode::Fr, 1, false) => Class::OneRed,
            (Mode::Fr, 2, false) => Class::TwoRed,
            (Mode::Dg, 0, true) => Class::Blue,
            (Mode::Dg | Mode::Plain, 1, false) => Class::Red,
            (Mode::Dg, 1, true) => Class::Magenta,
            _ => return None,
        })
    }

    pub fn stats(&self) -> Stats {
        Stats {
            t: self.c.t,
            x: self.c.x,
            y: self.paired_len(),
            free: self.free.len(),
            l1: self.c.l1,
            l2: self.c.l2,
            b: self.c.b,
            r: self.c.r,
            m: self.c.m,
            colored: self.colored.len(),
            q: self.q.len(),
        }
    }

    /// Type `(k1, k2)` of an unsaturated vertex in DG mode.
    pub fn vertex_type(&self, w: Vertex) -> (u16, u16) {
        (self.k1.get(w as usize), self.k2.get(w as usize))
    }

    /// Number of unsaturated vertices of type `(k1, k2)`.
    pub fn type_count(&self, k1: u16, k2: u16) -> usize {
        let i = tri(k1, k2);
        if i < self.ctype.len() {
            self.ctype.get(i) as usize
        } else {
            0
        }
    }

    /// Largest blue degree with a type counter allocated.
    pub fn max_type_degree(&self) -> u16 {
        let mut s = 0u16;
        while tri(0, s + 1) < self.ctype.len() {
            s += 1;
        }
        s
    }

    /// Current phase `q` (minimum unsaturated blue degree plus one) in DG mode.
    pub fn phase(&self) -> Option<u32> {
        if self.mode != Mode::Dg {
            return None;
        }
        self.deg.min_key().map(|k| k + 1)
    }

    /// Number of unsaturated vertices at the current minimum blue degree.
    pub fn phase_deficit(&self) -> usize {
        self.deg.min_key().map_or(0, |k| self.deg.bucket_len(k))
    }

    /// Path distance from `u` to the nearest coloured vertex, if it is 1 or 2.
    pub fn near_colored(&self, u: Vertex) -> Option<(u32, Vertex)> {
        let l = self.left.get(u as usize);
        let r = self.right.get(u as usize);
        for &v in &[l, r] {
            if v != NONE && self.colored.contains(v) {
                return Some((1, v));
            }
        }
        for &(v, fwd) in &[(l, true), (r, false)] {
            if v == NONE {
                continue;
            }
            let w = if fwd { self.left.get(v as usize) } else { self.right.get(v as usize) };
            if w != NONE && self.colored.contains(w) {
                return Some((2, w));
            }
        }
        None
    }

    /// Case analysis shared by both strategies.
    pub fn classify_landing(&self, u: Vertex) -> Landing {
        match self.loc(u) {
            Loc::Free => {
                if self.free.len() >= 2 {
                    Landing::Free
                } else {
                    Landing::LastFree
                }
            }
            Loc::Paired => Landing::Paired,
            Loc::Path => match self.near_colored(u) {
                Some((1, x)) => Landing::NextToColored(x),
                Some(_) => Landing::Pass,
                None => {
                    let c = self.class(u);
                    if c.is_colored() {
                        Landing::Colored(c)
                    } else if self.q.contains(u) {
                        Landing::Permissible
                    } else {
                        Landing::Pass
                    }
                }
            },
        }
    }

    /// Walk the path from the left endpoint.
    pub fn path_vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.c.x);
        if self.c.x == 0 {
            return out;
        }
        let mut v = self.c.left_end;
        while v != NONE {
            out.push(v);
            v = self.right.get(v as usize);
            if out.len() > self.n {
                break;
            }
        }
        out
    }

    /// Current matching as pairs `(a, b)` with `a < b`.
    pub fn pairs(&self) -> Vec<(Vertex, Vertex)> {
        self.unsat
            .members()
            .iter()
            .filter_map(|&v| {
                let p = self.partner.get(v as usize);
                (p != NONE && v < p).then_some((v, p))
            })
            .collect()
    }

    /// Coloured edges `(path vertex, off-path vertex, colour)`.
    pub fn colored_edges(&self) -> Vec<(Vertex, Vertex, Color)> {
        let mut out = Vec::new();
        for &x in self.colored.members() {
            for k in [RED0, RED1, BLUE] {
                if let Some(w) = self.slot(x, k) {
                    out.push((x, w, if k == BLUE { Color::Blue } else { Color::Red }));
                }
            }
        }
        out
    }

    // ----- operations --------------------------------------------------

    /// Pair two free vertices; `v` is the circle.
    pub fn y_extend(&mut self, u: Vertex, v: Vertex) -> Result<(), StateError> {
        if u == v {
            return Err(StateError::SelfLoop(u));
        }
        for w in [u, v] {
            if self.loc(w) != Loc::Free {
                return Err(StateError::NotFree(w));
            }
        }
        self.partner.set(u as usize, v);
        self.partner.set(v as usize, u);
        self.loc.set(u as usize, Loc::Paired as u8);
        self.loc.set(v as usize, Loc::Paired as u8);
        self.free.remove(u);
        self.free.remove(v);
        self.record(u, v);
        Ok(())
    }

    /// Append the pair on `u` to the left end of the path (or start the path).
    pub fn path_extend(&mut self, u: Vertex) -> Result<(), StateError> {
        if self.loc(u) != Loc::Paired {
            return Err(StateError::NotPaired(u));
        }
        let y = self.partner.get(u as usize);
        self.partner.set(u as usize, NONE);
        self.partner.set(y as usize, NONE);
        if self.c.x == 0 {
            self.right.set(u as usize, y);
            self.left.set(y as usize, u);
            self.c.left_end = u;
            self.c.right_end = y;
            self.record(u, y);
        } else {
            let a = self.c.left_end;
            self.left.set(a as usize, u);
            self.right.set(u as usize, a);
            self.left.set(u as usize, y);
            self.right.set(y as usize, u);
            self.c.left_end = y;
            self.record(u, a);
        }
        self.c.x += 2;
        self.absorb(&[u, y]);
        self.refresh_around(u);
        self.rebalance();
        Ok(())
    }

    /// Replace path edge `u x` by a detour through the far end of the coloured
    /// edge in slot `k` of `x` (and its partner, if it is paired).
    pub fn path_augment(&mut self, u: Vertex, x: Vertex, k: usize) -> Result<(), StateError> {
        let x_right = self.right.get(u as usize) == x;
        let x_left = self.left.get(u as usize) == x;
        if !(x_right || x_left) {
            return Err(StateError::NotPathAdjacent(u, x));
        }
        let r = self.slot(x, k).ok_or(StateError::EmptySlot(x, k))?;
        let inserted: Vec<Vertex> = match self.loc(r) {
            Loc::Free => vec![r],
            Loc::Paired => {
                let r2 = self.partner.get(r as usize);
                self.partner.set(r as usize, NONE);
                self.partner.set(r2 as usize, NONE);
                vec![r2, r]
            }
            Loc::Path => return Err(StateError::OnPath(r)),
        };
        self.record(u, inserted[0]);
        // Splice u - inserted... - x in the orientation of the path.
        let mut chain: Vec<Vertex> = Vec::with_capacity(4);
        chain.push(u);
        chain.extend_from_slice(&inserted);
        chain.push(x);
        if x_left {
            chain.reverse();
        }
        for w in chain.windows(2) {
            self.right.set(w[0] as usize, w[1]);
            self.left.set(w[1] as usize, w[0]);
        }
        self.c.x += inserted.len();
        self.absorb(&inserted);
        for &v in &inserted {
            self.refresh_one(v);
        }
        self.refresh_around(u);
        self.refresh_around(x);
        self.rebalance();
        Ok(())
    }

    /// Colour a new edge from path vertex `u` to off-path vertex `v`.
    pub fn color_edge(&mut self, u: Vertex, v: Vertex, color: Color) -> Result<(), StateError> {
        if self.loc(u) != Loc::Path {
            return Err(StateError::NotOnPath(u));
        }
        if self.loc(v) == Loc::Path {
            return Err(StateError::OnPath(v));
        }
        let k = match (color, self.mode) {
            (Color::Blue, Mode::Dg) => BLUE,
            (Color::Red, Mode::Fr) => {
                if self.slot(u, RED0).is_none() {
                    RED0
                } else {
                    RED1
                }
            }
            (Color::Red, _) => RED0,
            (Color::Blue, _) => return Err(StateError::SlotFull(u, color)),
        };
        if self.slot(u, k).is_some() {
            return Err(StateError::SlotFull(u, color));
        }
        self.link_slot(u, k, v);
        self.record(u, v);
        self.rebalance();
        Ok(())
    }

    /// Record an edge that plays no role in the construction.
    pub fn pass(&mut self, u: Vertex, v: Vertex) {
        self.record(u, v);
    }

    #[inline]
    fn record(&mut self, u: Vertex, v: Vertex) {
        self.edges.push((u, v));
        self.c.t += 1;
    }

    /// Record a raw edge and advance time without any structural change.
    /// Used by procedures that manage their own bookkeeping (cycle closing).
    pub fn record_edge(&mut self, u: Vertex, v: Vertex) {
        self.record(u, v);
    }

    // ----- mode changes -------------------------------------------------

    /// Drop every blue edge and reinterpret the remaining single red edges as
    /// one-red vertices.
    pub fn convert_to_fr(&mut self) {
        if self.mode == Mode::Fr {
            return;
        }
        let members: Vec<Vertex> = self.colored.members().to_vec();
        for x in members {
            if self.slot(x, BLUE).is_some() {
                self.unlink_slot(3 * x + BLUE as u32);
            }
        }
        self.mode = Mode::Fr;
        self.recount_classes();
        self.init_degree_tracking();
        self.rebuild_permissible();
    }

    /// Switch the colour discipline (used on an uncoloured state).
    pub fn set_mode(&mut self, mode: Mode) {
        assert!(self.colored.is_empty(), "mode change requires an uncoloured state");
        self.mode = mode;
        self.recount_classes();
        self.init_degree_tracking();
        self.rebuild_permissible();
    }

    /// Break every pair of `Y` into two free vertices.
    pub fn dissolve_pairs(&mut self) {
        let members: Vec<Vertex> = self.unsat.members().to_vec();
        for v in members {
            if self.loc(v) == Loc::Paired {
                self.partner.set(v as usize, NONE);
                self.loc.set(v as usize, Loc::Free as u8);
                self.free.insert(v);
            }
        }
    }

    /// Remove every coloured edge.
    pub fn clear_colors(&mut self) {
        let members: Vec<Vertex> = self.colored.members().to_vec();
        for x in members {
            for k in [RED0, RED1, BLUE] {
                if self.slot(x, k).is_some() {
                    self.unlink_slot(3 * x + k as u32);
                }
            }
        }
        self.rebalance();
    }

    /// Uncolour the coloured edge in slot `k` of `x`.
    pub fn uncolor_slot(&mut self, x: Vertex, k: usize) {
        if self.slot(x, k).is_some() {
            self.unlink_slot(3 * x + k as u32);
            self.rebalance();
        }
    }

    // ----- path surgery used by cycle closing ---------------------------

    /// Verify that `order` lists a Hamiltonian cycle whose consecutive pairs
    /// (including last to first) are all recorded edges.
    pub fn verify_cycle(&self, order: &[Vertex]) -> Result<(), String> {
        if order.len() != self.n {
            return Err(format!("cycle has {} vertices, expected {}", order.len(), self.n));
        }
        let mut seen = vec![false; self.n];
        for &v in order {
            if seen[v as usize] {
                return Err(format!("vertex {v} repeated"));
            }
            seen[v as usize] = true;
        }
        let mut have = std::collections::HashSet::with_capacity(self.edges.len());
        for &(a, b) in self.edges.as_slice() {
            have.insert((a.min(b), a.max(b)));
        }
        for i in 0..order.len() {
            let a = order[i];
            let b = order[(i + 1) % order.len()];
            if !have.contains(&(a.min(b), a.max(b))) {
                return Err(format!("cycle edge {a}-{b} never added"));
            }
        }
        Ok(())
    }

    // ----- journaling ---------------------------------------------------

    /// Start recording an undo log for every structure.
    pub fn begin_trial(&mut self) {
        self.saved = self.c;
        self.for_each_tracked(|t| t.begin());
    }

    /// Restore the state saved by [`begin_trial`](Self::begin_trial).
    pub fn rollback_trial(&mut self) {
        self.c = self.saved;
        self.for_each_tracked(|t| t.rollback());
    }

    /// Keep changes made since [`begin_trial`](Self::begin_trial).
    pub fn commit_trial(&mut self) {
        self.for_each_tracked(|t| t.commit());
    }

    fn for_each_tracked(&mut self, f: impl Fn(&mut dyn Journaled)) {
        f(&mut self.loc);
        f(&mut self.partner);
        f(&mut self.left);
        f(&mut self.right);
        f(&mut self.free);
        f(&mut self.unsat);
        f(&mut self.colored);
        f(&mut self.q);
        f(&mut self.reserve);
        f(&mut self.slot_target);
        f(&mut self.slot_next);
        f(&mut self.slot_prev);
        f(&mut self.head);
        f(&mut self.k1);
        f(&mut self.k2);
        f(&mut self.ctype);
        f(&mut self.deg);
        f(&mut self.edges);
    }

    // ----- internals ----------------------------------------------------

    /// Move off-path vertices onto the path's vertex set and uncolour every
    /// coloured edge ending at them. Path links are set by the caller.
    fn absorb(&mut self, vs: &[Vertex]) {
        for &w in vs {
            self.untype(w);
            self.loc.set(w as usize, Loc::Path as u8);
            self.free.remove(w);
            self.unsat.remove(w);
        }
        for &w in vs {
            loop {
                let s = self.head.get(w as usize);
                if s == NONE {
                    break;
                }
                self.unlink_slot(s);
            }
        }
    }

    fn init_degree_tracking(&mut self) {
        self.deg = DegreeBuckets::new(self.n);
        self.ctype = TrackedVec::new();
        for v in 0..self.n {
            self.k1.set(v, 0);
            self.k2.set(v, 0);
        }
        match self.mode {
            Mode::Fr => {}
            Mode::Dg => {
                let members: Vec<Vertex> = self.unsat.members().to_vec();
                for &w in &members {
                    self.deg.insert(w, 0);
                }
                for (x, w, c) in self.colored_edges() {
                    if c == Color::Blue {
                        let (d1, d2) = match self.class(x) {
                            Class::Blue => (1, 0),
                            _ => (0, 1),
                        };
                        self.k1.set(w as usize, self.k1.get(w as usize) + d1);
                        self.k2.set(w as usize, self.k2.get(w as usize) + d2);
                    }
                }
                for &w in &members {
                    let (a, b) = self.vertex_type(w);
                    self.type_add(a, b, 1);
                    self.deg.change_key(w, (a + b) as u32);
                }
            }
            Mode::Plain => {
                let members: Vec<Vertex> = self.unsat.members().to_vec();
                for w in members {
                    let k = self.incoming(w).len() as u32;
                    self.deg.insert(w, k);
                }
            }
        }
    }

    fn type_add(&mut self, k1: u16, k2: u16, delta: i32) {
        let i = tri(k1, k2);
        while self.ctype.len() <= i {
            self.ctype.push(0);
        }
        let c = self.ctype.get(i) as i64 + delta as i64;
        debug_assert!(c >= 0);
        self.ctype.set(i, c as u32);
    }

    fn untype(&mut self, w: Vertex) {
        if self.deg.contains(w) {
            self.deg.remove(w);
            if self.mode == Mode::Dg {
                let (a, b) = self.vertex_type(w);
                self.type_add(a, b, -1);
                self.k1.set(w as usize, 0);
                self.k2.set(w as usize, 0);
            }
        }
    }

    fn retype(&mut self, w: Vertex, d1: i32, d2: i32) {
        if self.mode != Mode::Dg || !self.deg.contains(w) {
            return;
        }
        let (a, b) = self.vertex_type(w);
        let (na, nb) = ((a as i32 + d1) as u16, (b as i32 + d2) as u16);
        self.type_add(a, b, -1);
        self.type_add(na, nb, 1);
        self.k1.set(w as usize, na);
        self.k2.set(w as usize, nb);
        self.deg.change_key(w, (na + nb) as u32);
    }

    /// Contribution of `x` to its blue endpoint's type: (endpoint, dk1, dk2).
    fn blue_contribution(&self, x: Vertex, class: Class) -> Option<(Vertex, i32, i32)> {
        let w = self.slot(x, BLUE)?;
        match class {
            Class::Blue => Some((w, 1, 0)),
            Class::Magenta => Some((w, 0, 1)),
            _ => None,
        }
    }

    fn count_class(&mut self, c: Class, delta: isize) {
        let f = |v: &mut usize| *v = (*v as isize + delta) as usize;
        match c {
            Class::Uncolored => {}
            Class::OneRed => f(&mut self.c.l1),
            Class::TwoRed => f(&mut self.c.l2),
            Class::Blue => f(&mut self.c.b),
            Class::Red => f(&mut self.c.r),
            Class::Magenta => f(&mut self.c.m),
        }
    }

    fn recount_classes(&mut self) {
        self.c.l1 = 0;
        self.c.l2 = 0;
        self.c.b = 0;
        self.c.r = 0;
        self.c.m = 0;
        let members: Vec<Vertex> = self.colored.members().to_vec();
        for x in members {
            let c = self.class(x);
            self.count_class(c, 1);
        }
    }

    /// Apply a slot change to `x` with all class, type and permissible-set
    /// side effects. `change` performs the raw slot edit.
    fn with_class_change(&mut self, x: Vertex, change: impl FnOnce(&mut Self)) {
        let before = self.class(x);
        let contrib_before = self.blue_contribution(x, before);
        change(self);
        let after = self.class(x);
        let contrib_after = self.blue_contribution(x, after);
        if before != after {
            self.count_class(before, -1);
            self.count_class(after, 1);
        }
        if contrib_before != contrib_after {
            if let Some((w, a, b)) = contrib_before {
                self.retype(w, -a, -b);
            }
            if let Some((w, a, b)) = contrib_after {
                self.retype(w, a, b);
            }
        }
        if before.is_colored() != after.is_colored() {
            if after.is_colored() {
                self.colored.insert(x);
            } else {
                self.colored.remove(x);
            }
            self.refresh_around(x);
        }
    }

    fn link_slot(&mut self, x: Vertex, k: usize, w: Vertex) {
        let s = 3 * x + k as u32;
        self.with_class_change(x, |st| {
            st.slot_target.set(s as usize, w);
            let h = st.head.get(w as usize);
            st.slot_next.set(s as usize, h);
            st.slot_prev.set(s as usize, NONE);
            if h != NONE {
                st.slot_prev.set(h as usize, s);
            }
            st.head.set(w as usize, s);
        });
        self.bump_plain_degree(w, k, 1);
    }

    fn unlink_slot(&mut self, s: u32) {
        let x = s / 3;
        let k = (s % 3) as usize;
        let w = self.slot_target.get(s as usize);
        self.with_class_change(x, |st| {
            let nx = st.slot_next.get(s as usize);
            let pv = st.slot_prev.get(s as usize);
            if pv != NONE {
                st.slot_next.set(pv as usize, nx);
            } else {
                st.head.set(w as usize, nx);
            }
            if nx != NONE {
                st.slot_prev.set(nx as usize, pv);
            }
            st.slot_next.set(s as usize, NONE);
            st.slot_prev.set(s as usize, NONE);
            st.slot_target.set(s as usize, NONE);
        });
        self.bump_plain_degree(w, k, -1);
    }

    fn bump_plain_degree(&mut self, w: Vertex, k: usize, delta: i32) {
        if self.mode == Mode::Plain && k != BLUE && self.deg.contains(w) {
            let key = self.deg.key_of(w).unwrap() as i32 + delta;
            self.deg.change_key(w, key as u32);
        }
    }

    fn eligible(&self, v: Vertex) -> bool {
        self.loc(v) == Loc::Path && !self.colored.contains(v) && self.near_colored(v).is_none()
    }

    fn refresh_one(&mut self, v: Vertex) {
        if self.mode == Mode::Plain {
            return;
        }
        if self.eligible(v) {
            if !self.q.contains(v) {
                self.reserve.insert(v);
            }
        } else {
            self.q.remove(v);
            self.reserve.remove(v);
        }
    }

    fn refresh_around(&mut self, c: Vertex) {
        if self.mode == Mode::Plain {
            return;
        }
        let mut around = [NONE; 5];
        around[0] = c;
        if self.loc(c) == Loc::Path {
            around[1] = self.left.get(c as usize);
            around[2] = self.right.get(c as usize);
            if around[1] != NONE {
                around[3] = self.left.get(around[1] as usize);
            }
            if around[2] != NONE {
                around[4] = self.right.get(around[2] as usize);
            }
        }
        for v in around {
            if v != NONE {
                self.refresh_one(v);
            }
        }
    }

    /// Target size of the permissible set.
    pub fn permissible_target(&self) -> usize {
        self.c.x.saturating_sub(5 * self.colored.len())
    }

    fn rebalance(&mut self) {
        if self.mode == Mode::Plain {
            return;
        }
        let target = self.permissible_target();
        while self.q.len() > target {
            let v = self.q.pop_last().expect("non-empty");
            self.reserve.insert(v);
        }
        while self.q.len() < target {
            let v = self
                .reserve
                .pop_last()
                .expect("eligible supply always covers the permissible target");
            self.q.insert(v);
        }
    }

    fn rebuild_permissible(&mut self) {
        self.q.clear();
        self.reserve.clear();
        if self.mode == Mode::Plain {
            return;
        }
        for v in self.path_vertices() {
            if self.eligible(v) {
                self.reserve.insert(v);
            }
        }
        self.rebalance();
    }

    // ----- validation ---------------------------------------------------

    /// Full consistency check; O(n + t).
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.n;
        let mut counts = [0usize; 3];
        for v in 0..n as u32 {
            let l = self.loc(v);
            counts[l as usize] += 1;
            if self.free.contains(v) != (l == Loc::Free) {
                return Err(format!("free set disagrees at {v}"));
            }
            if self.unsat.contains(v) != (l != Loc::Path) {
                return Err(format!("unsaturated set disagrees at {v}"));
            }
            match l {
                Loc::Paired => {
                    let p = self.partner.get(v as usize);
                    if p == NONE || p == v || self.partner.get(p as usize) != v {
                        return Err(format!("partner map broken at {v}"));
                    }
                    if self.loc(p) != Loc::Paired {
                        return Err(format!("partner of {v} not paired"));
                    }
                }
                _ => {
                    if self.partner.get(v as usize) != NONE {
                        return Err(format!("non-paired {v} has a partner"));
                    }
                }
            }
            if l != Loc::Path {
                for k in 0..3 {
                    if self.slot_target.get(3 * v as usize + k) != NONE {
                        return Err(format!("off-path {v} owns a coloured slot"));
                    }
                }
            }
        }
        if counts[1] % 2 != 0 {
            return Err("odd number of paired vertices".into());
        }
        if counts[2] != self.c.x {
            return Err(format!("X = {} but {} vertices on path", self.c.x, counts[2]));
        }
        let walk = self.path_vertices();
        if walk.len() != self.c.x {
            return Err(format!("path walk visits {} vertices, X = {}", walk.len(), self.c.x));
        }
        if let Some(&last) = walk.last() {
            if last != self.c.right_end || self.left.get(walk[0] as usize) != NONE {
                return Err("path endpoints inconsistent".into());
            }
        }
        let mut pos = vec![NONE; n];
        for (i, &v) in walk.iter().enumerate() {
            if self.loc(v) != Loc::Path || pos[v as usize] != NONE {
                return Err(format!("path walk hits {v} twice or off-path"));
            }
            pos[v as usize] = i as u32;
            if i > 0 && self.left.get(v as usize) != walk[i - 1] {
                return Err(format!("left link of {v} broken"));
            }
        }
        // coloured slots and incidence lists
        let mut nslots_in = vec![0usize; n];
        let (mut l1, mut l2, mut b, mut r, mut m) = (0, 0, 0, 0, 0);
        let mut colored = 0;
        for &x in &walk {
            let c = self.try_class(x).ok_or_else(|| format!("bad colour configuration at {x}"))?;
            if c.is_colored() != self.colored.contains(x) {
                return Err(format!("coloured set disagrees at {x}"));
            }
            match c {
                Class::Uncolored => {}
                Class::OneRed => l1 += 1,
                Class::TwoRed => l2 += 1,
                Class::Blue => b += 1,
                Class::Red => r += 1,
                Class::Magenta => m += 1,
            }
            if c.is_colored() {
                colored += 1;
            }
            for k in 0..3 {
                let w = self.slot_target.get(3 * x as usize + k);
                if w != NONE {
                    if self.loc(w) == Loc::Path {
                        return Err(format!("coloured edge {x}-{w} ends on the path"));
                    }
                    nslots_in[w as usize] += 1;
                }
            }
        }
        if (l1, l2, b, r, m) != (self.c.l1, self.c.l2, self.c.b, self.c.r, self.c.m) {
            return Err("class counters out of date".into());
        }
        if colored != self.colored.len() {
            return Err("coloured set size mismatch".into());
        }
        for w in 0..n as u32 {
            let inc = self.incoming(w);
            if inc.len() != nslots_in[w as usize] {
                return Err(format!("incidence list of {w} has wrong length"));
            }
            for (x, k) in inc {
                if self.slot(x, k) != Some(w) {
                    return Err(format!("incidence list of {w} names stale slot"));
                }
            }
        }
        // spacing: coloured vertices pairwise at distance >= 3 except in plain mode
        if self.mode != Mode::Plain {
            let mut cpos: Vec<u32> = self.colored.members().iter().map(|&x| pos[x as usize]).collect();
            cpos.sort_unstable();
            for w in cpos.windows(2) {
                if w[1] - w[0] < 3 {
                    return Err(format!("coloured vertices at positions {} and {}", w[0], w[1]));
                }
            }
            // permissible set
            if self.q.len() != self.permissible_target() {
                return Err(format!(
                    "|Q| = {} but target is {}",
                    self.q.len(),
                    self.permissible_target()
                ));
            }
            for &v in walk.iter() {
                let e = self.eligible(v);
                if e != (self.q.contains(v) || self.reserve.contains(v)) {
                    return Err(format!("eligibility bookkeeping wrong at {v}"));
                }
                if self.q.contains(v) && self.reserve.contains(v) {
                    return Err(format!("{v} both in Q and reserve"));
                }
            }
            if self.q.members().iter().chain(self.reserve.members()).any(|&v| self.loc(v) != Loc::Path) {
                return Err("permissible member off path".into());
            }
        }
        match self.mode {
            Mode::Dg => {
                let mut tally = std::collections::HashMap::new();
                for &w in self.unsat.members() {
                    let mut a = 0u16;
                    let mut bb = 0u16;
                    for (x, k) in self.incoming(w) {
                        if k == BLUE {
                            match self.class(x) {
                                Class::Blue => a += 1,
                                Class::Magenta => bb += 1,
                                c => return Err(format!("blue slot on {c:?} vertex {x}")),
                            }
                        }
                    }
                    if (a, bb) != self.vertex_type(w) {
                        return Err(format!("type of {w} stale"));
                    }
                    if self.deg.key_of(w) != Some((a + bb) as u32) {
                        return Err(format!("degree bucket of {w} stale"));
                    }
                    *tally.entry((a, bb)).or_insert(0usize) += 1;
                }
                for s in 0..=self.max_type_degree() {
                    for k2 in 0..=s {
                        let k1 = s - k2;
                        if self.type_count(k1, k2) != *tally.get(&(k1, k2)).unwrap_or(&0) {
                            return Err(format!("C[{k1},{k2}] stale"));
                        }
                    }
                }
                if self.deg.len() != self.unsat.len() {
                    return Err("degree buckets miss unsaturated vertices".into());
                }
            }
            Mode::Plain => {
                for &w in self.unsat.members() {
                    if self.deg.key_of(w) != Some(nslots_in[w as usize] as u32) {
                        return Err(format!("red degree of {w} stale"));
                    }
                }
            }
            Mode::Fr => {}
        }
        if self.edges.len() - self.base_edges != self.c.t as usize {
            return Err("edge log length differs from step count".into());
        }
        Ok(())
    }
}

trait Journaled {
    fn begin(&mut self);
    fn rollback(&mut self);
    fn commit(&mut self);
}

impl<T: Copy> Journaled for TrackedVec<T> {
    fn begin(&mut self) {
        TrackedVec::begin(self)
    }
    fn rollback(&mut self) {
        TrackedVec::rollback(self)
    }
    fn commit(&mut self) {
        TrackedVec::commit(self)
    }
}

impl Journaled for IndexedSet {
    fn begin(&mut self) {
        IndexedSet::begin(self)
    }
    fn rollback(&mut self) {
        IndexedSet::rollback(self)
    }
    fn commit(&mut self) {
        IndexedSet::commit(self)
    }
}

impl Journaled for DegreeBuckets {
    fn begin(&mut self) {
        DegreeBuckets::begin(self)
    }
    fn rollback(&mut self) {
        DegreeBuckets::rollback(self)
    }
    fn commit(&mut self) {
        DegreeBuckets::commit(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, len: u32) -> ProcessState {
        let path: Vec<u32> = (0..len).collect();
        ProcessState::from_parts(n, &path, &[], &[]).unwrap()
    }

    #[test]
    fn new_state_is_empty() {
        let s = ProcessState::new(10).unwrap();
        assert_eq!((s.path_len(), s.paired_len(), s.free_len(), s.t()), (0, 0, 10, 0));
        assert_eq!(ProcessState::new(2).unwrap_err(), StateError::TooSmall(2));
        s.check_invariants().unwrap();
    }

    #[test]
    fn y_extend_pairs_and_rejects_reuse() {
        let mut s = ProcessState::new(10).unwrap();
        s.y_extend(0, 1).unwrap();
        assert_eq!((s.free_len(), s.paired_len()), (8, 2));
        assert_eq!(s.y_extend(2, 2), Err(StateError::SelfLoop(2)));
        assert_eq!(s.y_extend(0, 2), Err(StateError::NotFree(0)));
        s.check_invariants().unwrap();
    }

    #[test]
    fn bootstrap_then_extend() {
        let mut s = ProcessState::new(10).unwrap();
        s.y_extend(3, 4).unwrap();
        s.path_extend(3).unwrap();
        assert_eq!(s.path_len(), 2);
        s.y_extend(5, 6).unwrap();
        s.path_extend(6).unwrap();
        assert_eq!(s.path_vertices(), vec![5, 6, 3, 4]);
        s.check_invariants().unwrap();
    }

    #[test]
    fn augment_through_free_and_paired_vertices() {
        // path 0-1-2, 1 one-red towards 5
        let mut s = ProcessState::from_parts(10, &[0, 1, 2], &[], &[(1, 5)]).unwrap();
        assert_eq!(s.class(1), Class::OneRed);
        s.path_augment(0, 1, RED0).unwrap();
        assert_eq!(s.path_vertices(), vec![0, 5, 1, 2]);
        assert_eq!(s.class(1), Class::Uncolored);
        s.check_invariants().unwrap();

        let mut s = ProcessState::from_parts(10, &[0, 1, 2], &[(5, 6)], &[(1, 5)]).unwrap();
        s.path_augment(0, 1, RED0).unwrap();
        assert_eq!(s.path_vertices(), vec![0, 6, 5, 1, 2]);
        assert_eq!(s.paired_len(), 0);
        s.check_invariants().unwrap();

        // augmenting from the right side keeps orientation
        let mut s = ProcessState::from_parts(10, &[0, 1, 2], &[(5, 6)], &[(1, 5)]).unwrap();
        s.path_augment(2, 1, RED0).unwrap();
        assert_eq!(s.path_vertices(), vec![0, 1, 5, 6, 2]);
        s.check_invariants().unwrap();
    }

    #[test]
    fn two_red_drops_to_one_red() {
        let mut s = ProcessState::from_parts(10, &[0, 1, 2], &[], &[(1, 5)]).unwrap();
        s.color_edge(1, 7, Color::Red).unwrap();
        assert_eq!(s.class(1), Class::TwoRed);
        s.path_augment(0, 1, RED0).unwrap();
        assert_eq!(s.class(1), Class::OneRed);
        assert_eq!(s.red_endpoints(1), vec![7]);
        // both red edges to the same vertex: absorbing it clears both
        let mut s = ProcessState::from_parts(10, &[0, 1, 2], &[], &[(1, 5)]).unwrap();
        s.color_edge(1, 5, Color::Red).unwrap();
        s.path_augment(0, 1, RED0).unwrap();
        assert_eq!(s.class(1), Class::Uncolored);
        s.check_invariants().unwrap();
    }

    #[test]
    fn permissible_sizes() {
        let s = line(200, 100);
        assert_eq!(s.permissible_len(), 100);
        let red: Vec<(u32, u32)> = (0..10).map(|i| (3 + 9 * i, 150 + i)).collect();
        let s = ProcessState::from_parts(200, &(0..100).collect::<Vec<_>>(), &[], &red).unwrap();
        assert_eq!(s.permissible_len(), 50);
        s.check_invariants().unwrap();
        let red: Vec<(u32, u32)> = (0..5).map(|i| (1 + 4 * i, 150 + i)).collect();
        let s = ProcessState::from_parts(200, &(0..20).collect::<Vec<_>>(), &[], &red).unwrap();
        assert_eq!(s.permissible_len(), 0);
    }

    #[test]
    fn uncolouring_readmits_five() {
        let red: Vec<(u32, u32)> = (0..10).map(|i| (3 + 9 * i, 150 + i)).collect();
        let mut s = ProcessState::from_parts(200, &(0..100).collect::<Vec<_>>(), &[], &red).unwrap();
        assert_eq!(s.permissible_len(), 50);
        s.uncolor_slot(3, RED0);
        assert_eq!(s.permissible_len(), 55);
        s.check_invariants().unwrap();
    }

    #[test]
    fn init_rejects_close_red_endpoints() {
        let path: Vec<u32> = (0..10).collect();
        let r = ProcessState::from_parts(20, &path, &[], &[(2, 15), (4, 16)]);
        assert!(matches!(r, Err(StateError::BadInit(_))));
        let s = ProcessState::from_parts(20, &path, &[], &[(0, 15), (3, 16), (6, 17)]).unwrap();
        assert_eq!((s.stats().l1, s.permissible_len()), (3, 0));
    }

    #[test]
    fn landing_classes() {
        let s = ProcessState::from_parts(20, &(0..10).collect::<Vec<_>>(), &[(12, 13)], &[(5, 15)]).unwrap();
        assert_eq!(s.classify_landing(14), Landing::Free);
        assert_eq!(s.classify_landing(12), Landing::Paired);
        assert_eq!(s.classify_landing(4), Landing::NextToColored(5));
        assert_eq!(s.classify_landing(3), Landing::Pass);
        assert_eq!(s.classify_landing(5), Landing::Colored(Class::OneRed));
        assert_eq!(s.classify_landing(0), Landing::Permissible);
    }

    #[test]
    fn dg_types_follow_colour_changes() {
        let mut s = ProcessState::with_mode(30, Mode::Dg).unwrap();
        for i in 0..6u32 {
            s.y_extend(2 * i, 2 * i + 1).unwrap();
            s.path_extend(2 * i).unwrap();
        }
        let p = s.path_vertices();
        s.color_edge(p[4], 20, Color::Blue).unwrap();
        assert_eq!(s.class(p[4]), Class::Blue);
        assert_eq!(s.vertex_type(20), (1, 0));
        s.color_edge(p[4], 21, Color::Red).unwrap();
        assert_eq!(s.class(p[4]), Class::Magenta);
        assert_eq!(s.vertex_type(20), (0, 1));
        assert_eq!(s.type_count(0, 1), 1);
        assert_eq!(s.phase(), Some(1));
        s.check_invariants().unwrap();
        // absorbing the red endpoint turns magenta back to blue
        s.path_augment(p[3], p[4], RED0).unwrap();
        assert_eq!(s.class(p[4]), Class::Blue);
        assert_eq!(s.vertex_type(20), (1, 0));
        s.check_invariants().unwrap();
    }

    #[test]
    fn trial_rollback_restores_everything() {
        let mut s = ProcessState::from_parts(40, &(0..20).collect::<Vec<_>>(), &[(30, 31)], &[(5, 30), (10, 25)])
            .unwrap();
        let before = (s.stats(), s.path_vertices(), s.pairs(), s.colored_edges());
        s.begin_trial();
        s.path_augment(4, 5, RED0).unwrap();
        s.color_edge(15, 33, Color::Red).unwrap();
        s.y_extend(34, 35).unwrap();
        s.rollback_trial();
        assert_eq!(before, (s.stats(), s.path_vertices(), s.pairs(), s.colored_edges()));
        s.check_invariants().unwrap();
    }
}
