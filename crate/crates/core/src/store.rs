//! Journaled storage primitives.
//!
//! Every mutable array in a process state goes through [`TrackedVec`], which can
//! record an undo log between [`TrackedVec::begin`] and [`TrackedVec::rollback`].
//! Drift estimation uses this to apply one step to a frozen state and restore
//! it in time proportional to the step's footprint rather than to `n`.

use rand::Rng;

pub const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
enum Undo<T> {
    Set(u32, T),
    Push,
    Pop(T),
}

#[derive(Clone, Debug)]
pub struct TrackedVec<T: Copy> {
    data: Vec<T>,
    log: Vec<Undo<T>>,
    recording: bool,
}

impl<T: Copy> TrackedVec<T> {
    pub fn new() -> Self {
        Self { data: Vec::new(), log: Vec::new(), recording: false }
    }

    pub fn filled(value: T, len: usize) -> Self {
        Self { data: vec![value; len], log: Vec::new(), recording: false }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> T {
        self.data[i]
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: T) {
        if self.recording {
            self.log.push(Undo::Set(i as u32, self.data[i]));
        }
        self.data[i] = value;
    }

    #[inline]
    pub fn push(&mut self, value: T) {
        if self.recording {
            self.log.push(Undo::Push);
        }
        self.data.push(value);
    }

    #[inline]
    pub fn pop(&mut self) -> Option<T> {
        let v = self.data.pop()?;
        if self.recording {
            self.log.push(Undo::Pop(v));
        }
        Some(v)
    }

    pub fn begin(&mut self) {
        self.log.clear();
        self.recording = true;
    }

    pub fn rollback(&mut self) {
        while let Some(u) = self.log.pop() {
            match u {
                Undo::Set(i, v) => self.data[i as usize] = v,
                Undo::Push => {
                    self.data.pop();
                }
                Undo::Pop(v) => self.data.push(v),
            }
        }
        self.recording = false;
    }

    pub fn commit(&mut self) {
        self.log.clear();
        self.recording = false;
    }
}

impl<T: Copy> Default for TrackedVec<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Set of vertex ids in `[0, capacity)` with O(1) insert, remove, membership
/// and uniform sampling (dense array + position index, swap-remove).
#[derive(Clone, Debug)]
pub struct IndexedSet {
    dense: TrackedVec<u32>,
    pos: TrackedVec<u32>,
}

impl IndexedSet {
    pub fn new(capacity: usize) -> Self {
        Self { dense: TrackedVec::new(), pos: TrackedVec::filled(NONE, capacity) }
    }

    /// Set containing every id in `[0, capacity)`.
    pub fn full(capacity: usize) -> Self {
        let mut s = Self::new(capacity);
        for v in 0..capacity as u32 {
            s.insert(v);
        }
        s
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dense.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.dense.is_empty()
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.pos.get(v as usize) != NONE
    }

    #[inline]
    pub fn members(&self) -> &[u32] {
        self.dense.as_slice()
    }

    /// Returns false if `v` was already present.
    pub fn insert(&mut self, v: u32) -> bool {
        if self.contains(v) {
            return false;
        }
        self.pos.set(v as usize, self.dense.len() as u32);
        self.dense.push(v);
        true
    }

    /// Returns false if `v` was absent.
    pub fn remove(&mut self, v: u32) -> bool {
        let i = self.pos.get(v as usize);
        if i == NONE {
            return false;
        }
        let last = self.dense.pop().expect("non-empty");
        if last != v {
            self.dense.set(i as usize, last);
            self.pos.set(last as usize, i);
        }
        self.pos.set(v as usize, NONE);
        true
    }

    /// Most recently inserted member still at the tail of the dense array.
    pub fn pop_last(&mut self) -> Option<u32> {
        let v = self.dense.pop()?;
        self.pos.set(v as usize, NONE);
        Some(v)
    }

    #[inline]
    pub fn at(&self, i: usize) -> u32 {
        self.dense.get(i)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<u32> {
        if self.is_empty() {
            return None;
        }
        Some(self.dense.get(rng.random_range(0..self.len())))
    }

    /// Uniform member different from `exclude` (which must be a member).
    pub fn sample_excluding<R: Rng + ?Sized>(&self, exclude: u32, rng: &mut R) -> Option<u32> {
        let k = self.len();
        let skip = self.pos.get(exclude as usize);
        debug_assert!(skip != NONE);
        if k < 2 {
            return None;
        }
        let mut i = rng.random_range(0..k - 1);
        if i as u32 == skip {
            i = k - 1;
        }
        Some(self.dense.get(i))
    }

    pub fn clear(&mut self) {
        while self.pop_last().is_some() {}
    }

    pub fn begin(&mut self) {
        self.dense.begin();
        self.pos.begin();
    }

    pub fn rollback(&mut self) {
        self.dense.rollback();
        self.pos.rollback();
    }

    pub fn commit(&mut self) {
        self.dense.commit();
        self.pos.commit();
    }
}

/// Vertices bucketed by a small non-negative key (a degree), with the minimum
/// occupied key tracked so that uniform sampling among minimisers is O(1)
/// amortised.
#[derive(Clone, Debug)]
pub struct DegreeBuckets {
    key: TrackedVec<u32>,
    pos: TrackedVec<u32>,
    buckets: Vec<TrackedVec<u32>>,
    min: usize,
    saved_min: usize,
    count: usize,
    saved_count: usize,
    recording: bool,
}

impl DegreeBuckets {
    pub fn new(capacity: usize) -> Self {
        Self {
            key: TrackedVec::filled(NONE, capacity),
            pos: TrackedVec::filled(NONE, capacity),
            buckets: Vec::new(),
            min: 0,
            saved_min: 0,
            count: 0,
            saved_count: 0,
            recording: false,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.key.get(v as usize) != NONE
    }

    #[inline]
    pub fn key_of(&self, v: u32) -> Option<u32> {
        let k = self.key.get(v as usize);
        (k != NONE).then_some(k)
    }

    fn bucket_mut(&mut self, k: usize) -> &mut TrackedVec<u32> {
        while self.buckets.len() <= k {
            let mut b = TrackedVec::new();
            if self.recording {
                b.begin();
            }
            self.buckets.push(b);
        }
        &mut self.buckets[k]
    }

    pub fn insert(&mut self, v: u32, k: u32) {
        debug_assert!(!self.contains(v));
        let b = self.bucket_mut(k as usize);
        let i = b.len() as u32;
        b.push(v);
        self.pos.set(v as usize, i);
        self.key.set(v as usize, k);
        if self.count == 0 || (k as usize) < self.min {
            self.min = k as usize;
        }
        self.count += 1;
    }

    pub fn remove(&mut self, v: u32) {
        let k = self.key.get(v as usize);
        debug_assert!(k != NONE);
        let i = self.pos.get(v as usize);
        let b = &mut self.buckets[k as usize];
        let last = b.pop().expect("bucket non-empty");
        if last != v {
            b.set(i as usize, last);
            self.pos.set(last as usize, i);
        }
        self.pos.set(v as usize, NONE);
        self.key.set(v as usize, NONE);
        self.count -= 1;
        self.advance_min();
    }

    pub fn change_key(&mut self, v: u32, k: u32) {
        if self.key.get(v as usize) == k {
            return;
        }
        self.remove(v);
        self.insert(v, k);
    }

    fn advance_min(&mut self) {
        if self.count == 0 {
            self.min = 0;
            return;
        }
        while self.min < self.buckets.len() && self.buckets[self.min].is_empty() {
            self.min += 1;
        }
        // A removal can only empty the minimum bucket, never create a lower one.
        debug_assert!(self.min < self.buckets.len());
    }

    /// Smallest occupied key, if any.
    pub fn min_key(&self) -> Option<u32> {
        (self.count > 0).then_some(self.min as u32)
    }

    /// Number of members with key `k`.
    pub fn bucket_len(&self, k: u32) -> usize {
        self.buckets.get(k as usize).map_or(0, |b| b.len())
    }

    pub fn bucket(&self, k: u32) -> &[u32] {
        self.buckets.get(k as usize).map_or(&[], |b| b.as_slice())
    }

    pub fn sample_min<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<u32> {
        if self.count == 0 {
            return None;
        }
        let b = &self.buckets[self.min];
        Some(b.get(rng.random_range(0..b.len())))
    }

    pub fn begin(&mut self) {
        self.key.begin();
        self.pos.begin();
        for b in &mut self.buckets {
            b.begin();
        }
        self.saved_min = self.min;
        self.saved_count = self.count;
        self.recording = true;
    }

    pub fn rollback(&mut self) {
        self.key.rollback();
        self.pos.rollback();
        for b in &mut self.buckets {
            b.rollback();
        }
        self.min = self.saved_min;
        self.count = self.saved_count;
        self.recording = false;
    }

    pub fn commit(&mut self) {
        self.key.commit();
        self.pos.commit();
        for b in &mut self.buckets {
            b.commit();
        }
        self.recording = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn set_swap_remove_keeps_index() {
        let mut s = IndexedSet::new(10);
        for v in [3, 7, 1, 9] {
            assert!(s.insert(v));
        }
        assert!(!s.insert(7));
        assert!(s.remove(3));
        assert!(!s.remove(3));
        assert_eq!(s.len(), 3);
        for &m in s.members() {
            assert!(s.contains(m));
        }
        assert!(!s.contains(3));
    }

    #[test]
    fn rollback_restores_set_and_buckets() {
        let mut s = IndexedSet::full(20);
        let mut b = DegreeBuckets::new(20);
        for v in 0..20 {
            b.insert(v, v % 3);
        }
        let before: Vec<u32> = s.members().to_vec();
        s.begin();
        b.begin();
        s.remove(4);
        s.remove(19);
        s.insert(4);
        b.change_key(0, 7);
        b.remove(3);
        b.remove(6);
        s.rollback();
        b.rollback();
        assert_eq!(s.members(), &before[..]);
        assert_eq!(b.len(), 20);
        assert_eq!(b.min_key(), Some(0));
        assert_eq!(b.key_of(0), Some(0));
        assert_eq!(b.bucket_len(0), 7);
    }

    #[test]
    fn min_advances_when_bucket_empties() {
        let mut b = DegreeBuckets::new(5);
        b.insert(0, 1);
        b.insert(1, 2);
        assert_eq!(b.min_key(), Some(1));
        b.change_key(0, 2);
        assert_eq!(b.min_key(), Some(2));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = b.sample_min(&mut rng).unwrap();
        assert!(v == 0 || v == 1);
    }

    #[test]
    fn sample_excluding_never_returns_excluded() {
        let s = IndexedSet::full(5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            assert_ne!(s.sample_excluding(2, &mut rng), Some(2));
        }
    }
}
