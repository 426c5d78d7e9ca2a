use proptest::prelude::*;
use semiham::baseline::{ThreeOut, UniformCircles};
use semiham::dg::DegreeGreedy;
use semiham::fr::FullyRandomized;
use semiham::store::{DegreeBuckets, IndexedSet};
use semiham::{rng_for, step, Mode, ProcessState, Strategy as Placement};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
enum SetOp {
    Insert(u32),
    Remove(u32),
    PopLast,
}

fn set_op(cap: u32) -> impl Strategy<Value = SetOp> {
    prop_oneof![
        (0..cap).prop_map(SetOp::Insert),
        (0..cap).prop_map(SetOp::Remove),
        Just(SetOp::PopLast),
    ]
}

fn apply_set(s: &mut IndexedSet, model: &mut BTreeSet<u32>, op: &SetOp) {
    match *op {
        SetOp::Insert(v) => assert_eq!(s.insert(v), model.insert(v)),
        SetOp::Remove(v) => assert_eq!(s.remove(v), model.remove(&v)),
        SetOp::PopLast => {
            if let Some(v) = s.pop_last() {
                assert!(model.remove(&v));
            } else {
                assert!(model.is_empty());
            }
        }
    }
}

fn same_members(s: &IndexedSet, model: &BTreeSet<u32>) {
    let got: BTreeSet<u32> = s.members().iter().copied().collect();
    assert_eq!(got.len(), s.len(), "duplicate members");
    assert_eq!(&got, model);
    for (i, &v) in s.members().iter().enumerate() {
        assert_eq!(s.at(i), v);
        assert!(s.contains(v));
    }
}

fn fingerprint(s: &ProcessState) -> String {
    format!("{:?}|{:?}|{:?}|{:?}|{}", s.stats(), s.path_vertices(), s.pairs(), s.colored_edges(), s.step_edges().len())
}

fn strategy(i: usize) -> &'static dyn Placement {
    const ALL: [&dyn Placement; 4] = [&FullyRandomized, &DegreeGreedy, &UniformCircles, &ThreeOut];
    ALL[i]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn indexed_set_tracks_a_model(ops in prop::collection::vec(set_op(40), 0..200)) {
        let mut s = IndexedSet::new(40);
        let mut model = BTreeSet::new();
        for op in &ops {
            apply_set(&mut s, &mut model, op);
        }
        same_members(&s, &model);
    }

    #[test]
    fn indexed_set_rollback(
        before in prop::collection::vec(set_op(30), 0..60),
        during in prop::collection::vec(set_op(30), 0..60),
    ) {
        let mut s = IndexedSet::new(30);
        let mut model = BTreeSet::new();
        for op in &before {
            apply_set(&mut s, &mut model, op);
        }
        let order = s.members().to_vec();
        s.begin();
        let mut scratch = model.clone();
        for op in &during {
            apply_set(&mut s, &mut scratch, op);
        }
        s.rollback();
        prop_assert_eq!(s.members(), &order[..]);
        same_members(&s, &model);
    }

    #[test]
    fn degree_buckets_track_min_key(ops in prop::collection::vec((0u32..25, 0u32..6, any::<bool>()), 0..200)) {
        let mut b = DegreeBuckets::new(25);
        let mut model: BTreeMap<u32, u32> = BTreeMap::new();
        for &(v, k, keep) in &ops {
            match (model.contains_key(&v), keep) {
                (false, _) => {
                    b.insert(v, k);
                    model.insert(v, k);
                }
                (true, true) => {
                    // keys only grow in the process
                    let k = model[&v].max(k);
                    b.change_key(v, k);
                    model.insert(v, k);
                }
                (true, false) => {
                    b.remove(v);
                    model.remove(&v);
                }
            }
            prop_assert_eq!(b.len(), model.len());
            prop_assert_eq!(b.min_key(), model.values().min().copied());
            for k in 0..6 {
                prop_assert_eq!(b.bucket_len(k), model.values().filter(|&&x| x == k).count());
            }
        }
    }

    #[test]
    fn process_invariants_hold(which in 0usize..4, n in 10usize..300, seed in any::<u64>(), factor in 1u64..4) {
        let strat = strategy(which);
        let mut st = ProcessState::with_mode(n, strat.mode()).unwrap();
        let mut rng = rng_for(seed, 0);
        for i in 1..=factor * n as u64 {
            step(&mut st, strat, &mut rng);
            prop_assert_eq!(st.t(), i);
            if i % 7 == 0 {
                st.check_invariants().map_err(TestCaseError::fail)?;
            }
        }
        st.check_invariants().map_err(TestCaseError::fail)?;
        let s = st.stats();
        prop_assert_eq!(s.x + s.y + s.free, n);
        prop_assert_eq!(st.step_edges().len() as u64, st.t());
        prop_assert!(st.step_edges().iter().all(|&(u, v)| u != v && (u as usize) < n && (v as usize) < n));
    }

    #[test]
    fn trial_rollback_is_exact(which in 0usize..2, n in 20usize..400, seed in any::<u64>(), pre in 0u64..600, trial in 1u64..100) {
        let strat = strategy(which);
        let mut st = ProcessState::with_mode(n, strat.mode()).unwrap();
        let mut rng = rng_for(seed, 0);
        for _ in 0..pre {
            step(&mut st, strat, &mut rng);
        }
        let before = fingerprint(&st);
        st.begin_trial();
        for _ in 0..trial {
            step(&mut st, strat, &mut rng);
        }
        st.rollback_trial();
        st.check_invariants().map_err(TestCaseError::fail)?;
        prop_assert_eq!(fingerprint(&st), before);
    }

    #[test]
    fn dg_phase_never_decreases(n in 20usize..300, seed in any::<u64>()) {
        let mut st = ProcessState::with_mode(n, Mode::Dg).unwrap();
        let mut rng = rng_for(seed, 0);
        let mut last = 1;
        for _ in 0..3 * n {
            step(&mut st, &DegreeGreedy, &mut rng);
            match st.phase() {
                Some(p) => {
                    prop_assert!(p >= last);
                    last = p;
                }
                None => break,
            }
        }
    }
}
