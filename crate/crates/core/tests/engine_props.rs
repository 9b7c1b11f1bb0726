mod common;

use common::vs;
use proptest::prelude::*;
use rangeroots::arith::Rel;
use rangeroots::catalog::{post_all, post_global, ConstraintSpec};
use rangeroots::oracle::filter_hc;
use rangeroots::store::replay;
use rangeroots::{Model, Store, Value};

#[derive(Clone, Debug)]
struct Case {
    doms: Vec<Vec<Value>>,
    s: (Vec<Value>, Vec<Value>),
    t: (Vec<Value>, Vec<Value>),
    n: (Value, Value),
    picks: Vec<usize>,
}

fn bounds() -> impl Strategy<Value = (Vec<Value>, Vec<Value>)> {
    (prop::collection::btree_set(1..=3 as Value, 0..=3), prop::collection::btree_set(1..=3 as Value, 0..=2)).prop_map(
        |(ub, extra)| {
            let lb: Vec<Value> = extra.into_iter().filter(|v| ub.contains(v)).collect();
            (lb, ub.into_iter().collect())
        },
    )
}

fn case() -> impl Strategy<Value = Case> {
    (
        prop::collection::vec(prop::collection::btree_set(1..=3 as Value, 1..=3), 1..=3),
        bounds(),
        bounds(),
        (0..=3 as Value, 0..=3 as Value),
        prop::collection::btree_set(0..7usize, 1..=3),
    )
        .prop_map(|(doms, s, t, (a, b), picks)| Case {
            doms: doms.into_iter().map(|d| d.into_iter().collect()).collect(),
            s,
            t,
            n: (a.min(b), a.max(b)),
            picks: picks.into_iter().collect(),
        })
}

fn build(c: &Case) -> (Store, Vec<ConstraintSpec>) {
    let mut st = Store::new();
    st.set_universe(0, 3);
    let xs: Vec<_> = c.doms.iter().enumerate().map(|(k, d)| st.new_int(format!("X{k}"), vs(d))).collect();
    let n = st.new_int_range("N", c.n.0, c.n.1);
    let s = st.new_set("S", vs(&c.s.0), vs(&c.s.1));
    let t = st.new_set("T", vs(&c.t.0), vs(&c.t.1));
    let all = [
        ConstraintSpec::Range { xs: xs.clone(), s, t },
        ConstraintSpec::Roots { xs: xs.clone(), s, t },
        ConstraintSpec::Occurs { xs: xs.clone(), t },
        ConstraintSpec::Card { s, rel: Rel::Eq, n },
        ConstraintSpec::NValue { xs: xs.clone(), n },
        ConstraintSpec::AtMost { xs: xs.clone(), value: 1, n },
        ConstraintSpec::Among { xs, values: vs(&[1, 2]), n },
    ];
    (st, c.picks.iter().map(|&k| all[k].clone()).collect())
}

fn model(c: &Case) -> (Model, Vec<ConstraintSpec>) {
    let (st, specs) = build(c);
    let mut m = Model::new(st);
    post_all(&mut m, &specs).unwrap();
    (m, specs)
}

fn user_state(m: &Model, users: usize, user_sets: usize) -> (Vec<String>, Vec<String>) {
    let st = &m.store;
    (
        st.int_vars().take(users).map(|x| format!("{:?}", st.dom(x))).collect(),
        st.set_vars().take(user_sets).map(|s| format!("{:?}", st.bounds(s))).collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rollback_restores_everything(c in case(), choice in 0..100usize) {
        let (mut m, _) = model(&c);
        if m.fixpoint().is_err() {
            return Ok(());
        }
        let before = m.store.snapshot();
        let level = m.checkpoint();
        let x = m.store.int_vars().next().unwrap();
        let dom = m.store.dom(x).values().to_vec();
        let _ = m.store.assign(x, dom[choice % dom.len()]);
        let _ = m.fixpoint();
        m.rollback(level);
        prop_assert_eq!(m.store.snapshot(), before);
        prop_assert!(!m.store.is_failed());
    }

    #[test]
    fn bounds_stay_ordered(c in case()) {
        let (mut m, _) = model(&c);
        if m.fixpoint().is_ok() {
            for s in m.store.set_vars() {
                prop_assert!(m.store.lb(s).is_subset(m.store.ub(s)));
            }
            for x in m.store.int_vars() {
                prop_assert!(!m.store.dom(x).is_empty());
            }
        }
    }

    #[test]
    fn queue_order_does_not_change_the_fixpoint(c in case(), seed in any::<u64>()) {
        let (mut fifo, _) = model(&c);
        let (mut shuffled, _) = model(&c);
        shuffled.shuffle_queue(seed);
        let a = fifo.fixpoint().is_ok();
        let b = shuffled.fixpoint().is_ok();
        prop_assert_eq!(a, b);
        if a {
            let (ni, ns) = (c.doms.len() + 1, 2);
            prop_assert_eq!(user_state(&fifo, ni, ns), user_state(&shuffled, ni, ns));
        }
    }

    #[test]
    fn propagation_keeps_every_solution(c in case()) {
        let (st, specs) = build(&c);
        let oracle = filter_hc(&specs, &st).unwrap();
        let (mut m, _) = model(&c);
        let failed = m.fixpoint().is_err();
        prop_assert!(oracle.is_sound_for(&m.store, failed));
    }

    #[test]
    fn events_replay_to_the_same_state(c in case(), ops in prop::collection::vec((0..3usize, 1..=3 as Value, 0..3u8), 0..8)) {
        let (mut st, _) = build(&c);
        let base = st.snapshot();
        st.take_events();
        let xs: Vec<_> = st.int_vars().collect();
        let sets: Vec<_> = st.set_vars().collect();
        for (k, v, op) in ops {
            let r = match op {
                0 => st.remove(xs[k % xs.len()], v),
                1 => st.include(sets[k % 2], v),
                _ => st.exclude(sets[k % 2], v),
            };
            if r.is_err() {
                return Ok(());
            }
        }
        prop_assert_eq!(replay(&base, &st.take_events()), st.snapshot());
    }
}

#[test]
fn idempotent_propagators_run_once_alone() {
    let mut st = Store::new();
    let xs: Vec<_> = [&[1, 2][..], &[2, 3], &[1, 3]]
        .iter()
        .enumerate()
        .map(|(k, d)| st.new_int(format!("X{k}"), vs(d)))
        .collect();
    let s = st.new_set("S", vs(&[1]), vs(&[1, 2, 3]));
    let t = st.new_set("T", vs(&[3]), vs(&[1, 2, 3]));
    for spec in [
        ConstraintSpec::Range { xs: xs.clone(), s, t },
        ConstraintSpec::Occurs { xs: xs.clone(), t },
    ] {
        let mut m = Model::new(st.clone());
        let ids = post_global(&mut m, &spec).unwrap();
        m.fixpoint().unwrap();
        for id in ids {
            if m.propagator(id).idempotent() {
                assert_eq!(m.runs(id), 1, "{} re-ran on its own events", m.propagator(id).name());
            }
        }
    }
}

#[test]
fn runs_are_counted_per_propagator() {
    let mut st = Store::new();
    let x = st.new_int("X", vs(&[1, 2]));
    let s = st.new_set("S", vs(&[]), vs(&[1]));
    let t = st.new_set("T", vs(&[2]), vs(&[1, 2]));
    let mut m = Model::new(st);
    post_global(&mut m, &ConstraintSpec::Roots { xs: vec![x], s, t }).unwrap();
    m.fixpoint().unwrap();
    assert_eq!(m.num_propagators(), 2);
    assert!((0..2).all(|id| m.runs(id) >= 1));
    assert_eq!(m.total_runs(), m.runs(0) + m.runs(1));
}
