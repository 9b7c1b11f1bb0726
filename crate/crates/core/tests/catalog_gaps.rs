//! Decompositions that are sound but weaker than full consistency, checked
//! on the smallest instances that show the gap.

mod common;

use common::{ints, propagate, set, vs};
use rangeroots::catalog::ConstraintSpec;
use rangeroots::oracle::{filter_bc, filter_hc};
use rangeroots::{Store, Value};

fn dom(m: &rangeroots::Model, x: rangeroots::IntVar) -> Vec<Value> {
    m.store.dom(x).values().to_vec()
}

#[test]
fn alldifferent_range_misses_hall_interval() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 2], &[1, 2], &[1, 2, 3, 4]]);
    let spec = [ConstraintSpec::AllDifferent { xs: xs.clone() }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    assert_eq!(dom(&m, xs[2]), vec![1, 2, 3, 4]);
    let gac = filter_hc(&spec, &st).unwrap();
    assert_eq!(gac.int(xs[2]), Some(&vs(&[3, 4])));
}

#[test]
fn alldifferent_and_binary_clique_are_incomparable() {
    // The clique prunes on a fixed variable before the image is tight.
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1], &[1, 2, 3]]);
    let (m, _) = propagate(&st, &[ConstraintSpec::AllDifferentBinary { xs: xs.clone() }]);
    assert_eq!(dom(&m, xs[1]), vec![2, 3]);
    // Range sees a pigeonhole the clique does not.
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 2], &[1, 2], &[1, 2]]);
    let (_, range_failed) = propagate(&st, &[ConstraintSpec::AllDifferent { xs: xs.clone() }]);
    let (_, clique_failed) = propagate(&st, &[ConstraintSpec::AllDifferentBinary { xs }]);
    assert!(range_failed);
    assert!(!clique_failed);
}

#[test]
fn nvalue_decomposition_weaker_than_bc() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 2], &[1, 2], &[1, 2, 3, 4]]);
    let n = st.new_int("N", vs(&[3]));
    let spec = [ConstraintSpec::NValue { xs: xs.clone(), n }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    assert_eq!(dom(&m, xs[2]), vec![1, 2, 3, 4]);
    let bc = filter_bc(&spec, &st).unwrap();
    assert_eq!(bc.int(xs[2]), Some(&vs(&[3, 4])));
}

#[test]
fn nvalue_decomposition_fails_on_missing_values() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 3], &[1, 3], &[1, 3]]);
    let n = st.new_int("N", vs(&[3]));
    let (_, failed) = propagate(&st, &[ConstraintSpec::NValue { xs, n }]);
    assert!(failed);
}

#[test]
fn disjoint_decomposition_misses_pruning() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 2], &[1, 3]]);
    let ys = ints(&mut st, "Y", &[&[1, 2], &[1, 3], &[2, 3]]);
    let spec = [ConstraintSpec::DisjointVars { xs: xs.clone(), ys: ys.clone() }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    for &x in xs.iter().chain(&ys) {
        assert_eq!(m.store.dom(x).values(), st.dom(x).values());
    }
    let gac = filter_hc(&spec, &st).unwrap();
    assert_eq!(gac.int(xs[1]), Some(&vs(&[1])));
    assert_eq!(gac.int(ys[0]), Some(&vs(&[2])));
    assert_eq!(gac.int(ys[1]), Some(&vs(&[3])));
}

#[test]
fn uses_decompositions_weaker_than_gac() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 2, 3, 4], &[1, 2, 3, 5], &[4, 5, 6], &[4, 5, 6]]);
    let ys = ints(&mut st, "Y", &[&[1, 2], &[1, 3], &[2, 3]]);
    for spec in [
        ConstraintSpec::UsesViaRange { xs: xs.clone(), ys: ys.clone() },
        ConstraintSpec::UsesViaRoots { xs: xs.clone(), ys: ys.clone() },
    ] {
        let (m, failed) = propagate(&st, std::slice::from_ref(&spec));
        assert!(!failed);
        assert_eq!(dom(&m, xs[0]), vec![1, 2, 3, 4]);
        assert_eq!(dom(&m, xs[1]), vec![1, 2, 3, 5]);
        let gac = filter_hc(&[spec], &st).unwrap();
        assert_eq!(gac.int(xs[0]), Some(&vs(&[1, 2, 3])));
        assert_eq!(gac.int(xs[1]), Some(&vs(&[1, 2, 3])));
    }
}

#[test]
fn gcc_decomposition_misses_pruning() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 2], &[1, 2], &[1, 2, 3]]);
    let counts = ints(&mut st, "O", &[&[0, 1], &[0, 1], &[0, 1]]);
    let spec = [ConstraintSpec::Gcc {
        xs: xs.clone(),
        values: vec![1, 2, 3],
        counts: counts.clone(),
    }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    assert_eq!(dom(&m, xs[2]), vec![1, 2, 3]);
    let s3 = m.store.find_set("gcc#1.S3").unwrap();
    assert_eq!(m.store.lb(s3), &vs(&[]));
    assert_eq!(m.store.ub(s3), &vs(&[3]));
    let hc = filter_hc(&spec, &st).unwrap();
    assert_eq!(hc.int(xs[2]), Some(&vs(&[3])));
    for &o in &counts {
        assert_eq!(hc.int(o), Some(&vs(&[1])));
    }
}

#[test]
fn common_decomposition_misses_pruning() {
    let mut st = Store::new();
    let n = st.new_int("N", vs(&[0]));
    let mm = st.new_int("M", vs(&[0]));
    let xs = ints(&mut st, "X", &[&[1, 2], &[1, 3]]);
    let ys = ints(&mut st, "Y", &[&[1, 2], &[1, 3], &[2, 3]]);
    let spec = [ConstraintSpec::Common {
        n,
        m: mm,
        xs: xs.clone(),
        ys: ys.clone(),
    }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    for &x in xs.iter().chain(&ys) {
        assert_eq!(m.store.dom(x).values(), st.dom(x).values());
    }
    let gac = filter_hc(&spec, &st).unwrap();
    assert_eq!(gac.int(xs[0]), Some(&vs(&[1])));
    assert_eq!(gac.int(xs[1]), Some(&vs(&[1])));
    assert_eq!(gac.int(ys[0]), Some(&vs(&[2])));
    assert_eq!(gac.int(ys[1]), Some(&vs(&[3])));
}

#[test]
fn assign_nvalues_decomposition_misses_pruning() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[0], &[0]]);
    let ys = ints(&mut st, "Y", &[&[1, 2], &[2, 3]]);
    let n = st.new_int("N", vs(&[1]));
    let spec = [ConstraintSpec::AssignNValues {
        xs: xs.clone(),
        ys: ys.clone(),
        n,
    }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    assert_eq!(dom(&m, ys[0]), vec![1, 2]);
    assert_eq!(dom(&m, ys[1]), vec![2, 3]);
    let s0 = m.store.find_set("assign-nvalues#1.S0").unwrap();
    assert_eq!(m.store.lb(s0), &vs(&[1, 2]));
    let gac = filter_hc(&spec, &st).unwrap();
    assert_eq!(gac.int(ys[0]), Some(&vs(&[2])));
    assert_eq!(gac.int(ys[1]), Some(&vs(&[2])));
}

#[test]
fn symalldiff_decomposition_misses_odd_cycle() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[2, 3], &[1, 3], &[1, 2]]);
    let spec = [ConstraintSpec::SymAllDiff { xs: xs.clone() }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    for &x in &xs {
        assert_eq!(m.store.dom(x).values(), st.dom(x).values());
    }
    assert!(!filter_hc(&spec, &st).unwrap().consistent);
}

#[test]
fn contiguity_decomposition_misses_pruning() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[0, 1], &[1], &[0, 1], &[1]]);
    let spec = [ConstraintSpec::Contiguity { xs: xs.clone() }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    assert_eq!(dom(&m, xs[2]), vec![0, 1]);
    let s = m.store.find_set("contiguity#1.S").unwrap();
    assert!(vs(&[2, 4]).is_subset(m.store.lb(s)));
    let get = |name: &str| dom(&m, m.store.find_int(name).unwrap());
    assert_eq!(get("contiguity#1.X"), vec![4]);
    assert_eq!(get("contiguity#1.Y"), vec![1, 2]);
    assert_eq!(get("contiguity#1.C"), vec![3, 4]);
    let gac = filter_hc(&spec, &st).unwrap();
    assert_eq!(gac.int(xs[2]), Some(&vs(&[1])));
}

#[test]
fn open_gcc_decomposition_misses_pruning() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 2], &[1, 2], &[1, 2, 3]]);
    let s = set(&mut st, "S", &[1, 2, 3], &[1, 2, 3]);
    let counts = ints(&mut st, "O", &[&[0, 1], &[0, 1], &[0, 1]]);
    let spec = [ConstraintSpec::OpenGcc {
        xs: xs.clone(),
        s,
        values: vec![1, 2, 3],
        counts,
    }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    assert_eq!(dom(&m, xs[2]), vec![1, 2, 3]);
    let s3 = m.store.find_set("open-gcc#1.S3").unwrap();
    assert_eq!(m.store.ub(s3), &vs(&[3]));
    let hc = filter_hc(&spec, &st).unwrap();
    assert_eq!(hc.int(xs[2]), Some(&vs(&[3])));
}

#[test]
fn open_gcc_decomposition_shrinks_open_set() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 2], &[2, 3], &[3, 4]]);
    let s = set(&mut st, "S", &[], &[1, 2, 3]);
    let counts = ints(&mut st, "O", &[&[1], &[0, 1], &[0], &[0]]);
    let spec = [ConstraintSpec::OpenGcc {
        xs: xs.clone(),
        s,
        values: vec![1, 2, 3, 4],
        counts,
    }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    let part = |k: usize| m.store.find_set(&format!("open-gcc#1.S{k}")).unwrap();
    assert_eq!(m.store.lb(part(1)), &vs(&[1]));
    assert_eq!(m.store.ub(part(1)), &vs(&[1]));
    assert_eq!(dom(&m, xs[0]), vec![1]);
    assert_eq!(m.store.ub(part(2)), &vs(&[2]));
    assert!(m.store.ub(part(3)).is_empty());
    assert!(m.store.ub(part(4)).is_empty());
    assert_eq!(m.store.lb(s), &vs(&[1]));
    assert_eq!(m.store.ub(s), &vs(&[1, 2]));
    assert!(filter_hc(&spec, &st).unwrap().is_sound_for(&m.store, failed));
}

#[test]
fn open_alldifferent_decomposition_misses_hall_interval() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 2], &[1, 2], &[1, 2, 3, 4]]);
    let s = set(&mut st, "S", &[1, 2, 3], &[1, 2, 3]);
    let spec = [ConstraintSpec::OpenAllDifferent { xs: xs.clone(), s }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    assert_eq!(dom(&m, xs[2]), vec![1, 2, 3, 4]);
    assert_eq!(filter_hc(&spec, &st).unwrap().int(xs[2]), Some(&vs(&[3, 4])));
}

#[test]
fn element_forces_index() {
    let mut st = Store::new();
    let i = st.new_int("I", vs(&[1, 2]));
    let xs = ints(&mut st, "X", &[&[1], &[2]]);
    let j = st.new_int("J", vs(&[1]));
    let spec = [ConstraintSpec::Element { index: i, xs, value: j }];
    let (m, failed) = propagate(&st, &spec);
    assert!(!failed);
    assert_eq!(dom(&m, i), vec![1]);
    filter_hc(&spec, &st).unwrap().compare(&m.store, failed).unwrap();
}

#[test]
fn hidden_names_are_stable() {
    let mut st = Store::new();
    let xs = ints(&mut st, "X", &[&[1, 2], &[1, 2]]);
    let n = st.new_int("N", vs(&[1, 2]));
    let specs = [
        ConstraintSpec::NValue { xs: xs.clone(), n },
        ConstraintSpec::AtMost { xs, value: 1, n },
    ];
    let (m, _) = propagate(&st, &specs);
    assert!(m.store.find_set("nvalue#1.T").is_some());
    assert!(m.store.find_set("atmost#2.S").is_some());
}
