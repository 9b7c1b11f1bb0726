#![allow(dead_code)]

use rangeroots::catalog::{post_all, ConstraintSpec};
use rangeroots::{IntVar, Model, SetVar, Store, Value, ValueSet};

pub fn vs(v: &[Value]) -> ValueSet {
    v.iter().copied().collect()
}

pub fn ints(st: &mut Store, prefix: &str, doms: &[&[Value]]) -> Vec<IntVar> {
    doms.iter()
        .enumerate()
        .map(|(k, d)| st.new_int(format!("{prefix}{}", k + 1), vs(d)))
        .collect()
}

pub fn set(st: &mut Store, name: &str, lb: &[Value], ub: &[Value]) -> SetVar {
    st.new_set(name, vs(lb), vs(ub))
}

/// Posts the decompositions of `specs` on a copy of `st` and runs the
/// fixpoint. Returns the propagated model and whether it failed.
pub fn propagate(st: &Store, specs: &[ConstraintSpec]) -> (Model, bool) {
    let mut m = Model::new(st.clone());
    post_all(&mut m, specs).expect("well-formed specs");
    let failed = m.fixpoint().is_err();
    (m, failed)
}
