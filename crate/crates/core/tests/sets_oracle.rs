mod common;

use common::{propagate, vs};
use proptest::prelude::*;
use rangeroots::arith::Rel;
use rangeroots::catalog::ConstraintSpec;
use rangeroots::oracle::filter_hc;
use rangeroots::{Store, Value};

fn set_bounds() -> impl Strategy<Value = (Vec<Value>, Vec<Value>)> {
    (prop::collection::btree_set(1..=3 as Value, 0..=3), prop::collection::btree_set(1..=3 as Value, 0..=2))
        .prop_map(|(ub, lb)| (lb.into_iter().filter(|v| ub.contains(v)).collect(), ub.into_iter().collect()))
}

fn dom() -> impl Strategy<Value = Vec<Value>> {
    prop::collection::btree_set(0..=3 as Value, 1..=3).prop_map(|d| d.into_iter().collect())
}

struct Vars {
    st: Store,
    x: rangeroots::IntVar,
    y: rangeroots::IntVar,
    sets: [rangeroots::SetVar; 3],
}

fn vars(dx: &[Value], dy: &[Value], b: &[(Vec<Value>, Vec<Value>); 3]) -> Vars {
    let mut st = Store::new();
    let x = st.new_int("X", vs(dx));
    let y = st.new_int("Y", vs(dy));
    let sets = [0, 1, 2].map(|k| st.new_set(format!("S{k}"), vs(&b[k].0), vs(&b[k].1)));
    Vars { st, x, y, sets }
}

fn specs(v: &Vars, pairs: &[(Value, Value)]) -> Vec<(ConstraintSpec, bool)> {
    let [a, b, c] = v.sets;
    // (constraint, whether the propagator is expected to be exact)
    vec![
        (ConstraintSpec::Subset { s: a, t: b }, true),
        (ConstraintSpec::Disjoint { s: a, t: b }, true),
        (ConstraintSpec::Member { x: v.x, s: a }, true),
        (ConstraintSpec::NotEqual { x: v.x, y: v.y }, true),
        (ConstraintSpec::Forbidden { x: v.x, y: v.y, pairs: pairs.to_vec() }, true),
        (ConstraintSpec::Card { s: a, rel: Rel::Eq, n: v.x }, false),
        (ConstraintSpec::Card { s: a, rel: Rel::Le, n: v.x }, false),
        (ConstraintSpec::Card { s: a, rel: Rel::Ge, n: v.x }, false),
        (ConstraintSpec::Union { s: a, parts: vec![b, c] }, false),
        (ConstraintSpec::Linear { terms: vec![(1, v.x), (2, v.y)], rel: Rel::Le, rhs: 4 }, false),
        (ConstraintSpec::Linear { terms: vec![(1, v.x), (-1, v.y)], rel: Rel::Eq, rhs: 1 }, false),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn primitives_against_the_oracle(
        dx in dom(),
        dy in dom(),
        b in (set_bounds(), set_bounds(), set_bounds()),
        pairs in prop::collection::vec((0..=3 as Value, 0..=3 as Value), 0..5),
    ) {
        let v = vars(&dx, &dy, &[b.0, b.1, b.2]);
        for (spec, exact) in specs(&v, &pairs) {
            let oracle = filter_hc(std::slice::from_ref(&spec), &v.st).unwrap();
            let (m, failed) = propagate(&v.st, std::slice::from_ref(&spec));
            prop_assert!(oracle.is_sound_for(&m.store, failed), "{:?} removed a solution", spec);
            if exact {
                prop_assert_eq!(oracle.compare(&m.store, failed), Ok(()), "{:?}", spec);
            }
        }
    }
}

#[test]
fn union_single_holder_is_forced() {
    let v = vars(&[0], &[0], &[(vec![2], vec![1, 2]), (vec![], vec![1]), (vec![], vec![1, 2])]);
    let spec = ConstraintSpec::Union { s: v.sets[0], parts: vec![v.sets[1], v.sets[2]] };
    let (m, failed) = propagate(&v.st, &[spec]);
    assert!(!failed);
    assert!(m.store.lb(v.sets[2]).contains(2));
}
