use std::collections::BTreeMap;

use rangeroots::harness::experiments::{run_experiment, DeskClass};
use rangeroots::harness::gen::{gen_model_b_csp, gen_roots_instance, RootsInstanceSpec, UsesModel};
use rangeroots::harness::mystery::{build_mystery_model, MysterySpec, Variant};
use rangeroots::harness::{emit_instance, parse_instance};
use rangeroots::oracle::{enumerate_solutions, filter_hc};
use rangeroots::par::Execution;
use rangeroots::search::{solve, Limits, SearchResult, Strategy};

const SECTION_TWO: &str = "\
# Range([X1,X2], S, T) with S fixed
universe 1 4
int X1 in {1,3}
int X2 in {2,4}
set S lb {1,2} ub {1,2}
set T lb {2} ub {1..4}
con range [X1,X2] S T
";

#[test]
fn emit_then_parse_is_identity() {
    let cases = [
        SECTION_TWO.to_string(),
        gen_roots_instance(&RootsInstanceSpec { n: 5, m: 6, k: 3, r: 10, seed: 4, free_t: false })
            .unwrap()
            .instance
            .to_text(),
        gen_model_b_csp(&DeskClass::C.spec(40, 2)).unwrap().instance(UsesModel::Decomp).to_text(),
        build_mystery_model(&MysterySpec::new(6, 3), Variant::ALLD_ROOTS_ROOTS).instance.to_text(),
    ];
    for text in cases {
        let a = parse_instance(&text).unwrap();
        let emitted = emit_instance(&a);
        let b = parse_instance(&emitted).unwrap();
        assert_eq!(emit_instance(&b), emitted);
        assert_eq!(a.store.snapshot(), b.store.snapshot());
        assert_eq!(a.specs, b.specs);
        assert_eq!(a.order, b.order);
    }
}

#[test]
fn every_tag_parses() {
    let text = "\
int A in {1,2}
int B in 1..3
int C in {0,1,2}
set S lb {} ub {1,2}
set T lb {} ub {1,2,3}
set U lb {} ub {1,2,3}
con alldifferent [A,B]
con alldifferent-binary [A,B]
con permutation [A,B] {1,2}
con nvalue [A,B] C
con among [A,B] {1} C
con among-sum [A,B] {1} 1
con atmost [A,B] 2 C
con atleast [A,B] 2 0
con gcc [A,B] [1,2] [C,1]
con gcc-sum [A,B] [1,2] [C,1]
con disjoint-vars [A] [B]
con uses-range [A,B] [B]
con uses-roots [A,B] [B]
con uses-primitive [A,B] [B]
con common C C [A] [B]
con assign-nvalues [A,B] [B] C
con symalldiff [A,B]
con element A [B,C] B
con contiguity [C,C]
con open-gcc [A,B] S [1,2] [C,1]
con open-alldifferent [A,B] S
con range [A,B] S T
con roots [A,B] S T
con occurs [A,B] T
con card T >= C
con subset S T
con disjoint S U
con union T [S,U]
con member A T
con linear [A,B] [2,-1] <= 3
con neq A B
con forbidden A B [1:1,2:3]
";
    let inst = parse_instance(text).unwrap();
    assert_eq!(inst.specs.len(), 32);
    let again = parse_instance(&emit_instance(&inst)).unwrap();
    assert_eq!(again.specs, inst.specs);
}

#[test]
fn parse_errors_point_at_the_problem() {
    let err = parse_instance("int X in {1}\ncon roots [X] S T\n").unwrap_err();
    assert_eq!((err.line, err.col), (2, 15));
    assert!(err.msg.contains("`S`"));

    let err = parse_instance("int X in {1\n").unwrap_err();
    assert_eq!((err.line, err.col), (1, 10));

    let err = parse_instance("int X in {1}\nint X in {2}\n").unwrap_err();
    assert!(err.msg.contains("twice"));

    let err = parse_instance("set S lb {3} ub {1}\n").unwrap_err();
    assert_eq!(err.line, 1);

    let err = parse_instance("int X in {1}\ncon card X = 1\n").unwrap_err();
    assert!(err.msg.contains("set variable"));
}

#[test]
fn section_two_file_solves_and_matches_the_oracle() {
    let inst = parse_instance(SECTION_TWO).unwrap();
    let oracle = filter_hc(&inst.specs, &inst.store).unwrap();
    let mut model = inst.model().unwrap();
    model.fixpoint().unwrap();
    assert_eq!(oracle.compare(&model.store, false), Ok(()));
    let x2 = inst.store.find_int("X2").unwrap();
    assert_eq!(model.store.dom(x2).values().to_vec(), vec![2]);

    let (result, _) = solve(&mut model, Strategy::Dom, Limits::default());
    let SearchResult::Solution(a) = result else { panic!("expected a solution") };
    let all = enumerate_solutions(&inst.specs, &inst.store).unwrap();
    assert!(all.iter().any(|b| (0..2).all(|k| b.ints[k] == a.ints[k]) && b.sets == a.sets[..2]));
}

#[test]
fn generated_files_are_byte_identical_per_seed() {
    let spec = RootsInstanceSpec { n: 6, m: 5, k: 2, r: 7, seed: 11, free_t: true };
    assert_eq!(gen_roots_instance(&spec).unwrap().instance.to_text(), gen_roots_instance(&spec).unwrap().instance.to_text());
    let c = DeskClass::D.spec(60, 5);
    let text = |m| gen_model_b_csp(&c).unwrap().instance(m).to_text();
    assert_eq!(text(UsesModel::Range), text(UsesModel::Range));
}

#[test]
fn decided_elements_average_k() {
    let (n, m, k) = (6, 5, 3);
    let samples = 1000;
    let mut decided = 0usize;
    for seed in 0..samples {
        let g = gen_roots_instance(&RootsInstanceSpec { n, m, k, r: 0, seed, free_t: false }).unwrap();
        let st = &g.instance.store;
        decided += st.lb(g.s).len() + (n - st.ub(g.s).len());
        decided += st.lb(g.t).len() + (m - st.ub(g.t).len());
    }
    // Every draw decides exactly k elements of each set.
    assert_eq!(decided, samples as usize * 2 * k);
}

#[test]
fn inclusion_and_exclusion_are_balanced() {
    let mut included = 0usize;
    let samples = 1000;
    for seed in 0..samples {
        let g = gen_roots_instance(&RootsInstanceSpec { n: 5, m: 5, k: 2, r: 0, seed, free_t: true }).unwrap();
        included += g.instance.store.lb(g.s).len();
        assert!(g.instance.store.lb(g.t).is_empty());
        assert_eq!(g.instance.store.ub(g.t).len(), 5);
    }
    // 2000 fair coin flips: the count is within 5 standard deviations of 1000.
    assert!((included as f64 - 1000.0).abs() < 5.0 * 500f64.sqrt(), "{included}");
}

#[test]
fn class_c_structure_and_loose_tables() {
    let csp = gen_model_b_csp(&DeskClass::C.spec(30, 8)).unwrap();
    assert_eq!((csp.zs.len(), csp.binary.len(), csp.uses.len()), (25, 40, 2));
    assert!(csp.uses.iter().all(|(x, y)| x.len() == 5 && y.len() == 10));

    let free = gen_model_b_csp(&DeskClass::C.spec(0, 8)).unwrap();
    let mut model = rangeroots::Model::new(free.store.clone());
    rangeroots::catalog::post_all(&mut model, &free.binary_specs()).unwrap();
    model.fixpoint().unwrap();
    assert!(free.zs.iter().all(|&z| model.store.dom(z).size() == 10));
}

#[test]
fn infeasible_generator_parameters_are_rejected() {
    let mut spec = DeskClass::D.spec(50, 1);
    spec.nz = 20;
    assert!(gen_model_b_csp(&spec).is_err());
    spec = DeskClass::C.spec(101, 1);
    assert!(gen_model_b_csp(&spec).is_err());
}

#[test]
fn mystery_solution_passes_the_validator() {
    for variant in Variant::ALL {
        let mm = build_mystery_model(&MysterySpec::new(6, 2), variant);
        let mut model = mm.instance.model().unwrap();
        let limits = Limits { time: None, fails: Some(100_000) };
        let (result, _) = solve(&mut model, Strategy::Lex, limits);
        let SearchResult::Solution(a) = result else { panic!("{} found nothing", variant.name()) };
        assert_eq!(mm.validate(&a), Ok(()), "{}", variant.name());
    }
}

#[test]
fn validator_rejects_a_broken_schedule() {
    let mm = build_mystery_model(&MysterySpec::new(4, 1), Variant::ALLD_GCC_SUM);
    let mut model = mm.instance.model().unwrap();
    let (SearchResult::Solution(mut a), _) = solve(&mut model, Strategy::Lex, Limits::default()) else {
        panic!("expected a solution")
    };
    let (v1, v2) = (mm.visits[0][0], mm.visits[1][0]);
    a.ints[v2.idx()] = a.ints[v1.idx()];
    assert!(mm.validate(&a).unwrap_err().contains("week 1"));
}

#[test]
fn reports_carry_seeds_and_meta() {
    let params: BTreeMap<String, String> = [("class", "B"), ("instances", "3"), ("depth", "4"), ("seed", "9")]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let r = run_experiment("uses-pruning", &params, Execution::Sequential).unwrap();
    assert_eq!(r.rows.len(), 12);
    let seeds: Vec<u64> = r.values("seed");
    assert_eq!(seeds.len(), 12);
    let tsv = r.to_tsv();
    assert!(tsv.starts_with("# experiment: uses-pruning\n"));
    assert!(tsv.lines().any(|l| l.starts_with("class\tdepth")));
    // Rerunning from the report's parameters gives the same rows.
    assert_eq!(run_experiment("uses-pruning", &params, Execution::Parallel).unwrap(), r);
}

#[test]
fn budget_flags_partial_reports() {
    let params: BTreeMap<String, String> = [("budget", "0.000001"), ("per_cell", "50")]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    std::thread::sleep(std::time::Duration::from_millis(1));
    let r = run_experiment("roots-miss-rate", &params, Execution::Sequential).unwrap();
    assert!(r.partial);
    assert!(r.to_tsv().contains("# partial: true"));
}
