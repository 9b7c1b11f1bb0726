//! Seeded random instance generators.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::Instance;
use crate::catalog::ConstraintSpec;
use crate::domain::{Value, ValueSet};
use crate::store::{IntVar, SetVar, Store};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

/// A random Roots instance `⟨n, m, k, r⟩`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct RootsInstanceSpec {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub r: usize,
    pub seed: u64,
    /// Leave T at `∅ ⊆ T ⊆ {1..m}` instead of deciding `k` of its elements.
    pub free_t: bool,
}

/// Handles into a generated Roots instance.
#[derive(Clone, Debug)]
pub struct RootsInstance {
    pub instance: Instance,
    pub xs: Vec<IntVar>,
    pub s: SetVar,
    pub t: SetVar,
}

fn decide(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (ValueSet, ValueSet) {
    let mut lb = ValueSet::new();
    let mut ub = ValueSet::interval(1, n as Value);
    for i in sample(rng, n, k) {
        let v = i as Value + 1;
        if rng.gen_bool(0.5) {
            lb.insert(v);
        } else {
            ub.remove(v);
        }
    }
    (lb, ub)
}

pub fn gen_roots_instance(spec: &RootsInstanceSpec) -> Result<RootsInstance, GenError> {
    let RootsInstanceSpec { n, m, k, r, seed, free_t } = *spec;
    if n == 0 || m == 0 || k > n.min(m) || r > n * (m - 1) {
        return Err(GenError::Infeasible(format!("⟨{n},{m},{k},{r}⟩")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = Store::new();
    st.set_universe(1, m as Value);
    let mut doms = vec![ValueSet::interval(1, m as Value); n];
    let (slb, sub) = decide(&mut rng, n, k);
    let (tlb, tub) = if free_t {
        (ValueSet::new(), ValueSet::interval(1, m as Value))
    } else {
        decide(&mut rng, m, k)
    };
    // Each removal is uniform over the (variable, value) pairs that can
    // still go without emptying a domain.
    for _ in 0..r {
        let candidates: Vec<(usize, Value)> = doms
            .iter()
            .enumerate()
            .filter(|(_, d)| d.len() > 1)
            .flat_map(|(i, d)| d.iter().map(move |v| (i, v)))
            .collect();
        let (i, v) = candidates[rng.gen_range(0..candidates.len())];
        doms[i].remove(v);
    }
    let xs: Vec<IntVar> = doms
        .into_iter()
        .enumerate()
        .map(|(i, d)| st.new_int(format!("X{}", i + 1), d))
        .collect();
    let s = st.new_set("S", slb, sub);
    let t = st.new_set("T", tlb, tub);
    let mut instance = Instance::new(st);
    instance.specs.push(ConstraintSpec::Roots { xs: xs.clone(), s, t });
    Ok(RootsInstance { instance, xs, s, t })
}

/// A model-B random binary CSP with Uses constraints on top.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CspSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub d: usize,
    pub m1: usize,
    pub t: usize,
    pub m2: usize,
    pub overlap: bool,
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum UsesModel {
    Range,
    Roots,
    Decomp,
}

impl UsesModel {
    pub fn name(self) -> &'static str {
        match self {
            UsesModel::Range => "range",
            UsesModel::Roots => "roots",
            UsesModel::Decomp => "decomp",
        }
    }
}

/// The generated CSP, kept split so experiments can post either Uses model.
/// `(x, y, forbidden pairs)`.
pub type Table = (IntVar, IntVar, Vec<(Value, Value)>);

#[derive(Clone, Debug)]
pub struct Csp {
    pub store: Store,
    pub zs: Vec<IntVar>,
    pub binary: Vec<Table>,
    /// `(X block, Y block)` of each Uses constraint.
    pub uses: Vec<(Vec<IntVar>, Vec<IntVar>)>,
}

impl Csp {
    pub fn binary_specs(&self) -> Vec<ConstraintSpec> {
        self.binary
            .iter()
            .map(|(x, y, pairs)| ConstraintSpec::Forbidden {
                x: *x,
                y: *y,
                pairs: pairs.clone(),
            })
            .collect()
    }

    pub fn uses_specs(&self, model: UsesModel) -> Vec<ConstraintSpec> {
        self.uses
            .iter()
            .map(|(xs, ys)| {
                let (xs, ys) = (xs.clone(), ys.clone());
                match model {
                    UsesModel::Range => ConstraintSpec::UsesViaRange { xs, ys },
                    UsesModel::Roots => ConstraintSpec::UsesViaRoots { xs, ys },
                    UsesModel::Decomp => ConstraintSpec::UsesPrimitive { xs, ys },
                }
            })
            .collect()
    }

    /// The whole CSP as an instance file, with the chosen Uses model.
    pub fn instance(&self, model: UsesModel) -> Instance {
        let mut inst = Instance::new(self.store.clone());
        inst.specs = self.binary_specs();
        inst.specs.extend(self.uses_specs(model));
        inst
    }
}

pub fn gen_model_b_csp(spec: &CspSpec) -> Result<Csp, GenError> {
    let CspSpec { nx, ny, nz, d, m1, t, m2, overlap, seed } = *spec;
    let pairs = nz * nz.saturating_sub(1) / 2;
    if d == 0 || m1 > pairs || t > d * d {
        return Err(GenError::Infeasible(format!("m1={m1} of {pairs} pairs, t={t} of {} tuples", d * d)));
    }
    let block = nx + ny;
    if block > nz || (!overlap && m2 * block > nz) {
        return Err(GenError::Infeasible(format!("{m2} Uses blocks of {block} variables in {nz}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = Store::new();
    store.set_universe(1, d as Value);
    let zs: Vec<IntVar> = (1..=nz).map(|i| store.new_int_range(format!("Z{i}"), 1, d as Value)).collect();

    let mut all_pairs = Vec::with_capacity(pairs);
    for i in 0..nz {
        for j in i + 1..nz {
            all_pairs.push((i, j));
        }
    }
    let mut chosen: Vec<usize> = sample(&mut rng, pairs, m1).into_vec();
    chosen.sort_unstable();
    let binary = chosen
        .into_iter()
        .map(|p| {
            let (i, j) = all_pairs[p];
            let mut tuples: Vec<usize> = sample(&mut rng, d * d, t).into_vec();
            tuples.sort_unstable();
            let forbidden = tuples
                .into_iter()
                .map(|q| ((q / d) as Value + 1, (q % d) as Value + 1))
                .collect();
            (zs[i], zs[j], forbidden)
        })
        .collect();

    let uses = if overlap {
        (0..m2)
            .map(|_| {
                let idx = sample(&mut rng, nz, block).into_vec();
                (
                    idx[..nx].iter().map(|&i| zs[i]).collect(),
                    idx[nx..].iter().map(|&i| zs[i]).collect(),
                )
            })
            .collect()
    } else {
        let idx = sample(&mut rng, nz, m2 * block).into_vec();
        idx.chunks(block)
            .map(|c| (c[..nx].iter().map(|&i| zs[i]).collect(), c[nx..].iter().map(|&i| zs[i]).collect()))
            .collect()
    };
    Ok(Csp { store, zs, binary, uses })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots(n: usize, m: usize, k: usize, r: usize, seed: u64) -> RootsInstance {
        gen_roots_instance(&RootsInstanceSpec { n, m, k, r, seed, free_t: false }).unwrap()
    }

    #[test]
    fn roots_removal_count() {
        let g = roots(5, 6, 3, 10, 1);
        let left: usize = g.xs.iter().map(|&x| g.instance.store.dom(x).size()).sum();
        assert_eq!(left, 5 * 6 - 10);
    }

    #[test]
    fn roots_is_deterministic() {
        assert_eq!(roots(4, 4, 1, 0, 7).instance.to_text(), roots(4, 4, 1, 0, 7).instance.to_text());
        assert_ne!(roots(6, 6, 3, 9, 7).instance.to_text(), roots(6, 6, 3, 9, 8).instance.to_text());
    }

    #[test]
    fn rejects_bad_roots_params() {
        let bad = RootsInstanceSpec { n: 4, m: 4, k: 5, r: 0, seed: 0, free_t: false };
        assert!(gen_roots_instance(&bad).is_err());
    }

    #[test]
    fn csp_structure() {
        let spec = CspSpec { nx: 5, ny: 10, nz: 25, d: 10, m1: 40, t: 30, m2: 2, overlap: true, seed: 3 };
        let csp = gen_model_b_csp(&spec).unwrap();
        assert_eq!(csp.zs.len(), 25);
        assert_eq!(csp.binary.len(), 40);
        assert!(csp.binary.iter().all(|b| b.2.len() == 30));
        let mut scopes: Vec<_> = csp.binary.iter().map(|b| (b.0, b.1)).collect();
        scopes.sort();
        scopes.dedup();
        assert_eq!(scopes.len(), 40);
        assert!(csp.uses.iter().all(|(x, y)| x.len() == 5 && y.len() == 10));
    }

    #[test]
    fn disjoint_blocks_do_not_share() {
        let spec = CspSpec { nx: 5, ny: 10, nz: 30, d: 10, m1: 60, t: 50, m2: 2, overlap: false, seed: 9 };
        let csp = gen_model_b_csp(&spec).unwrap();
        let mut all: Vec<IntVar> = csp.uses.iter().flat_map(|(x, y)| x.iter().chain(y).copied()).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 30);
    }
}
