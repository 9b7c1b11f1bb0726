//! The Mystery Shopper scheduling problem.
//!
//! `s` salesladies are each visited once a week for 4 weeks. Visits in the
//! same week use different shoppers; an area is never visited twice by the
//! same shopper; every shopper makes between one and `⌈4s/P⌉` visits (or,
//! with `balanced`, the same number give or take one); and each saleslady
//! sees shoppers from at least two groups of 4.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Instance;
use crate::catalog::ConstraintSpec;
use crate::domain::{Value, ValueSet};
use crate::oracle::{holds, Assignment};
use crate::store::{IntVar, Store};

pub const WEEKS: usize = 4;
pub const GROUP: usize = 4;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct MysterySpec {
    pub s: usize,
    pub seed: u64,
    pub area_min: usize,
    pub area_max: usize,
    /// Use the tight load window `[⌊4s/P⌋, ⌈4s/P⌉]`.
    pub balanced: bool,
}

impl MysterySpec {
    pub fn new(s: usize, seed: u64) -> Self {
        Self { s, seed, area_min: 1, area_max: 3, balanced: false }
    }

    /// `⌈(s+2)/4⌉·4`.
    pub fn shoppers(&self) -> usize {
        (self.s + 2).div_ceil(GROUP) * GROUP
    }

    pub fn groups(&self) -> usize {
        self.shoppers() / GROUP
    }

    /// Visit-count bounds per shopper.
    pub fn load(&self) -> (Value, Value) {
        let (v, p) = (self.s * WEEKS, self.shoppers());
        let hi = v.div_ceil(p) as Value;
        if self.balanced {
            ((v / p) as Value, hi)
        } else {
            (1, hi)
        }
    }

    /// Area sizes, one uniform draw per seed. An area of `k` salesladies
    /// needs `4k` distinct shoppers, so sizes are capped at `P/4`.
    pub fn areas(&self) -> Vec<Vec<usize>> {
        let cap = self.area_max.min(self.shoppers() / WEEKS);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut areas = Vec::new();
        let mut next = 0;
        while next < self.s {
            let left = self.s - next;
            let hi = cap.min(left);
            let mut size = rng.gen_range(self.area_min.min(hi)..=hi);
            // Never strand a remainder smaller than the minimum area.
            if left - size > 0 && left - size < self.area_min {
                size = left;
            }
            areas.push((next..next + size).collect());
            next += size;
        }
        areas
    }
}

/// One implementation choice per constraint group.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Variant {
    /// AllDifferent via Range rather than disequalities.
    pub alld_range: bool,
    /// Gcc via Roots rather than Boolean sums.
    pub gcc_roots: bool,
    /// Among via Roots rather than a Boolean sum.
    pub among_roots: bool,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::ALLD_GCC_SUM,
        Variant { alld_range: false, gcc_roots: false, among_roots: true },
        Variant { alld_range: false, gcc_roots: true, among_roots: false },
        Variant { alld_range: true, gcc_roots: false, among_roots: false },
        Variant::ALLD_ROOTS_ROOTS,
    ];
    pub const ALLD_GCC_SUM: Variant = Variant { alld_range: false, gcc_roots: false, among_roots: false };
    pub const ALLD_ROOTS_ROOTS: Variant = Variant { alld_range: false, gcc_roots: true, among_roots: true };

    pub fn name(self) -> String {
        format!(
            "{}-{}-{}",
            if self.alld_range { "range" } else { "alld" },
            if self.gcc_roots { "roots" } else { "gcc" },
            if self.among_roots { "roots" } else { "sum" }
        )
    }

    pub fn parse(name: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == name)
    }
}

#[derive(Clone, Debug)]
pub struct MysteryModel {
    pub spec: MysterySpec,
    pub instance: Instance,
    /// `visits[saleslady][week]`.
    pub visits: Vec<Vec<IntVar>>,
    pub areas: Vec<Vec<usize>>,
}

pub fn build_mystery_model(spec: &MysterySpec, variant: Variant) -> MysteryModel {
    let p = spec.shoppers() as Value;
    let mut st = Store::new();
    st.set_universe(0, p);
    let mut visits = vec![Vec::with_capacity(WEEKS); spec.s];
    // Week-major declaration order is the lex branching order.
    for w in 0..WEEKS {
        for (sl, row) in visits.iter_mut().enumerate() {
            row.push(st.new_int_range(format!("V{}_{}", sl + 1, w + 1), 1, p));
        }
    }
    let order: Vec<IntVar> = (0..WEEKS).flat_map(|w| visits.iter().map(move |r| r[w])).collect();
    let areas = spec.areas();
    let (lo, hi) = spec.load();
    let counts: Vec<IntVar> = (1..=p).map(|k| st.new_int_range(format!("O{k}"), lo, hi)).collect();
    let among_n: Vec<Vec<IntVar>> = (0..spec.s)
        .map(|sl| {
            (0..spec.groups())
                .map(|g| st.new_int_range(format!("N{}_{}", sl + 1, g + 1), 0, (WEEKS - 1) as Value))
                .collect()
        })
        .collect();

    let alld = |xs: Vec<IntVar>| {
        if variant.alld_range {
            ConstraintSpec::AllDifferent { xs }
        } else {
            ConstraintSpec::AllDifferentBinary { xs }
        }
    };
    let mut specs = Vec::new();
    for w in 0..WEEKS {
        specs.push(alld(visits.iter().map(|r| r[w]).collect()));
    }
    for area in &areas {
        specs.push(alld(area.iter().flat_map(|&sl| visits[sl].iter().copied()).collect()));
    }
    let all: Vec<IntVar> = visits.iter().flatten().copied().collect();
    let values: Vec<Value> = (1..=p).collect();
    specs.push(if variant.gcc_roots {
        ConstraintSpec::Gcc { xs: all, values, counts }
    } else {
        ConstraintSpec::GccSum { xs: all, values, counts }
    });
    for (sl, row) in visits.iter().enumerate() {
        for (g, &n) in among_n[sl].iter().enumerate() {
            let lo = (g * GROUP) as Value + 1;
            let group = ValueSet::interval(lo, lo + GROUP as Value - 1);
            let xs = row.clone();
            specs.push(if variant.among_roots {
                ConstraintSpec::Among { xs, values: group, n }
            } else {
                ConstraintSpec::AmongSum { xs, values: group, n }
            });
        }
    }
    let mut instance = Instance::new(st);
    instance.specs = specs;
    instance.order = order;
    MysteryModel { spec: *spec, instance, visits, areas }
}

impl MysteryModel {
    /// Checks a schedule against the problem statement, independently of
    /// how the constraints were posted.
    pub fn validate(&self, a: &Assignment) -> Result<(), String> {
        let p = self.spec.shoppers() as Value;
        let grid: Vec<Vec<Value>> = self.visits.iter().map(|r| r.iter().map(|&x| a.int(x)).collect()).collect();
        let distinct = |vals: &mut Vec<Value>| {
            vals.sort_unstable();
            vals.windows(2).all(|w| w[0] != w[1])
        };
        if let Some(v) = grid.iter().flatten().find(|&&v| v < 1 || v > p) {
            return Err(format!("shopper {v} out of range"));
        }
        for w in 0..WEEKS {
            if !distinct(&mut grid.iter().map(|r| r[w]).collect()) {
                return Err(format!("week {} repeats a shopper", w + 1));
            }
        }
        for (k, area) in self.areas.iter().enumerate() {
            if !distinct(&mut area.iter().flat_map(|&sl| grid[sl].iter().copied()).collect()) {
                return Err(format!("area {} sees a shopper twice", k + 1));
            }
        }
        let (lo, hi) = self.spec.load();
        for shopper in 1..=p {
            let c = grid.iter().flatten().filter(|&&v| v == shopper).count() as Value;
            if c < lo || c > hi {
                return Err(format!("shopper {shopper} makes {c} visits"));
            }
        }
        for (sl, row) in grid.iter().enumerate() {
            let g0 = (row[0] - 1) / GROUP as Value;
            if row.iter().all(|&v| (v - 1) / GROUP as Value == g0) {
                return Err(format!("saleslady {} sees a single group", sl + 1));
            }
        }
        if let Some(spec) = self.instance.specs.iter().find(|c| !holds(c, a)) {
            return Err(format!("{} violated", spec.tag()));
        }
        Ok(())
    }
}
