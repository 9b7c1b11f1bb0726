//! Experiment drivers. Each returns a [`Report`] whose rows carry the seed
//! that regenerates them.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::gen::{gen_model_b_csp, gen_roots_instance, Csp, CspSpec, RootsInstanceSpec, UsesModel};
use super::mystery::{build_mystery_model, MysterySpec, Variant};
use super::{mix_seed, Report};
use crate::catalog::{post_all, ConstraintSpec};
use crate::engine::Model;
use crate::oracle::{roots_filter, FilterResult};
use crate::par::Execution;
use crate::roots::{post_roots, Mode};
use crate::search::{solve, Limits, SearchResult, Strategy};
use crate::store::{IntVar, SetVar, Store};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExpError {
    #[error("unknown experiment `{0}` (expected roots-miss-rate, roots-miss-rate-freeT, uses-pruning, uses-solve or mystery)")]
    Unknown(String),
    #[error("bad parameter `{0}`: {1}")]
    Param(String, String),
}

fn deadline(budget: Option<Duration>) -> impl Fn() -> bool + Sync {
    let start = Instant::now();
    move || budget.is_some_and(|b| start.elapsed() >= b)
}

// ---------------------------------------------------------------- miss rate

#[derive(Clone, Debug)]
pub struct MissRateParams {
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub per_cell: usize,
    pub free_t: bool,
    pub seed: u64,
    pub budget: Option<Duration>,
}

impl Default for MissRateParams {
    fn default() -> Self {
        Self {
            ns: vec![4, 5, 6],
            ms: vec![4, 5, 6],
            per_cell: 100,
            free_t: false,
            seed: 1,
            budget: None,
        }
    }
}

/// Values the oracle prunes from the original bounds, and how many of those
/// the decomposition left in place.
fn misses(orig: &Store, xs: &[IntVar], s: SetVar, t: SetVar, oracle: &FilterResult, after: &Store, failed: bool) -> (u64, u64) {
    if !oracle.consistent {
        let mut all: u64 = xs.iter().map(|&x| orig.dom(x).size() as u64).sum();
        for v in [s, t] {
            all += (orig.ub(v).len() - orig.lb(v).len()) as u64;
        }
        return (all, if failed { 0 } else { all });
    }
    let (mut pruned, mut missed) = (0, 0);
    let mut count = |gone_by_oracle: bool, gone_by_decomp: bool| {
        if gone_by_oracle {
            pruned += 1;
            missed += u64::from(!gone_by_decomp);
        }
    };
    for &x in xs {
        let keep = oracle.int(x).expect("oracle covers X");
        for v in orig.dom(x).iter() {
            count(!keep.contains(v), failed || !after.dom(x).contains(v));
        }
    }
    for v in [s, t] {
        let (lb, ub) = oracle.set(v).expect("oracle covers the sets");
        for e in orig.ub(v).iter().filter(|&e| !orig.lb(v).contains(e)) {
            count(!ub.contains(e), failed || !after.ub(v).contains(e));
            count(lb.contains(e), failed || after.lb(v).contains(e));
        }
    }
    (pruned, missed)
}

/// Propagates the Roots decomposition on random instances and compares the
/// result with the exact filter.
pub fn roots_miss_rate(p: &MissRateParams, exec: Execution) -> Report {
    let mut cells = Vec::new();
    for &n in &p.ns {
        for &m in &p.ms {
            for k in 1..n.min(m) {
                for r in 1..=n * (m - 1) {
                    cells.push((n, m, k, r));
                }
            }
        }
    }
    let out_of_time = deadline(p.budget);
    let rows = exec.map(cells, |(n, m, k, r)| {
        if out_of_time() {
            return None;
        }
        let cell_seed = mix_seed(p.seed, &[n as u64, m as u64, k as u64, r as u64, p.free_t as u64]);
        let (mut inconsistent, mut pruned, mut missed) = (0u64, 0u64, 0u64);
        for i in 0..p.per_cell {
            let seed = mix_seed(cell_seed, &[i as u64]);
            let g = gen_roots_instance(&RootsInstanceSpec { n, m, k, r, seed, free_t: p.free_t })
                .expect("grid parameters are feasible");
            let orig = &g.instance.store;
            let oracle = roots_filter(orig, &g.xs, g.s, g.t, false);
            let mut model = Model::new(orig.clone());
            let failed = post_roots(&mut model, &g.xs, g.s, g.t, Mode::Hc).is_err() || model.fixpoint().is_err();
            let (pr, mi) = misses(orig, &g.xs, g.s, g.t, &oracle, &model.store, failed);
            inconsistent += u64::from(!oracle.consistent);
            pruned += pr;
            missed += mi;
        }
        Some(vec![
            n.to_string(),
            m.to_string(),
            k.to_string(),
            r.to_string(),
            cell_seed.to_string(),
            p.per_cell.to_string(),
            inconsistent.to_string(),
            pruned.to_string(),
            missed.to_string(),
        ])
    });
    let mut report = Report::new(&["n", "m", "k", "r", "seed", "instances", "inconsistent", "oracle_pruned", "missed"]);
    report.meta("experiment", if p.free_t { "roots-miss-rate-freeT" } else { "roots-miss-rate" });
    report.meta("base_seed", p.seed);
    report.meta("per_cell", p.per_cell);
    report.meta("k_range", "1..min(n,m)-1");
    for row in rows {
        match row {
            Some(r) => report.push(r),
            None => report.partial = true,
        }
    }
    report
}

#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct MissRateSummary {
    pub pruned: u64,
    pub missed: u64,
    /// Distinct `(n, m, k)` combinations.
    pub combos: usize,
    /// Combinations with no missed value at any `r`.
    pub perfect: usize,
}

impl MissRateSummary {
    pub fn rate(&self) -> f64 {
        if self.pruned == 0 {
            0.0
        } else {
            self.missed as f64 / self.pruned as f64
        }
    }
}

pub fn summarize_miss_rate(report: &Report) -> MissRateSummary {
    let col = |name: &str| report.column(name).expect("miss-rate column");
    let (n, m, k, pr, mi) = (col("n"), col("m"), col("k"), col("oracle_pruned"), col("missed"));
    let mut combos: BTreeMap<(String, String, String), u64> = BTreeMap::new();
    let mut sum = MissRateSummary::default();
    for row in &report.rows {
        let missed: u64 = row[mi].parse().unwrap_or(0);
        sum.pruned += row[pr].parse::<u64>().unwrap_or(0);
        sum.missed += missed;
        *combos.entry((row[n].clone(), row[m].clone(), row[k].clone())).or_default() += missed;
    }
    sum.combos = combos.len();
    sum.perfect = combos.values().filter(|&&v| v == 0).count();
    sum
}

// ------------------------------------------------------------- random CSPs

/// Random-CSP classes. A and B are the desk-scale pruning classes; C and D
/// are the solving classes, whose `t` is a parameter.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DeskClass {
    A,
    B,
    C,
    D,
}

impl DeskClass {
    pub fn spec(self, t: usize, seed: u64) -> CspSpec {
        let base = |nx, ny, nz, d, m1, t, m2, overlap| CspSpec { nx, ny, nz, d, m1, t, m2, overlap, seed };
        match self {
            DeskClass::A => base(5, 10, 18, 20, 35, 150, 3, true),
            DeskClass::B => base(3, 4, 22, 20, 45, 150, 3, false),
            DeskClass::C => base(5, 10, 25, 10, 40, t, 2, true),
            DeskClass::D => base(5, 10, 30, 10, 60, t, 2, false),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DeskClass::A => "A",
            DeskClass::B => "B",
            DeskClass::C => "C",
            DeskClass::D => "D",
        }
    }
}

impl std::str::FromStr for DeskClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" | "a" => Ok(DeskClass::A),
            "B" | "b" => Ok(DeskClass::B),
            "C" | "c" => Ok(DeskClass::C),
            "D" | "d" => Ok(DeskClass::D),
            _ => Err(format!("unknown class `{s}`")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct UsesPruningParams {
    pub class: DeskClass,
    pub instances: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub budget: Option<Duration>,
}

impl Default for UsesPruningParams {
    fn default() -> Self {
        Self {
            class: DeskClass::A,
            instances: 100,
            max_depth: 14,
            seed: 1,
            budget: None,
        }
    }
}

/// Fraction of the initial `nz·d` values gone after posting `specs` on
/// `st` and propagating; 1 on failure.
fn pruning_ratio(csp: &Csp, st: &Store, specs: &[ConstraintSpec]) -> f64 {
    let mut model = Model::new(st.clone());
    if post_all(&mut model, specs).is_err() || model.fixpoint().is_err() {
        return 1.0;
    }
    let d = csp.store.dom(csp.zs[0]).size();
    let total = (csp.zs.len() * d) as f64;
    let left: usize = csp.zs.iter().map(|&z| model.store.dom(z).size()).sum();
    (total - left as f64) / total
}

/// Random assignment walk under the binary constraints, measuring the Uses
/// models' pruning on the state reached after each assignment.
pub fn uses_pruning(p: &UsesPruningParams, exec: Execution) -> Report {
    let out_of_time = deadline(p.budget);
    let rows = exec.map_range(p.instances, |i| {
        if out_of_time() {
            return None;
        }
        let seed = mix_seed(p.seed, &[i as u64]);
        let csp = gen_model_b_csp(&p.class.spec(0, seed)).expect("desk classes are feasible");
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[1]));
        let mut walk = Model::new(csp.store.clone());
        let mut alive = post_all(&mut walk, &csp.binary_specs()).is_ok() && walk.fixpoint().is_ok();
        let (range, decomp) = (csp.uses_specs(UsesModel::Range), csp.uses_specs(UsesModel::Decomp));
        let mut rows = Vec::with_capacity(p.max_depth);
        for depth in 1..=p.max_depth {
            if alive {
                let st = &walk.store;
                match csp.zs.iter().copied().filter(|&z| !st.dom(z).is_fixed()).choose(&mut rng) {
                    Some(z) => {
                        let dom = st.dom(z).values().to_vec();
                        let v = dom[rng.gen_range(0..dom.len())];
                        alive = walk.store.assign(z, v).is_ok() && walk.fixpoint().is_ok();
                    }
                    None => alive = false,
                }
            }
            let (r, d) = if alive {
                (pruning_ratio(&csp, &walk.store, &range), pruning_ratio(&csp, &walk.store, &decomp))
            } else {
                (f64::NAN, f64::NAN)
            };
            rows.push(vec![
                p.class.name().to_string(),
                depth.to_string(),
                i.to_string(),
                seed.to_string(),
                (!alive as u8).to_string(),
                format!("{r:.6}"),
                format!("{d:.6}"),
            ]);
        }
        Some(rows)
    });
    let mut report = Report::new(&["class", "depth", "instance", "seed", "walk_failed", "range", "decomp"]);
    report.meta("experiment", "uses-pruning");
    report.meta("class", format!("{:?}", p.class.spec(0, 0)));
    report.meta("base_seed", p.seed);
    for r in rows {
        match r {
            Some(rs) => rs.into_iter().for_each(|row| report.push(row)),
            None => report.partial = true,
        }
    }
    report
}

/// `(depth, mean range ratio, mean decomp ratio, instances)` over the
/// walks that were still consistent at that depth.
pub fn mean_pruning_by_depth(report: &Report) -> Vec<(usize, f64, f64, usize)> {
    let col = |name: &str| report.column(name).expect("uses-pruning column");
    let (dc, fc, rc, pc) = (col("depth"), col("walk_failed"), col("range"), col("decomp"));
    let mut acc: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for row in report.rows.iter().filter(|r| r[fc] == "0") {
        let e = acc.entry(row[dc].parse().unwrap_or(0)).or_default();
        e.0 += row[rc].parse::<f64>().unwrap_or(f64::NAN);
        e.1 += row[pc].parse::<f64>().unwrap_or(f64::NAN);
        e.2 += 1;
    }
    acc.into_iter()
        .map(|(d, (r, p, c))| (d, r / c as f64, p / c as f64, c))
        .collect()
}

fn outcome(result: &SearchResult) -> &'static str {
    match result {
        SearchResult::Solution(_) => "solved",
        SearchResult::Unsat => "unsat",
        SearchResult::Cutoff => "cutoff",
    }
}

#[derive(Clone, Debug)]
pub struct UsesSolveParams {
    pub class: DeskClass,
    pub ts: Vec<usize>,
    pub instances: usize,
    pub limits: Limits,
    pub seed: u64,
    pub budget: Option<Duration>,
}

impl Default for UsesSolveParams {
    fn default() -> Self {
        Self {
            class: DeskClass::C,
            ts: (30..=80).step_by(10).collect(),
            instances: 100,
            limits: Limits {
                time: Some(Duration::from_secs(60)),
                fails: None,
            },
            seed: 1,
            budget: None,
        }
    }
}

/// Solves the random CSPs with each Uses model, smallest domain first.
pub fn uses_solve(p: &UsesSolveParams, exec: Execution) -> Report {
    let mut jobs = Vec::new();
    for &t in &p.ts {
        for i in 0..p.instances {
            for model in [UsesModel::Range, UsesModel::Decomp] {
                jobs.push((t, i, model));
            }
        }
    }
    let out_of_time = deadline(p.budget);
    let rows = exec.map(jobs, |(t, i, which)| {
        if out_of_time() {
            return None;
        }
        let seed = mix_seed(p.seed, &[t as u64, i as u64]);
        let csp = gen_model_b_csp(&p.class.spec(t, seed)).expect("desk classes are feasible");
        let mut inst = csp.instance(which);
        inst.order = csp.zs.clone();
        let mut model = inst.model().expect("generated instance posts");
        let (result, stats) = solve(&mut model, Strategy::Dom, p.limits);
        Some(vec![
            p.class.name().to_string(),
            t.to_string(),
            i.to_string(),
            seed.to_string(),
            which.name().to_string(),
            outcome(&result).to_string(),
            stats.fails.to_string(),
            stats.nodes.to_string(),
            stats.time.as_millis().to_string(),
        ])
    });
    let mut report = Report::new(&["class", "t", "instance", "seed", "model", "result", "fails", "nodes", "time_ms"]);
    report.meta("experiment", "uses-solve");
    report.meta("class", format!("{:?}", p.class.spec(0, 0)));
    report.meta("strategy", "dom");
    report.meta("base_seed", p.seed);
    for r in rows {
        match r {
            Some(row) => report.push(row),
            None => report.partial = true,
        }
    }
    report
}

// ----------------------------------------------------------------- mystery

#[derive(Clone, Debug)]
pub struct MysteryParams {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub variants: Vec<Variant>,
    pub balanced: bool,
    pub strategy: Strategy,
    pub limits: Limits,
    pub budget: Option<Duration>,
}

impl Default for MysteryParams {
    fn default() -> Self {
        Self {
            sizes: vec![10],
            seeds: (1..=10).collect(),
            variants: vec![Variant::ALLD_GCC_SUM, Variant::ALLD_ROOTS_ROOTS],
            balanced: false,
            strategy: Strategy::Lex,
            limits: Limits {
                time: Some(Duration::from_secs(60)),
                fails: None,
            },
            budget: None,
        }
    }
}

pub fn mystery(p: &MysteryParams, exec: Execution) -> Report {
    let mut jobs = Vec::new();
    for &s in &p.sizes {
        for &seed in &p.seeds {
            for &v in &p.variants {
                jobs.push((s, seed, v));
            }
        }
    }
    let out_of_time = deadline(p.budget);
    let rows = exec.map(jobs, |(s, seed, variant)| {
        if out_of_time() {
            return None;
        }
        let spec = MysterySpec {
            balanced: p.balanced,
            ..MysterySpec::new(s, seed)
        };
        let mm = build_mystery_model(&spec, variant);
        let mut model = mm.instance.model().expect("mystery model posts");
        let (result, stats) = solve(&mut model, p.strategy, p.limits);
        let valid = match &result {
            SearchResult::Solution(a) => match mm.validate(a) {
                Ok(()) => "yes".to_string(),
                Err(e) => format!("no: {e}"),
            },
            _ => "-".to_string(),
        };
        Some(vec![
            s.to_string(),
            seed.to_string(),
            variant.name(),
            format!("{:?}", p.strategy).to_lowercase(),
            outcome(&result).to_string(),
            stats.fails.to_string(),
            stats.nodes.to_string(),
            stats.time.as_millis().to_string(),
            valid,
        ])
    });
    let mut report = Report::new(&["s", "seed", "model", "strategy", "result", "fails", "nodes", "time_ms", "valid"]);
    report.meta("experiment", "mystery");
    report.meta("shoppers", "ceil((s+2)/4)*4");
    report.meta("areas", "one uniform partition per seed, sizes 1..3");
    report.meta("loads", if p.balanced { "floor(4s/P)..ceil(4s/P)" } else { "1..ceil(4s/P)" });
    for r in rows {
        match r {
            Some(row) => report.push(row),
            None => report.partial = true,
        }
    }
    report
}

// --------------------------------------------------------------- dispatch

fn get<T: std::str::FromStr>(params: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, ExpError> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| ExpError::Param(key.to_string(), format!("cannot parse `{v}`"))),
    }
}

/// `a..b`, `a,b,c` or a single value.
fn list<T: std::str::FromStr + Copy>(params: &BTreeMap<String, String>, key: &str, default: Vec<T>) -> Result<Vec<T>, ExpError>
where
    std::ops::RangeInclusive<T>: Iterator<Item = T>,
{
    let Some(v) = params.get(key) else {
        return Ok(default);
    };
    let bad = || ExpError::Param(key.to_string(), format!("cannot parse `{v}`"));
    if let Some((a, b)) = v.split_once("..") {
        let (a, b) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        return Ok((a..=b).collect());
    }
    v.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn limits(params: &BTreeMap<String, String>, default_time: f64) -> Result<Limits, ExpError> {
    let time: f64 = get(params, "time", default_time)?;
    let fails: u64 = get(params, "fails", 0)?;
    Ok(Limits {
        time: (time > 0.0).then(|| Duration::from_secs_f64(time)),
        fails: (fails > 0).then_some(fails),
    })
}

/// Runs an experiment by name with `key=value` parameters.
///
/// Common keys: `seed`, `budget` (seconds for the whole run). Per
/// experiment: `n`, `m`, `per_cell` (miss rate); `class`, `instances`,
/// `depth` (uses-pruning); `class`, `t`, `instances`, `time`, `fails`
/// (uses-solve); `s`, `seeds`, `models`, `balanced`, `strategy`, `time`,
/// `fails` (mystery).
pub fn run_experiment(name: &str, params: &BTreeMap<String, String>, exec: Execution) -> Result<Report, ExpError> {
    let budget: f64 = get(params, "budget", 0.0)?;
    let budget = (budget > 0.0).then(|| Duration::from_secs_f64(budget));
    let seed: u64 = get(params, "seed", 1)?;
    let class = |d: DeskClass| get(params, "class", d);
    match name {
        "roots-miss-rate" | "roots-miss-rate-freeT" => {
            let d = MissRateParams::default();
            let p = MissRateParams {
                ns: list(params, "n", d.ns)?,
                ms: list(params, "m", d.ms)?,
                per_cell: get(params, "per_cell", d.per_cell)?,
                free_t: name.ends_with("freeT"),
                seed,
                budget,
            };
            Ok(roots_miss_rate(&p, exec))
        }
        "uses-pruning" => {
            let d = UsesPruningParams::default();
            let p = UsesPruningParams {
                class: class(d.class)?,
                instances: get(params, "instances", d.instances)?,
                max_depth: get(params, "depth", d.max_depth)?,
                seed,
                budget,
            };
            Ok(uses_pruning(&p, exec))
        }
        "uses-solve" => {
            let d = UsesSolveParams::default();
            let p = UsesSolveParams {
                class: class(d.class)?,
                ts: list(params, "t", d.ts)?,
                instances: get(params, "instances", d.instances)?,
                limits: limits(params, 60.0)?,
                seed,
                budget,
            };
            Ok(uses_solve(&p, exec))
        }
        "mystery" => {
            let d = MysteryParams::default();
            let variants = match params.get("models") {
                None => d.variants,
                Some(v) => v
                    .split(',')
                    .map(|m| Variant::parse(m.trim()).ok_or_else(|| ExpError::Param("models".into(), format!("unknown model `{m}`"))))
                    .collect::<Result<_, _>>()?,
            };
            let count: u64 = get(params, "seeds", 10)?;
            let p = MysteryParams {
                sizes: list(params, "s", d.sizes)?,
                seeds: (seed..seed + count).collect(),
                variants,
                balanced: get::<u8>(params, "balanced", 0)? != 0,
                strategy: get(params, "strategy", d.strategy)?,
                limits: limits(params, 60.0)?,
                budget,
            };
            Ok(mystery(&p, exec))
        }
        other => Err(ExpError::Unknown(other.to_string())),
    }
}

/// Mean of column `name` over the rows where `filter` holds.
pub fn column_mean(report: &Report, name: &str, filter: impl Fn(&[String]) -> bool) -> Option<f64> {
    let c = report.column(name)?;
    let vals: Vec<f64> = report
        .rows
        .iter()
        .filter(|r| filter(r))
        .filter_map(|r| r[c].parse::<f64>().ok())
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}
