use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rangeroots::harness::experiments::{run_experiment, DeskClass};
use rangeroots::harness::gen::{gen_model_b_csp, gen_roots_instance, RootsInstanceSpec, UsesModel};
use rangeroots::harness::mystery::{build_mystery_model, MysterySpec, Variant};
use rangeroots::harness::{parse_instance, Instance};
use rangeroots::oracle::{filter_hc, Assignment};
use rangeroots::par::Execution;
use rangeroots::search::{solve, Limits, SearchResult, Strategy};
use rangeroots::Store;

const EXIT_UNSAT: u8 = 1;
const EXIT_CUTOFF: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "rangeroots", version, about = "Range/Roots constraint propagation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search for one solution of an instance file.
    Solve {
        file: PathBuf,
        /// dom, lex or set.
        #[arg(long, default_value = "dom")]
        strategy: Strategy,
        /// Time limit in seconds.
        #[arg(long)]
        time: Option<f64>,
        /// Fail limit.
        #[arg(long)]
        fails: Option<u64>,
    },
    /// Propagate an instance and compare the fixpoint with the exact filter.
    Check { file: PathBuf },
    /// Write a random instance to stdout.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Run an experiment and write its TSV report.
    Exp {
        /// roots-miss-rate, roots-miss-rate-freeT, uses-pruning, uses-solve or mystery.
        name: String,
        /// Parameters as key=value, e.g. per_cell=1000 class=B.
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Run instances on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Random Roots instance ⟨n, m, k, r⟩.
    Roots {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        /// Leave T undecided.
        #[arg(long)]
        free_t: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Model-B random binary CSP with Uses constraints.
    Modelb(ModelbArgs),
    /// Mystery Shopper instance.
    Mystery {
        #[arg(long, default_value_t = 10)]
        s: usize,
        /// alld-gcc-sum, alld-gcc-roots, alld-roots-sum, range-gcc-sum or alld-roots-roots.
        #[arg(long, default_value = "alld-gcc-sum")]
        model: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct ModelbArgs {
    /// A, B, C or D.
    #[arg(long, default_value = "C")]
    class: DeskClass,
    /// Forbidden tuples per binary constraint (classes C and D).
    #[arg(long, default_value_t = 50)]
    t: usize,
    /// range, roots or decomp.
    #[arg(long, default_value = "range")]
    uses: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn load(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn print_assignment(st: &Store, a: &Assignment) {
    for x in st.int_vars() {
        println!("{} = {}", st.int_name(x), a.int(x));
    }
    for s in st.set_vars() {
        println!("{} = {}", st.set_name(s), a.set(s));
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Solve { file, strategy, time, fails } => {
            let inst = load(&file)?;
            let mut model = inst.model()?;
            let limits = Limits {
                time: time.map(Duration::from_secs_f64),
                fails,
            };
            let (result, stats) = solve(&mut model, strategy, limits);
            let code = match &result {
                SearchResult::Solution(a) => {
                    println!("solved");
                    print_assignment(&inst.store, a);
                    0
                }
                SearchResult::Unsat => {
                    println!("unsat");
                    EXIT_UNSAT
                }
                SearchResult::Cutoff => {
                    println!("cutoff");
                    EXIT_CUTOFF
                }
            };
            eprintln!("nodes {} fails {} time {:.3}s", stats.nodes, stats.fails, stats.time.as_secs_f64());
            Ok(code)
        }
        Cmd::Check { file } => {
            let inst = load(&file)?;
            let oracle = filter_hc(&inst.specs, &inst.store)?;
            let mut model = inst.model()?;
            let failed = model.fixpoint().is_err();
            match oracle.compare(&model.store, failed) {
                Ok(()) => println!("fixpoint matches the exact filter"),
                Err(diff) => println!("fixpoint is weaker than the exact filter: {diff}"),
            }
            if oracle.consistent {
                println!("consistent");
                Ok(0)
            } else {
                println!("inconsistent");
                Ok(EXIT_UNSAT)
            }
        }
        Cmd::Gen { kind } => {
            let inst = match kind {
                GenKind::Roots { n, m, k, r, free_t, seed } => {
                    gen_roots_instance(&RootsInstanceSpec { n, m, k, r, seed, free_t })?.instance
                }
                GenKind::Modelb(a) => {
                    let which = match a.uses.as_str() {
                        "range" => UsesModel::Range,
                        "roots" => UsesModel::Roots,
                        "decomp" => UsesModel::Decomp,
                        other => bail!("unknown Uses model `{other}`"),
                    };
                    gen_model_b_csp(&a.class.spec(a.t, a.seed))?.instance(which)
                }
                GenKind::Mystery { s, model, seed } => {
                    let v = Variant::parse(&model).ok_or_else(|| anyhow!("unknown model `{model}`"))?;
                    build_mystery_model(&MysterySpec::new(s, seed), v).instance
                }
            };
            print!("{}", inst.to_text());
            Ok(0)
        }
        Cmd::Exp { name, params, out, sequential } => {
            let mut kv = BTreeMap::new();
            for p in params {
                let (k, v) = p.split_once('=').ok_or_else(|| anyhow!("parameter `{p}` is not key=value"))?;
                kv.insert(k.to_string(), v.to_string());
            }
            let exec = if sequential { Execution::Sequential } else { Execution::available() };
            let report = run_experiment(&name, &kv, exec)?;
            report.write(&out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("{} rows written to {}{}", report.rows.len(), out.display(), if report.partial { " (partial)" } else { "" });
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
