//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a property violation is found (a
//! counterexample, a pumping witness, a failed verification), 2 on usage
//! or validation errors.

use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use polyblind::decide::{
    self, check_permutable, count_architecture, count_architecture_recursive, count_split, decompose,
    falsify_repetitive, falsify_repetitive_random, Architecture, PermutabilityOptions, PermutabilityVerdict,
    PumpWitness,
};
use polyblind::forest::{build_forest, Forest};
use polyblind::machines::{prod_positions, MachineDoc, PositionMultiset};
use polyblind::series::{blind_to_series, eval_series, series_to_blind, SeriesDoc, SeriesExpr, SeriesOp};
use polyblind::workspace::{Workspace, WorkspaceDoc};
use polyblind::{Morphism, NestedMachine};

#[derive(Parser)]
#[command(
    name = "polyblind",
    version,
    about = "Nested bimachines, factorization forests and the polyblind decision toolkit"
)]
struct Cli {
    /// Workspace file whose named morphisms, machines, series and probes
    /// can be referenced by name.
    #[arg(long, global = true)]
    workspace: Option<String>,
    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel enumerations (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a machine on a word. MACHINE is a workspace name, a catalog
    /// name (nb_a, nb_ab, nb_ab_blind, nb_ab_pebble, itpow2), FILE#NAME or a
    /// machine file.
    Eval { machine: String, word: String },
    /// Evaluate a series expression on a word.
    SeriesEval { series: String, word: String },
    /// Factorization forests.
    #[command(subcommand)]
    Forest(ForestCommand),
    /// Production of a marble machine on 1-based positions.
    Prod { machine: String, word: String, positions: Vec<usize> },
    /// Conversions between blind machines and series expressions.
    #[command(subcommand)]
    Convert(ConvertCommand),
    /// Decision procedures.
    #[command(subcommand)]
    Decide(DecideCommand),
}

#[derive(Subcommand)]
enum ForestCommand {
    /// Build a forest of minimal height. MORPHISM is a workspace name,
    /// signs, block, FILE#NAME or a morphism file.
    Build { morphism: String, word: String },
    /// Validate a bracketed forest (text or file).
    Check { morphism: String, forest: String },
    /// Graphviz rendering of a bracketed forest or of the forest built from
    /// a word.
    Dot { morphism: String, input: String },
}

#[derive(Subcommand)]
enum ConvertCommand {
    /// Write a workspace whose series `main` equals the blind machine.
    BlindToSeries { machine: String },
    /// Write a blind machine equal to a sum/Hadamard series.
    SeriesToBlind { series: String },
}

#[derive(Args)]
struct PermutabilityArgs {
    /// Maximal length K of iterated words.
    #[arg(long = "k-max-word", default_value_t = 2)]
    k_max_word: usize,
    /// Maximal number of (instance, permutation) pairs.
    #[arg(long, env = "POLYBLIND_BUDGET", default_value_t = 5_000_000)]
    budget: u128,
}

impl PermutabilityArgs {
    fn options(&self) -> PermutabilityOptions {
        PermutabilityOptions { bound: self.k_max_word, budget: self.budget }
    }
}

#[derive(Subcommand)]
enum DecideCommand {
    /// Exhaustive K-permutability check. Soundness of the full decision
    /// needs K = 2^(3|M|); small K only falsifies.
    Permutable {
        machine: String,
        #[command(flatten)]
        perm: PermutabilityArgs,
    },
    /// Search for a pumping witness against k-repetitiveness.
    Pump {
        machine: String,
        /// Number of pumped factors.
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        omega: usize,
        /// Probe file or workspace probe name; random probes otherwise.
        #[arg(long)]
        probe: Option<String>,
        /// Sample values of each Xᵢ for random probes.
        #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5])]
        xs: Vec<usize>,
        /// Sample values of each Yᵢ for random probes.
        #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5])]
        ys: Vec<usize>,
        /// Number of random probes.
        #[arg(long, default_value_t = 200)]
        attempts: usize,
        /// Maximal length of random probe words.
        #[arg(long, default_value_t = 3)]
        max_len: usize,
    },
    /// f = f′ + f″ at one word, after a permutability check.
    Decompose {
        machine: String,
        word: String,
        /// Also check the sum identities and the count splits.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        perm: PermutabilityArgs,
    },
    /// Counts of an architecture (JSON file) in a bracketed forest, or of
    /// every architecture of rank --k when no file is given.
    Counts {
        forest: String,
        arch: Option<String>,
        #[arg(long)]
        morphism: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
}

fn text_or_file(arg: &str) -> Result<String> {
    if Path::new(arg).is_file() {
        Ok(std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?.trim().to_string())
    } else {
        Ok(arg.to_string())
    }
}

fn parse_word(mu: &Morphism, w: &str) -> Result<Vec<usize>> {
    mu.parse_word(w).map_err(|e| anyhow!("{e}"))
}

fn print(json_mode: bool, value: serde_json::Value, text: impl FnOnce() -> String) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&value).expect("reports serialize"));
    } else {
        println!("{}", text());
    }
}

struct Ctx {
    ws: Workspace,
    json: bool,
    seed: u64,
}

impl Ctx {
    fn machine(&self, spec: &str) -> Result<NestedMachine> {
        Ok(self.ws.machine(spec)?)
    }

    fn morphism(&self, spec: &str) -> Result<Arc<Morphism>> {
        Ok(self.ws.morphism(spec)?)
    }

    fn forest(&self, mu: Arc<Morphism>, arg: &str) -> Result<Forest> {
        Ok(Forest::parse_unchecked(mu, &text_or_file(arg)?)?)
    }
}

fn series_workspace(e: &SeriesExpr) -> WorkspaceDoc {
    fn go(e: &SeriesExpr, doc: &mut WorkspaceDoc) -> SeriesDoc {
        let op = |op, args| SeriesDoc::Op { op, args };
        match e {
            SeriesExpr::Reg(m) => {
                let name = format!("leaf{}", doc.machines.len());
                doc.machines.insert(name.clone(), MachineDoc::from_machine(m));
                SeriesDoc::Machine { machine: name }
            }
            SeriesExpr::Sum(l, r) => op(SeriesOp::Sum, vec![go(l, doc), go(r, doc)]),
            SeriesExpr::Cauchy(l, r) => op(SeriesOp::Cauchy, vec![go(l, doc), go(r, doc)]),
            SeriesExpr::Hadamard(l, r) => op(SeriesOp::Hadamard, vec![go(l, doc), go(r, doc)]),
            SeriesExpr::Star(f) => op(SeriesOp::Star, vec![go(f, doc)]),
        }
    }
    let mut doc = WorkspaceDoc::default();
    let main = go(e, &mut doc);
    doc.series.insert("main".into(), main);
    doc
}

fn witness_json(mu: &Morphism, w: &PumpWitness) -> serde_json::Value {
    let sample = |s: &decide::PumpSample| json!({"xs": s.xs, "ys": s.ys, "word": mu.format_word(&s.word), "value": s.value.to_string()});
    let words = |ws: &[Vec<usize>]| ws.iter().map(|u| mu.format_word(u)).collect::<Vec<_>>();
    json!({
        "witness": true,
        "probe": {
            "alpha": mu.format_word(&w.probe.alpha),
            "alphas": words(&w.probe.alphas),
            "us": words(&w.probe.us),
            "beta": mu.format_word(&w.probe.beta),
            "omega": w.probe.omega,
        },
        "first": sample(&w.first),
        "second": sample(&w.second),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().context("configuring worker threads")?;
    }
    let ws = match &cli.workspace {
        Some(path) => Workspace::load(path)?,
        None => Workspace::default(),
    };
    let ctx = Ctx { ws, json: cli.json, seed: cli.seed };
    match cli.command {
        Command::Eval { machine, word } => {
            let m = ctx.machine(&machine)?;
            let v = m.eval(&parse_word(m.morphism(), &word)?)?;
            print(ctx.json, json!({"value": v.to_string()}), || v.to_string());
        }
        Command::SeriesEval { series, word } => {
            let e = ctx.ws.series(&series)?;
            let mu = e.leaves()[0].morphism().clone();
            let v = eval_series(&e, &parse_word(&mu, &word)?)?;
            print(ctx.json, json!({"value": v.to_string()}), || v.to_string());
        }
        Command::Prod { machine, word, positions } => {
            let m = ctx.machine(&machine)?;
            let w = parse_word(m.morphism(), &word)?;
            let v = prod_positions(&m, &w, &PositionMultiset::from_positions(&positions))?;
            print(ctx.json, json!({"value": v.to_string()}), || v.to_string());
        }
        Command::Forest(cmd) => return forest_command(&ctx, cmd),
        Command::Convert(ConvertCommand::BlindToSeries { machine }) => {
            let e = blind_to_series(&ctx.machine(&machine)?)?;
            println!("{}", serde_json::to_string_pretty(&series_workspace(&e))?);
        }
        Command::Convert(ConvertCommand::SeriesToBlind { series }) => {
            let m = series_to_blind(&ctx.ws.series(&series)?)?;
            println!("{}", serde_json::to_string_pretty(&MachineDoc::from_machine(&m))?);
        }
        Command::Decide(cmd) => return decide_command(&ctx, cmd),
    }
    Ok(ExitCode::SUCCESS)
}

fn forest_command(ctx: &Ctx, cmd: ForestCommand) -> Result<ExitCode> {
    match cmd {
        ForestCommand::Build { morphism, word } => {
            let mu = ctx.morphism(&morphism)?;
            let f = build_forest(mu.clone(), &parse_word(&mu, &word)?);
            let bound = 3 * mu.monoid().len();
            print(ctx.json, json!({"forest": f.to_brackets(), "height": f.height(), "bound": bound}), || {
                format!("{}\nheight {} (bound {bound})", f.to_brackets(), f.height())
            });
        }
        ForestCommand::Check { morphism, forest } => {
            let mu = ctx.morphism(&morphism)?;
            let f = ctx.forest(mu.clone(), &forest)?;
            let verdict = f.validate().and_then(|_| f.partition_check().map(|_| ()));
            let bound = 3 * mu.monoid().len();
            let ok = verdict.is_ok() && f.height() <= bound;
            let reason = match &verdict {
                Err(e) => e.to_string(),
                Ok(()) if !ok => format!("height {} exceeds {bound}", f.height()),
                Ok(()) => String::new(),
            };
            print(ctx.json, json!({"valid": ok, "height": f.height(), "bound": bound, "reason": reason}), || {
                if ok {
                    format!("valid, height {}", f.height())
                } else {
                    format!("invalid: {reason}")
                }
            });
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        ForestCommand::Dot { morphism, input } => {
            let mu = ctx.morphism(&morphism)?;
            let text = text_or_file(&input)?;
            let f = match parse_word(&mu, &text) {
                Ok(w) => build_forest(mu, &w),
                Err(_) => Forest::parse_unchecked(mu, &text)?,
            };
            print!("{}", f.to_dot());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn decide_command(ctx: &Ctx, cmd: DecideCommand) -> Result<ExitCode> {
    match cmd {
        DecideCommand::Permutable { machine, perm } => {
            let m = ctx.machine(&machine)?;
            match check_permutable(&m, perm.options())? {
                PermutabilityVerdict::Permutable(_) => {
                    print(ctx.json, json!({"permutable": true, "k_max_word": perm.k_max_word}), || {
                        format!("ok: {}-permutable (K = {})", m.level(), perm.k_max_word)
                    });
                    Ok(ExitCode::SUCCESS)
                }
                PermutabilityVerdict::Counterexample(c) => {
                    let report = json!({"permutable": false, "counterexample": c.to_json(m.morphism())});
                    print(ctx.json, report.clone(), || {
                        format!(
                            "counterexample:\n  {} = {}\n  {} = {}\n{}",
                            c.lhs_context.display(m.morphism()),
                            c.lhs,
                            c.rhs_context.display(m.morphism()),
                            c.rhs,
                            serde_json::to_string_pretty(&report).unwrap()
                        )
                    });
                    Ok(ExitCode::from(1))
                }
            }
        }
        DecideCommand::Pump { machine, k, omega, probe, xs, ys, attempts, max_len } => {
            let m = ctx.machine(&machine)?;
            let mu = m.morphism().clone();
            let witness = match probe {
                Some(spec) => {
                    let doc = match ctx.ws.probes.get(&spec) {
                        Some(d) => d.clone(),
                        None => serde_json::from_str(&text_or_file(&spec)?).context("reading the probe")?,
                    };
                    let p = doc.build(&mu)?;
                    if p.k() != k {
                        bail!("the probe pumps {} factors, not {k}", p.k());
                    }
                    p.check_omega(&mu)?;
                    falsify_repetitive(&m, &p)?
                }
                None => {
                    let omega_index = mu.monoid().idempotence_index().omega;
                    if omega % omega_index != 0 {
                        bail!("ω = {omega} is not a multiple of the idempotence index {omega_index}");
                    }
                    falsify_repetitive_random(&m, k, omega, &xs, &ys, max_len, attempts, ctx.seed)?
                }
            };
            match witness {
                Some(w) => {
                    let report = witness_json(&mu, &w);
                    print(ctx.json, report, || {
                        format!(
                            "witness: X={:?} Y={:?} gives {}, X={:?} Y={:?} gives {}",
                            w.first.xs, w.first.ys, w.first.value, w.second.xs, w.second.ys, w.second.value
                        )
                    });
                    Ok(ExitCode::from(1))
                }
                None => {
                    print(ctx.json, json!({"witness": false}), || "no witness within the budget".into());
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        DecideCommand::Decompose { machine, word, verify, perm } => {
            let m = ctx.machine(&machine)?;
            let w = parse_word(m.morphism(), &word)?;
            let pm = match check_permutable(&m, perm.options())? {
                PermutabilityVerdict::Permutable(pm) => pm,
                PermutabilityVerdict::Counterexample(c) => {
                    let err = decide::DecideError::NotPermutable(c.to_json(m.morphism()).to_string());
                    eprintln!("error: {err}");
                    return Ok(ExitCode::from(1));
                }
            };
            let d = decompose(&pm, &w)?;
            let mut ok = d.holds();
            let mut checks = json!({});
            if verify {
                let ind = d.split.sum;
                let sums = d.sum_dependent + ind == d.value;
                let split = d.split.prime + d.split.second == ind;
                let counts = d.split.groups.iter().all(|(_, _, c)| c.holds());
                checks =
                    json!({"dependent_plus_independent": sums, "split_of_independent": split, "count_splits": counts});
                ok &= sums && split && counts;
            }
            let report = json!({
                "forest": d.forest.to_brackets(),
                "f": d.value.to_string(),
                "f_prime": d.prime.to_string(),
                "f_second": d.second.to_string(),
                "sum_dependent": d.sum_dependent.to_string(),
                "sum_independent": d.split.sum.to_string(),
                "architectures": d.split.groups.len(),
                "holds": ok,
                "checks": checks,
            });
            print(ctx.json, report, || {
                format!(
                    "f = {}, f′ = {}, f″ = {}{}",
                    d.value,
                    d.prime,
                    d.second,
                    if ok { "" } else { " (verification failed)" }
                )
            });
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        DecideCommand::Counts { forest, arch, morphism, k } => {
            let mu = ctx.morphism(&morphism)?;
            let f = ctx.forest(mu, &forest)?;
            f.validate()?;
            let archs: Vec<Architecture> = match arch {
                Some(a) => vec![serde_json::from_str(&text_or_file(&a)?).context("reading the architecture")?],
                None => {
                    let mut all: Vec<Architecture> = decide::enumerate_independent(&f, k)
                        .iter()
                        .map(|t| decide::architecture_of(&f, t))
                        .collect::<Result<_, _>>()?;
                    all.sort();
                    all.dedup();
                    all
                }
            };
            let mut ok = true;
            let mut rows = Vec::new();
            for a in &archs {
                let s = count_split(&f, a);
                let rec = count_architecture_recursive(&f, a);
                let row_ok = s.holds() && rec == s.count && count_architecture(&f, a) == s.count;
                ok &= row_ok;
                rows.push(json!({
                    "architecture": a,
                    "count": s.count.to_string(),
                    "count_recursive": rec.to_string(),
                    "count_prime": s.prime.to_string(),
                    "count_second": s.second.to_string(),
                    "consistent": row_ok,
                }));
            }
            let text_rows = rows.clone();
            print(ctx.json, json!({"counts": rows}), || {
                text_rows
                    .iter()
                    .map(|r| {
                        format!(
                            "{}  count {} = {} + {}{}",
                            r["architecture"],
                            r["count"].as_str().unwrap(),
                            r["count_prime"].as_str().unwrap(),
                            r["count_second"].as_str().unwrap(),
                            if r["consistent"].as_bool().unwrap() { "" } else { "  INCONSISTENT" }
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
