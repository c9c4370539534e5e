use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use wlrw_core::analysis::{classify_predicates, dependency_graph, export_dot, is_linear, is_wl, ProgramCheck};
use wlrw_core::engine::{Engine, EvalResult};
use wlrw_core::model::idb_expansion;
use wlrw_core::oracle::{find_derivation, Oracle};
use wlrw_core::rlor::{compile, parse_ontology};
use wlrw_core::text::{parse_dataset_in, parse_ground_disjunction, parse_program_in, print_atom, print_program};
use wlrw_core::transform::{prune_for_goals, psi, rewrite, xi, xi_prime, RewriteConfig, RewriteOutput, RewriteTrace};
use wlrw_core::{Dataset, Predicate, Program, Renaming};
use wlrw_harness::{check_rewriting, random_program, Filter, GenConfig, Strategy};

#[derive(Parser)]
#[command(name = "wlrw", version, about = "Rewrite disjunctive datalog programs into datalog and check the results")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the main output to this file instead of stdout.
    #[arg(short = 'o', long = "output", global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check programs (.dl), datasets (.facts) or ontologies (.rlor).
    Validate { files: Vec<PathBuf> },
    /// Report the linear / weakly-linear tests and the predicate classes.
    Classify {
        program: PathBuf,
        /// Emit the dependency graph in Graphviz format instead.
        #[arg(long)]
        dot: bool,
    },
    /// Rewrite a program into datalog (or, for psi, into linear disjunctive datalog).
    Rewrite {
        program: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[command(flatten)]
        rw: RewriteFlags,
    },
    /// Rewrite with xi-prime (or the procedure, for non-WL input) and keep only what the goals need.
    Prune {
        program: PathBuf,
        #[command(flatten)]
        rw: RewriteFlags,
    },
    /// Compute every fact entailed by a program and a dataset.
    Eval {
        program: PathBuf,
        dataset: PathBuf,
        #[command(flatten)]
        how: Evaluator,
        /// Also print the top facts.
        #[arg(long)]
        all: bool,
    },
    /// Decide whether a ground disjunction such as "b(a) | g(a)" is entailed.
    Entail {
        program: PathBuf,
        dataset: PathBuf,
        query: String,
        #[command(flatten)]
        how: Evaluator,
    },
    /// Search for a hyperresolution derivation of a ground disjunction.
    Derive {
        program: PathBuf,
        dataset: PathBuf,
        query: String,
        /// Print the derivation in Graphviz format.
        #[arg(long)]
        dot: bool,
    },
    /// Translate a normalised RL ontology with disjunction into a program.
    RlorCompile { ontology: PathBuf },
    /// Test whether one program is a rewriting of another on bounded datasets.
    CheckEquiv {
        program: PathBuf,
        rewritten: PathBuf,
        /// Compare these predicates (default: all of the first program's).
        #[arg(long, value_delimiter = ',')]
        goal: Vec<String>,
        /// Predicate renaming: identity, or the IDB expansion of the first program (as used by psi).
        #[arg(long, value_enum, default_value_t = Theta::Identity)]
        theta: Theta,
        /// Enumerate every dataset within the bounds (default).
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        /// Draw this many random datasets instead.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 3)]
        max_constants: usize,
        #[arg(long, default_value_t = 6)]
        max_facts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include the elapsed time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Generate a random program.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = GenFilter::Any)]
        filter: GenFilter,
        #[arg(long, default_value_t = 4)]
        predicates: usize,
        #[arg(long, default_value_t = 2)]
        max_arity: usize,
        #[arg(long, default_value_t = 6)]
        rules: usize,
        #[arg(long, default_value_t = 3)]
        max_body: usize,
        #[arg(long, default_value_t = 0.3)]
        disjunctive_prob: f64,
        #[arg(long, default_value_t = 0.1)]
        bot_prob: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Xi,
    XiPrime,
    Psi,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum Theta {
    Identity,
    Expansion,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFilter {
    Any,
    Datalog,
    Linear,
    Wl,
}

#[derive(Args)]
struct RewriteFlags {
    /// Keep only the rules needed for these predicates.
    #[arg(long, value_delimiter = ',')]
    goal: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    max_unfold_steps: usize,
    /// Report the unfolding steps on stderr.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
#[group(multiple = false)]
struct Evaluator {
    /// Use the semi-naive datalog engine.
    #[arg(long)]
    engine: bool,
    /// Use the ground disjunctive oracle.
    #[arg(long)]
    oracle: bool,
}

enum Failure {
    Usage(String),
    Semantic(String),
}

type Outcome = Result<(), Failure>;

fn semantic(e: impl ToString) -> Failure {
    Failure::Semantic(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    let name = path.display().to_string();
    parse_program_in(&read(path)?, Some(&name)).map_err(semantic)
}

fn load_dataset(path: &Path) -> Result<Dataset, Failure> {
    let name = path.display().to_string();
    parse_dataset_in(&read(path)?, Some(&name)).map_err(semantic)
}

fn names(s: &BTreeSet<Predicate>) -> Vec<String> {
    s.iter().map(|q| q.name.to_string()).collect()
}

fn resolve_goals(p: &Program, goals: &[String]) -> Result<BTreeSet<Predicate>, Failure> {
    let preds = p.predicates();
    goals
        .iter()
        .map(|g| {
            preds
                .iter()
                .find(|q| q.name.to_string() == *g)
                .cloned()
                .ok_or_else(|| Failure::Semantic(format!("unknown goal predicate {g}")))
        })
        .collect()
}

struct Out {
    json: bool,
    file: Option<PathBuf>,
}

impl Out {
    fn emit(&self, text: impl FnOnce() -> String, value: impl FnOnce() -> Value) -> Outcome {
        let s = if self.json {
            let mut s = serde_json::to_string_pretty(&value()).expect("serialisable");
            s.push('\n');
            s
        } else {
            text()
        };
        match &self.file {
            Some(f) => fs::write(f, s).map_err(|e| Failure::Usage(format!("{}: {e}", f.display()))),
            None => {
                print!("{s}");
                Ok(())
            }
        }
    }
}

fn check_json(c: &ProgramCheck) -> Value {
    json!(c
        .offenders
        .iter()
        .map(|(r, atoms)| json!({"rule": r, "atoms": atoms}))
        .collect::<Vec<_>>())
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn classify(out: &Out, path: &Path, dot: bool) -> Outcome {
    let p = load_program(path)?;
    let c = classify_predicates(&p);
    if dot {
        let g = dependency_graph(&p);
        return out.emit(|| export_dot(&g, &c), || json!({"dot": export_dot(&g, &c)}));
    }
    let (lin, wl) = (is_linear(&p), is_wl(&p));
    let user = |s: BTreeSet<Predicate>| -> BTreeSet<Predicate> { s.into_iter().filter(|q| !q.is_builtin()).collect() };
    let (disj, dl) = (user(c.disjunctive()), user(c.datalog()));
    out.emit(
        || {
            let mut s = format!(
                "WL: {}; linear: {}; disjunctive: {{{}}}; datalog: {{{}}}\n",
                yes(wl.holds),
                yes(lin.holds),
                names(&disj).join(","),
                names(&dl).join(",")
            );
            for (r, atoms) in &wl.offenders {
                let atoms: Vec<String> = atoms.iter().map(print_atom).collect();
                s.push_str(&format!("not WL: rule {r} has disjunctive body atoms {}\n", atoms.join(", ")));
            }
            s
        },
        || {
            json!({
                "wl": wl.holds,
                "linear": lin.holds,
                "disjunctive": names(&disj),
                "datalog": names(&dl),
                "wl_offenders": check_json(&wl),
                "linear_offenders": check_json(&lin),
            })
        },
    )
}

struct Rewritten {
    program: Program,
    theta: Renaming,
    trace: Option<RewriteTrace>,
}

fn print_trace(t: &RewriteTrace) {
    for (i, s) in t.steps.iter().enumerate() {
        eprintln!(
            "step {}: unfold rule {} on {} -> {} rules ({} in program)",
            i + 1,
            s.rule,
            s.atom,
            s.produced.len(),
            s.program_size
        );
    }
    eprintln!("outcome: {:?}, {} unfolding step(s)", t.outcome, t.steps.len());
}

fn pruned(out: &RewriteOutput, p: &Program, goals: &[String]) -> Result<Program, Failure> {
    if goals.is_empty() {
        return Ok(out.program.clone());
    }
    let g = resolve_goals(p, goals)?;
    prune_for_goals(out, &g).map_err(semantic)
}

fn run_rewrite(p: &Program, mode: Mode, rw: &RewriteFlags) -> Result<Rewritten, Failure> {
    match mode {
        Mode::Xi | Mode::XiPrime => {
            let out = if matches!(mode, Mode::Xi) { xi(p) } else { xi_prime(p) }.map_err(semantic)?;
            Ok(Rewritten {
                program: pruned(&out, p, &rw.goal)?,
                theta: Renaming::identity(),
                trace: None,
            })
        }
        Mode::Psi => {
            let (out, theta) = psi(p).map_err(semantic)?;
            let goals: Vec<String> = resolve_goals(p, &rw.goal)?
                .iter()
                .map(|q| theta.apply(q).name.to_string())
                .collect();
            Ok(Rewritten {
                program: pruned(&out, &out.program, &goals)?,
                theta,
                trace: None,
            })
        }
        Mode::Auto => {
            let cfg = RewriteConfig {
                max_steps: rw.max_unfold_steps,
                ..RewriteConfig::default()
            };
            let res = rewrite(p, &cfg);
            if rw.trace {
                print_trace(&res.trace);
            }
            let Some(out) = res.output.as_ref() else {
                return Err(Failure::Semantic(format!(
                    "rewrite gave up after {} unfolding step(s): {:?}",
                    res.trace.steps.len(),
                    res.trace.outcome
                )));
            };
            Ok(Rewritten {
                program: pruned(out, p, &rw.goal)?,
                theta: res.theta.clone(),
                trace: Some(res.trace),
            })
        }
    }
}

fn emit_rewrite(out: &Out, r: &Rewritten) -> Outcome {
    out.emit(
        || print_program(&r.program),
        || {
            json!({
                "program": print_program(&r.program),
                "rules": r.program.len(),
                "datalog": r.program.is_datalog(),
                "theta": r.theta.pairs().map(|(a, b)| [a.to_string(), b.to_string()]).collect::<Vec<_>>(),
                "trace": r.trace,
            })
        },
    )
}

#[derive(Serialize)]
struct EvalJson<'a> {
    status: &'a wlrw_core::engine::Status,
    facts: Vec<String>,
}

fn evaluate(p: &Program, d: &Dataset, how: &Evaluator) -> Result<EvalResult, Failure> {
    if how.engine || (!how.oracle && p.is_datalog()) {
        Ok(Engine::new(p).map_err(semantic)?.evaluate(d))
    } else {
        Oracle::new(p).cautious_eval(d).map_err(semantic)
    }
}

fn eval(out: &Out, p: &Path, d: &Path, how: &Evaluator, all: bool) -> Outcome {
    let (p, d) = (load_program(p)?, load_dataset(d)?);
    let res = evaluate(&p, &d, how)?;
    let facts: Vec<String> = if res.is_unsat() {
        vec!["bot".into()]
    } else {
        res.facts.iter().filter(|a| all || !a.pred.is_top()).map(print_atom).collect()
    };
    out.emit(
        || facts.iter().map(|f| format!("{f}.\n")).collect(),
        || json!(EvalJson { status: &res.status, facts: facts.clone() }),
    )
}

fn entail(out: &Out, p: &Path, d: &Path, query: &str, how: &Evaluator) -> Outcome {
    let (p, d) = (load_program(p)?, load_dataset(d)?);
    let phi = parse_ground_disjunction(query).map_err(semantic)?;
    let phi: Vec<_> = phi.into_iter().filter(|a| !a.pred.is_bot()).collect();
    let use_engine = how.engine || (!how.oracle && p.is_datalog());
    let entailed = if use_engine {
        let res = Engine::new(&p).map_err(semantic)?.evaluate(&d);
        res.is_unsat() || phi.iter().any(|a| res.facts.contains(a))
    } else {
        Oracle::new(&p).entails(&d, &phi).map_err(semantic)?
    };
    out.emit(
        || format!("{}\n", if entailed { "entailed" } else { "not entailed" }),
        || json!({"query": query.trim(), "entailed": entailed}),
    )
}

fn derive(out: &Out, p: &Path, d: &Path, query: &str, dot: bool) -> Outcome {
    let (p, d) = (load_program(p)?, load_dataset(d)?);
    let phi: Vec<_> = parse_ground_disjunction(query)
        .map_err(semantic)?
        .into_iter()
        .filter(|a| !a.pred.is_bot())
        .collect();
    let Some(der) = find_derivation(&p, &d, &phi).map_err(semantic)? else {
        return Err(Failure::Semantic(format!("no derivation of {} found", query.trim())));
    };
    out.emit(
        || if dot { der.to_dot() } else { der.to_text() },
        || json!({"rule_applications": der.rule_applications(), "derivation": der}),
    )
}

fn validate(out: &Out, files: &[PathBuf]) -> Outcome {
    if files.is_empty() {
        return Err(Failure::Usage("validate needs at least one file".into()));
    }
    let mut lines = Vec::new();
    let mut reports = Vec::new();
    for f in files {
        let ext = f.extension().and_then(|e| e.to_str()).unwrap_or("");
        let (kind, n) = match ext {
            "facts" => ("dataset", load_dataset(f)?.len()),
            "rlor" => ("ontology", parse_ontology(&read(f)?).map_err(semantic)?.len()),
            _ => ("program", load_program(f)?.len()),
        };
        let unit = match kind {
            "dataset" => "facts",
            "ontology" => "axioms",
            _ => "rules",
        };
        lines.push(format!("{}: ok, {kind} with {n} {unit}\n", f.display()));
        reports.push(json!({"file": f.display().to_string(), "kind": kind, "size": n}));
    }
    out.emit(|| lines.concat(), || json!(reports))
}

fn rlor_compile(out: &Out, path: &Path) -> Outcome {
    let axioms = parse_ontology(&read(path)?).map_err(semantic)?;
    let p = compile(&axioms);
    out.emit(
        || print_program(&p),
        || json!({"axioms": axioms, "program": print_program(&p), "rules": p.len()}),
    )
}

#[allow(clippy::too_many_arguments)]
fn check_equiv(
    out: &Out,
    p: &Path,
    q: &Path,
    goal: &[String],
    theta: Theta,
    samples: Option<usize>,
    max_constants: usize,
    max_facts: usize,
    seed: u64,
    timing: bool,
) -> Outcome {
    let (p, q) = (load_program(p)?, load_program(q)?);
    let s = if goal.is_empty() {
        p.predicates().into_iter().filter(|x| !x.is_builtin()).collect()
    } else {
        resolve_goals(&p, goal)?
    };
    let theta = match theta {
        Theta::Identity => Renaming::identity(),
        Theta::Expansion => idb_expansion(&p).1,
    };
    let strategy = match samples {
        Some(count) => Strategy::Random {
            count,
            max_constants,
            max_facts,
            seed,
        },
        None => Strategy::Exhaustive { max_constants, max_facts },
    };
    let report = check_rewriting(&p, &q, &theta, &s, &strategy);
    let mut value = serde_json::to_value(&report).expect("serialisable");
    if !timing {
        value.as_object_mut().expect("object").remove("elapsed_ms");
    }
    out.emit(
        || {
            let mut s = match &report.counterexample {
                None => format!(
                    "pass: {} datasets ({} checked up to renaming of constants), {} skipped\n",
                    report.datasets_covered, report.datasets_tested, report.skipped
                ),
                Some(cx) => format!(
                    "counterexample: {} holds only on the {} side for dataset\n{}",
                    cx.fact,
                    match cx.side {
                        wlrw_harness::Side::LeftOnly => "first",
                        wlrw_harness::Side::RightOnly => "second",
                    },
                    cx.dataset
                ),
            };
            if timing {
                s.push_str(&format!("elapsed: {:.1} ms\n", report.elapsed_ms));
            }
            s
        },
        || value,
    )?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Semantic("not a rewriting on the tested datasets".into()))
    }
}

fn run(cli: Cli) -> Outcome {
    let out = Out {
        json: cli.json,
        file: cli.output,
    };
    match cli.command {
        Command::Validate { files } => validate(&out, &files),
        Command::Classify { program, dot } => classify(&out, &program, dot),
        Command::Rewrite { program, mode, rw } => {
            let p = load_program(&program)?;
            emit_rewrite(&out, &run_rewrite(&p, mode, &rw)?)
        }
        Command::Prune { program, rw } => {
            if rw.goal.is_empty() {
                return Err(Failure::Usage("prune needs --goal".into()));
            }
            let p = load_program(&program)?;
            let mode = if is_wl(&p).holds { Mode::XiPrime } else { Mode::Auto };
            emit_rewrite(&out, &run_rewrite(&p, mode, &rw)?)
        }
        Command::Eval {
            program,
            dataset,
            how,
            all,
        } => eval(&out, &program, &dataset, &how, all),
        Command::Entail {
            program,
            dataset,
            query,
            how,
        } => entail(&out, &program, &dataset, &query, &how),
        Command::Derive {
            program,
            dataset,
            query,
            dot,
        } => derive(&out, &program, &dataset, &query, dot),
        Command::RlorCompile { ontology } => rlor_compile(&out, &ontology),
        Command::CheckEquiv {
            program,
            rewritten,
            goal,
            theta,
            exhaustive: _,
            samples,
            max_constants,
            max_facts,
            seed,
            timing,
        } => check_equiv(
            &out,
            &program,
            &rewritten,
            &goal,
            theta,
            samples,
            max_constants,
            max_facts,
            seed,
            timing,
        ),
        Command::Gen {
            seed,
            filter,
            predicates,
            max_arity,
            rules,
            max_body,
            disjunctive_prob,
            bot_prob,
        } => {
            if !(0.0..=1.0).contains(&disjunctive_prob) || !(0.0..=1.0).contains(&bot_prob) {
                return Err(Failure::Usage("probabilities must lie in [0, 1]".into()));
            }
            let cfg = GenConfig {
                predicates,
                max_arity,
                rules,
                max_body,
                disjunctive_prob,
                bot_prob,
                constants: 3,
                seed,
            };
            let filter = match filter {
                GenFilter::Any => Filter::Any,
                GenFilter::Datalog => Filter::Datalog,
                GenFilter::Linear => Filter::Linear,
                GenFilter::Wl => Filter::Wl,
            };
            let p = random_program(&cfg, filter).map_err(|e| match e {
                wlrw_harness::GenError::Bounds(_) => Failure::Usage(e.to_string()),
                _ => semantic(e),
            })?;
            out.emit(
                || print_program(&p),
                || json!({"config": cfg, "program": print_program(&p)}),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Semantic(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
    }
}
