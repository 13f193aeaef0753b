//! `grip`: check, evaluate, compare and translate `.grip` files, and run the
//! model oracle.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grip_core::eval::{normalize, trace};
use grip_core::grip_up::{certify, check_grip_up, selfprec_goal, shift_translate};
use grip_core::oracle::{self, check_beck_chevalley_failure, check_kernel_agreement, Code, EnumBound, Model};
use grip_core::precision::{decide_term_prec_with, decide_type_prec_with, PrecBound, PrecResult};
use grip_core::surface::{parse_file, parse_term, print, SourceFile};
use grip_core::typeck::{check_file, Env};
use grip_core::{Context, Tm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "grip", version, about = "Reference kernel for the GRIP gradual type theory")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Reduction steps allowed per normalization.
    #[arg(long, global = true, default_value_t = grip_core::eval::DEFAULT_FUEL)]
    fuel: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Largest natural number enumerated by the decider and the oracle.
    #[arg(long, global = true, default_value_t = 3)]
    nat_bound: u64,
    /// Longest list enumerated by the decider and the oracle.
    #[arg(long, global = true, default_value_t = 2)]
    list_len: usize,
    /// Largest domain the oracle tabulates functions over.
    #[arg(long, global = true, default_value_t = 8)]
    fn_bound: usize,
    /// Nesting depth of the oracle's unknown type.
    #[arg(long, global = true, default_value_t = 2)]
    depth: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    /// One JSON document on stdout.
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck every declaration of a file.
    Check {
        file: PathBuf,
        /// Check in the monotone fragment instead of the full system.
        #[arg(long)]
        grip_up: bool,
    },
    /// Normalize a definition (the last one by default).
    Eval {
        file: PathBuf,
        name: Option<String>,
        /// Print every reduction step as `rule | before | after`.
        #[arg(long)]
        trace: bool,
    },
    /// Decide a precision judgment between closed terms.
    Prec {
        #[command(subcommand)]
        kind: PrecKind,
    },
    /// Translate a monotone-fragment file, adding self-precision witnesses.
    Translate {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check laws of the bounded model.
    Oracle {
        #[command(subcommand)]
        law: OracleLaw,
    },
}

#[derive(Subcommand)]
enum PrecKind {
    /// `A <=[i] B`
    Type {
        a: String,
        b: String,
        #[arg(long, default_value_t = 0)]
        level: u32,
    },
    /// `a :A <= b :B`, with `B` defaulting to `A`
    Term { a: String, b: String, ty_a: String, ty_b: Option<String> },
}

#[derive(Subcommand)]
enum OracleLaw {
    /// Partial-preorder laws of precision at a type, or at every shipped code.
    Preorder {
        ty: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Embedding-projection laws for `A <= B`, or for every related pair.
    Eppair {
        a: Option<String>,
        b: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Casting through a meet differs from the direct cast.
    Meets,
    /// Kernel casts against model casts on random instances.
    Agree {
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Why a command did not succeed.
enum Failure {
    /// A type error, a failing verdict or a law violation; the report has
    /// already been written.
    Semantic,
    Usage(String),
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

struct Ctx {
    g: Global,
}

impl Ctx {
    fn env(&self) -> Env {
        Env::new().with_fuel(self.g.fuel)
    }

    fn prec_bound(&self) -> PrecBound {
        PrecBound {
            nat_bound: self.g.nat_bound,
            list_len: self.g.list_len,
        }
    }

    fn model(&self) -> Model {
        Model::new(EnumBound {
            nat_bound: self.g.nat_bound,
            list_len: self.g.list_len,
            fn_table_bound: self.g.fn_bound,
            depth: self.g.depth,
            ..EnumBound::default()
        })
    }

    /// Write the report in the selected format; `ok` decides the outcome.
    fn report(&self, ok: bool, text: &str, doc: Value) -> CmdResult {
        let body = match self.g.format {
            Format::Text => text.to_string(),
            Format::Structured => serde_json::to_string_pretty(&doc).expect("json") + "\n",
        };
        // a closed pipe is not an error of the command
        let _ = std::io::stdout().write_all(body.as_bytes());
        if ok {
            Ok(())
        } else {
            Err(Failure::Semantic)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// Parse a file; syntax errors are reported as semantic failures.
fn load(cx: &Ctx, path: &Path) -> Result<SourceFile, Failure> {
    let text = read_file(path)?;
    parse_file(&text).map_err(|ds| {
        let text: String = ds.iter().map(|d| format!("{}: {d}\n", path.display())).collect();
        let doc = json!({
            "ok": false,
            "file": path.display().to_string(),
            "errors": ds.iter().map(|d| json!({
                "line": d.span.line, "col": d.span.col, "message": d.message,
            })).collect::<Vec<_>>(),
        });
        match cx.report(false, &text, doc) {
            Err(f) => f,
            Ok(()) => Failure::Semantic,
        }
    })
}

fn term_arg(s: &str) -> Result<Tm, Failure> {
    parse_term(s).map_err(|ds| usage(format!("cannot parse `{s}`: {}", ds[0])))
}

fn cmd_check(cx: &Ctx, file: &Path, grip_up: bool) -> CmdResult {
    let src = load(cx, file)?;
    let env = if grip_up { cx.env().grip_up() } else { cx.env() };
    match check_file(&env, &src) {
        Ok(js) => {
            let mut text = String::new();
            for (d, j) in src.decls.iter().zip(&js) {
                text.push_str(&format!("{} : {}\n", d.name, print(&j.ty)));
            }
            text.push_str(&format!("ok: {} declarations\n", js.len()));
            let doc = json!({
                "ok": true,
                "file": file.display().to_string(),
                "grip_up": grip_up,
                "declarations": src.decls.iter().zip(&js).map(|(d, j)| json!({
                    "name": d.name, "type": print(&j.ty),
                })).collect::<Vec<_>>(),
            });
            cx.report(true, &text, doc)
        }
        Err(errs) => {
            let text: String = errs.iter().map(|e| format!("{}:{e}\n", file.display())).collect();
            let doc = json!({
                "ok": false,
                "file": file.display().to_string(),
                "grip_up": grip_up,
                "errors": errs.iter().map(|e| json!({
                    "decl": e.decl,
                    "line": e.span.line,
                    "col": e.span.col,
                    "kind": format!("{:?}", e.error.kind),
                    "rule": e.error.rule,
                    "message": e.error.to_string(),
                })).collect::<Vec<_>>(),
            });
            cx.report(false, &text, doc)
        }
    }
}

fn cmd_eval(cx: &Ctx, file: &Path, name: Option<&str>, with_trace: bool) -> CmdResult {
    let src = load(cx, file)?;
    let decl = match name {
        Some(n) => src.get(n).ok_or_else(|| usage(format!("no declaration `{n}`")))?,
        None => src.decls.iter().rev().find(|d| d.body.is_some()).ok_or_else(|| usage("no definitions"))?,
    };
    let body = decl.body.as_ref().ok_or_else(|| usage(format!("`{}` is an axiom", decl.name)))?;
    if let Err(e) = grip_core::typeck::check_decl(&cx.env(), decl) {
        let text = format!("{}: {e}\n", decl.name);
        return cx.report(false, &text, json!({"ok": false, "name": decl.name, "error": e.to_string()}));
    }
    let result = if with_trace {
        trace(body, cx.g.fuel).map(|(v, tr)| (v, Some(tr)))
    } else {
        normalize(body, cx.g.fuel).map(|v| (v, None))
    };
    match result {
        Ok((v, tr)) => {
            let mut text = String::new();
            if let Some(tr) = &tr {
                text.push_str(&tr.to_text());
            }
            text.push_str(&format!("{}\n", print(&v)));
            let mut doc = json!({"ok": true, "name": decl.name, "value": print(&v)});
            if let Some(tr) = tr {
                doc["trace"] = serde_json::to_value(&tr).expect("json");
            }
            cx.report(true, &text, doc)
        }
        Err(e) => cx.report(
            false,
            &format!("{}: {e}\n", decl.name),
            json!({"ok": false, "name": decl.name, "error": e.to_string()}),
        ),
    }
}

fn prec_report(cx: &Ctx, goal: String, r: &PrecResult) -> CmdResult {
    let mut text = String::new();
    let mut doc = json!({"goal": goal, "verdict": r.verdict()});
    match r {
        PrecResult::Holds(w) => {
            text.push_str(&format!("Holds: {goal}\n{}", w.derivation));
            doc["derivation"] = serde_json::to_value(&w.derivation).expect("json");
            doc["proof"] = json!(print(&w.proof));
        }
        PrecResult::Fails(path) => {
            text.push_str(&format!("Fails: {goal}\n"));
            for (k, step) in path.iter().enumerate() {
                text.push_str(&format!("{:width$}{step}\n", "", width = 2 * (k + 1)));
            }
            doc["path"] = json!(path);
        }
        PrecResult::UnknownUpToBound { bound, checked } => {
            text.push_str(&format!(
                "Unknown: {goal}\n  no counterexample among {checked} instances (naturals <= {}, lists <= {})\n",
                bound.nat_bound, bound.list_len
            ));
            doc["checked"] = json!(checked);
            doc["bound"] = json!({"nat_bound": bound.nat_bound, "list_len": bound.list_len});
        }
    }
    cx.report(!r.fails(), &text, doc)
}

fn cmd_prec(cx: &Ctx, kind: &PrecKind) -> CmdResult {
    let (goal, r) = match kind {
        PrecKind::Type { a, b, level } => {
            let (ta, tb) = (term_arg(a)?, term_arg(b)?);
            let r = decide_type_prec_with(&cx.env(), cx.prec_bound(), &ta, &tb, *level);
            (format!("{a} <=[{level}] {b}"), r)
        }
        PrecKind::Term { a, b, ty_a, ty_b } => {
            let ty_b = ty_b.as_deref().unwrap_or(ty_a);
            let [x, y, ta, tb] = [a, b, ty_a, ty_b].map(|s| term_arg(s));
            let r = decide_term_prec_with(&cx.env(), cx.prec_bound(), &x?, &y?, &ta?, &tb?);
            (format!("{a} :{ty_a} <= {b} :{ty_b}"), r)
        }
    };
    match r {
        Ok(r) => prec_report(cx, goal, &r),
        Err(e) => cx.report(false, &format!("{goal}: {e}\n"), json!({"goal": goal, "error": e.to_string()})),
    }
}

fn cmd_translate(cx: &Ctx, file: &Path, out: Option<&Path>) -> CmdResult {
    let src = load(cx, file)?;
    let env = cx.env();
    let ctx = Context::new();
    let mut output = String::new();
    let mut names = vec![];
    let mut errors = vec![];
    for d in &src.decls {
        let Some(body) = &d.body else {
            errors.push(format!("`{}`: axioms cannot be translated", d.name));
            continue;
        };
        let step = || -> Result<String, String> {
            let j = check_grip_up(&env, &ctx, body).map_err(|e| e.to_string())?;
            let ty = shift_translate(&env, &ctx, &d.ty).map_err(|e| e.to_string())?;
            let t = shift_translate(&env, &ctx, body).map_err(|e| e.to_string())?;
            let goal = selfprec_goal(&env, &j).map_err(|e| e.to_string())?;
            let w = certify(&env, &j).map_err(|e| e.to_string())?;
            Ok(format!(
                "def {n} : {} :=\n  {}.\n\ndef {n}_selfprec : {} :=\n  {}.\n\n",
                print(&ty),
                print(&t),
                print(&goal),
                print(&w),
                n = d.name
            ))
        };
        match step() {
            Ok(s) => {
                output.push_str(&s);
                names.push(d.name.clone());
            }
            Err(e) => errors.push(format!("`{}`: {e}", d.name)),
        }
    }
    if !errors.is_empty() {
        let text: String = errors.iter().map(|e| format!("{}: {e}\n", file.display())).collect();
        return cx.report(false, &text, json!({"ok": false, "errors": errors}));
    }
    match out {
        Some(p) => {
            std::fs::write(p, &output).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
            let text = format!("translated {} definitions into {}\n", names.len(), p.display());
            cx.report(true, &text, json!({"ok": true, "translated": names, "out": p.display().to_string()}))
        }
        None => cx.report(true, &output, json!({"ok": true, "translated": names, "output": output})),
    }
}

/// A code from a closed type written in surface syntax.
fn code_arg(cx: &Ctx, s: &str) -> Result<Code, Failure> {
    let t = term_arg(s)?;
    let nf = normalize(&t, cx.g.fuel).map_err(|e| usage(format!("`{s}`: {e}")))?;
    oracle::decode_code(&nf).ok_or_else(|| usage(format!("`{s}` has no code in the model")))
}

fn cmd_oracle(cx: &Ctx, law: &OracleLaw) -> CmdResult {
    let m = cx.model();
    let oerr = |e: oracle::OracleError| usage(e.to_string());
    match law {
        OracleLaw::Preorder { ty, all } => {
            let codes = match (ty, all) {
                (_, true) => m.shipped_codes(),
                (Some(t), false) => vec![code_arg(cx, t)?],
                (None, false) => return Err(usage("give a type or --all")),
            };
            let mut text = String::new();
            let mut reports = vec![];
            for c in &codes {
                let r = m.check_partial_preorder(c).map_err(oerr)?;
                text.push_str(&format!(
                    "preorder {}: {} values, {} related pairs, {} triples, {}\n",
                    r.code,
                    r.values,
                    r.related_pairs,
                    r.triples,
                    verdict_text(&r.violations)
                ));
                reports.push(r);
            }
            let ok = reports.iter().all(|r| r.passed());
            cx.report(ok, &text, json!({"ok": ok, "reports": reports}))
        }
        OracleLaw::Eppair { a, b, all } => {
            let pairs = match (a, b, all) {
                (_, _, true) => m.related_pairs().map_err(oerr)?,
                (Some(a), Some(b), false) => vec![(code_arg(cx, a)?, code_arg(cx, b)?)],
                _ => return Err(usage("give two types or --all")),
            };
            let mut text = String::new();
            let mut reports = vec![];
            for (a, b) in &pairs {
                let r = m.check_ep_pair(a, b).map_err(oerr)?;
                text.push_str(&format!(
                    "ep pair {} <= {}: {} monotonicity, {} adjunction, {} retraction, {} composition, {}\n",
                    r.a,
                    r.b,
                    r.monotonicity,
                    r.adjunction,
                    r.retraction,
                    r.composition,
                    verdict_text(&r.violations)
                ));
                reports.push(r);
            }
            let ok = reports.iter().all(|r| r.passed());
            cx.report(ok, &text, json!({"ok": ok, "reports": reports}))
        }
        OracleLaw::Meets => {
            let r = check_beck_chevalley_failure(&m).map_err(oerr)?;
            let text = format!(
                "direct cast: {}\nthrough the meet: {}\nequiprecise: {}\n",
                r.direct, r.via_meet, r.equiprecise
            );
            // the law being demonstrated is the divergence
            let ok = !r.equiprecise;
            cx.report(ok, &text, json!({"ok": ok, "report": r}))
        }
        OracleLaw::Agree { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let r = check_kernel_agreement(&m, *samples, cx.g.fuel, &mut rng).map_err(oerr)?;
            let text = format!(
                "agreement: {} samples, {} skipped, {}\n",
                r.samples,
                r.skipped,
                verdict_text(&r.disagreements)
            );
            let ok = r.passed();
            cx.report(ok, &text, json!({"ok": ok, "report": r}))
        }
    }
}

fn verdict_text(violations: &[String]) -> String {
    match violations.first() {
        None => "ok".to_string(),
        Some(first) => format!("{} violations, first: {first}", violations.len()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = grip_core::prelude::try_init() {
        eprintln!("grip: {e}");
        return ExitCode::from(2);
    }
    let cx = Ctx { g: cli.global };
    let r = match &cli.command {
        Command::Check { file, grip_up } => cmd_check(&cx, file, *grip_up),
        Command::Eval { file, name, trace } => cmd_eval(&cx, file, name.as_deref(), *trace),
        Command::Prec { kind } => cmd_prec(&cx, kind),
        Command::Translate { file, out } => cmd_translate(&cx, file, out.as_deref()),
        Command::Oracle { law } => cmd_oracle(&cx, law),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Semantic) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("grip: {msg}");
            ExitCode::from(2)
        }
    }
}
