//! `cpdlp`: command-line front end for the ucpdl library.
//!
//! Every command prints JSON lines on stdout. Exit codes: 0 success or true,
//! 1 false, 2 usage or parse error, 3 semantic error.

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use ucpdl::ast::{Expression, Program};
use ucpdl::eval::{untc_relation, ConjMode, EvalError, EvalOptions, Evaluator, DEFAULT_BUDGET};
use ucpdl::games::{self, Game, GameError, GameKind, Owner, Position, DEFAULT_ARENA_CAP};
use ucpdl::measures::{measures, Dialect};
use ucpdl::satredux::{self, SatError, DEFAULT_SHAPE_BUDGET, DEFAULT_SPLIT_CAP};
use ucpdl::structure::{FormatError, Structure, StructureError, World};
use ucpdl::syntax::{self, Sort, SyntaxError};
use ucpdl::translate::{self, TranslateError, DEFAULT_NODE_CAP};
use ucpdl::untc::UntcFormula;

#[derive(Parser)]
#[command(name = "cpdlp", version, about = "Parse, evaluate, translate and play games on UCPDL+ expressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an expression and print its canonical form.
    Parse {
        expr: String,
        #[arg(long, default_value = "any", value_parser = parse_dialect)]
        dialect: Dialect,
        #[arg(long)]
        sort: Option<SortArg>,
        /// Read the input as a UNTC formula.
        #[arg(long)]
        untc: bool,
    },
    /// Print the size and width measures of an expression.
    Measure {
        expr: String,
        #[arg(long, default_value = "any", value_parser = parse_dialect)]
        dialect: Dialect,
        #[arg(long)]
        sort: Option<SortArg>,
    },
    /// Evaluate an expression on a structure.
    Eval {
        expr: String,
        /// Structure JSON file.
        #[arg(long, short)]
        structure: String,
        #[arg(long, default_value = "any", value_parser = parse_dialect)]
        dialect: Dialect,
        #[arg(long)]
        sort: Option<SortArg>,
        /// Report truth at this world (formulas) or source world (programs).
        #[arg(long)]
        at: Option<String>,
        /// Target world for programs; requires --at.
        #[arg(long, requires = "at")]
        to: Option<String>,
        /// Read the input as a UNTC formula and print its relation over the sorted free variables.
        #[arg(long)]
        untc: bool,
        #[arg(long, value_enum, default_value_t = ModeArg::Decomp)]
        mode: ModeArg,
    },
    /// Translate between dialects.
    Translate {
        expr: String,
        #[arg(long, value_enum)]
        from: Lang,
        #[arg(long, value_enum)]
        to: Lang,
        #[arg(long)]
        sort: Option<SortArg>,
    },
    /// Decide whether two expressions have the same denotation on a structure.
    Equiv {
        first: String,
        second: String,
        #[arg(long, short)]
        structure: String,
        #[arg(long)]
        sort: Option<SortArg>,
    },
    /// Solve a pebble game between two pointed structures.
    Game {
        #[arg(value_enum)]
        kind: GameArg,
        first: String,
        second: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        universal: bool,
        /// Comma-separated start worlds in the first structure.
        #[arg(long)]
        u: String,
        /// Comma-separated start worlds in the second structure.
        #[arg(long)]
        v: String,
        /// Print every explored position of the Duplicator-first half game.
        #[arg(long)]
        dump: bool,
    },
    /// Bounded unravelling of a pointed structure.
    Unravel {
        structure: String,
        #[arg(long)]
        world: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        depth: usize,
        /// Also write the unravelled structure to this file.
        #[arg(long)]
        output: Option<String>,
    },
    /// All k-splits of an ICPDL program.
    Split {
        program: String,
        #[arg(long)]
        k: usize,
    },
    /// Translate a conjunctive program of ICPDL atoms into ICPDL, valid on trees.
    Treetranslate { program: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum SortArg {
    Formula,
    Program,
}

impl From<SortArg> for Sort {
    fn from(s: SortArg) -> Sort {
        match s {
            SortArg::Formula => Sort::Formula,
            SortArg::Program => Sort::Program,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Brute,
    Decomp,
}

#[derive(Clone, Copy, ValueEnum)]
enum GameArg {
    Sim,
    Bisim,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Lang {
    Loopcpdl,
    CpdlplusLoop,
    Icpdl,
    CpdlplusCap,
    Tw2,
    IcpdlplusTw2,
    Untc,
    Ucpdlplus,
}

impl Lang {
    fn dialect(self) -> Dialect {
        match self {
            Lang::Loopcpdl => Dialect::LoopCpdl,
            Lang::CpdlplusLoop | Lang::CpdlplusCap => Dialect::CpdlPlus,
            Lang::Icpdl => Dialect::Icpdl,
            Lang::Tw2 => Dialect::CpdlPlusTw(2),
            Lang::IcpdlplusTw2 => Dialect::IcpdlPlusTw(2),
            Lang::Ucpdlplus | Lang::Untc => Dialect::UcpdlPlus,
        }
    }
}

fn parse_dialect(s: &str) -> Result<Dialect, String> {
    let d = match s.to_ascii_lowercase().as_str() {
        "pdl" => Dialect::Pdl,
        "cpdl" => Dialect::Cpdl,
        "loopcpdl" => Dialect::LoopCpdl,
        "icpdl" => Dialect::Icpdl,
        "cpdlplus" => Dialect::CpdlPlus,
        "ucpdlplus" => Dialect::UcpdlPlus,
        "icpdlplus" => Dialect::IcpdlPlus,
        "iucpdlplus" => Dialect::IucpdlPlus,
        "any" => Dialect::Any,
        other => {
            let tw = |prefix: &str| other.strip_prefix(prefix).and_then(|k| k.parse::<usize>().ok());
            if let Some(k) = tw("cpdlplus-tw") {
                Dialect::CpdlPlusTw(k)
            } else if let Some(k) = tw("icpdlplus-tw") {
                Dialect::IcpdlPlusTw(k)
            } else {
                return Err(format!("unknown dialect {s:?}"));
            }
        }
    };
    Ok(d)
}

enum Failure {
    Usage(String),
    Semantic(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Semantic(m) => f.write_str(m),
        }
    }
}

impl From<SyntaxError> for Failure {
    fn from(e: SyntaxError) -> Self {
        match e {
            SyntaxError::Parse { .. } => Failure::Usage(format!("parse error: {e}")),
            SyntaxError::Dialect(_) => Failure::Semantic(format!("dialect violation: {e}")),
        }
    }
}

macro_rules! semantic {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Semantic(e.to_string())
            }
        }
    )*};
}
semantic!(EvalError, TranslateError, GameError, SatError, StructureError);

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Usage(format!("bad structure file: {e}"))
    }
}

/// Outcome of a successful command: lines to print and the exit status.
struct Output {
    lines: Vec<Value>,
    truth: Option<bool>,
}

impl Output {
    fn lines(lines: Vec<Value>) -> Self {
        Output { lines, truth: None }
    }

    fn verdict(line: Value, truth: bool) -> Self {
        Output { lines: vec![line], truth: Some(truth) }
    }
}

fn budget_override() -> Result<Option<usize>, Failure> {
    match std::env::var("CPDLP_BUDGET") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("CPDLP_BUDGET must be a positive integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn load_structure(path: &str) -> Result<Structure, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
    Ok(Structure::load(&bytes)?)
}

fn worlds_of(k: &Structure, list: &str) -> Result<Vec<World>, Failure> {
    list.split(',').map(|w| Ok(k.world(w.trim())?)).collect()
}

fn names(k: &Structure, ws: impl IntoIterator<Item = World>) -> Vec<&str> {
    ws.into_iter().map(|w| k.world_name(w)).collect()
}

fn expression_json(e: &Expression) -> Value {
    let kind = match e {
        Expression::Formula(_) => "formula",
        Expression::Program(_) => "program",
    };
    json!({ "kind": kind, "expr": syntax::print(e) })
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let budget = budget_override()?;
    let options = EvalOptions { budget: budget.unwrap_or(DEFAULT_BUDGET), ..EvalOptions::default() };
    match cli.command {
        Command::Parse { expr, dialect, sort, untc } => {
            if untc {
                let f = syntax::parse_untc(&expr)?;
                f.validate().map_err(|e| Failure::Semantic(e.to_string()))?;
                return Ok(Output::lines(vec![json!({ "kind": "untc", "expr": syntax::print_untc(&f) })]));
            }
            let e = syntax::parse_as(&expr, dialect, sort.map(Into::into))?;
            Ok(Output::lines(vec![expression_json(&e)]))
        }
        Command::Measure { expr, dialect, sort } => {
            let e = syntax::parse_as(&expr, dialect, sort.map(Into::into))?;
            let m = measures(&e);
            Ok(Output::lines(vec![json!({
                "pdl_size": m.pdl_size,
                "cq_width": m.cq_width,
                "i_width": if m.iwidth_defined { Value::from(m.i_width) } else { Value::Null },
                "nesting_depth": m.nesting_depth,
                "star_depth": m.star_depth,
                "expr_tree_width": m.expr_tree_width,
            })]))
        }
        Command::Eval { expr, structure, dialect, sort, at, to, untc, mode } => {
            let k = load_structure(&structure)?;
            if untc {
                return eval_untc_command(&k, &expr);
            }
            let e = syntax::parse_as(&expr, dialect, sort.map(Into::into))?;
            let mode = match mode {
                ModeArg::Brute => ConjMode::Brute,
                ModeArg::Decomp => ConjMode::Decomp,
            };
            let mut ev = Evaluator::new(&k, EvalOptions { mode, ..options });
            match e {
                Expression::Formula(f) => {
                    let set = ev.formula(&f)?;
                    if let Some(w) = at {
                        if to.is_some() {
                            return Err(Failure::Usage("--to applies only to programs".into()));
                        }
                        let w = k.world(&w)?;
                        let holds = set.contains(w);
                        return Ok(Output::verdict(json!({ "holds": holds }), holds));
                    }
                    Ok(Output::lines(vec![json!({ "worlds": names(&k, set.iter()) })]))
                }
                Expression::Program(p) => {
                    let rel = ev.program(&p)?;
                    match (at, to) {
                        (Some(u), Some(v)) => {
                            let holds = rel.contains(k.world(&u)?, k.world(&v)?);
                            Ok(Output::verdict(json!({ "holds": holds }), holds))
                        }
                        (Some(u), None) => {
                            let u = k.world(&u)?;
                            Ok(Output::lines(vec![json!({ "successors": names(&k, rel.successors(u)) })]))
                        }
                        _ => {
                            let pairs: Vec<[&str; 2]> =
                                rel.iter().map(|(u, v)| [k.world_name(u), k.world_name(v)]).collect();
                            Ok(Output::lines(vec![json!({ "pairs": pairs })]))
                        }
                    }
                }
            }
        }
        Command::Translate { expr, from, to, sort } => {
            let cap = budget.unwrap_or(DEFAULT_NODE_CAP);
            translate_command(&expr, from, to, sort.map(Into::into), cap)
        }
        Command::Equiv { first, second, structure, sort } => {
            let k = load_structure(&structure)?;
            let hint = sort.map(Into::into);
            let a = syntax::parse_as(&first, Dialect::Any, hint)?;
            let b = syntax::parse_as(&second, Dialect::Any, hint)?;
            let mut ev = Evaluator::new(&k, options);
            let equal = match (&a, &b) {
                (Expression::Formula(f), Expression::Formula(g)) => ev.formula(f)? == ev.formula(g)?,
                (Expression::Program(p), Expression::Program(q)) => ev.program(p)? == ev.program(q)?,
                _ => {
                    let (a, b) = (reread(&first, &a, &b)?, reread(&second, &b, &a)?);
                    match (&a, &b) {
                        (Expression::Program(p), Expression::Program(q)) => ev.program(p)? == ev.program(q)?,
                        _ => return Err(Failure::Usage("cannot compare a formula with a program".into())),
                    }
                }
            };
            Ok(Output::verdict(json!({ "equal": equal }), equal))
        }
        Command::Game { kind, first, second, k, universal, u, v, dump } => {
            let a = load_structure(&first)?;
            let b = load_structure(&second)?;
            let (u, v) = (worlds_of(&a, &u)?, worlds_of(&b, &v)?);
            let cap = budget.unwrap_or(DEFAULT_ARENA_CAP);
            let bisim = matches!(kind, GameArg::Bisim);
            let wins = if bisim {
                games::k_bisimulates(&a, &u, &b, &v, k, universal, cap)?
            } else {
                games::k_simulates(&a, &u, &b, &v, k, universal, cap)?
            };
            let mut lines = Vec::new();
            if dump {
                let game = Game::new(GameKind::new(bisim, universal), k, &a, &b, cap)?;
                let start = game.start(&u, &v)?;
                let region = game.solve(&start)?;
                for (i, p) in region.positions.iter().enumerate() {
                    lines.push(position_json(p, &a, &b, region.wins(i)));
                }
            }
            lines.push(json!({ "duplicator_wins": wins }));
            Ok(Output { lines, truth: Some(wins) })
        }
        Command::Unravel { structure, world, k, depth, output } => {
            let s = load_structure(&structure)?;
            let u = s.world(&world)?;
            if k < 1 {
                return Err(GameError::BadK(1).into());
            }
            let un = games::unravel(&s, u, k, depth);
            let saved = un.structure.save();
            if let Some(path) = output {
                std::fs::write(&path, &saved).map_err(|e| Failure::Usage(format!("cannot write {path}: {e}")))?;
            }
            let td = &un.decomposition;
            let bags: Vec<Vec<&str>> = td.bags.iter().map(|b| names(&un.structure, b.iter().copied())).collect();
            let parsed: Value = serde_json::from_str(&saved).expect("save emits JSON");
            Ok(Output::lines(vec![json!({
                "structure": parsed,
                "root": un.structure.world_name(un.root),
                "decomposition": { "bags": bags, "parent": td.parent, "root": td.root, "width": td.width },
            })]))
        }
        Command::Split { program, k } => {
            let p = syntax::parse_program(&program, Dialect::Icpdl)?;
            let splits = satredux::k_split(&p, k, budget.unwrap_or(DEFAULT_SPLIT_CAP))?;
            Ok(Output::lines(
                splits
                    .iter()
                    .map(|t| json!({ "split": t.iter().map(syntax::print_program).collect::<Vec<_>>() }))
                    .collect(),
            ))
        }
        Command::Treetranslate { program } => {
            let p = syntax::parse_program(&program, Dialect::IcpdlPlus)?;
            let Program::Conj(c) = &p else {
                return Err(Failure::Semantic("treetranslate expects a conjunctive program".into()));
            };
            let out = satredux::tree_translate(c, budget.unwrap_or(DEFAULT_SHAPE_BUDGET))?;
            Ok(Output::lines(vec![json!({ "program": syntax::print_program(&out) })]))
        }
    }
}

/// Re-parses `text` as a program when `other` is one, for inputs like `a & b`.
fn reread(text: &str, this: &Expression, other: &Expression) -> Result<Expression, Failure> {
    match (this, other) {
        (Expression::Formula(_), Expression::Program(_)) => {
            Ok(Expression::Program(syntax::parse_program(text, Dialect::Any)?))
        }
        _ => Ok(this.clone()),
    }
}

fn eval_untc_command(k: &Structure, text: &str) -> Result<Output, Failure> {
    let f: UntcFormula = syntax::parse_untc(text)?;
    f.validate().map_err(|e| Failure::Semantic(e.to_string()))?;
    let vars: Vec<_> = f.free_vars().into_iter().collect();
    let rel = untc_relation(k, &f, &vars)?;
    let tuples: Vec<Vec<&str>> = rel.iter().map(|t| names(k, t.iter().copied())).collect();
    let var_names: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
    if vars.is_empty() {
        let holds = !rel.is_empty();
        return Ok(Output::verdict(json!({ "holds": holds }), holds));
    }
    Ok(Output::lines(vec![json!({ "vars": var_names, "tuples": tuples })]))
}

fn translate_command(text: &str, from: Lang, to: Lang, hint: Option<Sort>, cap: usize) -> Result<Output, Failure> {
    if from == Lang::Untc {
        if to != Lang::Ucpdlplus {
            return Err(unsupported(from, to));
        }
        let f = syntax::parse_untc(text)?;
        f.validate().map_err(|e| Failure::Semantic(e.to_string()))?;
        let nf = translate::untc_normal_form(&f, cap)?;
        let e = translate::untc_to_ucpdl(&nf)?;
        return Ok(Output::lines(vec![expression_json(&e)]));
    }
    let e = syntax::parse_as(text, from.dialect(), hint)?;
    if to == Lang::Untc {
        if from != Lang::Ucpdlplus {
            return Err(unsupported(from, to));
        }
        let f = translate::ucpdl_to_untc(&e)?;
        return Ok(Output::lines(vec![json!({ "kind": "untc", "expr": syntax::print_untc(&f) })]));
    }
    let out: Expression = match (from, to, &e) {
        (Lang::Loopcpdl, Lang::CpdlplusLoop, Expression::Formula(f)) => translate::loop_to_conj(f)?.into(),
        (Lang::Loopcpdl, Lang::CpdlplusLoop, Expression::Program(p)) => translate::loop_to_conj_program(p)?.into(),
        (Lang::CpdlplusLoop, Lang::Loopcpdl, Expression::Formula(f)) => translate::conj_to_loop(f)?.into(),
        (Lang::CpdlplusLoop, Lang::Loopcpdl, Expression::Program(p)) => translate::conj_to_loop_program(p)?.into(),
        (Lang::Icpdl, Lang::CpdlplusCap, Expression::Formula(f)) => translate::icpdl_to_conj(f)?.into(),
        (Lang::Icpdl, Lang::CpdlplusCap, Expression::Program(p)) => translate::icpdl_to_conj_program(p)?.into(),
        (Lang::IcpdlplusTw2, Lang::Tw2, Expression::Formula(f)) => translate::elim_intersection(f).into(),
        (Lang::IcpdlplusTw2, Lang::Tw2, Expression::Program(p)) => translate::elim_intersection_program(p).into(),
        (Lang::Tw2 | Lang::IcpdlplusTw2 | Lang::CpdlplusCap, Lang::Icpdl, Expression::Formula(f)) => {
            translate::tw2_to_icpdl(f)?.into()
        }
        (Lang::Tw2 | Lang::IcpdlplusTw2 | Lang::CpdlplusCap, Lang::Icpdl, Expression::Program(p)) => {
            translate::tw2_to_icpdl_program(p)?.into()
        }
        _ => return Err(unsupported(from, to)),
    };
    Ok(Output::lines(vec![expression_json(&out)]))
}

fn unsupported(from: Lang, to: Lang) -> Failure {
    let name = |l: Lang| l.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    Failure::Usage(format!("no translation from {} to {}", name(from), name(to)))
}

fn position_json(p: &Position, a: &Structure, b: &Structure, wins: bool) -> Value {
    let (su, sv) = if p.flipped { (b, a) } else { (a, b) };
    let owner = match p.owner {
        Owner::Spoiler => "spoiler".to_string(),
        Owner::Duplicator(i) => format!("duplicator{i}"),
    };
    json!({
        "owner": owner,
        "flipped": p.flipped,
        "u": names(su, p.u.iter().copied()),
        "v": names(sv, p.v.iter().copied()),
        "duplicator_wins": wins,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            for line in &out.lines {
                println!("{line}");
            }
            match out.truth {
                Some(false) => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(f) => {
            eprintln!("cpdlp: {f}");
            ExitCode::from(match f {
                Failure::Usage(_) => 2,
                Failure::Semantic(_) => 3,
            })
        }
    }
}
