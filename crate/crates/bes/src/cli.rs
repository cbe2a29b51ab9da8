//! The `bes` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bes_core::bridge::{euclidean_demo, falsify_in_bes, render_agreement};
use bes_core::hilbert::check_proof;
use bes_core::kripke::find_countermodel;
use bes_core::lemmas::run_suite;
use bes_core::relation::{check_relation, minimal_modal_relation, ConditionReport};
use bes_core::semantics::{holds, holds_classical, valid_exhaustive, valid_sampled, Verdict};
use bes_core::{Error, Formula, ModalLogic, RuleUniverse};

use crate::dto::{
    base_from_dto, BaseDto, BridgeReportDto, ConditionReportDto, EuclidReportDto, KripkeDto, LemmaResultDto, ModeDto,
    ProofCheckDto, ProofDto, RelationDto, UniverseDto, VerdictDto,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SIZE: i32 = 3;

const DEFAULT_SAMPLES: usize = 100;

#[derive(Parser, Debug)]
#[command(name = "bes", version, about = "Base-extension semantics for the modal logics K, KT, K4 and S4")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Config {
    /// K, KT, K4, S4 or K-euclidean.
    #[arg(long, global = true, default_value = "K", value_parser = parse_logic)]
    logic: ModalLogic,
    /// Comma-separated atoms of the rule universe [default: p].
    #[arg(long, global = true, value_delimiter = ',')]
    atoms: Option<Vec<String>>,
    /// Most premises per rule [default: 1].
    #[arg(long, global = true)]
    max_premises: Option<usize>,
    /// Check every relation of the universe.
    #[arg(long, global = true, conflicts_with = "samples")]
    exhaustive: bool,
    /// Check this many sampled relations [default: 100].
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// World bound for countermodel search.
    #[arg(long, global = true, default_value_t = 3)]
    max_worlds: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct FormulaArg {
    /// The formula, e.g. "[](p -> q) -> []p -> []q".
    #[arg(required_unless_present = "formula_file")]
    formula: Option<String>,
    /// Read the formula from a file instead.
    #[arg(long, conflicts_with = "formula")]
    formula_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Support of a formula at a base.
    Eval {
        /// JSON list of rules; the empty base when absent.
        #[arg(long)]
        base: Option<PathBuf>,
        /// JSON relation; its universe replaces --atoms and --max-premises.
        #[arg(long)]
        relation: Option<PathBuf>,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Validity over the relations of a universe.
    Valid {
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Truth in a Kripke model, or `kripke find` for a countermodel.
    #[command(args_conflicts_with_subcommands = true)]
    Kripke {
        #[command(subcommand)]
        find: Option<KripkeCommand>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// World name.
        #[arg(long)]
        world: Option<String>,
        formula: Option<String>,
    },
    /// Modal and frame conditions of a relation.
    CheckRelation { relation: PathBuf },
    /// Checks a Hilbert proof.
    CheckProof { proof: PathBuf },
    /// Carries a Kripke countermodel over to bases.
    Bridge {
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Searches for a euclidean relation with ◇p but not □◇p at a base.
    EuclidDemo,
    /// Runs the lemma checks.
    Lemmas {
        #[arg(long, default_value = "*")]
        filter: String,
        /// Cases per check.
        #[arg(long, default_value_t = 1000)]
        budget: usize,
    },
}

#[derive(Subcommand, Debug)]
enum KripkeCommand {
    /// Smallest countermodel within --max-worlds.
    Find {
        #[command(flatten)]
        formula: FormulaArg,
    },
}

fn parse_logic(s: &str) -> Result<ModalLogic, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Why a command could not produce a result.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Size(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::TooLarge { .. } => Failure::Size(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Usage(e.to_string())
    }
}

/// A finished command: its rendering in both formats and its exit status.
struct Outcome {
    text: String,
    json: serde_json::Value,
    status: i32,
}

impl Outcome {
    fn new(text: String, json: &impl Serialize, pass: bool) -> Outcome {
        let json = serde_json::to_value(json).expect("report serializes");
        Outcome { text, json, status: if pass { EXIT_OK } else { EXIT_FAIL } }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let shown = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{shown}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{shown}");
                EXIT_OK
            };
        }
    };
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_USAGE;
        }
        Err(Failure::Size(m)) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_SIZE;
        }
    };
    let rendered = match cli.config.format {
        Format::Text => outcome.text,
        Format::Json => serde_json::to_string_pretty(&outcome.json).expect("json value") + "\n",
    };
    let written = match &cli.config.out {
        Some(path) => std::fs::write(path, rendered.as_bytes()),
        None => out.write_all(rendered.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    outcome.status
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    let c = &cli.config;
    match &cli.command {
        Command::Eval { base, relation, formula } => eval(c, base.as_deref(), relation.as_deref(), &read_formula(formula)?),
        Command::Valid { formula } => valid(c, &read_formula(formula)?),
        Command::Kripke { find: Some(KripkeCommand::Find { formula }), .. } => kripke_find(c, &read_formula(formula)?),
        Command::Kripke { find: None, model, world, formula } => {
            let model = model.as_deref().ok_or_else(|| Failure::Usage("kripke needs --model".into()))?;
            let formula = formula.as_deref().ok_or_else(|| Failure::Usage("kripke needs a formula".into()))?;
            kripke_eval(model, world.as_deref(), &parse_formula(formula)?)
        }
        Command::CheckRelation { relation } => check_relation_file(c, relation),
        Command::CheckProof { proof } => check_proof_file(c, proof),
        Command::Bridge { formula } => bridge(c, &read_formula(formula)?),
        Command::EuclidDemo => euclid(c),
        Command::Lemmas { filter, budget } => lemmas(c, filter, *budget),
    }
}

fn parse_formula(s: &str) -> Result<Formula, Failure> {
    s.trim().parse::<Formula>().map_err(|e| Failure::Usage(format!("formula `{}`: {e}", s.trim())))
}

fn read_formula(f: &FormulaArg) -> Result<Formula, Failure> {
    match (&f.formula, &f.formula_file) {
        (Some(s), _) => parse_formula(s),
        (None, Some(p)) => parse_formula(&std::fs::read_to_string(p)?),
        (None, None) => Err(Failure::Usage("no formula given".into())),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn universe(c: &Config, default_atoms: &[&str]) -> Result<RuleUniverse, Failure> {
    let atoms: Vec<String> = match &c.atoms {
        Some(a) => a.iter().map(|s| s.trim().to_string()).collect(),
        None => default_atoms.iter().map(|s| s.to_string()).collect(),
    };
    let names: Vec<&str> = atoms.iter().map(String::as_str).collect();
    Ok(RuleUniverse::from_names(&names, c.max_premises.unwrap_or(1))?)
}

fn mode(c: &Config) -> ModeDto {
    if c.exhaustive {
        ModeDto::Exhaustive
    } else {
        ModeDto::Sampled { samples: c.samples.unwrap_or(DEFAULT_SAMPLES), seed: c.seed }
    }
}

#[derive(Serialize)]
struct EvalDto {
    formula: String,
    logic: Option<String>,
    universe: UniverseDto,
    base: BaseDto,
    holds: bool,
}

fn eval(c: &Config, base: Option<&Path>, relation: Option<&Path>, f: &Formula) -> Result<Outcome, Failure> {
    let rel = match relation {
        Some(p) => Some(read_json::<RelationDto>(p)?.to_core()?),
        None => None,
    };
    let u = match &rel {
        Some(r) => r.as_relation().universe().clone(),
        None => universe(c, &["p"])?,
    };
    let b = match base {
        Some(p) => base_from_dto(&u, &read_json::<BaseDto>(p)?)?,
        None => u.empty_base(),
    };
    let (value, logic) = match (&rel, f.is_modal_free()) {
        (Some(r), _) => (holds(r.as_relation(), b, f)?, None),
        (None, true) => (holds_classical(&u, b, f)?, None),
        (None, false) => (holds(&minimal_modal_relation(&u, c.logic), b, f)?, Some(c.logic.name().to_string())),
    };
    let shown = u.show_base(b);
    let dto = EvalDto { formula: f.to_string(), logic, universe: UniverseDto::from_core(&u), base: crate::dto::base_to_dto(&u, b), holds: value };
    let text = format!("{}: {f} at {shown}\n", if value { "holds" } else { "fails" });
    Ok(Outcome::new(text, &dto, value))
}

fn valid(c: &Config, f: &Formula) -> Result<Outcome, Failure> {
    let u = universe(c, &["p"])?;
    let m = mode(c);
    let v = match m {
        ModeDto::Exhaustive => valid_exhaustive(&u, c.logic, f)?,
        ModeDto::Sampled { samples, seed } => valid_sampled(&u, c.logic, f, samples, seed)?,
    };
    let dto = VerdictDto::from_core(&u, c.logic, f, m, &v);
    let mut text = format!("{}: {f} under {} on {}\n", v.label(), c.logic, describe_universe(&u));
    match &v {
        Verdict::Valid { relations } => writeln!(text, "relations checked: {relations}").unwrap(),
        Verdict::NoCounterexampleFound { samples } => writeln!(text, "sampled relations: {samples}").unwrap(),
        Verdict::Invalid { base, relation } => {
            writeln!(text, "fails at base {}", u.show_base(*base)).unwrap();
            match relation {
                bes_core::semantics::RelationWitness::Extensional(r) => writeln!(text, "relation: {}", r.describe()).unwrap(),
                bes_core::semantics::RelationWitness::Generated(r) => {
                    let seeds: Vec<String> =
                        r.seeds().iter().map(|&(x, y)| format!("{} -> {}", u.show_base(x), u.show_base(y))).collect();
                    writeln!(text, "relation seeds: {}", if seeds.is_empty() { "none".into() } else { seeds.join(", ") }).unwrap()
                }
            }
        }
    }
    Ok(Outcome::new(text, &dto, !v.is_invalid()))
}

fn describe_universe(u: &RuleUniverse) -> String {
    let atoms: Vec<&str> = u.atoms().iter().map(|a| a.name()).collect();
    format!("({{{}}}, {})", atoms.join(", "), u.max_premises())
}

#[derive(Serialize)]
struct KripkeEvalDto {
    world: String,
    formula: String,
    truth: bool,
}

fn kripke_eval(model: &Path, world: Option<&str>, f: &Formula) -> Result<Outcome, Failure> {
    let m = read_json::<KripkeDto>(model)?.to_core()?;
    let name = world.map(str::to_string).unwrap_or_else(|| m.worlds()[0].clone());
    let w = m.world_index(&name)?;
    let truth = m.eval(w, f)?;
    let text = format!("{}: {f} at {name}\n", if truth { "true" } else { "false" });
    Ok(Outcome::new(text, &KripkeEvalDto { world: name, formula: f.to_string(), truth }, truth))
}

#[derive(Serialize)]
struct CountermodelDto {
    logic: String,
    formula: String,
    max_worlds: usize,
    model: Option<KripkeDto>,
    world: Option<String>,
}

fn kripke_find(c: &Config, f: &Formula) -> Result<Outcome, Failure> {
    let found = find_countermodel(c.logic, f, c.max_worlds)?;
    let mut text = String::new();
    let dto = match &found {
        None => {
            writeln!(text, "no countermodel for {f} under {} within {} worlds", c.logic, c.max_worlds).unwrap();
            CountermodelDto { logic: c.logic.name().into(), formula: f.to_string(), max_worlds: c.max_worlds, model: None, world: None }
        }
        Some((m, w)) => {
            let d = KripkeDto::from_core(m);
            writeln!(text, "countermodel for {f} under {}: fails at {}", c.logic, m.worlds()[*w]).unwrap();
            write_model(&mut text, &d);
            CountermodelDto {
                logic: c.logic.name().into(),
                formula: f.to_string(),
                max_worlds: c.max_worlds,
                model: Some(d),
                world: Some(m.worlds()[*w].clone()),
            }
        }
    };
    Ok(Outcome::new(text, &dto, found.is_none()))
}

fn write_model(text: &mut String, d: &KripkeDto) {
    writeln!(text, "worlds: {}", d.worlds.join(", ")).unwrap();
    let edges: Vec<String> = d.edges.iter().map(|[a, b]| format!("{a}->{b}")).collect();
    writeln!(text, "edges: {}", if edges.is_empty() { "none".into() } else { edges.join(", ") }).unwrap();
    for (atom, worlds) in &d.valuation {
        writeln!(text, "{atom}: {{{}}}", worlds.join(", ")).unwrap();
    }
}

fn render_conditions(text: &mut String, u: &RuleUniverse, r: &ConditionReport) {
    for v in &r.verdicts {
        let state = match (v.pass(), v.condition.gating()) {
            (true, _) => "pass",
            (false, true) => "FAIL",
            (false, false) => "fails (informational)",
        };
        writeln!(text, "  ({}) {state}", v.condition.name()).unwrap();
        for x in &v.violations {
            let bases: Vec<String> = x.bases.iter().map(|&b| u.show_base(b)).collect();
            writeln!(text, "      {}", bases.join("  ")).unwrap();
        }
    }
}

fn check_relation_file(c: &Config, path: &Path) -> Result<Outcome, Failure> {
    let rel = read_json::<RelationDto>(path)?.to_core()?;
    let r = rel.as_relation();
    let report = check_relation(r, c.logic);
    let u = r.universe();
    let mut text = format!("relation {} as a {}-modal relation on {}\n", if report.pass() { "passes" } else { "FAILS" }, c.logic, describe_universe(u));
    render_conditions(&mut text, u, &report);
    Ok(Outcome::new(text, &ConditionReportDto::from_core(u, &report), report.pass()))
}

fn check_proof_file(c: &Config, path: &Path) -> Result<Outcome, Failure> {
    let p = read_json::<ProofDto>(path)?.to_core(c.logic)?;
    let result = check_proof(&p);
    let text = match &result {
        Ok(()) => format!("proof ok in {}: {}\n", p.logic, p.conclusion().map(ToString::to_string).unwrap_or_default()),
        Err(e) => format!("proof rejected in {}: {e}\n", p.logic),
    };
    Ok(Outcome::new(text, &ProofCheckDto::new(&p, &result), result.is_ok()))
}

#[derive(Serialize)]
struct NoCountermodelDto {
    success: bool,
    logic: String,
    formula: String,
    max_worlds: usize,
    detail: &'static str,
}

fn bridge(c: &Config, f: &Formula) -> Result<Outcome, Failure> {
    let Some(r) = falsify_in_bes(c.logic, f, c.max_worlds)? else {
        let text = format!("no Kripke countermodel for {f} under {} within {} worlds; nothing to carry over\n", c.logic, c.max_worlds);
        let dto = NoCountermodelDto {
            success: false,
            logic: c.logic.name().into(),
            formula: f.to_string(),
            max_worlds: c.max_worlds,
            detail: "no countermodel",
        };
        return Ok(Outcome::new(text, &dto, false));
    };
    let dto = BridgeReportDto::from_core(&r);
    let mut text = format!("bridge {} for {f} under {}\n", if r.success() { "succeeded" } else { "FAILED" }, r.logic);
    writeln!(text, "countermodel (fails at {}):", dto.world).unwrap();
    write_model(&mut text, &dto.countermodel);
    writeln!(text, "universe: {}", describe_universe(&r.universe)).unwrap();
    for wb in &r.world_bases.iter().enumerate().collect::<Vec<_>>() {
        writeln!(text, "B_{} = {}", r.countermodel.worlds()[wb.0], r.universe.show_base(*wb.1)).unwrap();
    }
    writeln!(text, "relation checks:").unwrap();
    render_conditions(&mut text, &r.universe, &r.conditions);
    writeln!(text, "agreement ({}):", dto.evaluators.join(" + ")).unwrap();
    text.push_str(&render_agreement(&r));
    writeln!(text, "{f} {} at B_{}", if r.holds_at_world_base { "holds" } else { "fails" }, dto.world).unwrap();
    Ok(Outcome::new(text, &dto, r.success()))
}

fn euclid(c: &Config) -> Result<Outcome, Failure> {
    let u = universe(c, &["p", "q", "r"])?;
    let r = euclidean_demo(&u)?;
    let dto = EuclidReportDto::from_core(&r);
    let mut text = format!("{} on {}\n", r.status.label(), describe_universe(&u));
    for (name, b) in [("B", r.b), ("C", r.c), ("D", r.d), ("E", r.e), ("F", r.f)] {
        writeln!(text, "{name} = {}", u.show_base(b)).unwrap();
    }
    let pairs = |ps: &[(bes_core::Base, bes_core::Base)]| {
        ps.iter().map(|&(x, y)| format!("{} -> {}", u.show_base(x), u.show_base(y))).collect::<Vec<_>>().join(", ")
    };
    writeln!(text, "seeds: {}", pairs(&r.seeds)).unwrap();
    writeln!(text, "added: {}", if r.added.is_empty() { "none".into() } else { pairs(&r.added) }).unwrap();
    writeln!(text, "relations examined: {}", r.nodes_explored).unwrap();
    writeln!(text, "checks:").unwrap();
    render_conditions(&mut text, &u, &r.conditions);
    writeln!(text, "<>p at B: {}", r.diamond_p).unwrap();
    writeln!(text, "[]<>p at B: {}", r.box_diamond_p).unwrap();
    Ok(Outcome::new(text, &dto, r.success()))
}

fn lemmas(c: &Config, filter: &str, budget: usize) -> Result<Outcome, Failure> {
    let results = run_suite(filter, budget, c.seed)?;
    if results.is_empty() {
        return Err(Failure::Usage(format!("no lemma check matches `{filter}`")));
    }
    let dtos: Vec<LemmaResultDto> = results.iter().map(LemmaResultDto::from_core).collect();
    let mut text = String::new();
    for d in &dtos {
        writeln!(text, "{:<24} {}  ({} cases, {} skipped)  {}", d.id, if d.pass { "pass" } else { "FAIL" }, d.cases, d.vacuous, d.statement)
            .unwrap();
        if let Some(w) = &d.witness {
            writeln!(text, "    logic: {}", w.logic.as_deref().unwrap_or("none")).unwrap();
            for b in &w.bases {
                writeln!(text, "    base: {{{}}}", b.join("; ")).unwrap();
            }
            if !w.assumptions.is_empty() {
                writeln!(text, "    assuming: {}", w.assumptions.join(", ")).unwrap();
            }
            writeln!(text, "    formulas: {}", w.formulas.join(", ")).unwrap();
            writeln!(text, "    {}", w.detail).unwrap();
        }
    }
    let failed = dtos.iter().filter(|d| !d.pass).count();
    writeln!(text, "{} checks, {failed} failed", dtos.len()).unwrap();
    Ok(Outcome::new(text, &dtos, failed == 0))
}
