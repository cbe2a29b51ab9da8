//! Executable checks of the lemmas about base-extension semantics.
//!
//! Each check draws cases from seeded corpora: formulas up to depth 3 over
//! `p` and `q`, every modal relation on the universe `({p}, 1)`, and sampled
//! modal relations on `({p, q}, 2)`. A check reports pass, or fail with a
//! witness shrunk by descending into subformulas, dropping assumptions and
//! removing rules from bases.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::base::{Base, RuleUniverse};
use crate::bridge::{euclidean_demo, falsify_in_bes, EuclidStatus, MAX_BRIDGE_ATOMS};
use crate::error::Result;
use crate::formula::{atoms_of, enumerate_formulas, Atom, Formula, FormulaSpace};
use crate::relation::{enumerate_modal_relations, sample_modal_relation, ExtensionalRelation, ModalLogic, Relation};
use crate::semantics::{LiteralEvaluator, RelationWitness};

/// Every lemma id the suite covers.
pub const IN_SCOPE: [&str; 31] = [
    "ClassicalMonotonicity",
    "MaxCon",
    "AlmostMaxCon",
    "ModalMonotonicity",
    "EFQ",
    "ModalBehaviour.Bot",
    "ModalBehaviour.Imp",
    "ModalBehaviour.Box",
    "BelowMaxCon",
    "MinimalLogic.R",
    "MinimalLogic.S",
    "MinimalLogic.C",
    "MinimalLogic.ImpE",
    "MinimalLogic.ImpI",
    "DoubleNegation",
    "Kmodal.MP",
    "Kmodal.NEC",
    "Kmodal.K",
    "OtherModal.T",
    "OtherModal.Axiom4",
    "Soundness",
    "Duality.DiamondAsBox",
    "Duality.BoxAsDiamond",
    "Euclidean",
    "MaxConOr",
    "ModalMaxCon",
    "HilbertAx1",
    "HilbertAx2",
    "HilbertAx3",
    "ClassicalBehaviour.Bot",
    "ClassicalBehaviour.Imp",
];

/// Relations sampled per logic on `({p, q}, 2)`.
pub const SAMPLED_RELATIONS: usize = 100;
/// Case draws allowed per counted case before a check gives up on its precondition.
const DRAWS_PER_CASE: usize = 8;

/// Where a case's universe and relation come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pool {
    /// `({p}, 1)` with every modal relation of the logic.
    Small,
    /// `({p, q}, 2)` with sampled modal relations.
    Sampled,
    /// `({p, q}, 2)` without a relation.
    Classical,
}

/// One instance of a lemma: bases, assumptions and formulas, under one relation.
#[derive(Clone, Debug)]
pub struct Case {
    pub pool: Pool,
    pub logic: Option<ModalLogic>,
    /// Index of the relation within the pool for `logic`.
    pub relation: usize,
    pub bases: Vec<Base>,
    pub gamma: Vec<Formula>,
    pub formulas: Vec<Formula>,
}

/// A failing case after shrinking, with what it was evaluated against.
#[derive(Clone, Debug)]
pub struct LemmaWitness {
    pub universe: RuleUniverse,
    pub logic: Option<ModalLogic>,
    pub relation: Option<RelationWitness>,
    pub bases: Vec<Base>,
    pub gamma: Vec<Formula>,
    pub formulas: Vec<Formula>,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub enum LemmaOutcome {
    Pass,
    Fail(Box<LemmaWitness>),
}

#[derive(Clone, Debug)]
pub struct LemmaResult {
    pub id: &'static str,
    pub statement: &'static str,
    /// Cases whose precondition applied.
    pub cases: usize,
    /// Draws skipped because the precondition did not apply.
    pub vacuous: usize,
    pub outcome: LemmaOutcome,
}

impl LemmaResult {
    pub fn pass(&self) -> bool {
        matches!(self.outcome, LemmaOutcome::Pass)
    }
}

struct Entry {
    witness: RelationWitness,
    ext: ExtensionalRelation,
    eval: LiteralEvaluator,
}

/// Universes, relations, evaluators and formula spaces shared by the checks.
pub struct Corpus {
    seed: u64,
    small_u: RuleUniverse,
    sampled_u: RuleUniverse,
    small: BTreeMap<ModalLogic, Vec<Entry>>,
    sampled: BTreeMap<ModalLogic, Vec<Entry>>,
    classical: Option<LiteralEvaluator>,
    spaces: BTreeMap<(usize, usize, bool), FormulaSpace>,
}

impl Corpus {
    pub fn new(seed: u64) -> Result<Corpus> {
        Ok(Corpus {
            seed,
            small_u: RuleUniverse::from_names(&["p"], 1)?,
            sampled_u: RuleUniverse::from_names(&["p", "q"], 2)?,
            small: BTreeMap::new(),
            sampled: BTreeMap::new(),
            classical: None,
            spaces: BTreeMap::new(),
        })
    }

    pub fn universe(&self, pool: Pool) -> &RuleUniverse {
        match pool {
            Pool::Small => &self.small_u,
            Pool::Sampled | Pool::Classical => &self.sampled_u,
        }
    }

    fn entries(&mut self, pool: Pool, logic: ModalLogic) -> Result<&mut Vec<Entry>> {
        let seed = self.seed;
        match pool {
            Pool::Small => {
                if !self.small.contains_key(&logic) {
                    let mut v = Vec::new();
                    for ext in enumerate_modal_relations(&self.small_u, logic)? {
                        let eval = LiteralEvaluator::new(&ext)?;
                        v.push(Entry { witness: RelationWitness::Extensional(ext.clone()), ext, eval });
                    }
                    self.small.insert(logic, v);
                }
                Ok(self.small.get_mut(&logic).expect("just filled"))
            }
            Pool::Sampled | Pool::Classical => {
                if !self.sampled.contains_key(&logic) {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ logic as u64);
                    let mut v = Vec::new();
                    for _ in 0..SAMPLED_RELATIONS {
                        let g = sample_modal_relation(&self.sampled_u, logic, rng.gen())?;
                        let ext = g.materialize()?;
                        let eval = LiteralEvaluator::new(&ext)?;
                        v.push(Entry { witness: RelationWitness::Generated(g), ext, eval });
                    }
                    self.sampled.insert(logic, v);
                }
                Ok(self.sampled.get_mut(&logic).expect("just filled"))
            }
        }
    }

    fn relation_count(&mut self, pool: Pool, logic: ModalLogic) -> Result<usize> {
        Ok(self.entries(pool, logic)?.len())
    }

    fn evaluator(&mut self, case: &Case) -> Result<&mut LiteralEvaluator> {
        match (case.pool, case.logic) {
            (Pool::Classical, _) | (_, None) => {
                if self.classical.is_none() {
                    self.classical = Some(LiteralEvaluator::classical(&self.sampled_u)?);
                }
                Ok(self.classical.as_mut().expect("just filled"))
            }
            (pool, Some(logic)) => Ok(&mut self.entries(pool, logic)?[case.relation].eval),
        }
    }

    fn relation(&mut self, case: &Case) -> Result<&ExtensionalRelation> {
        let logic = case.logic.expect("relation needs a logic");
        Ok(&self.entries(case.pool, logic)?[case.relation].ext)
    }

    fn holds(&mut self, case: &Case, b: Base, f: &Formula) -> Result<bool> {
        self.evaluator(case)?.holds(b, f)
    }

    fn entails(&mut self, case: &Case, b: Base, gamma: &[Formula], f: &Formula) -> Result<bool> {
        self.evaluator(case)?.entails(b, gamma, f)
    }

    fn space(&mut self, atoms: usize, depth: usize, modal: bool) -> &FormulaSpace {
        self.spaces.entry((atoms, depth, modal)).or_insert_with(|| {
            let names: Vec<Atom> = ["p", "q"][..atoms].iter().map(|n| Atom::new(n).expect("valid")).collect();
            FormulaSpace::new(&names, depth, modal)
        })
    }

    fn witness(&mut self, case: &Case, detail: String) -> Result<LemmaWitness> {
        let relation = match (case.pool, case.logic) {
            (Pool::Classical, _) | (_, None) => None,
            (pool, Some(logic)) => Some(self.entries(pool, logic)?[case.relation].witness.clone()),
        };
        Ok(LemmaWitness {
            universe: self.universe(case.pool).clone(),
            logic: case.logic,
            relation,
            bases: case.bases.clone(),
            gamma: case.gamma.clone(),
            formulas: case.formulas.clone(),
            detail,
        })
    }
}

type Check = fn(&mut Corpus, &Case) -> Result<Option<bool>>;

/// What a generator draws for each case.
#[derive(Clone, Copy)]
struct Shape {
    pools: &'static [Pool],
    logics: &'static [ModalLogic],
    /// Base kinds, in order.
    bases: &'static [BaseKind],
    gamma: usize,
    formulas: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BaseKind {
    Any,
    /// A superset of the previous base.
    Above,
    Max,
    /// Rules removed at random from a maximally-consistent base.
    BelowMax,
    Inconsistent,
}

struct Lemma {
    id: &'static str,
    statement: &'static str,
    run: Runner,
}

/// A whole-check runner: cases used and the first failure.
type Whole = fn(&mut Corpus, usize, &mut ChaCha8Rng) -> Result<(usize, Option<LemmaWitness>)>;

enum Runner {
    Cases(Shape, Check),
    Once(Whole),
}

const MODAL_POOLS: &[Pool] = &[Pool::Sampled, Pool::Sampled, Pool::Sampled, Pool::Small];
const CLASSICAL: &[Pool] = &[Pool::Classical];
const NORMAL: &[ModalLogic] = &ModalLogic::NORMAL;
const REFLEXIVE: &[ModalLogic] = &[ModalLogic::KT, ModalLogic::S4];
const TRANSITIVE: &[ModalLogic] = &[ModalLogic::K4, ModalLogic::S4];

const fn shape(pools: &'static [Pool], bases: &'static [BaseKind], gamma: usize, formulas: usize) -> Shape {
    Shape { pools, logics: NORMAL, bases, gamma, formulas }
}

fn registry() -> Vec<Lemma> {
    use BaseKind::*;
    let cases = |id, statement, shape, check| Lemma { id, statement, run: Runner::Cases(shape, check) };
    alloc::vec![
        cases("ClassicalMonotonicity", "Γ ⊩_B φ and B ⊆ C imply Γ ⊩_C φ", shape(CLASSICAL, &[Any, Above], 2, 1), classical_monotonicity),
        cases("MaxCon", "⊮_B φ implies ⊮_B* φ for some maximally-consistent B* ⊇ B", shape(CLASSICAL, &[Any], 0, 1), max_con),
        cases("AlmostMaxCon", "with C the only maximally-consistent superset of B, ⊩_B φ iff ⊩_C φ", shape(CLASSICAL, &[BelowMax], 0, 1), almost_max_con),
        cases("ClassicalBehaviour.Bot", "⊥ fails at maximally-consistent bases", shape(CLASSICAL, &[Max], 0, 0), behaviour_bot),
        cases("ClassicalBehaviour.Imp", "at maximally-consistent B, ⊩ φ → ψ iff ⊮ φ or ⊩ ψ", shape(CLASSICAL, &[Max], 0, 2), behaviour_imp),
        cases("ModalMonotonicity", "Γ ⊩_{B,R} φ and B ⊆ C imply Γ ⊩_{C,R} φ", shape(MODAL_POOLS, &[Any, Above], 2, 1), modal_monotonicity),
        cases("EFQ", "every formula holds at an inconsistent base", shape(MODAL_POOLS, &[Inconsistent], 0, 1), efq),
        cases("ModalBehaviour.Bot", "⊥ fails at maximally-consistent bases", shape(MODAL_POOLS, &[Max], 0, 0), behaviour_bot),
        cases("ModalBehaviour.Imp", "at maximally-consistent B, ⊩ φ → ψ iff ⊮ φ or ⊩ ψ", shape(MODAL_POOLS, &[Max], 0, 2), behaviour_imp),
        cases("ModalBehaviour.Box", "at maximally-consistent B, ⊩ □φ iff φ holds at every R-successor", shape(MODAL_POOLS, &[Max], 0, 1), behaviour_box),
        cases("BelowMaxCon", "with C the only maximally-consistent superset of B, ⊩_{B,R} φ iff ⊩_{C,R} φ", shape(MODAL_POOLS, &[BelowMax], 0, 1), almost_max_con),
        cases("MinimalLogic.R", "φ ⊩ φ", shape(MODAL_POOLS, &[Any], 0, 1), rule_r),
        cases("MinimalLogic.S", "Γ ⊩ φ implies Γ, ψ ⊩ φ", shape(MODAL_POOLS, &[Any], 2, 2), rule_s),
        cases("MinimalLogic.C", "Γ ⊩ φ and Γ, φ ⊩ ψ imply Γ ⊩ ψ", shape(MODAL_POOLS, &[Any], 2, 2), rule_c),
        cases("MinimalLogic.ImpE", "φ → ψ, φ ⊩ ψ", shape(MODAL_POOLS, &[Any], 0, 2), rule_imp_e),
        cases("MinimalLogic.ImpI", "Γ, φ ⊩ ψ implies Γ ⊩ φ → ψ", shape(MODAL_POOLS, &[Any], 2, 2), rule_imp_i),
        cases("DoubleNegation", "(φ → ⊥) → ⊥ ⊩ φ", shape(MODAL_POOLS, &[Any], 0, 1), double_negation),
        cases("Kmodal.MP", "⊩ φ → ψ and ⊩ φ imply ⊩ ψ", shape(MODAL_POOLS, &[Any], 0, 2), modus_ponens),
        cases("Kmodal.NEC", "φ valid on ({p}, 1) implies □φ valid there", Shape { pools: &[Pool::Small], ..shape(&[], &[], 0, 1) }, necessitation),
        cases("Kmodal.K", "□(φ → ψ) ⊩ □φ → □ψ", shape(MODAL_POOLS, &[Any], 0, 2), axiom_k),
        Lemma { id: "OtherModal.T", statement: "□φ ⊩ φ under reflexive logics, and □p → p fails under K", run: Runner::Once(axiom_t) },
        cases("OtherModal.Axiom4", "□φ ⊩ □□φ under transitive logics", Shape { logics: TRANSITIVE, ..shape(MODAL_POOLS, &[Any], 0, 1) }, axiom_4),
        Lemma { id: "Soundness", statement: "Kripke countermodels carry over to bases", run: Runner::Once(soundness) },
        cases("Duality.DiamondAsBox", "⊩ ◇φ iff ⊩ □(φ → ⊥) → ⊥", shape(MODAL_POOLS, &[Any], 0, 1), diamond_as_box),
        cases("Duality.BoxAsDiamond", "⊩ □φ iff ⊩ ◇(φ → ⊥) → ⊥", shape(MODAL_POOLS, &[Any], 0, 1), box_as_diamond),
        Lemma { id: "Euclidean", statement: "some euclidean relation has ◇p but not □◇p at a base", run: Runner::Once(euclidean) },
        cases("MaxConOr", "at maximally-consistent B, ⊩ φ or ⊩ φ → ⊥", shape(MODAL_POOLS, &[Max], 0, 1), max_con_or),
        cases("ModalMaxCon", "⊮_{B,R} φ implies ⊮_{B*,R} φ for some maximally-consistent B* ⊇ B", shape(MODAL_POOLS, &[Any], 0, 1), max_con),
        cases("HilbertAx1", "φ ⊩ ψ → φ", shape(MODAL_POOLS, &[Any], 0, 2), hilbert_1),
        cases("HilbertAx2", "φ → (ψ → χ) ⊩ (φ → ψ) → (φ → χ)", shape(MODAL_POOLS, &[Any], 0, 3), hilbert_2),
        cases("HilbertAx3", "(φ → ⊥) → (ψ → ⊥) ⊩ ψ → φ", shape(MODAL_POOLS, &[Any], 0, 2), hilbert_3),
    ]
}

/// Ids of every registered check, in run order.
pub fn lemma_ids() -> Vec<&'static str> {
    registry().iter().map(|s| s.id).collect()
}

/// Whether `pattern` selects `id`: a `*` glob over the whole id, or an exact
/// match of one of its dot-separated parts.
pub fn matches_filter(pattern: &str, id: &str) -> bool {
    glob(pattern.as_bytes(), id.as_bytes()) || id.split('.').any(|part| part == pattern)
}

fn glob(p: &[u8], s: &[u8]) -> bool {
    match p.split_first() {
        None => s.is_empty(),
        Some((b'*', rest)) => (0..=s.len()).any(|i| glob(rest, &s[i..])),
        Some((c, rest)) => s.split_first().is_some_and(|(d, tail)| c == d && glob(rest, tail)),
    }
}

/// Runs every check selected by `filter` with up to `budget` cases each.
///
/// Results depend only on the arguments.
pub fn run_suite(filter: &str, budget: usize, seed: u64) -> Result<Vec<LemmaResult>> {
    let mut corpus = Corpus::new(seed)?;
    let mut out = Vec::new();
    for entry in registry().into_iter().filter(|s| matches_filter(filter, s.id)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv(entry.id));
        let (cases, vacuous, failure) = match entry.run {
            Runner::Cases(shape, check) => run_cases(&mut corpus, shape, check, budget, &mut rng)?,
            Runner::Once(f) => {
                let (n, w) = f(&mut corpus, budget, &mut rng)?;
                (n, 0, w)
            }
        };
        let outcome = match failure {
            None => LemmaOutcome::Pass,
            Some(w) => LemmaOutcome::Fail(Box::new(w)),
        };
        out.push(LemmaResult { id: entry.id, statement: entry.statement, cases, vacuous, outcome });
    }
    Ok(out)
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

fn run_cases(
    corpus: &mut Corpus,
    shape: Shape,
    check: Check,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, usize, Option<LemmaWitness>)> {
    let (mut cases, mut vacuous) = (0, 0);
    while cases < budget && vacuous < budget * DRAWS_PER_CASE {
        let case = draw(corpus, &shape, rng)?;
        match check(corpus, &case)? {
            None => vacuous += 1,
            Some(true) => cases += 1,
            Some(false) => {
                let small = shrink(corpus, check, case)?;
                let w = corpus.witness(&small, String::from("counterexample"))?;
                return Ok((cases + 1, vacuous, Some(w)));
            }
        }
    }
    if cases == 0 && budget > 0 {
        let w = LemmaWitness {
            universe: corpus.universe(shape.pools[0]).clone(),
            logic: None,
            relation: None,
            bases: Vec::new(),
            gamma: Vec::new(),
            formulas: Vec::new(),
            detail: String::from("no drawn case met the precondition"),
        };
        return Ok((0, vacuous, Some(w)));
    }
    Ok((cases, vacuous, None))
}

fn draw(corpus: &mut Corpus, shape: &Shape, rng: &mut ChaCha8Rng) -> Result<Case> {
    let pool = shape.pools[rng.gen_range(0..shape.pools.len())];
    let (logic, relation) = if pool == Pool::Classical {
        (None, 0)
    } else {
        let logic = shape.logics[rng.gen_range(0..shape.logics.len())];
        let n = corpus.relation_count(pool, logic)?;
        (Some(logic), rng.gen_range(0..n))
    };
    let u = corpus.universe(pool).clone();
    let mut bases: Vec<Base> = Vec::new();
    for kind in shape.bases {
        let all = u.all_rules();
        let b = match kind {
            BaseKind::Any => u.base(rng.gen::<u64>() & all),
            BaseKind::Above => u.base(bases.last().map_or(0, |b| b.members()) | rng.gen::<u64>() & all),
            BaseKind::Max => pick_max(&u, rng),
            BaseKind::BelowMax => {
                let m = pick_max(&u, rng);
                let drop: u64 = (0..u.rule_count()).filter(|_| rng.gen_bool(0.3)).fold(0, |a, i| a | 1 << i);
                u.base(m.members() & !drop)
            }
            BaseKind::Inconsistent => {
                let mut b = u.base(rng.gen::<u64>() & all);
                while b.is_consistent() {
                    b = u.with_rule(b, rng.gen_range(0..u.rule_count()));
                }
                b
            }
        };
        bases.push(b);
    }
    let (atoms, modal) = match pool {
        Pool::Small => (1, true),
        Pool::Sampled => (2, true),
        Pool::Classical => (2, false),
    };
    let mut formula = |rng: &mut ChaCha8Rng| {
        let depth = rng.gen_range(0..=3);
        let space = corpus.space(atoms, depth, modal);
        space.get(rng.gen_range(0..space.len())).expect("index in range")
    };
    let n_gamma = rng.gen_range(0..=shape.gamma);
    let gamma = (0..n_gamma).map(|_| formula(rng)).collect();
    let formulas = (0..shape.formulas).map(|_| formula(rng)).collect();
    Ok(Case { pool, logic, relation, bases, gamma, formulas })
}

fn pick_max(u: &RuleUniverse, rng: &mut ChaCha8Rng) -> Base {
    u.max_consistent_for(rng.gen_range(0..u.all_atoms()))
}

/// Simpler variants of a case: a formula replaced by an immediate
/// subformula, an assumption dropped, or a rule removed from a base.
fn shrink_candidates(case: &Case, u: &RuleUniverse) -> Vec<Case> {
    let mut out = Vec::new();
    for (i, f) in case.formulas.iter().enumerate() {
        for child in f.children() {
            let mut c = case.clone();
            c.formulas[i] = child.clone();
            out.push(c);
        }
    }
    for (i, f) in case.gamma.iter().enumerate() {
        let mut c = case.clone();
        c.gamma.remove(i);
        out.push(c);
        for child in f.children() {
            let mut c = case.clone();
            c.gamma[i] = child.clone();
            out.push(c);
        }
    }
    for (i, b) in case.bases.iter().enumerate() {
        for r in b.rule_indices() {
            let mut c = case.clone();
            c.bases[i] = u.without_rule(*b, r);
            out.push(c);
        }
    }
    out
}

fn shrink(corpus: &mut Corpus, check: Check, mut case: Case) -> Result<Case> {
    let u = corpus.universe(case.pool).clone();
    'outer: loop {
        for c in shrink_candidates(&case, &u) {
            if check(corpus, &c)? == Some(false) {
                case = c;
                continue 'outer;
            }
        }
        return Ok(case);
    }
}

fn imp(a: &Formula, b: &Formula) -> Formula {
    Formula::implies(a.clone(), b.clone())
}

fn neg(a: &Formula) -> Formula {
    Formula::not(a.clone())
}

fn classical_monotonicity(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    modal_monotonicity(c, k)
}

fn modal_monotonicity(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, d) = (k.bases[0], k.bases[1]);
    if !b.is_subset_of(d) {
        return Ok(None);
    }
    let before = c.entails(k, b, &k.gamma, &k.formulas[0])?;
    Ok(Some(!before || c.entails(k, d, &k.gamma, &k.formulas[0])?))
}

fn max_con(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, f) = (k.bases[0], &k.formulas[0]);
    if c.holds(k, b, f)? {
        return Ok(None);
    }
    let u = c.universe(k.pool).clone();
    if let Formula::Atom(a) = f {
        // The greedy construction itself must give the witness.
        let m = u.extend_max_consistent_avoiding(b, u.atom_index(a).expect("corpus atom"))?;
        return Ok(Some(u.is_max_consistent(m) && b.is_subset_of(m) && !c.holds(k, m, f)?));
    }
    for m in u.max_consistent_supersets(b) {
        if !c.holds(k, m, f)? {
            return Ok(Some(true));
        }
    }
    Ok(Some(false))
}

fn almost_max_con(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let b = k.bases[0];
    let u = c.universe(k.pool).clone();
    let maxes = u.max_consistent_supersets(b);
    if maxes.len() != 1 {
        return Ok(None);
    }
    Ok(Some(c.holds(k, b, &k.formulas[0])? == c.holds(k, maxes[0], &k.formulas[0])?))
}

fn behaviour_bot(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    Ok(Some(!c.holds(k, k.bases[0], &Formula::Bottom)?))
}

fn behaviour_imp(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, f, g) = (k.bases[0], &k.formulas[0], &k.formulas[1]);
    let lhs = c.holds(k, b, &imp(f, g))?;
    Ok(Some(lhs == (!c.holds(k, b, f)? || c.holds(k, b, g)?)))
}

fn behaviour_box(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, f) = (k.bases[0], &k.formulas[0]);
    let u = c.universe(k.pool).clone();
    let succ: Vec<Base> = c.relation(k)?.row(b).ones().map(|m| u.base(m as u64)).collect();
    let mut all = true;
    for s in succ {
        all &= c.holds(k, s, f)?;
    }
    Ok(Some(c.holds(k, b, &Formula::boxed(f.clone()))? == all))
}

fn efq(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    if k.bases[0].is_consistent() {
        return Ok(None);
    }
    Ok(Some(c.holds(k, k.bases[0], &k.formulas[0])?))
}

fn rule_r(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let f = &k.formulas[0];
    Ok(Some(c.entails(k, k.bases[0], core::slice::from_ref(f), f)?))
}

fn rule_s(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, f, extra) = (k.bases[0], &k.formulas[0], &k.formulas[1]);
    if !c.entails(k, b, &k.gamma, f)? {
        return Ok(None);
    }
    let mut delta = k.gamma.clone();
    delta.push(extra.clone());
    Ok(Some(c.entails(k, b, &delta, f)?))
}

fn rule_c(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, f, g) = (k.bases[0], &k.formulas[0], &k.formulas[1]);
    let mut with_f = k.gamma.clone();
    with_f.push(f.clone());
    if !c.entails(k, b, &k.gamma, f)? || !c.entails(k, b, &with_f, g)? {
        return Ok(None);
    }
    Ok(Some(c.entails(k, b, &k.gamma, g)?))
}

fn rule_imp_e(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (f, g) = (&k.formulas[0], &k.formulas[1]);
    Ok(Some(c.entails(k, k.bases[0], &[imp(f, g), f.clone()], g)?))
}

fn rule_imp_i(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, f, g) = (k.bases[0], &k.formulas[0], &k.formulas[1]);
    let mut with_f = k.gamma.clone();
    with_f.push(f.clone());
    if !c.entails(k, b, &with_f, g)? {
        return Ok(None);
    }
    Ok(Some(c.entails(k, b, &k.gamma, &imp(f, g))?))
}

fn double_negation(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let f = &k.formulas[0];
    Ok(Some(c.entails(k, k.bases[0], &[neg(&neg(f))], f)?))
}

fn modus_ponens(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, f, g) = (k.bases[0], &k.formulas[0], &k.formulas[1]);
    if !c.holds(k, b, &imp(f, g))? || !c.holds(k, b, f)? {
        return Ok(None);
    }
    Ok(Some(c.holds(k, b, g)?))
}

fn valid_on_pool(c: &mut Corpus, pool: Pool, logic: ModalLogic, f: &Formula) -> Result<bool> {
    for e in c.entries(pool, logic)?.iter_mut() {
        if e.eval.first_failure(f)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn necessitation(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (logic, f) = (k.logic.expect("modal pool"), &k.formulas[0]);
    if !valid_on_pool(c, k.pool, logic, f)? {
        return Ok(None);
    }
    Ok(Some(valid_on_pool(c, k.pool, logic, &Formula::boxed(f.clone()))?))
}

fn axiom_k(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (f, g) = (&k.formulas[0], &k.formulas[1]);
    let bx = |x: Formula| Formula::boxed(x);
    Ok(Some(c.entails(k, k.bases[0], &[bx(imp(f, g))], &Formula::implies(bx(f.clone()), bx(g.clone())))?))
}

fn axiom_t_case(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let f = &k.formulas[0];
    Ok(Some(c.entails(k, k.bases[0], &[Formula::boxed(f.clone())], f)?))
}

fn axiom_t(c: &mut Corpus, budget: usize, rng: &mut ChaCha8Rng) -> Result<(usize, Option<LemmaWitness>)> {
    let shape = Shape { logics: REFLEXIVE, ..shape(MODAL_POOLS, &[BaseKind::Any], 0, 1) };
    let (cases, _, w) = run_cases(c, shape, axiom_t_case, budget, rng)?;
    if w.is_some() {
        return Ok((cases, w));
    }
    // Without reflexivity the axiom must fail somewhere on the small universe.
    let t = Formula::implies(Formula::boxed(Formula::atom("p")), Formula::atom("p"));
    if valid_on_pool(c, Pool::Small, ModalLogic::K, &t)? {
        let k = Case { pool: Pool::Small, logic: Some(ModalLogic::K), relation: 0, bases: Vec::new(), gamma: Vec::new(), formulas: alloc::vec![t] };
        return Ok((cases + 1, Some(c.witness(&k, String::from("□p → p holds on every K relation of ({p}, 1)"))?)));
    }
    Ok((cases + 1, None))
}

fn axiom_4(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let f = Formula::boxed(k.formulas[0].clone());
    Ok(Some(c.entails(k, k.bases[0], core::slice::from_ref(&f), &Formula::boxed(f.clone()))?))
}

fn soundness(c: &mut Corpus, budget: usize, rng: &mut ChaCha8Rng) -> Result<(usize, Option<LemmaWitness>)> {
    let p = [Atom::new("p").expect("valid")];
    let corpus: Vec<Formula> = enumerate_formulas(&p, 2, true).collect();
    let mut cases = 0;
    for _ in 0..budget.min(corpus.len() * ModalLogic::NORMAL.len()) {
        let f = &corpus[rng.gen_range(0..corpus.len())];
        let logic = ModalLogic::NORMAL[rng.gen_range(0..4)];
        let worlds = MAX_BRIDGE_ATOMS - atoms_of(f).len();
        cases += 1;
        if let Some(r) = falsify_in_bes(logic, f, worlds)? {
            if !r.success() {
                let w = LemmaWitness {
                    universe: r.universe.clone(),
                    logic: Some(logic),
                    relation: Some(RelationWitness::Generated(r.relation.clone())),
                    bases: r.world_bases.clone(),
                    gamma: Vec::new(),
                    formulas: alloc::vec![f.clone()],
                    detail: format!(
                        "bridge failed: conditions {:?}, {} disagreements, holds at world base: {}",
                        r.conditions.failed(),
                        r.disagreements().len(),
                        r.holds_at_world_base
                    ),
                };
                return Ok((cases, Some(w)));
            }
        }
    }
    let _ = c;
    Ok((cases, None))
}

fn euclidean(_: &mut Corpus, _: usize, _: &mut ChaCha8Rng) -> Result<(usize, Option<LemmaWitness>)> {
    let u = RuleUniverse::from_names(&["p", "q", "r"], 1)?;
    let r = euclidean_demo(&u)?;
    if r.status == EuclidStatus::NoWitnessInBudget {
        let w = LemmaWitness {
            universe: u,
            logic: Some(ModalLogic::KEuclidean),
            relation: Some(RelationWitness::Generated(r.relation)),
            bases: alloc::vec![r.b, r.c, r.d, r.e, r.f],
            gamma: Vec::new(),
            formulas: alloc::vec![Formula::diamond(Formula::atom("p"))],
            detail: format!("{} after {} relations", r.status.label(), r.nodes_explored),
        };
        return Ok((1, Some(w)));
    }
    Ok((1, None))
}

fn diamond_as_box(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, f) = (k.bases[0], &k.formulas[0]);
    let lhs = c.holds(k, b, &Formula::diamond(f.clone()))?;
    Ok(Some(lhs == c.holds(k, b, &neg(&Formula::boxed(neg(f))))?))
}

fn box_as_diamond(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, f) = (k.bases[0], &k.formulas[0]);
    let lhs = c.holds(k, b, &Formula::boxed(f.clone()))?;
    Ok(Some(lhs == c.holds(k, b, &neg(&Formula::diamond(neg(f))))?))
}

fn max_con_or(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (b, f) = (k.bases[0], &k.formulas[0]);
    Ok(Some(c.holds(k, b, f)? || c.holds(k, b, &neg(f))?))
}

fn hilbert_1(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (f, g) = (&k.formulas[0], &k.formulas[1]);
    Ok(Some(c.entails(k, k.bases[0], core::slice::from_ref(f), &imp(g, f))?))
}

fn hilbert_2(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (f, g, h) = (&k.formulas[0], &k.formulas[1], &k.formulas[2]);
    Ok(Some(c.entails(k, k.bases[0], &[imp(f, &imp(g, h))], &imp(&imp(f, g), &imp(f, h)))?))
}

fn hilbert_3(c: &mut Corpus, k: &Case) -> Result<Option<bool>> {
    let (f, g) = (&k.formulas[0], &k.formulas[1]);
    Ok(Some(c.entails(k, k.bases[0], &[imp(&neg(f), &neg(g))], &imp(g, f))?))
}
