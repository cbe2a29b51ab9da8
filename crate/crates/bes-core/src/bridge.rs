//! From Kripke countermodels to base-extension countermodels.
//!
//! A countermodel `M, w ⊭ φ` is turned into a relation over bases:
//!
//! 1. every world `v` gets a fresh atom `q_v`, true everywhere except at `v`,
//!    so no two worlds share a valuation;
//! 2. every world becomes the maximally-consistent base `ℬ_w` deriving exactly
//!    the atoms true at `w`;
//! 3. the edges `(ℬ_w, ℬ_v)` seed a [`GeneratedRelation`] closed under the
//!    rules of the logic;
//! 4. each subformula of `φ` is evaluated at each `ℬ_w` and compared with its
//!    Kripke truth value.
//!
//! [`euclidean_demo`] builds a relation in the opposite spirit: a euclidean
//! relation over bases where `◇p` holds but `□◇p` does not.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::base::{Base, RuleUniverse};
use crate::error::{Error, Result};
use crate::formula::{atoms_of, is_atom_name, subformulas, Atom, Formula};
use crate::kripke::{find_countermodel, KripkeModel};
use crate::relation::{
    check_relation, close_relation, ClosureRules, Condition, ConditionReport, GeneratedRelation, ModalLogic, Relation,
    MAX_MATERIALIZED_BASES,
};
use crate::semantics::{Evaluator, LiteralEvaluator, ReducedEvaluator, Strategy};

/// Largest alphabet (formula atoms plus fresh atoms) a bridge universe may have.
pub const MAX_BRIDGE_ATOMS: usize = 4;
/// Premise bound of bridge universes, lowered to the alphabet size when smaller.
pub const BRIDGE_MAX_PREMISES: usize = 2;

/// A model with one fresh atom per world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Freshened {
    pub model: KripkeModel,
    /// `fresh[v]` is true at every world except `v`.
    pub fresh: Vec<Atom>,
}

/// Adds an atom `q_v` per world `v`, true exactly at the other worlds.
///
/// The name is `q_` followed by the world name, falling back to `q_w<i>` when
/// that is not an atom name, and primed with trailing underscores until it
/// clashes with nothing in `phi` or the model.
pub fn freshen_model(m: &KripkeModel, phi: &Formula) -> Freshened {
    let mut taken: BTreeSet<Atom> = atoms_of(phi);
    taken.extend(m.valuations().keys().cloned());
    let all = if m.world_count() == 64 { u64::MAX } else { (1u64 << m.world_count()) - 1 };
    let mut model = m.clone();
    let mut fresh = Vec::with_capacity(m.world_count());
    for (i, name) in m.worlds().iter().enumerate() {
        let mut candidate = format!("q_{name}");
        if !is_atom_name(&candidate) {
            candidate = format!("q_w{i}");
        }
        while taken.iter().any(|a| a.name() == candidate) {
            candidate.push('_');
        }
        let atom = Atom::new(&candidate).expect("sanitized atom name");
        taken.insert(atom.clone());
        model.set_valuation(atom.clone(), all & !(1 << i));
        fresh.push(atom);
    }
    Freshened { model, fresh }
}

/// The universe over the atoms of `phi`, sorted, followed by the fresh atoms in world order.
pub fn bridge_universe(m: &Freshened, phi: &Formula) -> Result<RuleUniverse> {
    let mut alphabet: Vec<Atom> = atoms_of(phi).into_iter().collect();
    alphabet.extend(m.fresh.iter().cloned());
    if alphabet.len() > MAX_BRIDGE_ATOMS {
        return Err(Error::TooLarge {
            what: "bridge alphabet atoms",
            limit: MAX_BRIDGE_ATOMS as u128,
            actual: alphabet.len() as u128,
        });
    }
    let k = BRIDGE_MAX_PREMISES.min(alphabet.len());
    RuleUniverse::new(alphabet, k)
}

/// The maximally-consistent base standing for world `w`.
///
/// Starts from `⇒a` for atoms true at `w`, `⇒q_v` for the other worlds, and
/// `a ⇒ q_w`, `q_w ⇒ a` for atoms false at `w`, then extends greedily while
/// keeping `q_w` underivable.
pub fn world_base(m: &Freshened, w: usize, u: &RuleUniverse) -> Result<Base> {
    let q_w = &m.fresh[w];
    let qi = u.atom_index(q_w).ok_or_else(|| Error::UnknownAtom(q_w.name().into()))?;
    let mut rules = Vec::new();
    for a in u.atoms() {
        if m.model.valuation(a) >> w & 1 == 1 {
            rules.push(u.rule_named(&[], a.name())?);
        } else {
            rules.push(u.rule_named(&[a.name()], q_w.name())?);
            rules.push(u.rule_named(&[q_w.name()], a.name())?);
        }
    }
    let seed = u.base_from_rules(&rules)?;
    if !seed.is_consistent() {
        return Err(Error::Precondition(format!("starting base for world {w} is inconsistent")));
    }
    u.extend_max_consistent_avoiding(seed, qi)
}

/// Closes the images of the model's edges under the rules of `logic`.
pub fn build_bridge_relation(u: &RuleUniverse, m: &Freshened, world_bases: &[Base], logic: ModalLogic) -> GeneratedRelation {
    let seeds: Vec<(Base, Base)> = m.model.edges().into_iter().map(|(a, b)| (world_bases[a], world_bases[b])).collect();
    close_relation(u, logic, &seeds, world_bases)
}

/// One cell of the agreement table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgreementCell {
    pub world: usize,
    pub formula: Formula,
    pub kripke: bool,
    pub bes: bool,
}

impl AgreementCell {
    pub fn agrees(&self) -> bool {
        self.kripke == self.bes
    }
}

/// The agreement table, with the evaluators used to fill it in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agreement {
    pub cells: Vec<AgreementCell>,
    /// The first evaluator fills the table; a second, when present, was run
    /// on every cell and matched it.
    pub evaluators: Vec<Strategy>,
}

/// Compares Kripke truth at `w` with support at `ℬ_w` for every world and every subformula of `phi`.
///
/// When the universe is small enough, both evaluators run on every cell and
/// must agree with each other; otherwise only the reduced one runs.
pub fn verify_agreement(m: &Freshened, world_bases: &[Base], r: &dyn Relation, phi: &Formula) -> Result<Agreement> {
    let subs = subformulas(phi);
    let mut main = Evaluator::for_relation(r)?;
    let mut second = match main.strategy() {
        Strategy::Literal => Some(Evaluator::Reduced(ReducedEvaluator::new(r))),
        Strategy::Reduced if r.universe().base_count() <= MAX_MATERIALIZED_BASES => {
            Some(Evaluator::Literal(LiteralEvaluator::new(r)?))
        }
        Strategy::Reduced => None,
    };
    let mut cells = Vec::with_capacity(subs.len() * world_bases.len());
    for (w, &b) in world_bases.iter().enumerate() {
        for psi in &subs {
            let bes = main.holds(b, psi)?;
            if let Some(e) = second.as_mut() {
                if e.holds(b, psi)? != bes {
                    return Err(Error::Precondition(format!("evaluators disagree on `{psi}` at world {w}")));
                }
            }
            cells.push(AgreementCell { world: w, formula: psi.clone(), kripke: m.model.eval(w, psi)?, bes });
        }
    }
    let mut evaluators = alloc::vec![main.strategy()];
    evaluators.extend(second.map(|e| e.strategy()));
    Ok(Agreement { cells, evaluators })
}

/// Everything the construction produced, with the checks run on it.
#[derive(Clone, Debug)]
pub struct BridgeReport {
    pub logic: ModalLogic,
    pub formula: Formula,
    pub countermodel: KripkeModel,
    /// World of the countermodel where the formula fails.
    pub world: usize,
    pub freshened: Freshened,
    pub universe: RuleUniverse,
    /// `world_bases[w]` is `ℬ_w`.
    pub world_bases: Vec<Base>,
    pub relation: GeneratedRelation,
    pub conditions: ConditionReport,
    pub agreement: Agreement,
    /// Whether the formula is supported at the base of the failing world.
    pub holds_at_world_base: bool,
}

impl BridgeReport {
    pub fn disagreements(&self) -> Vec<&AgreementCell> {
        self.agreement.cells.iter().filter(|c| !c.agrees()).collect()
    }

    /// The relation passes its checks, the table has no disagreements and the
    /// formula fails at the base of the failing world.
    pub fn success(&self) -> bool {
        self.conditions.pass() && self.disagreements().is_empty() && !self.holds_at_world_base
    }
}

/// Runs the whole construction on a given countermodel.
pub fn bridge_countermodel(logic: ModalLogic, phi: &Formula, model: &KripkeModel, world: usize) -> Result<BridgeReport> {
    if world >= model.world_count() {
        return Err(Error::InvalidModel(format!("no world with index {world}")));
    }
    let fresh = freshen_model(model, phi);
    let u = bridge_universe(&fresh, phi)?;
    let world_bases = (0..model.world_count()).map(|w| world_base(&fresh, w, &u)).collect::<Result<Vec<_>>>()?;
    let relation = build_bridge_relation(&u, &fresh, &world_bases, logic);
    let conditions = check_relation(&relation, logic);
    let agreement = verify_agreement(&fresh, &world_bases, &relation, phi)?;
    let holds_at_world_base = Evaluator::for_relation(&relation)?.holds(world_bases[world], phi)?;
    Ok(BridgeReport {
        logic,
        formula: phi.clone(),
        countermodel: model.clone(),
        world,
        freshened: fresh,
        universe: u,
        world_bases,
        relation,
        conditions,
        agreement,
        holds_at_world_base,
    })
}

/// Searches for a Kripke countermodel and carries it over to bases.
///
/// `None` when no model of `logic` with at most `max_worlds` worlds falsifies `phi`.
pub fn falsify_in_bes(logic: ModalLogic, phi: &Formula, max_worlds: usize) -> Result<Option<BridgeReport>> {
    match find_countermodel(logic, phi, max_worlds)? {
        None => Ok(None),
        Some((model, w)) => bridge_countermodel(logic, phi, &model, w).map(Some),
    }
}

/// Extra pairs tried by the euclidean repair search.
pub const EUCLID_REPAIR_PAIRS: usize = 8;
/// Relations examined by the euclidean repair search.
pub const EUCLID_REPAIR_NODES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EuclidStatus {
    /// The five seed pairs already give a witness.
    LiteralVerified,
    /// A witness was found after adding pairs.
    RepairedVerified,
    NoWitnessInBudget,
}

impl EuclidStatus {
    pub fn label(self) -> &'static str {
        match self {
            EuclidStatus::LiteralVerified => "literal construction verified",
            EuclidStatus::RepairedVerified => "repaired construction verified",
            EuclidStatus::NoWitnessInBudget => "no witness found in budget",
        }
    }
}

/// A euclidean relation where `◇p` holds at a maximally-consistent base `ℬ` but `□◇p` does not.
#[derive(Clone, Debug)]
pub struct EuclidReport {
    pub universe: RuleUniverse,
    /// `ℬ`, the base where the formulas are evaluated.
    pub b: Base,
    /// `{⇒p}`.
    pub c: Base,
    /// `{⇒q}`.
    pub d: Base,
    /// Two distinct maximally-consistent supersets of `c`.
    pub e: Base,
    pub f: Base,
    pub seeds: Vec<(Base, Base)>,
    /// Pairs added by the repair search, in the order they were added.
    pub added: Vec<(Base, Base)>,
    /// The last relation examined: the witness on success.
    pub relation: GeneratedRelation,
    pub conditions: ConditionReport,
    pub diamond_p: bool,
    pub box_diamond_p: bool,
    pub nodes_explored: usize,
    pub status: EuclidStatus,
}

impl EuclidReport {
    pub fn success(&self) -> bool {
        self.status != EuclidStatus::NoWitnessInBudget
    }
}

struct Attempt {
    relation: GeneratedRelation,
    conditions: ConditionReport,
    diamond_p: bool,
    box_diamond_p: bool,
}

impl Attempt {
    fn witness(&self) -> bool {
        self.conditions.pass() && self.diamond_p && !self.box_diamond_p
    }
}

struct Search<'a> {
    u: &'a RuleUniverse,
    b: Base,
    diamond_p: Formula,
    box_diamond_p: Formula,
    nodes: usize,
    last: Option<Attempt>,
}

impl Search<'_> {
    fn attempt(&mut self, seeds: &[(Base, Base)]) -> Result<Attempt> {
        self.nodes += 1;
        let rules = ClosureRules { inconsistent_total: true, downward: true, transitive: false, reflexive: false };
        let relation = GeneratedRelation::new(self.u, ModalLogic::KEuclidean, rules, seeds, &[]);
        let conditions = check_relation(&relation, ModalLogic::KEuclidean);
        let mut ev = LiteralEvaluator::new(&relation)?;
        let diamond_p = ev.holds(self.b, &self.diamond_p)?;
        let box_diamond_p = ev.holds(self.b, &self.box_diamond_p)?;
        Ok(Attempt { relation, conditions, diamond_p, box_diamond_p })
    }

    /// Depth-first: fix the first euclidean violation by adding the missing
    /// pair, otherwise the first (c) violation by giving some
    /// maximally-consistent strict superset the same successor.
    fn run(&mut self, seeds: &mut Vec<(Base, Base)>, added: &mut Vec<(Base, Base)>) -> Result<bool> {
        if self.nodes >= EUCLID_REPAIR_NODES {
            return Ok(false);
        }
        let a = self.attempt(seeds)?;
        let found = a.witness();
        let fixes = self.candidates(&a.conditions);
        self.last = Some(a);
        if found {
            return Ok(true);
        }
        if added.len() >= EUCLID_REPAIR_PAIRS {
            return Ok(false);
        }
        for pair in fixes {
            if seeds.contains(&pair) {
                continue;
            }
            seeds.push(pair);
            added.push(pair);
            if self.run(seeds, added)? {
                return Ok(true);
            }
            seeds.pop();
            added.pop();
        }
        Ok(false)
    }

    fn candidates(&self, report: &ConditionReport) -> Vec<(Base, Base)> {
        let first = |c: Condition| report.get(c).and_then(|v| v.violations.first()).map(|v| v.bases.clone());
        if let Some(v) = first(Condition::Euclidean) {
            return alloc::vec![(v[1], v[2])];
        }
        if let Some(v) = first(Condition::C) {
            return self.u.max_consistent_supersets(v[0]).into_iter().filter(|&m| m != v[0]).map(|m| (m, v[1])).collect();
        }
        Vec::new()
    }
}

/// Looks for a euclidean relation separating `◇p` from `□◇p`.
///
/// With `𝒞 = {⇒p}` and `𝒟 = {⇒q}`, `ℰ` and `ℱ` are the first two
/// maximally-consistent supersets of `𝒞` and `ℬ` the first
/// maximally-consistent base other than those. The pairs `(ℬ,𝒞)`, `(𝒞,𝒞)`,
/// `(𝒞,𝒟)`, `(ℰ,𝒟)` and `(ℱ,𝒞)` are closed under totality on inconsistent
/// bases and downward copying. If that relation is not a witness, pairs are
/// added by a bounded depth-first search.
pub fn euclidean_demo(u: &RuleUniverse) -> Result<EuclidReport> {
    for name in ["p", "q"] {
        u.atom_named(name)?;
    }
    if u.base_count() > MAX_MATERIALIZED_BASES {
        return Err(Error::TooLarge { what: "bases for the demonstration", limit: MAX_MATERIALIZED_BASES, actual: u.base_count() });
    }
    let c = u.base_from_rules(&[u.rule_named(&[], "p")?])?;
    let d = u.base_from_rules(&[u.rule_named(&[], "q")?])?;
    let above_c = u.max_consistent_supersets(c);
    let (e, f) = match above_c[..] {
        [e, f, ..] => (e, f),
        _ => return Err(Error::InvalidUniverse("fewer than two maximally-consistent supersets of {=> p}".into())),
    };
    let b = u
        .max_consistent_bases()
        .into_iter()
        .find(|&m| m != e && m != f)
        .ok_or_else(|| Error::InvalidUniverse("no third maximally-consistent base".into()))?;
    let p = Formula::atom("p");
    let diamond_p = Formula::diamond(p);
    let mut search =
        Search { u, b, box_diamond_p: Formula::boxed(diamond_p.clone()), diamond_p, nodes: 0, last: None };
    let seeds = alloc::vec![(b, c), (c, c), (c, d), (e, d), (f, c)];
    let mut work = seeds.clone();
    let mut added = Vec::new();
    let found = search.run(&mut work, &mut added)?;
    let status = match (found, added.is_empty()) {
        (true, true) => EuclidStatus::LiteralVerified,
        (true, false) => EuclidStatus::RepairedVerified,
        (false, _) => EuclidStatus::NoWitnessInBudget,
    };
    let last = search.last.take().expect("at least one attempt");
    Ok(EuclidReport {
        universe: u.clone(),
        b,
        c,
        d,
        e,
        f,
        seeds,
        added,
        relation: last.relation,
        conditions: last.conditions,
        diamond_p: last.diamond_p,
        box_diamond_p: last.box_diamond_p,
        nodes_explored: search.nodes,
        status,
    })
}

/// Plain-text rendering of the agreement table.
pub fn render_agreement(r: &BridgeReport) -> String {
    let mut out = String::new();
    for c in &r.agreement.cells {
        out.push_str(&format!(
            "{}\t{}\tkripke={}\tbes={}{}\n",
            r.countermodel.worlds()[c.world],
            c.formula,
            c.kripke,
            c.bes,
            if c.agrees() { "" } else { "\tDISAGREE" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::semantics::holds;
    use alloc::collections::BTreeMap;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn names(atoms: &[Atom]) -> Vec<&str> {
        atoms.iter().map(|a| a.name()).collect()
    }

    fn two_worlds() -> KripkeModel {
        let v: BTreeMap<Atom, u64> = [(Atom::new("p").unwrap(), 0b10)].into_iter().collect();
        KripkeModel::with_default_names(2, &[(0, 1)], v).unwrap()
    }

    #[test]
    fn freshening_adds_one_atom_per_world() {
        let m = two_worlds();
        let fr = freshen_model(&m, &f("[]p"));
        assert_eq!(names(&fr.fresh), ["q_w0", "q_w1"]);
        assert_eq!(fr.model.valuation(&fr.fresh[0]), 0b10);
        assert_eq!(fr.model.valuation(&fr.fresh[1]), 0b01);
        for phi in ["[]p", "<>p -> p", "p"] {
            for w in 0..2 {
                assert_eq!(fr.model.eval(w, &f(phi)).unwrap(), m.eval(w, &f(phi)).unwrap());
            }
        }
    }

    #[test]
    fn fresh_names_avoid_clashes() {
        let m = KripkeModel::new(alloc::vec!["A".into(), "w1".into()], &[], BTreeMap::new()).unwrap();
        let fr = freshen_model(&m, &f("q_w0 -> q_w1"));
        assert_eq!(names(&fr.fresh), ["q_w0_", "q_w1_"]);
    }

    #[test]
    fn bridge_universe_sizes() {
        let fr = freshen_model(&two_worlds(), &f("[]p"));
        let u = bridge_universe(&fr, &f("[]p")).unwrap();
        assert_eq!(names(u.atoms()), ["p", "q_w0", "q_w1"]);
        assert_eq!(u.rule_count(), 21);
        let one = KripkeModel::with_default_names(1, &[], BTreeMap::new()).unwrap();
        let u = bridge_universe(&freshen_model(&one, &f("p")), &f("p")).unwrap();
        assert_eq!(names(u.atoms()), ["p", "q_w0"]);
        let three = KripkeModel::with_default_names(3, &[], BTreeMap::new()).unwrap();
        assert!(matches!(bridge_universe(&freshen_model(&three, &f("p -> q")), &f("p -> q")), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn world_bases_derive_exactly_the_true_atoms() {
        let fr = freshen_model(&two_worlds(), &f("[]p"));
        let u = bridge_universe(&fr, &f("[]p")).unwrap();
        let wb: Vec<Base> = (0..2).map(|w| world_base(&fr, w, &u).unwrap()).collect();
        assert_ne!(wb[0], wb[1]);
        for (w, &b) in wb.iter().enumerate() {
            assert!(u.is_max_consistent(b));
            for (i, a) in u.atoms().iter().enumerate() {
                assert_eq!(u.derives(b, i), fr.model.valuation(a) >> w & 1 == 1, "{a} at w{w}");
            }
        }
    }

    fn assert_success(r: &BridgeReport) {
        assert!(r.conditions.pass(), "{:?}", r.conditions.failed());
        assert!(r.disagreements().is_empty(), "{}", render_agreement(r));
        assert!(!r.holds_at_world_base);
        assert!(r.success());
        // Re-evaluated from scratch.
        assert!(!holds(&r.relation, r.world_bases[r.world], &r.formula).unwrap());
    }

    #[test]
    fn reflexivity_fails_under_k() {
        let r = falsify_in_bes(ModalLogic::K, &f("[]p -> p"), 2).unwrap().unwrap();
        assert_eq!(names(r.universe.atoms()), ["p", "q_w0"]);
        assert_eq!(r.agreement.evaluators, [Strategy::Literal, Strategy::Reduced]);
        assert_eq!(r.agreement.cells.len(), 3);
        assert_success(&r);
    }

    #[test]
    fn corpus_succeeds() {
        for (logic, phi) in [
            (ModalLogic::K, "[]p -> [][]p"),
            (ModalLogic::KT, "[]p -> [][]p"),
            (ModalLogic::K, "[](p -> q) -> []q"),
            (ModalLogic::K4, "<>p -> []<>p"),
            (ModalLogic::S4, "p -> []<>p"),
        ] {
            let r = falsify_in_bes(logic, &f(phi), 3).unwrap().unwrap_or_else(|| panic!("{logic} {phi}"));
            assert_success(&r);
        }
    }

    #[test]
    fn valid_formulas_have_no_report() {
        assert!(falsify_in_bes(ModalLogic::KT, &f("[]p -> p"), 3).unwrap().is_none());
        assert!(falsify_in_bes(ModalLogic::K, &f("p -> q -> p"), 3).unwrap().is_none());
    }

    #[test]
    fn explicit_two_world_model() {
        let r = bridge_countermodel(ModalLogic::K, &f("[]p -> p"), &two_worlds(), 0).unwrap();
        assert_eq!(r.agreement.cells.len(), 6);
        assert_eq!(r.agreement.evaluators, [Strategy::Reduced]);
        assert_success(&r);
        assert!(bridge_countermodel(ModalLogic::K, &f("p"), &two_worlds(), 2).is_err());
    }

    #[test]
    fn euclidean_demo_finds_a_witness() {
        let u = RuleUniverse::from_names(&["p", "q", "r"], 1).unwrap();
        let r = euclidean_demo(&u).unwrap();
        assert_eq!(r.status, EuclidStatus::RepairedVerified);
        assert!(r.conditions.pass());
        assert!(r.diamond_p && !r.box_diamond_p);
        let pdiamond = f("<>p");
        assert!(holds(&r.relation, r.b, &pdiamond).unwrap());
        assert!(!holds(&r.relation, r.b, &f("[]<>p")).unwrap());
        // (D, C) already follows from (F, C) by downward copying, since D ⊆ F.
        assert!(r.relation.relates(r.d, r.c));
        assert_eq!(r.added, [(r.d, r.d), (u.max_consistent_for(0b010), r.d)]);
    }

    #[test]
    fn euclidean_demo_needs_p_and_q() {
        assert!(euclidean_demo(&RuleUniverse::from_names(&["p", "r"], 1).unwrap()).is_err());
        assert!(euclidean_demo(&RuleUniverse::from_names(&["p", "q", "r", "s"], 1).unwrap()).is_err());
    }
}
