//! Support of formulas at bases.
//!
//! Two evaluators share one interface.
//!
//! [`LiteralEvaluator`] follows the support clauses directly: it computes, for
//! every base of the universe, whether a formula is supported there. The
//! clauses for `→`, `□` and `◇` all quantify over supersets, so each reduces to
//! "every superset lies in a set `X`", which is filled in from the top of the
//! lattice down.
//!
//! [`ReducedEvaluator`] works on maximally-consistent bases only. For relations
//! meeting the modal conditions, a formula holds at a consistent base exactly
//! when it holds at every maximally-consistent superset, inconsistent bases
//! support everything, and at a maximally-consistent base the connectives
//! behave classically with `□` and `◇` read off the successors. That keeps
//! universes with millions of bases tractable. On small universes both are
//! cross-checked against each other in the tests.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::base::{Base, RuleUniverse};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::relation::{
    enumerate_modal_relations, sample_modal_relation, ExtensionalRelation, GeneratedRelation, ModalLogic, Relation,
    SuccessorProfile, MAX_MATERIALIZED_BASES,
};

/// Largest universe the literal evaluator handles without a relation.
pub const MAX_CLASSICAL_LITERAL_BASES: u128 = 1 << 16;

/// Support evaluation over every base of a universe.
#[derive(Clone)]
pub struct LiteralEvaluator {
    universe: RuleUniverse,
    relation: Option<ExtensionalRelation>,
    n: usize,
    inconsistent: FixedBitSet,
    memo: BTreeMap<Formula, FixedBitSet>,
}

impl LiteralEvaluator {
    /// Evaluator for modal-free formulas.
    pub fn classical(u: &RuleUniverse) -> Result<LiteralEvaluator> {
        if u.base_count() > MAX_CLASSICAL_LITERAL_BASES {
            return Err(Error::TooLarge { what: "bases to evaluate over", limit: MAX_CLASSICAL_LITERAL_BASES, actual: u.base_count() });
        }
        Ok(LiteralEvaluator::build(u, None))
    }

    pub fn new(r: &dyn Relation) -> Result<LiteralEvaluator> {
        let ext = r.materialize()?;
        Ok(LiteralEvaluator::build(r.universe(), Some(ext)))
    }

    fn build(u: &RuleUniverse, relation: Option<ExtensionalRelation>) -> LiteralEvaluator {
        let n = u.base_count() as usize;
        let mut inconsistent = FixedBitSet::with_capacity(n);
        for m in 0..n {
            if !u.base(m as u64).is_consistent() {
                inconsistent.insert(m);
            }
        }
        LiteralEvaluator { universe: u.clone(), relation, n, inconsistent, memo: BTreeMap::new() }
    }

    pub fn universe(&self) -> &RuleUniverse {
        &self.universe
    }

    /// `{B : every C ⊇ B lies in x}`.
    fn all_above(&self, x: &FixedBitSet) -> FixedBitSet {
        let rules = self.universe.rule_count();
        let mut out = x.clone();
        for b in (0..self.n).rev() {
            if !out.contains(b) {
                continue;
            }
            for i in 0..rules {
                let c = b | 1 << i;
                if c != b && !out.contains(c) {
                    out.set(b, false);
                    break;
                }
            }
        }
        out
    }

    /// The set of bases supporting `f`.
    pub fn support(&mut self, f: &Formula) -> Result<&FixedBitSet> {
        if !self.memo.contains_key(f) {
            let set = self.compute(f)?;
            self.memo.insert(f.clone(), set);
        }
        Ok(&self.memo[f])
    }

    fn compute(&mut self, f: &Formula) -> Result<FixedBitSet> {
        let n = self.n;
        match f {
            Formula::Atom(a) => {
                let idx = self.universe.atom_index(a).ok_or_else(|| Error::UnknownAtom(a.name().into()))?;
                let mut set = FixedBitSet::with_capacity(n);
                for m in 0..n {
                    if self.universe.closure_of(m as u64) >> idx & 1 == 1 {
                        set.insert(m);
                    }
                }
                Ok(set)
            }
            Formula::Bottom => Ok(self.inconsistent.clone()),
            Formula::Implies(a, b) => {
                let mut x = self.support(a)?.clone();
                x.toggle_range(..);
                x.union_with(self.support(b)?);
                Ok(self.all_above(&x))
            }
            Formula::Box(a) | Formula::Diamond(a) => {
                let sat = self.support(a)?.clone();
                let rel = self
                    .relation
                    .as_ref()
                    .ok_or_else(|| Error::Precondition(format!("modal formula `{f}` needs a relation")))?;
                let is_box = matches!(f, Formula::Box(_));
                let mut x = FixedBitSet::with_capacity(n);
                for m in 0..n {
                    let row = rel.row(self.universe.base(m as u64));
                    let good = if is_box { row.is_subset(&sat) } else { !row.is_disjoint(&sat) };
                    if good {
                        x.insert(m);
                    }
                }
                Ok(self.all_above(&x))
            }
        }
    }

    pub fn holds(&mut self, b: Base, f: &Formula) -> Result<bool> {
        Ok(self.support(f)?.contains(b.members() as usize))
    }

    /// `Γ ⊩_B φ`: every superset of `B` supporting all of `Γ` supports `φ`.
    pub fn entails(&mut self, b: Base, gamma: &[Formula], f: &Formula) -> Result<bool> {
        let mut x = FixedBitSet::with_capacity(self.n);
        x.insert_range(..);
        for g in gamma {
            x.intersect_with(self.support(g)?);
        }
        x.difference_with(self.support(f)?);
        Ok(self.universe.supersets(b)?.all(|c| !x.contains(c.members() as usize)))
    }

    /// Least base (by member mask) not supporting `f`.
    pub fn first_failure(&mut self, f: &Formula) -> Result<Option<Base>> {
        let n = self.n;
        let set = self.support(f)?;
        Ok((0..n).find(|&m| !set.contains(m)).map(|m| self.universe.base(m as u64)))
    }
}

/// Support evaluation through maximally-consistent bases.
///
/// Exact for relations satisfying the modal conditions.
#[derive(Clone)]
pub struct ReducedEvaluator {
    universe: RuleUniverse,
    profiles: Option<Vec<SuccessorProfile>>,
    memo: BTreeMap<Formula, u64>,
}

impl ReducedEvaluator {
    pub fn classical(u: &RuleUniverse) -> ReducedEvaluator {
        ReducedEvaluator { universe: u.clone(), profiles: None, memo: BTreeMap::new() }
    }

    pub fn new(r: &dyn Relation) -> ReducedEvaluator {
        let u = r.universe();
        let profiles = u.max_consistent_bases().into_iter().map(|m| r.successors(m).profile()).collect();
        ReducedEvaluator { universe: u.clone(), profiles: Some(profiles), memo: BTreeMap::new() }
    }

    pub fn universe(&self) -> &RuleUniverse {
        &self.universe
    }

    fn all_maxes(&self) -> u64 {
        let k = self.universe.max_consistent_count();
        if k == 64 {
            u64::MAX
        } else {
            (1u64 << k) - 1
        }
    }

    /// Closure sets of the maximally-consistent bases supporting `f`.
    pub fn support_max(&mut self, f: &Formula) -> Result<u64> {
        if let Some(&s) = self.memo.get(f) {
            return Ok(s);
        }
        let all = self.all_maxes();
        let set = match f {
            Formula::Atom(a) => {
                let idx = self.universe.atom_index(a).ok_or_else(|| Error::UnknownAtom(a.name().into()))?;
                (0..self.universe.max_consistent_count()).filter(|s| s >> idx & 1 == 1).fold(0u64, |acc, s| acc | 1 << s)
            }
            Formula::Bottom => 0,
            Formula::Implies(a, b) => {
                let sa = self.support_max(a)?;
                let sb = self.support_max(b)?;
                (!sa | sb) & all
            }
            Formula::Box(a) | Formula::Diamond(a) => {
                let sat = self.support_max(a)?;
                let profiles = self
                    .profiles
                    .as_ref()
                    .ok_or_else(|| Error::Precondition(format!("modal formula `{f}` needs a relation")))?;
                let is_box = matches!(f, Formula::Box(_));
                profiles.iter().enumerate().fold(0u64, |acc, (s, p)| {
                    let good = if is_box { p.union & !sat == 0 } else { p.minimal.iter().any(|&m| m & !sat == 0) };
                    if good {
                        acc | 1 << s
                    } else {
                        acc
                    }
                })
            }
        };
        self.memo.insert(f.clone(), set);
        Ok(set)
    }

    pub fn holds(&mut self, b: Base, f: &Formula) -> Result<bool> {
        if !b.is_consistent() {
            return Ok(true);
        }
        let sat = self.support_max(f)?;
        Ok(self.universe.maxes_above(b.members()) & !sat == 0)
    }

    pub fn entails(&mut self, b: Base, gamma: &[Formula], f: &Formula) -> Result<bool> {
        let curried = gamma.iter().rev().fold(f.clone(), |acc, g| Formula::implies(g.clone(), acc));
        self.holds(b, &curried)
    }

    /// A maximally-consistent base not supporting `f`, if any.
    pub fn first_failure(&mut self, f: &Formula) -> Result<Option<Base>> {
        let sat = self.support_max(f)?;
        let missing = self.all_maxes() & !sat;
        Ok((missing != 0).then(|| self.universe.max_consistent_for(missing.trailing_zeros())))
    }
}

/// Which evaluator is in use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Literal,
    Reduced,
}

/// Picks the literal evaluator when the relation can be materialized, the reduced one otherwise.
#[derive(Clone)]
pub enum Evaluator {
    Literal(LiteralEvaluator),
    Reduced(ReducedEvaluator),
}

impl Evaluator {
    pub fn for_relation(r: &dyn Relation) -> Result<Evaluator> {
        if r.universe().base_count() <= MAX_MATERIALIZED_BASES {
            Ok(Evaluator::Literal(LiteralEvaluator::new(r)?))
        } else {
            Ok(Evaluator::Reduced(ReducedEvaluator::new(r)))
        }
    }

    pub fn classical(u: &RuleUniverse) -> Evaluator {
        match LiteralEvaluator::classical(u) {
            Ok(l) => Evaluator::Literal(l),
            Err(_) => Evaluator::Reduced(ReducedEvaluator::classical(u)),
        }
    }

    pub fn strategy(&self) -> Strategy {
        match self {
            Evaluator::Literal(_) => Strategy::Literal,
            Evaluator::Reduced(_) => Strategy::Reduced,
        }
    }

    pub fn universe(&self) -> &RuleUniverse {
        match self {
            Evaluator::Literal(e) => e.universe(),
            Evaluator::Reduced(e) => e.universe(),
        }
    }

    pub fn holds(&mut self, b: Base, f: &Formula) -> Result<bool> {
        match self {
            Evaluator::Literal(e) => e.holds(b, f),
            Evaluator::Reduced(e) => e.holds(b, f),
        }
    }

    pub fn entails(&mut self, b: Base, gamma: &[Formula], f: &Formula) -> Result<bool> {
        match self {
            Evaluator::Literal(e) => e.entails(b, gamma, f),
            Evaluator::Reduced(e) => e.entails(b, gamma, f),
        }
    }

    /// Some base of the universe not supporting `f`, if any.
    pub fn first_failure(&mut self, f: &Formula) -> Result<Option<Base>> {
        match self {
            Evaluator::Literal(e) => e.first_failure(f),
            Evaluator::Reduced(e) => e.first_failure(f),
        }
    }
}

/// Support of a modal-free formula at `b`.
pub fn holds_classical(u: &RuleUniverse, b: Base, f: &Formula) -> Result<bool> {
    if !f.is_modal_free() {
        return Err(Error::Precondition(format!("`{f}` is not modal-free")));
    }
    Evaluator::classical(u).holds(b, f)
}

/// Support of `f` at `b` under `r`.
pub fn holds(r: &dyn Relation, b: Base, f: &Formula) -> Result<bool> {
    Evaluator::for_relation(r)?.holds(b, f)
}

/// `Γ ⊩_B φ` under `r`.
pub fn entails(r: &dyn Relation, b: Base, gamma: &[Formula], f: &Formula) -> Result<bool> {
    Evaluator::for_relation(r)?.entails(b, gamma, f)
}

/// A relation that produced a countermodel.
#[derive(Clone, Debug)]
pub enum RelationWitness {
    Extensional(ExtensionalRelation),
    Generated(GeneratedRelation),
}

impl RelationWitness {
    pub fn as_relation(&self) -> &dyn Relation {
        match self {
            RelationWitness::Extensional(r) => r,
            RelationWitness::Generated(r) => r,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    /// Every relation was checked.
    Valid { relations: usize },
    Invalid { base: Base, relation: RelationWitness },
    /// Sampling found nothing; this is not a proof of validity.
    NoCounterexampleFound { samples: usize },
}

impl Verdict {
    pub fn is_invalid(&self) -> bool {
        matches!(self, Verdict::Invalid { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Valid { .. } => "valid-over-universe",
            Verdict::Invalid { .. } => "invalid",
            Verdict::NoCounterexampleFound { .. } => "no-counterexample-found",
        }
    }
}

/// Validity over every modal relation of `logic` on a universe of at most four bases.
pub fn valid_exhaustive(u: &RuleUniverse, logic: ModalLogic, f: &Formula) -> Result<Verdict> {
    let relations = enumerate_modal_relations(u, logic)?;
    valid_over(&relations, f)
}

/// Validity over a given list of relations.
pub fn valid_over(relations: &[ExtensionalRelation], f: &Formula) -> Result<Verdict> {
    for r in relations {
        if let Some(base) = LiteralEvaluator::new(r)?.first_failure(f)? {
            return Ok(Verdict::Invalid { base, relation: RelationWitness::Extensional(r.clone()) });
        }
    }
    Ok(Verdict::Valid { relations: relations.len() })
}

/// Searches `samples` pseudo-random modal relations of `logic` for a countermodel.
pub fn valid_sampled(u: &RuleUniverse, logic: ModalLogic, f: &Formula, samples: usize, seed: u64) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let r = sample_modal_relation(u, logic, rng.gen())?;
        if let Some(base) = Evaluator::for_relation(&r)?.first_failure(f)? {
            return Ok(Verdict::Invalid { base, relation: RelationWitness::Generated(r) });
        }
    }
    Ok(Verdict::NoCounterexampleFound { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{enumerate_formulas, parse, Atom};
    use crate::relation::{close_relation, sample_modal_relation};
    use proptest::prelude::*;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    /// The support clauses transcribed with explicit quantifiers over bases.
    fn naive(u: &RuleUniverse, r: Option<&ExtensionalRelation>, b: Base, f: &Formula) -> bool {
        let sups = || u.supersets(b).unwrap();
        match f {
            Formula::Atom(a) => u.derives(b, u.atom_index(a).unwrap()),
            Formula::Bottom => !b.is_consistent(),
            Formula::Implies(x, y) => sups().all(|c| !naive(u, r, c, x) || naive(u, r, c, y)),
            Formula::Box(x) => sups().all(|c| {
                r.unwrap().row(c).ones().all(|d| naive(u, r, u.base(d as u64), x))
            }),
            Formula::Diamond(x) => sups().all(|c| {
                r.unwrap().row(c).ones().any(|d| naive(u, r, u.base(d as u64), x))
            }),
        }
    }

    #[test]
    fn atoms_and_bottom() {
        let u = RuleUniverse::from_names(&["p", "q"], 2).unwrap();
        let b = u.base_from_rules(&[u.rule_named(&[], "p").unwrap()]).unwrap();
        assert!(holds_classical(&u, b, &f("p")).unwrap());
        assert!(!holds_classical(&u, b, &f("q")).unwrap());
        assert!(holds_classical(&u, u.full_base(), &f("bot")).unwrap());
        assert!(!holds_classical(&u, b, &f("bot")).unwrap());
        assert!(holds_classical(&u, b, &f("[]p")).is_err());
        assert!(holds_classical(&u, b, &f("r")).is_err());
    }

    #[test]
    fn double_negation_elimination_holds_everywhere_classically() {
        let u = RuleUniverse::from_names(&["p", "q"], 2).unwrap();
        let mut e = LiteralEvaluator::classical(&u).unwrap();
        assert_eq!(e.first_failure(&f("~~p -> p")).unwrap(), None);
        assert_eq!(e.first_failure(&f("p -> q -> p")).unwrap(), None);
        assert!(e.first_failure(&f("p")).unwrap().is_some());
    }

    #[test]
    fn classical_literal_matches_naive_clauses() {
        let u = RuleUniverse::from_names(&["p", "q"], 1).unwrap();
        let atoms = [Atom::new("p").unwrap(), Atom::new("q").unwrap()];
        let mut e = LiteralEvaluator::classical(&u).unwrap();
        for phi in enumerate_formulas(&atoms, 2, false).step_by(7) {
            for m in 0..64 {
                let b = u.base(m);
                assert_eq!(e.holds(b, &phi).unwrap(), naive(&u, None, b, &phi), "{phi} at {m}");
            }
        }
    }

    #[test]
    fn modal_literal_matches_naive_clauses() {
        let u = RuleUniverse::from_names(&["p", "q"], 1).unwrap();
        let atoms = [Atom::new("p").unwrap(), Atom::new("q").unwrap()];
        for (i, logic) in ModalLogic::NORMAL.into_iter().enumerate() {
            let r = sample_modal_relation(&u, logic, i as u64).unwrap().materialize().unwrap();
            let mut e = LiteralEvaluator::new(&r).unwrap();
            for phi in enumerate_formulas(&atoms, 2, true).step_by(23) {
                for m in (0..64).step_by(5) {
                    let b = u.base(m);
                    assert_eq!(e.holds(b, &phi).unwrap(), naive(&u, Some(&r), b, &phi), "{phi} at {m}");
                }
            }
        }
    }

    #[test]
    fn modal_clauses_on_arbitrary_relations_match_naive() {
        // The literal evaluator must follow the clauses even when the modal conditions fail.
        let u = RuleUniverse::from_names(&["p"], 1).unwrap();
        let atoms = [Atom::new("p").unwrap()];
        for mask in (0u32..1 << 16).step_by(611) {
            let mut r = ExtensionalRelation::empty(&u).unwrap();
            for i in 0..16u64 {
                if mask >> i & 1 == 1 {
                    r.insert(u.base(i / 4), u.base(i % 4));
                }
            }
            let mut e = LiteralEvaluator::new(&r).unwrap();
            for phi in enumerate_formulas(&atoms, 2, true) {
                for m in 0..4 {
                    assert_eq!(e.holds(u.base(m), &phi).unwrap(), naive(&u, Some(&r), u.base(m), &phi));
                }
            }
        }
    }

    #[test]
    fn entailment_by_definition() {
        let u = RuleUniverse::from_names(&["p", "q"], 2).unwrap();
        let mut e = LiteralEvaluator::classical(&u).unwrap();
        let b = u.empty_base();
        assert!(e.entails(b, &[f("p"), f("p -> q")], &f("q")).unwrap());
        assert!(!e.entails(b, &[f("p")], &f("q")).unwrap());
        assert!(e.entails(b, &[], &f("p -> p")).unwrap());
    }

    #[test]
    fn validity_on_the_smallest_universe() {
        let u = RuleUniverse::from_names(&["p"], 1).unwrap();
        assert!(matches!(valid_exhaustive(&u, ModalLogic::K, &f("[](p -> p)")).unwrap(), Verdict::Valid { relations: 36 }));
        assert!(valid_exhaustive(&u, ModalLogic::K, &f("[]p -> p")).unwrap().is_invalid());
        assert!(!valid_exhaustive(&u, ModalLogic::KT, &f("[]p -> p")).unwrap().is_invalid());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reduced_matches_literal(seed in any::<u64>(), logic in 0usize..4, start in 0u128..(122 - 16)) {
            let u = RuleUniverse::from_names(&["p", "q"], 2).unwrap();
            let r = sample_modal_relation(&u, ModalLogic::NORMAL[logic], seed).unwrap();
            let mut lit = LiteralEvaluator::new(&r).unwrap();
            let mut red = ReducedEvaluator::new(&r);
            let atoms = [Atom::new("p").unwrap(), Atom::new("q").unwrap()];
            let space = crate::formula::FormulaSpace::new(&atoms, 2, true);
            for i in 0..16 {
                let phi = space.get((start + i) * 3).unwrap();
                for m in 0..256 {
                    let b = u.base(m);
                    prop_assert_eq!(lit.holds(b, &phi).unwrap(), red.holds(b, &phi).unwrap(), "{} at {}", phi, m);
                }
            }
        }

        #[test]
        fn reduced_matches_literal_classically(members in 0u64..(1 << 12), idx in 0u128..404) {
            let u = RuleUniverse::from_names(&["p", "q", "r"], 1).unwrap();
            let atoms = [Atom::new("p").unwrap(), Atom::new("q").unwrap(), Atom::new("r").unwrap()];
            let phi = crate::formula::FormulaSpace::new(&atoms, 2, false).get(idx).unwrap();
            let b = u.base(members);
            let lit = LiteralEvaluator::classical(&u).unwrap().holds(b, &phi).unwrap();
            prop_assert_eq!(lit, ReducedEvaluator::classical(&u).holds(b, &phi).unwrap());
        }
    }

    #[test]
    fn minimal_relations_agree_across_evaluators() {
        let u = RuleUniverse::from_names(&["p", "q"], 1).unwrap();
        let atoms = [Atom::new("p").unwrap(), Atom::new("q").unwrap()];
        for logic in ModalLogic::NORMAL {
            let r = close_relation(&u, logic, &[], &[]);
            let mut lit = LiteralEvaluator::new(&r).unwrap();
            let mut red = ReducedEvaluator::new(&r);
            for phi in enumerate_formulas(&atoms, 2, true).step_by(11) {
                for m in 0..64 {
                    assert_eq!(lit.holds(u.base(m), &phi).unwrap(), red.holds(u.base(m), &phi).unwrap(), "{phi} {logic}");
                }
            }
        }
    }
}
