//! Atomic rules, bases and their closure.
//!
//! A rule universe fixes a finite alphabet and a bound on premise-set size and
//! lists every rule `L ⇒ c` with `|L|` within that bound. A base is a subset of
//! the universe, stored as a 64-bit membership mask.
//!
//! Maximally-consistent bases have a closed form. For every proper atom set `S`
//! let `M_S` be all rules except those `L ⇒ c` with `L ⊆ S` and `c ∉ S`. Then
//! `M_S` is consistent with closure `S`, any extra rule makes it inconsistent,
//! and every maximally-consistent base is one of them. A base `B` lies below
//! `M_S` exactly when `S` is closed under the rules of `B`. That makes the
//! maximally-consistent supersets of any base cheap to list.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::formula::Atom;

/// Largest alphabet a universe may have.
pub const MAX_ATOMS: usize = 6;
/// Largest number of rules a universe may have.
pub const MAX_RULES: usize = 64;
/// Largest number of free rules a superset enumeration may range over.
pub const MAX_ENUMERATED_RULES: usize = 24;

/// A rule `premises ⇒ conclusion`, with atoms given by alphabet index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaseRule {
    /// Bitmask over alphabet indices.
    pub premises: u32,
    pub conclusion: u8,
}

/// The finite set of rules available to bases over one alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleUniverse {
    atoms: Vec<Atom>,
    max_premises: usize,
    rules: Vec<BaseRule>,
    /// For each proper atom set `S`, the rules `L ⇒ c` with `L ⊆ S`, `c ∉ S`.
    violators: Vec<u64>,
}

/// A base of a fixed universe together with its cached closure.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Base {
    members: u64,
    closure: u32,
    consistent: bool,
}

impl Base {
    pub fn members(self) -> u64 {
        self.members
    }

    /// Atoms derivable from the base, as a mask over alphabet indices.
    pub fn closure(self) -> u32 {
        self.closure
    }

    pub fn is_consistent(self) -> bool {
        self.consistent
    }

    pub fn contains_rule(self, index: usize) -> bool {
        self.members >> index & 1 == 1
    }

    pub fn is_subset_of(self, other: Base) -> bool {
        self.members & !other.members == 0
    }

    pub fn rule_count(self) -> usize {
        self.members.count_ones() as usize
    }

    /// Rule indices in ascending order.
    pub fn rule_indices(self) -> impl Iterator<Item = usize> {
        BitIter(self.members)
    }
}

impl fmt::Debug for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Base({:#x})", self.members)
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

/// Indices of set bits, ascending.
pub fn bits(mask: u64) -> impl Iterator<Item = usize> {
    BitIter(mask)
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

impl RuleUniverse {
    /// Builds the universe of rules over `atoms` with at most `max_premises` premises.
    ///
    /// Rules are ordered by conclusion index, then by premise mask.
    pub fn new(atoms: Vec<Atom>, max_premises: usize) -> Result<RuleUniverse> {
        if atoms.is_empty() {
            return Err(Error::InvalidUniverse("the alphabet is empty".into()));
        }
        if max_premises == 0 {
            return Err(Error::InvalidUniverse("max_premises must be at least 1".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].contains(a) {
                return Err(Error::InvalidUniverse(format!("atom `{a}` listed twice")));
            }
        }
        let n = atoms.len();
        if n > MAX_ATOMS {
            return Err(Error::TooLarge { what: "alphabet size", limit: MAX_ATOMS as u128, actual: n as u128 });
        }
        let m = max_premises.min(n);
        let count = n as u128 * (0..=m).map(|k| binomial(n, k)).sum::<u128>();
        if count > MAX_RULES as u128 {
            return Err(Error::TooLarge { what: "rule count", limit: MAX_RULES as u128, actual: count });
        }
        let mut rules = Vec::with_capacity(count as usize);
        for c in 0..n {
            for prem in 0u32..(1 << n) {
                if prem.count_ones() as usize <= m {
                    rules.push(BaseRule { premises: prem, conclusion: c as u8 });
                }
            }
        }
        let full = (1u32 << n) - 1;
        let violators = (0..full)
            .map(|s| {
                rules.iter().enumerate().fold(0u64, |acc, (i, r)| {
                    if r.premises & !s == 0 && s >> r.conclusion & 1 == 0 {
                        acc | 1 << i
                    } else {
                        acc
                    }
                })
            })
            .collect();
        Ok(RuleUniverse { atoms, max_premises, rules, violators })
    }

    /// Parses atom names, then builds the universe.
    pub fn from_names(names: &[&str], max_premises: usize) -> Result<RuleUniverse> {
        let atoms = names.iter().map(|n| Atom::new(n)).collect::<Result<Vec<_>, _>>()?;
        RuleUniverse::new(atoms, max_premises)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn max_premises(&self) -> usize {
        self.max_premises
    }

    pub fn atom_index(&self, atom: &Atom) -> Option<usize> {
        self.atoms.iter().position(|a| a == atom)
    }

    pub fn atom_named(&self, name: &str) -> Result<usize> {
        self.atoms.iter().position(|a| a.name() == name).ok_or_else(|| Error::UnknownAtom(name.into()))
    }

    /// Mask of every alphabet atom.
    pub fn all_atoms(&self) -> u32 {
        (1u32 << self.atoms.len()) - 1
    }

    pub fn rules(&self) -> &[BaseRule] {
        &self.rules
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn rule(&self, index: usize) -> BaseRule {
        self.rules[index]
    }

    pub fn rule_index(&self, rule: BaseRule) -> Option<usize> {
        self.rules.iter().position(|r| *r == rule)
    }

    /// Number of bases, `2^rule_count`.
    pub fn base_count(&self) -> u128 {
        1u128 << self.rules.len()
    }

    /// Mask with every rule of the universe.
    pub fn all_rules(&self) -> u64 {
        if self.rules.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.rules.len()) - 1
        }
    }

    /// Forward-chaining fixpoint of the rules in `members`.
    pub fn closure_of(&self, members: u64) -> u32 {
        let mut derived = 0u32;
        loop {
            let before = derived;
            for i in bits(members) {
                let r = self.rules[i];
                if r.premises & !derived == 0 {
                    derived |= 1 << r.conclusion;
                }
            }
            if derived == before {
                return derived;
            }
        }
    }

    /// The base with the given members. Bits beyond the universe are dropped.
    pub fn base(&self, members: u64) -> Base {
        let members = members & self.all_rules();
        let closure = self.closure_of(members);
        Base { members, closure, consistent: closure != self.all_atoms() }
    }

    pub fn empty_base(&self) -> Base {
        self.base(0)
    }

    pub fn full_base(&self) -> Base {
        self.base(self.all_rules())
    }

    pub fn base_from_rules(&self, rules: &[BaseRule]) -> Result<Base> {
        let mut members = 0u64;
        for r in rules {
            let i = self
                .rule_index(*r)
                .ok_or_else(|| Error::Precondition(format!("rule {} is not in the universe", self.show_rule(*r))))?;
            members |= 1 << i;
        }
        Ok(self.base(members))
    }

    /// Shorthand for the rule `premises ⇒ conclusion` given by atom names.
    pub fn rule_named(&self, premises: &[&str], conclusion: &str) -> Result<BaseRule> {
        let mut mask = 0u32;
        for p in premises {
            mask |= 1 << self.atom_named(p)?;
        }
        let rule = BaseRule { premises: mask, conclusion: self.atom_named(conclusion)? as u8 };
        if self.rule_index(rule).is_none() {
            return Err(Error::Precondition(format!("rule {} is not in the universe", self.show_rule(rule))));
        }
        Ok(rule)
    }

    pub fn with_rule(&self, b: Base, index: usize) -> Base {
        self.base(b.members | 1 << index)
    }

    pub fn without_rule(&self, b: Base, index: usize) -> Base {
        self.base(b.members & !(1 << index))
    }

    pub fn union(&self, a: Base, b: Base) -> Base {
        self.base(a.members | b.members)
    }

    /// True if the atom at `index` is derivable from `b`.
    pub fn derives(&self, b: Base, index: usize) -> bool {
        b.closure >> index & 1 == 1
    }

    /// All supersets of `b`, starting with `b` itself, in ascending order of added rules.
    pub fn supersets(&self, b: Base) -> Result<Supersets<'_>> {
        let free = self.all_rules() & !b.members;
        let n = free.count_ones() as usize;
        if n > MAX_ENUMERATED_RULES {
            return Err(Error::TooLarge {
                what: "rules outside the base to enumerate over",
                limit: MAX_ENUMERATED_RULES as u128,
                actual: n as u128,
            });
        }
        Ok(Supersets { universe: self, base: b.members, free, next: Some(0) })
    }

    pub fn is_max_consistent(&self, b: Base) -> bool {
        b.consistent && bits(self.all_rules() & !b.members).all(|i| !self.with_rule(b, i).consistent)
    }

    /// Greedily adds rules in universe order while `atom` stays underivable.
    ///
    /// The result is maximally consistent and does not derive `atom`.
    pub fn extend_max_consistent_avoiding(&self, b: Base, atom: usize) -> Result<Base> {
        if atom >= self.atoms.len() {
            return Err(Error::Precondition(format!("no atom with index {atom}")));
        }
        if self.derives(b, atom) {
            return Err(Error::Precondition(format!("base already derives `{}`", self.atoms[atom])));
        }
        let mut cur = b;
        for i in 0..self.rules.len() {
            if !cur.contains_rule(i) {
                let next = self.with_rule(cur, i);
                if !self.derives(next, atom) {
                    cur = next;
                }
            }
        }
        Ok(cur)
    }

    /// Number of maximally-consistent bases, one per proper atom set.
    pub fn max_consistent_count(&self) -> usize {
        self.violators.len()
    }

    /// The maximally-consistent base whose closure is the proper atom set `s`.
    pub fn max_consistent_for(&self, s: u32) -> Base {
        debug_assert!(s < self.all_atoms());
        self.base(self.all_rules() & !self.violators[s as usize])
    }

    /// Every maximally-consistent base, ordered by closure mask.
    pub fn max_consistent_bases(&self) -> Vec<Base> {
        (0..self.all_atoms()).map(|s| self.max_consistent_for(s)).collect()
    }

    /// Mask over closure sets `S` of the maximally-consistent bases above `members`.
    pub fn maxes_above(&self, members: u64) -> u64 {
        self.violators.iter().enumerate().fold(0u64, |acc, (s, v)| if members & v == 0 { acc | 1 << s } else { acc })
    }

    /// Maximally-consistent supersets of `b`, ordered by closure mask.
    pub fn max_consistent_supersets(&self, b: Base) -> Vec<Base> {
        bits(self.maxes_above(b.members)).map(|s| self.max_consistent_for(s as u32)).collect()
    }

    pub fn show_rule(&self, r: BaseRule) -> String {
        let prem: Vec<&str> = bits(r.premises as u64).map(|i| self.atoms[i].name()).collect();
        let concl = self.atoms.get(r.conclusion as usize).map_or("?", |a| a.name());
        if prem.is_empty() {
            format!("=> {concl}")
        } else {
            format!("{} => {concl}", prem.join(", "))
        }
    }

    pub fn show_base(&self, b: Base) -> String {
        let rules: Vec<String> = b.rule_indices().map(|i| self.show_rule(self.rules[i])).collect();
        format!("{{{}}}", rules.join("; "))
    }
}

/// Iterator over the supersets of a base.
pub struct Supersets<'u> {
    universe: &'u RuleUniverse,
    base: u64,
    free: u64,
    next: Option<u64>,
}

impl Iterator for Supersets<'_> {
    type Item = Base;

    fn next(&mut self) -> Option<Base> {
        let sub = self.next?;
        let following = sub.wrapping_sub(self.free) & self.free;
        self.next = (following != 0).then_some(following);
        Some(self.universe.base(self.base | sub))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::vec;
    use proptest::prelude::*;

    fn pq2() -> RuleUniverse {
        RuleUniverse::from_names(&["p", "q"], 2).unwrap()
    }

    #[test]
    fn rule_counts() {
        assert_eq!(RuleUniverse::from_names(&["p"], 1).unwrap().rule_count(), 2);
        assert_eq!(pq2().rule_count(), 8);
        assert_eq!(pq2().base_count(), 256);
        assert_eq!(RuleUniverse::from_names(&["p", "q"], 1).unwrap().rule_count(), 6);
        assert_eq!(RuleUniverse::from_names(&["p", "q", "r"], 1).unwrap().base_count(), 4096);
        assert_eq!(RuleUniverse::from_names(&["p", "q", "r"], 2).unwrap().rule_count(), 21);
        assert_eq!(RuleUniverse::from_names(&["a", "b", "c", "d"], 2).unwrap().rule_count(), 44);
    }

    #[test]
    fn rejects_bad_universes() {
        assert!(RuleUniverse::from_names(&["p"], 0).is_err());
        assert!(RuleUniverse::from_names(&[], 1).is_err());
        assert!(RuleUniverse::from_names(&["p", "p"], 1).is_err());
        assert!(matches!(
            RuleUniverse::from_names(&["a", "b", "c", "d", "e"], 2),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn canonical_rule_order() {
        let u = pq2();
        let shown: Vec<String> = u.rules().iter().map(|r| u.show_rule(*r)).collect();
        assert_eq!(shown, vec!["=> p", "p => p", "q => p", "p, q => p", "=> q", "p => q", "q => q", "p, q => q"]);
    }

    #[test]
    fn closure_chains_rules() {
        let u = pq2();
        let b = u
            .base_from_rules(&[u.rule_named(&[], "p").unwrap(), u.rule_named(&["p"], "q").unwrap()])
            .unwrap();
        assert_eq!(b.closure(), 0b11);
        assert!(!b.is_consistent());
        let c = u.base_from_rules(&[u.rule_named(&["p"], "q").unwrap()]).unwrap();
        assert_eq!(c.closure(), 0);
        assert!(c.is_consistent());
        assert!(u.empty_base().is_consistent());
        assert!(!u.full_base().is_consistent());
    }

    #[test]
    fn superset_enumeration() {
        let u = pq2();
        let b = u.base(0b1010_0101);
        let sups: Vec<Base> = u.supersets(b).unwrap().collect();
        assert_eq!(sups.len(), 16);
        assert_eq!(sups[0], b);
        assert!(sups.iter().all(|s| b.is_subset_of(*s)));
        let distinct: BTreeSet<u64> = sups.iter().map(|s| s.members()).collect();
        assert_eq!(distinct.len(), 16);
        let big = RuleUniverse::from_names(&["a", "b", "c", "d"], 2).unwrap();
        assert!(matches!(big.supersets(big.empty_base()), Err(Error::TooLarge { .. })));
    }

    fn brute_max_consistent(u: &RuleUniverse) -> Vec<Base> {
        (0..=u.all_rules()).map(|m| u.base(m)).filter(|b| u.is_max_consistent(*b)).collect()
    }

    #[test]
    fn closed_form_max_bases_match_brute_force() {
        for (names, m) in [(&["p"][..], 1), (&["p", "q"][..], 1), (&["p", "q"][..], 2), (&["p", "q", "r"][..], 1)] {
            let u = RuleUniverse::from_names(names, m).unwrap();
            let mut closed = u.max_consistent_bases();
            closed.sort();
            assert_eq!(closed, brute_max_consistent(&u), "{names:?}");
            assert_eq!(closed.len(), (1 << names.len()) - 1);
        }
    }

    #[test]
    fn extension_avoids_atom() {
        let u = pq2();
        let p = u.atom_named("p").unwrap();
        let b = u.extend_max_consistent_avoiding(u.empty_base(), p).unwrap();
        assert!(u.is_max_consistent(b));
        assert!(!u.derives(b, p));
        let with_p = u.base_from_rules(&[u.rule_named(&[], "p").unwrap()]).unwrap();
        assert!(u.extend_max_consistent_avoiding(with_p, p).is_err());
    }

    proptest! {
        #[test]
        fn max_supersets_match_filter(members in 0u64..256) {
            let u = pq2();
            let b = u.base(members);
            let fast: BTreeSet<Base> = u.max_consistent_supersets(b).into_iter().collect();
            let slow: BTreeSet<Base> =
                u.supersets(b).unwrap().filter(|c| u.is_max_consistent(*c)).collect();
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn max_supersets_match_filter_three_atoms(members in 0u64..4096) {
            let u = RuleUniverse::from_names(&["p", "q", "r"], 1).unwrap();
            let b = u.base(members);
            let fast: BTreeSet<Base> = u.max_consistent_supersets(b).into_iter().collect();
            let slow: BTreeSet<Base> =
                u.supersets(b).unwrap().filter(|c| u.is_max_consistent(*c)).collect();
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn closure_is_monotone(a in 0u64..(1 << 21), extra in 0u64..(1 << 21)) {
            let u = RuleUniverse::from_names(&["p", "q", "r"], 2).unwrap();
            let b = u.base(a);
            let c = u.base(a | extra);
            prop_assert_eq!(b.closure() & !c.closure(), 0);
            prop_assert!(b.is_consistent() || !c.is_consistent());
        }

        #[test]
        fn extension_is_max_consistent(a in 0u64..(1 << 21), atom in 0usize..3) {
            let u = RuleUniverse::from_names(&["p", "q", "r"], 2).unwrap();
            let b = u.base(a);
            prop_assume!(!u.derives(b, atom));
            let m = u.extend_max_consistent_avoiding(b, atom).unwrap();
            prop_assert!(b.is_subset_of(m));
            prop_assert!(u.is_max_consistent(m));
            prop_assert!(!u.derives(m, atom));
        }

        #[test]
        fn consistent_bases_have_a_max_superset(a in 0u64..(1 << 44)) {
            let u = RuleUniverse::from_names(&["a", "b", "c", "d"], 2).unwrap();
            let b = u.base(a);
            prop_assert_eq!(b.is_consistent(), !u.max_consistent_supersets(b).is_empty());
            for m in u.max_consistent_supersets(b) {
                prop_assert!(b.is_subset_of(m));
                prop_assert!(u.is_max_consistent(m));
            }
        }
    }
}
