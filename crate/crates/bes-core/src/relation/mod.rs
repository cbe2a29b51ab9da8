//! Modal relations between bases.
//!
//! A relation is either given extensionally, as one successor row per base, or
//! generated symbolically from seed pairs by the closure rules in
//! [`generated`]. Both answer membership queries through [`Relation`].

mod check;
mod generated;
mod sample;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use fixedbitset::FixedBitSet;

use crate::base::{Base, RuleUniverse};
use crate::error::{Error, Result};

pub use check::{check_frame, check_modal, check_relation, Condition, ConditionReport, ConditionVerdict, Coverage, Violation};
pub use generated::{close_relation, ClosureRules, GeneratedRelation, Node};
pub use sample::{enumerate_modal_relations, minimal_modal_relation, sample_modal_relation, WorldFrame};

/// Largest number of bases a relation may be materialized over.
pub const MAX_MATERIALIZED_BASES: u128 = 4096;

/// The modal logics covered, identified by their frame conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModalLogic {
    K,
    KT,
    K4,
    S4,
    KEuclidean,
}

impl ModalLogic {
    pub const ALL: [ModalLogic; 5] = [ModalLogic::K, ModalLogic::KT, ModalLogic::K4, ModalLogic::S4, ModalLogic::KEuclidean];
    /// The four logics with soundness and completeness results.
    pub const NORMAL: [ModalLogic; 4] = [ModalLogic::K, ModalLogic::KT, ModalLogic::K4, ModalLogic::S4];

    pub fn reflexive(self) -> bool {
        matches!(self, ModalLogic::KT | ModalLogic::S4)
    }

    pub fn transitive(self) -> bool {
        matches!(self, ModalLogic::K4 | ModalLogic::S4)
    }

    pub fn euclidean(self) -> bool {
        self == ModalLogic::KEuclidean
    }

    pub fn name(self) -> &'static str {
        match self {
            ModalLogic::K => "K",
            ModalLogic::KT => "KT",
            ModalLogic::K4 => "K4",
            ModalLogic::S4 => "S4",
            ModalLogic::KEuclidean => "K-euclidean",
        }
    }
}

impl fmt::Display for ModalLogic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModalLogic {
    type Err = Error;

    fn from_str(s: &str) -> Result<ModalLogic> {
        match s {
            "K" => Ok(ModalLogic::K),
            "KT" | "T" => Ok(ModalLogic::KT),
            "K4" => Ok(ModalLogic::K4),
            "S4" => Ok(ModalLogic::S4),
            "K-euclidean" | "K5" => Ok(ModalLogic::KEuclidean),
            other => Err(Error::Precondition(alloc::format!("unknown logic `{other}`"))),
        }
    }
}

/// What a relation says about the successors of one source base.
pub enum SuccessorSet<'a> {
    Row { universe: &'a RuleUniverse, row: &'a FixedBitSet },
    Nodes { relation: &'a GeneratedRelation, nodes: Vec<Node> },
}

/// Successors of a source, summarized by their maximally-consistent supersets.
///
/// Masks range over closure sets of maximally-consistent bases.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuccessorProfile {
    /// Union over consistent successors of their maximally-consistent supersets.
    pub union: u64,
    /// Inclusion-minimal sets of maximally-consistent supersets of consistent successors.
    pub minimal: Vec<u64>,
    pub has_inconsistent: bool,
}

impl SuccessorProfile {
    fn add(&mut self, maxes: u64) {
        self.union |= maxes;
        if self.minimal.iter().any(|&m| m & !maxes == 0) {
            return;
        }
        self.minimal.retain(|&m| maxes & !m != 0);
        self.minimal.push(maxes);
    }
}

impl SuccessorSet<'_> {
    pub fn contains(&self, y: Base) -> bool {
        match self {
            SuccessorSet::Row { row, .. } => row.contains(y.members() as usize),
            SuccessorSet::Nodes { relation, nodes } => nodes.iter().any(|n| relation.node_contains(n, y)),
        }
    }

    pub fn has_inconsistent(&self) -> bool {
        match self {
            SuccessorSet::Row { universe, row } => row.ones().any(|m| !universe.base(m as u64).is_consistent()),
            SuccessorSet::Nodes { nodes, .. } => nodes.iter().any(|n| match n {
                Node::Exact(t) => !t.is_consistent(),
                Node::Inconsistent => true,
                _ => false,
            }),
        }
    }

    pub fn has_consistent(&self) -> bool {
        match self {
            SuccessorSet::Row { universe, row } => row.ones().any(|m| universe.base(m as u64).is_consistent()),
            SuccessorSet::Nodes { nodes, .. } => nodes.iter().any(|n| match n {
                Node::Exact(t) => t.is_consistent(),
                Node::Inconsistent => false,
                _ => true,
            }),
        }
    }

    pub fn profile(&self) -> SuccessorProfile {
        let mut p = SuccessorProfile::default();
        match self {
            SuccessorSet::Row { universe, row } => {
                let mut seen = BTreeSet::new();
                for m in row.ones() {
                    let y = universe.base(m as u64);
                    if y.is_consistent() {
                        let maxes = universe.maxes_above(y.members());
                        if seen.insert(maxes) {
                            p.add(maxes);
                        }
                    } else {
                        p.has_inconsistent = true;
                    }
                }
            }
            SuccessorSet::Nodes { relation, nodes } => {
                let u = relation.universe();
                for n in nodes {
                    match *n {
                        Node::Exact(t) if t.is_consistent() => p.add(u.maxes_above(t.members())),
                        Node::Exact(_) | Node::Inconsistent => p.has_inconsistent = true,
                        Node::Below(m) => {
                            p.union |= u.maxes_above(0);
                            p.add(u.maxes_above(m.members()));
                        }
                        Node::Cone(s) => p.add(1 << s),
                        Node::Up(z) => {
                            for s in crate::base::bits(u.maxes_above(z.members())) {
                                p.add(1 << s);
                            }
                        }
                    }
                }
            }
        }
        p
    }
}

/// Common interface of extensional and generated relations.
pub trait Relation {
    fn universe(&self) -> &RuleUniverse;

    fn successors(&self, x: Base) -> SuccessorSet<'_>;

    fn relates(&self, x: Base, y: Base) -> bool {
        self.successors(x).contains(y)
    }

    /// Bases the relation was built from, used to aim scoped checks.
    fn landmarks(&self) -> Vec<Base> {
        Vec::new()
    }

    /// The full successor matrix. Fails above [`MAX_MATERIALIZED_BASES`] bases.
    fn materialize(&self) -> Result<ExtensionalRelation>;
}

pub(crate) fn ensure_materializable(u: &RuleUniverse) -> Result<usize> {
    if u.base_count() > MAX_MATERIALIZED_BASES {
        return Err(Error::TooLarge {
            what: "bases to materialize",
            limit: MAX_MATERIALIZED_BASES,
            actual: u.base_count(),
        });
    }
    Ok(u.base_count() as usize)
}

/// A relation stored as one successor bitset per base, indexed by member mask.
#[derive(Clone, PartialEq, Eq)]
pub struct ExtensionalRelation {
    universe: RuleUniverse,
    rows: Vec<FixedBitSet>,
}

impl fmt::Debug for ExtensionalRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtensionalRelation").field("pairs", &self.pair_count()).finish()
    }
}

impl ExtensionalRelation {
    /// The empty relation.
    pub fn empty(universe: &RuleUniverse) -> Result<ExtensionalRelation> {
        let n = ensure_materializable(universe)?;
        Ok(ExtensionalRelation { universe: universe.clone(), rows: (0..n).map(|_| FixedBitSet::with_capacity(n)).collect() })
    }

    pub fn from_pairs(universe: &RuleUniverse, pairs: &[(Base, Base)]) -> Result<ExtensionalRelation> {
        let mut r = ExtensionalRelation::empty(universe)?;
        for &(x, y) in pairs {
            r.insert(x, y);
        }
        Ok(r)
    }

    pub(crate) fn from_rows(universe: &RuleUniverse, rows: Vec<FixedBitSet>) -> ExtensionalRelation {
        ExtensionalRelation { universe: universe.clone(), rows }
    }

    pub fn insert(&mut self, x: Base, y: Base) {
        self.rows[x.members() as usize].insert(y.members() as usize);
    }

    pub fn row(&self, x: Base) -> &FixedBitSet {
        &self.rows[x.members() as usize]
    }

    pub(crate) fn rows(&self) -> &[FixedBitSet] {
        &self.rows
    }

    pub fn base_count(&self) -> usize {
        self.rows.len()
    }

    pub fn pair_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    /// All pairs in ascending order of source, then target.
    pub fn pairs(&self) -> Vec<(Base, Base)> {
        let u = &self.universe;
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.ones().map(move |y| (u.base(x as u64), u.base(y as u64))))
            .collect()
    }

    /// Human-readable list of pairs.
    pub fn describe(&self) -> String {
        let u = &self.universe;
        let parts: Vec<String> = self
            .pairs()
            .into_iter()
            .map(|(x, y)| alloc::format!("{} -> {}", u.show_base(x), u.show_base(y)))
            .collect();
        parts.join(", ")
    }
}

impl Relation for ExtensionalRelation {
    fn universe(&self) -> &RuleUniverse {
        &self.universe
    }

    fn successors(&self, x: Base) -> SuccessorSet<'_> {
        SuccessorSet::Row { universe: &self.universe, row: &self.rows[x.members() as usize] }
    }

    fn materialize(&self) -> Result<ExtensionalRelation> {
        Ok(self.clone())
    }
}
