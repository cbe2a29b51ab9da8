//! Checks of the modal conditions and frame conditions on a relation.
//!
//! The modal conditions on `R`:
//!
//! * (a) an inconsistent base relates to some inconsistent base and to no consistent one;
//! * (b) a consistent base relates to no inconsistent base;
//! * (c) if a consistent, non-maximal `B` relates to `C`, some strict superset of `B` does too;
//! * (d) if `B R C` and `B' ⊆ B` then `B' R C`.
//!
//! Condition (d) is enforced for consistent `B` only. Read for every `B` it
//! clashes with (a) and (b), since an inconsistent base sits above consistent
//! ones; that reading is still evaluated and reported, but never gates a pass.
//!
//! Relations over at most [`MAX_MATERIALIZED_BASES`](super::MAX_MATERIALIZED_BASES)
//! bases are checked over every base. Larger ones are checked on a scoped set
//! of sources and targets, and the report says so.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ExtensionalRelation, ModalLogic, Relation, SuccessorSet, MAX_MATERIALIZED_BASES};
use crate::base::{bits, Base};

/// Violations kept per condition.
const MAX_VIOLATIONS: usize = 4;
/// Random bases added to scoped source and target sets.
const SCOPED_SAMPLES: usize = 96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    A,
    B,
    C,
    /// (d) for consistent sources.
    D,
    /// (d) for every source; informational.
    DLiteral,
    Reflexive,
    Transitive,
    Euclidean,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::A => "a",
            Condition::B => "b",
            Condition::C => "c",
            Condition::D => "d",
            Condition::DLiteral => "d-literal",
            Condition::Reflexive => "reflexive",
            Condition::Transitive => "transitive",
            Condition::Euclidean => "euclidean",
        }
    }

    /// Whether a failure of this condition fails the relation.
    pub fn gating(self) -> bool {
        self != Condition::DLiteral
    }
}

/// A counterexample to one condition: the bases involved, in the order of the
/// condition's quantifiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub bases: Vec<Base>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionVerdict {
    pub condition: Condition,
    /// Empty exactly when the condition passed. Capped at a few entries.
    pub violations: Vec<Violation>,
}

impl ConditionVerdict {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive { bases: usize },
    Scoped { sources: usize, targets: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub coverage: Coverage,
    pub verdicts: Vec<ConditionVerdict>,
}

impl ConditionReport {
    pub fn get(&self, c: Condition) -> Option<&ConditionVerdict> {
        self.verdicts.iter().find(|v| v.condition == c)
    }

    /// True if every gating condition passed.
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass() || !v.condition.gating())
    }

    pub fn failed(&self) -> Vec<Condition> {
        self.verdicts.iter().filter(|v| !v.pass() && v.condition.gating()).map(|v| v.condition).collect()
    }

    fn merge(mut self, other: ConditionReport) -> ConditionReport {
        self.verdicts.extend(other.verdicts);
        self
    }
}

struct Collector {
    found: BTreeMap<Condition, Vec<Violation>>,
    order: Vec<Condition>,
}

impl Collector {
    fn new(order: &[Condition]) -> Collector {
        Collector { found: order.iter().map(|&c| (c, Vec::new())).collect(), order: order.to_vec() }
    }

    fn full(&self, c: Condition) -> bool {
        self.found[&c].len() >= MAX_VIOLATIONS
    }

    fn add(&mut self, c: Condition, bases: &[Base]) {
        let v = self.found.get_mut(&c).expect("tracked condition");
        if v.len() < MAX_VIOLATIONS {
            v.push(Violation { bases: bases.to_vec() });
        }
    }

    fn finish(mut self, coverage: Coverage) -> ConditionReport {
        let verdicts = self
            .order
            .iter()
            .map(|&c| ConditionVerdict { condition: c, violations: self.found.remove(&c).unwrap_or_default() })
            .collect();
        ConditionReport { coverage, verdicts }
    }
}

const MODAL: [Condition; 5] = [Condition::A, Condition::B, Condition::C, Condition::D, Condition::DLiteral];

fn frame_conditions(logic: ModalLogic) -> Vec<Condition> {
    let mut out = Vec::new();
    if logic.reflexive() {
        out.push(Condition::Reflexive);
    }
    if logic.transitive() {
        out.push(Condition::Transitive);
    }
    if logic.euclidean() {
        out.push(Condition::Euclidean);
    }
    out
}

/// Checks conditions (a) to (d).
pub fn check_modal(r: &dyn Relation) -> ConditionReport {
    if r.universe().base_count() <= MAX_MATERIALIZED_BASES {
        let ext = r.materialize().expect("size checked");
        exhaustive_modal(&ext)
    } else {
        scoped(r, &MODAL, &Scope::new(r))
    }
}

/// Checks the frame conditions of `logic` (none for K).
pub fn check_frame(r: &dyn Relation, logic: ModalLogic) -> ConditionReport {
    let conds = frame_conditions(logic);
    if r.universe().base_count() <= MAX_MATERIALIZED_BASES {
        let ext = r.materialize().expect("size checked");
        exhaustive_frame(&ext, &conds)
    } else {
        scoped(r, &conds, &Scope::new(r))
    }
}

/// Modal conditions and the frame conditions of `logic` together.
pub fn check_relation(r: &dyn Relation, logic: ModalLogic) -> ConditionReport {
    let conds = frame_conditions(logic);
    if r.universe().base_count() <= MAX_MATERIALIZED_BASES {
        let ext = r.materialize().expect("size checked");
        exhaustive_modal(&ext).merge(exhaustive_frame(&ext, &conds))
    } else {
        let scope = Scope::new(r);
        let mut all = MODAL.to_vec();
        all.extend(conds);
        scoped(r, &all, &scope)
    }
}

pub(crate) fn exhaustive_modal(r: &ExtensionalRelation) -> ConditionReport {
    let u = r.universe();
    let rows = r.rows();
    let n = rows.len();
    let bases: Vec<Base> = (0..n).map(|m| u.base(m as u64)).collect();
    let mut inconsistent = FixedBitSet::with_capacity(n);
    for b in &bases {
        if !b.is_consistent() {
            inconsistent.insert(b.members() as usize);
        }
    }
    let mut out = Collector::new(&MODAL);
    for (x, row) in rows.iter().enumerate() {
        let bx = bases[x];
        if bx.is_consistent() {
            if let Some(y) = row.intersection(&inconsistent).next() {
                out.add(Condition::B, &[bx, bases[y]]);
            }
        } else {
            if row.is_disjoint(&inconsistent) {
                out.add(Condition::A, &[bx]);
            }
            if let Some(y) = row.difference(&inconsistent).next() {
                out.add(Condition::A, &[bx, bases[y]]);
            }
        }
    }
    // Union of successor rows over strict supersets, filled from the top down.
    let mut above: Vec<FixedBitSet> = (0..n).map(|_| FixedBitSet::with_capacity(n)).collect();
    for x in (0..n).rev() {
        let free = u.all_rules() & !(x as u64);
        let mut acc = FixedBitSet::with_capacity(n);
        for i in bits(free) {
            let d = x | 1 << i;
            acc.union_with(&rows[d]);
            acc.union_with(&above[d]);
        }
        above[x] = acc;
    }
    for (x, row) in rows.iter().enumerate() {
        let bx = bases[x];
        if bx.is_consistent() && !u.is_max_consistent(bx) && !out.full(Condition::C) {
            if let Some(y) = row.difference(&above[x]).next() {
                out.add(Condition::C, &[bx, bases[y]]);
            }
        }
    }
    for (x, row) in rows.iter().enumerate() {
        let bx = bases[x];
        for i in bx.rule_indices() {
            let z = x & !(1 << i);
            if let Some(y) = row.difference(&rows[z]).next() {
                let w = [bx, bases[y], bases[z]];
                if bx.is_consistent() {
                    out.add(Condition::D, &w);
                }
                out.add(Condition::DLiteral, &w);
                break;
            }
        }
    }
    out.finish(Coverage::Exhaustive { bases: n })
}

pub(crate) fn exhaustive_frame(r: &ExtensionalRelation, conds: &[Condition]) -> ConditionReport {
    let u = r.universe();
    let rows = r.rows();
    let n = rows.len();
    let mut out = Collector::new(conds);
    if conds.contains(&Condition::Reflexive) {
        for (x, row) in rows.iter().enumerate() {
            if !row.contains(x) {
                out.add(Condition::Reflexive, &[u.base(x as u64)]);
            }
        }
    }
    if conds.contains(&Condition::Transitive) || conds.contains(&Condition::Euclidean) {
        // Sources with identical rows behave identically; check one of each.
        let mut distinct: BTreeMap<&FixedBitSet, usize> = BTreeMap::new();
        for (x, row) in rows.iter().enumerate() {
            distinct.entry(row).or_insert(x);
        }
        let mut reps: Vec<(usize, &FixedBitSet)> = distinct.into_iter().map(|(row, x)| (x, row)).collect();
        reps.sort_by_key(|&(x, _)| x);
        for (x, row) in reps {
            for y in row.ones() {
                if conds.contains(&Condition::Transitive) && !out.full(Condition::Transitive) {
                    if let Some(z) = rows[y].difference(row).next() {
                        out.add(Condition::Transitive, &[u.base(x as u64), u.base(y as u64), u.base(z as u64)]);
                    }
                }
                if conds.contains(&Condition::Euclidean) && !out.full(Condition::Euclidean) {
                    if let Some(z) = row.difference(&rows[y]).next() {
                        out.add(Condition::Euclidean, &[u.base(x as u64), u.base(y as u64), u.base(z as u64)]);
                    }
                }
            }
        }
    }
    out.finish(Coverage::Exhaustive { bases: n })
}

/// Sources and targets used when a relation is too large to check everywhere.
struct Scope {
    sources: Vec<Base>,
    targets: Vec<Base>,
    frame_sources: Vec<Base>,
}

impl Scope {
    fn new(r: &dyn Relation) -> Scope {
        let u = r.universe();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5c0_9ed);
        let maxes = u.max_consistent_bases();
        let landmarks = r.landmarks();
        let mut core: Vec<Base> = Vec::new();
        core.push(u.empty_base());
        core.push(u.full_base());
        core.extend(maxes.iter().copied());
        core.extend(landmarks.iter().copied());
        let mut random: Vec<Base> = Vec::new();
        for _ in 0..SCOPED_SAMPLES {
            random.push(u.base(rng.gen::<u64>()));
            let m = maxes[rng.gen_range(0..maxes.len())];
            random.push(u.base(m.members() & rng.gen::<u64>()));
        }
        let mut targets = core.clone();
        for &b in landmarks.iter().chain(maxes.iter()) {
            for i in b.rule_indices() {
                targets.push(u.without_rule(b, i));
            }
        }
        targets.extend(random.iter().take(SCOPED_SAMPLES / 2).copied());
        let mut sources = targets.clone();
        for &b in &landmarks {
            for i in bits(u.all_rules() & !b.members()) {
                sources.push(u.with_rule(b, i));
            }
        }
        sources.extend(random.iter().copied());
        let mut frame_sources = core;
        frame_sources.extend(random.iter().take(16).copied());
        for v in [&mut sources, &mut targets, &mut frame_sources] {
            v.sort();
            v.dedup();
        }
        Scope { sources, targets, frame_sources }
    }
}

fn scoped(r: &dyn Relation, conds: &[Condition], scope: &Scope) -> ConditionReport {
    let u = r.universe();
    let mut out = Collector::new(conds);
    let want = |c: Condition| conds.contains(&c);
    let modal = want(Condition::A) || want(Condition::C) || want(Condition::D);
    if modal {
        for &x in &scope.sources {
            let succ = r.successors(x);
            let related: Vec<Base> = scope.targets.iter().copied().filter(|&y| succ.contains(y)).collect();
            if x.is_consistent() {
                if want(Condition::B) && succ.has_inconsistent() {
                    let y = related.iter().copied().find(|y| !y.is_consistent()).unwrap_or(u.full_base());
                    out.add(Condition::B, &[x, y]);
                }
                if want(Condition::C) && !out.full(Condition::C) && !u.is_max_consistent(x) {
                    let ups: Vec<SuccessorSet<'_>> =
                        bits(u.all_rules() & !x.members()).map(|i| r.successors(u.with_rule(x, i))).collect();
                    if let Some(&y) = related.iter().find(|&&y| !ups.iter().any(|s| s.contains(y))) {
                        out.add(Condition::C, &[x, y]);
                    }
                }
            } else if want(Condition::A) {
                if !succ.has_inconsistent() {
                    out.add(Condition::A, &[x]);
                }
                if succ.has_consistent() {
                    let y = related.iter().copied().find(|y| y.is_consistent());
                    out.add(Condition::A, &[x, y.unwrap_or(x)]);
                }
            }
            if want(Condition::D) && !(out.full(Condition::D) && out.full(Condition::DLiteral)) {
                'rules: for i in x.rule_indices() {
                    let z = u.without_rule(x, i);
                    let below = r.successors(z);
                    for &y in &related {
                        if !below.contains(y) {
                            if x.is_consistent() {
                                out.add(Condition::D, &[x, y, z]);
                            }
                            out.add(Condition::DLiteral, &[x, y, z]);
                            break 'rules;
                        }
                    }
                }
            }
        }
    }
    let frame = want(Condition::Reflexive) || want(Condition::Transitive) || want(Condition::Euclidean);
    if frame {
        let target_succ: Vec<SuccessorSet<'_>> = scope.targets.iter().map(|&y| r.successors(y)).collect();
        for &x in &scope.frame_sources {
            let succ = r.successors(x);
            if want(Condition::Reflexive) && !succ.contains(x) {
                out.add(Condition::Reflexive, &[x]);
            }
            let related: Vec<usize> = (0..scope.targets.len()).filter(|&j| succ.contains(scope.targets[j])).collect();
            for &j in &related {
                let y = scope.targets[j];
                for (k, &z) in scope.targets.iter().enumerate() {
                    if want(Condition::Transitive)
                        && !out.full(Condition::Transitive)
                        && target_succ[j].contains(z)
                        && !succ.contains(z)
                    {
                        out.add(Condition::Transitive, &[x, y, z]);
                    }
                    if want(Condition::Euclidean)
                        && !out.full(Condition::Euclidean)
                        && related.binary_search(&k).is_ok()
                        && !target_succ[j].contains(z)
                    {
                        out.add(Condition::Euclidean, &[x, y, z]);
                    }
                }
            }
        }
    }
    out.finish(Coverage::Scoped { sources: scope.sources.len(), targets: scope.targets.len() })
}

/// Used by tests and samplers to check a universe-sized relation quickly.
pub(crate) fn passes(r: &dyn Relation, logic: ModalLogic) -> bool {
    check_relation(r, logic).pass()
}
