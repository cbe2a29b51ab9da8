//! Relations generated from seed pairs by closure rules.
//!
//! The closure of seeds `G` under the rules is represented symbolically, so
//! membership can be decided in universes far too large to materialize. The
//! rules are:
//!
//! * every inconsistent base relates to every inconsistent base;
//! * if `D` is consistent and `D R C` then `B R C` for every `B ⊆ D`;
//! * transitive closure;
//! * reflexive: `B R B`; a maximally-consistent base that is not a world base
//!   relates to all its subsets; a world base `W` relates to every base whose
//!   only maximally-consistent superset is `W`.
//!
//! The transitive closure of the downward closure is again downward closed, so
//! the downward rule is applied once to the generators and transitivity is a
//! reachability search over a handful of symbolic successor classes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use fixedbitset::FixedBitSet;

use super::{ensure_materializable, ExtensionalRelation, ModalLogic, Relation, SuccessorSet};
use crate::base::{Base, RuleUniverse};
use crate::error::Result;

/// Which closure rules a generated relation applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ClosureRules {
    pub inconsistent_total: bool,
    pub downward: bool,
    pub transitive: bool,
    pub reflexive: bool,
}

impl ClosureRules {
    /// Rules used for a logic: always the first two, plus transitivity and
    /// reflexivity as the logic demands.
    pub fn for_logic(logic: ModalLogic) -> ClosureRules {
        ClosureRules { inconsistent_total: true, downward: true, transitive: logic.transitive(), reflexive: logic.reflexive() }
    }
}

/// A class of bases reachable from a source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    /// Exactly this base.
    Exact(Base),
    /// Every inconsistent base.
    Inconsistent,
    /// Every subset of this maximally-consistent base.
    Below(Base),
    /// Every base whose only maximally-consistent superset has this closure set.
    Cone(u32),
    /// Every consistent superset of this consistent base.
    Up(Base),
}

#[derive(Clone, Copy, Debug)]
struct Anchor {
    source: Base,
    target: Node,
}

/// A relation given by seeds and closure rules.
#[derive(Clone, Debug)]
pub struct GeneratedRelation {
    universe: RuleUniverse,
    logic: ModalLogic,
    rules: ClosureRules,
    seeds: Vec<(Base, Base)>,
    world_bases: Vec<Base>,
    anchors: Vec<Anchor>,
}

impl GeneratedRelation {
    pub fn new(
        universe: &RuleUniverse,
        logic: ModalLogic,
        rules: ClosureRules,
        seeds: &[(Base, Base)],
        world_bases: &[Base],
    ) -> GeneratedRelation {
        let mut seeds = seeds.to_vec();
        seeds.sort();
        seeds.dedup();
        let mut anchors: Vec<Anchor> = seeds.iter().map(|&(s, t)| Anchor { source: s, target: Node::Exact(t) }).collect();
        if rules.reflexive {
            let worlds: BTreeSet<u64> = world_bases.iter().map(|b| b.members()).collect();
            for s in 0..universe.all_atoms() {
                let m = universe.max_consistent_for(s);
                let target = if worlds.contains(&m.members()) { Node::Cone(s) } else { Node::Below(m) };
                anchors.push(Anchor { source: m, target });
            }
        }
        GeneratedRelation { universe: universe.clone(), logic, rules, seeds, world_bases: world_bases.to_vec(), anchors }
    }

    pub fn logic(&self) -> ModalLogic {
        self.logic
    }

    pub fn rules(&self) -> ClosureRules {
        self.rules
    }

    pub fn seeds(&self) -> &[(Base, Base)] {
        &self.seeds
    }

    pub fn world_bases(&self) -> &[Base] {
        &self.world_bases
    }

    pub(crate) fn node_contains(&self, node: &Node, y: Base) -> bool {
        match *node {
            Node::Exact(t) => y == t,
            Node::Inconsistent => !y.is_consistent(),
            Node::Below(m) => y.is_subset_of(m),
            Node::Cone(s) => self.universe.maxes_above(y.members()) == 1 << s,
            Node::Up(z) => y.is_consistent() && z.is_subset_of(y),
        }
    }

    /// True if some member of `node` fires the generator anchored at `d`.
    fn fires(&self, node: &Node, d: Base) -> bool {
        let down = self.rules.downward;
        match *node {
            Node::Exact(z) => d == z || (down && d.is_consistent() && z.is_subset_of(d)),
            Node::Inconsistent => !d.is_consistent(),
            Node::Below(m) => d.is_subset_of(m) || (down && d.is_consistent()),
            Node::Cone(s) => self.universe.maxes_above(d.members()) == 1 << s,
            Node::Up(z) => d.is_consistent() && z.is_subset_of(d),
        }
    }

    /// Classes reached in one step from members of `node`.
    fn step(&self, node: &Node, out: &mut Vec<Node>) {
        for a in &self.anchors {
            if self.fires(node, a.source) {
                out.push(a.target);
            }
        }
        let has_inconsistent = match *node {
            Node::Exact(z) => !z.is_consistent(),
            Node::Inconsistent => true,
            _ => false,
        };
        if self.rules.inconsistent_total && has_inconsistent {
            out.push(Node::Inconsistent);
        }
        if self.rules.reflexive {
            match *node {
                Node::Exact(z) if self.rules.downward && z.is_consistent() => out.push(Node::Up(z)),
                Node::Below(_) if self.rules.downward => out.push(Node::Up(self.universe.empty_base())),
                _ => out.push(*node),
            }
        }
    }

    /// Successor classes of `x`, deduplicated and sorted.
    pub fn successor_nodes(&self, x: Base) -> Vec<Node> {
        let mut first = Vec::new();
        self.step(&Node::Exact(x), &mut first);
        let mut seen: BTreeSet<Node> = first.iter().copied().collect();
        if self.rules.transitive {
            let mut queue: Vec<Node> = seen.iter().copied().collect();
            let mut next = Vec::new();
            while let Some(n) = queue.pop() {
                next.clear();
                self.step(&n, &mut next);
                for m in next.drain(..) {
                    if seen.insert(m) {
                        queue.push(m);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    fn node_members(&self, node: &Node, n: usize, cones: &[FixedBitSet], inconsistent: &FixedBitSet) -> FixedBitSet {
        let u = &self.universe;
        let mut set = FixedBitSet::with_capacity(n);
        match *node {
            Node::Exact(t) => set.insert(t.members() as usize),
            Node::Inconsistent => set.union_with(inconsistent),
            Node::Below(m) => {
                let full = m.members();
                let mut sub = full;
                loop {
                    set.insert(sub as usize);
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & full;
                }
            }
            Node::Cone(s) => set.union_with(&cones[s as usize]),
            Node::Up(z) => {
                for y in u.supersets(z).expect("materializable universe") {
                    if y.is_consistent() {
                        set.insert(y.members() as usize);
                    }
                }
            }
        }
        set
    }
}

impl Relation for GeneratedRelation {
    fn universe(&self) -> &RuleUniverse {
        &self.universe
    }

    fn successors(&self, x: Base) -> SuccessorSet<'_> {
        SuccessorSet::Nodes { relation: self, nodes: self.successor_nodes(x) }
    }

    fn landmarks(&self) -> Vec<Base> {
        let mut out: Vec<Base> = self.seeds.iter().flat_map(|&(s, t)| [s, t]).collect();
        out.extend(self.world_bases.iter().copied());
        out.sort();
        out.dedup();
        out
    }

    fn materialize(&self) -> Result<ExtensionalRelation> {
        let n = ensure_materializable(&self.universe)?;
        let u = &self.universe;
        let mut inconsistent = FixedBitSet::with_capacity(n);
        let mut cones: Vec<FixedBitSet> = (0..u.max_consistent_count()).map(|_| FixedBitSet::with_capacity(n)).collect();
        for m in 0..n {
            let b = u.base(m as u64);
            if !b.is_consistent() {
                inconsistent.insert(m);
            }
            let maxes = u.maxes_above(b.members());
            if maxes.count_ones() == 1 {
                cones[maxes.trailing_zeros() as usize].insert(m);
            }
        }
        let mut cache: BTreeMap<Node, FixedBitSet> = BTreeMap::new();
        let mut rows = Vec::with_capacity(n);
        for m in 0..n {
            let mut row = FixedBitSet::with_capacity(n);
            for node in self.successor_nodes(u.base(m as u64)) {
                let members = cache.entry(node).or_insert_with(|| self.node_members(&node, n, &cones, &inconsistent));
                row.union_with(members);
            }
            rows.push(row);
        }
        Ok(ExtensionalRelation::from_rows(u, rows))
    }
}

/// Closes `seeds` under the rules for `logic`, with the given world bases.
pub fn close_relation(universe: &RuleUniverse, logic: ModalLogic, seeds: &[(Base, Base)], world_bases: &[Base]) -> GeneratedRelation {
    GeneratedRelation::new(universe, logic, ClosureRules::for_logic(logic), seeds, world_bases)
}
