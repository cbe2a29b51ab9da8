//! Enumerating and sampling relations that satisfy the modal conditions.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::check::passes;
use super::{close_relation, ExtensionalRelation, GeneratedRelation, ModalLogic};
use crate::base::{bits, Base, RuleUniverse};
use crate::error::{Error, Result};

/// Largest universe whose relations are enumerated one by one.
pub const MAX_ENUMERATED_BASES: u128 = 4;
const SAMPLE_ATTEMPTS: usize = 256;
const MAX_SAMPLED_WORLDS: usize = 5;

/// A finite frame whose worlds are bases, with adjacency masks per world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldFrame {
    pub worlds: Vec<Base>,
    pub edges: Vec<u64>,
}

impl WorldFrame {
    pub fn new(worlds: Vec<Base>) -> WorldFrame {
        let n = worlds.len();
        assert!(n <= 64, "at most 64 worlds");
        WorldFrame { worlds, edges: alloc::vec![0; n] }
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.edges[from] |= 1 << to;
    }

    pub fn close_reflexive(&mut self) {
        for (i, e) in self.edges.iter_mut().enumerate() {
            *e |= 1 << i;
        }
    }

    pub fn close_transitive(&mut self) {
        for k in 0..self.worlds.len() {
            for i in 0..self.worlds.len() {
                if self.edges[i] >> k & 1 == 1 {
                    self.edges[i] |= self.edges[k];
                }
            }
        }
    }

    pub fn close_euclidean(&mut self) {
        loop {
            let before = self.edges.clone();
            for x in 0..self.worlds.len() {
                let succ = self.edges[x];
                for y in bits(succ) {
                    self.edges[y] |= succ;
                }
            }
            if self.edges == before {
                return;
            }
        }
    }

    /// Closes the edges under the frame conditions of `logic`.
    pub fn close_for(&mut self, logic: ModalLogic) {
        if logic.reflexive() {
            self.close_reflexive();
        }
        if logic.transitive() {
            self.close_transitive();
        }
        if logic.euclidean() {
            self.close_euclidean();
        }
    }

    pub fn pairs(&self) -> Vec<(Base, Base)> {
        let mut out = Vec::new();
        for (i, &e) in self.edges.iter().enumerate() {
            for j in bits(e) {
                out.push((self.worlds[i], self.worlds[j]));
            }
        }
        out
    }
}

/// Every relation over a universe of at most four bases that satisfies the
/// modal conditions and the frame conditions of `logic`.
pub fn enumerate_modal_relations(u: &RuleUniverse, logic: ModalLogic) -> Result<Vec<ExtensionalRelation>> {
    if u.base_count() > MAX_ENUMERATED_BASES {
        return Err(Error::TooLarge { what: "bases to enumerate relations over", limit: MAX_ENUMERATED_BASES, actual: u.base_count() });
    }
    let n = u.base_count() as usize;
    let mut out = Vec::new();
    for mask in 0u64..1 << (n * n) {
        let mut r = ExtensionalRelation::empty(u)?;
        for i in bits(mask) {
            r.insert(u.base((i / n) as u64), u.base((i % n) as u64));
        }
        if passes(&r, logic) {
            out.push(r);
        }
    }
    Ok(out)
}

/// The closure of the empty seed set: the least relation the closure rules of `logic` produce.
pub fn minimal_modal_relation(u: &RuleUniverse, logic: ModalLogic) -> GeneratedRelation {
    close_relation(u, logic, &[], &[])
}

/// A pseudo-random relation satisfying the modal and frame conditions.
///
/// A random frame over a random set of maximally-consistent world bases is
/// closed under the frame conditions of `logic` and then under the closure
/// rules. Draws failing the checks are discarded and redrawn, up to a fixed
/// number of attempts. The same seed always yields the same relation.
pub fn sample_modal_relation(u: &RuleUniverse, logic: ModalLogic, seed: u64) -> Result<GeneratedRelation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maxes = u.max_consistent_bases();
    for _ in 0..SAMPLE_ATTEMPTS {
        let mut worlds: Vec<Base> = maxes.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        worlds.shuffle(&mut rng);
        worlds.truncate(MAX_SAMPLED_WORLDS);
        if worlds.is_empty() {
            worlds.push(maxes[rng.gen_range(0..maxes.len())]);
        }
        worlds.sort();
        let mut frame = WorldFrame::new(worlds.clone());
        for i in 0..worlds.len() {
            for j in 0..worlds.len() {
                if rng.gen_bool(0.4) {
                    frame.add_edge(i, j);
                }
            }
        }
        frame.close_for(logic);
        let r = close_relation(u, logic, &frame.pairs(), &worlds);
        if passes(&r, logic) {
            return Ok(r);
        }
    }
    Err(Error::SamplingExhausted { attempts: SAMPLE_ATTEMPTS })
}
