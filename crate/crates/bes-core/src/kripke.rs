//! Finite Kripke models and bounded countermodel search.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::base::bits;
use crate::error::{Error, Result};
use crate::formula::{atoms_of, Atom, Formula};
use crate::relation::ModalLogic;

/// Most worlds a model may have.
pub const MAX_WORLDS: usize = 64;
/// Most worlds [`find_countermodel`] will enumerate frames for.
pub const MAX_SEARCH_WORLDS: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    worlds: Vec<String>,
    /// Successor mask per world.
    succ: Vec<u64>,
    valuation: BTreeMap<Atom, u64>,
}

impl KripkeModel {
    pub fn new(worlds: Vec<String>, edges: &[(usize, usize)], valuation: BTreeMap<Atom, u64>) -> Result<KripkeModel> {
        let n = worlds.len();
        if n == 0 {
            return Err(Error::InvalidModel("a model needs at least one world".into()));
        }
        if n > MAX_WORLDS {
            return Err(Error::TooLarge { what: "worlds", limit: MAX_WORLDS as u128, actual: n as u128 });
        }
        for (i, w) in worlds.iter().enumerate() {
            if worlds[..i].contains(w) {
                return Err(Error::InvalidModel(format!("world `{w}` listed twice")));
            }
        }
        let mut succ = alloc::vec![0u64; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidModel(format!("edge ({a}, {b}) leaves the model")));
            }
            succ[a] |= 1 << b;
        }
        let all = mask(n);
        if valuation.values().any(|v| v & !all != 0) {
            return Err(Error::InvalidModel("valuation mentions a world outside the model".into()));
        }
        Ok(KripkeModel { worlds, succ, valuation })
    }

    /// Worlds named `w0`, `w1`, …
    pub fn with_default_names(n: usize, edges: &[(usize, usize)], valuation: BTreeMap<Atom, u64>) -> Result<KripkeModel> {
        KripkeModel::new((0..n).map(|i| format!("w{i}")).collect(), edges, valuation)
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn world_index(&self, name: &str) -> Result<usize> {
        self.worlds.iter().position(|w| w == name).ok_or_else(|| Error::InvalidModel(format!("unknown world `{name}`")))
    }

    pub fn successors(&self, w: usize) -> u64 {
        self.succ[w]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.worlds.len()).flat_map(|w| bits(self.succ[w]).map(move |v| (w, v))).collect()
    }

    /// Worlds where `atom` is true; unlisted atoms are true nowhere.
    pub fn valuation(&self, atom: &Atom) -> u64 {
        self.valuation.get(atom).copied().unwrap_or(0)
    }

    pub fn valuations(&self) -> &BTreeMap<Atom, u64> {
        &self.valuation
    }

    pub fn set_valuation(&mut self, atom: Atom, worlds: u64) {
        self.valuation.insert(atom, worlds & mask(self.worlds.len()));
    }

    /// Worlds where `f` is true.
    pub fn truth_set(&self, f: &Formula) -> u64 {
        let all = mask(self.worlds.len());
        match f {
            Formula::Atom(a) => self.valuation(a),
            Formula::Bottom => 0,
            Formula::Implies(a, b) => (!self.truth_set(a) | self.truth_set(b)) & all,
            Formula::Box(a) => {
                let t = self.truth_set(a);
                (0..self.worlds.len()).filter(|&w| self.succ[w] & !t == 0).fold(0, |acc, w| acc | 1 << w)
            }
            Formula::Diamond(a) => {
                let t = self.truth_set(a);
                (0..self.worlds.len()).filter(|&w| self.succ[w] & t != 0).fold(0, |acc, w| acc | 1 << w)
            }
        }
    }

    pub fn eval(&self, w: usize, f: &Formula) -> Result<bool> {
        if w >= self.worlds.len() {
            return Err(Error::InvalidModel(format!("no world with index {w}")));
        }
        Ok(self.truth_set(f) >> w & 1 == 1)
    }

    /// True if the frame meets the conditions of `logic`.
    pub fn frame_check(&self, logic: ModalLogic) -> bool {
        frame_ok(&self.succ, logic)
    }
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn frame_ok(succ: &[u64], logic: ModalLogic) -> bool {
    let n = succ.len();
    if logic.reflexive() && (0..n).any(|w| succ[w] >> w & 1 == 0) {
        return false;
    }
    if logic.transitive() && (0..n).any(|w| bits(succ[w]).any(|v| succ[v] & !succ[w] != 0)) {
        return false;
    }
    if logic.euclidean() && (0..n).any(|w| bits(succ[w]).any(|v| succ[w] & !succ[v] != 0)) {
        return false;
    }
    true
}

/// First model of `logic` with at most `max_worlds` worlds falsifying `f`,
/// with the world where it fails.
///
/// Candidates are ordered by world count, then edge mask (bit `i·n + j` for
/// the edge from world `i` to `j`), then valuation mask (atoms of `f` in
/// order, `n` bits each), then world.
pub fn find_countermodel(logic: ModalLogic, f: &Formula, max_worlds: usize) -> Result<Option<(KripkeModel, usize)>> {
    if max_worlds == 0 {
        return Err(Error::Precondition("max_worlds must be at least 1".to_string()));
    }
    if max_worlds > MAX_SEARCH_WORLDS {
        return Err(Error::TooLarge { what: "worlds to search", limit: MAX_SEARCH_WORLDS as u128, actual: max_worlds as u128 });
    }
    let atoms: Vec<Atom> = atoms_of(f).into_iter().collect();
    for n in 1..=max_worlds {
        let all = mask(n);
        let mut model = KripkeModel::with_default_names(n, &[], BTreeMap::new())?;
        for edges in 0u64..1 << (n * n) {
            let succ: Vec<u64> = (0..n).map(|i| edges >> (i * n) & all).collect();
            if !frame_ok(&succ, logic) {
                continue;
            }
            model.succ = succ;
            for val in 0u64..1 << (n * atoms.len()) {
                for (k, a) in atoms.iter().enumerate() {
                    model.valuation.insert(a.clone(), val >> (k * n) & all);
                }
                let t = model.truth_set(f);
                if t != all {
                    let w = (!t & all).trailing_zeros() as usize;
                    return Ok(Some((model, w)));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{enumerate_formulas, parse};
    use alloc::vec;
    use proptest::prelude::*;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn val(pairs: &[(&str, u64)]) -> BTreeMap<Atom, u64> {
        pairs.iter().map(|&(a, m)| (Atom::new(a).unwrap(), m)).collect()
    }

    #[test]
    fn basic_clauses() {
        let loop_p = KripkeModel::with_default_names(1, &[(0, 0)], val(&[("p", 1)])).unwrap();
        assert!(loop_p.eval(0, &f("[]p")).unwrap());
        let lone = KripkeModel::with_default_names(1, &[], val(&[])).unwrap();
        assert!(lone.eval(0, &f("[]bot")).unwrap());
        assert!(!lone.eval(0, &f("<>p")).unwrap());
        let two = KripkeModel::with_default_names(2, &[(0, 1)], val(&[("p", 0b10)])).unwrap();
        assert!(two.eval(0, &f("<>p")).unwrap());
        assert!(two.eval(0, &f("[]p")).unwrap());
        assert!(!two.eval(0, &f("p")).unwrap());
        assert!(two.eval(5, &f("p")).is_err());
    }

    #[test]
    fn rejects_malformed_models() {
        assert!(KripkeModel::with_default_names(2, &[(0, 2)], val(&[])).is_err());
        assert!(KripkeModel::with_default_names(2, &[], val(&[("p", 0b100)])).is_err());
        assert!(KripkeModel::new(vec!["a".into(), "a".into()], &[], val(&[])).is_err());
    }

    #[test]
    fn frame_conditions() {
        let m = KripkeModel::with_default_names(2, &[(0, 1)], val(&[])).unwrap();
        assert!(m.frame_check(ModalLogic::K));
        assert!(!m.frame_check(ModalLogic::KT));
        assert!(m.frame_check(ModalLogic::K4));
        assert!(!m.frame_check(ModalLogic::KEuclidean));
    }

    #[test]
    fn known_countermodels() {
        let (m, w) = find_countermodel(ModalLogic::K, &f("[]p -> p"), 3).unwrap().unwrap();
        assert_eq!((m.world_count(), w, m.edges().len()), (1, 0, 0));
        let (m, _) = find_countermodel(ModalLogic::K, &f("[]p -> [][]p"), 3).unwrap().unwrap();
        assert_eq!(m.world_count(), 2);
        let (m, _) = find_countermodel(ModalLogic::KT, &f("[]p -> [][]p"), 3).unwrap().unwrap();
        assert_eq!(m.world_count(), 3);
        // A single reflexive world with p and q false already works.
        let (m, _) = find_countermodel(ModalLogic::K, &f("[](p -> q) -> []q"), 3).unwrap().unwrap();
        assert_eq!((m.world_count(), m.edges()), (1, vec![(0, 0)]));
        assert!(find_countermodel(ModalLogic::KT, &f("[]p -> p"), 3).unwrap().is_none());
        assert!(find_countermodel(ModalLogic::S4, &f("[]p -> [][]p"), 3).unwrap().is_none());
        assert!(find_countermodel(ModalLogic::K, &f("[](p -> q) -> []p -> []q"), 3).unwrap().is_none());
        assert!(find_countermodel(ModalLogic::K, &f("p"), 5).is_err());
    }

    #[test]
    fn countermodels_really_falsify() {
        let p = [Atom::new("p").unwrap()];
        for logic in ModalLogic::ALL {
            for phi in enumerate_formulas(&p, 2, true) {
                if let Some((m, w)) = find_countermodel(logic, &phi, 2).unwrap() {
                    assert!(m.frame_check(logic));
                    assert!(!m.eval(w, &phi).unwrap());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn negation_flips_truth(edges in any::<u16>(), v in any::<u8>(), w in 0usize..4, i in 0u128..122) {
            let e: Vec<(usize, usize)> = (0..16).filter(|b| edges >> b & 1 == 1).map(|b| (b / 4, b % 4)).collect();
            let m = KripkeModel::with_default_names(4, &e, val(&[("p", (v & 15) as u64)])).unwrap();
            let p = [Atom::new("p").unwrap()];
            let phi = crate::formula::FormulaSpace::new(&p, 2, true).get(i).unwrap();
            prop_assert_eq!(m.eval(w, &Formula::not(phi.clone())).unwrap(), !m.eval(w, &phi).unwrap());
        }
    }
}
