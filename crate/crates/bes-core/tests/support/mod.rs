//! Hilbert proof construction for the acceptance run.
//!
//! Propositional reasoning goes through Kalmár's lemma with every `□ψ`, `◇ψ`
//! and atom treated as a letter. Modal steps come from axiom instances over
//! subformulas and from necessitating theorems one box down. Derivations are
//! built as trees with hypotheses and compiled to plain steps by bracket
//! abstraction.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use bes_core::hilbert::{Axiom, HilbertProof, Justification};
use bes_core::{Formula, ModalLogic};

#[derive(Debug)]
enum Kind {
    Hyp,
    Ax(Axiom),
    Mp(D, D),
    Nec(D),
}

#[derive(Debug)]
struct Node {
    concl: Formula,
    kind: Kind,
}

type D = Rc<Node>;

fn imp(a: &Formula, b: &Formula) -> Formula {
    Formula::implies(a.clone(), b.clone())
}

fn neg(a: &Formula) -> Formula {
    imp(a, &Formula::Bottom)
}

fn hyp(f: &Formula) -> D {
    Rc::new(Node { concl: f.clone(), kind: Kind::Hyp })
}

fn ax(a: Axiom, args: &[Formula]) -> D {
    Rc::new(Node { concl: a.instance(args), kind: Kind::Ax(a) })
}

fn mp(a: D, f: D) -> D {
    let Formula::Implies(lhs, rhs) = &f.concl else { panic!("MP on a non-implication {}", f.concl) };
    assert_eq!(**lhs, a.concl, "MP antecedent mismatch");
    let concl = (**rhs).clone();
    Rc::new(Node { concl, kind: Kind::Mp(a, f) })
}

fn nec(d: D) -> D {
    assert!(closed(&d));
    Rc::new(Node { concl: Formula::boxed(d.concl.clone()), kind: Kind::Nec(d) })
}

fn uses(d: &D, h: &Formula) -> bool {
    match &d.kind {
        Kind::Hyp => d.concl == *h,
        Kind::Ax(_) | Kind::Nec(_) => false,
        Kind::Mp(a, f) => uses(a, h) || uses(f, h),
    }
}

fn closed(d: &D) -> bool {
    match &d.kind {
        Kind::Hyp => false,
        Kind::Ax(_) | Kind::Nec(_) => true,
        Kind::Mp(a, f) => closed(a) && closed(f),
    }
}

fn identity(h: &Formula) -> D {
    let hh = imp(h, h);
    let s = mp(ax(Axiom::A1, &[h.clone(), hh.clone()]), ax(Axiom::A2, &[h.clone(), hh, h.clone()]));
    mp(ax(Axiom::A1, &[h.clone(), h.clone()]), s)
}

/// Discharges hypothesis `h`: a derivation of `h → concl(d)`.
fn lam(h: &Formula, d: &D) -> D {
    if !uses(d, h) {
        return mp(d.clone(), ax(Axiom::A1, &[d.concl.clone(), h.clone()]));
    }
    match &d.kind {
        Kind::Hyp => identity(h),
        Kind::Mp(a, f) => {
            let la = lam(h, a);
            let lf = lam(h, f);
            let Formula::Implies(_, b) = &f.concl else { unreachable!() };
            let a2 = ax(Axiom::A2, &[h.clone(), a.concl.clone(), (**b).clone()]);
            mp(la, mp(lf, a2))
        }
        Kind::Ax(_) | Kind::Nec(_) => unreachable!(),
    }
}

/// From `(φ → ⊥) → (⊤ → ⊥)` with `⊤ = ⊥ → ⊥`, derives `φ`.
fn finish_a3(phi: &Formula, d: D) -> D {
    let top = neg(&Formula::Bottom);
    mp(identity(&Formula::Bottom), mp(d, ax(Axiom::A3, &[phi.clone(), top])))
}

fn efq(bot: D, phi: &Formula) -> D {
    let top = neg(&Formula::Bottom);
    let top_bot = mp(bot, ax(Axiom::A1, &[Formula::Bottom, top.clone()]));
    finish_a3(phi, mp(top_bot, ax(Axiom::A1, &[neg(&top), neg(phi)])))
}

/// From a derivation of `(φ → ⊥) → ⊥`, derives `φ`.
fn dne(phi: &Formula, d: D) -> D {
    let n = neg(phi);
    let top = neg(&Formula::Bottom);
    let bot = mp(hyp(&n), d);
    let top_bot = mp(bot, ax(Axiom::A1, &[Formula::Bottom, top]));
    finish_a3(phi, lam(&n, &top_bot))
}

/// From `Γ, a ⊢ φ` and `Γ, a → ⊥ ⊢ φ`, derives `Γ ⊢ φ`.
fn cases(a: &Formula, phi: &Formula, pos: D, negd: D) -> D {
    let l1 = lam(a, &pos);
    let l2 = lam(&neg(a), &negd);
    let n = neg(phi);
    let na = lam(a, &mp(mp(hyp(a), l1), hyp(&n)));
    let bot = mp(mp(na, l2), hyp(&n));
    dne(phi, lam(&n, &bot))
}

fn letters(f: &Formula, out: &mut BTreeSet<Formula>) {
    match f {
        Formula::Bottom => {}
        Formula::Implies(a, b) => {
            letters(a, out);
            letters(b, out);
        }
        _ => {
            out.insert(f.clone());
        }
    }
}

fn value(f: &Formula, v: &HashMap<Formula, bool>) -> bool {
    match f {
        Formula::Bottom => false,
        Formula::Implies(a, b) => !value(a, v) || value(b, v),
        _ => v[f],
    }
}

fn literal(f: &Formula, truth: bool) -> Formula {
    if truth {
        f.clone()
    } else {
        neg(f)
    }
}

/// Kalmár: the letters' literals under `v` derive `f` or `f → ⊥`.
fn kalmar(f: &Formula, v: &HashMap<Formula, bool>) -> D {
    match f {
        Formula::Bottom => identity(&Formula::Bottom),
        Formula::Implies(a, b) => {
            if value(b, v) {
                mp(kalmar(b, v), ax(Axiom::A1, &[(**b).clone(), (**a).clone()]))
            } else if !value(a, v) {
                let bot = mp(hyp(a), kalmar(a, v));
                lam(a, &efq(bot, b))
            } else {
                let h = f.clone();
                let bot = mp(mp(kalmar(a, v), hyp(&h)), kalmar(b, v));
                lam(&h, &bot)
            }
        }
        _ => hyp(&literal(f, v[f])),
    }
}

fn tautology(f: &Formula) -> bool {
    let mut ls = BTreeSet::new();
    letters(f, &mut ls);
    let ls: Vec<Formula> = ls.into_iter().collect();
    (0u32..1 << ls.len()).all(|m| {
        let v = ls.iter().enumerate().map(|(i, l)| (l.clone(), m >> i & 1 == 1)).collect();
        value(f, &v)
    })
}

fn prove_tautology(f: &Formula) -> D {
    fn go(f: &Formula, ls: &[Formula], v: &mut HashMap<Formula, bool>) -> D {
        let Some((first, rest)) = ls.split_first() else { return kalmar(f, v) };
        v.insert(first.clone(), true);
        let pos = go(f, rest, v);
        v.insert(first.clone(), false);
        let negd = go(f, rest, v);
        v.remove(first);
        cases(first, f, pos, negd)
    }
    let mut ls = BTreeSet::new();
    letters(f, &mut ls);
    let ls: Vec<Formula> = ls.into_iter().collect();
    let d = go(f, &ls, &mut HashMap::new());
    assert!(closed(&d));
    d
}

fn subformulas(f: &Formula, out: &mut BTreeSet<Formula>) {
    out.insert(f.clone());
    for c in f.children() {
        subformulas(c, out);
    }
}

/// Searches for Hilbert proofs in one logic.
pub struct Prover {
    logic: ModalLogic,
    memo: HashMap<Formula, Option<D>>,
}

impl Prover {
    pub fn new(logic: ModalLogic) -> Prover {
        Prover { logic, memo: HashMap::new() }
    }

    /// A checked-ready proof of `f`, when the search finds one.
    pub fn proof(&mut self, f: &Formula) -> Option<HilbertProof> {
        let d = self.derive(f)?;
        let mut p = HilbertProof::new(self.logic);
        let mut seen = HashMap::new();
        emit(&d, &mut p, &mut seen);
        Some(p)
    }

    fn derive(&mut self, f: &Formula) -> Option<D> {
        if let Some(d) = self.memo.get(f) {
            return d.clone();
        }
        self.memo.insert(f.clone(), None);
        let d = self.search(f);
        self.memo.insert(f.clone(), d.clone());
        d
    }

    fn search(&mut self, f: &Formula) -> Option<D> {
        if tautology(f) {
            return Some(prove_tautology(f));
        }
        let mut ls = BTreeSet::new();
        letters(f, &mut ls);
        let mut facts = self.facts(f, &ls);
        let chain = |facts: &[D]| facts.iter().rev().fold(f.clone(), |acc, d| imp(&d.concl, &acc));
        if !tautology(&chain(&facts)) {
            return None;
        }
        let mut i = 0;
        while i < facts.len() {
            let fewer: Vec<D> = facts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, d)| d.clone()).collect();
            if tautology(&chain(&fewer)) {
                facts = fewer;
            } else {
                i += 1;
            }
        }
        let mut d = prove_tautology(&chain(&facts));
        for fact in facts {
            d = mp(fact, d);
        }
        Some(d)
    }

    /// Modal theorems whose letters all occur in `f`.
    fn facts(&mut self, f: &Formula, ls: &BTreeSet<Formula>) -> Vec<D> {
        let mut pool = BTreeSet::new();
        subformulas(f, &mut pool);
        let pool: Vec<Formula> = pool.into_iter().collect();
        let within = |g: &Formula| {
            let mut gl = BTreeSet::new();
            letters(g, &mut gl);
            gl.is_subset(ls)
        };
        let mut out = Vec::new();
        for a in [Axiom::T, Axiom::Four, Axiom::Five] {
            if a.available_in(self.logic) {
                out.extend(pool.iter().map(|x| ax(a, std::slice::from_ref(x))).filter(|d| within(&d.concl)));
            }
        }
        let boxed: Vec<Formula> = ls
            .iter()
            .filter_map(|l| match l {
                Formula::Box(inner) => Some((**inner).clone()),
                _ => None,
            })
            .collect();
        for x in &pool {
            for y in &pool {
                let k = ax(Axiom::K, &[x.clone(), y.clone()]);
                if within(&k.concl) {
                    out.push(k);
                }
            }
        }
        for t in &boxed {
            if let Some(d) = self.derive(t) {
                out.push(nec(d));
            }
            for s in &boxed {
                if s != t {
                    if let Some(d) = self.derive(&imp(s, t)) {
                        out.push(nec(d));
                        out.push(ax(Axiom::K, &[s.clone(), t.clone()]));
                    }
                }
            }
        }
        out
    }
}

fn emit(d: &D, p: &mut HilbertProof, seen: &mut HashMap<Formula, usize>) -> usize {
    if let Some(&i) = seen.get(&d.concl) {
        return i;
    }
    let by = match &d.kind {
        Kind::Hyp => panic!("open hypothesis {}", d.concl),
        Kind::Ax(a) => Justification::Axiom(*a),
        Kind::Mp(a, f) => {
            let i = emit(a, p, seen);
            let j = emit(f, p, seen);
            Justification::MP(i, j)
        }
        Kind::Nec(inner) => Justification::Nec(emit(inner, p, seen)),
    };
    let i = p.push(d.concl.clone(), by);
    seen.insert(d.concl.clone(), i);
    i
}
