//! Hilbert-style proofs: axiom-schema matching and step-by-step checking.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;
use crate::formula::Formula;
use crate::relation::ModalLogic;

/// Axiom schemas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    /// `φ → (ψ → φ)`
    A1,
    /// `(φ → (ψ → χ)) → ((φ → ψ) → (φ → χ))`
    A2,
    /// `((φ → ⊥) → (ψ → ⊥)) → (ψ → φ)`
    A3,
    /// `□(φ → ψ) → (□φ → □ψ)`
    K,
    /// `□φ → φ`
    T,
    /// `□φ → □□φ`
    Four,
    /// `◇φ → □◇φ`
    Five,
}

impl Axiom {
    pub const ALL: [Axiom; 7] = [Axiom::A1, Axiom::A2, Axiom::A3, Axiom::K, Axiom::T, Axiom::Four, Axiom::Five];

    pub fn id(self) -> &'static str {
        match self {
            Axiom::A1 => "AX1",
            Axiom::A2 => "AX2",
            Axiom::A3 => "AX3",
            Axiom::K => "AXK",
            Axiom::T => "AXT",
            Axiom::Four => "AX4",
            Axiom::Five => "AX5",
        }
    }

    pub fn available_in(self, logic: ModalLogic) -> bool {
        match self {
            Axiom::A1 | Axiom::A2 | Axiom::A3 | Axiom::K => true,
            Axiom::T => logic.reflexive(),
            Axiom::Four => logic.transitive(),
            Axiom::Five => logic.euclidean(),
        }
    }

    fn schema(self) -> Schema {
        let (phi, psi, chi) = (|| Schema::Meta(0), || Schema::Meta(1), || Schema::Meta(2));
        let dia = |a: Schema| Schema::Diamond(Box::new(a));
        match self {
            Axiom::A1 => imp(phi(), imp(psi(), phi())),
            Axiom::A2 => imp(imp(phi(), imp(psi(), chi())), imp(imp(phi(), psi()), imp(phi(), chi()))),
            Axiom::A3 => imp(imp(imp(phi(), Schema::Bottom), imp(psi(), Schema::Bottom)), imp(psi(), phi())),
            Axiom::K => imp(bx(imp(phi(), psi())), imp(bx(phi()), bx(psi()))),
            Axiom::T => imp(bx(phi()), phi()),
            Axiom::Four => imp(bx(phi()), bx(bx(phi()))),
            Axiom::Five => imp(dia(phi()), bx(dia(phi()))),
        }
    }

    /// The instance of this schema with metavariables replaced, in order, by `args`.
    pub fn instance(self, args: &[Formula]) -> Formula {
        self.schema().fill(args)
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Axiom, Error> {
        match s {
            "AX1" | "A1" | "1" => Ok(Axiom::A1),
            "AX2" | "A2" | "2" => Ok(Axiom::A2),
            "AX3" | "A3" | "3" => Ok(Axiom::A3),
            "AXK" | "K" => Ok(Axiom::K),
            "AXT" | "T" => Ok(Axiom::T),
            "AX4" | "4" => Ok(Axiom::Four),
            "AX5" | "5" => Ok(Axiom::Five),
            other => Err(Error::Precondition(alloc::format!("unknown axiom `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
enum Schema {
    Meta(u8),
    Bottom,
    Implies(Box<Schema>, Box<Schema>),
    Box(Box<Schema>),
    Diamond(Box<Schema>),
}

fn imp(a: Schema, b: Schema) -> Schema {
    Schema::Implies(Box::new(a), Box::new(b))
}

fn bx(a: Schema) -> Schema {
    Schema::Box(Box::new(a))
}

impl Schema {
    fn matches<'f>(&self, f: &'f Formula, subst: &mut [Option<&'f Formula>; 3]) -> bool {
        match (self, f) {
            (Schema::Meta(i), _) => match subst[*i as usize] {
                Some(bound) => bound == f,
                None => {
                    subst[*i as usize] = Some(f);
                    true
                }
            },
            (Schema::Bottom, Formula::Bottom) => true,
            (Schema::Implies(a, b), Formula::Implies(x, y)) => a.matches(x, subst) && b.matches(y, subst),
            (Schema::Box(a), Formula::Box(x)) | (Schema::Diamond(a), Formula::Diamond(x)) => a.matches(x, subst),
            _ => false,
        }
    }

    fn fill(&self, args: &[Formula]) -> Formula {
        match self {
            Schema::Meta(i) => args[*i as usize].clone(),
            Schema::Bottom => Formula::Bottom,
            Schema::Implies(a, b) => Formula::implies(a.fill(args), b.fill(args)),
            Schema::Box(a) => Formula::boxed(a.fill(args)),
            Schema::Diamond(a) => Formula::diamond(a.fill(args)),
        }
    }
}

/// Names of the schema metavariables, in index order.
pub const METAVARIABLES: [&str; 3] = ["phi", "psi", "chi"];

/// Matches `f` against an axiom schema, returning the metavariable bindings.
pub fn match_axiom(f: &Formula, axiom: Axiom) -> Option<BTreeMap<&'static str, Formula>> {
    let mut subst = [None, None, None];
    if !axiom.schema().matches(f, &mut subst) {
        return None;
    }
    Some(
        subst
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|g| (METAVARIABLES[i], g.clone())))
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Justification {
    Axiom(Axiom),
    /// From step `.0` (the antecedent) and step `.1` (the implication).
    MP(usize, usize),
    Nec(usize),
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Axiom(ax) => write!(f, "{}", ax.id()),
            Justification::MP(i, j) => write!(f, "MP {i} {j}"),
            Justification::Nec(i) => write!(f, "NEC {i}"),
        }
    }
}

/// Parses `MP i j`, `NEC i` or an axiom id; commas and parentheses count as spaces.
impl FromStr for Justification {
    type Err = String;

    fn from_str(s: &str) -> Result<Justification, String> {
        let cleaned: String = s.chars().map(|c| if matches!(c, ',' | '(' | ')') { ' ' } else { c }).collect();
        let words: Vec<&str> = cleaned.split_whitespace().collect();
        let index = |w: &str| w.parse::<usize>().map_err(|_| alloc::format!("bad step index `{w}`"));
        match words[..] {
            [w, i, j] if w.eq_ignore_ascii_case("mp") => Ok(Justification::MP(index(i)?, index(j)?)),
            [w, i] if w.eq_ignore_ascii_case("nec") => Ok(Justification::Nec(index(i)?)),
            [w] => w.parse::<Axiom>().map(Justification::Axiom).map_err(|_| alloc::format!("unknown justification `{s}`")),
            _ => Err(alloc::format!("unknown justification `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofStep {
    pub formula: Formula,
    pub by: Justification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertProof {
    pub logic: ModalLogic,
    pub steps: Vec<ProofStep>,
}

impl HilbertProof {
    pub fn new(logic: ModalLogic) -> HilbertProof {
        HilbertProof { logic, steps: Vec::new() }
    }

    /// Appends a step and returns its index.
    pub fn push(&mut self, formula: Formula, by: Justification) -> usize {
        self.steps.push(ProofStep { formula, by });
        self.steps.len() - 1
    }

    pub fn conclusion(&self) -> Option<&Formula> {
        self.steps.last().map(|s| &s.formula)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("step {step}: {reason}")]
pub struct ProofError {
    pub step: usize,
    pub reason: String,
}

fn fail(step: usize, reason: impl Into<String>) -> Result<(), ProofError> {
    Err(ProofError { step, reason: reason.into() })
}

/// Checks every step; reports the first that does not follow.
pub fn check_proof(pr: &HilbertProof) -> Result<(), ProofError> {
    if pr.steps.is_empty() {
        return fail(0, "empty proof");
    }
    for (k, step) in pr.steps.iter().enumerate() {
        match step.by {
            Justification::Axiom(ax) => {
                if !ax.available_in(pr.logic) {
                    return fail(k, alloc::format!("axiom {ax} not in {}", pr.logic));
                }
                if match_axiom(&step.formula, ax).is_none() {
                    return fail(k, alloc::format!("not an instance of {ax}"));
                }
            }
            Justification::MP(i, j) => {
                if i >= k || j >= k {
                    return fail(k, "MP refers to a later step");
                }
                let (a, b) = (&pr.steps[i].formula, &pr.steps[j].formula);
                let follows = |ante: &Formula, imp: &Formula| {
                    matches!(imp, Formula::Implies(x, y) if **x == *ante && **y == step.formula)
                };
                if !follows(a, b) && !follows(b, a) {
                    return fail(k, alloc::format!("MP from steps {i} and {j} does not give this formula"));
                }
            }
            Justification::Nec(i) => {
                if i >= k {
                    return fail(k, "NEC refers to a later step");
                }
                if step.formula != Formula::boxed(pr.steps[i].formula.clone()) {
                    return fail(k, alloc::format!("not the necessitation of step {i}"));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use proptest::prelude::*;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn schema_matching() {
        let s = match_axiom(&f("p -> q -> p"), Axiom::A1).unwrap();
        assert_eq!(s["phi"], f("p"));
        assert_eq!(s["psi"], f("q"));
        let k = match_axiom(&f("[](p -> q) -> []p -> []q"), Axiom::K).unwrap();
        assert_eq!((k["phi"].clone(), k["psi"].clone()), (f("p"), f("q")));
        assert!(match_axiom(&f("p -> p"), Axiom::A1).is_none());
        assert!(match_axiom(&f("(~p -> ~q) -> q -> p"), Axiom::A3).is_some());
        assert!(match_axiom(&f("<>p -> []<>p"), Axiom::Five).is_some());
        assert!(match_axiom(&f("[]p -> [][]q"), Axiom::Four).is_none());
    }

    fn identity_proof(logic: ModalLogic) -> HilbertProof {
        let mut pr = HilbertProof::new(logic);
        let a = pr.push(f("p -> (p -> p) -> p"), Justification::Axiom(Axiom::A1));
        let b = pr.push(f("(p -> (p -> p) -> p) -> (p -> p -> p) -> p -> p"), Justification::Axiom(Axiom::A2));
        let c = pr.push(f("(p -> p -> p) -> p -> p"), Justification::MP(a, b));
        let d = pr.push(f("p -> p -> p"), Justification::Axiom(Axiom::A1));
        pr.push(f("p -> p"), Justification::MP(d, c));
        pr
    }

    #[test]
    fn textbook_identity_proof_checks() {
        assert_eq!(check_proof(&identity_proof(ModalLogic::K)), Ok(()));
        let mut boxed = identity_proof(ModalLogic::K);
        boxed.push(f("[](p -> p)"), Justification::Nec(4));
        assert_eq!(check_proof(&boxed), Ok(()));
    }

    #[test]
    fn rejects_bad_steps() {
        let mut t = HilbertProof::new(ModalLogic::K);
        t.push(f("[]p -> p"), Justification::Axiom(Axiom::T));
        assert_eq!(check_proof(&t).unwrap_err().step, 0);
        t.logic = ModalLogic::KT;
        assert_eq!(check_proof(&t), Ok(()));

        let mut fwd = HilbertProof::new(ModalLogic::K);
        fwd.push(f("p"), Justification::MP(0, 1));
        assert!(check_proof(&fwd).is_err());

        let mut nec = HilbertProof::new(ModalLogic::K);
        nec.push(f("p -> q -> p"), Justification::Axiom(Axiom::A1));
        nec.push(f("[]p"), Justification::Nec(0));
        assert_eq!(check_proof(&nec).unwrap_err().step, 1);

        let mut five = HilbertProof::new(ModalLogic::S4);
        five.push(f("<>p -> []<>p"), Justification::Axiom(Axiom::Five));
        assert!(check_proof(&five).is_err());
        five.logic = ModalLogic::KEuclidean;
        assert!(check_proof(&five).is_ok());
        assert!(check_proof(&HilbertProof::new(ModalLogic::K)).is_err());
    }

    proptest! {
        #[test]
        fn instances_match_their_schema(a in 0u128..122, b in 0u128..122, c in 0u128..122, ax in 0usize..7) {
            let p = [crate::formula::Atom::new("p").unwrap()];
            let space = crate::formula::FormulaSpace::new(&p, 2, true);
            let args = [space.get(a).unwrap(), space.get(b).unwrap(), space.get(c).unwrap()];
            let axiom = Axiom::ALL[ax];
            let inst = axiom.instance(&args);
            let subst = match_axiom(&inst, axiom).unwrap();
            prop_assert_eq!(&subst["phi"], &args[0]);
            prop_assert_eq!(axiom.schema().fill(&[
                subst["phi"].clone(),
                subst.get("psi").cloned().unwrap_or(Formula::Bottom),
                subst.get("chi").cloned().unwrap_or(Formula::Bottom),
            ]), inst);
        }
    }

    #[test]
    fn justifications_round_trip_through_text() {
        use alloc::string::ToString;
        for j in [Justification::Axiom(Axiom::Four), Justification::MP(0, 3), Justification::Nec(2)] {
            assert_eq!(j.to_string().parse::<Justification>().unwrap(), j);
        }
        assert_eq!("MP(1, 2)".parse::<Justification>().unwrap(), Justification::MP(1, 2));
        assert_eq!("K".parse::<Justification>().unwrap(), Justification::Axiom(Axiom::K));
        assert!("MP 1".parse::<Justification>().is_err());
        assert!("NEC x".parse::<Justification>().is_err());
    }
}
