//! JSON shapes for inputs and reports.
//!
//! Bases are lists of rules written as strings (`"=> p"`, `"p, q => r"`).
//! Input shapes (universes, bases, relations, models, proofs) convert back to
//! core values; report shapes carry the same pieces so they parse back too.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use bes_core::bridge::{BridgeReport, EuclidReport};
use bes_core::hilbert::{HilbertProof, Justification, ProofError, ProofStep};
use bes_core::kripke::KripkeModel;
use bes_core::lemmas::{LemmaOutcome, LemmaResult};
use bes_core::relation::{ClosureRules, ConditionReport, Coverage};
use bes_core::semantics::{RelationWitness, Verdict};
use bes_core::{Atom, Base, Error, ExtensionalRelation, Formula, GeneratedRelation, ModalLogic, Relation, Result, RuleUniverse};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniverseDto {
    pub atoms: Vec<String>,
    pub max_premises: usize,
}

impl UniverseDto {
    pub fn from_core(u: &RuleUniverse) -> UniverseDto {
        UniverseDto { atoms: u.atoms().iter().map(|a| a.name().to_string()).collect(), max_premises: u.max_premises() }
    }

    pub fn to_core(&self) -> Result<RuleUniverse> {
        let names: Vec<&str> = self.atoms.iter().map(String::as_str).collect();
        RuleUniverse::from_names(&names, self.max_premises)
    }
}

/// A base as its rules, in universe order.
pub type BaseDto = Vec<String>;

pub fn base_to_dto(u: &RuleUniverse, b: Base) -> BaseDto {
    b.rule_indices().map(|i| u.show_rule(u.rule(i))).collect()
}

pub fn base_from_dto(u: &RuleUniverse, rules: &[String]) -> Result<Base> {
    let parsed = rules.iter().map(|r| parse_rule(u, r)).collect::<Result<Vec<_>>>()?;
    u.base_from_rules(&parsed)
}

/// Parses `"=> p"` or `"p, q => r"`.
pub fn parse_rule(u: &RuleUniverse, text: &str) -> Result<bes_core::BaseRule> {
    let (lhs, rhs) = text
        .split_once("=>")
        .ok_or_else(|| Error::Precondition(format!("rule `{text}` has no `=>`")))?;
    let premises: Vec<&str> = lhs.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    u.rule_named(&premises, rhs.trim())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureDto {
    pub inconsistent_total: bool,
    pub downward: bool,
    pub transitive: bool,
    pub reflexive: bool,
}

impl From<ClosureRules> for ClosureDto {
    fn from(c: ClosureRules) -> ClosureDto {
        ClosureDto { inconsistent_total: c.inconsistent_total, downward: c.downward, transitive: c.transitive, reflexive: c.reflexive }
    }
}

impl From<ClosureDto> for ClosureRules {
    fn from(c: ClosureDto) -> ClosureRules {
        ClosureRules { inconsistent_total: c.inconsistent_total, downward: c.downward, transitive: c.transitive, reflexive: c.reflexive }
    }
}

/// A relation file: every pair listed, or seeds plus closure rules.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RelationDto {
    Extensional {
        universe: UniverseDto,
        pairs: Vec<[BaseDto; 2]>,
    },
    Generated {
        universe: UniverseDto,
        logic: String,
        closure: ClosureDto,
        seeds: Vec<[BaseDto; 2]>,
        #[serde(default)]
        world_bases: Vec<BaseDto>,
    },
}

fn pairs_to_dto(u: &RuleUniverse, pairs: &[(Base, Base)]) -> Vec<[BaseDto; 2]> {
    pairs.iter().map(|&(x, y)| [base_to_dto(u, x), base_to_dto(u, y)]).collect()
}

fn pairs_from_dto(u: &RuleUniverse, pairs: &[[BaseDto; 2]]) -> Result<Vec<(Base, Base)>> {
    pairs.iter().map(|[x, y]| Ok((base_from_dto(u, x)?, base_from_dto(u, y)?))).collect()
}

impl RelationDto {
    pub fn from_extensional(r: &ExtensionalRelation) -> RelationDto {
        let u = r.universe();
        RelationDto::Extensional { universe: UniverseDto::from_core(u), pairs: pairs_to_dto(u, &r.pairs()) }
    }

    pub fn from_generated(r: &GeneratedRelation) -> RelationDto {
        let u = r.universe();
        RelationDto::Generated {
            universe: UniverseDto::from_core(u),
            logic: r.logic().name().to_string(),
            closure: r.rules().into(),
            seeds: pairs_to_dto(u, r.seeds()),
            world_bases: r.world_bases().iter().map(|&b| base_to_dto(u, b)).collect(),
        }
    }

    pub fn from_witness(w: &RelationWitness) -> RelationDto {
        match w {
            RelationWitness::Extensional(r) => RelationDto::from_extensional(r),
            RelationWitness::Generated(r) => RelationDto::from_generated(r),
        }
    }

    pub fn to_core(&self) -> Result<RelationWitness> {
        match self {
            RelationDto::Extensional { universe, pairs } => {
                let u = universe.to_core()?;
                let pairs = pairs_from_dto(&u, pairs)?;
                Ok(RelationWitness::Extensional(ExtensionalRelation::from_pairs(&u, &pairs)?))
            }
            RelationDto::Generated { universe, logic, closure, seeds, world_bases } => {
                let u = universe.to_core()?;
                let logic: ModalLogic = logic.parse()?;
                let seeds = pairs_from_dto(&u, seeds)?;
                let worlds = world_bases.iter().map(|b| base_from_dto(&u, b)).collect::<Result<Vec<_>>>()?;
                Ok(RelationWitness::Generated(GeneratedRelation::new(&u, logic, (*closure).into(), &seeds, &worlds)))
            }
        }
    }
}

/// A Kripke model with named worlds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KripkeDto {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
    /// Worlds where each atom is true.
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

impl KripkeDto {
    pub fn from_core(m: &KripkeModel) -> KripkeDto {
        let name = |w: usize| m.worlds()[w].clone();
        KripkeDto {
            worlds: m.worlds().to_vec(),
            edges: m.edges().into_iter().map(|(a, b)| [name(a), name(b)]).collect(),
            valuation: m
                .valuations()
                .iter()
                .map(|(a, &mask)| (a.name().to_string(), (0..m.world_count()).filter(|w| mask >> w & 1 == 1).map(name).collect()))
                .collect(),
        }
    }

    pub fn to_core(&self) -> Result<KripkeModel> {
        let index = |w: &str| {
            self.worlds.iter().position(|x| x == w).ok_or_else(|| Error::InvalidModel(format!("unknown world `{w}`")))
        };
        let edges = self.edges.iter().map(|[a, b]| Ok((index(a)?, index(b)?))).collect::<Result<Vec<_>>>()?;
        let mut valuation = BTreeMap::new();
        for (atom, worlds) in &self.valuation {
            let mut mask = 0u64;
            for w in worlds {
                mask |= 1 << index(w)?;
            }
            valuation.insert(Atom::new(atom)?, mask);
        }
        KripkeModel::new(self.worlds.clone(), &edges, valuation)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDto {
    pub formula: String,
    /// `AX1` … `AX5`, `AXK`, `AXT`, `MP i j` or `NEC i`.
    pub by: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logic: Option<String>,
    pub steps: Vec<StepDto>,
}

impl ProofDto {
    pub fn from_core(p: &HilbertProof) -> ProofDto {
        ProofDto {
            logic: Some(p.logic.name().to_string()),
            steps: p.steps.iter().map(|s| StepDto { formula: s.formula.to_string(), by: s.by.to_string() }).collect(),
        }
    }

    /// The proof, checked against `default_logic` when the file names none.
    pub fn to_core(&self, default_logic: ModalLogic) -> Result<HilbertProof> {
        let logic = match &self.logic {
            Some(l) => l.parse()?,
            None => default_logic,
        };
        let mut steps = Vec::with_capacity(self.steps.len());
        for (k, s) in self.steps.iter().enumerate() {
            let formula: Formula = s.formula.parse()?;
            let by: Justification =
                s.by.parse().map_err(|e: String| Error::Precondition(format!("step {k}: {e}")))?;
            steps.push(ProofStep { formula, by });
        }
        Ok(HilbertProof { logic, steps })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofCheckDto {
    pub logic: String,
    pub ok: bool,
    pub conclusion: Option<String>,
    pub error: Option<ProofErrorDto>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofErrorDto {
    pub step: usize,
    pub reason: String,
}

impl ProofCheckDto {
    pub fn new(p: &HilbertProof, result: &std::result::Result<(), ProofError>) -> ProofCheckDto {
        ProofCheckDto {
            logic: p.logic.name().to_string(),
            ok: result.is_ok(),
            conclusion: p.conclusion().map(|f| f.to_string()),
            error: result.as_ref().err().map(|e| ProofErrorDto { step: e.step, reason: e.reason.clone() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoverageDto {
    Exhaustive { bases: usize },
    Scoped { sources: usize, targets: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionVerdictDto {
    pub condition: String,
    pub gating: bool,
    pub pass: bool,
    /// Each violation lists its bases in quantifier order.
    pub violations: Vec<Vec<BaseDto>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReportDto {
    pub pass: bool,
    pub coverage: CoverageDto,
    pub verdicts: Vec<ConditionVerdictDto>,
}

impl ConditionReportDto {
    pub fn from_core(u: &RuleUniverse, r: &ConditionReport) -> ConditionReportDto {
        ConditionReportDto {
            pass: r.pass(),
            coverage: match r.coverage {
                Coverage::Exhaustive { bases } => CoverageDto::Exhaustive { bases },
                Coverage::Scoped { sources, targets } => CoverageDto::Scoped { sources, targets },
            },
            verdicts: r
                .verdicts
                .iter()
                .map(|v| ConditionVerdictDto {
                    condition: v.condition.name().to_string(),
                    gating: v.condition.gating(),
                    pass: v.pass(),
                    violations: v.violations.iter().map(|x| x.bases.iter().map(|&b| base_to_dto(u, b)).collect()).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModeDto {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDto {
    pub base: BaseDto,
    pub relation: RelationDto,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDto {
    /// `valid-over-universe`, `invalid` or `no-counterexample-found`.
    pub status: String,
    pub formula: String,
    pub logic: String,
    pub universe: UniverseDto,
    pub mode: ModeDto,
    /// Relations examined before the verdict.
    pub relations: Option<usize>,
    pub witness: Option<WitnessDto>,
}

impl VerdictDto {
    pub fn from_core(u: &RuleUniverse, logic: ModalLogic, f: &Formula, mode: ModeDto, v: &Verdict) -> VerdictDto {
        let (relations, witness) = match v {
            Verdict::Valid { relations } => (Some(*relations), None),
            Verdict::NoCounterexampleFound { samples } => (Some(*samples), None),
            Verdict::Invalid { base, relation } => {
                (None, Some(WitnessDto { base: base_to_dto(u, *base), relation: RelationDto::from_witness(relation) }))
            }
        };
        VerdictDto {
            status: v.label().to_string(),
            formula: f.to_string(),
            logic: logic.name().to_string(),
            universe: UniverseDto::from_core(u),
            mode,
            relations,
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementCellDto {
    pub world: String,
    pub formula: String,
    pub kripke: bool,
    pub bes: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldBaseDto {
    pub world: String,
    pub base: BaseDto,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeReportDto {
    pub success: bool,
    pub logic: String,
    pub formula: String,
    pub countermodel: KripkeDto,
    pub world: String,
    pub freshened: KripkeDto,
    pub fresh_atoms: Vec<String>,
    pub universe: UniverseDto,
    pub world_bases: Vec<WorldBaseDto>,
    pub relation: RelationDto,
    pub conditions: ConditionReportDto,
    pub evaluators: Vec<String>,
    pub agreement: Vec<AgreementCellDto>,
    pub holds_at_world_base: bool,
}

impl BridgeReportDto {
    pub fn from_core(r: &BridgeReport) -> BridgeReportDto {
        let u = &r.universe;
        let names = r.countermodel.worlds();
        BridgeReportDto {
            success: r.success(),
            logic: r.logic.name().to_string(),
            formula: r.formula.to_string(),
            countermodel: KripkeDto::from_core(&r.countermodel),
            world: names[r.world].clone(),
            freshened: KripkeDto::from_core(&r.freshened.model),
            fresh_atoms: r.freshened.fresh.iter().map(|a| a.name().to_string()).collect(),
            universe: UniverseDto::from_core(u),
            world_bases: r
                .world_bases
                .iter()
                .enumerate()
                .map(|(w, &b)| WorldBaseDto { world: names[w].clone(), base: base_to_dto(u, b) })
                .collect(),
            relation: RelationDto::from_generated(&r.relation),
            conditions: ConditionReportDto::from_core(u, &r.conditions),
            evaluators: r.agreement.evaluators.iter().map(|s| format!("{s:?}").to_lowercase()).collect(),
            agreement: r
                .agreement
                .cells
                .iter()
                .map(|c| AgreementCellDto { world: names[c.world].clone(), formula: c.formula.to_string(), kripke: c.kripke, bes: c.bes })
                .collect(),
            holds_at_world_base: r.holds_at_world_base,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EuclidReportDto {
    pub success: bool,
    pub status: String,
    pub universe: UniverseDto,
    pub named_bases: BTreeMap<String, BaseDto>,
    pub seeds: Vec<[BaseDto; 2]>,
    pub added: Vec<[BaseDto; 2]>,
    pub relation: RelationDto,
    pub conditions: ConditionReportDto,
    pub diamond_p: bool,
    pub box_diamond_p: bool,
    pub relations_examined: usize,
}

impl EuclidReportDto {
    pub fn from_core(r: &EuclidReport) -> EuclidReportDto {
        let u = &r.universe;
        let named = [("B", r.b), ("C", r.c), ("D", r.d), ("E", r.e), ("F", r.f)];
        EuclidReportDto {
            success: r.success(),
            status: r.status.label().to_string(),
            universe: UniverseDto::from_core(u),
            named_bases: named.iter().map(|&(n, b)| (n.to_string(), base_to_dto(u, b))).collect(),
            seeds: pairs_to_dto(u, &r.seeds),
            added: pairs_to_dto(u, &r.added),
            relation: RelationDto::from_generated(&r.relation),
            conditions: ConditionReportDto::from_core(u, &r.conditions),
            diamond_p: r.diamond_p,
            box_diamond_p: r.box_diamond_p,
            relations_examined: r.nodes_explored,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaWitnessDto {
    pub universe: UniverseDto,
    pub logic: Option<String>,
    pub relation: Option<RelationDto>,
    pub bases: Vec<BaseDto>,
    pub assumptions: Vec<String>,
    pub formulas: Vec<String>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaResultDto {
    pub id: String,
    pub statement: String,
    pub pass: bool,
    pub cases: usize,
    pub vacuous: usize,
    pub witness: Option<LemmaWitnessDto>,
}

impl LemmaResultDto {
    pub fn from_core(r: &LemmaResult) -> LemmaResultDto {
        let witness = match &r.outcome {
            LemmaOutcome::Pass => None,
            LemmaOutcome::Fail(w) => Some(LemmaWitnessDto {
                universe: UniverseDto::from_core(&w.universe),
                logic: w.logic.map(|l| l.name().to_string()),
                relation: w.relation.as_ref().map(RelationDto::from_witness),
                bases: w.bases.iter().map(|&b| base_to_dto(&w.universe, b)).collect(),
                assumptions: w.gamma.iter().map(ToString::to_string).collect(),
                formulas: w.formulas.iter().map(ToString::to_string).collect(),
                detail: w.detail.clone(),
            }),
        };
        LemmaResultDto {
            id: r.id.to_string(),
            statement: r.statement.to_string(),
            pass: r.pass(),
            cases: r.cases,
            vacuous: r.vacuous,
            witness,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bes_core::relation::{close_relation, sample_modal_relation};
    use proptest::prelude::*;

    fn json_round_trip<T: Serialize + for<'de> Deserialize<'de> + PartialEq + std::fmt::Debug>(x: &T) -> T {
        let s = serde_json::to_string(x).unwrap();
        let back: T = serde_json::from_str(&s).unwrap();
        assert_eq!(&back, x);
        back
    }

    #[test]
    fn rules_parse_back() {
        let u = RuleUniverse::from_names(&["p", "q", "r"], 2).unwrap();
        for i in 0..u.rule_count() {
            let text = u.show_rule(u.rule(i));
            assert_eq!(parse_rule(&u, &text).unwrap(), u.rule(i), "{text}");
        }
        assert!(parse_rule(&u, "p -> q").is_err());
        assert!(parse_rule(&u, "s => p").is_err());
    }

    #[test]
    fn generated_relations_round_trip() {
        let u = RuleUniverse::from_names(&["p", "q"], 2).unwrap();
        for logic in ModalLogic::NORMAL {
            let g = sample_modal_relation(&u, logic, 11).unwrap();
            let dto = json_round_trip(&RelationDto::from_generated(&g));
            let RelationWitness::Generated(back) = dto.to_core().unwrap() else { panic!("kind changed") };
            assert_eq!(back.seeds(), g.seeds());
            assert_eq!(back.materialize().unwrap(), g.materialize().unwrap());
        }
    }

    #[test]
    fn extensional_relations_round_trip() {
        let u = RuleUniverse::from_names(&["p"], 1).unwrap();
        let ext = close_relation(&u, ModalLogic::KT, &[], &[]).materialize().unwrap();
        let dto = json_round_trip(&RelationDto::from_extensional(&ext));
        let RelationWitness::Extensional(back) = dto.to_core().unwrap() else { panic!("kind changed") };
        assert_eq!(back, ext);
    }

    #[test]
    fn models_round_trip() {
        let v: BTreeMap<Atom, u64> = [(Atom::new("p").unwrap(), 0b101)].into_iter().collect();
        let m = KripkeModel::new(vec!["a".into(), "b".into(), "c".into()], &[(0, 1), (1, 2), (2, 2)], v).unwrap();
        let dto = json_round_trip(&KripkeDto::from_core(&m));
        assert_eq!(dto.to_core().unwrap(), m);
        let bad = KripkeDto { worlds: vec!["a".into()], edges: vec![["a".into(), "z".into()]], valuation: BTreeMap::new() };
        assert!(bad.to_core().is_err());
    }

    #[test]
    fn proofs_round_trip() {
        let text = r#"{"steps": [
            {"formula": "p -> (p -> p) -> p", "by": "AX1"},
            {"formula": "(p -> (p -> p) -> p) -> (p -> p -> p) -> p -> p", "by": "AX2"},
            {"formula": "(p -> p -> p) -> p -> p", "by": "MP 0 1"},
            {"formula": "p -> p -> p", "by": "AX1"},
            {"formula": "p -> p", "by": "MP 3 2"}
        ]}"#;
        let dto: ProofDto = serde_json::from_str(text).unwrap();
        let p = dto.to_core(ModalLogic::K).unwrap();
        assert!(bes_core::hilbert::check_proof(&p).is_ok());
        let again = json_round_trip(&ProofDto::from_core(&p));
        assert_eq!(again.to_core(ModalLogic::S4).unwrap(), p);
    }

    #[test]
    fn reports_round_trip() {
        let phi: Formula = "[]p -> p".parse().unwrap();
        let r = bes_core::bridge::falsify_in_bes(ModalLogic::K, &phi, 2).unwrap().unwrap();
        let dto = json_round_trip(&BridgeReportDto::from_core(&r));
        assert!(dto.success);
        assert_eq!(dto.freshened.to_core().unwrap(), r.freshened.model);
        let RelationWitness::Generated(g) = dto.relation.to_core().unwrap() else { panic!("kind changed") };
        assert_eq!(g.world_bases(), r.world_bases.as_slice());

        let u = RuleUniverse::from_names(&["p"], 1).unwrap();
        let v = bes_core::semantics::valid_exhaustive(&u, ModalLogic::K, &phi).unwrap();
        let dto = json_round_trip(&VerdictDto::from_core(&u, ModalLogic::K, &phi, ModeDto::Exhaustive, &v));
        assert_eq!(dto.status, "invalid");
        let w = dto.witness.unwrap();
        let rel = w.relation.to_core().unwrap();
        let base = base_from_dto(&u, &w.base).unwrap();
        assert!(!bes_core::semantics::holds(rel.as_relation(), base, &phi).unwrap());
    }

    proptest! {
        #[test]
        fn bases_round_trip(members in any::<u64>(), atoms in 1usize..=3, premises in 1usize..=2) {
            let names = ["p", "q", "r"];
            let u = RuleUniverse::from_names(&names[..atoms], premises).unwrap();
            let b = u.base(members & u.all_rules());
            let dto = base_to_dto(&u, b);
            let text = serde_json::to_string(&dto).unwrap();
            let back: BaseDto = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(base_from_dto(&u, &back).unwrap(), b);
        }
    }
}
