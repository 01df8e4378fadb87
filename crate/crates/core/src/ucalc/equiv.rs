use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::UCalcError;
use crate::atoms::Registry;
use crate::lab::SearchMode;
use crate::model::{slot_count, team_projection, Elem, ModelError, Relation, SlotSet, Structure, Team};
use crate::syntax::{DependencySpec, Formula};
use crate::tarski::{dep_membership, eval_tarski};
use crate::teamsem::{satisfying_teams, EvalOptions, Evaluator, TeamError, TeamFamily};

/// One side of an equivalence.
#[derive(Clone, Copy, Debug)]
pub enum Side<'a> {
    /// Tarskian truth of a sentence in `(A, R, constants)`.
    Sentence(&'a Formula),
    /// Truth of a sentence for some value of an extra constant.
    SomeInterpretation {
        sentence: &'a Formula,
        constant: &'a str,
    },
    /// Team semantics of a formula.
    Team(&'a Formula),
    /// `(M, X(x⃗)) ⊨ χ` with the relation symbol read as `X(x⃗)`.
    Projected {
        sentence: &'a Formula,
        relation: &'a str,
        vars: &'a [String],
    },
    /// `(M, X(x⃗)) ∈ D`.
    Dependency {
        spec: &'a DependencySpec,
        vars: &'a [String],
    },
    /// `(P^M, X(x⃗)) ∈ D` for the scope's predicate `P`.
    Relativized {
        spec: &'a DependencySpec,
        vars: &'a [String],
    },
}

impl Side<'_> {
    fn name(&self) -> &'static str {
        match self {
            Side::Sentence(_) => "sentence",
            Side::SomeInterpretation { .. } => "some-interpretation",
            Side::Team(_) => "team",
            Side::Projected { .. } => "projected",
            Side::Dependency { .. } => "dependency",
            Side::Relativized { .. } => "relativized",
        }
    }

    fn team_level(&self) -> bool {
        !matches!(self, Side::Sentence(_) | Side::SomeInterpretation { .. })
    }
}

#[derive(Clone, Debug)]
pub enum Scope {
    /// Every `(0..n, R, constants)`.
    Structures {
        relation: String,
        arity: usize,
        constants: Vec<String>,
    },
    /// Every team over `vars`, on every structure interpreting `constants`
    /// and, if set, every extension of the unary `predicate`.
    Teams {
        vars: Vec<String>,
        constants: Vec<String>,
        predicate: Option<String>,
    },
}

#[derive(Clone, Debug)]
pub struct Bound {
    pub nmax: usize,
    pub scope: Scope,
    /// Relations or teams over at most this many positions are enumerated.
    pub exhaustive_cap: usize,
    /// Draws per structure beyond the cap.
    pub samples: usize,
    pub seed: u64,
    pub collect_all: bool,
}

impl Bound {
    pub fn new(nmax: usize, scope: Scope) -> Bound {
        Bound {
            nmax,
            scope,
            exhaustive_cap: 16,
            samples: 10_000,
            seed: 0,
            collect_all: false,
        }
    }

    pub fn structures(nmax: usize, relation: &str, arity: usize, constants: &[String]) -> Bound {
        Bound::new(
            nmax,
            Scope::Structures {
                relation: relation.to_string(),
                arity,
                constants: constants.to_vec(),
            },
        )
    }

    pub fn teams(nmax: usize, vars: &[String], constants: &[String], predicate: Option<&str>) -> Bound {
        Bound::new(
            nmax,
            Scope::Teams {
                vars: vars.to_vec(),
                constants: constants.to_vec(),
                predicate: predicate.map(String::from),
            },
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub domain: usize,
    pub constants: BTreeMap<String, Elem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicate: Option<Vec<Elem>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub team: Option<Team>,
    pub left: bool,
    pub right: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub nmax: usize,
    pub mode: SearchMode,
    /// Evaluation points compared.
    pub checked: u64,
    pub mismatches: Vec<Mismatch>,
}

impl EquivalenceReport {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Structures interpreting `constants`, one per assignment of values.
fn with_constants(n: usize, constants: &[String]) -> Result<Vec<Structure>, ModelError> {
    let mut out = vec![Structure::new(n)?];
    for c in constants {
        let mut next = Vec::new();
        for m in &out {
            for e in 0..n {
                let mut m2 = m.clone();
                m2.set_constant(c, e)?;
                next.push(m2);
            }
        }
        out = next;
    }
    Ok(out)
}

fn random_bits(rng: &mut ChaCha8Rng, universe: usize) -> SlotSet {
    let mut s = SlotSet::new(universe);
    for i in 0..universe {
        if rng.gen::<bool>() {
            s.insert(i);
        }
    }
    s
}

/// Every subset of `0..universe` when small, else `samples` random ones
/// after the empty set.
fn subsets(universe: usize, bound: &Bound, rng: &mut ChaCha8Rng) -> (Vec<SlotSet>, bool) {
    if universe <= bound.exhaustive_cap {
        let all = (0..1u64 << universe)
            .map(|m| SlotSet::from_mask(universe, m))
            .collect();
        (all, false)
    } else {
        let mut v = vec![SlotSet::new(universe)];
        v.extend((0..bound.samples).map(|_| random_bits(rng, universe)));
        (v, true)
    }
}

enum TeamEval<'a> {
    Bulk(TeamFamily),
    TopDown(Evaluator<'a>),
}

struct TeamCtx<'a> {
    m: &'a Structure,
    reg: &'a Registry,
    vars: &'a [String],
    team_evals: Vec<Option<TeamEval<'a>>>,
}

impl<'a> TeamCtx<'a> {
    fn eval_side(&mut self, i: usize, side: &Side<'a>, x: &Team) -> Result<bool, UCalcError> {
        match side {
            Side::Team(phi) => {
                if self.team_evals[i].is_none() {
                    let e = match satisfying_teams(self.m, self.vars, phi, self.reg) {
                        Ok(f) => TeamEval::Bulk(f),
                        Err(TeamError::Model(ModelError::ResourceLimit { .. })) => TeamEval::TopDown(
                            Evaluator::new(self.m, self.vars, phi, self.reg, EvalOptions::default())?,
                        ),
                        Err(e) => return Err(e.into()),
                    };
                    self.team_evals[i] = Some(e);
                }
                Ok(match self.team_evals[i].as_mut().expect("set above") {
                    TeamEval::Bulk(f) => f.contains(x),
                    TeamEval::TopDown(ev) => ev.eval(x)?,
                })
            }
            Side::Projected {
                sentence,
                relation,
                vars,
            } => {
                let rel = team_projection(x, vars)?;
                let m = self.m.clone().with_relation(relation, rel)?;
                Ok(eval_tarski(&m, &BTreeMap::new(), sentence)?)
            }
            Side::Dependency { spec, vars } => {
                Ok(dep_membership(spec, &team_projection(x, vars)?)?)
            }
            Side::Relativized { spec, vars } => {
                let (_, p) = self
                    .m
                    .predicate()
                    .ok_or(UCalcError::ScopeMismatch("relativized"))?;
                let rel = team_projection(x, vars)?;
                let domain: std::collections::BTreeSet<Elem> =
                    p.tuples().map(|t| t[0]).collect();
                if rel.tuples().any(|t| t.iter().any(|e| !domain.contains(e))) {
                    return Ok(false);
                }
                Ok(dep_membership(spec, &rel.restrict_to(&domain)?)?)
            }
            other => Err(UCalcError::ScopeMismatch(other.name())),
        }
    }
}

fn eval_sentence_side(m: &Structure, side: &Side) -> Result<bool, UCalcError> {
    match side {
        Side::Sentence(f) => Ok(eval_tarski(m, &BTreeMap::new(), f)?),
        Side::SomeInterpretation { sentence, constant } => {
            for e in 0..m.size() {
                let mut m2 = m.clone();
                m2.set_constant(constant, e)?;
                if eval_tarski(&m2, &BTreeMap::new(), sentence)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        other => Err(UCalcError::ScopeMismatch(other.name())),
    }
}

/// Compares two semantic objects at every point of the bound and reports
/// the first disagreement (or all of them with `collect_all`).
pub fn check_equivalence(
    left: &Side,
    right: &Side,
    bound: &Bound,
    reg: &Registry,
) -> Result<EquivalenceReport, UCalcError> {
    let mut rng = ChaCha8Rng::seed_from_u64(bound.seed);
    let mut sampled = false;
    let mut checked = 0u64;
    let mut mismatches = Vec::new();
    let done = |mm: &Vec<Mismatch>| !mm.is_empty() && !bound.collect_all;
    'outer: for n in 1..=bound.nmax {
        match &bound.scope {
            Scope::Structures {
                relation,
                arity,
                constants,
            } => {
                for side in [left, right] {
                    if side.team_level() {
                        return Err(UCalcError::ScopeMismatch(side.name()));
                    }
                }
                let p = slot_count(n, *arity).ok_or(ModelError::ResourceLimit {
                    n,
                    k: *arity,
                    cap: bound.exhaustive_cap,
                })?;
                let (rels, s) = subsets(p, bound, &mut rng);
                sampled |= s;
                for base in with_constants(n, constants)? {
                    for bits in &rels {
                        let r = Relation::from_bits(n, *arity, bits.clone());
                        let m = base.clone().with_relation(relation, r.clone())?;
                        let (a, b) = (eval_sentence_side(&m, left)?, eval_sentence_side(&m, right)?);
                        checked += 1;
                        if a != b {
                            mismatches.push(Mismatch {
                                domain: n,
                                constants: m.constants().clone(),
                                relation: Some(r),
                                predicate: None,
                                team: None,
                                left: a,
                                right: b,
                            });
                            if done(&mismatches) {
                                break 'outer;
                            }
                        }
                    }
                }
            }
            Scope::Teams {
                vars,
                constants,
                predicate,
            } => {
                for side in [left, right] {
                    if !side.team_level() {
                        return Err(UCalcError::ScopeMismatch(side.name()));
                    }
                }
                let slots = slot_count(n, vars.len()).ok_or(ModelError::ResourceLimit {
                    n,
                    k: vars.len(),
                    cap: bound.exhaustive_cap,
                })?;
                let (teams, s) = subsets(slots, bound, &mut rng);
                sampled |= s;
                let mut structures = Vec::new();
                for base in with_constants(n, constants)? {
                    match predicate {
                        None => structures.push(base),
                        Some(pname) => {
                            for pm in 0..1u64 << n {
                                let mut m = base.clone();
                                m.set_predicate(pname, (0..n).filter(|e| pm >> e & 1 == 1))?;
                                structures.push(m);
                            }
                        }
                    }
                }
                for m in &structures {
                    let mut ctx = TeamCtx {
                        m,
                        reg,
                        vars,
                        team_evals: vec![None, None],
                    };
                    for bits in &teams {
                        let x = Team::from_members(n, vars.clone(), bits.clone());
                        let a = ctx.eval_side(0, left, &x)?;
                        let b = ctx.eval_side(1, right, &x)?;
                        checked += 1;
                        if a != b {
                            mismatches.push(Mismatch {
                                domain: n,
                                constants: m.constants().clone(),
                                relation: None,
                                predicate: m.predicate().map(|(_, p)| p.tuples().map(|t| t[0]).collect()),
                                team: Some(x),
                                left: a,
                                right: b,
                            });
                            if done(&mismatches) {
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(EquivalenceReport {
        nmax: bound.nmax,
        mode: if sampled {
            SearchMode::Sampled {
                seed: bound.seed,
                samples: bound.samples,
            }
        } else {
            SearchMode::Exhaustive
        },
        checked,
        mismatches,
    })
}
