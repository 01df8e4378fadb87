//! Single-assignment first-order evaluation and dependency membership.

use thiserror::Error;

use crate::atoms::builtin_holds;
use crate::model::{Assignment, Elem, Relation, Structure};
use crate::syntax::{AtomicFormula, DependencyBody, DependencySpec, Formula, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TarskiError {
    #[error("dependency atom `{0}` has no single-assignment meaning")]
    AtomEncountered(String),
    #[error("global disjunction has no single-assignment meaning")]
    GlobalOrEncountered,
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("relation `{name}` has arity {expected}, applied to {found} terms")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("dependency `{name}` has arity {expected}, given a relation of arity {found}")]
    MembershipArity {
        name: String,
        expected: usize,
        found: usize,
    },
}

/// What a formula is evaluated against: a domain `0..n`, relations and
/// constants.
pub trait Interpretation {
    fn domain_size(&self) -> usize;
    fn relation(&self, name: &str) -> Option<&Relation>;
    fn constant(&self, name: &str) -> Option<Elem>;
}

impl Interpretation for Structure {
    fn domain_size(&self) -> usize {
        self.size()
    }

    fn relation(&self, name: &str) -> Option<&Relation> {
        Structure::relation(self, name)
    }

    fn constant(&self, name: &str) -> Option<Elem> {
        Structure::constant(self, name)
    }
}

/// The structure `(A, R)` with `A = 0..R.domain_size()`, which may be empty.
#[derive(Clone, Copy, Debug)]
pub struct RelationView<'a> {
    pub name: &'a str,
    pub rel: &'a Relation,
}

impl Interpretation for RelationView<'_> {
    fn domain_size(&self) -> usize {
        self.rel.domain_size()
    }

    fn relation(&self, name: &str) -> Option<&Relation> {
        (name == self.name).then_some(self.rel)
    }

    fn constant(&self, _: &str) -> Option<Elem> {
        None
    }
}

/// Classical truth of a first-order formula under one assignment.
pub fn eval_tarski<I: Interpretation + ?Sized>(
    m: &I,
    s: &Assignment,
    phi: &Formula,
) -> Result<bool, TarskiError> {
    let mut env: Vec<(&str, Elem)> = s.iter().map(|(k, &v)| (k.as_str(), v)).collect();
    eval(m, &mut env, phi)
}

fn lookup(env: &[(&str, Elem)], v: &str) -> Option<Elem> {
    env.iter().rev().find(|(k, _)| *k == v).map(|&(_, e)| e)
}

fn term_value<I: Interpretation + ?Sized>(
    m: &I,
    env: &[(&str, Elem)],
    t: &Term,
) -> Result<Elem, TarskiError> {
    match t {
        Term::Var(v) => lookup(env, v).ok_or_else(|| TarskiError::UnboundVariable(v.clone())),
        Term::Const(c) => m
            .constant(c)
            .ok_or_else(|| TarskiError::UnknownConstant(c.clone())),
    }
}

fn eval<'f, I: Interpretation + ?Sized>(
    m: &I,
    env: &mut Vec<(&'f str, Elem)>,
    phi: &'f Formula,
) -> Result<bool, TarskiError> {
    match phi {
        Formula::Lit(l) => {
            let truth = match &l.atom {
                AtomicFormula::Eq(a, b) => term_value(m, env, a)? == term_value(m, env, b)?,
                AtomicFormula::Rel { name, args } => {
                    let rel = m
                        .relation(name)
                        .ok_or_else(|| TarskiError::UnknownRelation(name.clone()))?;
                    if rel.arity() != args.len() {
                        return Err(TarskiError::ArityMismatch {
                            name: name.clone(),
                            expected: rel.arity(),
                            found: args.len(),
                        });
                    }
                    let tuple = args
                        .iter()
                        .map(|t| term_value(m, env, t))
                        .collect::<Result<Vec<_>, _>>()?;
                    rel.contains(&tuple)
                }
            };
            Ok(truth == l.positive)
        }
        Formula::And(a, b) => Ok(eval(m, env, a)? && eval(m, env, b)?),
        Formula::Or(a, b) => Ok(eval(m, env, a)? || eval(m, env, b)?),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let existential = matches!(phi, Formula::Exists(..));
            for e in 0..m.domain_size() {
                env.push((v.as_str(), e));
                let r = eval(m, env, body);
                env.pop();
                if r? == existential {
                    return Ok(existential);
                }
            }
            Ok(!existential)
        }
        Formula::Atom(a) => Err(TarskiError::AtomEncountered(a.name.clone())),
        Formula::GlobalOr(..) => Err(TarskiError::GlobalOrEncountered),
    }
}

/// Truth of a sentence `D(R)` in `(A, R)`.
pub fn sentence_holds(relation: &str, sentence: &Formula, rel: &Relation) -> Result<bool, TarskiError> {
    eval_tarski(
        &RelationView {
            name: relation,
            rel,
        },
        &Assignment::new(),
        sentence,
    )
}

/// `(A, R) ∈ D`, where `A = 0..rel.domain_size()`.
pub fn dep_membership(spec: &DependencySpec, rel: &Relation) -> Result<bool, TarskiError> {
    if rel.arity() != spec.arity() {
        return Err(TarskiError::MembershipArity {
            name: spec.name.clone(),
            expected: spec.arity(),
            found: rel.arity(),
        });
    }
    match &spec.body {
        DependencyBody::Builtin(b) => Ok(builtin_holds(*b, &spec.split, rel)),
        DependencyBody::Sentence { relation, sentence } => sentence_holds(relation, sentence, rel),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, ParseContext};

    fn model() -> Structure {
        Structure::new(2)
            .unwrap()
            .with_relation("R", Relation::from_tuples(2, 1, [[0]]).unwrap())
            .unwrap()
    }

    fn at(x: Elem) -> Assignment {
        Assignment::from([("x".to_string(), x)])
    }

    #[test]
    fn examples() {
        let m = model();
        let f = parse_formula("R(x)", &ParseContext::default()).unwrap();
        assert!(eval_tarski(&m, &at(0), &f).unwrap());
        assert!(!eval_tarski(&m, &at(1), &f).unwrap());
        let g = parse_formula("A y. (!R(y) or y = x)", &ParseContext::default()).unwrap();
        assert!(eval_tarski(&m, &at(0), &g).unwrap());
    }

    #[test]
    fn errors() {
        let m = model();
        let ctx = ParseContext::default();
        let f = parse_formula("R(z)", &ctx).unwrap();
        assert_eq!(
            eval_tarski(&m, &at(0), &f),
            Err(TarskiError::UnboundVariable("z".into()))
        );
        let g = parse_formula("ne(x)", &ctx).unwrap();
        assert!(matches!(
            eval_tarski(&m, &at(0), &g),
            Err(TarskiError::AtomEncountered(_))
        ));
        let h = parse_formula("S(x)", &ctx).unwrap();
        assert!(matches!(
            eval_tarski(&m, &at(0), &h),
            Err(TarskiError::UnknownRelation(_))
        ));
    }

    #[test]
    fn empty_domain_quantifiers() {
        let r = Relation::empty(0, 1).unwrap();
        let ctx = ParseContext::default();
        let ex = crate::syntax::parse_sentence("E x. x = x", &ctx).unwrap();
        let all = crate::syntax::parse_sentence("A x. R(x)", &ctx).unwrap();
        assert!(!sentence_holds("R", &ex, &r).unwrap());
        assert!(sentence_holds("R", &all, &r).unwrap());
    }
}
