//! Rewrites on U-sentences, their translation into formulas with constancy,
//! nonemptiness and global disjunction, relativization of atoms, and a
//! brute-force equivalence certifier.

mod equiv;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::atoms::{Registry, RegistryError};
use crate::model::ModelError;
use crate::syntax::{
    parse_sentence, validate_u_sentence, Builtin, Flag, Formula, Fresh, Literal, ParseContext,
    ParseError, Term, USentence, UShapeError,
};
use crate::tarski::TarskiError;
use crate::teamsem::TeamError;

pub use equiv::{check_equivalence, Bound, EquivalenceReport, Mismatch, Scope, Side};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UCalcError {
    #[error("signatures differ: `{left}` vs `{right}`")]
    SignatureMismatch { left: String, right: String },
    #[error("constant `{0}` does not occur in the sentence")]
    ConstantAbsent(String),
    #[error("variable `{0}` clashes with the sentence's variables or is repeated")]
    VariableClash(String),
    #[error("expected {expected} variables, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("translation needs a relation of positive arity")]
    NullaryRelation,
    #[error("empty disjunction")]
    EmptyDisjunction,
    #[error("`{0}` is not known to be domain independent; relativization requires a domain-independent dependency")]
    NotDomainIndependent(String),
    #[error("side `{0}` cannot be evaluated in this scope")]
    ScopeMismatch(&'static str),
    #[error(transparent)]
    Shape(#[from] UShapeError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Team(#[from] TeamError),
    #[error(transparent)]
    Tarski(#[from] TarskiError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("line {line}: {source}")]
    Fixture { line: usize, source: Box<UCalcError> },
}

fn rename_lit(l: &Literal, from: &Term, to: &Term) -> Literal {
    l.map_terms(&mut |t| if t == from { to.clone() } else { t.clone() })
}

fn revalidate(u: USentence) -> Result<USentence, UCalcError> {
    Ok(validate_u_sentence(&u.to_formula())?)
}

/// A U-sentence equivalent to `a ∧ b`: `b`'s existential variables are
/// renamed apart and its universal variables identified with `a`'s.
pub fn conjoin_u(a: &USentence, b: &USentence) -> Result<USentence, UCalcError> {
    if a.relation != b.relation || a.arity() != b.arity() {
        return Err(UCalcError::SignatureMismatch {
            left: format!("{}/{}", a.relation, a.arity()),
            right: format!("{}/{}", b.relation, b.arity()),
        });
    }
    let (fa, fb) = (a.to_formula(), b.to_formula());
    let mut fresh = Fresh::avoiding([&fa, &fb]);
    let mut exists = a.exists.clone();
    let mut eta = a.eta.clone();
    let mut eta_b = b.eta.clone();
    let mut theta_b = b.theta.clone();
    for x in &b.exists {
        let z = fresh.name();
        let (from, to) = (Term::var(x), Term::var(&z));
        eta_b = eta_b.iter().map(|l| rename_lit(l, &from, &to)).collect();
        theta_b = theta_b.rename_free_var(x, &z, &mut fresh);
        exists.push(z);
    }
    let temps: Vec<String> = b.forall.iter().map(|_| fresh.name()).collect();
    for (y, t) in b.forall.iter().zip(&temps) {
        theta_b = theta_b.rename_free_var(y, t, &mut fresh);
    }
    for (t, y) in temps.iter().zip(&a.forall) {
        theta_b = theta_b.rename_free_var(t, y, &mut fresh);
    }
    eta.extend(eta_b);
    revalidate(USentence {
        relation: a.relation.clone(),
        exists,
        eta,
        forall: a.forall.clone(),
        theta: Formula::and(a.theta.clone(), theta_b),
    })
}

/// `E v. χ[v/c]` with a fresh `v` prepended to the existential block.
pub fn existentialize_constant(u: &USentence, c: &str) -> Result<USentence, UCalcError> {
    if !u.constants().contains(c) {
        return Err(UCalcError::ConstantAbsent(c.to_string()));
    }
    let f = u.to_formula();
    let mut fresh = Fresh::avoiding([&f]);
    let v = fresh.name();
    let (from, to) = (Term::constant(c), Term::var(&v));
    let mut exists = vec![v.clone()];
    exists.extend(u.exists.iter().cloned());
    revalidate(USentence {
        relation: u.relation.clone(),
        exists,
        eta: u.eta.iter().map(|l| rename_lit(l, &from, &to)).collect(),
        forall: u.forall.clone(),
        theta: u.theta.replace_constant(c, &v, &mut fresh),
    })
}

/// `E x⃗. (const(x⃗) and η' and θ[w⃗/y⃗])`, where each `R(t⃗)` of `η` becomes
/// `(w1 = w1 or (ne(w⃗) and t⃗ = w⃗))` and identity literals are kept.
pub fn translate_u(u: &USentence, w: &[String]) -> Result<Formula, UCalcError> {
    if u.arity() == 0 {
        return Err(UCalcError::NullaryRelation);
    }
    if w.len() != u.arity() {
        return Err(UCalcError::ArityMismatch {
            expected: u.arity(),
            found: w.len(),
        });
    }
    let taken = u.to_formula().all_variables();
    let mut seen = BTreeSet::new();
    if let Some(v) = w.iter().find(|v| taken.contains(*v) || !seen.insert(*v)) {
        return Err(UCalcError::VariableClash(v.clone()));
    }
    let top = Formula::top(Term::var(&w[0]));
    let ne = Formula::atom(Builtin::Ne.keyword(), vec![w.to_vec()]);
    let mut parts = Vec::new();
    if !u.exists.is_empty() {
        parts.push(Formula::atom(Builtin::Const.keyword(), vec![u.exists.clone()]));
    }
    for l in &u.eta {
        match &l.atom {
            crate::syntax::AtomicFormula::Rel { args, .. } if l.positive => {
                let eqs = args
                    .iter()
                    .zip(w)
                    .map(|(t, wi)| Formula::Lit(Literal::eq(true, t.clone(), Term::var(wi))));
                let hit = Formula::and(ne.clone(), Formula::conjunction(eqs).expect("positive arity"));
                parts.push(Formula::or(top.clone(), hit));
            }
            _ => parts.push(Formula::Lit(l.clone())),
        }
    }
    let mut fresh = Fresh::avoiding([&u.theta]);
    let mut theta = u.theta.clone();
    for (y, wi) in u.forall.iter().zip(w) {
        theta = theta.rename_free_var(y, wi, &mut fresh);
    }
    parts.push(theta);
    let body = Formula::conjunction(parts).expect("θ is always present");
    Ok(Formula::exists_all(&u.exists, body))
}

/// Global disjunction of the translations.
pub fn translate_disjunction(us: &[USentence], w: &[String]) -> Result<Formula, UCalcError> {
    let parts = us
        .iter()
        .map(|u| translate_u(u, w))
        .collect::<Result<Vec<_>, _>>()?;
    Formula::global_disjunction(parts).ok_or(UCalcError::EmptyDisjunction)
}

/// `D x⃗ and P(x1) and ... and P(xk)`, for a dependency `D` flagged domain
/// independent. `label` is resolved through the registry; the variables are
/// split into groups following the dependency's split.
pub fn relativize_atom(
    reg: &Registry,
    label: &str,
    pred: &str,
    vars: &[String],
) -> Result<Formula, UCalcError> {
    let spec = reg.lookup(label)?;
    if spec.arity() != vars.len() {
        return Err(UCalcError::ArityMismatch {
            expected: spec.arity(),
            found: vars.len(),
        });
    }
    if spec.flags.domain_independent != Flag::Yes {
        return Err(UCalcError::NotDomainIndependent(spec.label()));
    }
    let mut groups = Vec::new();
    let mut rest = vars;
    for &k in &spec.split {
        groups.push(rest[..k].to_vec());
        rest = &rest[k..];
    }
    Ok(vars.iter().fold(Formula::atom(&spec.name, groups), |acc, x| {
        Formula::and(acc, Formula::Lit(Literal::rel(true, pred, vec![Term::var(x)])))
    }))
}

/// Parses a fixture: one U-sentence per line, `#` starts a comment.
pub fn parse_u_fixture(text: &str) -> Result<Vec<USentence>, UCalcError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let wrap = |e: UCalcError| UCalcError::Fixture {
            line: i + 1,
            source: Box::new(e),
        };
        let f = parse_sentence(line, &ParseContext::default()).map_err(|e| wrap(e.into()))?;
        out.push(validate_u_sentence(&f).map_err(|e| wrap(e.into()))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(s: &str) -> USentence {
        validate_u_sentence(&parse_sentence(s, &ParseContext::default()).unwrap()).unwrap()
    }

    #[test]
    fn conjunction_renames_apart() {
        let a = u("E x. (R(x) and A y. (!R(y) or y = x))");
        let c = conjoin_u(&a, &a).unwrap();
        assert_eq!(
            c.to_string(),
            "E x. E _v0. R(x) and R(_v0) and (A y. !R(y) or y = x and y = _v0)"
        );
    }

    #[test]
    fn conjunction_signature_mismatch() {
        let a = u("E x. (R(x) and A y. (!R(y) or y = x))");
        let b = u("A y. (!S(y) or y = y)");
        assert!(matches!(conjoin_u(&a, &b), Err(UCalcError::SignatureMismatch { .. })));
    }

    #[test]
    fn existentialize() {
        let a = u("R(a) and A y. (!R(y) or y != b)");
        let e = existentialize_constant(&a, "a").unwrap();
        assert_eq!(e.to_string(), "E _v0. R(_v0) and (A y. !R(y) or y != b)");
        assert!(!e.constants().contains("a"));
        assert_eq!(
            existentialize_constant(&a, "z"),
            Err(UCalcError::ConstantAbsent("z".into()))
        );
    }

    #[test]
    fn singleton_translation_text() {
        let a = u("E x. (R(x) and A y. (!R(y) or y = x))");
        let t = translate_u(&a, &["w".to_string()]).unwrap();
        assert_eq!(
            t.to_string(),
            "E x. const(x) and (w = w or ne(w) and x = w) and w = x"
        );
        assert_eq!(
            translate_u(&a, &["x".to_string()]),
            Err(UCalcError::VariableClash("x".into()))
        );
    }

    #[test]
    fn relativize_refuses_all() {
        let reg = Registry::new();
        let f = relativize_atom(&reg, "inc", "P", &["x".into(), "y".into()]).unwrap();
        assert_eq!(f.to_string(), "inc(x ; y) and P(x) and P(y)");
        assert!(matches!(
            relativize_atom(&reg, "all", "P", &["x".into()]),
            Err(UCalcError::NotDomainIndependent(_))
        ));
    }
}
