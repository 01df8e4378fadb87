//! Formulas of first-order logic extended with dependency atoms and global
//! disjunction, kept in negation normal form.

mod dependency;
mod parser;
mod usentence;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use dependency::{Builtin, ClosureFlags, DependencyBody, DependencySpec, Flag, Property};
pub use parser::{parse_formula, parse_sentence, ParseContext, ParseError, ParseErrorKind};
pub use usentence::{validate_u_sentence, USentence, UShapeError};

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(n) => Some(n),
            Term::Const(_) => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum AtomicFormula {
    Rel { name: String, args: Vec<Term> },
    Eq(Term, Term),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Literal {
    pub positive: bool,
    pub atom: AtomicFormula,
}

impl Literal {
    pub fn rel(positive: bool, name: &str, args: Vec<Term>) -> Literal {
        Literal {
            positive,
            atom: AtomicFormula::Rel {
                name: name.to_string(),
                args,
            },
        }
    }

    pub fn eq(positive: bool, a: Term, b: Term) -> Literal {
        Literal {
            positive,
            atom: AtomicFormula::Eq(a, b),
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match &self.atom {
            AtomicFormula::Rel { args, .. } => args.iter().collect(),
            AtomicFormula::Eq(a, b) => vec![a, b],
        }
    }

    pub fn relation(&self) -> Option<(&str, usize)> {
        match &self.atom {
            AtomicFormula::Rel { name, args } => Some((name, args.len())),
            AtomicFormula::Eq(..) => None,
        }
    }

    pub(crate) fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Literal {
        let atom = match &self.atom {
            AtomicFormula::Rel { name, args } => AtomicFormula::Rel {
                name: name.clone(),
                args: args.iter().map(&mut *f).collect(),
            },
            AtomicFormula::Eq(a, b) => AtomicFormula::Eq(f(a), f(b)),
        };
        Literal {
            positive: self.positive,
            atom,
        }
    }
}

/// A dependency atom applied to groups of variables. Built-in atoms use their
/// keyword as `name`; user dependencies carry a single group.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DepAtom {
    pub name: String,
    pub groups: Vec<Vec<String>>,
}

impl DepAtom {
    pub fn new(name: &str, groups: Vec<Vec<String>>) -> DepAtom {
        DepAtom {
            name: name.to_string(),
            groups,
        }
    }

    pub fn arity(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn split(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    /// All argument variables, groups concatenated.
    pub fn vars(&self) -> Vec<String> {
        self.groups.iter().flatten().cloned().collect()
    }

    pub fn is_builtin(&self) -> bool {
        Builtin::from_keyword(&self.name).is_some()
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    Lit(Literal),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    GlobalOr(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    Atom(DepAtom),
}

impl Formula {
    pub fn lit(l: Literal) -> Formula {
        Formula::Lit(l)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn gor(a: Formula, b: Formula) -> Formula {
        Formula::GlobalOr(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    pub fn atom(name: &str, groups: Vec<Vec<String>>) -> Formula {
        Formula::Atom(DepAtom::new(name, groups))
    }

    /// `t = t`, the always-true literal.
    pub fn top(t: Term) -> Formula {
        Formula::Lit(Literal::eq(true, t.clone(), t))
    }

    /// `t != t`.
    pub fn bottom(t: Term) -> Formula {
        Formula::Lit(Literal::eq(false, t.clone(), t))
    }

    /// Left-associated conjunction; `None` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    pub fn disjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::or)
    }

    pub fn global_disjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::gor)
    }

    pub fn exists_all(vars: &[String], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::Exists(v.clone(), Box::new(acc)))
    }

    pub fn forall_all(vars: &[String], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::Forall(v.clone(), Box::new(acc)))
    }

    /// No dependency atoms and no global disjunction.
    pub fn is_first_order(&self) -> bool {
        match self {
            Formula::Lit(_) => true,
            Formula::Atom(_) | Formula::GlobalOr(..) => false,
            Formula::And(a, b) | Formula::Or(a, b) => a.is_first_order() && b.is_first_order(),
            Formula::Exists(_, b) | Formula::Forall(_, b) => b.is_first_order(),
        }
    }

    pub fn has_global_or(&self) -> bool {
        match self {
            Formula::GlobalOr(..) => true,
            Formula::Lit(_) | Formula::Atom(_) => false,
            Formula::And(a, b) | Formula::Or(a, b) => a.has_global_or() || b.has_global_or(),
            Formula::Exists(_, b) | Formula::Forall(_, b) => b.has_global_or(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Lit(_) | Formula::Atom(_) => 1,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::GlobalOr(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Exists(_, b) | Formula::Forall(_, b) => 1 + b.size(),
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Lit(_) | Formula::Atom(_) => 0,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::GlobalOr(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Exists(_, b) | Formula::Forall(_, b) => 1 + b.quantifier_depth(),
        }
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Lit(_) | Formula::Atom(_) => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::GlobalOr(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Exists(_, b) | Formula::Forall(_, b) => b.visit(f),
        }
    }

    pub fn literals(&self) -> Vec<&Literal> {
        let mut out = Vec::new();
        self.visit(&mut |g| {
            if let Formula::Lit(l) = g {
                out.push(l);
            }
        });
        out
    }

    pub fn dep_atoms(&self) -> Vec<&DepAtom> {
        let mut out = Vec::new();
        self.visit(&mut |g| {
            if let Formula::Atom(a) = g {
                out.push(a);
            }
        });
        out
    }

    /// Relation symbols with their arities. Conflicting arities keep the first.
    pub fn relation_symbols(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for l in self.literals() {
            if let Some((name, k)) = l.relation() {
                out.entry(name.to_string()).or_insert(k);
            }
        }
        out
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.literals()
            .into_iter()
            .flat_map(|l| l.terms())
            .filter_map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect()
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |g| match g {
            Formula::Lit(l) => {
                out.extend(l.terms().into_iter().filter_map(|t| t.as_var().map(String::from)))
            }
            Formula::Atom(a) => out.extend(a.vars()),
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Renames free occurrences of `from` to the variable `to`, renaming
    /// binders that would capture `to`.
    pub fn rename_free_var(&self, from: &str, to: &str, fresh: &mut Fresh) -> Formula {
        let to_term = Term::Var(to.to_string());
        self.substitute(&Term::Var(from.to_string()), &to_term, fresh)
    }

    /// Replaces every occurrence of constant `c` by the variable `v`, renaming
    /// binders that would capture `v`.
    pub fn replace_constant(&self, c: &str, v: &str, fresh: &mut Fresh) -> Formula {
        self.substitute(
            &Term::Const(c.to_string()),
            &Term::Var(v.to_string()),
            fresh,
        )
    }

    /// Capture-avoiding substitution of `target` (a free variable or a
    /// constant) by the variable term `by`.
    fn substitute(&self, target: &Term, by: &Term, fresh: &mut Fresh) -> Formula {
        let by_name = by.as_var().expect("substitution by a variable");
        match self {
            Formula::Lit(l) => Formula::Lit(l.map_terms(&mut |t| {
                if t == target {
                    by.clone()
                } else {
                    t.clone()
                }
            })),
            Formula::Atom(a) => {
                let groups = match target {
                    Term::Var(from) => a
                        .groups
                        .iter()
                        .map(|g| {
                            g.iter()
                                .map(|x| if x == from { by_name.to_string() } else { x.clone() })
                                .collect()
                        })
                        .collect(),
                    Term::Const(_) => a.groups.clone(),
                };
                Formula::Atom(DepAtom {
                    name: a.name.clone(),
                    groups,
                })
            }
            Formula::And(a, b) => Formula::and(
                a.substitute(target, by, fresh),
                b.substitute(target, by, fresh),
            ),
            Formula::Or(a, b) => Formula::or(
                a.substitute(target, by, fresh),
                b.substitute(target, by, fresh),
            ),
            Formula::GlobalOr(a, b) => Formula::gor(
                a.substitute(target, by, fresh),
                b.substitute(target, by, fresh),
            ),
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let rebuild = |v: String, b: Formula| match self {
                    Formula::Exists(..) => Formula::Exists(v, Box::new(b)),
                    _ => Formula::Forall(v, Box::new(b)),
                };
                if let Term::Var(from) = target {
                    if v == from {
                        return self.clone();
                    }
                }
                let occurs = match target {
                    Term::Var(from) => free_variables(body).contains(from),
                    Term::Const(c) => body.constants().contains(c),
                };
                if v == by_name && occurs {
                    let renamed = fresh.name();
                    let body = body.rename_free_var(v, &renamed, fresh);
                    rebuild(renamed, body.substitute(target, by, fresh))
                } else {
                    rebuild(v.clone(), body.substitute(target, by, fresh))
                }
            }
        }
    }
}

/// The free variables of `f`. Atom arguments count as free occurrences.
pub fn free_variables(f: &Formula) -> BTreeSet<String> {
    match f {
        Formula::Lit(l) => l
            .terms()
            .into_iter()
            .filter_map(|t| t.as_var().map(String::from))
            .collect(),
        Formula::Atom(a) => a.vars().into_iter().collect(),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::GlobalOr(a, b) => {
            let mut s = free_variables(a);
            s.extend(free_variables(b));
            s
        }
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let mut s = free_variables(b);
            s.remove(v);
            s
        }
    }
}

pub const FRESH_PREFIX: &str = "_v";

/// Deterministic generator of reserved variable names `_v0, _v1, ...`.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    next: usize,
}

impl Fresh {
    pub fn new() -> Fresh {
        Fresh::default()
    }

    /// A generator whose names do not clash with any `_vN` in `formulas`.
    pub fn avoiding<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Fresh {
        let mut fresh = Fresh::new();
        for f in formulas {
            fresh.skip_past(f);
        }
        fresh
    }

    pub fn skip_past(&mut self, f: &Formula) {
        for v in f.all_variables() {
            self.skip_name(&v);
        }
    }

    pub fn skip_name(&mut self, name: &str) {
        if let Some(i) = name
            .strip_prefix(FRESH_PREFIX)
            .and_then(|d| d.parse::<usize>().ok())
        {
            self.next = self.next.max(i + 1);
        }
    }

    pub fn name(&mut self) -> String {
        let name = format!("{FRESH_PREFIX}{}", self.next);
        self.next += 1;
        name
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.atom {
            AtomicFormula::Rel { name, args } => {
                if !self.positive {
                    f.write_str("!")?;
                }
                let args: Vec<&str> = args.iter().map(Term::name).collect();
                write!(f, "{name}({})", args.join(", "))
            }
            AtomicFormula::Eq(a, b) => {
                let op = if self.positive { "=" } else { "!=" };
                write!(f, "{a} {op} {b}")
            }
        }
    }
}

impl fmt::Display for DepAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let groups: Vec<String> = self.groups.iter().map(|g| g.join(", ")).collect();
        if self.is_builtin() {
            write!(f, "{}({})", self.name, groups.join(" ; "))
        } else {
            write!(f, "D[{}]({})", self.name, groups.join(", "))
        }
    }
}

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Exists(..) | Formula::Forall(..) => 0,
        Formula::GlobalOr(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Lit(_) | Formula::Atom(_) => 4,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &Formula, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Lit(l) => write!(f, "{l}"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::GlobalOr(a, b) => {
                let p = precedence(self);
                let op = match self {
                    Formula::And(..) => "and",
                    Formula::Or(..) => "or",
                    _ => "gor",
                };
                let pa = precedence(a);
                let pb = precedence(b);
                write_operand(f, a, pa == 0 || pa < p)?;
                write!(f, " {op} ")?;
                write_operand(f, b, pb == 0 || pb <= p)
            }
            Formula::Exists(v, b) => write!(f, "E {v}. {b}"),
            Formula::Forall(v, b) => write!(f, "A {v}. {b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> ParseContext {
        ParseContext::default()
    }

    #[test]
    fn free_variable_examples() {
        let f = parse_formula("dep(x ; y)", &ctx()).unwrap();
        assert_eq!(free_variables(&f), BTreeSet::from(["x".into(), "y".into()]));
        let g = parse_formula("E x. R(x, y)", &ctx()).unwrap();
        assert_eq!(free_variables(&g), BTreeSet::from(["y".into()]));
        let h = parse_sentence("A x. E y. R(x, y)", &ctx()).unwrap();
        assert!(free_variables(&h).is_empty());
    }

    #[test]
    fn substitution_avoids_capture() {
        let f = parse_formula("E y. R(x, y)", &ctx()).unwrap();
        let mut fresh = Fresh::avoiding([&f]);
        let g = f.rename_free_var("x", "y", &mut fresh);
        assert_eq!(g.to_string(), "E _v0. R(y, _v0)");
        let c = parse_sentence("E y. R(a, y)", &ctx()).unwrap();
        let h = c.replace_constant("a", "y", &mut fresh);
        assert_eq!(h.to_string(), "E _v1. R(y, _v1)");
    }

    #[test]
    fn bound_occurrence_untouched() {
        let f = parse_formula("R(x) and E x. S(x)", &ctx()).unwrap();
        let g = f.rename_free_var("x", "z", &mut Fresh::new());
        assert_eq!(g.to_string(), "R(z) and (E x. S(x))");
    }

    #[test]
    fn printer_parenthesizes_by_precedence() {
        let src = "(R(x) or S(x)) and T(x) gor x = y";
        let f = parse_formula(src, &ctx()).unwrap();
        assert_eq!(f.to_string(), src);
        let g = parse_formula("R(x) and (S(x) and T(x))", &ctx()).unwrap();
        assert_eq!(g.to_string(), "R(x) and (S(x) and T(x))");
    }

    #[test]
    fn fresh_skips_existing() {
        let f = parse_formula("R(_v3)", &ParseContext {
            allow_reserved: true,
            ..ParseContext::default()
        })
        .unwrap();
        assert_eq!(Fresh::avoiding([&f]).name(), "_v4");
    }
}
