//! Built-in dependency atoms, their closure metadata and defining sentences,
//! and the registry of user-defined first-order dependencies.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{Elem, Relation};
use crate::syntax::{
    free_variables, parse_sentence, Builtin, ClosureFlags, DepAtom, DependencyBody,
    DependencySpec, Flag, Formula, Literal, ParseContext, ParseError, Term,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("dependency `{0}` is already defined")]
    Duplicate(String),
    #[error("unknown dependency `{0}`")]
    Unknown(String),
    #[error("`{name}` is not a sentence over a single relation symbol of arity {arity}: {reason}")]
    WrongSignature {
        name: String,
        arity: usize,
        reason: String,
    },
    #[error("`{name}` expects argument groups {expected:?}, found {found:?}")]
    BadSplit {
        name: String,
        expected: String,
        found: Vec<usize>,
    },
    #[error("malformed dependency label `{0}`")]
    BadLabel(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

use Flag::{No, Yes};

/// Closure rows for the built-ins at nondegenerate splits. `const` is not a
/// row of the classical table; its flags are checked by the probes like the rest.
pub fn table1_row(b: Builtin) -> [Flag; 5] {
    match b {
        Builtin::Dep => [Yes, Yes, No, No, Yes],
        Builtin::Inc => [Yes, No, Yes, No, Yes],
        Builtin::Exc => [Yes, Yes, No, No, Yes],
        Builtin::Anon => [Yes, No, Yes, No, Yes],
        Builtin::Indep => [Yes, No, No, No, Yes],
        Builtin::Ne => [No, No, No, Yes, Yes],
        Builtin::All => [No, No, No, Yes, No],
        Builtin::Const => [Yes, Yes, No, No, Yes],
    }
}

/// The seven built-ins of the closure table with their default splits.
pub const TABLE1_ROWS: [(Builtin, &[usize]); 7] = [
    (Builtin::Dep, &[1, 1]),
    (Builtin::Inc, &[1, 1]),
    (Builtin::Exc, &[1, 1]),
    (Builtin::Anon, &[1, 1]),
    (Builtin::Indep, &[1, 1]),
    (Builtin::Ne, &[1]),
    (Builtin::All, &[1]),
];

pub fn default_split(b: Builtin) -> Vec<usize> {
    if b.group_count() == 2 {
        vec![1, 1]
    } else {
        vec![1]
    }
}

fn check_split(b: Builtin, split: &[usize]) -> Result<(), RegistryError> {
    let ok = split.len() == b.group_count() && (!b.needs_equal_groups() || split[0] == split[1]);
    if ok {
        Ok(())
    } else {
        Err(RegistryError::BadSplit {
            name: b.keyword().to_string(),
            expected: if b.needs_equal_groups() {
                "(k;k)".into()
            } else if b.group_count() == 2 {
                "(k1;k2)".into()
            } else {
                "(k)".into()
            },
            found: split.to_vec(),
        })
    }
}

/// Metadata for a built-in at the given split. With an empty group the
/// negative entries are downgraded to unknown, since several of them fail there.
pub fn builtin_flags(b: Builtin, split: &[usize]) -> ClosureFlags {
    let mut row = table1_row(b);
    if b != Builtin::Ne && split.contains(&0) {
        for f in row.iter_mut() {
            if *f == No {
                *f = Flag::Unknown;
            }
        }
    }
    ClosureFlags::from_row(row)
}

pub fn builtin_spec(b: Builtin, split: &[usize]) -> Result<DependencySpec, RegistryError> {
    check_split(b, split)?;
    Ok(DependencySpec {
        name: b.keyword().to_string(),
        split: split.to_vec(),
        body: DependencyBody::Builtin(b),
        flags: builtin_flags(b, split),
    })
}

/// Membership of `(0..n, rel)` in a built-in, read off the atom's team rule.
pub fn builtin_holds(b: Builtin, split: &[usize], rel: &Relation) -> bool {
    let k1 = split.first().copied().unwrap_or(0);
    let tuples: Vec<Vec<Elem>> = rel.tuples().collect();
    let left = |t: &Vec<Elem>| t[..k1].to_vec();
    let right = |t: &Vec<Elem>| t[k1..].to_vec();
    match b {
        Builtin::Dep => tuples.iter().all(|t| {
            tuples
                .iter()
                .all(|u| t[..k1] != u[..k1] || t[k1..] == u[k1..])
        }),
        Builtin::Inc => {
            let seconds: BTreeSet<Vec<Elem>> = tuples.iter().map(right).collect();
            tuples.iter().all(|t| seconds.contains(&t[..k1]))
        }
        Builtin::Exc => {
            let seconds: BTreeSet<Vec<Elem>> = tuples.iter().map(right).collect();
            tuples.iter().all(|t| !seconds.contains(&t[..k1]))
        }
        Builtin::Anon => tuples.iter().all(|t| {
            tuples
                .iter()
                .any(|u| t[..k1] == u[..k1] && t[k1..] != u[k1..])
        }),
        Builtin::Indep => {
            let firsts: BTreeSet<Vec<Elem>> = tuples.iter().map(left).collect();
            let seconds: BTreeSet<Vec<Elem>> = tuples.iter().map(right).collect();
            firsts.iter().all(|a| {
                seconds.iter().all(|c| {
                    let mut t = a.clone();
                    t.extend(c);
                    rel.contains(&t)
                })
            })
        }
        Builtin::Ne => !tuples.is_empty(),
        Builtin::Const => tuples.len() <= 1,
        Builtin::All => tuples.len() == rel.bits().universe(),
    }
}

/// Truth-value-aware formula builder for the defining sentences.
#[derive(Clone)]
enum Prop {
    True,
    False,
    F(Formula),
}

impl Prop {
    fn and(self, other: Prop) -> Prop {
        match (self, other) {
            (Prop::False, _) | (_, Prop::False) => Prop::False,
            (Prop::True, p) | (p, Prop::True) => p,
            (Prop::F(a), Prop::F(b)) => Prop::F(Formula::and(a, b)),
        }
    }

    fn or(self, other: Prop) -> Prop {
        match (self, other) {
            (Prop::True, _) | (_, Prop::True) => Prop::True,
            (Prop::False, p) | (p, Prop::False) => p,
            (Prop::F(a), Prop::F(b)) => Prop::F(Formula::or(a, b)),
        }
    }

    fn all(parts: impl IntoIterator<Item = Prop>) -> Prop {
        parts.into_iter().fold(Prop::True, Prop::and)
    }

    fn any(parts: impl IntoIterator<Item = Prop>) -> Prop {
        parts.into_iter().fold(Prop::False, Prop::or)
    }

    fn quantify(self, vars: &[String], universal: bool) -> Prop {
        match self {
            Prop::F(f) if universal => Prop::F(Formula::forall_all(vars, f)),
            Prop::F(f) => Prop::F(Formula::exists_all(vars, f)),
            // Vacuous quantifiers are dropped, except that an existential
            // over an empty domain is false; keep it when there is a variable.
            Prop::True if !universal && !vars.is_empty() => {
                Prop::F(Formula::exists_all(vars, Formula::top(Term::Var(vars[0].clone()))))
            }
            Prop::False if universal && !vars.is_empty() => Prop::F(Formula::forall_all(
                vars,
                Formula::bottom(Term::Var(vars[0].clone())),
            )),
            p => p,
        }
    }

    fn into_formula(self) -> Formula {
        let z = Term::var("z");
        match self {
            Prop::F(f) => f,
            Prop::True => Formula::forall("z", Formula::top(z)),
            Prop::False => Formula::exists("z", Formula::bottom(z)),
        }
    }
}

fn names(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

fn r(positive: bool, parts: &[&[String]]) -> Prop {
    let args = parts
        .iter()
        .flat_map(|p| p.iter())
        .map(|v| Term::Var(v.clone()))
        .collect();
    Prop::F(Formula::Lit(Literal::rel(positive, "R", args)))
}

fn eqs(positive: bool, a: &[String], b: &[String]) -> Vec<Prop> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            Prop::F(Formula::Lit(Literal::eq(
                positive,
                Term::Var(x.clone()),
                Term::Var(y.clone()),
            )))
        })
        .collect()
}

fn cat(parts: &[&[String]]) -> Vec<String> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

/// The first-order sentence `D(R)` defining a built-in, over relation `R`.
pub fn defining_sentence(b: Builtin, split: &[usize]) -> Formula {
    let k1 = split.first().copied().unwrap_or(0);
    let k2 = split.get(1).copied().unwrap_or(0);
    let (a, bb) = (names("a", k1), names("b", k2));
    let (c, d) = (names("c", k1), names("d", k2));
    let prop = match b {
        Builtin::Dep => Prop::any([
            r(false, &[&a, &bb]),
            r(false, &[&c, &d]),
            Prop::any(eqs(false, &a, &c)),
            Prop::all(eqs(true, &bb, &d)),
        ])
        .quantify(&cat(&[&a, &bb, &c, &d]), true),
        Builtin::Inc => {
            let witness = r(true, &[&c, &d])
                .and(Prop::all(eqs(true, &d, &a)))
                .quantify(&cat(&[&c, &d]), false);
            r(false, &[&a, &bb])
                .or(witness)
                .quantify(&cat(&[&a, &bb]), true)
        }
        Builtin::Exc => Prop::any([
            r(false, &[&a, &bb]),
            r(false, &[&c, &d]),
            Prop::any(eqs(false, &a, &d)),
        ])
        .quantify(&cat(&[&a, &bb, &c, &d]), true),
        Builtin::Anon => {
            let witness = Prop::all([
                r(true, &[&c, &d]),
                Prop::all(eqs(true, &a, &c)),
                Prop::any(eqs(false, &bb, &d)),
            ])
            .quantify(&cat(&[&c, &d]), false);
            r(false, &[&a, &bb])
                .or(witness)
                .quantify(&cat(&[&a, &bb]), true)
        }
        Builtin::Indep => Prop::any([
            r(false, &[&a, &bb]),
            r(false, &[&c, &d]),
            r(true, &[&a, &d]),
        ])
        .quantify(&cat(&[&a, &bb, &c, &d]), true),
        Builtin::Ne => r(true, &[&a]).quantify(&a, false),
        Builtin::Const => {
            let other = names("b", k1);
            Prop::any([
                r(false, &[&a]),
                r(false, &[&other]),
                Prop::all(eqs(true, &a, &other)),
            ])
            .quantify(&cat(&[&a, &other]), true)
        }
        Builtin::All => r(true, &[&a]).quantify(&a, true),
    };
    prop.into_formula()
}

/// Dependency table: built-ins are resolved by keyword and split, user
/// dependencies by name.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    user: BTreeMap<String, DependencySpec>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    /// Registers `D(R)`. The sentence must be first order, closed, free of
    /// constants and mention at most one relation symbol, of arity `arity`.
    pub fn register(
        &mut self,
        name: &str,
        arity: usize,
        sentence: Formula,
    ) -> Result<&DependencySpec, RegistryError> {
        if Builtin::from_keyword(name).is_some() || self.user.contains_key(name) {
            return Err(RegistryError::Duplicate(name.to_string()));
        }
        let wrong = |reason: String| RegistryError::WrongSignature {
            name: name.to_string(),
            arity,
            reason,
        };
        if !sentence.is_first_order() {
            return Err(wrong("dependency atoms and `gor` are not allowed".into()));
        }
        let free = free_variables(&sentence);
        if !free.is_empty() {
            return Err(wrong(format!("free variables {free:?}")));
        }
        let consts = sentence.constants();
        if !consts.is_empty() {
            return Err(wrong(format!("constants {consts:?}")));
        }
        let rels = sentence.relation_symbols();
        if rels.len() > 1 {
            return Err(wrong(format!(
                "several relation symbols {:?}",
                rels.keys().collect::<Vec<_>>()
            )));
        }
        let relation = match rels.into_iter().next() {
            Some((rname, k)) if k != arity => {
                return Err(wrong(format!("`{rname}` is used with arity {k}")))
            }
            Some((rname, _)) => rname,
            None => "R".to_string(),
        };
        let spec = DependencySpec {
            name: name.to_string(),
            split: vec![arity],
            body: DependencyBody::Sentence { relation, sentence },
            flags: ClosureFlags::UNKNOWN,
        };
        Ok(self.user.entry(name.to_string()).or_insert(spec))
    }

    pub fn register_text(
        &mut self,
        name: &str,
        arity: usize,
        text: &str,
    ) -> Result<&DependencySpec, RegistryError> {
        let sentence = parse_sentence(text, &ParseContext::default())?;
        self.register(name, arity, sentence)
    }

    /// User-dependency arities, for the parser.
    pub fn arities(&self) -> BTreeMap<String, usize> {
        self.user
            .iter()
            .map(|(n, s)| (n.clone(), s.arity()))
            .collect()
    }

    pub fn user_specs(&self) -> impl Iterator<Item = &DependencySpec> {
        self.user.values()
    }

    pub fn user(&self, name: &str) -> Option<&DependencySpec> {
        self.user.get(name)
    }

    /// The spec an atom occurrence refers to.
    pub fn resolve(&self, atom: &DepAtom) -> Result<DependencySpec, RegistryError> {
        match Builtin::from_keyword(&atom.name) {
            Some(b) => builtin_spec(b, &atom.split()),
            None => {
                let spec = self
                    .user
                    .get(&atom.name)
                    .ok_or_else(|| RegistryError::Unknown(atom.name.clone()))?;
                if atom.arity() != spec.arity() {
                    return Err(RegistryError::BadSplit {
                        name: atom.name.clone(),
                        expected: format!("({})", spec.arity()),
                        found: atom.split(),
                    });
                }
                Ok(spec.clone())
            }
        }
    }

    /// Looks up `name`, `name(k1;k2)`, `name(k)` or `name/k`. Bare built-in
    /// names use their default split.
    pub fn lookup(&self, label: &str) -> Result<DependencySpec, RegistryError> {
        let label = label.trim();
        let bad = || RegistryError::BadLabel(label.to_string());
        let (name, split) = if let Some(open) = label.find('(') {
            let inner = label[open + 1..].strip_suffix(')').ok_or_else(bad)?;
            let split = inner
                .split(';')
                .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?;
            (&label[..open], Some(split))
        } else if let Some((n, k)) = label.split_once('/') {
            (n, Some(vec![k.trim().parse::<usize>().map_err(|_| bad())?]))
        } else {
            (label, None)
        };
        match Builtin::from_keyword(name) {
            Some(b) => builtin_spec(b, &split.unwrap_or_else(|| default_split(b))),
            None => {
                let spec = self
                    .user
                    .get(name)
                    .ok_or_else(|| RegistryError::Unknown(name.to_string()))?;
                if let Some(s) = split {
                    if s.iter().sum::<usize>() != spec.arity() {
                        return Err(RegistryError::BadSplit {
                            name: name.to_string(),
                            expected: format!("({})", spec.arity()),
                            found: s,
                        });
                    }
                }
                Ok(spec.clone())
            }
        }
    }

    /// Stored flags: the table row for built-ins at their default split.
    pub fn metadata(&self, name: &str) -> Result<ClosureFlags, RegistryError> {
        Ok(self.lookup(name)?.flags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::enumerate_relations;
    use crate::tarski::{dep_membership, sentence_holds};

    #[test]
    fn metadata_rows() {
        let reg = Registry::new();
        assert_eq!(reg.metadata("inc").unwrap().row(), [Yes, No, Yes, No, Yes]);
        assert_eq!(reg.metadata("ne").unwrap().row(), [No, No, No, Yes, Yes]);
        assert_eq!(reg.metadata("all").unwrap().row(), [No, No, No, Yes, No]);
        assert!(reg.metadata("nope").is_err());
    }

    #[test]
    fn builtin_examples() {
        let c = builtin_spec(Builtin::Const, &[1]).unwrap();
        assert!(dep_membership(&c, &Relation::from_tuples(2, 1, [[0]]).unwrap()).unwrap());
        assert!(!dep_membership(&c, &Relation::from_tuples(2, 1, [[0], [1]]).unwrap()).unwrap());
        let a = builtin_spec(Builtin::All, &[1]).unwrap();
        assert!(dep_membership(&a, &Relation::from_tuples(2, 1, [[0], [1]]).unwrap()).unwrap());
        assert!(!dep_membership(&a, &Relation::from_tuples(2, 1, [[0]]).unwrap()).unwrap());
        let anon = builtin_spec(Builtin::Anon, &[1, 1]).unwrap();
        assert!(dep_membership(&anon, &Relation::from_tuples(2, 2, [[0, 0], [0, 1]]).unwrap()).unwrap());
        let indep = builtin_spec(Builtin::Indep, &[1, 1]).unwrap();
        assert!(!dep_membership(&indep, &Relation::from_tuples(2, 2, [[0, 0], [1, 1]]).unwrap()).unwrap());
    }

    #[test]
    fn defining_sentences_agree_with_builtins() {
        let splits: &[(Builtin, &[usize])] = &[
            (Builtin::Dep, &[1, 1]),
            (Builtin::Dep, &[0, 1]),
            (Builtin::Dep, &[1, 0]),
            (Builtin::Inc, &[1, 1]),
            (Builtin::Inc, &[0, 0]),
            (Builtin::Exc, &[1, 1]),
            (Builtin::Anon, &[1, 1]),
            (Builtin::Anon, &[0, 1]),
            (Builtin::Anon, &[1, 0]),
            (Builtin::Indep, &[1, 1]),
            (Builtin::Indep, &[0, 1]),
            (Builtin::Ne, &[0]),
            (Builtin::Ne, &[1]),
            (Builtin::Ne, &[2]),
            (Builtin::Const, &[0]),
            (Builtin::Const, &[1]),
            (Builtin::Const, &[2]),
            (Builtin::All, &[0]),
            (Builtin::All, &[1]),
            (Builtin::All, &[2]),
        ];
        for &(b, split) in splits {
            let sentence = defining_sentence(b, split);
            let k: usize = split.iter().sum();
            for n in 1..=3 {
                for rel in enumerate_relations(n, k).unwrap() {
                    assert_eq!(
                        builtin_holds(b, split, &rel),
                        sentence_holds("R", &sentence, &rel).unwrap(),
                        "{b}{split:?} on n={n}, R={rel}: {sentence}"
                    );
                }
            }
        }
    }

    #[test]
    fn registration() {
        let mut reg = Registry::new();
        reg.register_text("nonempty", 1, "E x. R(x)").unwrap();
        reg.register_text("sym", 2, "A x. A y. (!R(x, y) or R(y, x))").unwrap();
        assert!(matches!(
            reg.register_text("dep", 2, "A x. A y. R(x, y)"),
            Err(RegistryError::Duplicate(_))
        ));
        assert!(matches!(
            reg.register_text("sym", 2, "E x. R(x, x)"),
            Err(RegistryError::Duplicate(_))
        ));
        assert!(matches!(
            reg.register_text("c", 1, "R(a)"),
            Err(RegistryError::WrongSignature { .. })
        ));
        assert!(matches!(
            reg.register_text("two", 1, "E x. (R(x) and S(x))"),
            Err(RegistryError::WrongSignature { .. })
        ));
        assert!(matches!(
            reg.register_text("ar", 2, "E x. R(x)"),
            Err(RegistryError::WrongSignature { .. })
        ));
        let spec = reg.lookup("nonempty").unwrap();
        assert_eq!(spec.flags, ClosureFlags::UNKNOWN);
        let ne = reg.lookup("ne").unwrap();
        for n in 1..=3 {
            for rel in enumerate_relations(n, 1).unwrap() {
                assert_eq!(
                    dep_membership(&spec, &rel).unwrap(),
                    dep_membership(&ne, &rel).unwrap()
                );
            }
        }
    }

    #[test]
    fn labels() {
        let reg = Registry::new();
        assert_eq!(reg.lookup("dep(2;1)").unwrap().split, vec![2, 1]);
        assert_eq!(reg.lookup("ne/0").unwrap().split, vec![0]);
        assert!(reg.lookup("inc(1;2)").is_err());
        assert!(reg.lookup("dep(x)").is_err());
    }
}
