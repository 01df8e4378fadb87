//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's evaluators or membership code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;

use teamlab::lab::Counterexample;
use teamlab::model::{Relation, Structure};
use teamlab::syntax::{AtomicFormula, Builtin, Formula, Literal, Term};

pub type Tuples = BTreeSet<Vec<usize>>;

pub fn strings(vs: &[&str]) -> Vec<String> {
    vs.iter().map(|s| s.to_string()).collect()
}

pub fn tuples_of(r: &Relation) -> Tuples {
    r.tuples().collect()
}

/// Every k-tuple over `0..n`, in lexicographic order.
pub fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |e| {
                    let mut u = t.clone();
                    u.push(e);
                    u
                })
            })
            .collect();
    }
    out
}

/// All subsets of `items`, by bitmask.
pub fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    (0..1u64 << items.len())
        .map(|m| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, t)| t.clone())
                .collect()
        })
        .collect()
}

/// Every structure `(0..n, R)` with `1 <= n <= nmax`.
pub fn structures(nmax: usize, name: &str, k: usize) -> Vec<Structure> {
    let mut out = Vec::new();
    for n in 1..=nmax {
        for ts in subsets(&all_tuples(n, k)) {
            let r = Relation::from_tuples(n, k, ts).unwrap();
            out.push(Structure::new(n).unwrap().with_relation(name, r).unwrap());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// First-order truth

fn value(m: &Structure, env: &[(String, usize)], t: &Term) -> usize {
    match t {
        Term::Var(v) => env
            .iter()
            .rev()
            .find(|(k, _)| k == v)
            .unwrap_or_else(|| panic!("unbound {v}"))
            .1,
        Term::Const(c) => m.constant(c).unwrap_or_else(|| panic!("no constant {c}")),
    }
}

fn literal(m: &Structure, env: &[(String, usize)], l: &Literal) -> bool {
    let atomic = match &l.atom {
        AtomicFormula::Eq(a, b) => value(m, env, a) == value(m, env, b),
        AtomicFormula::Rel { name, args } => {
            let t: Vec<usize> = args.iter().map(|a| value(m, env, a)).collect();
            m.relation(name).unwrap().contains(&t)
        }
    };
    atomic == l.positive
}

/// Textbook satisfaction for first-order formulas.
pub fn holds(m: &Structure, env: &mut Vec<(String, usize)>, f: &Formula) -> bool {
    match f {
        Formula::Lit(l) => literal(m, env, l),
        Formula::And(a, b) => holds(m, env, a) && holds(m, env, b),
        Formula::Or(a, b) => holds(m, env, a) || holds(m, env, b),
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let universal = matches!(f, Formula::Forall(..));
            let mut result = universal;
            for e in 0..m.size() {
                env.push((v.clone(), e));
                let r = holds(m, env, b);
                env.pop();
                if r != universal {
                    result = !universal;
                    break;
                }
            }
            result
        }
        Formula::Atom(_) | Formula::GlobalOr(..) => panic!("not first order: {f}"),
    }
}

pub fn sentence_true(m: &Structure, f: &Formula) -> bool {
    holds(m, &mut Vec::new(), f)
}

/// Bitmask of the assignments over `vars` (base-n, first variable most
/// significant) that satisfy `f`.
pub fn truth_mask(m: &Structure, vars: &[String], f: &Formula) -> u64 {
    let mut mask = 0;
    for (i, row) in all_tuples(m.size(), vars.len()).into_iter().enumerate() {
        let mut env: Vec<(String, usize)> = vars.iter().cloned().zip(row).collect();
        if holds(m, &mut env, f) {
            mask |= 1 << i;
        }
    }
    mask
}

// ---------------------------------------------------------------------------
// Built-in atoms, straight from their definitions

/// `(0..n, R) ∈ D` for a built-in with the given split.
pub fn member(b: Builtin, split: &[usize], n: usize, r: &Tuples) -> bool {
    let a = split[0];
    let k: usize = split.iter().sum();
    let left = |t: &Vec<usize>| t[..a].to_vec();
    let right = |t: &Vec<usize>| t[a..].to_vec();
    match b {
        Builtin::Dep => {
            let mut f: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
            r.iter().all(|t| f.entry(left(t)).or_insert_with(|| right(t)) == &right(t))
        }
        Builtin::Inc => {
            let xs: Tuples = r.iter().map(left).collect();
            let ys: Tuples = r.iter().map(right).collect();
            xs.is_subset(&ys)
        }
        Builtin::Exc => {
            let xs: Tuples = r.iter().map(left).collect();
            let ys: Tuples = r.iter().map(right).collect();
            xs.is_disjoint(&ys)
        }
        Builtin::Anon => {
            let mut seen: HashMap<Vec<usize>, Tuples> = HashMap::new();
            for t in r {
                seen.entry(left(t)).or_default().insert(right(t));
            }
            seen.values().all(|ys| ys.len() >= 2)
        }
        Builtin::Indep => {
            let xs: Tuples = r.iter().map(left).collect();
            let ys: Tuples = r.iter().map(right).collect();
            xs.len() * ys.len() == r.len()
        }
        Builtin::Ne => !r.is_empty(),
        Builtin::All => r.len() == n.pow(k as u32),
        Builtin::Const => r.len() < 2,
    }
}

pub fn field(r: &Tuples) -> BTreeSet<usize> {
    r.iter().flatten().copied().collect()
}

/// Renames the elements of `keep` to `0..keep.len()` in order.
pub fn relabel(r: &Tuples, keep: &BTreeSet<usize>) -> Tuples {
    let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    r.iter()
        .filter(|t| t.iter().all(|e| keep.contains(e)))
        .map(|t| t.iter().map(|e| pos[e]).collect())
        .collect()
}

/// Re-checks a counterexample of a closure probe using [`member`].
pub fn refutes(b: Builtin, split: &[usize], cx: &Counterexample) -> bool {
    let k: usize = split.iter().sum();
    let m = |n: usize, r: &Tuples| member(b, split, n, r);
    let shape = |r: &Relation, n: usize| r.domain_size() == n && r.arity() == k;
    match cx {
        Counterexample::EmptyTeam { domain } => !m(*domain, &Tuples::new()),
        Counterexample::Downwards {
            domain,
            relation,
            subset,
        } => {
            let (r, s) = (tuples_of(relation), tuples_of(subset));
            shape(relation, *domain) && shape(subset, *domain)
                && s.is_subset(&r)
                && m(*domain, &r)
                && !m(*domain, &s)
        }
        Counterexample::Upwards {
            domain,
            relation,
            superset,
        } => {
            let (r, s) = (tuples_of(relation), tuples_of(superset));
            shape(relation, *domain) && shape(superset, *domain)
                && r.is_subset(&s)
                && m(*domain, &r)
                && !m(*domain, &s)
        }
        Counterexample::Union {
            domain,
            parts,
            union,
        } => {
            let mut acc = Tuples::new();
            for p in parts {
                if !shape(p, *domain) || !m(*domain, &tuples_of(p)) {
                    return false;
                }
                acc.extend(tuples_of(p));
            }
            shape(union, *domain) && acc == tuples_of(union) && !m(*domain, &acc)
        }
        Counterexample::DomainIndependence {
            domain,
            relation,
            field: fld,
            restricted,
            member_over_domain,
            member_over_field,
        } => {
            let r = tuples_of(relation);
            let f = field(&r);
            let small = relabel(&r, &f);
            f.iter().copied().collect::<Vec<_>>() == *fld
                && tuples_of(restricted) == small
                && restricted.domain_size() == f.len()
                && m(*domain, &r) == *member_over_domain
                && m(f.len(), &small) == *member_over_field
                && member_over_domain != member_over_field
        }
        Counterexample::Jump { domain, relation } => {
            let r = tuples_of(relation);
            m(*domain, &r) && !nonjumping_at(b, split, *domain, &r)
        }
    }
}

/// Whether some maximal member above `r` is reachable with every relation in
/// between a member.
pub fn nonjumping_at(b: Builtin, split: &[usize], n: usize, r: &Tuples) -> bool {
    let k: usize = split.iter().sum();
    let rest: Vec<Vec<usize>> = all_tuples(n, k)
        .into_iter()
        .filter(|t| !r.contains(t))
        .collect();
    let with = |extra: &[Vec<usize>]| -> Tuples {
        let mut s = r.clone();
        s.extend(extra.iter().cloned());
        s
    };
    let members: Vec<Vec<Vec<usize>>> = subsets(&rest)
        .into_iter()
        .filter(|e| member(b, split, n, &with(e)))
        .collect();
    let sets: Vec<Tuples> = members.iter().map(|e| with(e)).collect();
    members.iter().zip(&sets).any(|(extra, top)| {
        let maximal = rest
            .iter()
            .filter(|t| !top.contains(*t))
            .all(|t| {
                let mut s = top.clone();
                s.insert(t.clone());
                !member(b, split, n, &s)
            });
        maximal && subsets(extra).iter().all(|e| member(b, split, n, &with(e)))
    })
}

// ---------------------------------------------------------------------------
// Elementary equivalence up to quantifier rank, by Hintikka types

/// Interns rank-r types of tuples; equal ids mean equal types.
#[derive(Default)]
pub struct Types {
    ids: HashMap<(Vec<bool>, Vec<u64>), u64>,
}

impl Types {
    fn atomic(m: &Structure, a: &[usize]) -> Vec<bool> {
        let mut out = Vec::new();
        for i in 0..a.len() {
            for j in 0..a.len() {
                out.push(a[i] == a[j]);
            }
        }
        let consts: Vec<usize> = m.constants().values().copied().collect();
        for &c in &consts {
            out.extend(a.iter().map(|&x| x == c));
        }
        for r in m.relations().values() {
            let pool: Vec<usize> = a.iter().chain(&consts).copied().collect();
            for idx in all_tuples(pool.len(), r.arity()) {
                let t: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
                out.push(r.contains(&t));
            }
        }
        out
    }

    pub fn of(&mut self, m: &Structure, a: &mut Vec<usize>, rank: usize) -> u64 {
        let mut ext = Vec::new();
        if rank > 0 {
            for e in 0..m.size() {
                a.push(e);
                ext.push(self.of(m, a, rank - 1));
                a.pop();
            }
            ext.sort_unstable();
            ext.dedup();
        }
        let key = (Self::atomic(m, a), ext);
        let next = self.ids.len() as u64;
        *self.ids.entry(key).or_insert(next)
    }
}

/// Same rank-k theory, decided by comparing Hintikka types of the empty tuple.
/// Both structures must share a signature.
pub fn rank_equivalent(m1: &Structure, m2: &Structure, k: usize) -> bool {
    let mut t = Types::default();
    t.of(m1, &mut vec![], k) == t.of(m2, &mut vec![], k)
}

// ---------------------------------------------------------------------------
// Random NNF formulas over two variables

pub struct Gen<'a> {
    pub vars: &'a [&'a str],
    /// Atomic formulas to draw from, as source text.
    pub atoms: &'a [&'a str],
    pub global_or: bool,
}

impl Gen<'_> {
    pub fn text<R: Rng>(&self, rng: &mut R, depth: usize) -> String {
        if depth == 0 || rng.gen_ratio(1, 4) {
            return self.atoms.choose(rng).unwrap().to_string();
        }
        let choices = if self.global_or { 5 } else { 4 };
        let v = self.vars.choose(rng).unwrap();
        match rng.gen_range(0..choices) {
            0 => format!("({} and {})", self.text(rng, depth - 1), self.text(rng, depth - 1)),
            1 => format!("({} or {})", self.text(rng, depth - 1), self.text(rng, depth - 1)),
            2 => format!("(E {v}. {})", self.text(rng, depth - 1)),
            3 => format!("(A {v}. {})", self.text(rng, depth - 1)),
            _ => format!("({} gor {})", self.text(rng, depth - 1), self.text(rng, depth - 1)),
        }
    }

    /// `count` distinct formulas, by source text, of depth at most `depth`.
    pub fn distinct<R: Rng>(&self, rng: &mut R, depth: usize, count: usize) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        while out.len() < count {
            let t = self.text(rng, depth);
            if seen.insert(t.clone()) {
                out.push(t);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// A small JSON Schema checker: type, enum, const, required, properties,
// additionalProperties, items, minimum, oneOf, anyOf and local $ref.

pub fn schema_errors(root: &Value, schema: &Value, v: &Value, path: &str) -> Vec<String> {
    let mut errs = Vec::new();
    let Some(s) = schema.as_object() else {
        return errs;
    };
    if let Some(r) = s.get("$ref").and_then(Value::as_str) {
        let target = r
            .strip_prefix("#/")
            .expect("local ref")
            .split('/')
            .fold(root, |acc, key| &acc[key]);
        errs.extend(schema_errors(root, target, v, path));
    }
    if let Some(t) = s.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "boolean" => v.is_boolean(),
            "integer" => v.is_i64() || v.is_u64(),
            "number" => v.is_number(),
            "null" => v.is_null(),
            other => panic!("unsupported type {other}"),
        };
        if !ok {
            errs.push(format!("{path}: expected {t}"));
            return errs;
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            errs.push(format!("{path}: expected {c}"));
        }
    }
    if let Some(e) = s.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            errs.push(format!("{path}: {v} not in enum"));
        }
    }
    if let Some(min) = s.get("minimum").and_then(Value::as_i64) {
        if v.as_i64().is_some_and(|x| x < min) {
            errs.push(format!("{path}: below {min}"));
        }
    }
    if let Some(obj) = v.as_object() {
        for req in s.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = req.as_str().unwrap();
            if !obj.contains_key(key) {
                errs.push(format!("{path}: missing `{key}`"));
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (key, val) in obj {
            let sub = format!("{path}/{key}");
            match props.and_then(|p| p.get(key)) {
                Some(ps) => errs.extend(schema_errors(root, ps, val, &sub)),
                None => match s.get("additionalProperties") {
                    Some(Value::Bool(false)) => errs.push(format!("{sub}: not allowed")),
                    Some(extra @ Value::Object(_)) => {
                        errs.extend(schema_errors(root, extra, val, &sub))
                    }
                    _ => {}
                },
            }
        }
    }
    if let (Some(items), Some(arr)) = (s.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            errs.extend(schema_errors(root, items, x, &format!("{path}/{i}")));
        }
    }
    if let Some(alts) = s.get("oneOf").and_then(Value::as_array) {
        let ok = alts
            .iter()
            .filter(|a| schema_errors(root, a, v, path).is_empty())
            .count();
        if ok != 1 {
            errs.push(format!("{path}: {ok} oneOf branches match"));
        }
    }
    if let Some(alts) = s.get("anyOf").and_then(Value::as_array) {
        if alts.iter().all(|a| !schema_errors(root, a, v, path).is_empty()) {
            errs.push(format!("{path}: no anyOf branch matches"));
        }
    }
    errs
}

pub fn report_schema() -> Value {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schemas/report.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn validate(v: &Value) -> Vec<String> {
    let schema = report_schema();
    schema_errors(&schema, &schema, v, "")
}

pub fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}
