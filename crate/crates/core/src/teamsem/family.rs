//! Bottom-up computation of `{X : M ⊨_X φ}` for every team over a small
//! variable domain at once. Teams are masks over at most
//! [`FAMILY_SLOT_CAP`] slots and a family is a bit table indexed by mask.

use std::collections::HashMap;

use super::compile::{compile, Kind};
use super::TeamError;
use crate::atoms::Registry;
use crate::model::{submasks, ModelError, Relation, SlotSet, Structure, Team};
use crate::syntax::Formula;
use crate::tarski::dep_membership;

/// Largest frame (in assignment slots) the bulk engine accepts.
pub const FAMILY_SLOT_CAP: usize = 16;

#[derive(Clone, PartialEq, Eq, Debug)]
struct Table {
    slots: usize,
    words: Vec<u64>,
}

impl Table {
    fn new(slots: usize) -> Table {
        let bits = 1usize << slots;
        Table {
            slots,
            words: vec![0; bits.div_ceil(64)],
        }
    }

    #[inline]
    fn get(&self, mask: u64) -> bool {
        let i = mask as usize;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, mask: u64) {
        let i = mask as usize;
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn masks(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as u64;
                rest &= rest - 1;
                Some(wi as u64 * 64 + b)
            })
        })
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn zip(&self, other: &Table, f: impl Fn(u64, u64) -> u64) -> Table {
        Table {
            slots: self.slots,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn downward_closed(&self) -> bool {
        self.masks().all(|x| {
            let mut rest = x;
            while rest != 0 {
                let b = rest & rest.wrapping_neg();
                if !self.get(x & !b) {
                    return false;
                }
                rest &= rest - 1;
            }
            true
        })
    }

    /// `Some(T)` when the table is exactly the powerset of `T`.
    fn principal(&self) -> Option<u64> {
        let top = self.masks().fold(0, |acc, m| acc | m);
        let full = self.count() as u64 == 1u64 << top.count_ones();
        (full && self.get(top) && self.count() > 0).then_some(top)
    }

    fn powerset(slots: usize, top: u64) -> Table {
        let mut t = Table::new(slots);
        for m in submasks(top) {
            t.set(m);
        }
        t
    }
}

/// All teams over a fixed variable domain satisfying a formula.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TeamFamily {
    n: usize,
    vars: Vec<String>,
    table: Table,
}

impl TeamFamily {
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn domain_size(&self) -> usize {
        self.n
    }

    /// Number of assignment slots; teams are masks below `1 << slots()`.
    pub fn slots(&self) -> usize {
        self.table.slots
    }

    pub fn contains_mask(&self, mask: u64) -> bool {
        mask < 1u64 << self.table.slots && self.table.get(mask)
    }

    pub fn contains(&self, x: &Team) -> bool {
        x.vars() == self.vars.as_slice()
            && x.domain_size() == self.n
            && x.members().as_mask().is_some_and(|m| self.contains_mask(m))
    }

    pub fn len(&self) -> usize {
        self.table.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn masks(&self) -> impl Iterator<Item = u64> + '_ {
        self.table.masks()
    }

    pub fn teams(&self) -> impl Iterator<Item = Team> + '_ {
        self.masks().map(move |m| {
            Team::from_members(
                self.n,
                self.vars.clone(),
                SlotSet::from_mask(self.table.slots, m),
            )
        })
    }
}

/// Computes the satisfying family of `phi` over all teams with domain `vars`.
/// Every frame reached by the quantifiers must stay within
/// [`FAMILY_SLOT_CAP`] slots.
pub fn satisfying_teams(
    m: &Structure,
    vars: &[String],
    phi: &Formula,
    reg: &Registry,
) -> Result<TeamFamily, TeamError> {
    if let Some(v) = super::free_variables(phi).into_iter().find(|v| !vars.contains(v)) {
        return Err(TeamError::UnboundVariable(v));
    }
    let c = compile(m, vars, phi, reg)?;
    for f in &c.frames {
        if f.slots > FAMILY_SLOT_CAP {
            return Err(ModelError::ResourceLimit {
                n: c.n,
                k: f.vars.len(),
                cap: FAMILY_SLOT_CAP,
            }
            .into());
        }
    }
    let mut tables: Vec<Table> = Vec::with_capacity(c.nodes.len());
    for node in &c.nodes {
        let slots = c.frames[node.frame].slots;
        let table = match &node.kind {
            Kind::Lit(truth) => Table::powerset(slots, truth.as_mask().expect("small frame")),
            Kind::Atom { spec, proj } => {
                let k = spec.arity();
                let mut cache: HashMap<SlotSet, bool> = HashMap::new();
                let mut t = Table::new(slots);
                let empty = Relation::empty(c.n, k)?;
                for x in 0..(1u64 << slots) {
                    let mut bits = empty.bits().clone();
                    let mut rest = x;
                    while rest != 0 {
                        bits.insert(proj[rest.trailing_zeros() as usize] as usize);
                        rest &= rest - 1;
                    }
                    let member = match cache.get(&bits) {
                        Some(&b) => b,
                        None => {
                            let b = dep_membership(spec, &Relation::from_bits(c.n, k, bits.clone()))?;
                            cache.insert(bits, b);
                            b
                        }
                    };
                    if member {
                        t.set(x);
                    }
                }
                t
            }
            &Kind::And(a, b) => tables[a].zip(&tables[b], |x, y| x & y),
            &Kind::GlobalOr(a, b) => tables[a].zip(&tables[b], |x, y| x | y),
            &Kind::Or(a, b) => split_union(&tables[a], &tables[b]),
            Kind::Forall { child, ext, .. } => {
                let ext_masks = ext_masks(ext);
                let mut t = Table::new(slots);
                let mut acc = vec![0u64; 1 << slots];
                for x in 1..(1u64 << slots) {
                    let low = x.trailing_zeros() as usize;
                    acc[x as usize] = acc[(x & (x - 1)) as usize] | ext_masks[low];
                }
                for x in 0..(1u64 << slots) {
                    if tables[*child].get(acc[x as usize]) {
                        t.set(x);
                    }
                }
                t
            }
            Kind::Exists { child, ext, .. } => {
                let child_slots = c.frames[c.nodes[*child].frame].slots;
                // Extension sets partition the child slots; each class is
                // named by its least parent slot.
                let mut class_of_parent = vec![0usize; slots];
                let mut class_of_child = vec![0usize; child_slots];
                for s in 0..slots {
                    let rep = (0..s).find(|&r| ext[r] == ext[s]).unwrap_or(s);
                    class_of_parent[s] = rep;
                    for &y in &ext[s] {
                        if rep == s {
                            class_of_child[y as usize] = s;
                        }
                    }
                }
                let mut keys = Table::new(slots);
                for y in tables[*child].masks() {
                    let mut key = 0u64;
                    let mut rest = y;
                    while rest != 0 {
                        key |= 1 << class_of_child[rest.trailing_zeros() as usize];
                        rest &= rest - 1;
                    }
                    keys.set(key);
                }
                let mut t = Table::new(slots);
                let mut acc = vec![0u64; 1 << slots];
                for x in 0..(1u64 << slots) {
                    if x > 0 {
                        let low = x.trailing_zeros() as usize;
                        acc[x as usize] =
                            acc[(x & (x - 1)) as usize] | 1 << class_of_parent[low];
                    }
                    if keys.get(acc[x as usize]) {
                        t.set(x);
                    }
                }
                t
            }
        };
        tables.push(table);
    }
    Ok(TeamFamily {
        n: c.n,
        vars: c.frames[0].vars.clone(),
        table: tables.swap_remove(c.root),
    })
}

fn ext_masks(ext: &super::compile::Ext) -> Vec<u64> {
    ext.iter()
        .map(|e| e.iter().fold(0u64, |acc, &y| acc | 1 << y))
        .collect()
}

/// `{Y ∪ Z : Y ∈ a, Z ∈ b}`.
fn split_union(a: &Table, b: &Table) -> Table {
    let slots = a.slots;
    if a.count() == 0 || b.count() == 0 {
        return Table::new(slots);
    }
    if let (Some(ta), Some(tb)) = (a.principal(), b.principal()) {
        return Table::powerset(slots, ta | tb);
    }
    let (free, closed) = if b.downward_closed() {
        (Some(a), b)
    } else if a.downward_closed() {
        (Some(b), a)
    } else {
        (None, a)
    };
    let mut out = Table::new(slots);
    match free {
        Some(free) => {
            // X = Y ∪ (X \ Y) with the closed side shrunk to the complement.
            for x in 0..(1u64 << slots) {
                if submasks(x).any(|y| free.get(y) && closed.get(x & !y)) {
                    out.set(x);
                }
            }
        }
        None => {
            let bs: Vec<u64> = b.masks().collect();
            for y in a.masks() {
                for &z in &bs {
                    out.set(y | z);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::enumerate_teams;
    use crate::syntax::{parse_formula, ParseContext};
    use crate::teamsem::{eval_team_with, EvalOptions};

    #[test]
    fn agrees_with_top_down() {
        let m = Structure::new(2)
            .unwrap()
            .with_relation("R", Relation::from_tuples(2, 2, [[0, 1], [1, 1]]).unwrap())
            .unwrap();
        let reg = Registry::new();
        let vars = vec!["x".to_string(), "y".to_string()];
        for src in [
            "R(x, y) or x = y",
            "E y. (R(x, y) and dep(x ; y))",
            "ne(x) or inc(x ; y)",
            "(const(x) or const(y)) and E x. anon(y ; x)",
            "A y. (R(y, x) or exc(x ; y))",
            "E y. (ne(y) and y = x) gor all(x, y)",
            "(ne(x) or all(y)) or R(x, y)",
            "E z. (const(z) and (x = z or (ne(x) and z = y)))",
            "A z. E x. (R(z, x) or indep(z ; x))",
        ] {
            let phi = parse_formula(src, &ParseContext::default()).unwrap();
            let fam = satisfying_teams(&m, &vars, &phi, &reg).unwrap();
            for x in enumerate_teams(2, &vars).unwrap() {
                let naive = eval_team_with(&m, &x, &phi, &reg, EvalOptions::naive()).unwrap();
                assert_eq!(fam.contains(&x), naive, "{src} on {x}");
            }
        }
    }

    #[test]
    fn frame_cap() {
        let m = Structure::new(3).unwrap();
        let vars = vec!["x".to_string(), "y".to_string()];
        let phi = parse_formula("E z. x = z", &ParseContext::default()).unwrap();
        assert!(matches!(
            satisfying_teams(&m, &vars, &phi, &Registry::new()),
            Err(TeamError::Model(ModelError::ResourceLimit { .. }))
        ));
    }
}
