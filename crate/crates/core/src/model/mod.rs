//! Finite structures, teams and relations, plus the exhaustive enumerators
//! behind every brute-force check in the crate.
//!
//! Domain elements are `0..n`. A k-ary tuple `(a_1, ..., a_k)` has slot index
//! `a_1 n^(k-1) + ... + a_k`, so the first coordinate is most significant.
//! Relations and teams are sets of such slots.

mod bits;
mod enumerate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use bits::SlotSet;
pub(crate) use bits::submasks;
pub use enumerate::{
    enumerate_relations, enumerate_relations_capped, enumerate_teams, enumerate_teams_capped,
    RelationIter, TeamIter, DEFAULT_POSITION_CAP,
};

/// A domain element.
pub type Elem = usize;

/// A single assignment `s: V -> M`, keyed by variable name.
pub type Assignment = BTreeMap<String, Elem>;

/// Largest slot universe a relation or team may occupy.
pub const MAX_SLOTS: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("domain must contain at least one element")]
    EmptyDomain,
    #[error("element {elem} outside domain of size {n}")]
    ElementOutOfRange { elem: Elem, n: usize },
    #[error("tuple of length {got} for a relation of arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` listed twice in a team domain")]
    DuplicateVariable(String),
    #[error("{n}^{k} tuple positions exceed the configured cap of {cap}")]
    ResourceLimit { n: usize, k: usize, cap: usize },
    #[error("choice function undefined on assignment {0:?}")]
    ChoiceUndefined(Vec<Elem>),
    #[error("choice function yields the empty set on assignment {0:?}")]
    ChoiceEmpty(Vec<Elem>),
    #[error("domain size mismatch: {0} vs {1}")]
    DomainMismatch(usize, usize),
}

/// `n^k`, or `None` when it exceeds [`MAX_SLOTS`].
pub fn slot_count(n: usize, k: usize) -> Option<usize> {
    let k32 = u32::try_from(k).ok()?;
    n.checked_pow(k32).filter(|&c| c <= MAX_SLOTS)
}

pub(crate) fn tuple_index(n: usize, tuple: &[Elem]) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * n + e)
}

pub(crate) fn decode_tuple(n: usize, k: usize, mut index: usize) -> Vec<Elem> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    out
}

/// A k-ary relation over the domain `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Relation {
    n: usize,
    arity: usize,
    bits: SlotSet,
}

impl Relation {
    /// The empty relation. `n = 0` is allowed here so that relations over an
    /// empty domain can be handed to membership checks.
    pub fn empty(n: usize, arity: usize) -> Result<Self, ModelError> {
        let slots = slot_count(n, arity).ok_or(ModelError::ResourceLimit {
            n,
            k: arity,
            cap: MAX_SLOTS,
        })?;
        Ok(Relation {
            n,
            arity,
            bits: SlotSet::new(slots),
        })
    }

    pub fn full(n: usize, arity: usize) -> Result<Self, ModelError> {
        let mut r = Self::empty(n, arity)?;
        r.bits = SlotSet::full(r.bits.universe());
        Ok(r)
    }

    pub fn from_tuples<I, T>(n: usize, arity: usize, tuples: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[Elem]>,
    {
        let mut r = Self::empty(n, arity)?;
        for t in tuples {
            r.insert(t.as_ref())?;
        }
        Ok(r)
    }

    /// The relation whose slot `i` is present iff bit `i` of `mask` is set.
    pub fn from_mask(n: usize, arity: usize, mask: u64) -> Result<Self, ModelError> {
        let mut r = Self::empty(n, arity)?;
        if r.bits.universe() > 64 {
            return Err(ModelError::ResourceLimit { n, k: arity, cap: 64 });
        }
        r.bits = SlotSet::from_mask(r.bits.universe(), mask);
        Ok(r)
    }

    pub(crate) fn from_bits(n: usize, arity: usize, bits: SlotSet) -> Self {
        debug_assert_eq!(Some(bits.universe()), slot_count(n, arity));
        Relation { n, arity, bits }
    }

    pub fn domain_size(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bits(&self) -> &SlotSet {
        &self.bits
    }

    pub fn mask(&self) -> Option<u64> {
        self.bits.as_mask()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn check_tuple(&self, tuple: &[Elem]) -> Result<(), ModelError> {
        if tuple.len() != self.arity {
            return Err(ModelError::ArityMismatch {
                expected: self.arity,
                got: tuple.len(),
            });
        }
        if let Some(&elem) = tuple.iter().find(|&&e| e >= self.n) {
            return Err(ModelError::ElementOutOfRange { elem, n: self.n });
        }
        Ok(())
    }

    pub fn insert(&mut self, tuple: &[Elem]) -> Result<(), ModelError> {
        self.check_tuple(tuple)?;
        self.bits.insert(tuple_index(self.n, tuple));
        Ok(())
    }

    pub fn contains(&self, tuple: &[Elem]) -> bool {
        tuple.len() == self.arity
            && tuple.iter().all(|&e| e < self.n)
            && self.bits.contains(tuple_index(self.n, tuple))
    }

    /// Tuples in lexicographic order.
    pub fn tuples(&self) -> impl Iterator<Item = Vec<Elem>> + '_ {
        self.bits
            .iter()
            .map(move |i| decode_tuple(self.n, self.arity, i))
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.same_shape(other) && self.bits.is_subset(&other.bits)
    }

    fn same_shape(&self, other: &Relation) -> bool {
        self.n == other.n && self.arity == other.arity
    }

    pub fn union(&self, other: &Relation) -> Result<Relation, ModelError> {
        self.shape_check(other)?;
        Ok(Relation::from_bits(self.n, self.arity, self.bits.union(&other.bits)))
    }

    pub fn intersection(&self, other: &Relation) -> Result<Relation, ModelError> {
        self.shape_check(other)?;
        Ok(Relation::from_bits(
            self.n,
            self.arity,
            self.bits.intersection(&other.bits),
        ))
    }

    fn shape_check(&self, other: &Relation) -> Result<(), ModelError> {
        if self.n != other.n {
            return Err(ModelError::DomainMismatch(self.n, other.n));
        }
        if self.arity != other.arity {
            return Err(ModelError::ArityMismatch {
                expected: self.arity,
                got: other.arity,
            });
        }
        Ok(())
    }

    /// The set of elements occurring in some tuple.
    pub fn fld(&self) -> BTreeSet<Elem> {
        self.tuples().flatten().collect()
    }

    /// Projects onto the given columns (repetitions allowed).
    pub fn project(&self, columns: &[usize]) -> Result<Relation, ModelError> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.arity) {
            return Err(ModelError::ArityMismatch {
                expected: self.arity,
                got: c + 1,
            });
        }
        let mut out = Relation::empty(self.n, columns.len())?;
        for t in self.tuples() {
            let p: Vec<Elem> = columns.iter().map(|&c| t[c]).collect();
            out.bits.insert(tuple_index(self.n, &p));
        }
        Ok(out)
    }

    /// `R ∩ A^k` for the listed elements, relabelled order-preservingly onto
    /// `0..elems.len()`.
    pub fn restrict_to(&self, elems: &BTreeSet<Elem>) -> Result<Relation, ModelError> {
        let relabel: BTreeMap<Elem, Elem> =
            elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut out = Relation::empty(elems.len(), self.arity)?;
        for t in self.tuples() {
            if let Some(mapped) = t.iter().map(|e| relabel.get(e).copied()).collect::<Option<Vec<_>>>() {
                out.insert(&mapped)?;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.tuples().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let parts: Vec<String> = t.iter().map(|e| e.to_string()).collect();
            write!(f, "({})", parts.join(","))?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Relation", 3)?;
        st.serialize_field("domain", &self.n)?;
        st.serialize_field("arity", &self.arity)?;
        st.serialize_field("tuples", &self.tuples().collect::<Vec<_>>())?;
        st.end()
    }
}

/// A finite first-order structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    n: usize,
    labels: Option<Vec<String>>,
    relations: BTreeMap<String, Relation>,
    constants: BTreeMap<String, Elem>,
    predicate: Option<String>,
}

impl Structure {
    pub fn new(n: usize) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::EmptyDomain);
        }
        Ok(Structure {
            n,
            labels: None,
            relations: BTreeMap::new(),
            constants: BTreeMap::new(),
            predicate: None,
        })
    }

    /// A structure whose elements carry display labels.
    pub fn with_labels(labels: Vec<String>) -> Result<Self, ModelError> {
        let mut s = Self::new(labels.len())?;
        s.labels = Some(labels);
        Ok(s)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn add_relation(&mut self, name: &str, rel: Relation) -> Result<(), ModelError> {
        if rel.domain_size() != self.n {
            return Err(ModelError::DomainMismatch(self.n, rel.domain_size()));
        }
        self.relations.insert(name.to_string(), rel);
        Ok(())
    }

    pub fn with_relation(mut self, name: &str, rel: Relation) -> Result<Self, ModelError> {
        self.add_relation(name, rel)?;
        Ok(self)
    }

    pub fn set_constant(&mut self, name: &str, value: Elem) -> Result<(), ModelError> {
        if value >= self.n {
            return Err(ModelError::ElementOutOfRange {
                elem: value,
                n: self.n,
            });
        }
        self.constants.insert(name.to_string(), value);
        Ok(())
    }

    /// Installs the distinguished unary predicate used for relativization.
    pub fn set_predicate(
        &mut self,
        name: &str,
        elems: impl IntoIterator<Item = Elem>,
    ) -> Result<(), ModelError> {
        let mut rel = Relation::empty(self.n, 1)?;
        for e in elems {
            rel.insert(&[e])?;
        }
        self.relations.insert(name.to_string(), rel);
        self.predicate = Some(name.to_string());
        Ok(())
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }

    pub fn constant(&self, name: &str) -> Option<Elem> {
        self.constants.get(name).copied()
    }

    pub fn constants(&self) -> &BTreeMap<String, Elem> {
        &self.constants
    }

    /// The distinguished predicate's name and extension.
    pub fn predicate(&self) -> Option<(&str, &Relation)> {
        let name = self.predicate.as_deref()?;
        Some((name, self.relations.get(name)?))
    }

    pub fn label(&self, e: Elem) -> String {
        match &self.labels {
            Some(l) if e < l.len() => l[e].clone(),
            _ => e.to_string(),
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Looks up an element by label or decimal index.
    pub fn element(&self, token: &str) -> Option<Elem> {
        if let Some(labels) = &self.labels {
            if let Some(i) = labels.iter().position(|l| l == token) {
                return Some(i);
            }
        }
        token.parse::<Elem>().ok().filter(|&e| e < self.n)
    }
}

/// A team: a set of assignments sharing the variable domain `vars`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Team {
    n: usize,
    vars: Vec<String>,
    members: SlotSet,
}

impl Team {
    /// The empty team over `vars`.
    pub fn empty(n: usize, vars: Vec<String>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.as_str()) {
                return Err(ModelError::DuplicateVariable(v.clone()));
            }
        }
        let slots = slot_count(n, vars.len()).ok_or(ModelError::ResourceLimit {
            n,
            k: vars.len(),
            cap: MAX_SLOTS,
        })?;
        Ok(Team {
            n,
            vars,
            members: SlotSet::new(slots),
        })
    }

    /// `{ε}`: the team holding only the empty assignment.
    pub fn unit(n: usize) -> Self {
        let mut t = Team::empty(n, Vec::new()).expect("n^0 = 1 slot");
        t.members.insert(0);
        t
    }

    pub fn from_rows<I, R>(n: usize, vars: Vec<String>, rows: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[Elem]>,
    {
        let mut t = Team::empty(n, vars)?;
        for r in rows {
            t.insert_row(r.as_ref())?;
        }
        Ok(t)
    }

    pub fn from_assignments<'a>(
        n: usize,
        vars: Vec<String>,
        assignments: impl IntoIterator<Item = &'a Assignment>,
    ) -> Result<Self, ModelError> {
        let mut t = Team::empty(n, vars)?;
        for s in assignments {
            let row = t
                .vars
                .iter()
                .map(|v| s.get(v).copied().ok_or_else(|| ModelError::UnknownVariable(v.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            if s.len() != t.vars.len() {
                let extra = s.keys().find(|k| !t.vars.contains(k)).cloned().unwrap_or_default();
                return Err(ModelError::UnknownVariable(extra));
            }
            t.insert_row(&row)?;
        }
        Ok(t)
    }

    pub(crate) fn from_members(n: usize, vars: Vec<String>, members: SlotSet) -> Self {
        debug_assert_eq!(Some(members.universe()), slot_count(n, vars.len()));
        Team { n, vars, members }
    }

    pub fn insert_row(&mut self, row: &[Elem]) -> Result<(), ModelError> {
        if row.len() != self.vars.len() {
            return Err(ModelError::ArityMismatch {
                expected: self.vars.len(),
                got: row.len(),
            });
        }
        if let Some(&elem) = row.iter().find(|&&e| e >= self.n) {
            return Err(ModelError::ElementOutOfRange { elem, n: self.n });
        }
        self.members.insert(tuple_index(self.n, row));
        Ok(())
    }

    pub fn domain_size(&self) -> usize {
        self.n
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn members(&self) -> &SlotSet {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    /// Member assignments as value rows in `vars` order.
    pub fn rows(&self) -> impl Iterator<Item = Vec<Elem>> + '_ {
        self.members
            .iter()
            .map(move |i| decode_tuple(self.n, self.vars.len(), i))
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.rows()
            .map(move |row| self.vars.iter().cloned().zip(row).collect())
    }

    pub fn contains_row(&self, row: &[Elem]) -> bool {
        row.len() == self.vars.len()
            && row.iter().all(|&e| e < self.n)
            && self.members.contains(tuple_index(self.n, row))
    }

    pub fn is_subteam_of(&self, other: &Team) -> bool {
        self.n == other.n && self.vars == other.vars && self.members.is_subset(&other.members)
    }

    pub fn union(&self, other: &Team) -> Result<Team, ModelError> {
        if self.n != other.n {
            return Err(ModelError::DomainMismatch(self.n, other.n));
        }
        if self.vars != other.vars {
            let missing = other
                .vars
                .iter()
                .find(|v| !self.vars.contains(v))
                .or_else(|| self.vars.iter().find(|v| !other.vars.contains(v)))
                .cloned()
                .unwrap_or_default();
            return Err(ModelError::UnknownVariable(missing));
        }
        Ok(Team::from_members(
            self.n,
            self.vars.clone(),
            self.members.union(&other.members),
        ))
    }

    /// Human-readable form, e.g. `{x=0,y=1; x=1,y=1}`.
    pub fn render(&self, label: impl Fn(Elem) -> String) -> String {
        let rows: Vec<String> = self
            .rows()
            .map(|row| {
                self.vars
                    .iter()
                    .zip(row)
                    .map(|(v, e)| format!("{v}={}", label(e)))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .map(|r| if r.is_empty() { "ε".to_string() } else { r })
            .collect();
        format!("{{{}}}", rows.join("; "))
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(|e| e.to_string()))
    }
}

impl Serialize for Team {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Team", 3)?;
        st.serialize_field("domain", &self.n)?;
        st.serialize_field("vars", &self.vars)?;
        st.serialize_field("rows", &self.rows().collect::<Vec<_>>())?;
        st.end()
    }
}

/// `X(v⃗) = { s(v⃗) : s ∈ X }`. Repeated variables are allowed.
pub fn team_projection<S: AsRef<str>>(team: &Team, vars: &[S]) -> Result<Relation, ModelError> {
    let positions = vars
        .iter()
        .map(|v| {
            team.position(v.as_ref())
                .ok_or_else(|| ModelError::UnknownVariable(v.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Relation::empty(team.n, positions.len())?;
    for row in team.rows() {
        let t: Vec<Elem> = positions.iter().map(|&p| row[p]).collect();
        out.bits.insert(tuple_index(team.n, &t));
    }
    Ok(out)
}

/// Variable domain and slot map for `X[.../v]`: either `v` is new and is
/// appended last, or it overwrites an existing position.
fn extended_vars(team: &Team, var: &str) -> (Vec<String>, Option<usize>) {
    match team.position(var) {
        Some(p) => (team.vars.clone(), Some(p)),
        None => {
            let mut vars = team.vars.clone();
            vars.push(var.to_string());
            (vars, None)
        }
    }
}

fn extend_with(
    team: &Team,
    var: &str,
    mut values: impl FnMut(&[Elem]) -> Result<Vec<Elem>, ModelError>,
) -> Result<Team, ModelError> {
    let (vars, overwrite) = extended_vars(team, var);
    let mut out = Team::empty(team.n, vars)?;
    for row in team.rows() {
        for m in values(&row)? {
            let mut r = row.clone();
            match overwrite {
                Some(p) => r[p] = m,
                None => r.push(m),
            }
            out.members.insert(tuple_index(team.n, &r));
        }
    }
    Ok(out)
}

/// `X[M/v]`. Overwrites `v` if it is already in the domain.
pub fn extend_universal(team: &Team, var: &str) -> Team {
    let n = team.n;
    extend_with(team, var, |_| Ok((0..n).collect()))
        .expect("universal extension stays within the slot cap of its caller")
}

/// `X[H/v]` for a choice function given as a map from member rows (in the
/// team's variable order) to nonempty element sets.
pub fn extend_choice(
    team: &Team,
    var: &str,
    choice: &BTreeMap<Vec<Elem>, BTreeSet<Elem>>,
) -> Result<Team, ModelError> {
    let n = team.n;
    extend_with(team, var, |row| {
        let set = choice
            .get(row)
            .ok_or_else(|| ModelError::ChoiceUndefined(row.to_vec()))?;
        if set.is_empty() {
            return Err(ModelError::ChoiceEmpty(row.to_vec()));
        }
        if let Some(&elem) = set.iter().find(|&&e| e >= n) {
            return Err(ModelError::ElementOutOfRange { elem, n });
        }
        Ok(set.iter().copied().collect())
    })
}

/// Union of the entries of all tuples of `rel`.
pub fn fld(rel: &Relation) -> BTreeSet<Elem> {
    rel.fld()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn projection_examples() {
        let x = Team::from_rows(2, vars(&["x", "y"]), [[0, 1], [1, 1]]).unwrap();
        let px = team_projection(&x, &["x"]).unwrap();
        assert_eq!(px.tuples().collect::<Vec<_>>(), vec![vec![0], vec![1]]);
        let py = team_projection(&x, &["y"]).unwrap();
        assert_eq!(py.tuples().collect::<Vec<_>>(), vec![vec![1]]);
        let empty = Team::empty(2, vars(&["x", "y"])).unwrap();
        assert!(team_projection(&empty, &["x", "y"]).unwrap().is_empty());
        let rep = team_projection(&x, &["y", "y", "x"]).unwrap();
        assert!(rep.contains(&[1, 1, 0]));
        assert!(matches!(
            team_projection(&x, &["z"]),
            Err(ModelError::UnknownVariable(_))
        ));
    }

    #[test]
    fn universal_extension() {
        let unit = Team::unit(2);
        let ext = extend_universal(&unit, "v");
        assert_eq!(ext.vars(), &["v".to_string()]);
        assert_eq!(ext.rows().collect::<Vec<_>>(), vec![vec![0], vec![1]]);

        let empty = Team::empty(2, vec![]).unwrap();
        assert!(extend_universal(&empty, "v").is_empty());

        let single = Team::from_rows(2, vars(&["v"]), [[0]]).unwrap();
        let over = extend_universal(&single, "v");
        assert_eq!(over.rows().collect::<Vec<_>>(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn choice_extension() {
        let unit = Team::unit(2);
        let mut h = BTreeMap::new();
        h.insert(vec![], BTreeSet::from([1]));
        assert_eq!(
            extend_choice(&unit, "v", &h).unwrap().rows().collect::<Vec<_>>(),
            vec![vec![1]]
        );
        h.insert(vec![], BTreeSet::from([0, 1]));
        assert_eq!(extend_choice(&unit, "v", &h).unwrap().len(), 2);

        let empty = Team::empty(2, vec![]).unwrap();
        assert!(extend_choice(&empty, "v", &BTreeMap::new()).unwrap().is_empty());

        assert!(matches!(
            extend_choice(&unit, "v", &BTreeMap::new()),
            Err(ModelError::ChoiceUndefined(_))
        ));
        h.insert(vec![], BTreeSet::new());
        assert!(matches!(
            extend_choice(&unit, "v", &h),
            Err(ModelError::ChoiceEmpty(_))
        ));
    }

    #[test]
    fn fld_examples() {
        let r = Relation::from_tuples(3, 2, [[0, 1], [1, 2]]).unwrap();
        assert_eq!(fld(&r), BTreeSet::from([0, 1, 2]));
        assert!(fld(&Relation::empty(3, 2).unwrap()).is_empty());
        let d = Relation::from_tuples(3, 2, [[2, 2]]).unwrap();
        assert_eq!(fld(&d), BTreeSet::from([2]));
    }

    #[test]
    fn restrict_relabels() {
        let r = Relation::from_tuples(3, 2, [[0, 2], [2, 2], [1, 0]]).unwrap();
        let sub = r.restrict_to(&BTreeSet::from([0, 2])).unwrap();
        assert_eq!(sub.domain_size(), 2);
        assert_eq!(
            sub.tuples().collect::<Vec<_>>(),
            vec![vec![0, 1], vec![1, 1]]
        );
    }

    #[test]
    fn structure_rejects_bad_values() {
        assert_eq!(Structure::new(0), Err(ModelError::EmptyDomain));
        let mut m = Structure::new(2).unwrap();
        assert!(m.set_constant("c", 2).is_err());
        assert!(Relation::from_tuples(2, 1, [[3]]).is_err());
        m.set_predicate("P", [1]).unwrap();
        assert_eq!(m.predicate().unwrap().1.len(), 1);
    }
}
