//! Exhaustive classification of dependencies by closure properties, plus the
//! maximality, non-jumping, EF-equivalence and step-search machinery.

mod ef;
mod maximal;
mod step;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::atoms::{builtin_spec, RegistryError, TABLE1_ROWS};
use crate::model::{slot_count, Elem, ModelError, Relation, SlotSet, DEFAULT_POSITION_CAP};
use crate::syntax::{DependencySpec, Flag, Property};
use crate::tarski::{dep_membership, TarskiError};

pub use ef::ef_equiv;
pub use maximal::{dmax_membership, nonjumping_probe};
pub use step::{step_search, StepOptions, StepWitness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tarski(#[from] TarskiError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("structures have different signatures")]
    SignatureMismatch,
    #[error("nmax must be at least 1")]
    BadBound,
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug)]
pub struct ProbeOptions {
    pub nmax: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
    pub seed: u64,
    /// Random relations drawn per domain size beyond the exhaustive cap.
    pub samples: usize,
    /// Largest `n^k` enumerated exhaustively.
    pub position_cap: usize,
    /// Keep every counterexample rather than stopping at the first.
    pub collect_all: bool,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            nmax: 3,
            jobs: Some(1),
            seed: 0,
            samples: 20_000,
            position_cap: DEFAULT_POSITION_CAP,
            collect_all: false,
        }
    }
}

impl ProbeOptions {
    pub fn with_nmax(nmax: usize) -> Self {
        ProbeOptions {
            nmax,
            ..ProbeOptions::default()
        }
    }

    /// Runs `f` on a pool with the configured number of workers.
    pub fn run<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, LabError> {
        match self.jobs {
            None => Ok(f()),
            Some(j) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(j.max(1))
                    .build()
                    .map_err(|e| LabError::Pool(e.to_string()))?;
                Ok(pool.install(f))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Sampled { seed: u64, samples: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    HoldsUpToBound,
    Counterexample,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Counterexample {
    /// `(A, ∅) ∉ D`.
    EmptyTeam { domain: usize },
    Downwards {
        domain: usize,
        relation: Relation,
        subset: Relation,
    },
    /// An empty `parts` list is the empty family, whose union is `∅`.
    Union {
        domain: usize,
        parts: Vec<Relation>,
        union: Relation,
    },
    Upwards {
        domain: usize,
        relation: Relation,
        superset: Relation,
    },
    DomainIndependence {
        domain: usize,
        relation: Relation,
        field: Vec<Elem>,
        restricted: Relation,
        member_over_domain: bool,
        member_over_field: bool,
    },
    /// A member of `D` with no maximal member reachable through members.
    Jump { domain: usize, relation: Relation },
}

impl Counterexample {
    /// Re-checks the counterexample against `dep_membership`.
    pub fn reverify(&self, spec: &DependencySpec) -> Result<bool, LabError> {
        let m = |r: &Relation| dep_membership(spec, r);
        Ok(match self {
            Counterexample::EmptyTeam { domain } => !m(&Relation::empty(*domain, spec.arity())?)?,
            Counterexample::Downwards {
                relation, subset, ..
            } => subset.is_subset(relation) && m(relation)? && !m(subset)?,
            Counterexample::Union { parts, union, .. } => {
                let mut acc = Relation::empty(union.domain_size(), union.arity())?;
                for p in parts {
                    if !m(p)? {
                        return Ok(false);
                    }
                    acc = acc.union(p)?;
                }
                acc == *union && !m(union)?
            }
            Counterexample::Upwards {
                relation, superset, ..
            } => relation.is_subset(superset) && m(relation)? && !m(superset)?,
            Counterexample::DomainIndependence {
                relation,
                field,
                restricted,
                member_over_domain,
                member_over_field,
                ..
            } => {
                let fld: Vec<Elem> = relation.fld().into_iter().collect();
                fld == *field
                    && relation.restrict_to(&relation.fld())? == *restricted
                    && m(relation)? == *member_over_domain
                    && m(restricted)? == *member_over_field
                    && member_over_domain != member_over_field
            }
            Counterexample::Jump { relation, .. } => {
                m(relation)? && !maximal::reaches_maximal(spec, relation)?
            }
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub dependency: String,
    pub property: String,
    pub nmax: usize,
    pub mode: SearchMode,
    pub result: Outcome,
    pub counterexamples: Vec<Counterexample>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.result == Outcome::HoldsUpToBound
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        self.counterexamples.first()
    }

    pub(crate) fn new(
        spec: &DependencySpec,
        property: &str,
        nmax: usize,
        mode: SearchMode,
        counterexamples: Vec<Counterexample>,
        notes: Vec<String>,
    ) -> Verdict {
        Verdict {
            dependency: spec.label(),
            property: property.to_string(),
            nmax,
            mode,
            result: if counterexamples.is_empty() {
                Outcome::HoldsUpToBound
            } else {
                Outcome::Counterexample
            },
            counterexamples,
            notes,
        }
    }
}

/// Membership of `(0..n, R)` for every relation over small domains, indexed
/// by relation bitmask.
pub(crate) struct Oracle<'a> {
    pub spec: &'a DependencySpec,
    pub k: usize,
    tables: BTreeMap<usize, Vec<bool>>,
}

impl<'a> Oracle<'a> {
    pub fn new(spec: &'a DependencySpec, nmax: usize, cap: usize) -> Result<Self, LabError> {
        let k = spec.arity();
        let mut tables = BTreeMap::new();
        for n in 1..=nmax {
            let Some(p) = slot_count(n, k).filter(|&p| p <= cap && p < 64) else {
                continue;
            };
            let table = (0..1u64 << p)
                .into_par_iter()
                .map(|mask| dep_membership(spec, &Relation::from_bits(n, k, SlotSet::from_mask(p, mask))))
                .collect::<Result<Vec<bool>, _>>()?;
            tables.insert(n, table);
        }
        Ok(Oracle { spec, k, tables })
    }

    pub fn table(&self, n: usize) -> Option<&[bool]> {
        self.tables.get(&n).map(Vec::as_slice)
    }

    pub fn member(&self, r: &Relation) -> Result<bool, LabError> {
        if let (Some(t), Some(mask)) = (self.tables.get(&r.domain_size()), r.mask()) {
            return Ok(t[mask as usize]);
        }
        Ok(dep_membership(self.spec, r)?)
    }

    pub fn relation(&self, n: usize, mask: u64) -> Relation {
        let p = slot_count(n, self.k).expect("small");
        Relation::from_bits(n, self.k, SlotSet::from_mask(p, mask))
    }
}

/// Scans `0..count` in parallel, keeping the least hit or all hits in order.
fn scan<T: Send>(
    count: u64,
    collect_all: bool,
    f: impl Fn(u64) -> Option<T> + Sync + Send,
) -> Vec<T> {
    if collect_all {
        (0..count).into_par_iter().filter_map(f).collect()
    } else {
        (0..count).into_par_iter().find_map_first(f).into_iter().collect()
    }
}

fn random_relation(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Result<Relation, LabError> {
    let mut r = Relation::empty(n, k)?;
    let p = r.bits().universe();
    let mut bits = r.bits().clone();
    for i in 0..p {
        if rng.gen::<bool>() {
            bits.insert(i);
        }
    }
    r = Relation::from_bits(n, k, bits);
    Ok(r)
}

const UNION_NOTE: &str = "closure under finite unions follows by induction from the empty family and binary unions; infinite families are not testable";
const DOMIND_NOTE: &str = "R = ∅ skipped: (Fld(∅), ∅) would need an empty domain";

/// Runs one closure probe for domains `1..=nmax`.
pub fn probe(
    spec: &DependencySpec,
    property: Property,
    opts: &ProbeOptions,
) -> Result<Verdict, LabError> {
    if opts.nmax == 0 {
        return Err(LabError::BadBound);
    }
    opts.run(|| {
        let oracle = Oracle::new(spec, opts.nmax, opts.position_cap)?;
        probe_with(&oracle, property, opts)
    })?
}

pub(crate) fn probe_with(
    oracle: &Oracle,
    property: Property,
    opts: &ProbeOptions,
) -> Result<Verdict, LabError> {
    let spec = oracle.spec;
    let k = oracle.k;
    let mut found = Vec::new();
    let mut sampled = false;
    for n in 1..=opts.nmax {
        let hits = match oracle.table(n) {
            Some(t) => exhaustive(oracle, t, n, property, opts.collect_all)?,
            None => {
                sampled = true;
                sampled_probe(oracle, n, property, opts)?
            }
        };
        found.extend(hits);
        if !found.is_empty() && !opts.collect_all {
            break;
        }
    }
    let mut notes = Vec::new();
    match property {
        Property::Union => notes.push(UNION_NOTE.to_string()),
        Property::DomainIndependence => notes.push(DOMIND_NOTE.to_string()),
        _ => {}
    }
    let mode = if sampled {
        notes.push(format!(
            "domains with n^{k} above {} tuple positions were sampled",
            opts.position_cap
        ));
        SearchMode::Sampled {
            seed: opts.seed,
            samples: opts.samples,
        }
    } else {
        SearchMode::Exhaustive
    };
    Ok(Verdict::new(spec, property.key(), opts.nmax, mode, found, notes))
}

fn field_check(oracle: &Oracle, n: usize, r: &Relation) -> Result<Option<Counterexample>, LabError> {
    let fld = r.fld();
    let restricted = r.restrict_to(&fld)?;
    let over_a = oracle.member(r)?;
    let over_f = oracle.member(&restricted)?;
    Ok((over_a != over_f).then(|| Counterexample::DomainIndependence {
        domain: n,
        relation: r.clone(),
        field: fld.into_iter().collect(),
        restricted,
        member_over_domain: over_a,
        member_over_field: over_f,
    }))
}

fn exhaustive(
    oracle: &Oracle,
    t: &[bool],
    n: usize,
    property: Property,
    collect_all: bool,
) -> Result<Vec<Counterexample>, LabError> {
    let p = slot_count(n, oracle.k).expect("tabled");
    let count = 1u64 << p;
    let rel = |m: u64| oracle.relation(n, m);
    let out = match property {
        Property::EmptyTeam => {
            if t[0] {
                vec![]
            } else {
                vec![Counterexample::EmptyTeam { domain: n }]
            }
        }
        Property::Downwards => scan(count, collect_all, |r| {
            if !t[r as usize] {
                return None;
            }
            (0..p)
                .map(|b| r & !(1 << b))
                .find(|&s| s != r && !t[s as usize])
                .map(|s| Counterexample::Downwards {
                    domain: n,
                    relation: rel(r),
                    subset: rel(s),
                })
        }),
        Property::Upwards => scan(count, collect_all, |r| {
            if !t[r as usize] {
                return None;
            }
            (0..p)
                .map(|b| r | 1 << b)
                .find(|&s| s != r && !t[s as usize])
                .map(|s| Counterexample::Upwards {
                    domain: n,
                    relation: rel(r),
                    superset: rel(s),
                })
        }),
        Property::Union => {
            let mut out = Vec::new();
            if !t[0] {
                out.push(Counterexample::Union {
                    domain: n,
                    parts: vec![],
                    union: rel(0),
                });
                if !collect_all {
                    return Ok(out);
                }
            }
            let members: Vec<u64> = (0..count).filter(|&m| t[m as usize]).collect();
            let len = members.len() as u64;
            out.extend(scan(len, collect_all, |i| {
                let a = members[i as usize];
                members[i as usize + 1..]
                    .iter()
                    .find(|&&b| !t[(a | b) as usize])
                    .map(|&b| Counterexample::Union {
                        domain: n,
                        parts: vec![rel(a), rel(b)],
                        union: rel(a | b),
                    })
            }));
            out
        }
        Property::DomainIndependence => {
            let hits: Vec<Result<Counterexample, LabError>> = scan(count, collect_all, |r| {
                if r == 0 {
                    return None;
                }
                field_check(oracle, n, &rel(r)).transpose()
            });
            hits.into_iter().collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(out)
}

fn sampled_probe(
    oracle: &Oracle,
    n: usize,
    property: Property,
    opts: &ProbeOptions,
) -> Result<Vec<Counterexample>, LabError> {
    let k = oracle.k;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut out = Vec::new();
    let empty = Relation::empty(n, k)?;
    if matches!(property, Property::EmptyTeam | Property::Union) && !oracle.member(&empty)? {
        out.push(match property {
            Property::EmptyTeam => Counterexample::EmptyTeam { domain: n },
            _ => Counterexample::Union {
                domain: n,
                parts: vec![],
                union: empty.clone(),
            },
        });
    }
    if property == Property::EmptyTeam {
        return Ok(out);
    }
    let p = empty.bits().universe();
    for _ in 0..opts.samples {
        if !out.is_empty() && !opts.collect_all {
            break;
        }
        let r = random_relation(&mut rng, n, k)?;
        match property {
            Property::Downwards | Property::Upwards => {
                if !oracle.member(&r)? {
                    continue;
                }
                for b in 0..p {
                    let mut bits = r.bits().clone();
                    let flip = if property == Property::Downwards {
                        bits.contains(b)
                    } else {
                        !bits.contains(b)
                    };
                    if !flip {
                        continue;
                    }
                    if property == Property::Downwards {
                        bits.remove(b);
                    } else {
                        bits.insert(b);
                    }
                    let s = Relation::from_bits(n, k, bits);
                    if !oracle.member(&s)? {
                        out.push(if property == Property::Downwards {
                            Counterexample::Downwards {
                                domain: n,
                                relation: r.clone(),
                                subset: s,
                            }
                        } else {
                            Counterexample::Upwards {
                                domain: n,
                                relation: r.clone(),
                                superset: s,
                            }
                        });
                        break;
                    }
                }
            }
            Property::Union => {
                let r2 = random_relation(&mut rng, n, k)?;
                if oracle.member(&r)? && oracle.member(&r2)? {
                    let u = r.union(&r2)?;
                    if !oracle.member(&u)? {
                        out.push(Counterexample::Union {
                            domain: n,
                            parts: vec![r, r2],
                            union: u,
                        });
                    }
                }
            }
            Property::DomainIndependence => {
                if !r.is_empty() {
                    out.extend(field_check(oracle, n, &r)?);
                }
            }
            Property::EmptyTeam => unreachable!(),
        }
    }
    Ok(out)
}

pub fn probe_empty_team(spec: &DependencySpec, opts: &ProbeOptions) -> Result<Verdict, LabError> {
    probe(spec, Property::EmptyTeam, opts)
}

pub fn probe_downwards(spec: &DependencySpec, opts: &ProbeOptions) -> Result<Verdict, LabError> {
    probe(spec, Property::Downwards, opts)
}

pub fn probe_union(spec: &DependencySpec, opts: &ProbeOptions) -> Result<Verdict, LabError> {
    probe(spec, Property::Union, opts)
}

pub fn probe_upwards(spec: &DependencySpec, opts: &ProbeOptions) -> Result<Verdict, LabError> {
    probe(spec, Property::Upwards, opts)
}

pub fn probe_domain_independence(
    spec: &DependencySpec,
    opts: &ProbeOptions,
) -> Result<Verdict, LabError> {
    probe(spec, Property::DomainIndependence, opts)
}

/// All requested probes on one dependency, sharing membership tables.
pub fn probe_all(
    spec: &DependencySpec,
    properties: &[Property],
    opts: &ProbeOptions,
) -> Result<Vec<Verdict>, LabError> {
    if opts.nmax == 0 {
        return Err(LabError::BadBound);
    }
    opts.run(|| {
        let oracle = Oracle::new(spec, opts.nmax, opts.position_cap)?;
        properties
            .iter()
            .map(|&p| probe_with(&oracle, p, opts))
            .collect()
    })?
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Match,
    /// Expected `-` but no counterexample exists up to the bound.
    MissingCounterexample,
    /// Expected `+` but a counterexample was found.
    FalseCounterexample,
    /// The stored flag is unknown.
    Unrecorded,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Cell {
    pub property: String,
    pub expected: Flag,
    pub observed: Flag,
    pub status: CellStatus,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Row {
    pub dependency: String,
    pub cells: Vec<Table1Cell>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Report {
    pub nmax: usize,
    pub rows: Vec<Table1Row>,
    pub matches: bool,
}

impl Table1Report {
    /// Fixed-width grid: `expected/observed` per cell.
    pub fn render(&self) -> String {
        let mut out = format!("{:<12}", "dependency");
        for p in Property::ALL {
            out.push_str(&format!("{:>9}", p.key()));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{:<12}", row.dependency));
            for c in &row.cells {
                let mark = if c.status == CellStatus::Match { " " } else { "!" };
                out.push_str(&format!("{:>9}", format!("{}{}{}", c.expected, c.observed, mark)));
            }
            out.push('\n');
        }
        out
    }
}

pub fn compare_flag(expected: Flag, verdict: &Verdict) -> (Flag, CellStatus) {
    let observed = if verdict.holds() { Flag::Yes } else { Flag::No };
    let status = match (expected, observed) {
        (Flag::Unknown, _) => CellStatus::Unrecorded,
        (e, o) if e == o => CellStatus::Match,
        (Flag::No, Flag::Yes) => CellStatus::MissingCounterexample,
        _ => CellStatus::FalseCounterexample,
    };
    (observed, status)
}

/// Runs all five probes on the seven classical rows and compares with the
/// stored metadata.
pub fn reproduce_table1(opts: &ProbeOptions) -> Result<Table1Report, LabError> {
    let mut rows = Vec::new();
    let mut matches = true;
    for (b, split) in TABLE1_ROWS {
        let spec = builtin_spec(b, split)?;
        let verdicts = probe_all(&spec, &Property::ALL, opts)?;
        let cells = Property::ALL
            .iter()
            .zip(verdicts)
            .map(|(&p, verdict)| {
                let expected = spec.flags.get(p);
                let (observed, status) = compare_flag(expected, &verdict);
                matches &= status == CellStatus::Match;
                Table1Cell {
                    property: p.key().to_string(),
                    expected,
                    observed,
                    status,
                    verdict,
                }
            })
            .collect();
        rows.push(Table1Row {
            dependency: spec.label(),
            cells,
        });
    }
    Ok(Table1Report {
        nmax: opts.nmax,
        rows,
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::Registry;
    use crate::syntax::Builtin;

    fn spec(label: &str) -> DependencySpec {
        Registry::new().lookup(label).unwrap()
    }

    #[test]
    fn empty_team_examples() {
        let o = ProbeOptions::with_nmax(3);
        assert!(probe_empty_team(&spec("inc"), &o).unwrap().holds());
        assert!(probe_empty_team(&spec("const"), &o).unwrap().holds());
        let v = probe_empty_team(&spec("ne"), &ProbeOptions::with_nmax(1)).unwrap();
        assert_eq!(v.counterexample(), Some(&Counterexample::EmptyTeam { domain: 1 }));
    }

    #[test]
    fn counterexamples_reverify() {
        let o = ProbeOptions::with_nmax(3);
        for b in Builtin::ALL {
            let s = builtin_spec(b, &crate::atoms::default_split(b)).unwrap();
            for v in probe_all(&s, &Property::ALL, &o).unwrap() {
                for c in &v.counterexamples {
                    assert!(c.reverify(&s).unwrap(), "{b} {}: {c:?}", v.property);
                }
            }
        }
    }

    #[test]
    fn specific_counterexamples() {
        let o = ProbeOptions::with_nmax(3);
        let v = probe_union(&spec("dep"), &o).unwrap();
        assert!(!v.holds());
        let v = probe_upwards(&spec("const"), &o).unwrap();
        assert!(matches!(v.counterexample(), Some(Counterexample::Upwards { .. })));
        let v = probe_domain_independence(&spec("all"), &o).unwrap();
        match v.counterexample().unwrap() {
            Counterexample::DomainIndependence { domain, relation, .. } => {
                assert_eq!(*domain, 2);
                assert_eq!(relation.tuples().collect::<Vec<_>>(), vec![vec![0]]);
            }
            other => panic!("{other:?}"),
        }
        let v = probe_downwards(&spec("inc"), &o).unwrap();
        assert!(v.counterexample().unwrap().reverify(&spec("inc")).unwrap());
    }

    #[test]
    fn table1_at_three() {
        let report = reproduce_table1(&ProbeOptions::with_nmax(3)).unwrap();
        assert!(report.matches, "{}", report.render());
    }

    #[test]
    fn table1_at_one_only_misses() {
        let report = reproduce_table1(&ProbeOptions::with_nmax(1)).unwrap();
        for row in &report.rows {
            for c in &row.cells {
                assert_ne!(c.status, CellStatus::FalseCounterexample);
            }
        }
    }

    #[test]
    fn collect_all_and_parallel_agree() {
        let s = spec("dep");
        let serial = probe_union(&s, &ProbeOptions::with_nmax(2)).unwrap();
        let par = probe_union(
            &s,
            &ProbeOptions {
                jobs: Some(3),
                ..ProbeOptions::with_nmax(2)
            },
        )
        .unwrap();
        assert_eq!(serial.counterexamples, par.counterexamples);
        let all = probe_union(
            &s,
            &ProbeOptions {
                collect_all: true,
                ..ProbeOptions::with_nmax(2)
            },
        )
        .unwrap();
        assert!(all.counterexamples.len() > 1);
        assert_eq!(all.counterexamples[0], serial.counterexamples[0]);
    }

    #[test]
    fn sampling_beyond_cap() {
        let o = ProbeOptions {
            position_cap: 3,
            samples: 500,
            seed: 7,
            ..ProbeOptions::with_nmax(3)
        };
        let v = probe_union(&spec("dep"), &o).unwrap();
        assert!(matches!(v.mode, SearchMode::Sampled { seed: 7, .. }));
        assert!(!v.holds());
    }
}
