use std::collections::BTreeSet;

use serde::Serialize;

use super::{ef_equiv, LabError, Oracle};
use crate::model::{slot_count, submasks, Elem, ModelError, Relation, Structure};
use crate::syntax::DependencySpec;
use crate::tarski::dep_membership;

#[derive(Clone, Debug)]
pub struct StepOptions {
    pub nmax: usize,
    /// Quantifier rank for the EF check.
    pub rank: usize,
    /// Stop after this many witnesses.
    pub limit: usize,
    pub position_cap: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            nmax: 3,
            rank: 2,
            limit: 1,
            position_cap: crate::model::DEFAULT_POSITION_CAP,
        }
    }
}

/// `A1 ⊆ A2` with `R1 = R2 ∩ A1^k`, both in `D`, `(A1, R1) ≡_rank (A2, R2)`,
/// and an intermediate `S` with `R1 ⊆ S ⊆ R2` and `(A2, S) ∉ D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepWitness {
    pub rank: usize,
    pub large_domain: usize,
    pub subdomain: Vec<Elem>,
    /// `R1` relabeled onto `0..|A1|`.
    pub small: Relation,
    pub large: Relation,
    /// `R1` as a relation over `A2`.
    pub small_in_large: Relation,
    pub intermediate: Relation,
}

impl StepWitness {
    /// Re-checks every clause from scratch.
    pub fn reverify(&self, spec: &DependencySpec) -> Result<bool, LabError> {
        let a1: BTreeSet<Elem> = self.subdomain.iter().copied().collect();
        let k = self.large.arity();
        let mut inside = Relation::empty(self.large_domain, k)?;
        for t in self.large.tuples().filter(|t| t.iter().all(|e| a1.contains(e))) {
            inside.insert(&t)?;
        }
        Ok(inside == self.small_in_large
            && inside.restrict_to(&a1)? == self.small
            && inside.is_subset(&self.intermediate)
            && self.intermediate.is_subset(&self.large)
            && dep_membership(spec, &self.small)?
            && dep_membership(spec, &self.large)?
            && !dep_membership(spec, &self.intermediate)?
            && ef_equiv(
                &structure(&self.small)?,
                &structure(&self.large)?,
                self.rank,
            )?)
    }
}

fn structure(r: &Relation) -> Result<Structure, ModelError> {
    Structure::new(r.domain_size())?.with_relation("R", r.clone())
}

/// Looks for pairs of structures that agree up to the given rank, whose
/// relations are both in `D`, and where some relation squeezed between them
/// is not. Finding one rules out the bounded transfer argument for `D` at
/// that rank; finding none says nothing beyond the searched bound.
pub fn step_search(spec: &DependencySpec, opts: &StepOptions) -> Result<Vec<StepWitness>, LabError> {
    let k = spec.arity();
    let p_max = slot_count(opts.nmax, k).unwrap_or(usize::MAX);
    if p_max > opts.position_cap || p_max >= 64 {
        return Err(ModelError::ResourceLimit {
            n: opts.nmax,
            k,
            cap: opts.position_cap,
        }
        .into());
    }
    let oracle = Oracle::new(spec, opts.nmax, opts.position_cap)?;
    let mut out = Vec::new();
    for n2 in 2..=opts.nmax {
        let t2 = oracle.table(n2).expect("within cap");
        for r2 in (0..t2.len() as u64).filter(|&m| t2[m as usize]) {
            let large = oracle.relation(n2, r2);
            for a1_mask in 1..(1u32 << n2) - 1 {
                let a1: BTreeSet<Elem> = (0..n2).filter(|&e| a1_mask >> e & 1 == 1).collect();
                let mut inside = Relation::empty(n2, k)?;
                for t in large.tuples().filter(|t| t.iter().all(|e| a1.contains(e))) {
                    inside.insert(&t)?;
                }
                let small = inside.restrict_to(&a1)?;
                if !oracle.member(&small)? {
                    continue;
                }
                let base = inside.mask().expect("small");
                let Some(mid) = submasks(r2 & !base)
                    .map(|s| base | s)
                    .find(|&s| !t2[s as usize])
                else {
                    continue;
                };
                if !ef_equiv(&structure(&small)?, &structure(&large)?, opts.rank)? {
                    continue;
                }
                out.push(StepWitness {
                    rank: opts.rank,
                    large_domain: n2,
                    subdomain: a1.into_iter().collect(),
                    small,
                    large: large.clone(),
                    small_in_large: inside,
                    intermediate: oracle.relation(n2, mid),
                });
                if out.len() >= opts.limit {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::Registry;

    #[test]
    fn closed_dependencies_have_no_steps() {
        let reg = Registry::new();
        for label in ["ne", "const", "dep", "exc"] {
            let s = reg.lookup(label).unwrap();
            let w = step_search(&s, &StepOptions::default()).unwrap();
            assert!(w.is_empty(), "{label}: {w:?}");
        }
    }

    #[test]
    fn all_steps_at_rank_two() {
        let s = Registry::new().lookup("all").unwrap();
        let w = step_search(&s, &StepOptions::default()).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].large_domain, 3);
        assert_eq!(w[0].subdomain, vec![0, 1]);
        assert!(w[0].reverify(&s).unwrap());
        let deeper = StepOptions {
            rank: 3,
            ..StepOptions::default()
        };
        assert!(step_search(&s, &deeper).unwrap().is_empty());
    }
}
