use std::collections::HashMap;

use rayon::prelude::*;

use super::{Counterexample, LabError, Oracle, ProbeOptions, SearchMode, Verdict};
use crate::model::{slot_count, submasks, ModelError, Relation};
use crate::syntax::DependencySpec;
use crate::tarski::dep_membership;

fn mask_of(r: &Relation) -> Result<(usize, u64), LabError> {
    let p = r.bits().universe();
    match r.mask() {
        Some(m) if p < 64 => Ok((p, m)),
        _ => Err(ModelError::ResourceLimit {
            n: r.domain_size(),
            k: r.arity(),
            cap: 63,
        }
        .into()),
    }
}

/// `(A, R) ∈ D_max`: `R ∈ D` and no proper superset of `R` is in `D`.
pub fn dmax_membership(spec: &DependencySpec, r: &Relation) -> Result<bool, LabError> {
    if !dep_membership(spec, r)? {
        return Ok(false);
    }
    let (p, m) = mask_of(r)?;
    let comp = !m & ((1u64 << p) - 1);
    for s in submasks(comp).filter(|&s| s != 0) {
        let sup = Relation::from_mask(r.domain_size(), r.arity(), m | s)?;
        if dep_membership(spec, &sup)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether some `R' ⊇ R` in `D_max` has every `S` with `R ⊆ S ⊆ R'` in `D`.
pub(crate) fn reaches_maximal(spec: &DependencySpec, r: &Relation) -> Result<bool, LabError> {
    let (p, base) = mask_of(r)?;
    let (n, k) = (r.domain_size(), r.arity());
    let comp = !base & ((1u64 << p) - 1);
    let mut upset: Vec<u64> = submasks(comp).map(|s| base | s).collect();
    upset.reverse();
    let mut member = HashMap::new();
    for &m in &upset {
        member.insert(m, dep_membership(spec, &Relation::from_mask(n, k, m)?)?);
    }
    let free = |m: u64| (0..p).map(|b| 1u64 << b).filter(move |b| m & b == 0);
    let mut any_above: HashMap<u64, bool> = HashMap::new();
    for &m in upset.iter().rev() {
        let v = member[&m] || free(m).any(|b| any_above[&(m | b)]);
        any_above.insert(m, v);
    }
    let mut good: HashMap<u64, bool> = HashMap::new();
    for &m in &upset {
        let g = member[&m]
            && (0..p)
                .map(|b| 1u64 << b)
                .filter(|b| (m & !base) & b != 0)
                .all(|b| good[&(m ^ b)]);
        good.insert(m, g);
        let maximal = member[&m] && !free(m).any(|b| any_above[&(m | b)]);
        if g && maximal {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Searches for a member of `D` from which every route to a maximal member
/// leaves `D`, on every domain up to `nmax`.
pub fn nonjumping_probe(spec: &DependencySpec, opts: &ProbeOptions) -> Result<Verdict, LabError> {
    if opts.nmax == 0 {
        return Err(LabError::BadBound);
    }
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
    let found = opts.run(|| -> Result<Vec<Counterexample>, LabError> {
        let oracle = Oracle::new(spec, opts.nmax, opts.position_cap)?;
        let mut found = Vec::new();
        for n in 1..=opts.nmax {
            let t = oracle.table(n).expect("within cap");
            let p = slot_count(n, k).expect("small");
            let size = 1usize << p;
            let mut any_above = vec![false; size];
            for m in (0..size).rev() {
                any_above[m] = t[m] || (0..p).any(|b| m & 1 << b == 0 && any_above[m | 1 << b]);
            }
            let dmax: Vec<bool> = (0..size)
                .map(|m| t[m] && !(0..p).any(|b| m & 1 << b == 0 && any_above[m | 1 << b]))
                .collect();
            let jumps = |good: &mut Vec<bool>, r: usize| -> Option<Counterexample> {
                if !t[r] {
                    return None;
                }
                let comp = !r & (size - 1);
                let mut ups: Vec<u64> = submasks(comp as u64).collect();
                ups.reverse();
                for s in ups {
                    let m = r | s as usize;
                    good[m] = t[m] && (0..p).all(|b| s & 1 << b == 0 || good[m ^ 1 << b]);
                    if good[m] && dmax[m] {
                        return None;
                    }
                }
                Some(Counterexample::Jump {
                    domain: n,
                    relation: oracle.relation(n, r as u64),
                })
            };
            let hits: Vec<Counterexample> = if opts.collect_all {
                (0..size)
                    .into_par_iter()
                    .map_init(|| vec![false; size], jumps)
                    .flatten()
                    .collect()
            } else {
                (0..size)
                    .into_par_iter()
                    .map_init(|| vec![false; size], jumps)
                    .find_first(Option::is_some)
                    .flatten()
                    .into_iter()
                    .collect()
            };
            found.extend(hits);
            if !found.is_empty() && !opts.collect_all {
                break;
            }
        }
        Ok(found)
    })??;
    Ok(Verdict::new(
        spec,
        "nonjumping",
        opts.nmax,
        SearchMode::Exhaustive,
        found,
        vec!["maximal members are taken among relations over the same domain".into()],
    ))
}
