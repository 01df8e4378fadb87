use super::{slot_count, ModelError, Relation, SlotSet, Team};

/// Default cap on `n^k` for exhaustive enumeration.
pub const DEFAULT_POSITION_CAP: usize = 16;

fn positions(n: usize, k: usize, cap: usize) -> Result<usize, ModelError> {
    if n == 0 {
        return Err(ModelError::EmptyDomain);
    }
    match slot_count(n, k) {
        Some(p) if p <= cap && p < 64 => Ok(p),
        _ => Err(ModelError::ResourceLimit { n, k, cap }),
    }
}

/// Counts masks `0, 1, ..., 2^p - 1`.
#[derive(Clone, Debug)]
struct MaskCounter {
    next: u64,
    end: u64,
}

impl Iterator for MaskCounter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.next >= self.end {
            return None;
        }
        let m = self.next;
        self.next += 1;
        Some(m)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

/// All k-ary relations over `0..n`, in increasing bitmask order.
#[derive(Clone, Debug)]
pub struct RelationIter {
    n: usize,
    k: usize,
    slots: usize,
    masks: MaskCounter,
}

impl Iterator for RelationIter {
    type Item = Relation;

    fn next(&mut self) -> Option<Relation> {
        let m = self.masks.next()?;
        Some(Relation::from_bits(
            self.n,
            self.k,
            SlotSet::from_mask(self.slots, m),
        ))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.masks.size_hint()
    }
}

impl ExactSizeIterator for RelationIter {}

pub fn enumerate_relations(n: usize, k: usize) -> Result<RelationIter, ModelError> {
    enumerate_relations_capped(n, k, DEFAULT_POSITION_CAP)
}

pub fn enumerate_relations_capped(
    n: usize,
    k: usize,
    cap: usize,
) -> Result<RelationIter, ModelError> {
    let slots = positions(n, k, cap)?;
    Ok(RelationIter {
        n,
        k,
        slots,
        masks: MaskCounter {
            next: 0,
            end: 1 << slots,
        },
    })
}

/// All teams with variable domain `vars`, in increasing bitmask order.
#[derive(Clone, Debug)]
pub struct TeamIter {
    n: usize,
    vars: Vec<String>,
    slots: usize,
    masks: MaskCounter,
}

impl Iterator for TeamIter {
    type Item = Team;

    fn next(&mut self) -> Option<Team> {
        let m = self.masks.next()?;
        Some(Team::from_members(
            self.n,
            self.vars.clone(),
            SlotSet::from_mask(self.slots, m),
        ))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.masks.size_hint()
    }
}

impl ExactSizeIterator for TeamIter {}

pub fn enumerate_teams(n: usize, vars: &[String]) -> Result<TeamIter, ModelError> {
    enumerate_teams_capped(n, vars, DEFAULT_POSITION_CAP)
}

pub fn enumerate_teams_capped(
    n: usize,
    vars: &[String],
    cap: usize,
) -> Result<TeamIter, ModelError> {
    // Validates duplicate names.
    Team::empty(n.max(1), vars.to_vec())?;
    let slots = positions(n, vars.len(), cap)?;
    Ok(TeamIter {
        n,
        vars: vars.to_vec(),
        slots,
        masks: MaskCounter {
            next: 0,
            end: 1 << slots,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn relation_counts() {
        assert_eq!(enumerate_relations(2, 1).unwrap().count(), 4);
        assert_eq!(enumerate_relations(2, 2).unwrap().count(), 16);
        assert_eq!(enumerate_relations(3, 2).unwrap().count(), 512);
        assert_eq!(enumerate_relations(3, 0).unwrap().count(), 2);
        let all: HashSet<_> = enumerate_relations(3, 2).unwrap().collect();
        assert_eq!(all.len(), 512);
    }

    #[test]
    fn first_relations_in_order() {
        let rels: Vec<Vec<Vec<usize>>> = enumerate_relations(2, 1)
            .unwrap()
            .map(|r| r.tuples().collect())
            .collect();
        assert_eq!(
            rels,
            vec![vec![], vec![vec![0]], vec![vec![1]], vec![vec![0], vec![1]]]
        );
    }

    #[test]
    fn caps_enforced() {
        assert!(matches!(
            enumerate_relations(3, 3),
            Err(ModelError::ResourceLimit { .. })
        ));
        assert!(enumerate_relations_capped(3, 3, 27).is_ok());
        assert!(matches!(enumerate_relations(0, 1), Err(ModelError::EmptyDomain)));
    }

    #[test]
    fn team_counts() {
        let v = vec!["x".to_string(), "y".to_string()];
        assert_eq!(enumerate_teams(3, &v).unwrap().count(), 512);
        assert_eq!(enumerate_teams(2, &[]).unwrap().count(), 2);
        let dup = vec!["x".to_string(), "x".to_string()];
        assert!(enumerate_teams(2, &dup).is_err());
    }
}
