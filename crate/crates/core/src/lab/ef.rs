use std::collections::HashMap;

use super::LabError;
use crate::model::{Elem, Relation, Structure};

struct Game<'a> {
    rels: Vec<(&'a Relation, &'a Relation)>,
    n1: usize,
    n2: usize,
    memo: HashMap<(Vec<(Elem, Elem)>, usize), bool>,
}

impl Game<'_> {
    /// Whether the pebbles stay a partial isomorphism after pairing the last
    /// one; only tuples touching the last pebble are checked.
    fn extends(&self, pairs: &[(Elem, Elem)]) -> bool {
        let last = pairs.len() - 1;
        let (a, b) = pairs[last];
        if pairs[..last].iter().any(|&(x, y)| (x == a) != (y == b)) {
            return false;
        }
        self.rels.iter().all(|(r1, r2)| {
            let k = r1.arity();
            if k == 0 {
                return true;
            }
            let p = pairs.len();
            let mut idx = vec![0usize; k];
            loop {
                if idx.contains(&last) {
                    let t1: Vec<Elem> = idx.iter().map(|&i| pairs[i].0).collect();
                    let t2: Vec<Elem> = idx.iter().map(|&i| pairs[i].1).collect();
                    if r1.contains(&t1) != r2.contains(&t2) {
                        return false;
                    }
                }
                let mut j = 0;
                while j < k {
                    idx[j] += 1;
                    if idx[j] < p {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == k {
                    return true;
                }
            }
        })
    }

    fn duplicator_wins(&mut self, pairs: &mut Vec<(Elem, Elem)>, rounds: usize) -> bool {
        if rounds == 0 {
            return true;
        }
        let key = (pairs.clone(), rounds);
        if let Some(&w) = self.memo.get(&key) {
            return w;
        }
        let mut wins = true;
        'spoiler: for left in [true, false] {
            let (mine, theirs) = if left { (self.n1, self.n2) } else { (self.n2, self.n1) };
            for a in 0..mine {
                let mut answered = false;
                for b in 0..theirs {
                    pairs.push(if left { (a, b) } else { (b, a) });
                    let ok = self.extends(pairs) && self.duplicator_wins(pairs, rounds - 1);
                    pairs.pop();
                    if ok {
                        answered = true;
                        break;
                    }
                }
                if !answered {
                    wins = false;
                    break 'spoiler;
                }
            }
        }
        self.memo.insert(key, wins);
        wins
    }
}

/// Whether the two structures satisfy the same first-order sentences of
/// quantifier rank at most `k`, decided by the Ehrenfeucht-Fraïssé game with
/// constants placed as initial pebbles.
pub fn ef_equiv(m1: &Structure, m2: &Structure, k: usize) -> Result<bool, LabError> {
    let same_rels = m1.relations().len() == m2.relations().len()
        && m1
            .relations()
            .iter()
            .all(|(name, r)| m2.relation(name).is_some_and(|s| s.arity() == r.arity()));
    let same_consts = m1.constants().len() == m2.constants().len()
        && m1.constants().keys().all(|c| m2.constant(c).is_some());
    if !same_rels || !same_consts {
        return Err(LabError::SignatureMismatch);
    }
    let rels: Vec<(&Relation, &Relation)> = m1
        .relations()
        .iter()
        .map(|(name, r)| (r, m2.relation(name).expect("checked")))
        .collect();
    if rels
        .iter()
        .any(|(r1, r2)| r1.arity() == 0 && r1.is_empty() != r2.is_empty())
    {
        return Ok(false);
    }
    let mut game = Game {
        rels,
        n1: m1.size(),
        n2: m2.size(),
        memo: HashMap::new(),
    };
    let mut pairs = Vec::new();
    for (c, &a) in m1.constants() {
        pairs.push((a, m2.constant(c).expect("checked")));
        if !game.extends(&pairs) {
            return Ok(false);
        }
    }
    Ok(game.duplicator_wins(&mut pairs, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unary(n: usize, elems: &[Elem]) -> Structure {
        Structure::new(n)
            .unwrap()
            .with_relation("P", Relation::from_tuples(n, 1, elems.iter().map(|&e| [e])).unwrap())
            .unwrap()
    }

    #[test]
    fn pure_sets() {
        let s = |n| Structure::new(n).unwrap();
        assert!(ef_equiv(&s(2), &s(3), 2).unwrap());
        assert!(!ef_equiv(&s(2), &s(3), 3).unwrap());
        assert!(ef_equiv(&s(4), &s(5), 4).unwrap());
        assert!(ef_equiv(&s(1), &s(2), 0).unwrap());
    }

    #[test]
    fn unary_predicate() {
        assert!(ef_equiv(&unary(3, &[0]), &unary(4, &[1]), 2).unwrap());
        assert!(!ef_equiv(&unary(3, &[0]), &unary(3, &[0, 1]), 2).unwrap());
        assert!(ef_equiv(&unary(3, &[0]), &unary(3, &[0, 1]), 1).unwrap());
    }

    #[test]
    fn constants_and_signature() {
        let mut a = unary(2, &[0]);
        let mut b = unary(2, &[0]);
        a.set_constant("c", 0).unwrap();
        b.set_constant("c", 1).unwrap();
        assert!(!ef_equiv(&a, &b, 0).unwrap());
        assert!(matches!(
            ef_equiv(&a, &unary(2, &[0]), 1),
            Err(LabError::SignatureMismatch)
        ));
    }

    #[test]
    fn linear_orders() {
        let order = |n: usize| {
            let t: Vec<[Elem; 2]> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| [i, j]))
                .collect();
            Structure::new(n)
                .unwrap()
                .with_relation("<", Relation::from_tuples(n, 2, t).unwrap())
                .unwrap()
        };
        assert!(ef_equiv(&order(3), &order(4), 2).unwrap());
        assert!(!ef_equiv(&order(3), &order(4), 3).unwrap());
    }
}
