//! Team semantics (lax readings) for first-order logic with dependency atoms
//! and global disjunction.
//!
//! [`Evaluator`] searches covers and choice functions top-down with a memo
//! table keyed by node and team. The optional pruning only uses facts that
//! are exact: downwards closure of a subformula, an upper bound on its
//! satisfying teams, and variables it forces to be constant.
//! [`satisfying_teams`] computes the full family of satisfying teams bottom-up.

mod compile;
mod explain;
mod family;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::atoms::{Registry, RegistryError};
use crate::model::{ModelError, Relation, SlotSet, Structure, Team};
use crate::syntax::{free_variables, Formula};
use crate::tarski::{dep_membership, eval_tarski, TarskiError};

use compile::{compile, Compiled, Kind};
pub use explain::Explanation;
pub use family::{satisfying_teams, TeamFamily, FAMILY_SLOT_CAP};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TeamError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tarski(#[from] TarskiError),
    #[error("variable `{0}` is not in the team's domain")]
    UnboundVariable(String),
    #[error("team over a domain of size {team} evaluated in a structure of size {structure}")]
    DomainMismatch { team: usize, structure: usize },
    #[error("search budget of {0} candidate teams exhausted")]
    ResourceLimit(u64),
    #[error("formula is not first order: {0}")]
    NotFirstOrder(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    /// Use the closure-aware search rules.
    pub pruning: bool,
    /// Upper bound on candidate covers and choice functions examined.
    pub max_steps: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            pruning: true,
            max_steps: 50_000_000,
        }
    }
}

impl EvalOptions {
    pub fn naive() -> Self {
        EvalOptions {
            pruning: false,
            ..EvalOptions::default()
        }
    }
}

/// An evaluation session for one structure, formula and team domain. The memo
/// table persists across calls to [`Evaluator::eval`].
pub struct Evaluator<'a> {
    m: &'a Structure,
    c: Compiled,
    opts: EvalOptions,
    memo: HashMap<(u32, SlotSet), bool>,
    membership: HashMap<(u32, SlotSet), bool>,
    steps: u64,
}

/// Free variables of `phi` missing from `vars` are appended, which is only
/// meaningful for the empty team.
fn frame_vars(vars: &[String], phi: &Formula) -> Vec<String> {
    let mut out = vars.to_vec();
    for v in free_variables(phi) {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

impl<'a> Evaluator<'a> {
    pub fn new(
        m: &'a Structure,
        vars: &[String],
        phi: &Formula,
        reg: &Registry,
        opts: EvalOptions,
    ) -> Result<Self, TeamError> {
        if let Some(v) = free_variables(phi).into_iter().find(|v| !vars.contains(v)) {
            return Err(TeamError::UnboundVariable(v));
        }
        Ok(Evaluator {
            m,
            c: compile(m, vars, phi, reg)?,
            opts,
            memo: HashMap::new(),
            membership: HashMap::new(),
            steps: 0,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.c.frames[0].vars
    }

    fn check_team(&self, x: &Team) -> Result<(), TeamError> {
        if x.domain_size() != self.m.size() {
            return Err(TeamError::DomainMismatch {
                team: x.domain_size(),
                structure: self.m.size(),
            });
        }
        if x.vars() != self.vars() {
            let missing = self
                .vars()
                .iter()
                .find(|v| !x.vars().contains(v))
                .or_else(|| x.vars().iter().find(|v| !self.vars().contains(v)))
                .cloned()
                .unwrap_or_default();
            return Err(TeamError::UnboundVariable(missing));
        }
        Ok(())
    }

    /// `M ⊨_X φ`.
    pub fn eval(&mut self, x: &Team) -> Result<bool, TeamError> {
        self.check_team(x)?;
        let root = self.c.root;
        self.node(root, x.members())
    }

    pub(crate) fn eval_slots(&mut self, node: usize, x: &SlotSet) -> Result<bool, TeamError> {
        self.node(node, x)
    }

    fn tick(&mut self) -> Result<(), TeamError> {
        self.steps += 1;
        if self.steps > self.opts.max_steps {
            Err(TeamError::ResourceLimit(self.opts.max_steps))
        } else {
            Ok(())
        }
    }

    fn node(&mut self, id: usize, x: &SlotSet) -> Result<bool, TeamError> {
        let key = (id as u32, x.clone());
        if let Some(&r) = self.memo.get(&key) {
            return Ok(r);
        }
        let r = self.compute(id, x)?;
        self.memo.insert(key, r);
        Ok(r)
    }

    fn compute(&mut self, id: usize, x: &SlotSet) -> Result<bool, TeamError> {
        let node = &self.c.nodes[id];
        if self.opts.pruning && !x.is_subset(&node.ub) {
            return Ok(false);
        }
        match &node.kind {
            Kind::Lit(truth) => Ok(x.is_subset(truth)),
            Kind::Atom { .. } => self.atom(id, x),
            &Kind::And(a, b) => Ok(self.node(a, x)? && self.node(b, x)?),
            &Kind::GlobalOr(a, b) => Ok(self.node(a, x)? || self.node(b, x)?),
            &Kind::Or(a, b) => Ok(self.search_or(a, b, x)?.is_some()),
            Kind::Forall { child, ext, .. } => {
                let child = *child;
                let y = extend_all(ext, self.c.frames[self.c.nodes[child].frame].slots, x);
                self.node(child, &y)
            }
            Kind::Exists { .. } => Ok(self.search_exists(id, x)?.is_some()),
        }
    }

    /// The projected relation `X(x⃗)` at an atom node.
    pub(crate) fn atom_relation(&self, id: usize, x: &SlotSet) -> Relation {
        let Kind::Atom { spec, proj } = &self.c.nodes[id].kind else {
            unreachable!("atom node");
        };
        let n = self.c.n;
        let mut bits = Relation::empty(n, spec.arity())
            .expect("projection fits")
            .bits()
            .clone();
        for s in x.iter() {
            bits.insert(proj[s] as usize);
        }
        Relation::from_bits(n, spec.arity(), bits)
    }

    fn atom(&mut self, id: usize, x: &SlotSet) -> Result<bool, TeamError> {
        let rel = self.atom_relation(id, x);
        let key = (id as u32, rel.bits().clone());
        if let Some(&r) = self.membership.get(&key) {
            return Ok(r);
        }
        let Kind::Atom { spec, .. } = &self.c.nodes[id].kind else {
            unreachable!()
        };
        let r = dep_membership(spec, &rel)?;
        self.membership.insert(key, r);
        Ok(r)
    }

    /// Finds `Y, Z` with `Y ∪ Z = X`, `M ⊨_Y a` and `M ⊨_Z b`.
    pub(crate) fn search_or(
        &mut self,
        a: usize,
        b: usize,
        x: &SlotSet,
    ) -> Result<Option<(SlotSet, SlotSet)>, TeamError> {
        let members: Vec<usize> = x.iter().collect();
        let universe = x.universe();
        if !self.opts.pruning {
            return self.search_or_naive(a, b, x, &members);
        }
        let (ua, ub) = (self.c.nodes[a].ub.clone(), self.c.nodes[b].ub.clone());
        if !x.is_subset(&ua.union(&ub)) {
            return Ok(None);
        }
        let (down_a, down_b) = (self.c.nodes[a].down, self.c.nodes[b].down);
        if down_a || down_b {
            // With the shrinkable side downwards closed, it may take exactly
            // the complement of the other side's part.
            let (free_side, closed_side, free_ub, closed_ub) = if down_b {
                (a, b, &ua, &ub)
            } else {
                (b, a, &ub, &ua)
            };
            let forced = x.difference(closed_ub);
            let optional: Vec<usize> = x.intersection(free_ub).difference(&forced).iter().collect();
            for bits in 0u64..(1u64 << optional.len().min(63)) {
                self.tick()?;
                let mut part = forced.clone();
                for (i, &s) in optional.iter().enumerate() {
                    if bits >> i & 1 == 1 {
                        part.insert(s);
                    }
                }
                let rest = x.difference(&part);
                if self.node(free_side, &part)? && self.node(closed_side, &rest)? {
                    return Ok(Some(if down_b { (part, rest) } else { (rest, part) }));
                }
            }
            return Ok(None);
        }
        // Each member goes left, right, or both, within the upper bounds.
        let mut only_a = SlotSet::new(universe);
        let mut only_b = SlotSet::new(universe);
        let mut both = Vec::new();
        for &s in &members {
            match (ua.contains(s), ub.contains(s)) {
                (true, true) => both.push(s),
                (true, false) => only_a.insert(s),
                (false, true) => only_b.insert(s),
                (false, false) => return Ok(None),
            }
        }
        self.ternary(a, b, &only_a, &only_b, &both)
    }

    fn search_or_naive(
        &mut self,
        a: usize,
        b: usize,
        x: &SlotSet,
        members: &[usize],
    ) -> Result<Option<(SlotSet, SlotSet)>, TeamError> {
        let empty = SlotSet::new(x.universe());
        self.ternary(a, b, &empty, &empty, members)
    }

    fn ternary(
        &mut self,
        a: usize,
        b: usize,
        base_a: &SlotSet,
        base_b: &SlotSet,
        free: &[usize],
    ) -> Result<Option<(SlotSet, SlotSet)>, TeamError> {
        let mut digits = vec![0u8; free.len()];
        loop {
            self.tick()?;
            let mut y = base_a.clone();
            let mut z = base_b.clone();
            for (&s, &d) in free.iter().zip(&digits) {
                if d != 1 {
                    y.insert(s);
                }
                if d != 0 {
                    z.insert(s);
                }
            }
            if self.node(a, &y)? && self.node(b, &z)? {
                return Ok(Some((y, z)));
            }
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return Ok(None);
                }
                digits[i] += 1;
                if digits[i] < 3 {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    /// Finds `Y = X[H/v]` with `M ⊨_Y ψ`.
    pub(crate) fn search_exists(
        &mut self,
        id: usize,
        x: &SlotSet,
    ) -> Result<Option<SlotSet>, TeamError> {
        let Kind::Exists { var, child, ext } = &self.c.nodes[id].kind else {
            unreachable!("exists node");
        };
        let child = *child;
        let child_node = &self.c.nodes[child];
        let child_slots = self.c.frames[child_node.frame].slots;
        let forced = child_node.forces.contains(var);
        let child_down = child_node.down;
        let child_ub = child_node.ub.clone();
        // Members with identical extension sets are chosen for jointly.
        let mut classes: Vec<Vec<u32>> = x.iter().map(|s| ext[s].to_vec()).collect();
        classes.sort();
        classes.dedup();

        if x.is_empty() {
            let y = SlotSet::new(child_slots);
            return Ok(self.node(child, &y)?.then_some(y));
        }

        let pruning = self.opts.pruning;
        if pruning && forced {
            let n = self.c.n;
            let candidates: Vec<SlotSet> = (0..n)
                .filter_map(|e| {
                    let slots: Vec<usize> = classes.iter().map(|c| c[e] as usize).collect();
                    slots
                        .iter()
                        .all(|&y| child_ub.contains(y))
                        .then(|| SlotSet::from_slots(child_slots, slots))
                })
                .collect();
            for y in candidates {
                self.tick()?;
                if self.node(child, &y)? {
                    return Ok(Some(y));
                }
            }
            return Ok(None);
        }

        let singletons = pruning && child_down;
        let mut options: Vec<Vec<SmallSet>> = Vec::with_capacity(classes.len());
        for class in &classes {
            let allowed: Vec<u32> = if pruning {
                class
                    .iter()
                    .copied()
                    .filter(|&y| child_ub.contains(y as usize))
                    .collect()
            } else {
                class.to_vec()
            };
            if allowed.is_empty() {
                return Ok(None);
            }
            let opts: Vec<SmallSet> = if singletons {
                allowed.iter().map(|&y| vec![y]).collect()
            } else {
                (1u64..(1u64 << allowed.len()))
                    .map(|bits| {
                        allowed
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| bits >> i & 1 == 1)
                            .map(|(_, &y)| y)
                            .collect()
                    })
                    .collect()
            };
            options.push(opts);
        }

        let mut idx = vec![0usize; options.len()];
        loop {
            self.tick()?;
            let mut y = SlotSet::new(child_slots);
            for (o, &i) in options.iter().zip(&idx) {
                for &s in &o[i] {
                    y.insert(s as usize);
                }
            }
            if self.node(child, &y)? {
                return Ok(Some(y));
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(None);
                }
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

type SmallSet = Vec<u32>;

fn extend_all(ext: &compile::Ext, child_slots: usize, x: &SlotSet) -> SlotSet {
    let mut y = SlotSet::new(child_slots);
    for s in x.iter() {
        for &c in &ext[s] {
            y.insert(c as usize);
        }
    }
    y
}

/// `M ⊨_X φ`, with pruning. `X`'s domain must contain the free variables of
/// `φ`, unless `X` is empty.
pub fn eval_team(m: &Structure, x: &Team, phi: &Formula, reg: &Registry) -> Result<bool, TeamError> {
    eval_team_with(m, x, phi, reg, EvalOptions::default())
}

pub fn eval_team_with(
    m: &Structure,
    x: &Team,
    phi: &Formula,
    reg: &Registry,
    opts: EvalOptions,
) -> Result<bool, TeamError> {
    let x = widen_empty(x, phi)?;
    Evaluator::new(m, x.vars(), phi, reg, opts)?.eval(&x)
}

fn widen_empty(x: &Team, phi: &Formula) -> Result<Team, TeamError> {
    let vars = frame_vars(x.vars(), phi);
    if vars.len() == x.vars().len() {
        return Ok(x.clone());
    }
    if !x.is_empty() {
        let missing = vars[x.vars().len()].clone();
        return Err(TeamError::UnboundVariable(missing));
    }
    Ok(Team::empty(x.domain_size(), vars)?)
}

/// Whether team truth of the first-order `phi` on `X` coincides with truth
/// under every member assignment.
pub fn check_flatness(m: &Structure, x: &Team, phi: &Formula) -> Result<bool, TeamError> {
    if !phi.is_first_order() {
        return Err(TeamError::NotFirstOrder(phi.to_string()));
    }
    let team_truth = eval_team(m, x, phi, &Registry::new())?;
    let mut pointwise = true;
    for s in x.assignments() {
        if !eval_tarski(m, &s, phi)? {
            pointwise = false;
            break;
        }
    }
    Ok(team_truth == pointwise)
}

/// The variables `phi` needs in a team domain, in sorted order.
pub fn required_vars(phi: &Formula) -> Vec<String> {
    free_variables(phi).into_iter().collect::<BTreeSet<_>>().into_iter().collect()
}
