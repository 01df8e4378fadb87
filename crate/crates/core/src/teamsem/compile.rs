//! Formula compilation shared by the evaluators: every node gets a variable
//! frame, literal truth sets, quantifier extension maps and static facts
//! (downwards closure, an upper bound on satisfying teams, forced constants).

use std::collections::BTreeSet;

use smallvec::SmallVec;

use super::TeamError;
use crate::atoms::Registry;
use crate::model::{decode_tuple, slot_count, tuple_index, Elem, ModelError, SlotSet, Structure, MAX_SLOTS};
use crate::syntax::{AtomicFormula, Builtin, DependencySpec, Formula, Literal, Term};
use crate::tarski::TarskiError;

#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub vars: Vec<String>,
    pub slots: usize,
}

pub(crate) type Ext = Vec<SmallVec<[u32; 4]>>;

#[derive(Clone, Debug)]
pub(crate) enum Kind {
    Lit(SlotSet),
    Atom {
        spec: DependencySpec,
        /// Relation index of each frame slot's projection onto the arguments.
        proj: Vec<u32>,
    },
    And(usize, usize),
    Or(usize, usize),
    GlobalOr(usize, usize),
    Exists { var: String, child: usize, ext: Ext },
    Forall { var: String, child: usize, ext: Ext },
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub kind: Kind,
    pub frame: usize,
    pub formula: Formula,
    pub down: bool,
    /// Every satisfying team is a subset of this.
    pub ub: SlotSet,
    /// Variables whose value is constant on every satisfying team.
    pub forces: BTreeSet<String>,
}

#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    pub n: usize,
    pub frames: Vec<Frame>,
    pub nodes: Vec<Node>,
    pub root: usize,
}

impl Compiled {
    pub fn frame_of(&self, node: usize) -> &Frame {
        &self.frames[self.nodes[node].frame]
    }
}

fn frame(n: usize, vars: Vec<String>) -> Result<Frame, TeamError> {
    let slots = slot_count(n, vars.len()).ok_or(ModelError::ResourceLimit {
        n,
        k: vars.len(),
        cap: MAX_SLOTS,
    })?;
    Ok(Frame { vars, slots })
}

struct Builder<'a> {
    m: &'a Structure,
    reg: &'a Registry,
    out: Compiled,
}

pub(crate) fn compile(
    m: &Structure,
    vars: &[String],
    phi: &Formula,
    reg: &Registry,
) -> Result<Compiled, TeamError> {
    let n = m.size();
    let mut b = Builder {
        m,
        reg,
        out: Compiled {
            n,
            frames: vec![frame(n, vars.to_vec())?],
            nodes: Vec::new(),
            root: 0,
        },
    };
    b.out.root = b.node(phi, 0)?;
    Ok(b.out)
}

fn term_value(m: &Structure, frame: &Frame, row: &[Elem], t: &Term) -> Result<Elem, TeamError> {
    match t {
        Term::Var(v) => frame
            .vars
            .iter()
            .position(|x| x == v)
            .map(|p| row[p])
            .ok_or_else(|| TeamError::UnboundVariable(v.clone())),
        Term::Const(c) => m
            .constant(c)
            .ok_or_else(|| TarskiError::UnknownConstant(c.clone()).into()),
    }
}

fn literal_truth(m: &Structure, frame: &Frame, lit: &Literal) -> Result<SlotSet, TeamError> {
    let n = m.size();
    let k = frame.vars.len();
    let mut truth = SlotSet::new(frame.slots);
    let rel = match &lit.atom {
        AtomicFormula::Rel { name, args } => {
            let r = m
                .relation(name)
                .ok_or_else(|| TarskiError::UnknownRelation(name.clone()))?;
            if r.arity() != args.len() {
                return Err(TarskiError::ArityMismatch {
                    name: name.clone(),
                    expected: r.arity(),
                    found: args.len(),
                }
                .into());
            }
            Some(r)
        }
        AtomicFormula::Eq(..) => None,
    };
    for slot in 0..frame.slots {
        let row = decode_tuple(n, k, slot);
        let holds = match &lit.atom {
            AtomicFormula::Rel { args, .. } => {
                let t = args
                    .iter()
                    .map(|a| term_value(m, frame, &row, a))
                    .collect::<Result<Vec<_>, _>>()?;
                rel.expect("checked above").contains(&t)
            }
            AtomicFormula::Eq(a, b) => {
                term_value(m, frame, &row, a)? == term_value(m, frame, &row, b)?
            }
        };
        if holds == lit.positive {
            truth.insert(slot);
        }
    }
    Ok(truth)
}

fn extension_map(n: usize, parent: &Frame, child: &Frame, var: &str) -> Ext {
    let pos = child.vars.iter().position(|v| v == var).expect("bound var in child frame");
    let k = parent.vars.len();
    (0..parent.slots)
        .map(|slot| {
            let mut row = decode_tuple(n, k, slot);
            if row.len() < child.vars.len() {
                row.push(0);
            }
            (0..n)
                .map(|e| {
                    row[pos] = e;
                    tuple_index(n, &row) as u32
                })
                .collect()
        })
        .collect()
}

impl Builder<'_> {
    fn push(&mut self, node: Node) -> usize {
        self.out.nodes.push(node);
        self.out.nodes.len() - 1
    }

    fn child_frame(&mut self, parent: usize, var: &str) -> Result<usize, TeamError> {
        let pf = &self.out.frames[parent];
        if pf.vars.iter().any(|v| v == var) {
            return Ok(parent);
        }
        let mut vars = pf.vars.clone();
        vars.push(var.to_string());
        if let Some(i) = self.out.frames.iter().position(|f| f.vars == vars) {
            return Ok(i);
        }
        self.out.frames.push(frame(self.out.n, vars)?);
        Ok(self.out.frames.len() - 1)
    }

    fn node(&mut self, phi: &Formula, fr: usize) -> Result<usize, TeamError> {
        let n = self.out.n;
        let slots = self.out.frames[fr].slots;
        let (kind, down, ub, forces) = match phi {
            Formula::Lit(l) => {
                let truth = literal_truth(self.m, &self.out.frames[fr], l)?;
                let mut forces = BTreeSet::new();
                if l.positive {
                    if let AtomicFormula::Eq(a, b) = &l.atom {
                        match (a, b) {
                            (Term::Var(v), Term::Const(_)) | (Term::Const(_), Term::Var(v)) => {
                                forces.insert(v.clone());
                            }
                            _ => {}
                        }
                    }
                }
                (Kind::Lit(truth.clone()), true, truth, forces)
            }
            Formula::Atom(a) => {
                let spec = self.reg.resolve(a)?;
                let f = &self.out.frames[fr];
                let positions = a
                    .vars()
                    .iter()
                    .map(|v| {
                        f.vars
                            .iter()
                            .position(|x| x == v)
                            .ok_or_else(|| TeamError::UnboundVariable(v.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let k = f.vars.len();
                let proj = (0..f.slots)
                    .map(|slot| {
                        let row = decode_tuple(n, k, slot);
                        let t: Vec<Elem> = positions.iter().map(|&p| row[p]).collect();
                        tuple_index(n, &t) as u32
                    })
                    .collect();
                let mut forces = BTreeSet::new();
                match spec.builtin() {
                    Some(Builtin::Const) => forces.extend(a.vars()),
                    Some(Builtin::Dep) if a.groups[0].is_empty() => {
                        forces.extend(a.groups[1].iter().cloned())
                    }
                    _ => {}
                }
                let down = spec.flags.downwards.is_yes();
                (Kind::Atom { spec, proj }, down, SlotSet::full(slots), forces)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::GlobalOr(a, b) => {
                let ia = self.node(a, fr)?;
                let ib = self.node(b, fr)?;
                let (na, nb) = (&self.out.nodes[ia], &self.out.nodes[ib]);
                let down = na.down && nb.down;
                match phi {
                    Formula::And(..) => (
                        Kind::And(ia, ib),
                        down,
                        na.ub.intersection(&nb.ub),
                        na.forces.union(&nb.forces).cloned().collect(),
                    ),
                    Formula::Or(..) => (
                        Kind::Or(ia, ib),
                        down,
                        na.ub.union(&nb.ub),
                        BTreeSet::new(),
                    ),
                    _ => (
                        Kind::GlobalOr(ia, ib),
                        down,
                        na.ub.union(&nb.ub),
                        na.forces.intersection(&nb.forces).cloned().collect(),
                    ),
                }
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let cf = self.child_frame(fr, v)?;
                let child = self.node(body, cf)?;
                let ext = extension_map(n, &self.out.frames[fr], &self.out.frames[cf], v);
                let c = &self.out.nodes[child];
                let existential = matches!(phi, Formula::Exists(..));
                let mut ub = SlotSet::new(slots);
                for (s, e) in ext.iter().enumerate() {
                    let hit = |&y: &u32| c.ub.contains(y as usize);
                    let keep = if existential {
                        e.iter().any(hit)
                    } else {
                        e.iter().all(hit)
                    };
                    if keep {
                        ub.insert(s);
                    }
                }
                let mut forces = c.forces.clone();
                forces.remove(v);
                let down = c.down;
                let kind = if existential {
                    Kind::Exists {
                        var: v.clone(),
                        child,
                        ext,
                    }
                } else {
                    Kind::Forall {
                        var: v.clone(),
                        child,
                        ext,
                    }
                };
                (kind, down, ub, forces)
            }
        };
        Ok(self.push(Node {
            kind,
            frame: fr,
            formula: phi.clone(),
            down,
            ub,
            forces,
        }))
    }
}
