use serde::Serialize;

use super::compile::Kind;
use super::{Evaluator, TeamError};
use crate::model::{Relation, SlotSet, Team};

/// A witness tree: the covers, choice teams and projections that make a
/// formula true (or the part that fails).
#[derive(Clone, Debug, Serialize)]
pub struct Explanation {
    pub rule: &'static str,
    pub formula: String,
    pub team: Team,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub children: Vec<Explanation>,
}

impl Explanation {
    /// Indented text rendering with element labels.
    pub fn render(&self, label: &dyn Fn(usize) -> String) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0, label);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize, label: &dyn Fn(usize) -> String) {
        let pad = "  ".repeat(depth);
        let mark = if self.holds { "⊨" } else { "⊭" };
        out.push_str(&format!(
            "{pad}[{}] X {mark} {}   X = {}\n",
            self.rule,
            self.formula,
            self.team.render(label)
        ));
        if let Some(r) = &self.relation {
            let tuples: Vec<String> = r
                .tuples()
                .map(|t| {
                    let parts: Vec<String> = t.iter().map(|&e| label(e)).collect();
                    format!("({})", parts.join(","))
                })
                .collect();
            out.push_str(&format!("{pad}  X(x⃗) = {{{}}}\n", tuples.join(", ")));
        }
        if let Some(note) = &self.note {
            out.push_str(&format!("{pad}  {note}\n"));
        }
        for c in &self.children {
            c.render_into(out, depth + 1, label);
        }
    }
}

impl Evaluator<'_> {
    /// Evaluates and records a witness for each rule application.
    pub fn explain(&mut self, x: &Team) -> Result<Explanation, TeamError> {
        self.check_team(x)?;
        let root = self.c.root;
        self.explain_node(root, x.members())
    }

    fn team_at(&self, id: usize, slots: &SlotSet) -> Team {
        let f = self.c.frame_of(id);
        Team::from_members(self.c.n, f.vars.clone(), slots.clone())
    }

    fn explain_node(&mut self, id: usize, x: &SlotSet) -> Result<Explanation, TeamError> {
        let holds = self.eval_slots(id, x)?;
        let formula = self.c.nodes[id].formula.to_string();
        let team = self.team_at(id, x);
        let mut e = Explanation {
            rule: "",
            formula,
            team,
            holds,
            relation: None,
            note: None,
            children: Vec::new(),
        };
        match self.c.nodes[id].kind.clone() {
            Kind::Lit(truth) => {
                e.rule = "TS-lit";
                if !holds {
                    let bad = x.difference(&truth);
                    let first = bad.iter().next().expect("some member fails");
                    let single = SlotSet::from_slots(x.universe(), [first]);
                    e.note = Some(format!(
                        "fails at {}",
                        self.team_at(id, &single).to_string().trim_matches(['{', '}'])
                    ));
                }
            }
            Kind::Atom { spec, .. } => {
                e.rule = "TS-atom";
                e.relation = Some(self.atom_relation(id, x));
                e.note = Some(format!("membership in {}", spec.label()));
            }
            Kind::And(a, b) => {
                e.rule = "TS-and";
                let ea = self.explain_node(a, x)?;
                if holds || !ea.holds {
                    e.children.push(ea);
                }
                if holds || e.children.is_empty() {
                    e.children.push(self.explain_node(b, x)?);
                }
            }
            Kind::GlobalOr(a, b) => {
                e.rule = "TS-gor";
                let ea = self.explain_node(a, x)?;
                let left = ea.holds;
                e.children.push(ea);
                if !left {
                    e.children.push(self.explain_node(b, x)?);
                }
            }
            Kind::Or(a, b) => {
                e.rule = "TS-or";
                match self.search_or(a, b, x)? {
                    Some((y, z)) => {
                        e.note = Some("cover X = Y ∪ Z".into());
                        e.children.push(self.explain_node(a, &y)?);
                        e.children.push(self.explain_node(b, &z)?);
                    }
                    None => e.note = Some("no cover Y ∪ Z = X satisfies both disjuncts".into()),
                }
            }
            Kind::Exists { var, child, .. } => {
                e.rule = "TS-exists";
                let found = if holds { self.search_exists(id, x)? } else { None };
                match found {
                    Some(y) => {
                        e.note = Some(format!("choice team X[H/{var}]"));
                        e.children.push(self.explain_node(child, &y)?);
                    }
                    None => e.note = Some(format!("no choice function for {var} works")),
                }
            }
            Kind::Forall { var, child, ext } => {
                e.rule = "TS-forall";
                let slots = self.c.frames[self.c.nodes[child].frame].slots;
                let y = super::extend_all(&ext, slots, x);
                e.note = Some(format!("X[M/{var}]"));
                e.children.push(self.explain_node(child, &y)?);
            }
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use crate::atoms::Registry;
    use crate::model::{Structure, Team};
    use crate::syntax::{parse_formula, ParseContext};
    use crate::teamsem::{EvalOptions, Evaluator};

    #[test]
    fn witness_for_split() {
        let m = Structure::new(2).unwrap();
        let phi = parse_formula("x = y or const(x)", &ParseContext::default()).unwrap();
        let vars = vec!["x".to_string(), "y".to_string()];
        let x = Team::from_rows(2, vars.clone(), [[0, 0], [1, 1], [1, 0]]).unwrap();
        let reg = Registry::new();
        let mut ev = Evaluator::new(&m, &vars, &phi, &reg, EvalOptions::default()).unwrap();
        let e = ev.explain(&x).unwrap();
        assert!(e.holds);
        assert_eq!(e.rule, "TS-or");
        assert_eq!(e.children.len(), 2);
        assert!(e.children.iter().all(|c| c.holds));
        let union = e.children[0].team.union(&e.children[1].team).unwrap();
        assert_eq!(union, x);
        assert!(e.render(&|i| i.to_string()).contains("TS-atom"));
    }
}
