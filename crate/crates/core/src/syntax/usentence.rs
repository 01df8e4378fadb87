use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::{free_variables, AtomicFormula, Formula, Literal, Term};

/// A sentence `E x⃗. (η and A y⃗. (!R(y⃗) or θ))` where `η` is a conjunction
/// of literals mentioning `R` only positively and `θ` does not mention `R`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct USentence {
    pub relation: String,
    pub exists: Vec<String>,
    pub eta: Vec<Literal>,
    pub forall: Vec<String>,
    pub theta: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum UShapeError {
    #[error("not of the form E x⃗. (η and A y⃗. (!R(y⃗) or θ)): {0}")]
    Shape(String),
    #[error("`{0}` occurs negatively in η")]
    NegativeRelation(String),
    #[error("`{0}` occurs in θ")]
    RelationInTheta(String),
    #[error("relation `{found}` is outside the signature {{{expected}}}")]
    ForeignRelation { expected: String, found: String },
    #[error("sentence has free variables {0:?}")]
    NotClosed(Vec<String>),
    #[error("variable `{0}` is quantified more than once in the prefix")]
    RepeatedVariable(String),
}

impl USentence {
    pub fn arity(&self) -> usize {
        self.forall.len()
    }

    fn guard(&self) -> Literal {
        Literal::rel(
            false,
            &self.relation,
            self.forall.iter().map(|y| Term::Var(y.clone())).collect(),
        )
    }

    /// The universal block `A y⃗. (!R(y⃗) or θ)`.
    pub fn universal_block(&self) -> Formula {
        Formula::forall_all(
            &self.forall,
            Formula::or(Formula::Lit(self.guard()), self.theta.clone()),
        )
    }

    pub fn to_formula(&self) -> Formula {
        let block = self.universal_block();
        let eta = Formula::conjunction(self.eta.iter().cloned().map(Formula::Lit));
        let body = match eta {
            Some(e) => Formula::and(e, block),
            None => block,
        };
        Formula::exists_all(&self.exists, body)
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.to_formula().constants()
    }
}

impl fmt::Display for USentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

fn eta_literals(f: &Formula, out: &mut Vec<Literal>) -> Result<(), UShapeError> {
    match f {
        Formula::Lit(l) => {
            out.push(l.clone());
            Ok(())
        }
        Formula::And(a, b) => {
            eta_literals(a, out)?;
            eta_literals(b, out)
        }
        other => Err(UShapeError::Shape(format!(
            "η must be a conjunction of literals, found `{other}`"
        ))),
    }
}

/// Recognizes the universal block, returning `(R, y⃗, θ)`.
fn universal_block(f: &Formula) -> Option<(String, Vec<String>, Formula)> {
    let mut ys = Vec::new();
    let mut cur = f;
    while let Formula::Forall(y, body) = cur {
        ys.push(y.clone());
        cur = body;
    }
    let Formula::Or(guard, theta) = cur else {
        return None;
    };
    let Formula::Lit(Literal {
        positive: false,
        atom: AtomicFormula::Rel { name, args },
    }) = guard.as_ref()
    else {
        return None;
    };
    let args_match = args.len() == ys.len()
        && args
            .iter()
            .zip(&ys)
            .all(|(a, y)| a.as_var() == Some(y.as_str()));
    args_match.then(|| (name.clone(), ys, theta.as_ref().clone()))
}

/// Decomposes `sentence` into a [`USentence`], checking every side condition.
pub fn validate_u_sentence(sentence: &Formula) -> Result<USentence, UShapeError> {
    if !sentence.is_first_order() {
        return Err(UShapeError::Shape(
            "dependency atoms and `gor` are not allowed".into(),
        ));
    }
    let free = free_variables(sentence);
    if !free.is_empty() {
        return Err(UShapeError::NotClosed(free.into_iter().collect()));
    }

    let mut exists = Vec::new();
    let mut cur = sentence;
    while let Formula::Exists(x, body) = cur {
        exists.push(x.clone());
        cur = body;
    }

    let (eta_tree, (relation, forall, theta)) = match universal_block(cur) {
        Some(block) => (None, block),
        None => match cur {
            Formula::And(l, r) => match universal_block(r) {
                Some(block) => (Some(l.as_ref()), block),
                None => {
                    return Err(UShapeError::Shape(format!(
                        "expected `A y⃗. (!R(y⃗) or θ)`, found `{r}`"
                    )))
                }
            },
            other => {
                return Err(UShapeError::Shape(format!(
                    "expected `η and A y⃗. (!R(y⃗) or θ)`, found `{other}`"
                )))
            }
        },
    };

    let mut eta = Vec::new();
    if let Some(tree) = eta_tree {
        eta_literals(tree, &mut eta)?;
    }

    let mut seen = BTreeSet::new();
    for v in exists.iter().chain(&forall) {
        if !seen.insert(v) {
            return Err(UShapeError::RepeatedVariable(v.clone()));
        }
    }

    for l in &eta {
        if let Some((name, _)) = l.relation() {
            if name != relation {
                return Err(UShapeError::ForeignRelation {
                    expected: relation.clone(),
                    found: name.to_string(),
                });
            }
            if !l.positive {
                return Err(UShapeError::NegativeRelation(relation.clone()));
            }
        }
    }
    for l in theta.literals() {
        if let Some((name, _)) = l.relation() {
            return Err(if name == relation {
                UShapeError::RelationInTheta(relation.clone())
            } else {
                UShapeError::ForeignRelation {
                    expected: relation.clone(),
                    found: name.to_string(),
                }
            });
        }
    }

    Ok(USentence {
        relation,
        exists,
        eta,
        forall,
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_sentence, ParseContext};

    fn check(s: &str) -> Result<USentence, UShapeError> {
        validate_u_sentence(&parse_sentence(s, &ParseContext::default()).unwrap())
    }

    #[test]
    fn singleton_accepted() {
        let u = check("E x. (R(x) and A y. (!R(y) or y = x))").unwrap();
        assert_eq!(u.exists, vec!["x"]);
        assert_eq!(u.forall, vec!["y"]);
        assert_eq!(u.eta.len(), 1);
        assert_eq!(u.theta.to_string(), "y = x");
        assert_eq!(
            u.to_formula(),
            parse_sentence("E x. (R(x) and A y. (!R(y) or y = x))", &ParseContext::default())
                .unwrap()
        );
    }

    #[test]
    fn negative_in_eta_rejected() {
        assert_eq!(
            check("E x. (!R(x) and A y. (!R(y) or y = x))").unwrap_err(),
            UShapeError::NegativeRelation("R".into())
        );
    }

    #[test]
    fn relation_in_theta_rejected() {
        assert_eq!(
            check("E x. A y. (!R(y) or R(y))").unwrap_err(),
            UShapeError::RelationInTheta("R".into())
        );
    }

    #[test]
    fn other_shapes_rejected() {
        assert!(matches!(
            check("E x. R(x)").unwrap_err(),
            UShapeError::Shape(_)
        ));
        assert!(matches!(
            check("A y. (!R(y) or S(y))").unwrap_err(),
            UShapeError::ForeignRelation { .. }
        ));
        assert!(matches!(
            check("E x. (R(x) or x = x) and A y. (!R(y) or y = y)").unwrap_err(),
            UShapeError::Shape(_)
        ));
        assert!(matches!(
            check("E x. A x. (!R(x) or x = x)").unwrap_err(),
            UShapeError::RepeatedVariable(_)
        ));
        assert!(matches!(
            check("A y. A z. (!R(z, y) or y = z)").unwrap_err(),
            UShapeError::Shape(_)
        ));
    }

    #[test]
    fn constants_and_zero_ary() {
        let u = check("R(a) and A y. (!R(y) or y = a)").unwrap();
        assert!(u.exists.is_empty());
        assert!(u.constants().contains("a"));
        let z = check("R() and (!R() or a = a)").unwrap();
        assert_eq!(z.arity(), 0);
    }
}
