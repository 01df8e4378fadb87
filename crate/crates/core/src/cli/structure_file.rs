//! Line-oriented structure files and command-line team literals.
//!
//! ```text
//! # comments run to end of line
//! domain 3                 # elements 0 1 2, or: domain a b c
//! rel R/2 = (0,1) (1,2)
//! const a = 0
//! pred P = 0 1
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{Elem, ModelError, Relation, Structure, Team};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FileError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FileError {
    FileError {
        line,
        message: message.into(),
    }
}

fn element(m: &Structure, tok: &str, line: usize) -> Result<Elem, FileError> {
    m.element(tok)
        .ok_or_else(|| err(line, format!("unknown element `{tok}`")))
}

fn tuples(m: &Structure, text: &str, arity: usize, line: usize) -> Result<Vec<Vec<Elem>>, FileError> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let row: Vec<&str> = if let Some(inner) = rest.strip_prefix('(') {
            let close = inner
                .find(')')
                .ok_or_else(|| err(line, "unclosed `(`"))?;
            rest = inner[close + 1..].trim_start();
            inner[..close]
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect()
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let tok = &rest[..end];
            rest = rest[end..].trim_start();
            vec![tok]
        };
        if row.len() != arity {
            return Err(err(
                line,
                format!("tuple of length {} for arity {arity}", row.len()),
            ));
        }
        out.push(
            row.into_iter()
                .map(|t| element(m, t, line))
                .collect::<Result<_, _>>()?,
        );
    }
    Ok(out)
}

pub fn parse_structure(text: &str) -> Result<Structure, FileError> {
    let mut m: Option<Structure> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (kw, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        let model_err = |e: ModelError| err(line, e.to_string());
        if kw == "domain" {
            if m.is_some() {
                return Err(err(line, "domain declared twice"));
            }
            let toks: Vec<&str> = rest.split_whitespace().collect();
            m = Some(match toks.as_slice() {
                [n] if n.parse::<usize>().is_ok() => {
                    Structure::new(n.parse().expect("checked")).map_err(model_err)?
                }
                [] => return Err(err(line, "empty domain")),
                labels => Structure::with_labels(labels.iter().map(|s| s.to_string()).collect())
                    .map_err(model_err)?,
            });
            continue;
        }
        let m = m
            .as_mut()
            .ok_or_else(|| err(line, "`domain` must come first"))?;
        let (lhs, rhs) = rest
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `=` after `{kw}`")))?;
        let lhs = lhs.trim();
        match kw {
            "rel" => {
                let (name, arity) = lhs
                    .split_once('/')
                    .ok_or_else(|| err(line, "expected NAME/ARITY"))?;
                let arity: usize = arity
                    .trim()
                    .parse()
                    .map_err(|_| err(line, format!("bad arity `{arity}`")))?;
                let ts = tuples(m, rhs, arity, line)?;
                let rel = Relation::from_tuples(m.size(), arity, ts).map_err(model_err)?;
                m.add_relation(name.trim(), rel).map_err(model_err)?;
            }
            "const" => {
                let e = element(m, rhs.trim(), line)?;
                m.set_constant(lhs, e).map_err(model_err)?;
            }
            "pred" => {
                let elems = rhs
                    .split_whitespace()
                    .map(|t| element(m, t, line))
                    .collect::<Result<Vec<_>, _>>()?;
                m.set_predicate(lhs, elems).map_err(model_err)?;
            }
            other => return Err(err(line, format!("unknown declaration `{other}`"))),
        }
    }
    m.ok_or_else(|| err(0, "missing `domain` line"))
}

/// Renders a structure in the file format.
pub fn render_structure(m: &Structure) -> String {
    let mut out = match m.labels() {
        Some(l) => format!("domain {}\n", l.join(" ")),
        None => format!("domain {}\n", m.size()),
    };
    let pred = m.predicate().map(|(p, _)| p.to_string());
    for (name, r) in m.relations() {
        let elems = |t: &[Elem]| t.iter().map(|&e| m.label(e)).collect::<Vec<_>>();
        if Some(name) == pred.as_ref() {
            let es: Vec<String> = r.tuples().map(|t| m.label(t[0])).collect();
            out.push_str(&format!("pred {name} = {}\n", es.join(" ")));
            continue;
        }
        let ts: Vec<String> = r
            .tuples()
            .map(|t| format!("({})", elems(&t).join(",")))
            .collect();
        out.push_str(&format!("rel {name}/{} = {}\n", r.arity(), ts.join(" ")));
    }
    for (c, &e) in m.constants() {
        out.push_str(&format!("const {c} = {}\n", m.label(e)));
    }
    out
}

/// Parses `x=0,y=1; x=1,y=1`. Every assignment must use the same variables;
/// the first fixes their order. A blank literal is the empty team over
/// `default_vars`.
pub fn parse_team(m: &Structure, text: &str, default_vars: &[String]) -> Result<Team, FileError> {
    let rows: Vec<&str> = text
        .split(';')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .collect();
    if rows.is_empty() {
        return Team::empty(m.size(), default_vars.to_vec()).map_err(|e| err(0, e.to_string()));
    }
    let mut vars: Option<Vec<String>> = None;
    let mut parsed = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut a = BTreeMap::new();
        let mut order = Vec::new();
        for pair in row.split(',') {
            let (v, val) = pair
                .split_once('=')
                .ok_or_else(|| err(i + 1, format!("expected var=value, found `{}`", pair.trim())))?;
            let v = v.trim().to_string();
            let e = element(m, val.trim(), i + 1)?;
            if a.insert(v.clone(), e).is_some() {
                return Err(err(i + 1, format!("`{v}` assigned twice")));
            }
            order.push(v);
        }
        match &vars {
            None => vars = Some(order),
            Some(vs) => {
                let mut sorted = vs.clone();
                sorted.sort();
                if sorted != a.keys().cloned().collect::<Vec<_>>() {
                    return Err(err(i + 1, "assignments use different variables"));
                }
            }
        }
        parsed.push(a);
    }
    let vars = vars.expect("nonempty");
    let rows = parsed
        .iter()
        .map(|a| vars.iter().map(|v| a[v]).collect::<Vec<Elem>>());
    Team::from_rows(m.size(), vars.clone(), rows).map_err(|e| err(0, e.to_string()))
}

/// Inverse of [`parse_team`] for non-empty teams.
pub fn render_team(m: &Structure, x: &Team) -> String {
    x.rows()
        .map(|row| {
            x.vars()
                .iter()
                .zip(row)
                .map(|(v, e)| format!("{v}={}", m.label(e)))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# sample\ndomain 3\nrel R/2 = (0,1) (1,2)\nconst a = 0\npred P = 0 1\n";

    #[test]
    fn parse_and_render() {
        let m = parse_structure(SAMPLE).unwrap();
        assert_eq!(m.size(), 3);
        assert!(m.relation("R").unwrap().contains(&[1, 2]));
        assert_eq!(m.constant("a"), Some(0));
        assert_eq!(m.predicate().unwrap().1.len(), 2);
        assert_eq!(parse_structure(&render_structure(&m)).unwrap(), m);
    }

    #[test]
    fn labels() {
        let m = parse_structure("domain a b\nrel E/2 = (a,b)\npred Q = b\n").unwrap();
        assert!(m.relation("E").unwrap().contains(&[0, 1]));
        let x = parse_team(&m, "x=a, y=b; x=b, y=b", &[]).unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!(render_team(&m, &x), "x=a,y=b; x=b,y=b");
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_structure("domain 2\nrel R/2 = (0,5)\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_structure("rel R/1 = 0\n").is_err());
        assert!(parse_structure("domain 2\nrel R/2 = (0)\n").is_err());
        let m = parse_structure("domain 2\n").unwrap();
        assert!(parse_team(&m, "x=0; y=1", &[]).is_err());
        let empty = parse_team(&m, "  ", &["x".to_string()]).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.vars(), ["x".to_string()]);
    }
}
