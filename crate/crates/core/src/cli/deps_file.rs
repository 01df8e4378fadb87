use super::structure_file::FileError;
use crate::atoms::Registry;

/// Reads `dep NAME ARITY := SENTENCE` lines into a registry.
pub fn parse_deps(text: &str) -> Result<Registry, FileError> {
    let mut reg = Registry::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |m: String| FileError { line, message: m };
        let rest = body
            .strip_prefix("dep ")
            .ok_or_else(|| err("expected `dep NAME ARITY := SENTENCE`".into()))?;
        let (head, sentence) = rest
            .split_once(":=")
            .ok_or_else(|| err("missing `:=`".into()))?;
        let mut parts = head.split_whitespace();
        let (Some(name), Some(arity), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err("expected NAME ARITY before `:=`".into()));
        };
        let arity: usize = arity
            .parse()
            .map_err(|_| err(format!("bad arity `{arity}`")))?;
        reg.register_text(name, arity, sentence.trim())
            .map_err(|e| err(e.to_string()))?;
    }
    Ok(reg)
}
