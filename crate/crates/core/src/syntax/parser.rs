//! Recursive-descent parser for the formula grammar.
//!
//! Precedence from loosest to tightest: `gor`, `or`, `and`, then unary forms.
//! A quantifier `E x.` / `A x.` takes everything to its right as its body.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{Builtin, DepAtom, Formula, Literal, Term};

/// Names and arities the parser needs to know about.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    /// User dependencies usable as `D[name](...)`, with their arities.
    pub deps: BTreeMap<String, usize>,
    /// Identifiers read as constant symbols when not bound by a quantifier.
    pub constants: BTreeSet<String>,
    /// Fixed relation arities; relations not listed are inferred per formula.
    pub relations: BTreeMap<String, usize>,
    /// Accept identifiers starting with `_` (internal fresh names).
    pub allow_reserved: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    Unexpected { found: String, expected: String },
    NotNnf,
    ArityMismatch { name: String, expected: usize, found: usize },
    GroupCount { name: String, expected: usize, found: usize },
    UnknownDependency(String),
    ReservedIdentifier(String),
    AtomArgumentNotVariable(String),
    TupleLengthMismatch(usize, usize),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::Unexpected { found, expected } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::NotNnf => write!(
                f,
                "negation not in NNF: `!` may only precede a relation application"
            ),
            ParseErrorKind::ArityMismatch {
                name,
                expected,
                found,
            } => write!(
                f,
                "arity mismatch for `{name}`: expected {expected}, found {found}"
            ),
            ParseErrorKind::GroupCount {
                name,
                expected,
                found,
            } => write!(
                f,
                "atom `{name}` takes {expected} argument group(s), found {found}"
            ),
            ParseErrorKind::UnknownDependency(n) => write!(f, "unknown dependency `{n}`"),
            ParseErrorKind::ReservedIdentifier(n) => {
                write!(f, "identifier `{n}` is reserved (leading underscore)")
            }
            ParseErrorKind::AtomArgumentNotVariable(n) => {
                write!(f, "atom argument `{n}` is not a variable")
            }
            ParseErrorKind::TupleLengthMismatch(a, b) => {
                write!(f, "tuple equality between lengths {a} and {b}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    Eq,
    Neq,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Neq => f.write_str("`!=`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let ch = chars.next();
            if ch == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            ch
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !is_ident_continue(d) {
                    break;
                }
                s.push(d);
                bump(&mut chars);
            }
            Tok::Ident(s)
        } else {
            bump(&mut chars);
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '.' => Tok::Dot,
                '=' => Tok::Eq,
                '!' => {
                    if chars.peek() == Some(&'=') {
                        bump(&mut chars);
                        Tok::Neq
                    } else {
                        Tok::Bang
                    }
                }
                other => {
                    return Err(ParseError {
                        line: l,
                        column: col,
                        kind: ParseErrorKind::UnexpectedChar(other),
                    })
                }
            }
        };
        out.push(Spanned {
            tok,
            line: l,
            column: col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

const KEYWORDS: [&str; 3] = ["and", "or", "gor"];

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    ctx: &'a ParseContext,
    sentence: bool,
    bound: Vec<String>,
    arities: BTreeMap<String, usize>,
}

/// Parses an open formula. Identifiers listed in `ctx.constants` denote
/// constants unless bound; everything else is a variable.
pub fn parse_formula(text: &str, ctx: &ParseContext) -> Result<Formula, ParseError> {
    Parser::new(text, ctx, false)?.run()
}

/// Parses a sentence: identifiers not bound by a quantifier are constants.
pub fn parse_sentence(text: &str, ctx: &ParseContext) -> Result<Formula, ParseError> {
    Parser::new(text, ctx, true)?.run()
}

impl<'a> Parser<'a> {
    fn new(text: &str, ctx: &'a ParseContext, sentence: bool) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            ctx,
            sentence,
            bound: Vec::new(),
            arities: ctx.relations.clone(),
        })
    }

    fn run(mut self) -> Result<Formula, ParseError> {
        let f = self.formula()?;
        self.expect(Tok::Eof, "end of input")?;
        Ok(f)
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        self.error_at(self.pos, kind)
    }

    fn error_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[pos];
        ParseError {
            line: s.line,
            column: s.column,
            kind,
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_here(ParseErrorKind::Unexpected {
            found: self.peek().to_string(),
            expected: expected.to_string(),
        })
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn identifier(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                if s.starts_with('_') && !self.ctx.allow_reserved {
                    return Err(self.error_here(ParseErrorKind::ReservedIdentifier(s)));
                }
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.disjunction()?;
        while self.is_keyword("gor") {
            self.advance();
            let right = self.disjunction()?;
            left = Formula::gor(left, right);
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.conjunction()?;
        while self.is_keyword("or") {
            self.advance();
            let right = self.conjunction()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        while self.is_keyword("and") {
            self.advance();
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(q) if (q == "E" || q == "A") && matches!(self.peek_at(1), Tok::Ident(_)) => {
                self.advance();
                let v = self.identifier("a variable")?;
                self.expect(Tok::Dot, "`.` after the quantified variable")?;
                self.bound.push(v.clone());
                let body = self.formula();
                self.bound.pop();
                let body = body?;
                Ok(if q == "E" {
                    Formula::exists(&v, body)
                } else {
                    Formula::forall(&v, body)
                })
            }
            Tok::LParen => {
                if self.at_tuple() {
                    return self.tuple_equality();
                }
                self.advance();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Bang => {
                let bang = self.pos;
                self.advance();
                match (self.peek().clone(), self.peek_at(1)) {
                    (Tok::Ident(name), Tok::LParen)
                        if Builtin::from_keyword(&name).is_none() && !KEYWORDS.contains(&name.as_str()) =>
                    {
                        let lit = self.relation_application(false)?;
                        Ok(Formula::Lit(lit))
                    }
                    _ => Err(self.error_at(bang, ParseErrorKind::NotNnf)),
                }
            }
            Tok::Ident(name) => match self.peek_at(1) {
                Tok::LParen => {
                    if let Some(b) = Builtin::from_keyword(&name) {
                        self.builtin_atom(b)
                    } else {
                        Ok(Formula::Lit(self.relation_application(true)?))
                    }
                }
                Tok::LBracket if name == "D" => self.user_atom(),
                _ => self.equality(),
            },
            _ => Err(self.unexpected("a formula")),
        }
    }

    /// `(` ident (`,` | `)`) starts a tuple rather than a grouped formula.
    fn at_tuple(&self) -> bool {
        matches!(self.peek_at(1), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
            && matches!(self.peek_at(2), Tok::Comma | Tok::RParen)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let name = self.identifier("a term")?;
        Ok(self.resolve(name))
    }

    fn resolve(&self, name: String) -> Term {
        let bound = self.bound.contains(&name);
        if bound {
            Term::Var(name)
        } else if self.sentence || self.ctx.constants.contains(&name) {
            Term::Const(name)
        } else {
            Term::Var(name)
        }
    }

    fn equality(&mut self) -> Result<Formula, ParseError> {
        let a = self.term()?;
        let positive = match self.peek() {
            Tok::Eq => true,
            Tok::Neq => false,
            _ => return Err(self.unexpected("`=` or `!=`")),
        };
        self.advance();
        let b = self.term()?;
        Ok(Formula::Lit(Literal::eq(positive, a, b)))
    }

    fn term_tuple(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if *self.peek() == Tok::RParen {
            self.advance();
            return Ok(out);
        }
        loop {
            out.push(self.term()?);
            match self.advance() {
                Tok::Comma => continue,
                Tok::RParen => return Ok(out),
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("`,` or `)`"));
                }
            }
        }
    }

    fn tuple_equality(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos;
        let left = self.term_tuple()?;
        let positive = match self.peek() {
            Tok::Eq => true,
            Tok::Neq => false,
            _ => return Err(self.unexpected("`=` or `!=` after a tuple")),
        };
        self.advance();
        let right = self.term_tuple()?;
        if left.len() != right.len() || left.is_empty() {
            return Err(self.error_at(
                start,
                ParseErrorKind::TupleLengthMismatch(left.len(), right.len()),
            ));
        }
        let parts = left
            .into_iter()
            .zip(right)
            .map(|(a, b)| Formula::Lit(Literal::eq(positive, a, b)));
        Ok(if positive {
            Formula::conjunction(parts)
        } else {
            Formula::disjunction(parts)
        }
        .expect("nonempty tuple"))
    }

    fn relation_application(&mut self, positive: bool) -> Result<Literal, ParseError> {
        let start = self.pos;
        let name = self.identifier("a relation symbol")?;
        let args = self.term_tuple()?;
        match self.arities.get(&name) {
            Some(&k) if k != args.len() => {
                return Err(self.error_at(
                    start,
                    ParseErrorKind::ArityMismatch {
                        name,
                        expected: k,
                        found: args.len(),
                    },
                ))
            }
            Some(_) => {}
            None => {
                self.arities.insert(name.clone(), args.len());
            }
        }
        Ok(Literal::rel(positive, &name, args))
    }

    fn variable_group(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            let at = self.pos;
            let name = self.identifier("a variable")?;
            if let Term::Const(c) = self.resolve(name.clone()) {
                return Err(self.error_at(at, ParseErrorKind::AtomArgumentNotVariable(c)));
            }
            out.push(name);
            if *self.peek() == Tok::Comma {
                self.advance();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn atom_groups(&mut self) -> Result<Vec<Vec<String>>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut groups = vec![self.variable_group()?];
        while *self.peek() == Tok::Semi {
            self.advance();
            groups.push(self.variable_group()?);
        }
        self.expect(Tok::RParen, "`,`, `;` or `)`")?;
        Ok(groups)
    }

    fn builtin_atom(&mut self, b: Builtin) -> Result<Formula, ParseError> {
        let start = self.pos;
        self.advance();
        let groups = self.atom_groups()?;
        if groups.len() != b.group_count() {
            return Err(self.error_at(
                start,
                ParseErrorKind::GroupCount {
                    name: b.keyword().to_string(),
                    expected: b.group_count(),
                    found: groups.len(),
                },
            ));
        }
        if b.needs_equal_groups() && groups[0].len() != groups[1].len() {
            return Err(self.error_at(
                start,
                ParseErrorKind::ArityMismatch {
                    name: b.keyword().to_string(),
                    expected: groups[0].len(),
                    found: groups[1].len(),
                },
            ));
        }
        Ok(Formula::Atom(DepAtom::new(b.keyword(), groups)))
    }

    fn user_atom(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos;
        self.advance();
        self.expect(Tok::LBracket, "`[`")?;
        let name = self.identifier("a dependency name")?;
        self.expect(Tok::RBracket, "`]`")?;
        let expected = *self
            .ctx
            .deps
            .get(&name)
            .ok_or_else(|| self.error_at(start, ParseErrorKind::UnknownDependency(name.clone())))?;
        let groups = self.atom_groups()?;
        if groups.len() != 1 {
            return Err(self.error_at(
                start,
                ParseErrorKind::GroupCount {
                    name,
                    expected: 1,
                    found: groups.len(),
                },
            ));
        }
        if groups[0].len() != expected {
            return Err(self.error_at(
                start,
                ParseErrorKind::ArityMismatch {
                    name,
                    expected,
                    found: groups[0].len(),
                },
            ));
        }
        Ok(Formula::Atom(DepAtom::new(&name, groups)))
    }
}
