//! Recursive-descent parser for the ASCII formula grammar.
//!
//! Precedence, tightest first: `! X F G`, `&`, `|`, `U` and `R` (right-assoc),
//! `->` (right-assoc), `<->`. Implication and equivalence are desugared on
//! the spot.

use super::formula::{Alphabet, Formula, Ltl};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    Next,
    Finally,
    Globally,
    And,
    Or,
    Until,
    Release,
    Implies,
    Iff,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`!`".into(),
            Tok::Next => "`X`".into(),
            Tok::Finally => "`F`".into(),
            Tok::Globally => "`G`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Until => "`U`".into(),
            Tok::Release => "`R`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn is_temporal_run(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| matches!(c, 'X' | 'F' | 'G'))
}

/// Tokenizes `text`. An identifier made only of `X`, `F`, `G` that is not a
/// declared atom (for example `GF`) is read as a run of unary operators.
fn lex(text: &str, atoms: Option<&Alphabet>) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'!' => out.push((start, Tok::Not)),
            b'&' => out.push((start, Tok::And)),
            b'|' => out.push((start, Tok::Or)),
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((start, Tok::Implies));
                i += 1;
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                out.push((start, Tok::Iff));
                i += 2;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                match word {
                    "true" => out.push((start, Tok::True)),
                    "false" => out.push((start, Tok::False)),
                    "U" => out.push((start, Tok::Until)),
                    "R" => out.push((start, Tok::Release)),
                    w if is_temporal_run(w) && atoms.is_none_or(|a| a.index_of(w).is_none()) => {
                        for (k, ch) in w.chars().enumerate() {
                            let t = match ch {
                                'X' => Tok::Next,
                                'F' => Tok::Finally,
                                _ => Tok::Globally,
                            };
                            out.push((start + k, t));
                        }
                    }
                    w => out.push((start, Tok::Ident(w.to_string()))),
                }
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    position: start,
                    expected: "a formula token".into(),
                    found: format!("character `{}`", text[start..].chars().next().unwrap()),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> Error {
        Error::Syntax {
            position: self.offset(),
            expected: expected.into(),
            found: self
                .peek()
                .map_or_else(|| "end of input".to_string(), Tok::describe),
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.implies()?;
            let both = lhs.clone().and(rhs.clone());
            let neither = lhs.not().and(rhs.not());
            lhs = both.or(neither);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.until()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            return Ok(lhs.not().or(rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.eat(&Tok::Until) {
            let rhs = self.until()?;
            return Ok(lhs.until(rhs));
        }
        if self.eat(&Tok::Release) {
            let rhs = self.until()?;
            return Ok(lhs.release(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        let op = match self.peek() {
            Some(Tok::Not) => Formula::not as fn(Formula) -> Formula,
            Some(Tok::Next) => Formula::next,
            Some(Tok::Finally) => Formula::eventually,
            Some(Tok::Globally) => Formula::always,
            _ => return self.primary(),
        };
        self.pos += 1;
        Ok(op(self.unary()?))
    }

    fn primary(&mut self) -> Result<Formula> {
        let expected = "an atom, constant, unary operator or `(`";
        match self.peek().cloned() {
            Some(Tok::True) => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Tok::False) => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Tok::Ident(name)) => {
                let i = self
                    .alphabet
                    .index_of(&name)
                    .ok_or_else(|| Error::UnknownAtom(name.clone()))?;
                self.pos += 1;
                Ok(Formula::Atom(i))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.error("`)`"));
                }
                Ok(inner)
            }
            _ => Err(self.error(expected)),
        }
    }
}

/// Parses `text` against a declared alphabet.
pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Ltl> {
    let toks = lex(text, Some(alphabet))?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        alphabet,
    };
    let root = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(p.error("an operator or end of input"));
    }
    Ok(Ltl::new(alphabet.clone(), root))
}

/// Parses `text`, taking the alphabet to be its identifiers in order of first
/// appearance.
pub fn parse_inferring_alphabet(text: &str) -> Result<Ltl> {
    let mut names: Vec<String> = Vec::new();
    for (_, t) in lex(text, None)? {
        if let Tok::Ident(n) = t {
            if !names.contains(&n) {
                names.push(n);
            }
        }
    }
    parse(text, &Alphabet::new(names)?)
}
