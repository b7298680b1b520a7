//! Recursive-descent parser for the concrete term syntax.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use super::{Action, Channel, Term, Var};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Whether `omega` prefixes are allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Process,
    Observer,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Int(String),
    Slash,
    Star,
    Dot,
    Plus,
    PPlus,
    Bar,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Tilde,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Lower(s) | Tok::Upper(s) | Tok::Int(s) => format!("`{s}`"),
            Tok::Slash => "`/`".into(),
            Tok::Star => "`*`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Plus => "`+`".into(),
            Tok::PPlus => "`(+)`".into(),
            Tok::Bar => "`|`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = text[i..].chars().next().unwrap_or(' ');
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let single = match c {
            '/' => Some(Tok::Slash),
            '*' => Some(Tok::Star),
            '.' => Some(Tok::Dot),
            '+' => Some(Tok::Plus),
            '|' => Some(Tok::Bar),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            '~' => Some(Tok::Tilde),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((start, tok));
            i += 1;
            continue;
        }
        if c == '(' {
            if text[i..].starts_with("(+)") {
                out.push((start, Tok::PPlus));
                i += 3;
            } else {
                out.push((start, Tok::LParen));
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((start, Tok::Int(text[start..i].to_string())));
            continue;
        }
        if c.is_ascii_alphabetic() {
            while i < bytes.len() && is_ident_char(bytes[i] as char) {
                i += 1;
            }
            let word = text[start..i].to_string();
            if c.is_ascii_uppercase() {
                out.push((start, Tok::Upper(word)));
            } else {
                out.push((start, Tok::Lower(word)));
            }
            continue;
        }
        return Err(Error::Syntax {
            position: start,
            expected: format!("a token, found `{c}`"),
        });
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    mode: Mode,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[idx].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Syntax {
            position: self.offset(),
            expected: format!("{expected}, found {}", self.peek().describe()),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn channel(&mut self, name: &str) -> Result<Channel> {
        let at = self.offset();
        Channel::new(name).map_err(|e| match e {
            Error::Syntax { expected, .. } => Error::Syntax { position: at, expected },
            other => other,
        })
    }

    fn par(&mut self) -> Result<Term> {
        let mut left = self.choice()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let right = self.choice()?;
            left = Term::par(left, right);
        }
        Ok(left)
    }

    fn choice(&mut self) -> Result<Term> {
        if self.at_weight() {
            let mut branches = vec![self.wterm()?];
            while *self.peek() == Tok::PPlus {
                self.bump();
                if !self.at_weight() {
                    return self.fail("a weighted branch `p*tau.T`");
                }
                branches.push(self.wterm()?);
            }
            return Term::psum(branches);
        }
        if self.at_action() {
            let mut summands = vec![self.prefix()?];
            while *self.peek() == Tok::Plus {
                self.bump();
                if !self.at_action() {
                    return self.fail("an action prefix");
                }
                summands.push(self.prefix()?);
            }
            return Term::sum(summands);
        }
        self.unary()
    }

    fn at_weight(&self) -> bool {
        matches!(self.peek(), Tok::Int(_)) && matches!(self.peek_at(1), Tok::Slash | Tok::Star)
    }

    fn at_action(&self) -> bool {
        match self.peek() {
            Tok::Tilde => true,
            Tok::Lower(w) => !(w == "mu" && matches!(self.peek_at(1), Tok::Upper(_)))
                && !(w == "restrict" && *self.peek_at(1) == Tok::LBrace),
            _ => false,
        }
    }

    fn unary(&mut self) -> Result<Term> {
        if self.at_weight() {
            let branch = self.wterm()?;
            return Term::psum(vec![branch]);
        }
        if self.at_action() {
            let (a, t) = self.prefix()?;
            return Ok(Term::prefix(a, t));
        }
        match self.peek().clone() {
            Tok::Int(n) if n == "0" => {
                self.bump();
                Ok(Term::nil())
            }
            Tok::Upper(name) => {
                self.bump();
                Ok(Term::var(Var::new(&name)?))
            }
            Tok::LParen => {
                self.bump();
                let t = self.par()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Lower(w) if w == "mu" => {
                self.bump();
                let var = match self.bump() {
                    Tok::Upper(name) => Var::new(&name)?,
                    _ => unreachable!("at_action excluded this case"),
                };
                self.expect(Tok::Dot, "`.` after the recursion variable")?;
                let body = self.choice()?;
                Ok(Term::fix(var, body))
            }
            Tok::Lower(w) if w == "restrict" => {
                self.bump();
                self.expect(Tok::LBrace, "`{`")?;
                let mut set = BTreeSet::new();
                loop {
                    match self.peek().clone() {
                        Tok::Lower(name) => {
                            set.insert(self.channel(&name)?);
                            self.bump();
                        }
                        _ => return self.fail("a channel name"),
                    }
                    match self.peek() {
                        Tok::Comma => {
                            self.bump();
                        }
                        Tok::RBrace => {
                            self.bump();
                            break;
                        }
                        _ => return self.fail("`,` or `}`"),
                    }
                }
                self.expect(Tok::LParen, "`(` after the restricted set")?;
                let body = self.par()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Term::restrict(set, body))
            }
            _ => self.fail("a term"),
        }
    }

    fn action(&mut self) -> Result<Action> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                match self.peek().clone() {
                    Tok::Lower(name) => {
                        let c = self.channel(&name)?;
                        self.bump();
                        Ok(Action::Output(c))
                    }
                    _ => self.fail("a channel name after `~`"),
                }
            }
            Tok::Lower(w) if w == "tau" => {
                self.bump();
                Ok(Action::Tau)
            }
            Tok::Lower(w) if w == "omega" => {
                if self.mode == Mode::Process {
                    return Err(Error::ReservedName("omega".into()));
                }
                self.bump();
                Ok(Action::Omega)
            }
            Tok::Lower(name) => {
                let c = self.channel(&name)?;
                self.bump();
                Ok(Action::Input(c))
            }
            _ => self.fail("an action"),
        }
    }

    fn continuation(&mut self) -> Result<Term> {
        if *self.peek() == Tok::Dot {
            self.bump();
            self.unary()
        } else {
            Ok(Term::nil())
        }
    }

    fn prefix(&mut self) -> Result<(Action, Term)> {
        let a = self.action()?;
        let t = self.continuation()?;
        Ok((a, t))
    }

    fn wterm(&mut self) -> Result<(Rational, Term)> {
        let num = match self.bump() {
            Tok::Int(n) => n,
            _ => unreachable!("at_weight checked"),
        };
        let mut weight = Rational::from_integer(num.parse::<BigInt>().expect("digits"));
        if *self.peek() == Tok::Slash {
            self.bump();
            let at = self.offset();
            match self.peek().clone() {
                Tok::Int(d) => {
                    self.bump();
                    let den: BigInt = d.parse().expect("digits");
                    if den == BigInt::from(0) {
                        return Err(Error::Syntax {
                            position: at,
                            expected: "a nonzero denominator".into(),
                        });
                    }
                    weight /= Rational::from_integer(den);
                }
                _ => return self.fail("a denominator"),
            }
        }
        self.expect(Tok::Star, "`*`")?;
        match self.peek() {
            Tok::Lower(w) if w == "tau" => {
                self.bump();
            }
            _ => return self.fail("`tau` in a weighted branch"),
        }
        let t = self.continuation()?;
        Ok((weight, t))
    }
}

/// Parses a term; free variables are allowed.
pub fn parse(text: &str, mode: Mode) -> Result<Term> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        mode,
    };
    let t = p.par()?;
    if *p.peek() != Tok::End {
        return p.fail("end of input");
    }
    Ok(t)
}

/// Parses a closed process-mode term.
pub fn parse_process(text: &str) -> Result<Term> {
    let t = parse(text, Mode::Process)?;
    t.ensure_process()?;
    Ok(t)
}
