//! LTL formulas and their evaluation on ultimately periodic words.
//!
//! Concrete syntax: `true`, `false`, propositions (`[A-Za-z_][A-Za-z0-9_]*`
//! other than the reserved `X F G U`), `!`, `X`, `F`, `G`, `U`, `&`, `|` and
//! parentheses. Unary operators bind tightest, then `U` (right associative),
//! then `&`, then `|`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

pub type Letter = BTreeSet<String>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ltl {
    True,
    False,
    Atom(String),
    Not(Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Finally(Box<Ltl>),
    Globally(Box<Ltl>),
}

impl Ltl {
    pub fn atom(name: &str) -> Ltl {
        Ltl::Atom(name.to_string())
    }
    pub fn not(f: Ltl) -> Ltl {
        Ltl::Not(Box::new(f))
    }
    pub fn or(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Or(Box::new(a), Box::new(b))
    }
    pub fn and(a: Ltl, b: Ltl) -> Ltl {
        Ltl::And(Box::new(a), Box::new(b))
    }
    pub fn next(f: Ltl) -> Ltl {
        Ltl::Next(Box::new(f))
    }
    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Until(Box::new(a), Box::new(b))
    }
    pub fn finally(f: Ltl) -> Ltl {
        Ltl::Finally(Box::new(f))
    }
    pub fn globally(f: Ltl) -> Ltl {
        Ltl::Globally(Box::new(f))
    }

    /// Rewrites derived operators into the core grammar
    /// `{true, atom, not, or, next, until}`:
    /// `false = !true`, `a & b = !(!a | !b)`, `F a = true U a`, `G a = !F !a`.
    pub fn desugar(&self) -> Ltl {
        match self {
            Ltl::True => Ltl::True,
            Ltl::False => Ltl::not(Ltl::True),
            Ltl::Atom(a) => Ltl::Atom(a.clone()),
            Ltl::Not(f) => Ltl::not(f.desugar()),
            Ltl::Or(a, b) => Ltl::or(a.desugar(), b.desugar()),
            Ltl::And(a, b) => Ltl::not(Ltl::or(Ltl::not(a.desugar()), Ltl::not(b.desugar()))),
            Ltl::Next(f) => Ltl::next(f.desugar()),
            Ltl::Until(a, b) => Ltl::until(a.desugar(), b.desugar()),
            Ltl::Finally(f) => Ltl::until(Ltl::True, f.desugar()),
            Ltl::Globally(f) => Ltl::not(Ltl::until(Ltl::True, Ltl::not(f.desugar()))),
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Atom(a) => {
                out.insert(a.clone());
            }
            Ltl::Not(f) | Ltl::Next(f) | Ltl::Finally(f) | Ltl::Globally(f) => f.collect_atoms(out),
            Ltl::Or(a, b) | Ltl::And(a, b) | Ltl::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Truth value on the word `prefix · cycle^ω`.
    pub fn eval_on_lasso(&self, prefix: &[Letter], cycle: &[Letter]) -> Result<bool> {
        if cycle.is_empty() {
            return Err(Error::InvalidParameter("lasso cycle must be non-empty".into()));
        }
        let word: Vec<&Letter> = prefix.iter().chain(cycle).collect();
        let lasso = Lasso { word, loop_start: prefix.len() };
        Ok(lasso.eval(&self.desugar())[0])
    }
}

struct Lasso<'a> {
    word: Vec<&'a Letter>,
    loop_start: usize,
}

impl Lasso<'_> {
    fn succ(&self, i: usize) -> usize {
        if i + 1 < self.word.len() {
            i + 1
        } else {
            self.loop_start
        }
    }

    /// Truth value at every position of the (finite) lasso. Only the core
    /// grammar is handled; derived operators are desugared beforehand.
    fn eval(&self, f: &Ltl) -> Vec<bool> {
        let n = self.word.len();
        match f {
            Ltl::True => vec![true; n],
            Ltl::Atom(a) => self.word.iter().map(|l| l.contains(a)).collect(),
            Ltl::Not(g) => self.eval(g).into_iter().map(|b| !b).collect(),
            Ltl::Or(a, b) => self.eval(a).into_iter().zip(self.eval(b)).map(|(x, y)| x || y).collect(),
            Ltl::Next(g) => {
                let v = self.eval(g);
                (0..n).map(|i| v[self.succ(i)]).collect()
            }
            Ltl::Until(a, b) => {
                let va = self.eval(a);
                let vb = self.eval(b);
                // least fixpoint of  x = b | (a & X x)
                let mut x = vb.clone();
                loop {
                    let mut changed = false;
                    for i in (0..n).rev() {
                        let nx = vb[i] || (va[i] && x[self.succ(i)]);
                        if nx != x[i] {
                            x[i] = nx;
                            changed = true;
                        }
                    }
                    if !changed {
                        return x;
                    }
                }
            }
            other => self.eval(&other.desugar()),
        }
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ltl::True => write!(f, "true"),
            Ltl::False => write!(f, "false"),
            Ltl::Atom(a) => write!(f, "{a}"),
            Ltl::Not(g) => write!(f, "!({g})"),
            Ltl::Or(a, b) => write!(f, "({a} | {b})"),
            Ltl::And(a, b) => write!(f, "({a} & {b})"),
            Ltl::Next(g) => write!(f, "X ({g})"),
            Ltl::Until(a, b) => write!(f, "({a} U {b})"),
            Ltl::Finally(g) => write!(f, "F ({g})"),
            Ltl::Globally(g) => write!(f, "G ({g})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Next,
    Until,
    Finally,
    Globally,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((pos, Token::LParen));
                i += 1;
            }
            ')' => {
                out.push((pos, Token::RParen));
                i += 1;
            }
            '!' | '~' => {
                out.push((pos, Token::Not));
                i += 1;
            }
            '&' | '|' => {
                out.push((pos, if c == '&' { Token::And } else { Token::Or }));
                i += 1;
                if i < chars.len() && chars[i].1 == c {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|(_, c)| c).collect();
                let tok = match word.as_str() {
                    "true" => Token::True,
                    "false" => Token::False,
                    "X" => Token::Next,
                    "F" => Token::Finally,
                    "G" => Token::Globally,
                    "U" => Token::Until,
                    _ => Token::Ident(word),
                };
                out.push((pos, tok));
            }
            other => return Err(Error::Syntax { position: pos, message: format!("unexpected character `{other}`") }),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    declared: Option<&'a [String]>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { position: self.position(), message: message.into() })
    }

    fn or(&mut self) -> Result<Ltl> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            lhs = Ltl::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Ltl> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            lhs = Ltl::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Ltl> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Token::Until) {
            self.pos += 1;
            return Ok(Ltl::until(lhs, self.until()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ltl> {
        let Some(tok) = self.peek().cloned() else {
            return self.error("unexpected end of formula");
        };
        match tok {
            Token::Not | Token::Next | Token::Finally | Token::Globally => {
                self.pos += 1;
                let inner = self.unary()?;
                Ok(match tok {
                    Token::Not => Ltl::not(inner),
                    Token::Next => Ltl::next(inner),
                    Token::Finally => Ltl::finally(inner),
                    _ => Ltl::globally(inner),
                })
            }
            Token::True => {
                self.pos += 1;
                Ok(Ltl::True)
            }
            Token::False => {
                self.pos += 1;
                Ok(Ltl::False)
            }
            Token::Ident(name) => {
                if let Some(ap) = self.declared {
                    if !ap.iter().any(|a| *a == name) {
                        return Err(Error::UnknownProposition(name));
                    }
                }
                self.pos += 1;
                Ok(Ltl::Atom(name))
            }
            Token::LParen => {
                self.pos += 1;
                let inner = self.or()?;
                if self.peek() != Some(&Token::RParen) {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            other => self.error(format!("unexpected token {other:?}")),
        }
    }
}

/// Parses a formula. When `declared` is given, every proposition must be in it.
pub fn parse_ltl(text: &str, declared: Option<&[String]>) -> Result<Ltl> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0, end: text.len(), declared };
    let f = p.or()?;
    if p.pos != p.tokens.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letter(props: &[&str]) -> Letter {
        props.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_gridworld_objective() {
        let f = parse_ltl("G F s & G F g", None).unwrap();
        let expected = Ltl::and(Ltl::globally(Ltl::finally(Ltl::atom("s"))), Ltl::globally(Ltl::finally(Ltl::atom("g"))));
        assert_eq!(f, expected);
    }

    #[test]
    fn parses_safety() {
        assert_eq!(parse_ltl("G s0", None).unwrap(), Ltl::globally(Ltl::atom("s0")));
    }

    #[test]
    fn until_is_right_associative() {
        let f = parse_ltl("a U b U c", None).unwrap();
        assert_eq!(f, Ltl::until(Ltl::atom("a"), Ltl::until(Ltl::atom("b"), Ltl::atom("c"))));
    }

    #[test]
    fn precedence_unary_until_and_or() {
        let f = parse_ltl("!a U b & c | d", None).unwrap();
        let expected = Ltl::or(
            Ltl::and(Ltl::until(Ltl::not(Ltl::atom("a")), Ltl::atom("b")), Ltl::atom("c")),
            Ltl::atom("d"),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_ltl("a & (b | ", None) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 9),
            other => panic!("{other:?}"),
        }
        match parse_ltl("a # b", None) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn undeclared_proposition_is_flagged() {
        let ap = vec!["a".to_string()];
        assert!(matches!(parse_ltl("a U b", Some(&ap)), Err(Error::UnknownProposition(p)) if p == "b"));
    }

    #[test]
    fn safety_on_lassos() {
        let f = parse_ltl("G s0", None).unwrap();
        assert!(f.eval_on_lasso(&[], &[letter(&["s0"])]).unwrap());
        assert!(!f.eval_on_lasso(&[letter(&["s0"])], &[letter(&[])]).unwrap());
    }

    #[test]
    fn recurrence_on_lassos() {
        let f = parse_ltl("G F s & G F g", None).unwrap();
        assert!(f.eval_on_lasso(&[letter(&[])], &[letter(&["s"]), letter(&[]), letter(&["g"])]).unwrap());
        assert!(!f.eval_on_lasso(&[letter(&["g"])], &[letter(&["s"])]).unwrap());
    }

    #[test]
    fn next_and_until_on_finite_prefix() {
        let f = parse_ltl("X a", None).unwrap();
        assert!(f.eval_on_lasso(&[letter(&[]), letter(&["a"])], &[letter(&[])]).unwrap());
        let u = parse_ltl("a U b", None).unwrap();
        assert!(u.eval_on_lasso(&[letter(&["a"]), letter(&["a"])], &[letter(&["b"])]).unwrap());
        assert!(!u.eval_on_lasso(&[letter(&["a"]), letter(&[])], &[letter(&["b"])]).unwrap());
        // a forever without b: until is not satisfied
        assert!(!u.eval_on_lasso(&[], &[letter(&["a"])]).unwrap());
    }

    #[test]
    fn empty_cycle_rejected() {
        assert!(Ltl::True.eval_on_lasso(&[], &[]).is_err());
    }
}
