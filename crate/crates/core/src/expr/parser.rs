//! Recursive-descent parser for the scalar expression grammar.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative through the
//! `unary` operand, so `-x^2 = -(x^2)` and `2^3^2 = 2^9`.

use super::{BinOp, Expression, Func, Node, ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        while let Some(t) = lx.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Option<(Tok, usize)>, ParseError> {
        while matches!(self.peek_byte(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek_byte() else {
            return Ok(None);
        };
        let tok = match b {
            b'0'..=b'9' | b'.' => self.number()?,
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while matches!(self.peek_byte(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(b as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::new(ParseErrorKind::UnexpectedChar(ch), start));
            }
        };
        Ok(Some((tok, start)))
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        let digits = |lx: &mut Self| {
            while matches!(lx.peek_byte(), Some(b'0'..=b'9')) {
                lx.pos += 1;
            }
        };
        digits(self);
        if self.peek_byte() == Some(b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.peek_byte(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek_byte(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek_byte(), Some(b'0'..=b'9')) {
                digits(self);
            } else {
                // not an exponent: `2e` is the literal 2 followed by the identifier `e`
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| ParseError::new(ParseErrorKind::InvalidNumber(text.to_string()), start))
    }
}

pub(super) struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    pub(super) fn parse(text: &str) -> Result<Expression, ParseError> {
        let toks = Lexer::tokens(text)?;
        if toks.is_empty() {
            return Err(ParseError::new(ParseErrorKind::Empty, 0));
        }
        let mut p = Parser { toks, at: 0, end: text.len() };
        let root = p.sum()?;
        if let Some((tok, pos)) = p.toks.get(p.at) {
            let kind = if *tok == Tok::RParen {
                ParseErrorKind::UnbalancedParen
            } else {
                ParseErrorKind::TrailingInput
            };
            return Err(ParseError::new(kind, *pos));
        }
        Ok(Expression::from_node(root))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.bump();
            let rhs = self.product()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.bump();
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let pos = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Node::Num(v)),
            Some(Tok::Ident(name)) => {
                if let Some(Tok::LParen) = self.peek() {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| ParseError::new(ParseErrorKind::UnknownFunction(name.clone()), pos))?;
                    self.bump();
                    let arg = self.sum()?;
                    self.close_paren(pos)?;
                    Ok(Node::Call(func, Box::new(arg)))
                } else if name == "x" {
                    Ok(Node::Var)
                } else if Func::from_name(&name).is_some() {
                    Err(ParseError::new(ParseErrorKind::MissingArgument(name), pos))
                } else {
                    Ok(Node::Param(name))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.sum()?;
                self.close_paren(pos)?;
                Ok(inner)
            }
            Some(Tok::RParen) => Err(ParseError::new(ParseErrorKind::UnbalancedParen, pos)),
            Some(Tok::Op(c)) => Err(ParseError::new(ParseErrorKind::UnexpectedOperator(c), pos)),
            None => Err(ParseError::new(ParseErrorKind::UnexpectedEnd, pos)),
        }
    }

    fn close_paren(&mut self, open_at: usize) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.bump();
                Ok(())
            }
            None => Err(ParseError::new(ParseErrorKind::UnbalancedParen, open_at)),
            Some(_) => Err(ParseError::new(ParseErrorKind::TrailingInput, self.offset())),
        }
    }
}
