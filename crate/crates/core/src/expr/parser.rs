//! Recursive-descent parser for the expression grammar documented in the
//! module header. Error positions are 1-based character columns.

use super::HolomorphicExpr;
use std::fmt;
use thiserror::Error;

/// What went wrong while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownIdentifier(String),
    NonIntegerExponent,
}

/// Parse failure with the offending 1-based column.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl ParseError {
    fn syntax(column: usize, message: impl Into<String>) -> Self {
        ParseError {
            kind: ParseErrorKind::Syntax,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num { value: f64, imaginary: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    chars: Vec<(usize, char)>, // (1-based column, char)
    pos: usize,
    src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().enumerate().map(|(i, c)| (i + 1, c)).collect(),
            pos: 0,
            src,
        }
    }

    fn peek(&self) -> Option<(usize, char)> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn end_column(&self) -> usize {
        self.src.chars().count() + 1
    }

    fn tokens(mut self) -> Result<Vec<(Token, usize)>, ParseError> {
        let mut out = Vec::new();
        while let Some((col, c)) = self.peek() {
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    self.bump();
                }
                '+' => {
                    self.bump();
                    out.push((Token::Plus, col));
                }
                '-' => {
                    self.bump();
                    out.push((Token::Minus, col));
                }
                '*' => {
                    self.bump();
                    out.push((Token::Star, col));
                }
                '/' => {
                    self.bump();
                    out.push((Token::Slash, col));
                }
                '^' => {
                    self.bump();
                    out.push((Token::Caret, col));
                }
                '(' => {
                    self.bump();
                    out.push((Token::LParen, col));
                }
                ')' => {
                    self.bump();
                    out.push((Token::RParen, col));
                }
                '0'..='9' => out.push((self.number(col)?, col)),
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut ident = String::new();
                    while let Some((_, c)) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            ident.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    out.push((Token::Ident(ident), col));
                }
                c => {
                    return Err(ParseError::syntax(col, format!("unexpected character '{c}'")));
                }
            }
        }
        Ok(out)
    }

    fn number(&mut self, start_col: usize) -> Result<Token, ParseError> {
        let mut text = String::new();
        while let Some((_, c)) = self.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if self.peek().map(|(_, c)| c) == Some('.') {
            text.push('.');
            self.bump();
            let mut saw_digit = false;
            while let Some((_, c)) = self.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    self.bump();
                    saw_digit = true;
                } else {
                    break;
                }
            }
            if !saw_digit {
                return Err(ParseError::syntax(
                    start_col,
                    "digits required after decimal point",
                ));
            }
        }
        // Exponent part only when it cannot be the start of an identifier
        // such as `exp`.
        if matches!(self.peek().map(|(_, c)| c), Some('e') | Some('E')) {
            let next = self.peek_at(1);
            let next2 = self.peek_at(2);
            let exponent_follows = match next {
                Some(d) if d.is_ascii_digit() => true,
                Some('+') | Some('-') => matches!(next2, Some(d) if d.is_ascii_digit()),
                _ => false,
            };
            if exponent_follows {
                let (_, e) = self.bump().unwrap();
                text.push(e);
                if let Some((_, sign @ ('+' | '-'))) = self.peek() {
                    text.push(sign);
                    self.bump();
                }
                while let Some((_, c)) = self.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
        }
        let value: f64 = text
            .parse()
            .map_err(|_| ParseError::syntax(start_col, format!("invalid number '{text}'")))?;
        // An `i` suffix marks an imaginary literal unless it begins an
        // identifier (`3int` lexes as `3` `int`).
        let imaginary = if self.peek().map(|(_, c)| c) == Some('i') {
            let after = self.peek_at(1);
            let is_suffix = !matches!(after, Some(c) if c.is_ascii_alphanumeric() || c == '_');
            if is_suffix {
                self.bump();
                true
            } else {
                false
            }
        } else {
            false
        };
        Ok(Token::Num { value, imaginary })
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end_column: usize,
}

/// Parse an expression string into a [`HolomorphicExpr`].
///
/// The same tree printed with `Display` parses back to a structurally equal
/// tree.
pub fn parse_expr(source: &str) -> Result<HolomorphicExpr, ParseError> {
    let lexer = Lexer::new(source);
    let end_column = lexer.end_column();
    let tokens = lexer.tokens()?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end_column,
    };
    let expr = parser.expr()?;
    if let Some((tok, col)) = parser.peek_with_col() {
        return Err(ParseError::syntax(
            col,
            format!("unexpected trailing {}", describe(&tok)),
        ));
    }
    Ok(expr)
}

fn describe(tok: &Token) -> String {
    match tok {
        Token::Num { value, imaginary } => {
            if *imaginary {
                format!("number '{value}i'")
            } else {
                format!("number '{value}'")
            }
        }
        Token::Ident(name) => format!("identifier '{name}'"),
        Token::Plus => "'+'".into(),
        Token::Minus => "'-'".into(),
        Token::Star => "'*'".into(),
        Token::Slash => "'/'".into(),
        Token::Caret => "'^'".into(),
        Token::LParen => "'('".into(),
        Token::RParen => "')'".into(),
    }
}

const FUNCTIONS: &[&str] = &["exp", "sin", "cos", "sinh", "cosh"];

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn peek_with_col(&self) -> Option<(Token, usize)> {
        self.tokens.get(self.pos).cloned()
    }

    fn current_column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|&(_, col)| col)
            .unwrap_or(self.end_column)
    }

    fn bump(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.eat(&Token::RParen) {
            Ok(())
        } else {
            Err(ParseError::syntax(self.current_column(), "expected ')'"))
        }
    }

    fn expr(&mut self) -> Result<HolomorphicExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Token::Plus) {
                let rhs = self.term()?;
                lhs = HolomorphicExpr::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&Token::Minus) {
                let rhs = self.term()?;
                lhs = HolomorphicExpr::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<HolomorphicExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&Token::Star) {
                let rhs = self.unary()?;
                lhs = HolomorphicExpr::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&Token::Slash) {
                let rhs = self.unary()?;
                lhs = HolomorphicExpr::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<HolomorphicExpr, ParseError> {
        if self.eat(&Token::Minus) {
            let inner = self.unary()?;
            Ok(match inner {
                HolomorphicExpr::Const(c) => HolomorphicExpr::Const(-c),
                inner => HolomorphicExpr::Mul(
                    Box::new(HolomorphicExpr::constant(-1.0, 0.0)),
                    Box::new(inner),
                ),
            })
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<HolomorphicExpr, ParseError> {
        let base = self.atom()?;
        if !self.eat(&Token::Caret) {
            return Ok(base);
        }
        let n = self.exponent()?;
        if self.peek() == Some(&Token::Caret) {
            return Err(ParseError::syntax(
                self.current_column(),
                "chained '^' needs parentheses",
            ));
        }
        Ok(HolomorphicExpr::Pow(Box::new(base), n))
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let parenthesized = self.eat(&Token::LParen);
        let negative = self.eat(&Token::Minus);
        let col = self.current_column();
        let n = match self.bump() {
            Some((Token::Num { value, imaginary }, _)) => {
                if imaginary || value.fract() != 0.0 || value.abs() > f64::from(i32::MAX) {
                    return Err(ParseError {
                        kind: ParseErrorKind::NonIntegerExponent,
                        column: col,
                        message: "exponent must be an integer literal".into(),
                    });
                }
                value as i32
            }
            _ => {
                return Err(ParseError {
                    kind: ParseErrorKind::NonIntegerExponent,
                    column: col,
                    message: "exponent must be an integer literal".into(),
                });
            }
        };
        if parenthesized {
            self.expect_rparen()?;
        }
        Ok(if negative { -n } else { n })
    }

    fn atom(&mut self) -> Result<HolomorphicExpr, ParseError> {
        let col = self.current_column();
        match self.bump() {
            Some((Token::Num { value, imaginary }, _)) => Ok(if imaginary {
                HolomorphicExpr::constant(0.0, value)
            } else {
                HolomorphicExpr::constant(value, 0.0)
            }),
            Some((Token::Ident(name), _)) => match name.as_str() {
                "z" => Ok(HolomorphicExpr::Z),
                "i" => Ok(HolomorphicExpr::constant(0.0, 1.0)),
                name if FUNCTIONS.contains(&name) => {
                    if !self.eat(&Token::LParen) {
                        return Err(ParseError::syntax(
                            self.current_column(),
                            format!("expected '(' after '{name}'"),
                        ));
                    }
                    let arg = Box::new(self.expr()?);
                    self.expect_rparen()?;
                    Ok(match name {
                        "exp" => HolomorphicExpr::Exp(arg),
                        "sin" => HolomorphicExpr::Sin(arg),
                        "cos" => HolomorphicExpr::Cos(arg),
                        "sinh" => HolomorphicExpr::Sinh(arg),
                        "cosh" => HolomorphicExpr::Cosh(arg),
                        _ => unreachable!(),
                    })
                }
                other => Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(other.to_string()),
                    column: col,
                    message: format!("unknown identifier '{other}'"),
                }),
            },
            Some((Token::LParen, _)) => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some((tok, col)) => Err(ParseError::syntax(
                col,
                format!("expected an operand, found {}", describe(&tok)),
            )),
            None => Err(ParseError::syntax(
                self.end_column,
                "unexpected end of expression",
            )),
        }
    }
}
