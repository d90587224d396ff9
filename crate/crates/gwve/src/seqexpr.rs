//! Closed-form sequences in the generation index `n`.
//!
//! Environment families take per-generation parameters like `δ_n = n^{-a}` or
//! `λ_n = exp(-sqrt(n))/exp(-sqrt(n-1))`.  Those formulas are written in a
//! deliberately small expression language and evaluated on demand:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | power
//! power  := atom ("^" factor)?
//! atom   := NUMBER | "n" | FUNC "(" expr ("," expr)* ")" | "(" expr ")"
//! FUNC   := "sqrt" | "exp" | "log" | "pow"
//! ```
//!
//! Precedence is `^` > unary `-` > `*` `/` > `+` `-`; binary `+ - * /` are
//! left-associative and `^` is right-associative (`2^3^2 = 2^512`, and
//! `-2^2 = -(2^2) = -4`).  `log` is the natural logarithm and `pow(x, y)` is
//! the function form of `x^y`.  There are no user-defined names: the only
//! variable is `n`, the generation index.
//!
//! Evaluation is plain IEEE binary64 and *total on its declared domain*:
//! anything outside it — `log` of a nonpositive value, division by zero, a
//! negative base under a fractional exponent, or a result that leaves the
//! finite range — is reported as an [`EvalError`], never returned as a silent
//! `NaN` or infinity.
//!
//! ```
//! use gwve::seqexpr::SeqExpr;
//! let delta = SeqExpr::parse("1/n^0.5").unwrap();
//! assert!((delta.eval(4).unwrap() - 0.5).abs() < 1e-12);
//! ```

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
// f64 math in no_std; shadowed by std's inherent methods under cfg(test).
#[allow(unused_imports)]
use num_traits::Float;

/// A parsed, immutable expression tree.
///
/// Construction goes through [`SeqExpr::parse`]; after that the tree never
/// changes, so evaluation is reentrant and safe to share across workers.
/// `parse` never produces a negative [`SeqExpr::Num`] literal — a leading
/// minus always becomes [`SeqExpr::Neg`] — and the [`Display`](fmt::Display)
/// implementation prints with the minimal parenthesization that re-parses to
/// a structurally identical tree.
#[derive(Debug, Clone, PartialEq)]
pub enum SeqExpr {
    /// A nonnegative finite literal.
    Num(f64),
    /// The generation index `n`.
    Var,
    /// Unary negation.
    Neg(Box<SeqExpr>),
    /// A binary arithmetic node.
    Binary(BinOp, Box<SeqExpr>, Box<SeqExpr>),
    /// A call to one of the four built-in functions.
    Call(Func, Vec<SeqExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Pow,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

// ── errors ──────────────────────────────────────────────────────────────

/// Syntax or lexical error, with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    /// A character the lexer has no use for.
    UnexpectedChar(char),
    /// A numeric literal that does not fit in a finite f64.
    LiteralOverflow,
    /// The parser wanted one of `expected` here.
    UnexpectedToken {
        found: String,
        expected: &'static [&'static str],
    },
    /// An identifier that is neither `n` nor a built-in function.
    UnknownIdentifier(String),
    /// A built-in called with the wrong number of arguments.
    WrongArity {
        name: &'static str,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: ", self.offset)?;
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::LiteralOverflow => write!(f, "numeric literal overflows f64"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "found {found}, expected one of: ")?;
                for (i, e) in expected.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier `{name}` (the only variable is `n`)")
            }
            ParseErrorKind::WrongArity {
                name,
                expected,
                found,
            } => write!(f, "`{name}` takes {expected} argument(s), found {found}"),
        }
    }
}

impl core::error::Error for ParseError {}

/// Out-of-domain input or non-finite result during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalError {
    /// The generation index must be ≥ 1.
    IndexZero,
    DivisionByZero,
    /// `log` of a value ≤ 0.
    LogNonPositive,
    /// `sqrt` of a negative value.
    SqrtNegative,
    /// Negative base raised to a non-integer exponent.
    NegativeBaseFractionalPow,
    /// The result left the finite f64 range.
    Overflow,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            EvalError::IndexZero => "generation index must be at least 1",
            EvalError::DivisionByZero => "division by zero",
            EvalError::LogNonPositive => "log of a nonpositive value",
            EvalError::SqrtNegative => "sqrt of a negative value",
            EvalError::NegativeBaseFractionalPow => {
                "negative base raised to a non-integer exponent"
            }
            EvalError::Overflow => "result exceeds the finite f64 range",
        };
        f.write_str(msg)
    }
}

impl core::error::Error for EvalError {}

// ── lexer ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => alloc::format!("number `{v}`"),
            Tok::Ident(s) => alloc::format!("identifier `{s}`"),
            Tok::Plus => "`+`".to_owned(),
            Tok::Minus => "`-`".to_owned(),
            Tok::Star => "`*`".to_owned(),
            Tok::Slash => "`/`".to_owned(),
            Tok::Caret => "`^`".to_owned(),
            Tok::LParen => "`(`".to_owned(),
            Tok::RParen => "`)`".to_owned(),
            Tok::Comma => "`,`".to_owned(),
            Tok::Eof => "end of input".to_owned(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok<'_>, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // Exponent part, only if followed by digits (so `2e` is a
                // number then an identifier, which fails later with a clear
                // message).
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let slice = &text[start..i];
                let value: f64 = slice.parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::UnexpectedChar('.'),
                })?;
                if !value.is_finite() {
                    return Err(ParseError {
                        offset: start,
                        kind: ParseErrorKind::LiteralOverflow,
                    });
                }
                toks.push((Tok::Num(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(&text[start..i]), start));
            }
            _ => {
                // Resynchronize on the char boundary for a correct offset.
                let c = text[i..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError {
                    offset: i,
                    kind: ParseErrorKind::UnexpectedChar(c),
                });
            }
        }
    }
    toks.push((Tok::Eof, text.len()));
    Ok(toks)
}

// ── parser ──────────────────────────────────────────────────────────────

const ATOM_EXPECTED: &[&str] = &["number", "`n`", "`sqrt`/`exp`/`log`/`pow`", "`(`", "`-`"];
const AFTER_EXPR_EXPECTED: &[&str] = &["`+`", "`-`", "`*`", "`/`", "`^`", "end of input"];

struct Parser<'a> {
    toks: Vec<(Tok<'a>, usize)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &(Tok<'a>, usize) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok<'a>, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static [&'static str]) -> ParseError {
        let (tok, off) = self.peek();
        ParseError {
            offset: *off,
            kind: ParseErrorKind::UnexpectedToken {
                found: tok.describe(),
                expected,
            },
        }
    }

    fn expr(&mut self) -> Result<SeqExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().0 {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = SeqExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<SeqExpr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().0 {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = SeqExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<SeqExpr, ParseError> {
        if matches!(self.peek().0, Tok::Minus) {
            self.bump();
            let inner = self.factor()?;
            return Ok(SeqExpr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<SeqExpr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek().0, Tok::Caret) {
            self.bump();
            // Right-associative; the exponent may carry its own unary minus.
            let exponent = self.factor()?;
            return Ok(SeqExpr::Binary(
                BinOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SeqExpr, ParseError> {
        match self.peek().0.clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(SeqExpr::Num(v))
            }
            Tok::Ident("n") => {
                self.bump();
                Ok(SeqExpr::Var)
            }
            Tok::Ident(name) => {
                let (_, off) = *self.peek();
                let func = match name {
                    "sqrt" => Func::Sqrt,
                    "exp" => Func::Exp,
                    "log" => Func::Log,
                    "pow" => Func::Pow,
                    other => {
                        return Err(ParseError {
                            offset: off,
                            kind: ParseErrorKind::UnknownIdentifier(other.to_owned()),
                        })
                    }
                };
                self.bump();
                if !matches!(self.peek().0, Tok::LParen) {
                    return Err(self.unexpected(&["`(`"]));
                }
                self.bump();
                let mut args = alloc::vec![self.expr()?];
                while matches!(self.peek().0, Tok::Comma) {
                    self.bump();
                    args.push(self.expr()?);
                }
                if !matches!(self.peek().0, Tok::RParen) {
                    return Err(self.unexpected(&["`,`", "`)`"]));
                }
                self.bump();
                if args.len() != func.arity() {
                    return Err(ParseError {
                        offset: off,
                        kind: ParseErrorKind::WrongArity {
                            name: func.name(),
                            expected: func.arity(),
                            found: args.len(),
                        },
                    });
                }
                Ok(SeqExpr::Call(func, args))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if !matches!(self.peek().0, Tok::RParen) {
                    return Err(self.unexpected(&["`)`"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.unexpected(ATOM_EXPECTED)),
        }
    }
}

impl SeqExpr {
    /// Parses `text` into an expression tree.
    ///
    /// Errors carry the byte offset of the offending token and the set of
    /// tokens that would have been accepted there.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let toks = lex(text)?;
        let mut p = Parser { toks, pos: 0 };
        let e = p.expr()?;
        if !matches!(p.peek().0, Tok::Eof) {
            return Err(p.unexpected(AFTER_EXPR_EXPECTED));
        }
        Ok(e)
    }

    /// Evaluates with the variable bound to the generation index `n ≥ 1`.
    pub fn eval(&self, n: u64) -> Result<f64, EvalError> {
        if n == 0 {
            return Err(EvalError::IndexZero);
        }
        self.eval_at(n as f64)
    }

    fn eval_at(&self, n: f64) -> Result<f64, EvalError> {
        let v = match self {
            SeqExpr::Num(v) => *v,
            SeqExpr::Var => n,
            SeqExpr::Neg(inner) => -inner.eval_at(n)?,
            SeqExpr::Binary(op, l, r) => {
                let a = l.eval_at(n)?;
                let b = r.eval_at(n)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => eval_pow(a, b)?,
                }
            }
            SeqExpr::Call(func, args) => match func {
                Func::Sqrt => {
                    let x = args[0].eval_at(n)?;
                    if x < 0.0 {
                        return Err(EvalError::SqrtNegative);
                    }
                    x.sqrt()
                }
                Func::Exp => args[0].eval_at(n)?.exp(),
                Func::Log => {
                    let x = args[0].eval_at(n)?;
                    if x <= 0.0 {
                        return Err(EvalError::LogNonPositive);
                    }
                    x.ln()
                }
                Func::Pow => {
                    let a = args[0].eval_at(n)?;
                    let b = args[1].eval_at(n)?;
                    eval_pow(a, b)?
                }
            },
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Overflow)
        }
    }
}

/// `x^y` with an exact-integer fast path (binary exponentiation, valid for
/// any sign of `x`) and `exp(y·log x)` for positive `x` otherwise.
fn eval_pow(x: f64, y: f64) -> Result<f64, EvalError> {
    const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0; // 2^53
    if y.trunc() == y && y.abs() <= MAX_EXACT_INT {
        if x == 0.0 && y < 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        return Ok(pow_int(x, y as i64));
    }
    if x > 0.0 {
        Ok((y * x.ln()).exp())
    } else if x == 0.0 {
        if y > 0.0 {
            Ok(0.0)
        } else {
            Err(EvalError::DivisionByZero)
        }
    } else if y.trunc() == y {
        // Integer exponent beyond 2^53: necessarily even, so the sign is +.
        Ok((y * (-x).ln()).exp())
    } else {
        Err(EvalError::NegativeBaseFractionalPow)
    }
}

fn pow_int(x: f64, y: i64) -> f64 {
    let mut base = if y < 0 { 1.0 / x } else { x };
    let mut e = y.unsigned_abs();
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

// ── pretty-printing ─────────────────────────────────────────────────────

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 6;

impl SeqExpr {
    fn prec(&self) -> u8 {
        match self {
            SeqExpr::Num(_) | SeqExpr::Var | SeqExpr::Call(..) => PREC_ATOM,
            SeqExpr::Neg(_) => PREC_NEG,
            SeqExpr::Binary(BinOp::Pow, ..) => PREC_POW,
            SeqExpr::Binary(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
            SeqExpr::Binary(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        if self.prec() < ctx {
            f.write_str("(")?;
            self.fmt_prec(f, 0)?;
            return f.write_str(")");
        }
        match self {
            SeqExpr::Num(v) => write!(f, "{v}"),
            SeqExpr::Var => f.write_str("n"),
            SeqExpr::Neg(inner) => {
                f.write_str("-")?;
                inner.fmt_prec(f, PREC_NEG)
            }
            SeqExpr::Binary(op, l, r) => {
                let (sym, lp, rp) = match op {
                    BinOp::Add => ("+", PREC_ADD, PREC_ADD + 1),
                    BinOp::Sub => ("-", PREC_ADD, PREC_ADD + 1),
                    BinOp::Mul => ("*", PREC_MUL, PREC_MUL + 1),
                    BinOp::Div => ("/", PREC_MUL, PREC_MUL + 1),
                    // Base must be an atom; exponent admits unary minus and
                    // further `^` (right associativity).
                    BinOp::Pow => ("^", PREC_ATOM, PREC_NEG),
                };
                l.fmt_prec(f, lp)?;
                f.write_str(sym)?;
                r.fmt_prec(f, rp)
            }
            SeqExpr::Call(func, args) => {
                f.write_str(func.name())?;
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    a.fmt_prec(f, 0)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
