//! Recursive-descent parser for potential expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := atom ('^' '-'? integer)?
//! atom   := number | 'u' index | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | sqrt
//! ```
//!
//! The parser emits the expression tree and, in the same pass, a flat
//! evaluation tape whose instructions remember the byte offset of the
//! sub-expression they came from.

use std::fmt;

use super::PotentialError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression tree. Variables are 1-based, as written in the source.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Op {
    Const(f64),
    Var(usize),
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Pow(usize, i32),
    Call(Func, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Instr {
    pub op: Op,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Int(x) => write!(f, "integer {x}"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> PotentialError {
    PotentialError::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(source: &str) -> Result<Vec<(Tok, usize)>, PotentialError> {
    let bytes = source.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, start));
            i += 1;
            continue;
        }
        // U+2212 MINUS SIGN
        if source[i..].starts_with('\u{2212}') {
            out.push((Tok::Minus, start));
            i += '\u{2212}'.len_utf8();
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut j = i;
            let mut is_int = true;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'.' {
                is_int = false;
                j += 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
            }
            if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                let mut k = j + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    is_int = false;
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let text = &source[i..j];
            let value: f64 = text
                .parse()
                .map_err(|_| syntax(start, format!("malformed number '{text}'")))?;
            if !value.is_finite() {
                return Err(syntax(start, format!("number '{text}' out of range")));
            }
            let tok = match (is_int, text.parse::<i64>()) {
                (true, Ok(k)) => Tok::Int(k),
                _ => Tok::Num(value),
            };
            out.push((tok, start));
            i = j;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_alphanumeric() {
                j += 1;
            }
            out.push((Tok::Ident(source[i..j].to_string()), start));
            i = j;
            continue;
        }
        let ch = source[i..].chars().next().unwrap_or('?');
        return Err(syntax(start, format!("unexpected character '{ch}'")));
    }
    out.push((Tok::End, source.len()));
    Ok(out)
}

#[derive(Debug)]
pub(crate) struct Parsed {
    pub expr: Expr,
    pub tape: Vec<Instr>,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
    tape: Vec<Instr>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn emit(&mut self, op: Op, offset: usize) -> usize {
        self.tape.push(Instr { op, offset });
        self.tape.len() - 1
    }

    fn expr(&mut self) -> Result<(Expr, usize), PotentialError> {
        let (mut lhs, mut slot) = self.term()?;
        loop {
            let (tok, at) = match self.peek() {
                Tok::Plus | Tok::Minus => self.bump(),
                _ => return Ok((lhs, slot)),
            };
            let (rhs, rslot) = self.term()?;
            if tok == Tok::Plus {
                lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                slot = self.emit(Op::Add(slot, rslot), at);
            } else {
                lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                slot = self.emit(Op::Sub(slot, rslot), at);
            }
        }
    }

    fn term(&mut self) -> Result<(Expr, usize), PotentialError> {
        let (mut lhs, mut slot) = self.unary()?;
        loop {
            let (tok, at) = match self.peek() {
                Tok::Star | Tok::Slash => self.bump(),
                _ => return Ok((lhs, slot)),
            };
            let (rhs, rslot) = self.unary()?;
            if tok == Tok::Star {
                lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                slot = self.emit(Op::Mul(slot, rslot), at);
            } else {
                lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                slot = self.emit(Op::Div(slot, rslot), at);
            }
        }
    }

    fn unary(&mut self) -> Result<(Expr, usize), PotentialError> {
        if *self.peek() == Tok::Minus {
            let (_, at) = self.bump();
            let (inner, slot) = self.unary()?;
            let out = self.emit(Op::Neg(slot), at);
            return Ok((Expr::Neg(Box::new(inner)), out));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<(Expr, usize), PotentialError> {
        let start = self.offset();
        let (base, slot) = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok((base, slot));
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let (tok, at) = self.bump();
        let k = match tok {
            Tok::Int(k) => k,
            Tok::Num(_) => return Err(PotentialError::NonIntegerExponent { offset: at }),
            Tok::End => return Err(syntax(at, "expected integer exponent, found end of input")),
            other => {
                return Err(syntax(at, format!("expected integer exponent, found {other}")))
            }
        };
        let k = if negative { -k } else { k };
        let k = i32::try_from(k).map_err(|_| syntax(at, "exponent out of range"))?;
        let out = self.emit(Op::Pow(slot, k), start);
        Ok((Expr::Pow(Box::new(base), k), out))
    }

    fn atom(&mut self) -> Result<(Expr, usize), PotentialError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(x) => Ok((Expr::Num(x), self.emit(Op::Const(x), at))),
            Tok::Int(k) => {
                let x = k as f64;
                Ok((Expr::Num(x), self.emit(Op::Const(x), at)))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        let found = self.peek().clone();
                        return Err(syntax(
                            self.offset(),
                            format!("expected '(' after {}, found {found}", func.name()),
                        ));
                    }
                    self.bump();
                    let (arg, slot) = self.expr()?;
                    self.expect_rparen()?;
                    let out = self.emit(Op::Call(func, slot), at);
                    return Ok((Expr::Call(func, Box::new(arg)), out));
                }
                self.variable(&name, at)
            }
            Tok::End => Err(syntax(at, "unexpected end of input")),
            other => Err(syntax(at, format!("unexpected {other}"))),
        }
    }

    fn variable(&mut self, name: &str, at: usize) -> Result<(Expr, usize), PotentialError> {
        let digits = name
            .strip_prefix('u')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| syntax(at, format!("unknown identifier '{name}'")))?;
        let index: usize = digits
            .parse()
            .map_err(|_| syntax(at, format!("bad variable index in '{name}'")))?;
        if index == 0 || index > self.dim {
            return Err(PotentialError::VariableOutOfRange {
                offset: at,
                index,
                dim: self.dim,
            });
        }
        Ok((Expr::Var(index), self.emit(Op::Var(index - 1), at)))
    }

    fn expect_rparen(&mut self) -> Result<(), PotentialError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::RParen => Ok(()),
            other => Err(syntax(at, format!("expected ')', found {other}"))),
        }
    }
}

pub(crate) fn parse(source: &str, dim: usize) -> Result<Parsed, PotentialError> {
    if source.trim().is_empty() {
        return Err(PotentialError::EmptySource);
    }
    if dim == 0 {
        return Err(PotentialError::ZeroDimension);
    }
    let toks = lex(source)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        dim,
        tape: Vec::new(),
    };
    let (expr, _) = parser.expr()?;
    if *parser.peek() != Tok::End {
        let found = parser.peek().clone();
        return Err(syntax(parser.offset(), format!("unexpected {found}")));
    }
    Ok(Parsed {
        expr,
        tape: parser.tape,
    })
}

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

fn write_expr(e: &Expr, min_prec: u8, out: &mut String) {
    use std::fmt::Write;
    let (prec, body) = match e {
        Expr::Num(x) => (PREC_ATOM, format!("{x}")),
        Expr::Var(i) => (PREC_ATOM, format!("u{i}")),
        Expr::Call(f, a) => {
            let mut s = String::new();
            write_expr(a, 0, &mut s);
            (PREC_ATOM, format!("{}({s})", f.name()))
        }
        Expr::Pow(a, k) => {
            let mut s = String::new();
            write_expr(a, PREC_ATOM, &mut s);
            let _ = write!(s, "^{k}");
            (PREC_ATOM - 1, s)
        }
        Expr::Neg(a) => {
            let mut s = String::from("-");
            write_expr(a, PREC_UNARY, &mut s);
            (PREC_UNARY, s)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let op = if matches!(e, Expr::Add(..)) { " + " } else { " - " };
            let mut s = String::new();
            write_expr(a, PREC_SUM, &mut s);
            s.push_str(op);
            write_expr(b, PREC_PRODUCT, &mut s);
            (PREC_SUM, s)
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            let op = if matches!(e, Expr::Mul(..)) { "*" } else { "/" };
            let mut s = String::new();
            write_expr(a, PREC_PRODUCT, &mut s);
            s.push_str(op);
            write_expr(b, PREC_UNARY, &mut s);
            (PREC_PRODUCT, s)
        }
    };
    if prec < min_prec {
        out.push('(');
        out.push_str(&body);
        out.push(')');
    } else {
        out.push_str(&body);
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(self, 0, &mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(i: usize) -> Box<Expr> {
        Box::new(Expr::Var(i))
    }

    fn num(x: f64) -> Box<Expr> {
        Box::new(Expr::Num(x))
    }

    #[test]
    fn sum_of_squares_tree() {
        let p = parse("u1^2 + u2^2", 2).unwrap();
        assert_eq!(
            p.expr,
            Expr::Add(
                Box::new(Expr::Pow(var(1), 2)),
                Box::new(Expr::Pow(var(2), 2))
            )
        );
    }

    #[test]
    fn ring3d_tree() {
        let p = parse("(u1^2+u2^2-1)^2/4 + u3^2/2", 3).unwrap();
        let ring = Expr::Sub(
            Box::new(Expr::Add(
                Box::new(Expr::Pow(var(1), 2)),
                Box::new(Expr::Pow(var(2), 2)),
            )),
            num(1.0),
        );
        let expected = Expr::Add(
            Box::new(Expr::Div(Box::new(Expr::Pow(Box::new(ring), 2)), num(4.0))),
            Box::new(Expr::Div(Box::new(Expr::Pow(var(3), 2)), num(2.0))),
        );
        assert_eq!(p.expr, expected);
    }

    #[test]
    fn incomplete_expression_reports_end_offset() {
        match parse("u1 +", 1) {
            Err(PotentialError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn variable_out_of_range() {
        match parse("u1 + u3", 2) {
            Err(PotentialError::VariableOutOfRange { offset, index, dim }) => {
                assert_eq!((offset, index, dim), (5, 3, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("u0", 2),
            Err(PotentialError::VariableOutOfRange { .. })
        ));
    }

    #[test]
    fn fractional_exponent_rejected() {
        assert!(matches!(
            parse("u1^2.5", 1),
            Err(PotentialError::NonIntegerExponent { offset: 3 })
        ));
        assert!(matches!(
            parse("u1^1e3", 1),
            Err(PotentialError::NonIntegerExponent { .. })
        ));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let p = parse("-u1^2", 1).unwrap();
        assert_eq!(p.expr, Expr::Neg(Box::new(Expr::Pow(var(1), 2))));
        let q = parse("(-u1)^2", 1).unwrap();
        assert_eq!(q.expr, Expr::Pow(Box::new(Expr::Neg(var(1))), 2));
    }

    #[test]
    fn unicode_minus_and_functions() {
        let p = parse("sqrt(u1) \u{2212} cos(u2)*exp(-u1)", 2).unwrap();
        assert!(matches!(p.expr, Expr::Sub(..)));
        assert!(parse("sin u1", 1).is_err());
        assert!(parse("foo(u1)", 1).is_err());
        assert!(parse("u1 )", 1).is_err());
        assert!(matches!(parse("   ", 1), Err(PotentialError::EmptySource)));
    }

    #[test]
    fn printing_keeps_structure() {
        for src in [
            "u1 - (u2 - u3)",
            "u1/(u2*u3)",
            "(u1^2)^3",
            "(-u1)^2 + -u2",
            "2^-2*u1",
            "--u1",
            "0.1 + 1e-7*u2",
        ] {
            let a = parse(src, 3).unwrap();
            let printed = a.expr.to_string();
            let b = parse(&printed, 3).unwrap();
            assert_eq!(a.expr, b.expr, "{src} -> {printed}");
        }
    }
}
