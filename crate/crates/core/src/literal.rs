//! Text literals: rational functions in `q` and colored Laurent polynomials
//! written as sums of `c * z[i,a]^k * ...` with 1-based colors and slots.

use num_bigint::BigInt;

use crate::cartan::DegreeVector;
use crate::laurent::{LaurentPoly, VarId};
use crate::scalars::Qq;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LiteralError {
    #[error("unexpected character {0:?} at offset {1}")]
    UnexpectedChar(char, usize),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected} at offset {at}")]
    Expected { expected: &'static str, at: usize },
    #[error("division by zero in literal")]
    DivisionByZero,
    #[error("variables are not allowed in a scalar literal")]
    VariableInScalar,
    #[error("divisor must be a scalar")]
    NonScalarDivisor,
    #[error("negative power of a non-monomial")]
    NegativePowerOfSum,
    #[error("variable z[{0},{1}] is outside the ambient degree")]
    OutOfAmbient(usize, usize),
    #[error("colors and slots are 1-based")]
    ZeroIndex,
}

#[derive(Debug, Clone)]
enum Ast {
    Num(BigInt),
    Q,
    Var(VarId),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Pow(Box<Ast>, i64),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser { src: s.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &'static str) -> Result<(), LiteralError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(LiteralError::Expected { expected: what, at: self.pos })
        }
    }

    fn integer(&mut self) -> Result<BigInt, LiteralError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(LiteralError::Expected { expected: "integer", at: start });
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(text.parse().expect("digit run parses"))
    }

    fn signed_small(&mut self) -> Result<i64, LiteralError> {
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let at = self.pos;
        let v: i64 = self.integer()?.try_into().map_err(|_| LiteralError::Expected { expected: "small integer", at })?;
        Ok(if neg { -v } else { v })
    }

    fn finish(&mut self) -> Result<(), LiteralError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(LiteralError::UnexpectedChar(c as char, self.pos)),
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Ast, LiteralError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = Ast::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(b'-') {
                acc = Ast::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    // term := unary (('*'|'/'|juxtaposition) unary)*
    fn term(&mut self) -> Result<Ast, LiteralError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = Ast::Mul(Box::new(acc), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                acc = Ast::Div(Box::new(acc), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(b'q' | b'z' | b'(')) {
                acc = Ast::Mul(Box::new(acc), Box::new(self.unary()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, LiteralError> {
        if self.eat(b'-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, LiteralError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let k = if self.eat(b'(') {
                let k = self.signed_small()?;
                self.expect(b')', "')'")?;
                k
            } else {
                self.signed_small()?
            };
            return Ok(Ast::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, LiteralError> {
        match self.peek() {
            None => Err(LiteralError::UnexpectedEnd),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(e)
            }
            Some(b'q') => {
                self.pos += 1;
                Ok(Ast::Q)
            }
            Some(b'z') => {
                self.pos += 1;
                self.expect(b'[', "'['")?;
                let color = self.index()?;
                self.expect(b',', "','")?;
                let slot = self.index()?;
                self.expect(b']', "']'")?;
                Ok(Ast::Var(VarId { color: color - 1, slot }))
            }
            Some(c) if c.is_ascii_digit() => Ok(Ast::Num(self.integer()?)),
            Some(c) => Err(LiteralError::UnexpectedChar(c as char, self.pos)),
        }
    }

    fn index(&mut self) -> Result<usize, LiteralError> {
        let at = self.pos;
        let v: usize = self.integer()?.try_into().map_err(|_| LiteralError::Expected { expected: "index", at })?;
        if v == 0 {
            return Err(LiteralError::ZeroIndex);
        }
        Ok(v)
    }
}

fn eval_scalar(ast: &Ast) -> Result<Qq, LiteralError> {
    Ok(match ast {
        Ast::Num(n) => Qq::from_bigint(n.clone()),
        Ast::Q => Qq::q_pow(1),
        Ast::Var(_) => return Err(LiteralError::VariableInScalar),
        Ast::Add(a, b) => eval_scalar(a)?.add(&eval_scalar(b)?),
        Ast::Sub(a, b) => eval_scalar(a)?.sub(&eval_scalar(b)?),
        Ast::Mul(a, b) => eval_scalar(a)?.mul(&eval_scalar(b)?),
        Ast::Div(a, b) => eval_scalar(a)?.div(&eval_scalar(b)?).map_err(|_| LiteralError::DivisionByZero)?,
        Ast::Neg(a) => eval_scalar(a)?.neg(),
        Ast::Pow(a, k) => eval_scalar(a)?.pow(*k).map_err(|_| LiteralError::DivisionByZero)?,
    })
}

fn collect_vars(ast: &Ast, out: &mut Vec<VarId>) {
    match ast {
        Ast::Var(v) => out.push(*v),
        Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Ast::Neg(a) | Ast::Pow(a, _) => collect_vars(a, out),
        Ast::Num(_) | Ast::Q => {}
    }
}

fn eval_poly(ast: &Ast, ambient: &DegreeVector) -> Result<LaurentPoly, LiteralError> {
    Ok(match ast {
        Ast::Num(_) | Ast::Q => LaurentPoly::constant(ambient, eval_scalar(ast)?),
        Ast::Var(v) => {
            if v.color >= ambient.rank() || v.slot as i64 > ambient[v.color] {
                return Err(LiteralError::OutOfAmbient(v.color + 1, v.slot));
            }
            LaurentPoly::var(ambient, *v)
        }
        Ast::Add(a, b) => eval_poly(a, ambient)?.add(&eval_poly(b, ambient)?),
        Ast::Sub(a, b) => eval_poly(a, ambient)?.sub(&eval_poly(b, ambient)?),
        Ast::Mul(a, b) => eval_poly(a, ambient)?.mul(&eval_poly(b, ambient)?),
        Ast::Div(a, b) => {
            let mut vars = Vec::new();
            collect_vars(b, &mut vars);
            if !vars.is_empty() {
                return Err(LiteralError::NonScalarDivisor);
            }
            let inv = eval_scalar(b)?.inv().map_err(|_| LiteralError::DivisionByZero)?;
            eval_poly(a, ambient)?.scale(&inv)
        }
        Ast::Neg(a) => eval_poly(a, ambient)?.neg(),
        Ast::Pow(a, k) => {
            let base = eval_poly(a, ambient)?;
            if *k >= 0 {
                let mut acc = LaurentPoly::constant(ambient, Qq::one());
                for _ in 0..*k {
                    acc = acc.mul(&base);
                }
                acc
            } else {
                if base.len() != 1 {
                    return Err(LiteralError::NegativePowerOfSum);
                }
                let (e, c) = base.terms().next().expect("one term");
                let c = c.pow(*k).map_err(|_| LiteralError::DivisionByZero)?;
                LaurentPoly::monomial(ambient, e.iter().map(|x| x * (*k as i32)).collect(), c)
            }
        }
    })
}

/// Parses a rational function in `q`, e.g. `q^2+1`, `(q^2-1)/q`, `-q^-2`.
pub fn parse_scalar(s: &str) -> Result<Qq, LiteralError> {
    let mut p = Parser::new(s);
    let ast = p.expr()?;
    p.finish()?;
    eval_scalar(&ast)
}

/// Parses a polynomial literal; with `ambient = None` the ambient degree is the
/// smallest one containing every variable mentioned, of rank at least `min_rank`.
pub fn parse_poly(s: &str, ambient: Option<&DegreeVector>, min_rank: usize) -> Result<LaurentPoly, LiteralError> {
    let mut p = Parser::new(s);
    let ast = p.expr()?;
    p.finish()?;
    let inferred;
    let ambient = match ambient {
        Some(a) => a,
        None => {
            let mut vars = Vec::new();
            collect_vars(&ast, &mut vars);
            let rank = vars.iter().map(|v| v.color + 1).max().unwrap_or(0).max(min_rank);
            let mut n = vec![0i64; rank];
            for v in vars {
                n[v.color] = n[v.color].max(v.slot as i64);
            }
            inferred = DegreeVector::new(n);
            &inferred
        }
    };
    eval_poly(&ast, ambient)
}
