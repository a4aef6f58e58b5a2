use super::GermError;
use crate::poly::{Field, Poly2, RatFunc};
use crate::scalar::Q;

/// Coefficient fields the expression parser can target.
pub trait ParseField: Field {
    /// Value of the parameter symbol `t`, when the field admits one.
    fn parameter() -> Option<Self>;
    fn from_int(n: &num_bigint::BigInt) -> Self;
}

impl ParseField for Q {
    fn parameter() -> Option<Self> {
        None
    }
    fn from_int(n: &num_bigint::BigInt) -> Self {
        Q::from_integer(n.clone())
    }
}

impl ParseField for RatFunc {
    fn parameter() -> Option<Self> {
        Some(RatFunc::t())
    }
    fn from_int(n: &num_bigint::BigInt) -> Self {
        RatFunc::from_q(&Q::from_integer(n.clone()))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(num_bigint::BigInt),
    X,
    Y,
    T,
    Dx,
    Dy,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, GermError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: num_bigint::BigInt = text[start..i].parse().expect("digits");
            out.push((start, Tok::Int(n)));
            continue;
        }
        if c.is_ascii_alphabetic() {
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let tok = match &text[start..i] {
                "x" => Tok::X,
                "y" => Tok::Y,
                "t" => Tok::T,
                "dx" => Tok::Dx,
                "dy" => Tok::Dy,
                other => {
                    return Err(GermError::Syntax {
                        offset: start,
                        message: format!("unknown symbol '{other}'"),
                    })
                }
            };
            out.push((start, tok));
            continue;
        }
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(GermError::Syntax {
                    offset: start,
                    message: format!("unexpected character '{ch}'"),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

/// Intermediate value: `scalar + dx_part*dx + dy_part*dy`.
#[derive(Clone)]
struct Form<K> {
    scalar: Poly2<K>,
    dx: Poly2<K>,
    dy: Poly2<K>,
}

impl<K: Field> Form<K> {
    fn scalar(p: Poly2<K>) -> Self {
        Form {
            scalar: p,
            dx: Poly2::zero(),
            dy: Poly2::zero(),
        }
    }
    fn is_differential(&self) -> bool {
        !self.dx.is_zero() || !self.dy.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Form {
            scalar: self.scalar.add(&o.scalar),
            dx: self.dx.add(&o.dx),
            dy: self.dy.add(&o.dy),
        }
    }
    fn neg(&self) -> Self {
        Form {
            scalar: self.scalar.neg(),
            dx: self.dx.neg(),
            dy: self.dy.neg(),
        }
    }
    fn scale_poly(&self, p: &Poly2<K>) -> Self {
        Form {
            scalar: self.scalar.mul(p),
            dx: self.dx.mul(p),
            dy: self.dy.mul(p),
        }
    }
}

struct Parser<'a, K> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
    _k: std::marker::PhantomData<K>,
}

impl<K: ParseField> Parser<'_, K> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, GermError> {
        Err(GermError::Syntax {
            offset,
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Form<K>, GermError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Form<K>, GermError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    let at = self.offset();
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = match (acc.is_differential(), rhs.is_differential()) {
                        (true, true) => {
                            return self.err(at, "product of two differentials");
                        }
                        (false, _) => rhs.scale_poly(&acc.scalar),
                        (true, false) => acc.scale_poly(&rhs.scalar),
                    };
                }
                Some(Tok::Slash) => {
                    let at = self.offset();
                    self.pos += 1;
                    let rhs = self.unary()?;
                    let c = match constant_of(&rhs) {
                        Some(c) => c,
                        None => return self.err(at, "division only by nonzero constants"),
                    };
                    let inv = match c.inv() {
                        Some(i) => i,
                        None => return self.err(at, "division by zero"),
                    };
                    acc = acc.scale_poly(&Poly2::constant(inv));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Form<K>, GermError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Form<K>, GermError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.offset();
        let e = match self.peek() {
            Some(Tok::Int(n)) => match u32::try_from(n.clone()) {
                Ok(e) if e <= 512 => e,
                _ => return self.err(at, "exponent out of range"),
            },
            _ => return self.err(at, "expected a nonnegative integer exponent"),
        };
        self.pos += 1;
        if base.is_differential() {
            if e == 1 {
                return Ok(base);
            }
            return self.err(at, "power of a differential");
        }
        Ok(Form::scalar(base.scalar.pow(e)))
    }

    fn atom(&mut self) -> Result<Form<K>, GermError> {
        let at = self.offset();
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.err(at, "unexpected end of input"),
        };
        self.pos += 1;
        Ok(match tok {
            Tok::Int(n) => Form::scalar(Poly2::constant(K::from_int(&n))),
            Tok::X => Form::scalar(Poly2::x()),
            Tok::Y => Form::scalar(Poly2::y()),
            Tok::T => match K::parameter() {
                Some(t) => Form::scalar(Poly2::constant(t)),
                None => return self.err(at, "parameter 't' not allowed here"),
            },
            Tok::Dx => Form {
                scalar: Poly2::zero(),
                dx: Poly2::one(),
                dy: Poly2::zero(),
            },
            Tok::Dy => Form {
                scalar: Poly2::zero(),
                dx: Poly2::zero(),
                dy: Poly2::one(),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    let off = self.offset();
                    return self.err(off, "expected ')'");
                }
                self.pos += 1;
                inner
            }
            other => return self.err(at, format!("unexpected token {other:?}")),
        })
    }
}

fn constant_of<K: Field>(f: &Form<K>) -> Option<K> {
    if f.is_differential() {
        return None;
    }
    match f.scalar.total_degree() {
        None => Some(K::zero()),
        Some(0) => Some(f.scalar.constant_term()),
        Some(_) => None,
    }
}

/// Parses `f*dx + g*dy` into the component pair `(f, g)` without saturating.
pub fn parse_components<K: ParseField>(text: &str) -> Result<(Poly2<K>, Poly2<K>), GermError> {
    let toks = tokenize(text)?;
    let mut p = Parser::<K> {
        toks: &toks,
        pos: 0,
        end: text.len(),
        _k: std::marker::PhantomData,
    };
    let form = p.expr()?;
    if p.pos < toks.len() {
        let off = p.offset();
        return Err(GermError::Syntax {
            offset: off,
            message: "unexpected trailing input".into(),
        });
    }
    if !form.scalar.is_zero() {
        return Err(GermError::Syntax {
            offset: 0,
            message: "every term must carry dx or dy".into(),
        });
    }
    if form.dx.is_zero() && form.dy.is_zero() {
        return Err(GermError::ZeroField);
    }
    Ok((form.dx, form.dy))
}

/// Parses a plain bivariate polynomial in `x`, `y` over `Q`.
pub fn parse_poly(text: &str) -> Result<Poly2<Q>, GermError> {
    let toks = tokenize(text)?;
    let mut p = Parser::<Q> {
        toks: &toks,
        pos: 0,
        end: text.len(),
        _k: std::marker::PhantomData,
    };
    let form = p.expr()?;
    if p.pos < toks.len() {
        let off = p.offset();
        return Err(GermError::Syntax {
            offset: off,
            message: "unexpected trailing input".into(),
        });
    }
    if form.is_differential() {
        return Err(GermError::Syntax {
            offset: 0,
            message: "expected a polynomial without dx or dy".into(),
        });
    }
    Ok(form.scalar)
}
