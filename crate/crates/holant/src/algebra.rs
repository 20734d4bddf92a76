//! Exact arithmetic in Q(ζ₈) and 2×2 matrices over it.
//!
//! A [`Scalar`] is `c0 + c1·ζ + c2·ζ² + c3·ζ³` with `ζ = e^{iπ/4}`, so `ζ² = i`
//! and `ζ⁴ = -1`. Coefficients are arbitrary-precision rationals, which keeps
//! every representation canonical and equality structural.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    c: [BigRational; 4],
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Scalar {
    pub fn new(c0: BigRational, c1: BigRational, c2: BigRational, c3: BigRational) -> Self {
        Scalar { c: [c0, c1, c2, c3] }
    }

    /// Build from small integer numerators over a common denominator.
    pub fn from_parts(nums: [i64; 4], den: i64) -> Self {
        let d = BigInt::from(den);
        Scalar {
            c: nums.map(|n| BigRational::new(BigInt::from(n), d.clone())),
        }
    }

    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(rat(n))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Scalar::from_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut s = Scalar::zero();
        s.c[0] = r;
        s
    }

    /// The imaginary unit, ζ².
    pub fn i() -> Self {
        Scalar::zeta_pow(2)
    }

    /// The primitive eighth root of unity ζ = e^{iπ/4}.
    pub fn zeta() -> Self {
        Scalar::zeta_pow(1)
    }

    /// ζᵏ for any integer k.
    pub fn zeta_pow(k: i64) -> Self {
        let k = k.rem_euclid(8) as usize;
        let mut s = Scalar::zero();
        if k < 4 {
            s.c[k] = rat(1);
        } else {
            s.c[k - 4] = rat(-1);
        }
        s
    }

    /// iᵏ for any integer k.
    pub fn i_pow(k: i64) -> Self {
        Scalar::zeta_pow(2 * k)
    }

    pub fn coeffs(&self) -> &[BigRational; 4] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(Zero::is_zero)
    }

    /// The rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.c[1..].iter().all(Zero::is_zero) {
            Some(&self.c[0])
        } else {
            None
        }
    }

    /// Galois automorphism ζ ↦ ζᵏ (k odd).
    pub fn galois(&self, k: i64) -> Self {
        let mut out = Scalar::zero();
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            let e = (j as i64 * k).rem_euclid(8) as usize;
            if e < 4 {
                out.c[e] += cj;
            } else {
                out.c[e - 4] -= cj;
            }
        }
        out
    }

    /// Complex conjugation, ζ ↦ ζ⁷ = -ζ³.
    pub fn conj(&self) -> Self {
        self.galois(7)
    }

    /// Field norm down to Q: the product of all four conjugates.
    pub fn norm(&self) -> BigRational {
        let p = self * &self.galois(3) * self.galois(5) * self.galois(7);
        debug_assert!(p.as_rational().is_some());
        p.c[0].clone()
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let rest = self.galois(3) * self.galois(5) * self.galois(7);
        let n = (self * &rest).c[0].clone();
        Ok(rest.scale(&n.recip()))
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Scalar {
            c: [0, 1, 2, 3].map(|j| &self.c[j] * r),
        }
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Scalar::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        Ok(acc)
    }

    /// k with self = ζᵏ, if self is an eighth root of unity.
    pub fn zeta_log(&self) -> Option<u8> {
        let nonzero: Vec<usize> = (0..4).filter(|&j| !self.c[j].is_zero()).collect();
        if nonzero.len() != 1 {
            return None;
        }
        let j = nonzero[0];
        if self.c[j].is_one() {
            Some(j as u8)
        } else if (-&self.c[j]).is_one() {
            Some(j as u8 + 4)
        } else {
            None
        }
    }

    /// A square root inside the field, found when self is a rational square
    /// times one of iᵏ or 2·iᵏ (whose roots ζᵏ and √2·ζᵏ are known).
    pub fn sqrt_exact(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        let sqrt2 = Scalar::zeta() - Scalar::zeta_pow(3);
        for k in 0..4 {
            for (unit, root) in [
                (Scalar::i_pow(k), Scalar::zeta_pow(k)),
                (Scalar::i_pow(k) * Scalar::from_int(2), &sqrt2 * Scalar::zeta_pow(k)),
            ] {
                let q = self.checked_div(&unit).ok()?;
                let Some(r) = q.as_rational() else { continue };
                if let Some(s) = rational_sqrt(r) {
                    return Some(root.scale(&s));
                }
            }
        }
        None
    }

    /// k ∈ ℤ₄ with self = iᵏ, if self is a fourth root of unity.
    pub fn i_log(&self) -> Option<u8> {
        match self.zeta_log() {
            Some(k) if k % 2 == 0 => Some(k / 2),
            _ => None,
        }
    }
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

fn mul_raw(a: &Scalar, b: &Scalar) -> Scalar {
    let mut out = Scalar::zero();
    for i in 0..4 {
        if a.c[i].is_zero() {
            continue;
        }
        for j in 0..4 {
            if b.c[j].is_zero() {
                continue;
            }
            let p = &a.c[i] * &b.c[j];
            let k = i + j;
            if k < 4 {
                out.c[k] += p;
            } else {
                out.c[k - 4] -= p;
            }
        }
    }
    out
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                let f: fn(&Scalar, &Scalar) -> Scalar = $body;
                f(self, rhs)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| Scalar {
    c: [0, 1, 2, 3].map(|j| &a.c[j] + &b.c[j])
});
forward_binop!(Sub, sub, |a, b| Scalar {
    c: [0, 1, 2, 3].map(|j| &a.c[j] - &b.c[j])
});
forward_binop!(Mul, mul, mul_raw);
forward_binop!(Div, div, |a, b| a
    .checked_div(b)
    .expect("division by zero Scalar"));

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        for j in 0..4 {
            self.c[j] += &rhs.c[j];
        }
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        *self += &rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        for j in 0..4 {
            self.c[j] -= &rhs.c[j];
        }
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = mul_raw(self, rhs);
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            c: [0, 1, 2, 3].map(|j| -&self.c[j]),
        }
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

impl Product for Scalar {
    fn product<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::one(), |acc, x| acc * x)
    }
}

// ---------------------------------------------------------------------------
// Literal printing and parsing

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const BASIS: [&str; 4] = ["", "w", "i", "w^3"];
        let mut out = String::new();
        for (j, cj) in self.c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            let neg = cj.is_negative();
            let mag = cj.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if j == 0 {
                out.push_str(&fmt_rational(&mag));
            } else if mag.is_one() {
                out.push_str(BASIS[j]);
            } else {
                out.push_str(&fmt_rational(&mag));
                out.push('*');
                out.push_str(BASIS[j]);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    I,
    W,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut k = 0;
    while k < chars.len() {
        let ch = chars[k];
        match ch {
            c if c.is_whitespace() => {}
            '0'..='9' => {
                let start = k;
                while k + 1 < chars.len() && chars[k + 1].is_ascii_digit() {
                    k += 1;
                }
                let digits: String = chars[start..=k].iter().collect();
                toks.push(Tok::Int(digits.parse().expect("ascii digits")));
            }
            'i' => toks.push(Tok::I),
            'w' => toks.push(Tok::W),
            '+' => toks.push(Tok::Plus),
            '-' => toks.push(Tok::Minus),
            '*' => toks.push(Tok::Star),
            '/' => toks.push(Tok::Slash),
            '^' => toks.push(Tok::Caret),
            '(' => toks.push(Tok::LParen),
            ')' => toks.push(Tok::RParen),
            other => {
                return Err(Error::Parse(format!(
                    "unexpected character {other:?} in scalar literal {s:?}"
                )))
            }
        }
        k += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Scalar> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Scalar> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc * self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let d = self.unary()?;
                    acc = acc
                        .checked_div(&d)
                        .map_err(|_| Error::Parse("division by zero in literal".into()))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Scalar> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Scalar> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let e = match self.next() {
            Some(Tok::Int(n)) => n
                .to_i64()
                .ok_or_else(|| Error::Parse("exponent too large".into()))?,
            _ => return Err(Error::Parse("expected integer exponent after '^'".into())),
        };
        base.pow(if neg { -e } else { e })
            .map_err(|_| Error::Parse("negative power of zero".into()))
    }

    fn atom(&mut self) -> Result<Scalar> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(Scalar::from_rational(BigRational::from_integer(n))),
            Some(Tok::I) => Ok(Scalar::i()),
            Some(Tok::W) => Ok(Scalar::zeta()),
            Some(Tok::LParen) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(v),
                    _ => Err(Error::Parse("missing ')'".into())),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks = tokenize(s)?;
        if toks.is_empty() {
            return Err(Error::Parse("empty scalar literal".into()));
        }
        let mut p = Parser { toks, pos: 0 };
        let v = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input in scalar literal {s:?}")));
        }
        Ok(v)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Lit {
            Str(String),
            Int(i64),
        }
        match Lit::deserialize(d)? {
            Lit::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Lit::Int(n) => Ok(Scalar::from_int(n)),
        }
    }
}

// ---------------------------------------------------------------------------
// 2×2 matrices

/// Row-major 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(into = "[[Scalar; 2]; 2]", from = "[[Scalar; 2]; 2]")]
pub struct Mat2 {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub d: Scalar,
}

impl From<Mat2> for [[Scalar; 2]; 2] {
    fn from(m: Mat2) -> Self {
        [[m.a, m.b], [m.c, m.d]]
    }
}

impl From<[[Scalar; 2]; 2]> for Mat2 {
    fn from([[a, b], [c, d]]: [[Scalar; 2]; 2]) -> Self {
        Mat2 { a, b, c, d }
    }
}

impl Mat2 {
    pub fn new(a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Mat2::from_ints(1, 0, 0, 1)
    }

    pub fn diag(x: Scalar, y: Scalar) -> Self {
        Mat2::new(x, Scalar::zero(), Scalar::zero(), y)
    }

    /// diag(1, ζ).
    pub fn t() -> Self {
        Mat2::diag(Scalar::one(), Scalar::zeta())
    }

    /// The bit flip.
    pub fn x() -> Self {
        Mat2::from_ints(0, 1, 1, 0)
    }

    /// `[[1, 1], [i, -i]]`.
    pub fn k() -> Self {
        Mat2::new(Scalar::one(), Scalar::one(), Scalar::i(), -Scalar::i())
    }

    pub fn kx() -> Self {
        Mat2::k().mul(&Mat2::x())
    }

    /// Look up one of the named matrices `I`, `T`, `X`, `K`, `KX`.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "I" => Some(Mat2::identity()),
            "T" => Some(Mat2::t()),
            "X" => Some(Mat2::x()),
            "K" => Some(Mat2::k()),
            "KX" => Some(Mat2::kx()),
            _ => None,
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> &Scalar {
        match (row, col) {
            (0, 0) => &self.a,
            (0, 1) => &self.b,
            (1, 0) => &self.c,
            (1, 1) => &self.d,
            _ => panic!("Mat2 index ({row}, {col}) out of range"),
        }
    }

    pub fn det(&self) -> Scalar {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn is_invertible(&self) -> bool {
        !self.det().is_zero()
    }

    pub fn invert(&self) -> Result<Self> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let r = det.inv()?;
        Ok(Mat2::new(
            &self.d * &r,
            -(&self.b * &r),
            -(&self.c * &r),
            &self.a * &r,
        ))
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a.clone(), self.c.clone(), self.b.clone(), self.d.clone())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(&self, n: &Mat2) -> Self {
        Mat2::new(
            &self.a * &n.a + &self.b * &n.c,
            &self.a * &n.b + &self.b * &n.d,
            &self.c * &n.a + &self.d * &n.c,
            &self.c * &n.b + &self.d * &n.d,
        )
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Mat2::new(&self.a * s, &self.b * s, &self.c * s, &self.d * s)
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: &[Scalar; 2]) -> [Scalar; 2] {
        [
            &self.a * &v[0] + &self.b * &v[1],
            &self.c * &v[0] + &self.d * &v[1],
        ]
    }

    /// Dense `2ᵏ × 2ᵏ` matrix of `m^{⊗k}`; row index bits follow the same
    /// most-significant-first order as signatures.
    pub fn tensor_power(&self, k: usize) -> Result<Vec<Vec<Scalar>>> {
        if k == 0 || 2 * k > crate::signature::MAX_ARITY {
            return Err(Error::ArityLimit(2 * k));
        }
        let dim = 1usize << k;
        let mut out = vec![vec![Scalar::zero(); dim]; dim];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                let mut p = Scalar::one();
                for bit in 0..k {
                    let rb = (r >> bit) & 1;
                    let cb = (c >> bit) & 1;
                    p *= self.entry(rb, cb);
                    if p.is_zero() {
                        break;
                    }
                }
                *cell = p;
            }
        }
        Ok(out)
    }

    /// True when `self = λ·other` for some non-zero λ.
    pub fn proportional_to(&self, other: &Mat2) -> bool {
        let xs = [self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone()];
        let ys = [other.a.clone(), other.b.clone(), other.c.clone(), other.d.clone()];
        crate::signature::proportional(&xs, &ys)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Parse a matrix given as a name (`I`, `T`, `X`, `K`, `KX`) or as a JSON
/// array `[[a, b], [c, d]]` of scalar literals.
impl FromStr for Mat2 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(m) = Mat2::named(t) {
            return Ok(m);
        }
        serde_json::from_str::<Mat2>(t).map_err(|e| Error::Parse(format!("matrix {t:?}: {e}")))
    }
}
