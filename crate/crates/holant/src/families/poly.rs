//! Univariate polynomials over Q(ζ₈), enough for gcd-based root tests.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::Scalar;

/// Coefficients from the constant term up; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    c: Vec<Scalar>,
}

impl Poly {
    pub fn new(mut c: Vec<Scalar>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: vec![] }
    }

    pub fn constant(s: Scalar) -> Self {
        Poly::new(vec![s])
    }

    /// The indeterminate t.
    pub fn t() -> Self {
        Poly::new(vec![Scalar::zero(), Scalar::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.c
    }

    pub fn lead(&self) -> Option<&Scalar> {
        self.c.last()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let z = Scalar::zero();
        Poly::new((0..n).map(|k| self.c.get(k).unwrap_or(&z) + o.c.get(k).unwrap_or(&z)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Scalar::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += &(a * b);
            }
        }
        Poly::new(c)
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        Poly::new(self.c.iter().map(|x| x * s).collect())
    }

    pub fn monic(&self) -> Poly {
        match self.lead() {
            None => Poly::zero(),
            Some(l) => self.scale(&l.inv().expect("leading coefficient is non-zero")),
        }
    }

    /// Quotient and remainder; panics on division by the zero polynomial.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dl = d.lead().expect("division by the zero polynomial").inv().expect("non-zero");
        let dd = d.c.len() - 1;
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![Scalar::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let coef = &r[k + dd] * &dl;
            if coef.is_zero() {
                continue;
            }
            for (j, dc) in d.c.iter().enumerate() {
                r[k + j] -= &(&coef * dc);
            }
            q[k] = coef;
        }
        (Poly::new(q), Poly::new(r))
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Monic lcm; 0 when either side is 0.
    pub fn lcm(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let g = self.gcd(o);
        self.mul(o).divrem(&g).0.monic()
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.c.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

impl Poly {
    /// Some root inside Q(ζ₈), when one can be found: linear and quadratic
    /// polynomials with an exact discriminant root, rational roots of
    /// rational polynomials, and a small table of candidates otherwise.
    pub fn find_root(&self) -> Option<Scalar> {
        let d = self.degree()?;
        if d == 0 {
            return None;
        }
        let m = self.monic();
        let c = m.coeffs();
        if c[0].is_zero() {
            return Some(Scalar::zero());
        }
        if d == 1 {
            return Some(-&c[0]);
        }
        if d == 2 {
            let disc = &c[1] * &c[1] - Scalar::from_int(4) * &c[0];
            if let Some(r) = disc.sqrt_exact() {
                return Some((r - &c[1]) * Scalar::from_ratio(1, 2));
            }
        }
        if let Some(r) = m.rational_root() {
            return Some(r);
        }
        let mut base = vec![Scalar::one(), Scalar::from_int(2), Scalar::from_ratio(1, 2)];
        let sqrt2 = Scalar::zeta() - Scalar::zeta_pow(3);
        base.push(sqrt2.inv().expect("non-zero"));
        base.push(sqrt2);
        for b in base {
            for k in 0..8 {
                let x = &b * Scalar::zeta_pow(k);
                if self.eval(&x).is_zero() {
                    return Some(x);
                }
            }
        }
        None
    }

    fn rational_root(&self) -> Option<Scalar> {
        let rats: Option<Vec<&BigRational>> = self.c.iter().map(|x| x.as_rational()).collect();
        let rats = rats?;
        let lcm = rats.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let ints: Vec<BigInt> = rats.iter().map(|r| (*r * BigRational::from(lcm.clone())).to_integer()).collect();
        let low = ints.iter().find(|x| !x.is_zero())?.abs();
        let high = ints.last()?.abs();
        let divisors = |n: &BigInt| -> Option<Vec<u64>> {
            let n = n.to_u64().filter(|&n| n <= 1_000_000_000_000)?;
            let mut out = Vec::new();
            let mut k = 1u64;
            while k * k <= n {
                if n % k == 0 {
                    out.push(k);
                    out.push(n / k);
                }
                k += 1;
            }
            Some(out)
        };
        for p in divisors(&low)? {
            for q in divisors(&high)? {
                for sign in [1i64, -1] {
                    let r = BigRational::new(BigInt::from(p) * sign, BigInt::from(q));
                    let x = Scalar::from_rational(r);
                    if self.eval(&x).is_zero() {
                        return Some(x);
                    }
                }
            }
        }
        None
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms = Vec::new();
        for (k, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let coef = if c.is_one() && k > 0 { String::new() } else { format!("({c})") };
            let var = match k {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{k}"),
            };
            let sep = if !coef.is_empty() && !var.is_empty() { "*" } else { "" };
            terms.push(format!("{coef}{sep}{var}"));
        }
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| Scalar::from_int(x)).collect())
    }

    #[test]
    fn gcd_and_lcm() {
        // (t-1)(t+2) and (t-1)(t-3)
        let a = p(&[-2, 1, 1]);
        let b = p(&[3, -4, 1]);
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
        assert_eq!(a.lcm(&b).degree(), Some(3));
        assert_eq!(Poly::zero().gcd(&a), a.monic());
        assert!(Poly::zero().lcm(&a).is_zero());
    }

    #[test]
    fn divrem_reconstructs() {
        let a = p(&[5, 0, 3, 1]);
        let d = p(&[1, 2]);
        let (q, r) = a.divrem(&d);
        assert_eq!(q.mul(&d).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 1);
    }

    #[test]
    fn roots_in_field() {
        // (3t - 4)(4t + 3)
        let f = p(&[-12, -7, 12]);
        let r = f.find_root().unwrap();
        assert!(f.eval(&r).is_zero());
        // (t - 1)(t - 2)(t + 5)
        let g = p(&[10, -13, 2, 1]);
        assert!(g.eval(&g.find_root().unwrap()).is_zero());
        // t² - 2
        let h = p(&[-2, 0, 1]);
        assert!(h.eval(&h.find_root().unwrap()).is_zero());
        // t² - t - 1 has roots (1 ± √5)/2
        assert!(p(&[-1, -1, 1]).find_root().is_none());
    }

    #[test]
    fn eval_horner() {
        assert_eq!(p(&[1, 2, 3]).eval(&Scalar::from_int(2)), Scalar::from_int(17));
        let t2p1 = p(&[1, 0, 1]);
        assert!(t2p1.eval(&Scalar::i()).is_zero());
    }
}
