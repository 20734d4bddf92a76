//! Affine signatures `c·i^{l(x)}·(−1)^{q(x)}` on an affine support.

use serde::{Deserialize, Serialize};

use crate::algebra::Scalar;
use crate::error::Result;
use crate::signature::{index_to_bits, Signature};

/// Points of the support are `offset ⊕ Σ tⱼ·basis[j]`; the value at `t` is
/// `prefactor · i^{Σ linear[j]·tⱼ} · (−1)^{Σ_{j<k} quadratic[j][k]·tⱼtₖ}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineForm {
    pub arity: usize,
    pub offset: Vec<u8>,
    /// Reduced row-echelon basis; the pivot of a row is its first 1.
    pub basis: Vec<Vec<u8>>,
    pub linear: Vec<u8>,
    pub quadratic: Vec<Vec<u8>>,
    pub prefactor: Scalar,
}

impl AffineForm {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Exponent of i at the free-variable assignment `t` (bit j of `t` is tⱼ,
    /// least significant first).
    pub fn exponent(&self, t: usize) -> u8 {
        let r = self.basis.len();
        let mut e = 0u32;
        for j in 0..r {
            if t >> j & 1 == 1 {
                e += self.linear[j] as u32;
                for k in j + 1..r {
                    if t >> k & 1 == 1 && self.quadratic[j][k] == 1 {
                        e += 2;
                    }
                }
            }
        }
        (e % 4) as u8
    }

    pub fn point(&self, t: usize) -> Vec<u8> {
        let mut x = self.offset.clone();
        for (j, row) in self.basis.iter().enumerate() {
            if t >> j & 1 == 1 {
                for (xb, rb) in x.iter_mut().zip(row) {
                    *xb ^= rb;
                }
            }
        }
        x
    }

    pub fn to_signature(&self) -> Result<Signature> {
        let mut values = vec![Scalar::zero(); 1 << self.arity];
        for t in 0..1usize << self.basis.len() {
            let idx = crate::signature::bits_to_index(&self.point(t));
            values[idx] = &self.prefactor * Scalar::i_pow(self.exponent(t) as i64);
        }
        Signature::new(self.arity, values)
    }
}

/// Insert `v` into a reduced echelon basis of bit masks (pivot = highest bit).
fn insert_reduced(basis: &mut Vec<usize>, mut v: usize) {
    for &b in basis.iter() {
        let p = usize::BITS - 1 - b.leading_zeros();
        if v >> p & 1 == 1 {
            v ^= b;
        }
    }
    if v == 0 {
        return;
    }
    let p = usize::BITS - 1 - v.leading_zeros();
    for b in basis.iter_mut() {
        if *b >> p & 1 == 1 {
            *b ^= v;
        }
    }
    basis.push(v);
}

/// The affine form of `f`, or `None` if `f` is not affine.
pub fn is_affine(f: &Signature) -> Result<Option<AffineForm>> {
    f.ensure_nonzero()?;
    let n = f.arity();
    let support = f.support();
    let s0 = support[0];
    let mut basis: Vec<usize> = Vec::new();
    for &s in &support[1..] {
        insert_reduced(&mut basis, s ^ s0);
    }
    if support.len() != 1 << basis.len() {
        return Ok(None);
    }
    basis.sort_by(|a, b| b.cmp(a));
    let pivots: Vec<u32> = basis.iter().map(|b| usize::BITS - 1 - b.leading_zeros()).collect();
    let mut offset = s0;
    for (b, &p) in basis.iter().zip(&pivots) {
        if offset >> p & 1 == 1 {
            offset ^= b;
        }
    }
    let point = |t: usize| -> usize {
        basis.iter().enumerate().fold(offset, |x, (j, b)| if t >> j & 1 == 1 { x ^ b } else { x })
    };
    let c = f.value(offset).clone();
    let c_inv = c.inv()?;
    let r = basis.len();
    let exp_at = |t: usize| -> Option<u8> { (f.value(point(t)) * &c_inv).i_log() };
    let mut linear = Vec::with_capacity(r);
    for j in 0..r {
        match exp_at(1 << j) {
            Some(e) => linear.push(e),
            None => return Ok(None),
        }
    }
    let mut quadratic = vec![vec![0u8; r]; r];
    for j in 0..r {
        for k in j + 1..r {
            let Some(e) = exp_at(1 << j | 1 << k) else { return Ok(None) };
            let cross = (e + 8 - linear[j] - linear[k]) % 4;
            match cross {
                0 => {}
                2 => quadratic[j][k] = 1,
                _ => return Ok(None),
            }
        }
    }
    let form = AffineForm {
        arity: n,
        offset: index_to_bits(offset, n),
        basis: basis.iter().map(|&b| index_to_bits(b, n)).collect(),
        linear,
        quadratic,
        prefactor: c,
    };
    for t in 0..1usize << r {
        if exp_at(t) != Some(form.exponent(t)) {
            return Ok(None);
        }
    }
    Ok(Some(form))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equalities_are_affine() {
        for n in 1..=8 {
            let form = is_affine(&Signature::equality(n).unwrap()).unwrap().unwrap();
            assert_eq!(form.dimension(), 1);
            assert_eq!(form.linear, vec![0]);
        }
    }

    #[test]
    fn cz_has_quadratic_term() {
        let f = Signature::from_ints(2, &[1, 1, 1, -1]).unwrap();
        let form = is_affine(&f).unwrap().unwrap();
        assert_eq!(form.dimension(), 2);
        assert_eq!(form.linear, vec![0, 0]);
        assert_eq!(form.quadratic[0][1], 1);
        assert_eq!(form.to_signature().unwrap(), f);
    }

    #[test]
    fn non_affine_examples() {
        assert!(is_affine(&Signature::symmetric_ints(&[1, 2, 1]).unwrap()).unwrap().is_none());
        assert!(is_affine(&Signature::w()).unwrap().is_none());
        // |00⟩+|11⟩ with phase ζ is not affine
        let f = Signature::new(2, vec![Scalar::one(), Scalar::zero(), Scalar::zero(), Scalar::zeta()]).unwrap();
        assert!(is_affine(&f).unwrap().is_none());
        // i^{x₁x₂} has an odd cross term
        let g = Signature::new(2, vec![Scalar::one(), Scalar::one(), Scalar::one(), Scalar::i()]).unwrap();
        assert!(is_affine(&g).unwrap().is_none());
    }

    #[test]
    fn shifted_support_round_trips() {
        let f = Signature::new(
            3,
            vec![
                Scalar::zero(),
                Scalar::from_int(2),
                Scalar::zero(),
                Scalar::from_int(2) * Scalar::i(),
                Scalar::zero(),
                Scalar::from_int(-2),
                Scalar::zero(),
                Scalar::from_int(2) * Scalar::i(),
            ],
        )
        .unwrap();
        let form = is_affine(&f).unwrap().unwrap();
        assert_eq!(form.offset, vec![0, 0, 1]);
        assert_eq!(form.basis, vec![vec![1, 0, 0], vec![0, 1, 0]]);
        assert_eq!(form.to_signature().unwrap(), f);
    }
}
