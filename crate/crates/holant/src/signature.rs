//! Dense signatures `{0,1}ⁿ → Q(ζ₈)` and the local operations on them.
//!
//! Slots are numbered from 0. The value of input `x₀x₁…x_{n-1}` sits at
//! index `Σ xⱼ·2^{n-1-j}`, so slot 0 is the most significant bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2, Scalar};
use crate::error::{Error, Result};

pub const MAX_ARITY: usize = 16;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    arity: usize,
    values: Vec<Scalar>,
}

/// Bit of `slot` inside an index of an `arity`-ary signature.
#[inline]
pub fn slot_bit(arity: usize, slot: usize) -> usize {
    1 << (arity - 1 - slot)
}

/// Insert bit `b` at `slot` into an index over the other `arity - 1` slots.
#[inline]
fn insert_bit(idx: usize, arity: usize, slot: usize, b: usize) -> usize {
    let low_width = arity - 1 - slot;
    let low = idx & ((1 << low_width) - 1);
    let high = idx >> low_width;
    (((high << 1) | b) << low_width) | low
}

/// Equality up to a non-zero scalar; false when either side is all zero.
pub fn proportional(xs: &[Scalar], ys: &[Scalar]) -> bool {
    proportionality_factor(xs, ys).is_some()
}

/// λ ≠ 0 with `xs = λ·ys`.
pub fn proportionality_factor(xs: &[Scalar], ys: &[Scalar]) -> Option<Scalar> {
    if xs.len() != ys.len() {
        return None;
    }
    let p = xs.iter().zip(ys).position(|(x, y)| !x.is_zero() || !y.is_zero())?;
    let (px, py) = (&xs[p], &ys[p]);
    if px.is_zero() || py.is_zero() {
        return None;
    }
    for (x, y) in xs.iter().zip(ys) {
        if x * py != y * px {
            return None;
        }
    }
    Some(px / py)
}

impl Signature {
    pub fn new(arity: usize, values: Vec<Scalar>) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::ArityLimit(arity));
        }
        if values.len() != 1 << arity {
            return Err(Error::BadSignature(format!(
                "arity {arity} needs {} values, got {}",
                1usize << arity,
                values.len()
            )));
        }
        Ok(Signature { arity, values })
    }

    pub fn from_ints(arity: usize, values: &[i64]) -> Result<Self> {
        Signature::new(arity, values.iter().map(|&v| Scalar::from_int(v)).collect())
    }

    /// Parse a list of scalar literals.
    pub fn from_literals(arity: usize, values: &[&str]) -> Result<Self> {
        let vals = values.iter().map(|v| v.parse()).collect::<Result<Vec<Scalar>>>()?;
        Signature::new(arity, vals)
    }

    /// Signature of the scalar `s` (arity 0).
    pub fn scalar(s: Scalar) -> Self {
        Signature { arity: 0, values: vec![s] }
    }

    pub fn zero(arity: usize) -> Result<Self> {
        Signature::new(arity, vec![Scalar::zero(); 1 << arity])
    }

    /// Expand the symmetric shorthand `[f₀, …, fₙ]`.
    pub fn symmetric(weights: &[Scalar]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::BadSignature("empty symmetric list".into()));
        }
        let n = weights.len() - 1;
        if n > MAX_ARITY {
            return Err(Error::ArityLimit(n));
        }
        let values = (0..1usize << n)
            .map(|x| weights[x.count_ones() as usize].clone())
            .collect();
        Signature::new(n, values)
    }

    pub fn symmetric_ints(weights: &[i64]) -> Result<Self> {
        Signature::symmetric(&weights.iter().map(|&w| Scalar::from_int(w)).collect::<Vec<_>>())
    }

    /// Basis vector |x⟩ for a bit string given as slot values.
    pub fn basis(bits: &[u8]) -> Result<Self> {
        let n = bits.len();
        let mut s = Signature::zero(n)?;
        s.values[bits_to_index(bits)] = Scalar::one();
        Ok(s)
    }

    pub fn unary(a: Scalar, b: Scalar) -> Self {
        Signature { arity: 1, values: vec![a, b] }
    }

    pub fn delta0() -> Self {
        Signature::unary(Scalar::one(), Scalar::zero())
    }

    pub fn delta1() -> Self {
        Signature::unary(Scalar::zero(), Scalar::one())
    }

    pub fn pin_signature(b: u8) -> Self {
        if b == 0 {
            Signature::delta0()
        } else {
            Signature::delta1()
        }
    }

    pub fn plus() -> Self {
        Signature::unary(Scalar::one(), Scalar::one())
    }

    pub fn minus() -> Self {
        Signature::unary(Scalar::one(), Scalar::from_int(-1))
    }

    /// The n-ary equality `|0…0⟩ + |1…1⟩`, i.e. GHZₙ.
    pub fn equality(n: usize) -> Result<Self> {
        let mut w = vec![Scalar::zero(); n + 1];
        w[0] = Scalar::one();
        w[n] = Scalar::one();
        Signature::symmetric(&w)
    }

    pub fn ghz() -> Self {
        Signature::equality(3).expect("arity 3")
    }

    /// ExactOneₙ, the n-ary W state.
    pub fn exact_one(n: usize) -> Result<Self> {
        let mut w = vec![Scalar::zero(); n + 1];
        w[1] = Scalar::one();
        Signature::symmetric(&w)
    }

    pub fn w() -> Self {
        Signature::exact_one(3).expect("arity 3")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Scalar> {
        self.values
    }

    pub fn value(&self, idx: usize) -> &Scalar {
        &self.values[idx]
    }

    pub fn value_at(&self, bits: &[u8]) -> &Scalar {
        &self.values[bits_to_index(bits)]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Scalar::is_zero)
    }

    pub fn ensure_nonzero(&self) -> Result<()> {
        if self.is_zero() {
            Err(Error::ZeroSignature)
        } else {
            Ok(())
        }
    }

    /// Indices of the non-zero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| !self.values[i].is_zero()).collect()
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Signature {
            arity: self.arity,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// True when `self = λ·other` with λ ≠ 0.
    pub fn proportional_to(&self, other: &Signature) -> bool {
        self.arity == other.arity && proportional(&self.values, &other.values)
    }

    /// λ with `self = λ·other`.
    pub fn factor_over(&self, other: &Signature) -> Option<Scalar> {
        if self.arity != other.arity {
            return None;
        }
        proportionality_factor(&self.values, &other.values)
    }

    /// Scale so that the first non-zero entry is 1.
    pub fn normalized(&self) -> Self {
        match self.values.iter().find(|v| !v.is_zero()) {
            Some(p) => self.scale(&p.inv().expect("non-zero pivot")),
            None => self.clone(),
        }
    }

    fn check_slot(&self, slot: usize) -> Result<()> {
        if slot >= self.arity {
            Err(Error::SlotOutOfRange { slot, arity: self.arity })
        } else {
            Ok(())
        }
    }

    pub fn tensor(&self, g: &Signature) -> Result<Self> {
        let n = self.arity + g.arity;
        if n > MAX_ARITY {
            return Err(Error::ArityLimit(n));
        }
        let mut values = Vec::with_capacity(1 << n);
        for x in &self.values {
            for y in &g.values {
                values.push(x * y);
            }
        }
        Signature::new(n, values)
    }

    /// Contract `slot` against the unary `g`: `Σ_b g(b)·f(…b…)`.
    pub fn apply_unary(&self, slot: usize, g: &Signature) -> Result<Self> {
        self.check_slot(slot)?;
        if g.arity != 1 {
            return Err(Error::WrongArity { expected: 1, got: g.arity });
        }
        let n = self.arity - 1;
        let values = (0..1usize << n)
            .map(|idx| {
                let mut acc = Scalar::zero();
                for b in 0..2 {
                    if g.values[b].is_zero() {
                        continue;
                    }
                    let v = &self.values[insert_bit(idx, self.arity, slot, b)];
                    if !v.is_zero() {
                        acc += &(&g.values[b] * v);
                    }
                }
                acc
            })
            .collect();
        Signature::new(n, values)
    }

    /// Fix `slot` to the bit `b`.
    pub fn pin(&self, slot: usize, b: u8) -> Result<Self> {
        self.check_slot(slot)?;
        let n = self.arity - 1;
        let values = (0..1usize << n)
            .map(|idx| self.values[insert_bit(idx, self.arity, slot, b as usize)].clone())
            .collect();
        Signature::new(n, values)
    }

    /// Pin several slots at once; `pins` holds (slot, bit) pairs in any order.
    pub fn pin_many(&self, pins: &[(usize, u8)]) -> Result<Self> {
        let mut slots: Vec<(usize, u8)> = pins.to_vec();
        slots.sort_by(|a, b| b.0.cmp(&a.0));
        let mut f = self.clone();
        for (s, b) in slots {
            f = f.pin(s, b)?;
        }
        Ok(f)
    }

    /// Join slots `i` and `j` by an edge: `Σ_b f(…b…b…)`.
    pub fn self_loop(&self, i: usize, j: usize) -> Result<Self> {
        self.check_slot(i)?;
        self.check_slot(j)?;
        if i == j {
            return Err(Error::InvalidLoop(i));
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let n = self.arity - 2;
        let values = (0..1usize << n)
            .map(|idx| {
                let mut acc = Scalar::zero();
                for b in 0..2 {
                    let mid = insert_bit(idx, self.arity - 1, lo, b);
                    acc += &self.values[insert_bit(mid, self.arity, hi, b)];
                }
                acc
            })
            .collect();
        Signature::new(n, values)
    }

    /// Apply the 2×2 matrix `m` to a single slot.
    pub fn apply_local(&self, slot: usize, m: &Mat2) -> Result<Self> {
        self.check_slot(slot)?;
        let bit = slot_bit(self.arity, slot);
        let mut values = self.values.clone();
        for idx in 0..self.values.len() {
            if idx & bit != 0 {
                continue;
            }
            let v0 = &self.values[idx];
            let v1 = &self.values[idx | bit];
            values[idx] = m.entry(0, 0) * v0 + m.entry(0, 1) * v1;
            values[idx | bit] = m.entry(1, 0) * v0 + m.entry(1, 1) * v1;
        }
        Signature::new(self.arity, values)
    }

    /// `m^{⊗n}` applied to the value vector.
    pub fn transform(&self, m: &Mat2) -> Self {
        let mut f = self.clone();
        for slot in 0..self.arity {
            f = f.apply_local(slot, m).expect("slot in range");
        }
        f
    }

    /// Result slot `perm[k]` carries the original slot `k`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.arity;
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::InvalidPermutation(n));
        }
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidPermutation(n));
            }
            seen[p] = true;
        }
        let mut values = vec![Scalar::zero(); 1 << n];
        for (idx, v) in self.values.iter().enumerate() {
            let mut out = 0usize;
            for (k, &p) in perm.iter().enumerate() {
                if idx & slot_bit(n, k) != 0 {
                    out |= slot_bit(n, p);
                }
            }
            values[out] = v.clone();
        }
        Signature::new(n, values)
    }

    /// Reorder so that the result's slot `k` is the original slot `order[k]`.
    pub fn select_order(&self, order: &[usize]) -> Result<Self> {
        let mut perm = vec![usize::MAX; order.len()];
        for (k, &o) in order.iter().enumerate() {
            if o >= perm.len() {
                return Err(Error::InvalidPermutation(self.arity));
            }
            perm[o] = k;
        }
        self.permute(&perm)
    }

    /// `[f₀, …, fₙ]` when f is invariant under every slot permutation.
    pub fn symmetric_shorthand(&self) -> Option<Vec<Scalar>> {
        let mut w: Vec<Option<&Scalar>> = vec![None; self.arity + 1];
        for (idx, v) in self.values.iter().enumerate() {
            let h = idx.count_ones() as usize;
            match w[h] {
                None => w[h] = Some(v),
                Some(prev) if prev == v => {}
                Some(_) => return None,
            }
        }
        Some(w.into_iter().map(|v| v.expect("every weight occurs").clone()).collect())
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric_shorthand().is_some()
    }

    /// The finest tensor factorization; see [`Factor`].
    pub fn factorize(&self) -> Result<Vec<Factor>> {
        self.ensure_nonzero()?;
        let slots: Vec<usize> = (0..self.arity).collect();
        let mut out = Vec::new();
        factor_rec(self.clone(), slots, &mut out);
        out.sort_by_key(|f| f.slots[0]);
        // Move all scale onto the first factor.
        let mut scale = Scalar::one();
        for f in out.iter_mut() {
            if let Some(p) = f.sig.values.iter().find(|v| !v.is_zero()).cloned() {
                scale *= &p;
                f.sig = f.sig.scale(&p.inv().expect("non-zero"));
            }
        }
        if let Some(first) = out.first_mut() {
            first.sig = first.sig.scale(&scale);
        }
        Ok(out)
    }

    /// True when every factor of the finest factorization is unary.
    pub fn is_degenerate(&self) -> Result<bool> {
        Ok(self.factorize()?.iter().all(|f| f.sig.arity <= 1))
    }

    /// Bit string of an index as slot values.
    pub fn index_bits(&self, idx: usize) -> Vec<u8> {
        index_to_bits(idx, self.arity)
    }
}

/// One factor of a tensor factorization: `sig` lives on the original slots
/// `slots` (ascending), in that order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub slots: Vec<usize>,
    pub sig: Signature,
}

pub fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1))
}

pub fn index_to_bits(idx: usize, arity: usize) -> Vec<u8> {
    (0..arity).map(|s| ((idx >> (arity - 1 - s)) & 1) as u8).collect()
}

/// Split `f` (whose slots are the original `slots`) into `(A, complement)`
/// if it is a tensor product across that cut.
fn try_split(f: &Signature, mask: usize) -> Option<(Signature, Signature)> {
    let n = f.arity;
    let a_pos: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
    let b_pos: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) == 0).collect();
    let na = a_pos.len();
    let nb = b_pos.len();
    let split = |idx: usize| -> (usize, usize) {
        let mut r = 0;
        for &k in &a_pos {
            r = (r << 1) | ((idx >> (n - 1 - k)) & 1);
        }
        let mut c = 0;
        for &k in &b_pos {
            c = (c << 1) | ((idx >> (n - 1 - k)) & 1);
        }
        (r, c)
    };
    let mut m = vec![vec![Scalar::zero(); 1 << nb]; 1 << na];
    for (idx, v) in f.values.iter().enumerate() {
        let (r, c) = split(idx);
        m[r][c] = v.clone();
    }
    let pivot = f.values.iter().position(|v| !v.is_zero())?;
    let (r0, c0) = split(pivot);
    let p = m[r0][c0].clone();
    for r in 0..1 << na {
        for c in 0..1 << nb {
            let lhs = &m[r][c] * &p;
            let rhs = &m[r][c0] * &m[r0][c];
            if lhs != rhs {
                return None;
            }
        }
    }
    let pinv = p.inv().expect("pivot non-zero");
    let u: Vec<Scalar> = (0..1 << na).map(|r| m[r][c0].clone()).collect();
    let v: Vec<Scalar> = (0..1 << nb).map(|c| &m[r0][c] * &pinv).collect();
    Some((
        Signature::new(na, u).expect("sized"),
        Signature::new(nb, v).expect("sized"),
    ))
}

fn factor_rec(f: Signature, slots: Vec<usize>, out: &mut Vec<Factor>) {
    let n = f.arity;
    if n <= 1 {
        out.push(Factor { slots, sig: f });
        return;
    }
    for size in 1..=n / 2 {
        for mask in masks_of_size(n, size) {
            if let Some((a, b)) = try_split(&f, mask) {
                let a_slots = (0..n).filter(|&k| mask & (1 << k) != 0).map(|k| slots[k]).collect();
                let b_slots = (0..n).filter(|&k| mask & (1 << k) == 0).map(|k| slots[k]).collect();
                factor_rec(a, a_slots, out);
                factor_rec(b, b_slots, out);
                return;
            }
        }
    }
    out.push(Factor { slots, sig: f });
}

/// Subsets of `0..n` with exactly `size` members, as bit masks over
/// positions, in lexicographic order of their sorted member lists.
pub(crate) fn masks_of_size(n: usize, size: usize) -> Vec<usize> {
    fn rec(start: usize, n: usize, left: usize, cur: usize, out: &mut Vec<usize>) {
        if left == 0 {
            out.push(cur);
            return;
        }
        for k in start..n {
            if n - k < left {
                break;
            }
            rec(k + 1, n, left - 1, cur | (1 << k), out);
        }
    }
    let mut out = Vec::new();
    rec(0, n, size, 0, &mut out);
    out
}

/// Reassemble a factorization into a single signature over `arity` slots.
pub fn assemble(factors: &[Factor], arity: usize) -> Result<Signature> {
    let mut acc = Signature::scalar(Scalar::one());
    let mut order = Vec::new();
    for f in factors {
        acc = acc.tensor(&f.sig)?;
        order.extend_from_slice(&f.slots);
    }
    if order.len() != arity {
        return Err(Error::BadSignature("factors do not cover every slot".into()));
    }
    acc.permute(&order)
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, v) in self.values.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature(arity={}, {self})", self.arity)
    }
}

/// File form of a signature: explicit values or the symmetric shorthand.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SignatureSpec {
    Dense { arity: usize, values: Vec<Scalar> },
    Symmetric { symmetric: Vec<Scalar> },
}

impl SignatureSpec {
    pub fn build(&self) -> Result<Signature> {
        match self {
            SignatureSpec::Dense { arity, values } => Signature::new(*arity, values.clone()),
            SignatureSpec::Symmetric { symmetric } => Signature::symmetric(symmetric),
        }
    }
}

impl From<&Signature> for SignatureSpec {
    fn from(s: &Signature) -> Self {
        SignatureSpec::Dense { arity: s.arity, values: s.values.clone() }
    }
}

impl Serialize for Signature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SignatureSpec::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        SignatureSpec::deserialize(d)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}
