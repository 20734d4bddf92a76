//! Entanglement predicates: GHZ/W classes of ternary signatures, genuine
//! entanglement, entangling projections and support-distance profiles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::Scalar;
use crate::error::{Error, Result};
use crate::signature::{bits_to_index, proportional, Factor, Signature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TernaryClass {
    Ghz,
    W,
    NotGenuine(Vec<Factor>),
}

impl TernaryClass {
    pub fn is_genuine(&self) -> bool {
        !matches!(self, TernaryClass::NotGenuine(_))
    }
}

impl fmt::Display for TernaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TernaryClass::Ghz => write!(f, "GHZ"),
            TernaryClass::W => write!(f, "W"),
            TernaryClass::NotGenuine(factors) => {
                let parts: Vec<String> = factors
                    .iter()
                    .map(|fa| {
                        let slots: Vec<String> = fa.slots.iter().map(|s| s.to_string()).collect();
                        format!("{{{}}}", slots.join(","))
                    })
                    .collect();
                write!(f, "PRODUCT({})", parts.join("|"))
            }
        }
    }
}

/// The degree-4 polynomial separating GHZ from W (Cayley's hyperdeterminant).
pub fn ghz_polynomial(f: &Signature) -> Result<Scalar> {
    if f.arity() != 3 {
        return Err(Error::WrongArity { expected: 3, got: f.arity() });
    }
    let a = f.values();
    let s = &a[0] * &a[7] - &a[2] * &a[5] + &a[1] * &a[6] - &a[3] * &a[4];
    let p = &a[2] * &a[4] - &a[0] * &a[6];
    let q = &a[3] * &a[5] - &a[1] * &a[7];
    Ok(&s * &s - Scalar::from_int(4) * p * q)
}

/// The three-clause condition that, with a vanishing polynomial, marks W.
fn w_clauses(a: &[Scalar]) -> bool {
    let ne = |i: usize, j: usize, k: usize, l: usize| &a[i] * &a[j] != &a[k] * &a[l];
    (ne(0, 3, 1, 2) || ne(5, 6, 4, 7))
        && (ne(1, 4, 0, 5) || ne(3, 6, 2, 7))
        && (ne(3, 5, 1, 7) || ne(2, 4, 0, 6))
}

pub fn ternary_class(f: &Signature) -> Result<TernaryClass> {
    let poly = ghz_polynomial(f)?;
    f.ensure_nonzero()?;
    if !poly.is_zero() {
        return Ok(TernaryClass::Ghz);
    }
    if w_clauses(f.values()) {
        return Ok(TernaryClass::W);
    }
    Ok(TernaryClass::NotGenuine(f.factorize()?))
}

/// A single factor spanning every slot. Signatures of arity ≤ 1 are never
/// genuinely entangled.
pub fn is_genuinely_entangled(f: &Signature) -> Result<bool> {
    if f.arity() <= 1 {
        f.ensure_nonzero()?;
        return Ok(false);
    }
    Ok(f.factorize()?.len() == 1)
}

/// `ad − bc` of a binary signature `[a, b, c, d]`.
pub fn binary_det(f: &Signature) -> Scalar {
    let v = f.values();
    &v[0] * &v[3] - &v[1] * &v[2]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProjLabel {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl ProjLabel {
    pub const ALL: [ProjLabel; 4] = [ProjLabel::Zero, ProjLabel::One, ProjLabel::Plus, ProjLabel::Minus];

    pub fn signature(self) -> Signature {
        match self {
            ProjLabel::Zero => Signature::delta0(),
            ProjLabel::One => Signature::delta1(),
            ProjLabel::Plus => Signature::plus(),
            ProjLabel::Minus => Signature::minus(),
        }
    }
}

impl fmt::Display for ProjLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjLabel::Zero => "0",
            ProjLabel::One => "1",
            ProjLabel::Plus => "+",
            ProjLabel::Minus => "-",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    /// (slot, label) for every slot other than j and k, ascending by slot.
    pub labels: Vec<(usize, ProjLabel)>,
    /// Binary signature on (j, k), in that order.
    pub residual: Signature,
}

/// Contract each `(slot, unary)` into `f`; the remaining slots keep their
/// relative order.
pub fn apply_unaries(f: &Signature, unaries: &[(usize, Signature)]) -> Result<Signature> {
    let mut sorted: Vec<&(usize, Signature)> = unaries.iter().collect();
    sorted.sort_by(|a, b| b.0.cmp(&a.0));
    let mut g = f.clone();
    for (slot, u) in sorted {
        g = g.apply_unary(*slot, u)?;
    }
    Ok(g)
}

/// First choice in {0,1,+,−}ⁿ⁻² (lexicographic, 0<1<+<−) leaving an
/// entangled binary signature on slots j, k.
pub fn find_entangling_projection(f: &Signature, j: usize, k: usize) -> Result<Projection> {
    let n = f.arity();
    for s in [j, k] {
        if s >= n {
            return Err(Error::SlotOutOfRange { slot: s, arity: n });
        }
    }
    if j == k {
        return Err(Error::InvalidLoop(j));
    }
    let others: Vec<usize> = (0..n).filter(|&s| s != j && s != k).collect();
    let m = others.len();
    for code in 0..4usize.pow(m as u32) {
        let labels: Vec<(usize, ProjLabel)> = others
            .iter()
            .enumerate()
            .map(|(p, &s)| (s, ProjLabel::ALL[(code / 4usize.pow((m - 1 - p) as u32)) % 4]))
            .collect();
        let unaries: Vec<(usize, Signature)> = labels.iter().map(|&(s, l)| (s, l.signature())).collect();
        let mut residual = apply_unaries(f, &unaries)?;
        if j > k {
            residual = residual.permute(&[1, 0])?;
        }
        if !binary_det(&residual).is_zero() {
            return Ok(Projection { labels, residual });
        }
    }
    Err(Error::ExhaustionFailure(format!("no projection of {f} leaves slots {j},{k} entangled")))
}

pub fn hamming(x: &[u8], y: &[u8]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// Signature already realised on some slots of `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anchor {
    pub slots: Vec<usize>,
    pub sig: Signature,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceProfile {
    pub level: u8,
    pub value: usize,
    /// Bit strings over `rest_slots` (level 0: over all slots).
    pub witness: (Vec<u8>, Vec<u8>),
    pub rest_slots: Vec<usize>,
    pub a_set: Vec<Vec<u8>>,
    pub b_set: Vec<Vec<u8>>,
}

/// The restriction of `f` to `anchor_slots` with `rest_slots` fixed to `x`.
pub fn section(f: &Signature, anchor_slots: &[usize], rest_slots: &[usize], x: &[u8]) -> Signature {
    let n = f.arity();
    let k = anchor_slots.len();
    let mut bits = vec![0u8; n];
    for (&s, &b) in rest_slots.iter().zip(x) {
        bits[s] = b;
    }
    let values = (0..1usize << k)
        .map(|u| {
            for (p, &s) in anchor_slots.iter().enumerate() {
                bits[s] = ((u >> (k - 1 - p)) & 1) as u8;
            }
            f.value(bits_to_index(&bits)).clone()
        })
        .collect();
    Signature::new(k, values).expect("arity within bounds")
}

fn min_pair(xs: &[Vec<u8>], ys: &[Vec<u8>], distinct: bool) -> Option<(usize, Vec<u8>, Vec<u8>)> {
    let mut best: Option<(usize, Vec<u8>, Vec<u8>)> = None;
    for x in xs {
        for y in ys {
            if distinct && x >= y {
                continue;
            }
            let d = hamming(x, y);
            let better = match &best {
                None => true,
                Some((bd, bx, by)) => (d, x, y) < (*bd, bx, by),
            };
            if better {
                best = Some((d, x.clone(), y.clone()));
            }
        }
    }
    best
}

/// D₀ (level 0) or Dᵢ relative to an anchor (levels 1–3).
pub fn distance_profile(f: &Signature, level: u8, anchor: Option<&Anchor>) -> Result<DistanceProfile> {
    f.ensure_nonzero()?;
    let n = f.arity();
    if level == 0 {
        let support: Vec<Vec<u8>> = f.support().into_iter().map(|i| f.index_bits(i)).collect();
        let (value, x, y) = min_pair(&support, &support, true)
            .ok_or_else(|| Error::ProfileUndefined("fewer than two support strings".into()))?;
        return Ok(DistanceProfile {
            level,
            value,
            witness: (x, y),
            rest_slots: (0..n).collect(),
            a_set: vec![],
            b_set: vec![],
        });
    }
    if level > 3 {
        return Err(Error::Precondition(format!("distance level {level} does not exist")));
    }
    let anchor = anchor.ok_or_else(|| Error::Precondition("levels 1-3 need an anchor".into()))?;
    let want = if level == 2 { 1 } else { 2 };
    if anchor.slots.len() != want || anchor.sig.arity() != want {
        return Err(Error::WrongArity { expected: want, got: anchor.sig.arity() });
    }
    for &s in &anchor.slots {
        if s >= n {
            return Err(Error::SlotOutOfRange { slot: s, arity: n });
        }
    }
    let rest: Vec<usize> = (0..n).filter(|s| !anchor.slots.contains(s)).collect();
    let mut a_set = Vec::new();
    let mut b_set = Vec::new();
    for x in 0..1usize << rest.len() {
        let bits: Vec<u8> = (0..rest.len()).map(|p| ((x >> (rest.len() - 1 - p)) & 1) as u8).collect();
        let phi = section(f, &anchor.slots, &rest, &bits);
        if phi.is_zero() {
            continue;
        }
        if proportional(phi.values(), anchor.sig.values()) {
            a_set.push(bits);
        } else {
            b_set.push(bits);
        }
    }
    if a_set.is_empty() || b_set.is_empty() {
        return Err(Error::ProfileUndefined(format!(
            "A{level} has {} strings and B{level} has {}",
            a_set.len(),
            b_set.len()
        )));
    }
    let (value, x, y) = min_pair(&a_set, &b_set, false).expect("both sets non-empty");
    Ok(DistanceProfile { level, value, witness: (x, y), rest_slots: rest, a_set, b_set })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Mat2;

    fn sig(arity: usize, v: &[i64]) -> Signature {
        Signature::from_ints(arity, v).unwrap()
    }

    fn kets(terms: &[&str]) -> Signature {
        let n = terms[0].len();
        let mut v = vec![0i64; 1 << n];
        for t in terms {
            v[usize::from_str_radix(t, 2).unwrap()] += 1;
        }
        sig(n, &v)
    }

    #[test]
    fn ternary_examples() {
        assert_eq!(ghz_polynomial(&Signature::ghz()).unwrap(), Scalar::one());
        assert_eq!(ternary_class(&Signature::ghz()).unwrap(), TernaryClass::Ghz);
        assert!(ghz_polynomial(&Signature::w()).unwrap().is_zero());
        assert_eq!(ternary_class(&Signature::w()).unwrap(), TernaryClass::W);
        let p = kets(&["000", "011"]);
        match ternary_class(&p).unwrap() {
            TernaryClass::NotGenuine(fs) => {
                assert_eq!(fs.len(), 2);
                assert_eq!(fs[0].slots, vec![0]);
                assert_eq!(fs[1].slots, vec![1, 2]);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(ternary_class(&Signature::equality(2).unwrap()).is_err());
        assert_eq!(ternary_class(&Signature::zero(3).unwrap()), Err(Error::ZeroSignature));
    }

    #[test]
    fn local_transforms_keep_class() {
        let a = Mat2::from_ints(1, 2, 0, 1);
        let b = Mat2::k();
        let c = Mat2::from_ints(3, 1, 1, 1);
        for (base, class) in [(Signature::ghz(), TernaryClass::Ghz), (Signature::w(), TernaryClass::W)] {
            let f = base.apply_local(0, &a).unwrap().apply_local(1, &b).unwrap().apply_local(2, &c).unwrap();
            assert_eq!(ternary_class(&f).unwrap(), class);
        }
    }

    #[test]
    fn genuine_entanglement() {
        assert!(is_genuinely_entangled(&Signature::equality(4).unwrap()).unwrap());
        assert!(!is_genuinely_entangled(&kets(&["00", "01"])).unwrap());
        assert!(is_genuinely_entangled(&kets(&["0011", "1100"])).unwrap());
        assert!(!is_genuinely_entangled(&Signature::delta0()).unwrap());
    }

    #[test]
    fn projection_examples() {
        let p = find_entangling_projection(&Signature::ghz(), 0, 1).unwrap();
        assert_eq!(p.labels, vec![(2, ProjLabel::Plus)]);
        assert_eq!(p.residual, Signature::equality(2).unwrap());
        let p = find_entangling_projection(&Signature::w(), 0, 1).unwrap();
        assert_eq!(p.labels, vec![(2, ProjLabel::Zero)]);
        assert_eq!(p.residual, kets(&["01", "10"]));
        let p = find_entangling_projection(&Signature::equality(4).unwrap(), 0, 1).unwrap();
        assert_eq!(p.labels, vec![(2, ProjLabel::Plus), (3, ProjLabel::Plus)]);
        let prod = kets(&["000"]);
        assert!(matches!(find_entangling_projection(&prod, 0, 1), Err(Error::ExhaustionFailure(_))));
    }

    #[test]
    fn projection_residual_order() {
        let f = kets(&["001", "100"]);
        let p = find_entangling_projection(&f, 2, 0).unwrap();
        assert_eq!(p.labels, vec![(1, ProjLabel::Zero)]);
        assert_eq!(p.residual, kets(&["10", "01"]));
    }

    #[test]
    fn distance_examples() {
        let f = kets(&["0000", "1111"]);
        assert_eq!(distance_profile(&f, 0, None).unwrap().value, 4);
        let f = kets(&["000", "011", "101", "110"]);
        assert_eq!(distance_profile(&f, 0, None).unwrap().value, 2);
        let f = kets(&["0000", "0011", "1111"]);
        let p = distance_profile(&f, 0, None).unwrap();
        assert_eq!(p.value, 2);
        assert_eq!(p.witness, (vec![0, 0, 0, 0], vec![0, 0, 1, 1]));
        assert!(matches!(distance_profile(&kets(&["01"]), 0, None), Err(Error::ProfileUndefined(_))));
    }

    #[test]
    fn anchored_profile() {
        // Anchor |00⟩+|11⟩ on slots 0,1; the tail 00 reproduces it, 11 gives |00⟩.
        let f = kets(&["0000", "1100", "0011"]);
        let anchor = Anchor { slots: vec![0, 1], sig: Signature::equality(2).unwrap() };
        let p = distance_profile(&f, 1, Some(&anchor)).unwrap();
        assert_eq!(p.a_set, vec![vec![0, 0]]);
        assert_eq!(p.b_set, vec![vec![1, 1]]);
        assert_eq!(p.value, 2);
        let bad = Anchor { slots: vec![0], sig: Signature::plus() };
        assert!(distance_profile(&f, 1, Some(&bad)).is_err());
        let g = kets(&["0000", "1100"]);
        assert!(matches!(distance_profile(&g, 1, Some(&anchor)), Err(Error::ProfileUndefined(_))));
    }
}
