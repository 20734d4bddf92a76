//! Membership tests for the tractable signature families.

pub mod affine;
pub mod poly;

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2, Scalar};
use crate::error::{Error, Result};
use crate::signature::{Factor, Signature};

pub use affine::{is_affine, AffineForm};
pub use poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// ⟨𝒯⟩: every tensor factor has arity at most 2.
    T,
    /// ⟨O∘ℰ⟩ for a complex orthogonal O.
    OE,
    /// ⟨K∘ℰ⟩.
    KE,
    /// ⟨K∘ℳ⟩.
    KM,
    /// ⟨KX∘ℳ⟩.
    KXM,
    /// 𝒜.
    A,
    /// S∘𝒜 for some S ∈ 𝒮.
    SA,
    /// ℒ.
    L,
    /// Any of the Holant* families T, OE, KE, KM, KXM.
    HolantStar,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::T => "T",
            Family::OE => "OE",
            Family::KE => "KE",
            Family::KM => "KM",
            Family::KXM => "KXM",
            Family::A => "A",
            Family::SA => "SA",
            Family::L => "L",
            Family::HolantStar => "holant-star",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Some(match s {
            "T" => Family::T,
            "OE" => Family::OE,
            "KE" => Family::KE,
            "KM" => Family::KM,
            "KXM" => Family::KXM,
            "A" => Family::A,
            "SA" => Family::SA,
            "L" => Family::L,
            "holant-star" | "HolantStar" => Family::HolantStar,
            _ => return None,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Member,
    NotMember,
    Unknown,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::Member => "member",
            Membership::NotMember => "not-member",
            Membership::Unknown => "unknown",
        })
    }
}

/// Outcome of a family check. `matrix` and `witness` describe membership;
/// `reason` explains a negative or unknown outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub family: Family,
    pub member: Membership,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Mat2>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl FamilyVerdict {
    fn member(family: Family, matrix: Option<Mat2>, witness: impl Into<String>) -> Self {
        FamilyVerdict { family, member: Membership::Member, matrix, witness: Some(witness.into()), reason: None }
    }

    fn not_member(family: Family, reason: impl Into<String>) -> Self {
        FamilyVerdict { family, member: Membership::NotMember, matrix: None, witness: None, reason: Some(reason.into()) }
    }

    fn unknown(family: Family, reason: impl Into<String>) -> Self {
        FamilyVerdict { family, member: Membership::Unknown, matrix: None, witness: None, reason: Some(reason.into()) }
    }

    pub fn is_member(&self) -> bool {
        self.member == Membership::Member
    }
}

fn slots_str(slots: &[usize]) -> String {
    let parts: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Support exactly inside some {x, x̄}.
pub fn in_e(f: &Signature) -> Result<bool> {
    f.ensure_nonzero()?;
    let n = f.arity();
    let all = (1usize << n) - 1;
    let s = f.support();
    Ok(s.iter().all(|&y| y == s[0] || y == s[0] ^ all))
}

/// Support of Hamming weight at most 1.
pub fn in_m(f: &Signature) -> Result<bool> {
    f.ensure_nonzero()?;
    Ok(f.support().iter().all(|y| y.count_ones() <= 1))
}

/// Factors of arity at least 2, with their signature index.
fn entangled_factors(set: &[Signature]) -> Result<Vec<(usize, Factor)>> {
    let mut out = Vec::new();
    for (k, f) in set.iter().enumerate() {
        for fa in f.factorize()? {
            if fa.sig.arity() >= 2 {
                out.push((k, fa));
            }
        }
    }
    Ok(out)
}

pub fn in_t_closure(set: &[Signature]) -> Result<FamilyVerdict> {
    for (k, fa) in entangled_factors(set)? {
        if fa.sig.arity() > 2 {
            return Ok(FamilyVerdict::not_member(
                Family::T,
                format!("signature {k} has a genuinely entangled factor of arity {} on slots {}", fa.sig.arity(), slots_str(&fa.slots)),
            ));
        }
    }
    Ok(FamilyVerdict::member(Family::T, None, "every tensor factor has arity at most 2"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseFamily {
    E,
    M,
}

/// ⟨m∘E⟩ or ⟨m∘M⟩: each factor g of arity ≥ 2 has m⁻¹∘g in the base family.
pub fn in_transformed_closure(set: &[Signature], m: &Mat2, base: BaseFamily) -> Result<FamilyVerdict> {
    let inv = m.invert()?;
    let family = match base {
        BaseFamily::E => Family::KE,
        BaseFamily::M => Family::KM,
    };
    for (k, fa) in entangled_factors(set)? {
        let g = fa.sig.transform(&inv);
        let ok = match base {
            BaseFamily::E => in_e(&g)?,
            BaseFamily::M => in_m(&g)?,
        };
        if !ok {
            return Ok(FamilyVerdict::not_member(
                family,
                format!("signature {k}, factor on slots {}: m⁻¹∘g = {g} is outside {base:?}", slots_str(&fa.slots)),
            ));
        }
    }
    Ok(FamilyVerdict::member(family, Some(m.clone()), format!("m = {m}")))
}

fn closure_with(set: &[Signature], m: Mat2, base: BaseFamily, family: Family) -> Result<FamilyVerdict> {
    let mut v = in_transformed_closure(set, &m, base)?;
    v.family = family;
    Ok(v)
}

/// `B(t)^{⊗k}` applied to `f` with polynomial entries in t, where
/// `B(t) = [[1, t], [−t, 1]]`.
fn rotated_polys(f: &Signature) -> Vec<Poly> {
    let n = f.arity();
    let t = Poly::t();
    let neg_t = t.scale(&-Scalar::one());
    let mut v: Vec<Poly> = f.values().iter().map(|x| Poly::constant(x.clone())).collect();
    for slot in 0..n {
        let bit = 1usize << (n - 1 - slot);
        for idx in 0..v.len() {
            if idx & bit != 0 {
                continue;
            }
            let (v0, v1) = (v[idx].clone(), v[idx | bit].clone());
            v[idx] = v0.add(&t.mul(&v1));
            v[idx | bit] = neg_t.mul(&v0).add(&v1);
        }
    }
    v
}

/// Polynomial whose roots are the t with `B(t)∘f` supported on a
/// complementary pair; the zero polynomial when every t qualifies.
fn admissible_poly(f: &Signature) -> Poly {
    let p = rotated_polys(f);
    let n = f.arity();
    let all = (1usize << n) - 1;
    let mut acc: Option<Poly> = None;
    for x in 0..1usize << (n - 1) {
        let mut g = Poly::zero();
        for (y, py) in p.iter().enumerate() {
            if y != x && y != x ^ all {
                g = g.gcd(py);
            }
        }
        acc = Some(match acc {
            None => g,
            Some(a) => a.lcm(&g),
        });
    }
    acc.unwrap_or_else(Poly::zero)
}

/// Complete decision of ∃ orthogonal O with every factor in O∘ℰ.
///
/// Up to scalars, X and diagonal matrices (which preserve ⟨ℰ⟩), O⁻¹ ranges
/// over `B(t) = [[1, t], [−t, 1]]` with t² ≠ −1. Each factor cuts out the
/// roots of a polynomial in t; the set is a member iff the gcd of those
/// polynomials vanishes identically or has a root other than ±i.
pub fn exists_orthogonal_o(set: &[Signature]) -> Result<FamilyVerdict> {
    let mut g = Poly::zero();
    for (_, fa) in entangled_factors(set)? {
        g = g.gcd(&admissible_poly(&fa.sig));
        if g.degree() == Some(0) {
            break;
        }
    }
    if g.is_zero() {
        return Ok(FamilyVerdict::member(Family::OE, Some(Mat2::identity()), "O = I"));
    }
    let isotropic = Poly::new(vec![Scalar::one(), Scalar::zero(), Scalar::one()]);
    loop {
        let common = g.gcd(&isotropic);
        if common.degree() == Some(0) {
            break;
        }
        g = g.divrem(&common).0;
    }
    if g.degree() == Some(0) {
        return Ok(FamilyVerdict::not_member(
            Family::OE,
            "no rotation parameter t with t² ≠ −1 brings every entangled factor into ℰ",
        ));
    }
    Ok(match g.find_root() {
        Some(t) => {
            let m = Mat2::new(Scalar::one(), -&t, t.clone(), Scalar::one());
            let witness = format!("O ∝ {m} (t = {t}, normalise by 1/sqrt(1 + t²))");
            FamilyVerdict::member(Family::OE, Some(m), witness)
        }
        None => FamilyVerdict::member(
            Family::OE,
            None,
            format!("O ∝ [[1, -t], [t, 1]] with t a root of {g}"),
        ),
    })
}

/// Every signature affine.
pub fn in_a(set: &[Signature]) -> Result<FamilyVerdict> {
    for (k, f) in set.iter().enumerate() {
        if is_affine(f)?.is_none() {
            return Ok(FamilyVerdict::not_member(Family::A, format!("signature {k} = {f} is not affine")));
        }
    }
    Ok(FamilyVerdict::member(Family::A, Some(Mat2::identity()), "every signature is affine"))
}

/// `(⊗ⱼ T^{xⱼ}) f` is affine for every support string x.
pub fn in_l(f: &Signature) -> Result<bool> {
    f.ensure_nonzero()?;
    let n = f.arity();
    let t = Mat2::t();
    for x in f.support() {
        let mut g = f.clone();
        for slot in 0..n {
            if x & (1 << (n - 1 - slot)) != 0 {
                g = g.apply_local(slot, &t)?;
            }
        }
        if is_affine(&g)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn in_l_set(set: &[Signature]) -> Result<FamilyVerdict> {
    for (k, f) in set.iter().enumerate() {
        if !in_l(f)? {
            return Ok(FamilyVerdict::not_member(Family::L, format!("signature {k} = {f} is outside L")));
        }
    }
    Ok(FamilyVerdict::member(Family::L, None, "every T-twist of every signature is affine"))
}

/// `(Sᵀ)^{⊗2}(=₂)`, `Sᵀ|0⟩`, `Sᵀ|1⟩` all affine.
pub fn is_in_cs(s: &Mat2) -> Result<bool> {
    if !s.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    let r0 = Signature::unary(s.a.clone(), s.b.clone());
    let r1 = Signature::unary(s.c.clone(), s.d.clone());
    let binary = Signature::new(
        2,
        r0.tensor(&r0)?.values().iter().zip(r1.tensor(&r1)?.values()).map(|(x, y)| x + y).collect(),
    )?;
    if binary.is_zero() {
        return Ok(false);
    }
    Ok(is_affine(&r0)?.is_some() && is_affine(&r1)?.is_some() && is_affine(&binary)?.is_some())
}

fn named_cs_candidates() -> Vec<Mat2> {
    let i = Scalar::i();
    vec![
        Mat2::identity(),
        Mat2::x(),
        Mat2::t(),
        Mat2::t().mul(&Mat2::x()),
        Mat2::k(),
        Mat2::kx(),
        Mat2::diag(Scalar::one(), i),
        Mat2::diag(Scalar::one(), Scalar::from_int(-1)),
        Mat2::from_ints(1, 1, 1, -1),
    ]
}

/// Every element of 𝒮 up to a scalar factor.
///
/// The rows of S are affine unaries, so each is a multiple of one of six
/// directions; writing S = [[u], [μ·v]] the binary condition fixes r = μ²
/// to finitely many values, each of which has a square root in Q(ζ₈).
pub fn cs_elements() -> &'static [Mat2] {
    static CACHE: OnceLock<Vec<Mat2>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let i = Scalar::i();
        let dirs: Vec<[Scalar; 2]> = vec![
            [Scalar::one(), Scalar::zero()],
            [Scalar::zero(), Scalar::one()],
            [Scalar::one(), Scalar::one()],
            [Scalar::one(), Scalar::from_int(-1)],
            [Scalar::one(), i.clone()],
            [Scalar::one(), -&i],
        ];
        let mut out: Vec<Mat2> = Vec::new();
        let push = |m: Mat2, out: &mut Vec<Mat2>| {
            if is_in_cs(&m).unwrap_or(false) && !out.iter().any(|o| o.proportional_to(&m)) {
                out.push(m);
            }
        };
        for m in named_cs_candidates() {
            push(m, &mut out);
        }
        let sq = |u: &[Scalar; 2]| -> Vec<Scalar> {
            vec![&u[0] * &u[0], &u[0] * &u[1], &u[1] * &u[0], &u[1] * &u[1]]
        };
        for (ui, u) in dirs.iter().enumerate() {
            for (vi, v) in dirs.iter().enumerate() {
                if ui == vi {
                    continue;
                }
                let (a, b) = (sq(u), sq(v));
                let mut rs: Vec<Scalar> = Vec::new();
                let mut add = |r: Scalar| {
                    if !r.is_zero() && !rs.contains(&r) {
                        rs.push(r);
                    }
                };
                for j in 0..4 {
                    if !b[j].is_zero() {
                        add(-(&a[j] / &b[j]));
                    }
                    for k in 0..4 {
                        if j == k {
                            continue;
                        }
                        for m in 0..4 {
                            let im = Scalar::i_pow(m);
                            let den = &b[j] - &im * &b[k];
                            if !den.is_zero() {
                                add((&im * &a[k] - &a[j]) / den);
                            }
                        }
                    }
                }
                for r in rs {
                    let bin: Vec<Scalar> = a.iter().zip(&b).map(|(x, y)| x + &r * y).collect();
                    let f = Signature::new(2, bin).expect("four entries");
                    if f.is_zero() || is_affine(&f).expect("non-zero").is_none() {
                        continue;
                    }
                    let mu = r.sqrt_exact().expect("every admissible r has a square root in the field");
                    for s in [mu.clone(), -mu] {
                        let m = Mat2::new(u[0].clone(), u[1].clone(), &s * &v[0], &s * &v[1]);
                        push(m, &mut out);
                    }
                }
            }
        }
        out
    })
}

/// ∃ S ∈ 𝒮 with S⁻¹∘f affine for all f. With `candidates = None` the
/// complete enumeration of 𝒮 is searched and the answer is conclusive;
/// a user-supplied list can only confirm membership.
pub fn exists_s_in_cs(set: &[Signature], candidates: Option<&[Mat2]>) -> Result<FamilyVerdict> {
    for f in set {
        f.ensure_nonzero()?;
    }
    let list: Vec<Mat2> = match candidates {
        None => cs_elements().to_vec(),
        Some(c) => c.iter().filter(|m| is_in_cs(m).unwrap_or(false)).cloned().collect(),
    };
    let hit = list.par_iter().find_first(|s| {
        let inv = s.invert().expect("elements of 𝒮 are invertible");
        set.iter().all(|f| matches!(is_affine(&f.transform(&inv)), Ok(Some(_))))
    });
    Ok(match hit {
        Some(s) => FamilyVerdict::member(Family::SA, Some(s.clone()), format!("S = {s}")),
        None if candidates.is_none() => FamilyVerdict::not_member(
            Family::SA,
            format!("none of the {} elements of 𝒮 maps the set into 𝒜", list.len()),
        ),
        None => FamilyVerdict::unknown(
            Family::SA,
            format!("none of the {} supplied candidates in 𝒮 maps the set into 𝒜", list.len()),
        ),
    })
}

/// First Holant* family containing the set, in the order T, OE, KE, KM, KXM.
pub fn holant_star_tractable(set: &[Signature]) -> Result<FamilyVerdict> {
    let checks = [
        in_t_closure(set)?,
        exists_orthogonal_o(set)?,
        closure_with(set, Mat2::k(), BaseFamily::E, Family::KE)?,
        closure_with(set, Mat2::k(), BaseFamily::M, Family::KM)?,
        closure_with(set, Mat2::kx(), BaseFamily::M, Family::KXM)?,
    ];
    if let Some(v) = checks.iter().find(|v| v.is_member()) {
        return Ok(v.clone());
    }
    let reasons: Vec<String> = checks
        .iter()
        .map(|v| format!("{}: {}", v.family, v.reason.clone().unwrap_or_default()))
        .collect();
    if checks.iter().any(|v| v.member == Membership::Unknown) {
        return Ok(FamilyVerdict::unknown(Family::HolantStar, reasons.join("; ")));
    }
    Ok(FamilyVerdict::not_member(Family::HolantStar, reasons.join("; ")))
}

/// Check a single family by name.
pub fn check_family(set: &[Signature], family: Family, candidates: Option<&[Mat2]>) -> Result<FamilyVerdict> {
    match family {
        Family::T => in_t_closure(set),
        Family::OE => exists_orthogonal_o(set),
        Family::KE => closure_with(set, Mat2::k(), BaseFamily::E, Family::KE),
        Family::KM => closure_with(set, Mat2::k(), BaseFamily::M, Family::KM),
        Family::KXM => closure_with(set, Mat2::kx(), BaseFamily::M, Family::KXM),
        Family::A => in_a(set),
        Family::SA => exists_s_in_cs(set, candidates),
        Family::L => in_l_set(set),
        Family::HolantStar => holant_star_tractable(set),
    }
}

/// ω-normalisation of a symmetric binary `[y₀, y₁, y₂]` or a unary `[a, b]`.
///
/// The only roots of unity in Q(ζ₈) are eighth roots, none of which is a
/// primitive (3t)-th root, so every such signature is already normalised
/// and the identity is returned.
pub fn omega_normalise(f: &Signature) -> Result<(Signature, Mat2)> {
    match f.arity() {
        1 => {}
        2 if f.is_symmetric() => {}
        _ => {
            return Err(Error::Precondition(format!(
                "ω-normalisation needs a unary or a symmetric binary signature, got {f}"
            )))
        }
    }
    Ok((f.clone(), Mat2::identity()))
}
