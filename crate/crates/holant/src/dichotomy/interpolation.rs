//! Realising =₄ from `a|0000⟩+b|0011⟩+c|1100⟩+d|1111⟩` by interpolation, and
//! the generalised-equality terminal.

use serde::{Deserialize, Serialize};

use crate::algebra::Scalar;
use crate::error::{Error, Result};
use crate::grid::{holant, GridBuilder, SignatureGrid};
use crate::signature::Signature;

use super::certificate::{ReductionStep, Terminal};

/// Coefficients `[a, b, c, d]` of a signature supported on
/// {0000, 0011, 1100, 1111}.
pub fn eq4_form(f: &Signature) -> Result<[Scalar; 4]> {
    if f.arity() != 4 {
        return Err(Error::WrongArity { expected: 4, got: f.arity() });
    }
    if let Some(&s) = f.support().iter().find(|s| ![0, 3, 12, 15].contains(*s)) {
        return Err(Error::WrongSupport(format!("{} is outside {{0000, 0011, 1100, 1111}}", format_bits(s, 4))));
    }
    Ok([f.value(0).clone(), f.value(3).clone(), f.value(12).clone(), f.value(15).clone()])
}

/// Relabel `f` so its support lies in {0000, 0011, 1100, 1111}, flipping
/// the same bits in both pairs. Returns the flip mask (applied to each pair)
/// and the relabelled signature. Chains of `f` and of the relabelled
/// signature compose identically, so interpolation may run on the latter.
pub fn pair_normal_form(f: &Signature) -> Result<(usize, Signature)> {
    if f.arity() != 4 {
        return Err(Error::WrongArity { expected: 4, got: f.arity() });
    }
    for u in [0b00usize, 0b01] {
        let mask = (u << 2) | u;
        if f.support().iter().all(|s| [0, 3, 12, 15].contains(&(s ^ mask))) {
            let values = (0..16).map(|x| f.value(x ^ mask).clone()).collect();
            return Ok((u, Signature::new(4, values)?));
        }
    }
    eq4_form(f).map(|_| unreachable!("the zero mask already matched"))
}

fn format_bits(x: usize, n: usize) -> String {
    (0..n).map(|p| if x >> (n - 1 - p) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Small-scale run of the interpolation: a target grid with three =₄
/// vertices is recovered from grids where each =₄ is replaced by a chain of
/// s copies of f.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpolationDemo {
    pub occurrences: usize,
    /// Chain lengths used, one per row of the system.
    pub powers: Vec<usize>,
    /// `fₛ = αₛ·f + βₛ·(=₄)` for each chain length s.
    pub coefficients: Vec<(Scalar, Scalar)>,
    /// Holant of each modified grid.
    pub values: Vec<Scalar>,
    pub recovered: Scalar,
    pub expected: Scalar,
}

/// One occurrence of the 4-ary signature: a chain of `s` copies, or =₄ when
/// `s` is 0. Returns the external endpoints for slots 0..4.
fn place(b: &mut GridBuilder, f: &Signature, s: usize) -> Result<[(usize, usize); 4]> {
    if s == 0 {
        let v = b.vertex("=4", Signature::equality(4)?);
        return Ok([(v, 0), (v, 1), (v, 2), (v, 3)]);
    }
    let copies: Vec<usize> = (0..s).map(|_| b.vertex("f", f.clone())).collect();
    for w in copies.windows(2) {
        b.edge((w[0], 2), (w[1], 0)).edge((w[0], 3), (w[1], 1));
    }
    let (first, last) = (copies[0], copies[s - 1]);
    Ok([(first, 0), (first, 1), (last, 2), (last, 3)])
}

/// Target grid with three occurrences, each a chain of the given length.
fn target(f: &Signature, s: usize) -> Result<SignatureGrid> {
    let mut b = GridBuilder::new();
    let e: Vec<[(usize, usize); 4]> = (0..3).map(|_| place(&mut b, f, s)).collect::<Result<_>>()?;
    let h = b.vertex("h", Signature::symmetric_ints(&[1, 2, 1])?);
    let u = b.vertex("u", Signature::from_ints(1, &[1, 2])?);
    let w = b.vertex("w", Signature::from_ints(1, &[2, 1])?);
    b.edge(e[0][1], e[1][0])
        .edge(e[1][1], e[2][0])
        .edge(e[2][1], (h, 0))
        .edge((h, 1), e[0][0])
        .edge(e[0][2], e[1][3])
        .edge(e[1][2], e[2][3])
        .edge(e[2][2], (u, 0))
        .edge(e[0][3], (w, 0));
    b.build()
}

/// Solve a square system over the field; `None` when singular.
fn solve(mut m: Vec<Vec<Scalar>>, mut rhs: Vec<Scalar>) -> Option<Vec<Scalar>> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        rhs.swap(c, p);
        let inv = m[c][c].inv().ok()?;
        for r in 0..n {
            if r == c || m[r][c].is_zero() {
                continue;
            }
            let factor = &m[r][c] * &inv;
            for k in c..n {
                let t = &factor * &m[c][k];
                m[r][k] = &m[r][k] - &t;
            }
            rhs[r] = &rhs[r] - &(&factor * &rhs[c]);
        }
    }
    Some((0..n).map(|r| &rhs[r] / &m[r][r]).collect())
}

/// Runs on the pair normal form of `f`; the interpolated target is then the
/// generalised equality |uu⟩+|ūū⟩ for the flip pattern u.
pub fn interpolation_demo(f: &Signature) -> Result<InterpolationDemo> {
    let (_, f) = pair_normal_form(f)?;
    let f = &f;
    let [a, b, c, d] = eq4_form(f)?;
    let det = &a * &d - &b * &c;
    if det.is_zero() {
        return Err(Error::RankDeficient(1));
    }
    if b.is_zero() && c.is_zero() && a == d {
        return Err(Error::Precondition("f is a multiple of =4; nothing to interpolate".into()));
    }
    let k = 3;
    let trace = &a + &d;
    // Mˢ = αₛ·M + βₛ·I by Cayley–Hamilton; keep s with distinct (α : β).
    let (mut alpha, mut beta) = (Scalar::one(), Scalar::zero());
    let mut powers = Vec::new();
    let mut coefficients: Vec<(Scalar, Scalar)> = Vec::new();
    for s in 1..=24 {
        let fresh = coefficients.iter().all(|(x, y)| !(x * &beta - y * &alpha).is_zero());
        if fresh {
            powers.push(s);
            coefficients.push((alpha.clone(), beta.clone()));
            if powers.len() == k + 1 {
                break;
            }
        }
        let next_alpha = &alpha * &trace + &beta;
        beta = -(&alpha * &det);
        alpha = next_alpha;
    }
    if powers.len() < k + 1 {
        return Err(Error::Precondition("powers of the gadget repeat before the system is determined".into()));
    }
    let mut values = Vec::new();
    for &s in &powers {
        values.push(holant(&target(f, s)?)?);
    }
    let rows: Vec<Vec<Scalar>> = coefficients
        .iter()
        .map(|(x, y)| (0..=k).map(|j| x.pow(j as i64).expect("non-negative") * y.pow((k - j) as i64).expect("non-negative")).collect())
        .collect();
    let z = solve(rows, values.clone()).ok_or(Error::RankDeficient(k))?;
    let expected = holant(&target(f, 0)?)?;
    Ok(InterpolationDemo { occurrences: k, powers, coefficients, values, recovered: z[0].clone(), expected })
}

/// Smallest r ≤ 24 with Mʳ a multiple of the identity, where M is the
/// coefficient matrix of the pair normal form. A chain of r copies is then a
/// generalised equality without interpolation.
pub fn power_period(f: &Signature) -> Result<Option<usize>> {
    let (_, g) = pair_normal_form(f)?;
    let [a, b, c, d] = eq4_form(&g)?;
    let det = &a * &d - &b * &c;
    if det.is_zero() {
        return Err(Error::RankDeficient(if f.is_zero() { 0 } else { 1 }));
    }
    let trace = &a + &d;
    let (mut alpha, mut beta) = (Scalar::one(), Scalar::zero());
    for r in 1..=24 {
        if alpha.is_zero() || (b.is_zero() && c.is_zero() && a == d) {
            return Ok(Some(r));
        }
        let next_alpha = &alpha * &trace + &beta;
        beta = -(&alpha * &det);
        alpha = next_alpha;
    }
    Ok(None)
}

/// Terminal steps establishing hardness from a 4-ary signature of the
/// interpolation form, referenced as `subject`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eq4Fragment {
    pub steps: Vec<ReductionStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demo: Option<InterpolationDemo>,
}

pub fn interpolate_eq4_reduction(f: &Signature, subject: &str) -> Result<Eq4Fragment> {
    let (mask, g) = pair_normal_form(f)?;
    let [a, b, c, d] = eq4_form(&g)?;
    if (&a * &d - &b * &c).is_zero() {
        let rank = if f.is_zero() { 0 } else { 1 };
        return Err(Error::RankDeficient(rank));
    }
    if is_generalised_equality(f) {
        return Ok(Eq4Fragment { steps: vec![generalized_eq4_reduction(f, subject)?], demo: None });
    }
    let demo = interpolation_demo(f)?;
    let mut step = ReductionStep::terminal(
        Terminal::Equality4Interpolation,
        vec![subject.to_string()],
        "=4 is interpolated from powers of the subject, after which the generalised equality terminal applies",
    );
    step.params.insert("matrix".into(), format!("[[{a}, {b}], [{c}, {d}]]"));
    step.params.insert("pair_flip".into(), format_bits(mask, 2));
    step.params.insert("demo_powers".into(), format!("{:?}", demo.powers));
    step.params.insert("demo_holant".into(), demo.expected.to_string());
    Ok(Eq4Fragment { steps: vec![step], demo: Some(demo) })
}

/// Support is a complementary pair with both values non-zero.
pub fn is_generalised_equality(f: &Signature) -> bool {
    let s = f.support();
    f.arity() > 0 && s.len() == 2 && s[0] ^ s[1] == (1 << f.arity()) - 1
}

pub fn generalized_eq4_reduction(f: &Signature, subject: &str) -> Result<ReductionStep> {
    if f.arity() != 4 {
        return Err(Error::WrongArity { expected: 4, got: f.arity() });
    }
    if !is_generalised_equality(f) {
        let s = f.support();
        let why = if s.len() == 2 {
            format!(
                "{} and {} are at distance {}",
                format_bits(s[0], 4),
                format_bits(s[1], 4),
                (s[0] ^ s[1]).count_ones()
            )
        } else {
            format!("support has {} strings", s.len())
        };
        return Err(Error::WrongSupport(why));
    }
    Ok(ReductionStep::terminal(
        Terminal::GeneralisedEquality4,
        vec![subject.to_string()],
        "a 4-ary generalised equality reduces the problem from #CSP2 with pins",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket4(entries: &[(usize, i64)]) -> Signature {
        let mut v = vec![0; 16];
        for &(i, x) in entries {
            v[i] = x;
        }
        Signature::from_ints(4, &v).unwrap()
    }

    #[test]
    fn trivial_fragment_for_eq4() {
        let frag = interpolate_eq4_reduction(&Signature::equality(4).unwrap(), "set:0").unwrap();
        assert!(frag.demo.is_none());
        assert_eq!(frag.steps[0].terminal, Some(Terminal::GeneralisedEquality4));
    }

    #[test]
    fn jordan_block_demo() {
        // a=1, b=1, c=0, d=1: Mˢ = [[1, s], [0, 1]].
        let f = ket4(&[(0, 1), (3, 1), (15, 1)]);
        let demo = interpolation_demo(&f).unwrap();
        assert_eq!(demo.powers, vec![1, 2, 3, 4]);
        assert_eq!(demo.recovered, demo.expected);
        // All three =₄ force one value per occurrence: Σ_e h(e,e)·u(e)·w(e) = 2 + 2.
        assert_eq!(demo.expected, Scalar::from_int(4));
        let frag = interpolate_eq4_reduction(&f, "step:2").unwrap();
        assert_eq!(frag.steps[0].terminal, Some(Terminal::Equality4Interpolation));
    }

    #[test]
    fn rank_one_rejected() {
        let f = ket4(&[(0, 1), (3, 2), (12, 2), (15, 4)]);
        assert_eq!(interpolate_eq4_reduction(&f, "x"), Err(Error::RankDeficient(1)));
    }

    #[test]
    fn generalised_equality_shapes() {
        assert!(generalized_eq4_reduction(&Signature::equality(4).unwrap(), "s").is_ok());
        assert!(generalized_eq4_reduction(&ket4(&[(3, 1), (12, 3)]), "s").is_ok());
        let bad = ket4(&[(0, 1), (7, 1)]);
        match generalized_eq4_reduction(&bad, "s") {
            Err(Error::WrongSupport(msg)) => assert!(msg.contains("distance 3")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn relabelled_pairs() {
        // |0101⟩ + |0110⟩ + |1010⟩: flip pattern 01 gives |0000⟩ + |0011⟩ + |1111⟩.
        let f = ket4(&[(5, 1), (6, 1), (10, 1)]);
        let (mask, g) = pair_normal_form(&f).unwrap();
        assert_eq!(mask, 1);
        assert_eq!(g, ket4(&[(0, 1), (3, 1), (15, 1)]));
        let demo = interpolation_demo(&f).unwrap();
        assert_eq!(demo.recovered, demo.expected);
        assert!(pair_normal_form(&ket4(&[(0, 1), (5, 1)])).is_err());
    }

    #[test]
    fn repeating_powers_reported() {
        // [[1, 1], [-2, -1]] squares to a multiple of the identity.
        let f = ket4(&[(0, 1), (3, 1), (12, -2), (15, -1)]);
        assert!(matches!(interpolation_demo(&f), Err(Error::Precondition(_))));
    }

    #[test]
    fn periods() {
        assert_eq!(power_period(&ket4(&[(0, 1), (3, 1), (12, -2), (15, -1)])).unwrap(), Some(2));
        assert_eq!(power_period(&ket4(&[(0, 1), (15, 1)])).unwrap(), Some(1));
        assert_eq!(power_period(&ket4(&[(0, 1), (3, 1), (15, 1)])).unwrap(), None);
    }

    #[test]
    fn solver_inverts() {
        let m = vec![
            vec![Scalar::from_int(2), Scalar::i()],
            vec![Scalar::one(), Scalar::from_int(3)],
        ];
        let x = vec![Scalar::from_int(5), -Scalar::i()];
        let rhs: Vec<Scalar> = m.iter().map(|r| &(&r[0] * &x[0]) + &(&r[1] * &x[1])).collect();
        assert_eq!(solve(m, rhs).unwrap(), x);
    }
}
