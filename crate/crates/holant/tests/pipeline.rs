//! The hardness pipeline on structured inputs that reach every branch.

mod common;

use common::*;
use holant::dichotomy::{classify_holant_c, verify_certificate, StepKind, Terminal, Verdict};
use holant::{Mat2, Scalar, Signature};
use rand::Rng;

fn local(f: &Signature, ms: &[Mat2]) -> Signature {
    ms.iter().enumerate().fold(f.clone(), |g, (s, m)| g.apply_local(s, m).unwrap())
}

/// Classify, require a verifying certificate for Hard, and return the verdict.
fn checked(set: &[Signature]) -> Verdict {
    let v = classify_holant_c(set, None).unwrap_or_else(|e| panic!("{set:?}: {e}"));
    match &v {
        Verdict::Hard { certificate } => {
            let rep = verify_certificate(certificate, set);
            assert!(rep.ok, "{set:?}: {rep}");
        }
        Verdict::Unknown { reason } => panic!("{set:?}: unknown: {reason}"),
        Verdict::Tractable { .. } => {}
    }
    v
}

fn terminal(v: &Verdict) -> Option<Terminal> {
    v.certificate().and_then(|c| c.steps.last()).and_then(|s| s.terminal)
}

#[test]
fn asymmetric_ternaries() {
    let mut r = rng(11);
    for base in [Signature::w(), Signature::ghz()] {
        for _ in 0..12 {
            let ms: Vec<Mat2> = (0..3).map(|_| invertible(&mut r)).collect();
            checked(&[local(&base, &ms)]);
        }
    }
}

#[test]
fn km_ternaries_with_outside_witness() {
    let mut r = rng(12);
    let mut saw_unaries = false;
    for _ in 0..16 {
        let mut v = vec![Scalar::zero(); 8];
        v[0] = Scalar::from_int(r.gen_range(-2..3));
        for k in [1, 2, 4] {
            v[k] = Scalar::from_int(r.gen_range(1..3));
        }
        let f = Signature::new(3, v).unwrap().transform(&Mat2::k());
        let n = r.gen_range(2..5);
        let g = signature(&mut r, n);
        let v = checked(&[f, g]);
        if let Some(c) = v.certificate() {
            saw_unaries |= c.steps.iter().any(|s| s.kind == StepKind::ApplyUnary);
        }
    }
    assert!(saw_unaries, "no run needed the slot-by-slot unary search");
}

#[test]
fn four_ary_pair_forms() {
    let mut r = rng(13);
    let mut terminals = Vec::new();
    for _ in 0..20 {
        let mut v = vec![Scalar::zero(); 16];
        for k in [0, 3, 12, 15] {
            v[k] = entry(&mut r);
        }
        let f = Signature::new(4, v).unwrap();
        if f.is_zero() {
            continue;
        }
        terminals.push(terminal(&checked(&[f])));
    }
    assert!(terminals.contains(&Some(Terminal::Equality4Interpolation)));
}

#[test]
fn sparse_higher_arity() {
    let mut r = rng(14);
    for n in [4usize, 5, 6] {
        for _ in 0..15 {
            let mut v = vec![Scalar::zero(); 1 << n];
            let base = r.gen_range(0..1usize << n);
            for _ in 0..r.gen_range(2..5) {
                let mut x = base;
                for _ in 0..r.gen_range(1..3) {
                    x ^= 1 << r.gen_range(0..n);
                }
                v[x] = nonzero(&mut r);
            }
            v[base] = Scalar::one();
            checked(&[Signature::new(n, v).unwrap()]);
        }
    }
}

#[test]
fn distance_relabelled_interpolation() {
    // D₀ = 2 with anchor |01⟩+|10⟩; the 4-ary form is a pair form only after
    // flipping one bit in each pair.
    let mut v = vec![Scalar::zero(); 32];
    v[0b01110] = Scalar::one();
    v[0b10011] = -Scalar::i();
    v[0b11010] = Scalar::one();
    let set = [Signature::new(5, v).unwrap()];
    assert!(terminal(&checked(&set)).is_some());
}
