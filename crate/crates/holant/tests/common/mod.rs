//! Random generators shared by the integration tests.
#![allow(dead_code)]

use holant::families::AffineForm;
use holant::grid::{GridBuilder, Side, SignatureGrid};
use holant::signature::assemble;
use holant::{Factor, Mat2, Scalar, Signature};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Entry from {0, ±1, ±i, ζ}.
pub fn entry(r: &mut Rng8) -> Scalar {
    match r.gen_range(0..6) {
        0 => Scalar::zero(),
        1 => Scalar::one(),
        2 => -Scalar::one(),
        3 => Scalar::i(),
        4 => -Scalar::i(),
        _ => Scalar::zeta(),
    }
}

/// Non-zero entry with small rationals and ζ powers.
pub fn nonzero(r: &mut Rng8) -> Scalar {
    let base = Scalar::from_ratio(r.gen_range(1..4) * if r.gen_bool(0.5) { 1 } else { -1 }, r.gen_range(1..3));
    base * Scalar::zeta_pow(r.gen_range(0..8))
}

pub fn signature(r: &mut Rng8, arity: usize) -> Signature {
    loop {
        let s = Signature::new(arity, (0..1 << arity).map(|_| entry(r)).collect()).unwrap();
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn invertible(r: &mut Rng8) -> Mat2 {
    loop {
        let pick = |r: &mut Rng8| match r.gen_range(0..4) {
            0 => Scalar::zero(),
            1 => Scalar::from_int(r.gen_range(-2..3)),
            2 => Scalar::zeta_pow(r.gen_range(0..8)),
            _ => Scalar::from_ratio(r.gen_range(-3..4), 2),
        };
        let m = Mat2::new(pick(r), pick(r), pick(r), pick(r));
        if m.is_invertible() {
            return m;
        }
    }
}

/// Random arities summing to an even total of at most `2 * max_edges`.
fn arities(r: &mut Rng8, max_edges: usize, max_arity: usize) -> Vec<usize> {
    loop {
        let n = r.gen_range(1..6);
        let a: Vec<usize> = (0..n).map(|_| r.gen_range(1..=max_arity)).collect();
        let total: usize = a.iter().sum();
        if total.is_multiple_of(2) && total <= 2 * max_edges {
            return a;
        }
    }
}

/// Closed grid on the given vertex signatures with a random perfect
/// matching of the ports.
pub fn closed_grid(r: &mut Rng8, sigs: Vec<Signature>) -> SignatureGrid {
    let mut b = GridBuilder::new();
    let mut ports = Vec::new();
    for (k, s) in sigs.into_iter().enumerate() {
        let n = s.arity();
        let v = b.vertex(&format!("v{k}"), s);
        ports.extend((0..n).map(|slot| (v, slot)));
    }
    ports.shuffle(r);
    for pair in ports.chunks(2) {
        b.edge(pair[0], pair[1]);
    }
    b.build().unwrap()
}

/// Closed grid with at most `max_edges` edges and random signatures.
pub fn random_grid(r: &mut Rng8, max_edges: usize) -> SignatureGrid {
    let sigs = arities(r, max_edges, 4).into_iter().map(|n| signature(r, n)).collect();
    closed_grid(r, sigs)
}

/// Grid with a fixed vertex-signature generator.
pub fn grid_with(r: &mut Rng8, max_edges: usize, mut gen: impl FnMut(&mut Rng8, usize) -> Signature) -> SignatureGrid {
    let sigs = arities(r, max_edges, 4).into_iter().map(|n| gen(r, n)).collect();
    closed_grid(r, sigs)
}

/// Random bipartite grid: every edge joins an L port to an R port.
pub fn bipartite_grid(r: &mut Rng8, max_edges: usize) -> SignatureGrid {
    loop {
        let left: Vec<usize> = (0..r.gen_range(1..4)).map(|_| r.gen_range(1..4)).collect();
        let right: Vec<usize> = (0..r.gen_range(1..4)).map(|_| r.gen_range(1..4)).collect();
        let total: usize = left.iter().sum();
        if total != right.iter().sum::<usize>() || total > max_edges {
            continue;
        }
        let mut b = GridBuilder::new();
        let mut lp = Vec::new();
        let mut rp = Vec::new();
        for (k, &n) in left.iter().enumerate() {
            let v = b.sided_vertex(&format!("l{k}"), signature(r, n), Side::L);
            lp.extend((0..n).map(|s| (v, s)));
        }
        for (k, &n) in right.iter().enumerate() {
            let v = b.sided_vertex(&format!("r{k}"), signature(r, n), Side::R);
            rp.extend((0..n).map(|s| (v, s)));
        }
        rp.shuffle(r);
        for (a, c) in lp.into_iter().zip(rp) {
            b.edge(a, c);
        }
        return b.build().unwrap();
    }
}

/// Tensor product of random unary and binary factors on shuffled slots.
pub fn t_signature(r: &mut Rng8, arity: usize) -> Signature {
    let mut slots: Vec<usize> = (0..arity).collect();
    slots.shuffle(r);
    let mut factors = Vec::new();
    let mut rest = &slots[..];
    while !rest.is_empty() {
        let k = if rest.len() >= 2 && r.gen_bool(0.6) { 2 } else { 1 };
        factors.push(Factor { slots: rest[..k].to_vec(), sig: signature(r, k) });
        rest = &rest[k..];
    }
    assemble(&factors, arity).unwrap()
}

/// a|x⟩ + b|x̄⟩ on all slots.
pub fn generalised_equality(r: &mut Rng8, arity: usize) -> Signature {
    let x = r.gen_range(0..1usize << arity);
    let mut v = vec![Scalar::zero(); 1 << arity];
    v[x] = nonzero(r);
    let y = x ^ ((1 << arity) - 1);
    v[y] = if r.gen_bool(0.2) { Scalar::zero() } else { nonzero(r) };
    Signature::new(arity, v).unwrap()
}

/// Product of generalised equalities on shuffled slots.
pub fn e_signature(r: &mut Rng8, arity: usize) -> Signature {
    let mut slots: Vec<usize> = (0..arity).collect();
    slots.shuffle(r);
    let mut factors = Vec::new();
    let mut rest = &slots[..];
    while !rest.is_empty() {
        let k = r.gen_range(1..=rest.len());
        factors.push(Factor { slots: rest[..k].to_vec(), sig: generalised_equality(r, k) });
        rest = &rest[k..];
    }
    assemble(&factors, arity).unwrap()
}

/// Random affine signature: prefactor · i^{linear + 2·quadratic} on a coset.
pub fn affine_signature(r: &mut Rng8, arity: usize) -> Signature {
    let dim = r.gen_range(0..=arity);
    let mut pivots: Vec<usize> = (0..arity).collect();
    pivots.shuffle(r);
    let mut pivots = pivots[..dim].to_vec();
    pivots.sort_unstable();
    let basis: Vec<Vec<u8>> = pivots
        .iter()
        .map(|&p| {
            (0..arity)
                .map(|c| if c == p { 1 } else if c > p && !pivots.contains(&c) { r.gen_range(0..2) } else { 0 })
                .collect()
        })
        .collect();
    let form = AffineForm {
        arity,
        offset: (0..arity).map(|_| r.gen_range(0..2)).collect(),
        basis,
        linear: (0..dim).map(|_| r.gen_range(0..4)).collect(),
        quadratic: (0..dim).map(|_| (0..dim).map(|_| r.gen_range(0..2)).collect()).collect(),
        prefactor: Scalar::zeta_pow(r.gen_range(0..8)) * Scalar::from_int(r.gen_range(1..3)),
    };
    form.to_signature().unwrap()
}

pub fn k4_exact_one() -> SignatureGrid {
    let mut b = GridBuilder::new();
    let v: Vec<usize> = (0..4).map(|_| b.vertex("x1", Signature::exact_one(3).unwrap())).collect();
    let mut next = [0usize; 4];
    for i in 0..4 {
        for j in i + 1..4 {
            b.edge((v[i], next[i]), (v[j], next[j]));
            next[i] += 1;
            next[j] += 1;
        }
    }
    b.build().unwrap()
}

pub fn k33_exact_one() -> SignatureGrid {
    let mut b = GridBuilder::new();
    let l: Vec<usize> = (0..3).map(|_| b.vertex("x1", Signature::exact_one(3).unwrap())).collect();
    let rr: Vec<usize> = (0..3).map(|_| b.vertex("x1", Signature::exact_one(3).unwrap())).collect();
    for i in 0..3 {
        for j in 0..3 {
            b.edge((l[i], j), (rr[j], i));
        }
    }
    b.build().unwrap()
}
