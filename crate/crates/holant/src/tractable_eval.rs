//! Polynomial-time Holant evaluation for ⟨𝒯⟩, (transformed) ⟨ℰ⟩ and affine
//! grids.

use std::collections::VecDeque;

use crate::algebra::{Mat2, Scalar};
use crate::error::{Error, Result};
use crate::families::{in_e, is_affine, AffineForm, Family};
use crate::grid::{make_bipartite, transform_bipartite, SignatureGrid};
use crate::signature::{Factor, Signature};

/// A tensor factor of a vertex, with its legs as edge ids.
struct Piece {
    sig: Signature,
    legs: Vec<usize>,
}

/// Split every vertex into its tensor factors. Returns the pieces, the
/// product of arity-0 vertex values, and `None` for the pieces if some
/// vertex is identically zero.
fn split_grid(g: &SignatureGrid) -> Result<(Option<Vec<Piece>>, Scalar)> {
    if !g.dangling().is_empty() {
        return Err(Error::DanglingEdges);
    }
    let mut slot_edge: Vec<Vec<usize>> = g.vertices().iter().map(|v| vec![0; v.sig.arity()]).collect();
    for (e, &((a, sa), (b, sb))) in g.edges().iter().enumerate() {
        slot_edge[a][sa] = e;
        slot_edge[b][sb] = e;
    }
    let mut pieces = Vec::new();
    let mut scalar = Scalar::one();
    for (v, vert) in g.vertices().iter().enumerate() {
        if vert.sig.is_zero() {
            return Ok((None, Scalar::zero()));
        }
        if vert.sig.arity() == 0 {
            scalar *= vert.sig.value(0);
            continue;
        }
        for Factor { slots, sig } in vert.sig.factorize()? {
            let legs = slots.iter().map(|&s| slot_edge[v][s]).collect();
            pieces.push(Piece { sig, legs });
        }
    }
    Ok((Some(pieces), scalar))
}

/// Edge id → the (piece, leg position) pairs at its two ends.
fn edge_ends(pieces: &[Piece], edges: usize) -> Vec<Vec<(usize, usize)>> {
    let mut ends = vec![Vec::with_capacity(2); edges];
    for (p, piece) in pieces.iter().enumerate() {
        for (pos, &e) in piece.legs.iter().enumerate() {
            ends[e].push((p, pos));
        }
    }
    ends
}

type Mat = [[Scalar; 2]; 2];

/// Transfer matrix of a binary piece entered through leg `inp`.
fn transfer(piece: &Piece, inp: usize) -> Mat {
    let v = piece.sig.values();
    let at = |a: usize, b: usize| if inp == 0 { v[2 * a + b].clone() } else { v[2 * b + a].clone() };
    [[at(0, 0), at(0, 1)], [at(1, 0), at(1, 1)]]
}

fn vec_mat(x: &[Scalar; 2], m: &Mat) -> [Scalar; 2] {
    [&x[0] * &m[0][0] + &x[1] * &m[1][0], &x[0] * &m[0][1] + &x[1] * &m[1][1]]
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let e = |r: usize, c: usize| &a[r][0] * &b[0][c] + &a[r][1] * &b[1][c];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

/// Holant of a grid whose signatures all lie in ⟨𝒯⟩: the split grid is a
/// union of paths and cycles, evaluated by 2×2 chain products and traces.
pub fn eval_t_closure(g: &SignatureGrid) -> Result<Scalar> {
    let (pieces, mut total) = split_grid(g)?;
    let Some(pieces) = pieces else { return Ok(Scalar::zero()) };
    if let Some(p) = pieces.iter().find(|p| p.sig.arity() > 2) {
        return Err(Error::NotInFamily(format!("factor {} has arity {} > 2", p.sig, p.sig.arity())));
    }
    let ends = edge_ends(&pieces, g.edges().len());
    let other_end = |e: usize, me: (usize, usize)| -> (usize, usize) {
        let pair = &ends[e];
        if pair[0] == me { pair[1] } else { pair[0] }
    };
    let mut seen = vec![false; pieces.len()];
    // Paths start and end at unary pieces.
    for start in 0..pieces.len() {
        if seen[start] || pieces[start].sig.arity() != 1 {
            continue;
        }
        seen[start] = true;
        let v = pieces[start].sig.values();
        let mut x = [v[0].clone(), v[1].clone()];
        let mut at = other_end(pieces[start].legs[0], (start, 0));
        loop {
            let (p, pos) = at;
            seen[p] = true;
            let piece = &pieces[p];
            if piece.sig.arity() == 1 {
                let u = piece.sig.values();
                total = total * (&x[0] * &u[0] + &x[1] * &u[1]);
                break;
            }
            x = vec_mat(&x, &transfer(piece, pos));
            let out = 1 - pos;
            at = other_end(piece.legs[out], (p, out));
        }
    }
    // What is left are cycles of binary pieces.
    for start in 0..pieces.len() {
        if seen[start] {
            continue;
        }
        let mut m: Mat = [[Scalar::one(), Scalar::zero()], [Scalar::zero(), Scalar::one()]];
        let mut at = (start, 0);
        loop {
            let (p, pos) = at;
            seen[p] = true;
            m = mat_mul(&m, &transfer(&pieces[p], pos));
            let out = 1 - pos;
            at = other_end(pieces[p].legs[out], (p, out));
            if at.0 == start {
                break;
            }
        }
        total = total * (&m[0][0] + &m[1][1]);
    }
    Ok(total)
}

/// Holant of a grid whose signatures lie in ⟨ℰ⟩, or in ⟨m∘ℰ⟩ when `m` is
/// given (evaluated on the bipartite form transformed by m⁻¹).
pub fn eval_e_closure(g: &SignatureGrid, m: Option<&Mat2>) -> Result<Scalar> {
    let grid = match m {
        None => g.clone(),
        Some(m) => {
            let bip = if g.sides().is_some() { g.clone() } else { make_bipartite(g)? };
            transform_bipartite(&bip, &m.invert()?)?
        }
    };
    let (pieces, mut total) = split_grid(&grid)?;
    let Some(pieces) = pieces else { return Ok(Scalar::zero()) };
    // For each piece: a support string w and the values at w and w̄.
    let mut pattern: Vec<(Vec<u8>, [Scalar; 2])> = Vec::with_capacity(pieces.len());
    for p in &pieces {
        if !in_e(&p.sig)? {
            return Err(Error::NotInFamily(format!("factor {} is outside E", p.sig)));
        }
        let n = p.sig.arity();
        let w = p.sig.support()[0];
        let wbar = w ^ ((1 << n) - 1);
        pattern.push((p.sig.index_bits(w), [p.sig.value(w).clone(), p.sig.value(wbar).clone()]));
    }
    let ends = edge_ends(&pieces, grid.edges().len());
    // Neighbours of each piece with the parity linking their choices.
    let mut adj: Vec<Vec<(usize, u8)>> = vec![Vec::new(); pieces.len()];
    for pair in &ends {
        let ((a, pa), (b, pb)) = (pair[0], pair[1]);
        let parity = pattern[a].0[pa] ^ pattern[b].0[pb];
        adj[a].push((b, parity));
        adj[b].push((a, parity));
    }
    let mut choice: Vec<Option<u8>> = vec![None; pieces.len()];
    for root in 0..pieces.len() {
        if choice[root].is_some() {
            continue;
        }
        choice[root] = Some(0);
        let mut members = vec![root];
        let mut consistent = true;
        let mut queue = VecDeque::from([root]);
        while let Some(p) = queue.pop_front() {
            let cp = choice[p].expect("visited");
            for &(q, parity) in &adj[p] {
                match choice[q] {
                    None => {
                        choice[q] = Some(cp ^ parity);
                        members.push(q);
                        queue.push_back(q);
                    }
                    Some(cq) if cq != cp ^ parity => consistent = false,
                    Some(_) => {}
                }
            }
        }
        if !consistent {
            return Ok(Scalar::zero());
        }
        let branch = |flip: u8| -> Scalar {
            members
                .iter()
                .map(|&p| pattern[p].1[(choice[p].expect("visited") ^ flip) as usize].clone())
                .product()
        };
        total = total * (branch(0) + branch(1));
        if total.is_zero() {
            return Ok(total);
        }
    }
    Ok(total)
}

/// An affine function over GF(2): constant bit plus a set of variables.
#[derive(Clone, Debug)]
struct AffineExpr {
    konst: u8,
    vars: Vec<usize>,
}

/// `Σ lin[v]·y_v + 2·Σ_{v<w} quad[v][w]·y_v·y_w + konst` over ℤ₄.
struct QuadForm {
    lin: Vec<u8>,
    quad: Vec<Vec<bool>>,
    konst: u8,
    alive: Vec<bool>,
}

impl QuadForm {
    fn new(n: usize) -> Self {
        QuadForm { lin: vec![0; n], quad: vec![vec![false; n]; n], konst: 0, alive: vec![true; n] }
    }

    fn add_lin(&mut self, v: usize, c: u8) {
        self.lin[v] = (self.lin[v] + c) % 4;
    }

    /// Add `2·y_a·y_b` (which is `2·y_a` when a = b).
    fn add_cross(&mut self, a: usize, b: usize) {
        if a == b {
            self.add_lin(a, 2);
        } else {
            self.quad[a][b] ^= true;
            self.quad[b][a] ^= true;
        }
    }

    /// Add `c·e` where e is the ℤ₄ lift of the parity expression.
    /// Uses `x₁ ⊕ … ⊕ x_r = Σ xⱼ − 2·Σ_{j<k} xⱼxₖ (mod 4)` and `1 ⊕ p = 1 − p`.
    fn add_scaled_parity(&mut self, c: u8, e: &AffineExpr) {
        let c = c % 4;
        if c == 0 {
            return;
        }
        let sign = if e.konst == 1 { 4 - c } else { c };
        if e.konst == 1 {
            self.konst = (self.konst + c) % 4;
        }
        for &v in &e.vars {
            self.add_lin(v, sign);
        }
        if c % 2 == 1 {
            for (j, &a) in e.vars.iter().enumerate() {
                for &b in &e.vars[j + 1..] {
                    self.add_cross(a, b);
                }
            }
        }
    }

    /// Add `2·e₁·e₂` for two parity expressions.
    fn add_double_product(&mut self, e1: &AffineExpr, e2: &AffineExpr) {
        if e1.konst == 1 && e2.konst == 1 {
            self.konst = (self.konst + 2) % 4;
        }
        if e1.konst == 1 {
            for &v in &e2.vars {
                self.add_lin(v, 2);
            }
        }
        if e2.konst == 1 {
            for &v in &e1.vars {
                self.add_lin(v, 2);
            }
        }
        for &a in &e1.vars {
            for &b in &e2.vars {
                self.add_cross(a, b);
            }
        }
    }

    /// Σ over all assignments of the live variables of i^{form}.
    fn gauss_sum(mut self) -> Scalar {
        let n = self.lin.len();
        let mut factor = Scalar::one();
        for v in 0..n {
            if !self.alive[v] {
                continue;
            }
            self.alive[v] = false;
            let partners: Vec<usize> = (0..n).filter(|&w| self.alive[w] && self.quad[v][w]).collect();
            for &w in &partners {
                self.quad[v][w] = false;
                self.quad[w][v] = false;
            }
            let l = self.lin[v];
            if partners.is_empty() {
                factor = factor * (Scalar::one() + Scalar::i_pow(l as i64));
            } else if l % 2 == 1 {
                // 1 + i^l·(−1)^{p} = (1 + i^l)·i^{−l·p}
                factor = factor * (Scalar::one() + Scalar::i_pow(l as i64));
                let e = AffineExpr { konst: 0, vars: partners };
                self.add_scaled_parity(4 - l, &e);
            } else {
                // Σ_y (−1)^{y·(l/2 + p)} = 2·[p = l/2]: solve for the first partner.
                factor = factor * Scalar::from_int(2);
                let w0 = partners[0];
                let e = AffineExpr { konst: l / 2, vars: partners[1..].to_vec() };
                self.alive[w0] = false;
                let lw = self.lin[w0];
                let w_partners: Vec<usize> = (0..n).filter(|&x| self.alive[x] && self.quad[w0][x]).collect();
                for &x in &w_partners {
                    self.quad[w0][x] = false;
                    self.quad[x][w0] = false;
                }
                self.add_scaled_parity(lw, &e);
                for x in w_partners {
                    let ex = AffineExpr { konst: 0, vars: vec![x] };
                    self.add_double_product(&ex, &e);
                }
            }
            if factor.is_zero() {
                return factor;
            }
        }
        factor * Scalar::i_pow(self.konst as i64)
    }
}

/// Holant of a grid of affine signatures by a global ℤ₄ Gauss sum.
pub fn eval_affine(g: &SignatureGrid) -> Result<Scalar> {
    if !g.dangling().is_empty() {
        return Err(Error::DanglingEdges);
    }
    let m = g.edges().len();
    let mut slot_edge: Vec<Vec<usize>> = g.vertices().iter().map(|v| vec![0; v.sig.arity()]).collect();
    for (e, &((a, sa), (b, sb))) in g.edges().iter().enumerate() {
        slot_edge[a][sa] = e;
        slot_edge[b][sb] = e;
    }
    let mut forms: Vec<AffineForm> = Vec::new();
    let mut prefactor = Scalar::one();
    for v in g.vertices() {
        if v.sig.is_zero() {
            return Ok(Scalar::zero());
        }
        let form = is_affine(&v.sig)?
            .ok_or_else(|| Error::NotInFamily(format!("vertex {} = {} is not affine", v.name, v.sig)))?;
        prefactor *= &form.prefactor;
        forms.push(form);
    }
    // Linear constraints on edge bits: rows of m coefficient bits plus rhs.
    let mut rows: Vec<(Vec<bool>, bool)> = Vec::new();
    let pivots_of = |form: &AffineForm| -> Vec<usize> {
        form.basis.iter().map(|r| r.iter().position(|&b| b == 1).expect("non-zero basis row")).collect()
    };
    for (v, form) in forms.iter().enumerate() {
        let piv = pivots_of(form);
        for s in 0..form.arity {
            if piv.contains(&s) {
                continue;
            }
            let mut row = vec![false; m];
            row[slot_edge[v][s]] ^= true;
            for (j, &p) in piv.iter().enumerate() {
                if form.basis[j][s] == 1 {
                    row[slot_edge[v][p]] ^= true;
                }
            }
            rows.push((row, form.offset[s] == 1));
        }
    }
    // Reduced row echelon form.
    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..m {
        let Some(p) = (r..rows.len()).find(|&k| rows[k].0[c]) else { continue };
        rows.swap(r, p);
        for k in 0..rows.len() {
            if k != r && rows[k].0[c] {
                let (src, rhs) = (rows[r].0.clone(), rows[r].1);
                for (x, y) in rows[k].0.iter_mut().zip(&src) {
                    *x ^= y;
                }
                rows[k].1 ^= rhs;
            }
        }
        pivot_col_of_row.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|(_, rhs)| *rhs) {
        return Ok(Scalar::zero());
    }
    let free: Vec<usize> = (0..m).filter(|c| !pivot_col_of_row.contains(c)).collect();
    let var_of = |c: usize| free.iter().position(|&f| f == c).expect("free column");
    let mut expr: Vec<AffineExpr> = (0..m).map(|_| AffineExpr { konst: 0, vars: vec![] }).collect();
    for &c in &free {
        expr[c].vars.push(var_of(c));
    }
    for (k, &c) in pivot_col_of_row.iter().enumerate() {
        let (row, rhs) = &rows[k];
        expr[c] = AffineExpr {
            konst: *rhs as u8,
            vars: free.iter().enumerate().filter(|(_, &f)| row[f]).map(|(j, _)| j).collect(),
        };
    }
    let mut q = QuadForm::new(free.len());
    for (v, form) in forms.iter().enumerate() {
        let piv = pivots_of(form);
        let t: Vec<&AffineExpr> = piv.iter().map(|&p| &expr[slot_edge[v][p]]).collect();
        for (j, tj) in t.iter().enumerate() {
            q.add_scaled_parity(form.linear[j], tj);
            for (k, tk) in t.iter().enumerate().skip(j + 1) {
                if form.quadratic[j][k] == 1 {
                    q.add_double_product(tj, tk);
                }
            }
        }
    }
    Ok(prefactor * q.gauss_sum())
}

/// Which evaluator [`eval_family`] used.
pub fn detect_family(g: &SignatureGrid) -> Result<Option<Family>> {
    let mut t_ok = true;
    let mut e_ok = true;
    let mut a_ok = true;
    for v in g.vertices() {
        if v.sig.is_zero() || v.sig.arity() == 0 {
            continue;
        }
        let factors = v.sig.factorize()?;
        t_ok &= factors.iter().all(|f| f.sig.arity() <= 2);
        e_ok &= factors.iter().all(|f| in_e(&f.sig).unwrap_or(false));
        a_ok &= is_affine(&v.sig)?.is_some();
    }
    Ok(if t_ok {
        Some(Family::T)
    } else if e_ok {
        Some(Family::OE)
    } else if a_ok {
        Some(Family::A)
    } else {
        None
    })
}

/// Evaluate with the first applicable algorithm among ⟨𝒯⟩, ⟨ℰ⟩, 𝒜.
pub fn eval_family(g: &SignatureGrid) -> Result<(Family, Scalar)> {
    match detect_family(g)? {
        Some(Family::T) => Ok((Family::T, eval_t_closure(g)?)),
        Some(Family::OE) => Ok((Family::OE, eval_e_closure(g, None)?)),
        Some(Family::A) => Ok((Family::A, eval_affine(g)?)),
        _ => Err(Error::NotInFamily("the grid is neither in <T>, <E> nor A".into())),
    }
}
