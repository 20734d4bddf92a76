//! Signature grids: Holant values by enumeration and by contraction, gadget
//! signatures, and bipartite holographic transformations.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2, Scalar};
use crate::error::{Error, Result};
use crate::signature::{Signature, SignatureSpec, MAX_ARITY};

pub const BRUTE_FORCE_EDGE_LIMIT: usize = 24;
pub const GADGET_DANGLING_LIMIT: usize = 16;

/// A (vertex, slot) pair.
pub type Endpoint = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub sig: Signature,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignatureGrid {
    vertices: Vec<Vertex>,
    edges: Vec<(Endpoint, Endpoint)>,
    dangling: Vec<Endpoint>,
    sides: Option<Vec<Side>>,
}

impl SignatureGrid {
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<(Endpoint, Endpoint)>,
        dangling: Vec<Endpoint>,
        sides: Option<Vec<Side>>,
    ) -> Result<Self> {
        let g = SignatureGrid { vertices, edges, dangling, sides };
        g.validate()?;
        Ok(g)
    }

    pub fn empty() -> Self {
        SignatureGrid { vertices: vec![], edges: vec![], dangling: vec![], sides: None }
    }

    fn validate(&self) -> Result<()> {
        let mut used: Vec<Vec<u8>> = self.vertices.iter().map(|v| vec![0; v.sig.arity()]).collect();
        let mut mark = |(v, s): Endpoint| -> Result<()> {
            let slots = used
                .get_mut(v)
                .ok_or_else(|| Error::InvalidGrid(format!("vertex {v} does not exist")))?;
            let cell = slots
                .get_mut(s)
                .ok_or_else(|| Error::InvalidGrid(format!("vertex {v} has no slot {s}")))?;
            *cell += 1;
            Ok(())
        };
        for &(a, b) in &self.edges {
            mark(a)?;
            mark(b)?;
        }
        for &d in &self.dangling {
            mark(d)?;
        }
        for (v, slots) in used.iter().enumerate() {
            for (s, &n) in slots.iter().enumerate() {
                if n != 1 {
                    return Err(Error::InvalidGrid(format!(
                        "endpoint ({v}, {s}) is used {n} times, expected exactly once"
                    )));
                }
            }
        }
        if let Some(sides) = &self.sides {
            if sides.len() != self.vertices.len() {
                return Err(Error::InvalidGrid("one side tag per vertex required".into()));
            }
            for &((a, _), (b, _)) in &self.edges {
                if sides[a] == sides[b] {
                    return Err(Error::InvalidGrid(format!(
                        "edge between vertices {a} and {b} does not cross the bipartition"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(Endpoint, Endpoint)] {
        &self.edges
    }

    pub fn dangling(&self) -> &[Endpoint] {
        &self.dangling
    }

    pub fn sides(&self) -> Option<&[Side]> {
        self.sides.as_deref()
    }

    /// Same grid with each vertex signature replaced by `f(index, vertex)`.
    pub fn map_signatures(&self, mut f: impl FnMut(usize, &Vertex) -> Signature) -> Result<Self> {
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .map(|(k, v)| Vertex { name: v.name.clone(), sig: f(k, v) })
            .collect();
        SignatureGrid::new(vertices, self.edges.clone(), self.dangling.clone(), self.sides.clone())
    }

    /// Edge index of every (vertex, slot); `None` for dangling endpoints.
    fn slot_edges(&self) -> Vec<Vec<Option<usize>>> {
        let mut map: Vec<Vec<Option<usize>>> =
            self.vertices.iter().map(|v| vec![None; v.sig.arity()]).collect();
        for (e, &((a, sa), (b, sb))) in self.edges.iter().enumerate() {
            map[a][sa] = Some(e);
            map[b][sb] = Some(e);
        }
        map
    }
}

/// Incremental construction of a grid.
#[derive(Default, Clone, Debug)]
pub struct GridBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<(Endpoint, Endpoint)>,
    dangling: Vec<Endpoint>,
    sides: Vec<Side>,
    sided: bool,
}

impl GridBuilder {
    pub fn new() -> Self {
        GridBuilder::default()
    }

    pub fn vertex(&mut self, name: &str, sig: Signature) -> usize {
        self.vertices.push(Vertex { name: name.to_string(), sig });
        self.sides.push(Side::L);
        self.vertices.len() - 1
    }

    pub fn sided_vertex(&mut self, name: &str, sig: Signature, side: Side) -> usize {
        self.sided = true;
        let v = self.vertex(name, sig);
        self.sides[v] = side;
        v
    }

    pub fn edge(&mut self, a: Endpoint, b: Endpoint) -> &mut Self {
        self.edges.push((a, b));
        self
    }

    pub fn dangle(&mut self, e: Endpoint) -> &mut Self {
        self.dangling.push(e);
        self
    }

    pub fn build(self) -> Result<SignatureGrid> {
        let sides = if self.sided { Some(self.sides) } else { None };
        SignatureGrid::new(self.vertices, self.edges, self.dangling, sides)
    }
}

// ---------------------------------------------------------------------------
// Brute force

/// Sum over all edge assignments of the product of vertex values.
pub fn holant_bruteforce(g: &SignatureGrid) -> Result<Scalar> {
    if !g.dangling.is_empty() {
        return Err(Error::DanglingEdges);
    }
    let m = g.edges.len();
    if m > BRUTE_FORCE_EDGE_LIMIT {
        return Err(Error::EdgeLimit { edges: m, limit: BRUTE_FORCE_EDGE_LIMIT });
    }
    let slot_edges = g.slot_edges();
    let rows: Vec<(&Signature, Vec<usize>)> = g
        .vertices
        .iter()
        .zip(&slot_edges)
        .map(|(v, es)| (&v.sig, es.iter().map(|e| e.expect("no dangling")).collect()))
        .collect();
    let term = |sigma: usize| -> Option<Scalar> {
        let mut prod = Scalar::one();
        for (sig, es) in &rows {
            let idx = es.iter().fold(0usize, |acc, &e| (acc << 1) | ((sigma >> e) & 1));
            let v = sig.value(idx);
            if v.is_zero() {
                return None;
            }
            prod *= v;
        }
        Some(prod)
    };
    let total = 1usize << m;
    const CHUNK: usize = 1 << 10;
    if total <= CHUNK {
        return Ok((0..total).filter_map(term).sum());
    }
    let chunks = total / CHUNK;
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| (c * CHUNK..(c + 1) * CHUNK).filter_map(term).sum::<Scalar>())
        .reduce(Scalar::zero, |a, b| a + b))
}

// ---------------------------------------------------------------------------
// Contraction

#[derive(Clone, Debug)]
struct Tensor {
    legs: Vec<usize>,
    sig: Signature,
}

impl Tensor {
    /// Trace out any leg that occurs twice.
    fn close_loops(mut self) -> Self {
        loop {
            let mut pair = None;
            'find: for i in 0..self.legs.len() {
                for j in i + 1..self.legs.len() {
                    if self.legs[i] == self.legs[j] {
                        pair = Some((i, j));
                        break 'find;
                    }
                }
            }
            match pair {
                None => return self,
                Some((i, j)) => {
                    self.sig = self.sig.self_loop(i, j).expect("distinct slots");
                    self.legs.remove(j);
                    self.legs.remove(i);
                }
            }
        }
    }
}

fn shared_legs(a: &Tensor, b: &Tensor) -> Vec<usize> {
    a.legs.iter().filter(|l| b.legs.contains(l)).copied().collect()
}

fn contract_pair(a: &Tensor, b: &Tensor, shared: &[usize]) -> Result<Tensor> {
    let a_rest: Vec<usize> = a.legs.iter().filter(|l| !shared.contains(l)).copied().collect();
    let b_rest: Vec<usize> = b.legs.iter().filter(|l| !shared.contains(l)).copied().collect();
    let out_arity = a_rest.len() + b_rest.len();
    if out_arity > MAX_ARITY {
        return Err(Error::ContractionOverflow(out_arity));
    }
    // Position of each leg of a (resp. b) inside (a_rest | shared) (resp. (shared | b_rest)).
    let na = a.legs.len();
    let nb = b.legs.len();
    let ns = shared.len();
    let a_src: Vec<(usize, bool)> = a
        .legs
        .iter()
        .map(|l| match a_rest.iter().position(|x| x == l) {
            Some(p) => (p, true),
            None => (shared.iter().position(|x| x == l).expect("shared"), false),
        })
        .collect();
    let b_src: Vec<(usize, bool)> = b
        .legs
        .iter()
        .map(|l| match b_rest.iter().position(|x| x == l) {
            Some(p) => (p, true),
            None => (shared.iter().position(|x| x == l).expect("shared"), false),
        })
        .collect();
    let n_ar = a_rest.len();
    let n_br = b_rest.len();
    let index_of = |src: &[(usize, bool)], n: usize, rest_bits: usize, n_rest: usize, s_bits: usize| {
        let mut idx = 0usize;
        for &(p, is_rest) in src {
            let bit = if is_rest {
                (rest_bits >> (n_rest - 1 - p)) & 1
            } else {
                (s_bits >> (ns - 1 - p)) & 1
            };
            idx = (idx << 1) | bit;
        }
        debug_assert!(idx < 1 << n);
        idx
    };
    let mut values = Vec::with_capacity(1 << out_arity);
    for out in 0..1usize << out_arity {
        let ar = out >> n_br;
        let br = out & ((1 << n_br) - 1);
        let mut acc = Scalar::zero();
        for s in 0..1usize << ns {
            let va = a.sig.value(index_of(&a_src, na, ar, n_ar, s));
            if va.is_zero() {
                continue;
            }
            let vb = b.sig.value(index_of(&b_src, nb, br, n_br, s));
            if vb.is_zero() {
                continue;
            }
            acc += &(va * vb);
        }
        values.push(acc);
    }
    let mut legs = a_rest;
    legs.extend(b_rest);
    Ok(Tensor { legs, sig: Signature::new(out_arity, values)? })
}

/// Contract every shared leg greedily, then tensor the leftovers and order
/// the open legs as `open`.
fn contract_network(mut ts: Vec<Tensor>, open: &[usize]) -> Result<Signature> {
    ts = ts.into_iter().map(Tensor::close_loops).collect();
    loop {
        let mut best: Option<(usize, usize, usize, Vec<usize>)> = None;
        for i in 0..ts.len() {
            for j in i + 1..ts.len() {
                let sh = shared_legs(&ts[i], &ts[j]);
                if sh.is_empty() {
                    continue;
                }
                let cost = ts[i].legs.len() + ts[j].legs.len() - 2 * sh.len();
                if best.as_ref().is_none_or(|b| cost < b.0) {
                    best = Some((cost, i, j, sh));
                }
            }
        }
        let Some((cost, i, j, sh)) = best else { break };
        if cost > MAX_ARITY {
            return Err(Error::ContractionOverflow(cost));
        }
        let merged = contract_pair(&ts[i], &ts[j], &sh)?.close_loops();
        ts[i] = merged;
        ts.remove(j);
    }
    let mut acc = Tensor { legs: vec![], sig: Signature::scalar(Scalar::one()) };
    for t in &ts {
        if acc.legs.len() + t.legs.len() > MAX_ARITY {
            return Err(Error::ContractionOverflow(acc.legs.len() + t.legs.len()));
        }
        acc = Tensor {
            legs: acc.legs.iter().chain(&t.legs).copied().collect(),
            sig: acc.sig.tensor(&t.sig)?,
        };
    }
    let perm: Vec<usize> = acc
        .legs
        .iter()
        .map(|l| open.iter().position(|o| o == l).expect("every leftover leg is open"))
        .collect();
    acc.sig.permute(&perm)
}

fn network_of(g: &SignatureGrid) -> (Vec<Tensor>, Vec<usize>) {
    let m = g.edges.len();
    let slot_edges = g.slot_edges();
    let mut legs_of: Vec<Vec<usize>> = slot_edges
        .iter()
        .map(|es| es.iter().map(|e| e.unwrap_or(usize::MAX)).collect())
        .collect();
    let mut open = Vec::new();
    for (k, &(v, s)) in g.dangling.iter().enumerate() {
        legs_of[v][s] = m + k;
        open.push(m + k);
    }
    let ts = g
        .vertices
        .iter()
        .zip(legs_of)
        .map(|(v, legs)| Tensor { legs, sig: v.sig.clone() })
        .collect();
    (ts, open)
}

/// Holant by greedy pairwise contraction.
pub fn holant_contract(g: &SignatureGrid) -> Result<Scalar> {
    if !g.dangling.is_empty() {
        return Err(Error::DanglingEdges);
    }
    let (ts, open) = network_of(g);
    Ok(contract_network(ts, &open)?.value(0).clone())
}

/// Contraction, falling back to enumeration when an intermediate tensor
/// would be too large.
pub fn holant(g: &SignatureGrid) -> Result<Scalar> {
    match holant_contract(g) {
        Err(Error::ContractionOverflow(_)) => holant_bruteforce(g),
        other => other,
    }
}

/// Effective signature on the dangling edges, in dangling-list order.
pub fn gadget_signature(g: &SignatureGrid) -> Result<Signature> {
    if g.dangling.len() > GADGET_DANGLING_LIMIT {
        return Err(Error::TooManyDangling(g.dangling.len()));
    }
    let (ts, open) = network_of(g);
    contract_network(ts, &open)
}

// ---------------------------------------------------------------------------
// Bipartite forms

/// Subdivide every edge by an `=₂` vertex on the right-hand side.
pub fn make_bipartite(g: &SignatureGrid) -> Result<SignatureGrid> {
    let eq2 = Signature::equality(2)?;
    let mut vertices = g.vertices.clone();
    let mut sides = vec![Side::L; vertices.len()];
    let mut edges = Vec::with_capacity(2 * g.edges.len());
    for &(a, b) in &g.edges {
        let mid = vertices.len();
        vertices.push(Vertex { name: "=2".to_string(), sig: eq2.clone() });
        sides.push(Side::R);
        edges.push((a, (mid, 0)));
        edges.push(((mid, 1), b));
    }
    SignatureGrid::new(vertices, edges, g.dangling.clone(), Some(sides))
}

/// Left vertices become `m∘f`, right vertices `(m⁻¹)ᵀ∘g`.
pub fn transform_bipartite(g: &SignatureGrid, m: &Mat2) -> Result<SignatureGrid> {
    let sides = g.sides.as_ref().ok_or(Error::NotBipartite)?;
    let inv_t = m.invert()?.transpose();
    g.map_signatures(|k, v| match sides[k] {
        Side::L => v.sig.transform(m),
        Side::R => v.sig.transform(&inv_t),
    })
}

// ---------------------------------------------------------------------------
// File format

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VertexRef {
    pub sig: String,
}

/// JSON form of a grid with named signatures.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridFile {
    pub signatures: BTreeMap<String, SignatureSpec>,
    pub vertices: Vec<VertexRef>,
    #[serde(default)]
    pub edges: Vec<[[usize; 2]; 2]>,
    #[serde(default)]
    pub dangling: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Vec<Side>>,
}

impl GridFile {
    pub fn build(&self) -> Result<SignatureGrid> {
        let mut cache: BTreeMap<&str, Signature> = BTreeMap::new();
        for (name, spec) in &self.signatures {
            cache.insert(name, spec.build()?);
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let sig = cache
                    .get(v.sig.as_str())
                    .ok_or_else(|| Error::InvalidGrid(format!("unknown signature name {:?}", v.sig)))?;
                Ok(Vertex { name: v.sig.clone(), sig: sig.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = self.edges.iter().map(|[[a, sa], [b, sb]]| ((*a, *sa), (*b, *sb))).collect();
        let dangling = self.dangling.iter().map(|[v, s]| (*v, *s)).collect();
        SignatureGrid::new(vertices, edges, dangling, self.side.clone())
    }

    /// Inverse of [`GridFile::build`]; vertices sharing a name but not a
    /// signature get distinct names.
    pub fn from_grid(g: &SignatureGrid) -> Self {
        let mut by_name: BTreeMap<&str, Vec<&Signature>> = BTreeMap::new();
        for v in &g.vertices {
            let entry = by_name.entry(&v.name).or_default();
            if !entry.contains(&&v.sig) {
                entry.push(&v.sig);
            }
        }
        let mut signatures = BTreeMap::new();
        let mut vertices = Vec::new();
        for (k, v) in g.vertices.iter().enumerate() {
            let name = if by_name[v.name.as_str()].len() == 1 {
                v.name.clone()
            } else {
                format!("{}#{k}", v.name)
            };
            signatures.insert(name.clone(), SignatureSpec::from(&v.sig));
            vertices.push(VertexRef { sig: name });
        }
        GridFile {
            signatures,
            vertices,
            edges: g.edges.iter().map(|&((a, sa), (b, sb))| [[a, sa], [b, sb]]).collect(),
            dangling: g.dangling.iter().map(|&(v, s)| [v, s]).collect(),
            side: g.sides.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq(n: usize) -> Signature {
        Signature::equality(n).unwrap()
    }

    fn cycle(sig: &Signature, k: usize) -> SignatureGrid {
        let mut b = GridBuilder::new();
        let vs: Vec<usize> = (0..k).map(|_| b.vertex("f", sig.clone())).collect();
        for i in 0..k {
            b.edge((vs[i], 1), (vs[(i + 1) % k], 0));
        }
        b.build().unwrap()
    }

    fn k4_exact_one() -> SignatureGrid {
        let w = Signature::w();
        let mut b = GridBuilder::new();
        for _ in 0..4 {
            b.vertex("w", w.clone());
        }
        let mut next = [0usize; 4];
        for i in 0..4 {
            for j in i + 1..4 {
                b.edge((i, next[i]), (j, next[j]));
                next[i] += 1;
                next[j] += 1;
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn triangle_of_equalities() {
        let g = cycle(&eq(2), 3);
        assert_eq!(holant_bruteforce(&g).unwrap(), Scalar::from_int(2));
        assert_eq!(holant_contract(&g).unwrap(), Scalar::from_int(2));
    }

    #[test]
    fn k4_perfect_matchings() {
        let g = k4_exact_one();
        assert_eq!(holant_bruteforce(&g).unwrap(), Scalar::from_int(3));
        assert_eq!(holant_contract(&g).unwrap(), Scalar::from_int(3));
    }

    #[test]
    fn opposing_unaries_cancel() {
        let u = Signature::unary(Scalar::one(), Scalar::i());
        let mut b = GridBuilder::new();
        let a = b.vertex("u", u.clone());
        let c = b.vertex("u", u);
        b.edge((a, 0), (c, 0));
        let g = b.build().unwrap();
        assert!(holant_bruteforce(&g).unwrap().is_zero());
        assert!(holant_contract(&g).unwrap().is_zero());
    }

    #[test]
    fn empty_grid_is_one() {
        let g = SignatureGrid::empty();
        assert!(holant_contract(&g).unwrap().is_one());
        assert!(holant_bruteforce(&g).unwrap().is_one());
    }

    #[test]
    fn path_matches_matrix_power() {
        // δ₀ – [1,2,1] ×9 – δ₀ gives entry (0,0) of M⁹.
        let m = Signature::symmetric_ints(&[1, 2, 1]).unwrap();
        let mut b = GridBuilder::new();
        let start = b.vertex("d0", Signature::delta0());
        let mut prev = (start, 0);
        for _ in 0..9 {
            let v = b.vertex("m", m.clone());
            b.edge(prev, (v, 0));
            prev = (v, 1);
        }
        let end = b.vertex("d0", Signature::delta0());
        b.edge(prev, (end, 0));
        let g = b.build().unwrap();
        // M = [[1,2],[2,1]] has eigenvalues 3, -1 with eigenvectors (1,1), (1,-1).
        let expect = (3i64.pow(9) + (-1i64).pow(9)) / 2;
        assert_eq!(holant_contract(&g).unwrap(), Scalar::from_int(expect));
    }

    #[test]
    fn invalid_grids_rejected() {
        let mut b = GridBuilder::new();
        let v = b.vertex("e", eq(2));
        b.edge((v, 0), (v, 0));
        assert!(matches!(b.build(), Err(Error::InvalidGrid(_))));
        let mut b = GridBuilder::new();
        b.vertex("e", eq(2));
        assert!(matches!(b.build(), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn brute_force_rejects_dangling() {
        let mut b = GridBuilder::new();
        let v = b.vertex("e", eq(2));
        b.dangle((v, 0)).dangle((v, 1));
        assert_eq!(holant_bruteforce(&b.build().unwrap()), Err(Error::DanglingEdges));
    }

    #[test]
    fn gadget_examples() {
        let mut b = GridBuilder::new();
        let f = b.vertex("ghz", Signature::ghz());
        let p = b.vertex("d0", Signature::delta0());
        b.edge((f, 2), (p, 0)).dangle((f, 0)).dangle((f, 1));
        let g = gadget_signature(&b.build().unwrap()).unwrap();
        assert_eq!(g, Signature::from_ints(2, &[1, 0, 0, 0]).unwrap());

        let mut b = GridBuilder::new();
        let vs: Vec<usize> = (0..3).map(|_| b.vertex("ghz", Signature::ghz())).collect();
        for i in 0..3 {
            b.edge((vs[i], 1), (vs[(i + 1) % 3], 2));
            b.dangle((vs[i], 0));
        }
        assert_eq!(gadget_signature(&b.build().unwrap()).unwrap(), Signature::ghz());

        let mut b = GridBuilder::new();
        let v = b.vertex("e", eq(2));
        b.dangle((v, 0)).dangle((v, 1));
        assert_eq!(gadget_signature(&b.build().unwrap()).unwrap(), eq(2));
    }

    #[test]
    fn gadget_dangling_order() {
        let f = Signature::from_ints(2, &[0, 1, 2, 0]).unwrap();
        let mut b = GridBuilder::new();
        let v = b.vertex("f", f.clone());
        b.dangle((v, 1)).dangle((v, 0));
        let g = gadget_signature(&b.build().unwrap()).unwrap();
        assert_eq!(g, f.permute(&[1, 0]).unwrap());
    }

    #[test]
    fn bipartite_preserves_value() {
        let g = cycle(&eq(2), 3);
        let bg = make_bipartite(&g).unwrap();
        assert_eq!(bg.vertices().len(), 6);
        assert_eq!(holant_bruteforce(&bg).unwrap(), Scalar::from_int(2));
        let bk = make_bipartite(&k4_exact_one()).unwrap();
        assert_eq!(holant_contract(&bk).unwrap(), Scalar::from_int(3));
        let e = make_bipartite(&SignatureGrid::empty()).unwrap();
        assert!(e.vertices().is_empty());
    }

    #[test]
    fn transform_examples() {
        let g = make_bipartite(&k4_exact_one()).unwrap();
        assert_eq!(transform_bipartite(&g, &Mat2::identity()).unwrap(), g);
        let before = holant_contract(&g).unwrap();
        for m in [Mat2::k(), Mat2::t()] {
            let tg = transform_bipartite(&g, &m).unwrap();
            assert_eq!(holant_contract(&tg).unwrap(), before);
        }
        assert_eq!(
            transform_bipartite(&g, &Mat2::from_ints(1, 1, 1, 1)),
            Err(Error::SingularMatrix)
        );
        assert_eq!(transform_bipartite(&k4_exact_one(), &Mat2::k()), Err(Error::NotBipartite));
    }

    #[test]
    fn file_round_trip() {
        let g = transform_bipartite(&make_bipartite(&cycle(&eq(2), 3)).unwrap(), &Mat2::k()).unwrap();
        let text = serde_json::to_string(&GridFile::from_grid(&g)).unwrap();
        let back = serde_json::from_str::<GridFile>(&text).unwrap().build().unwrap();
        assert_eq!(back.edges(), g.edges());
        for (a, b) in back.vertices().iter().zip(g.vertices()) {
            assert_eq!(a.sig, b.sig);
        }
    }
}
