//! The Holant^c classifier: tractable-family screening, then a constructive
//! hardness pipeline that records a replayable certificate.

pub mod certificate;
pub mod interpolation;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::Mat2;
use crate::entanglement::{
    apply_unaries, binary_det, distance_profile, find_entangling_projection, ternary_class, Anchor, ProjLabel,
    TernaryClass,
};
use crate::error::{Error, Result};
use crate::families::{
    check_family, exists_orthogonal_o, exists_s_in_cs, in_a, in_l_set, in_m, in_t_closure, in_transformed_closure,
    BaseFamily, Family, FamilyVerdict, Membership,
};
use crate::grid::Endpoint;
use crate::signature::Signature;

pub use certificate::{
    certificate_verify, verify_certificate, Certificate, Gadget, ReductionStep, StepKind, Terminal, VerifyReport,
};
pub use interpolation::{
    eq4_form, generalized_eq4_reduction, interpolate_eq4_reduction, interpolation_demo, is_generalised_equality,
    pair_normal_form, power_period, Eq4Fragment, InterpolationDemo,
};

use certificate::{km_base, Builder, Src};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Tractable {
        family: Family,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Mat2>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witness: Option<String>,
    },
    Hard {
        certificate: Certificate,
    },
    Unknown {
        reason: String,
    },
}

impl Verdict {
    /// Short tag such as `Tractable(SA)`, `Hard` or `Unknown`.
    pub fn tag(&self) -> String {
        match self {
            Verdict::Tractable { family, .. } => format!("Tractable({family})"),
            Verdict::Hard { .. } => "Hard".into(),
            Verdict::Unknown { .. } => "Unknown".into(),
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::Hard { certificate } => Some(certificate),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Tractable { family, matrix, witness } => {
                write!(f, "Tractable({family})")?;
                if let Some(m) = matrix {
                    write!(f, " matrix {m}")?;
                }
                if let Some(w) = witness {
                    write!(f, ": {w}")?;
                }
                Ok(())
            }
            Verdict::Hard { certificate } => {
                let last = certificate.steps.last().and_then(|s| s.citation.clone()).unwrap_or_default();
                write!(f, "Hard ({} steps, terminal {last})", certificate.steps.len())
            }
            Verdict::Unknown { reason } => write!(f, "Unknown: {reason}"),
        }
    }
}

/// Screening order. 𝒜 and S∘𝒜 come before the Holant* families so that sets
/// in several families get the most specific affine tag.
pub const SCREEN_ORDER: [Family; 8] =
    [Family::T, Family::A, Family::SA, Family::L, Family::OE, Family::KE, Family::KM, Family::KXM];

/// Run the tractability checks in [`SCREEN_ORDER`]; the first member wins.
pub fn screen(set: &[Signature], candidates: Option<&[Mat2]>) -> Result<std::result::Result<FamilyVerdict, Vec<FamilyVerdict>>> {
    let mut failures = Vec::new();
    for fam in SCREEN_ORDER {
        let v = check_family(set, fam, candidates)?;
        if v.is_member() {
            return Ok(Ok(v));
        }
        failures.push(v);
    }
    Ok(Err(failures))
}

/// Classify Holant^c(set). `candidates` overrides the 𝒮 enumeration.
pub fn classify_holant_c(set: &[Signature], candidates: Option<&[Mat2]>) -> Result<Verdict> {
    if set.is_empty() {
        return Err(Error::Precondition("the signature set is empty".into()));
    }
    for f in set {
        f.ensure_nonzero()?;
    }
    let failures = match screen(set, candidates)? {
        Ok(v) => return Ok(Verdict::Tractable { family: v.family, matrix: v.matrix, witness: v.witness }),
        Err(f) => f,
    };
    if let Some(u) = failures.iter().find(|v| v.member == Membership::Unknown) {
        return Ok(Verdict::Unknown {
            reason: format!("{} check inconclusive: {}", u.family, u.reason.clone().unwrap_or_default()),
        });
    }
    match Pipeline::new(set).run() {
        Ok(certificate) => Ok(Verdict::Hard { certificate }),
        Err(Halt::Unknown(reason)) => Ok(Verdict::Unknown { reason }),
        Err(Halt::Error(e)) => Err(e),
    }
}

/// `set` with `f` appended unless already present, and the index of `f`.
fn with_member(f: &Signature, set: &[Signature]) -> (Vec<Signature>, usize) {
    let mut all = set.to_vec();
    let k = match all.iter().position(|g| g == f) {
        Some(k) => k,
        None => {
            all.push(f.clone());
            all.len() - 1
        }
    };
    (all, k)
}

fn run_from(
    set: &[Signature],
    candidates: Option<&[Mat2]>,
    start: impl FnOnce(&mut Pipeline<'_>) -> Flow<Ending>,
) -> Result<Verdict> {
    if let Ok(v) = screen(set, candidates)? {
        return Ok(Verdict::Tractable { family: v.family, matrix: v.matrix, witness: v.witness });
    }
    let mut p = Pipeline::new(set);
    match start(&mut p) {
        Ok(e) => Ok(Verdict::Hard { certificate: p.b.finish_with(e.terminal, &e.subjects, e.params, e.note) }),
        Err(Halt::Unknown(reason)) => Ok(Verdict::Unknown { reason }),
        Err(Halt::Error(e)) => Err(e),
    }
}

/// Hardness of Holant^c(set ∪ {f}) for an entangled ternary f, following
/// the ternary case tree from f. Screens the tractable families first.
pub fn ternary_hardness(f: &Signature, set: &[Signature]) -> Result<Verdict> {
    if !is_genuine_ternary(f)? {
        return Err(Error::Precondition(format!("{f} is not an entangled ternary signature")));
    }
    let (all, k) = with_member(f, set);
    run_from(&all, None, |p| p.ternary(Src::Set(k)))
}

/// The K∘ℳ branch for a W-type ternary f in K∘ℳ or KX∘ℳ.
pub fn case_km_pipeline(f: &Signature, set: &[Signature]) -> Result<Verdict> {
    if !is_genuine_ternary(f)? || !matches!(ternary_class(f)?, TernaryClass::W) {
        return Err(Error::Precondition(format!("{f} is not a W-type ternary")));
    }
    let m = km_base(f)?.ok_or_else(|| Error::Precondition(format!("{f} is in neither K∘M nor KX∘M")))?;
    let (all, k) = with_member(f, set);
    run_from(&all, None, |p| p.case_km(Src::Set(k), m))
}

/// First symmetric non-degenerate triangle gadget of a GHZ-type ternary.
pub fn symmetrize_ghz(f: &Signature) -> Result<Signature> {
    if !matches!(ternary_class(f)?, TernaryClass::Ghz) {
        return Err(Error::Precondition(format!("{f} is not GHZ-type")));
    }
    let set = [f.clone()];
    let mut p = Pipeline::new(&set);
    match p.symmetrize_ghz(Src::Set(0)) {
        Ok(s) => Ok(p.sig(s)),
        Err(Halt::Error(e)) => Err(e),
        Err(Halt::Unknown(r)) => Err(Error::Precondition(r)),
    }
}

/// Symmetric entangled ternary from a W-type f, using triangle gadgets with
/// the optional entangled binary helper on the inner edges.
pub fn symmetrize_w(f: &Signature, helper: Option<&Signature>) -> Result<Signature> {
    if !matches!(ternary_class(f)?, TernaryClass::W) {
        return Err(Error::Precondition(format!("{f} is not W-type")));
    }
    let mut set = vec![f.clone()];
    if let Some(h) = helper {
        if h.arity() != 2 || binary_det(h).is_zero() {
            return Err(Error::Precondition(format!("helper {h} is not an entangled binary")));
        }
        set.push(h.clone());
    }
    let mut p = Pipeline::new(&set);
    let h = helper.map(|_| Src::Set(1));
    match p.symmetrize_w(Src::Set(0), h) {
        Ok(s) => Ok(p.sig(s)),
        Err(Halt::Error(e)) => Err(e),
        Err(Halt::Unknown(r)) => Err(Error::ExhaustionFailure(r)),
    }
}

/// Re-check a verdict: the family checker for Tractable, replay for Hard.
pub fn verify_verdict(v: &Verdict, set: &[Signature]) -> Result<VerifyReport> {
    Ok(match v {
        Verdict::Tractable { family, .. } => {
            let ok = check_family(set, *family, None)?.is_member();
            VerifyReport {
                ok,
                failed_step: None,
                message: if ok { String::new() } else { format!("the set is not in {family}") },
            }
        }
        Verdict::Hard { certificate } => verify_certificate(certificate, set),
        Verdict::Unknown { .. } => VerifyReport { ok: true, failed_step: None, message: "nothing to verify".into() },
    })
}

// ---------------------------------------------------------------------------
// Hardness pipeline

enum Halt {
    Unknown(String),
    Error(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Error(e)
    }
}

type Flow<T> = std::result::Result<T, Halt>;

fn gap<T>(msg: impl Into<String>) -> Flow<T> {
    Err(Halt::Error(Error::InternalCaseGap(msg.into())))
}

/// Terminal chosen by the pipeline, emitted once at the end.
struct Ending {
    terminal: Terminal,
    subjects: Vec<Src>,
    params: BTreeMap<String, String>,
    note: String,
}

struct Pipeline<'a> {
    set: &'a [Signature],
    b: Builder<'a>,
}

fn is_genuine_ternary(f: &Signature) -> Result<bool> {
    Ok(f.arity() == 3 && !f.is_zero() && ternary_class(f)?.is_genuine())
}

fn bits(x: usize, n: usize) -> Vec<u8> {
    (0..n).map(|p| ((x >> (n - 1 - p)) & 1) as u8).collect()
}

impl<'a> Pipeline<'a> {
    fn new(set: &'a [Signature]) -> Self {
        Pipeline { set, b: Builder::new(set) }
    }

    fn sig(&self, s: Src) -> Signature {
        self.b.sig(s)
    }

    fn run(mut self) -> Flow<Certificate> {
        let start = self.select_entangled()?;
        let ending = if self.sig(start).arity() == 3 { self.ternary(start)? } else { self.d0(start)? };
        Ok(self.b.finish_with(ending.terminal, &ending.subjects, ending.params, ending.note))
    }

    fn end(&self, terminal: Terminal, subjects: Vec<Src>, note: impl Into<String>) -> Ending {
        Ending { terminal, subjects, params: BTreeMap::new(), note: note.into() }
    }

    /// A genuinely entangled signature of arity ≥ 3, realised from the first
    /// such factor by pinning the sibling factors.
    fn select_entangled(&mut self) -> Flow<Src> {
        for (k, f) in self.set.iter().enumerate() {
            let factors = f.factorize()?;
            let Some(pos) = factors.iter().position(|fa| fa.sig.arity() >= 3) else { continue };
            if factors.len() == 1 {
                return Ok(Src::Set(k));
            }
            let mut pins = Vec::new();
            for (q, other) in factors.iter().enumerate() {
                if q == pos {
                    continue;
                }
                let w = other.sig.support()[0];
                let wb = bits(w, other.sig.arity());
                pins.extend(other.slots.iter().zip(wb).map(|(&s, b)| (s, b)));
            }
            let note = format!("isolate the entangled factor of signature {k} by pinning its other factors");
            return Ok(self.b.pin(StepKind::Factor, Src::Set(k), &pins, note)?);
        }
        gap("no factor of arity >= 3 although the <T> check failed")
    }

    // -- ternary ----------------------------------------------------------

    fn ternary(&mut self, src: Src) -> Flow<Ending> {
        let f = self.sig(src);
        let class = ternary_class(&f)?;
        match class {
            TernaryClass::NotGenuine(_) => gap(format!("ternary {f} is not genuinely entangled")),
            _ if f.is_symmetric() => self.symmetric_ternary(src),
            TernaryClass::W => {
                if let Some(m) = km_base(&f)? {
                    return self.case_km(src, m);
                }
                let s = self.symmetrize_w(src, None)?;
                self.symmetric_ternary(s)
            }
            TernaryClass::Ghz => {
                let s = match self.symmetrize_ghz(src) {
                    Err(Halt::Error(Error::AllDegenerate)) => {
                        return gap("every triangle gadget of a non-symmetric GHZ-type signature is degenerate")
                    }
                    other => other?,
                };
                self.symmetric_ternary(s)
            }
        }
    }

    fn symmetric_ternary(&mut self, src: Src) -> Flow<Ending> {
        let f = self.sig(src);
        match ternary_class(&f)? {
            TernaryClass::Ghz => Ok(self.end(
                Terminal::GhzSymmetric,
                vec![src],
                "symmetric GHZ-type ternary; the set is outside <O∘E>, <K∘E> and every S∘A",
            )),
            TernaryClass::W => match km_base(&f)? {
                None => Ok(self.end(Terminal::WNotKm, vec![src], "symmetric W-type ternary outside K∘M and KX∘M")),
                Some(m) => self.case_km(src, m),
            },
            TernaryClass::NotGenuine(_) => gap(format!("symmetric ternary {f} is not entangled")),
        }
    }

    /// The three triangle gadgets, one per choice of dangling slot.
    fn triangle(&mut self, src: Src, dangle: usize, helper: Option<(Src, bool)>) -> Result<Src> {
        let others: Vec<usize> = (0..3).filter(|&s| s != dangle).collect();
        let (j, l) = (others[0], others[1]);
        let mut vertices = vec![src, src, src];
        let mut edges: Vec<(Endpoint, Endpoint)> = Vec::new();
        for t in 0..3 {
            let next = (t + 1) % 3;
            match helper {
                None => edges.push(((t, j), (next, l))),
                Some((h, flip)) => {
                    vertices.push(h);
                    let hv = vertices.len() - 1;
                    let (near, far) = if flip { (1, 0) } else { (0, 1) };
                    edges.push(((t, j), (hv, near)));
                    edges.push(((hv, far), (next, l)));
                }
            }
        }
        let note = match helper {
            None => format!("triangle of three copies, slot {dangle} dangling"),
            Some(_) => format!("triangle of three copies with the binary helper on inner edges, slot {dangle} dangling"),
        };
        self.b.gadget(StepKind::TriangleGadget, vertices, edges, vec![(0, dangle), (1, dangle), (2, dangle)], note)
    }

    /// First triangle gadget that is non-degenerate; it is symmetric by
    /// construction.
    fn symmetrize_ghz(&mut self, src: Src) -> Flow<Src> {
        for dangle in 0..3 {
            let t = self.triangle(src, dangle, None)?;
            let g = self.sig(t);
            if !g.is_zero() && g.is_symmetric() && !g.is_degenerate()? {
                return Ok(t);
            }
        }
        Err(Halt::Error(Error::AllDegenerate))
    }

    /// Symmetric entangled ternary from a W-type signature, searching
    /// triangle gadgets without and then with the helper on the inner edges.
    fn symmetrize_w(&mut self, src: Src, helper: Option<Src>) -> Flow<Src> {
        if self.sig(src).is_symmetric() {
            return Ok(src);
        }
        let mut variants: Vec<Option<(Src, bool)>> = vec![None];
        if let Some(h) = helper {
            variants.push(Some((h, false)));
            variants.push(Some((h, true)));
        }
        for v in variants {
            for dangle in 0..3 {
                let t = self.triangle(src, dangle, v)?;
                let g = self.sig(t);
                if g.is_symmetric() && is_genuine_ternary(&g)? {
                    return Ok(t);
                }
            }
        }
        Err(Halt::Unknown("no triangle gadget symmetrises the W-type signature".into()))
    }

    // -- K∘M case -------------------------------------------------------------

    fn case_km(&mut self, psi: Src, m: Mat2) -> Flow<Ending> {
        let inv = m.invert()?;
        let mut phi = None;
        'outer: for (k, f) in self.set.iter().enumerate() {
            let factors = f.factorize()?;
            for (pos, fa) in factors.iter().enumerate() {
                if fa.sig.arity() >= 2 && !in_m(&fa.sig.transform(&inv))? {
                    phi = Some((k, factors.clone(), pos));
                    break 'outer;
                }
            }
        }
        let Some((k, factors, pos)) = phi else {
            return gap(format!("every signature lies in <{m}∘M> although that check failed"));
        };
        let mut pins = Vec::new();
        for (q, other) in factors.iter().enumerate() {
            if q != pos {
                let wb = bits(other.sig.support()[0], other.sig.arity());
                pins.extend(other.slots.iter().zip(wb).map(|(&s, b)| (s, b)));
            }
        }
        let note = format!("isolate the factor of signature {k} outside {m}∘M");
        let mut phi = self.b.pin(StepKind::Factor, Src::Set(k), &pins, note)?;
        if self.sig(phi).arity() > 2 {
            phi = self.binary_outside_km(psi, phi, &m)?;
        }
        let s = self.symmetrize_w(psi, Some(phi))?;
        let f = self.sig(s);
        match ternary_class(&f)? {
            TernaryClass::Ghz => Ok(self.end(
                Terminal::GhzSymmetric,
                vec![s],
                "symmetric GHZ-type ternary; the set is outside <O∘E>, <K∘E> and every S∘A",
            )),
            TernaryClass::W => match km_base(&f)? {
                None => Ok(self.end(Terminal::WNotKm, vec![s], "symmetric W-type ternary outside K∘M and KX∘M")),
                Some(m2) => {
                    let h = self.symmetric_binary_outside(s, phi, &m2)?;
                    Ok(self.end(
                        Terminal::WKmBinary,
                        vec![s, h],
                        format!("symmetric W-type ternary in {m2}∘M with a symmetric binary outside it"),
                    ))
                }
            },
            TernaryClass::NotGenuine(_) => gap("symmetrisation produced a non-entangled ternary"),
        }
    }

    /// Unary from a self-loop on ψ; it is `(mᵀ)⁻¹|1⟩` up to a scalar.
    fn loop_unary(&mut self, psi: Src, m: &Mat2) -> Flow<Src> {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let u = self.b.self_loop(psi, i, j, "self-loop on the ternary")?;
            let g = self.sig(u);
            if !g.is_zero() {
                let t = g.transform(&m.transpose());
                if !t.value(0).is_zero() {
                    return gap(format!("self-loop unary {g} is not (m^T)^-1|1>"));
                }
                return Ok(u);
            }
        }
        gap("every self-loop on the K∘M ternary vanishes")
    }

    /// Realisable unaries: chains of a symmetric binary gadget built from ψ,
    /// closed by a pin, together with the pins themselves.
    fn chain_unaries(&mut self, psi: Src) -> Flow<Vec<Src>> {
        let mut out = vec![Src::Pin(0), Src::Pin(1)];
        let mut seen: Vec<Signature> = vec![Signature::delta0(), Signature::delta1()];
        for slot in 0..3 {
            for b in 0..2u8 {
                let p = self.b.pin(StepKind::Pin, psi, &[(slot, b)], "pin one input of the ternary")?;
                if self.sig(p).is_zero() {
                    continue;
                }
                let q = self.b.gadget(
                    StepKind::Composite,
                    vec![p, p],
                    vec![((0, 1), (1, 1))],
                    vec![(0, 0), (1, 0)],
                    "two pinned copies joined into a symmetric binary",
                )?;
                for end in 0..2u8 {
                    let mut u = Src::Pin(end);
                    for _ in 0..6 {
                        u = self.b.gadget(
                            StepKind::ChainGadget,
                            vec![q, u],
                            vec![((0, 1), (1, 0))],
                            vec![(0, 0)],
                            "extend the chain by one symmetric binary",
                        )?;
                        let g = self.sig(u);
                        if g.is_zero() {
                            break;
                        }
                        if !seen.iter().any(|s| s.proportional_to(&g)) {
                            seen.push(g);
                            out.push(u);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Binary entangled gadget outside m∘ℳ from φ of arity ≥ 3, choosing a
    /// unary for every other input slot by slot.
    fn binary_outside_km(&mut self, psi: Src, phi: Src, m: &Mat2) -> Flow<Src> {
        let inv = m.invert()?;
        let mt = m.transpose();
        let f = self.sig(phi);
        let n = f.arity();
        let ft = f.transform(&inv);
        let Some(y) = ft.support().into_iter().find(|y| y.count_ones() >= 2) else {
            return gap("factor outside m∘M has no support string of weight >= 2 after the transform");
        };
        let yb = bits(y, n);
        let ones: Vec<usize> = (0..n).filter(|&s| yb[s] == 1).collect();
        let (j, k) = (ones[0], ones[1]);
        let proj = find_entangling_projection(&ft, j, k)?;
        let label = |s: usize| proj.labels.iter().find(|(t, _)| *t == s).map(|(_, l)| *l).expect("every other slot labelled");
        let one = self.loop_unary(psi, m)?;
        let cands = self.chain_unaries(psi)?;
        let others: Vec<usize> = (0..n).filter(|&s| s != j && s != k).collect();
        let mut chosen: Vec<(usize, Src)> = Vec::new();
        for (idx, &l) in others.iter().enumerate() {
            if label(l) == ProjLabel::One && yb[l] == 1 {
                chosen.push((l, one));
                continue;
            }
            let mut pick = None;
            for &c in &cands {
                let mut trial = chosen.clone();
                trial.push((l, c));
                let fixed: Vec<(usize, Signature)> =
                    trial.iter().map(|&(s, u)| (s, self.sig(u).transform(&mt))).collect();
                let rest = &others[idx + 1..];
                let mut ent = fixed.clone();
                ent.extend(rest.iter().map(|&s| (s, label(s).signature())));
                let mut wt = fixed;
                wt.extend(rest.iter().map(|&s| (s, Signature::pin_signature(yb[s]))));
                let e = apply_unaries(&ft, &ent)?;
                let w = apply_unaries(&ft, &wt)?;
                if !binary_det(&e).is_zero() && !w.value(3).is_zero() {
                    pick = Some(c);
                    break;
                }
            }
            match pick {
                Some(c) => chosen.push((l, c)),
                None => return gap(format!("no realisable unary keeps slot {l} entangled and outside m∘M")),
            }
        }
        let out = self.b.apply_unaries(phi, &chosen, "contract the other inputs with the chosen unaries")?;
        let g = self.sig(out);
        if binary_det(&g).is_zero() || in_m(&g.transform(&inv))? {
            return gap("the constructed binary is degenerate or inside m∘M");
        }
        Ok(out)
    }

    /// Symmetric binary outside ⟨m∘ℳ⟩ from the symmetric ternary s and the
    /// binary φ.
    fn symmetric_binary_outside(&mut self, s: Src, phi: Src, m: &Mat2) -> Flow<Src> {
        let inv = m.invert()?;
        let mut cands = Vec::new();
        cands.push(self.b.gadget(
            StepKind::Composite,
            vec![phi, phi],
            vec![((0, 1), (1, 1))],
            vec![(0, 0), (1, 0)],
            "binary joined with its own copy on the second input",
        )?);
        cands.push(self.b.gadget(
            StepKind::Composite,
            vec![phi, phi],
            vec![((0, 0), (1, 0))],
            vec![(0, 1), (1, 1)],
            "binary joined with its own copy on the first input",
        )?);
        for u in [Src::Pin(0), Src::Pin(1)] {
            for inner in [1usize, 0] {
                let outer = 1 - inner;
                cands.push(self.b.gadget(
                    StepKind::Composite,
                    vec![phi, s, phi, u],
                    vec![((0, inner), (1, 1)), ((1, 2), (2, inner)), ((1, 0), (3, 0))],
                    vec![(0, outer), (2, outer)],
                    "pinned ternary sandwiched between two copies of the binary",
                )?);
            }
        }
        for c in cands {
            let g = self.sig(c);
            if g.is_symmetric() && !binary_det(&g).is_zero() && !in_m(&g.transform(&inv))? {
                return Ok(c);
            }
        }
        Err(Halt::Unknown(format!("no symmetric binary outside {m}∘M found among the searched gadgets")))
    }

    // -- higher arity ------------------------------------------------------------

    /// Pin the slots (by position in `f`'s order) where x and y agree.
    fn pin_agreeing(&mut self, src: Src, slots: &[usize], x: &[u8], y: &[u8], note: &str) -> Flow<Src> {
        let pins: Vec<(usize, u8)> =
            slots.iter().zip(x.iter().zip(y)).filter(|(_, (a, b))| a == b).map(|(&s, (&a, _))| (s, a)).collect();
        Ok(self.b.pin(StepKind::Pin, src, &pins, note)?)
    }

    /// Self-loops down to arity 4 (even) or 3 (odd), then the matching terminal.
    fn generalised_equality(&mut self, mut src: Src) -> Flow<Ending> {
        loop {
            let f = self.sig(src);
            if !is_generalised_equality(&f) {
                return gap(format!("{f} is not a generalised equality"));
            }
            let n = f.arity();
            match n {
                3 => return self.ternary(src),
                4 => {
                    return Ok(self.end(Terminal::GeneralisedEquality4, vec![src], "4-ary generalised equality"));
                }
                _ if n < 3 => return gap("generalised equality of arity below 3"),
                _ => {}
            }
            let x = bits(f.support()[0], n);
            let (i, j) = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| x[i] == x[j])
                .expect("three or more bits contain an equal pair");
            src = self.b.self_loop(src, i, j, "self-loop on two inputs that agree in both support strings")?;
        }
    }

    /// Pin anchor positions (pairs first, then single positions) until a
    /// generalised equality of arity ≥ 3 appears.
    fn pin_to_equality(&mut self, src: Src, anchor: &[usize]) -> Flow<Option<Src>> {
        let mut tries: Vec<Vec<(usize, u8)>> = Vec::new();
        if anchor.len() == 2 {
            for v in 0..4u8 {
                tries.push(vec![(anchor[0], v >> 1), (anchor[1], v & 1)]);
            }
        }
        for &a in anchor {
            for v in 0..2u8 {
                tries.push(vec![(a, v)]);
            }
        }
        for pins in tries {
            let g = self.sig(src).pin_many(&pins)?;
            if g.arity() >= 3 && is_generalised_equality(&g) {
                return Ok(Some(self.b.pin(StepKind::Pin, src, &pins, "pin anchor inputs to leave a generalised equality")?));
            }
        }
        Ok(None)
    }

    fn d0(&mut self, src: Src) -> Flow<Ending> {
        let f = self.sig(src);
        let n = f.arity();
        let p = distance_profile(&f, 0, None)?;
        let (x, y) = p.witness.clone();
        let all: Vec<usize> = (0..n).collect();
        let g = self.pin_agreeing(src, &all, &x, &y, "pin the inputs where a closest support pair agrees")?;
        let diff: Vec<usize> = (0..n).filter(|&s| x[s] != y[s]).collect();
        match p.value {
            d if d >= 3 => self.generalised_equality(g),
            2 => self.d1(src, g, diff),
            1 => self.d2(src, g, diff[0]),
            _ => gap("D0 = 0"),
        }
    }

    /// Positions of `anchor` slots after pinning everything outside
    /// `anchor ∪ kept`.
    fn positions(anchor: &[usize], kept: &[usize]) -> Vec<usize> {
        let mut remaining: Vec<usize> = anchor.iter().chain(kept).copied().collect();
        remaining.sort_unstable();
        anchor.iter().map(|a| remaining.iter().position(|r| r == a).expect("kept")).collect()
    }

    fn d1(&mut self, src: Src, anchor_src: Src, anchor: Vec<usize>) -> Flow<Ending> {
        let f = self.sig(src);
        let a = Anchor { slots: anchor.clone(), sig: self.sig(anchor_src) };
        let p = distance_profile(&f, 1, Some(&a))?;
        let (x, y) = p.witness.clone();
        let h = self.pin_agreeing(src, &p.rest_slots, &x, &y, "pin the inputs where the closest A1/B1 pair agrees")?;
        let kept: Vec<usize> = p.rest_slots.iter().zip(x.iter().zip(&y)).filter(|(_, (a, b))| a != b).map(|(&s, _)| s).collect();
        let pos = Self::positions(&anchor, &kept);
        match p.value {
            d if d >= 3 => match self.pin_to_equality(h, &pos)? {
                Some(e) => self.generalised_equality(e),
                None => gap("D1 >= 3 but no anchor pin leaves a generalised equality"),
            },
            2 => {
                if let Some(e) = self.pin_to_equality(h, &pos)? {
                    if self.sig(e).arity() == 3 {
                        return self.ternary(e);
                    }
                }
                self.interpolation_case(h, &pos)
            }
            1 => {
                if !is_genuine_ternary(&self.sig(h))? {
                    return gap("D1 = 1 ternary is not entangled");
                }
                self.ternary(h)
            }
            _ => gap("D1 = 0"),
        }
    }

    /// D₁ = 2 with a 4-ary h: find a gadget of the form
    /// `a|0000⟩+b|0011⟩+c|1100⟩+d|1111⟩` with full rank.
    fn interpolation_case(&mut self, h: Src, anchor_pos: &[usize]) -> Flow<Ending> {
        let p = anchor_pos.to_vec();
        let r: Vec<usize> = (0..4).filter(|s| !p.contains(s)).collect();
        let partitions = [
            ([p[0], p[1]], [r[0], r[1]]),
            ([p[0], r[0]], [p[1], r[1]]),
            ([p[0], r[1]], [p[1], r[0]]),
        ];
        let mut repeating = None;
        for (a, b) in partitions {
            let shapes: [(Vec<(Endpoint, Endpoint)>, Vec<Endpoint>, bool); 3] = [
                (vec![], vec![(0, a[0]), (0, a[1]), (0, b[0]), (0, b[1])], false),
                (
                    vec![((0, b[0]), (1, b[0])), ((0, b[1]), (1, b[1]))],
                    vec![(0, a[0]), (0, a[1]), (1, a[0]), (1, a[1])],
                    true,
                ),
                (
                    vec![((0, a[0]), (1, a[0])), ((0, a[1]), (1, a[1]))],
                    vec![(0, b[0]), (0, b[1]), (1, b[0]), (1, b[1])],
                    true,
                ),
            ];
            for (edges, dangling, doubled) in shapes {
                let vertices = if doubled { vec![h, h] } else { vec![h] };
                let note = if doubled {
                    "two copies joined on one input pair"
                } else {
                    "reorder the inputs into two pairs"
                };
                let g = self.b.gadget(StepKind::Composite, vertices, edges, dangling, note)?;
                let sig = self.sig(g);
                let Ok((_, normal)) = pair_normal_form(&sig) else { continue };
                let [a0, b0, c0, d0] = eq4_form(&normal)?;
                if (&a0 * &d0 - &b0 * &c0).is_zero() {
                    continue;
                }
                if is_generalised_equality(&sig) {
                    return Ok(self.end(Terminal::GeneralisedEquality4, vec![g], "4-ary generalised equality"));
                }
                if let Some(r) = power_period(&sig)? {
                    let vertices = vec![g; r];
                    let mut edges = Vec::new();
                    for t in 0..r - 1 {
                        edges.push(((t, 2), (t + 1, 0)));
                        edges.push(((t, 3), (t + 1, 1)));
                    }
                    let dangling = vec![(0, 0), (0, 1), (r - 1, 2), (r - 1, 3)];
                    let c = self.b.gadget(
                        StepKind::ChainGadget,
                        vertices,
                        edges,
                        dangling,
                        format!("chain of {r} copies; the coefficient matrix to the power {r} is scalar"),
                    )?;
                    if !is_generalised_equality(&self.sig(c)) {
                        return gap("chain of a periodic 4-ary signature is not a generalised equality");
                    }
                    return Ok(self.end(Terminal::GeneralisedEquality4, vec![c], "4-ary generalised equality"));
                }
                let frag = match interpolate_eq4_reduction(&sig, "subject") {
                    Ok(frag) => frag,
                    Err(Error::Precondition(why)) => {
                        repeating = Some(why);
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                let mut end = self.end(
                    Terminal::Equality4Interpolation,
                    vec![g],
                    "a 4-ary generalised equality is interpolated from powers of the subject",
                );
                end.params = frag.steps[0].params.clone();
                return Ok(end);
            }
        }
        if let Some(why) = repeating {
            return Err(Halt::Unknown(format!("every interpolation gadget failed: {why}")));
        }
        gap("D1 = 2 without a ternary pin or an interpolation form")
    }

    fn d2(&mut self, src: Src, unary: Src, anchor_slot: usize) -> Flow<Ending> {
        let f = self.sig(src);
        let a = Anchor { slots: vec![anchor_slot], sig: self.sig(unary) };
        let p = distance_profile(&f, 2, Some(&a))?;
        let (x, y) = p.witness.clone();
        let h = self.pin_agreeing(src, &p.rest_slots, &x, &y, "pin the inputs where the closest A2/B2 pair agrees")?;
        let kept: Vec<usize> = p.rest_slots.iter().zip(x.iter().zip(&y)).filter(|(_, (a, b))| a != b).map(|(&s, _)| s).collect();
        let pos = Self::positions(&[anchor_slot], &kept);
        match p.value {
            d if d >= 3 => match self.pin_to_equality(h, &pos)? {
                Some(e) => self.generalised_equality(e),
                None => gap("D2 >= 3 but no anchor pin leaves a generalised equality"),
            },
            2 => {
                if !is_genuine_ternary(&self.sig(h))? {
                    return gap("D2 = 2 ternary is not entangled");
                }
                self.ternary(h)
            }
            1 => {
                let mut anchor = vec![anchor_slot, kept[0]];
                anchor.sort_unstable();
                self.d3(src, h, anchor, unary)
            }
            _ => gap("D2 = 0"),
        }
    }

    fn d3(&mut self, src: Src, binary: Src, anchor: Vec<usize>, unary: Src) -> Flow<Ending> {
        let f = self.sig(src);
        if binary_det(&self.sig(binary)).is_zero() {
            return gap("D2 = 1 binary is not entangled");
        }
        let a = Anchor { slots: anchor.clone(), sig: self.sig(binary) };
        let p = distance_profile(&f, 3, Some(&a))?;
        let (x, y) = p.witness.clone();
        let h = self.pin_agreeing(src, &p.rest_slots, &x, &y, "pin the inputs where the closest A3/B3 pair agrees")?;
        let kept: Vec<usize> = p.rest_slots.iter().zip(x.iter().zip(&y)).filter(|(_, (a, b))| a != b).map(|(&s, _)| s).collect();
        let pos = Self::positions(&anchor, &kept);
        match p.value {
            d if d >= 3 => match self.pin_to_equality(h, &pos)? {
                Some(e) => self.generalised_equality(e),
                None => gap("D3 >= 3 but no anchor pin leaves a generalised equality"),
            },
            2 => {
                let free: Vec<usize> = (0..4).filter(|s| !pos.contains(s)).collect();
                for u in [unary, Src::Pin(0), Src::Pin(1)] {
                    for &slot in free.iter().rev() {
                        let t = self.b.apply_unaries(h, &[(slot, u)], "connect a unary to one of the two free inputs")?;
                        if is_genuine_ternary(&self.sig(t))? {
                            return self.ternary(t);
                        }
                    }
                }
                gap("D3 = 2 but no unary leaves an entangled ternary")
            }
            1 => {
                if !is_genuine_ternary(&self.sig(h))? {
                    return gap("D3 = 1 ternary is not entangled");
                }
                self.ternary(h)
            }
            _ => gap("D3 = 0"),
        }
    }
}

/// Consistency of a set's family memberships, used by the CLI report.
pub fn family_table(set: &[Signature], candidates: Option<&[Mat2]>) -> Result<Vec<FamilyVerdict>> {
    let mut out = vec![in_t_closure(set)?, in_a(set)?, exists_s_in_cs(set, candidates)?, in_l_set(set)?];
    out.push(exists_orthogonal_o(set)?);
    for (m, base, fam) in [
        (Mat2::k(), BaseFamily::E, Family::KE),
        (Mat2::k(), BaseFamily::M, Family::KM),
        (Mat2::kx(), BaseFamily::M, Family::KXM),
    ] {
        let mut v = in_transformed_closure(set, &m, base)?;
        v.family = fam;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Scalar;

    fn sym(w: &[i64]) -> Signature {
        Signature::symmetric_ints(w).unwrap()
    }

    fn ket4(entries: &[(usize, i64)]) -> Signature {
        let mut v = vec![0; 16];
        for &(i, x) in entries {
            v[i] = x;
        }
        Signature::from_ints(4, &v).unwrap()
    }

    fn hard(set: &[Signature]) -> Certificate {
        match classify_holant_c(set, None).unwrap() {
            Verdict::Hard { certificate } => {
                let r = verify_certificate(&certificate, set);
                assert!(r.ok, "{r}");
                certificate
            }
            other => panic!("expected Hard, got {other}"),
        }
    }

    fn terminal(c: &Certificate) -> Terminal {
        c.steps.last().unwrap().terminal.unwrap()
    }

    #[test]
    fn tractable_examples() {
        let v = classify_holant_c(&[Signature::equality(4).unwrap()], None).unwrap();
        assert_eq!(v.tag(), "Tractable(A)");

        let mut g = vec![Scalar::zero(); 8];
        g[0] = Scalar::one();
        g[7] = Scalar::zeta_pow(3);
        let v = classify_holant_c(&[Signature::new(3, g).unwrap()], None).unwrap();
        assert_eq!(v.tag(), "Tractable(SA)");
        match v {
            Verdict::Tractable { matrix: Some(m), .. } => assert!(m.proportional_to(&Mat2::t())),
            other => panic!("{other:?}"),
        }

        let kw = Signature::w().transform(&Mat2::k());
        assert_eq!(classify_holant_c(&[kw], None).unwrap().tag(), "Tractable(KM)");

        let set = [Signature::from_ints(1, &[1, 3]).unwrap(), Signature::from_ints(2, &[1, 2, 5, -1]).unwrap()];
        assert_eq!(classify_holant_c(&set, None).unwrap().tag(), "Tractable(T)");
    }

    #[test]
    fn hard_examples() {
        let c = hard(&[Signature::equality(3).unwrap(), sym(&[1, 2, 1])]);
        assert_eq!(terminal(&c), Terminal::GhzSymmetric);
        assert_eq!(c.steps.last().unwrap().citation.as_deref(), Some("symmetric-ternary-GHZ-csp-equivalence"));

        let c = hard(&[Signature::exact_one(3).unwrap()]);
        assert_eq!(terminal(&c), Terminal::WNotKm);
    }

    #[test]
    fn km_pipeline_with_outside_binary() {
        let kw = Signature::w().transform(&Mat2::k());
        let set = [kw.clone(), sym(&[1, 2, 1])];
        let c = hard(&set);
        assert!(matches!(terminal(&c), Terminal::GhzSymmetric | Terminal::WKmBinary | Terminal::WNotKm));
        assert_eq!(case_km_pipeline(&kw, &set).unwrap(), Verdict::Hard { certificate: c });
    }

    #[test]
    fn km_pipeline_with_higher_arity_witness() {
        // An asymmetric K∘M ternary and a 4-ary signature outside K∘M.
        let f = Signature::from_ints(3, &[1, 1, 2, 0, 1, 0, 0, 0]).unwrap().transform(&Mat2::k());
        let g = Signature::equality(4).unwrap();
        let c = hard(&[f, g]);
        assert!(c.steps.iter().any(|s| s.kind == StepKind::ApplyUnary));
    }

    #[test]
    fn self_loop_unary_of_km_ternary() {
        // Self-loop on K⊗³(a|000⟩+b|001⟩+c|010⟩+d|100⟩) is 2(b+c)(|0⟩+i|1⟩).
        let (a, b, c, d) = (3, 1, 2, 5);
        let f = Signature::from_ints(3, &[a, b, c, 0, d, 0, 0, 0]).unwrap().transform(&Mat2::k());
        let u = f.self_loop(1, 2).unwrap();
        let k = 2 * (b + c);
        assert_eq!(u, Signature::unary(Scalar::from_int(k), Scalar::from_int(k) * Scalar::i()));
    }

    #[test]
    fn ternary_hardness_entry() {
        let ghz = Signature::ghz();
        let v = ternary_hardness(&ghz, &[sym(&[1, 2, 1])]).unwrap();
        assert_eq!(v.tag(), "Hard");
        assert!(verify_verdict(&v, &[sym(&[1, 2, 1]), ghz.clone()]).unwrap().ok);
        let w = Signature::w();
        assert_eq!(ternary_hardness(&w, &[]).unwrap().tag(), "Hard");
        assert_eq!(ternary_hardness(&ghz, &[Signature::equality(2).unwrap()]).unwrap().tag(), "Tractable(A)");
        assert!(ternary_hardness(&Signature::equality(2).unwrap(), &[]).is_err());
    }

    #[test]
    fn symmetrize_ghz_examples() {
        assert_eq!(symmetrize_ghz(&Signature::ghz()).unwrap(), Signature::ghz());
        let m = [Mat2::from_ints(1, 2, 0, 1), Mat2::from_ints(1, 0, 1, 1), Mat2::from_ints(2, 1, 1, 1)];
        let mut f = Signature::ghz();
        for (s, x) in m.iter().enumerate() {
            f = f.apply_local(s, x).unwrap();
        }
        let g = symmetrize_ghz(&f).unwrap();
        assert!(g.is_symmetric());
        assert!(ternary_class(&g).unwrap().is_genuine());
        // Inner edges become ≠ in the K frame, so every triangle vanishes.
        let k_ghz = Signature::ghz().transform(&Mat2::k());
        assert_eq!(symmetrize_ghz(&k_ghz), Err(Error::AllDegenerate));
    }

    #[test]
    fn symmetrize_w_examples() {
        let eq2 = Signature::equality(2).unwrap();
        assert_eq!(symmetrize_w(&Signature::w(), Some(&eq2)).unwrap(), Signature::w());
        let f = Signature::w().apply_local(0, &Mat2::from_ints(1, 1, 0, 1)).unwrap();
        let g = symmetrize_w(&f, Some(&eq2)).unwrap();
        assert!(g.is_symmetric() && ternary_class(&g).unwrap().is_genuine());
        let degenerate = Signature::from_ints(2, &[1, 1, 1, 1]).unwrap();
        assert!(matches!(symmetrize_w(&Signature::w(), Some(&degenerate)), Err(Error::Precondition(_))));
    }

    #[test]
    fn interpolation_and_periodic_chains() {
        let c = hard(&[ket4(&[(0, 1), (3, 1), (15, 1)])]);
        assert_eq!(terminal(&c), Terminal::Equality4Interpolation);
        // [[1, 1], [-2, -1]] squares to -1 times the identity.
        let c = hard(&[ket4(&[(0, 1), (3, 1), (12, -2), (15, -1)])]);
        assert_eq!(terminal(&c), Terminal::GeneralisedEquality4);
        assert!(c.steps.iter().any(|s| s.kind == StepKind::ChainGadget));
    }

    #[test]
    fn tamper_detected() {
        let set = [Signature::w().transform(&Mat2::k()), sym(&[1, 2, 1])];
        let mut c = hard(&set);
        let k = c.steps.iter().position(|s| s.claimed_output.is_some()).expect("a gadget step");
        let out = c.steps[k].claimed_output.take().unwrap();
        let mut v = out.values().to_vec();
        v[0] = &v[0] + &Scalar::one();
        c.steps[k].claimed_output = Some(Signature::new(out.arity(), v).unwrap());
        let r = verify_certificate(&c, &set);
        assert!(!r.ok);
        assert_eq!(r.failed_step, Some(k));
        assert!(r.to_string().starts_with(&format!("FAIL at step {k}")));
    }

    #[test]
    fn empty_certificate_is_vacuous() {
        assert!(certificate_verify(&Certificate::default(), &[Signature::equality(4).unwrap()]));
    }

    #[test]
    fn deterministic_certificates() {
        let set = [Signature::w().transform(&Mat2::k()), sym(&[1, 2, 1])];
        let a = serde_json::to_string(&classify_holant_c(&set, None).unwrap()).unwrap();
        let b = serde_json::to_string(&classify_holant_c(&set, None).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn verdict_round_trip() {
        let set = [Signature::exact_one(3).unwrap()];
        let v = classify_holant_c(&set, None).unwrap();
        let back: Verdict = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn rejects_bad_sets() {
        assert!(classify_holant_c(&[], None).is_err());
        assert_eq!(classify_holant_c(&[Signature::zero(2).unwrap()], None), Err(Error::ZeroSignature));
    }
}
