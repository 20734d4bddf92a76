//! Certificates: replayable gadget steps ending in a theorem terminal.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::Mat2;
use crate::entanglement::{binary_det, ternary_class, TernaryClass};
use crate::error::{Error, Result};
use crate::families::{
    exists_orthogonal_o, exists_s_in_cs, in_a, in_l_set, in_m, in_transformed_closure, BaseFamily, Membership,
};
use crate::grid::{gadget_signature, Endpoint, SignatureGrid, Vertex};
use crate::signature::Signature;

use super::interpolation::{eq4_form, interpolation_demo, pair_normal_form};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Pin,
    SelfLoop,
    ApplyUnary,
    TriangleGadget,
    ChainGadget,
    HolographicTransform,
    Factor,
    /// Any other gadget built from earlier signatures.
    Composite,
    TheoremTerminal,
}

/// The theorem a certificate ends with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Terminal {
    /// Symmetric GHZ-type ternary; the set is outside ⟨O∘ℰ⟩, ⟨K∘ℰ⟩ and S∘𝒜.
    GhzSymmetric,
    /// Symmetric W-type ternary outside K∘ℳ ∪ KX∘ℳ.
    WNotKm,
    /// Symmetric W-type ternary in B∘ℳ with a symmetric binary outside ⟨B∘ℳ⟩.
    WKmBinary,
    /// 4-ary generalised equality.
    GeneralisedEquality4,
    /// 4-ary `a|0000⟩+b|0011⟩+c|1100⟩+d|1111⟩` of full rank.
    Equality4Interpolation,
}

impl Terminal {
    pub fn citation(self) -> &'static str {
        match self {
            Terminal::GhzSymmetric => "symmetric-ternary-GHZ-csp-equivalence",
            Terminal::WNotKm => "symmetric-ternary-W-dichotomy",
            Terminal::WKmBinary => "symmetric-ternary-W-dichotomy-with-binary",
            Terminal::GeneralisedEquality4 => "generalised-equality4-csp2",
            Terminal::Equality4Interpolation => "equality4-interpolation",
        }
    }
}

/// A gadget whose vertices name earlier signatures: `set:i`, `step:j`,
/// `pin0` or `pin1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gadget {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<[[usize; 2]; 2]>,
    #[serde(default)]
    pub dangling: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub kind: StepKind,
    /// Distinct signature references the step uses. For a terminal, the
    /// subject first and then the helper, if any.
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gadget: Option<Gadget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_output: Option<Signature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<Terminal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl ReductionStep {
    pub(crate) fn terminal(t: Terminal, inputs: Vec<String>, note: impl Into<String>) -> Self {
        ReductionStep {
            kind: StepKind::TheoremTerminal,
            inputs,
            gadget: None,
            claimed_output: None,
            terminal: Some(t),
            citation: Some(t.citation().to_string()),
            params: BTreeMap::new(),
            note: note.into(),
        }
    }
}

/// Serialized as a bare JSON list of steps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Certificate {
    pub steps: Vec<ReductionStep>,
}

/// Outcome of [`verify_certificate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_step: Option<usize>,
    pub message: String,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.failed_step {
            None if self.ok => write!(f, "PASS"),
            None => write!(f, "FAIL: {}", self.message),
            Some(k) => write!(f, "FAIL at step {k}: {}", self.message),
        }
    }
}

// ---------------------------------------------------------------------------
// Construction

/// A signature available to the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Src {
    Set(usize),
    Pin(u8),
    Node(usize),
}

struct Node {
    kind: StepKind,
    vertices: Vec<Src>,
    edges: Vec<(Endpoint, Endpoint)>,
    dangling: Vec<Endpoint>,
    sig: Signature,
    note: String,
    emitted: Option<usize>,
}

/// Records candidate gadgets and emits only those a terminal depends on.
pub(crate) struct Builder<'a> {
    set: &'a [Signature],
    nodes: Vec<Node>,
    steps: Vec<ReductionStep>,
}

impl<'a> Builder<'a> {
    pub(crate) fn new(set: &'a [Signature]) -> Self {
        Builder { set, nodes: Vec::new(), steps: Vec::new() }
    }

    pub(crate) fn sig(&self, s: Src) -> Signature {
        match s {
            Src::Set(k) => self.set[k].clone(),
            Src::Pin(b) => Signature::pin_signature(b),
            Src::Node(k) => self.nodes[k].sig.clone(),
        }
    }

    pub(crate) fn gadget(
        &mut self,
        kind: StepKind,
        vertices: Vec<Src>,
        edges: Vec<(Endpoint, Endpoint)>,
        dangling: Vec<Endpoint>,
        note: impl Into<String>,
    ) -> Result<Src> {
        let verts = vertices.iter().map(|&s| Vertex { name: String::new(), sig: self.sig(s) }).collect();
        let grid = SignatureGrid::new(verts, edges.clone(), dangling.clone(), None)?;
        let sig = gadget_signature(&grid)?;
        self.nodes.push(Node { kind, vertices, edges, dangling, sig, note: note.into(), emitted: None });
        Ok(Src::Node(self.nodes.len() - 1))
    }

    /// Pin the given slots; the output keeps the other slots in order.
    pub(crate) fn pin(&mut self, kind: StepKind, src: Src, pins: &[(usize, u8)], note: impl Into<String>) -> Result<Src> {
        if pins.is_empty() {
            return Ok(src);
        }
        let n = self.sig(src).arity();
        let mut vertices = vec![src];
        let mut edges = Vec::new();
        for &(slot, b) in pins {
            vertices.push(Src::Pin(b));
            edges.push(((0, slot), (vertices.len() - 1, 0)));
        }
        let dangling = (0..n).filter(|s| !pins.iter().any(|p| p.0 == *s)).map(|s| (0, s)).collect();
        self.gadget(kind, vertices, edges, dangling, note)
    }

    /// Contract the given slots with unary signatures.
    pub(crate) fn apply_unaries(&mut self, src: Src, unaries: &[(usize, Src)], note: impl Into<String>) -> Result<Src> {
        let n = self.sig(src).arity();
        let mut vertices = vec![src];
        let mut edges = Vec::new();
        for &(slot, u) in unaries {
            vertices.push(u);
            edges.push(((0, slot), (vertices.len() - 1, 0)));
        }
        let dangling = (0..n).filter(|s| !unaries.iter().any(|p| p.0 == *s)).map(|s| (0, s)).collect();
        self.gadget(StepKind::ApplyUnary, vertices, edges, dangling, note)
    }

    pub(crate) fn self_loop(&mut self, src: Src, i: usize, j: usize, note: impl Into<String>) -> Result<Src> {
        let n = self.sig(src).arity();
        let dangling = (0..n).filter(|&s| s != i && s != j).map(|s| (0, s)).collect();
        self.gadget(StepKind::SelfLoop, vec![src], vec![((0, i), (0, j))], dangling, note)
    }

    fn reference(&mut self, s: Src) -> String {
        match s {
            Src::Set(k) => format!("set:{k}"),
            Src::Pin(b) => format!("pin{b}"),
            Src::Node(k) => {
                if let Some(e) = self.nodes[k].emitted {
                    return format!("step:{e}");
                }
                let deps = self.nodes[k].vertices.clone();
                let names: Vec<String> = deps.into_iter().map(|d| self.reference(d)).collect();
                let node = &self.nodes[k];
                let mut inputs: Vec<String> = Vec::new();
                for nm in &names {
                    if !inputs.contains(nm) {
                        inputs.push(nm.clone());
                    }
                }
                let step = ReductionStep {
                    kind: node.kind,
                    inputs,
                    gadget: Some(Gadget {
                        vertices: names,
                        edges: node.edges.iter().map(|&((a, sa), (b, sb))| [[a, sa], [b, sb]]).collect(),
                        dangling: node.dangling.iter().map(|&(v, s)| [v, s]).collect(),
                    }),
                    claimed_output: Some(node.sig.clone()),
                    terminal: None,
                    citation: None,
                    params: BTreeMap::new(),
                    note: node.note.clone(),
                };
                self.steps.push(step);
                let e = self.steps.len() - 1;
                self.nodes[k].emitted = Some(e);
                format!("step:{e}")
            }
        }
    }

    pub(crate) fn finish_with(
        mut self,
        t: Terminal,
        subjects: &[Src],
        params: BTreeMap<String, String>,
        note: impl Into<String>,
    ) -> Certificate {
        let inputs = subjects.iter().map(|&s| self.reference(s)).collect();
        let mut step = ReductionStep::terminal(t, inputs, note);
        step.params = params;
        self.steps.push(step);
        Certificate { steps: self.steps }
    }
}

// ---------------------------------------------------------------------------
// Verification

struct Fail(String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(e.to_string())
    }
}

fn resolve(name: &str, set: &[Signature], outputs: &[Option<Signature>]) -> std::result::Result<Signature, Fail> {
    match name {
        "pin0" => return Ok(Signature::delta0()),
        "pin1" => return Ok(Signature::delta1()),
        _ => {}
    }
    let bad = || Fail(format!("unknown reference {name:?}"));
    let (kind, idx) = name.split_once(':').ok_or_else(bad)?;
    let idx: usize = idx.parse().map_err(|_| bad())?;
    match kind {
        "set" => set.get(idx).cloned().ok_or_else(|| Fail(format!("{name} is outside the set"))),
        "step" => match outputs.get(idx) {
            Some(Some(s)) => Ok(s.clone()),
            Some(None) => Err(Fail(format!("{name} has no output"))),
            None => Err(Fail(format!("{name} refers forward"))),
        },
        _ => Err(bad()),
    }
}

fn replay(step: &ReductionStep, set: &[Signature], outputs: &[Option<Signature>]) -> std::result::Result<Signature, Fail> {
    let g = step.gadget.as_ref().ok_or_else(|| Fail("gadget step without a gadget".into()))?;
    let claimed = step.claimed_output.as_ref().ok_or_else(|| Fail("gadget step without claimed output".into()))?;
    let vertices = g
        .vertices
        .iter()
        .map(|nm| Ok(Vertex { name: nm.clone(), sig: resolve(nm, set, outputs)? }))
        .collect::<std::result::Result<Vec<_>, Fail>>()?;
    let edges = g.edges.iter().map(|&[[a, sa], [b, sb]]| ((a, sa), (b, sb))).collect();
    let dangling = g.dangling.iter().map(|&[v, s]| (v, s)).collect();
    let got = gadget_signature(&SignatureGrid::new(vertices, edges, dangling, None)?)?;
    if &got != claimed {
        return Err(Fail(format!("replay gives {got}, claimed {claimed}")));
    }
    Ok(got)
}

fn require(cond: bool, msg: impl Into<String>) -> std::result::Result<(), Fail> {
    if cond {
        Ok(())
    } else {
        Err(Fail(msg.into()))
    }
}

fn not_member(m: Membership, what: &str) -> std::result::Result<(), Fail> {
    require(m == Membership::NotMember, format!("the set is not shown to be outside {what} ({m})"))
}

pub(crate) fn km_base(f: &Signature) -> Result<Option<Mat2>> {
    for m in [Mat2::k(), Mat2::kx()] {
        if in_m(&f.transform(&m.invert()?))? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Set-level conditions under which #CSP₂ with pins is hard.
pub(crate) fn csp2_hard(set: &[Signature]) -> Result<Option<String>> {
    if in_transformed_closure(set, &Mat2::identity(), BaseFamily::E)?.is_member() {
        return Ok(Some("the set lies in <E>".into()));
    }
    if in_a(set)?.is_member() {
        return Ok(Some("the set is affine".into()));
    }
    let tinv = Mat2::t().invert()?;
    let twisted: Vec<Signature> = set.iter().map(|f| f.transform(&tinv)).collect();
    if in_a(&twisted)?.is_member() {
        return Ok(Some("the set lies in T∘A".into()));
    }
    if in_l_set(set)?.is_member() {
        return Ok(Some("the set lies in L".into()));
    }
    Ok(None)
}

fn check_terminal(t: Terminal, subjects: &[Signature], set: &[Signature]) -> std::result::Result<(), Fail> {
    let subject = subjects.first().ok_or_else(|| Fail("terminal without subject".into()))?;
    match t {
        Terminal::GhzSymmetric => {
            require(subject.arity() == 3 && subject.is_symmetric(), "subject is not a symmetric ternary")?;
            require(ternary_class(subject)? == TernaryClass::Ghz, "subject is not of GHZ type")?;
            not_member(exists_orthogonal_o(set)?.member, "<O∘E>")?;
            not_member(in_transformed_closure(set, &Mat2::k(), BaseFamily::E)?.member, "<K∘E>")?;
            not_member(exists_s_in_cs(set, None)?.member, "S∘A")?;
        }
        Terminal::WNotKm => {
            require(subject.arity() == 3 && subject.is_symmetric(), "subject is not a symmetric ternary")?;
            require(ternary_class(subject)? == TernaryClass::W, "subject is not of W type")?;
            require(km_base(subject)?.is_none(), "subject lies in K∘M or KX∘M")?;
        }
        Terminal::WKmBinary => {
            require(subject.arity() == 3 && subject.is_symmetric(), "subject is not a symmetric ternary")?;
            require(ternary_class(subject)? == TernaryClass::W, "subject is not of W type")?;
            let helper = subjects.get(1).ok_or_else(|| Fail("missing binary helper".into()))?;
            require(helper.arity() == 2 && helper.is_symmetric(), "helper is not a symmetric binary")?;
            require(!binary_det(helper).is_zero(), "helper is degenerate")?;
            let mut matched = false;
            for m in [Mat2::k(), Mat2::kx()] {
                let inv = m.invert()?;
                if in_m(&subject.transform(&inv))? {
                    matched = true;
                    require(!in_m(&helper.transform(&inv))?, format!("helper lies in {m}∘M as well"))?;
                }
            }
            require(matched, "subject lies in neither K∘M nor KX∘M")?;
        }
        Terminal::GeneralisedEquality4 => {
            require(subject.arity() == 4, "subject is not 4-ary")?;
            let s = subject.support();
            require(s.len() == 2 && s[0] ^ s[1] == 15, "support is not a complementary pair")?;
            if let Some(why) = csp2_hard(set)? {
                return Err(Fail(why));
            }
        }
        Terminal::Equality4Interpolation => {
            let [a, b, c, d] = eq4_form(&pair_normal_form(subject)?.1)?;
            require(!(&a * &d - &b * &c).is_zero(), "coefficient matrix is singular")?;
            let demo = interpolation_demo(subject)?;
            require(demo.recovered == demo.expected, "interpolation demonstration does not reproduce the Holant")?;
            if let Some(why) = csp2_hard(set)? {
                return Err(Fail(why));
            }
        }
    }
    Ok(())
}

/// Replay every step and check the terminal's side conditions.
pub fn verify_certificate(cert: &Certificate, set: &[Signature]) -> VerifyReport {
    let mut outputs: Vec<Option<Signature>> = Vec::with_capacity(cert.steps.len());
    for (k, step) in cert.steps.iter().enumerate() {
        let res: std::result::Result<Option<Signature>, Fail> = (|| {
            if step.kind == StepKind::TheoremTerminal {
                require(k + 1 == cert.steps.len(), "terminal before the last step")?;
                let t = step.terminal.ok_or_else(|| Fail("terminal kind missing".into()))?;
                require(step.citation.as_deref() == Some(t.citation()), "citation does not match the terminal")?;
                let subjects = step
                    .inputs
                    .iter()
                    .map(|nm| resolve(nm, set, &outputs))
                    .collect::<std::result::Result<Vec<_>, Fail>>()?;
                check_terminal(t, &subjects, set)?;
                Ok(None)
            } else {
                Ok(Some(replay(step, set, &outputs)?))
            }
        })();
        match res {
            Ok(out) => outputs.push(out),
            Err(Fail(message)) => return VerifyReport { ok: false, failed_step: Some(k), message },
        }
    }
    if let Some(last) = cert.steps.last() {
        if last.kind != StepKind::TheoremTerminal {
            return VerifyReport {
                ok: false,
                failed_step: Some(cert.steps.len() - 1),
                message: "certificate does not end with a theorem terminal".into(),
            };
        }
    }
    VerifyReport { ok: true, failed_step: None, message: String::new() }
}

/// `true` iff [`verify_certificate`] passes.
pub fn certificate_verify(cert: &Certificate, set: &[Signature]) -> bool {
    verify_certificate(cert, set).ok
}
