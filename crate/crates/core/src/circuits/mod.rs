//! Timestep-scheduled circuits, the fault-tolerant gadgets built from
//! them, and extended rectangles.
//!
//! A [`Circuit`] is a list of layers; each layer holds at most one
//! [`ElementaryOp`] per qubit and every live qubit appears in every layer
//! (waiting is an explicit `idle` op). Classical processing is a list of
//! [`ClassicalNode`]s that read measurement outcomes and update the Pauli
//! frame of a set of qubits.

mod builder;
pub mod exrec;
pub mod flows;
pub mod gadgets;
pub mod text;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use exrec::{
    build_exrec, count_locations, Criterion, EcMethod, ExRec, ExRecOptions, SectionKind,
};
pub use gadgets::{
    build_bell_prep_L, build_gauge_ec, build_gauge_meas, build_knill_ec, build_prep_plus_L,
    build_prep_zero_L, build_steane_ec, AncillaPolicy, CheckOrder, GaugeEcConfig,
};

/// Index into [`Circuit::measurements`].
pub type MeasId = usize;

/// Kinds of elementary operation. Every op is one fault location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    PrepZero,
    PrepPlus,
    MeasZ,
    MeasX,
    Cnot,
    Hadamard,
    Idle,
}

impl OpKind {
    pub fn arity(self) -> usize {
        if self == OpKind::Cnot {
            2
        } else {
            1
        }
    }

    pub fn is_prep(self) -> bool {
        matches!(self, OpKind::PrepZero | OpKind::PrepPlus)
    }

    pub fn is_meas(self) -> bool {
        matches!(self, OpKind::MeasZ | OpKind::MeasX)
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::PrepZero => "prep0",
            OpKind::PrepPlus => "prep+",
            OpKind::MeasZ => "meas_z",
            OpKind::MeasX => "meas_x",
            OpKind::Cnot => "cnot",
            OpKind::Hadamard => "h",
            OpKind::Idle => "idle",
        }
    }

    /// The op obtained by conjugating with Hadamards on every qubit.
    pub fn hadamard_dual(self) -> OpKind {
        match self {
            OpKind::PrepZero => OpKind::PrepPlus,
            OpKind::PrepPlus => OpKind::PrepZero,
            OpKind::MeasZ => OpKind::MeasX,
            OpKind::MeasX => OpKind::MeasZ,
            other => other,
        }
    }
}

impl FromStr for OpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "prep0" => OpKind::PrepZero,
            "prep+" => OpKind::PrepPlus,
            "meas_z" => OpKind::MeasZ,
            "meas_x" => OpKind::MeasX,
            "cnot" => OpKind::Cnot,
            "h" => OpKind::Hadamard,
            "idle" => OpKind::Idle,
            _ => return Err(Error::Parse(format!("unknown op kind {s:?}"))),
        })
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

/// One gate, preparation, measurement or memory step.
///
/// For a CNOT `qubits = [control, target]`; single-qubit ops repeat their
/// qubit in both slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ElementaryOp {
    pub kind: OpKind,
    pub qubits: [usize; 2],
    /// Outcome label, set on measurements only.
    pub meas: Option<MeasId>,
    /// Index into [`Circuit::sections`].
    pub section: u16,
}

impl ElementaryOp {
    pub fn targets(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn first_qubit(&self) -> usize {
        self.qubits[0]
    }
}

/// A measurement record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Measurement {
    pub layer: usize,
    pub qubit: usize,
    pub basis: Basis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegisterRole {
    Data,
    Ancilla,
}

/// Named group of qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub role: RegisterRole,
    pub qubits: Vec<usize>,
}

/// Stabilizer-bit readouts of one syndrome-extraction round.
///
/// `x_checks[j]` lists the outcomes whose parity is the flip of the j-th
/// X-type stabilizer; likewise `z_checks`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SyndromeRound {
    pub x_checks: Vec<Vec<MeasId>>,
    pub z_checks: Vec<Vec<MeasId>>,
}

/// What a classical node computes and which frame update it applies.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum FrameRule {
    /// Decode the block `target` (n² qubits, row-major) from one or more
    /// syndrome rounds and apply the canonical correction. With several
    /// rounds the first run of `agree` consecutive equal rounds is used,
    /// otherwise the last round; X and Z checks are treated separately.
    Decode {
        target: Vec<usize>,
        rounds: Vec<SyndromeRound>,
        #[serde(default = "default_agree")]
        agree: usize,
    },
    /// Logical teleportation: `x_outcomes` are the X-basis readouts of the
    /// source block, `z_outcomes` the Z-basis readouts of the Bell half it
    /// was coupled to (both row-major). Applies Z_L and X_L on `target`.
    Teleport {
        target: Vec<usize>,
        x_outcomes: Vec<MeasId>,
        z_outcomes: Vec<MeasId>,
    },
    /// Cat-state verification: when the flag fires the cat on `reset` is
    /// discarded and ideally re-prepared, which clears its frame.
    Verify { flag: MeasId, reset: Vec<usize> },
}

fn default_agree() -> usize {
    2
}

/// A classical frame-update node. The update is applied to the frame right
/// after layer `anchor`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassicalNode {
    pub label: String,
    pub anchor: usize,
    #[serde(flatten)]
    pub rule: FrameRule,
}

impl ClassicalNode {
    /// All measurement outcomes the node reads.
    pub fn inputs(&self) -> Vec<MeasId> {
        let mut v: Vec<MeasId> = match &self.rule {
            FrameRule::Decode { rounds, .. } => rounds
                .iter()
                .flat_map(|r| {
                    r.x_checks
                        .iter()
                        .chain(r.z_checks.iter())
                        .flatten()
                        .copied()
                })
                .collect(),
            FrameRule::Teleport {
                x_outcomes,
                z_outcomes,
                ..
            } => x_outcomes.iter().chain(z_outcomes).copied().collect(),
            FrameRule::Verify { flag, .. } => vec![*flag],
        };
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Qubits whose frame the node may change.
    pub fn target(&self) -> &[usize] {
        match &self.rule {
            FrameRule::Decode { target, .. } | FrameRule::Teleport { target, .. } => target,
            FrameRule::Verify { reset, .. } => reset,
        }
    }
}

/// Parts from which a [`Circuit`] is assembled and validated.
#[derive(Clone, Debug, Default)]
pub struct CircuitParts {
    pub n: usize,
    pub num_qubits: usize,
    pub layers: Vec<Vec<ElementaryOp>>,
    pub registers: Vec<Register>,
    pub inputs: Vec<Vec<usize>>,
    pub outputs: Vec<Vec<usize>>,
    pub nodes: Vec<ClassicalNode>,
    pub sections: Vec<String>,
    /// Layer at which each input block becomes live.
    pub input_layers: Vec<usize>,
}

/// A validated, immutable circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    num_qubits: usize,
    layers: Vec<Vec<ElementaryOp>>,
    registers: Vec<Register>,
    inputs: Vec<Vec<usize>>,
    outputs: Vec<Vec<usize>>,
    input_layers: Vec<usize>,
    measurements: Vec<Measurement>,
    nodes: Vec<ClassicalNode>,
    sections: Vec<String>,
    locations: Vec<(usize, usize)>,
    node_order: Vec<usize>,
    node_ready: Vec<usize>,
}

impl Circuit {
    /// Validates and assembles a circuit.
    ///
    /// Ops within a layer are re-sorted by first qubit. Measurement ids must
    /// be exactly `0..m`, each used once.
    pub fn from_parts(parts: CircuitParts) -> Result<Circuit> {
        let CircuitParts {
            n,
            num_qubits,
            mut layers,
            registers,
            inputs,
            outputs,
            nodes,
            sections,
            input_layers,
        } = parts;
        let bad = |msg: String| Err(Error::Precondition(msg));
        if n < 2 {
            return bad(format!("code size n must be at least 2, got {n}"));
        }
        if sections.is_empty() {
            return bad("a circuit needs at least one section".into());
        }
        if input_layers.len() != inputs.len() {
            return bad("one input layer per input block is required".into());
        }
        for block in inputs.iter().chain(&outputs) {
            if block.len() != n * n {
                return bad(format!(
                    "data block of {} qubits, expected {}",
                    block.len(),
                    n * n
                ));
            }
            if let Some(&q) = block.iter().find(|&&q| q >= num_qubits) {
                return Err(Error::UnknownId {
                    kind: "qubit",
                    id: q,
                });
            }
        }

        // per-layer structure
        let mut meas_slots: Vec<Option<Measurement>> = Vec::new();
        for (t, layer) in layers.iter_mut().enumerate() {
            layer.sort_by_key(|op| op.first_qubit());
            let mut seen = BTreeSet::new();
            for op in layer.iter() {
                if op.kind == OpKind::Cnot && op.qubits[0] == op.qubits[1] {
                    return bad(format!(
                        "cnot at layer {t} has identical control and target"
                    ));
                }
                if op.kind != OpKind::Cnot && op.qubits[0] != op.qubits[1] {
                    return bad(format!(
                        "single-qubit {} at layer {t} names two qubits",
                        op.kind
                    ));
                }
                if (op.section as usize) >= sections.len() {
                    return Err(Error::UnknownId {
                        kind: "section",
                        id: op.section as usize,
                    });
                }
                for &q in op.targets() {
                    if q >= num_qubits {
                        return Err(Error::UnknownId {
                            kind: "qubit",
                            id: q,
                        });
                    }
                    if !seen.insert(q) {
                        return bad(format!("qubit {q} used twice in layer {t}"));
                    }
                }
                match (op.kind.is_meas(), op.meas) {
                    (true, Some(m)) => {
                        if meas_slots.len() <= m {
                            meas_slots.resize(m + 1, None);
                        }
                        if meas_slots[m].is_some() {
                            return bad(format!("measurement id m{m} used twice"));
                        }
                        meas_slots[m] = Some(Measurement {
                            layer: t,
                            qubit: op.qubits[0],
                            basis: if op.kind == OpKind::MeasZ {
                                Basis::Z
                            } else {
                                Basis::X
                            },
                        });
                    }
                    (true, None) => {
                        return bad(format!("measurement at layer {t} has no outcome label"))
                    }
                    (false, Some(_)) => {
                        return bad(format!("non-measurement at layer {t} has an outcome label"))
                    }
                    (false, None) => {}
                }
            }
        }
        let measurements: Vec<Measurement> = meas_slots
            .into_iter()
            .enumerate()
            .map(|(m, s)| {
                s.ok_or(Error::UnknownId {
                    kind: "measurement",
                    id: m,
                })
            })
            .collect::<Result<_>>()?;

        // liveness and idle completeness
        let mut first_live = vec![usize::MAX; num_qubits];
        for (block, &t) in inputs.iter().zip(&input_layers) {
            for &q in block {
                first_live[q] = first_live[q].min(t);
            }
        }
        let mut history: Vec<Vec<(usize, OpKind)>> = vec![Vec::new(); num_qubits];
        for (t, layer) in layers.iter().enumerate() {
            for op in layer {
                for &q in op.targets() {
                    history[q].push((t, op.kind));
                }
            }
        }
        for (q, h) in history.iter().enumerate() {
            if let Some(&(t, _)) = h.first() {
                if first_live[q] != usize::MAX && first_live[q] < t {
                    return bad(format!(
                        "input qubit {q} is not accounted for at layer {}",
                        first_live[q]
                    ));
                }
            }
            for w in h.windows(2) {
                let ((a, ka), (b, kb)) = (w[0], w[1]);
                if ka.is_meas() && !kb.is_prep() {
                    return bad(format!(
                        "qubit {q} is used at layer {b} after being measured at {a}"
                    ));
                }
                if b > a + 1 && !ka.is_meas() {
                    return bad(format!(
                        "qubit {q} is live but has no op at layer {}",
                        a + 1
                    ));
                }
            }
        }

        // classical nodes
        let nlayers = layers.len();
        let mut node_ready = Vec::with_capacity(nodes.len());
        for node in &nodes {
            if node.anchor >= nlayers {
                return bad(format!("node {} anchored past the last layer", node.label));
            }
            for &q in node.target() {
                if q >= num_qubits {
                    return Err(Error::UnknownId {
                        kind: "qubit",
                        id: q,
                    });
                }
            }
            let inputs = node.inputs();
            if let Some(&m) = inputs.iter().find(|&&m| m >= measurements.len()) {
                return Err(Error::UnknownId {
                    kind: "measurement",
                    id: m,
                });
            }
            match &node.rule {
                FrameRule::Decode {
                    target,
                    rounds,
                    agree,
                } => {
                    if target.len() != n * n {
                        return bad(format!("decode node {} needs a full block", node.label));
                    }
                    if *agree == 0 {
                        return bad(format!("decode node {} needs agree >= 1", node.label));
                    }
                    if rounds.is_empty()
                        || rounds
                            .iter()
                            .any(|r| r.x_checks.len() != n - 1 || r.z_checks.len() != n - 1)
                    {
                        return bad(format!(
                            "decode node {} needs n-1 checks of each type per round",
                            node.label
                        ));
                    }
                }
                FrameRule::Teleport {
                    target,
                    x_outcomes,
                    z_outcomes,
                } => {
                    if target.len() != n * n
                        || x_outcomes.len() != n * n
                        || z_outcomes.len() != n * n
                    {
                        return bad(format!("teleport node {} needs full blocks", node.label));
                    }
                }
                FrameRule::Verify { .. } => {}
            }
            node_ready.push(
                inputs
                    .iter()
                    .map(|&m| measurements[m].layer)
                    .max()
                    .unwrap_or(node.anchor),
            );
        }
        let mut node_order: Vec<usize> = (0..nodes.len()).collect();
        node_order.sort_by_key(|&i| (node_ready[i], i));

        let locations = layers
            .iter()
            .enumerate()
            .flat_map(|(t, layer)| (0..layer.len()).map(move |i| (t, i)))
            .collect();

        let circuit = Circuit {
            n,
            num_qubits,
            layers,
            registers,
            inputs,
            outputs,
            input_layers,
            measurements,
            nodes,
            sections,
            locations,
            node_order,
            node_ready,
        };
        circuit.check_causality()?;
        flows::check_nodes(&circuit)?;
        Ok(circuit)
    }

    /// Conservative check that a node's correction cannot reach any outcome
    /// read at or before the node's ready time, nor the cat of a
    /// verification that is resolved earlier.
    fn check_causality(&self) -> Result<()> {
        for (pos, &i) in self.node_order.iter().enumerate() {
            let node = &self.nodes[i];
            let ready = self.node_ready[i];
            let mut reach = vec![false; self.num_qubits];
            for &q in node.target() {
                reach[q] = true;
            }
            let earlier_verifies: Vec<usize> = self.node_order[..pos]
                .iter()
                .copied()
                .filter(|&j| {
                    matches!(self.nodes[j].rule, FrameRule::Verify { .. })
                        && self.nodes[j].anchor > node.anchor
                })
                .collect();
            for t in node.anchor + 1..self.layers.len() {
                for op in &self.layers[t] {
                    match op.kind {
                        OpKind::Cnot => {
                            let [c, g] = op.qubits;
                            let r = reach[c] || reach[g];
                            reach[c] = r;
                            reach[g] = r;
                        }
                        OpKind::PrepZero | OpKind::PrepPlus => reach[op.qubits[0]] = false,
                        OpKind::MeasZ | OpKind::MeasX if reach[op.qubits[0]] && t <= ready => {
                            return Err(Error::Precondition(format!(
                                "node {} corrects a qubit read at layer {t}, before its inputs are known",
                                node.label
                            )));
                        }
                        _ => {}
                    }
                }
                for &j in &earlier_verifies {
                    if self.nodes[j].anchor == t && self.nodes[j].target().iter().any(|&q| reach[q])
                    {
                        return Err(Error::Precondition(format!(
                            "node {} reaches the cat of verification {} before it is checked",
                            node.label, self.nodes[j].label
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Code size of the data blocks.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<ElementaryOp>] {
        &self.layers
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    /// Input data blocks, each `n²` qubits in row-major order.
    pub fn inputs(&self) -> &[Vec<usize>] {
        &self.inputs
    }

    pub fn input_layers(&self) -> &[usize] {
        &self.input_layers
    }

    /// Output data blocks, each `n²` qubits in row-major order.
    pub fn outputs(&self) -> &[Vec<usize>] {
        &self.outputs
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn nodes(&self) -> &[ClassicalNode] {
        &self.nodes
    }

    pub fn sections(&self) -> &[String] {
        &self.sections
    }

    /// Node indices in processing order (by the layer of their last input).
    pub fn node_order(&self) -> &[usize] {
        &self.node_order
    }

    /// Layer of the last outcome node `i` reads.
    pub fn node_ready(&self, i: usize) -> usize {
        self.node_ready[i]
    }

    /// Number of fault locations (ops).
    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    /// `(layer, index within layer)` of a location id.
    pub fn location(&self, id: usize) -> Result<(usize, usize)> {
        self.locations.get(id).copied().ok_or(Error::UnknownId {
            kind: "location",
            id,
        })
    }

    pub fn op_at(&self, id: usize) -> Result<&ElementaryOp> {
        let (t, i) = self.location(id)?;
        Ok(&self.layers[t][i])
    }

    /// All ops with their location id and layer.
    pub fn iter_ops(&self) -> impl Iterator<Item = (usize, usize, &ElementaryOp)> + '_ {
        self.locations
            .iter()
            .enumerate()
            .map(move |(id, &(t, i))| (id, t, &self.layers[t][i]))
    }

    /// Number of ops of each kind.
    pub fn op_counts(&self) -> std::collections::BTreeMap<OpKind, usize> {
        let mut m = std::collections::BTreeMap::new();
        for (_, _, op) in self.iter_ops() {
            *m.entry(op.kind).or_insert(0) += 1;
        }
        m
    }

    /// Number of locations in each section.
    pub fn section_counts(&self) -> Vec<usize> {
        let mut v = vec![0; self.sections.len()];
        for (_, _, op) in self.iter_ops() {
            v[op.section as usize] += 1;
        }
        v
    }

    /// Decomposes into parts, e.g. for transformation.
    pub fn to_parts(&self) -> CircuitParts {
        CircuitParts {
            n: self.n,
            num_qubits: self.num_qubits,
            layers: self.layers.clone(),
            registers: self.registers.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            nodes: self.nodes.clone(),
            sections: self.sections.clone(),
            input_layers: self.input_layers.clone(),
        }
    }

    /// Renames qubit `q` to `perm[q]` everywhere.
    pub fn relabel(&self, perm: &[usize]) -> Result<Circuit> {
        if perm.len() != self.num_qubits {
            return Err(Error::Dimension {
                expected: self.num_qubits,
                actual: perm.len(),
            });
        }
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check.iter().enumerate().any(|(i, &q)| i != q) {
            return Err(Error::InvalidParameter(
                "relabeling is not a permutation".into(),
            ));
        }
        let mut parts = self.to_parts();
        let map = |v: &mut Vec<usize>| v.iter_mut().for_each(|q| *q = perm[*q]);
        for layer in parts.layers.iter_mut() {
            for op in layer.iter_mut() {
                op.qubits = [perm[op.qubits[0]], perm[op.qubits[1]]];
            }
        }
        parts.registers.iter_mut().for_each(|r| map(&mut r.qubits));
        parts.inputs.iter_mut().for_each(map);
        parts.outputs.iter_mut().for_each(map);
        for node in parts.nodes.iter_mut() {
            match &mut node.rule {
                FrameRule::Decode { target, .. } | FrameRule::Teleport { target, .. } => {
                    map(target)
                }
                FrameRule::Verify { reset, .. } => map(reset),
            }
        }
        Circuit::from_parts(parts)
    }

    /// Conjugates the whole circuit by Hadamards on every qubit: preparation
    /// and measurement bases swap and CNOTs reverse direction. Only
    /// circuits whose classical nodes are verifications are supported.
    pub fn hadamard_dual(&self) -> Result<Circuit> {
        if self
            .nodes
            .iter()
            .any(|n| !matches!(n.rule, FrameRule::Verify { .. }))
        {
            return Err(Error::Precondition(
                "hadamard_dual supports verification nodes only".into(),
            ));
        }
        let mut parts = self.to_parts();
        for layer in parts.layers.iter_mut() {
            for op in layer.iter_mut() {
                op.kind = op.kind.hadamard_dual();
                if op.kind == OpKind::Cnot {
                    op.qubits = [op.qubits[1], op.qubits[0]];
                }
            }
        }
        Circuit::from_parts(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(kind: OpKind, a: usize, b: usize) -> ElementaryOp {
        ElementaryOp {
            kind,
            qubits: [a, b],
            meas: None,
            section: 0,
        }
    }

    fn parts(layers: Vec<Vec<ElementaryOp>>) -> CircuitParts {
        CircuitParts {
            n: 2,
            num_qubits: 6,
            layers,
            sections: vec!["main".into()],
            ..Default::default()
        }
    }

    #[test]
    fn rejects_double_use() {
        let p = parts(vec![vec![op(OpKind::Cnot, 0, 1), op(OpKind::Idle, 1, 1)]]);
        assert!(Circuit::from_parts(p).is_err());
    }

    #[test]
    fn rejects_missing_idle() {
        let p = parts(vec![
            vec![op(OpKind::PrepZero, 0, 0)],
            vec![],
            vec![op(OpKind::Hadamard, 0, 0)],
        ]);
        assert!(Circuit::from_parts(p).is_err());
    }

    #[test]
    fn allows_gap_between_measurement_and_reprep() {
        let mut m = op(OpKind::MeasZ, 0, 0);
        m.meas = Some(0);
        let p = parts(vec![
            vec![op(OpKind::PrepZero, 0, 0)],
            vec![m],
            vec![],
            vec![op(OpKind::PrepPlus, 0, 0)],
        ]);
        let c = Circuit::from_parts(p).unwrap();
        assert_eq!(c.num_locations(), 3);
        assert_eq!(c.measurements()[0].layer, 1);
    }

    #[test]
    fn rejects_use_after_measurement() {
        let mut m = op(OpKind::MeasZ, 0, 0);
        m.meas = Some(0);
        let p = parts(vec![
            vec![op(OpKind::PrepZero, 0, 0)],
            vec![m],
            vec![op(OpKind::Idle, 0, 0)],
        ]);
        assert!(Circuit::from_parts(p).is_err());
    }

    #[test]
    fn relabel_rejects_non_permutation() {
        let c = Circuit::from_parts(parts(vec![vec![op(OpKind::PrepZero, 0, 0)]])).unwrap();
        assert!(c.relabel(&[0, 0, 1, 2, 3, 4]).is_err());
        let r = c.relabel(&[5, 0, 1, 2, 3, 4]).unwrap();
        assert_eq!(r.layers()[0][0].qubits, [5, 5]);
    }
}
