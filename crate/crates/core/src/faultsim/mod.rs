//! Pauli-frame propagation of fault assignments.
//!
//! The frame records the deviation from a fault-free reference run. Only
//! outcome flips are tracked; the circuits guarantee (see
//! [`crate::circuits::flows::check_nodes`]) that every parity a classical
//! node reads is deterministic in the reference run, so flips are all the
//! nodes need.
//!
//! Propagation is done in two passes. The first walks the circuit once
//! with the faults injected. Nodes are then resolved in order of their
//! last input; each node's correction is pushed forward from its anchor
//! and merged into the outcome flips and the final frame. By linearity
//! this equals applying every correction at its anchor during the walk.

pub mod compiled;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::circuits::{Circuit, Criterion, ExRec, FrameRule, OpKind, SyndromeRound};
use crate::code::{decoded_logical_effect, repetition_decode, BaconShorCode, LogicalEffect};
use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOp};

pub use compiled::{CompiledCircuit, Scratch};

/// What goes wrong at a faulty location. Pauli faults act right after the
/// op; a faulty measurement reports the flipped outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaultAction {
    /// Single-qubit Pauli after a preparation, idle, Hadamard.
    Single(Pauli1),
    /// Paulis on (control, target) after a CNOT.
    Pair(Pauli1, Pauli1),
    /// Flipped measurement outcome.
    Flip,
}

impl FaultAction {
    pub fn is_identity(&self) -> bool {
        match self {
            FaultAction::Single(p) => *p == Pauli1::I,
            FaultAction::Pair(a, b) => *a == Pauli1::I && *b == Pauli1::I,
            FaultAction::Flip => false,
        }
    }

    fn fits(&self, kind: OpKind) -> bool {
        match self {
            FaultAction::Flip => kind.is_meas(),
            FaultAction::Pair(..) => kind == OpKind::Cnot,
            FaultAction::Single(_) => kind != OpKind::Cnot && !kind.is_meas(),
        }
    }
}

impl fmt::Display for FaultAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultAction::Single(p) => write!(f, "{}", p.as_char()),
            FaultAction::Pair(a, b) => write!(f, "{}{}", a.as_char(), b.as_char()),
            FaultAction::Flip => f.write_str("F"),
        }
    }
}

impl FromStr for FaultAction {
    type Err = Error;

    /// `X`, `Y`, `Z` for one qubit, two letters such as `XZ` for a CNOT
    /// (control first), `F` for a measurement flip.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("f") || s.eq_ignore_ascii_case("flip") {
            return Ok(FaultAction::Flip);
        }
        let letters: Vec<Pauli1> = s
            .chars()
            .map(|c| {
                Pauli1::from_char(c)
                    .ok_or_else(|| Error::Assignment(format!("bad fault action {s:?}")))
            })
            .collect::<Result<_>>()?;
        match letters.as_slice() {
            [p] => Ok(FaultAction::Single(*p)),
            [a, b] => Ok(FaultAction::Pair(*a, *b)),
            _ => Err(Error::Assignment(format!("bad fault action {s:?}"))),
        }
    }
}

/// Faults keyed by location id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaultAssignment {
    entries: BTreeMap<usize, FaultAction>,
}

impl FaultAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a fault; identity actions are rejected.
    pub fn insert(&mut self, location: usize, action: FaultAction) -> Result<()> {
        if action.is_identity() {
            return Err(Error::Assignment(format!(
                "identity fault at location {location}"
            )));
        }
        if self.entries.insert(location, action).is_some() {
            return Err(Error::Assignment(format!(
                "location {location} assigned twice"
            )));
        }
        Ok(())
    }

    pub fn with(mut self, location: usize, action: FaultAction) -> Result<Self> {
        self.insert(location, action)?;
        Ok(self)
    }

    pub fn entries(&self) -> &BTreeMap<usize, FaultAction> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `loc:ACTION` pairs separated by commas or whitespace.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut a = Self::new();
        for item in spec.split([',', ' ', '\n', '\t']).filter(|s| !s.is_empty()) {
            let (loc, act) = item
                .split_once(':')
                .ok_or_else(|| Error::Assignment(format!("expected loc:PAULI, got {item:?}")))?;
            let loc: usize = loc
                .trim()
                .parse()
                .map_err(|_| Error::Assignment(format!("bad location {loc:?}")))?;
            a.insert(loc, act.parse()?)?;
        }
        Ok(a)
    }

    /// Checks every entry against the circuit.
    pub fn validate(&self, c: &Circuit) -> Result<()> {
        for (&loc, action) in &self.entries {
            let op = c
                .op_at(loc)
                .map_err(|_| Error::Assignment(format!("location {loc} does not exist")))?;
            if !action.fits(op.kind) {
                return Err(Error::Assignment(format!(
                    "fault {action} does not fit the {} at location {loc}",
                    op.kind
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for FaultAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(l, a)| format!("{l}:{a}"))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Result of propagating a fault assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameResult {
    /// Frame on each output block (row-major, `n²` qubits).
    pub residual: Vec<PauliOp>,
    /// Flip of every measurement outcome, by measurement id.
    pub outcome_flips: BitVec,
    /// Frame update applied by each classical node (on all qubits).
    pub applied_corrections: Vec<PauliOp>,
    /// Frame at each requested probe.
    pub probe_frames: Vec<PauliOp>,
}

type LayerFaults = Vec<Vec<(usize, FaultAction)>>;

/// A point where the frame on some qubits is recorded: just before the ops
/// of `layer`, so after every fault and correction of earlier layers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Probe {
    pub layer: usize,
    pub qubits: Vec<usize>,
}

/// Probes on the two gate inputs of an exRec, where the leading ECs end.
pub fn gate_probes(exrec: &ExRec) -> Vec<Probe> {
    exrec
        .gate_blocks()
        .iter()
        .map(|b| Probe {
            layer: exrec.gate_layer(),
            qubits: b.clone(),
        })
        .collect()
}

/// Per-walk scratch: outcome flips, verification snapshots and probes.
pub(crate) struct WalkState<'a> {
    pub flips: BitVec,
    /// Frame on the reset qubits of each verification node, right after its anchor.
    pub snaps: Vec<Option<PauliOp>>,
    pub probes: &'a [Probe],
    pub probe_frames: Vec<PauliOp>,
}

impl<'a> WalkState<'a> {
    pub fn with_probes(c: &Circuit, probes: &'a [Probe]) -> Self {
        let snaps = c
            .nodes()
            .iter()
            .map(|n| match &n.rule {
                FrameRule::Verify { reset, .. } => Some(PauliOp::identity(reset.len())),
                _ => None,
            })
            .collect();
        Self {
            flips: BitVec::zeros(c.measurements().len()),
            snaps,
            probes,
            probe_frames: probes
                .iter()
                .map(|p| PauliOp::identity(p.qubits.len()))
                .collect(),
        }
    }
}

/// Verification nodes anchored at each layer.
pub(crate) fn verify_anchors(c: &Circuit) -> Vec<Vec<usize>> {
    let mut v = vec![Vec::new(); c.num_layers()];
    for (i, n) in c.nodes().iter().enumerate() {
        if matches!(n.rule, FrameRule::Verify { .. }) {
            v[n.anchor].push(i);
        }
    }
    v
}

#[inline]
fn conj_cnot(frame: &mut PauliOp, ctl: usize, tgt: usize) {
    let xc = frame.x_bits().get(ctl);
    let zt = frame.z_bits().get(tgt);
    if xc {
        frame.apply(tgt, Pauli1::X);
    }
    if zt {
        frame.apply(ctl, Pauli1::Z);
    }
}

/// Pushes `frame` through layers `start..`, XOR-ing outcome flips and
/// snapshots into `state`.
pub(crate) fn walk(
    c: &Circuit,
    frame: &mut PauliOp,
    start: usize,
    faults: Option<&LayerFaults>,
    anchors: &[Vec<usize>],
    state: &mut WalkState,
) {
    for t in start..c.num_layers() {
        for (i, p) in state.probes.iter().enumerate() {
            if p.layer == t {
                state.probe_frames[i].mul_assign(&frame.restrict(&p.qubits));
            }
        }
        for op in &c.layers()[t] {
            let q = op.qubits[0];
            match op.kind {
                OpKind::PrepZero | OpKind::PrepPlus => frame.set(q, Pauli1::I),
                OpKind::Cnot => conj_cnot(frame, op.qubits[0], op.qubits[1]),
                OpKind::Hadamard => {
                    let p = frame.get(q);
                    frame.set(q, Pauli1::from_bits(p.z_bit(), p.x_bit()));
                }
                OpKind::Idle => {}
                OpKind::MeasZ | OpKind::MeasX => {
                    let p = frame.get(q);
                    let flip = if op.kind == OpKind::MeasZ {
                        p.x_bit()
                    } else {
                        p.z_bit()
                    };
                    if flip {
                        state.flips.flip(op.meas.expect("measurement label"));
                    }
                }
            }
        }
        if let Some(faults) = faults {
            for &(i, action) in &faults[t] {
                let op = &c.layers()[t][i];
                match action {
                    FaultAction::Single(p) => frame.apply(op.qubits[0], p),
                    FaultAction::Pair(a, b) => {
                        frame.apply(op.qubits[0], a);
                        frame.apply(op.qubits[1], b);
                    }
                    FaultAction::Flip => state.flips.flip(op.meas.expect("measurement label")),
                }
            }
        }
        for &ni in &anchors[t] {
            if let FrameRule::Verify { reset, .. } = &c.nodes()[ni].rule {
                let snap = state.snaps[ni].as_mut().expect("verify snapshot");
                snap.mul_assign(&frame.restrict(reset));
            }
        }
    }
}

/// Start of the first run of `agree` consecutive equal syndromes, else the
/// last round.
pub fn select_round<T: PartialEq>(syndromes: &[T], agree: usize) -> usize {
    let agree = agree.max(1);
    syndromes
        .windows(agree)
        .position(|w| w.iter().all(|s| *s == w[0]))
        .unwrap_or(syndromes.len().saturating_sub(1))
}

fn parity(flips: &BitVec, ids: &[usize]) -> bool {
    ids.iter().fold(false, |acc, &m| acc ^ flips.get(m))
}

fn round_syndromes(rounds: &[SyndromeRound], flips: &BitVec) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
    let xs = rounds
        .iter()
        .map(|r| r.x_checks.iter().map(|ids| parity(flips, ids)).collect())
        .collect();
    let zs = rounds
        .iter()
        .map(|r| r.z_checks.iter().map(|ids| parity(flips, ids)).collect())
        .collect();
    (xs, zs)
}

/// Correction a node applies, given the outcome flips and its snapshot.
fn node_correction(c: &Circuit, ni: usize, state: &WalkState) -> PauliOp {
    let n = c.n();
    let mut corr = PauliOp::identity(c.num_qubits());
    match &c.nodes()[ni].rule {
        FrameRule::Decode {
            target,
            rounds,
            agree,
        } => {
            let (xs, zs) = round_syndromes(rounds, &state.flips);
            let rows = repetition_decode(&xs[select_round(&xs, *agree)]);
            let cols = repetition_decode(&zs[select_round(&zs, *agree)]);
            for r in (0..n).filter(|&r| rows[r]) {
                corr.apply(target[r * n], Pauli1::Z);
            }
            for col in (0..n).filter(|&col| cols[col]) {
                corr.apply(target[col], Pauli1::X);
            }
        }
        FrameRule::Teleport {
            target,
            x_outcomes,
            z_outcomes,
        } => {
            let rows: Vec<bool> = (0..n)
                .map(|i| parity(&state.flips, &x_outcomes[i * n..(i + 1) * n]))
                .collect();
            let cols: Vec<bool> = (0..n)
                .map(|j| (0..n).fold(false, |acc, i| acc ^ state.flips.get(z_outcomes[i * n + j])))
                .collect();
            if logical_bit_flipped(&rows) {
                for i in 0..n {
                    corr.apply(target[i * n], Pauli1::Z);
                }
            }
            if logical_bit_flipped(&cols) {
                for &q in &target[..n] {
                    corr.apply(q, Pauli1::X);
                }
            }
        }
        FrameRule::Verify { flag, reset } => {
            if state.flips.get(*flag) {
                let snap = state.snaps[ni].as_ref().expect("verify snapshot");
                for (k, &q) in reset.iter().enumerate() {
                    corr.set(q, snap.get(k));
                }
            }
        }
    }
    corr
}

/// Whether the decoded value of a repetition-coded bit differs from the
/// reference, given the flip of each copy.
pub fn logical_bit_flipped(copies: &[bool]) -> bool {
    let checks: Vec<bool> = copies.windows(2).map(|w| w[0] ^ w[1]).collect();
    repetition_decode(&checks)[0] != copies[0]
}

fn layer_faults(c: &Circuit, a: &FaultAssignment) -> Result<LayerFaults> {
    a.validate(c)?;
    let mut v: LayerFaults = vec![Vec::new(); c.num_layers()];
    for (&loc, &action) in a.entries() {
        let (t, i) = c.location(loc)?;
        v[t].push((i, action));
    }
    Ok(v)
}

/// Propagates faults through a circuit with fault-free inputs.
pub fn propagate(c: &Circuit, a: &FaultAssignment) -> Result<FrameResult> {
    propagate_with_input(c, &[], a)
}

/// Propagates faults with an optional Pauli frame on each input block
/// (empty slice for none).
pub fn propagate_with_input(
    c: &Circuit,
    input: &[PauliOp],
    a: &FaultAssignment,
) -> Result<FrameResult> {
    propagate_probed(c, input, a, &[])
}

/// Like [`propagate_with_input`], also recording the frame at `probes`.
pub fn propagate_probed(
    c: &Circuit,
    input: &[PauliOp],
    a: &FaultAssignment,
    probes: &[Probe],
) -> Result<FrameResult> {
    for p in probes {
        if p.layer >= c.num_layers() || p.qubits.iter().any(|&q| q >= c.num_qubits()) {
            return Err(Error::InvalidParameter(format!(
                "probe at layer {} is outside the circuit",
                p.layer
            )));
        }
    }
    let faults = layer_faults(c, a)?;
    let anchors = verify_anchors(c);
    let mut frame = PauliOp::identity(c.num_qubits());
    if !input.is_empty() {
        if input.len() != c.inputs().len() {
            return Err(Error::Dimension {
                expected: c.inputs().len(),
                actual: input.len(),
            });
        }
        for (block, p) in c.inputs().iter().zip(input) {
            if p.num_qubits() != block.len() {
                return Err(Error::Dimension {
                    expected: block.len(),
                    actual: p.num_qubits(),
                });
            }
            for q in p.support() {
                frame.set(block[q], p.get(q));
            }
        }
    }
    let mut state = WalkState::with_probes(c, probes);
    walk(c, &mut frame, 0, Some(&faults), &anchors, &mut state);

    let mut corrections = vec![PauliOp::identity(c.num_qubits()); c.nodes().len()];
    for &ni in c.node_order() {
        let corr = node_correction(c, ni, &state);
        if !corr.is_identity() {
            let mut f = corr.clone();
            walk(
                c,
                &mut f,
                c.nodes()[ni].anchor + 1,
                None,
                &anchors,
                &mut state,
            );
            frame.mul_assign(&f);
        }
        corrections[ni] = corr;
    }
    Ok(FrameResult {
        residual: c.outputs().iter().map(|b| frame.restrict(b)).collect(),
        outcome_flips: state.flips,
        applied_corrections: corrections,
        probe_frames: state.probe_frames,
    })
}

/// Logical effect on each output block after an ideal decode.
pub fn output_effects(c: &Circuit, r: &FrameResult) -> Result<Vec<LogicalEffect>> {
    let code = BaconShorCode::new(c.n())?;
    r.residual
        .iter()
        .map(|p| decoded_logical_effect(&code, p))
        .collect()
}

/// Whether every output block of `c` decodes ideally to the fault-free result.
pub fn circuit_correct(c: &Circuit, a: &FaultAssignment) -> Result<bool> {
    let r = propagate(c, a)?;
    Ok(output_effects(c, &r)?.iter().all(|e| e.is_identity()))
}

/// Whether the extended rectangle is correct under `a`, by the criterion
/// in its options.
pub fn exrec_correct(exrec: &ExRec, a: &FaultAssignment) -> Result<bool> {
    let c = exrec.circuit();
    match exrec.options().criterion {
        Criterion::Strict => circuit_correct(c, a),
        Criterion::Rectangle => {
            let probes = gate_probes(exrec);
            let r = propagate_probed(c, &[], a, &probes)?;
            let code = BaconShorCode::new(c.n())?;
            let lead = r
                .probe_frames
                .iter()
                .map(|p| decoded_logical_effect(&code, p))
                .collect::<Result<Vec<_>>>()?;
            let out = output_effects(c, &r)?;
            Ok(out == cnot_logical(lead[0], lead[1]))
        }
    }
}

/// Logical errors after an ideal CNOT, given those on control and target before it.
pub fn cnot_logical(control: LogicalEffect, target: LogicalEffect) -> Vec<LogicalEffect> {
    vec![
        LogicalEffect::from_flags(control.has_x(), control.has_z() ^ target.has_z()),
        LogicalEffect::from_flags(control.has_x() ^ target.has_x(), target.has_z()),
    ]
}
