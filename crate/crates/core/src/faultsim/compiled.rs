//! Precompiled fault evaluation for exhaustive and sampled searches.
//!
//! Every fault is reduced to a bit-vector over a fixed readout layout:
//!
//! ```text
//! [ outcome flips | verification snapshots | output-block frames ]
//! ```
//!
//! The raw readout of a fault set is the XOR of its vectors. Classical
//! nodes are then resolved in order directly on the readout, each adding
//! the precomputed readout change of its correction.

use std::collections::HashMap;

use super::{gate_probes, verify_anchors, walk, FaultAction, FaultAssignment, Probe, WalkState};
use crate::circuits::{Circuit, Criterion, ExRec, FrameRule, OpKind};
use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOp};

/// Bits of one readout, grouped by word.
#[derive(Clone, Debug, Default)]
struct SparseMask(Vec<(u32, u64)>);

impl SparseMask {
    fn from_bits(bits: impl IntoIterator<Item = usize>) -> Self {
        let mut map: std::collections::BTreeMap<u32, u64> = std::collections::BTreeMap::new();
        for b in bits {
            *map.entry((b / 64) as u32).or_insert(0) ^= 1u64 << (b % 64);
        }
        SparseMask(map.into_iter().filter(|&(_, m)| m != 0).collect())
    }

    #[inline]
    fn parity(&self, buf: &[u64]) -> bool {
        let mut acc = 0u32;
        for &(w, m) in &self.0 {
            acc ^= (buf[w as usize] & m).count_ones();
        }
        acc & 1 == 1
    }

    #[inline]
    fn any(&self, buf: &[u64]) -> bool {
        self.0.iter().any(|&(w, m)| buf[w as usize] & m != 0)
    }
}

/// Repetition-code parities packed into the low bits of a word.
#[inline]
fn parities(masks: &[SparseMask], buf: &[u64]) -> u64 {
    masks
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, m)| acc | ((m.parity(buf) as u64) << i))
}

/// Whether the decoder picks the complement of the `n` copy flips `r`.
#[inline]
pub(crate) fn rep_fails(r: u64, n: usize) -> bool {
    let w = 2 * r.count_ones() as usize;
    w > n || (w == n && r & 1 == 0)
}

/// Rows to flip for a syndrome `s` of `n - 1` checks.
#[inline]
fn rep_decode(s: u64, n: usize) -> u64 {
    let mut p = 0u64;
    let mut acc = 0u64;
    for j in 0..n - 1 {
        acc ^= (s >> j) & 1;
        p |= acc << (j + 1);
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    if 2 * p.count_ones() as usize >= n {
        !p & full
    } else {
        p
    }
}

#[derive(Clone, Debug)]
enum CNode {
    Verify {
        flag: (usize, u64),
        snap: Vec<(usize, u64)>,
        effects: Vec<usize>,
    },
    Decode {
        any: SparseMask,
        x_rounds: Vec<Vec<SparseMask>>,
        z_rounds: Vec<Vec<SparseMask>>,
        agree: usize,
        rows: Vec<usize>,
        cols: Vec<usize>,
    },
    Teleport {
        any: SparseMask,
        x_rows: Vec<SparseMask>,
        z_cols: Vec<SparseMask>,
        z_logical: usize,
        x_logical: usize,
    },
}

#[derive(Clone, Debug)]
struct OutputMasks {
    rows: Vec<SparseMask>,
    cols: Vec<SparseMask>,
}

/// A circuit compiled for fast evaluation of fault sets.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    n: usize,
    words: usize,
    /// Vectors: location actions, location generators, node corrections.
    arena: Vec<u64>,
    actions: Vec<FaultAction>,
    /// Arena index of the first action vector; action `i` sits at `action_base + i`.
    action_base: usize,
    /// Start and length of each location's run in `actions`.
    loc_actions: Vec<(u32, u32)>,
    /// Arena indices of each location's generators (X then Z per qubit, or the flip).
    loc_gens: Vec<Vec<u32>>,
    kinds: Vec<OpKind>,
    nodes: Vec<CNode>,
    outputs: Vec<OutputMasks>,
    /// Control and target probes of a CNOT comparison, if any.
    probes: Vec<OutputMasks>,
}

/// Scratch space for [`CompiledCircuit::find_failure`].
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    stack: Vec<u64>,
    work: Vec<u64>,
    choice: Vec<usize>,
}

/// Fault actions tried per op kind. A Y after `|0⟩` acts like X (and a Y
/// after `|+⟩` like Z), so preparations need two actions; the second one
/// leaves the prepared state unchanged.
pub(crate) fn action_list(kind: OpKind) -> Vec<FaultAction> {
    use Pauli1::*;
    match kind {
        OpKind::PrepZero => vec![FaultAction::Single(X), FaultAction::Single(Z)],
        OpKind::PrepPlus => vec![FaultAction::Single(Z), FaultAction::Single(X)],
        OpKind::MeasZ | OpKind::MeasX => vec![FaultAction::Flip],
        OpKind::Idle | OpKind::Hadamard => vec![
            FaultAction::Single(X),
            FaultAction::Single(Y),
            FaultAction::Single(Z),
        ],
        OpKind::Cnot => {
            let mut v: Vec<FaultAction> = Vec::with_capacity(15);
            for a in [X, Y, Z] {
                for b in [X, Y, Z] {
                    v.push(FaultAction::Pair(a, b));
                }
            }
            for a in [X, Y, Z] {
                v.push(FaultAction::Pair(a, I));
                v.push(FaultAction::Pair(I, a));
            }
            v
        }
    }
}

struct Layout {
    words: usize,
    snap_base: Vec<usize>,
    out_base: Vec<usize>,
    probe_base: Vec<usize>,
}

fn block_masks(n: usize, base: usize) -> OutputMasks {
    let nn = n * n;
    OutputMasks {
        rows: (0..n)
            .map(|i| SparseMask::from_bits((0..n).map(|j| base + nn + i * n + j)))
            .collect(),
        cols: (0..n)
            .map(|j| SparseMask::from_bits((0..n).map(|i| base + i * n + j)))
            .collect(),
    }
}

impl CompiledCircuit {
    /// Compiles a circuit whose output blocks must all decode to the
    /// fault-free result.
    pub fn new(c: &Circuit) -> Result<Self> {
        Self::build(c, &[])
    }

    /// Compiles an exRec with the correctness criterion in its options.
    pub fn for_exrec(exrec: &ExRec) -> Result<Self> {
        match exrec.options().criterion {
            Criterion::Strict => Self::new(exrec.circuit()),
            Criterion::Rectangle => Self::build(exrec.circuit(), &gate_probes(exrec)),
        }
    }

    /// With two probes on the control and target inputs of a transversal
    /// CNOT, the outputs are compared with the ideal CNOT of the decoded
    /// probe frames instead of the fault-free result.
    fn build(c: &Circuit, probes: &[Probe]) -> Result<Self> {
        let n = c.n();
        if n > 64 {
            return Err(Error::InvalidParameter(
                "compiled evaluation supports n <= 64".into(),
            ));
        }
        let nn = n * n;
        let nm = c.measurements().len();
        let mut bit = nm;
        let mut snap_base = vec![usize::MAX; c.nodes().len()];
        for (i, node) in c.nodes().iter().enumerate() {
            if let FrameRule::Verify { reset, .. } = &node.rule {
                snap_base[i] = bit;
                bit += 2 * reset.len();
            }
        }
        let mut out_base = Vec::new();
        for _ in c.outputs() {
            out_base.push(bit);
            bit += 2 * nn;
        }
        if !probes.is_empty() && (probes.len() != 2 || c.outputs().len() != 2) {
            return Err(Error::InvalidParameter(
                "CNOT comparison needs two probes and two outputs".into(),
            ));
        }
        let mut probe_base = Vec::new();
        for p in probes {
            if p.qubits.len() != nn {
                return Err(Error::InvalidParameter(
                    "probes must cover one code block".into(),
                ));
            }
            probe_base.push(bit);
            bit += 2 * nn;
        }
        let layout = Layout {
            words: bit.div_ceil(64).max(1),
            snap_base,
            out_base,
            probe_base,
        };
        let anchors = verify_anchors(c);
        let mut arena: Vec<u64> = Vec::new();
        let mut cache: HashMap<(usize, usize, bool, bool), usize> = HashMap::new();

        // Readout change of a single X or Z right after layer t. A fault in
        // that layer is seen by the verifications anchored there; a node
        // correction applied at its anchor is not.
        let mut generator =
            |arena: &mut Vec<u64>, t: usize, q: usize, is_x: bool, fault: bool| -> usize {
                *cache.entry((t, q, is_x, fault)).or_insert_with(|| {
                    let mut frame = PauliOp::identity(c.num_qubits());
                    frame.set(q, if is_x { Pauli1::X } else { Pauli1::Z });
                    let mut state = WalkState::with_probes(c, probes);
                    if fault {
                        for &ni in &anchors[t] {
                            if let FrameRule::Verify { reset, .. } = &c.nodes()[ni].rule {
                                let snap = state.snaps[ni].as_mut().expect("verify snapshot");
                                snap.mul_assign(&frame.restrict(reset));
                            }
                        }
                    }
                    walk(c, &mut frame, t + 1, None, &anchors, &mut state);
                    let v = readout(c, &layout, &state, &frame);
                    let idx = arena.len() / layout.words;
                    arena.extend_from_slice(&v);
                    idx
                })
            };

        let mut kinds = Vec::with_capacity(c.num_locations());
        let mut gen_lists: Vec<Vec<usize>> = Vec::with_capacity(c.num_locations());
        for (_, t, op) in c.iter_ops() {
            kinds.push(op.kind);
            let gens: Vec<usize> = if op.kind.is_meas() {
                let idx = arena.len() / layout.words;
                let mut v = vec![0u64; layout.words];
                let m = op.meas.expect("measurement label");
                v[m / 64] |= 1u64 << (m % 64);
                arena.extend_from_slice(&v);
                vec![idx]
            } else {
                op.targets()
                    .iter()
                    .flat_map(|&q| [(q, true), (q, false)])
                    .map(|(q, is_x)| generator(&mut arena, t, q, is_x, true))
                    .collect()
            };
            gen_lists.push(gens);
        }

        let mut nodes = Vec::new();
        for &ni in c.node_order() {
            let node = &c.nodes()[ni];
            let t = node.anchor;
            let cn = match &node.rule {
                FrameRule::Verify { flag, reset } => {
                    let base = layout.snap_base[ni];
                    let mut snap = Vec::new();
                    let mut effects = Vec::new();
                    for (k, &q) in reset.iter().enumerate() {
                        for (off, is_x) in [(0, true), (1, false)] {
                            let b = base + 2 * k + off;
                            snap.push((b / 64, 1u64 << (b % 64)));
                            effects.push(generator(&mut arena, t, q, is_x, false));
                        }
                    }
                    CNode::Verify {
                        flag: (flag / 64, 1u64 << (flag % 64)),
                        snap,
                        effects,
                    }
                }
                FrameRule::Decode {
                    target,
                    rounds,
                    agree,
                } => {
                    let x_rounds: Vec<Vec<SparseMask>> = rounds
                        .iter()
                        .map(|r| {
                            r.x_checks
                                .iter()
                                .map(|ids| SparseMask::from_bits(ids.iter().copied()))
                                .collect()
                        })
                        .collect();
                    let z_rounds: Vec<Vec<SparseMask>> = rounds
                        .iter()
                        .map(|r| {
                            r.z_checks
                                .iter()
                                .map(|ids| SparseMask::from_bits(ids.iter().copied()))
                                .collect()
                        })
                        .collect();
                    let rows = (0..n)
                        .map(|r| generator(&mut arena, t, target[r * n], false, false))
                        .collect();
                    let cols = (0..n)
                        .map(|col| generator(&mut arena, t, target[col], true, false))
                        .collect();
                    CNode::Decode {
                        any: SparseMask::from_bits(node.inputs()),
                        x_rounds,
                        z_rounds,
                        agree: *agree,
                        rows,
                        cols,
                    }
                }
                FrameRule::Teleport {
                    target,
                    x_outcomes,
                    z_outcomes,
                } => {
                    let x_rows = (0..n)
                        .map(|i| {
                            SparseMask::from_bits(x_outcomes[i * n..(i + 1) * n].iter().copied())
                        })
                        .collect();
                    let z_cols = (0..n)
                        .map(|j| SparseMask::from_bits((0..n).map(|i| z_outcomes[i * n + j])))
                        .collect();
                    let zl: Vec<usize> = (0..n)
                        .map(|i| generator(&mut arena, t, target[i * n], false, false))
                        .collect();
                    let xl: Vec<usize> = (0..n)
                        .map(|j| generator(&mut arena, t, target[j], true, false))
                        .collect();
                    let z_logical = combine(&mut arena, layout.words, &zl);
                    let x_logical = combine(&mut arena, layout.words, &xl);
                    CNode::Teleport {
                        any: SparseMask::from_bits(node.inputs()),
                        x_rows,
                        z_cols,
                        z_logical,
                        x_logical,
                    }
                }
            };
            nodes.push(cn);
        }

        let mut action_kinds = Vec::new();
        let mut action_parts = Vec::new();
        let mut loc_actions = Vec::with_capacity(c.num_locations());
        for (loc, gens) in gen_lists.iter().enumerate() {
            let start = action_kinds.len();
            for a in action_list(kinds[loc]) {
                action_parts.push(action_generators(a, gens));
                action_kinds.push(a);
            }
            loc_actions.push((start as u32, (action_kinds.len() - start) as u32));
        }
        let action_base = arena.len() / layout.words;
        for parts in &action_parts {
            combine(&mut arena, layout.words, parts);
        }
        let loc_gens = gen_lists
            .iter()
            .map(|g| g.iter().map(|&i| i as u32).collect())
            .collect();

        let outputs = layout
            .out_base
            .iter()
            .map(|&base| block_masks(n, base))
            .collect();
        let probe_masks = layout
            .probe_base
            .iter()
            .map(|&base| block_masks(n, base))
            .collect();

        Ok(Self {
            n,
            words: layout.words,
            arena,
            actions: action_kinds,
            action_base,
            loc_actions,
            loc_gens,
            kinds,
            nodes,
            outputs,
            probes: probe_masks,
        })
    }

    pub fn num_locations(&self) -> usize {
        self.loc_actions.len()
    }

    /// Words per readout vector.
    pub fn words(&self) -> usize {
        self.words
    }

    pub fn kind(&self, loc: usize) -> OpKind {
        self.kinds[loc]
    }

    /// Fault actions tried at a location.
    pub fn actions(&self, loc: usize) -> &[FaultAction] {
        let (s, len) = self.loc_actions[loc];
        &self.actions[s as usize..(s + len) as usize]
    }

    #[inline]
    fn vec(&self, idx: usize) -> &[u64] {
        &self.arena[idx * self.words..(idx + 1) * self.words]
    }

    /// Raw readout vector of one action at a location.
    #[inline]
    pub fn action_vec(&self, loc: usize, k: usize) -> &[u64] {
        self.vec(self.action_base + self.loc_actions[loc].0 as usize + k)
    }

    /// Number of actions at a location.
    #[inline]
    pub fn num_actions(&self, loc: usize) -> usize {
        self.loc_actions[loc].1 as usize
    }

    /// Resolves the classical nodes on a raw readout (in place) and reports
    /// whether every output block decodes correctly.
    pub fn evaluate(&self, buf: &mut [u64]) -> bool {
        let n = self.n;
        for node in &self.nodes {
            match node {
                CNode::Verify {
                    flag,
                    snap,
                    effects,
                } => {
                    if buf[flag.0] & flag.1 == 0 {
                        continue;
                    }
                    for (k, &(w, m)) in snap.iter().enumerate() {
                        if buf[w] & m != 0 {
                            xor_into(buf, self.vec(effects[k]));
                        }
                    }
                }
                CNode::Decode {
                    any,
                    x_rounds,
                    z_rounds,
                    agree,
                    rows,
                    cols,
                } => {
                    if !any.any(buf) {
                        continue;
                    }
                    let sx = select(x_rounds, *agree, buf);
                    let sz = select(z_rounds, *agree, buf);
                    let fr = if sx == 0 { 0 } else { rep_decode(sx, n) };
                    let fc = if sz == 0 { 0 } else { rep_decode(sz, n) };
                    for (r, &e) in rows.iter().enumerate() {
                        if fr >> r & 1 == 1 {
                            xor_into(buf, self.vec(e));
                        }
                    }
                    for (col, &e) in cols.iter().enumerate() {
                        if fc >> col & 1 == 1 {
                            xor_into(buf, self.vec(e));
                        }
                    }
                }
                CNode::Teleport {
                    any,
                    x_rows,
                    z_cols,
                    z_logical,
                    x_logical,
                } => {
                    if !any.any(buf) {
                        continue;
                    }
                    let dx = rep_fails(parities(x_rows, buf), n);
                    let dz = rep_fails(parities(z_cols, buf), n);
                    if dx {
                        xor_into(buf, self.vec(*z_logical));
                    }
                    if dz {
                        xor_into(buf, self.vec(*x_logical));
                    }
                }
            }
        }
        let flips = |o: &OutputMasks| {
            (
                rep_fails(parities(&o.cols, buf), n),
                rep_fails(parities(&o.rows, buf), n),
            )
        };
        if self.probes.is_empty() {
            return self.outputs.iter().all(|o| flips(o) == (false, false));
        }
        let (x0, z0) = flips(&self.probes[0]);
        let (x1, z1) = flips(&self.probes[1]);
        flips(&self.outputs[0]) == (x0, z0 ^ z1) && flips(&self.outputs[1]) == (x0 ^ x1, z1)
    }

    /// Raw readout of an arbitrary assignment.
    pub fn raw_readout(&self, a: &FaultAssignment) -> Result<Vec<u64>> {
        let mut buf = vec![0u64; self.words];
        for (&loc, &action) in a.entries() {
            let kind = *self
                .kinds
                .get(loc)
                .ok_or_else(|| Error::Assignment(format!("location {loc} does not exist")))?;
            if !action.fits(kind) {
                return Err(Error::Assignment(format!(
                    "fault {action} does not fit the {kind} at location {loc}"
                )));
            }
            let gens: Vec<usize> = self.loc_gens[loc].iter().map(|&i| i as usize).collect();
            for idx in action_generators(action, &gens) {
                xor_into(&mut buf, self.vec(idx));
            }
        }
        Ok(buf)
    }

    /// Whether the circuit is correct under an arbitrary assignment.
    pub fn evaluate_assignment(&self, a: &FaultAssignment) -> Result<bool> {
        let mut buf = self.raw_readout(a)?;
        Ok(self.evaluate(&mut buf))
    }

    /// Searches every combination of actions on `locs` (one fault per
    /// location) for one that makes the circuit fail. Returns the action
    /// index chosen at each location.
    pub fn find_failure(&self, locs: &[usize], scratch: &mut Scratch) -> Option<Vec<usize>> {
        let k = locs.len();
        let w = self.words;
        scratch.stack.clear();
        scratch.stack.resize((k + 1) * w, 0);
        scratch.work.resize(w, 0);
        scratch.choice.clear();
        scratch.choice.resize(k, 0);
        if k == 0 {
            scratch.work.copy_from_slice(&scratch.stack[..w]);
            return (!self.evaluate(&mut scratch.work)).then(Vec::new);
        }
        // iterative odometer over action indices
        let mut depth = 0usize;
        loop {
            let loc = locs[depth];
            let a = scratch.choice[depth];
            let (lo, hi) = scratch.stack.split_at_mut((depth + 1) * w);
            let src = &lo[depth * w..];
            let dst = &mut hi[..w];
            let v = self.action_vec(loc, a);
            for i in 0..w {
                dst[i] = src[i] ^ v[i];
            }
            if depth + 1 < k {
                depth += 1;
                scratch.choice[depth] = 0;
                continue;
            }
            scratch
                .work
                .copy_from_slice(&scratch.stack[k * w..(k + 1) * w]);
            if !self.evaluate(&mut scratch.work) {
                return Some(scratch.choice.clone());
            }
            // advance
            loop {
                scratch.choice[depth] += 1;
                if scratch.choice[depth] < self.num_actions(locs[depth]) {
                    break;
                }
                if depth == 0 {
                    return None;
                }
                depth -= 1;
            }
        }
    }

    /// Whether some choice of faults on exactly the locations `locs` makes
    /// the circuit fail.
    pub fn is_malignant(&self, locs: &[usize], scratch: &mut Scratch) -> bool {
        self.find_failure(locs, scratch).is_some()
    }

    /// Turns a result of [`Self::find_failure`] into an assignment.
    pub fn assignment(&self, locs: &[usize], choice: &[usize]) -> Result<FaultAssignment> {
        let mut a = FaultAssignment::new();
        for (&loc, &k) in locs.iter().zip(choice) {
            a.insert(loc, self.actions(loc)[k])?;
        }
        Ok(a)
    }
}

#[inline(always)]
fn xor_into(buf: &mut [u64], v: &[u64]) {
    for (a, b) in buf.iter_mut().zip(v) {
        *a ^= b;
    }
}

/// Packed syndrome chosen by the round-agreement rule.
fn select(rounds: &[Vec<SparseMask>], agree: usize, buf: &[u64]) -> u64 {
    let mut prev = parities(&rounds[0], buf);
    let mut run = 1;
    if run >= agree {
        return prev;
    }
    for r in &rounds[1..] {
        let cur = parities(r, buf);
        run = if cur == prev { run + 1 } else { 1 };
        if run >= agree {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Generator indices whose XOR realizes an action; `gens` lists X then Z
/// for each qubit of the op (or the single flip vector).
fn action_generators(a: FaultAction, gens: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut push = |p: Pauli1, base: usize| {
        if p.x_bit() {
            out.push(gens[base]);
        }
        if p.z_bit() {
            out.push(gens[base + 1]);
        }
    };
    match a {
        FaultAction::Flip => return vec![gens[0]],
        FaultAction::Single(p) => push(p, 0),
        FaultAction::Pair(p, q) => {
            push(p, 0);
            push(q, 2);
        }
    }
    out
}

/// Appends the XOR of the given arena vectors; returns its index.
fn combine(arena: &mut Vec<u64>, words: usize, parts: &[usize]) -> usize {
    let mut v = vec![0u64; words];
    for &p in parts {
        xor_into(&mut v, &arena[p * words..(p + 1) * words]);
    }
    let idx = arena.len() / words;
    arena.extend_from_slice(&v);
    idx
}

fn readout(c: &Circuit, layout: &Layout, state: &WalkState, frame: &PauliOp) -> Vec<u64> {
    let mut v = vec![0u64; layout.words];
    let mut set = |b: usize| v[b / 64] ^= 1u64 << (b % 64);
    for m in state.flips.iter_ones() {
        set(m);
    }
    for (i, snap) in state.snaps.iter().enumerate() {
        if let Some(s) = snap {
            let base = layout.snap_base[i];
            for k in s.x_bits().iter_ones() {
                set(base + 2 * k);
            }
            for k in s.z_bits().iter_ones() {
                set(base + 2 * k + 1);
            }
        }
    }
    let nn = c.n() * c.n();
    for (p, &base) in state.probe_frames.iter().zip(&layout.probe_base) {
        for k in p.x_bits().iter_ones() {
            set(base + k);
        }
        for k in p.z_bits().iter_ones() {
            set(base + nn + k);
        }
    }
    for (block, &base) in c.outputs().iter().zip(&layout.out_base) {
        for (k, &q) in block.iter().enumerate() {
            let p = frame.get(q);
            if p.x_bit() {
                set(base + k);
            }
            if p.z_bit() {
                set(base + nn + k);
            }
        }
    }
    v
}
