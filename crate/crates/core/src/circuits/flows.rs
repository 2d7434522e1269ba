//! Stabilizer bookkeeping by pulling Paulis back through a circuit.
//!
//! With measurements deferred, each qubit lifetime (preparation or circuit
//! input up to measurement or circuit output) is a separate wire and the
//! circuit is a Clifford unitary on wires. A product of measured
//! observables is deterministic iff its preimage acts on every prepared
//! wire within that wire's preparation stabilizer and on every input block
//! as an element of the code stabilizer. Logical flows are checked the same
//! way, modulo the gauge group.

use super::{Basis, Circuit, FrameRule, MeasId, OpKind};
use crate::code::BaconShorCode;
use crate::error::{Error, Result};
use crate::pauli::{GroupBasis, Pauli1, PauliOp};

/// Pulls `out` (a Pauli on all qubits after the last layer) times the
/// observables of the `include`d measurements back to the circuit input.
///
/// Returns `None` if the preimage anticommutes with some preparation or
/// touches a qubit that is neither prepared nor an input; otherwise the
/// preimage restricted to each input block (row-major).
pub fn pull_back(c: &Circuit, out: &PauliOp, include: &[MeasId]) -> Result<Option<Vec<PauliOp>>> {
    if out.num_qubits() != c.num_qubits() {
        return Err(Error::Dimension {
            expected: c.num_qubits(),
            actual: out.num_qubits(),
        });
    }
    let mut included = vec![false; c.measurements().len()];
    for &m in include {
        *included.get_mut(m).ok_or(Error::UnknownId {
            kind: "measurement",
            id: m,
        })? = true;
    }
    let mut o = out.clone();
    for layer in c.layers().iter().rev() {
        for op in layer {
            let q = op.qubits[0];
            match op.kind {
                OpKind::Cnot => {
                    let [ctl, tgt] = op.qubits;
                    let (xc, zt) = (o.get(ctl).x_bit(), o.get(tgt).z_bit());
                    if xc {
                        o.apply(tgt, Pauli1::X);
                    }
                    if zt {
                        o.apply(ctl, Pauli1::Z);
                    }
                }
                OpKind::Hadamard => {
                    let p = o.get(q);
                    o.set(q, Pauli1::from_bits(p.z_bit(), p.x_bit()));
                }
                OpKind::Idle => {}
                OpKind::MeasZ | OpKind::MeasX => {
                    if o.get(q) != Pauli1::I {
                        return Err(Error::Precondition(format!(
                            "operator acts on qubit {q} after it is measured"
                        )));
                    }
                    if included[op.meas.expect("measurements carry labels")] {
                        o.set(
                            q,
                            if op.kind == OpKind::MeasZ {
                                Pauli1::Z
                            } else {
                                Pauli1::X
                            },
                        );
                    }
                }
                OpKind::PrepZero | OpKind::PrepPlus => {
                    let p = o.get(q);
                    let bad = if op.kind == OpKind::PrepZero {
                        p.x_bit()
                    } else {
                        p.z_bit()
                    };
                    if bad {
                        return Ok(None);
                    }
                    o.set(q, Pauli1::I);
                }
            }
        }
    }
    let mut covered = vec![false; c.num_qubits()];
    let mut restricted = Vec::with_capacity(c.inputs().len());
    for block in c.inputs() {
        for &q in block {
            covered[q] = true;
        }
        restricted.push(o.restrict(block));
    }
    if o.support().into_iter().any(|q| !covered[q]) {
        return Ok(None);
    }
    Ok(Some(restricted))
}

fn input_groups(code: &BaconShorCode, with_gauge: bool) -> Result<GroupBasis> {
    let gens = code.stabilizer_gens().iter();
    if with_gauge {
        GroupBasis::from_generators(code.num_qubits(), gens.chain(code.gauge_gens()))
    } else {
        GroupBasis::from_generators(code.num_qubits(), gens)
    }
}

/// Whether the parity of the listed outcomes is fixed in a fault-free run
/// for every code-space input (any logical and gauge state).
pub fn is_deterministic(c: &Circuit, meas: &[MeasId]) -> Result<bool> {
    let code = BaconShorCode::new(c.n())?;
    let stab = input_groups(&code, false)?;
    deterministic_with(c, meas, &stab)
}

fn deterministic_with(c: &Circuit, meas: &[MeasId], stab: &GroupBasis) -> Result<bool> {
    let identity = PauliOp::identity(c.num_qubits());
    match pull_back(c, &identity, meas)? {
        None => Ok(false),
        Some(blocks) => {
            for b in &blocks {
                if !stab.contains(b)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Whether `out` times the listed outcomes equals `expected` on the input
/// blocks, up to stabilizer and gauge elements and preparation stabilizers.
pub fn logical_flow_holds(
    c: &Circuit,
    out: &PauliOp,
    include: &[MeasId],
    expected: &[PauliOp],
) -> Result<bool> {
    if expected.len() != c.inputs().len() {
        return Err(Error::Dimension {
            expected: c.inputs().len(),
            actual: expected.len(),
        });
    }
    let code = BaconShorCode::new(c.n())?;
    let group = input_groups(&code, true)?;
    match pull_back(c, out, include)? {
        None => Ok(false),
        Some(blocks) => {
            for (b, e) in blocks.iter().zip(expected) {
                if !group.contains(&b.multiply(e)?)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Whether `out` stabilizes the circuit's output state (the circuit must
/// have no inputs, or `out` must pull back to code stabilizers).
pub fn stabilizes_output(c: &Circuit, out: &PauliOp) -> Result<bool> {
    let code = BaconShorCode::new(c.n())?;
    let stab = input_groups(&code, false)?;
    match pull_back(c, out, &[])? {
        None => Ok(false),
        Some(blocks) => {
            for b in &blocks {
                if !stab.contains(b)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Embeds a block-local Pauli (row-major over `block`) into the circuit.
pub fn embed(c: &Circuit, block: &[usize], p: &PauliOp) -> PauliOp {
    let mut out = PauliOp::identity(c.num_qubits());
    for q in p.support() {
        out.set(block[q], p.get(q));
    }
    out
}

/// Parity sets read by a node that must be deterministic in a fault-free run.
pub fn node_parities(c: &Circuit, node_index: usize) -> Vec<Vec<MeasId>> {
    let n = c.n();
    match &c.nodes()[node_index].rule {
        FrameRule::Decode { rounds, .. } => rounds
            .iter()
            .flat_map(|r| r.x_checks.iter().chain(&r.z_checks).cloned())
            .collect(),
        FrameRule::Teleport {
            x_outcomes,
            z_outcomes,
            ..
        } => {
            let mut sets = Vec::new();
            for j in 0..n - 1 {
                sets.push(
                    (0..n)
                        .flat_map(|k| [x_outcomes[j * n + k], x_outcomes[(j + 1) * n + k]])
                        .collect(),
                );
                sets.push(
                    (0..n)
                        .flat_map(|k| [z_outcomes[k * n + j], z_outcomes[k * n + j + 1]])
                        .collect(),
                );
            }
            sets
        }
        FrameRule::Verify { flag, .. } => vec![vec![*flag]],
    }
}

/// Asserts that every parity consumed by a classical node is deterministic
/// in the fault-free run, which is what makes flip-only simulation exact.
pub fn check_nodes(c: &Circuit) -> Result<()> {
    let code = BaconShorCode::new(c.n())?;
    let stab = input_groups(&code, false)?;
    for i in 0..c.nodes().len() {
        for set in node_parities(c, i) {
            if !deterministic_with(c, &set, &stab)? {
                return Err(Error::Precondition(format!(
                    "node {} reads a parity that is random in the fault-free run",
                    c.nodes()[i].label
                )));
            }
        }
    }
    Ok(())
}

/// Basis of a measurement as a single-qubit Pauli.
pub fn measured_pauli(basis: Basis) -> Pauli1 {
    match basis {
        Basis::X => Pauli1::X,
        Basis::Z => Pauli1::Z,
    }
}
