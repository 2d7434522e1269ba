//! Layer-addressed circuit construction.
//!
//! Gadgets place ops at explicit (possibly negative) layers relative to
//! the layer at which their data arrives. `finish` shifts everything to
//! start at layer 0 and fills in idle ops.

use std::collections::{BTreeMap, HashSet};

use super::{
    Circuit, CircuitParts, ClassicalNode, ElementaryOp, FrameRule, MeasId, OpKind, Register,
    RegisterRole,
};
use crate::error::Result;

pub(crate) struct Builder {
    n: usize,
    num_qubits: usize,
    ops: Vec<(i64, ElementaryOp)>,
    busy: HashSet<(i64, usize)>,
    num_meas: usize,
    nodes: Vec<(String, i64, FrameRule)>,
    registers: Vec<Register>,
    inputs: Vec<(Vec<usize>, i64)>,
    outputs: Vec<Vec<usize>>,
    sections: Vec<String>,
    section: u16,
}

impl Builder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            num_qubits: 0,
            ops: Vec::new(),
            busy: HashSet::new(),
            num_meas: 0,
            nodes: Vec::new(),
            registers: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            sections: vec!["main".into()],
            section: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Starts a new named section; subsequent ops are tagged with it.
    pub fn begin_section(&mut self, name: &str) {
        if self.ops.is_empty() && self.sections.len() == 1 && self.sections[0] == "main" {
            self.sections[0] = name.to_string();
        } else {
            self.sections.push(name.to_string());
            self.section = (self.sections.len() - 1) as u16;
        }
    }

    pub fn alloc(
        &mut self,
        name: impl Into<String>,
        role: RegisterRole,
        count: usize,
    ) -> Vec<usize> {
        let qubits: Vec<usize> = (self.num_qubits..self.num_qubits + count).collect();
        self.num_qubits += count;
        self.registers.push(Register {
            name: name.into(),
            role,
            qubits: qubits.clone(),
        });
        qubits
    }

    /// Allocates an `n²` data block.
    pub fn alloc_block(&mut self, name: impl Into<String>, role: RegisterRole) -> Vec<usize> {
        let nn = self.n * self.n;
        self.alloc(name, role, nn)
    }

    pub fn add_input(&mut self, block: Vec<usize>, layer: i64) {
        self.inputs.push((block, layer));
    }

    pub fn add_output(&mut self, block: Vec<usize>) {
        self.outputs.push(block);
    }

    fn place(&mut self, t: i64, kind: OpKind, qubits: [usize; 2]) -> Option<MeasId> {
        for &q in &qubits[..kind.arity()] {
            assert!(
                self.busy.insert((t, q)),
                "scheduling conflict: qubit {q} already busy at layer {t}"
            );
        }
        let meas = kind.is_meas().then(|| {
            self.num_meas += 1;
            self.num_meas - 1
        });
        self.ops.push((
            t,
            ElementaryOp {
                kind,
                qubits,
                meas,
                section: self.section,
            },
        ));
        meas
    }

    pub fn prep0(&mut self, t: i64, q: usize) {
        self.place(t, OpKind::PrepZero, [q, q]);
    }

    pub fn prep_plus(&mut self, t: i64, q: usize) {
        self.place(t, OpKind::PrepPlus, [q, q]);
    }

    pub fn cnot(&mut self, t: i64, control: usize, target: usize) {
        self.place(t, OpKind::Cnot, [control, target]);
    }

    pub fn meas_z(&mut self, t: i64, q: usize) -> MeasId {
        self.place(t, OpKind::MeasZ, [q, q])
            .expect("measurement id")
    }

    pub fn meas_x(&mut self, t: i64, q: usize) -> MeasId {
        self.place(t, OpKind::MeasX, [q, q])
            .expect("measurement id")
    }

    pub fn node(&mut self, label: impl Into<String>, anchor: i64, rule: FrameRule) {
        self.nodes.push((label.into(), anchor, rule));
    }

    /// Normalizes layers, inserts idles and validates.
    pub fn finish(self) -> Result<Circuit> {
        let t_min = self
            .ops
            .iter()
            .map(|(t, _)| *t)
            .chain(self.nodes.iter().map(|(_, a, _)| *a))
            .chain(self.inputs.iter().map(|(_, t)| *t))
            .min()
            .unwrap_or(0);
        let t_max = self.ops.iter().map(|(t, _)| *t).max().unwrap_or(t_min);
        let nlayers = (t_max - t_min + 1) as usize;
        let shift = |t: i64| (t - t_min) as usize;

        let mut layers: Vec<Vec<ElementaryOp>> = vec![Vec::new(); nlayers];
        let mut history: BTreeMap<usize, Vec<(usize, ElementaryOp)>> = BTreeMap::new();
        for (t, op) in &self.ops {
            layers[shift(*t)].push(*op);
            for &q in op.targets() {
                history.entry(q).or_default().push((shift(*t), *op));
            }
        }
        let mut live_from = vec![usize::MAX; self.num_qubits];
        for (block, t) in &self.inputs {
            for &q in block {
                live_from[q] = shift(*t);
            }
        }
        for (q, h) in history.iter_mut() {
            h.sort_by_key(|(t, _)| *t);
            let (first_t, first_op) = h[0];
            if live_from[*q] < first_t {
                for layer in &mut layers[live_from[*q]..first_t] {
                    layer.push(idle(*q, first_op.section));
                }
            }
            for w in h.windows(2) {
                let ((a, op_a), (b, _)) = (w[0], w[1]);
                if !op_a.kind.is_meas() {
                    for layer in &mut layers[a + 1..b] {
                        layer.push(idle(*q, op_a.section));
                    }
                }
            }
        }

        let nodes = self
            .nodes
            .into_iter()
            .map(|(label, anchor, rule)| ClassicalNode {
                label,
                anchor: shift(anchor),
                rule,
            })
            .collect();
        let (inputs, input_layers) = self.inputs.into_iter().map(|(b, t)| (b, shift(t))).unzip();
        Circuit::from_parts(CircuitParts {
            n: self.n,
            num_qubits: self.num_qubits,
            layers,
            registers: self.registers,
            inputs,
            outputs: self.outputs,
            nodes,
            sections: self.sections,
            input_layers,
        })
    }
}

fn idle(q: usize, section: u16) -> ElementaryOp {
    ElementaryOp {
        kind: OpKind::Idle,
        qubits: [q, q],
        meas: None,
        section,
    }
}
