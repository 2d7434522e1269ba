//! Line-oriented text form of a circuit.
//!
//! ```text
//! circuit n=3 qubits=12 layers=4
//! section 0 main
//! register data data 0 1 2 3 4 5 6 7 8
//! input 0: 0 1 2 3 4 5 6 7 8
//! output 0 1 2 3 4 5 6 7 8
//! t=0: prep+ q9
//! t=1: cnot q9 q0
//! t=3: meas_x q9 -> m0
//! node {"label":...}
//! ```
//!
//! Ops within a layer are listed by ascending first qubit; a section suffix
//! `@K` is printed when the op is not in section 0. The dump is
//! deterministic and [`parse`] inverts it.

use std::fmt::Write as _;

use super::{Circuit, CircuitParts, ClassicalNode, ElementaryOp, OpKind, Register, RegisterRole};
use crate::error::{Error, Result};

fn join(v: &[usize]) -> String {
    v.iter()
        .map(|q| q.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders one op, e.g. `cnot q3 q7` or `meas_z q5 -> m3`.
pub fn format_op(op: &ElementaryOp) -> String {
    let mut s = format!("{} q{}", op.kind, op.qubits[0]);
    if op.kind == OpKind::Cnot {
        let _ = write!(s, " q{}", op.qubits[1]);
    }
    if let Some(m) = op.meas {
        let _ = write!(s, " -> m{m}");
    }
    if op.section != 0 {
        let _ = write!(s, " @{}", op.section);
    }
    s
}

/// Deterministic text dump.
pub fn dump(c: &Circuit) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "circuit n={} qubits={} layers={}",
        c.n(),
        c.num_qubits(),
        c.num_layers()
    );
    for (i, name) in c.sections().iter().enumerate() {
        let _ = writeln!(s, "section {i} {name}");
    }
    for r in c.registers() {
        let role = match r.role {
            RegisterRole::Data => "data",
            RegisterRole::Ancilla => "ancilla",
        };
        let _ = writeln!(s, "register {} {} {}", r.name, role, join(&r.qubits));
    }
    for (block, t) in c.inputs().iter().zip(c.input_layers()) {
        let _ = writeln!(s, "input {t}: {}", join(block));
    }
    for block in c.outputs() {
        let _ = writeln!(s, "output {}", join(block));
    }
    for (t, layer) in c.layers().iter().enumerate() {
        let ops: Vec<String> = layer.iter().map(format_op).collect();
        let _ = writeln!(s, "t={t}: {}", ops.join("; "));
    }
    for node in c.nodes() {
        let json = serde_json::to_string(node).expect("classical nodes serialize");
        let _ = writeln!(s, "node {json}");
    }
    s
}

fn perr(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {}: {msg}", line + 1))
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| perr(line, format!("expected an integer, got {s:?}")))
}

fn parse_list(line: usize, s: &str) -> Result<Vec<usize>> {
    s.split_whitespace().map(|t| parse_usize(line, t)).collect()
}

fn parse_qubit(line: usize, s: &str) -> Result<usize> {
    let digits = s
        .strip_prefix('q')
        .ok_or_else(|| perr(line, format!("expected a qubit like q3, got {s:?}")))?;
    parse_usize(line, digits)
}

fn parse_op(line: usize, text: &str) -> Result<ElementaryOp> {
    let mut tokens: Vec<&str> = text.split_whitespace().collect();
    let mut section = 0u16;
    if let Some(last) = tokens.last() {
        if let Some(sec) = last.strip_prefix('@') {
            section = sec
                .parse()
                .map_err(|_| perr(line, format!("bad section suffix {last:?}")))?;
            tokens.pop();
        }
    }
    let mut meas = None;
    if tokens.len() >= 2 && tokens[tokens.len() - 2] == "->" {
        let label = tokens[tokens.len() - 1];
        let id = label
            .strip_prefix('m')
            .ok_or_else(|| perr(line, format!("bad outcome label {label:?}")))?;
        meas = Some(parse_usize(line, id)?);
        tokens.truncate(tokens.len() - 2);
    }
    let (kind, args) = tokens.split_first().ok_or_else(|| perr(line, "empty op"))?;
    let kind: OpKind = kind.parse().map_err(|e| perr(line, e))?;
    if args.len() != kind.arity() {
        return Err(perr(
            line,
            format!("{kind} takes {} qubit(s)", kind.arity()),
        ));
    }
    let a = parse_qubit(line, args[0])?;
    let b = if kind == OpKind::Cnot {
        parse_qubit(line, args[1])?
    } else {
        a
    };
    Ok(ElementaryOp {
        kind,
        qubits: [a, b],
        meas,
        section,
    })
}

/// Parses the output of [`dump`].
pub fn parse(text: &str) -> Result<Circuit> {
    let mut parts = CircuitParts::default();
    let mut declared_layers = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
        match head {
            "circuit" => {
                for kv in rest.split_whitespace() {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| perr(ln, format!("expected key=value, got {kv:?}")))?;
                    let v = parse_usize(ln, v)?;
                    match k {
                        "n" => parts.n = v,
                        "qubits" => parts.num_qubits = v,
                        "layers" => declared_layers = Some(v),
                        _ => return Err(perr(ln, format!("unknown header key {k:?}"))),
                    }
                }
            }
            "section" => {
                let (idx, name) = rest
                    .split_once(' ')
                    .ok_or_else(|| perr(ln, "expected `section K NAME`"))?;
                if parse_usize(ln, idx)? != parts.sections.len() {
                    return Err(perr(ln, "sections must be listed in order"));
                }
                parts.sections.push(name.trim().to_string());
            }
            "register" => {
                let mut it = rest.splitn(3, ' ');
                let name = it.next().unwrap_or_default().to_string();
                let role = match it.next() {
                    Some("data") => RegisterRole::Data,
                    Some("ancilla") => RegisterRole::Ancilla,
                    other => return Err(perr(ln, format!("bad register role {other:?}"))),
                };
                let qubits = parse_list(ln, it.next().unwrap_or_default())?;
                parts.registers.push(Register { name, role, qubits });
            }
            "input" => {
                let (t, qs) = rest
                    .split_once(':')
                    .ok_or_else(|| perr(ln, "expected `input T: qubits`"))?;
                parts.input_layers.push(parse_usize(ln, t.trim())?);
                parts.inputs.push(parse_list(ln, qs)?);
            }
            "output" => parts.outputs.push(parse_list(ln, rest)?),
            "node" => {
                let node: ClassicalNode =
                    serde_json::from_str(rest).map_err(|e| perr(ln, format!("bad node: {e}")))?;
                parts.nodes.push(node);
            }
            _ if head.starts_with("t=") => {
                let (t, ops) = line
                    .split_once(':')
                    .ok_or_else(|| perr(ln, "expected `t=K: ops`"))?;
                let t = parse_usize(ln, &t[2..])?;
                if t != parts.layers.len() {
                    return Err(perr(ln, format!("layer t={t} out of order")));
                }
                let layer = ops
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_op(ln, s))
                    .collect::<Result<Vec<_>>>()?;
                parts.layers.push(layer);
            }
            _ => return Err(perr(ln, format!("unrecognized line {head:?}"))),
        }
    }
    if let Some(l) = declared_layers {
        if l != parts.layers.len() {
            return Err(Error::Parse(format!(
                "header declares {l} layers, found {}",
                parts.layers.len()
            )));
        }
    }
    Circuit::from_parts(parts)
}
