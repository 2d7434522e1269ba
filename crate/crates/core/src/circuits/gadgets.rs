//! Gauge measurements, logical ancilla preparation and the three
//! error-correction gadgets.
//!
//! Cat states are prepared without Hadamards. A column cat (the X-basis
//! cat `|+…+⟩ + |−…−⟩`, stabilized by `X_i X_{i+1}` and `Z^{⊗m}`) starts
//! from `|0⟩` on its top qubit and `|+⟩` elsewhere and runs the chain
//! `CNOT(q_{i+1} → q_i)`. Its Hadamard dual, the row cat
//! `|0…0⟩ + |1…1⟩`, swaps the preparation bases and reverses the CNOTs.
//! Cats of four or more qubits get one verification ancilla that checks
//! the parity of the two end qubits.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::builder::Builder;
use super::{Circuit, FrameRule, MeasId, RegisterRole, SyndromeRound};
use crate::code::BaconShorCode;
use crate::error::{Error, Result};

/// Smallest cat that receives a verification ancilla.
pub const VERIFY_MIN_CAT: usize = 4;

/// Ancilla allocation in gauge-based error correction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaPolicy {
    /// A fresh ancilla per check, scheduled as soon as the data allows.
    #[default]
    PerCheck,
    /// One ancilla measures every check in sequence.
    SingleRoaming,
}

/// Order of the gauge checks within a round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckOrder {
    /// X checks column-major, then Z checks row-major.
    #[default]
    XFirst,
    ZFirst,
    /// X-first in even rounds, Z-first in odd rounds. Interleaving single
    /// X and Z checks inside a round would randomize the stabilizer parities.
    Alternating,
}

/// Gauge-based error correction parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaugeEcConfig {
    pub policy: AncillaPolicy,
    pub order: CheckOrder,
    /// Syndrome rounds per EC; `None` means `t² + t + 1` for `t = ⌊(n−1)/2⌋`.
    pub rounds: Option<usize>,
    /// Consecutive equal rounds needed to accept a syndrome; `None` means
    /// `t + 1`. See [`FrameRule::Decode`].
    pub agree: Option<usize>,
}

impl Default for GaugeEcConfig {
    fn default() -> Self {
        Self {
            policy: AncillaPolicy::PerCheck,
            order: CheckOrder::XFirst,
            rounds: None,
            agree: None,
        }
    }
}

impl GaugeEcConfig {
    /// Round count and agreement length for a code of size `n`.
    pub fn resolve(&self, n: usize) -> (usize, usize) {
        let t = n.saturating_sub(1) / 2;
        let rounds = self.rounds.unwrap_or(t * t + t + 1);
        let agree = self.agree.unwrap_or(t + 1);
        (rounds, agree)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == Some(0) {
            return Err(Error::InvalidParameter(
                "gauge EC needs at least one round".into(),
            ));
        }
        if self.agree == Some(0) {
            return Err(Error::InvalidParameter(
                "round agreement must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

macro_rules! kebab_enum {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(<$ty>::$variant),)+
                    _ => Err(Error::Parse(format!("unknown {} {s:?}", stringify!($ty)))),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(<$ty>::$variant => $name,)+ })
            }
        }
    };
}

kebab_enum!(AncillaPolicy { PerCheck => "per-check", SingleRoaming => "single-roaming" });
kebab_enum!(CheckOrder { XFirst => "x-first", ZFirst => "z-first", Alternating => "alternating" });

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CatBasis {
    /// Stabilized by `X_i X_{i+1}` and `Z^{⊗m}`.
    X,
    /// Stabilized by `Z_i Z_{i+1}` and `X^{⊗m}`.
    Z,
}

/// Places a cat on `qubits` that is ready for use at layer `ready`.
pub(crate) fn place_cat(
    b: &mut Builder,
    qubits: &[usize],
    basis: CatBasis,
    ready: i64,
    label: &str,
) {
    let m = qubits.len();
    assert!(m >= 2, "cat states need at least two qubits");
    let verify = m >= VERIFY_MIN_CAT;
    let chain_end = if verify { ready - 3 } else { ready - 1 };
    let step = |i: usize| chain_end - (m as i64 - 2) + i as i64;
    type Prep = fn(&mut Builder, i64, usize);
    let (first_prep, rest_prep): (Prep, Prep) = match basis {
        CatBasis::X => (Builder::prep0, Builder::prep_plus),
        CatBasis::Z => (Builder::prep_plus, Builder::prep0),
    };
    first_prep(b, step(0) - 1, qubits[0]);
    for i in 0..m - 1 {
        rest_prep(b, step(i) - 1, qubits[i + 1]);
        match basis {
            CatBasis::X => b.cnot(step(i), qubits[i + 1], qubits[i]),
            CatBasis::Z => b.cnot(step(i), qubits[i], qubits[i + 1]),
        }
    }
    if verify {
        let v = b.alloc(format!("{label}.verify"), RegisterRole::Ancilla, 1)[0];
        let (first, last) = (qubits[0], qubits[m - 1]);
        let flag = match basis {
            CatBasis::X => {
                b.prep_plus(ready - 4, v);
                b.cnot(ready - 3, v, first);
                b.cnot(ready - 2, v, last);
                b.meas_x(ready - 1, v)
            }
            CatBasis::Z => {
                b.prep0(ready - 4, v);
                b.cnot(ready - 3, first, v);
                b.cnot(ready - 2, last, v);
                b.meas_z(ready - 1, v)
            }
        };
        b.node(
            format!("{label}.verify"),
            ready - 1,
            FrameRule::Verify {
                flag,
                reset: qubits.to_vec(),
            },
        );
    }
}

/// `|0⟩_L` on `block`: one column cat per column.
#[allow(non_snake_case)]
pub(crate) fn place_prep_zero_L(b: &mut Builder, block: &[usize], ready: i64, label: &str) {
    let n = b.n();
    for j in 0..n {
        let col: Vec<usize> = (0..n).map(|i| block[i * n + j]).collect();
        place_cat(b, &col, CatBasis::X, ready, &format!("{label}.cat{j}"));
    }
}

/// `|+⟩_L` on `block`: one row cat per row.
#[allow(non_snake_case)]
pub(crate) fn place_prep_plus_L(b: &mut Builder, block: &[usize], ready: i64, label: &str) {
    let n = b.n();
    for i in 0..n {
        let row: Vec<usize> = (0..n).map(|j| block[i * n + j]).collect();
        place_cat(b, &row, CatBasis::Z, ready, &format!("{label}.cat{i}"));
    }
}

/// Transversal CNOT between two blocks at layer `t`.
pub(crate) fn place_transversal_cnot(b: &mut Builder, t: i64, control: &[usize], target: &[usize]) {
    for (&c, &g) in control.iter().zip(target) {
        b.cnot(t, c, g);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GaugeCheck {
    /// `X_{j,k} X_{j+1,k}`
    X { j: usize, k: usize },
    /// `Z_{i,j} Z_{i,j+1}`
    Z { i: usize, j: usize },
}

fn check_list(n: usize, order: CheckOrder, round: usize) -> Vec<GaugeCheck> {
    let xs: Vec<GaugeCheck> = (0..n)
        .flat_map(|k| (0..n - 1).map(move |j| GaugeCheck::X { j, k }))
        .collect();
    let zs: Vec<GaugeCheck> = (0..n)
        .flat_map(|i| (0..n - 1).map(move |j| GaugeCheck::Z { i, j }))
        .collect();
    match order {
        CheckOrder::XFirst => xs.into_iter().chain(zs).collect(),
        CheckOrder::ZFirst => zs.into_iter().chain(xs).collect(),
        CheckOrder::Alternating if round.is_multiple_of(2) => xs.into_iter().chain(zs).collect(),
        CheckOrder::Alternating => zs.into_iter().chain(xs).collect(),
    }
}

/// Gauge-measurement EC on `data`, whose qubits are free from layer `t0`.
/// Returns the layer of the last op on the data.
pub(crate) fn place_gauge_ec(
    b: &mut Builder,
    cfg: &GaugeEcConfig,
    data: &[usize],
    t0: i64,
    label: &str,
) -> i64 {
    let n = b.n();
    let (num_rounds, agree) = cfg.resolve(n);
    let mut avail = vec![t0; n * n];
    let mut rounds = Vec::with_capacity(num_rounds);
    let roaming = match cfg.policy {
        AncillaPolicy::SingleRoaming => {
            Some(b.alloc(format!("{label}.anc"), RegisterRole::Ancilla, 1)[0])
        }
        AncillaPolicy::PerCheck => None,
    };
    // layer of the roaming ancilla's last measurement
    let mut anc_free = t0 - 2;
    for r in 0..num_rounds {
        let mut round = SyndromeRound {
            x_checks: vec![Vec::new(); n - 1],
            z_checks: vec![Vec::new(); n - 1],
        };
        for check in check_list(n, cfg.order, r) {
            let (d1, d2) = match check {
                GaugeCheck::X { j, k } => (j * n + k, (j + 1) * n + k),
                GaugeCheck::Z { i, j } => (i * n + j, i * n + j + 1),
            };
            let (a, t1) = match roaming {
                Some(a) => (a, avail[d1].max(anc_free + 2)),
                None => {
                    let a = b.alloc(format!("{label}.r{r}.anc"), RegisterRole::Ancilla, 1)[0];
                    (a, avail[d1])
                }
            };
            let t2 = avail[d2].max(t1 + 1);
            let m: MeasId = match check {
                GaugeCheck::X { .. } => {
                    b.prep_plus(t1 - 1, a);
                    b.cnot(t1, a, data[d1]);
                    b.cnot(t2, a, data[d2]);
                    b.meas_x(t2 + 1, a)
                }
                GaugeCheck::Z { .. } => {
                    b.prep0(t1 - 1, a);
                    b.cnot(t1, data[d1], a);
                    b.cnot(t2, data[d2], a);
                    b.meas_z(t2 + 1, a)
                }
            };
            avail[d1] = t1 + 1;
            avail[d2] = t2 + 1;
            anc_free = t2 + 1;
            match check {
                GaugeCheck::X { j, .. } => round.x_checks[j].push(m),
                GaugeCheck::Z { j, .. } => round.z_checks[j].push(m),
            }
        }
        rounds.push(round);
    }
    let t_out = avail.iter().copied().max().unwrap_or(t0) - 1;
    b.node(
        label.to_string(),
        t_out,
        FrameRule::Decode {
            target: data.to_vec(),
            rounds,
            agree,
        },
    );
    t_out
}

/// Steane EC on `data` arriving at `t0`; the data's last op is at `t0 + 1`.
pub(crate) fn place_steane_ec(b: &mut Builder, data: &[usize], t0: i64, label: &str) -> i64 {
    let n = b.n();
    let p = b.alloc_block(format!("{label}.plus"), RegisterRole::Ancilla);
    let q = b.alloc_block(format!("{label}.zero"), RegisterRole::Ancilla);
    place_prep_plus_L(b, &p, t0, &format!("{label}.plus"));
    place_prep_zero_L(b, &q, t0 + 1, &format!("{label}.zero"));
    // X errors: copied onto |+⟩_L, read out in the Z basis
    place_transversal_cnot(b, t0, data, &p);
    let p_meas: Vec<MeasId> = p.iter().map(|&a| b.meas_z(t0 + 1, a)).collect();
    // Z errors: copied onto |0⟩_L, read out in the X basis
    place_transversal_cnot(b, t0 + 1, &q, data);
    let q_meas: Vec<MeasId> = q.iter().map(|&a| b.meas_x(t0 + 2, a)).collect();

    let rows = |j: usize| -> Vec<MeasId> {
        (0..n)
            .flat_map(|k| [q_meas[j * n + k], q_meas[(j + 1) * n + k]])
            .collect()
    };
    let cols = |j: usize| -> Vec<MeasId> {
        (0..n)
            .flat_map(|k| [p_meas[k * n + j], p_meas[k * n + j + 1]])
            .collect()
    };
    let round = SyndromeRound {
        x_checks: (0..n - 1).map(rows).collect(),
        z_checks: (0..n - 1).map(cols).collect(),
    };
    b.node(
        label.to_string(),
        t0 + 1,
        FrameRule::Decode {
            target: data.to_vec(),
            rounds: vec![round],
            agree: 1,
        },
    );
    t0 + 1
}

/// Knill EC on `data` arriving at `t0`. Returns the output block and the
/// layer of its last op (`t0 - 1`).
pub(crate) fn place_knill_ec(
    b: &mut Builder,
    data: &[usize],
    t0: i64,
    label: &str,
) -> (Vec<usize>, i64) {
    let out = b.alloc_block(format!("{label}.out"), RegisterRole::Data);
    let half = b.alloc_block(format!("{label}.bell"), RegisterRole::Ancilla);
    place_prep_plus_L(b, &out, t0 - 1, &format!("{label}.out"));
    place_prep_zero_L(b, &half, t0 - 1, &format!("{label}.bell"));
    place_transversal_cnot(b, t0 - 1, &out, &half);
    place_transversal_cnot(b, t0, data, &half);
    let x_outcomes: Vec<MeasId> = data.iter().map(|&q| b.meas_x(t0 + 1, q)).collect();
    let z_outcomes: Vec<MeasId> = half.iter().map(|&q| b.meas_z(t0 + 1, q)).collect();
    b.node(
        label.to_string(),
        t0 - 1,
        FrameRule::Teleport {
            target: out.clone(),
            x_outcomes,
            z_outcomes,
        },
    );
    (out, t0 - 1)
}

/// Measurement of one weight-2 gauge generator with ancilla qubit `ancilla`
/// (which must lie outside the `n²` data qubits).
pub fn build_gauge_meas(code: &BaconShorCode, gauge_id: usize, ancilla: usize) -> Result<Circuit> {
    let n = code.n();
    let nq = n * n;
    let gen = code.gauge_gens().get(gauge_id).ok_or(Error::UnknownId {
        kind: "gauge generator",
        id: gauge_id,
    })?;
    if gen.weight() != 2 {
        return Err(Error::InvalidParameter(format!(
            "gauge generator {gauge_id} is not weight 2"
        )));
    }
    if ancilla < nq {
        return Err(Error::InvalidParameter(format!(
            "ancilla {ancilla} collides with the {nq} data qubits"
        )));
    }
    let mut b = Builder::new(n);
    b.begin_section("gauge_meas");
    let data = b.alloc_block("data", RegisterRole::Data);
    let a = *b
        .alloc("anc", RegisterRole::Ancilla, ancilla + 1 - nq)
        .last()
        .expect("ancilla");
    let support = gen.support();
    let (d1, d2) = (support[0], support[1]);
    b.add_input(data.clone(), 0);
    if gen.x_bits().is_zero() {
        b.prep0(0, a);
        b.cnot(1, data[d1], a);
        b.cnot(2, data[d2], a);
        b.meas_z(3, a);
    } else {
        b.prep_plus(0, a);
        b.cnot(1, a, data[d1]);
        b.cnot(2, a, data[d2]);
        b.meas_x(3, a);
    }
    b.add_output(data);
    b.finish()
}

/// Gauge-measurement error correction of one block.
pub fn build_gauge_ec(code: &BaconShorCode, cfg: &GaugeEcConfig) -> Result<Circuit> {
    cfg.validate()?;
    let mut b = Builder::new(code.n());
    b.begin_section("gauge_ec");
    let data = b.alloc_block("data", RegisterRole::Data);
    b.add_input(data.clone(), 0);
    place_gauge_ec(&mut b, cfg, &data, 0, "gauge_ec");
    b.add_output(data);
    b.finish()
}

/// `|0⟩_L` preparation.
#[allow(non_snake_case)]
pub fn build_prep_zero_L(code: &BaconShorCode) -> Result<Circuit> {
    let mut b = Builder::new(code.n());
    b.begin_section("prep");
    let block = b.alloc_block("block", RegisterRole::Data);
    place_prep_zero_L(&mut b, &block, 0, "prep");
    b.add_output(block);
    b.finish()
}

/// `|+⟩_L` preparation: the Hadamard dual of [`build_prep_zero_L`] with
/// rows and columns of the block exchanged.
#[allow(non_snake_case)]
pub fn build_prep_plus_L(code: &BaconShorCode) -> Result<Circuit> {
    let n = code.n();
    let zero = build_prep_zero_L(code)?;
    let dual = zero.hadamard_dual()?;
    let mut perm: Vec<usize> = (0..dual.num_qubits()).collect();
    for i in 0..n {
        for j in 0..n {
            perm[i * n + j] = j * n + i;
        }
    }
    let mut parts = dual.relabel(&perm)?.to_parts();
    parts.outputs = vec![(0..n * n).collect()];
    parts.registers[0].qubits = (0..n * n).collect();
    Circuit::from_parts(parts)
}

/// Direct `|+⟩_L` construction with row cats, as used inside the EC gadgets.
#[cfg(test)]
#[allow(non_snake_case)]
pub(crate) fn build_prep_plus_L_direct(code: &BaconShorCode) -> Result<Circuit> {
    let mut b = Builder::new(code.n());
    b.begin_section("prep");
    let block = b.alloc_block("block", RegisterRole::Data);
    place_prep_plus_L(&mut b, &block, 0, "prep");
    b.add_output(block);
    b.finish()
}

/// Logical Bell pair: `|+⟩_L ⊗ |0⟩_L` followed by a transversal CNOT.
#[allow(non_snake_case)]
pub fn build_bell_prep_L(code: &BaconShorCode) -> Result<Circuit> {
    let mut b = Builder::new(code.n());
    b.begin_section("bell");
    let p = b.alloc_block("plus", RegisterRole::Data);
    let q = b.alloc_block("zero", RegisterRole::Data);
    place_prep_plus_L(&mut b, &p, 0, "plus");
    place_prep_zero_L(&mut b, &q, 0, "zero");
    place_transversal_cnot(&mut b, 0, &p, &q);
    b.add_output(p);
    b.add_output(q);
    b.finish()
}

/// Steane error correction of one block.
pub fn build_steane_ec(code: &BaconShorCode) -> Result<Circuit> {
    let mut b = Builder::new(code.n());
    b.begin_section("steane_ec");
    let data = b.alloc_block("data", RegisterRole::Data);
    b.add_input(data.clone(), 0);
    place_steane_ec(&mut b, &data, 0, "steane_ec");
    b.add_output(data);
    b.finish()
}

/// Knill (teleportation) error correction of one block.
pub fn build_knill_ec(code: &BaconShorCode) -> Result<Circuit> {
    let mut b = Builder::new(code.n());
    b.begin_section("knill_ec");
    let data = b.alloc_block("data", RegisterRole::Data);
    b.add_input(data.clone(), 0);
    let (out, _) = place_knill_ec(&mut b, &data, 0, "knill_ec");
    b.add_output(out);
    b.finish()
}
