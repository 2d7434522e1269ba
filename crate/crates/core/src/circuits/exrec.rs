//! Extended rectangles for the transversal CNOT.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::builder::Builder;
use super::gadgets::{
    place_gauge_ec, place_knill_ec, place_steane_ec, place_transversal_cnot, GaugeEcConfig,
};
use super::{Circuit, RegisterRole};
use crate::code::BaconShorCode;
use crate::error::{Error, Result};

/// Error-correction gadget used in an extended rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EcMethod {
    Gauge,
    Steane,
    Knill,
}

impl EcMethod {
    pub const ALL: [EcMethod; 3] = [EcMethod::Gauge, EcMethod::Steane, EcMethod::Knill];

    pub fn name(self) -> &'static str {
        match self {
            EcMethod::Gauge => "gauge",
            EcMethod::Steane => "steane",
            EcMethod::Knill => "knill",
        }
    }
}

impl fmt::Display for EcMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EcMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauge" => Ok(EcMethod::Gauge),
            "steane" => Ok(EcMethod::Steane),
            "knill" => Ok(EcMethod::Knill),
            _ => Err(Error::Parse(format!("unknown EC method {s:?}"))),
        }
    }
}

/// Role of a section of an extended rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    LeadingEc(usize),
    Gate,
    TrailingEc(usize),
}

/// When an extended rectangle counts as correct.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// The decoded outputs equal the ideal CNOT applied to the ideally
    /// decoded outputs of the leading ECs.
    #[default]
    Rectangle,
    /// Both decoded outputs carry no logical error relative to the
    /// fault-free inputs; failures inside a leading EC also count.
    Strict,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Rectangle => "rectangle",
            Criterion::Strict => "strict",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangle" => Ok(Criterion::Rectangle),
            "strict" => Ok(Criterion::Strict),
            _ => Err(Error::Parse(format!("unknown correctness criterion {s:?}"))),
        }
    }
}

/// Knobs for building extended rectangles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExRecOptions {
    pub gauge: GaugeEcConfig,
    pub criterion: Criterion,
}

/// A CNOT extended rectangle: two leading ECs, the transversal CNOT and two
/// trailing ECs, as one circuit whose sections partition the locations.
#[derive(Clone, Debug)]
pub struct ExRec {
    method: EcMethod,
    options: ExRecOptions,
    circuit: Circuit,
    sections: Vec<SectionKind>,
    gate_layer: usize,
    gate_blocks: [Vec<usize>; 2],
}

/// Places one EC; returns the output block and the layer of its last op.
pub(crate) fn place_ec(
    b: &mut Builder,
    method: EcMethod,
    options: &ExRecOptions,
    data: &[usize],
    t0: i64,
    label: &str,
) -> (Vec<usize>, i64) {
    match method {
        EcMethod::Gauge => {
            let t = place_gauge_ec(b, &options.gauge, data, t0, label);
            (data.to_vec(), t)
        }
        EcMethod::Steane => {
            let t = place_steane_ec(b, data, t0, label);
            (data.to_vec(), t)
        }
        EcMethod::Knill => place_knill_ec(b, data, t0, label),
    }
}

/// Builds the CNOT extended rectangle for `method`.
pub fn build_exrec(
    code: &BaconShorCode,
    method: EcMethod,
    options: &ExRecOptions,
) -> Result<ExRec> {
    options.gauge.validate()?;
    let mut b = Builder::new(code.n());
    let in0 = b.alloc_block("in0", RegisterRole::Data);
    let in1 = b.alloc_block("in1", RegisterRole::Data);
    b.add_input(in0.clone(), 0);
    b.add_input(in1.clone(), 0);

    b.begin_section("lead_ec0");
    let (mid0, t0) = place_ec(&mut b, method, options, &in0, 0, "lead_ec0");
    b.begin_section("lead_ec1");
    let (mid1, t1) = place_ec(&mut b, method, options, &in1, 0, "lead_ec1");

    let tg = t0.max(t1) + 1;
    b.begin_section("gate");
    place_transversal_cnot(&mut b, tg, &mid0, &mid1);

    b.begin_section("trail_ec0");
    let (out0, _) = place_ec(&mut b, method, options, &mid0, tg + 1, "trail_ec0");
    b.begin_section("trail_ec1");
    let (out1, _) = place_ec(&mut b, method, options, &mid1, tg + 1, "trail_ec1");
    b.add_output(out0);
    b.add_output(out1);

    let circuit = b.finish()?;
    let gate_layer = circuit
        .iter_ops()
        .find(|(_, _, op)| op.section == 2)
        .map(|(_, t, _)| t)
        .expect("the gate section is not empty");
    Ok(ExRec {
        method,
        options: *options,
        circuit,
        gate_layer,
        gate_blocks: [mid0, mid1],
        sections: vec![
            SectionKind::LeadingEc(0),
            SectionKind::LeadingEc(1),
            SectionKind::Gate,
            SectionKind::TrailingEc(0),
            SectionKind::TrailingEc(1),
        ],
    })
}

/// Number of fault locations in the extended rectangle.
pub fn count_locations(exrec: &ExRec) -> usize {
    exrec.circuit.num_locations()
}

impl ExRec {
    pub fn method(&self) -> EcMethod {
        self.method
    }

    pub fn options(&self) -> &ExRecOptions {
        &self.options
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn n(&self) -> usize {
        self.circuit.n()
    }

    /// Layer of the transversal CNOT.
    pub fn gate_layer(&self) -> usize {
        self.gate_layer
    }

    /// Control and target blocks of the transversal CNOT.
    pub fn gate_blocks(&self) -> &[Vec<usize>; 2] {
        &self.gate_blocks
    }

    /// Section roles, indexed like [`Circuit::sections`].
    pub fn section_kinds(&self) -> &[SectionKind] {
        &self.sections
    }

    /// Section of a location.
    pub fn section_of(&self, location: usize) -> Result<SectionKind> {
        Ok(self.sections[self.circuit.op_at(location)?.section as usize])
    }

    /// Location count per section.
    pub fn section_counts(&self) -> Vec<(SectionKind, usize)> {
        self.sections
            .iter()
            .copied()
            .zip(self.circuit.section_counts())
            .collect()
    }

    /// Short descriptor used in reports, e.g. `cnot-exrec/steane/n=3`.
    pub fn descriptor(&self) -> String {
        let mut s = format!("cnot-exrec/{}/n={}", self.method, self.n());
        if self.method == EcMethod::Gauge {
            let g = &self.options.gauge;
            let (rounds, agree) = g.resolve(self.n());
            s.push_str(&format!(
                "/{}/{}/rounds={rounds}/agree={agree}",
                g.policy, g.order
            ));
        }
        if self.options.criterion != Criterion::Rectangle {
            s.push_str(&format!("/{}", self.options.criterion));
        }
        s
    }
}
