//! Bacon-Shor subsystem codes, fault-tolerant error-correction gadgets,
//! Pauli-frame fault simulation and malignant-set threshold analysis.

pub mod bits;
pub mod circuits;
pub mod code;
pub mod error;
pub mod faultsim;
pub mod malignancy;
pub mod pauli;
pub mod threshold;

pub use bits::BitVec;
pub use code::{build_code, BaconShorCode, LogicalEffect, Syndrome};
pub use error::{Error, Result};
pub use pauli::{Pauli1, PauliOp};
