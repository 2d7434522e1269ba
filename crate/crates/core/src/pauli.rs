//! Phase-free Pauli operators in the symplectic (x | z) representation.
//!
//! A Pauli on `n` qubits is stored as two bit-vectors; qubit `i` carries
//! `X` when only `x[i]` is set, `Z` when only `z[i]` is set and `Y` when
//! both are. Products are componentwise XOR. Overall phases are dropped:
//! everything downstream only asks which coset of a stabilizer or gauge
//! group an error lies in, and which measurement parities it flips.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitVec;
use crate::error::{Error, Result};

/// Single-qubit Pauli, phase-free.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub const NONTRIVIAL: [Pauli1; 3] = [Pauli1::X, Pauli1::Y, Pauli1::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }

    pub fn x_bit(self) -> bool {
        matches!(self, Pauli1::X | Pauli1::Y)
    }

    pub fn z_bit(self) -> bool {
        matches!(self, Pauli1::Z | Pauli1::Y)
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli1::I => 'I',
            Pauli1::X => 'X',
            Pauli1::Y => 'Y',
            Pauli1::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli1::I),
            'X' => Some(Pauli1::X),
            'Y' => Some(Pauli1::Y),
            'Z' => Some(Pauli1::Z),
            _ => None,
        }
    }
}

/// Phase-free n-qubit Pauli operator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    x: BitVec,
    z: BitVec,
}

impl PauliOp {
    pub fn identity(num_qubits: usize) -> Self {
        Self {
            x: BitVec::zeros(num_qubits),
            z: BitVec::zeros(num_qubits),
        }
    }

    pub fn from_parts(x: BitVec, z: BitVec) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                actual: z.len(),
            });
        }
        Ok(Self { x, z })
    }

    /// Tensor product of `pauli` on every listed qubit.
    pub fn from_support(
        num_qubits: usize,
        pauli: Pauli1,
        qubits: impl IntoIterator<Item = usize>,
    ) -> Self {
        let mut p = Self::identity(num_qubits);
        for q in qubits {
            p.set(q, pauli);
        }
        p
    }

    pub fn single(num_qubits: usize, qubit: usize, pauli: Pauli1) -> Self {
        Self::from_support(num_qubits, pauli, [qubit])
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli1 {
        Pauli1::from_bits(self.x.get(qubit), self.z.get(qubit))
    }

    pub fn set(&mut self, qubit: usize, pauli: Pauli1) {
        self.x.set(qubit, pauli.x_bit());
        self.z.set(qubit, pauli.z_bit());
    }

    /// Multiplies `pauli` onto a single qubit in place.
    pub fn apply(&mut self, qubit: usize, pauli: Pauli1) {
        if pauli.x_bit() {
            self.x.flip(qubit);
        }
        if pauli.z_bit() {
            self.z.flip(qubit);
        }
    }

    fn check_len(&self, other: &PauliOp) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::Dimension {
                expected: self.num_qubits(),
                actual: other.num_qubits(),
            });
        }
        Ok(())
    }

    /// Phase-free group product.
    pub fn multiply(&self, other: &PauliOp) -> Result<PauliOp> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.mul_assign(other);
        Ok(out)
    }

    /// In-place product; panics on length mismatch.
    pub fn mul_assign(&mut self, other: &PauliOp) {
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// Symplectic form `<x, z'> + <z, x'>` over GF(2).
    pub fn anticommutes(&self, other: &PauliOp) -> bool {
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    pub fn commutes(&self, other: &PauliOp) -> Result<bool> {
        self.check_len(other)?;
        Ok(!self.anticommutes(other))
    }

    pub fn weight(&self) -> usize {
        self.x.or(&self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Qubits on which the operator acts nontrivially, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.x.or(&self.z).iter_ones().collect()
    }

    /// Restriction to `qubits`, re-indexed in the given order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOp {
        let mut out = PauliOp::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set(i, self.get(q));
        }
        out
    }

    /// Dense rendering, one character per qubit (`"XIZY"`).
    pub fn to_dense_string(&self) -> String {
        (0..self.num_qubits())
            .map(|q| self.get(q).as_char())
            .collect()
    }

    /// Concatenation `self ⊗ other`.
    pub fn tensor(&self, other: &PauliOp) -> PauliOp {
        let n = self.num_qubits();
        let mut out = PauliOp::identity(n + other.num_qubits());
        for q in self.support() {
            out.set(q, self.get(q));
        }
        for q in other.support() {
            out.set(n + q, other.get(q));
        }
        out
    }

    /// Parses the sparse text form (`"X0 Z3"`, `"I"`) on `num_qubits` qubits.
    pub fn parse_sparse(num_qubits: usize, text: &str) -> Result<PauliOp> {
        let mut p = PauliOp::identity(num_qubits);
        for token in text.split_whitespace() {
            if token == "I" {
                continue;
            }
            let mut chars = token.chars();
            let pauli = chars
                .next()
                .and_then(Pauli1::from_char)
                .ok_or_else(|| Error::Parse(format!("bad Pauli token {token:?}")))?;
            let qubit: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::Parse(format!("bad qubit index in {token:?}")))?;
            if qubit >= num_qubits {
                return Err(Error::Parse(format!(
                    "qubit {qubit} out of range for {num_qubits} qubits"
                )));
            }
            p.apply(qubit, pauli);
        }
        Ok(p)
    }
}

/// Sparse rendering: `"X0 X1"` for X on qubits 0 and 1, `"I"` for identity.
impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let support = self.support();
        if support.is_empty() {
            return f.write_str("I");
        }
        for (i, q) in support.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", self.get(*q).as_char(), q)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOp({})", self.to_dense_string())
    }
}

impl FromStr for PauliOp {
    type Err = Error;

    /// Parses the dense form, e.g. `"XIZY"`.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        let mut p = PauliOp::identity(chars.len());
        for (q, c) in chars.into_iter().enumerate() {
            let pauli = Pauli1::from_char(c)
                .ok_or_else(|| Error::Parse(format!("bad Pauli character {c:?}")))?;
            p.set(q, pauli);
        }
        Ok(p)
    }
}

/// Row-reduced basis of the GF(2) span of a set of Paulis.
///
/// Vectors are reduced against stored rows by their pivot bit, so the
/// answer to [`GroupBasis::contains`] does not depend on insertion order.
#[derive(Clone, Debug)]
pub struct GroupBasis {
    num_qubits: usize,
    rows: Vec<(usize, BitVec)>,
}

impl GroupBasis {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            rows: Vec::new(),
        }
    }

    pub fn from_generators<'a>(
        num_qubits: usize,
        gens: impl IntoIterator<Item = &'a PauliOp>,
    ) -> Result<Self> {
        let mut basis = Self::new(num_qubits);
        for g in gens {
            basis.insert(g)?;
        }
        Ok(basis)
    }

    fn flatten(&self, p: &PauliOp) -> Result<BitVec> {
        if p.num_qubits() != self.num_qubits {
            return Err(Error::Dimension {
                expected: self.num_qubits,
                actual: p.num_qubits(),
            });
        }
        let n = self.num_qubits;
        Ok(BitVec::from_indices(
            2 * n,
            p.x_bits()
                .iter_ones()
                .chain(p.z_bits().iter_ones().map(|q| q + n)),
        ))
    }

    fn reduce_vec(&self, mut v: BitVec) -> BitVec {
        for (pivot, row) in &self.rows {
            if v.get(*pivot) {
                v.xor_assign(row);
            }
        }
        v
    }

    /// Adds a generator; returns `true` if it was independent.
    pub fn insert(&mut self, p: &PauliOp) -> Result<bool> {
        let v = self.reduce_vec(self.flatten(p)?);
        match v.first_one() {
            None => Ok(false),
            Some(pivot) => {
                // keep existing rows reduced with respect to the new pivot
                for (_, row) in self.rows.iter_mut() {
                    if row.get(pivot) {
                        row.xor_assign(&v);
                    }
                }
                self.rows.push((pivot, v));
                Ok(true)
            }
        }
    }

    pub fn contains(&self, p: &PauliOp) -> Result<bool> {
        Ok(self.reduce_vec(self.flatten(p)?).is_zero())
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }
}

/// Whether `p` is a phase-free product of `generators`.
pub fn in_group(p: &PauliOp, generators: &[PauliOp]) -> Result<bool> {
    let basis = GroupBasis::from_generators(p.num_qubits(), generators)?;
    basis.contains(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    #[test]
    fn multiply_examples() {
        let x = p("XI");
        assert_eq!(PauliOp::identity(2).multiply(&x).unwrap(), x);
        assert!(x.multiply(&x).unwrap().is_identity());
        let y = p("XI").multiply(&p("ZI")).unwrap();
        assert_eq!(y.get(0), Pauli1::Y);
        assert!(y.x_bits().get(0) && y.z_bits().get(0));
    }

    #[test]
    fn multiply_dimension_error() {
        assert!(matches!(
            p("X").multiply(&p("XX")),
            Err(Error::Dimension {
                expected: 1,
                actual: 2
            })
        ));
        assert!(p("X").commutes(&p("XX")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(p("XYZ").commutes(&p("III")).unwrap());
    }

    #[test]
    fn weight_examples() {
        assert_eq!(p("III").weight(), 0);
        assert_eq!(p("YI").weight(), 1);
        assert_eq!(p("XZ").weight(), 2);
    }

    #[test]
    fn group_membership_basics() {
        let gens = vec![p("XXI"), p("IZZ"), p("ZZI")];
        let prod = gens[0].multiply(&gens[1]).unwrap();
        assert!(in_group(&prod, &gens).unwrap());
        assert!(in_group(&PauliOp::identity(3), &gens).unwrap());
        assert!(!in_group(&p("XII"), &gens).unwrap());
        assert!(in_group(&PauliOp::identity(3), &[]).unwrap());
    }

    #[test]
    fn sparse_text_round_trip() {
        let q = PauliOp::from_support(5, Pauli1::X, [1, 2]);
        assert_eq!(q.to_string(), "X1 X2");
        assert_eq!(PauliOp::parse_sparse(5, "X1 X2").unwrap(), q);
        assert_eq!(PauliOp::identity(3).to_string(), "I");
        assert_eq!(PauliOp::parse_sparse(3, "I").unwrap(), PauliOp::identity(3));
        assert!(PauliOp::parse_sparse(3, "X7").is_err());
        assert_eq!(p("YIZ").to_string(), "Y0 Z2");
    }
}
