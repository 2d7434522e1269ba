//! The Bacon-Shor subsystem code on an `n × n` lattice.
//!
//! Qubit `(i, j)` (row `i`, column `j`, both 0-based) has flat index
//! `i * n + j`. X-type stabilizer `j` is `X_{j,*} X_{j+1,*}` and Z-type
//! stabilizer `j` is `Z_{*,j} Z_{*,j+1}`. Stabilizer ids run over the
//! X-type generators first (`0..n-1`) and then the Z-type (`n-1..2(n-1)`).
//!
//! Gauge generators are the vertical X pairs `X_{j,k} X_{j+1,k}` (id
//! `j * n + k`) followed by the horizontal Z pairs `Z_{k,j} Z_{k,j+1}`
//! (id `n(n-1) + j * n + k`), so the factorization of a stabilizer is a
//! contiguous run of gauge ids.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::pauli::{GroupBasis, Pauli1, PauliOp};

/// Largest lattice for which [`distance_bruteforce`] is permitted.
pub const BRUTEFORCE_MAX_N: usize = 3;

/// Which of the two stabilizer families a generator belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckType {
    /// `X_{j,*} X_{j+1,*}`, detects Z errors.
    X,
    /// `Z_{*,j} Z_{*,j+1}`, detects X errors.
    Z,
}

/// Action of a residual on the protected qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalEffect {
    I,
    X,
    Z,
    Y,
}

impl LogicalEffect {
    pub fn from_flags(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => LogicalEffect::I,
            (true, false) => LogicalEffect::X,
            (false, true) => LogicalEffect::Z,
            (true, true) => LogicalEffect::Y,
        }
    }

    pub fn has_x(self) -> bool {
        matches!(self, LogicalEffect::X | LogicalEffect::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, LogicalEffect::Z | LogicalEffect::Y)
    }

    pub fn is_identity(self) -> bool {
        self == LogicalEffect::I
    }
}

impl fmt::Display for LogicalEffect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LogicalEffect::I => "I",
            LogicalEffect::X => "X",
            LogicalEffect::Z => "Z",
            LogicalEffect::Y => "Y",
        };
        f.write_str(s)
    }
}

/// Stabilizer eigenvalue flips.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syndrome {
    /// Flips of `X_{j,*} X_{j+1,*}`, length `n - 1`.
    pub x_checks: BitVec,
    /// Flips of `Z_{*,j} Z_{*,j+1}`, length `n - 1`.
    pub z_checks: BitVec,
}

impl Syndrome {
    pub fn zero(n: usize) -> Self {
        Self {
            x_checks: BitVec::zeros(n - 1),
            z_checks: BitVec::zeros(n - 1),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x_checks.is_zero() && self.z_checks.is_zero()
    }
}

/// The `[[n², 1, n]]` Bacon-Shor code.
#[derive(Clone, Debug)]
pub struct BaconShorCode {
    n: usize,
    stabilizer_gens: Vec<PauliOp>,
    gauge_gens: Vec<PauliOp>,
    logical_x: PauliOp,
    logical_z: PauliOp,
    row_masks: Vec<BitVec>,
    col_masks: Vec<BitVec>,
}

/// Builds the code for an `n × n` lattice.
pub fn build_code(n: usize) -> Result<BaconShorCode> {
    BaconShorCode::new(n)
}

impl BaconShorCode {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "lattice size n must be at least 2, got {n}"
            )));
        }
        let nq = n * n;
        let idx = |i: usize, j: usize| i * n + j;
        let row = |i: usize| (0..n).map(move |j| idx(i, j));
        let col = |j: usize| (0..n).map(move |i| idx(i, j));

        let mut stabilizer_gens = Vec::with_capacity(2 * (n - 1));
        for j in 0..n - 1 {
            stabilizer_gens.push(PauliOp::from_support(
                nq,
                Pauli1::X,
                row(j).chain(row(j + 1)),
            ));
        }
        for j in 0..n - 1 {
            stabilizer_gens.push(PauliOp::from_support(
                nq,
                Pauli1::Z,
                col(j).chain(col(j + 1)),
            ));
        }

        let mut gauge_gens = Vec::with_capacity(2 * n * (n - 1));
        for j in 0..n - 1 {
            for k in 0..n {
                gauge_gens.push(PauliOp::from_support(
                    nq,
                    Pauli1::X,
                    [idx(j, k), idx(j + 1, k)],
                ));
            }
        }
        for j in 0..n - 1 {
            for k in 0..n {
                gauge_gens.push(PauliOp::from_support(
                    nq,
                    Pauli1::Z,
                    [idx(k, j), idx(k, j + 1)],
                ));
            }
        }

        Ok(Self {
            n,
            stabilizer_gens,
            gauge_gens,
            logical_x: PauliOp::from_support(nq, Pauli1::X, row(0)),
            logical_z: PauliOp::from_support(nq, Pauli1::Z, col(0)),
            row_masks: (0..n).map(|i| BitVec::from_indices(nq, row(i))).collect(),
            col_masks: (0..n).map(|j| BitVec::from_indices(nq, col(j))).collect(),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n * self.n
    }

    /// Flat index of lattice site `(row, col)`.
    #[inline]
    pub fn qubit_index(&self, row: usize, col: usize) -> usize {
        assert!(
            row < self.n && col < self.n,
            "site ({row},{col}) outside {0}x{0} lattice",
            self.n
        );
        row * self.n + col
    }

    /// Inverse of [`Self::qubit_index`].
    #[inline]
    pub fn site(&self, qubit: usize) -> (usize, usize) {
        (qubit / self.n, qubit % self.n)
    }

    pub fn stabilizer_gens(&self) -> &[PauliOp] {
        &self.stabilizer_gens
    }

    pub fn gauge_gens(&self) -> &[PauliOp] {
        &self.gauge_gens
    }

    pub fn logical_x(&self) -> &PauliOp {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &PauliOp {
        &self.logical_z
    }

    /// Mask of qubits in row `i`.
    pub fn row_mask(&self, i: usize) -> &BitVec {
        &self.row_masks[i]
    }

    /// Mask of qubits in column `j`.
    pub fn col_mask(&self, j: usize) -> &BitVec {
        &self.col_masks[j]
    }

    /// Family and in-family index of a stabilizer id.
    pub fn stabilizer_kind(&self, id: usize) -> Result<(CheckType, usize)> {
        let m = self.n - 1;
        if id < m {
            Ok((CheckType::X, id))
        } else if id < 2 * m {
            Ok((CheckType::Z, id - m))
        } else {
            Err(Error::UnknownId {
                kind: "stabilizer generator",
                id,
            })
        }
    }

    /// `[[n², 1, n]]` parameters.
    pub fn parameters(&self) -> (usize, usize, usize) {
        (self.n * self.n, 1, self.n)
    }

    fn check_len(&self, p: &PauliOp) -> Result<()> {
        if p.num_qubits() != self.num_qubits() {
            return Err(Error::Dimension {
                expected: self.num_qubits(),
                actual: p.num_qubits(),
            });
        }
        Ok(())
    }

    /// Parity of the Z part of `p` on each row.
    pub fn row_parities(&self, p: &PauliOp) -> Vec<bool> {
        self.row_masks.iter().map(|m| p.z_bits().dot(m)).collect()
    }

    /// Parity of the X part of `p` on each column.
    pub fn col_parities(&self, p: &PauliOp) -> Vec<bool> {
        self.col_masks.iter().map(|m| p.x_bits().dot(m)).collect()
    }
}

/// The `n` weight-2 gauge operators whose product is stabilizer `id`.
pub fn gauge_factorization(code: &BaconShorCode, id: usize) -> Result<Vec<PauliOp>> {
    let n = code.n;
    let (kind, j) = code.stabilizer_kind(id)?;
    let base = match kind {
        CheckType::X => j * n,
        CheckType::Z => n * (n - 1) + j * n,
    };
    Ok(code.gauge_gens[base..base + n].to_vec())
}

/// Stabilizer eigenvalue flips caused by `error`.
pub fn syndrome_of(code: &BaconShorCode, error: &PauliOp) -> Result<Syndrome> {
    code.check_len(error)?;
    let m = code.n - 1;
    let x_checks = BitVec::from_bools(
        &code.stabilizer_gens[..m]
            .iter()
            .map(|g| g.anticommutes(error))
            .collect::<Vec<_>>(),
    );
    let z_checks = BitVec::from_bools(
        &code.stabilizer_gens[m..]
            .iter()
            .map(|g| g.anticommutes(error))
            .collect::<Vec<_>>(),
    );
    Ok(Syndrome { x_checks, z_checks })
}

/// Minimum-weight repetition-code decode.
///
/// `checks[j]` is the parity of `v[j] ^ v[j+1]`; returns the lighter of
/// the two consistent `v`, preferring the one with `v[0] = 1` on a tie.
pub fn repetition_decode(checks: &[bool]) -> Vec<bool> {
    let mut v = Vec::with_capacity(checks.len() + 1);
    let mut acc = false;
    v.push(acc);
    for &c in checks {
        acc ^= c;
        v.push(acc);
    }
    let ones = v.iter().filter(|&&b| b).count();
    let len = v.len();
    if 2 * ones > len || (2 * ones == len && !v[0]) {
        for b in v.iter_mut() {
            *b = !*b;
        }
    }
    v
}

/// Rows (for Z errors) and columns (for X errors) the decoder flips.
pub fn decode_flips(code: &BaconShorCode, syndrome: &Syndrome) -> Result<(Vec<bool>, Vec<bool>)> {
    let m = code.n - 1;
    if syndrome.x_checks.len() != m || syndrome.z_checks.len() != m {
        return Err(Error::Dimension {
            expected: m,
            actual: if syndrome.x_checks.len() != m {
                syndrome.x_checks.len()
            } else {
                syndrome.z_checks.len()
            },
        });
    }
    let xs: Vec<bool> = (0..m).map(|j| syndrome.x_checks.get(j)).collect();
    let zs: Vec<bool> = (0..m).map(|j| syndrome.z_checks.get(j)).collect();
    Ok((repetition_decode(&xs), repetition_decode(&zs)))
}

/// Canonical correction: `Z` on `(r, 0)` for each flipped row `r`, `X` on
/// `(0, c)` for each flipped column `c`.
pub fn decode(code: &BaconShorCode, syndrome: &Syndrome) -> Result<PauliOp> {
    let (rows, cols) = decode_flips(code, syndrome)?;
    let mut p = PauliOp::identity(code.num_qubits());
    for (r, _) in rows.iter().enumerate().filter(|(_, &f)| f) {
        p.apply(code.qubit_index(r, 0), Pauli1::Z);
    }
    for (c, _) in cols.iter().enumerate().filter(|(_, &f)| f) {
        p.apply(code.qubit_index(0, c), Pauli1::X);
    }
    Ok(p)
}

/// Classifies a syndrome-free residual modulo the stabilizer and gauge groups.
pub fn logical_effect(code: &BaconShorCode, residual: &PauliOp) -> Result<LogicalEffect> {
    if !syndrome_of(code, residual)?.is_zero() {
        return Err(Error::Precondition(
            "logical_effect requires a residual with zero syndrome".into(),
        ));
    }
    let basis = GroupBasis::from_generators(
        code.num_qubits(),
        code.stabilizer_gens.iter().chain(code.gauge_gens.iter()),
    )?;
    if basis.contains(residual)? {
        return Ok(LogicalEffect::I);
    }
    if basis.contains(&residual.multiply(&code.logical_x)?)? {
        return Ok(LogicalEffect::X);
    }
    if basis.contains(&residual.multiply(&code.logical_z)?)? {
        return Ok(LogicalEffect::Z);
    }
    Ok(LogicalEffect::Y)
}

/// Same classification as [`logical_effect`] via row and column parities.
///
/// Modulo gauge pairs, a syndrome-free Z part is fixed by its (constant)
/// row parity, and a syndrome-free X part by its column parity.
pub fn logical_effect_fast(code: &BaconShorCode, residual: &PauliOp) -> Result<LogicalEffect> {
    code.check_len(residual)?;
    let rows = code.row_parities(residual);
    let cols = code.col_parities(residual);
    if rows.iter().any(|&b| b != rows[0]) || cols.iter().any(|&b| b != cols[0]) {
        return Err(Error::Precondition(
            "logical_effect requires a residual with zero syndrome".into(),
        ));
    }
    Ok(LogicalEffect::from_flags(cols[0], rows[0]))
}

/// Logical effect of `error` after one ideal decode, without building the
/// correction: the Z part fails iff the decoder picked the complement of
/// the true row-parity pattern, likewise for X and columns.
pub fn decoded_logical_effect(code: &BaconShorCode, error: &PauliOp) -> Result<LogicalEffect> {
    code.check_len(error)?;
    let rows = code.row_parities(error);
    let cols = code.col_parities(error);
    let fail = |v: &[bool]| {
        let checks: Vec<bool> = v.windows(2).map(|w| w[0] ^ w[1]).collect();
        repetition_decode(&checks)[0] != v[0]
    };
    Ok(LogicalEffect::from_flags(fail(&cols), fail(&rows)))
}

/// Restricts the search space of [`distance_bruteforce_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorFamily {
    All,
    XOnly,
    ZOnly,
}

/// Minimum weight of a syndrome-free operator with nontrivial logical effect.
pub fn distance_bruteforce(code: &BaconShorCode) -> Result<usize> {
    distance_bruteforce_with(code, ErrorFamily::All)
}

pub fn distance_bruteforce_with(code: &BaconShorCode, family: ErrorFamily) -> Result<usize> {
    if code.n > BRUTEFORCE_MAX_N {
        return Err(Error::ResourceGuard(format!(
            "brute-force distance needs 4^(n^2) checks; n = {} exceeds the limit of {}",
            code.n, BRUTEFORCE_MAX_N
        )));
    }
    let nq = code.num_qubits();
    let all: u64 = (1u64 << nq) - 1;
    let (x_range, z_range) = match family {
        ErrorFamily::All => (all, all),
        ErrorFamily::XOnly => (all, 0),
        ErrorFamily::ZOnly => (0, all),
    };
    let words = |m: u64| BitVec::from_words(nq, vec![m]);
    let mut best = usize::MAX;
    for xm in 0..=x_range {
        for zm in 0..=z_range {
            let w = (xm | zm).count_ones() as usize;
            if w == 0 || w >= best {
                continue;
            }
            let p = PauliOp::from_parts(words(xm), words(zm))?;
            if !syndrome_of(code, &p)?.is_zero() {
                continue;
            }
            if !logical_effect_fast(code, &p)?.is_identity() {
                best = w;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(n: usize) -> BaconShorCode {
        build_code(n).unwrap()
    }

    #[test]
    fn rejects_small_n() {
        assert!(matches!(build_code(1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn generator_counts() {
        let c = code(3);
        assert_eq!(c.stabilizer_gens().len(), 4);
        assert_eq!(c.gauge_gens().len(), 12);
        assert_eq!(c.num_qubits(), 9);
        let c = code(2);
        assert_eq!(c.stabilizer_gens().len(), 2);
        assert!(c.stabilizer_gens().iter().all(|g| g.weight() == 4));
        assert_eq!(code(5).parameters(), (25, 1, 5));
    }

    #[test]
    fn factorization_examples() {
        let c = code(3);
        let f = gauge_factorization(&c, 0).unwrap();
        let expect: Vec<PauliOp> = (0..3)
            .map(|k| PauliOp::from_support(9, Pauli1::X, [k, 3 + k]))
            .collect();
        assert_eq!(f, expect);
        let c2 = code(2);
        let f = gauge_factorization(&c2, 1).unwrap();
        let expect: Vec<PauliOp> = (0..2)
            .map(|k| PauliOp::from_support(4, Pauli1::Z, [2 * k, 2 * k + 1]))
            .collect();
        assert_eq!(f, expect);
        assert!(matches!(
            gauge_factorization(&c, 4),
            Err(Error::UnknownId { .. })
        ));
    }

    #[test]
    fn syndrome_of_single_z() {
        let c = code(3);
        let s = syndrome_of(&c, &PauliOp::single(9, 0, Pauli1::Z)).unwrap();
        assert_eq!(s.x_checks, BitVec::from_bools(&[true, false]));
        assert!(s.z_checks.is_zero());
    }

    #[test]
    fn decode_examples() {
        let c = code(3);
        assert!(decode(&c, &Syndrome::zero(3)).unwrap().is_identity());
        let s = Syndrome {
            x_checks: BitVec::from_bools(&[true, false]),
            z_checks: BitVec::zeros(2),
        };
        assert_eq!(decode(&c, &s).unwrap(), PauliOp::single(9, 0, Pauli1::Z));

        let c5 = code(5);
        let s = Syndrome {
            x_checks: BitVec::from_bools(&[false, true, true, false]),
            z_checks: BitVec::zeros(4),
        };
        assert_eq!(
            decode(&c5, &s).unwrap(),
            PauliOp::single(25, c5.qubit_index(2, 0), Pauli1::Z)
        );
    }

    #[test]
    fn tie_prefers_first_row() {
        assert_eq!(repetition_decode(&[true]), vec![true, false]);
        assert_eq!(
            repetition_decode(&[false, true, false]),
            vec![true, true, false, false]
        );
    }

    #[test]
    fn logical_effect_examples() {
        let c = code(3);
        for g in c.gauge_gens() {
            assert_eq!(logical_effect(&c, g).unwrap(), LogicalEffect::I);
        }
        assert_eq!(logical_effect(&c, c.logical_z()).unwrap(), LogicalEffect::Z);
        assert_eq!(logical_effect(&c, c.logical_x()).unwrap(), LogicalEffect::X);
        let pair = PauliOp::from_support(9, Pauli1::Z, [0, 1]);
        assert_eq!(logical_effect(&c, &pair).unwrap(), LogicalEffect::I);
        let bad = PauliOp::single(9, 0, Pauli1::Z);
        assert!(matches!(
            logical_effect(&c, &bad),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn brute_force_distance() {
        assert_eq!(distance_bruteforce(&code(2)).unwrap(), 2);
        assert_eq!(
            distance_bruteforce_with(&code(3), ErrorFamily::XOnly).unwrap(),
            3
        );
        assert!(matches!(
            distance_bruteforce(&code(4)),
            Err(Error::ResourceGuard(_))
        ));
    }
}
