//! Dense linear algebra for small qubit registers: Pauli strings, density
//! matrices, Kraus channels, Pauli transfer matrices and computational-basis
//! measurement.
//!
//! Pauli strings are indexed with `I=0, X=1, Y=2, Z=3` per qubit and the
//! leftmost qubit most significant, so for two qubits the order is
//! `II, IX, IY, IZ, XI, ..., ZZ`. Every 4^n vector in the crate uses it.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::stats::Histogram;

pub type CMatrix = DMatrix<Complex64>;

/// Largest register the dense representation supports.
pub const MAX_QUBITS: usize = 4;

/// Tolerance for structural checks (Hermiticity, CPTP completeness).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for aggregate checks (trace, simplex sums, eigenvalue floor).
pub const AGGREGATE_TOL: f64 = 1e-9;

const PAULI_CHARS: [char; 4] = ['I', 'X', 'Y', 'Z'];

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single_pauli(code: usize) -> CMatrix {
    let entries = match code {
        0 => [c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
        1 => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        2 => [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        3 => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
        _ => unreachable!("Pauli code out of range"),
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

/// Number of Pauli strings on `n` qubits.
pub fn pauli_count(num_qubits: usize) -> usize {
    1 << (2 * num_qubits)
}

/// Per-qubit codes of a Pauli index, leftmost qubit first.
pub fn pauli_codes(index: usize, num_qubits: usize) -> Vec<usize> {
    (0..num_qubits)
        .map(|k| (index >> (2 * (num_qubits - 1 - k))) & 3)
        .collect()
}

/// Label such as `"XZ"` for a Pauli index.
pub fn pauli_label(index: usize, num_qubits: usize) -> String {
    pauli_codes(index, num_qubits)
        .into_iter()
        .map(|code| PAULI_CHARS[code])
        .collect()
}

/// All labels on `n` qubits in index order.
pub fn pauli_labels(num_qubits: usize) -> Vec<String> {
    (0..pauli_count(num_qubits))
        .map(|i| pauli_label(i, num_qubits))
        .collect()
}

/// Parse a Pauli label into its index.
pub fn pauli_index(label: &str) -> Result<usize> {
    let invalid = |reason: &str| Error::InvalidLabel {
        label: label.to_string(),
        reason: reason.to_string(),
    };
    if label.is_empty() {
        return Err(invalid("empty label"));
    }
    if label.chars().count() > MAX_QUBITS {
        return Err(invalid("more than 4 qubits"));
    }
    label.chars().try_fold(0usize, |acc, ch| {
        let code = PAULI_CHARS
            .iter()
            .position(|&p| p == ch)
            .ok_or_else(|| invalid(&format!("character {ch:?} not in {{I,X,Y,Z}}")))?;
        Ok(acc * 4 + code)
    })
}

/// Whether Pauli strings `a` and `b` commute.
///
/// Two single-qubit Paulis anticommute exactly when both are non-identity
/// and different; the strings commute when the anticommuting positions are
/// even in number.
pub fn paulis_commute(a: usize, b: usize, num_qubits: usize) -> bool {
    let mut anti = 0;
    for k in 0..num_qubits {
        let shift = 2 * k;
        let (pa, pb) = ((a >> shift) & 3, (b >> shift) & 3);
        if pa != 0 && pb != 0 && pa != pb {
            anti += 1;
        }
    }
    anti % 2 == 0
}

/// The ±1 commutation-sign matrix `W[a][b]`.
pub fn commutation_matrix(num_qubits: usize) -> DMatrix<f64> {
    let m = pauli_count(num_qubits);
    DMatrix::from_fn(m, m, |a, b| if paulis_commute(a, b, num_qubits) { 1.0 } else { -1.0 })
}

/// Kronecker product of two complex matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "matrix dimension {dim} is not a power of two"
        )));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::InvalidInput(format!(
            "{n} qubits exceeds the supported maximum of {MAX_QUBITS}"
        )));
    }
    Ok(n)
}

/// An n-qubit Pauli string together with its matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliOperator {
    index: usize,
    num_qubits: usize,
    matrix: CMatrix,
}

impl PauliOperator {
    pub fn from_index(index: usize, num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::InvalidInput(format!(
                "qubit count {num_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        if index >= pauli_count(num_qubits) {
            return Err(Error::InvalidInput(format!(
                "Pauli index {index} out of range for {num_qubits} qubits"
            )));
        }
        let matrix = pauli_codes(index, num_qubits)
            .into_iter()
            .map(single_pauli)
            .reduce(|acc, p| kron(&acc, &p))
            .expect("at least one qubit");
        Ok(Self {
            index,
            num_qubits,
            matrix,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn label(&self) -> String {
        pauli_label(self.index, self.num_qubits)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Build the Pauli operator for a label such as `"XZ"`.
pub fn pauli_operator(label: &str) -> Result<PauliOperator> {
    let index = pauli_index(label)?;
    PauliOperator::from_index(index, label.chars().count())
}

/// All Pauli matrices on `n` qubits in index order.
pub fn pauli_basis(num_qubits: usize) -> Vec<CMatrix> {
    (0..pauli_count(num_qubits))
        .map(|i| PauliOperator::from_index(i, num_qubits).expect("index in range").matrix)
        .collect()
}

/// Validation applied when a density matrix is built from raw entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateOptions {
    /// Divide by the trace instead of requiring it to be one.
    pub normalize_trace: bool,
    /// Smallest eigenvalue accepted.
    pub min_eigenvalue: f64,
    /// Clip eigenvalues below the floor to zero and renormalize instead of
    /// rejecting the matrix.
    pub project: bool,
}

impl Default for StateOptions {
    fn default() -> Self {
        Self {
            normalize_trace: false,
            min_eigenvalue: -AGGREGATE_TOL,
            project: false,
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite 2^n x 2^n matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    num_qubits: usize,
    trace_normalization: f64,
}

/// The printed two-qubit test state, row-major, before trace normalization.
/// Its trace is 1.01 and its smallest eigenvalue about -3.8e-3 because the
/// entries are rounded to two decimals.
const TEST_STATE_ENTRIES: [(f64, f64); 16] = [
    (0.2, 0.0),
    (0.22, -0.02),
    (0.15, -0.09),
    (0.16, -0.1),
    (0.22, 0.02),
    (0.24, 0.0),
    (0.16, -0.08),
    (0.19, -0.1),
    (0.15, 0.09),
    (0.16, 0.08),
    (0.36, 0.0),
    (0.14, 0.06),
    (0.16, 0.1),
    (0.19, 0.1),
    (0.14, -0.06),
    (0.21, 0.0),
];

impl DensityMatrix {
    /// Validate with default options: trace must already be one and every
    /// eigenvalue at least `-1e-9`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_options(matrix, &StateOptions::default())
    }

    pub fn with_options(matrix: CMatrix, opts: &StateOptions) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let num_qubits = qubits_for_dim(matrix.nrows())?;
        if !matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm_err = max_abs(&(&matrix - matrix.adjoint()));
        if herm_err > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max deviation {herm_err:.3e})"
            )));
        }
        // Symmetrize so round-off in the input does not leak downstream.
        let mut matrix = (&matrix + matrix.adjoint()).scale(0.5);
        let tr = trace(&matrix).re;
        let mut trace_normalization = 1.0;
        if opts.normalize_trace {
            if tr <= 0.0 {
                return Err(Error::InvalidState(format!("trace {tr} is not positive")));
            }
            matrix.unscale_mut(tr);
            trace_normalization = tr;
        } else if (tr - 1.0).abs() > AGGREGATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }

        let eig = SymmetricEigen::new(matrix.clone());
        let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < opts.min_eigenvalue {
            if !opts.project {
                return Err(Error::InvalidState(format!(
                    "not positive semidefinite (smallest eigenvalue {min_eig:.3e})"
                )));
            }
            let clipped = eig.eigenvalues.map(|v| v.max(0.0));
            let total: f64 = clipped.sum();
            let diag = CMatrix::from_diagonal(&clipped.map(|v| Complex64::new(v / total, 0.0)));
            let v = &eig.eigenvectors;
            matrix = v * diag * v.adjoint();
        }
        Ok(Self {
            matrix,
            num_qubits,
            trace_normalization,
        })
    }

    pub(crate) fn from_raw(matrix: CMatrix, num_qubits: usize) -> Self {
        Self {
            matrix,
            num_qubits,
            trace_normalization: 1.0,
        }
    }

    /// Pure state `|psi><psi|` from (possibly unnormalized) amplitudes.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let num_qubits = qubits_for_dim(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = nalgebra::DVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|a| a / norm));
        Ok(Self::from_raw(&v * v.adjoint(), num_qubits))
    }

    /// Computational basis state `|index><index|`.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidInput(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::pure(&amps)
    }

    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        qubits_for_dim(dim)?;
        Ok(Self::from_raw(
            CMatrix::identity(dim, dim).unscale(dim as f64),
            num_qubits,
        ))
    }

    /// The built-in two-qubit test state, trace-normalized.
    ///
    /// The printed entries are rounded, which leaves one eigenvalue near
    /// `-3.8e-3`; this constructor accepts eigenvalues down to `-5e-3` so the
    /// matrix is used as printed rather than projected.
    pub fn test_state() -> Self {
        let entries: Vec<Complex64> = TEST_STATE_ENTRIES
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        let opts = StateOptions {
            normalize_trace: true,
            min_eigenvalue: -5e-3,
            project: false,
        };
        Self::with_options(CMatrix::from_row_slice(4, 4, &entries), &opts).expect("built-in test state is valid")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Trace the input had before normalization (1.0 if none was applied).
    pub fn trace_normalization(&self) -> f64 {
        self.trace_normalization
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    /// `U rho U^dagger`.
    pub fn evolve(&self, unitary: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), unitary.nrows())?;
        Ok(Self::from_raw(
            unitary * &self.matrix * unitary.adjoint(),
            self.num_qubits,
        ))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// A linear map on 2^n x 2^n matrices.
pub trait QuantumChannel {
    fn num_qubits(&self) -> usize;

    /// Apply the map to an arbitrary (not necessarily physical) matrix.
    fn apply_matrix(&self, m: &CMatrix) -> CMatrix;

    fn ptm(&self) -> Ptm {
        Ptm::from_map(self.num_qubits(), |m| self.apply_matrix(m))
    }
}

/// Channel given by Kraus operators `E_k` with `sum_k E_k^dagger E_k = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    num_qubits: usize,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        if first.nrows() != first.ncols() {
            return Err(Error::InvalidChannel("Kraus operator not square".into()));
        }
        let dim = first.nrows();
        let num_qubits = qubits_for_dim(dim)?;
        for op in &ops {
            if op.shape() != (dim, dim) {
                return Err(Error::DimMismatch {
                    expected: dim,
                    actual: op.nrows(),
                });
            }
        }
        let channel = Self { ops, num_qubits };
        let err = channel.completeness_error();
        if err >= STRUCTURAL_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators not complete (max deviation {err:.3e})"
            )));
        }
        Ok(channel)
    }

    pub fn identity(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        Self {
            ops: vec![CMatrix::identity(dim, dim)],
            num_qubits,
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    /// `max |sum_k E_k^dagger E_k - I|`.
    pub fn completeness_error(&self) -> f64 {
        let dim = self.dim();
        let sum = self
            .ops
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, e| acc + e.adjoint() * e);
        max_abs(&(sum - CMatrix::identity(dim, dim)))
    }

    /// The channel `after ∘ self`.
    pub fn then(&self, after: &KrausChannel) -> Result<KrausChannel> {
        check_dim(self.dim(), after.dim())?;
        let ops = after
            .ops
            .iter()
            .flat_map(|a| self.ops.iter().map(move |b| a * b))
            .collect();
        Ok(Self {
            ops,
            num_qubits: self.num_qubits,
        })
    }
}

impl QuantumChannel for KrausChannel {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let dim = self.dim();
        self.ops
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, e| acc + e * m * e.adjoint())
    }
}

/// `rho' = sum_k E_k rho E_k^dagger`.
pub fn apply_channel<C: QuantumChannel + ?Sized>(channel: &C, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_dim(1 << channel.num_qubits(), rho.dim())?;
    Ok(DensityMatrix::from_raw(
        channel.apply_matrix(rho.matrix()),
        rho.num_qubits(),
    ))
}

/// Pauli transfer matrix: entry `(a, b) = Tr[P_a E(P_b)] / 2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ptm {
    matrix: DMatrix<f64>,
    num_qubits: usize,
}

impl Ptm {
    pub fn from_map(num_qubits: usize, map: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let basis = pauli_basis(num_qubits);
        let dim = (1usize << num_qubits) as f64;
        let m = basis.len();
        let mut matrix = DMatrix::zeros(m, m);
        for (b, pb) in basis.iter().enumerate() {
            let image = map(pb);
            for (a, pa) in basis.iter().enumerate() {
                // Tr[A B] = sum_ij A_ij B_ji
                let tr: Complex64 = pa
                    .row_iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, v)| v * image[(j, i)])
                            .sum::<Complex64>()
                    })
                    .sum();
                matrix[(a, b)] = tr.re / dim;
            }
        }
        Self { matrix, num_qubits }
    }

    pub fn from_matrix(matrix: DMatrix<f64>, num_qubits: usize) -> Result<Self> {
        check_dim(pauli_count(num_qubits), matrix.nrows())?;
        check_dim(pauli_count(num_qubits), matrix.ncols())?;
        Ok(Self { matrix, num_qubits })
    }

    /// Diagonal PTM with the given Pauli eigenvalues.
    pub fn diagonal_from(values: &[f64], num_qubits: usize) -> Result<Self> {
        check_dim(pauli_count(num_qubits), values.len())?;
        Ok(Self {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)),
            num_qubits,
        })
    }

    pub fn identity(num_qubits: usize) -> Self {
        let m = pauli_count(num_qubits);
        Self {
            matrix: DMatrix::identity(m, m),
            num_qubits,
        }
    }

    /// PTM of `rho -> U rho U^dagger`.
    pub fn of_unitary(u: &CMatrix) -> Result<Self> {
        let num_qubits = qubits_for_dim(u.nrows())?;
        Ok(Self::from_map(num_qubits, |m| u * m * u.adjoint()))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().copied().collect()
    }

    /// PTM of `after ∘ self`.
    pub fn then(&self, after: &Ptm) -> Ptm {
        Ptm {
            matrix: &after.matrix * &self.matrix,
            num_qubits: self.num_qubits,
        }
    }

    pub fn max_abs_diff(&self, other: &Ptm) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }

    /// First row equals `(1, 0, ..., 0)` to the structural tolerance.
    pub fn is_trace_preserving(&self) -> bool {
        self.matrix
            .row(0)
            .iter()
            .enumerate()
            .all(|(j, &v)| (v - if j == 0 { 1.0 } else { 0.0 }).abs() < STRUCTURAL_TOL)
    }

    /// Average gate fidelity to the identity, `(d F_e + 1) / (d + 1)` with
    /// entanglement fidelity `F_e = Tr[PTM] / d^2`.
    pub fn average_fidelity(&self) -> f64 {
        let d = (1usize << self.num_qubits) as f64;
        let fe = self.matrix.trace() / (d * d);
        (d * fe + 1.0) / (d + 1.0)
    }
}

/// PTM of any channel (Kraus or Pauli).
pub fn ptm_of_channel<C: QuantumChannel + ?Sized>(channel: &C) -> Ptm {
    channel.ptm()
}

/// Projective measurement in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComputationalPovm {
    num_qubits: usize,
}

impl ComputationalPovm {
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits }
    }

    pub fn outcomes(&self) -> usize {
        1 << self.num_qubits
    }

    /// `|s><s|`.
    pub fn projector(&self, s: usize) -> CMatrix {
        let dim = self.outcomes();
        let mut m = CMatrix::zeros(dim, dim);
        m[(s, s)] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Histogram> {
        check_dim(self.outcomes(), rho.dim())?;
        Ok(measure_probs(rho))
    }
}

/// `p_s = Tr[Pi_s rho]` over computational basis outcomes.
pub fn measure_probs(rho: &DensityMatrix) -> Histogram {
    Histogram::from_diagonal(rho.matrix().diagonal().iter().map(|z| z.re))
}

/// Ideal gates the experiment can mitigate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    /// Hadamard on every qubit.
    #[default]
    #[serde(alias = "hh")]
    Hadamard,
    /// CNOT with qubit 0 (leftmost) as control; two qubits only.
    Cnot,
    Identity,
}

impl Gate {
    pub fn unitary(&self, num_qubits: usize) -> Result<CMatrix> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::InvalidInput(format!(
                "qubit count {num_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1usize << num_qubits;
        match self {
            Gate::Identity => Ok(CMatrix::identity(dim, dim)),
            Gate::Hadamard => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let h = CMatrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)]);
                Ok((1..num_qubits).fold(h.clone(), |acc, _| kron(&acc, &h)))
            }
            Gate::Cnot => {
                if num_qubits != 2 {
                    return Err(Error::InvalidInput("CNOT needs exactly two qubits".into()));
                }
                let o = c(1., 0.);
                let z = c(0., 0.);
                Ok(CMatrix::from_row_slice(
                    4,
                    4,
                    &[o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z],
                ))
            }
        }
    }
}

impl std::str::FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hh" | "hadamard" => Ok(Gate::Hadamard),
            "cnot" | "cx" => Ok(Gate::Cnot),
            "identity" | "id" | "ii" => Ok(Gate::Identity),
            other => Err(Error::InvalidInput(format!("unknown gate {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn re(m: &CMatrix, i: usize, j: usize) -> f64 {
        m[(i, j)].re
    }

    #[test]
    fn identity_label_is_identity_matrix() {
        let p = pauli_operator("I").unwrap();
        assert_eq!(p.matrix(), &CMatrix::identity(2, 2));
    }

    #[test]
    fn z_is_diagonal() {
        let p = pauli_operator("Z").unwrap();
        assert_eq!(re(p.matrix(), 0, 0), 1.0);
        assert_eq!(re(p.matrix(), 1, 1), -1.0);
        assert_eq!(p.matrix()[(0, 1)], c(0., 0.));
    }

    #[test]
    fn xz_matches_hand_kronecker() {
        let p = pauli_operator("XZ").unwrap();
        let m = p.matrix();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 2)] = c(1., 0.);
        expected[(1, 3)] = c(-1., 0.);
        expected[(2, 0)] = c(1., 0.);
        expected[(3, 1)] = c(-1., 0.);
        assert_eq!(m, &expected);
        assert_eq!(p.index(), 4 + 3);
    }

    #[test]
    fn bad_labels_rejected() {
        assert!(matches!(pauli_operator("XA"), Err(Error::InvalidLabel { .. })));
        assert!(matches!(pauli_operator(""), Err(Error::InvalidLabel { .. })));
        assert!(matches!(pauli_operator("xz"), Err(Error::InvalidLabel { .. })));
    }

    #[test]
    fn paulis_are_unitary_hermitian_involutions() {
        for n in 1..=2 {
            for p in pauli_basis(n) {
                let dim = p.nrows();
                assert_eq!(p.adjoint(), p);
                assert!(max_abs(&(&p * &p - CMatrix::identity(dim, dim))) < 1e-15);
            }
        }
    }

    #[test]
    fn commutation_matrix_squares_to_scaled_identity() {
        for n in 1..=3 {
            let w = commutation_matrix(n);
            let m = pauli_count(n);
            assert_eq!(w.transpose(), w);
            let sq = &w * &w;
            assert_eq!(sq, DMatrix::identity(m, m) * m as f64);
        }
    }

    #[test]
    fn commutation_agrees_with_matrices() {
        let basis = pauli_basis(2);
        for a in 0..16 {
            for b in 0..16 {
                let comm = &basis[a] * &basis[b] - &basis[b] * &basis[a];
                assert_eq!(max_abs(&comm) < 1e-12, paulis_commute(a, b, 2), "{a} {b}");
            }
        }
    }

    #[test]
    fn labels_round_trip() {
        for (i, l) in pauli_labels(2).iter().enumerate() {
            assert_eq!(pauli_index(l).unwrap(), i);
        }
        assert_eq!(pauli_labels(2)[1], "IX");
        assert_eq!(pauli_labels(2)[4], "XI");
    }

    #[test]
    fn identity_channel_leaves_state() {
        let rho = DensityMatrix::test_state();
        let out = apply_channel(&KrausChannel::identity(2), &rho).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let rho = DensityMatrix::test_state();
        assert!(matches!(
            apply_channel(&KrausChannel::identity(1), &rho),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert!(matches!(KrausChannel::new(vec![half]), Err(Error::InvalidChannel(_))));
    }

    #[test]
    fn test_state_is_trace_normalized() {
        let rho = DensityMatrix::test_state();
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.trace_normalization(), 1.01, epsilon = 1e-12);
        let min = rho.eigenvalues()[0];
        assert!(min < -1e-3 && min > -5e-3, "{min}");
    }

    #[test]
    fn psd_violation_rejected_by_default_and_projected_on_request() {
        let entries: Vec<Complex64> = TEST_STATE_ENTRIES
            .iter()
            .map(|&(re, im)| Complex64::new(re / 1.01, im / 1.01))
            .collect();
        let m = CMatrix::from_row_slice(4, 4, &entries);
        assert!(matches!(DensityMatrix::new(m.clone()), Err(Error::InvalidState(_))));
        let opts = StateOptions {
            project: true,
            ..StateOptions::default()
        };
        let rho = DensityMatrix::with_options(m, &opts).unwrap();
        assert!(rho.eigenvalues()[0] >= -1e-12);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_must_be_one_without_normalization() {
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidState(_))));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMatrix::identity(2, 2).scale(0.5);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidState(_))));
    }

    #[test]
    fn measure_basis_and_mixed_states() {
        let p = measure_probs(&DensityMatrix::basis_state(2, 0).unwrap());
        assert_eq!(p.probs(), &[1.0, 0.0, 0.0, 0.0]);
        let p = measure_probs(&DensityMatrix::maximally_mixed(2).unwrap());
        for v in p.probs() {
            assert_abs_diff_eq!(*v, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn hadamard_test_state_histogram() {
        let rho = DensityMatrix::test_state();
        let g = Gate::Hadamard.unitary(2).unwrap();
        let p = measure_probs(&rho.evolve(&g).unwrap());
        let expected = [0.7550, 0.0817, 0.1015, 0.0619];
        for (a, b) in p.probs().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 5e-5);
        }
        // Exact value: (0.2+0.24+0.36+0.21 + 2*(0.22+0.15+0.16+0.16+0.19+0.14)) / (4*1.01)
        assert_abs_diff_eq!(p.probs()[0], 3.05 / 4.04, epsilon = 1e-12);
    }

    #[test]
    fn povm_projectors_resolve_identity() {
        let povm = ComputationalPovm::new(2);
        let sum = (0..4).fold(CMatrix::zeros(4, 4), |acc, s| acc + povm.projector(s));
        assert_eq!(sum, CMatrix::identity(4, 4));
        for s in 0..4 {
            for t in 0..4 {
                let prod = povm.projector(s) * povm.projector(t);
                let expected = if s == t {
                    povm.projector(s)
                } else {
                    CMatrix::zeros(4, 4)
                };
                assert_eq!(prod, expected);
            }
        }
    }

    #[test]
    fn identity_channel_ptm_is_identity() {
        for n in 1..=2 {
            let ptm = ptm_of_channel(&KrausChannel::identity(n));
            assert!(ptm.max_abs_diff(&Ptm::identity(n)) < 1e-15);
        }
    }

    #[test]
    fn unitary_ptm_is_trace_preserving_and_bounded() {
        let g = Gate::Cnot.unitary(2).unwrap();
        let ptm = Ptm::of_unitary(&g).unwrap();
        assert!(ptm.is_trace_preserving());
        assert!(ptm.matrix().iter().all(|v| v.abs() <= 1.0 + 1e-12));
        assert_abs_diff_eq!(
            ptm.average_fidelity(),
            (4.0 * (4.0 / 16.0) + 1.0) / 5.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cnot_requires_two_qubits() {
        assert!(Gate::Cnot.unitary(3).is_err());
        assert_eq!("hh".parse::<Gate>().unwrap(), Gate::Hadamard);
    }
}
