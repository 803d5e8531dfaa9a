//! Decoherence-driven noise: amplitude/phase damping channels, their Pauli
//! twirl, separable multi-qubit Pauli channels and the drifting schedule of
//! per-qubit T1/T2 means.

use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};
use crate::quantum::{
    commutation_matrix, pauli_basis, pauli_count, pauli_index, pauli_label, CMatrix, KrausChannel, Ptm, QuantumChannel,
    AGGREGATE_TOL, MAX_QUBITS, STRUCTURAL_TOL,
};

/// Default gate duration in microseconds.
pub const DEFAULT_GATE_TIME_US: f64 = 100.0;

/// Pauli channel `E(rho) = sum_i x_i P_i rho P_i` with `x` on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliChannel {
    num_qubits: usize,
    coeffs: Vec<f64>,
}

impl PauliChannel {
    /// Entries within `1e-12` below zero are clipped; the sum must be one to
    /// `1e-9`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let len = coeffs.len();
        let num_qubits = (1..=MAX_QUBITS)
            .find(|&n| pauli_count(n) == len)
            .ok_or_else(|| Error::InvalidInput(format!("{len} coefficients is not 4^n for n in 1..=4")))?;
        if let Some(bad) = coeffs.iter().find(|v| !v.is_finite() || **v < -1e-12) {
            return Err(Error::InvalidInput(format!(
                "Pauli coefficient {bad} is negative or non-finite"
            )));
        }
        let coeffs: Vec<f64> = coeffs.into_iter().map(|v| v.max(0.0)).collect();
        let sum: f64 = coeffs.iter().sum();
        if (sum - 1.0).abs() > AGGREGATE_TOL {
            return Err(Error::InvalidInput(format!("Pauli coefficients sum to {sum}, not 1")));
        }
        Ok(Self { num_qubits, coeffs })
    }

    /// Accept any nonnegative vector and rescale it onto the simplex.
    pub fn normalized(coeffs: Vec<f64>) -> Result<Self> {
        let sum: f64 = coeffs.iter().filter(|v| **v > 0.0).sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Err(Error::InvalidInput("coefficients have no positive mass".into()));
        }
        Self::new(coeffs.into_iter().map(|v| v.max(0.0) / sum).collect())
    }

    /// Noiseless channel `e_{I...I}`.
    pub fn identity(num_qubits: usize) -> Self {
        let mut coeffs = vec![0.0; pauli_count(num_qubits)];
        coeffs[0] = 1.0;
        Self { num_qubits, coeffs }
    }

    /// Channel with the given PTM eigenvalues `f`, i.e. `x = W f / 4^n`.
    pub fn from_eigenvalues(eigenvalues: &[f64], num_qubits: usize) -> Result<Self> {
        check_dim(pauli_count(num_qubits), eigenvalues.len())?;
        let w = commutation_matrix(num_qubits);
        let m = eigenvalues.len() as f64;
        let x = (0..eigenvalues.len())
            .map(|a| (0..eigenvalues.len()).map(|b| w[(a, b)] * eigenvalues[b]).sum::<f64>() / m)
            .collect();
        Self::new(x)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient for a label such as `"ZI"`.
    pub fn get(&self, label: &str) -> Result<f64> {
        check_dim(self.num_qubits, label.chars().count())?;
        Ok(self.coeffs[pauli_index(label)?])
    }

    /// Diagonal of the PTM, `f_b = sum_a x_a W_ab`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let w = commutation_matrix(self.num_qubits);
        (0..self.len())
            .map(|b| self.coeffs.iter().enumerate().map(|(a, x)| x * w[(a, b)]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &PauliChannel) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(|i| pauli_label(i, self.num_qubits)).collect()
    }

    /// Channel acting on qubits in a permuted order: qubit `k` of the result
    /// is qubit `perm[k]` of `self`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_qubits;
        check_dim(n, perm.len())?;
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput(format!("{perm:?} is not a permutation")));
            }
        }
        let mut coeffs = vec![0.0; self.len()];
        for (i, slot) in coeffs.iter_mut().enumerate() {
            let codes = crate::quantum::pauli_codes(i, n);
            let mut src = vec![0; n];
            for (k, &p) in perm.iter().enumerate() {
                src[p] = codes[k];
            }
            let j = src.iter().fold(0, |acc, c| acc * 4 + c);
            *slot = self.coeffs[j];
        }
        Ok(Self { num_qubits: n, coeffs })
    }
}

impl QuantumChannel for PauliChannel {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let dim = m.nrows();
        pauli_basis(self.num_qubits)
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, x)| **x != 0.0)
            .fold(CMatrix::zeros(dim, dim), |acc, (p, x)| acc + (p * m * p).scale(*x))
    }

    fn ptm(&self) -> Ptm {
        Ptm::diagonal_from(&self.eigenvalues(), self.num_qubits).expect("dimensions agree")
    }
}

/// Serialized as an ordered `{label: coefficient}` map.
impl Serialize for PauliChannel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.len()))?;
        for (i, x) in self.coeffs.iter().enumerate() {
            map.serialize_entry(&pauli_label(i, self.num_qubits), x)?;
        }
        map.end()
    }
}

/// Whether `T2 > 2 T1` is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Feasibility {
    #[default]
    Strict,
    AllowUnphysical,
}

/// Per-qubit T1/T2 in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceTimes {
    pub t1: f64,
    pub t2: f64,
    /// Pure dephasing time; `None` when T2 > 2 T1 was allowed through.
    pub t_phi: Option<f64>,
}

impl DecoherenceTimes {
    pub fn new(t1: f64, t2: f64, feasibility: Feasibility) -> Result<Self> {
        for (name, v) in [("T1", t1), ("T2", t2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTime(format!("{name} = {v} must be finite and positive")));
            }
        }
        let t_phi = match tphi_from_bloch_redfield(t1, t2) {
            Ok(v) => Some(v),
            Err(Error::InfeasibleTimes { .. }) if feasibility == Feasibility::AllowUnphysical => None,
            Err(e) => return Err(e),
        };
        Ok(Self { t1, t2, t_phi })
    }

    pub fn strict(t1: f64, t2: f64) -> Result<Self> {
        Self::new(t1, t2, Feasibility::Strict)
    }
}

/// `Pr(|1> -> |0>) = 1 - exp(-t / T1)`.
pub fn decay_probability(t: f64, t1: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidTime(format!("t = {t} must be nonnegative")));
    }
    if !(t1.is_finite() && t1 > 0.0) {
        return Err(Error::InvalidTime(format!("T1 = {t1} must be finite and positive")));
    }
    Ok(-(-t / t1).exp_m1())
}

/// Pure dephasing time from `1/T2 = 1/(2 T1) + 1/T_phi`.
///
/// Returns `f64::INFINITY` when `T2 = 2 T1` and `InfeasibleTimes` when
/// `T2 > 2 T1`.
pub fn tphi_from_bloch_redfield(t1: f64, t2: f64) -> Result<f64> {
    for (name, v) in [("T1", t1), ("T2", t2)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidTime(format!("{name} = {v} must be finite and positive")));
        }
    }
    let rate = 1.0 / t2 - 1.0 / (2.0 * t1);
    if rate.abs() <= 1e-12 / t2 {
        Ok(f64::INFINITY)
    } else if rate < 0.0 {
        Err(Error::InfeasibleTimes { t1, t2 })
    } else {
        Ok(1.0 / rate)
    }
}

/// Damping strengths of the combined amplitude/phase damping channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApdParams {
    pub gamma: f64,
    pub lambda: f64,
    /// Duration the strengths were computed for (0 when set directly).
    pub t: f64,
}

impl ApdParams {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("lambda", lambda)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParam(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(Self { gamma, lambda, t: 0.0 })
    }

    /// `gamma = 1 - exp(-t/T1)`, `lambda = 1 - exp(-t/T2)`.
    pub fn from_times(t: f64, t1: f64, t2: f64) -> Result<Self> {
        let gamma = decay_probability(t, t1)?;
        let lambda = decay_probability(t, t2)?;
        Ok(Self { gamma, lambda, t })
    }
}

fn diag2(a: f64, b: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(a, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(b, 0.0),
        ],
    )
}

fn lowering(amplitude: f64) -> CMatrix {
    let z = Complex64::new(0.0, 0.0);
    CMatrix::from_row_slice(2, 2, &[z, Complex64::new(amplitude, 0.0), z, z])
}

/// Amplitude damping with decay probability `gamma`.
pub fn ad_channel(gamma: f64) -> Result<KrausChannel> {
    ApdParams::new(gamma, 0.0)?;
    KrausChannel::new(vec![diag2(1.0, (1.0 - gamma).sqrt()), lowering(gamma.sqrt())])
}

/// Phase damping with strength `lambda`.
pub fn pd_channel(lambda: f64) -> Result<KrausChannel> {
    ApdParams::new(0.0, lambda)?;
    KrausChannel::new(vec![diag2(1.0, (1.0 - lambda).sqrt()), diag2(0.0, lambda.sqrt())])
}

/// Phase damping after amplitude damping, as three Kraus operators.
pub fn apd_channel(params: &ApdParams) -> Result<KrausChannel> {
    let ApdParams { gamma, lambda, .. } = ApdParams::new(params.gamma, params.lambda)?;
    KrausChannel::new(vec![
        diag2(1.0, ((1.0 - gamma) * (1.0 - lambda)).sqrt()),
        lowering(gamma.sqrt()),
        diag2(0.0, ((1.0 - gamma) * lambda).sqrt()),
    ])
}

/// Pauli twirl of a channel: the Pauli channel with the same PTM diagonal.
pub fn pauli_twirl<C: QuantumChannel + ?Sized>(channel: &C) -> Result<PauliChannel> {
    let ptm = channel.ptm();
    if !ptm.is_trace_preserving() {
        return Err(Error::InvalidChannel("channel is not trace preserving".into()));
    }
    let n = channel.num_qubits();
    let w = commutation_matrix(n);
    let f = ptm.diagonal();
    let m = f.len() as f64;
    let mut x: Vec<f64> = (0..f.len())
        .map(|a| f.iter().enumerate().map(|(b, fb)| w[(a, b)] * fb).sum::<f64>() / m)
        .collect();
    if let Some(bad) = x.iter().find(|v| **v < -STRUCTURAL_TOL) {
        return Err(Error::InvalidChannel(format!(
            "twirl produced negative weight {bad}; channel is not completely positive"
        )));
    }
    for v in &mut x {
        *v = v.max(0.0);
    }
    let sum: f64 = x.iter().sum();
    PauliChannel::new(x.into_iter().map(|v| v / sum).collect())
}

/// Single-qubit Pauli weights `(c0, c1, c2, c3)` for `I, X, Y, Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitTwirled {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl SingleQubitTwirled {
    pub fn as_array(&self) -> [f64; 4] {
        [self.c0, self.c1, self.c2, self.c3]
    }

    pub fn to_channel(&self) -> PauliChannel {
        PauliChannel::new(self.as_array().to_vec()).expect("twirled weights are on the simplex")
    }
}

/// Closed-form twirled APD weights from decoherence times:
/// `c1 = c2 = (1 - e^{-t/T1}) / 4`, `c3 = (1 - e^{-t/T2}) / 4`,
/// `c0 = 1 - (c1 + c2 + c3)`.
pub fn twirled_apd_coeffs(t: f64, t1: f64, t2: f64) -> Result<SingleQubitTwirled> {
    let c1 = decay_probability(t, t1)? / 4.0;
    let c3 = decay_probability(t, t2)? / 4.0;
    Ok(SingleQubitTwirled {
        c0: 1.0 - (c1 + c1 + c3),
        c1,
        c2: c1,
        c3,
    })
}

/// Weights obtained by expanding the APD Kraus operators in the Pauli basis
/// and twirling exactly. `c1 = c2` agree with [`twirled_apd_coeffs`]; the
/// identity and Z weights differ because they depend on
/// `s = sqrt((1-gamma)(1-lambda))` rather than on `lambda` alone.
pub fn apd_twirl_exact(params: &ApdParams) -> Result<SingleQubitTwirled> {
    let ApdParams { gamma, lambda, .. } = ApdParams::new(params.gamma, params.lambda)?;
    let s = ((1.0 - gamma) * (1.0 - lambda)).sqrt();
    let dephase = lambda * (1.0 - gamma);
    Ok(SingleQubitTwirled {
        c0: ((1.0 + s).powi(2) + dephase) / 4.0,
        c1: gamma / 4.0,
        c2: gamma / 4.0,
        c3: ((1.0 - s).powi(2) + dephase) / 4.0,
    })
}

/// Direct product of per-qubit weight vectors; the first entry is qubit 0,
/// the most significant Pauli digit.
pub fn separable_product(per_qubit: &[SingleQubitTwirled]) -> Result<PauliChannel> {
    if per_qubit.is_empty() {
        return Err(Error::InvalidInput("no single-qubit channels".into()));
    }
    if per_qubit.len() > MAX_QUBITS {
        return Err(Error::InvalidInput(format!(
            "{} qubits exceeds the supported maximum of {MAX_QUBITS}",
            per_qubit.len()
        )));
    }
    let coeffs = per_qubit.iter().fold(vec![1.0], |acc, q| {
        acc.iter().flat_map(|a| q.as_array().map(|c| a * c)).collect()
    });
    PauliChannel::new(coeffs)
}

/// Linear drift of one qubit's T1/T2 means between the first and last period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitDrift {
    pub t1_start: f64,
    pub t1_end: f64,
    pub t2_start: f64,
    pub t2_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum ScheduleMeans {
    Interpolated {
        periods: usize,
        qubits: Vec<QubitDrift>,
    },
    /// `[period][qubit] = (t1, t2)`
    Explicit(Vec<Vec<(f64, f64)>>),
}

/// Per-period mean decoherence times for every qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    means: ScheduleMeans,
    gate_time: f64,
    feasibility: Feasibility,
}

impl NoiseSchedule {
    /// Two qubits drifting over five periods: T1 150 -> 60 and 200 -> 10,
    /// T2 70 -> 50 and 130 -> 62.5, with a 100 us gate.
    pub fn default_two_qubit() -> Self {
        Self {
            means: ScheduleMeans::Interpolated {
                periods: 5,
                qubits: vec![
                    QubitDrift {
                        t1_start: 150.0,
                        t1_end: 60.0,
                        t2_start: 70.0,
                        t2_end: 50.0,
                    },
                    QubitDrift {
                        t1_start: 200.0,
                        t1_end: 10.0,
                        t2_start: 130.0,
                        t2_end: 62.5,
                    },
                ],
            },
            gate_time: DEFAULT_GATE_TIME_US,
            feasibility: Feasibility::Strict,
        }
    }

    /// Means interpolated linearly: `mean(p) = start + p (end - start) / (P - 1)`.
    pub fn interpolated(periods: usize, qubits: Vec<QubitDrift>, gate_time: f64) -> Result<Self> {
        if periods == 0 {
            return Err(Error::InvalidInput("schedule needs at least one period".into()));
        }
        if qubits.is_empty() || qubits.len() > MAX_QUBITS {
            return Err(Error::InvalidInput(format!(
                "schedule has {} qubits, expected 1..={MAX_QUBITS}",
                qubits.len()
            )));
        }
        for q in &qubits {
            for v in [q.t1_start, q.t1_end, q.t2_start, q.t2_end] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidTime(format!("schedule mean {v} must be positive")));
                }
            }
        }
        Self::check_gate_time(gate_time)?;
        Ok(Self {
            means: ScheduleMeans::Interpolated { periods, qubits },
            gate_time,
            feasibility: Feasibility::Strict,
        })
    }

    /// Explicit `[period][qubit] = (t1, t2)` means.
    pub fn explicit(means: Vec<Vec<(f64, f64)>>, gate_time: f64) -> Result<Self> {
        let qubits = means.first().map_or(0, Vec::len);
        if means.is_empty() || qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::InvalidInput("explicit schedule is empty or too wide".into()));
        }
        for row in &means {
            if row.len() != qubits {
                return Err(Error::IncompleteGrid("ragged period rows".into()));
            }
            for &(t1, t2) in row {
                if !(t1.is_finite() && t1 > 0.0 && t2.is_finite() && t2 > 0.0) {
                    return Err(Error::InvalidTime(format!("times ({t1}, {t2}) must be positive")));
                }
            }
        }
        Self::check_gate_time(gate_time)?;
        Ok(Self {
            means: ScheduleMeans::Explicit(means),
            gate_time,
            feasibility: Feasibility::Strict,
        })
    }

    fn check_gate_time(t: f64) -> Result<()> {
        if t.is_finite() && t >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidTime(format!("gate time {t} must be nonnegative")))
        }
    }

    pub fn with_gate_time(mut self, gate_time: f64) -> Result<Self> {
        Self::check_gate_time(gate_time)?;
        self.gate_time = gate_time;
        Ok(self)
    }

    pub fn with_feasibility(mut self, feasibility: Feasibility) -> Self {
        self.feasibility = feasibility;
        self
    }

    pub fn periods(&self) -> usize {
        match &self.means {
            ScheduleMeans::Interpolated { periods, .. } => *periods,
            ScheduleMeans::Explicit(rows) => rows.len(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        match &self.means {
            ScheduleMeans::Interpolated { qubits, .. } => qubits.len(),
            ScheduleMeans::Explicit(rows) => rows[0].len(),
        }
    }

    pub fn gate_time(&self) -> f64 {
        self.gate_time
    }

    pub fn feasibility(&self) -> Feasibility {
        self.feasibility
    }

    /// Mean `(t1, t2)` per qubit for a period, before validation.
    pub fn raw_means(&self, period: usize) -> Result<Vec<(f64, f64)>> {
        let count = self.periods();
        if period >= count {
            return Err(Error::InvalidPeriod { period, count });
        }
        Ok(match &self.means {
            ScheduleMeans::Interpolated { periods, qubits } => {
                let frac = if *periods > 1 {
                    period as f64 / (*periods - 1) as f64
                } else {
                    0.0
                };
                qubits
                    .iter()
                    .map(|q| {
                        (
                            q.t1_start + frac * (q.t1_end - q.t1_start),
                            q.t2_start + frac * (q.t2_end - q.t2_start),
                        )
                    })
                    .collect()
            }
            ScheduleMeans::Explicit(rows) => rows[period].clone(),
        })
    }

    pub fn times(&self, period: usize) -> Result<Vec<DecoherenceTimes>> {
        self.raw_means(period)?
            .into_iter()
            .map(|(t1, t2)| DecoherenceTimes::new(t1, t2, self.feasibility))
            .collect()
    }

    /// Read `qubit,period,t1_us,t2_us` rows covering a full grid.
    pub fn from_csv_reader<R: Read>(reader: R, gate_time: f64, feasibility: Feasibility) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            qubit: usize,
            period: usize,
            t1_us: f64,
            t2_us: f64,
        }

        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["qubit", "period", "t1_us", "t2_us"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::InvalidInput(format!(
                "expected header {}, got {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows: Vec<Row> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        if rows.is_empty() {
            return Err(Error::IncompleteGrid("no rows".into()));
        }
        let qubits = rows.iter().map(|r| r.qubit).max().unwrap_or(0) + 1;
        let periods = rows.iter().map(|r| r.period).max().unwrap_or(0) + 1;
        if qubits > MAX_QUBITS {
            return Err(Error::InvalidInput(format!("{qubits} qubits exceeds {MAX_QUBITS}")));
        }
        let mut grid: Vec<Vec<Option<(f64, f64)>>> = vec![vec![None; qubits]; periods];
        for r in &rows {
            for v in [r.t1_us, r.t2_us] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidTime(format!(
                        "qubit {} period {}: time {v} must be positive",
                        r.qubit, r.period
                    )));
                }
            }
            DecoherenceTimes::new(r.t1_us, r.t2_us, feasibility)?;
            let cell = &mut grid[r.period][r.qubit];
            if cell.is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate row for qubit {} period {}",
                    r.qubit, r.period
                )));
            }
            *cell = Some((r.t1_us, r.t2_us));
        }
        let mut means = Vec::with_capacity(periods);
        for (p, row) in grid.into_iter().enumerate() {
            let row = row
                .into_iter()
                .enumerate()
                .map(|(q, cell)| cell.ok_or_else(|| Error::IncompleteGrid(format!("missing qubit {q} period {p}"))))
                .collect::<Result<Vec<_>>>()?;
            means.push(row);
        }
        Ok(Self::explicit(means, gate_time)?.with_feasibility(feasibility))
    }

    pub fn from_csv_path(path: &Path, gate_time: f64, feasibility: Feasibility) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, gate_time, feasibility)
    }
}

/// Mean Pauli channel for a period together with the per-qubit times used.
pub fn schedule_channel(schedule: &NoiseSchedule, period: usize) -> Result<(PauliChannel, Vec<DecoherenceTimes>)> {
    let times = schedule.times(period)?;
    let per_qubit = times
        .iter()
        .map(|d| twirled_apd_coeffs(schedule.gate_time(), d.t1, d.t2))
        .collect::<Result<Vec<_>>>()?;
    Ok((separable_product(&per_qubit)?, times))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{apply_channel, DensityMatrix};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn decay_edges() {
        assert_eq!(decay_probability(0.0, 42.0).unwrap(), 0.0);
        assert_eq!(decay_probability(f64::INFINITY, 42.0).unwrap(), 1.0);
        assert_abs_diff_eq!(decay_probability(100.0, 150.0).unwrap(), 0.48658, epsilon = 5e-6);
        assert!(matches!(decay_probability(1.0, 0.0), Err(Error::InvalidTime(_))));
        assert!(matches!(decay_probability(-1.0, 10.0), Err(Error::InvalidTime(_))));
    }

    #[test]
    fn tphi_cases() {
        assert_eq!(tphi_from_bloch_redfield(50.0, 100.0).unwrap(), f64::INFINITY);
        // 1 / (1/70 - 1/244)
        assert_abs_diff_eq!(tphi_from_bloch_redfield(122.0, 70.0).unwrap(), 98.16, epsilon = 5e-3);
        assert!(matches!(
            tphi_from_bloch_redfield(17.0, 62.0),
            Err(Error::InfeasibleTimes { .. })
        ));
    }

    #[test]
    fn unphysical_times_only_with_override() {
        assert!(DecoherenceTimes::strict(17.0, 62.0).is_err());
        let d = DecoherenceTimes::new(17.0, 62.0, Feasibility::AllowUnphysical).unwrap();
        assert_eq!(d.t_phi, None);
    }

    #[test]
    fn apd_identity_and_full_decay() {
        let id = apd_channel(&ApdParams::new(0.0, 0.0).unwrap()).unwrap();
        let rho = DensityMatrix::pure(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        let out = apply_channel(&id, &rho).unwrap();
        assert!((out.matrix() - rho.matrix()).camax() < 1e-15);

        let full = apd_channel(&ApdParams::new(1.0, 0.37).unwrap()).unwrap();
        let out = apply_channel(&full, &rho).unwrap();
        let ground = DensityMatrix::basis_state(1, 0).unwrap();
        assert!((out.matrix() - ground.matrix()).camax() < 1e-15);
    }

    #[test]
    fn ad_full_decay_of_excited_state() {
        let out = apply_channel(&ad_channel(1.0).unwrap(), &DensityMatrix::basis_state(1, 1).unwrap()).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn apd_kraus_entry_and_coherence() {
        let p = ApdParams::from_times(100.0, 150.0, 70.0).unwrap();
        let ch = apd_channel(&p).unwrap();
        assert_abs_diff_eq!(ch.ops()[0][(1, 1)].re, 0.3508, epsilon = 5e-5);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]).unwrap();
        let out = apply_channel(&ch, &plus).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 1)].re, 0.1754, epsilon = 5e-5);
    }

    #[test]
    fn apd_is_pd_after_ad() {
        let p = ApdParams::new(0.3, 0.55).unwrap();
        let composed = ad_channel(p.gamma)
            .unwrap()
            .then(&pd_channel(p.lambda).unwrap())
            .unwrap();
        let direct = apd_channel(&p).unwrap();
        assert!(composed.ptm().max_abs_diff(&direct.ptm()) < 1e-12);
    }

    #[test]
    fn invalid_apd_params() {
        assert!(matches!(ApdParams::new(1.2, 0.0), Err(Error::InvalidParam(_))));
        assert!(matches!(ApdParams::new(0.1, -0.1), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn twirl_of_identity() {
        let x = pauli_twirl(&KrausChannel::identity(1)).unwrap();
        assert_eq!(x.coeffs(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn twirl_fixes_pauli_channels() {
        let x = PauliChannel::new(vec![0.7, 0.1, 0.05, 0.15]).unwrap();
        let t = pauli_twirl(&x).unwrap();
        assert!(t.max_abs_diff(&x) < 1e-15);
    }

    #[test]
    fn twirl_rejects_non_trace_preserving_map() {
        struct Halve;
        impl QuantumChannel for Halve {
            fn num_qubits(&self) -> usize {
                1
            }
            fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
                m.scale(0.5)
            }
        }
        assert!(matches!(pauli_twirl(&Halve), Err(Error::InvalidChannel(_))));
    }

    #[test]
    fn twirled_coeffs_closed_form() {
        assert_eq!(
            twirled_apd_coeffs(0.0, 10.0, 10.0).unwrap().as_array(),
            [1.0, 0.0, 0.0, 0.0]
        );
        let c = twirled_apd_coeffs(100.0, 150.0, 70.0).unwrap();
        assert_abs_diff_eq!(c.c0, 0.5666, epsilon = 5e-5);
        assert_abs_diff_eq!(c.c1, 0.1216, epsilon = 5e-5);
        assert_eq!(c.c1, c.c2);
        assert_abs_diff_eq!(c.c3, 0.1901, epsilon = 5e-5);
        let c = twirled_apd_coeffs(100.0, 200.0, 130.0).unwrap();
        assert_abs_diff_eq!(c.c0, 0.6691, epsilon = 5e-5);
        assert_abs_diff_eq!(c.c1, 0.0984, epsilon = 5e-5);
        assert_abs_diff_eq!(c.c3, 0.1342, epsilon = 5e-5);
        assert!(twirled_apd_coeffs(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn exact_twirl_matches_kraus_expansion() {
        // Oracle: x_a = sum_k |Tr(P_a E_k)|^2 / 4 from the Kraus operators.
        let p = ApdParams::from_times(100.0, 150.0, 70.0).unwrap();
        let ch = apd_channel(&p).unwrap();
        let basis = pauli_basis(1);
        let oracle: Vec<f64> = basis
            .iter()
            .map(|pa| ch.ops().iter().map(|e| (pa * e).trace().norm_sqr() / 4.0).sum())
            .collect();
        let exact = apd_twirl_exact(&p).unwrap().as_array();
        let numeric = pauli_twirl(&ch).unwrap();
        for a in 0..4 {
            assert_abs_diff_eq!(oracle[a], exact[a], epsilon = 1e-14);
            assert_abs_diff_eq!(numeric.coeffs()[a], exact[a], epsilon = 1e-12);
        }
        // Only the X and Y weights coincide with the closed form in T1/T2.
        let closed = twirled_apd_coeffs(100.0, 150.0, 70.0).unwrap();
        assert_abs_diff_eq!(closed.c1, exact[1], epsilon = 1e-15);
        assert!((closed.c3 - exact[3]).abs() > 1e-3);
    }

    #[test]
    fn separable_product_cases() {
        let id = SingleQubitTwirled {
            c0: 1.0,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
        };
        let x = separable_product(&[id, id]).unwrap();
        assert_eq!(x, PauliChannel::identity(2));
        assert!(matches!(separable_product(&[]), Err(Error::InvalidInput(_))));
    }

    fn published_channels() -> [[f64; 16]; 3] {
        [
            [
                0.379, 0.056, 0.056, 0.076, 0.081, 0.012, 0.012, 0.016, 0.081, 0.012, 0.012, 0.016, 0.127, 0.019,
                0.019, 0.026,
            ],
            [
                0.326, 0.064, 0.064, 0.078, 0.083, 0.016, 0.016, 0.02, 0.083, 0.016, 0.016, 0.02, 0.12, 0.024, 0.024,
                0.029,
            ],
            [
                0.26, 0.075, 0.075, 0.079, 0.082, 0.024, 0.024, 0.025, 0.082, 0.024, 0.024, 0.025, 0.108, 0.031, 0.031,
                0.033,
            ],
        ]
    }

    #[test]
    fn default_schedule_reproduces_table() {
        let schedule = NoiseSchedule::default_two_qubit();
        for (period, expected) in published_channels().iter().enumerate() {
            let (x, _) = schedule_channel(&schedule, period).unwrap();
            for (got, want) in x.coeffs().iter().zip(expected) {
                assert!((got - want).abs() <= 0.0015, "period {period}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn schedule_interpolation_and_monotone_identity_weight() {
        let schedule = NoiseSchedule::default_two_qubit();
        let means = schedule.raw_means(1).unwrap();
        assert_abs_diff_eq!(means[0].0, 127.5);
        assert_abs_diff_eq!(means[1].0, 152.5);
        assert_abs_diff_eq!(means[0].1, 65.0);
        assert_abs_diff_eq!(means[1].1, 113.125);
        let means = schedule.raw_means(2).unwrap();
        assert_eq!((means[0].0, means[1].0), (105.0, 105.0));
        assert_eq!((means[0].1, means[1].1), (60.0, 96.25));

        let x_ii: Vec<f64> = (0..3)
            .map(|p| schedule_channel(&schedule, p).unwrap().0.coeffs()[0])
            .collect();
        assert!(x_ii[0] > x_ii[1] && x_ii[1] > x_ii[2]);
        let (x2, _) = schedule_channel(&schedule, 2).unwrap();
        assert!((x2.get("IZ").unwrap() - 0.079).abs() <= 0.0015);
    }

    #[test]
    fn schedule_period_out_of_range() {
        let schedule = NoiseSchedule::default_two_qubit();
        assert!(matches!(
            schedule_channel(&schedule, 5),
            Err(Error::InvalidPeriod { period: 5, count: 5 })
        ));
    }

    #[test]
    fn last_default_period_is_unphysical() {
        // Qubit 1 ends at T1 = 10, T2 = 62.5.
        let schedule = NoiseSchedule::default_two_qubit();
        assert!(matches!(
            schedule_channel(&schedule, 4),
            Err(Error::InfeasibleTimes { .. })
        ));
        let relaxed = schedule.with_feasibility(Feasibility::AllowUnphysical);
        assert!(schedule_channel(&relaxed, 4).is_ok());
    }

    #[test]
    fn csv_round_trip_reproduces_schedule() {
        let schedule = NoiseSchedule::default_two_qubit();
        let mut text = String::from("qubit,period,t1_us,t2_us\n");
        for p in 0..3 {
            for (q, (t1, t2)) in schedule.raw_means(p).unwrap().into_iter().enumerate() {
                text.push_str(&format!("{q},{p},{t1},{t2}\n"));
            }
        }
        let ingested = NoiseSchedule::from_csv_reader(text.as_bytes(), 100.0, Feasibility::Strict).unwrap();
        assert_eq!(ingested.periods(), 3);
        for p in 0..3 {
            let a = schedule_channel(&schedule, p).unwrap().0;
            let b = schedule_channel(&ingested, p).unwrap().0;
            assert!(a.max_abs_diff(&b) < 1e-15);
        }
    }

    #[test]
    fn csv_errors() {
        let missing = "qubit,period,t1_us,t2_us\n0,0,100,80\n1,1,100,80\n";
        assert!(matches!(
            NoiseSchedule::from_csv_reader(missing.as_bytes(), 100.0, Feasibility::Strict),
            Err(Error::IncompleteGrid(_))
        ));
        let infeasible = "qubit,period,t1_us,t2_us\n0,0,17,62\n";
        assert!(matches!(
            NoiseSchedule::from_csv_reader(infeasible.as_bytes(), 100.0, Feasibility::Strict),
            Err(Error::InfeasibleTimes { .. })
        ));
        assert!(NoiseSchedule::from_csv_reader(infeasible.as_bytes(), 100.0, Feasibility::AllowUnphysical).is_ok());
        let negative = "qubit,period,t1_us,t2_us\n0,0,-5,3\n";
        assert!(matches!(
            NoiseSchedule::from_csv_reader(negative.as_bytes(), 100.0, Feasibility::Strict),
            Err(Error::InvalidTime(_))
        ));
        let single = "qubit,period,t1_us,t2_us\n0,0,120,90\n";
        let s = NoiseSchedule::from_csv_reader(single.as_bytes(), 100.0, Feasibility::Strict).unwrap();
        assert_eq!((s.num_qubits(), s.periods()), (1, 1));
        assert_eq!(schedule_channel(&s, 0).unwrap().0.len(), 4);
    }

    fn random_twirled() -> impl Strategy<Value = SingleQubitTwirled> {
        (0.0..500.0f64, 1.0..400.0f64, 1.0..400.0f64).prop_map(|(t, t1, t2)| twirled_apd_coeffs(t, t1, t2).unwrap())
    }

    proptest! {
        #[test]
        fn twirled_coeffs_on_simplex(t in 0.0..1e4f64, t1 in 1e-3..1e4f64, t2 in 1e-3..1e4f64) {
            let c = twirled_apd_coeffs(t, t1, t2).unwrap();
            let arr = c.as_array();
            prop_assert_eq!(c.c1, c.c2);
            prop_assert!((arr.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            prop_assert!(arr.iter().all(|v| (0.0..=1.0).contains(v)));
        }

        #[test]
        fn twirl_preserves_average_fidelity(gamma in 0.0..=1.0f64, lambda in 0.0..=1.0f64) {
            let ch = apd_channel(&ApdParams::new(gamma, lambda).unwrap()).unwrap();
            let twirled = pauli_twirl(&ch).unwrap();
            prop_assert!((ch.ptm().average_fidelity() - twirled.ptm().average_fidelity()).abs() < 1e-9);
        }

        #[test]
        fn separable_product_is_normalized_and_permutation_covariant(
            a in random_twirled(), b in random_twirled(), c in random_twirled()
        ) {
            let x = separable_product(&[a, b, c]).unwrap();
            prop_assert!((x.coeffs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let swapped = separable_product(&[c, a, b]).unwrap();
            // qubit k of `swapped` is qubit perm[k] of `x`
            let relabeled = x.permute_qubits(&[2, 0, 1]).unwrap();
            prop_assert!(relabeled.max_abs_diff(&swapped) < 1e-15);
        }
    }
}
