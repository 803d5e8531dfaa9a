//! Probabilistic error cancellation for a single gate under Pauli noise.
//!
//! The ideal gate is written as `G = sum_j theta_j (E_x ∘ P_j ∘ G)`. Because
//! every basis member shares the diagonal noise PTM `f`, the coefficients
//! come from one `W` transform: `theta = W (1/f) / 4^n`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::noise::PauliChannel;
use crate::quantum::{
    commutation_matrix, pauli_count, CMatrix, DensityMatrix, PauliOperator, Ptm, QuantumChannel, AGGREGATE_TOL,
    STRUCTURAL_TOL,
};
use crate::stats::{multinomial, Histogram};

/// Smallest admissible `|f_b|` for the inverse to exist.
pub const INVERTIBILITY_FLOOR: f64 = 1e-6;

/// Circuits per RNG block in i.i.d. sampling. Fixed so results do not depend
/// on the worker count.
const BLOCK: usize = 256;

/// Signed quasi-probability decomposition of the ideal gate.
#[derive(Debug, Clone)]
pub struct QuasiProb {
    num_qubits: usize,
    theta: Vec<f64>,
    one_norm: f64,
    probs: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl QuasiProb {
    /// Wrap explicit coefficients. They must sum to one.
    pub fn from_theta(theta: Vec<f64>, num_qubits: usize) -> Result<Self> {
        check_dim(pauli_count(num_qubits), theta.len())?;
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("non-finite quasi-probability".into()));
        }
        let sum: f64 = theta.iter().sum();
        if (sum - 1.0).abs() > AGGREGATE_TOL {
            return Err(Error::InvalidInput(format!(
                "quasi-probabilities sum to {sum}, expected 1"
            )));
        }
        let one_norm: f64 = theta.iter().map(|t| t.abs()).sum();
        let probs: Vec<f64> = theta.iter().map(|t| t.abs() / one_norm).collect();
        let sampler = WeightedIndex::new(&probs).map_err(|e| Error::InvalidInput(format!("sampling weights: {e}")))?;
        Ok(Self {
            num_qubits,
            theta,
            one_norm,
            probs,
            sampler,
        })
    }

    /// Noiseless decomposition: all weight on the identity frame.
    pub fn identity(num_qubits: usize) -> Self {
        let mut theta = vec![0.0; pauli_count(num_qubits)];
        theta[0] = 1.0;
        Self::from_theta(theta, num_qubits).expect("unit vector is valid")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `Theta = sum |theta_w|`.
    pub fn one_norm(&self) -> f64 {
        self.one_norm
    }

    /// Sampling distribution `|theta_w| / Theta`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn signs(&self) -> Vec<f64> {
        self.theta.iter().map(|t| sign(*t)).collect()
    }
}

fn sign(t: f64) -> f64 {
    if t < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Invert the Pauli channel `x_hyp` in the PTM diagonal basis.
pub fn quasiprob_decompose(x_hyp: &PauliChannel) -> Result<QuasiProb> {
    let n = x_hyp.num_qubits();
    let m = pauli_count(n);
    let w = commutation_matrix(n);
    let f = x_hyp.eigenvalues();
    if let Some((index, &value)) = f.iter().enumerate().find(|(_, v)| v.abs() <= INVERTIBILITY_FLOOR) {
        return Err(Error::NonInvertibleChannel { index, value });
    }
    let theta: Vec<f64> = (0..m)
        .map(|j| (0..m).map(|b| w[(j, b)] / f[b]).sum::<f64>() / m as f64)
        .collect();
    QuasiProb::from_theta(theta, n)
}

/// The noisy implementable circuits `E_x ∘ P_j ∘ G` in PTM form.
#[derive(Debug, Clone)]
pub struct NoisyBasis {
    gate: Ptm,
    members: Vec<Ptm>,
    commutation: nalgebra::DMatrix<f64>,
}

impl NoisyBasis {
    pub fn new(gate: &CMatrix, x_hyp: &PauliChannel) -> Result<Self> {
        let n = x_hyp.num_qubits();
        check_dim(1 << n, gate.nrows())?;
        check_unitary(gate)?;
        let gate_ptm = Ptm::of_unitary(gate)?;
        let noise = x_hyp.ptm();
        let members = (0..pauli_count(n))
            .map(|j| {
                let p = PauliOperator::from_index(j, n)?;
                Ok(gate_ptm.then(&Ptm::of_unitary(p.matrix())?).then(&noise))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            gate: gate_ptm,
            members,
            commutation: commutation_matrix(n),
        })
    }

    pub fn gate_ptm(&self) -> &Ptm {
        &self.gate
    }

    pub fn member(&self, j: usize) -> &Ptm {
        &self.members[j]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn commutation(&self) -> &nalgebra::DMatrix<f64> {
        &self.commutation
    }

    /// `max |sum_j theta_j PTM_j - PTM(G)|`.
    pub fn reconstruction_residual(&self, q: &QuasiProb) -> Result<f64> {
        check_dim(self.members.len(), q.theta().len())?;
        let mut acc = self.gate.matrix() * 0.0;
        for (t, m) in q.theta().iter().zip(&self.members) {
            acc += m.matrix() * *t;
        }
        Ok((acc - self.gate.matrix()).amax())
    }
}

pub(crate) fn check_unitary(u: &CMatrix) -> Result<()> {
    let dim = u.nrows();
    if u.ncols() != dim {
        return Err(Error::InvalidInput("gate matrix is not square".into()));
    }
    let err = (u.adjoint() * u - CMatrix::identity(dim, dim)).camax();
    if err > STRUCTURAL_TOL {
        return Err(Error::InvalidInput(format!(
            "gate is not unitary (max deviation {err:.3e})"
        )));
    }
    Ok(())
}

/// One draw from the quasi-probability representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisDraw {
    pub index: usize,
    pub sign: f64,
    pub one_norm: f64,
}

pub fn sample_basis_index<R: Rng + ?Sized>(q: &QuasiProb, rng: &mut R) -> BasisDraw {
    let index = q.sampler.sample(rng);
    BasisDraw {
        index,
        sign: sign(q.theta[index]),
        one_norm: q.one_norm,
    }
}

/// Outcome distributions of `P_c sigma P_c` in the computational basis, with
/// `sigma = G rho G^dagger`. Pauli noise followed by a Pauli frame only
/// relabels frames (`P_a P_w ∝ P_{a xor w}`), so every noisy basis histogram
/// is a mixture of these rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTable {
    num_qubits: usize,
    diag: Vec<Vec<f64>>,
}

impl FrameTable {
    pub fn new(gate: &CMatrix, rho: &DensityMatrix) -> Result<Self> {
        check_dim(rho.dim(), gate.nrows())?;
        check_unitary(gate)?;
        let n = rho.num_qubits();
        let sigma = gate * rho.matrix() * gate.adjoint();
        let diag = (0..pauli_count(n))
            .map(|c| {
                let p = PauliOperator::from_index(c, n)?;
                let conj = p.matrix() * &sigma * p.matrix();
                Ok(conj.diagonal().iter().map(|z| z.re).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Self { num_qubits: n, diag })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn outcomes(&self) -> usize {
        1 << self.num_qubits
    }

    /// Noiseless output histogram `diag(G rho G^dagger)`.
    pub fn ideal(&self) -> Histogram {
        Histogram::from_diagonal(self.diag[0].iter().copied())
    }

    /// `p_s = sum_a x_a <s| P_{a^w} sigma P_{a^w} |s>` for basis circuit `w`
    /// under Pauli noise `x`.
    pub fn probs(&self, noise: &[f64], frame: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.outcomes()];
        for (a, &xa) in noise.iter().enumerate() {
            for (o, d) in out.iter_mut().zip(&self.diag[a ^ frame]) {
                *o += xa * d;
            }
        }
        out
    }

    /// Linear map `K[s][a]` with `p_s = sum_a K[s][a] x_a` for circuits drawn
    /// from `frame_weights`.
    pub fn mixture_kernel(&self, frame_weights: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_dim(self.diag.len(), frame_weights.len())?;
        let m = self.diag.len();
        let mut k = vec![vec![0.0; m]; self.outcomes()];
        for (j, &wj) in frame_weights.iter().enumerate() {
            if wj == 0.0 {
                continue;
            }
            for a in 0..m {
                for (s, row) in k.iter_mut().enumerate() {
                    row[a] += wj * self.diag[a ^ j][s];
                }
            }
        }
        Ok(k)
    }
}

/// How circuits are allotted to basis members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingScheme {
    /// Each circuit draws `w ~ p(w)` independently.
    Iid,
    /// Member `w` gets `max(1, round(p(w) N))` circuits (members with
    /// `theta_w = 0` get none) and is weighted by `theta_w`.
    #[default]
    Stratified,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PecOptions {
    pub n_circuits: usize,
    pub shots_per_circuit: u64,
    pub scheme: SamplingScheme,
    /// Worker threads; 0 picks the available parallelism.
    pub workers: usize,
}

impl Default for PecOptions {
    fn default() -> Self {
        Self {
            n_circuits: 10_000,
            shots_per_circuit: 100,
            scheme: SamplingScheme::Stratified,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MitigatedResult {
    /// Signed estimate; may leave `[0, 1]`.
    pub quasi_histogram: Vec<f64>,
    pub clipped_histogram: Histogram,
    pub n_circuits: usize,
    pub shots_per_circuit: u64,
    pub standard_errors: Vec<f64>,
}

/// Run the mitigated estimator with execution noise `x_true`.
///
/// Output depends only on `seed` and the options other than `workers`.
pub fn pec_run(
    q: &QuasiProb,
    x_true: &PauliChannel,
    frames: &FrameTable,
    opts: &PecOptions,
    seed: u64,
) -> Result<MitigatedResult> {
    check_dim(frames.num_qubits(), q.num_qubits())?;
    check_dim(frames.num_qubits(), x_true.num_qubits())?;
    if opts.n_circuits == 0 || opts.shots_per_circuit == 0 {
        return Err(Error::InvalidParam(
            "n_circuits and shots_per_circuit must be at least 1".into(),
        ));
    }
    let basis: Vec<Vec<f64>> = (0..pauli_count(q.num_qubits()))
        .map(|w| frames.probs(x_true.coeffs(), w))
        .collect();
    let (quasi, se, n_circuits) = match opts.scheme {
        SamplingScheme::Stratified => run_stratified(q, &basis, opts, seed),
        SamplingScheme::Iid => run_iid(q, &basis, opts, seed),
    };
    Ok(MitigatedResult {
        clipped_histogram: clip_renormalize(&quasi)?,
        quasi_histogram: quasi,
        n_circuits,
        shots_per_circuit: opts.shots_per_circuit,
        standard_errors: se,
    })
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn run_stratified(q: &QuasiProb, basis: &[Vec<f64>], opts: &PecOptions, seed: u64) -> (Vec<f64>, Vec<f64>, usize) {
    let outcomes = basis[0].len();
    let mut est = vec![0.0; outcomes];
    let mut var = vec![0.0; outcomes];
    let mut total = 0;
    for (w, (&theta, probs)) in q.theta().iter().zip(basis).enumerate() {
        if theta == 0.0 {
            continue;
        }
        let n_w = ((q.probs()[w] * opts.n_circuits as f64).round() as usize).max(1);
        total += n_w;
        let trials = n_w as u64 * opts.shots_per_circuit;
        let counts = multinomial(trials, probs, &mut stream_rng(seed, w as u64));
        for s in 0..outcomes {
            let p = counts[s] as f64 / trials as f64;
            est[s] += theta * p;
            var[s] += theta * theta * p * (1.0 - p) / trials as f64;
        }
    }
    (est, var.into_iter().map(f64::sqrt).collect(), total)
}

#[derive(Debug, Clone)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

fn run_iid(q: &QuasiProb, basis: &[Vec<f64>], opts: &PecOptions, seed: u64) -> (Vec<f64>, Vec<f64>, usize) {
    let outcomes = basis[0].len();
    let n = opts.n_circuits;
    let blocks = n.div_ceil(BLOCK);
    let run_block = |b: usize| -> Moments {
        let mut rng = stream_rng(seed, b as u64);
        let mut m = Moments {
            sum: vec![0.0; outcomes],
            sum_sq: vec![0.0; outcomes],
        };
        let shots = opts.shots_per_circuit;
        for _ in (b * BLOCK)..((b + 1) * BLOCK).min(n) {
            let draw = sample_basis_index(q, &mut rng);
            let counts = multinomial(shots, &basis[draw.index], &mut rng);
            let weight = draw.one_norm * draw.sign / shots as f64;
            for s in 0..outcomes {
                let v = weight * counts[s] as f64;
                m.sum[s] += v;
                m.sum_sq[s] += v * v;
            }
        }
        m
    };
    let workers = effective_workers(opts.workers).min(blocks);
    let results: Vec<Moments> = if workers <= 1 {
        (0..blocks).map(run_block).collect()
    } else {
        let mut slots: Vec<Option<Moments>> = vec![None; blocks];
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|k| {
                    let run_block = &run_block;
                    scope.spawn(move || {
                        (k..blocks)
                            .step_by(workers)
                            .map(|b| (b, run_block(b)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (b, m) in h.join().expect("PEC worker panicked") {
                    slots[b] = Some(m);
                }
            }
        });
        slots.into_iter().map(|m| m.expect("every block ran")).collect()
    };
    // Reduce in block order so the floating-point sum is fixed.
    let mut sum = vec![0.0; outcomes];
    let mut sum_sq = vec![0.0; outcomes];
    for m in &results {
        for s in 0..outcomes {
            sum[s] += m.sum[s];
            sum_sq[s] += m.sum_sq[s];
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = sum.iter().map(|v| v / nf).collect();
    let se = (0..outcomes)
        .map(|s| {
            if n < 2 {
                return 0.0;
            }
            let var = ((sum_sq[s] - nf * mean[s] * mean[s]) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        })
        .collect();
    (mean, se, n)
}

pub(crate) fn effective_workers(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Zero out negative entries and renormalize.
pub fn clip_renormalize(quasi: &[f64]) -> Result<Histogram> {
    let clipped: Vec<f64> = quasi.iter().map(|v| v.max(0.0)).collect();
    let sum: f64 = clipped.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Err(Error::DegenerateHistogram);
    }
    Histogram::new(clipped.into_iter().map(|v| v / sum).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{schedule_channel, NoiseSchedule};
    use crate::quantum::{apply_channel, Gate};
    use crate::stats::hellinger_discrete;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn period(p: usize) -> PauliChannel {
        schedule_channel(&NoiseSchedule::default_two_qubit(), p).unwrap().0
    }

    fn hh() -> CMatrix {
        Gate::Hadamard.unitary(2).unwrap()
    }

    #[test]
    fn noiseless_decomposition_is_trivial() {
        let q = quasiprob_decompose(&PauliChannel::identity(2)).unwrap();
        assert_abs_diff_eq!(q.theta()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.one_norm(), 1.0, epsilon = 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let d = sample_basis_index(&q, &mut rng);
            assert_eq!((d.index, d.sign), (0, 1.0));
        }
    }

    #[test]
    fn depolarizing_one_norm() {
        let p = 0.1;
        let x = PauliChannel::new(vec![1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0]).unwrap();
        let q = quasiprob_decompose(&x).unwrap();
        assert_abs_diff_eq!(q.one_norm(), (1.0 + p / 2.0) / (1.0 - p), epsilon = 1e-12);
        assert_abs_diff_eq!(q.one_norm(), 1.1667, epsilon = 5e-5);
    }

    #[test]
    fn period_zero_reconstructs_hadamards() {
        let x = period(0);
        let q = quasiprob_decompose(&x).unwrap();
        assert!(q.one_norm() > 1.0);
        let basis = NoisyBasis::new(&hh(), &x).unwrap();
        assert!(basis.reconstruction_residual(&q).unwrap() < 1e-10);
        assert_abs_diff_eq!(q.theta().iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        let w_sq = basis.commutation() * basis.commutation();
        assert_eq!(w_sq, nalgebra::DMatrix::identity(16, 16) * 16.0);
    }

    #[test]
    fn dense_solve_agrees_with_w_transform() {
        // Solve sum_j theta_j vec(PTM_j) = vec(PTM_G) by least squares.
        let x = period(1);
        let basis = NoisyBasis::new(&hh(), &x).unwrap();
        let rows = 256;
        let mut a = nalgebra::DMatrix::<f64>::zeros(rows, 16);
        for j in 0..16 {
            for (r, v) in basis.member(j).matrix().iter().enumerate() {
                a[(r, j)] = *v;
            }
        }
        let b = nalgebra::DVector::from_iterator(rows, basis.gate_ptm().matrix().iter().copied());
        let theta = a.svd(true, true).solve(&b, 1e-12).unwrap();
        let q = quasiprob_decompose(&x).unwrap();
        for j in 0..16 {
            assert_abs_diff_eq!(theta[j], q.theta()[j], epsilon = 1e-9);
        }
    }

    #[test]
    fn singular_channel_is_rejected() {
        let x = PauliChannel::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(
            quasiprob_decompose(&x),
            Err(Error::NonInvertibleChannel { .. })
        ));
    }

    #[test]
    fn frame_table_matches_density_matrix_simulation() {
        let rho = DensityMatrix::test_state();
        let frames = FrameTable::new(&hh(), &rho).unwrap();
        let x = period(2);
        let sigma = rho.evolve(&hh()).unwrap();
        for w in [0usize, 5, 11, 15] {
            let p = PauliOperator::from_index(w, 2).unwrap();
            let framed = sigma.evolve(p.matrix()).unwrap();
            let out = apply_channel(&x, &framed).unwrap();
            let direct = crate::quantum::measure_probs(&out);
            let fast = frames.probs(x.coeffs(), w);
            for s in 0..4 {
                assert_abs_diff_eq!(direct.probs()[s], fast[s], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn clip_examples() {
        let h = clip_renormalize(&[0.8, 0.1, 0.1, 0.0]).unwrap();
        assert_eq!(h.probs(), &[0.8, 0.1, 0.1, 0.0]);
        let h = clip_renormalize(&[1.1, -0.1, 0.0, 0.0]).unwrap();
        assert_eq!(h.probs(), &[1.0, 0.0, 0.0, 0.0]);
        let h = clip_renormalize(&[0.55, -0.05, 0.3, 0.2]).unwrap();
        for (a, b) in h.probs().iter().zip([0.55, 0.0, 0.3, 0.2]) {
            assert_abs_diff_eq!(*a, b / 1.05, epsilon = 1e-15);
        }
        assert!(matches!(
            clip_renormalize(&[-0.1, 0.0]),
            Err(Error::DegenerateHistogram)
        ));
    }

    #[test]
    fn noiseless_single_circuit_is_empirical_ideal() {
        let rho = DensityMatrix::test_state();
        let frames = FrameTable::new(&hh(), &rho).unwrap();
        let q = QuasiProb::identity(2);
        for scheme in [SamplingScheme::Iid, SamplingScheme::Stratified] {
            let opts = PecOptions {
                n_circuits: 1,
                shots_per_circuit: 100,
                scheme,
                workers: 1,
            };
            let r = pec_run(&q, &PauliChannel::identity(2), &frames, &opts, 4).unwrap();
            assert_eq!(r.n_circuits, 1);
            for v in &r.quasi_histogram {
                assert_abs_diff_eq!(v * 100.0, (v * 100.0).round(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_iid_result() {
        let rho = DensityMatrix::test_state();
        let frames = FrameTable::new(&hh(), &rho).unwrap();
        let x = period(0);
        let q = quasiprob_decompose(&x).unwrap();
        let run = |workers| {
            let opts = PecOptions {
                n_circuits: 3000,
                scheme: SamplingScheme::Iid,
                workers,
                ..PecOptions::default()
            };
            pec_run(&q, &x, &frames, &opts, 11).unwrap()
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn mismatch_grows_with_period() {
        let rho = DensityMatrix::test_state();
        let frames = FrameTable::new(&hh(), &rho).unwrap();
        let ideal = frames.ideal();
        let q = quasiprob_decompose(&period(0)).unwrap();
        let hd: Vec<f64> = (0..3)
            .map(|p| {
                let r = pec_run(&q, &period(p), &frames, &PecOptions::default(), 5).unwrap();
                hellinger_discrete(&r.clipped_histogram, &ideal).unwrap()
            })
            .collect();
        assert!(hd[0] < 0.01, "{hd:?}");
        assert!(hd[0] < hd[1] && hd[1] < hd[2], "{hd:?}");
    }

    fn channel() -> impl Strategy<Value = PauliChannel> {
        proptest::collection::vec(0.0f64..1.0, 15).prop_map(|v| {
            let mut c: Vec<f64> = v.into_iter().map(|e| e * 0.02).collect();
            c.insert(0, 1.0);
            PauliChannel::normalized(c).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn reconstruction_identity(x in channel(), g in 0usize..3) {
            let gate = [Gate::Hadamard, Gate::Cnot, Gate::Identity][g].unitary(2).unwrap();
            let q = quasiprob_decompose(&x).unwrap();
            let basis = NoisyBasis::new(&gate, &x).unwrap();
            prop_assert!(basis.reconstruction_residual(&q).unwrap() < 1e-10);
            prop_assert!(q.one_norm() >= 1.0 - 1e-12);
            let is_identity = x.coeffs()[0] > 1.0 - 1e-12;
            prop_assert_eq!((q.one_norm() - 1.0).abs() < 1e-9, is_identity);
            let probs: f64 = q.probs().iter().sum();
            prop_assert!((probs - 1.0).abs() < 1e-12);
            let recon: f64 = q.one_norm() * q.probs().iter().zip(q.signs()).map(|(p, s)| p * s).sum::<f64>();
            prop_assert!((recon - 1.0).abs() < 1e-9);
        }
    }
}
