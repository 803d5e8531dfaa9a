//! Bayesian estimation of a Pauli channel from measurement counts.
//!
//! Outcome probabilities are linear in the channel, `p_s = sum_a K[s][a] x_a`,
//! so the likelihood and its gradient only need the small kernel `K`. MAP
//! search runs in softmax coordinates `x = softmax(z)`, which keeps every
//! iterate strictly inside the simplex.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::noise::PauliChannel;
use crate::pec::{effective_workers, FrameTable, QuasiProb};
use crate::quantum::{pauli_count, CMatrix, DensityMatrix};
use crate::stats::{dirichlet_sample, multinomial, DirichletParams, Histogram};

/// Floor applied when rolling an estimate into the next prior.
pub const PRIOR_FLOOR: f64 = 1.0 + 1e-6;

/// Outcome counts from `L` shots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShotRecord {
    counts: Vec<u64>,
}

impl ShotRecord {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 || !counts.len().is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "{} outcomes is not a qubit register size",
                counts.len()
            )));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `L = sum C_i`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Pool two records of the same register.
    pub fn merge(&self, other: &ShotRecord) -> Result<ShotRecord> {
        check_dim(self.counts.len(), other.counts.len())?;
        Ok(ShotRecord {
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
        })
    }
}

/// What circuit produced the calibration shots.
#[derive(Debug, Clone)]
pub enum ModelKind {
    /// The bare noisy gate `E_x ∘ G`.
    PlainNoisy,
    /// Circuits drawn from an earlier decomposition: the sign-free mixture
    /// `sum_j p_old(j) (E_x ∘ P_j ∘ G)`.
    OldPecMixture(QuasiProb),
}

/// Forward model from a Pauli channel to outcome probabilities.
#[derive(Debug, Clone)]
pub struct CalibrationModel {
    num_qubits: usize,
    kind: ModelKind,
    frames: FrameTable,
    kernel: Vec<Vec<f64>>,
}

impl CalibrationModel {
    pub fn new(gate: &CMatrix, rho_test: &DensityMatrix, kind: ModelKind) -> Result<Self> {
        let frames = FrameTable::new(gate, rho_test)?;
        Self::from_frames(frames, kind)
    }

    pub fn from_frames(frames: FrameTable, kind: ModelKind) -> Result<Self> {
        let n = frames.num_qubits();
        let weights = match &kind {
            ModelKind::PlainNoisy => {
                let mut w = vec![0.0; pauli_count(n)];
                w[0] = 1.0;
                w
            }
            ModelKind::OldPecMixture(q) => {
                check_dim(n, q.num_qubits())?;
                q.probs().to_vec()
            }
        };
        let kernel = frames.mixture_kernel(&weights)?;
        Ok(Self {
            num_qubits: n,
            kind,
            frames,
            kernel,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn frames(&self) -> &FrameTable {
        &self.frames
    }

    /// `K[s][a]`, the probability of outcome `s` given noise term `a`.
    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    fn raw_probs(&self, x: &[f64]) -> Vec<f64> {
        self.kernel
            .iter()
            .map(|row| row.iter().zip(x).map(|(k, v)| k * v).sum())
            .collect()
    }
}

pub fn predicted_probs(x: &PauliChannel, model: &CalibrationModel) -> Result<Histogram> {
    check_dim(model.num_qubits, x.num_qubits())?;
    Histogram::new(normalize(model.raw_probs(x.coeffs())))
}

fn normalize(mut p: Vec<f64>) -> Vec<f64> {
    for v in p.iter_mut() {
        *v = v.max(0.0);
    }
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
    p
}

/// Multinomial draw of `shots` outcomes.
pub fn simulate_shots<R: Rng + ?Sized>(p: &Histogram, shots: u64, rng: &mut R) -> ShotRecord {
    ShotRecord {
        counts: multinomial(shots, p.probs(), rng),
    }
}

fn loglik_from_probs(counts: &[u64], p: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&c, &ps) in counts.iter().zip(p) {
        if c == 0 {
            continue;
        }
        if ps <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += c as f64 * ps.ln();
    }
    acc
}

fn log_prior_kernel(x: &[f64], eta: &[f64]) -> f64 {
    x.iter()
        .zip(eta)
        .filter(|(_, &e)| e != 1.0)
        .map(|(&xi, &e)| (e - 1.0) * xi.ln())
        .sum()
}

/// `sum_i C_i log p_i(x)`; `-inf` if an observed outcome has zero probability.
pub fn log_likelihood(x: &PauliChannel, record: &ShotRecord, model: &CalibrationModel) -> Result<f64> {
    check_dim(model.num_qubits, x.num_qubits())?;
    check_dim(model.frames.outcomes(), record.counts.len())?;
    Ok(loglik_from_probs(&record.counts, &model.raw_probs(x.coeffs())))
}

/// Log-likelihood plus `sum_j (eta_j - 1) log x_j`, without constants.
pub fn log_posterior(
    x: &PauliChannel,
    record: &ShotRecord,
    model: &CalibrationModel,
    eta: &DirichletParams,
) -> Result<f64> {
    check_dim(x.len(), eta.len())?;
    let ll = log_likelihood(x, record, model)?;
    Ok(ll + log_prior_kernel(x.coeffs(), eta.eta()))
}

/// `x = softmax(z)`.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|v| v / sum).collect()
}

/// The MAP objective with its analytic gradients.
#[derive(Debug, Clone)]
pub struct Posterior<'a> {
    counts: Vec<f64>,
    raw_counts: &'a [u64],
    kernel: &'a [Vec<f64>],
    eta: &'a [f64],
    eta_excess: f64,
}

impl<'a> Posterior<'a> {
    pub fn new(record: &'a ShotRecord, model: &'a CalibrationModel, eta: &'a DirichletParams) -> Result<Self> {
        check_dim(model.frames.outcomes(), record.counts.len())?;
        check_dim(pauli_count(model.num_qubits), eta.len())?;
        Ok(Self {
            counts: record.counts.iter().map(|&c| c as f64).collect(),
            raw_counts: &record.counts,
            kernel: &model.kernel,
            eta: eta.eta(),
            eta_excess: eta.eta().iter().map(|e| e - 1.0).sum(),
        })
    }

    fn probs(&self, x: &[f64]) -> Vec<f64> {
        self.kernel
            .iter()
            .map(|row| row.iter().zip(x).map(|(k, v)| k * v).sum())
            .collect()
    }

    /// Total count plus total prior excess; the natural size of the gradient.
    fn scale(&self) -> f64 {
        self.counts.iter().sum::<f64>() + self.eta_excess.abs()
    }

    pub fn value_x(&self, x: &[f64]) -> f64 {
        loglik_from_probs(self.raw_counts, &self.probs(x)) + log_prior_kernel(x, self.eta)
    }

    pub fn value_z(&self, z: &[f64]) -> f64 {
        let x = softmax(z);
        // log x_j straight from z avoids log(0) for very negative z_j.
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let prior: f64 = z
            .iter()
            .zip(self.eta)
            .filter(|(_, &e)| e != 1.0)
            .map(|(zj, e)| (e - 1.0) * (zj - lse))
            .sum();
        loglik_from_probs(self.raw_counts, &self.probs(&x)) + prior
    }

    /// `d/dx_a` of the likelihood term only.
    fn likelihood_gradient_x(&self, x: &[f64]) -> Vec<f64> {
        let p = self.probs(x);
        let mut g = vec![0.0; x.len()];
        for (s, row) in self.kernel.iter().enumerate() {
            if self.counts[s] == 0.0 {
                continue;
            }
            let w = self.counts[s] / p[s];
            for (ga, k) in g.iter_mut().zip(row) {
                *ga += w * k;
            }
        }
        g
    }

    /// Gradient with respect to `x`, treating the coordinates as free.
    pub fn gradient_x(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.likelihood_gradient_x(x);
        for ((ga, &xa), &e) in g.iter_mut().zip(x).zip(self.eta) {
            if e != 1.0 {
                *ga += (e - 1.0) / xa;
            }
        }
        g
    }

    /// Gradient with respect to `z`.
    pub fn gradient_z(&self, z: &[f64]) -> Vec<f64> {
        let x = softmax(z);
        let gl = self.likelihood_gradient_x(&x);
        let dot: f64 = gl.iter().zip(&x).map(|(g, v)| g * v).sum();
        (0..x.len())
            .map(|k| x[k] * (gl[k] - dot) + (self.eta[k] - 1.0) - x[k] * self.eta_excess)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapOptions {
    pub max_iter: usize,
    /// Stop when every gradient entry is within `tol` times the data plus
    /// prior weight, or the objective has moved by at most
    /// `tol * max(1, |f|)` for several iterations running.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Start of the first restart; the prior mode when absent.
    pub initial: Option<Vec<f64>>,
    /// Worker threads for restarts; 0 picks the available parallelism.
    pub workers: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-9,
            restarts: 4,
            seed: 0,
            initial: None,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapEstimate {
    pub x_hat: PauliChannel,
    pub log_posterior: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the winning restart.
    pub restart: usize,
    /// `p(x_hat)`; the part of the estimate the data pins down.
    pub predicted: Histogram,
}

#[derive(Debug, Clone)]
struct Ascent {
    z: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

const MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;
const QUIET_ITERATIONS: usize = 5;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient ascent in `z` with backtracking; directions come from the
/// limited-memory BFGS recursion and fall back to the gradient when that
/// fails to ascend.
fn ascend(post: &Posterior<'_>, z0: Vec<f64>, opts: &MapOptions) -> Ascent {
    let mut z = z0;
    let mut f = post.value_z(&z);
    let mut g = post.gradient_z(&z);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut quiet = 0;
    let gtol = opts.tol * post.scale().max(1.0);
    let mut iterations = 0;
    let mut converged = false;
    if !f.is_finite() {
        return Ascent {
            z,
            value: f,
            iterations,
            converged,
        };
    }
    while iterations < opts.max_iter {
        iterations += 1;
        let gnorm = dot(&g, &g).sqrt();
        if g.iter().all(|v| v.abs() <= gtol) {
            converged = true;
            break;
        }
        let mut d = two_loop(&g, &history);
        let mut slope = dot(&g, &d);
        let mut step = 1.0;
        if history.is_empty() || slope <= 0.0 {
            d = g.clone();
            slope = gnorm * gnorm;
            step = 1.0 / gnorm;
            history.clear();
        }
        let (z_new, f_new) = loop {
            let cand: Vec<f64> = z.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let fc = post.value_z(&cand);
            if fc.is_finite() && fc >= f + ARMIJO * step * slope {
                break (Some(cand), fc);
            }
            step *= 0.5;
            if step < MIN_STEP {
                break (None, f);
            }
        };
        let Some(z_new) = z_new else {
            // No ascent possible along any direction we can find.
            converged = true;
            break;
        };
        let g_new = post.gradient_z(&z_new);
        let s: Vec<f64> = z_new.iter().zip(&z).map(|(a, b)| a - b).collect();
        // Curvature pair for the negated (convex) objective.
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let change = (f_new - f).abs();
        z = z_new;
        g = g_new;
        f = f_new;
        if change <= opts.tol * f.abs().max(1.0) {
            quiet += 1;
            if quiet >= QUIET_ITERATIONS {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ascent {
        z,
        value: f,
        iterations,
        converged,
    }
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q
}

fn to_logits(x: &[f64]) -> Vec<f64> {
    let floored = normalize(x.iter().map(|v| v.max(1e-12)).collect());
    floored.iter().map(|v| v.ln()).collect()
}

fn starting_point(eta: &DirichletParams, opts: &MapOptions, restart: usize) -> Vec<f64> {
    if restart == 0 {
        if let Some(x) = &opts.initial {
            return x.clone();
        }
        return eta.mode().unwrap_or_else(|_| eta.mean());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    dirichlet_sample(eta, &mut rng)
}

/// Maximize the log-posterior over the simplex.
///
/// Non-convergence is reported through `converged = false`, not an error.
pub fn map_estimate(
    record: &ShotRecord,
    model: &CalibrationModel,
    eta: &DirichletParams,
    opts: &MapOptions,
) -> Result<MapEstimate> {
    let post = Posterior::new(record, model, eta)?;
    if let Some(x) = &opts.initial {
        check_dim(eta.len(), x.len())?;
    }
    if opts.max_iter == 0 || !(opts.tol > 0.0) {
        return Err(Error::InvalidParam("max_iter and tol must be positive".into()));
    }
    let restarts = opts.restarts.max(1);
    let run = |r: usize| ascend(&post, to_logits(&starting_point(eta, opts, r)), opts);
    let workers = effective_workers(opts.workers).min(restarts);
    let results: Vec<Ascent> = if workers <= 1 {
        (0..restarts).map(run).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..restarts)
                .map(|r| {
                    let run = &run;
                    scope.spawn(move || run(r))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("MAP worker panicked"))
                .collect()
        })
    };
    let (restart, best) = results
        .iter()
        .enumerate()
        .filter(|(_, a)| a.value.is_finite())
        .fold(None::<(usize, &Ascent)>, |acc, (r, a)| match acc {
            Some((_, b)) if b.value >= a.value => acc,
            _ => Some((r, a)),
        })
        .ok_or_else(|| Error::InvalidInput("log-posterior is -inf at every starting point".into()))?;
    let x_hat = PauliChannel::normalized(softmax(&best.z))?;
    let predicted = predicted_probs(&x_hat, model)?;
    Ok(MapEstimate {
        log_posterior: best.value,
        iterations: best.iterations,
        converged: best.converged,
        restart,
        predicted,
        x_hat,
    })
}

/// Next period's prior: `eta = kappa * x_hat`, floored just above one.
pub fn roll_prior(x_hat: &PauliChannel, kappa: f64) -> Result<DirichletParams> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParam(format!("concentration {kappa} must be positive")));
    }
    DirichletParams::new(x_hat.coeffs().iter().map(|&v| (kappa * v).max(PRIOR_FLOOR)).collect())
}
