//! Dirichlet model over Pauli coefficients, distances between distributions
//! and correlation statistics.
//!
//! All Gamma-function arithmetic goes through `ln_gamma`; the 16-dimensional
//! products in the Bhattacharyya coefficient overflow otherwise.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{check_dim, Error, Result};
use crate::noise::PauliChannel;
use crate::quantum::AGGREGATE_TOL;

/// Probability vector over measurement outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Histogram {
    probs: Vec<f64>,
}

impl Histogram {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput("empty histogram".into()));
        }
        if let Some(bad) = probs.iter().find(|v| !v.is_finite() || **v < -1e-12) {
            return Err(Error::InvalidInput(format!("histogram entry {bad} is negative")));
        }
        let probs: Vec<f64> = probs.into_iter().map(|v| v.max(0.0)).collect();
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > AGGREGATE_TOL {
            return Err(Error::InvalidInput(format!("histogram sums to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Clip round-off negatives and renormalize; used for diagonals of valid
    /// density matrices.
    pub(crate) fn from_diagonal(diag: impl Iterator<Item = f64>) -> Self {
        let probs: Vec<f64> = diag.map(|v| v.max(0.0)).collect();
        let sum: f64 = probs.iter().sum();
        Self {
            probs: probs.into_iter().map(|v| v / sum).collect(),
        }
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn max_abs_diff(&self, other: &Histogram) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Dirichlet concentration vector `eta`, every entry positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DirichletParams {
    eta: Vec<f64>,
}

impl DirichletParams {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        if eta.len() < 2 {
            return Err(Error::InvalidInput("Dirichlet needs at least two categories".into()));
        }
        if let Some(bad) = eta.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParam(format!("concentration {bad} must be positive")));
        }
        Ok(Self { eta })
    }

    /// `eta = kappa * mean`.
    pub fn from_mean(mean: &[f64], kappa: f64) -> Result<Self> {
        Self::new(mean.iter().map(|m| kappa * m).collect())
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.eta.iter().sum()
    }

    pub fn mean(&self) -> Vec<f64> {
        let total = self.total();
        self.eta.iter().map(|e| e / total).collect()
    }

    /// `(eta_i - 1) / (sum eta - m)`; only interior when every `eta_i > 1`.
    pub fn mode(&self) -> Result<Vec<f64>> {
        if let Some(bad) = self.eta.iter().find(|e| **e <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "mode is on the boundary: concentration {bad} <= 1"
            )));
        }
        let denom = self.total() - self.len() as f64;
        Ok(self.eta.iter().map(|e| (e - 1.0) / denom).collect())
    }

    /// `ln Gamma(sum eta) - sum ln Gamma(eta_i)`.
    pub fn log_normalizer(&self) -> f64 {
        ln_gamma(self.total()) - self.eta.iter().map(|&e| ln_gamma(e)).sum::<f64>()
    }
}

fn check_simplex(x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput("point has negative or non-finite entries".into()));
    }
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > AGGREGATE_TOL {
        return Err(Error::InvalidInput(format!("point sums to {sum}, not 1")));
    }
    Ok(())
}

/// Log Dirichlet density at `x`.
///
/// A zero coordinate whose concentration is not exactly one yields
/// `f64::NEG_INFINITY` as a boundary sentinel.
pub fn dirichlet_logpdf(x: &[f64], eta: &DirichletParams) -> Result<f64> {
    check_dim(eta.len(), x.len())?;
    check_simplex(x)?;
    let mut kernel = 0.0;
    for (&xi, &ei) in x.iter().zip(eta.eta()) {
        if ei == 1.0 {
            continue;
        }
        if xi == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        kernel += (ei - 1.0) * xi.ln();
    }
    Ok(eta.log_normalizer() + kernel)
}

/// Draw a point on the simplex from normalized `Gamma(eta_i, 1)` variates.
pub fn dirichlet_sample<R: Rng + ?Sized>(eta: &DirichletParams, rng: &mut R) -> Vec<f64> {
    loop {
        let draws: Vec<f64> = eta
            .eta()
            .iter()
            .map(|&e| Gamma::new(e, 1.0).expect("positive shape").sample(rng))
            .collect();
        let sum: f64 = draws.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            return draws.into_iter().map(|g| g / sum).collect();
        }
    }
}

/// Dirichlet draw wrapped as a Pauli channel.
pub fn dirichlet_sample_channel<R: Rng + ?Sized>(eta: &DirichletParams, rng: &mut R) -> Result<PauliChannel> {
    PauliChannel::normalized(dirichlet_sample(eta, rng))
}

/// Multinomial draw of `n` trials, by conditional binomials. `probs` need
/// not be normalized; negative entries are treated as zero.
pub fn multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut remaining_mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut left = n;
    let mut out = vec![0u64; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 || remaining_mass <= 0.0 {
            break;
        }
        let p = p.max(0.0);
        let k = if i + 1 == probs.len() || p >= remaining_mass {
            left
        } else {
            let q = (p / remaining_mass).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("probability in [0, 1]").sample(rng)
        };
        out[i] = k;
        left -= k;
        remaining_mass -= p;
    }
    out
}

/// Closed-form Bhattacharyya coefficient between two Dirichlet densities.
pub fn bhattacharyya_dirichlet(eta: &DirichletParams, eta_prime: &DirichletParams) -> Result<f64> {
    check_dim(eta.len(), eta_prime.len())?;
    let (a, b) = (eta.eta(), eta_prime.eta());
    let half_sum: f64 = a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).sum();
    let log_bc = 0.5 * (ln_gamma(eta.total()) + ln_gamma(eta_prime.total()))
        - 0.5 * a.iter().zip(b).map(|(&x, &y)| ln_gamma(x) + ln_gamma(y)).sum::<f64>()
        + a.iter().zip(b).map(|(x, y)| ln_gamma((x + y) / 2.0)).sum::<f64>()
        - ln_gamma(half_sum);
    Ok(log_bc.exp().min(1.0))
}

/// `sqrt(1 - BC)` between two Dirichlet densities.
pub fn hellinger_dirichlet(eta: &DirichletParams, eta_prime: &DirichletParams) -> Result<f64> {
    let bc = bhattacharyya_dirichlet(eta, eta_prime)?;
    Ok((1.0 - bc).max(0.0).sqrt())
}

/// Hellinger distance between Dirichlet laws centred on two channels with a
/// shared concentration `kappa`.
pub fn nonstationarity(reference: &PauliChannel, later: &PauliChannel, kappa: f64) -> Result<f64> {
    let a = DirichletParams::from_mean(reference.coeffs(), kappa)?;
    let b = DirichletParams::from_mean(later.coeffs(), kappa)?;
    hellinger_dirichlet(&a, &b)
}

/// `sqrt(1 - sum_i sqrt(p_i q_i))`.
pub fn hellinger_discrete(p: &Histogram, q: &Histogram) -> Result<f64> {
    check_dim(p.len(), q.len())?;
    let bc: f64 = p.probs().iter().zip(q.probs()).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((1.0 - bc).max(0.0).sqrt())
}

/// Pearson correlation between paired coefficient samples taken at two
/// register locations.
pub fn spatial_correlation(series_a: &[f64], series_b: &[f64]) -> Result<f64> {
    check_dim(series_a.len(), series_b.len())?;
    if series_a.len() < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let n = series_a.len() as f64;
    let mean_a = series_a.iter().sum::<f64>() / n;
    let mean_b = series_b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in series_a.iter().zip(series_b) {
        let (da, db) = (a - mean_a, b - mean_b);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}
