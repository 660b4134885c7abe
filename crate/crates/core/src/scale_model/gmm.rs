//! One-dimensional Gaussian mixture with a single shared ("tied") variance,
//! fitted by expectation-maximization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::silhouette::Assignment;
use crate::error::{Error, Result};
use crate::seed;

/// Smallest admissible shared standard deviation, in cents.
pub const SIGMA_FLOOR: f64 = 1.0;

pub const MAX_COMPONENTS: usize = 30;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Terms below e^-37 of the largest are under half an ulp of the normalizer
/// (which is at least 1) and are treated as zero.
const RESP_CUTOFF: f64 = 37.0;
const LN_BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmConfig {
    /// Absolute tolerance on the per-sample mean log-likelihood.
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
            restarts: 5,
        }
    }
}

impl GmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol {} must be positive", self.tol)));
        }
        if self.max_iter == 0 || self.restarts == 0 {
            return Err(Error::Config(
                "max_iter and restarts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmParams {
    /// Component means, strictly increasing.
    pub means_cents: Vec<f64>,
    /// Shared standard deviation.
    pub sigma_cents: f64,
    pub weights: Vec<f64>,
    pub n_components: usize,
}

impl GmmParams {
    /// Per-sample mean log-likelihood of `values` under the mixture.
    pub fn mean_log_likelihood(&self, values: &[f64]) -> f64 {
        let pass = e_step(values, &self.means_cents, &self.weights, self.sigma_cents);
        pass.total / values.len() as f64 - self.sigma_cents.ln() - LN_SQRT_2PI
    }

    /// Hard assignment to the component of maximal posterior; ties go to
    /// the lower index.
    pub fn assign(&self, values: &[f64]) -> Assignment {
        let inv = 1.0 / (2.0 * self.sigma_cents * self.sigma_cents);
        let log_w: Vec<f64> = self.weights.iter().map(|w| w.ln()).collect();
        let labels = values
            .iter()
            .map(|x| {
                let mut best = 0;
                let mut best_score = f64::NEG_INFINITY;
                for (k, (m, lw)) in self.means_cents.iter().zip(&log_w).enumerate() {
                    let d = x - m;
                    let score = lw - d * d * inv;
                    if score > best_score {
                        best_score = score;
                        best = k;
                    }
                }
                best
            })
            .collect();
        Assignment::new(labels, self.n_components)
    }
}

/// Result of a fit, with the log-likelihood trace of the winning restart.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmFit {
    pub params: GmmParams,
    /// Per-sample mean log-likelihood of `params`.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart: usize,
    /// Mean log-likelihood at every E-step, in order.
    pub trace: Vec<f64>,
}

/// Fits a tied-variance mixture with `n_components` components, keeping the
/// restart with the highest final log-likelihood.
pub fn fit_tied_gmm(
    values: &[f64],
    n_components: usize,
    seed: u64,
    config: &GmmConfig,
) -> Result<GmmParams> {
    fit_tied_gmm_detailed(values, n_components, seed, config).map(|f| f.params)
}

pub fn fit_tied_gmm_detailed(
    values: &[f64],
    n_components: usize,
    seed: u64,
    config: &GmmConfig,
) -> Result<GmmFit> {
    config.validate()?;
    if n_components == 0 || n_components > MAX_COMPONENTS {
        return Err(Error::Config(format!(
            "component count {n_components} outside 1..={MAX_COMPONENTS}"
        )));
    }
    if values.len() < n_components {
        return Err(Error::InsufficientData(format!(
            "{} values for {n_components} components",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite value in series".into()));
    }

    // Work on centered data; shifting the input leaves the fit unchanged.
    let center = values.iter().sum::<f64>() / values.len() as f64;
    let mut sorted: Vec<f64> = values.iter().map(|v| v - center).collect();
    sorted.sort_by(f64::total_cmp);

    let mut best: Option<Run> = None;
    let mut first_err = None;
    for restart in 0..config.restarts {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed::derive(&[seed, n_components as u64, restart as u64]));
        let init = initialize(&sorted, n_components, restart, &mut rng);
        match run_em(&sorted, init, config) {
            Ok(run) => {
                let better = best
                    .as_ref()
                    .is_none_or(|b| run.log_likelihood > b.log_likelihood);
                if better {
                    best = Some(Run { restart, ..run });
                }
            }
            Err(e) => {
                log::debug!("restart {restart} with C={n_components} failed: {e}");
                first_err.get_or_insert(e);
            }
        }
    }

    let run = match best {
        Some(run) => run,
        None => return Err(first_err.expect("at least one restart ran")),
    };
    let params = finalize(run.means, run.sigma, run.weights, center)?;
    Ok(GmmFit {
        params,
        log_likelihood: run.log_likelihood,
        iterations: run.iterations,
        converged: run.converged,
        restart: run.restart,
        trace: run.trace,
    })
}

struct Init {
    means: Vec<f64>,
    sigma: f64,
    weights: Vec<f64>,
}

/// Restart 0 puts the means at evenly spaced quantiles. Later restarts use
/// k-means++ seeding followed by a few Lloyd passes, which escapes the
/// merged-cluster optimum quantiles fall into when cluster sizes differ.
/// Sigma starts at span/(2C); weights start uniform.
fn initialize(sorted: &[f64], k: usize, restart: usize, rng: &mut ChaCha8Rng) -> Init {
    let n = sorted.len();
    let span = sorted[n - 1] - sorted[0];
    let mut means = if restart == 0 {
        (0..k)
            .map(|j| {
                let q = (j as f64 + 0.5) / k as f64;
                sorted[((q * n as f64) as usize).min(n - 1)]
            })
            .collect()
    } else {
        let mut seeds = kmeans_plus_plus(sorted, k, rng);
        lloyd(sorted, &mut seeds, LLOYD_PASSES);
        seeds
    };
    means.sort_by(f64::total_cmp);
    Init {
        means,
        sigma: span / (2 * k) as f64,
        weights: vec![1.0 / k as f64; k],
    }
}

const LLOYD_PASSES: usize = 10;

fn kmeans_plus_plus(xs: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centers = vec![xs[rng.random_range(0..xs.len())]];
    let mut d2: Vec<f64> = xs.iter().map(|x| (x - centers[0]).powi(2)).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut pick = xs.len() - 1;
            for (i, d) in d2.iter().enumerate() {
                if target < *d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            xs[pick]
        } else {
            xs[rng.random_range(0..xs.len())]
        };
        for (d, x) in d2.iter_mut().zip(xs) {
            *d = d.min((x - next).powi(2));
        }
        centers.push(next);
    }
    centers
}

/// Nearest-center refinement on sorted 1-D data; empty centers stay put.
fn lloyd(sorted: &[f64], centers: &mut [f64], passes: usize) {
    for _ in 0..passes {
        centers.sort_by(f64::total_cmp);
        let mut sums = vec![0.0; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        let mut c = 0;
        for x in sorted {
            while c + 1 < centers.len() && (x - centers[c + 1]).abs() < (x - centers[c]).abs() {
                c += 1;
            }
            sums[c] += x;
            counts[c] += 1;
        }
        let mut moved = false;
        for j in 0..centers.len() {
            if counts[j] > 0 {
                let m = sums[j] / counts[j] as f64;
                moved |= m != centers[j];
                centers[j] = m;
            }
        }
        if !moved {
            break;
        }
    }
}

struct Run {
    means: Vec<f64>,
    sigma: f64,
    weights: Vec<f64>,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
    restart: usize,
    trace: Vec<f64>,
}

/// Sufficient statistics of one E-step. Moments are taken about the current
/// means to avoid cancellation.
struct Pass {
    /// Σ log Σ_j w_j exp(−(x − μ_j)² / 2σ²), without the σ normalization.
    total: f64,
    nk: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
}

fn e_step(xs: &[f64], means: &[f64], weights: &[f64], sigma: f64) -> Pass {
    let k = means.len();
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]));
    let mu: Vec<f64> = order.iter().map(|&j| means[j]).collect();
    let log_w: Vec<f64> = order.iter().map(|&j| weights[j].ln()).collect();

    let mut total = 0.0;
    let mut nk = vec![0.0; k];
    let mut s1 = vec![0.0; k];
    let mut s2 = vec![0.0; k];
    let mut row = vec![0.0; k];
    let mut near = 0;
    for chunk in xs.chunks(LN_BATCH) {
        // each normalizer lies in [1, C], so a batch product cannot overflow
        let mut product = 1.0;
        for &x in chunk {
            near = nearest_from(x, &mu, near);
            let (lo, hi) = active_band(x, &mu, &log_w, inv, near);
            let len = hi - lo;
            let mu = &mu[lo..hi];
            let lw = &log_w[lo..hi];
            let row = &mut row[..len];
            let mut max = f64::NEG_INFINITY;
            for j in 0..len {
                let d = x - mu[j];
                row[j] = lw[j] - d * d * inv;
                if row[j] > max {
                    max = row[j];
                }
            }
            let mut sum = 0.0;
            for r in row.iter_mut() {
                let delta = *r - max;
                *r = if delta == 0.0 {
                    1.0
                } else if delta > -RESP_CUTOFF {
                    delta.exp()
                } else {
                    0.0
                };
                sum += *r;
            }
            total += max;
            product *= sum;
            let inv_sum = 1.0 / sum;
            let (nk, s1, s2) = (&mut nk[lo..hi], &mut s1[lo..hi], &mut s2[lo..hi]);
            for j in 0..len {
                let r = row[j] * inv_sum;
                let d = x - mu[j];
                nk[j] += r;
                s1[j] += r * d;
                s2[j] += r * d * d;
            }
        }
        total += product.ln();
    }

    let mut pass = Pass {
        total,
        nk: vec![0.0; k],
        s1: vec![0.0; k],
        s2: vec![0.0; k],
    };
    for (sorted_j, &j) in order.iter().enumerate() {
        pass.nk[j] = nk[sorted_j];
        pass.s1[j] = s1[sorted_j];
        pass.s2[j] = s2[sorted_j];
    }
    pass
}

/// Index of the mean closest to `x`, searched from `start`. Distance to `x`
/// is unimodal along ascending `mu`, so a local walk finds it, and sorted
/// input keeps the walk short.
fn nearest_from(x: f64, mu: &[f64], start: usize) -> usize {
    let mut j = start.min(mu.len() - 1);
    while j > 0 && (x - mu[j - 1]).abs() <= (x - mu[j]).abs() {
        j -= 1;
    }
    while j + 1 < mu.len() && (x - mu[j + 1]).abs() < (x - mu[j]).abs() {
        j += 1;
    }
    j
}

/// Range of components (indices into ascending `mu`) whose score can lie
/// within `RESP_CUTOFF` of the best score at `x`. Every other component has
/// `(x − μ)²/2σ² > RESP_CUTOFF − log w_near + (x − μ_near)²/2σ²`, so its
/// score is below component `near`'s by more than the cutoff and its
/// responsibility would be zeroed anyway.
fn active_band(x: f64, mu: &[f64], log_w: &[f64], inv: f64, near: usize) -> (usize, usize) {
    let dn = x - mu[near];
    let bound = RESP_CUTOFF - log_w[near] + dn * dn * inv;
    let within = |m: &f64| (x - m) * (x - m) * inv <= bound;
    let lo = near - mu[..near].iter().rev().take_while(|m| within(m)).count();
    let hi = near + 1 + mu[near + 1..].iter().take_while(|m| within(m)).count();
    (lo, hi)
}

fn degenerate(sigma: f64) -> Error {
    Error::DegenerateFit(format!(
        "shared sigma {sigma:.4} below the {SIGMA_FLOOR} cent floor"
    ))
}

fn run_em(xs: &[f64], init: Init, config: &GmmConfig) -> Result<Run> {
    let Init {
        mut means,
        mut sigma,
        mut weights,
    } = init;
    if !(sigma >= SIGMA_FLOOR) {
        return Err(degenerate(sigma));
    }
    let n = xs.len();
    let k = means.len();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    loop {
        let Pass { total, nk, s1, s2 } = e_step(xs, &means, &weights, sigma);
        let ll = total / n as f64 - sigma.ln() - LN_SQRT_2PI;
        if !ll.is_finite() {
            return Err(Error::DegenerateFit("log-likelihood is not finite".into()));
        }
        let prev = trace.last().copied();
        trace.push(ll);
        if let Some(prev) = prev {
            if ll - prev < config.tol {
                converged = true;
                break;
            }
        }
        if iterations == config.max_iter {
            break;
        }

        // M-step
        let mut ss = 0.0;
        for j in 0..k {
            weights[j] = nk[j] / n as f64;
            if nk[j] > f64::MIN_POSITIVE {
                let shift = s1[j] / nk[j];
                means[j] += shift;
                ss += (s2[j] - shift * s1[j]).max(0.0);
            } else {
                ss += s2[j];
            }
        }
        sigma = (ss / n as f64).sqrt();
        iterations += 1;
        if !(sigma >= SIGMA_FLOOR) {
            return Err(degenerate(sigma));
        }
    }

    Ok(Run {
        means,
        sigma,
        weights,
        log_likelihood: *trace.last().unwrap(),
        iterations,
        converged,
        restart: 0,
        trace,
    })
}

fn finalize(means: Vec<f64>, sigma: f64, weights: Vec<f64>, center: f64) -> Result<GmmParams> {
    let mut comps: Vec<(f64, f64)> = means.into_iter().map(|m| m + center).zip(weights).collect();
    comps.sort_by(|a, b| a.0.total_cmp(&b.0));
    if comps.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::DegenerateFit("two components share a mean".into()));
    }
    let total: f64 = comps.iter().map(|c| c.1).sum();
    Ok(GmmParams {
        n_components: comps.len(),
        means_cents: comps.iter().map(|c| c.0).collect(),
        weights: comps.iter().map(|c| c.1 / total).collect(),
        sigma_cents: sigma,
    })
}
