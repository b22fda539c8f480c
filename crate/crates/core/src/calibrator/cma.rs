//! Covariance-matrix-adaptation evolution strategy for low-dimensional
//! box-bounded black-box minimization.
//!
//! Standard (mu/mu_w, lambda) scheme: each generation samples `population`
//! candidates from a Gaussian, ranks them, recombines the best half into a
//! new mean, and adapts the step size (cumulative path length) and the
//! covariance (rank-one plus rank-mu updates). Out-of-box candidates are
//! evaluated at their clipped point with a quadratic distance penalty added
//! for ranking, so reported losses never undercut the feasible value.
//! Infinite losses mark infeasible points; they rank last and never enter
//! the best-so-far.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight of the quadratic out-of-box penalty added to ranked losses.
const PENALTY_WEIGHT: f64 = 1e3;

/// Eigenvalue floor keeping the covariance factorizable.
const EIGEN_FLOOR: f64 = 1e-20;

/// Default population size for a given search dimension, the usual
/// `4 + floor(3 ln dim)` rule.
pub fn default_population(dim: usize) -> usize {
    4 + (3.0 * (dim.max(1) as f64).ln()).floor() as usize
}

/// Search settings. `bounds` applies to every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaConfig {
    pub population: usize,
    pub generations: usize,
    pub sigma0: f64,
    pub seed: u64,
    pub bounds: (f64, f64),
}

impl CmaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::InvalidArgument(format!(
                "population must be at least 4, got {}",
                self.population
            )));
        }
        if self.generations == 0 {
            return Err(Error::InvalidArgument("need at least 1 generation".into()));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "initial step must be finite and > 0, got {}",
                self.sigma0
            )));
        }
        if !(self.bounds.0 < self.bounds.1)
            || !self.bounds.0.is_finite()
            || !self.bounds.1.is_finite()
        {
            return Err(Error::InvalidArgument(format!(
                "bounds must be a finite non-empty interval, got [{}, {}]",
                self.bounds.0, self.bounds.1
            )));
        }
        Ok(())
    }
}

/// One generation of the search trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRow {
    pub generation: usize,
    /// Smallest ranked (penalized) loss among this generation's candidates.
    pub best_in_generation: f64,
    /// Smallest feasible loss seen so far, including earlier generations.
    pub best_so_far: f64,
    pub sigma: f64,
    /// Candidates whose loss came back infinite (infeasible points).
    pub infeasible: usize,
}

/// Search result: the best feasible point seen, its loss, and the
/// per-generation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CmaOutcome {
    pub best: Vec<f64>,
    pub best_loss: f64,
    pub trace: Vec<GenerationRow>,
}

fn clip(x: &DVector<f64>, bounds: (f64, f64)) -> DVector<f64> {
    x.map(|v| v.clamp(bounds.0, bounds.1))
}

/// Minimize `f` over the box, starting from `x0`.
///
/// `f` is only ever called at in-box points. Deterministic for a fixed
/// config and start.
pub fn cma_es_minimize(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    cfg: &CmaConfig,
) -> Result<CmaOutcome> {
    cfg.validate()?;
    let dim = x0.len();
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "search space must have at least 1 dimension".into(),
        ));
    }
    let n = dim as f64;
    let lambda = cfg.population;
    let mu = lambda / 2;

    // Log-rank recombination weights and their variance-effective mass.
    let raw: Vec<f64> = (0..mu)
        .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - ((i + 1) as f64).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

    // Adaptation constants (standard tutorial values).
    let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
    let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
    let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
    let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
    let c_mu = (2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff)).min(1.0 - c_1);
    let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mean = clip(&DVector::from_column_slice(x0), cfg.bounds);
    let mut sigma = cfg.sigma0;
    let mut cov = DMatrix::<f64>::identity(dim, dim);
    let mut path_sigma = DVector::<f64>::zeros(dim);
    let mut path_cov = DVector::<f64>::zeros(dim);

    // Baseline so the best point is defined even if every later candidate
    // is infeasible.
    let start = mean.as_slice().to_vec();
    let mut best = start.clone();
    let mut best_loss = f(&start)?;

    let mut trace = Vec::with_capacity(cfg.generations);
    for generation in 0..cfg.generations {
        // Factor the covariance: C = B diag(d^2) B^T.
        let sym = DMatrix::from_fn(dim, dim, |r, c| 0.5 * (cov[(r, c)] + cov[(c, r)]));
        let eig = sym.symmetric_eigen();
        let scales = eig.eigenvalues.map(|v| v.max(EIGEN_FLOOR).sqrt());
        let basis = eig.eigenvectors;

        let mut candidates = Vec::with_capacity(lambda);
        let mut infeasible = 0usize;
        for _ in 0..lambda {
            let z = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
            let y = &basis * z.component_mul(&scales);
            let x = &mean + sigma * &y;
            let feasible = clip(&x, cfg.bounds);
            let overshoot = (&x - &feasible).norm_squared();
            let loss = f(feasible.as_slice())?;
            if !loss.is_finite() {
                infeasible += 1;
            } else if loss < best_loss {
                best_loss = loss;
                best = feasible.as_slice().to_vec();
            }
            let ranked = if loss.is_finite() {
                loss + PENALTY_WEIGHT * overshoot
            } else {
                loss
            };
            candidates.push((ranked, x, y));
        }
        if infeasible == lambda {
            log::warn!("generation {generation}: every candidate infeasible");
        }
        candidates.sort_by(|a, b| f64::total_cmp(&a.0, &b.0));
        let best_in_generation = candidates[0].0;

        // Weighted recombination of the selected (unclipped) samples keeps
        // the search geometry consistent; the penalty already steered
        // selection toward the box.
        let mut new_mean = DVector::<f64>::zeros(dim);
        for (w, (_, x, _)) in weights.iter().zip(&candidates) {
            new_mean += *w * x;
        }
        let shift = (&new_mean - &mean) / sigma;

        // Step-size path uses the whitened shift.
        let whitened =
            &basis * (basis.transpose() * &shift).component_div(&scales);
        path_sigma = (1.0 - c_sigma) * &path_sigma
            + (c_sigma * (2.0 - c_sigma) * mu_eff).sqrt() * whitened;
        let expected_decay = (1.0 - (1.0 - c_sigma).powi(2 * (generation as i32 + 1))).sqrt();
        let stalled = path_sigma.norm() / expected_decay < (1.4 + 2.0 / (n + 1.0)) * chi_n;
        let h_sigma = if stalled { 1.0 } else { 0.0 };

        path_cov = (1.0 - c_c) * &path_cov
            + h_sigma * (c_c * (2.0 - c_c) * mu_eff).sqrt() * &shift;

        let mut rank_mu = DMatrix::<f64>::zeros(dim, dim);
        for (w, (_, _, y)) in weights.iter().zip(&candidates) {
            rank_mu += *w * (y * y.transpose());
        }
        let rank_one = &path_cov * path_cov.transpose()
            + ((1.0 - h_sigma) * c_c * (2.0 - c_c)) * &cov;
        cov = (1.0 - c_1 - c_mu) * cov + c_1 * rank_one + c_mu * rank_mu;

        sigma *= ((c_sigma / d_sigma) * (path_sigma.norm() / chi_n - 1.0)).exp();
        mean = new_mean;

        trace.push(GenerationRow {
            generation,
            best_in_generation,
            best_so_far: best_loss,
            sigma,
            infeasible,
        });
    }

    Ok(CmaOutcome {
        best,
        best_loss,
        trace,
    })
}
