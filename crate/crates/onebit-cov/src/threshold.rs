//! Threshold-parameter estimation: recover the threshold mean and variance
//! from a one-bit dataset by constrained maximum likelihood. The per-index
//! signal variances are eliminated through the first-moment constraint,
//! leaving a two-dimensional problem solved by a coarse grid seed and a
//! Nelder-Mead refinement.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optim;
use crate::sampling::{sample_mean, OneBitDataset};
use crate::special;

/// Grid bounds for the coarse seed search.
const D_RANGE: (f64, f64) = (0.05, 1.0);
const S2_RANGE: (f64, f64) = (0.01, 0.5);
const GRID: usize = 20;

/// The constrained MLE working view of a dataset: the sign/threshold pairs
/// plus the per-index success frequencies that drive the variance constraint.
#[derive(Debug, Clone)]
pub struct MleProblem<'a> {
    data: &'a OneBitDataset,
    /// (mu_i + 1)/2, the empirical P(y_i = +1)
    freq: DVector<f64>,
}

/// Point estimate of the threshold parameters.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdEstimate {
    pub d: f64,
    pub sigma_tau2: f64,
    pub neg_log_likelihood: f64,
}

impl<'a> MleProblem<'a> {
    pub fn new(data: &'a OneBitDataset) -> Result<Self> {
        let mu = sample_mean(data);
        for i in 0..mu.len() {
            if mu[i] <= -1.0 || mu[i] >= 1.0 {
                return Err(Error::Saturation { index: i, mu: mu[i] });
            }
        }
        let freq = mu.map(|m| (m + 1.0) / 2.0);
        Ok(MleProblem { data, freq })
    }

    /// Per-index variances implied by the first-moment constraint at a
    /// candidate (d, sigma_tau2); None when any index becomes non-positive.
    pub fn constrained_variances(&self, d: f64, sigma_tau2: f64) -> Option<DVector<f64>> {
        let mut r0 = DVector::zeros(self.freq.len());
        for i in 0..self.freq.len() {
            let c = special::q_inverse(self.freq[i]).ok()?;
            if c == 0.0 {
                return None;
            }
            let v = (d / c).powi(2) - sigma_tau2;
            if v <= 0.0 {
                return None;
            }
            r0[i] = v;
        }
        Some(r0)
    }

    /// Log-likelihood of the sign data at a candidate parameter pair, with
    /// the realized thresholds as the per-observation regressors:
    /// each y_i(k) is Bernoulli with P(+1) = Q(tau_i(k) / sqrt(r_0i)).
    ///
    /// Probabilities are clamped at 1e-300 before the log; the clamp count
    /// is returned alongside.
    pub fn log_likelihood(&self, d: f64, sigma_tau2: f64) -> Result<(f64, usize)> {
        if sigma_tau2 < 0.0 {
            return Err(Error::Domain(format!(
                "log_likelihood: sigma_tau2 = {sigma_tau2} must be >= 0"
            )));
        }
        let r0 = self.constrained_variances(d, sigma_tau2).ok_or_else(|| {
            Error::Infeasible(format!(
                "constraint gives a non-positive variance at (d = {d}, sigma_tau2 = {sigma_tau2})"
            ))
        })?;
        let n = self.data.n();
        let results: Vec<(f64, usize)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let scale = 1.0 / r0[i].sqrt();
                let mut acc = 0.0;
                let mut clamped = 0usize;
                for k in 0..self.data.n_x() {
                    let q_plus = special::q(self.data.thresholds[(i, k)] * scale);
                    let prob = if self.data.signs[(i, k)] > 0.0 { q_plus } else { 1.0 - q_plus };
                    if prob < 1e-300 {
                        clamped += 1;
                        acc += 1e-300_f64.ln();
                    } else {
                        acc += prob.ln();
                    }
                }
                (acc, clamped)
            })
            .collect();
        let total = results.iter().map(|r| r.0).sum();
        let clamps = results.iter().map(|r| r.1).sum();
        Ok((total, clamps))
    }

    fn objective(&self, d: f64, sigma_tau2: f64) -> f64 {
        if !(D_RANGE.0..=D_RANGE.1).contains(&d) || sigma_tau2 < 0.0 {
            return f64::INFINITY;
        }
        match self.log_likelihood(d, sigma_tau2) {
            Ok((ll, _)) => -ll,
            Err(_) => f64::INFINITY,
        }
    }

    /// Minimize the negative log-likelihood over (d, sigma_tau2): coarse
    /// grid seed, then bounded Nelder-Mead refinement.
    pub fn estimate(&self) -> Result<ThresholdEstimate> {
        let mut best = (f64::INFINITY, D_RANGE.0, S2_RANGE.0);
        for i in 0..GRID {
            let d = D_RANGE.0 + (D_RANGE.1 - D_RANGE.0) * i as f64 / (GRID - 1) as f64;
            for j in 0..GRID {
                let s2 = S2_RANGE.0 + (S2_RANGE.1 - S2_RANGE.0) * j as f64 / (GRID - 1) as f64;
                let v = self.objective(d, s2);
                if v < best.0 {
                    best = (v, d, s2);
                }
            }
        }
        if best.0.is_infinite() {
            return Err(Error::Infeasible(
                "every grid seed violates the positive-variance constraint".into(),
            ));
        }
        let ((d, s2), value) = optim::nelder_mead_2d(
            |d, s2| self.objective(d, s2),
            (best.1, best.2),
            (0.03, 0.02),
            1e-9,
            400,
        );
        Ok(ThresholdEstimate { d, sigma_tau2: s2, neg_log_likelihood: value })
    }
}

/// Estimate (d, sigma_tau2) from a dataset.
pub fn estimate_threshold(data: &OneBitDataset) -> Result<ThresholdEstimate> {
    MleProblem::new(data)?.estimate()
}
