//! One-bit quantization against time-varying Gaussian thresholds, and the
//! sample statistics of the resulting sign data.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::Ensemble;

/// Time-varying Gaussian threshold parameters: tau ~ N(1 d, sigma_tau2 I).
///
/// The experiments all use a scalar-diagonal threshold covariance, which is
/// what this type models.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThresholdSpec {
    /// threshold mean
    pub d: f64,
    /// common diagonal of the threshold covariance
    pub sigma_tau2: f64,
}

impl ThresholdSpec {
    pub fn new(d: f64, sigma_tau2: f64) -> Result<Self> {
        if !d.is_finite() || !sigma_tau2.is_finite() || sigma_tau2 < 0.0 {
            return Err(Error::Validation(format!(
                "threshold spec: d = {d}, sigma_tau2 = {sigma_tau2} invalid"
            )));
        }
        Ok(ThresholdSpec { d, sigma_tau2 })
    }
}

/// Sign data plus the threshold realizations that produced it.
#[derive(Debug, Clone)]
pub struct OneBitDataset {
    /// entries in {-1, +1}; rows = time indices, columns = realizations
    pub signs: DMatrix<f64>,
    /// the threshold draw tau_i(k) used for each sign
    pub thresholds: DMatrix<f64>,
    pub spec: ThresholdSpec,
    pub seed: u64,
}

impl OneBitDataset {
    pub fn n(&self) -> usize {
        self.signs.nrows()
    }

    pub fn n_x(&self) -> usize {
        self.signs.ncols()
    }
}

/// One-bit quantize an ensemble: y_i(k) = +1 iff x_i(k) >= tau_i(k), with a
/// fresh threshold draw for every realization. Ties map to +1.
pub fn quantize(ensemble: &Ensemble, spec: ThresholdSpec, seed: u64) -> Result<OneBitDataset> {
    let n = ensemble.samples.nrows();
    let n_x = ensemble.samples.ncols();
    if n == 0 || n_x == 0 {
        return Err(Error::Validation("quantize: empty ensemble".into()));
    }
    let sd = spec.sigma_tau2.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut thresholds = DMatrix::zeros(n, n_x);
    // draw column-by-column so each realization has an independent threshold
    for k in 0..n_x {
        for i in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            thresholds[(i, k)] = spec.d + sd * z;
        }
    }
    let signs = DMatrix::from_fn(n, n_x, |i, k| {
        if ensemble.samples[(i, k)] >= thresholds[(i, k)] {
            1.0
        } else {
            -1.0
        }
    });
    Ok(OneBitDataset { signs, thresholds, spec, seed })
}

/// Per-index sample mean of the sign data.
pub fn sample_mean(data: &OneBitDataset) -> DVector<f64> {
    let n_x = data.n_x() as f64;
    DVector::from_fn(data.n(), |i, _| data.signs.row(i).sum() / n_x)
}

/// Sample autocorrelation (1/N_x) sum_k y(k) y(k)^T. Unit diagonal exactly.
pub fn sample_autocorrelation(data: &OneBitDataset) -> DMatrix<f64> {
    let n_x = data.n_x() as f64;
    let mut r = &data.signs * data.signs.transpose() / n_x;
    // y_i^2 = 1, so pin the diagonal against accumulated round-off
    for i in 0..data.n() {
        r[(i, i)] = 1.0;
    }
    r
}

/// Sample sign-threshold cross-correlation (1/N_x) sum_k y(k) tau(k)^T.
/// Entry (i, j) estimates E{y_i tau_j}.
pub fn sample_cross_correlation(data: &OneBitDataset) -> DMatrix<f64> {
    let n_x = data.n_x() as f64;
    &data.signs * data.thresholds.transpose() / n_x
}
