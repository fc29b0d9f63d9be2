//! Cross-correlation recovery between the sign data and the analog input:
//! the closed-form gain coefficients, per-entry and diagonal relations, and
//! full-matrix assembly from a recovered covariance.
//!
//! Index convention: entry (i, j) of every matrix here estimates
//! E{y_i x_j} (sign index first), matching the sample cross-correlation
//! (1/N_x) sum_k y(k) tau(k)^T. The gain coefficients therefore take the
//! sign-side variance.

use nalgebra::DMatrix;

use crate::arcsine::PairParams;
use crate::error::{Error, Result};
use crate::sampling::{sample_cross_correlation, OneBitDataset};
use crate::special;

/// The two gain coefficients of the sign nonlinearity for one quantized
/// index, as functions of that index's effective variance and the threshold
/// mean.
#[derive(Debug, Clone, Copy)]
pub struct BussgangCoefficients {
    pub eps1: f64,
    pub eps2: f64,
}

/// eps1 = sqrt(2/(pi p0)) Gamma(1, d^2/(2 p0))
///        - d / sqrt(pi p0^2) (Gamma(1/2, d^2/(2 p0)) - sqrt(pi)),
/// eps2 = -erf(d / sqrt(2 p0)) / p0.
pub fn bussgang_coefficients(p0: f64, d: f64) -> Result<BussgangCoefficients> {
    if !(p0 > 0.0) || !p0.is_finite() {
        return Err(Error::Domain(format!(
            "bussgang coefficients: p0 = {p0} must be positive"
        )));
    }
    let x = d * d / (2.0 * p0);
    let g1 = special::upper_incomplete_gamma(1.0, x)?;
    let gh = special::upper_incomplete_gamma(0.5, x)?;
    let eps1 = (2.0 / (std::f64::consts::PI * p0)).sqrt() * g1
        - d / (std::f64::consts::PI.sqrt() * p0) * (gh - special::SQRT_PI);
    let eps2 = -special::erf(d / (2.0 * p0).sqrt()) / p0;
    Ok(BussgangCoefficients { eps1, eps2 })
}

/// One off-diagonal cross-correlation entry. The pair's `p0j` is the
/// quantized (sign) side; `r_ytau` is the matching sign-threshold
/// cross-correlation entry. Returns the estimate of E{x_i y_j}.
pub fn cross_correlation_entry(p: &PairParams, r_ytau: f64) -> Result<f64> {
    let c = bussgang_coefficients(p.p0j, p.d)?;
    Ok(r_ytau + c.eps1 * p.pij - c.eps2 * p.d * (p.p0j - p.pij))
}

/// Diagonal entry: E{x_i y_i} from the sign-side variance alone.
pub fn cross_correlation_diagonal(p0i: f64, d: f64, r_ytau: f64) -> Result<f64> {
    if !(p0i > 0.0) || !p0i.is_finite() {
        return Err(Error::Domain(format!(
            "cross-correlation diagonal: p0i = {p0i} must be positive"
        )));
    }
    let x = d * d / (2.0 * p0i);
    let g1 = special::upper_incomplete_gamma(1.0, x)?;
    let gh = special::upper_incomplete_gamma(0.5, x)?;
    Ok(r_ytau + (2.0 * p0i / std::f64::consts::PI).sqrt() * g1
        - d / std::f64::consts::PI.sqrt() * gh
        + d)
}

/// Assemble the sign/input cross-correlation matrix from a dataset and a
/// recovered effective covariance. `p_hat[(i, j)]` supplies the pair cross
/// terms and diagonals; entries that are NaN (unrecovered) propagate as NaN
/// in the output.
pub fn recover_cross_matrix(data: &OneBitDataset, p_hat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = data.n();
    if p_hat.nrows() != n || p_hat.ncols() != n {
        return Err(Error::Validation(format!(
            "p_hat is {}x{}, dataset has {n} indices",
            p_hat.nrows(),
            p_hat.ncols()
        )));
    }
    let r_ytau = sample_cross_correlation(data);
    let d = data.spec.d;
    let mut out = DMatrix::from_element(n, n, f64::NAN);
    for i in 0..n {
        for j in 0..n {
            let p0i = p_hat[(i, i)];
            if !p0i.is_finite() {
                continue;
            }
            if i == j {
                out[(i, i)] = cross_correlation_diagonal(p0i, d, r_ytau[(i, i)])?;
            } else {
                let pij = p_hat[(i, j)];
                if !pij.is_finite() {
                    continue;
                }
                // out(i, j) estimates E{y_i x_j}: the quantized side is i
                let c = bussgang_coefficients(p0i, d)?;
                out[(i, j)] = r_ytau[(i, j)] + c.eps1 * pij - c.eps2 * d * (p0i - pij);
            }
        }
    }
    Ok(out)
}
