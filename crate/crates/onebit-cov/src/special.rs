//! Scalar special functions: Gaussian Q-function and its inverse, error
//! function, the two incomplete-gamma orders used by the cross-correlation
//! formulas, the exponential Q-bar approximation, and the Gaussian CDF.
//!
//! All functions are pure and safe for concurrent callers.

#![allow(clippy::excessive_precision, clippy::four_forward_slashes)]
use crate::error::{Error, Result};

/// sqrt(pi)
pub const SQRT_PI: f64 = 1.772_453_850_905_516;

/// A value constrained to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Domain(format!("probability {value} outside [0, 1]")));
        }
        Ok(Probability(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Gaussian tail probability Q(x) = P(Z > x) for Z ~ N(0, 1).
pub fn q_function(x: f64) -> Result<Probability> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("q_function: non-finite input {x}")));
    }
    Ok(Probability(q(x)))
}

/// Raw Q(x) without the domain check, for validated inner loops.
#[inline]
pub(crate) fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
#[inline]
pub(crate) fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of the Q-function on (0, 1).
///
/// Safeguarded Newton iteration on Q(x) - p with a bisection fallback,
/// started from a rational approximation of the inverse normal CDF.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 || p >= 1.0 {
        return Err(Error::Domain(format!("q_inverse: p = {p} outside (0, 1)")));
    }
    let mut x = -inv_norm_cdf_approx(p);

    // Expand a bracket around the guess. Q is strictly decreasing, so
    // f(x) = Q(x) - p changes sign from + to - across the root.
    let mut step = 0.5;
    let (mut lo, mut hi) = (x - step, x + step);
    while q(lo) - p < 0.0 {
        step *= 2.0;
        lo -= step;
    }
    while q(hi) - p > 0.0 {
        step *= 2.0;
        hi += step;
    }

    for _ in 0..100 {
        let f = q(x) - p;
        if f == 0.0 {
            return Ok(x);
        }
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo).abs() < 1e-15 * (1.0 + x.abs()) {
            break;
        }
        let df = -normal_pdf(x);
        let newton = if df != 0.0 { x - f / df } else { f64::NAN };
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(x)
}

/// Acklam's rational approximation to the inverse standard normal CDF.
/// Relative error below 1.2e-9; used only as the Newton starting point.
fn inv_norm_cdf_approx(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Upper incomplete gamma for the two orders used here.
///
/// Gamma(1, x) = e^{-x} and Gamma(1/2, x) = sqrt(pi) * erfc(sqrt(x)).
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!(
            "upper_incomplete_gamma: x = {x} must be finite and >= 0"
        )));
    }
    if s == 1.0 {
        Ok((-x).exp())
    } else if s == 0.5 {
        Ok(SQRT_PI * erfc(x.sqrt()))
    } else {
        Err(Error::Domain(format!(
            "upper_incomplete_gamma: order s = {s} unsupported (only 1/2 and 1)"
        )))
    }
}

/// Exponential two-term approximation of Q(x) for x > 0.
pub fn q_bar(x: f64) -> Result<Probability> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("q_bar: x = {x} must be positive")));
    }
    Ok(Probability(q_bar_raw(x)))
}

/// Q-bar formula without the positivity check. The expression is smooth on
/// all of R, which the Pade fitness machinery relies on when differencing
/// near the interval endpoints.
#[inline]
pub(crate) fn q_bar_raw(x: f64) -> f64 {
    (-x * x / 2.0).exp() / 12.0 + 0.25 * (-2.0 * x * x / 3.0).exp()
}

/// CDF of a zero-mean Gaussian with standard deviation `zeta`, evaluated at z.
pub fn gaussian_cdf(z: f64, zeta: f64) -> Result<Probability> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::Domain(format!("gaussian_cdf: zeta = {zeta} must be positive")));
    }
    if !z.is_finite() {
        return Err(Error::Domain(format!("gaussian_cdf: non-finite z = {z}")));
    }
    Ok(Probability(1.0 - q(z / zeta)))
}

//////////////////////////////////////////////////////////////////////////
//// The erf/erfc kernel below follows FreeBSD's msun s_erf.c (via    ////
//// the Go math library port), which came with this notice.          ////
//////////////////////////////////////////////////////////////////////////
//
// ====================================================
// Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.
//
// Developed at SunPro, a Sun Microsystems, Inc. business.
// Permission to use, copy, modify, and distribute this
// software is freely granted, provided that this notice
// is preserved.
// ====================================================

const ERX: f64 = 8.45062911510467529297e-01;

// coefficients for approximation to erf in [0, 0.84375]
const EFX: f64 = 1.28379167095512586316e-01;
const EFX8: f64 = 1.02703333676410069053e+00;
const PP0: f64 = 1.28379167095512558561e-01;
const PP1: f64 = -3.25042107247001499370e-01;
const PP2: f64 = -2.84817495755985104766e-02;
const PP3: f64 = -5.77027029648944159157e-03;
const PP4: f64 = -2.37630166566501626084e-05;
const QQ1: f64 = 3.97917223959155352819e-01;
const QQ2: f64 = 6.50222499887672944485e-02;
const QQ3: f64 = 5.08130628187576562776e-03;
const QQ4: f64 = 1.32494738004321644526e-04;
const QQ5: f64 = -3.96022827877536812320e-06;

// coefficients for approximation to erf in [0.84375, 1.25]
const PA0: f64 = -2.36211856075265944077e-03;
const PA1: f64 = 4.14856118683748331666e-01;
const PA2: f64 = -3.72207876035701323847e-01;
const PA3: f64 = 3.18346619901161753674e-01;
const PA4: f64 = -1.10894694282396677476e-01;
const PA5: f64 = 3.54783043256182359371e-02;
const PA6: f64 = -2.16637559486879084300e-03;
const QA1: f64 = 1.06420880400844228286e-01;
const QA2: f64 = 5.40397917702171048937e-01;
const QA3: f64 = 7.18286544141962662868e-02;
const QA4: f64 = 1.26171219808761642112e-01;
const QA5: f64 = 1.36370839120290507362e-02;
const QA6: f64 = 1.19844998467991074170e-02;

// coefficients for approximation to erfc in [1.25, 1/0.35]
const RA0: f64 = -9.86494403484714822705e-03;
const RA1: f64 = -6.93858572707181764372e-01;
const RA2: f64 = -1.05586262253232909814e+01;
const RA3: f64 = -6.23753324503260060396e+01;
const RA4: f64 = -1.62396669462573470355e+02;
const RA5: f64 = -1.84605092906711035994e+02;
const RA6: f64 = -8.12874355063065934246e+01;
const RA7: f64 = -9.81432934416914548592e+00;
const SA1: f64 = 1.96512716674392571292e+01;
const SA2: f64 = 1.37657754143519042600e+02;
const SA3: f64 = 4.34565877475229228821e+02;
const SA4: f64 = 6.45387271733267880336e+02;
const SA5: f64 = 4.29008140027567833386e+02;
const SA6: f64 = 1.08635005541779435134e+02;
const SA7: f64 = 6.57024977031928170135e+00;
const SA8: f64 = -6.04244152148580987438e-02;

// coefficients for approximation to erfc in [1/0.35, 28]
const RB0: f64 = -9.86494292470009928597e-03;
const RB1: f64 = -7.99283237680523006574e-01;
const RB2: f64 = -1.77579549177547519889e+01;
const RB3: f64 = -1.60636384855821916062e+02;
const RB4: f64 = -6.37566443368389627722e+02;
const RB5: f64 = -1.02509513161107724954e+03;
const RB6: f64 = -4.83519191608651397019e+02;
const SB1: f64 = 3.03380607434824582924e+01;
const SB2: f64 = 3.25792512996573918826e+02;
const SB3: f64 = 1.53672958608443695994e+03;
const SB4: f64 = 3.19985821950859553908e+03;
const SB5: f64 = 2.55305040643316442583e+03;
const SB6: f64 = 4.74528541206955367215e+02;
const SB7: f64 = -2.24409524465858183362e+01;

const VERY_TINY: f64 = 2.848094538889218e-306;
const TINY: f64 = 1.3877787807814457e-17; // 2^-56
const SMALL: f64 = 3.725290298461914e-9; // 2^-28

/// Error function erf(x) = (2/sqrt(pi)) * integral of exp(-t^2) on [0, x].
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return -1.0;
    }
    let sign = x < 0.0;
    let x = x.abs();
    let result = if x < 0.84375 {
        if x < SMALL {
            if x < VERY_TINY {
                0.125 * (8.0 * x + EFX8 * x)
            } else {
                x + EFX * x
            }
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            x + x * (r / s)
        }
    } else if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        ERX + p / q
    } else if x >= 6.0 {
        1.0
    } else {
        1.0 - erfc_tail(x)
    };
    if sign {
        -result
    } else {
        result
    }
}

/// Complementary error function erfc(x) = 1 - erf(x), accurate in the tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 2.0;
    }
    let sign = x < 0.0;
    let x = x.abs();
    if x < 0.84375 {
        let temp = if x < TINY {
            x
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = r / s;
            if x < 0.25 {
                x + x * y
            } else {
                0.5 + (x * y + (x - 0.5))
            }
        };
        if sign {
            1.0 + temp
        } else {
            1.0 - temp
        }
    } else if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        if sign {
            1.0 + ERX + p / q
        } else {
            1.0 - ERX - p / q
        }
    } else if x < 28.0 {
        if sign && x > 6.0 {
            return 2.0;
        }
        let r = erfc_tail(x);
        if sign {
            2.0 - r
        } else {
            r
        }
    } else if sign {
        2.0
    } else {
        0.0
    }
}

/// erfc on [1.25, 28) via the two rational tail approximations.
fn erfc_tail(x: f64) -> f64 {
    let s = 1.0 / (x * x);
    let (r, q) = if x < 1.0 / 0.35 {
        (
            RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
            1.0 + s
                * (SA1
                    + s * (SA2
                        + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
        )
    } else {
        (
            RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
            1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
        )
    };
    // split x into a 20-bit head so exp(-x*x) can be computed without
    // amplifying the squaring round-off
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    let rr = (-z * z - 0.5625).exp() * ((z - x) * (z + x) + r / q).exp();
    rr / x
}
