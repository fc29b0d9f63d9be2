//! Numerical integration: an adaptive Gauss-Kronrod integrator used by the
//! high-accuracy autocorrelation oracle, and Gauss-Legendre node/weight
//! generation for the quadrature recovery backend.

#![allow(clippy::excessive_precision)]
use crate::error::{Error, Result};

// 7-point Gauss / 15-point Kronrod rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One G7-K15 application on [a, b]. Returns (kronrod estimate, error estimate).
fn qk15<F>(f: &F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_gauss = fc * WG[3];
    let mut res_kronrod = fc * WGK[7];
    for j in 0..7 {
        let absc = half * XGK[j];
        let f1 = f(center - absc)?;
        let f2 = f(center + absc)?;
        let fsum = f1 + f2;
        if j % 2 != 0 {
            res_gauss += WG[j / 2] * fsum;
        }
        res_kronrod += WGK[j] * fsum;
    }
    let err = ((res_kronrod - res_gauss) * half).abs();
    if !res_kronrod.is_finite() || !err.is_finite() {
        return Err(Error::Numeric(format!(
            "qk15: non-finite estimate on [{a}, {b}]"
        )));
    }
    Ok((res_kronrod * half, err))
}

/// Adaptive Gauss-Kronrod integration of `f` on [a, b] to absolute tolerance
/// `tol`, by bisecting the worst interval until the summed error estimate is
/// small enough.
pub fn adaptive_gk<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::Numeric(format!("adaptive_gk: bad tolerance {tol}")));
    }
    let (v, e) = qk15(&f, a, b)?;
    let mut intervals = vec![(e, a, b, v)];
    let mut total_err = e;
    const MAX_INTERVALS: usize = 2000;
    while total_err > tol {
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Numeric(format!(
                "adaptive_gk: no convergence ({} intervals, err {total_err:.3e} > tol {tol:.3e})",
                intervals.len()
            )));
        }
        // split the interval with the largest error estimate
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .expect("non-empty");
        let (e0, lo, hi, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Numeric(
                "adaptive_gk: interval collapsed below machine precision".into(),
            ));
        }
        let (v1, e1) = qk15(&f, lo, mid)?;
        let (v2, e2) = qk15(&f, mid, hi)?;
        total_err += e1 + e2 - e0;
        intervals.push((e1, lo, mid, v1));
        intervals.push((e2, mid, hi, v2));
    }
    // re-sum for stability
    Ok(intervals.iter().map(|t| t.3).sum::<f64>())
}

/// Gauss-Legendre nodes and weights on [-1, 1] for an `n`-point rule.
///
/// Nodes are the roots of P_n found by Newton iteration from the Chebyshev
/// initial guess; weights are 2 / ((1 - x^2) P_n'(x)^2).
pub fn legendre_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 1 {
        return Err(Error::Numeric("legendre_rule: n must be >= 1".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-style guess enumerates roots from +1 downward
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, x);
            x -= p / d;
            if (p / d).abs() < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!("legendre_rule: Newton stalled at n={n}, i={i}")));
        }
        // one polishing step after convergence
        let (p, d) = legendre_eval(n, x);
        x -= p / d;
        let (_, d) = legendre_eval(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    // ascending order
    nodes.reverse();
    weights.reverse();
    Ok((nodes, weights))
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}
