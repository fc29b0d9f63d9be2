//! The sign-data autocorrelation integral for non-stationary inputs with a
//! nonzero threshold mean: integrands, the closed-form first part, a
//! high-accuracy adaptive-quadrature oracle, and the exponent-boundedness
//! analysis that governs when the Pade machinery is well behaved.

use crate::error::{Error, Result};
use crate::optim;
use crate::quad;
use crate::special;

/// Hard ceiling gamma1 for e^{alpha^2 / (4 beta)} during integrand
/// evaluation. Larger exponents indicate the round-off hazard regime and are
/// reported as `Error::BoundedGrowth` instead of returning junk.
pub const GROWTH_GUARD_GAMMA1: f64 = 1e6;

/// Per-entry parameters of the 2x2 covariance block feeding the integral:
/// variances of the two effective-input components, their cross term, and
/// the threshold mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams {
    pub p0i: f64,
    pub p0j: f64,
    pub pij: f64,
    pub d: f64,
}

impl PairParams {
    pub fn new(p0i: f64, p0j: f64, pij: f64, d: f64) -> Result<Self> {
        if !(p0i > 0.0) || !(p0j > 0.0) || !pij.is_finite() || !d.is_finite() {
            return Err(Error::Domain(format!(
                "pair params: p0i={p0i}, p0j={p0j}, pij={pij}, d={d}"
            )));
        }
        let p = PairParams { p0i, p0j, pij, d };
        if p.det() <= 0.0 {
            return Err(Error::Domain(format!(
                "pair params: p0i*p0j - pij^2 = {} must be strictly positive",
                p.det()
            )));
        }
        Ok(p)
    }

    /// Determinant of the 2x2 block.
    #[inline]
    pub fn det(&self) -> f64 {
        self.p0i * self.p0j - self.pij * self.pij
    }
}

/// alpha_n and beta_n at angle theta.
pub fn alpha_beta(theta: f64, p: &PairParams) -> (f64, f64) {
    let det = p.det();
    let (s, c) = theta.sin_cos();
    let alpha = p.d * (p.p0i * s + p.p0j * c - p.pij * (c + s)) / det;
    let beta = (p.p0j * c * c + p.p0i * s * s - p.pij * (2.0 * theta).sin()) / (2.0 * det);
    (alpha, beta)
}

/// The Gaussian prefactor chi = 2 kappa e^{-d^2 (p0i + p0j - 2 pij) / (2 det)}.
pub fn chi(p: &PairParams) -> f64 {
    let det = p.det();
    (-p.d * p.d * (p.p0i + p.p0j - 2.0 * p.pij) / (2.0 * det)).exp()
        / (std::f64::consts::PI * det.sqrt())
}

/// Both integrand values at one angle, sharing the alpha/beta/exponential
/// evaluation. `beta_n > 0` holds for every theta whenever the pair
/// determinant is positive.
#[derive(Debug, Clone, Copy)]
pub struct IntegrandValue {
    pub theta: f64,
    pub alpha_n: f64,
    pub beta_n: f64,
    pub d1: f64,
    pub d2: f64,
}

impl IntegrandValue {
    pub fn at(theta: f64, p: &PairParams) -> Result<Self> {
        let (alpha_n, beta_n) = alpha_beta(theta, p);
        debug_assert!(beta_n > 0.0);
        let exponent = alpha_n * alpha_n / (4.0 * beta_n);
        if exponent > GROWTH_GUARD_GAMMA1.ln() {
            return Err(Error::BoundedGrowth { theta, exponent });
        }
        let grow = exponent.exp();
        let root = (std::f64::consts::PI / beta_n).sqrt();
        let d2 = root * alpha_n / (2.0 * beta_n) * grow;
        let d1 = root * alpha_n / beta_n * special::q(alpha_n / (2.0 * beta_n).sqrt()) * grow;
        Ok(IntegrandValue { theta, alpha_n, beta_n, d1, d2 })
    }
}

/// D1(theta) = sqrt(pi/beta) (alpha/beta) Q(alpha/sqrt(2 beta)) e^{alpha^2/(4 beta)}.
pub fn integrand_d1(theta: f64, p: &PairParams) -> Result<f64> {
    Ok(IntegrandValue::at(theta, p)?.d1)
}

/// D2(theta) = sqrt(pi/beta) (alpha/(2 beta)) e^{alpha^2/(4 beta)}.
pub fn integrand_d2(theta: f64, p: &PairParams) -> Result<f64> {
    Ok(IntegrandValue::at(theta, p)?.d2)
}

/// D2 - D1 with Q replaced by its two-exponential approximation; the target
/// of the piecewise-Pade fitness analysis.
pub fn integrand_delta(theta: f64, p: &PairParams) -> Result<f64> {
    let v = IntegrandValue::at(theta, p)?;
    let grow = (v.alpha_n * v.alpha_n / (4.0 * v.beta_n)).exp();
    let root = (std::f64::consts::PI / v.beta_n).sqrt();
    let d1_bar = root * v.alpha_n / v.beta_n
        * special::q_bar_raw(v.alpha_n / (2.0 * v.beta_n).sqrt())
        * grow;
    Ok(v.d2 - d1_bar)
}

/// Closed form of the first part: integral of 1/beta_n over [0, pi/2]
/// equals sqrt(det) * (pi + 2 asin(pij / sqrt(p0i p0j))).
pub fn closed_form_first_part(p: &PairParams) -> Result<f64> {
    let arg = p.pij / (p.p0i * p.p0j).sqrt();
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::Domain(format!("closed_form_first_part: asin argument {arg}")));
    }
    Ok(p.det().sqrt() * (std::f64::consts::PI + 2.0 * arg.asin()))
}

/// Sign-data correlation for a pair, by adaptive quadrature of the full
/// integral to absolute tolerance `tol` on the returned value. This is the
/// reference every approximation backend is checked against.
///
/// As the pair approaches perfect correlation the integrand develops a
/// narrow peak where the beta_n numerator is minimized; bisection-based
/// refinement alone can sit exactly on that angle and never sample the
/// peak, so the integration runs over a mesh graded around it.
pub fn output_autocorrelation_oracle(p: &PairParams, tol: f64) -> Result<f64> {
    if !(tol >= 1e-12) {
        return Err(Error::Numeric(format!(
            "oracle tolerance {tol} below the supported floor 1e-12"
        )));
    }
    let scale = chi(p);
    let inner_tol = (0.5 * tol / scale.max(1.0)).max(1e-14);
    let breaks = peak_graded_mesh(p);
    let mut quad_part = 0.0;
    let piece_tol = inner_tol / (breaks.len() - 1) as f64;
    for w in breaks.windows(2) {
        quad_part += quad::adaptive_gk(
            |theta| {
                let v = IntegrandValue::at(theta, p)?;
                Ok(v.d2 - v.d1)
            },
            w[0],
            w[1],
            piece_tol,
        )?;
    }
    Ok(scale * (closed_form_first_part(p)? + quad_part) - 1.0)
}

/// Integration breakpoints on [0, pi/2], graded around the minimizer of the
/// beta_n numerator (p0j cos^2 + p0i sin^2 - pij sin 2 theta), which is where
/// the integrand concentrates as the determinant collapses.
fn peak_graded_mesh(p: &PairParams) -> Vec<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let a = 0.5 * (p.p0j - p.p0i);
    let b = p.pij;
    let mean = 0.5 * (p.p0i + p.p0j);
    let r = a.hypot(b);
    let mut breaks = vec![0.0, half_pi];
    if r > 1e-14 * mean {
        // numerator = mean + r cos(2 theta + psi); minimum inside [0, pi/2]
        // when (pi - psi) / 2 lands there
        let psi = b.atan2(a);
        let theta_star = 0.5 * (std::f64::consts::PI - psi);
        if theta_star > 0.0 && theta_star < half_pi {
            let num_min = (mean - r).max(f64::MIN_POSITIVE);
            let width = (num_min / (2.0 * r)).sqrt();
            for k in [512.0, 64.0, 8.0, 1.0_f64] {
                let lo = theta_star - k * width;
                let hi = theta_star + k * width;
                if lo > 0.0 && lo < half_pi {
                    breaks.push(lo);
                }
                if hi > 0.0 && hi < half_pi {
                    breaks.push(hi);
                }
            }
            breaks.push(theta_star);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-300);
    breaks
}

/// Verdict of the exponential-growth bound: whether
/// d^2 * max_theta(alpha_e^2 / (4 beta_n)) < ln(gamma1) on [0, pi/2],
/// where alpha_e = alpha_n / d.
#[derive(Debug, Clone, Copy)]
pub struct ExponentBound {
    pub holds: bool,
    pub max_theta: f64,
    pub max_value: f64,
}

/// Solve the inner maximization by golden-section search with parabolic
/// interpolation on the negated objective, and compare with ln(gamma1).
pub fn exponent_bound_check(p: &PairParams, gamma1: f64) -> Result<ExponentBound> {
    if !(gamma1 > 1.0) {
        return Err(Error::Domain(format!("exponent bound: gamma1 = {gamma1} must exceed 1")));
    }
    // alpha_e^2 / (4 beta) is d-independent; evaluate with a unit-threshold copy
    let unit = PairParams { d: 1.0, ..*p };
    let objective = |theta: f64| {
        let (a, b) = alpha_beta(theta, &unit);
        -(a * a) / (4.0 * b)
    };
    let sol = optim::brent_min(objective, 0.0, std::f64::consts::FRAC_PI_2, 1e-12, 300);
    // the maximum can sit on either endpoint, which Brent treats gracefully,
    // but compare explicitly for safety
    let candidates = [
        (sol.x, -sol.value),
        (0.0, -objective(0.0)),
        (std::f64::consts::FRAC_PI_2, -objective(std::f64::consts::FRAC_PI_2)),
    ];
    let (max_theta, max_value) = candidates
        .iter()
        .cloned()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    Ok(ExponentBound {
        holds: p.d * p.d * max_value < gamma1.ln(),
        max_theta,
        max_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    const FITNESS_PAIR: PairParams = PairParams { p0i: 0.8, p0j: 0.7, pij: 0.05, d: 0.7 };

    fn arcsine_closed_form(p: &PairParams) -> f64 {
        2.0 / std::f64::consts::PI * (p.pij / (p.p0i * p.p0j).sqrt()).asin()
    }

    /// Brute-force Monte-Carlo estimate of E{sign(w_i) sign(w_j)} for
    /// w ~ N(-d 1, [[p0i, pij], [pij, p0j]]), independent of the integral path.
    fn sign_product_monte_carlo(p: &PairParams, draws: usize, seed: u64) -> f64 {
        let l11 = p.p0i.sqrt();
        let l21 = p.pij / l11;
        let l22 = (p.p0j - l21 * l21).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = 0.0;
        for _ in 0..draws {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let wi = l11 * z1 - p.d;
            let wj = l21 * z1 + l22 * z2 - p.d;
            acc += wi.signum() * wj.signum();
        }
        acc / draws as f64
    }

    #[test]
    fn pair_params_determinant_invariant() {
        assert!(PairParams::new(0.5, 0.5, 0.5, 0.1).is_err());
        assert!(PairParams::new(0.5, 0.5, 0.49, 0.1).is_ok());
        assert!(PairParams::new(-0.5, 0.5, 0.0, 0.1).is_err());
    }

    #[test]
    fn alpha_beta_analytic_points() {
        // beta at theta = 0 is p0j / (2 det), always positive
        let p = PairParams::new(0.8, 0.7, 0.05, 0.7).unwrap();
        let (_, b0) = alpha_beta(0.0, &p);
        assert!((b0 - 0.5 * 0.7 / p.det()).abs() < 1e-15);
        assert!(b0 > 0.0);

        // d = 0 kills alpha everywhere
        let p0 = PairParams::new(0.8, 0.7, 0.05, 0.0).unwrap();
        for k in 0..=10 {
            let theta = k as f64 * std::f64::consts::FRAC_PI_2 / 10.0;
            assert_eq!(alpha_beta(theta, &p0).0, 0.0);
        }

        // frozen direct evaluation at theta = pi/4
        let (a, b) = alpha_beta(std::f64::consts::FRAC_PI_4, &p);
        assert!((a - 1.2429859113234378).abs() < 1e-14, "alpha {a}");
        assert!((b - 0.6278026905829596).abs() < 1e-14, "beta {b}");
    }

    #[test]
    fn beta_positive_across_grid() {
        let cases = [
            PairParams::new(0.3, 0.9, -0.25, 0.5).unwrap(),
            PairParams::new(0.5, 0.5, 0.45, 0.3).unwrap(),
            FITNESS_PAIR,
        ];
        for p in &cases {
            for k in 0..=1000 {
                let theta = k as f64 * std::f64::consts::FRAC_PI_2 / 1000.0;
                assert!(alpha_beta(theta, p).1 > 0.0);
            }
        }
    }

    #[test]
    fn chi_reference_values() {
        let p = PairParams::new(1.0, 1.0, 0.0, 0.0).unwrap();
        assert!((chi(&p) - 1.0 / std::f64::consts::PI).abs() < 1e-15);

        let p = PairParams::new(0.4, 0.4, 0.0, 0.3).unwrap();
        assert!((chi(&p) - 0.6354390167730205).abs() < 1e-15);

        // a representative recovered-matrix pair is positive and finite
        let p = PairParams::new(0.704, 0.4565, -0.0065, 0.5).unwrap();
        let c = chi(&p);
        assert!(c.is_finite() && c > 0.0);
        assert!((c - 0.3557282525919461).abs() < 1e-14);
    }

    #[test]
    fn integrands_vanish_at_zero_threshold_mean() {
        let p = PairParams::new(0.6, 0.9, 0.2, 0.0).unwrap();
        for k in 0..=16 {
            let theta = k as f64 * std::f64::consts::FRAC_PI_2 / 16.0;
            assert_eq!(integrand_d1(theta, &p).unwrap(), 0.0);
            assert_eq!(integrand_d2(theta, &p).unwrap(), 0.0);
            assert_eq!(integrand_delta(theta, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn integrand_values_at_fitness_point() {
        let v = IntegrandValue::at(std::f64::consts::FRAC_PI_4, &FITNESS_PAIR).unwrap();
        assert!((v.d1 - 1.0951954940703242).abs() < 1e-12);
        assert!((v.d2 - 4.0970815388871403).abs() < 1e-12);
        // the growth term stays under gamma1 = 2 at this setting
        let grow = (v.alpha_n * v.alpha_n / (4.0 * v.beta_n)).exp();
        assert!(grow < 2.0);
    }

    #[test]
    fn d1_sign_flips_with_alpha() {
        let pos = PairParams::new(0.8, 0.7, 0.05, 0.7).unwrap();
        let neg = PairParams::new(0.8, 0.7, 0.05, -0.7).unwrap();
        let theta = 0.9;
        let a = integrand_d1(theta, &pos).unwrap();
        let b = integrand_d1(theta, &neg).unwrap();
        assert!(a > 0.0 && b < 0.0);
        let a2 = integrand_d2(theta, &pos).unwrap();
        let b2 = integrand_d2(theta, &neg).unwrap();
        assert!(a2 > 0.0 && b2 < 0.0);
    }

    #[test]
    fn growth_guard_trips_on_extreme_parameters() {
        // huge threshold mean against tiny variances blows the exponential
        let p = PairParams::new(0.01, 0.011, -0.0099, 12.0).unwrap();
        let mut tripped = false;
        for k in 0..=100 {
            let theta = k as f64 * std::f64::consts::FRAC_PI_2 / 100.0;
            if let Err(Error::BoundedGrowth { exponent, .. }) = integrand_d2(theta, &p) {
                assert!(exponent > GROWTH_GUARD_GAMMA1.ln());
                tripped = true;
            }
        }
        assert!(tripped);
    }

    #[test]
    fn closed_form_first_part_values() {
        let p = PairParams::new(0.3, 0.7, 0.0, 0.0).unwrap();
        let want = std::f64::consts::PI * (0.3f64 * 0.7).sqrt();
        assert!((closed_form_first_part(&p).unwrap() - want).abs() < 1e-15);

        let p = PairParams::new(1.0, 1.0, 0.5, 0.0).unwrap();
        assert!((closed_form_first_part(&p).unwrap() - 3.6275987284684357).abs() < 1e-14);

        // determinant -> 0 limit collapses the integral value
        let p = PairParams::new(0.5, 0.5, 0.5 - 1e-12, 0.0).unwrap();
        assert!(closed_form_first_part(&p).unwrap() < 1e-5);
    }

    #[test]
    fn closed_form_matches_quadrature_of_inverse_beta() {
        for p in [
            PairParams::new(0.7, 0.5, 0.1, 0.3).unwrap(),
            PairParams::new(0.45, 0.83, -0.3, 0.0).unwrap(),
        ] {
            let by_quad = quad::adaptive_gk(
                |theta| Ok(1.0 / alpha_beta(theta, &p).1),
                0.0,
                std::f64::consts::FRAC_PI_2,
                1e-12,
            )
            .unwrap();
            assert!((closed_form_first_part(&p).unwrap() - by_quad).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_degenerates_to_arcsine_law_at_zero_mean() {
        for (p0i, p0j, pij) in [(0.7, 0.5, 0.1), (0.2, 0.9, -0.35), (1.0, 1.0, 0.0)] {
            let p = PairParams::new(p0i, p0j, pij, 0.0).unwrap();
            let got = output_autocorrelation_oracle(&p, 1e-12).unwrap();
            assert!(
                (got - arcsine_closed_form(&p)).abs() < 1e-12,
                "({p0i},{p0j},{pij}): {got}"
            );
        }
    }

    #[test]
    fn oracle_frozen_reference_value() {
        let p = PairParams::new(0.7, 0.5, 0.1, 0.3).unwrap();
        let got = output_autocorrelation_oracle(&p, 1e-12).unwrap();
        assert!((got - 0.18579146850217278).abs() < 1e-11, "{got}");
    }

    #[test]
    fn oracle_matches_brute_force_monte_carlo() {
        let p = PairParams::new(0.7, 0.5, 0.1, 0.3).unwrap();
        let oracle = output_autocorrelation_oracle(&p, 1e-10).unwrap();
        let draws = 2_000_000;
        let mc = sign_product_monte_carlo(&p, draws, 1234);
        let band = 3.0 / (draws as f64).sqrt() * 2.0;
        assert!((oracle - mc).abs() < band, "oracle {oracle} mc {mc}");
    }

    #[test]
    fn oracle_monotone_in_cross_term() {
        // underpins the convexity premise: R_y increases with p_ij
        let (p0i, p0j, d) = (0.7, 0.5, 0.3);
        let pm = 0.5f64;
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=20 {
            let pij = -0.9 * pm + 1.8 * pm * k as f64 / 20.0;
            let p = PairParams::new(p0i, p0j, pij, d).unwrap();
            let v = output_autocorrelation_oracle(&p, 1e-11).unwrap();
            assert!(v > prev, "pij {pij}: {v} <= {prev}");
            prev = v;
        }
    }

    #[test]
    fn oracle_perfect_correlation_limit() {
        // The correlation approaches 1 at the sqrt(eps) rate of the
        // two-sided sign-flip probability; measured deviation is about
        // 0.56 * sqrt(2 eps) at this setting.
        let tol = 1e-10;
        let mut prev = 0.0;
        for eps in [1e-2, 1e-4, 1e-6] {
            let p = PairParams::new(0.6, 0.6, 0.6 * (1.0 - eps), 0.4).unwrap();
            let v = output_autocorrelation_oracle(&p, tol).unwrap();
            assert!((1.0 - v).abs() <= (2.0 * eps).sqrt(), "eps={eps}: {v}");
            assert!(v <= 1.0 + tol);
            assert!(v > prev, "eps={eps}: {v} <= {prev}");
            prev = v;
        }
        // frozen cross-check of the graded-mesh evaluation
        let p = PairParams::new(0.6, 0.6, 0.6 * (1.0 - 1e-4), 0.4).unwrap();
        let v = output_autocorrelation_oracle(&p, tol).unwrap();
        assert!((v - 0.9921206236617912).abs() < 1e-8, "{v}");
    }

    #[test]
    fn oracle_result_is_a_correlation() {
        for (p0i, p0j, f, d) in [
            (0.45f64, 0.83, 0.8, 0.5),
            (0.3, 0.3, -0.7, 0.3),
            (0.9, 0.5, 0.0, 0.7),
        ] {
            let pij = f * p0i.min(p0j);
            let p = PairParams::new(p0i, p0j, pij, d).unwrap();
            let v = output_autocorrelation_oracle(&p, 1e-10).unwrap();
            assert!(v.abs() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn exponent_bound_at_fitness_point() {
        // the gamma1 = 2 guard holds at the reference fitness setting
        let b = exponent_bound_check(&FITNESS_PAIR, 2.0).unwrap();
        assert!(b.holds);
        assert!((FITNESS_PAIR.d * FITNESS_PAIR.d * b.max_value - 0.6152466367713).abs() < 1e-9);

        // zero threshold mean satisfies any gamma1 > 1
        let p0 = PairParams::new(0.8, 0.7, 0.05, 0.0).unwrap();
        assert!(exponent_bound_check(&p0, 1.0 + 1e-9).unwrap().holds);

        // gamma1 barely above 1 fails because the max is strictly positive
        let b = exponent_bound_check(&FITNESS_PAIR, 1.0 + 1e-12).unwrap();
        assert!(!b.holds);

        assert!(exponent_bound_check(&FITNESS_PAIR, 1.0).is_err());
    }
}
