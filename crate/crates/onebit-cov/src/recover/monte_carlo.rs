//! Monte-Carlo backend: uniform random angles on [0, pi/2], reused across
//! every criterion evaluation within a solve (common random numbers) so the
//! objective is a deterministic smooth function of the cross term.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arcsine::{chi, closed_form_first_part, IntegrandValue, PairParams};
use crate::error::Result;
use crate::optim;

use super::{log_criterion, solver_box, SolveOutcome};

/// The common random angles for one solve, deterministic per seed.
pub fn mc_thetas(n_m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_m)
        .map(|_| rng.gen_range(0.0..std::f64::consts::FRAC_PI_2))
        .collect()
}

/// Monte-Carlo approximation of the sign correlation with `n_m` fresh angles
/// drawn from `seed`.
pub fn mc_integral(p: &PairParams, n_m: usize, seed: u64) -> Result<f64> {
    mc_integral_with_thetas(p, &mc_thetas(n_m, seed))
}

/// Same with caller-provided angles.
pub fn mc_integral_with_thetas(p: &PairParams, thetas: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for &theta in thetas {
        let v = IntegrandValue::at(theta, p)?;
        acc += v.d2 - v.d1;
    }
    let mean_term = std::f64::consts::FRAC_PI_2 * acc / thetas.len() as f64;
    Ok(chi(p) * (closed_form_first_part(p)? + mean_term) - 1.0)
}

/// Log criterion of the Monte-Carlo residual.
pub fn criterion_mc(r_y: f64, p0i: f64, p0j: f64, d: f64, pij: f64, n_m: usize, seed: u64) -> Result<f64> {
    let p = PairParams::new(p0i, p0j, pij, d)?;
    Ok(log_criterion(r_y - mc_integral(&p, n_m, seed)?))
}

/// Minimize the Monte-Carlo criterion over the feasible box with one common
/// set of angles.
pub fn solve_mc(r_y: f64, p0i: f64, p0j: f64, d: f64, n_m: usize, seed: u64) -> Result<SolveOutcome> {
    let thetas = mc_thetas(n_m, seed);
    let (lo, hi) = solver_box(p0i, p0j)?;
    let objective = |pij: f64| match PairParams::new(p0i, p0j, pij, d)
        .and_then(|p| mc_integral_with_thetas(&p, &thetas))
    {
        Ok(v) => log_criterion(r_y - v),
        Err(_) => f64::INFINITY,
    };
    let (sol, fallback) = optim::brent_min_with_grid_fallback(objective, lo, hi, 1e-10 * (hi - lo), 33);
    if sol.value.is_infinite() && sol.value > 0.0 {
        return Err(crate::error::Error::Solver(
            "monte-carlo solve: criterion infinite across the box".into(),
        ));
    }
    Ok(SolveOutcome {
        p_hat: sol.x,
        iterations: sol.iterations,
        criterion: sol.value,
        fallback,
    })
}
