//! The sign-correlation forward map and its three approximations.
//!
//! Evaluates the adaptive-quadrature reference for a representative
//! parameter set, compares the Gauss-Legendre, Monte-Carlo, and Pade
//! approximations against it, and shows the zero-threshold degeneration to
//! the classical arcsine law.
//!
//! ```bash
//! cargo run -p onebit-cov --example arcsine_law
//! ```

use onebit_cov::arcsine::{exponent_bound_check, output_autocorrelation_oracle, PairParams};
use onebit_cov::recover::{gauss_legendre, monte_carlo, pade};

fn main() -> onebit_cov::Result<()> {
    let p = PairParams::new(0.7, 0.5, 0.1, 0.3)?;
    let oracle = output_autocorrelation_oracle(&p, 1e-12)?;
    println!("pair (p0i, p0j, pij, d) = (0.7, 0.5, 0.1, 0.3)");
    println!("  oracle          : {oracle:.12}");

    for n_q in [4usize, 8, 16, 30] {
        let v = gauss_legendre::gl_integral(&p, n_q)?;
        println!("  gauss-legendre {n_q:>2}: {v:.12}  (err {:.2e})", (v - oracle).abs());
    }
    let v = monte_carlo::mc_integral(&p, 100_000, 7)?;
    println!("  monte-carlo 1e5 : {v:.12}  (err {:.2e})", (v - oracle).abs());
    let v = pade::pade_integral(&p)?;
    println!("  pade            : {v:.12}  (err {:.2e})", (v - oracle).abs());

    // zero threshold mean: every route collapses to the arcsine law
    let p0 = PairParams::new(0.7, 0.5, 0.1, 0.0)?;
    let arcsine = 2.0 / std::f64::consts::PI * (0.1 / (0.7f64 * 0.5).sqrt()).asin();
    println!("\nzero threshold mean:");
    println!("  (2/pi) asin     : {arcsine:.12}");
    println!("  oracle          : {:.12}", output_autocorrelation_oracle(&p0, 1e-12)?);
    println!("  gauss-legendre  : {:.12}", gauss_legendre::gl_integral(&p0, 30)?);
    println!("  pade            : {:.12}", pade::pade_integral(&p0)?);

    // the exponential-growth guard that underwrites the Pade fit
    let fit_point = PairParams::new(0.8, 0.7, 0.05, 0.7)?;
    let bound = exponent_bound_check(&fit_point, 2.0)?;
    println!("\nexponent bound at (0.8, 0.7, 0.05, d=0.7), gamma1 = 2:");
    println!(
        "  holds = {}, max at theta = {:.6}, d^2 * max = {:.6} (ln 2 = {:.6})",
        bound.holds,
        bound.max_theta,
        fit_point.d * fit_point.d * bound.max_value,
        std::f64::consts::LN_2
    );

    // grid fitness of the piecewise rational reconstruction
    let mse = pade::delta_fitness_mse(&fit_point, 1000)?;
    println!("  pade fitness grid MSE: {mse:.4e}");
    Ok(())
}
