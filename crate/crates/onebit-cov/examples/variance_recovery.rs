//! Time-varying variance recovery from sign means.
//!
//! Draws a Wiener-style non-stationary process, quantizes it against random
//! thresholds, recovers the per-index variances through the first-moment
//! inversion, and prints the MSE trend over the ensemble size.
//!
//! ```bash
//! cargo run -p onebit-cov --example variance_recovery
//! ```

use onebit_cov::process::{sample_ensemble, truth_covariance, ProcessModel};
use onebit_cov::recover::recover_variances;
use onebit_cov::sampling::{quantize, sample_mean, ThresholdSpec};

fn main() -> onebit_cov::Result<()> {
    let model = ProcessModel::Wiener { n: 100, v_min: 0.2, v_max: 0.8 };
    let spec = ThresholdSpec::new(0.5, 0.2)?;
    let truth = truth_covariance(&model)?;

    println!("variance recovery, d = {}, sigma_tau2 = {}", spec.d, spec.sigma_tau2);
    println!("{:>6} {:>12} {:>12}", "nx", "mse(r_02)", "mse(r_08)");
    for nx in [1000usize, 3000, 6000, 10000] {
        let reps = 15u64;
        let mut mse = [0.0f64; 2];
        for rep in 0..reps {
            let e = sample_ensemble(&model, nx, 1000 * rep + nx as u64)?;
            let data = quantize(&e, spec, 2000 * rep + nx as u64 + 1)?;
            let r0 = recover_variances(&sample_mean(&data), &spec)?;
            for (slot, idx) in mse.iter_mut().zip([1usize, 7]) {
                *slot += (r0[idx] - truth[(idx, idx)]).powi(2);
            }
        }
        println!(
            "{:>6} {:>12.4e} {:>12.4e}",
            nx,
            mse[0] / reps as f64,
            mse[1] / reps as f64
        );
    }

    // a short recovered-vs-true slice at the largest ensemble
    let e = sample_ensemble(&model, 10_000, 99)?;
    let data = quantize(&e, spec, 100)?;
    let r0 = recover_variances(&sample_mean(&data), &spec)?;
    println!("\nindex  truth   recovered");
    for i in (0..100).step_by(20) {
        println!("{i:>5}  {:.4}  {:.4}", truth[(i, i)], r0[i]);
    }
    Ok(())
}
