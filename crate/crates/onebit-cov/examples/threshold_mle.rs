//! Threshold-parameter estimation from sign data and stored thresholds.
//!
//! ```bash
//! cargo run --release -p onebit-cov --example threshold_mle
//! ```

use onebit_cov::process::{sample_ensemble, ProcessModel};
use onebit_cov::sampling::{quantize, ThresholdSpec};
use onebit_cov::threshold::estimate_threshold;

fn main() -> onebit_cov::Result<()> {
    let model = ProcessModel::Wiener { n: 100, v_min: 0.2, v_max: 0.8 };
    let spec = ThresholdSpec::new(0.3, 0.1)?;

    println!("constrained MLE for (d, sigma_tau2), truth = (0.3, 0.1)");
    println!("{:>6} {:>10} {:>12} {:>12} {:>12}", "nx", "d_hat", "s2_hat", "nmse(d)", "nmse(s2)");
    for nx in [1000usize, 3000, 10000] {
        let e = sample_ensemble(&model, nx, 7 + nx as u64)?;
        let data = quantize(&e, spec, 8 + nx as u64)?;
        let est = estimate_threshold(&data)?;
        println!(
            "{:>6} {:>10.5} {:>12.5} {:>12.3e} {:>12.3e}",
            nx,
            est.d,
            est.sigma_tau2,
            (est.d - spec.d).powi(2) / (spec.d * spec.d),
            (est.sigma_tau2 - spec.sigma_tau2).powi(2) / (spec.sigma_tau2 * spec.sigma_tau2),
        );
    }
    Ok(())
}
