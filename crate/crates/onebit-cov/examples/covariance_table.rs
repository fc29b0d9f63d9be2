//! Full covariance recovery comparison across the three backends.
//!
//! Uses the explicit 5x5 non-Toeplitz truth matrix, runs the sampled
//! pipeline per backend on shared datasets, and prints per-run and mean
//! NMSE alongside the noiseless-inversion diagnostics.
//!
//! ```bash
//! cargo run --release -p onebit-cov --example covariance_table
//! ```

use onebit_cov::config::ExperimentConfig;
use onebit_cov::experiments::run_covariance_experiment;

const CONFIG: &str = r#"
[process]
kind = "explicit"
matrix = [
  [ 0.5040, -0.0065,  0.0015, -0.0036,  0.0044],
  [-0.0065,  0.2565, -0.0034,  0.0086,  0.0031],
  [ 0.0015, -0.0034,  0.3298,  0.0063,  0.0031],
  [-0.0036,  0.0086,  0.0063,  0.6376, -0.0062],
  [ 0.0044,  0.0031,  0.0031, -0.0062,  0.4552],
]

[threshold]
d = 0.5
sigma_tau2 = 0.2

[backend]
n_q = 30
n_m = 10000
n_starts = 12

[experiment]
nx_list = [10000]
count = 5
seed = 42
indices = [1]
window = 5
probe_index = 2
backends = ["pade", "gl", "mc"]
"#;

fn main() -> onebit_cov::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(CONFIG)?;
    let rec = run_covariance_experiment(&cfg)?;

    println!("covariance recovery NMSE (nx = 10000, 5 runs, shared datasets)");
    for backend in ["pade", "gl", "mc"] {
        let runs: Vec<f64> = rec
            .rows_for(backend)
            .filter(|v| v[0] >= 0.0)
            .map(|v| v[1])
            .collect();
        let mean = rec
            .rows_for(backend)
            .find(|v| v[0] == -1.0)
            .map(|v| v[1])
            .unwrap_or(f64::NAN);
        let noiseless = rec
            .rows_for(&format!("{backend}-noiseless"))
            .next()
            .map(|v| v[1])
            .unwrap_or(f64::NAN);
        println!(
            "  {backend:>5}: mean {mean:.3e}  runs {:?}  noiseless {noiseless:.3e}",
            runs.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
        );
    }
    println!(
        "\nThe sampled-pipeline NMSE is dominated by the one-bit estimation noise\n\
         floor at this ensemble size; the noiseless column isolates the error of\n\
         each integral approximation."
    );
    Ok(())
}
