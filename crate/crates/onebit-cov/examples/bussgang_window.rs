//! Cross-correlation recovery between the input signal and its sign data
//! over a temporal window, on top of the covariance recovery pipeline.
//!
//! ```bash
//! cargo run --release -p onebit-cov --example bussgang_window
//! ```

use onebit_cov::config::ExperimentConfig;
use onebit_cov::experiments::run_bussgang_experiment;

const CONFIG: &str = r#"
[process]
kind = "wiener"
n = 100
v_min = 0.2
v_max = 0.8

[threshold]
d = 0.3
sigma_tau2 = 0.1

[backend]
kind = "gl"
n_q = 30

[experiment]
nx_list = [10000]
count = 1
seed = 2024
window = 13
probe_index = 2
"#;

fn main() -> onebit_cov::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(CONFIG)?;
    let rec = run_bussgang_experiment(&cfg)?;
    println!("cross-correlation window, probe index 2, gauss-legendre backend");
    println!("{:>3} {:>10} {:>10} {:>10} {:>10}", "j", "truth", "estimate", "sample", "band");
    for (_, v) in &rec.rows {
        println!(
            "{:>3} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            v[0] as usize, v[1], v[2], v[3], v[4]
        );
    }
    Ok(())
}
