//! Dataset production and CSV round-tripping: generate an ensemble,
//! quantize it, write the sign/threshold files, and read them back.
//!
//! ```bash
//! cargo run -p onebit-cov --example dataset_io
//! ```

use onebit_cov::io;
use onebit_cov::process::{sample_ensemble, ProcessModel};
use onebit_cov::sampling::{quantize, sample_autocorrelation, sample_mean, ThresholdSpec};

fn main() -> onebit_cov::Result<()> {
    let model = ProcessModel::Garch {
        n: 20,
        zeta0: 0.1,
        zeta1: 0.2,
        zeta2: 0.3,
        path_seed: 5,
    };
    let ensemble = sample_ensemble(&model, 2000, 1)?;
    let data = quantize(&ensemble, ThresholdSpec::new(0.4, 0.15)?, 2)?;

    let dir = std::env::temp_dir().join("onebit-cov-dataset-io");
    io::write_ensemble(&dir, &ensemble)?;
    io::write_dataset(&dir, &data)?;
    println!("wrote samples/truth/signs/thresholds CSVs under {}", dir.display());

    let back = io::read_dataset(&dir)?;
    assert_eq!(back.signs, data.signs);
    assert_eq!(back.thresholds, data.thresholds);
    println!("round trip is bit-exact: n = {}, n_x = {}", back.n(), back.n_x());

    let mu = sample_mean(&back);
    let r_y = sample_autocorrelation(&back);
    println!("sign mean head: {:.4} {:.4} {:.4}", mu[0], mu[1], mu[2]);
    println!("sign correlation (0,1): {:.4}", r_y[(0, 1)]);
    Ok(())
}
