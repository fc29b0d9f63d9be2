//! Batch experiment harnesses behind the CLI: variance-recovery sweeps,
//! the covariance-backend comparison table, threshold-MLE sweeps, and the
//! cross-correlation window experiment. Each emits a [`MetricsRecord`] and
//! is reproducible bit-for-bit from (config, seed).

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::arcsine::{output_autocorrelation_oracle, PairParams};
use crate::bussgang;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::io::MetricsRecord;
use crate::process::{sample_ensemble, truth_covariance, Ensemble};
use crate::recover::{self, recover_from_stats, BackendKind, RecoveryReport};
use crate::sampling::{quantize, sample_mean, OneBitDataset, ThresholdSpec};
use crate::special;
use crate::threshold::estimate_threshold;

fn mix3(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ b.wrapping_mul(0xd1b5_4a32_d192_ed03);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generate-and-quantize for one experiment repetition.
fn make_dataset(
    cfg: &ExperimentConfig,
    nx: usize,
    rep: u64,
) -> Result<(Ensemble, OneBitDataset)> {
    let model = cfg.process_model()?;
    let spec = cfg.threshold_spec()?;
    let seed = mix3(cfg.experiment.seed, nx as u64, rep);
    let ensemble = sample_ensemble(&model, nx, seed)?;
    let data = quantize(&ensemble, spec, mix3(seed, 0x7a0, rep))?;
    Ok((ensemble, data))
}

/// Keep only the given time indices of a dataset (rows of signs and
/// thresholds), for experiments probing a small index window.
pub fn restrict_dataset(data: &OneBitDataset, indices: &[usize]) -> OneBitDataset {
    let rows = indices.len();
    let signs = DMatrix::from_fn(rows, data.n_x(), |r, k| data.signs[(indices[r], k)]);
    let thresholds = DMatrix::from_fn(rows, data.n_x(), |r, k| data.thresholds[(indices[r], k)]);
    OneBitDataset { signs, thresholds, spec: data.spec, seed: data.seed }
}

/// Time-varying variance recovery MSE versus ensemble size, for the
/// configured probe indices (1-based). One row per (index, nx) with the
/// across-experiment MSE and the count of failed recoveries.
pub fn run_variance_experiment(cfg: &ExperimentConfig) -> Result<MetricsRecord> {
    cfg.validate()?;
    let spec = cfg.threshold_spec()?;
    let truth = truth_covariance(&cfg.process_model()?)?;
    let e_count = cfg.experiment.count;
    let mut record = MetricsRecord::new("variance", &["nx", "mse", "failures"]);
    let t0 = Instant::now();
    for &nx in &cfg.experiment.nx_list {
        // per-repetition squared errors for every probe index
        let runs: Vec<Result<Vec<Result<f64>>>> = (0..e_count as u64)
            .into_par_iter()
            .map(|rep| {
                let (_, data) = make_dataset(cfg, nx, rep)?;
                let mu = sample_mean(&data);
                Ok(cfg
                    .experiment
                    .indices
                    .iter()
                    .map(|&idx1| {
                        let i = idx1 - 1;
                        recover::recover_variance_entry(i, mu[i], &spec)
                            .map(|r| (r - truth[(i, i)]).powi(2))
                    })
                    .collect())
            })
            .collect();
        let mut per_index: Vec<(f64, usize, usize)> =
            vec![(0.0, 0, 0); cfg.experiment.indices.len()];
        for run in runs {
            let run = run?;
            for (slot, res) in per_index.iter_mut().zip(run) {
                match res {
                    Ok(se) => {
                        slot.0 += se;
                        slot.1 += 1;
                    }
                    Err(_) => slot.2 += 1,
                }
            }
        }
        for (pos, &idx1) in cfg.experiment.indices.iter().enumerate() {
            let (sum, ok, failed) = per_index[pos];
            let mse = if ok > 0 { sum / ok as f64 } else { f64::NAN };
            record.push(&format!("i{idx1}"), vec![nx as f64, mse, failed as f64]);
        }
    }
    record
        .stage_wall_ms
        .push(("pipeline".into(), t0.elapsed().as_secs_f64() * 1e3));
    Ok(record)
}

/// Analytic sign statistics of a truth matrix under a threshold spec: the
/// first-moment vector and the oracle sign correlation matrix. Feeds the
/// noiseless diagnostics and the oracle-backend round-trip.
pub fn analytic_sign_stats(
    truth: &DMatrix<f64>,
    spec: &ThresholdSpec,
    tol: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = truth.nrows();
    let mu = DVector::from_fn(n, |i, _| {
        2.0 * special::q(spec.d / (truth[(i, i)] + spec.sigma_tau2).sqrt()) - 1.0
    });
    let mut r_y = DMatrix::identity(n, n);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let vals: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let p = PairParams::new(
                truth[(i, i)] + spec.sigma_tau2,
                truth[(j, j)] + spec.sigma_tau2,
                truth[(i, j)],
                spec.d,
            )?;
            output_autocorrelation_oracle(&p, tol)
        })
        .collect();
    for (&(i, j), v) in pairs.iter().zip(vals) {
        let v = v?;
        r_y[(i, j)] = v;
        r_y[(j, i)] = v;
    }
    Ok((mu, r_y))
}

/// Full-matrix recovery comparison across backends on shared per-repetition
/// datasets. Rows: per backend, (run, nmse) for each repetition, a
/// (-1, mean) summary, and a `<backend>-noiseless` row holding the NMSE of
/// the same inversion fed analytic sign statistics.
pub fn run_covariance_experiment(cfg: &ExperimentConfig) -> Result<MetricsRecord> {
    cfg.validate()?;
    let spec = cfg.threshold_spec()?;
    let truth = truth_covariance(&cfg.process_model()?)?;
    let nx = *cfg.experiment.nx_list.last().ok_or_else(|| {
        Error::Config("covariance experiment needs at least one nx entry".into())
    })?;
    let e_count = cfg.experiment.count;
    let backends: Vec<(String, BackendKind)> = cfg
        .experiment
        .backends
        .iter()
        .map(|name| Ok((name.clone(), cfg.backend_kind(name)?)))
        .collect::<Result<_>>()?;

    let mut record = MetricsRecord::new("covariance", &["run", "nmse"]);
    if truth.trace() < 1e-12 {
        record.push("degenerate-zero-signal", vec![-1.0, 1.0]);
    }
    let t0 = Instant::now();
    let runs: Vec<Result<Vec<f64>>> = (0..e_count as u64)
        .into_par_iter()
        .map(|rep| {
            let (_, data) = make_dataset(cfg, nx, rep)?;
            backends
                .iter()
                .map(|(_, backend)| {
                    let report = recover::assemble_covariance(&data, backend, &spec)?;
                    Ok(recover::nmse(&truth, &report.r_hat))
                })
                .collect()
        })
        .collect();
    let gen_ms = t0.elapsed().as_secs_f64() * 1e3;

    let mut by_backend: Vec<Vec<f64>> = vec![Vec::new(); backends.len()];
    for (rep, run) in runs.into_iter().enumerate() {
        let run = run?;
        for (b, v) in run.into_iter().enumerate() {
            record.push(&backends[b].0, vec![rep as f64, v]);
            by_backend[b].push(v);
        }
    }
    for (b, vals) in by_backend.iter().enumerate() {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        record.push(&backends[b].0, vec![-1.0, mean]);
    }

    // noiseless diagnostics: same inversion driven by analytic statistics
    let t1 = Instant::now();
    let (mu, r_y) = analytic_sign_stats(&truth, &spec, 1e-11)?;
    for (name, backend) in &backends {
        let report = recover_from_stats(&r_y, &mu, &spec, backend)?;
        record.push(&format!("{name}-noiseless"), vec![-1.0, recover::nmse(&truth, &report.r_hat)]);
    }
    record.stage_wall_ms.push(("recover".into(), gen_ms));
    record
        .stage_wall_ms
        .push(("noiseless".into(), t1.elapsed().as_secs_f64() * 1e3));
    Ok(record)
}

/// Convenience wrapper returning the per-repetition recovery reports of one
/// backend (the CLI writes them out as CSVs).
pub fn run_single_recovery(cfg: &ExperimentConfig, backend_name: &str) -> Result<Vec<RecoveryReport>> {
    cfg.validate()?;
    let spec = cfg.threshold_spec()?;
    let truth = truth_covariance(&cfg.process_model()?)?;
    let backend = cfg.backend_kind(backend_name)?;
    let nx = *cfg.experiment.nx_list.last().unwrap();
    (0..cfg.experiment.count as u64)
        .map(|rep| {
            let (_, data) = make_dataset(cfg, nx, rep)?;
            let mut report = recover::assemble_covariance(&data, &backend, &spec)?;
            report.nmse = Some(recover::nmse(&truth, &report.r_hat));
            Ok(report)
        })
        .collect()
}

/// Analytic sign/input cross-correlation E{y_i x_j} from the truth matrix.
fn truth_cross_correlation(
    truth: &DMatrix<f64>,
    spec: &ThresholdSpec,
    i: usize,
    j: usize,
) -> Result<f64> {
    let p0i = truth[(i, i)] + spec.sigma_tau2;
    if i == j {
        // E{y tau} for the same index: d mu - 2 sigma_tau2 f_w(0), the
        // jointly-Gaussian moment of the threshold with its own sign
        let mu = 2.0 * special::q(spec.d / p0i.sqrt()) - 1.0;
        let f_w0 = (-spec.d * spec.d / (2.0 * p0i)).exp()
            / (2.0 * std::f64::consts::PI * p0i).sqrt();
        let r_ytau = spec.d * mu - 2.0 * spec.sigma_tau2 * f_w0;
        bussgang::cross_correlation_diagonal(p0i, spec.d, r_ytau)
    } else {
        // independent threshold and signal across indices
        let mu = 2.0 * special::q(spec.d / p0i.sqrt()) - 1.0;
        let r_ytau = mu * spec.d;
        let p = PairParams::new(
            truth[(j, j)] + spec.sigma_tau2,
            p0i,
            truth[(i, j)],
            spec.d,
        )?;
        bussgang::cross_correlation_entry(&p, r_ytau)
    }
}

/// Cross-correlation window experiment: recover the covariance on the probe
/// window with the configured backend, form the sign/input cross-correlation
/// matrix, and tabulate truth, estimate, direct sample value, and the
/// 4-sigma comparison band for each window index.
pub fn run_bussgang_experiment(cfg: &ExperimentConfig) -> Result<MetricsRecord> {
    cfg.validate()?;
    let spec = cfg.threshold_spec()?;
    let truth = truth_covariance(&cfg.process_model()?)?;
    let nx = *cfg.experiment.nx_list.last().unwrap();
    let probe = cfg.experiment.probe_index - 1;
    let window: Vec<usize> = (0..cfg.experiment.window).collect();
    // restrict to the window plus the probe index
    let mut indices = window.clone();
    if !indices.contains(&probe) {
        indices.push(probe);
    }
    let local_probe = indices.iter().position(|&v| v == probe).unwrap();

    let mut record = MetricsRecord::new(
        "bussgang",
        &["j", "truth", "estimate", "sample", "band"],
    );
    let t0 = Instant::now();
    let backend = cfg.backend_kind(&cfg.backend.kind)?;
    let (ensemble, data) = make_dataset(cfg, nx, 0)?;
    let sub = restrict_dataset(&data, &indices);
    let report = recover::assemble_covariance(&sub, &backend, &spec)?;
    if report.failed_entries() > 0 {
        return Err(Error::Solver(format!(
            "{} window entries failed to recover",
            report.failed_entries()
        )));
    }
    let p_hat = DMatrix::from_fn(indices.len(), indices.len(), |a, b| {
        report.r_hat[(a, b)] + if a == b { spec.sigma_tau2 } else { 0.0 }
    });
    let ryx = bussgang::recover_cross_matrix(&sub, &p_hat)?;

    let nxf = nx as f64;
    for (local_j, &j) in indices.iter().enumerate().take(cfg.experiment.window) {
        let estimate = ryx[(local_probe, local_j)];
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        let mut acc_t = 0.0;
        let mut acc_t2 = 0.0;
        for k in 0..nx {
            let v = data.signs[(probe, k)] * ensemble.samples[(j, k)];
            acc += v;
            acc2 += v * v;
            let t = data.signs[(probe, k)] * data.thresholds[(j, k)];
            acc_t += t;
            acc_t2 += t * t;
        }
        let sample = acc / nxf;
        let mean_t = acc_t / nxf;
        let band = 4.0
            * ((acc2 / nxf - sample * sample + acc_t2 / nxf - mean_t * mean_t) / nxf).sqrt();
        let truth_v = truth_cross_correlation(&truth, &spec, probe, j)?;
        record.push(
            backend.name(),
            vec![(j + 1) as f64, truth_v, estimate, sample, band],
        );
    }
    record
        .stage_wall_ms
        .push(("pipeline".into(), t0.elapsed().as_secs_f64() * 1e3));
    Ok(record)
}

/// Threshold-MLE sweep: estimate (d, sigma_tau2) for every (nx, repetition)
/// and tabulate the normalized squared errors plus their across-repetition
/// means.
pub fn run_threshold_experiment(cfg: &ExperimentConfig) -> Result<MetricsRecord> {
    cfg.validate()?;
    let spec = cfg.threshold_spec()?;
    if spec.d == 0.0 {
        return Err(Error::Config("threshold experiment needs d != 0 for the NMSE metric".into()));
    }
    let e_count = cfg.experiment.count;
    let mut record = MetricsRecord::new("threshold", &["nx", "run", "nmse_d", "nmse_s2"]);
    let t0 = Instant::now();
    for &nx in &cfg.experiment.nx_list {
        let mut sum_d = 0.0;
        let mut sum_s2 = 0.0;
        for rep in 0..e_count as u64 {
            let (_, data) = make_dataset(cfg, nx, rep)?;
            let est = estimate_threshold(&data)?;
            let nmse_d = (est.d - spec.d).powi(2) / (spec.d * spec.d);
            let nmse_s2 = if spec.sigma_tau2 > 0.0 {
                (est.sigma_tau2 - spec.sigma_tau2).powi(2) / (spec.sigma_tau2 * spec.sigma_tau2)
            } else {
                f64::NAN
            };
            record.push("run", vec![nx as f64, rep as f64, nmse_d, nmse_s2]);
            sum_d += nmse_d;
            sum_s2 += nmse_s2;
        }
        record.push(
            "mean",
            vec![nx as f64, -1.0, sum_d / e_count as f64, sum_s2 / e_count as f64],
        );
    }
    record
        .stage_wall_ms
        .push(("pipeline".into(), t0.elapsed().as_secs_f64() * 1e3));
    Ok(record)
}
