//! CSV serialization: every output file starts with one `#`-prefixed schema
//! header line carrying key=value metadata. Floats are written with Rust's
//! shortest round-trip formatting, so re-reading reproduces them exactly.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::process::Ensemble;
use crate::recover::{EntryStatus, RecoveryReport};
use crate::sampling::{OneBitDataset, ThresholdSpec};

fn write_header(out: &mut impl Write, kind: &str, fields: &[(&str, String)]) -> Result<()> {
    write!(out, "# onebit-cov {kind}")?;
    for (k, v) in fields {
        write!(out, " {k}={v}")?;
    }
    writeln!(out)?;
    Ok(())
}

fn parse_header(line: &str, kind: &str) -> Result<BTreeMap<String, String>> {
    let prefix = format!("# onebit-cov {kind}");
    let rest = line
        .strip_prefix(&prefix)
        .ok_or_else(|| Error::Validation(format!("expected a {kind:?} header, got {line:?}")))?;
    let mut map = BTreeMap::new();
    for tok in rest.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Validation(format!("malformed header token {tok:?}")))?;
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

fn header_num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    map.get(key)
        .ok_or_else(|| Error::Validation(format!("header missing {key:?}")))?
        .parse()
        .map_err(|_| Error::Validation(format!("header field {key:?} not parseable")))
}

fn write_matrix_rows(out: &mut impl Write, m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        let mut first = true;
        let mut line = String::new();
        for j in 0..m.ncols() {
            if !first {
                line.push(',');
            }
            line.push_str(&format!("{}", m[(i, j)]));
            first = false;
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn read_matrix_rows(lines: &[String], rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    if lines.len() != rows {
        return Err(Error::Validation(format!(
            "expected {rows} data rows, found {}",
            lines.len()
        )));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (i, line) in lines.iter().enumerate() {
        let vals: Vec<&str> = line.split(',').collect();
        if vals.len() != cols {
            return Err(Error::Validation(format!(
                "row {i} has {} columns, expected {cols}",
                vals.len()
            )));
        }
        for (j, v) in vals.iter().enumerate() {
            m[(i, j)] = v
                .parse()
                .map_err(|_| Error::Validation(format!("bad float {v:?} at ({i}, {j})")))?;
        }
    }
    Ok(m)
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    Ok(reader.lines().collect::<std::io::Result<Vec<_>>>()?)
}

/// Write an ensemble as two CSVs in `dir`: samples.csv (row-major) and
/// truth.csv, each with an N/N_x/seed header.
pub fn write_ensemble(dir: &Path, e: &Ensemble) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let n = e.samples.nrows();
    let n_x = e.samples.ncols();
    let mut f = std::fs::File::create(dir.join("samples.csv"))?;
    write_header(
        &mut f,
        "ensemble",
        &[("n", n.to_string()), ("n_x", n_x.to_string()), ("seed", e.seed.to_string())],
    )?;
    write_matrix_rows(&mut f, &e.samples)?;
    let mut f = std::fs::File::create(dir.join("truth.csv"))?;
    write_header(
        &mut f,
        "truth",
        &[("n", n.to_string()), ("n_x", n_x.to_string()), ("seed", e.seed.to_string())],
    )?;
    write_matrix_rows(&mut f, &e.truth)?;
    Ok(())
}

pub fn read_ensemble(dir: &Path) -> Result<Ensemble> {
    let lines = read_lines(&dir.join("samples.csv"))?;
    let head = parse_header(lines.first().map(String::as_str).unwrap_or(""), "ensemble")?;
    let n: usize = header_num(&head, "n")?;
    let n_x: usize = header_num(&head, "n_x")?;
    let seed: u64 = header_num(&head, "seed")?;
    let samples = read_matrix_rows(&lines[1..], n, n_x)?;
    let tlines = read_lines(&dir.join("truth.csv"))?;
    parse_header(tlines.first().map(String::as_str).unwrap_or(""), "truth")?;
    let truth = read_matrix_rows(&tlines[1..], n, n)?;
    Ok(Ensemble { samples, truth, seed })
}

/// Write a one-bit dataset as signs.csv and thresholds.csv, each carrying
/// the full (d, sigma_tau2, n, n_x, seed) header record.
pub fn write_dataset(dir: &Path, ds: &OneBitDataset) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let fields = [
        ("d", ds.spec.d.to_string()),
        ("sigma_tau2", ds.spec.sigma_tau2.to_string()),
        ("n", ds.n().to_string()),
        ("n_x", ds.n_x().to_string()),
        ("seed", ds.seed.to_string()),
    ];
    let mut f = std::fs::File::create(dir.join("signs.csv"))?;
    write_header(&mut f, "signs", &fields)?;
    write_matrix_rows(&mut f, &ds.signs)?;
    let mut f = std::fs::File::create(dir.join("thresholds.csv"))?;
    write_header(&mut f, "thresholds", &fields)?;
    write_matrix_rows(&mut f, &ds.thresholds)?;
    Ok(())
}

pub fn read_dataset(dir: &Path) -> Result<OneBitDataset> {
    let slines = read_lines(&dir.join("signs.csv"))?;
    let head = parse_header(slines.first().map(String::as_str).unwrap_or(""), "signs")?;
    let n: usize = header_num(&head, "n")?;
    let n_x: usize = header_num(&head, "n_x")?;
    let seed: u64 = header_num(&head, "seed")?;
    let spec = ThresholdSpec::new(header_num(&head, "d")?, header_num(&head, "sigma_tau2")?)?;
    let signs = read_matrix_rows(&slines[1..], n, n_x)?;
    if signs.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Validation("signs.csv holds values other than +-1".into()));
    }
    let tlines = read_lines(&dir.join("thresholds.csv"))?;
    parse_header(tlines.first().map(String::as_str).unwrap_or(""), "thresholds")?;
    let thresholds = read_matrix_rows(&tlines[1..], n, n_x)?;
    Ok(OneBitDataset { signs, thresholds, spec, seed })
}

/// Write a recovery report: one row per entry plus the backend/NMSE summary
/// in the header.
pub fn write_report(path: &Path, report: &RecoveryReport, wall_ms: f64) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    let nmse = report.nmse.map(|v| v.to_string()).unwrap_or_else(|| "unknown".into());
    write_header(
        &mut f,
        "recovery",
        &[
            ("backend", report.backend.clone()),
            ("n", report.r_hat.nrows().to_string()),
            ("nmse", nmse),
            ("wall_ms", wall_ms.to_string()),
        ],
    )?;
    writeln!(f, "i,j,p_hat,r_hat,iterations,criterion_value,status")?;
    for e in &report.entries {
        let status = match &e.status {
            EntryStatus::Ok => "ok".to_string(),
            EntryStatus::Fallback => "fallback".to_string(),
            EntryStatus::Failed(msg) => format!("failed: {}", msg.replace(',', ";")),
        };
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            e.i, e.j, e.p_hat, e.r_hat, e.iterations, e.criterion, status
        )?;
    }
    Ok(())
}

/// Write a plain matrix (cross-correlation output and similar).
pub fn write_matrix(path: &Path, kind: &str, m: &DMatrix<f64>) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    write_header(
        &mut f,
        kind,
        &[("rows", m.nrows().to_string()), ("cols", m.ncols().to_string())],
    )?;
    write_matrix_rows(&mut f, m)?;
    Ok(())
}

pub fn read_matrix(path: &Path, kind: &str) -> Result<DMatrix<f64>> {
    let lines = read_lines(path)?;
    let head = parse_header(lines.first().map(String::as_str).unwrap_or(""), kind)?;
    let rows: usize = header_num(&head, "rows")?;
    let cols: usize = header_num(&head, "cols")?;
    read_matrix_rows(&lines[1..], rows, cols)
}

/// A batch-experiment result table: named rows of float columns, with the
/// per-stage wall clock in the header. Written and re-read losslessly.
#[derive(Debug, Clone)]
pub struct MetricsRecord {
    pub experiment: String,
    /// names of the value columns
    pub labels: Vec<String>,
    /// (series key, values) rows
    pub rows: Vec<(String, Vec<f64>)>,
    /// (stage, milliseconds)
    pub stage_wall_ms: Vec<(String, f64)>,
}

impl MetricsRecord {
    pub fn new(experiment: &str, labels: &[&str]) -> Self {
        MetricsRecord {
            experiment: experiment.to_string(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            stage_wall_ms: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.labels.len());
        self.rows.push((key.to_string(), values));
    }

    pub fn rows_for<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Vec<f64>> + 'a {
        self.rows.iter().filter(move |(k, _)| k == key).map(|(_, v)| v)
    }

    /// Bit-exact equality (NaN-tolerant), used by the round-trip checks.
    pub fn same_as(&self, other: &MetricsRecord) -> bool {
        self.experiment == other.experiment
            && self.labels == other.labels
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|((ka, va), (kb, vb))| {
                    ka == kb
                        && va.len() == vb.len()
                        && va.iter().zip(vb).all(|(x, y)| x.to_bits() == y.to_bits())
                })
            && self.stage_wall_ms.len() == other.stage_wall_ms.len()
            && self
                .stage_wall_ms
                .iter()
                .zip(&other.stage_wall_ms)
                .all(|((ka, va), (kb, vb))| ka == kb && va.to_bits() == vb.to_bits())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut f = std::fs::File::create(path)?;
        let wall = self
            .stage_wall_ms
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect::<Vec<_>>()
            .join(";");
        write_header(
            &mut f,
            "metrics",
            &[("experiment", self.experiment.clone()), ("wall_ms", wall)],
        )?;
        writeln!(f, "key,{}", self.labels.join(","))?;
        for (key, vals) in &self.rows {
            let vals = vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            writeln!(f, "{key},{vals}")?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<MetricsRecord> {
        let lines = read_lines(path)?;
        if lines.len() < 2 {
            return Err(Error::Validation("metrics file too short".into()));
        }
        let head = parse_header(&lines[0], "metrics")?;
        let experiment = head
            .get("experiment")
            .ok_or_else(|| Error::Validation("metrics header missing experiment".into()))?
            .clone();
        let mut stage_wall_ms = Vec::new();
        if let Some(wall) = head.get("wall_ms") {
            for tok in wall.split(';').filter(|t| !t.is_empty()) {
                let (k, v) = tok
                    .split_once(':')
                    .ok_or_else(|| Error::Validation(format!("bad wall_ms token {tok:?}")))?;
                stage_wall_ms.push((
                    k.to_string(),
                    v.parse()
                        .map_err(|_| Error::Validation(format!("bad wall_ms value {v:?}")))?,
                ));
            }
        }
        let mut cols = lines[1].split(',');
        if cols.next() != Some("key") {
            return Err(Error::Validation("metrics column row must start with key".into()));
        }
        let labels: Vec<String> = cols.map(str::to_string).collect();
        let mut rows = Vec::new();
        for line in &lines[2..] {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let key = parts
                .next()
                .ok_or_else(|| Error::Validation("empty metrics row".into()))?
                .to_string();
            let vals = parts
                .map(|v| {
                    v.parse()
                        .map_err(|_| Error::Validation(format!("bad metrics float {v:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() != labels.len() {
                return Err(Error::Validation(format!(
                    "metrics row {key:?} has {} values, expected {}",
                    vals.len(),
                    labels.len()
                )));
            }
            rows.push((key, vals));
        }
        Ok(MetricsRecord { experiment, labels, rows, stage_wall_ms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{sample_ensemble, ProcessModel};
    use crate::sampling::quantize;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn ensemble_round_trip_is_bit_exact() {
        let model = ProcessModel::Wiener { n: 6, v_min: 0.2, v_max: 0.8 };
        let e = sample_ensemble(&model, 17, 99).unwrap();
        let dir = tmp();
        write_ensemble(dir.path(), &e).unwrap();
        let back = read_ensemble(dir.path()).unwrap();
        assert_eq!(e.samples, back.samples);
        assert_eq!(e.truth, back.truth);
        assert_eq!(e.seed, back.seed);
    }

    #[test]
    fn dataset_round_trip_is_bit_exact() {
        let model = ProcessModel::Wiener { n: 5, v_min: 0.2, v_max: 0.8 };
        let e = sample_ensemble(&model, 23, 3).unwrap();
        let ds = quantize(&e, ThresholdSpec::new(0.5, 0.2).unwrap(), 4).unwrap();
        let dir = tmp();
        write_dataset(dir.path(), &ds).unwrap();
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(ds.signs, back.signs);
        assert_eq!(ds.thresholds, back.thresholds);
        assert_eq!(ds.spec.d, back.spec.d);
        assert_eq!(ds.spec.sigma_tau2, back.spec.sigma_tau2);
    }

    #[test]
    fn dataset_reader_rejects_non_sign_values() {
        let dir = tmp();
        std::fs::write(
            dir.path().join("signs.csv"),
            "# onebit-cov signs d=0.5 sigma_tau2=0.2 n=1 n_x=2 seed=0\n1,0.5\n",
        )
        .unwrap();
        std::fs::write(
            dir.path().join("thresholds.csv"),
            "# onebit-cov thresholds d=0.5 sigma_tau2=0.2 n=1 n_x=2 seed=0\n0.1,0.2\n",
        )
        .unwrap();
        assert!(read_dataset(dir.path()).is_err());
    }

    #[test]
    fn metrics_record_round_trip_is_exact() {
        let mut m = MetricsRecord::new("variance", &["nx", "mse", "failures"]);
        m.push("i2", vec![1000.0, 1.3066049371337891e-3, 0.0]);
        m.push("i2", vec![3000.0, f64::NAN, 15.0]);
        m.push("i8", vec![1000.0, 0.1 + 0.2, 0.0]);
        m.stage_wall_ms.push(("generate".into(), 12.625));
        m.stage_wall_ms.push(("recover".into(), 3.0e-2));
        let dir = tmp();
        let path = dir.path().join("metrics.csv");
        m.write(&path).unwrap();
        let back = MetricsRecord::read(&path).unwrap();
        assert!(m.same_as(&back));
    }

    #[test]
    fn matrix_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.5, -0.25, f64::NAN, 0.0, 1e-300, 3.0]);
        let dir = tmp();
        let path = dir.path().join("m.csv");
        write_matrix(&path, "crosscorr", &m).unwrap();
        let back = read_matrix(&path, "crosscorr").unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(m[(i, j)].to_bits(), back[(i, j)].to_bits());
            }
        }
    }
}
