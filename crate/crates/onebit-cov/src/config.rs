//! Experiment configuration: a TOML document describing the source process,
//! threshold, backend parameters, and sweep settings, validated into the
//! library's domain types with explicit error paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::ProcessModel;
use crate::recover::BackendKind;
use crate::sampling::ThresholdSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: ProcessConfig,
    pub threshold: ThresholdConfig,
    #[serde(default)]
    pub backend: BackendConfig,
    pub experiment: ExperimentParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    pub kind: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub v_min: Option<f64>,
    #[serde(default)]
    pub v_max: Option<f64>,
    #[serde(default)]
    pub zeta0: Option<f64>,
    #[serde(default)]
    pub zeta1: Option<f64>,
    #[serde(default)]
    pub zeta2: Option<f64>,
    #[serde(default)]
    pub path_seed: Option<u64>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub d: f64,
    pub sigma_tau2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default = "default_backend_kind")]
    pub kind: String,
    #[serde(default = "default_n_q")]
    pub n_q: usize,
    #[serde(default = "default_n_m")]
    pub n_m: usize,
    #[serde(default = "default_n_starts")]
    pub n_starts: usize,
    #[serde(default = "default_oracle_tol")]
    pub tol: f64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: default_backend_kind(),
            n_q: default_n_q(),
            n_m: default_n_m(),
            n_starts: default_n_starts(),
            tol: default_oracle_tol(),
        }
    }
}

fn default_backend_kind() -> String {
    "gl".into()
}
fn default_n_q() -> usize {
    30
}
fn default_n_m() -> usize {
    10_000
}
fn default_n_starts() -> usize {
    12
}
fn default_oracle_tol() -> f64 {
    1e-10
}
fn default_indices() -> Vec<usize> {
    vec![2, 8]
}
fn default_window() -> usize {
    13
}
fn default_probe_index() -> usize {
    2
}
fn default_stages() -> Vec<String> {
    vec!["generate".into(), "quantize".into(), "recover".into(), "evaluate".into()]
}
fn default_backends() -> Vec<String> {
    vec!["pade".into(), "gl".into(), "mc".into()]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    pub nx_list: Vec<usize>,
    /// number of repeated experiments E
    pub count: usize,
    pub seed: u64,
    /// 1-based indices reported by the variance experiment
    #[serde(default = "default_indices")]
    pub indices: Vec<usize>,
    /// temporal window length for the cross-correlation experiment
    #[serde(default = "default_window")]
    pub window: usize,
    /// 1-based probe (sign) index for the cross-correlation experiment
    #[serde(default = "default_probe_index")]
    pub probe_index: usize,
    /// pipeline stages to run: generate, quantize, recover, evaluate
    #[serde(default = "default_stages")]
    pub stages: Vec<String>,
    /// backends compared by the covariance table experiment
    #[serde(default = "default_backends")]
    pub backends: Vec<String>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse failure: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.process_model()?.validate()?;
        self.threshold_spec()?;
        self.backend_kind(&self.backend.kind)?.validate()?;
        let e = &self.experiment;
        if e.count == 0 {
            return Err(Error::Config("experiment.count must be >= 1".into()));
        }
        if e.nx_list.is_empty() || e.nx_list.iter().any(|&n| n == 0) {
            return Err(Error::Config("experiment.nx_list must hold positive entries".into()));
        }
        let n = self.process_model()?.dimension();
        for &i in &e.indices {
            if i == 0 || i > n {
                return Err(Error::Config(format!(
                    "experiment.indices entry {i} outside 1..={n}"
                )));
            }
        }
        if e.probe_index == 0 || e.probe_index > n || e.window == 0 || e.window > n {
            return Err(Error::Config(format!(
                "experiment probe_index/window ({}, {}) outside the process dimension {n}",
                e.probe_index, e.window
            )));
        }
        for s in &e.stages {
            if !["generate", "quantize", "recover", "evaluate"].contains(&s.as_str()) {
                return Err(Error::Config(format!("unknown stage {s:?} in experiment.stages")));
            }
        }
        for b in &e.backends {
            self.backend_kind(b)?;
        }
        Ok(())
    }

    pub fn process_model(&self) -> Result<ProcessModel> {
        let p = &self.process;
        let need = |field: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::Config(format!("process.{field} required for kind {:?}", p.kind)))
        };
        match p.kind.as_str() {
            "wiener" => Ok(ProcessModel::Wiener {
                n: p.n.ok_or_else(|| Error::Config("process.n required for wiener".into()))?,
                v_min: need("v_min", p.v_min)?,
                v_max: need("v_max", p.v_max)?,
            }),
            "garch" => Ok(ProcessModel::Garch {
                n: p.n.ok_or_else(|| Error::Config("process.n required for garch".into()))?,
                zeta0: need("zeta0", p.zeta0)?,
                zeta1: need("zeta1", p.zeta1)?,
                zeta2: need("zeta2", p.zeta2)?,
                path_seed: p.path_seed.unwrap_or(0),
            }),
            "explicit" => Ok(ProcessModel::ExplicitCovariance {
                matrix: p
                    .matrix
                    .clone()
                    .ok_or_else(|| Error::Config("process.matrix required for explicit".into()))?,
            }),
            other => Err(Error::Config(format!(
                "process.kind {other:?} not one of wiener|garch|explicit"
            ))),
        }
    }

    pub fn threshold_spec(&self) -> Result<ThresholdSpec> {
        ThresholdSpec::new(self.threshold.d, self.threshold.sigma_tau2)
    }

    /// Backend named `kind` with this config's parameters; the backend seed
    /// derives from the experiment seed.
    pub fn backend_kind(&self, kind: &str) -> Result<BackendKind> {
        let seed = self.experiment.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0xbac4_e17d;
        match kind {
            "pade" => Ok(BackendKind::Pade { n_starts: self.backend.n_starts, seed }),
            "gl" => Ok(BackendKind::GaussLegendre { n_q: self.backend.n_q }),
            "mc" => Ok(BackendKind::MonteCarlo { n_m: self.backend.n_m, seed }),
            "oracle" => Ok(BackendKind::Oracle { tol: self.backend.tol }),
            other => Err(Error::Config(format!(
                "backend kind {other:?} not one of pade|gl|mc|oracle"
            ))),
        }
    }

    pub fn has_stage(&self, stage: &str) -> bool {
        self.experiment.stages.iter().any(|s| s == stage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
[process]
kind = "wiener"
n = 100
v_min = 0.2
v_max = 0.8

[threshold]
d = 0.5
sigma_tau2 = 0.2

[backend]
kind = "gl"
n_q = 30

[experiment]
nx_list = [1000, 3000]
count = 5
seed = 42
"#;

    #[test]
    fn parses_and_validates_wiener_config() {
        let cfg = ExperimentConfig::from_toml_str(GOOD).unwrap();
        assert!(matches!(cfg.process_model().unwrap(), ProcessModel::Wiener { n: 100, .. }));
        assert_eq!(cfg.experiment.indices, vec![2, 8]);
        assert!(matches!(
            cfg.backend_kind("gl").unwrap(),
            BackendKind::GaussLegendre { n_q: 30 }
        ));
    }

    #[test]
    fn rejects_unknown_fields_and_kinds() {
        let bad = GOOD.replace("kind = \"wiener\"", "kind = \"brownian\"");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
        let bad = GOOD.replace("[backend]", "[backend]\nbogus = 1");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn reports_missing_fields_with_paths() {
        let bad = GOOD.replace("v_min = 0.2\n", "");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(err.contains("v_min"), "{err}");
    }

    #[test]
    fn rejects_out_of_range_indices() {
        let bad = GOOD.replace("seed = 42", "seed = 42\nindices = [2, 101]");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn explicit_matrix_config_works() {
        let text = r#"
[process]
kind = "explicit"
matrix = [[0.5, 0.1], [0.1, 0.4]]

[threshold]
d = 0.3
sigma_tau2 = 0.1

[experiment]
nx_list = [100]
count = 1
seed = 7
indices = [1]
window = 2
probe_index = 1
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let m = crate::process::truth_covariance(&cfg.process_model().unwrap()).unwrap();
        assert_eq!(m[(0, 1)], 0.1);
    }
}
