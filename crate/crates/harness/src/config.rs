/*
Copyright 2026 The diradmm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! The JSON experiment description.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use diradmm::objective::SingularPolicy;
use diradmm::trace::{AlgorithmId, RunLimits};
use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, HarnessError};
use crate::instance::{default_weight_tol, GraphSpec, ObjectiveSpec};
use crate::sweep::SweepGrids;

/// One algorithm arm. Parameters left out are chosen by sweeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum AlgorithmConfig {
    Admm {
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default)]
        rounds: Option<usize>,
    },
    Panda {
        #[serde(default)]
        step: Option<f64>,
        #[serde(default)]
        singular: SingularPolicy,
    },
    PushDiging {
        #[serde(default)]
        step: Option<f64>,
    },
}

impl AlgorithmConfig {
    pub fn id(&self) -> AlgorithmId {
        match self {
            AlgorithmConfig::Admm { .. } => AlgorithmId::Admm,
            AlgorithmConfig::Panda { .. } => AlgorithmId::Panda,
            AlgorithmConfig::PushDiging { .. } => AlgorithmId::PushDiging,
        }
    }

    pub fn singular_policy(&self) -> SingularPolicy {
        match self {
            AlgorithmConfig::Panda { singular, .. } => *singular,
            _ => SingularPolicy::Reject,
        }
    }
}

fn default_stop_tol() -> f64 {
    1e-6
}

fn default_max_iters() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub objective: ObjectiveSpec,
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default)]
    pub sweep: SweepGrids,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub max_comm_rounds: Option<u64>,
    #[serde(default = "default_weight_tol")]
    pub weight_tol: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Free-form seed recorded in the metadata; generators carry their own.
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_json(&read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.algorithms.is_empty() {
            return Err(HarnessError::Config("no algorithm configured".into()));
        }
        let ids: BTreeSet<_> = self.algorithms.iter().map(AlgorithmConfig::id).collect();
        if ids.len() != self.algorithms.len() {
            return Err(HarnessError::Config("an algorithm is listed twice".into()));
        }
        if !(self.stop_tol > 0.0) {
            return Err(HarnessError::Config(format!("stop_tol = {}", self.stop_tol)));
        }
        if self.max_iters == 0 {
            return Err(HarnessError::Config("max_iters = 0".into()));
        }
        self.sweep.validate()?;
        for path in [self.graph_path(), self.objective_path()].into_iter().flatten() {
            if !path.exists() {
                return Err(HarnessError::Config(format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn limits(&self) -> RunLimits {
        RunLimits {
            max_iters: self.max_iters,
            max_comm_rounds: self.max_comm_rounds,
            stop_tol: self.stop_tol,
        }
    }

    fn graph_path(&self) -> Option<&Path> {
        match &self.graph {
            GraphSpec::File { path } => Some(path),
            GraphSpec::Random { .. } => None,
        }
    }

    fn objective_path(&self) -> Option<&Path> {
        match &self.objective {
            ObjectiveSpec::File { path } => Some(path),
            ObjectiveSpec::Random { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "graph": {"kind": "random", "n": 10, "p": 0.4, "seed": 1},
        "objective": {"kind": "random", "m": 3, "p_rows": 3, "seed": 2},
        "algorithms": [{"algorithm": "admm", "rho": 1.0, "rounds": 2}, {"algorithm": "push-diging"}]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.stop_tol, 1e-6);
        assert_eq!(cfg.sweep, SweepGrids::default());
        assert_eq!(cfg.algorithms[1], AlgorithmConfig::PushDiging { step: None });
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn duplicates_and_missing_files_are_rejected() {
        let dup = MINIMAL.replace("push-diging", "admm");
        assert!(matches!(ExperimentConfig::from_json(&dup), Err(HarnessError::Config(_))));
        let missing = MINIMAL.replace(
            r#"{"kind": "random", "n": 10, "p": 0.4, "seed": 1}"#,
            r#"{"kind": "file", "path": "/nonexistent/graph.txt"}"#,
        );
        assert!(matches!(ExperimentConfig::from_json(&missing), Err(HarnessError::Config(_))));
    }
}
