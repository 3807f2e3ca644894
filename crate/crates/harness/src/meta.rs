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

use std::path::Path;

use diradmm::objective::Objective;
use diradmm::rng::RNG_NAME;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{write_file, HarnessError};
use crate::instance::{Instance, ObjectiveSpec};

/// Provenance written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub software: String,
    pub version: String,
    pub rng: String,
    pub config: serde_json::Value,
    pub seed: u64,
    /// Seed that actually produced the graph after redraws.
    pub graph_seed: Option<u64>,
    pub objective_seed: Option<u64>,
    pub instance_hash: String,
    pub weights_hash: String,
    pub delta: f64,
    pub mu: f64,
    pub l: f64,
}

impl Meta {
    pub fn new(cfg: &ExperimentConfig, instance: &Instance) -> Self {
        let c = instance.objective.constants();
        Self {
            software: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_NAME.to_string(),
            config: serde_json::to_value(cfg).expect("config serializes"),
            seed: cfg.seed,
            graph_seed: instance.graph_seed,
            objective_seed: match cfg.objective {
                ObjectiveSpec::Random { seed, .. } => Some(seed),
                ObjectiveSpec::File { .. } => None,
            },
            instance_hash: instance.hash(),
            weights_hash: instance.weights_hash(),
            delta: instance.weights.delta(),
            mu: c.mu,
            l: c.l,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        write_file(path, &serde_json::to_string_pretty(self)?)
    }
}
