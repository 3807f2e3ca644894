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

//! Tuned multi-algorithm runs on a shared instance.

use std::path::Path;

use diradmm::trace::{AlgorithmId, ConvergenceTrace, ParamRecord, RunLimits};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AlgorithmConfig, ExperimentConfig};
use crate::error::{write_file, HarnessError};
use crate::instance::Instance;
use crate::meta::Meta;
use crate::plot::line_chart;
use crate::runner;
use crate::sweep::{self, SweepGrids, SweepOutcome};

/// Parameters fixed in the config, if every one of them is given.
pub fn fixed_params(alg: &AlgorithmConfig) -> Option<ParamRecord> {
    match *alg {
        AlgorithmConfig::Admm {
            rho: Some(rho),
            rounds: Some(rounds),
        } => Some(ParamRecord::Admm { rho, rounds }),
        AlgorithmConfig::Panda { step: Some(step), .. } => Some(ParamRecord::Panda { step }),
        AlgorithmConfig::PushDiging { step: Some(step) } => Some(ParamRecord::PushDiging { step }),
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Arm {
    pub algorithm: AlgorithmId,
    pub sweep: Option<SweepOutcome>,
    pub params: Option<ParamRecord>,
    #[serde(skip)]
    pub trace: Result<ConvergenceTrace, String>,
}

impl Arm {
    pub fn rounds_to(&self, tol: f64) -> Option<u64> {
        self.trace.as_ref().ok().and_then(|t| t.rounds_to(tol))
    }
}

/// Sweeps if needed, then runs the chosen parameters.
pub fn tuned_run(
    instance: &Instance,
    alg: &AlgorithmConfig,
    grids: &SweepGrids,
    limits: &RunLimits,
) -> (Option<SweepOutcome>, Result<(ParamRecord, ConvergenceTrace), HarnessError>) {
    let (outcome, params) = match fixed_params(alg) {
        Some(p) => (None, p),
        None => match sweep::sweep(instance, alg, grids, limits) {
            Ok(o) => {
                let p = o.best;
                (Some(o), p)
            }
            Err(e) => return (None, Err(e)),
        },
    };
    let trace = runner::run(instance, &params, alg.singular_policy(), limits).map(|t| (params, t));
    (outcome, trace)
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub instance_hash: String,
    pub arms: Vec<Arm>,
}

impl Comparison {
    pub fn arm(&self, alg: AlgorithmId) -> Option<&Arm> {
        self.arms.iter().find(|a| a.algorithm == alg)
    }

    pub fn svg(&self, title: &str) -> String {
        let traces: Vec<&ConvergenceTrace> = self.arms.iter().filter_map(|a| a.trace.as_ref().ok()).collect();
        line_chart(&traces, title)
    }

    /// Per-algorithm trace and sweep CSVs, `comparison.svg` and `summary.json`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        for arm in &self.arms {
            if let Ok(t) = &arm.trace {
                write_file(&dir.join(format!("{}.csv", arm.algorithm)), &t.to_csv())?;
            }
            if let Some(s) = &arm.sweep {
                write_file(&dir.join(format!("{}_sweep.csv", arm.algorithm)), &s.to_csv())?;
            }
        }
        write_file(&dir.join("comparison.svg"), &self.svg(&format!("instance {}", &self.instance_hash[..12])))?;
        let summary: Vec<_> = self
            .arms
            .iter()
            .map(|a| {
                serde_json::json!({
                    "algorithm": a.algorithm,
                    "params": a.params,
                    "termination": a.trace.as_ref().ok().map(|t| t.termination),
                    "final_comm_rounds": a.trace.as_ref().ok().and_then(|t| t.last().map(|r| r.comm_rounds)),
                    "error": a.trace.as_ref().err(),
                })
            })
            .collect();
        let doc = serde_json::json!({ "instance_hash": self.instance_hash, "arms": summary });
        write_file(&dir.join("summary.json"), &serde_json::to_string_pretty(&doc)?)
    }
}

/// Every arm runs on the same instance; one arm failing does not stop the others.
pub fn compare(instance: &Instance, cfg: &ExperimentConfig) -> Result<Comparison, HarnessError> {
    if cfg.algorithms.len() < 2 {
        return Err(HarnessError::ComparisonTooSmall(cfg.algorithms.len()));
    }
    let limits = cfg.limits();
    let arms = cfg
        .algorithms
        .par_iter()
        .map(|alg| {
            let (sweep, result) = tuned_run(instance, alg, &cfg.sweep, &limits);
            let (params, trace) = match result {
                Ok((p, t)) => (Some(p), Ok(t)),
                Err(e) => (sweep.as_ref().map(|s| s.best), Err(e.to_string())),
            };
            Arm {
                algorithm: alg.id(),
                sweep,
                params,
                trace,
            }
        })
        .collect();
    Ok(Comparison {
        instance_hash: instance.hash(),
        arms,
    })
}

/// Runs [`compare`] and writes the bundle plus `meta.json` into `dir`.
pub fn compare_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<Comparison, HarnessError> {
    let instance = Instance::from_specs(&cfg.graph, &cfg.objective, cfg.weight_tol)?;
    let cmp = compare(&instance, cfg)?;
    cmp.write(dir)?;
    Meta::new(cfg, &instance).write(&dir.join("meta.json"))?;
    Ok(cmp)
}
