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

//! Grid search over algorithm parameters, scored by communication rounds.

use std::cmp::Ordering;
use std::fmt::Write as _;

use diradmm::objective::SingularPolicy;
use diradmm::trace::{AlgorithmId, ParamRecord, RunLimits, Termination};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::AlgorithmConfig;
use crate::error::HarnessError;
use crate::instance::Instance;
use crate::runner;

pub const SWEEP_CSV_HEADER: &str = "algorithm,rho,rounds,step,termination,comm_rounds_to_tol";

/// `count` points spaced evenly in log10 between `10^lo` and `10^hi`.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo)],
        _ => (0..count)
            .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrids {
    pub rho: Vec<f64>,
    pub rounds: Vec<usize>,
    /// Shared by PANDA's `c` and Push-DIGing's `α`.
    pub step: Vec<f64>,
}

impl Default for SweepGrids {
    fn default() -> Self {
        Self {
            rho: logspace(-3.0, 3.0, 13),
            rounds: vec![1, 2, 4, 8],
            step: logspace(-6.0, 0.0, 13),
        }
    }
}

impl SweepGrids {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.rho.is_empty() || self.rounds.is_empty() || self.step.is_empty() {
            return Err(HarnessError::Config("sweep grids must be non-empty".into()));
        }
        Ok(())
    }

    /// Grid points for one arm. Parameters fixed in the arm's config are
    /// not swept.
    pub fn points(&self, alg: &AlgorithmConfig) -> Vec<ParamRecord> {
        match *alg {
            AlgorithmConfig::Admm { rho, rounds } => {
                let rhos = rho.map_or_else(|| self.rho.clone(), |r| vec![r]);
                let bs = rounds.map_or_else(|| self.rounds.clone(), |b| vec![b]);
                rhos.iter()
                    .flat_map(|&rho| bs.iter().map(move |&rounds| ParamRecord::Admm { rho, rounds }))
                    .collect()
            }
            AlgorithmConfig::Panda { step, .. } => step
                .map_or_else(|| self.step.clone(), |s| vec![s])
                .into_iter()
                .map(|step| ParamRecord::Panda { step })
                .collect(),
            AlgorithmConfig::PushDiging { step } => step
                .map_or_else(|| self.step.clone(), |s| vec![s])
                .into_iter()
                .map(|step| ParamRecord::PushDiging { step })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub params: ParamRecord,
    /// `None` when the run itself errored.
    pub termination: Option<Termination>,
    /// Rounds to reach the stop tolerance; `None` counts as worst.
    pub score: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub algorithm: AlgorithmId,
    pub points: Vec<SweepPoint>,
    pub best: ParamRecord,
    pub best_score: u64,
}

fn key_cmp(a: &ParamRecord, b: &ParamRecord) -> Ordering {
    let (a0, a1) = a.key();
    let (b0, b1) = b.key();
    a0.total_cmp(&b0).then(a1.total_cmp(&b1))
}

/// Fewest rounds wins; ties go to the lexicographically smallest parameters.
pub fn pick_best(points: &[SweepPoint]) -> Option<(ParamRecord, u64)> {
    points
        .iter()
        .filter_map(|p| p.score.map(|s| (p.params, s)))
        .min_by(|(pa, sa), (pb, sb)| sa.cmp(sb).then_with(|| key_cmp(pa, pb)))
}

pub fn evaluate(instance: &Instance, params: &ParamRecord, singular: SingularPolicy, limits: &RunLimits) -> SweepPoint {
    match runner::run(instance, params, singular, limits) {
        Ok(trace) => SweepPoint {
            params: *params,
            termination: Some(trace.termination),
            score: match trace.termination {
                Termination::Converged => trace.last().map(|r| r.comm_rounds),
                _ => None,
            },
            error: None,
        },
        Err(e) => SweepPoint {
            params: *params,
            termination: None,
            score: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn sweep(
    instance: &Instance,
    alg: &AlgorithmConfig,
    grids: &SweepGrids,
    limits: &RunLimits,
) -> Result<SweepOutcome, HarnessError> {
    let grid = grids.points(alg);
    if grid.is_empty() {
        return Err(HarnessError::Config("empty sweep grid".into()));
    }
    let singular = alg.singular_policy();
    let points: Vec<SweepPoint> = grid.par_iter().map(|p| evaluate(instance, p, singular, limits)).collect();
    let (best, best_score) = pick_best(&points).ok_or_else(|| HarnessError::AllDiverged {
        algorithm: alg.id().name().to_string(),
    })?;
    Ok(SweepOutcome {
        algorithm: alg.id(),
        points,
        best,
        best_score,
    })
}

fn termination_name(t: Option<Termination>) -> &'static str {
    match t {
        Some(Termination::Converged) => "converged",
        Some(Termination::MaxIters) => "max-iters",
        Some(Termination::Diverged) => "diverged",
        None => "error",
    }
}

impl SweepOutcome {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SWEEP_CSV_HEADER}\n");
        for p in &self.points {
            let (rho, rounds, step) = match p.params {
                ParamRecord::Admm { rho, rounds } => (format!("{rho:.16e}"), rounds.to_string(), String::new()),
                ParamRecord::Panda { step } | ParamRecord::PushDiging { step } => {
                    (String::new(), String::new(), format!("{step:.16e}"))
                }
            };
            let score = p.score.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{rho},{rounds},{step},{},{score}",
                self.algorithm,
                termination_name(p.termination)
            );
        }
        out
    }
}
