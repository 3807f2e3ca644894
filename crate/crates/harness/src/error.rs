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

use std::path::PathBuf;

use diradmm::{AdmmError, BaselineError, GraphError, ObjectiveError, WeightError};
use diradmm::theory::TheoryError;
use serde::Serialize;
use thiserror::Error;

use crate::fit::FitError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Admm(#[from] AdmmError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("every grid point for {algorithm} diverged or failed to converge")]
    AllDiverged { algorithm: String },
    #[error("a comparison needs at least two algorithms, got {0}")]
    ComparisonTooSmall(usize),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

/// Machine-readable form printed on stderr by the CLI.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Io { .. } => "io",
            HarnessError::Config(_) => "config",
            HarnessError::Graph(_) => "graph",
            HarnessError::Weights(_) => "weights",
            HarnessError::Objective(_) => "objective",
            HarnessError::Admm(_) => "admm",
            HarnessError::Baseline(_) => "baseline",
            HarnessError::Theory(_) => "theory",
            HarnessError::Fit(_) => "fit",
            HarnessError::AllDiverged { .. } => "all-diverged",
            HarnessError::ComparisonTooSmall(_) => "comparison-too-small",
            HarnessError::Json(_) => "json",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            error: self.kind(),
            message: self.to_string(),
        }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}
