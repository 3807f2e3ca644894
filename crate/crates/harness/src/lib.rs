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

//! Experiment harness for `diradmm`: instance construction, parameter
//! sweeps, multi-algorithm comparisons, rate fits and plotting.

pub mod compare;
pub mod config;
pub mod diagnose;
pub mod error;
pub mod fit;
pub mod instance;
pub mod meta;
pub mod plot;
pub mod runner;
pub mod sweep;

pub use compare::{compare, Comparison};
pub use config::{AlgorithmConfig, ExperimentConfig};
pub use error::HarnessError;
pub use fit::{fit_rate, RateFit};
pub use instance::{GraphSpec, Instance, ObjectiveSpec};
pub use sweep::{sweep, SweepGrids, SweepOutcome};
