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

//! Distributed ADMM for consensus optimization over directed graphs.
//!
//! The crate models a network of agents that jointly minimize
//! `Σ_i f_i(x)` while only exchanging vectors along the edges of a strongly
//! connected digraph. It provides
//!
//! * [`digraph`]: graphs, random generation and connectivity checks,
//! * [`weights`]: doubly stochastic mixing matrices and their consensus gap,
//! * [`objective`]: separable quadratic objectives with closed-form subproblems,
//! * [`admm`]: the ADMM iteration with `B` consensus rounds per step,
//! * [`baselines`]: PANDA-style dual ascent and Push-DIGing,
//! * [`theory`]: certified parameter bounds and λ-norm diagnostics,
//! * [`trace`]: convergence traces and their CSV form.

pub mod admm;
pub mod baselines;
pub mod digraph;
pub mod objective;
pub mod rng;
pub mod stacked;
pub mod theory;
pub mod trace;
pub mod weights;

pub use admm::{admm_step, run_admm, AdmmError, AdmmParams, AdmmState};
pub use baselines::{
    panda_step, push_sum_matrix, pushdiging_step, run_panda, run_push_diging, BaselineError, ColumnStochastic,
    PandaParams, PandaState, PushDigingParams, PushDigingState,
};
pub use digraph::{generate_random_digraph, DiGraph, GraphError};
pub use objective::{Constants, Objective, ObjectiveError, Optimum, QuadraticObjective, SingularPolicy};
pub use stacked::StackedVector;
pub use trace::{AlgorithmId, ConvergenceTrace, NoSink, ParamRecord, RunLimits, Termination, TraceRow, TraceSink};
pub use weights::{build_weight_matrix, compute_delta, validate_mixing, WeightError, WeightMatrix};
