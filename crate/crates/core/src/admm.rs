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

//! Distributed ADMM over a directed graph.
//!
//! Each iteration performs
//!
//! 1. `xᵏ⁺¹ = argmin_x f(x) + (aᵏ)ᵀx + (ρ/2)‖x − yᵏ‖²` (local to each agent),
//! 2. `yᵏ⁺¹ = Wᴮ xᵏ⁺¹` as `B` one-hop exchanges starting from `ζ(0) = xᵏ⁺¹`,
//! 3. `aᵏ⁺¹ = aᵏ + ρ(xᵏ⁺¹ − yᵏ⁺¹)`.
//!
//! With `y⁰ = x⁰` and a zero-mean `a⁰`, the block mean of `y` tracks the
//! block mean of `x` and the dual stays zero-mean at every iteration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective::{Objective, ObjectiveError, Optimum};
use crate::stacked::StackedVector;
use crate::trace::{self, ConvergenceTrace, IterateState, ParamRecord, RunLimits, TraceSink};
use crate::weights::WeightMatrix;

/// Relative tolerance for the averaging invariants.
pub const INVARIANT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdmmError {
    #[error("penalty parameter must be positive, got {0}")]
    InvalidRho(f64),
    #[error("at least one communication round per iteration is required")]
    ZeroRounds,
    #[error("initial iterates violate y⁰ = x⁰ or mean(a⁰) = 0")]
    BadInitialization,
    #[error("weight matrix has {w} rows, objective has {agents} agents")]
    DimensionMismatch { w: usize, agents: usize },
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmParams {
    /// Penalty parameter `ρ`.
    pub rho: f64,
    /// Communication rounds per iteration, `B`.
    pub rounds: usize,
}

impl AdmmParams {
    pub fn new(rho: f64, rounds: usize) -> Result<Self, AdmmError> {
        let params = Self { rho, rounds };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), AdmmError> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(AdmmError::InvalidRho(self.rho));
        }
        if self.rounds == 0 {
            return Err(AdmmError::ZeroRounds);
        }
        Ok(())
    }

    pub fn record(&self) -> ParamRecord {
        ParamRecord::Admm {
            rho: self.rho,
            rounds: self.rounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub x: StackedVector,
    pub y: StackedVector,
    pub a: StackedVector,
    pub k: usize,
    pub comm_rounds: u64,
    scratch: StackedVector,
    next: StackedVector,
}

impl AdmmState {
    /// `x⁰ = y⁰ = a⁰ = 0`.
    pub fn zeros(agents: usize, block: usize) -> Self {
        let z = StackedVector::zeros(agents, block);
        Self {
            x: z.clone(),
            y: z.clone(),
            a: z.clone(),
            k: 0,
            comm_rounds: 0,
            scratch: z.clone(),
            next: z,
        }
    }

    /// Starts from `x⁰ = y⁰ = x0` and the given dual, which must have zero
    /// block mean.
    pub fn with_initial(x0: StackedVector, a0: StackedVector) -> Result<Self, AdmmError> {
        if !x0.same_shape(&a0) {
            return Err(AdmmError::BadInitialization);
        }
        let mean_norm = a0.block_mean().iter().map(|v| v * v).sum::<f64>().sqrt();
        if mean_norm > INVARIANT_TOL * (1.0 + a0.norm()) {
            return Err(AdmmError::BadInitialization);
        }
        Ok(Self {
            y: x0.clone(),
            scratch: x0.clone(),
            next: x0.clone(),
            x: x0,
            a: a0,
            k: 0,
            comm_rounds: 0,
        })
    }

    /// Deviation of `mean(a)` from zero and of `mean(y)` from `mean(x)`.
    pub fn invariant_gaps(&self) -> (f64, f64) {
        let a_mean = self.a.block_mean().iter().map(|v| v * v).sum::<f64>().sqrt();
        let mx = self.x.block_mean();
        let my = self.y.block_mean();
        let y_gap = mx.iter().zip(&my).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        (a_mean, y_gap)
    }

    /// Both averaging invariants within [`INVARIANT_TOL`].
    pub fn invariants_hold(&self) -> bool {
        let (a_gap, y_gap) = self.invariant_gaps();
        a_gap <= INVARIANT_TOL * (1.0 + self.a.norm()) && y_gap <= INVARIANT_TOL * (1.0 + self.x.norm())
    }
}

impl IterateState for AdmmState {
    fn iteration(&self) -> usize {
        self.k
    }

    fn comm_rounds(&self) -> u64 {
        self.comm_rounds
    }

    fn primal(&self) -> &StackedVector {
        &self.x
    }

    fn dual(&self) -> &StackedVector {
        &self.a
    }
}

/// One iteration, updating `state` in place.
pub fn admm_step<O: Objective + ?Sized>(
    state: &mut AdmmState,
    obj: &O,
    w: &WeightMatrix,
    params: &AdmmParams,
) -> Result<(), AdmmError> {
    params.validate()?;
    if w.n() != obj.agents() {
        return Err(AdmmError::DimensionMismatch {
            w: w.n(),
            agents: obj.agents(),
        });
    }
    obj.x_update_into(&state.a, &state.y, params.rho, &mut state.next)?;
    std::mem::swap(&mut state.x, &mut state.next);
    w.mix_rounds(&state.x, params.rounds, &mut state.y, &mut state.scratch);
    for ((a, x), y) in state
        .a
        .as_mut_slice()
        .iter_mut()
        .zip(state.x.as_slice())
        .zip(state.y.as_slice())
    {
        *a += params.rho * (x - y);
    }
    state.k += 1;
    state.comm_rounds += params.rounds as u64;
    Ok(())
}

/// Iterates from zero until the relative primal residual reaches
/// `limits.stop_tol`, the budget runs out, or the iterates blow up.
///
/// `reference` is used for measurement only.
pub fn run_admm<O, K>(
    obj: &O,
    reference: &Optimum,
    w: &WeightMatrix,
    params: &AdmmParams,
    limits: &RunLimits,
    sink: &mut K,
) -> Result<ConvergenceTrace, AdmmError>
where
    O: Objective + ?Sized,
    K: TraceSink<AdmmState>,
{
    let mut state = AdmmState::zeros(obj.agents(), obj.block_dim());
    run_admm_from(&mut state, obj, reference, w, params, limits, sink)
}

pub fn run_admm_from<O, K>(
    state: &mut AdmmState,
    obj: &O,
    reference: &Optimum,
    w: &WeightMatrix,
    params: &AdmmParams,
    limits: &RunLimits,
    sink: &mut K,
) -> Result<ConvergenceTrace, AdmmError>
where
    O: Objective + ?Sized,
    K: TraceSink<AdmmState>,
{
    params.validate()?;
    if w.n() != obj.agents() {
        return Err(AdmmError::DimensionMismatch {
            w: w.n(),
            agents: obj.agents(),
        });
    }
    trace::drive(state, params.record(), reference, limits, sink, |s| {
        admm_step(s, obj, w, params)
    })
}

/// Iterate snapshots, for the λ-norm diagnostics.
#[derive(Debug, Default, Clone)]
pub struct IterateRecorder {
    pub x: Vec<StackedVector>,
    pub y: Vec<StackedVector>,
    pub a: Vec<StackedVector>,
}

impl TraceSink<AdmmState> for IterateRecorder {
    fn observe(&mut self, _row: &trace::TraceRow, state: &AdmmState) {
        self.x.push(state.x.clone());
        self.y.push(state.y.clone());
        self.a.push(state.a.clone());
    }
}

/// Records the worst averaging-invariant gaps seen and where they occurred.
#[derive(Debug, Default, Clone)]
pub struct InvariantMonitor {
    pub checked: usize,
    pub violations: Vec<usize>,
    pub worst_dual_mean: f64,
    pub worst_primal_mean_gap: f64,
}

impl InvariantMonitor {
    pub fn all_hold(&self) -> bool {
        self.checked > 0 && self.violations.is_empty()
    }
}

impl TraceSink<AdmmState> for InvariantMonitor {
    fn observe(&mut self, _row: &trace::TraceRow, state: &AdmmState) {
        let (a_gap, y_gap) = state.invariant_gaps();
        self.worst_dual_mean = self.worst_dual_mean.max(a_gap);
        self.worst_primal_mean_gap = self.worst_primal_mean_gap.max(y_gap);
        if !state.invariants_hold() {
            self.violations.push(state.k);
        }
        self.checked += 1;
    }
}

/// Fans one row out to two sinks.
pub struct Both<'a, A, B>(pub &'a mut A, pub &'a mut B);

impl<S, A: TraceSink<S>, B: TraceSink<S>> TraceSink<S> for Both<'_, A, B> {
    fn observe(&mut self, row: &trace::TraceRow, state: &S) {
        self.0.observe(row, state);
        self.1.observe(row, state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::DiGraph;
    use crate::objective::QuadraticObjective;
    use crate::trace::{NoSink, Termination};
    use crate::weights::{build_weight_matrix, DEFAULT_TOL};
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    fn two_agent() -> (QuadraticObjective, WeightMatrix) {
        let blocks = [1.0, 3.0]
            .iter()
            .map(|&g| (DMatrix::from_element(1, 1, 1.0), DVector::from_element(1, g)))
            .collect();
        let obj = QuadraticObjective::new(1, blocks).unwrap();
        let w = build_weight_matrix(&DiGraph::complete(2).unwrap(), DEFAULT_TOL).unwrap();
        (obj, w)
    }

    #[test]
    fn first_iterate_matches_closed_form() {
        let (obj, w) = two_agent();
        let mut s = AdmmState::zeros(2, 1);
        admm_step(&mut s, &obj, &w, &AdmmParams::new(1.0, 1).unwrap()).unwrap();
        assert_abs_diff_eq!(s.x[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.y[0], 4.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.y[1], 4.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.a[0], -2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.a[1], 2.0 / 3.0, epsilon = 1e-12);
        assert_eq!((s.k, s.comm_rounds), (1, 1));
    }

    #[test]
    fn two_agent_instance_converges() {
        let (obj, w) = two_agent();
        let opt = obj.centralized_solve().unwrap();
        let mut s = AdmmState::zeros(2, 1);
        let params = AdmmParams::new(1.0, 1).unwrap();
        for _ in 0..200 {
            admm_step(&mut s, &obj, &w, &params).unwrap();
            assert!(s.invariants_hold());
        }
        assert!(s.x.distance(&opt.x_star) <= 1e-8);
    }

    #[test]
    fn single_agent_is_proximal_point() {
        let obj = QuadraticObjective::random(1, 2, 3, 4).unwrap();
        let w = build_weight_matrix(&DiGraph::new(1, []).unwrap(), DEFAULT_TOL).unwrap();
        let params = AdmmParams::new(0.7, 3).unwrap();
        let mut s = AdmmState::zeros(1, 2);
        let zero = StackedVector::zeros(1, 2);
        for _ in 0..300 {
            let prev = s.x.clone();
            admm_step(&mut s, &obj, &w, &params).unwrap();
            assert_eq!(s.y, s.x);
            assert!(s.a.norm() < 1e-14);
            let prox = obj.x_update(&zero, &prev, params.rho).unwrap();
            assert!(prox.distance(&s.x) < 1e-12);
        }
        let opt = obj.centralized_solve().unwrap();
        assert!(s.x.distance(&opt.x_star) < 1e-8);
    }

    #[test]
    fn exact_averaging_weights_give_exact_consensus() {
        let obj = QuadraticObjective::random(5, 2, 3, 8).unwrap();
        let w = build_weight_matrix(&DiGraph::complete(5).unwrap(), DEFAULT_TOL).unwrap();
        let mut s = AdmmState::zeros(5, 2);
        let params = AdmmParams::new(1.3, 1).unwrap();
        for _ in 0..5 {
            admm_step(&mut s, &obj, &w, &params).unwrap();
            let exact = s.x.consensus_projection();
            assert!(s.y.distance(&exact) < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert_eq!(AdmmParams::new(0.0, 1), Err(AdmmError::InvalidRho(0.0)));
        assert_eq!(AdmmParams::new(1.0, 0), Err(AdmmError::ZeroRounds));
        let bad_dual = StackedVector::from_vec(vec![1.0, 1.0], 1);
        assert_eq!(
            AdmmState::with_initial(StackedVector::zeros(2, 1), bad_dual).unwrap_err(),
            AdmmError::BadInitialization
        );
    }

    #[test]
    fn unit_tolerance_stops_immediately() {
        let (obj, w) = two_agent();
        let opt = obj.centralized_solve().unwrap();
        let trace = run_admm(
            &obj,
            &opt,
            &w,
            &AdmmParams::new(1.0, 1).unwrap(),
            &RunLimits::new(100, 1.0),
            &mut NoSink,
        )
        .unwrap();
        assert!(trace.rows.len() <= 2);
        assert_eq!(trace.termination, Termination::Converged);
    }

    #[test]
    fn general_initialization_keeps_invariants() {
        let obj = QuadraticObjective::random(4, 2, 3, 1).unwrap();
        let g = DiGraph::cycle(4).unwrap();
        let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
        let x0 = StackedVector::from_vec((0..8).map(|i| i as f64 * 0.3 - 1.0).collect(), 2);
        let a0 = StackedVector::from_vec((0..8).map(|i| (i as f64).sin()).collect(), 2).disagreement();
        let mut s = AdmmState::with_initial(x0, a0).unwrap();
        let params = AdmmParams::new(0.5, 2).unwrap();
        for _ in 0..50 {
            admm_step(&mut s, &obj, &w, &params).unwrap();
            assert!(s.invariants_hold());
        }
    }
}
