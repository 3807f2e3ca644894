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

//! Baseline methods for directed graphs.
//!
//! Both recursions are as-implemented reconstructions used for comparison,
//! not reference implementations of the original methods.
//!
//! * PANDA-style dual ascent: no penalty term and one exchange per
//!   iteration, with the consensus estimate driven by dynamic average
//!   consensus,
//!   `xᵏ⁺¹ = argmin f(x) + (aᵏ)ᵀx`, `yᵏ⁺¹ = W(yᵏ + xᵏ⁺¹ − xᵏ)`,
//!   `aᵏ⁺¹ = aᵏ + c(xᵏ⁺¹ − yᵏ⁺¹)`.
//! * Push-DIGing: gradient tracking with push-sum debiasing over the
//!   column-stochastic matrix `C_ij = 1/(1 + outdeg(j))`,
//!   `uᵏ⁺¹ = C(uᵏ − αtᵏ)`, `wᵏ⁺¹ = Cwᵏ`, `zᵏ⁺¹ = uᵏ⁺¹/wᵏ⁺¹`,
//!   `tᵏ⁺¹ = Ctᵏ + ∇f(zᵏ⁺¹) − ∇f(zᵏ)`. Two vectors cross every edge per
//!   iteration.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::DiGraph;
use crate::objective::{Objective, ObjectiveError, Optimum, SingularPolicy};
use crate::stacked::StackedVector;
use crate::trace::{self, ConvergenceTrace, IterateState, ParamRecord, RunLimits, TraceSink};
use crate::weights::{mix_dense, WeightMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("mixing matrix is not column stochastic (worst column deviation {0:e})")]
    NotColumnStochastic(f64),
    #[error("push-sum weight of agent {agent} is {value}, expected positive")]
    NonPositiveWeight { agent: usize, value: f64 },
    #[error("mixing matrix has {matrix} rows, objective has {agents} agents")]
    DimensionMismatch { matrix: usize, agents: usize },
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

fn check_step(step: f64) -> Result<(), BaselineError> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(BaselineError::InvalidStep(step))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PandaParams {
    /// Dual step `c`.
    pub step: f64,
    #[serde(default)]
    pub singular: SingularPolicy,
}

impl PandaParams {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            singular: SingularPolicy::Reject,
        }
    }

    pub fn with_singular(mut self, policy: SingularPolicy) -> Self {
        self.singular = policy;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PandaState {
    pub x: StackedVector,
    pub y: StackedVector,
    pub a: StackedVector,
    pub k: usize,
    pub comm_rounds: u64,
    next: StackedVector,
    scratch: StackedVector,
}

impl PandaState {
    pub fn zeros(agents: usize, block: usize) -> Self {
        let z = StackedVector::zeros(agents, block);
        Self {
            x: z.clone(),
            y: z.clone(),
            a: z.clone(),
            k: 0,
            comm_rounds: 0,
            next: z.clone(),
            scratch: z,
        }
    }
}

impl IterateState for PandaState {
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

pub fn panda_step<O: Objective + ?Sized>(
    state: &mut PandaState,
    obj: &O,
    w: &WeightMatrix,
    params: &PandaParams,
) -> Result<(), BaselineError> {
    check_step(params.step)?;
    if w.n() != obj.agents() {
        return Err(BaselineError::DimensionMismatch {
            matrix: w.n(),
            agents: obj.agents(),
        });
    }
    obj.dual_update_into(&state.a, params.singular, &mut state.next)?;
    // scratch = y + x' - x
    for (((s, y), xn), x) in state
        .scratch
        .as_mut_slice()
        .iter_mut()
        .zip(state.y.as_slice())
        .zip(state.next.as_slice())
        .zip(state.x.as_slice())
    {
        *s = y + xn - x;
    }
    w.mix_into(&state.scratch, &mut state.y);
    std::mem::swap(&mut state.x, &mut state.next);
    for ((a, x), y) in state
        .a
        .as_mut_slice()
        .iter_mut()
        .zip(state.x.as_slice())
        .zip(state.y.as_slice())
    {
        *a += params.step * (x - y);
    }
    state.k += 1;
    state.comm_rounds += 1;
    Ok(())
}

pub fn run_panda<O, K>(
    obj: &O,
    reference: &Optimum,
    w: &WeightMatrix,
    params: &PandaParams,
    limits: &RunLimits,
    sink: &mut K,
) -> Result<ConvergenceTrace, BaselineError>
where
    O: Objective + ?Sized,
    K: TraceSink<PandaState>,
{
    check_step(params.step)?;
    let mut state = PandaState::zeros(obj.agents(), obj.block_dim());
    let record = ParamRecord::Panda { step: params.step };
    trace::drive(&mut state, record, reference, limits, sink, |s| {
        panda_step(s, obj, w, params)
    })
}

/// Column-stochastic mixing matrix for push-sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStochastic {
    entries: DMatrix<f64>,
}

impl ColumnStochastic {
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self, BaselineError> {
        let worst = (0..entries.ncols())
            .map(|j| (entries.column(j).sum() - 1.0).abs())
            .fold(0.0, f64::max);
        if worst > 1e-12 || entries.iter().any(|&v| v < 0.0) || entries.nrows() != entries.ncols() {
            return Err(BaselineError::NotColumnStochastic(worst));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }
}

/// `C_ij = 1/(1 + outdeg(j))` when `i == j` or `(i, j)` is an edge. Each
/// sender needs only its own out-degree.
pub fn push_sum_matrix(g: &DiGraph) -> ColumnStochastic {
    let n = g.n();
    let mut c = DMatrix::zeros(n, n);
    for j in 0..n {
        let share = 1.0 / (1 + g.out_neighbors(j).expect("in range").len()) as f64;
        c[(j, j)] = share;
        for &i in g.out_neighbors(j).expect("in range") {
            c[(i, j)] = share;
        }
    }
    ColumnStochastic { entries: c }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushDigingParams {
    /// Gradient step `α`.
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushDigingState {
    /// Push-sum numerators.
    pub u: StackedVector,
    /// Push-sum weights.
    pub w: Vec<f64>,
    /// Debiased iterates `u / w`.
    pub z: StackedVector,
    /// Gradient trackers.
    pub t: StackedVector,
    /// `∇f(z)`.
    pub grad: StackedVector,
    /// `−∇f(z)`, the multiplier estimate implied by stationarity.
    pub dual_estimate: StackedVector,
    pub k: usize,
    pub comm_rounds: u64,
    scratch: StackedVector,
    mixed: StackedVector,
}

impl PushDigingState {
    /// `u⁰ = z⁰ = 0`, `w⁰ = 1`, `t⁰ = ∇f(z⁰)`.
    pub fn initial<O: Objective + ?Sized>(obj: &O) -> Result<Self, BaselineError> {
        let z = obj.zeros();
        let grad = obj.gradient(&z)?;
        Ok(Self {
            u: z.clone(),
            w: vec![1.0; obj.agents()],
            t: grad.clone(),
            dual_estimate: grad.scaled(-1.0),
            grad,
            k: 0,
            comm_rounds: 0,
            scratch: z.clone(),
            mixed: z.clone(),
            z,
        })
    }
}

impl IterateState for PushDigingState {
    fn iteration(&self) -> usize {
        self.k
    }

    fn comm_rounds(&self) -> u64 {
        self.comm_rounds
    }

    fn primal(&self) -> &StackedVector {
        &self.z
    }

    fn dual(&self) -> &StackedVector {
        &self.dual_estimate
    }
}

pub fn pushdiging_step<O: Objective + ?Sized>(
    state: &mut PushDigingState,
    obj: &O,
    c: &ColumnStochastic,
    params: &PushDigingParams,
) -> Result<(), BaselineError> {
    check_step(params.step)?;
    if c.n() != obj.agents() {
        return Err(BaselineError::DimensionMismatch {
            matrix: c.n(),
            agents: obj.agents(),
        });
    }
    let alpha = params.step;
    state.scratch.copy_from(&state.u);
    state.scratch.axpy(-alpha, &state.t);
    mix_dense(&c.entries, &state.scratch, &mut state.u);

    let n = c.n();
    let w_next: Vec<f64> = (0..n).map(|i| (0..n).map(|j| c.entries[(i, j)] * state.w[j]).sum()).collect();
    state.w = w_next;
    for (i, &wi) in state.w.iter().enumerate() {
        if !(wi > 0.0) {
            return Err(BaselineError::NonPositiveWeight { agent: i, value: wi });
        }
        for (z, u) in state.z.block_of_mut(i).iter_mut().zip(state.u.block_of(i)) {
            *z = u / wi;
        }
    }

    // t' = C t + ∇f(z') − ∇f(z)
    mix_dense(&c.entries, &state.t, &mut state.mixed);
    obj.gradient_into(&state.z, &mut state.scratch)?;
    for (((t, m), g_new), g_old) in state
        .t
        .as_mut_slice()
        .iter_mut()
        .zip(state.mixed.as_slice())
        .zip(state.scratch.as_slice())
        .zip(state.grad.as_slice())
    {
        *t = m + g_new - g_old;
    }
    std::mem::swap(&mut state.grad, &mut state.scratch);
    for (d, g) in state.dual_estimate.as_mut_slice().iter_mut().zip(state.grad.as_slice()) {
        *d = -g;
    }
    state.k += 1;
    state.comm_rounds += 2;
    Ok(())
}

pub fn run_push_diging<O, K>(
    obj: &O,
    reference: &Optimum,
    c: &ColumnStochastic,
    params: &PushDigingParams,
    limits: &RunLimits,
    sink: &mut K,
) -> Result<ConvergenceTrace, BaselineError>
where
    O: Objective + ?Sized,
    K: TraceSink<PushDigingState>,
{
    check_step(params.step)?;
    let mut state = PushDigingState::initial(obj)?;
    let record = ParamRecord::PushDiging { step: params.step };
    trace::drive(&mut state, record, reference, limits, sink, |s| {
        pushdiging_step(s, obj, c, params)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::generate_strongly_connected;
    use crate::objective::QuadraticObjective;
    use crate::trace::{NoSink, Termination};
    use crate::weights::{build_weight_matrix, DEFAULT_TOL};
    use nalgebra::DVector;

    fn two_agent() -> QuadraticObjective {
        let blocks = [1.0, 3.0]
            .iter()
            .map(|&g| (DMatrix::from_element(1, 1, 1.0), DVector::from_element(1, g)))
            .collect();
        QuadraticObjective::new(1, blocks).unwrap()
    }

    #[test]
    fn panda_single_agent_solves_in_one_step() {
        let obj = QuadraticObjective::random(1, 3, 4, 2).unwrap();
        let opt = obj.centralized_solve().unwrap();
        let w = build_weight_matrix(&DiGraph::new(1, []).unwrap(), DEFAULT_TOL).unwrap();
        let mut s = PandaState::zeros(1, 3);
        for _ in 0..3 {
            panda_step(&mut s, &obj, &w, &PandaParams::new(0.5)).unwrap();
            assert_eq!(s.y, s.x);
            assert!(s.a.norm() < 1e-15);
            assert!(s.x.distance(&opt.x_star) < 1e-12);
        }
    }

    #[test]
    fn panda_two_agent_converges() {
        let obj = two_agent();
        let opt = obj.centralized_solve().unwrap();
        let w = build_weight_matrix(&DiGraph::complete(2).unwrap(), DEFAULT_TOL).unwrap();
        let trace = run_panda(
            &obj,
            &opt,
            &w,
            &PandaParams::new(0.5),
            &RunLimits::new(10_000, 1e-10),
            &mut NoSink,
        )
        .unwrap();
        assert_eq!(trace.termination, Termination::Converged);
    }

    #[test]
    fn panda_keeps_zero_mean_dual() {
        let (g, _) = generate_strongly_connected(6, 0.4, 1, 100).unwrap();
        let obj = QuadraticObjective::random(6, 2, 3, 5).unwrap();
        let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
        let mut s = PandaState::zeros(6, 2);
        for _ in 0..100 {
            panda_step(&mut s, &obj, &w, &PandaParams::new(0.05)).unwrap();
            let mean: f64 = s.a.block_mean().iter().map(|v| v.abs()).sum();
            assert!(mean < 1e-9 * (1.0 + s.a.norm()));
        }
    }

    #[test]
    fn panda_rejects_singular_blocks_unless_told_otherwise() {
        let obj = QuadraticObjective::random(4, 3, 1, 0).unwrap();
        let (g, _) = generate_strongly_connected(4, 0.5, 0, 100).unwrap();
        let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
        let mut s = PandaState::zeros(4, 3);
        assert!(matches!(
            panda_step(&mut s, &obj, &w, &PandaParams::new(0.1)),
            Err(BaselineError::Objective(ObjectiveError::SingularBlock { .. }))
        ));
        let p = PandaParams::new(0.1).with_singular(SingularPolicy::MinNorm);
        panda_step(&mut s, &obj, &w, &p).unwrap();
        assert!(matches!(
            panda_step(&mut s, &obj, &w, &PandaParams::new(0.0)),
            Err(BaselineError::InvalidStep(_))
        ));
    }

    #[test]
    fn push_sum_matrix_is_column_stochastic() {
        let (g, _) = generate_strongly_connected(10, 0.4, 3, 100).unwrap();
        let c = push_sum_matrix(&g);
        for j in 0..10 {
            let s: f64 = c.entries().column(j).sum();
            assert!((s - 1.0).abs() < 1e-15);
            for i in 0..10 {
                if i != j && !g.has_edge(i, j) {
                    assert_eq!(c.entries()[(i, j)], 0.0);
                }
            }
        }
        assert!(ColumnStochastic::from_entries(c.entries().clone()).is_ok());
        assert!(ColumnStochastic::from_entries(DMatrix::from_element(2, 2, 0.7)).is_err());
    }

    #[test]
    fn push_diging_single_agent_is_gradient_descent() {
        let obj = QuadraticObjective::random(1, 2, 3, 9).unwrap();
        let c = push_sum_matrix(&DiGraph::new(1, []).unwrap());
        let params = PushDigingParams { step: 0.01 };
        let mut s = PushDigingState::initial(&obj).unwrap();
        for _ in 0..20 {
            let prev = s.z.clone();
            pushdiging_step(&mut s, &obj, &c, &params).unwrap();
            assert_eq!(s.w, vec![1.0]);
            let mut expected = prev.clone();
            expected.axpy(-params.step, &obj.gradient(&prev).unwrap());
            assert!(expected.distance(&s.z) < 1e-13);
        }
    }

    #[test]
    fn push_diging_symmetric_mixing_keeps_unit_weights() {
        let g = DiGraph::complete(4).unwrap();
        let c = ColumnStochastic::from_entries(DMatrix::from_element(4, 4, 0.25)).unwrap();
        let obj = QuadraticObjective::random(4, 2, 3, 1).unwrap();
        let _ = g;
        let mut s = PushDigingState::initial(&obj).unwrap();
        for _ in 0..10 {
            pushdiging_step(&mut s, &obj, &c, &PushDigingParams { step: 0.02 }).unwrap();
            assert!(s.w.iter().all(|&w| (w - 1.0).abs() < 1e-15));
            assert_eq!(s.z, s.u);
        }
    }

    #[test]
    fn push_diging_conserves_mass_and_tracks_gradient_mean() {
        let (g, _) = generate_strongly_connected(10, 0.4, 7, 100).unwrap();
        let c = push_sum_matrix(&g);
        let obj = QuadraticObjective::random(10, 3, 3, 2).unwrap();
        let mut s = PushDigingState::initial(&obj).unwrap();
        for _ in 0..200 {
            pushdiging_step(&mut s, &obj, &c, &PushDigingParams { step: 0.01 }).unwrap();
            let mass: f64 = s.w.iter().sum();
            assert!((mass - 10.0).abs() < 1e-10);
            let gm = obj.gradient(&s.z).unwrap().block_mean();
            let tm = s.t.block_mean();
            let gap: f64 = gm.iter().zip(&tm).map(|(a, b)| (a - b).abs()).sum();
            assert!(gap <= 1e-8 * (1.0 + s.t.norm()));
        }
        assert_eq!(s.comm_rounds, 400);
    }
}
