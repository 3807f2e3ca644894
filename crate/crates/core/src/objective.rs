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

//! Separable convex objectives `f(x) = Σ_i f_i(x_i)`.
//!
//! [`QuadraticObjective`] implements least-squares terms
//! `f_i(x_i) = ‖H_i x_i − g_i‖²`; every subproblem the algorithms need has a
//! closed form, so no inner iterative solver is involved.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::stacked::StackedVector;

/// Eigenvalues at or below this fraction of the block's largest eigenvalue
/// are treated as exact zeros.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("dimension mismatch: expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("penalty parameter must be positive, got {0}")]
    NonPositiveRho(f64),
    #[error("aggregate normal matrix is singular; the consensus minimizer is not unique")]
    SingularSystem,
    #[error("agent {agent} has a singular Hessian; argmin f_i(x) + aᵀx is not attained")]
    SingularBlock { agent: usize },
    #[error("inconsistent instance: {0}")]
    Inconsistent(String),
    #[error("objective file: {0}")]
    Serde(String),
}

/// Strong convexity modulus and gradient Lipschitz constant of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub mu: f64,
    pub l: f64,
}

impl Constants {
    pub fn condition_number(&self) -> f64 {
        self.l / self.mu
    }
}

/// How the dual-ascent primal step handles a block whose Hessian is singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularPolicy {
    /// Fail with [`ObjectiveError::SingularBlock`].
    #[default]
    Reject,
    /// Use the minimum-norm solution of the stationarity equation.
    MinNorm,
}

/// Primal-dual optimum of the consensus problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    /// The common minimizer `z*`, an `m`-vector.
    pub consensus: Vec<f64>,
    /// `z*` replicated into every block.
    pub x_star: StackedVector,
    /// `a* = −∇f(x*)`; its block mean is zero.
    pub a_star: StackedVector,
}

/// Contract the distributed algorithms rely on.
pub trait Objective {
    fn agents(&self) -> usize;

    fn block_dim(&self) -> usize;

    fn eval(&self, x: &StackedVector) -> Result<f64, ObjectiveError>;

    fn gradient_into(&self, x: &StackedVector, out: &mut StackedVector) -> Result<(), ObjectiveError>;

    /// `out = argmin_x f(x) + aᵀx + (ρ/2)‖x − y‖²`, blockwise.
    fn x_update_into(
        &self,
        a: &StackedVector,
        y: &StackedVector,
        rho: f64,
        out: &mut StackedVector,
    ) -> Result<(), ObjectiveError>;

    /// `out = argmin_x f(x) + aᵀx`, blockwise.
    fn dual_update_into(
        &self,
        a: &StackedVector,
        policy: SingularPolicy,
        out: &mut StackedVector,
    ) -> Result<(), ObjectiveError>;

    fn constants(&self) -> Constants;

    fn centralized_solve(&self) -> Result<Optimum, ObjectiveError>;

    fn zeros(&self) -> StackedVector {
        StackedVector::zeros(self.agents(), self.block_dim())
    }

    fn gradient(&self, x: &StackedVector) -> Result<StackedVector, ObjectiveError> {
        let mut out = self.zeros();
        self.gradient_into(x, &mut out)?;
        Ok(out)
    }

    fn x_update(&self, a: &StackedVector, y: &StackedVector, rho: f64) -> Result<StackedVector, ObjectiveError> {
        let mut out = self.zeros();
        self.x_update_into(a, y, rho, &mut out)?;
        Ok(out)
    }

    fn dual_update(&self, a: &StackedVector, policy: SingularPolicy) -> Result<StackedVector, ObjectiveError> {
        let mut out = self.zeros();
        self.dual_update_into(a, policy, &mut out)?;
        Ok(out)
    }
}

#[derive(Debug, Clone)]
struct AgentTerm {
    h: DMatrix<f64>,
    g: DVector<f64>,
    /// `HᵀH`
    normal: DMatrix<f64>,
    /// `Hᵀg`
    ht_g: DVector<f64>,
    eig_min: f64,
    eig_max: f64,
    /// `(2HᵀH)⁺`
    dual_map: DMatrix<f64>,
    singular: bool,
}

impl AgentTerm {
    fn new(h: DMatrix<f64>, g: DVector<f64>) -> Self {
        let normal = h.transpose() * &h;
        let ht_g = h.transpose() * &g;
        let m = normal.nrows();
        let eig = normal.clone().symmetric_eigen();
        let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let cutoff = RANK_TOL * top.max(f64::MIN_POSITIVE);
        let clean = |v: f64| if v <= cutoff { 0.0 } else { v };
        let eig_min = eig.eigenvalues.iter().copied().map(clean).fold(f64::INFINITY, f64::min);
        let mut dual_map = DMatrix::zeros(m, m);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > cutoff {
                let v = eig.eigenvectors.column(k);
                dual_map += (v * v.transpose()) / (2.0 * lambda);
            }
        }
        Self {
            singular: eig_min == 0.0,
            h,
            g,
            normal,
            ht_g,
            eig_min,
            eig_max: top,
            dual_map,
        }
    }
}

/// `f(x) = Σ_i ‖H_i x_i − g_i‖²` with `H_i ∈ ℝ^{p×m}`, `g_i ∈ ℝ^p`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    m: usize,
    p: usize,
    terms: Vec<AgentTerm>,
    constants: Constants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentData {
    /// `H_i` in row-major order.
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

/// On-disk form of a quadratic instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveFile {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub agents: Vec<AgentData>,
}

impl QuadraticObjective {
    pub fn new(m: usize, blocks: Vec<(DMatrix<f64>, DVector<f64>)>) -> Result<Self, ObjectiveError> {
        let Some((h0, _)) = blocks.first() else {
            return Err(ObjectiveError::Inconsistent("no agents".into()));
        };
        let p = h0.nrows();
        if m == 0 || p == 0 {
            return Err(ObjectiveError::Inconsistent("empty blocks".into()));
        }
        for (i, (h, g)) in blocks.iter().enumerate() {
            if h.nrows() != p || h.ncols() != m || g.len() != p {
                return Err(ObjectiveError::Inconsistent(format!(
                    "agent {i}: H is {}x{}, g has {} entries; expected {p}x{m} and {p}",
                    h.nrows(),
                    h.ncols(),
                    g.len()
                )));
            }
        }
        let terms: Vec<AgentTerm> = blocks.into_iter().map(|(h, g)| AgentTerm::new(h, g)).collect();
        let mu = 2.0 * terms.iter().map(|t| t.eig_min).fold(f64::INFINITY, f64::min);
        let l = 2.0 * terms.iter().map(|t| t.eig_max).fold(0.0, f64::max);
        Ok(Self {
            m,
            p,
            terms,
            constants: Constants { mu, l },
        })
    }

    /// Entries of every `H_i` then `g_i`, agent by agent, i.i.d. standard
    /// normal.
    pub fn random(n: usize, m: usize, p: usize, seed: u64) -> Result<Self, ObjectiveError> {
        let mut rng = rng::seeded(seed);
        let mut blocks = Vec::with_capacity(n);
        for _ in 0..n {
            let h = DMatrix::from_row_iterator(p, m, (0..p * m).map(|_| StandardNormal.sample(&mut rng)));
            let g = DVector::from_iterator(p, (0..p).map(|_| StandardNormal.sample(&mut rng)));
            blocks.push((h, g));
        }
        Self::new(m, blocks)
    }

    pub fn rows(&self) -> usize {
        self.p
    }

    pub fn h(&self, agent: usize) -> &DMatrix<f64> {
        &self.terms[agent].h
    }

    pub fn g(&self, agent: usize) -> &DVector<f64> {
        &self.terms[agent].g
    }

    /// `H_iᵀH_i`.
    pub fn normal(&self, agent: usize) -> &DMatrix<f64> {
        &self.terms[agent].normal
    }

    pub fn has_singular_block(&self) -> bool {
        self.terms.iter().any(|t| t.singular)
    }

    pub fn to_file(&self) -> ObjectiveFile {
        ObjectiveFile {
            n: self.terms.len(),
            m: self.m,
            p: self.p,
            agents: self
                .terms
                .iter()
                .map(|t| AgentData {
                    h: t.h.transpose().as_slice().to_vec(),
                    g: t.g.as_slice().to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &ObjectiveFile) -> Result<Self, ObjectiveError> {
        if file.agents.len() != file.n {
            return Err(ObjectiveError::Inconsistent(format!(
                "header says {} agents, found {}",
                file.n,
                file.agents.len()
            )));
        }
        let blocks = file
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if a.h.len() != file.p * file.m || a.g.len() != file.p {
                    return Err(ObjectiveError::Inconsistent(format!("agent {i} has wrong sizes")));
                }
                Ok((
                    DMatrix::from_row_slice(file.p, file.m, &a.h),
                    DVector::from_column_slice(&a.g),
                ))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(file.m, blocks)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("objective serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ObjectiveError> {
        let file: ObjectiveFile = serde_json::from_str(text).map_err(|e| ObjectiveError::Serde(e.to_string()))?;
        Self::from_file(&file)
    }

    fn check(&self, x: &StackedVector) -> Result<(), ObjectiveError> {
        let expected = self.terms.len() * self.m;
        if x.len() != expected || x.block_dim() != self.m {
            return Err(ObjectiveError::DimensionMismatch {
                expected,
                found: x.len(),
            });
        }
        Ok(())
    }
}

impl Objective for QuadraticObjective {
    fn agents(&self) -> usize {
        self.terms.len()
    }

    fn block_dim(&self) -> usize {
        self.m
    }

    fn eval(&self, x: &StackedVector) -> Result<f64, ObjectiveError> {
        self.check(x)?;
        Ok(self
            .terms
            .iter()
            .zip(x.blocks())
            .map(|(t, xi)| (&t.h * DVector::from_column_slice(xi) - &t.g).norm_squared())
            .sum())
    }

    fn gradient_into(&self, x: &StackedVector, out: &mut StackedVector) -> Result<(), ObjectiveError> {
        self.check(x)?;
        self.check(out)?;
        for (i, t) in self.terms.iter().enumerate() {
            let xi = DVector::from_column_slice(x.block_of(i));
            let grad = 2.0 * (&t.normal * xi - &t.ht_g);
            out.block_of_mut(i).copy_from_slice(grad.as_slice());
        }
        Ok(())
    }

    /// Block `i` solves `(2HᵢᵀHᵢ + ρI) xᵢ = 2Hᵢᵀgᵢ − aᵢ + ρyᵢ` by Cholesky.
    fn x_update_into(
        &self,
        a: &StackedVector,
        y: &StackedVector,
        rho: f64,
        out: &mut StackedVector,
    ) -> Result<(), ObjectiveError> {
        if !(rho > 0.0) {
            return Err(ObjectiveError::NonPositiveRho(rho));
        }
        self.check(a)?;
        self.check(y)?;
        self.check(out)?;
        for (i, t) in self.terms.iter().enumerate() {
            let mut lhs = 2.0 * &t.normal;
            for d in 0..self.m {
                lhs[(d, d)] += rho;
            }
            let rhs = 2.0 * &t.ht_g - DVector::from_column_slice(a.block_of(i))
                + rho * DVector::from_column_slice(y.block_of(i));
            let solution = lhs
                .cholesky()
                .expect("2HᵀH + ρI is positive definite for ρ > 0")
                .solve(&rhs);
            out.block_of_mut(i).copy_from_slice(solution.as_slice());
        }
        Ok(())
    }

    fn dual_update_into(
        &self,
        a: &StackedVector,
        policy: SingularPolicy,
        out: &mut StackedVector,
    ) -> Result<(), ObjectiveError> {
        self.check(a)?;
        self.check(out)?;
        for (i, t) in self.terms.iter().enumerate() {
            if t.singular && policy == SingularPolicy::Reject {
                return Err(ObjectiveError::SingularBlock { agent: i });
            }
            let rhs = 2.0 * &t.ht_g - DVector::from_column_slice(a.block_of(i));
            let solution = &t.dual_map * rhs;
            out.block_of_mut(i).copy_from_slice(solution.as_slice());
        }
        Ok(())
    }

    fn constants(&self) -> Constants {
        self.constants
    }

    /// Solves `(Σ 2HᵢᵀHᵢ) z = Σ 2Hᵢᵀgᵢ`, then recovers `a* = −∇f(x*)`.
    fn centralized_solve(&self) -> Result<Optimum, ObjectiveError> {
        let m = self.m;
        let mut lhs = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        for t in &self.terms {
            lhs += 2.0 * &t.normal;
            rhs += 2.0 * &t.ht_g;
        }
        let eig = lhs.clone().symmetric_eigenvalues();
        let top = eig.max();
        if !(eig.min() > RANK_TOL * top) {
            return Err(ObjectiveError::SingularSystem);
        }
        let z = lhs.cholesky().ok_or(ObjectiveError::SingularSystem)?.solve(&rhs);
        let consensus = z.as_slice().to_vec();
        let x_star = StackedVector::replicate(&consensus, self.agents());
        let a_star = self.gradient(&x_star)?.scaled(-1.0);
        Ok(Optimum {
            consensus,
            x_star,
            a_star,
        })
    }
}
