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

//! Loading or generating the (graph, objective) pair every algorithm runs on.

use std::path::PathBuf;

use diradmm::baselines::{push_sum_matrix, ColumnStochastic};
use diradmm::digraph::{generate_strongly_connected, DiGraph};
use diradmm::objective::{Objective, Optimum, QuadraticObjective};
use diradmm::weights::{build_weight_matrix, WeightMatrix, DEFAULT_TOL};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{read_to_string, HarnessError};

/// Redraws allowed while searching for a strongly connected graph.
pub const GRAPH_ATTEMPTS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSpec {
    File { path: PathBuf },
    Random { n: usize, p: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObjectiveSpec {
    File {
        path: PathBuf,
    },
    /// Agent count comes from the graph.
    Random {
        m: usize,
        p_rows: usize,
        seed: u64,
    },
}

/// Everything a run needs, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: DiGraph,
    /// Seed that produced the graph when it was generated.
    pub graph_seed: Option<u64>,
    pub objective: QuadraticObjective,
    pub weights: WeightMatrix,
    pub push: ColumnStochastic,
    pub reference: Optimum,
}

impl Instance {
    pub fn new(graph: DiGraph, objective: QuadraticObjective, weight_tol: f64) -> Result<Self, HarnessError> {
        if graph.n() != objective.agents() {
            return Err(HarnessError::Config(format!(
                "graph has {} nodes but objective has {} agents",
                graph.n(),
                objective.agents()
            )));
        }
        let weights = build_weight_matrix(&graph, weight_tol)?;
        let push = push_sum_matrix(&graph);
        let reference = objective.centralized_solve()?;
        Ok(Self {
            graph,
            graph_seed: None,
            objective,
            weights,
            push,
            reference,
        })
    }

    pub fn from_specs(graph: &GraphSpec, objective: &ObjectiveSpec, weight_tol: f64) -> Result<Self, HarnessError> {
        let (g, seed) = load_graph(graph)?;
        let obj = match objective {
            ObjectiveSpec::File { path } => QuadraticObjective::from_json(&read_to_string(path)?)?,
            ObjectiveSpec::Random { m, p_rows, seed } => QuadraticObjective::random(g.n(), *m, *p_rows, *seed)?,
        };
        let mut inst = Self::new(g, obj, weight_tol)?;
        inst.graph_seed = seed;
        Ok(inst)
    }

    /// SHA-256 over the serialized graph and objective.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.graph.to_edge_list().as_bytes());
        h.update(self.objective.to_json().as_bytes());
        hex::encode(h.finalize())
    }

    pub fn weights_hash(&self) -> String {
        hex::encode(Sha256::digest(self.weights.to_text().as_bytes()))
    }
}

pub fn load_graph(spec: &GraphSpec) -> Result<(DiGraph, Option<u64>), HarnessError> {
    match spec {
        GraphSpec::File { path } => Ok((DiGraph::from_edge_list(&read_to_string(path)?)?, None)),
        GraphSpec::Random { n, p, seed } => {
            let (g, used) = generate_strongly_connected(*n, *p, *seed, GRAPH_ATTEMPTS)?;
            Ok((g, Some(used)))
        }
    }
}

pub fn default_weight_tol() -> f64 {
    DEFAULT_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_instance_is_deterministic() {
        let g = GraphSpec::Random { n: 6, p: 0.4, seed: 3 };
        let o = ObjectiveSpec::Random { m: 2, p_rows: 3, seed: 9 };
        let a = Instance::from_specs(&g, &o, DEFAULT_TOL).unwrap();
        let b = Instance::from_specs(&g, &o, DEFAULT_TOL).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.weights_hash(), b.weights_hash());
        assert!(a.graph.is_strongly_connected());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let g = DiGraph::cycle(3).unwrap();
        let o = QuadraticObjective::random(4, 1, 2, 0).unwrap();
        assert!(matches!(Instance::new(g, o, DEFAULT_TOL), Err(HarnessError::Config(_))));
    }
}
