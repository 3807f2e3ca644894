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

//! Directed communication graphs.
//!
//! Edges follow the receiver-first convention used throughout the crate: the
//! pair `(i, j)` means agent `j` sends to agent `i`. A weight matrix entry
//! `W[i][j]` may therefore be nonzero only when `(i, j)` is an edge (or
//! `i == j`).

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("node index {index} out of range for graph with {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("self-pair ({0}, {0}) is not a valid edge")]
    SelfLoop(usize),
    #[error("edge probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("no strongly connected draw after {attempts} seeds starting at {first_seed}")]
    NoStronglyConnectedDraw { first_seed: u64, attempts: u64 },
    #[error("malformed edge list at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// A directed graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    in_adj: Vec<Vec<usize>>,
    out_adj: Vec<Vec<usize>>,
}

impl DiGraph {
    /// Builds a graph from `(receiver, sender)` pairs. Duplicate pairs collapse.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            for index in [i, j] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { index, n });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            set.insert((i, j));
        }
        let mut in_adj = vec![Vec::new(); n];
        let mut out_adj = vec![Vec::new(); n];
        for &(i, j) in &set {
            in_adj[i].push(j);
            out_adj[j].push(i);
        }
        Ok(Self {
            n,
            edges: set,
            in_adj,
            out_adj,
        })
    }

    /// Every ordered pair `i != j`.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        Self::new(
            n,
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))),
        )
    }

    /// The directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Self::new(n, std::iter::empty());
        }
        Self::new(n, (0..n).map(|j| ((j + 1) % n, j)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(receiver, sender)` pairs in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    /// All `j` with `(i, j)` an edge, i.e. the agents `i` listens to.
    pub fn in_neighbors(&self, i: usize) -> Result<&[usize], GraphError> {
        self.check(i)?;
        Ok(&self.in_adj[i])
    }

    /// All `i` with `(i, j)` an edge, i.e. the agents `j` sends to.
    pub fn out_neighbors(&self, j: usize) -> Result<&[usize], GraphError> {
        self.check(j)?;
        Ok(&self.out_adj[j])
    }

    pub fn out_degree(&self, j: usize) -> Result<usize, GraphError> {
        self.check(j)?;
        Ok(self.out_adj[j].len())
    }

    pub fn in_degree(&self, i: usize) -> Result<usize, GraphError> {
        self.check(i)?;
        Ok(self.in_adj[i].len())
    }

    fn check(&self, index: usize) -> Result<(), GraphError> {
        if index < self.n {
            Ok(())
        } else {
            Err(GraphError::IndexOutOfRange { index, n: self.n })
        }
    }

    /// True iff every node reaches every other node.
    ///
    /// Node 0 must reach everything along out-edges and be reached by
    /// everything, i.e. reach everything along in-edges.
    pub fn is_strongly_connected(&self) -> bool {
        reaches_all(&self.out_adj) && reaches_all(&self.in_adj)
    }

    /// Edge-list text: a header line with `n`, then one `i j` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(no, l)| (no + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            reason: "missing node count".into(),
        })?;
        let n: usize = header.parse().map_err(|_| GraphError::Parse {
            line,
            reason: format!("expected node count, found {header:?}"),
        })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| GraphError::Parse {
                    line,
                    reason: format!("bad index {s:?}"),
                })
            };
            match parts.as_slice() {
                [i, j] => edges.push((parse(i)?, parse(j)?)),
                _ => {
                    return Err(GraphError::Parse {
                        line,
                        reason: "expected two indices".into(),
                    })
                }
            }
        }
        Self::new(n, edges)
    }
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == n
}

/// Includes each ordered pair `(i, j)`, `i != j`, independently with
/// probability `p`. Pairs are visited in row-major order so the result is a
/// pure function of `(n, p, seed)`.
pub fn generate_random_digraph(n: usize, p: f64, seed: u64) -> Result<DiGraph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut rng = rng::seeded(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    DiGraph::new(n, edges)
}

/// Draws with `seed, seed + 1, ...` until the graph is strongly connected.
/// Returns the graph together with the seed that produced it.
pub fn generate_strongly_connected(
    n: usize,
    p: f64,
    seed: u64,
    max_attempts: u64,
) -> Result<(DiGraph, u64), GraphError> {
    for offset in 0..max_attempts {
        let s = seed.wrapping_add(offset);
        let g = generate_random_digraph(n, p, s)?;
        if g.is_strongly_connected() {
            return Ok((g, s));
        }
    }
    Err(GraphError::NoStronglyConnectedDraw {
        first_seed: seed,
        attempts: max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Transitive closure by repeated relaxation.
    fn brute_force_strong(g: &DiGraph) -> bool {
        let n = g.n();
        let mut reach = vec![vec![false; n]; n];
        for (v, row) in reach.iter_mut().enumerate() {
            row[v] = true;
        }
        for (i, j) in g.edges() {
            reach[j][i] = true;
        }
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if reach[a][k] && reach[k][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
        reach.iter().all(|row| row.iter().all(|&r| r))
    }

    #[test]
    fn single_node_has_no_edges() {
        let g = generate_random_digraph(1, 0.9, 0).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn probability_one_gives_all_pairs() {
        let g = generate_random_digraph(3, 1.0, 7).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g, DiGraph::complete(3).unwrap());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_random_digraph(10, 0.4, 42).unwrap();
        let b = generate_random_digraph(10, 0.4, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_random_digraph(10, 0.4, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn edge_count_tracks_probability() {
        // 200 draws of 90 pairs at p = 0.4: mean 36 edges.
        let total: usize = (0..200)
            .map(|s| generate_random_digraph(10, 0.4, s).unwrap().edge_count())
            .sum();
        let mean = total as f64 / 200.0;
        assert!((mean - 36.0).abs() < 1.0, "mean edges {mean}");
    }

    #[test]
    fn connectivity_examples() {
        assert!(DiGraph::cycle(3).unwrap().is_strongly_connected());
        let one_way = DiGraph::new(2, [(1, 0)]).unwrap();
        assert!(!one_way.is_strongly_connected());
        assert!(DiGraph::complete(4).unwrap().is_strongly_connected());
    }

    #[test]
    fn neighbors_and_degrees() {
        let c = DiGraph::cycle(3).unwrap();
        assert_eq!(c.in_neighbors(1).unwrap(), &[0]);
        assert_eq!(c.out_degree(0).unwrap(), 1);
        let k = DiGraph::complete(4).unwrap();
        for j in 0..4 {
            assert_eq!(k.out_degree(j).unwrap(), 3);
        }
        assert!(matches!(
            c.in_neighbors(3),
            Err(GraphError::IndexOutOfRange { index: 3, n: 3 })
        ));
        assert!(c.out_degree(9).is_err());
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(DiGraph::new(3, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert!(DiGraph::new(3, [(0, 3)]).is_err());
        assert_eq!(DiGraph::new(0, []), Err(GraphError::Empty));
        assert!(generate_random_digraph(3, 1.5, 0).is_err());
    }

    #[test]
    fn strongly_connected_graphs_have_in_and_out_edges() {
        for seed in 0..50 {
            let (g, _) = generate_strongly_connected(8, 0.3, seed, 1000).unwrap();
            for v in 0..g.n() {
                assert!(g.in_degree(v).unwrap() >= 1);
                assert!(g.out_degree(v).unwrap() >= 1);
            }
        }
    }

    #[test]
    fn agrees_with_brute_force_on_small_graphs() {
        for n in 1..=6 {
            for seed in 0..150 {
                let p = [0.15, 0.3, 0.5][seed as usize % 3];
                let g = generate_random_digraph(n, p, seed).unwrap();
                assert_eq!(g.is_strongly_connected(), brute_force_strong(&g), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = generate_random_digraph(7, 0.4, 3).unwrap();
        let text = g.to_edge_list();
        assert!(text.starts_with("7\n"));
        assert_eq!(DiGraph::from_edge_list(&text).unwrap(), g);
        assert!(DiGraph::from_edge_list("3\n0 1 2\n").is_err());
        assert!(DiGraph::from_edge_list("").is_err());
    }
}
