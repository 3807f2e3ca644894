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

//! Doubly stochastic weight matrices on a directed graph's support.
//!
//! Weights are nonnegative and built centrally by Sinkhorn scaling of
//! `I + adjacency`; the self-loops make the support primitive, so scaling
//! converges and the resulting consensus gap is strictly below one.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::digraph::DiGraph;
use crate::stacked::StackedVector;

pub const DEFAULT_TOL: f64 = 1e-13;
pub const DEFAULT_MAX_SWEEPS: usize = 1_000_000;
/// Row and column sums must be within this of one.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Matrices up to this size use a full SVD for the consensus gap.
pub const DENSE_DELTA_LIMIT: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("graph is not strongly connected; no doubly stochastic weights exist on its support")]
    NotStronglyConnected,
    #[error("scaling stalled after {sweeps} sweeps with deviation {deviation:e}")]
    NoConvergence { sweeps: usize, deviation: f64 },
    #[error("weight matrix is {rows}x{cols}, graph has {n} nodes")]
    DimensionMismatch { rows: usize, cols: usize, n: usize },
    #[error("malformed matrix text at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// An `n x n` mixing matrix together with the graph whose sparsity it obeys.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    entries: DMatrix<f64>,
    delta: f64,
    support: DiGraph,
}

impl WeightMatrix {
    /// Wraps arbitrary entries without checking them; see
    /// [`validate_mixing`].
    pub fn from_entries(entries: DMatrix<f64>, support: DiGraph) -> Result<Self, WeightError> {
        let n = support.n();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(WeightError::DimensionMismatch {
                rows: entries.nrows(),
                cols: entries.ncols(),
                n,
            });
        }
        let delta = compute_delta(&entries);
        Ok(Self {
            entries,
            delta,
            support,
        })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `‖W - 11ᵀ/n‖₂`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn support(&self) -> &DiGraph {
        &self.support
    }

    /// `out = W x`, acting blockwise on stacked vectors.
    pub fn mix_into(&self, x: &StackedVector, out: &mut StackedVector) {
        mix_dense(&self.entries, x, out);
    }

    /// `W^rounds x` computed as `rounds` successive one-hop exchanges.
    /// `scratch` must have the same shape as `x`.
    pub fn mix_rounds(&self, x: &StackedVector, rounds: usize, out: &mut StackedVector, scratch: &mut StackedVector) {
        out.copy_from(x);
        for _ in 0..rounds {
            mix_dense(&self.entries, out, scratch);
            std::mem::swap(out, scratch);
        }
    }

    /// Dense rows with 17 significant digits, one row per line.
    pub fn to_text(&self) -> String {
        matrix_to_text(&self.entries)
    }
}

/// `out_i = Σ_j M_ij x_j` on blocks.
pub fn mix_dense(matrix: &DMatrix<f64>, x: &StackedVector, out: &mut StackedVector) {
    let n = matrix.nrows();
    debug_assert_eq!(x.agents(), n);
    debug_assert!(x.same_shape(out));
    for i in 0..n {
        let dst = out.block_of_mut(i);
        dst.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let w = matrix[(i, j)];
            if w != 0.0 {
                for (d, s) in dst.iter_mut().zip(x.block_of(j)) {
                    *d += w * s;
                }
            }
        }
    }
}

pub fn matrix_to_text(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn matrix_from_text(text: &str) -> Result<DMatrix<f64>, WeightError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>().map_err(|_| WeightError::Parse {
                    line: no + 1,
                    reason: format!("bad number {s:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if let Some((no, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(WeightError::Parse {
            line: no + 1,
            reason: format!("expected {n} columns, found {}", r.len()),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Builds nonnegative doubly stochastic weights on `g`'s support (plus the
/// diagonal) by alternately normalizing rows and columns of `I + A`.
pub fn build_weight_matrix(g: &DiGraph, tol: f64) -> Result<WeightMatrix, WeightError> {
    build_weight_matrix_with_budget(g, tol, DEFAULT_MAX_SWEEPS)
}

pub fn build_weight_matrix_with_budget(
    g: &DiGraph,
    tol: f64,
    max_sweeps: usize,
) -> Result<WeightMatrix, WeightError> {
    if !g.is_strongly_connected() {
        return Err(WeightError::NotStronglyConnected);
    }
    let n = g.n();
    let mut w = DMatrix::<f64>::identity(n, n);
    for (i, j) in g.edges() {
        w[(i, j)] = 1.0;
    }
    let mut deviation = f64::INFINITY;
    for _ in 0..max_sweeps {
        for i in 0..n {
            let s: f64 = w.row(i).sum();
            w.row_mut(i).iter_mut().for_each(|v| *v /= s);
        }
        for j in 0..n {
            let s: f64 = w.column(j).sum();
            w.column_mut(j).iter_mut().for_each(|v| *v /= s);
        }
        deviation = stochastic_deviation(&w);
        if deviation < tol {
            return WeightMatrix::from_entries(w, g.clone());
        }
    }
    Err(WeightError::NoConvergence {
        sweeps: max_sweeps,
        deviation,
    })
}

/// Largest of the row-sum and column-sum deviations from one.
pub fn stochastic_deviation(w: &DMatrix<f64>) -> f64 {
    let rows = (0..w.nrows()).map(|i| (w.row(i).sum() - 1.0).abs());
    let cols = (0..w.ncols()).map(|j| (w.column(j).sum() - 1.0).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

fn minus_averaging(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    w - DMatrix::from_element(n, n, 1.0 / n as f64)
}

/// `‖W - 11ᵀ/n‖₂`: a full SVD up to [`DENSE_DELTA_LIMIT`], power iteration
/// above it.
pub fn compute_delta(w: &DMatrix<f64>) -> f64 {
    if w.nrows() <= DENSE_DELTA_LIMIT {
        spectral_norm(&minus_averaging(w))
    } else {
        compute_delta_power(w, 1e-15, 1_000_000)
    }
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Power iteration on `(W-J)ᵀ(W-J)` without forming it. Stops once the
/// Rayleigh estimate changes by less than `rel_tol` relative.
pub fn compute_delta_power(w: &DMatrix<f64>, rel_tol: f64, max_iter: usize) -> f64 {
    let n = w.nrows();
    let apply = |v: &DVector<f64>, transpose: bool| -> DVector<f64> {
        let mut out = if transpose { w.tr_mul(v) } else { w * v };
        let mean = v.sum() / n as f64;
        out.add_scalar_mut(-mean);
        out
    };
    // Deterministic start with nonzero components in every direction.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_749_895).fract());
    let mut estimate = 0.0f64;
    for _ in 0..max_iter {
        let u = apply(&v, false);
        let z = apply(&u, true);
        let norm = z.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = u.norm_squared() / v.norm_squared();
        v = z / norm;
        if (next - estimate).abs() <= rel_tol * next {
            return next.sqrt();
        }
        estimate = next;
    }
    estimate.sqrt()
}

/// Measured state of each weight-matrix property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingReport {
    /// Largest `|W_ij|` with `i != j` and `(i, j)` not an edge.
    pub off_support_max: f64,
    pub row_sum_deviation: f64,
    pub col_sum_deviation: f64,
    pub delta: f64,
    pub min_entry: f64,
    /// `‖W‖₂`, which must not exceed one.
    pub spectral_norm: f64,
}

impl MixingReport {
    pub fn support_ok(&self) -> bool {
        self.off_support_max == 0.0
    }

    pub fn stochastic_ok(&self) -> bool {
        self.row_sum_deviation < STOCHASTIC_TOL && self.col_sum_deviation < STOCHASTIC_TOL
    }

    pub fn contraction_ok(&self) -> bool {
        self.delta < 1.0
    }

    pub fn nonnegative_ok(&self) -> bool {
        self.min_entry >= 0.0
    }

    pub fn norm_ok(&self) -> bool {
        self.spectral_norm <= 1.0 + STOCHASTIC_TOL
    }

    pub fn all_pass(&self) -> bool {
        self.support_ok() && self.stochastic_ok() && self.contraction_ok() && self.nonnegative_ok() && self.norm_ok()
    }
}

pub fn validate_mixing(w: &WeightMatrix) -> MixingReport {
    let m = w.entries();
    let g = w.support();
    let n = m.nrows();
    let mut off_support_max = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j && !g.has_edge(i, j) {
                off_support_max = off_support_max.max(m[(i, j)].abs());
            }
        }
    }
    MixingReport {
        off_support_max,
        row_sum_deviation: (0..n).map(|i| (m.row(i).sum() - 1.0).abs()).fold(0.0, f64::max),
        col_sum_deviation: (0..n).map(|j| (m.column(j).sum() - 1.0).abs()).fold(0.0, f64::max),
        delta: w.delta(),
        min_entry: m.iter().copied().fold(f64::INFINITY, f64::min),
        spectral_norm: spectral_norm(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::generate_strongly_connected;
    use approx::assert_abs_diff_eq;

    /// `‖W - J‖₂` from the eigenvalues of `(W-J)ᵀ(W-J)`, a route independent
    /// of the SVD.
    fn eigen_oracle(w: &DMatrix<f64>) -> f64 {
        let d = minus_averaging(w);
        let gram = d.transpose() * &d;
        gram.symmetric_eigenvalues().max().max(0.0).sqrt()
    }

    #[test]
    fn complete_graph_gives_exact_averaging() {
        let g = DiGraph::complete(4).unwrap();
        let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
        for v in w.entries().iter() {
            assert_eq!(*v, 0.25);
        }
        assert_abs_diff_eq!(w.delta(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn directed_cycle_gap_matches_circulant_spectrum() {
        // W = (I+P)/2 is normal with eigenvalues (1+ω^k)/2, ω = e^{2πi/4}.
        // Excluding k = 0, the largest modulus is |1+i|/2.
        let oracle = (1..4)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 4.0;
                ((1.0 + t.cos()).powi(2) + t.sin().powi(2)).sqrt() / 2.0
            })
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(oracle, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);

        let g = DiGraph::cycle(4).unwrap();
        let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
        for i in 0..4 {
            assert_eq!(w.entries()[(i, i)], 0.5);
            assert_eq!(w.entries()[((i + 1) % 4, i)], 0.5);
        }
        assert_abs_diff_eq!(w.delta(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn single_agent() {
        let g = DiGraph::new(1, []).unwrap();
        let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
        assert_eq!(w.entries()[(0, 0)], 1.0);
        assert_eq!(w.delta(), 0.0);
    }

    #[test]
    fn identity_has_unit_gap_and_fails_validation() {
        let g = DiGraph::complete(3).unwrap();
        assert_abs_diff_eq!(compute_delta(&DMatrix::identity(3, 3)), 1.0, epsilon = 1e-14);
        let w = WeightMatrix::from_entries(DMatrix::identity(3, 3), g).unwrap();
        let report = validate_mixing(&w);
        assert!(!report.contraction_ok());
        assert!(report.support_ok() && report.stochastic_ok());
    }

    #[test]
    fn off_support_entry_fails_property_one() {
        let g = DiGraph::cycle(3).unwrap();
        let mut w = build_weight_matrix(&g, DEFAULT_TOL).unwrap().entries().clone();
        // (0, 1) is not an edge of 0 -> 1 -> 2 -> 0.
        assert!(!g.has_edge(0, 1));
        w[(0, 1)] = 0.1;
        w[(0, 0)] -= 0.1;
        let report = validate_mixing(&WeightMatrix::from_entries(w, g).unwrap());
        assert!(!report.support_ok());
        assert_abs_diff_eq!(report.off_support_max, 0.1);
    }

    #[test]
    fn rejects_disconnected_support() {
        let g = DiGraph::new(2, [(1, 0)]).unwrap();
        assert_eq!(build_weight_matrix(&g, DEFAULT_TOL), Err(WeightError::NotStronglyConnected));
    }

    #[test]
    fn exhausted_budget_reports_no_convergence() {
        let (g, _) = generate_strongly_connected(8, 0.3, 5, 100).unwrap();
        assert!(matches!(
            build_weight_matrix_with_budget(&g, 1e-30, 3),
            Err(WeightError::NoConvergence { sweeps: 3, .. })
        ));
    }

    #[test]
    fn random_graphs_satisfy_all_properties() {
        for seed in 0..20 {
            let (g, _) = generate_strongly_connected(10, 0.3, seed, 1000).unwrap();
            let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
            let report = validate_mixing(&w);
            assert!(report.all_pass(), "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn delta_agrees_with_eigen_oracle() {
        for (n, seed) in [(3, 1), (5, 2), (12, 3), (20, 4)] {
            let (g, _) = generate_strongly_connected(n, 0.35, seed, 1000).unwrap();
            let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
            assert_abs_diff_eq!(w.delta(), eigen_oracle(w.entries()), epsilon = 1e-10);
        }
    }

    #[test]
    fn power_iteration_matches_svd() {
        for seed in 0..5 {
            let (g, _) = generate_strongly_connected(15, 0.3, seed, 1000).unwrap();
            let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
            let power = compute_delta_power(w.entries(), 1e-15, 1_000_000);
            assert_abs_diff_eq!(power, w.delta(), epsilon = 1e-8);
        }
    }

    #[test]
    fn contraction_holds_for_powers() {
        let (g, _) = generate_strongly_connected(10, 0.4, 11, 1000).unwrap();
        let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
        let mut rng = crate::rng::seeded(99);
        use rand::Rng;
        let mut out = StackedVector::zeros(10, 2);
        let mut scratch = out.clone();
        for _ in 0..20 {
            let x = StackedVector::from_vec((0..20).map(|_| rng.random_range(-1.0..1.0)).collect(), 2);
            let perp = x.disagreement();
            for b in 1..=10 {
                w.mix_rounds(&x, b, &mut out, &mut scratch);
                let lhs = out.distance(&x.consensus_projection());
                assert!(lhs <= w.delta().powi(b as i32) * perp.norm() + 1e-12);
            }
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let (g, _) = generate_strongly_connected(6, 0.4, 2, 1000).unwrap();
        let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
        let back = matrix_from_text(&w.to_text()).unwrap();
        assert_eq!(&back, w.entries());
        assert!(matrix_from_text("1 2\n3\n").is_err());
    }
}
