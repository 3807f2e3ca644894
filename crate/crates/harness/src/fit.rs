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

//! Empirical linear-rate estimate from a residual trace.

use diradmm::trace::ConvergenceTrace;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_ROWS: usize = 10;
/// Normalized fit residual above which a trace is flagged as not geometric.
/// A `1/k` trace sits near 0.039 at any length.
pub const NON_GEOMETRIC_THRESHOLD: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {MIN_ROWS} rows with positive finite residual, got {0}")]
    InsufficientData(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub lambda_hat: f64,
    /// Least-squares slope of `ln r` against `k`.
    pub slope: f64,
    /// RMS residual divided by the spread of `ln r` over the fit window.
    pub residual: f64,
    pub non_geometric: bool,
    pub rows_used: usize,
}

/// Fits `ln r_k ≈ ln c + k ln λ̂` over the final two-thirds of `(k, r_k)`.
pub fn fit_points(points: &[(f64, f64)]) -> Result<RateFit, FitError> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, r)| r.is_finite() && *r > 0.0)
        .map(|&(k, r)| (k, r.ln()))
        .collect();
    if usable.len() < MIN_ROWS {
        return Err(FitError::InsufficientData(usable.len()));
    }
    let window = &usable[usable.len() / 3..];
    let n = window.len() as f64;
    let mean_k = window.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = window.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = window.iter().map(|p| (p.0 - mean_k).powi(2)).sum();
    let sxy: f64 = window.iter().map(|p| (p.0 - mean_k) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_k;
    let rms = (window
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let (lo, hi) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let residual = if hi > lo { rms / (hi - lo) } else { 0.0 };
    Ok(RateFit {
        lambda_hat: slope.exp(),
        slope,
        residual,
        non_geometric: residual > NON_GEOMETRIC_THRESHOLD,
        rows_used: window.len(),
    })
}

/// Rate per iteration from the primal residual column.
pub fn fit_rate(trace: &ConvergenceTrace) -> Result<RateFit, FitError> {
    let points: Vec<(f64, f64)> = trace.rows.iter().map(|r| (r.iter as f64, r.primal_res)).collect();
    fit_points(&points)
}
