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

//! Parameter bounds that certify geometric convergence of distributed ADMM,
//! and λ-weighted norm diagnostics over recorded runs.
//!
//! For a target rate `λ ∈ (0, 1)` and a free constant `β > 0`, define
//!
//! ```text
//! c₃ = 1/√(2L(1/β + 1/μ))
//! c₁ = (λ+1)/(λμ − ρ(λ+1))
//! c₂ = 1 + ρ/L − 1/λ² − ρ³c₁²(1/β + 1/μ)
//! γ₁ = 1/μ,  γ₂ = δᴮ,  γ₃ = (1 + ρc₁)√(ρ(L+β)/c₂)
//! ```
//!
//! `λ` is admissible when `2L(1/λ² − 1) < c₃λμ/((c₃+1)(λ+1))`; `ρ` must lie
//! strictly between those two quantities, and `B` must make the small-gain
//! product `γ₁γ₂γ₃` fall below one.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective::Optimum;
use crate::stacked::StackedVector;

/// Slack allowed when comparing measured λ-norms against exact bounds.
pub const DIAGNOSTIC_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("strong convexity modulus is zero; the rate certificate does not apply")]
    StrongConvexityRequired,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no admissible penalty: interval ({lo}, {hi}) is empty")]
    Infeasible { lo: f64, hi: f64 },
    #[error("consensus gap δ = {0} is not below one")]
    AssumptionViolated(f64),
}

fn check_inputs(mu: f64, l: f64, beta: f64) -> Result<(), TheoryError> {
    if mu == 0.0 {
        return Err(TheoryError::StrongConvexityRequired);
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(TheoryError::InvalidInput(format!("mu = {mu}")));
    }
    if !(l >= mu && l.is_finite()) {
        return Err(TheoryError::InvalidInput(format!("L = {l} must be at least mu = {mu}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(TheoryError::InvalidInput(format!("beta = {beta}")));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<(), TheoryError> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(TheoryError::InvalidInput(format!("lambda = {lambda} outside (0, 1)")))
    }
}

pub fn c3(mu: f64, l: f64, beta: f64) -> f64 {
    1.0 / (2.0 * l * (1.0 / beta + 1.0 / mu)).sqrt()
}

/// The two sides of the rate condition, which are also the ends of the
/// penalty interval: `(2L(1/λ² − 1), c₃λμ/((c₃+1)(λ+1)))`.
fn bounds(mu: f64, l: f64, beta: f64, lambda: f64) -> (f64, f64) {
    let c3 = c3(mu, l, beta);
    let lo = 2.0 * l * (1.0 / (lambda * lambda) - 1.0);
    let hi = c3 * lambda * mu / ((c3 + 1.0) * (lambda + 1.0));
    (lo, hi)
}

pub fn lambda_feasible(mu: f64, l: f64, beta: f64, lambda: f64) -> Result<bool, TheoryError> {
    check_inputs(mu, l, beta)?;
    check_lambda(lambda)?;
    let (lo, hi) = bounds(mu, l, beta, lambda);
    Ok(lo < hi)
}

/// Open interval of admissible penalty parameters.
pub fn rho_interval(mu: f64, l: f64, beta: f64, lambda: f64) -> Result<(f64, f64), TheoryError> {
    check_inputs(mu, l, beta)?;
    check_lambda(lambda)?;
    let (lo, hi) = bounds(mu, l, beta, lambda);
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(TheoryError::Infeasible { lo, hi })
    }
}

/// Infimum of the admissible rates. The left side of the rate condition
/// decreases in `λ` and the right side increases, so the admissible set is
/// the interval `(λ*, 1)`; `λ*` is located by bisection.
pub fn lambda_threshold(mu: f64, l: f64, beta: f64) -> Result<f64, TheoryError> {
    check_inputs(mu, l, beta)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (left, right) = bounds(mu, l, beta, mid);
        if left < right {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest `B ≥ 1` with `B ≥ ⌈log(γ₁γ₃)/log(1/δ)⌉` and `γ₁δᴮγ₃ < 1`.
/// The second condition only bites when the logarithm ratio is an exact
/// integer, where the ceiling alone gives a product of exactly one.
pub fn min_rounds(gamma1: f64, gamma3: f64, delta: f64) -> Result<usize, TheoryError> {
    if !(gamma1 > 0.0 && gamma3 > 0.0) || !gamma1.is_finite() || !gamma3.is_finite() {
        return Err(TheoryError::InvalidInput(format!("gains {gamma1}, {gamma3}")));
    }
    if !(delta >= 0.0) {
        return Err(TheoryError::InvalidInput(format!("delta = {delta}")));
    }
    if delta >= 1.0 {
        return Err(TheoryError::AssumptionViolated(delta));
    }
    if delta == 0.0 {
        return Ok(1);
    }
    let ratio = (gamma1 * gamma3).ln() / (1.0 / delta).ln();
    let mut b = if ratio <= 1.0 { 1 } else { ratio.ceil() as usize };
    while gamma1 * delta.powi(b as i32) * gamma3 >= 1.0 {
        b += 1;
    }
    Ok(b)
}

/// All constants of the rate certificate for one parameter choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub lambda: f64,
    pub beta: f64,
    pub mu: f64,
    pub l: f64,
    pub rho: f64,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub gamma1: f64,
    pub gamma3: f64,
    /// Fewest rounds per iteration that close the small-gain loop, or
    /// `None` when the constants are invalid.
    pub b_min: Option<usize>,
}

impl TheoryConstants {
    pub fn new(mu: f64, l: f64, beta: f64, lambda: f64, rho: f64, delta: f64) -> Result<Self, TheoryError> {
        check_inputs(mu, l, beta)?;
        check_lambda(lambda)?;
        let c3 = c3(mu, l, beta);
        let c1 = (lambda + 1.0) / (lambda * mu - rho * (lambda + 1.0));
        let c2 = 1.0 + rho / l - 1.0 / (lambda * lambda) - rho.powi(3) * c1 * c1 * (1.0 / beta + 1.0 / mu);
        let gamma1 = 1.0 / mu;
        let gamma3 = (1.0 + rho * c1) * (rho * (l + beta) / c2).sqrt();
        let mut out = Self {
            lambda,
            beta,
            mu,
            l,
            rho,
            delta,
            c1,
            c2,
            c3,
            gamma1,
            gamma3,
            b_min: None,
        };
        if out.is_valid() {
            out.b_min = Some(min_rounds(gamma1, gamma3, delta)?);
        } else if delta >= 1.0 {
            return Err(TheoryError::AssumptionViolated(delta));
        }
        Ok(out)
    }

    /// `λμ − ρ(λ+1) > 0` and `c₂ > 0`.
    pub fn is_valid(&self) -> bool {
        self.lambda * self.mu - self.rho * (self.lambda + 1.0) > 0.0 && self.c2 > 0.0 && self.gamma3.is_finite()
    }

    pub fn gamma2(&self, rounds: usize) -> f64 {
        self.delta.powi(rounds as i32)
    }

    pub fn gain_product(&self, rounds: usize) -> f64 {
        self.gamma1 * self.gamma2(rounds) * self.gamma3
    }

    /// The coefficient `√(ρ(L+β)/c₂)` bounding `‖ã‖^λ` by `‖y⊥‖^λ`.
    pub fn gamma_a(&self) -> f64 {
        (self.rho * (self.l + self.beta) / self.c2).sqrt()
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "lambda  = {}", self.lambda);
        let _ = writeln!(out, "beta    = {}", self.beta);
        let _ = writeln!(out, "rho     = {}", self.rho);
        let _ = writeln!(out, "c1 = {}  c2 = {}  c3 = {}", self.c1, self.c2, self.c3);
        let _ = writeln!(out, "gamma1 = {}  gamma3 = {}", self.gamma1, self.gamma3);
        match self.b_min {
            Some(b) => {
                let _ = writeln!(out, "B_min = {b}  (gain product {:e})", self.gain_product(b));
            }
            None => {
                let _ = writeln!(out, "constants invalid: no certified B");
            }
        }
        out
    }
}

/// A fully certified parameter choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub lambda_threshold: f64,
    pub constants: TheoryConstants,
    pub rounds: usize,
}

/// Picks `λ` halfway between the admissible threshold and one, `ρ` at the
/// midpoint of its interval, and `B = B_min`.
pub fn certify(mu: f64, l: f64, beta: f64, delta: f64) -> Result<Certificate, TheoryError> {
    let threshold = lambda_threshold(mu, l, beta)?;
    let lambda = threshold + 0.5 * (1.0 - threshold);
    let (lo, hi) = rho_interval(mu, l, beta, lambda)?;
    let rho = 0.5 * (lo + hi);
    let constants = TheoryConstants::new(mu, l, beta, lambda, rho, delta)?;
    let rounds = constants.b_min.ok_or(TheoryError::Infeasible { lo, hi })?;
    Ok(Certificate {
        lambda_threshold: threshold,
        constants,
        rounds,
    })
}

/// `‖sᵏ‖/λᵏ` and its running maximum `‖s‖^{λ,K}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaNormSeries {
    pub lambda: f64,
    pub values: Vec<f64>,
    pub running_max: Vec<f64>,
}

impl LambdaNormSeries {
    pub fn from_norms(norms: &[f64], lambda: f64) -> Self {
        let log_lambda = lambda.ln();
        let values: Vec<f64> = norms
            .iter()
            .enumerate()
            .map(|(k, &v)| if v == 0.0 { 0.0 } else { v * (-(k as f64) * log_lambda).exp() })
            .collect();
        let running_max = values
            .iter()
            .scan(0.0f64, |m, &v| {
                *m = m.max(v);
                Some(*m)
            })
            .collect();
        Self {
            lambda,
            values,
            running_max,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `‖s‖^{λ,K}` over the whole series.
    pub fn norm(&self) -> f64 {
        self.running_max.last().copied().unwrap_or(0.0)
    }

    /// The running maximum does not grow over the second half of the series.
    pub fn bounded(&self) -> bool {
        let Some(&last) = self.running_max.last() else {
            return true;
        };
        let mid = self.running_max[self.running_max.len() / 2];
        last.is_finite() && last <= mid * (1.0 + DIAGNOSTIC_SLACK) + f64::MIN_POSITIVE
    }
}

/// λ-norm view of the three sequences in the small-gain cycle
/// `ã + ρΔy → x⊥ → y⊥ → ã + ρΔy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrowReport {
    pub atilde_rdy: LambdaNormSeries,
    pub xperp: LambdaNormSeries,
    pub yperp: LambdaNormSeries,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: Option<f64>,
    /// Largest `‖x⊥‖^{λ,K} − γ₁‖ã+ρΔy‖^{λ,K}` over `K`.
    pub arrow1_excess: f64,
    /// Largest `‖y⊥‖^{λ,K} − γ₂‖x⊥‖^{λ,K}` over `K`.
    pub arrow2_excess: f64,
    /// Ratios of the final running maxima along each arrow.
    pub empirical_gains: [f64; 3],
}

impl ArrowReport {
    pub fn arrow1_holds(&self) -> bool {
        self.arrow1_excess <= DIAGNOSTIC_SLACK
    }

    pub fn arrow2_holds(&self) -> bool {
        self.arrow2_excess <= DIAGNOSTIC_SLACK
    }

    /// The third arrow carries an additive offset, so only its gain is
    /// compared; a larger ratio is reported, not treated as a violation.
    pub fn arrow3_gain_within(&self) -> Option<bool> {
        self.gamma3.map(|g| self.empirical_gains[2] <= g + DIAGNOSTIC_SLACK)
    }

    pub fn all_bounded(&self) -> bool {
        self.atilde_rdy.bounded() && self.xperp.bounded() && self.yperp.bounded()
    }

    /// `K,norm_atilde_rdy,norm_xperp,norm_yperp` with running maxima.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,norm_atilde_rdy,norm_xperp,norm_yperp\n");
        for k in 0..self.xperp.len() {
            let _ = writeln!(
                out,
                "{k},{:.16e},{:.16e},{:.16e}",
                self.atilde_rdy.running_max[k], self.xperp.running_max[k], self.yperp.running_max[k]
            );
        }
        out
    }
}

/// Inputs to [`lambda_norm_diagnostics`] besides the iterates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticParams {
    pub lambda: f64,
    pub rho: f64,
    pub mu: f64,
    pub delta: f64,
    pub rounds: usize,
    pub gamma3: Option<f64>,
}

/// Builds the three λ-norm series from stored iterates `x⁰…x^K`,
/// `y⁰…y^K`, `a⁰…a^K`, with the convention `y⁻¹ = 0`.
pub fn lambda_norm_diagnostics(
    xs: &[StackedVector],
    ys: &[StackedVector],
    duals: &[StackedVector],
    reference: &Optimum,
    params: &DiagnosticParams,
) -> ArrowReport {
    assert!(xs.len() == ys.len() && ys.len() == duals.len(), "iterate histories differ in length");
    let mut s_norms = Vec::with_capacity(xs.len());
    let mut x_norms = Vec::with_capacity(xs.len());
    let mut y_norms = Vec::with_capacity(xs.len());
    for k in 0..xs.len() {
        let mut s = duals[k].sub(&reference.a_star);
        s.axpy(params.rho, &ys[k]);
        if k > 0 {
            s.axpy(-params.rho, &ys[k - 1]);
        }
        s_norms.push(s.norm());
        x_norms.push(xs[k].disagreement().norm());
        y_norms.push(ys[k].disagreement().norm());
    }
    let atilde_rdy = LambdaNormSeries::from_norms(&s_norms, params.lambda);
    let xperp = LambdaNormSeries::from_norms(&x_norms, params.lambda);
    let yperp = LambdaNormSeries::from_norms(&y_norms, params.lambda);
    let gamma1 = 1.0 / params.mu;
    let gamma2 = params.delta.powi(params.rounds as i32);
    let excess = |target: &LambdaNormSeries, source: &LambdaNormSeries, gain: f64| {
        target
            .running_max
            .iter()
            .zip(&source.running_max)
            .map(|(t, s)| t - gain * s)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
    ArrowReport {
        arrow1_excess: excess(&xperp, &atilde_rdy, gamma1),
        arrow2_excess: excess(&yperp, &xperp, gamma2),
        empirical_gains: [
            ratio(xperp.norm(), atilde_rdy.norm()),
            ratio(yperp.norm(), xperp.norm()),
            ratio(atilde_rdy.norm(), yperp.norm()),
        ],
        atilde_rdy,
        xperp,
        yperp,
        gamma1,
        gamma2,
        gamma3: params.gamma3,
    }
}
