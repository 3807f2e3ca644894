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

//! Certified and tuned ADMM runs with rate fits and λ-norm diagnostics.

use diradmm::admm::{run_admm, AdmmParams, Both, InvariantMonitor, IterateRecorder};
use diradmm::objective::Objective;
use diradmm::theory::{
    certify, lambda_norm_diagnostics, lambda_threshold, rho_interval, ArrowReport, DiagnosticParams, TheoryConstants,
};
use diradmm::trace::{ConvergenceTrace, RunLimits};
use serde::Serialize;

use crate::error::HarnessError;
use crate::fit::{fit_rate, RateFit};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiagnoseOptions {
    /// Defaults to `L`.
    pub beta: Option<f64>,
    /// Defaults to halfway between the admissible threshold and one.
    pub lambda: Option<f64>,
    /// Defaults to the midpoint of the admissible interval.
    pub rho: Option<f64>,
    /// Defaults to the certified minimum.
    pub rounds: Option<usize>,
    /// Keep every iterate for the λ-norm arrows.
    pub store_iterates: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnoseReport {
    pub constants: TheoryConstants,
    pub rho_interval: (f64, f64),
    pub rounds: usize,
    /// Whether `(ρ, B)` lies inside the region the rate certificate covers.
    pub certified: bool,
    pub gain_product: f64,
    pub trace: ConvergenceTrace,
    pub fit: Option<RateFit>,
    pub invariant_checks: usize,
    pub invariant_violations: usize,
    pub worst_dual_mean: f64,
    pub worst_primal_mean_gap: f64,
    pub arrows: Option<ArrowReport>,
}

pub fn diagnose(instance: &Instance, opts: &DiagnoseOptions, limits: &RunLimits) -> Result<DiagnoseReport, HarnessError> {
    let c = instance.objective.constants();
    let delta = instance.weights.delta();
    let beta = opts.beta.unwrap_or(c.l);
    let lambda = match opts.lambda {
        Some(l) => l,
        None => certify(c.mu, c.l, beta, delta)?.constants.lambda,
    };
    let interval = rho_interval(c.mu, c.l, beta, lambda)?;
    let rho = opts.rho.unwrap_or(0.5 * (interval.0 + interval.1));
    let constants = TheoryConstants::new(c.mu, c.l, beta, lambda, rho, delta)?;
    let rounds = match (opts.rounds, constants.b_min) {
        (Some(b), _) => b,
        (None, Some(b)) => b,
        (None, None) => {
            return Err(HarnessError::Config(format!(
                "rho = {rho} gives invalid constants and no rounds were given"
            )))
        }
    };
    let certified = rho > interval.0
        && rho < interval.1
        && constants.is_valid()
        && constants.b_min.is_some_and(|b| rounds >= b);

    let params = AdmmParams::new(rho, rounds)?;
    let mut monitor = InvariantMonitor::default();
    let mut recorder = IterateRecorder::default();
    let trace = if opts.store_iterates {
        run_admm(
            &instance.objective,
            &instance.reference,
            &instance.weights,
            &params,
            limits,
            &mut Both(&mut monitor, &mut recorder),
        )?
    } else {
        run_admm(&instance.objective, &instance.reference, &instance.weights, &params, limits, &mut monitor)?
    };
    let arrows = opts.store_iterates.then(|| {
        lambda_norm_diagnostics(
            &recorder.x,
            &recorder.y,
            &recorder.a,
            &instance.reference,
            &DiagnosticParams {
                lambda,
                rho,
                mu: c.mu,
                delta,
                rounds,
                gamma3: constants.is_valid().then_some(constants.gamma3),
            },
        )
    });
    Ok(DiagnoseReport {
        constants,
        rho_interval: interval,
        rounds,
        certified,
        gain_product: constants.gain_product(rounds),
        fit: fit_rate(&trace).ok(),
        trace,
        invariant_checks: monitor.checked,
        invariant_violations: monitor.violations.len(),
        worst_dual_mean: monitor.worst_dual_mean,
        worst_primal_mean_gap: monitor.worst_primal_mean_gap,
        arrows,
    })
}

/// Threshold and interval summary for the CLI's `check-theory`.
#[derive(Debug, Clone, Serialize)]
pub struct TheoryCheck {
    pub lambda_threshold: f64,
    pub lambda_feasible: bool,
    pub rho_interval: Option<(f64, f64)>,
    pub constants: Option<TheoryConstants>,
    pub gain_product_at_b_min: Option<f64>,
}

pub fn check_theory(mu: f64, l: f64, beta: f64, lambda: f64, delta: f64) -> Result<TheoryCheck, HarnessError> {
    let threshold = lambda_threshold(mu, l, beta)?;
    let interval = match rho_interval(mu, l, beta, lambda) {
        Ok(i) => Some(i),
        Err(diradmm::theory::TheoryError::Infeasible { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let constants = match interval {
        Some((lo, hi)) => Some(TheoryConstants::new(mu, l, beta, lambda, 0.5 * (lo + hi), delta)?),
        None => None,
    };
    Ok(TheoryCheck {
        lambda_threshold: threshold,
        lambda_feasible: interval.is_some(),
        rho_interval: interval,
        gain_product_at_b_min: constants.and_then(|c| c.b_min.map(|b| c.gain_product(b))),
        constants,
    })
}
