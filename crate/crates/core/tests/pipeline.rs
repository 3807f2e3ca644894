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

use diradmm::admm::{run_admm, AdmmParams, InvariantMonitor};
use diradmm::baselines::{push_sum_matrix, run_panda, run_push_diging, PandaParams, PushDigingParams};
use diradmm::digraph::generate_strongly_connected;
use diradmm::objective::{Objective, QuadraticObjective};
use diradmm::theory::certify;
use diradmm::trace::{ConvergenceTrace, NoSink, RunLimits, Termination};
use diradmm::weights::{build_weight_matrix, DEFAULT_TOL};
use proptest::prelude::*;

#[test]
fn all_three_algorithms_reach_the_centralized_optimum() {
    let (g, _) = generate_strongly_connected(8, 0.4, 21, 1000).unwrap();
    let obj = QuadraticObjective::random(8, 2, 3, 21).unwrap();
    let reference = obj.centralized_solve().unwrap();
    let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
    let limits = RunLimits::new(200_000, 1e-8);

    let admm = run_admm(&obj, &reference, &w, &AdmmParams::new(1.0, 2).unwrap(), &limits, &mut NoSink).unwrap();
    let panda = run_panda(&obj, &reference, &w, &PandaParams::new(0.01), &limits, &mut NoSink).unwrap();
    let pd = run_push_diging(
        &obj,
        &reference,
        &push_sum_matrix(&g),
        &PushDigingParams { step: 0.02 },
        &limits,
        &mut NoSink,
    )
    .unwrap();
    for t in [&admm, &panda, &pd] {
        assert_eq!(t.termination, Termination::Converged, "{:?}", t.params);
        assert!(t.rows.windows(2).all(|w| w[1].comm_rounds > w[0].comm_rounds));
        let parsed = ConvergenceTrace::from_csv(&t.to_csv()).unwrap();
        assert_eq!(&parsed, t);
    }
}

#[test]
fn certified_parameters_converge() {
    let (g, _) = generate_strongly_connected(5, 0.6, 8, 1000).unwrap();
    let obj = QuadraticObjective::random(5, 1, 4, 8).unwrap();
    let c = obj.constants();
    assert!(c.mu > 0.0);
    let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
    let cert = certify(c.mu, c.l, c.l, w.delta()).unwrap();
    assert!(cert.constants.gain_product(cert.rounds) < 1.0);
    let params = AdmmParams::new(cert.constants.rho, cert.rounds).unwrap();
    let reference = obj.centralized_solve().unwrap();
    let trace = run_admm(&obj, &reference, &w, &params, &RunLimits::new(100_000, 1e-8), &mut NoSink).unwrap();
    assert_eq!(trace.termination, Termination::Converged);
    // Certified rate bounds the per-iteration decay from the start.
    let last = trace.last().unwrap();
    assert!(last.primal_res <= cert.constants.lambda.powi(last.iter as i32) * 1e6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn averaging_invariants_hold_every_step(
        n in 2usize..7,
        m in 1usize..4,
        p_rows in 1usize..4,
        seed in 0u64..1000,
        log_rho in -2.0f64..2.0,
        rounds in 1usize..5,
    ) {
        let (g, _) = generate_strongly_connected(n, 0.5, seed, 10_000).unwrap();
        let obj = QuadraticObjective::random(n, m, p_rows, seed).unwrap();
        let reference = match obj.centralized_solve() {
            Ok(r) => r,
            Err(_) => return Ok(()),
        };
        let w = build_weight_matrix(&g, DEFAULT_TOL).unwrap();
        let params = AdmmParams::new(10f64.powf(log_rho), rounds).unwrap();
        let mut monitor = InvariantMonitor::default();
        let trace = run_admm(&obj, &reference, &w, &params, &RunLimits::new(60, 0.0), &mut monitor).unwrap();
        prop_assert_eq!(monitor.checked, trace.rows.len());
        prop_assert!(monitor.all_hold(), "violations at {:?}", monitor.violations);
        prop_assert!(trace.rows.iter().all(|r| r.comm_rounds == (r.iter * rounds) as u64));
    }
}
