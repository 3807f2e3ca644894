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

//! Convergence traces and the iteration driver shared by all algorithms.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective::Optimum;
use crate::stacked::StackedVector;

/// A run is aborted once a residual grows past this multiple of its
/// initial value.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

pub const CSV_HEADER: &str = "iter,comm_rounds,primal_res,dual_res,consensus_res";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    Admm,
    Panda,
    PushDiging,
}

impl AlgorithmId {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::Admm => "admm",
            AlgorithmId::Panda => "panda",
            AlgorithmId::PushDiging => "push-diging",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Tunable parameters of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum ParamRecord {
    Admm { rho: f64, rounds: usize },
    Panda { step: f64 },
    PushDiging { step: f64 },
}

impl ParamRecord {
    pub fn algorithm(&self) -> AlgorithmId {
        match self {
            ParamRecord::Admm { .. } => AlgorithmId::Admm,
            ParamRecord::Panda { .. } => AlgorithmId::Panda,
            ParamRecord::PushDiging { .. } => AlgorithmId::PushDiging,
        }
    }

    /// Parameters as a tuple for lexicographic ordering.
    pub fn key(&self) -> (f64, f64) {
        match *self {
            ParamRecord::Admm { rho, rounds } => (rho, rounds as f64),
            ParamRecord::Panda { step } | ParamRecord::PushDiging { step } => (step, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Primal residual reached the stop tolerance.
    Converged,
    /// Iteration or communication budget exhausted.
    MaxIters,
    /// Non-finite iterate or residual blow-up.
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub comm_rounds: u64,
    /// `‖xᵏ − x*‖ / ‖x⁰ − x*‖`
    pub primal_res: f64,
    /// `‖aᵏ − a*‖`
    pub dual_res: f64,
    /// `‖xᵏ − (11ᵀ/n)xᵏ‖`
    pub consensus_res: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub params: ParamRecord,
    pub rows: Vec<TraceRow>,
    pub termination: Termination,
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceParseError {
    #[error("missing {0} line")]
    Missing(&'static str),
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
}

impl ConvergenceTrace {
    pub fn algorithm(&self) -> AlgorithmId {
        self.params.algorithm()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Communication rounds spent when the primal residual first drops to
    /// `tol`, if it ever does.
    pub fn rounds_to(&self, tol: f64) -> Option<u64> {
        self.rows.iter().find(|r| r.primal_res <= tol).map(|r| r.comm_rounds)
    }

    /// Rows preceded by two `#` metadata lines, floats with 17 significant
    /// digits so parsing reproduces every value bit for bit.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let params = serde_json::to_string(&self.params).expect("params serialize");
        let termination = serde_json::to_string(&self.termination).expect("termination serializes");
        let _ = writeln!(out, "# params={params}");
        let _ = writeln!(out, "# termination={}", termination.trim_matches('"'));
        let _ = writeln!(out, "{CSV_HEADER}");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e}",
                r.iter, r.comm_rounds, r.primal_res, r.dual_res, r.consensus_res
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TraceParseError> {
        let mut params = None;
        let mut termination = None;
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (no, line) in text.lines().enumerate() {
            let line_no = no + 1;
            let bad = |reason: String| TraceParseError::Line { line: line_no, reason };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let meta = meta.trim();
                if let Some(p) = meta.strip_prefix("params=") {
                    params = Some(serde_json::from_str(p).map_err(|e| bad(e.to_string()))?);
                } else if let Some(t) = meta.strip_prefix("termination=") {
                    termination =
                        Some(serde_json::from_str(&format!("\"{t}\"")).map_err(|e| bad(e.to_string()))?);
                }
                continue;
            }
            if !header_seen {
                if line != CSV_HEADER {
                    return Err(bad(format!("unexpected header {line:?}")));
                }
                header_seen = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(bad(format!("expected 5 columns, found {}", cols.len())));
            }
            let float = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            rows.push(TraceRow {
                iter: cols[0].parse().map_err(|e| bad(format!("{e}")))?,
                comm_rounds: cols[1].parse().map_err(|e| bad(format!("{e}")))?,
                primal_res: float(cols[2])?,
                dual_res: float(cols[3])?,
                consensus_res: float(cols[4])?,
            });
        }
        if !header_seen {
            return Err(TraceParseError::Missing("header"));
        }
        Ok(Self {
            params: params.ok_or(TraceParseError::Missing("params"))?,
            rows,
            termination: termination.ok_or(TraceParseError::Missing("termination"))?,
        })
    }
}

/// When to stop iterating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunLimits {
    pub max_iters: usize,
    /// Optional cap on cumulative communication rounds.
    #[serde(default)]
    pub max_comm_rounds: Option<u64>,
    /// Stop once the relative primal residual is at or below this.
    pub stop_tol: f64,
}

impl RunLimits {
    pub fn new(max_iters: usize, stop_tol: f64) -> Self {
        Self {
            max_iters,
            max_comm_rounds: None,
            stop_tol,
        }
    }

    pub fn with_comm_budget(mut self, rounds: u64) -> Self {
        self.max_comm_rounds = Some(rounds);
        self
    }
}

/// What the driver needs to read from an algorithm's state.
pub trait IterateState {
    fn iteration(&self) -> usize;
    fn comm_rounds(&self) -> u64;
    /// The agents' current primal estimates.
    fn primal(&self) -> &StackedVector;
    /// The agents' current dual estimates.
    fn dual(&self) -> &StackedVector;
}

/// Receives every recorded row together with the state that produced it.
pub trait TraceSink<S> {
    fn observe(&mut self, row: &TraceRow, state: &S);
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoSink;

impl<S> TraceSink<S> for NoSink {
    fn observe(&mut self, _row: &TraceRow, _state: &S) {}
}

impl<S, F> TraceSink<S> for F
where
    F: FnMut(&TraceRow, &S),
{
    fn observe(&mut self, row: &TraceRow, state: &S) {
        self(row, state)
    }
}

pub(crate) fn drive<S, K, F, E>(
    state: &mut S,
    params: ParamRecord,
    reference: &Optimum,
    limits: &RunLimits,
    sink: &mut K,
    mut step: F,
) -> Result<ConvergenceTrace, E>
where
    S: IterateState,
    K: TraceSink<S>,
    F: FnMut(&mut S) -> Result<(), E>,
{
    let initial_gap = state.primal().distance(&reference.x_star);
    let measure = |s: &S| {
        let x = s.primal();
        let gap = x.distance(&reference.x_star);
        TraceRow {
            iter: s.iteration(),
            comm_rounds: s.comm_rounds(),
            primal_res: if initial_gap > 0.0 { gap / initial_gap } else { gap },
            dual_res: s.dual().distance(&reference.a_star),
            consensus_res: x.disagreement().norm(),
        }
    };
    let mut rows = Vec::new();
    let first = measure(state);
    let initial_dual = first.dual_res;
    let mut row = first;
    let termination = loop {
        sink.observe(&row, state);
        rows.push(row);
        let finite = row.primal_res.is_finite() && row.dual_res.is_finite() && row.consensus_res.is_finite();
        if !finite
            || row.primal_res > DIVERGENCE_FACTOR
            || (initial_dual > 0.0 && row.dual_res > DIVERGENCE_FACTOR * initial_dual)
        {
            break Termination::Diverged;
        }
        if row.primal_res <= limits.stop_tol {
            break Termination::Converged;
        }
        if state.iteration() >= limits.max_iters
            || limits.max_comm_rounds.is_some_and(|cap| state.comm_rounds() >= cap)
        {
            break Termination::MaxIters;
        }
        step(state)?;
        row = measure(state);
    };
    Ok(ConvergenceTrace {
        params,
        rows,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            (1e-300f64..1e300),
            Just(0.0),
        ]
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            vals in proptest::collection::vec((arb_finite(), arb_finite(), arb_finite()), 0..20),
            rho in 1e-6f64..1e6,
            rounds in 1usize..10,
        ) {
            let trace = ConvergenceTrace {
                params: ParamRecord::Admm { rho, rounds },
                rows: vals.iter().enumerate().map(|(k, &(p, d, c))| TraceRow {
                    iter: k,
                    comm_rounds: (k * rounds) as u64,
                    primal_res: p,
                    dual_res: d,
                    consensus_res: c,
                }).collect(),
                termination: Termination::MaxIters,
            };
            let back = ConvergenceTrace::from_csv(&trace.to_csv()).unwrap();
            prop_assert_eq!(back.params, trace.params);
            prop_assert_eq!(back.termination, trace.termination);
            prop_assert_eq!(back.rows.len(), trace.rows.len());
            for (a, b) in back.rows.iter().zip(&trace.rows) {
                prop_assert_eq!(a.primal_res.to_bits(), b.primal_res.to_bits());
                prop_assert_eq!(a.dual_res.to_bits(), b.dual_res.to_bits());
                prop_assert_eq!(a.consensus_res.to_bits(), b.consensus_res.to_bits());
            }
        }
    }

    #[test]
    fn diverged_trace_with_infinities_round_trips() {
        let trace = ConvergenceTrace {
            params: ParamRecord::Panda { step: 1e-10 },
            rows: vec![TraceRow {
                iter: 0,
                comm_rounds: 0,
                primal_res: f64::INFINITY,
                dual_res: f64::NAN,
                consensus_res: 0.0,
            }],
            termination: Termination::Diverged,
        };
        let back = ConvergenceTrace::from_csv(&trace.to_csv()).unwrap();
        assert_eq!(back.termination, Termination::Diverged);
        assert!(back.rows[0].primal_res.is_infinite() && back.rows[0].dual_res.is_nan());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(ConvergenceTrace::from_csv(""), Err(TraceParseError::Missing("header")));
        let text = format!("{CSV_HEADER}\n0,0,1,1,1\n");
        assert_eq!(ConvergenceTrace::from_csv(&text), Err(TraceParseError::Missing("params")));
        assert!(ConvergenceTrace::from_csv("a,b\n").is_err());
    }
}
