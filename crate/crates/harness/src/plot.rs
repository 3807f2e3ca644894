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

//! Minimal SVG line chart of `log10(primal_res)` against communication rounds.

use std::fmt::Write as _;

use diradmm::trace::{AlgorithmId, ConvergenceTrace};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
/// Residuals below this are drawn on the floor.
const LOG_FLOOR: f64 = -16.0;

fn color(alg: AlgorithmId) -> &'static str {
    match alg {
        AlgorithmId::Admm => "#1f77b4",
        AlgorithmId::Panda => "#d62728",
        AlgorithmId::PushDiging => "#2ca02c",
    }
}

fn log_res(r: f64) -> Option<f64> {
    if r.is_nan() {
        None
    } else if r <= 0.0 {
        Some(LOG_FLOOR)
    } else {
        Some(r.log10().clamp(LOG_FLOOR, 16.0))
    }
}

pub fn line_chart(traces: &[&ConvergenceTrace], title: &str) -> String {
    let max_x = traces
        .iter()
        .filter_map(|t| t.last().map(|r| r.comm_rounds))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let ys = traces.iter().flat_map(|t| t.rows.iter().filter_map(|r| log_res(r.primal_res)));
    let (mut y_lo, mut y_hi) = ys.fold((0.0f64, 0.0f64), |(lo, hi), y| (lo.min(y), hi.max(y)));
    y_lo = y_lo.floor();
    y_hi = y_hi.ceil().max(y_lo + 1.0);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + plot_w * x / max_x;
    let py = |y: f64| TOP + plot_h * (y_hi - y) / (y_hi - y_lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let decades = (y_hi - y_lo) as i64;
    let stride = (decades / 10).max(1);
    let mut d = y_lo as i64;
    while d <= y_hi as i64 {
        let y = py(d as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
        d += stride;
    }
    for i in 0..=5 {
        let v = max_x * i as f64 / 5.0;
        let x = px(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            v.round()
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">communication rounds</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">relative primal residual</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (idx, t) in traces.iter().enumerate() {
        let points: Vec<String> = t
            .rows
            .iter()
            .filter_map(|r| log_res(r.primal_res).map(|y| format!("{:.2},{:.2}", px(r.comm_rounds as f64), py(y))))
            .collect();
        let c = color(t.algorithm());
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 20.0 * idx as f64 + 10.0;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 25.0,
            lx + 30.0,
            ly + 4.0,
            t.algorithm()
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use diradmm::trace::{ParamRecord, Termination, TraceRow};

    fn trace(params: ParamRecord, rates: &[f64]) -> ConvergenceTrace {
        ConvergenceTrace {
            params,
            rows: rates
                .iter()
                .enumerate()
                .map(|(k, &r)| TraceRow {
                    iter: k,
                    comm_rounds: k as u64,
                    primal_res: r,
                    dual_res: 0.0,
                    consensus_res: 0.0,
                })
                .collect(),
            termination: Termination::Converged,
        }
    }

    #[test]
    fn one_polyline_per_trace() {
        let a = trace(ParamRecord::Admm { rho: 1.0, rounds: 1 }, &[1.0, 0.1, 0.01, 0.0]);
        let b = trace(ParamRecord::PushDiging { step: 0.1 }, &[1.0, 0.5, f64::NAN]);
        let svg = line_chart(&[&a, &b], "a < b");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("push-diging"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
