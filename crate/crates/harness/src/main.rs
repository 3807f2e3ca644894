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

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use diradmm::digraph::{generate_random_digraph, generate_strongly_connected, DiGraph};
use diradmm::objective::{Objective, QuadraticObjective, SingularPolicy};
use diradmm::trace::ParamRecord;
use diradmm::weights::{build_weight_matrix, validate_mixing, DEFAULT_TOL};
use diradmm_harness::compare::compare_to_dir;
use diradmm_harness::config::{AlgorithmConfig, ExperimentConfig};
use diradmm_harness::diagnose::{check_theory, diagnose, DiagnoseOptions};
use diradmm_harness::error::HarnessError;
use diradmm_harness::instance::{Instance, GRAPH_ATTEMPTS};
use diradmm_harness::meta::Meta;
use diradmm_harness::sweep::{sweep, SweepGrids};
use diradmm_harness::{runner, GraphSpec, ObjectiveSpec};
use serde_json::json;

#[derive(Parser)]
#[command(name = "diradmm", version, about = "Distributed ADMM over directed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Admm,
    Panda,
    PushDiging,
}

#[derive(Clone, Copy, ValueEnum)]
enum Singular {
    Reject,
    MinNorm,
}

impl From<Singular> for SingularPolicy {
    fn from(s: Singular) -> Self {
        match s {
            Singular::Reject => SingularPolicy::Reject,
            Singular::MinNorm => SingularPolicy::MinNorm,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random digraph and write it as an edge list.
    GenGraph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Redraw with successive seeds until the graph is strongly connected.
        #[arg(long)]
        strongly_connected: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a random quadratic objective and write it as JSON.
    GenObjective {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Rows of each agent's H.
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a doubly stochastic weight matrix for a graph.
    BuildWeights {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm with fixed parameters and write its trace.
    Run {
        #[arg(long, value_enum)]
        alg: Alg,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        objective: PathBuf,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long = "B")]
        rounds: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, value_enum, default_value = "reject")]
        singular: Singular,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long)]
        max_comm_rounds: Option<u64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep every configured algorithm's parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Tune and run several algorithms on one instance and plot them.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Rate threshold, penalty interval, constants and minimum rounds.
    CheckTheory {
        #[arg(long)]
        mu: f64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        delta: f64,
    },
    /// Run ADMM against the rate certificate and report λ-norm arrows.
    Diagnose {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        objective: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long = "B")]
        rounds: Option<usize>,
        #[arg(long, default_value_t = 20_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Keep every iterate and emit the arrow CSV.
        #[arg(long)]
        store_iterates: bool,
        /// Directory for trace.csv, arrows.csv and meta.json.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| HarnessError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_in(dir: &Path, name: &str, text: &str) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| HarnessError::io(path, e))
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json"));
}

fn file_config(graph: &Path, objective: &Path, alg: AlgorithmConfig, max_iters: usize, tol: f64) -> ExperimentConfig {
    ExperimentConfig {
        graph: GraphSpec::File { path: graph.into() },
        objective: ObjectiveSpec::File { path: objective.into() },
        algorithms: vec![alg],
        sweep: SweepGrids::default(),
        stop_tol: tol,
        max_iters,
        max_comm_rounds: None,
        weight_tol: DEFAULT_TOL,
        output_dir: None,
        seed: 0,
    }
}

fn execute(cmd: Command) -> Result<(), HarnessError> {
    match cmd {
        Command::GenGraph {
            n,
            p,
            seed,
            strongly_connected,
            out,
        } => {
            let (g, used) = if strongly_connected {
                generate_strongly_connected(n, p, seed, GRAPH_ATTEMPTS)?
            } else {
                (generate_random_digraph(n, p, seed)?, seed)
            };
            write_or_print(out.as_deref(), &g.to_edge_list())?;
            if out.is_some() {
                print_json(&json!({
                    "n": g.n(),
                    "edges": g.edge_count(),
                    "seed": used,
                    "strongly_connected": g.is_strongly_connected(),
                }));
            }
        }
        Command::GenObjective { n, m, p, seed, out } => {
            let obj = QuadraticObjective::random(n, m, p, seed)?;
            write_or_print(out.as_deref(), &obj.to_json())?;
            if out.is_some() {
                let c = obj.constants();
                print_json(&json!({ "n": n, "m": m, "p": p, "seed": seed, "mu": c.mu, "L": c.l }));
            }
        }
        Command::BuildWeights { graph, tol, out } => {
            let g = DiGraph::from_edge_list(&read(&graph)?)?;
            let w = build_weight_matrix(&g, tol)?;
            write_or_print(out.as_deref(), &w.to_text())?;
            if out.is_some() {
                let report = validate_mixing(&w);
                print_json(&json!({ "delta": w.delta(), "all_pass": report.all_pass(), "report": report }));
            }
        }
        Command::Run {
            alg,
            graph,
            objective,
            rho,
            rounds,
            step,
            singular,
            max_iters,
            max_comm_rounds,
            tol,
            out,
        } => {
            let missing = |name: &str| HarnessError::Config(format!("--{name} is required for this algorithm"));
            let (params, alg_cfg) = match alg {
                Alg::Admm => {
                    let rho = rho.ok_or_else(|| missing("rho"))?;
                    let rounds = rounds.ok_or_else(|| missing("B"))?;
                    (
                        ParamRecord::Admm { rho, rounds },
                        AlgorithmConfig::Admm {
                            rho: Some(rho),
                            rounds: Some(rounds),
                        },
                    )
                }
                Alg::Panda => {
                    let step = step.ok_or_else(|| missing("step"))?;
                    (
                        ParamRecord::Panda { step },
                        AlgorithmConfig::Panda {
                            step: Some(step),
                            singular: singular.into(),
                        },
                    )
                }
                Alg::PushDiging => {
                    let step = step.ok_or_else(|| missing("step"))?;
                    (ParamRecord::PushDiging { step }, AlgorithmConfig::PushDiging { step: Some(step) })
                }
            };
            let mut cfg = file_config(&graph, &objective, alg_cfg, max_iters, tol);
            cfg.max_comm_rounds = max_comm_rounds;
            cfg.validate()?;
            let instance = Instance::from_specs(&cfg.graph, &cfg.objective, cfg.weight_tol)?;
            let trace = runner::run(&instance, &params, singular.into(), &cfg.limits())?;
            write_or_print(out.as_deref(), &trace.to_csv())?;
            if let Some(out) = &out {
                let mut meta_path = out.clone().into_os_string();
                meta_path.push(".meta.json");
                Meta::new(&cfg, &instance).write(Path::new(&meta_path))?;
                let last = trace.last().expect("at least one row");
                print_json(&json!({
                    "termination": trace.termination,
                    "iterations": last.iter,
                    "comm_rounds": last.comm_rounds,
                    "primal_res": last.primal_res,
                }));
            }
        }
        Command::Sweep { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir.or_else(|| cfg.output_dir.clone());
            let instance = Instance::from_specs(&cfg.graph, &cfg.objective, cfg.weight_tol)?;
            let mut best = Vec::new();
            for alg in &cfg.algorithms {
                let outcome = sweep(&instance, alg, &cfg.sweep, &cfg.limits())?;
                if let Some(dir) = &dir {
                    write_in(dir, &format!("{}_sweep.csv", outcome.algorithm), &outcome.to_csv())?;
                }
                best.push(json!({ "params": outcome.best, "comm_rounds": outcome.best_score }));
            }
            if let Some(dir) = &dir {
                std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
                Meta::new(&cfg, &instance).write(&dir.join("meta.json"))?;
            }
            print_json(&json!({ "instance_hash": instance.hash(), "best": best }));
        }
        Command::Compare { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| HarnessError::Config("compare needs --out-dir or output_dir".into()))?;
            let cmp = compare_to_dir(&cfg, &dir)?;
            let arms: Vec<_> = cmp
                .arms
                .iter()
                .map(|a| {
                    json!({
                        "algorithm": a.algorithm,
                        "params": a.params,
                        "comm_rounds_to_tol": a.rounds_to(cfg.stop_tol),
                        "error": a.trace.as_ref().err(),
                    })
                })
                .collect();
            print_json(&json!({ "instance_hash": cmp.instance_hash, "arms": arms }));
        }
        Command::CheckTheory {
            mu,
            l,
            beta,
            lambda,
            delta,
        } => {
            let beta = beta.unwrap_or(l);
            let lambda = match lambda {
                Some(v) => v,
                None => diradmm::theory::certify(mu, l, beta, delta)?.constants.lambda,
            };
            let check = check_theory(mu, l, beta, lambda, delta)?;
            print_json(&serde_json::to_value(check)?);
        }
        Command::Diagnose {
            graph,
            objective,
            beta,
            lambda,
            rho,
            rounds,
            max_iters,
            tol,
            store_iterates,
            out_dir,
        } => {
            let cfg = file_config(
                &graph,
                &objective,
                AlgorithmConfig::Admm { rho, rounds },
                max_iters,
                tol,
            );
            cfg.validate()?;
            let instance = Instance::from_specs(&cfg.graph, &cfg.objective, cfg.weight_tol)?;
            let opts = DiagnoseOptions {
                beta,
                lambda,
                rho,
                rounds,
                store_iterates,
            };
            let report = diagnose(&instance, &opts, &cfg.limits())?;
            if let Some(dir) = &out_dir {
                write_in(dir, "trace.csv", &report.trace.to_csv())?;
                if let Some(a) = &report.arrows {
                    write_in(dir, "arrows.csv", &a.to_csv())?;
                }
                Meta::new(&cfg, &instance).write(&dir.join("meta.json"))?;
            }
            let last = report.trace.last().expect("at least one row");
            let arrows = report.arrows.as_ref().map(|a| {
                json!({
                    "arrow1_holds": a.arrow1_holds(),
                    "arrow2_holds": a.arrow2_holds(),
                    "arrow3_gain_within": a.arrow3_gain_within(),
                    "all_bounded": a.all_bounded(),
                    "empirical_gains": a.empirical_gains,
                    "gamma1": a.gamma1,
                    "gamma2": a.gamma2,
                    "gamma3": a.gamma3,
                })
            });
            print_json(&json!({
                "mode": if report.certified { "certified" } else { "outside certified region" },
                "constants": report.constants,
                "rho_interval": report.rho_interval,
                "rounds": report.rounds,
                "gain_product": report.gain_product,
                "termination": report.trace.termination,
                "iterations": last.iter,
                "primal_res": last.primal_res,
                "fit": report.fit,
                "lambda_hat_within_certificate": report.fit.map(|f| f.lambda_hat <= report.constants.lambda),
                "invariant_violations": report.invariant_violations,
                "arrows": arrows,
            }));
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let report = json!({ "error": "usage", "message": e.to_string() });
            eprintln!("{report}");
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.report()).expect("json"));
            ExitCode::FAILURE
        }
    }
}
