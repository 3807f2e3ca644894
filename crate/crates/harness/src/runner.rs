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

//! Runs a single algorithm with fixed parameters on an instance.

use diradmm::admm::{run_admm, AdmmParams};
use diradmm::baselines::{run_panda, run_push_diging, PandaParams, PushDigingParams};
use diradmm::objective::SingularPolicy;
use diradmm::trace::{ConvergenceTrace, NoSink, ParamRecord, RunLimits};

use crate::error::HarnessError;
use crate::instance::Instance;

/// `singular` only affects PANDA.
pub fn run(
    instance: &Instance,
    params: &ParamRecord,
    singular: SingularPolicy,
    limits: &RunLimits,
) -> Result<ConvergenceTrace, HarnessError> {
    let obj = &instance.objective;
    let reference = &instance.reference;
    Ok(match *params {
        ParamRecord::Admm { rho, rounds } => {
            let p = AdmmParams::new(rho, rounds)?;
            run_admm(obj, reference, &instance.weights, &p, limits, &mut NoSink)?
        }
        ParamRecord::Panda { step } => {
            let p = PandaParams::new(step).with_singular(singular);
            run_panda(obj, reference, &instance.weights, &p, limits, &mut NoSink)?
        }
        ParamRecord::PushDiging { step } => {
            let p = PushDigingParams { step };
            run_push_diging(obj, reference, &instance.push, &p, limits, &mut NoSink)?
        }
    })
}
