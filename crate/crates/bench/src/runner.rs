use std::time::Instant;

use lazycg_core::algorithms::{
    lazy_cg_parameter_free, lazy_cg_textbook, lazy_local_cg, lazy_online_cg, lazy_pairwise_cg,
    run_adversarial, vanilla_fw, SolverConfig,
};
use lazycg_core::trace::Clock;
use lazycg_core::RunTrace;

use crate::config::{Algorithm, Instance, Prepared};

/// Seconds on the monotonic clock since construction.
pub struct MonotonicClock(Instant);

impl MonotonicClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now_s(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Executes run `index` of a prepared experiment with `solver` in place of
/// its configured solver settings.
pub fn execute_with<C: Clock + ?Sized>(
    p: &Prepared,
    index: usize,
    solver: &SolverConfig,
    clock: &C,
) -> lazycg_core::Result<RunTrace> {
    let d = &p.domain;
    let algorithm = p.config.runs[index].algorithm;
    match (&p.instance, algorithm) {
        (Instance::Online(stream), Algorithm::LazyOnlineCg) => {
            lazy_online_cg(stream, d, solver, clock)
        }
        (Instance::Online(stream), Algorithm::RunAdversarial) => {
            run_adversarial(stream, d, solver, clock)
        }
        (Instance::Offline(f), Algorithm::VanillaFw) => vanilla_fw(f, d, solver, clock),
        (Instance::Offline(f), Algorithm::LazyCgTextbook) => lazy_cg_textbook(f, d, solver, clock),
        (Instance::Offline(f), Algorithm::LazyCgParameterFree) => {
            lazy_cg_parameter_free(f, d, solver, clock)
        }
        (Instance::Offline(f), Algorithm::LazyPairwiseCg) => lazy_pairwise_cg(f, d, solver, clock),
        (Instance::Offline(f), Algorithm::LazyLocalCg) => lazy_local_cg(f, d, solver, clock),
        // excluded when the config is checked
        _ => Err(lazycg_core::Error::Config(format!(
            "{} does not match the objective kind",
            algorithm.name()
        ))),
    }
}

pub fn execute<C: Clock + ?Sized>(
    p: &Prepared,
    index: usize,
    clock: &C,
) -> lazycg_core::Result<RunTrace> {
    execute_with(p, index, &p.solvers[index], clock)
}
