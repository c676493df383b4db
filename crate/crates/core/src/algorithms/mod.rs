//! Conditional-gradient solvers over weak separation oracles.
//!
//! Every solver maintains a convex decomposition of its iterate, measures
//! the Wolfe gap out-of-band (an LMO call that does not count towards
//! `lp_calls`) and returns a [`RunTrace`]. Offline solvers stop once the
//! Wolfe gap is at most `epsilon`, or at the iteration/time limit (then the
//! trace is flagged truncated); the last row carries no query.

mod offline;
mod online;
mod pairwise;
pub mod params;

use alloc::format;
use alloc::vec::Vec;

pub use offline::{lazy_cg_parameter_free, lazy_cg_textbook, lazy_local_cg, vanilla_fw};
pub use online::{lazy_online_cg, run_adversarial};
pub use pairwise::lazy_pairwise_cg;
pub use params::OnlineGamma;

use crate::active_set::ActiveSet;
use crate::domains::{Domain, Vertex};
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::trace::{AnswerKind, Clock, IterationRecord, RunTrace};
use crate::weaksep::{Backend, CacheConfig, LazyOracle, SeparationAnswer};

/// How the initial gap bound `Φ₀` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Phi0Policy {
    /// One exact LMO call at `x₁` (counted in `lp_calls`).
    #[default]
    ExactLp,
    /// Start at `‖∇f(x₁)‖·D`, halve until the first positive answer, then
    /// use twice that threshold. Queries are counted.
    Halving,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// The solver's predetermined step size.
    Schedule,
    #[default]
    LineSearch,
    /// `min{1, Φ/(KC)}`
    ShortStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Accuracy `K >= 1`.
    pub k: f64,
    pub max_iters: usize,
    pub time_limit_s: Option<f64>,
    /// Target Wolfe gap.
    pub epsilon: f64,
    pub phi0: Phi0Policy,
    pub step: StepRule,
    pub cache: CacheConfig,
    pub backend: Backend,
    pub seed: u64,
    /// Overrides the objective's curvature `C`.
    pub curvature: Option<f64>,
    /// Overrides the objective's strong convexity `S`.
    pub strong_convexity: Option<f64>,
    /// Overrides the objective's smoothness `β`.
    pub smoothness: Option<f64>,
    /// Bound on the number of nonzeros of a minimizer (pairwise solver);
    /// defaults to the dimension.
    pub sparsity: Option<usize>,
    /// On a negative answer set `Φ` to half the exact gap the LMO reported.
    pub improved_negative: bool,
    /// Online curvature decay exponent `b`.
    pub online_b: f64,
    /// Online strong-convexity decay exponent `s`.
    pub online_s: f64,
    pub online_gamma: OnlineGamma,
    /// Compute per-round regret and aggregate gaps of online runs.
    pub audit: bool,
    pub start: Option<Vertex>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k: 1.0,
            max_iters: 1000,
            time_limit_s: None,
            epsilon: 1e-6,
            phi0: Phi0Policy::default(),
            step: StepRule::default(),
            cache: CacheConfig::default(),
            backend: Backend::default(),
            seed: 0,
            curvature: None,
            strong_convexity: None,
            smoothness: None,
            sparsity: None,
            improved_negative: false,
            online_b: 0.0,
            online_s: 0.0,
            online_gamma: OnlineGamma::default(),
            audit: true,
            start: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 1.0) || !self.k.is_finite() {
            return Err(Error::Config(format!("K must be >= 1, got {}", self.k)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if self.backend == Backend::Augmentation && !(self.k > 1.0) {
            return Err(Error::Config("the augmentation oracle needs K > 1".into()));
        }
        if let Phi0Policy::Value(v) = self.phi0 {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("phi0 must be non-negative, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.online_b) || !(0.0..1.0).contains(&self.online_s) {
            return Err(Error::Config("online exponents b, s must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Tolerance for iterates reproduced from their decomposition.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Tolerance for membership of simplex/box iterates.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Mutable state shared by all solver loops.
pub(crate) struct Run<'a, C: Clock + ?Sized> {
    pub domain: &'a Domain,
    pub config: &'a SolverConfig,
    pub oracle: LazyOracle,
    pub trace: RunTrace,
    pub active: ActiveSet,
    pub x: Vec<f64>,
    clock: &'a C,
    started: f64,
    oracle_time: f64,
}

impl<'a, C: Clock + ?Sized> Run<'a, C> {
    pub fn new(
        algorithm: &str,
        domain: &'a Domain,
        config: &'a SolverConfig,
        clock: &'a C,
    ) -> Result<Self> {
        config.validate()?;
        let start = match &config.start {
            Some(v) => {
                if !domain.is_vertex(&v.coords) {
                    return Err(Error::Config("start point is not a vertex of the domain".into()));
                }
                v.clone()
            }
            None => domain.start_vertex()?,
        };
        let x = start.coords.clone();
        Ok(Self {
            domain,
            config,
            oracle: LazyOracle::new(config.cache, config.backend),
            trace: RunTrace::new(algorithm),
            active: ActiveSet::from_vertex(start),
            x,
            clock,
            started: clock.now_s(),
            oracle_time: 0.0,
        })
    }

    pub fn elapsed(&self) -> f64 {
        self.clock.now_s() - self.started
    }

    pub fn out_of_time(&self) -> bool {
        self.config
            .time_limit_s
            .is_some_and(|limit| self.elapsed() >= limit)
    }

    pub fn tic(&self) -> f64 {
        self.clock.now_s()
    }

    /// Adds the time since `t0` to the oracle account.
    pub fn toc(&mut self, t0: f64) {
        self.oracle_time += self.clock.now_s() - t0;
    }

    pub fn separate(&mut self, c: &[f64], phi: f64) -> Result<SeparationAnswer> {
        let t0 = self.tic();
        let answer =
            self.oracle
                .separate_with(self.domain, c, &self.x, Some(&self.active), phi, self.config.k);
        self.toc(t0);
        answer
    }

    /// Out-of-band Wolfe gap at the current iterate.
    pub fn wolfe_gap(&self, grad: &[f64]) -> Result<f64> {
        Ok(self.domain.dual_gap(grad, &self.x)?.0)
    }

    pub fn push(&mut self, t: usize, f: f64, phi: f64, wolfe_gap: f64, answer: AnswerKind) {
        let elapsed_s = self.elapsed();
        self.trace.records.push(IterationRecord {
            t,
            f,
            phi,
            wolfe_gap,
            lp_calls: self.oracle.stats.lp_calls,
            cache_hits: self.oracle.stats.cache_hits,
            answer,
            elapsed_s,
        });
    }

    /// Checks the decomposition against the iterate and domain membership.
    pub fn check_feasible(&self) -> Result<()> {
        self.active.validate(&self.x, RECONSTRUCTION_TOL)?;
        if self.domain.contains(&self.x, FEASIBILITY_TOL) == Some(false) {
            return Err(Error::invariant(
                "feasibility",
                "iterate left the domain",
            ));
        }
        Ok(())
    }

    /// Whether the loop at iteration `t` must stop before querying.
    pub fn should_stop(&mut self, t: usize, gap: f64) -> bool {
        if gap <= self.config.epsilon {
            return true;
        }
        if t > self.config.max_iters || self.out_of_time() {
            self.trace.truncated = true;
            return true;
        }
        false
    }

    /// Initial bound at `x₁` under the configured policy; `raw` is the
    /// quantity bounding `f(x₁) - f*`.
    pub fn initial_bound(&mut self, grad: &[f64]) -> Result<f64> {
        match self.config.phi0 {
            Phi0Policy::Value(v) => Ok(v),
            Phi0Policy::ExactLp => {
                self.oracle.stats.lp_calls += 1;
                Ok(self.wolfe_gap(grad)?.max(0.0))
            }
            Phi0Policy::Halving => {
                let mut phi = norm2(grad) * self.domain.l2_diameter();
                if phi <= 0.0 {
                    return Ok(0.0);
                }
                let floor = self.config.epsilon;
                loop {
                    let answer = self.separate(grad, phi)?;
                    if answer.is_positive() {
                        return Ok(2.0 * phi);
                    }
                    // a negative at phi certifies gap <= phi
                    if phi / 2.0 < floor {
                        return Ok(phi);
                    }
                    phi /= 2.0;
                }
            }
        }
    }

    pub fn finish(mut self) -> RunTrace {
        let total = self.elapsed();
        self.trace.oracle_time_s = self.oracle_time;
        self.trace.solver_time_s = total - self.oracle_time;
        self.trace.stats = self.oracle.stats;
        self.trace.final_point = self.x;
        self.trace
    }
}

/// Curvature from the config override or the objective metadata.
pub(crate) fn curvature_of(config: &SolverConfig, meta_value: f64) -> f64 {
    config.curvature.unwrap_or(meta_value)
}

pub(crate) fn answer_kind(a: &SeparationAnswer) -> AnswerKind {
    if a.is_positive() {
        AnswerKind::Positive
    } else {
        AnswerKind::Negative
    }
}
