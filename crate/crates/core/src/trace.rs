//! Per-iteration run records and the injected clock.

use alloc::string::String;
use alloc::vec::Vec;

use crate::weaksep::OracleStats;

/// Monotonic time source in seconds. `core` has no clock, so callers
/// inject one; [`NullClock`] disables time limits and timing columns.
pub trait Clock {
    fn now_s(&self) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_s(&self) -> f64 {
        0.0
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now_s(&self) -> f64 {
        (**self).now_s()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnswerKind {
    Positive,
    Negative,
    /// Non-lazy step with an exact LMO vertex.
    Step,
    /// Terminal row: no oracle query was made.
    None,
}

impl AnswerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnswerKind::Positive => "positive",
            AnswerKind::Negative => "negative",
            AnswerKind::Step => "step",
            AnswerKind::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "positive" => AnswerKind::Positive,
            "negative" => AnswerKind::Negative,
            "step" => AnswerKind::Step,
            "none" => AnswerKind::None,
            _ => return None,
        })
    }
}

/// One row per iteration `t`: `f` and `wolfe_gap` are measured at `x_t`
/// before the query, `phi` is the bound the solver holds after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub f: f64,
    pub phi: f64,
    pub wolfe_gap: f64,
    pub lp_calls: u64,
    pub cache_hits: u64,
    pub answer: AnswerKind,
    pub elapsed_s: f64,
}

/// Extra per-round columns of online runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineRecord {
    pub t: usize,
    /// `f_t(x_t)` of the raw loss.
    pub loss: f64,
    /// `Σ_{i<=t} f_i(x_i) - min_x Σ_{i<=t} f_i(x)` on raw losses.
    pub regret: f64,
    pub h: f64,
    /// `Φ_t` before a positive answer overwrote it.
    pub phi_pre: f64,
    /// `F_t(x_t) - min F_t` of the aggregate the solver optimizes.
    pub aggregate_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub algorithm: String,
    pub records: Vec<IterationRecord>,
    pub online: Vec<OnlineRecord>,
    pub phi0: f64,
    pub stats: OracleStats,
    /// Stopped by the iteration or time limit rather than the gap target.
    pub truncated: bool,
    /// Pairwise steps shortened to the away vertex's weight.
    pub truncated_steps: usize,
    pub solver_time_s: f64,
    pub oracle_time_s: f64,
    pub final_point: Vec<f64>,
}

impl RunTrace {
    pub fn new(algorithm: &str) -> Self {
        Self {
            algorithm: algorithm.into(),
            ..Self::default()
        }
    }

    pub fn cache_hit_rate(&self) -> f64 {
        self.stats.cache_hit_rate()
    }

    /// Rows that carry an oracle query.
    pub fn iterations(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.answer != AnswerKind::None)
            .count()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn negatives(&self) -> usize {
        self.count(AnswerKind::Negative)
    }

    pub fn positives(&self) -> usize {
        self.count(AnswerKind::Positive)
    }

    fn count(&self, kind: AnswerKind) -> usize {
        self.records.iter().filter(|r| r.answer == kind).count()
    }
}
