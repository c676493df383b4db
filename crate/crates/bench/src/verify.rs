//! Post-hoc audit of a trace file: re-executes the run, compares the
//! numeric columns bit for bit, and on enumerable domains replays the
//! convergence guarantees of the algorithm against a certified optimum.

use lazycg_core::algorithms::params::{
    llcg_alpha, llcg_envelope, lpcg_envelope, lpcg_parameters,
    negative_call_budget, parameter_free_budget, textbook_bound,
};
use lazycg_core::algorithms::SolverConfig;
use lazycg_core::reference::{certified_minimum, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use lazycg_core::trace::{NullClock, OnlineRecord};
use lazycg_core::weaksep::Backend;
use lazycg_core::{AnswerKind, IterationRecord, Objective, QuadraticObjective};

use crate::config::{Algorithm, Instance, Prepared};
use crate::runner::execute_with;
use crate::tracefile::TraceFile;

/// Domains with at most this many vertices get the convergence checks.
pub const ENUMERABLE_VERTICES: usize = 10_000;
/// Absolute slack on every bound comparison, scaled by `1 + |f*|`.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    /// Re-execution and oracle-contract checks passed; bounds not replayed.
    Skipped,
    Fail { row: Option<usize>, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub verdict: Verdict,
    pub checks: Vec<String>,
}

impl Report {
    fn fail(mut self, row: Option<usize>, reason: impl Into<String>) -> Self {
        self.verdict = Verdict::Fail {
            row,
            reason: reason.into(),
        };
        self
    }

    pub fn summary(&self) -> String {
        match &self.verdict {
            Verdict::Pass => "pass".into(),
            Verdict::Skipped => "skipped: oracle-contract checks only".into(),
            Verdict::Fail { row: Some(t), reason } => format!("fail at row t={t}: {reason}"),
            Verdict::Fail { row: None, reason } => format!("fail: {reason}"),
        }
    }
}

/// Solver settings that reproduce the recorded rows regardless of wall
/// clock: the time limit is dropped and the iteration limit pinned to what
/// the trace shows.
fn replay_config(base: &SolverConfig, file: &TraceFile, online: usize, is_online: bool) -> SolverConfig {
    let mut cfg = base.clone();
    cfg.time_limit_s = None;
    if file.run.truncated {
        cfg.max_iters = if is_online {
            online.max(1)
        } else {
            file.records.last().map_or(1, |r| r.t.saturating_sub(1).max(1))
        };
    }
    cfg
}

fn same(a: &IterationRecord, b: &IterationRecord) -> Option<&'static str> {
    if a.t != b.t {
        Some("t")
    } else if a.f.to_bits() != b.f.to_bits() {
        Some("f")
    } else if a.phi.to_bits() != b.phi.to_bits() {
        Some("phi")
    } else if a.wolfe_gap.to_bits() != b.wolfe_gap.to_bits() {
        Some("wolfe_gap")
    } else if a.lp_calls != b.lp_calls {
        Some("lp_calls")
    } else if a.cache_hits != b.cache_hits {
        Some("cache_hits")
    } else if a.answer != b.answer {
        Some("answer")
    } else {
        None
    }
}

fn same_online(a: &OnlineRecord, b: &OnlineRecord) -> Option<&'static str> {
    let bits = |x: f64| if x.is_nan() { u64::MAX } else { x.to_bits() };
    if a.t != b.t {
        Some("t")
    } else if bits(a.loss) != bits(b.loss) {
        Some("loss")
    } else if bits(a.regret) != bits(b.regret) {
        Some("regret")
    } else if bits(a.h) != bits(b.h) {
        Some("h")
    } else if bits(a.phi_pre) != bits(b.phi_pre) {
        Some("phi_pre")
    } else if bits(a.aggregate_gap) != bits(b.aggregate_gap) {
        Some("aggregate_gap")
    } else {
        None
    }
}

/// Audits `file` (and its online companion rows) against run `index` of
/// the prepared experiment.
pub fn verify(p: &Prepared, index: usize, file: &TraceFile, online: &[OnlineRecord]) -> Report {
    let report = Report {
        verdict: Verdict::Pass,
        checks: Vec::new(),
    };
    let spec = &p.config.runs[index];
    if file.run.algorithm != spec.algorithm.name() {
        return report.fail(
            None,
            format!(
                "trace algorithm {} differs from config {}",
                file.run.algorithm,
                spec.algorithm.name()
            ),
        );
    }
    let report = match oracle_contract(p, index, file, report) {
        Ok(r) => r,
        Err(r) => return r,
    };
    let report = match replay(p, index, file, online, report) {
        Ok(r) => r,
        Err(r) => return r,
    };
    if p.domain.enumerate_vertices(ENUMERABLE_VERTICES).is_err() {
        return Report {
            verdict: Verdict::Skipped,
            ..report
        };
    }
    match bounds(p, index, file, online, report) {
        Ok(r) | Err(r) => r,
    }
}

type Step = Result<Report, Report>;

/// Consistency of the counters with what a weak separation oracle may do.
fn oracle_contract(p: &Prepared, index: usize, file: &TraceFile, mut report: Report) -> Step {
    let lmo_backed = p.solvers[index].backend != Backend::Augmentation;
    let mut prev = (0u64, 0u64);
    for (i, r) in file.records.iter().enumerate() {
        if r.t != i + 1 {
            return Err(report.fail(Some(r.t), format!("expected t={}", i + 1)));
        }
        if r.lp_calls < prev.0 || r.cache_hits < prev.1 {
            return Err(report.fail(Some(r.t), "oracle counters decreased"));
        }
        if lmo_backed && r.answer == AnswerKind::Negative && r.lp_calls == prev.0 {
            return Err(report.fail(Some(r.t), "negative answer without an oracle call"));
        }
        if r.answer == AnswerKind::None && i + 1 != file.records.len() && !spec_is_online(p, index) {
            return Err(report.fail(Some(r.t), "query-free row before the end of the trace"));
        }
        prev = (r.lp_calls, r.cache_hits);
    }
    let pos = file.records.iter().filter(|r| r.answer == AnswerKind::Positive).count() as u64;
    let neg = file.records.iter().filter(|r| r.answer == AnswerKind::Negative).count() as u64;
    if neg > file.negative || pos > file.positive {
        return Err(report.fail(None, "summary answer counts below the rows' counts"));
    }
    report.checks.push("oracle counters consistent".into());
    Ok(report)
}

fn spec_is_online(p: &Prepared, index: usize) -> bool {
    p.config.runs[index].algorithm.is_online()
}

fn replay(
    p: &Prepared,
    index: usize,
    file: &TraceFile,
    online: &[OnlineRecord],
    mut report: Report,
) -> Step {
    let is_online = spec_is_online(p, index);
    let cfg = replay_config(&p.solvers[index], file, online.len(), is_online);
    let fresh = match execute_with(p, index, &cfg, &NullClock) {
        Ok(t) => t,
        Err(e) => return Err(report.fail(None, format!("re-execution failed: {e}"))),
    };
    for (a, b) in file.records.iter().zip(&fresh.records) {
        if let Some(col) = same(a, b) {
            return Err(report.fail(Some(a.t), format!("column {col} differs from re-execution")));
        }
    }
    if file.records.len() != fresh.records.len() {
        return Err(report.fail(
            None,
            format!(
                "trace has {} rows, re-execution {}",
                file.records.len(),
                fresh.records.len()
            ),
        ));
    }
    if is_online {
        for (a, b) in online.iter().zip(&fresh.online) {
            if let Some(col) = same_online(a, b) {
                return Err(report.fail(Some(a.t), format!("online column {col} differs from re-execution")));
            }
        }
        if online.len() != fresh.online.len() {
            return Err(report.fail(None, "online companion row count differs from re-execution"));
        }
    }
    if file.run.phi0.to_bits() != fresh.phi0.to_bits() {
        return Err(report.fail(None, "phi0 differs from re-execution"));
    }
    report.checks.push("re-execution matches bit for bit".into());
    Ok(report)
}

fn bounds(
    p: &Prepared,
    index: usize,
    file: &TraceFile,
    online: &[OnlineRecord],
    mut report: Report,
) -> Step {
    let cfg = &p.solvers[index];
    let algorithm = p.config.runs[index].algorithm;
    if let Instance::Online(_) = p.instance {
        for r in online {
            if !(r.aggregate_gap <= r.h + BOUND_SLACK * (1.0 + r.h.abs())) {
                return Err(report.fail(
                    Some(r.t),
                    format!("aggregate gap {} exceeds h = {}", r.aggregate_gap, r.h),
                ));
            }
        }
        report.checks.push("aggregate gap <= h every round".into());
        return Ok(report);
    }
    let Instance::Offline(f) = &p.instance else {
        unreachable!()
    };
    let best = match certified_minimum(f, &p.domain, DEFAULT_TOL, DEFAULT_MAX_ITERS) {
        Ok(c) => c.lower_bound,
        Err(e) => return Err(report.fail(None, format!("reference optimum failed: {e}"))),
    };
    let slack = BOUND_SLACK * (1.0 + best.abs());
    let rows = &file.records;
    let phi0 = file.run.phi0;
    let check = |ok: bool, t: usize, what: String, report: Report| -> Step {
        if ok {
            Ok(report)
        } else {
            Err(report.fail(Some(t), what))
        }
    };
    match algorithm {
        Algorithm::VanillaFw => {
            for r in rows {
                report = check(
                    r.f - best <= r.wolfe_gap + slack,
                    r.t,
                    format!("primal gap {} exceeds Wolfe gap {}", r.f - best, r.wolfe_gap),
                    report,
                )?;
            }
            report.checks.push("primal gap <= Wolfe gap".into());
        }
        Algorithm::LazyCgTextbook => {
            let c = curvature(cfg, f);
            let mut prev = phi0;
            for r in rows {
                report = check(
                    r.f - best <= prev + slack,
                    r.t,
                    format!("primal gap {} exceeds previous bound {prev}", r.f - best),
                    report,
                )?;
                let rate = textbook_bound(r.t, c, phi0, cfg.k);
                report = check(
                    r.f - best <= rate + slack,
                    r.t,
                    format!("primal gap {} exceeds rate bound {rate}", r.f - best),
                    report,
                )?;
                prev = r.phi;
            }
            report.checks.push("primal gap <= previous bound and rate bound".into());
        }
        Algorithm::LazyCgParameterFree => {
            for r in rows.iter().filter(|r| r.answer == AnswerKind::Negative) {
                report = check(
                    r.f - best <= 2.0 * r.phi + slack,
                    r.t,
                    format!("primal gap {} exceeds 2·phi = {}", r.f - best, 2.0 * r.phi),
                    report,
                )?;
            }
            let negatives = rows.iter().filter(|r| r.answer == AnswerKind::Negative).count();
            let budget = negative_call_budget(phi0, cfg.epsilon);
            if phi0 > 0.0 && negatives > budget {
                return Err(report.fail(None, format!("{negatives} negative answers exceed budget {budget}")));
            }
            if !file.run.truncated && phi0 > 0.0 {
                let iterations = rows.iter().filter(|r| r.answer != AnswerKind::None).count();
                let budget = parameter_free_budget(phi0, cfg.epsilon, cfg.k, curvature(cfg, f));
                if iterations as f64 > budget {
                    return Err(report.fail(None, format!("{iterations} iterations exceed budget {budget}")));
                }
            }
            report.checks.push("negative-row bound, negative-call budget, iteration budget".into());
        }
        Algorithm::LazyPairwiseCg => {
            let m = f.meta();
            let s = cfg.strong_convexity.unwrap_or(m.strong_convexity);
            let sparsity = cfg.sparsity.unwrap_or(p.domain.dimension()) as f64;
            let b = match lpcg_parameters(s, sparsity, cfg.k, curvature(cfg, f), phi0) {
                Ok(params) => params.b,
                Err(e) => return Err(report.fail(None, e.to_string())),
            };
            report = next_row_bounds(rows, best, slack, report, |t| lpcg_envelope(phi0, b, t))?;
            report.checks.push("next primal gap <= phi <= geometric envelope".into());
        }
        Algorithm::LazyLocalCg => {
            let m = f.meta();
            let s = cfg.strong_convexity.unwrap_or(m.strong_convexity);
            let beta = cfg.smoothness.unwrap_or(m.smoothness);
            let mu = p.domain.mu().unwrap_or(1.0);
            let alpha = llcg_alpha(s, cfg.k, beta, p.domain.dimension(), mu);
            report = next_row_bounds(rows, best, slack, report, |t| llcg_envelope(phi0, alpha, cfg.k, t))?;
            report.checks.push("next primal gap <= phi <= geometric envelope".into());
        }
        Algorithm::LazyOnlineCg | Algorithm::RunAdversarial => {}
    }
    Ok(report)
}

fn curvature(cfg: &SolverConfig, f: &QuadraticObjective) -> f64 {
    cfg.curvature.unwrap_or(f.meta().curvature)
}

/// `f(x_{t+1}) - f* <= Φ_t <= envelope(t)` on consecutive rows.
fn next_row_bounds(
    rows: &[IterationRecord],
    best: f64,
    slack: f64,
    report: Report,
    envelope: impl Fn(usize) -> f64,
) -> Step {
    for w in rows.windows(2) {
        let (now, next) = (&w[0], &w[1]);
        if now.answer == AnswerKind::None {
            continue;
        }
        if !(next.f - best <= now.phi + slack) {
            return Err(report.fail(
                Some(now.t),
                format!("next primal gap {} exceeds phi = {}", next.f - best, now.phi),
            ));
        }
        let e = envelope(now.t);
        if !(now.phi <= e * (1.0 + 1e-12) + slack) {
            return Err(report.fail(Some(now.t), format!("phi = {} exceeds envelope {e}", now.phi)));
        }
    }
    Ok(report)
}
