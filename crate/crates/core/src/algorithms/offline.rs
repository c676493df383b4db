use alloc::format;

use super::params::{
    lcg_phi_update, lcg_schedule_gamma, llcg_alpha, llcg_phi_update, llcg_radius, vanilla_gamma,
};
use super::{answer_kind, curvature_of, Phi0Policy, Run, SolverConfig, StepRule};
use crate::domains::{Domain, Vertex};
use crate::error::{Error, Result};
use crate::linalg::{dist2, lerp_into, sub};
use crate::objectives::{line_search_with_gradient, short_step, Objective};
use crate::trace::{AnswerKind, Clock, RunTrace};
use crate::weaksep::LocalOutcome;

impl<C: Clock + ?Sized> Run<'_, C> {
    /// `x ← (1-γ)x + γv` on both the iterate and its decomposition.
    pub(super) fn step_toward(&mut self, v: &Vertex, gamma: f64) -> Result<()> {
        if gamma > 0.0 {
            lerp_into(&mut self.x, &v.coords, gamma);
            self.active.frank_wolfe_step(v, gamma);
        }
        self.check_feasible()
    }
}

fn line_step<F: Objective + ?Sized>(f: &F, x: &[f64], v: &Vertex, grad: &[f64]) -> f64 {
    line_search_with_gradient(f, x, &sub(&v.coords, x), grad)
}

/// Classical conditional gradient: one LMO call per iteration, step
/// `2/(t+2)` or line search. The `phi` column holds the Wolfe gap.
pub fn vanilla_fw<F: Objective + ?Sized, C: Clock + ?Sized>(
    f: &F,
    domain: &Domain,
    config: &SolverConfig,
    clock: &C,
) -> Result<RunTrace> {
    let mut run = Run::new("vanilla_fw", domain, config, clock)?;
    for t in 1.. {
        let grad = f.gradient(&run.x);
        let fx = f.value(&run.x);
        let t0 = run.tic();
        let (gap, v) = domain.dual_gap(&grad, &run.x)?;
        run.toc(t0);
        if run.should_stop(t, gap) {
            run.push(t, fx, gap, gap, AnswerKind::None);
            break;
        }
        let stats = &mut run.oracle.stats;
        stats.total_queries += 1;
        stats.lp_calls += 1;
        stats.positive_answers += 1;
        let gamma = match config.step {
            StepRule::LineSearch => line_step(f, &run.x, &v, &grad),
            _ => vanilla_gamma(t),
        };
        run.step_toward(&v, gamma)?;
        run.push(t, fx, gap, gap, AnswerKind::Step);
    }
    Ok(run.finish())
}

/// Lazy conditional gradient with the predetermined schedule
/// `γ_t = 2(K²+1)/(K(t+K²+2))` and bound `Φ_t = (Φ_{t-1} + Cγ²/2)/(1+γ/K)`.
/// Maintains `f(x_t) - f* <= Φ_{t-1}`.
pub fn lazy_cg_textbook<F: Objective + ?Sized, C: Clock + ?Sized>(
    f: &F,
    domain: &Domain,
    config: &SolverConfig,
    clock: &C,
) -> Result<RunTrace> {
    let curvature = curvature_of(config, f.meta().curvature);
    if !(curvature > 0.0) {
        return Err(Error::Config(
            "textbook lazy CG needs the curvature C; use the parameter-free solver instead".into(),
        ));
    }
    if config.step == StepRule::ShortStep {
        return Err(Error::Config(
            "textbook lazy CG steps by its schedule or by line search".into(),
        ));
    }
    let k = config.k;
    let mut run = Run::new("lazy_cg_textbook", domain, config, clock)?;
    let grad = f.gradient(&run.x);
    let mut phi = run.initial_bound(&grad)?;
    run.trace.phi0 = phi;
    for t in 1.. {
        let grad = f.gradient(&run.x);
        let fx = f.value(&run.x);
        let gap = run.wolfe_gap(&grad)?;
        if run.should_stop(t, gap) {
            run.push(t, fx, phi, gap, AnswerKind::None);
            break;
        }
        let gamma = lcg_schedule_gamma(t, k);
        let phi_t = lcg_phi_update(phi, curvature, gamma, k);
        let answer = run.separate(&grad, phi_t)?;
        if let Some(v) = answer.vertex() {
            let step = match config.step {
                StepRule::LineSearch => line_step(f, &run.x, v, &grad),
                _ => gamma,
            };
            run.step_toward(v, step)?;
        }
        run.push(t, fx, phi_t, gap, answer_kind(&answer));
        phi = phi_t;
    }
    Ok(run.finish())
}

/// Parameter-free lazy conditional gradient: query at `Φ_{t-1}`, halve on
/// negative answers, line search (or short step) on positive ones.
/// Maintains `f(x_{t+1}) - f* <= 2Φ_t`.
pub fn lazy_cg_parameter_free<F: Objective + ?Sized, C: Clock + ?Sized>(
    f: &F,
    domain: &Domain,
    config: &SolverConfig,
    clock: &C,
) -> Result<RunTrace> {
    let curvature = curvature_of(config, f.meta().curvature);
    match config.step {
        StepRule::Schedule => {
            return Err(Error::Config(
                "parameter-free lazy CG steps by line search or short step".into(),
            ))
        }
        StepRule::ShortStep if !(curvature > 0.0) => {
            return Err(Error::Config("short step needs the curvature C".into()))
        }
        _ => {}
    }
    let k = config.k;
    let mut run = Run::new("lazy_cg_parameter_free", domain, config, clock)?;
    let grad = f.gradient(&run.x);
    let bound = run.initial_bound(&grad)?;
    let mut phi = match config.phi0 {
        Phi0Policy::ExactLp => bound / 2.0,
        _ => bound,
    };
    run.trace.phi0 = phi;
    for t in 1.. {
        let grad = f.gradient(&run.x);
        let fx = f.value(&run.x);
        let gap = run.wolfe_gap(&grad)?;
        if phi <= 0.0 || run.should_stop(t, gap) {
            run.push(t, fx, phi, gap, AnswerKind::None);
            break;
        }
        let answer = run.separate(&grad, phi)?;
        let next = match answer.vertex() {
            Some(v) => {
                let step = match config.step {
                    StepRule::ShortStep => short_step(phi, k, curvature),
                    _ => line_step(f, &run.x, v, &grad),
                };
                run.step_toward(v, step)?;
                phi
            }
            None => match answer.exact_dual_gap {
                Some(g) if config.improved_negative => g / 2.0,
                _ => phi / 2.0,
            },
        };
        run.push(t, fx, next, gap, answer_kind(&answer));
        phi = next;
    }
    Ok(run.finish())
}

/// Lazy local conditional gradient for `β`-smooth, `S`-strongly convex
/// objectives: weak local separation in a ball of radius
/// `r_t = √(2Φ_{t-1}/S)` and fixed step `α = min{1, S/(2Kβnμ²)}`.
/// Maintains `f(x_{t+1}) - f* <= Φ_t`.
pub fn lazy_local_cg<F: Objective + ?Sized, C: Clock + ?Sized>(
    f: &F,
    domain: &Domain,
    config: &SolverConfig,
    clock: &C,
) -> Result<RunTrace> {
    let meta = f.meta();
    let s = config.strong_convexity.unwrap_or(meta.strong_convexity);
    let beta = config.smoothness.unwrap_or(meta.smoothness);
    if !(s > 0.0) || !(beta > 0.0) {
        return Err(Error::Config(
            "lazy local CG needs strong convexity S > 0 and smoothness beta > 0".into(),
        ));
    }
    let mu = domain
        .mu()
        .ok_or_else(|| Error::Config("lazy local CG needs the domain parameter mu".into()))?;
    let (k, n, diameter) = (config.k, domain.dimension(), domain.l2_diameter());
    let alpha = llcg_alpha(s, k, beta, n, mu);
    let mut run = Run::new("lazy_local_cg", domain, config, clock)?;
    let grad = f.gradient(&run.x);
    let mut phi = run.initial_bound(&grad)?;
    run.trace.phi0 = phi;
    for t in 1.. {
        let grad = f.gradient(&run.x);
        let fx = f.value(&run.x);
        let gap = run.wolfe_gap(&grad)?;
        if phi <= 0.0 || run.should_stop(t, gap) {
            run.push(t, fx, phi, gap, AnswerKind::None);
            break;
        }
        let r = llcg_radius(phi, s);
        let phi_t = llcg_phi_update(phi, beta, alpha, n, mu, r, diameter, k);
        let t0 = run.tic();
        let answer = run
            .oracle
            .separate_local(domain, &grad, &run.active, r, phi_t, k)?;
        run.toc(t0);
        let kind = answer_kind(&answer.inner);
        if let LocalOutcome::Positive(step) = answer.outcome {
            let reach = libm::sqrt(n as f64) * mu * r;
            let moved = dist2(&run.x, &step.point);
            if moved > reach + 1e-9 {
                return Err(Error::invariant(
                    "local-separation-radius",
                    format!("step of length {moved} exceeds sqrt(n)·mu·r = {reach}"),
                ));
            }
            lerp_into(&mut run.x, &step.point, alpha);
            run.active
                .apply_local_transfer(&step.donors, &step.vertex, alpha);
            run.check_feasible()?;
        }
        run.push(t, fx, phi_t, gap, kind);
        phi = phi_t;
    }
    Ok(run.finish())
}
