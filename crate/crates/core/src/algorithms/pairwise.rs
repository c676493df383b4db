use super::params::{eta_round, lpcg_delta, lpcg_parameters, lpcg_phi_update};
use super::{curvature_of, Run, SolverConfig};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::linalg::{axpy, lerp_into};
use crate::objectives::Objective;
use crate::trace::{AnswerKind, Clock, RunTrace};
use crate::weaksep::PairOutcome;

/// Lazy pairwise conditional gradient on 0/1 polytopes for `S`-strongly
/// convex objectives. Each round queries the product oracle at threshold
/// `Φ_t/Δ_t` and moves `η̃_t` (a power of two) from the away vertex to the
/// forward vertex. Maintains `f(x_{t+1}) - f* <= Φ_t`.
///
/// On the simplex every iterate has coordinates that are multiples of the
/// current `η̃_t`, so the away vertex always carries enough weight. On other
/// domains the away vertex may hold less weight than `η̃_t` (or not be an
/// atom at all); the step is then shortened to the available weight and
/// counted in `RunTrace::truncated_steps`.
pub fn lazy_pairwise_cg<F: Objective + ?Sized, C: Clock + ?Sized>(
    f: &F,
    domain: &Domain,
    config: &SolverConfig,
    clock: &C,
) -> Result<RunTrace> {
    if !domain.is_zero_one() {
        return Err(Error::Unsupported(
            "lazy pairwise CG requires a 0/1 polytope".into(),
        ));
    }
    let meta = f.meta();
    let s = config.strong_convexity.unwrap_or(meta.strong_convexity);
    let curvature = curvature_of(config, meta.curvature);
    if !(s > 0.0) || !(curvature > 0.0) {
        return Err(Error::Config(
            "lazy pairwise CG needs strong convexity S > 0 and curvature C > 0".into(),
        ));
    }
    let sparsity = config.sparsity.unwrap_or(domain.dimension()) as f64;
    let k = config.k;
    let mut run = Run::new("lazy_pairwise_cg", domain, config, clock)?;
    let grad = f.gradient(&run.x);
    let mut phi = run.initial_bound(&grad)?;
    run.trace.phi0 = phi;
    if phi <= 0.0 {
        let fx = f.value(&run.x);
        let gap = run.wolfe_gap(&grad)?;
        run.push(1, fx, phi, gap, AnswerKind::None);
        return Ok(run.finish());
    }
    let params = lpcg_parameters(s, sparsity, k, curvature, phi)?;
    for t in 1.. {
        let grad = f.gradient(&run.x);
        let fx = f.value(&run.x);
        let gap = run.wolfe_gap(&grad)?;
        if phi <= 0.0 || run.should_stop(t, gap) {
            run.push(t, fx, phi, gap, AnswerKind::None);
            break;
        }
        let eta = (params.kappa * libm::sqrt(phi)).min(1.0);
        let delta = lpcg_delta(phi, sparsity, s);
        let phi_t = lpcg_phi_update(phi, eta, curvature, k, delta);
        let t0 = run.tic();
        let answer = run
            .oracle
            .separate_pair(domain, &grad, &run.x, phi_t / delta, k)?;
        run.toc(t0);
        let kind = match answer.outcome {
            PairOutcome::Negative => AnswerKind::Negative,
            PairOutcome::Positive { plus, minus } => {
                let eta_r = eta_round(eta)?;
                match minus {
                    Some(away) => {
                        let moved = match run.active.position(&away) {
                            Some(i) => run.active.transfer(i, &plus, eta_r),
                            None => 0.0,
                        };
                        if moved < eta_r {
                            run.trace.truncated_steps += 1;
                        }
                        axpy(moved, &plus.coords, &mut run.x);
                        axpy(-moved, &away.coords, &mut run.x);
                    }
                    None => {
                        lerp_into(&mut run.x, &plus.coords, eta_r);
                        run.active.frank_wolfe_step(&plus, eta_r);
                    }
                }
                run.check_feasible()?;
                AnswerKind::Positive
            }
        };
        run.push(t, fx, phi_t, gap, kind);
        phi = phi_t;
    }
    Ok(run.finish())
}
