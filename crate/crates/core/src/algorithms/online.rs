use super::params::{locg_gamma, locg_h_first, locg_h_update, locg_phi, OnlineGamma};
use super::{answer_kind, Run, SolverConfig};
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::linalg::{check_dim, norm2};
use crate::objectives::{adversarial_wrapper, Aggregate, LossStream, Objective, QuadraticForm};
use crate::reference::{certified_minimum, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::trace::{Clock, OnlineRecord, RunTrace};

struct OnlineParams {
    curvature: f64,
    strong_convexity: f64,
    b: f64,
    s: f64,
    gamma: OnlineGamma,
    /// `(L, k)` of the surrogate wrapper, if any.
    wrapper: Option<(f64, f64)>,
}

/// Lower bound on `min_P F`: exact for linear `F`, certified otherwise.
fn aggregate_floor(domain: &Domain, form: &QuadraticForm) -> Result<f64> {
    if form.is_linear() {
        Ok(domain.lmo(&form.linear)?.dot(&form.linear) + form.constant)
    } else {
        Ok(certified_minimum(form, domain, DEFAULT_TOL, DEFAULT_MAX_ITERS)?.lower_bound)
    }
}

/// Lazy online conditional gradient. Round `t` plays `x_t`, receives
/// `f_t`, and queries the oracle with the aggregate gradient
/// `Σ_{i<=t} ∇f_i(x_t)` at threshold `Φ_t`. On a positive answer `Φ_t` is
/// replaced by `h_t - F_t(x_t) + F_t(x_{t+1})`.
///
/// Curvature defaults to the largest per-loss curvature (0 for linear
/// streams), strong convexity to 0; the exponents `b, s` and the step rule
/// come from the config.
pub fn lazy_online_cg<C: Clock + ?Sized>(
    stream: &LossStream,
    domain: &Domain,
    config: &SolverConfig,
    clock: &C,
) -> Result<RunTrace> {
    let curvature = config.curvature.unwrap_or_else(|| {
        stream
            .losses()
            .iter()
            .map(|l| l.meta.curvature)
            .fold(0.0, f64::max)
    });
    let params = OnlineParams {
        curvature,
        strong_convexity: config.strong_convexity.unwrap_or(0.0),
        b: config.online_b,
        s: config.online_s,
        gamma: config.online_gamma,
        wrapper: None,
    };
    online_core("lazy_online_cg", stream, domain, config, clock, params)
}

/// Online learning against arbitrary convex losses: each raw loss is
/// replaced by the strongly convex surrogate of
/// [`adversarial_wrapper`] around the start vertex, with `b = s = 1/4`,
/// `C = L√k`, `S = L/√k` and the strongly convex step rule. Regret is
/// measured on the raw losses.
pub fn run_adversarial<C: Clock + ?Sized>(
    stream: &LossStream,
    domain: &Domain,
    config: &SolverConfig,
    clock: &C,
) -> Result<RunTrace> {
    let lipschitz = stream.lipschitz().max(f64::MIN_POSITIVE);
    let k = domain.l1_diameter();
    let sqrt_k = libm::sqrt(k);
    let params = OnlineParams {
        curvature: lipschitz * sqrt_k,
        strong_convexity: lipschitz / sqrt_k,
        b: 0.25,
        s: 0.25,
        gamma: OnlineGamma::StronglyConvex,
        wrapper: Some((lipschitz, k)),
    };
    online_core("run_adversarial", stream, domain, config, clock, params)
}

fn online_core<C: Clock + ?Sized>(
    algorithm: &str,
    stream: &LossStream,
    domain: &Domain,
    config: &SolverConfig,
    clock: &C,
    p: OnlineParams,
) -> Result<RunTrace> {
    check_dim(domain.dimension(), &stream.loss(1).linear)?;
    if !(p.curvature >= 0.0) {
        return Err(Error::Config("online curvature must be non-negative".into()));
    }
    let mut run = Run::new(algorithm, domain, config, clock)?;
    let k = config.k;
    let diameter = domain.l2_diameter();
    let anchor = run.x.clone();
    let mut played = Aggregate::new(domain.dimension());
    let mut raw = Aggregate::new(domain.dimension());
    let mut cumulative_loss = 0.0;
    let mut phi = 0.0;
    let rounds = stream.rounds().min(config.max_iters);
    if rounds < stream.rounds() {
        run.trace.truncated = true;
    }
    for t in 1..=rounds {
        if run.out_of_time() {
            run.trace.truncated = true;
            break;
        }
        let loss = stream.loss(t);
        let surrogate = match p.wrapper {
            Some((l, kk)) => adversarial_wrapper(loss, &anchor, &run.x, l, kk, t)?,
            None => loss.clone(),
        };
        played.push(&surrogate);
        raw.push(loss);
        let loss_value = loss.value(&run.x);
        cumulative_loss += loss_value;

        let grad_norm = norm2(&surrogate.gradient(&run.x));
        let h = if t == 1 {
            locg_h_first(grad_norm, diameter, p.strong_convexity)
        } else {
            locg_h_update(phi, grad_norm, diameter, p.strong_convexity, p.s, t)
        };
        let gamma = locg_gamma(p.gamma, t, p.b, p.s);
        let phi_pre = locg_phi(h, p.curvature, t, p.b, gamma, k);

        let aggregate_grad = played.gradient(&run.x);
        let f_before = played.value(&run.x);
        let gap = run.wolfe_gap(&aggregate_grad)?;
        let answer = run.separate(&aggregate_grad, phi_pre.max(f64::MIN_POSITIVE))?;
        phi = match answer.vertex() {
            Some(v) => {
                run.step_toward(v, gamma)?;
                h - f_before + played.value(&run.x)
            }
            None => phi_pre,
        };
        run.push(t, f_before, phi, gap, answer_kind(&answer));

        let (regret, aggregate_gap) = if config.audit {
            (
                cumulative_loss - aggregate_floor(domain, raw.as_form())?,
                f_before - aggregate_floor(domain, played.as_form())?,
            )
        } else {
            (f64::NAN, f64::NAN)
        };
        run.trace.online.push(OnlineRecord {
            t,
            loss: loss_value,
            regret,
            h,
            phi_pre,
            aggregate_gap,
        });
    }
    Ok(run.finish())
}
