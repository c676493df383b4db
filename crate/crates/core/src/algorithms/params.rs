//! Step sizes, bound recurrences and guarantee envelopes of the solvers.

use alloc::format;

use crate::error::{Error, Result};

/// `2/(t+2)`
pub fn vanilla_gamma(t: usize) -> f64 {
    2.0 / (t as f64 + 2.0)
}

/// `γ_t = 2(K²+1)/(K(t+K²+2))`, clamped to 1.
pub fn lcg_schedule_gamma(t: usize, k: f64) -> f64 {
    let k2 = k * k;
    (2.0 * (k2 + 1.0) / (k * (t as f64 + k2 + 2.0))).min(1.0)
}

/// `Φ_t = (Φ_{t-1} + Cγ²/2)/(1 + γ/K)`
pub fn lcg_phi_update(phi_prev: f64, curvature: f64, gamma: f64, k: f64) -> f64 {
    (phi_prev + curvature * gamma * gamma / 2.0) / (1.0 + gamma / k)
}

/// Primal gap bound of the textbook lazy method after `t` iterations:
/// `2·max{C, Φ₀}(K²+1)/(t+K²+2)`.
pub fn textbook_bound(t: usize, curvature: f64, phi0: f64, k: f64) -> f64 {
    let k2 = k * k;
    2.0 * curvature.max(phi0) * (k2 + 1.0) / (t as f64 + k2 + 2.0)
}

/// Iteration budget of the parameter-free method for primal accuracy
/// `eps`; negative logarithms are clamped to zero.
pub fn parameter_free_budget(phi0: f64, eps: f64, k: f64, curvature: f64) -> f64 {
    let log_eps = libm::ceil(libm::log2(phi0 / eps)).max(0.0);
    let log_c = if curvature > 0.0 {
        libm::ceil(libm::log2(phi0 / (k * curvature))).max(0.0)
    } else {
        0.0
    };
    log_eps + 1.0 + 4.0 * k * log_c + 16.0 * k * k * curvature / eps
}

/// Most negative answers the parameter-free method receives before its
/// Wolfe gap drops to `eps`: `⌈log₂(Φ₀/ε)⌉ + 1`.
pub fn negative_call_budget(phi0: f64, eps: f64) -> usize {
    libm::ceil(libm::log2(phi0 / eps)).max(0.0) as usize + 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseParams {
    pub m1: f64,
    pub kappa: f64,
    pub b: f64,
}

/// `M₁ = √(S/(8α))`, `κ = min{M₁/(KC), 1/√Φ₀}`, `B = κM₁/(2K)`.
pub fn lpcg_parameters(
    strong_convexity: f64,
    sparsity: f64,
    k: f64,
    curvature: f64,
    phi0: f64,
) -> Result<PairwiseParams> {
    for (name, v) in [
        ("S", strong_convexity),
        ("alpha", sparsity),
        ("K", k),
        ("C", curvature),
        ("phi0", phi0),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    let m1 = libm::sqrt(strong_convexity / (8.0 * sparsity));
    let kappa = (m1 / (k * curvature)).min(1.0 / libm::sqrt(phi0));
    Ok(PairwiseParams {
        m1,
        kappa,
        b: kappa * m1 / (2.0 * k),
    })
}

/// `Φ_t = (2Φ_{t-1} + η²C)/(2 + η/(KΔ))`
pub fn lpcg_phi_update(phi_prev: f64, eta: f64, curvature: f64, k: f64, delta: f64) -> f64 {
    (2.0 * phi_prev + eta * eta * curvature) / (2.0 + eta / (k * delta))
}

/// `Δ_t = √(2αΦ_{t-1}/S)`
pub fn lpcg_delta(phi_prev: f64, sparsity: f64, strong_convexity: f64) -> f64 {
    libm::sqrt(2.0 * sparsity * phi_prev / strong_convexity)
}

/// `Φ₀((1+B)/(1+2B))^t`
pub fn lpcg_envelope(phi0: f64, b: f64, t: usize) -> f64 {
    phi0 * libm::pow((1.0 + b) / (1.0 + 2.0 * b), t as f64)
}

/// Largest `2^{-δ}` (`δ >= 0`) not exceeding `η`.
pub fn eta_round(eta: f64) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidInput(format!("step must be positive, got {eta}")));
    }
    if eta >= 1.0 {
        return Ok(1.0);
    }
    // eta = m·2^exp with m in [0.5, 1)
    let (_, exp) = libm::frexp(eta);
    Ok(libm::ldexp(1.0, exp - 1))
}

/// `α = min{1, S/(2Kβnμ²)}`
pub fn llcg_alpha(strong_convexity: f64, k: f64, smoothness: f64, n: usize, mu: f64) -> f64 {
    (strong_convexity / (2.0 * k * smoothness * n as f64 * mu * mu)).min(1.0)
}

/// `r_t = √(2Φ_{t-1}/S)`
pub fn llcg_radius(phi_prev: f64, strong_convexity: f64) -> f64 {
    libm::sqrt(2.0 * phi_prev / strong_convexity)
}

/// `Φ_t = (Φ_{t-1} + (β/2)α²·min{nμ²r², D²})/(1 + α/K)`
#[allow(clippy::too_many_arguments)]
pub fn llcg_phi_update(
    phi_prev: f64,
    smoothness: f64,
    alpha: f64,
    n: usize,
    mu: f64,
    r: f64,
    diameter: f64,
    k: f64,
) -> f64 {
    let reach = (n as f64 * mu * mu * r * r).min(diameter * diameter);
    (phi_prev + smoothness / 2.0 * alpha * alpha * reach) / (1.0 + alpha / k)
}

/// `Φ₀((1 + α/(2K))/(1 + α/K))^t`
pub fn llcg_envelope(phi0: f64, alpha: f64, k: f64, t: usize) -> f64 {
    phi0 * libm::pow((1.0 + alpha / (2.0 * k)) / (1.0 + alpha / k), t as f64)
}

/// `h₁ = min{‖∇₁‖D, 2‖∇₁‖²/S}`; only the first branch when `S = 0`.
pub fn locg_h_first(grad_norm: f64, diameter: f64, strong_convexity: f64) -> f64 {
    let d_branch = grad_norm * diameter;
    if strong_convexity > 0.0 {
        d_branch.min(2.0 * grad_norm * grad_norm / strong_convexity)
    } else {
        d_branch
    }
}

/// `h_t = Φ_{t-1} + min{‖∇_t‖D, 2q + 2√(q(q + Φ_{t-1}))}` with
/// `q = ‖∇_t‖²/(2St^{1-s})`; only the first branch when `S = 0`.
pub fn locg_h_update(
    phi_prev: f64,
    grad_norm: f64,
    diameter: f64,
    strong_convexity: f64,
    s: f64,
    t: usize,
) -> f64 {
    let d_branch = grad_norm * diameter;
    if strong_convexity <= 0.0 {
        return phi_prev + d_branch;
    }
    let q = grad_norm * grad_norm / (2.0 * strong_convexity * libm::pow(t as f64, 1.0 - s));
    let s_branch = 2.0 * q + 2.0 * libm::sqrt(q * (q + phi_prev));
    phi_prev + d_branch.min(s_branch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OnlineGamma {
    /// `γ_t = t^{-(1-b)/2}`
    #[default]
    Smooth,
    /// `γ_t = t^{(b+s-2)/3}` for strongly convex losses.
    StronglyConvex,
}

pub fn locg_gamma(rule: OnlineGamma, t: usize, b: f64, s: f64) -> f64 {
    let t = t as f64;
    let g = match rule {
        OnlineGamma::Smooth => libm::pow(t, -(1.0 - b) / 2.0),
        OnlineGamma::StronglyConvex => libm::pow(t, (b + s - 2.0) / 3.0),
    };
    g.min(1.0)
}

/// `Φ_t = (h_t + Ct^{1-b}γ²/(2(1-b)))/(1 + γ/K)` before the oracle call.
pub fn locg_phi(h: f64, curvature: f64, t: usize, b: f64, gamma: f64, k: f64) -> f64 {
    let c_t = curvature * libm::pow(t as f64, 1.0 - b) / (1.0 - b);
    (h + c_t * gamma * gamma / 2.0) / (1.0 + gamma / k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(lcg_schedule_gamma(1, 1.0), 1.0);
        assert!(close(lcg_schedule_gamma(2, 1.0), 0.8));
        assert!(close(lcg_schedule_gamma(1, 2.0), 10.0 / 14.0));
        assert!(close(vanilla_gamma(1), 2.0 / 3.0));
    }

    #[test]
    fn phi_update_examples() {
        assert!(close(lcg_phi_update(1.0, 1.0, 1.0, 1.0), 0.75));
        assert!(close(lcg_phi_update(2.0, 0.0, 0.5, 1.0), 4.0 / 3.0));
        assert!(close(lcg_phi_update(0.3, 5.0, 0.0, 1.0), 0.3));
    }

    #[test]
    fn parameter_free_budget_example() {
        assert_eq!(parameter_free_budget(1.0, 1e-2, 1.0, 1.0), 1608.0);
        assert_eq!(negative_call_budget(1.0, 1e-2), 8);
    }

    #[test]
    fn pairwise_examples() {
        let p = lpcg_parameters(8.0, 1.0, 1.0, 2.0, 1.0).unwrap();
        assert!(close(p.m1, 1.0));
        assert!(close(p.kappa, 0.5));
        assert!(close(p.b, 0.25));
        let p = lpcg_parameters(8.0, 1.0, 1.0, 2.0, 1e300).unwrap();
        assert!(close(p.kappa, 1e-150));
        let p = lpcg_parameters(8.0, 1.0, 1.0, 2.0, 1e-300).unwrap();
        assert!(close(p.kappa, 0.5));
        assert!(close(lpcg_phi_update(1.0, 0.5, 1.0, 1.0, 1.0), 0.9));
        assert!(close(lpcg_envelope(1.0, 0.25, 1), 1.25 / 1.5));
    }

    #[test]
    fn eta_round_examples() {
        assert_eq!(eta_round(0.3).unwrap(), 0.25);
        assert_eq!(eta_round(0.5).unwrap(), 0.5);
        assert_eq!(eta_round(1.0).unwrap(), 1.0);
        assert_eq!(eta_round(0.999).unwrap(), 0.5);
        assert!(eta_round(0.0).is_err());
        for i in 1..2000 {
            let eta = i as f64 / 2000.0;
            let r = eta_round(eta).unwrap();
            assert!(eta / 2.0 < r && r <= eta, "{eta} -> {r}");
        }
    }

    #[test]
    fn local_examples() {
        assert_eq!(llcg_alpha(2.0, 1.0, 1.0, 1, 1.0), 1.0);
        assert_eq!(llcg_alpha(1.0, 1.0, 1.0, 4, 1.0), 0.125);
        assert_eq!(llcg_alpha(1.0, 2.0, 1.0, 4, 1.0), 0.0625);
        assert_eq!(llcg_radius(2.0, 4.0), 1.0);
        // nμ²r² = 1 < D²
        assert!(close(llcg_phi_update(1.0, 1.0, 0.5, 1, 1.0, 1.0, 10.0, 1.0), 0.75));
        assert!(close(llcg_envelope(1.0, 1.0, 1.0, 1), 0.75));
    }

    #[test]
    fn online_examples() {
        assert_eq!(locg_h_first(1.0, 1.0, 4.0), 0.5);
        assert_eq!(locg_h_first(1.0, 1.0, 0.0), 1.0);
        assert_eq!(locg_h_first(0.0, 1.0, 4.0), 0.0);
        // q = 1/(2·S·t^{1-s}) = 1/2 with S = 1, t = 1
        assert!(close(locg_h_update(0.0, 1.0, 1e9, 1.0, 0.0, 1), 2.0));
        assert_eq!(locg_h_update(0.7, 0.0, 1.0, 1.0, 0.0, 3), 0.7);
        assert!(close(locg_h_update(0.2, 1.0, 0.1, 1e-12, 0.0, 3), 0.3));
        assert_eq!(locg_gamma(OnlineGamma::Smooth, 4, 0.0, 0.0), 0.5);
        assert_eq!(locg_gamma(OnlineGamma::StronglyConvex, 4, 0.25, 0.25), 0.5);
    }
}
