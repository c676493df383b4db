//! Reference optima with certificates, used to audit solver runs.
//!
//! `certified_minimum` runs a pairwise conditional-gradient method with
//! exact line search to high accuracy and keeps the best Wolfe-gap lower
//! bound seen, so every answer carries an interval `[lower_bound, value]`
//! that contains `f*`. It shares no code with the lazy solvers beyond the
//! domain's LMO.

use alloc::vec::Vec;

use crate::active_set::ActiveSet;
use crate::domains::Domain;
use crate::error::Result;
use crate::linalg::{dot, sub};
use crate::objectives::{line_search_with_gradient, Objective};

#[derive(Debug, Clone, PartialEq)]
pub struct Certified {
    pub point: Vec<f64>,
    pub value: f64,
    /// `f* >= lower_bound`
    pub lower_bound: f64,
    pub iterations: usize,
}

impl Certified {
    pub fn width(&self) -> f64 {
        self.value - self.lower_bound
    }
}

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITERS: usize = 200_000;

/// Minimizes `f` over `domain` until `value - lower_bound <= tol·(1 + |value|)`
/// or `max_iters` pairwise steps.
pub fn certified_minimum<F: Objective + ?Sized>(
    f: &F,
    domain: &Domain,
    tol: f64,
    max_iters: usize,
) -> Result<Certified> {
    let mut active = ActiveSet::from_vertex(domain.start_vertex()?);
    let mut x = active.point();
    let mut lower = f64::NEG_INFINITY;
    let mut iterations = 0;
    loop {
        let fx = f.value(&x);
        let g = f.gradient(&x);
        let (gap, plus) = domain.dual_gap(&g, &x)?;
        lower = lower.max(fx - gap.max(0.0));
        if fx - lower <= tol * (1.0 + libm::fabs(fx)) || iterations >= max_iters {
            return Ok(Certified {
                point: x,
                value: fx,
                lower_bound: lower,
                iterations,
            });
        }
        iterations += 1;
        let (away, _) = active
            .atoms()
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.vertex.dot(&g)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let max_step = active.atoms()[away].weight;
        let away_vertex = active.atoms()[away].vertex.clone();
        let mut d = sub(&plus.coords, &away_vertex.coords);
        if dot(&g, &d) >= 0.0 {
            // numerically stationary: nothing left to gain
            return Ok(Certified {
                point: x,
                value: fx,
                lower_bound: lower,
                iterations,
            });
        }
        d.iter_mut().for_each(|di| *di *= max_step);
        let gamma = line_search_with_gradient(f, &x, &d, &g);
        if gamma <= 0.0 {
            return Ok(Certified {
                point: x,
                value: fx,
                lower_bound: lower,
                iterations,
            });
        }
        active.transfer(away, &plus, gamma * max_step);
        x = active.point();
    }
}

/// Exact minimum of a linear function `c·x + b` (one LMO call).
pub fn linear_minimum(domain: &Domain, c: &[f64], b: f64) -> Result<f64> {
    Ok(domain.lmo(c)?.dot(c) + b)
}
