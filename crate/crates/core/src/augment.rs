//! Weak separation on 0/1 polytopes from a linear augmentation oracle.
//!
//! Starting at an integral atom `x₀` of the caller's decomposition with
//! `c·x₀ <= c·x`, each round augments against the perturbed objective
//! `c + ((Φ - c·(x - x_{i-1}))/k)(𝟙 - 2x_{i-1})`. For 0/1 vectors
//! `(𝟙 - 2x)·v + ‖x‖₁ = ‖v - x‖₁`, so the perturbation charges every unit
//! of ℓ₁ movement; each successful augmentation shrinks the potential
//! `Φ - c·(x - x_i)` by a factor `1 - 1/k`.

use alloc::format;
use alloc::vec::Vec;

use crate::active_set::ActiveSet;
use crate::domains::{Domain, Vertex};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::weaksep::{SeparationAnswer, SeparationOutcome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugSeparationConfig {
    accuracy: f64,
    l1_diameter: f64,
    budget: usize,
}

impl AugSeparationConfig {
    /// `accuracy` is `K > 1`; `l1_diameter` is the domain's `k` (an
    /// overestimate is sound, it only raises the call budget).
    pub fn new(accuracy: f64, l1_diameter: f64) -> Result<Self> {
        let budget = call_budget(accuracy, l1_diameter)?;
        Ok(Self {
            accuracy,
            l1_diameter,
            budget,
        })
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }
    pub fn l1_diameter(&self) -> f64 {
        self.l1_diameter
    }
    pub fn budget(&self) -> usize {
        self.budget
    }
}

/// `N = ⌈log(1 - 1/K) / log(1 - 1/k)⌉`, with `N = 1` when `k <= 1`.
pub fn call_budget(accuracy: f64, l1_diameter: f64) -> Result<usize> {
    if !(accuracy > 1.0) || !accuracy.is_finite() {
        return Err(Error::InvalidInput(format!(
            "augmentation needs accuracy K > 1, got {accuracy}"
        )));
    }
    if !(l1_diameter > 0.0) || !l1_diameter.is_finite() {
        return Err(Error::InvalidInput(format!(
            "l1 diameter must be positive, got {l1_diameter}"
        )));
    }
    if l1_diameter <= 1.0 {
        return Ok(1);
    }
    let ratio = libm::log(1.0 - 1.0 / accuracy) / libm::log(1.0 - 1.0 / l1_diameter);
    Ok((libm::ceil(ratio) as usize).max(1))
}

/// `𝟙 - 2x`
pub fn flip_objective(x: &[f64]) -> Vec<f64> {
    x.iter().map(|xi| 1.0 - 2.0 * xi).collect()
}

/// First atom (insertion order) with `c·v <= c·x`.
pub fn select_start(c: &[f64], active: &ActiveSet) -> Result<Vertex> {
    let x = active.point();
    let cx = dot(c, &x);
    let slack = 1e-12 * (1.0 + libm::fabs(cx));
    active
        .atoms()
        .iter()
        .find(|a| a.vertex.dot(c) <= cx + slack)
        .map(|a| a.vertex.clone())
        .ok_or_else(|| {
            Error::invariant(
                "augmentation-start",
                "no atom of the decomposition satisfies c·v <= c·x",
            )
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugRun {
    pub answer: SeparationAnswer,
    pub aug_calls: usize,
    /// `Φ - c·(x - x_i)` for `i = 0, 1, ...` along the augmentation path.
    pub potentials: Vec<f64>,
}

pub fn augmenting_weak_separation(
    domain: &Domain,
    config: &AugSeparationConfig,
    c: &[f64],
    x: &[f64],
    active: &ActiveSet,
    phi: f64,
) -> Result<AugRun> {
    if !domain.is_zero_one() {
        return Err(Error::Unsupported(
            "augmentation oracle requires a 0/1 polytope".into(),
        ));
    }
    if !(phi > 0.0) {
        return Err(Error::InvalidInput(format!("threshold phi must be positive, got {phi}")));
    }
    let k = config.l1_diameter;
    let cx = dot(c, x);
    let mut current = select_start(c, active)?;
    let mut potentials = Vec::new();
    let mut aug_calls = 0;
    let positive = |v: Vertex, aug_calls, potentials| AugRun {
        answer: SeparationAnswer {
            outcome: SeparationOutcome::Positive(v),
            served_from_cache: false,
            lp_called: true,
            exact_dual_gap: None,
        },
        aug_calls,
        potentials,
    };

    for _ in 0..config.budget {
        let potential = phi - (cx - current.dot(c));
        potentials.push(potential);
        if potential <= 0.0 {
            return Ok(positive(current, aug_calls, potentials));
        }
        let mut objective = flip_objective(&current.coords);
        for (o, ci) in objective.iter_mut().zip(c) {
            *o = ci + potential / k * *o;
        }
        let next = domain.augment(&objective, &current)?;
        aug_calls += 1;
        if next.coords == current.coords {
            return Ok(AugRun {
                answer: SeparationAnswer {
                    outcome: SeparationOutcome::Negative,
                    served_from_cache: false,
                    lp_called: true,
                    exact_dual_gap: None,
                },
                aug_calls,
                potentials,
            });
        }
        let next_potential = phi - (cx - next.dot(c));
        let bound = (1.0 - 1.0 / k) * potential;
        if next_potential > bound + 1e-12 * (1.0 + libm::fabs(phi)) {
            return Err(Error::invariant(
                "augmentation-potential",
                format!("potential {next_potential} exceeds (1 - 1/k)·{potential}"),
            ));
        }
        current = next;
    }
    potentials.push(phi - (cx - current.dot(c)));
    Ok(positive(current, aug_calls, potentials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn budget_examples() {
        assert_eq!(call_budget(2.0, 2.0).unwrap(), 1);
        assert_eq!(call_budget(2.0, 4.0).unwrap(), 3);
        assert_eq!(call_budget(2.0, 1.0).unwrap(), 1);
        let k_e = 1.0 / (1.0 - (-1.0f64).exp());
        for k in 1..50 {
            assert!(call_budget(k_e, k as f64).unwrap() <= k);
        }
        assert!(call_budget(1.0, 4.0).is_err());
    }

    #[test]
    fn start_is_first_qualifying_atom() {
        let s = ActiveSet::from_atoms(vec![
            (Vertex::new(vec![1.0, 0.0]), 0.5),
            (Vertex::new(vec![0.0, 1.0]), 0.5),
        ])
        .unwrap();
        assert_eq!(select_start(&[1.0, 2.0], &s).unwrap().coords, vec![1.0, 0.0]);
        assert_eq!(select_start(&[1.0, 1.0], &s).unwrap().coords, vec![1.0, 0.0]);
        let single = ActiveSet::from_vertex(Vertex::unit(2, 0));
        assert_eq!(select_start(&[5.0, 0.0], &single).unwrap().coords, vec![1.0, 0.0]);
    }

    #[test]
    fn hypercube_positive_example() {
        let d = Domain::hypercube(2).unwrap();
        let cfg = AugSeparationConfig::new(2.0, 2.0).unwrap();
        let x = [1.0, 1.0];
        let active = ActiveSet::from_vertex(Vertex::new(x.to_vec()));
        let run = augmenting_weak_separation(&d, &cfg, &[1.0, 1.0], &x, &active, 1.0).unwrap();
        assert_eq!(run.aug_calls, 1);
        assert_eq!(run.answer.vertex().unwrap().coords, vec![0.0, 1.0]);
    }

    #[test]
    fn hypercube_negative_example() {
        let d = Domain::hypercube(2).unwrap();
        let cfg = AugSeparationConfig::new(2.0, 2.0).unwrap();
        let x = [1.0, 1.0];
        let active = ActiveSet::from_vertex(Vertex::new(x.to_vec()));
        let run =
            augmenting_weak_separation(&d, &cfg, &[-1.0, -1.0], &x, &active, 1.0).unwrap();
        assert!(!run.answer.is_positive());
    }

    #[test]
    fn early_exit_without_calls() {
        let d = Domain::hypercube(2).unwrap();
        let cfg = AugSeparationConfig::new(2.0, 2.0).unwrap();
        let active = ActiveSet::from_atoms(vec![
            (Vertex::new(vec![0.0, 0.0]), 0.5),
            (Vertex::new(vec![1.0, 1.0]), 0.5),
        ])
        .unwrap();
        let x = active.point();
        // c·x = 1, c·x₀ = 0: improvement 1 >= Φ = 0.5 at the loop head.
        let run = augmenting_weak_separation(&d, &cfg, &[1.0, 1.0], &x, &active, 0.5).unwrap();
        assert_eq!(run.aug_calls, 0);
        assert_eq!(run.answer.vertex().unwrap().coords, vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_non_binary_domains() {
        let d = Domain::vertex_list(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let cfg = AugSeparationConfig::new(2.0, 2.0).unwrap();
        let active = ActiveSet::from_vertex(Vertex::new(vec![0.0, 0.0]));
        assert!(matches!(
            augmenting_weak_separation(&d, &cfg, &[1.0, 0.0], &[0.0, 0.0], &active, 1.0),
            Err(Error::Unsupported(_))
        ));
    }
}
