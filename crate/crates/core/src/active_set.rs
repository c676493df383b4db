//! Convex decompositions `x = Σ λᵢ vᵢ` maintained alongside the iterates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::domains::Vertex;
use crate::error::{Error, Result};
use crate::linalg::axpy;

/// Weights below this are dropped.
pub const WEIGHT_DROP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub vertex: Vertex,
    pub weight: f64,
}

/// Atoms are kept in insertion order; several oracles break ties by it.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    atoms: Vec<Atom>,
}

impl ActiveSet {
    pub fn from_vertex(v: Vertex) -> Self {
        Self {
            atoms: vec![Atom {
                vertex: v,
                weight: 1.0,
            }],
        }
    }

    /// Builds a decomposition from explicit (vertex, weight) pairs; weights
    /// must be positive and sum to one.
    pub fn from_atoms(atoms: Vec<(Vertex, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("active set needs at least one atom".into()));
        }
        if atoms.iter().any(|(_, w)| !(*w > 0.0)) {
            return Err(Error::InvalidInput("atom weights must be positive".into()));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if libm::fabs(total - 1.0) > 1e-9 {
            return Err(Error::InvalidInput(format!("atom weights sum to {total}")));
        }
        Ok(Self {
            atoms: atoms
                .into_iter()
                .map(|(vertex, weight)| Atom { vertex, weight })
                .collect(),
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, |a| a.vertex.dim())
    }

    pub fn position(&self, v: &Vertex) -> Option<usize> {
        self.atoms.iter().position(|a| a.vertex.coords == v.coords)
    }

    pub fn weight_of(&self, v: &Vertex) -> f64 {
        self.position(v).map_or(0.0, |i| self.atoms[i].weight)
    }

    /// `Σ λᵢ vᵢ`
    pub fn point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for a in &self.atoms {
            axpy(a.weight, &a.vertex.coords, &mut x);
        }
        x
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    fn credit(&mut self, v: &Vertex, w: f64) {
        match self.position(v) {
            Some(i) => self.atoms[i].weight += w,
            None => self.atoms.push(Atom {
                vertex: v.clone(),
                weight: w,
            }),
        }
    }

    /// `x ← (1-γ)x + γv`
    pub fn frank_wolfe_step(&mut self, v: &Vertex, gamma: f64) {
        if gamma <= 0.0 {
            return;
        }
        if gamma >= 1.0 {
            *self = Self::from_vertex(v.clone());
            return;
        }
        for a in &mut self.atoms {
            a.weight *= 1.0 - gamma;
        }
        self.credit(v, gamma);
        self.prune();
    }

    /// Moves `eta` weight from the atom at `from` to `to`; returns the amount
    /// actually moved (clipped to the donor's weight).
    pub fn transfer(&mut self, from: usize, to: &Vertex, eta: f64) -> f64 {
        let moved = eta.min(self.atoms[from].weight).max(0.0);
        self.atoms[from].weight -= moved;
        self.credit(to, moved);
        self.prune();
        moved
    }

    /// Applies `λⱼ ← λⱼ - scale·γⱼ` on donors and credits `scale·total` to `to`.
    pub fn apply_local_transfer(&mut self, donors: &[(usize, f64)], to: &Vertex, scale: f64) {
        let mut moved = 0.0;
        for &(j, g) in donors {
            let take = (scale * g).min(self.atoms[j].weight);
            self.atoms[j].weight -= take;
            moved += take;
        }
        self.credit(to, moved);
        self.prune();
    }

    fn prune(&mut self) {
        self.atoms.retain(|a| a.weight >= WEIGHT_DROP_TOL);
        let total = self.total_weight();
        if total > 0.0 && libm::fabs(total - 1.0) > 1e-15 {
            for a in &mut self.atoms {
                a.weight /= total;
            }
        }
    }

    /// Checks `Σλ = 1` (1e-9) and that the decomposition reproduces `x`
    /// within `tol` in max-norm.
    pub fn validate(&self, x: &[f64], tol: f64) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::invariant("active-set-nonempty", "no atoms"));
        }
        let total = self.total_weight();
        if libm::fabs(total - 1.0) > 1e-9 {
            return Err(Error::invariant(
                "active-set-weights",
                format!("weights sum to {total}"),
            ));
        }
        let p = self.point();
        let err = p
            .iter()
            .zip(x)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max);
        if err > tol {
            return Err(Error::invariant(
                "active-set-reconstruction",
                format!("max deviation {err:e} exceeds {tol:e}"),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frank_wolfe_step_keeps_reconstruction() {
        let mut s = ActiveSet::from_vertex(Vertex::unit(3, 0));
        s.frank_wolfe_step(&Vertex::unit(3, 1), 0.25);
        s.frank_wolfe_step(&Vertex::unit(3, 2), 0.5);
        let x = s.point();
        assert!((x[0] - 0.375).abs() < 1e-15);
        assert!((x[1] - 0.125).abs() < 1e-15);
        assert!((x[2] - 0.5).abs() < 1e-15);
        s.validate(&x, 1e-12).unwrap();
    }

    #[test]
    fn transfer_clips_and_drops_empty_atoms() {
        let mut s = ActiveSet::from_atoms(vec![(Vertex::unit(2, 0), 0.5), (Vertex::unit(2, 1), 0.5)])
            .unwrap();
        let moved = s.transfer(1, &Vertex::unit(2, 0), 0.75);
        assert_eq!(moved, 0.5);
        assert_eq!(s.len(), 1);
        assert_eq!(s.point(), vec![1.0, 0.0]);
    }

    #[test]
    fn validate_detects_drift() {
        let s = ActiveSet::from_vertex(Vertex::unit(2, 0));
        assert!(s.validate(&[0.9, 0.1], 1e-8).is_err());
    }
}
