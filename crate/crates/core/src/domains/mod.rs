//! Feasible regions with exact linear minimization oracles.
//!
//! Every domain is a polytope given implicitly by its vertex set. Ties in
//! every oracle are broken towards the lowest index so that runs are
//! reproducible bit for bit.

mod graph;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use graph::{Graph, PathGraph};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, check_finite, dist1, dist2, dot, norm2};

/// Default refusal threshold for [`Domain::enumerate_vertices`].
pub const DEFAULT_VERTEX_CAP: usize = 1_000_000;

/// Coordinates above this count as support.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub coords: Vec<f64>,
    /// Every coordinate is exactly 0 or 1.
    pub is_integral: bool,
}

impl Vertex {
    pub fn new(coords: Vec<f64>) -> Self {
        let is_integral = coords.iter().all(|v| *v == 0.0 || *v == 1.0);
        Self {
            coords,
            is_integral,
        }
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut coords = vec![0.0; n];
        coords[i] = 1.0;
        Self {
            coords,
            is_integral: true,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn dot(&self, c: &[f64]) -> f64 {
        dot(&self.coords, c)
    }

    pub fn support(&self) -> Vec<usize> {
        support_of(&self.coords)
    }
}

/// Indices of coordinates strictly above [`SUPPORT_TOL`] in absolute value.
pub fn support_of(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| libm::fabs(**v) > SUPPORT_TOL)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    /// `{x >= 0, Σx = 1}`
    ProbabilitySimplex,
    /// `[0,1]^n`
    Hypercube,
    /// Convex hull of source-sink path incidence vectors of a DAG.
    ShortestPath(PathGraph),
    /// Convex hull of spanning-tree edge incidence vectors of a connected graph.
    SpanningTree(Graph),
    /// Convex hull of an explicit, non-empty vertex list.
    VertexList(Vec<Vertex>),
}

/// A polytope with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    dimension: usize,
    l2_diameter: f64,
    l1_diameter: f64,
    radius: f64,
    mu: Option<f64>,
    is_zero_one: bool,
}

impl Domain {
    pub fn simplex(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("simplex dimension must be positive".into()));
        }
        Ok(Self {
            kind: DomainKind::ProbabilitySimplex,
            dimension: n,
            l2_diameter: libm::sqrt(2.0),
            l1_diameter: 2.0,
            radius: 1.0,
            mu: Some(1.0),
            is_zero_one: true,
        })
    }

    pub fn hypercube(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("hypercube dimension must be positive".into()));
        }
        Ok(Self {
            kind: DomainKind::Hypercube,
            dimension: n,
            l2_diameter: libm::sqrt(n as f64),
            l1_diameter: n as f64,
            radius: libm::sqrt(n as f64),
            mu: None,
            is_zero_one: true,
        })
    }

    pub fn shortest_path(graph: Graph, source: usize, sink: usize) -> Result<Self> {
        let pg = PathGraph::new(graph, source, sink)?;
        let m = pg.graph.edge_count();
        let (_, longest) = pg.path_stats();
        let k = ((2 * longest).min(m)).max(1) as f64;
        Ok(Self {
            dimension: m,
            l2_diameter: libm::sqrt(k),
            l1_diameter: k,
            radius: libm::sqrt(longest.max(1) as f64),
            mu: None,
            is_zero_one: true,
            kind: DomainKind::ShortestPath(pg),
        })
    }

    pub fn spanning_tree(graph: Graph) -> Result<Self> {
        if !graph::is_connected(&graph, None) {
            return Err(Error::InvalidInput("spanning tree graph is not connected".into()));
        }
        let m = graph.edge_count();
        let k = ((2 * (graph.nodes - 1)).min(m)).max(1) as f64;
        Ok(Self {
            dimension: m,
            l2_diameter: libm::sqrt(k),
            l1_diameter: k,
            radius: libm::sqrt((graph.nodes - 1).max(1) as f64),
            mu: None,
            is_zero_one: true,
            kind: DomainKind::SpanningTree(graph),
        })
    }

    pub fn vertex_list(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidInput("vertex list is empty".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::InvalidInput("vertices must have positive dimension".into()));
        }
        for v in &vertices {
            check_dim(n, v)?;
            check_finite(v)?;
        }
        let mut dedup: Vec<Vertex> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if !dedup.iter().any(|w| w.coords == v) {
                dedup.push(Vertex::new(v));
            }
        }
        let (d2, d1) = if dedup.len() <= 5000 {
            let mut d2: f64 = 0.0;
            let mut d1: f64 = 0.0;
            for (i, a) in dedup.iter().enumerate() {
                for b in &dedup[i + 1..] {
                    d2 = d2.max(dist2(&a.coords, &b.coords));
                    d1 = d1.max(dist1(&a.coords, &b.coords));
                }
            }
            (d2, d1)
        } else {
            let r2 = dedup.iter().map(|v| norm2(&v.coords)).fold(0.0, f64::max);
            let r1 = dedup.iter().map(|v| crate::linalg::norm1(&v.coords)).fold(0.0, f64::max);
            (2.0 * r2, 2.0 * r1)
        };
        let is_zero_one = dedup.iter().all(|v| v.is_integral);
        let radius = dedup.iter().map(|v| norm2(&v.coords)).fold(0.0, f64::max);
        Ok(Self {
            dimension: n,
            l2_diameter: if d2 > 0.0 { d2 } else { 1.0 },
            l1_diameter: if d1 > 0.0 { d1 } else { 1.0 },
            radius,
            mu: None,
            is_zero_one,
            kind: DomainKind::VertexList(dedup),
        })
    }

    /// Attaches the local-decomposition parameter μ (must be ≥ 1).
    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        if !(mu >= 1.0) || !mu.is_finite() {
            return Err(Error::InvalidInput(format!("mu must be >= 1, got {mu}")));
        }
        self.mu = Some(mu);
        Ok(self)
    }

    /// Replaces the diameter metadata; the values must remain upper bounds.
    pub fn with_diameters(mut self, l2: f64, l1: f64) -> Result<Self> {
        if !(l2 > 0.0 && l1 > 0.0) {
            return Err(Error::InvalidInput("diameters must be positive".into()));
        }
        self.l2_diameter = l2;
        self.l1_diameter = l1;
        Ok(self)
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }
    pub fn dimension(&self) -> usize {
        self.dimension
    }
    /// Upper bound `D` on `‖v - w‖₂` over vertex pairs.
    pub fn l2_diameter(&self) -> f64 {
        self.l2_diameter
    }
    /// Upper bound `k` on `‖v - w‖₁` over vertex pairs.
    pub fn l1_diameter(&self) -> f64 {
        self.l1_diameter
    }
    /// Upper bound on `‖x‖₂` over the domain.
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn mu(&self) -> Option<f64> {
        self.mu
    }
    pub fn is_zero_one(&self) -> bool {
        self.is_zero_one
    }

    fn check_objective(&self, c: &[f64]) -> Result<()> {
        check_dim(self.dimension, c)?;
        check_finite(c)
    }

    fn support_mask(&self, support: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.dimension];
        for &i in support {
            if i >= self.dimension {
                return Err(Error::InvalidInput(format!(
                    "support index {i} outside 0..{}",
                    self.dimension
                )));
            }
            mask[i] = true;
        }
        Ok(mask)
    }

    /// Vertex minimizing `c·v`.
    pub fn lmo(&self, c: &[f64]) -> Result<Vertex> {
        self.check_objective(c)?;
        let n = self.dimension;
        Ok(match &self.kind {
            DomainKind::ProbabilitySimplex => Vertex::unit(n, argmin_first(c)),
            DomainKind::Hypercube => {
                Vertex::new(c.iter().map(|ci| if *ci < 0.0 { 1.0 } else { 0.0 }).collect())
            }
            DomainKind::ShortestPath(pg) => Vertex::new(
                pg.optimal_path(c, None, false)
                    .ok_or_else(|| Error::invariant("path-exists", "no source-sink path"))?,
            ),
            DomainKind::SpanningTree(g) => Vertex::new(
                graph::kruskal(g, c, None, false)
                    .ok_or_else(|| Error::invariant("connected", "graph does not span"))?,
            ),
            DomainKind::VertexList(vs) => {
                let scores: Vec<f64> = vs.iter().map(|v| v.dot(c)).collect();
                vs[argmin_first(&scores)].clone()
            }
        })
    }

    /// Vertex maximizing `c·v` among vertices whose support lies inside
    /// `support`; `Ok(None)` when no such vertex exists.
    pub fn lmo_restricted(&self, c: &[f64], support: &[usize]) -> Result<Option<Vertex>> {
        self.check_objective(c)?;
        let mask = self.support_mask(support)?;
        let n = self.dimension;
        Ok(match &self.kind {
            DomainKind::ProbabilitySimplex => {
                let mut best: Option<usize> = None;
                for i in (0..n).filter(|i| mask[*i]) {
                    if best.is_none_or(|b| c[i] > c[b]) {
                        best = Some(i);
                    }
                }
                best.map(|i| Vertex::unit(n, i))
            }
            DomainKind::Hypercube => Some(Vertex::new(
                (0..n)
                    .map(|i| if mask[i] && c[i] > 0.0 { 1.0 } else { 0.0 })
                    .collect(),
            )),
            DomainKind::ShortestPath(pg) => pg.optimal_path(c, Some(&mask), true).map(Vertex::new),
            DomainKind::SpanningTree(g) => graph::kruskal(g, c, Some(&mask), true).map(Vertex::new),
            DomainKind::VertexList(vs) => {
                let mut best: Option<(f64, usize)> = None;
                for (i, v) in vs.iter().enumerate() {
                    let inside = v
                        .coords
                        .iter()
                        .enumerate()
                        .all(|(j, x)| libm::fabs(*x) <= SUPPORT_TOL || mask[j]);
                    if !inside {
                        continue;
                    }
                    let s = v.dot(c);
                    if best.is_none_or(|(b, _)| s > b) {
                        best = Some((s, i));
                    }
                }
                best.map(|(_, i)| vs[i].clone())
            }
        })
    }

    /// Whether `x` is (exactly) one of this domain's vertices.
    pub fn is_vertex(&self, x: &[f64]) -> bool {
        if x.len() != self.dimension {
            return false;
        }
        match &self.kind {
            DomainKind::ProbabilitySimplex => {
                x.iter().all(|v| *v == 0.0 || *v == 1.0) && x.iter().filter(|v| **v == 1.0).count() == 1
            }
            DomainKind::Hypercube => x.iter().all(|v| *v == 0.0 || *v == 1.0),
            DomainKind::ShortestPath(pg) => pg.is_path(x),
            DomainKind::SpanningTree(g) => graph::is_spanning_tree(g, x),
            DomainKind::VertexList(vs) => vs.iter().any(|v| v.coords == x),
        }
    }

    /// Linear augmentation: a vertex strictly better than `x` for `c`, or `x`
    /// itself when `x` is optimal.
    pub fn augment(&self, c: &[f64], x: &Vertex) -> Result<Vertex> {
        if !self.is_zero_one {
            return Err(Error::Unsupported(
                "augmentation requires a 0/1 polytope".into(),
            ));
        }
        self.check_objective(c)?;
        check_dim(self.dimension, &x.coords)?;
        if !self.is_vertex(&x.coords) {
            return Err(Error::InvalidInput("augment expects a vertex of the domain".into()));
        }
        let cx = x.dot(c);
        match &self.kind {
            DomainKind::Hypercube => {
                let mut best: Option<usize> = None;
                for i in 0..self.dimension {
                    let improving = (x.coords[i] == 1.0 && c[i] > 0.0)
                        || (x.coords[i] == 0.0 && c[i] < 0.0);
                    if improving && best.is_none_or(|b| libm::fabs(c[i]) > libm::fabs(c[b])) {
                        best = Some(i);
                    }
                }
                Ok(match best {
                    Some(i) => {
                        let mut y = x.clone();
                        y.coords[i] = 1.0 - y.coords[i];
                        y
                    }
                    None => x.clone(),
                })
            }
            DomainKind::SpanningTree(g) => Ok(match graph::best_tree_exchange(g, c, &x.coords) {
                Some(y) => Vertex::new(y),
                None => x.clone(),
            }),
            _ => {
                let y = self.lmo(c)?;
                Ok(if y.dot(c) < cx { y } else { x.clone() })
            }
        }
    }

    /// Complete, duplicate-free vertex list; refuses above `cap` vertices.
    pub fn enumerate_vertices(&self, cap: usize) -> Result<Vec<Vertex>> {
        let n = self.dimension;
        let refuse = |estimate: f64| Error::EnumerationCap { estimate, cap };
        match &self.kind {
            DomainKind::ProbabilitySimplex => {
                if n > cap {
                    return Err(refuse(n as f64));
                }
                Ok((0..n).map(|i| Vertex::unit(n, i)).collect())
            }
            DomainKind::Hypercube => {
                let count = libm::pow(2.0, n as f64);
                if count > cap as f64 {
                    return Err(refuse(count));
                }
                Ok((0..(1usize << n))
                    .map(|mask| {
                        Vertex::new((0..n).map(|i| ((mask >> i) & 1) as f64).collect())
                    })
                    .collect())
            }
            DomainKind::ShortestPath(pg) => pg
                .enumerate(cap)
                .map(|ps| ps.into_iter().map(Vertex::new).collect())
                .map_err(refuse),
            DomainKind::SpanningTree(g) => {
                let estimate = graph::spanning_tree_count(g);
                if estimate > cap as f64 {
                    return Err(refuse(estimate));
                }
                graph::enumerate_trees(g, cap)
                    .map(|ts| ts.into_iter().map(Vertex::new).collect())
                    .map_err(|_| refuse(estimate))
            }
            DomainKind::VertexList(vs) => {
                if vs.len() > cap {
                    return Err(refuse(vs.len() as f64));
                }
                Ok(vs.clone())
            }
        }
    }

    /// Membership test where it is cheap to decide exactly (simplex,
    /// hypercube); `None` means only an active-set certificate can decide.
    pub fn contains(&self, x: &[f64], tol: f64) -> Option<bool> {
        if x.len() != self.dimension || x.iter().any(|v| !v.is_finite()) {
            return Some(false);
        }
        match &self.kind {
            DomainKind::ProbabilitySimplex => {
                let sum: f64 = x.iter().sum();
                Some(x.iter().all(|v| *v >= -tol) && libm::fabs(sum - 1.0) <= tol)
            }
            DomainKind::Hypercube => Some(x.iter().all(|v| *v >= -tol && *v <= 1.0 + tol)),
            DomainKind::ShortestPath(_) | DomainKind::SpanningTree(_) => {
                if x.iter().any(|v| *v < -tol || *v > 1.0 + tol) {
                    Some(false)
                } else {
                    None
                }
            }
            DomainKind::VertexList(_) => None,
        }
    }

    /// Exact Wolfe gap `max_v c·(x - v)` via one LMO call.
    pub fn dual_gap(&self, c: &[f64], x: &[f64]) -> Result<(f64, Vertex)> {
        let v = self.lmo(c)?;
        Ok((dot(c, x) - v.dot(c), v))
    }

    /// A deterministic starting vertex (`lmo` of the all-ones objective).
    pub fn start_vertex(&self) -> Result<Vertex> {
        self.lmo(&vec![1.0; self.dimension])
    }
}

fn argmin_first(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] < v[best] {
            best = i;
        }
    }
    best
}
