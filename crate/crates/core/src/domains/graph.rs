//! Combinatorial subroutines for the graph-backed polytopes: DAG path
//! dynamic programs, Kruskal, single-edge tree exchanges and exhaustive
//! enumeration.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Undirected (spanning tree) or directed (path) multigraph; edge index is
/// the coordinate index of the incidence vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidInput("graph needs at least one node".into()));
        }
        if let Some((u, v)) = edges.iter().find(|(u, v)| *u >= nodes || *v >= nodes) {
            return Err(Error::InvalidInput(alloc::format!(
                "edge ({u},{v}) references a node outside 0..{nodes}"
            )));
        }
        Ok(Self { nodes, edges })
    }

    /// Complete graph on `nodes` vertices, edges in lexicographic order.
    pub fn complete(nodes: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..nodes {
            for v in (u + 1)..nodes {
                edges.push((u, v));
            }
        }
        Self::new(nodes, edges)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            core::cmp::Ordering::Less => self.parent[ra] = rb,
            core::cmp::Ordering::Greater => self.parent[rb] = ra,
            core::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Spanning trees

pub(crate) fn is_connected(g: &Graph, allowed: Option<&[bool]>) -> bool {
    let mut uf = UnionFind::new(g.nodes);
    let mut comps = g.nodes;
    for (i, &(u, v)) in g.edges.iter().enumerate() {
        if allowed.is_some_and(|m| !m[i]) {
            continue;
        }
        if uf.union(u, v) {
            comps -= 1;
        }
    }
    comps == 1
}

/// Kruskal over the allowed edges. `maximize` flips the sort order; ties go
/// to the lower edge index. Returns `None` when the allowed edges do not span.
pub(crate) fn kruskal(
    g: &Graph,
    weights: &[f64],
    allowed: Option<&[bool]>,
    maximize: bool,
) -> Option<Vec<f64>> {
    let mut order: Vec<usize> = (0..g.edges.len())
        .filter(|i| allowed.is_none_or(|m| m[*i]))
        .collect();
    order.sort_by(|&a, &b| {
        let ord = if maximize {
            weights[b].total_cmp(&weights[a])
        } else {
            weights[a].total_cmp(&weights[b])
        };
        ord.then(a.cmp(&b))
    });
    let mut uf = UnionFind::new(g.nodes);
    let mut x = vec![0.0; g.edges.len()];
    let mut taken = 0;
    for i in order {
        let (u, v) = g.edges[i];
        if uf.union(u, v) {
            x[i] = 1.0;
            taken += 1;
            if taken + 1 == g.nodes {
                break;
            }
        }
    }
    (taken + 1 == g.nodes).then_some(x)
}

pub(crate) fn is_spanning_tree(g: &Graph, x: &[f64]) -> bool {
    if x.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return false;
    }
    let mut uf = UnionFind::new(g.nodes);
    let mut taken = 0;
    for (i, &(u, v)) in g.edges.iter().enumerate() {
        if x[i] == 1.0 {
            if !uf.union(u, v) {
                return false;
            }
            taken += 1;
        }
    }
    taken + 1 == g.nodes
}

/// Edge indices on the tree path between `from` and `to`.
fn tree_path(g: &Graph, tree: &[f64], from: usize, to: usize) -> Vec<usize> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.nodes];
    for (i, &(u, v)) in g.edges.iter().enumerate() {
        if tree[i] == 1.0 {
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
    }
    let mut via: Vec<Option<(usize, usize)>> = vec![None; g.nodes];
    let mut seen = vec![false; g.nodes];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(n) = stack.pop() {
        if n == to {
            break;
        }
        for &(m, e) in &adj[n] {
            if !seen[m] {
                seen[m] = true;
                via[m] = Some((n, e));
                stack.push(m);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = to;
    while let Some((prev, e)) = via[cur] {
        path.push(e);
        cur = prev;
    }
    path
}

/// Best single edge exchange: add a non-tree edge, drop the most expensive
/// edge on the cycle it closes. Returns `None` when no exchange strictly
/// lowers the cost, which for spanning trees certifies optimality.
pub(crate) fn best_tree_exchange(g: &Graph, c: &[f64], tree: &[f64]) -> Option<Vec<f64>> {
    let mut best: Option<(f64, usize, usize)> = None;
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        if tree[e] == 1.0 || u == v {
            continue;
        }
        let path = tree_path(g, tree, u, v);
        let Some(&drop) = path
            .iter()
            .max_by(|&&a, &&b| c[a].total_cmp(&c[b]).then(b.cmp(&a)))
        else {
            continue;
        };
        let delta = c[e] - c[drop];
        if delta < 0.0 && best.is_none_or(|(d, _, _)| delta < d) {
            best = Some((delta, e, drop));
        }
    }
    best.map(|(_, add, drop)| {
        let mut next = tree.to_vec();
        next[add] = 1.0;
        next[drop] = 0.0;
        next
    })
}

/// Enumerates all spanning trees as incidence vectors, stopping early once
/// more than `cap` have been produced.
pub(crate) fn enumerate_trees(g: &Graph, cap: usize) -> core::result::Result<Vec<Vec<f64>>, usize> {
    let m = g.edges.len();
    let mut out = Vec::new();
    let mut chosen = vec![0.0; m];
    fn rec(
        g: &Graph,
        idx: usize,
        taken: usize,
        chosen: &mut Vec<f64>,
        out: &mut Vec<Vec<f64>>,
        cap: usize,
    ) -> bool {
        let need = g.nodes - 1;
        if taken == need {
            out.push(chosen.clone());
            return out.len() <= cap;
        }
        if idx == g.edges.len() || g.edges.len() - idx < need - taken {
            return true;
        }
        chosen[idx] = 1.0;
        let acyclic = {
            let mut uf = UnionFind::new(g.nodes);
            chosen
                .iter()
                .enumerate()
                .filter(|(_, v)| **v == 1.0)
                .all(|(i, _)| uf.union(g.edges[i].0, g.edges[i].1))
        };
        if acyclic && !rec(g, idx + 1, taken + 1, chosen, out, cap) {
            return false;
        }
        chosen[idx] = 0.0;
        rec(g, idx + 1, taken, chosen, out, cap)
    }
    if g.nodes == 1 {
        return Ok(vec![chosen]);
    }
    if rec(g, 0, 0, &mut chosen, &mut out, cap) {
        Ok(out)
    } else {
        Err(out.len())
    }
}

/// Matrix-tree theorem count (as a float, for cap estimates).
pub(crate) fn spanning_tree_count(g: &Graph) -> f64 {
    let n = g.nodes;
    if n <= 1 {
        return 1.0;
    }
    let k = n - 1;
    let mut lap = vec![0.0f64; k * k];
    for &(u, v) in &g.edges {
        if u == v {
            continue;
        }
        for (a, b) in [(u, v), (v, u)] {
            if a < k {
                lap[a * k + a] += 1.0;
                if b < k {
                    lap[a * k + b] -= 1.0;
                }
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut det = 1.0;
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&a, &b| libm::fabs(lap[a * k + col]).total_cmp(&libm::fabs(lap[b * k + col])))
            .unwrap_or(col);
        if libm::fabs(lap[piv * k + col]) < 1e-12 {
            return 0.0;
        }
        if piv != col {
            for j in 0..k {
                lap.swap(piv * k + j, col * k + j);
            }
            det = -det;
        }
        let p = lap[col * k + col];
        det *= p;
        for r in (col + 1)..k {
            let f = lap[r * k + col] / p;
            for j in col..k {
                lap[r * k + j] -= f * lap[col * k + j];
            }
        }
    }
    libm::round(det)
}

// ---------------------------------------------------------------------------
// DAG paths

/// Directed acyclic graph with a designated source and sink.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGraph {
    pub graph: Graph,
    pub source: usize,
    pub sink: usize,
    topo: Vec<usize>,
}

impl PathGraph {
    pub fn new(graph: Graph, source: usize, sink: usize) -> Result<Self> {
        if source >= graph.nodes || sink >= graph.nodes || source == sink {
            return Err(Error::InvalidInput(
                "source and sink must be distinct nodes of the graph".into(),
            ));
        }
        let topo = topological_order(&graph)
            .ok_or_else(|| Error::InvalidInput("path polytope graph contains a cycle".into()))?;
        let pg = Self {
            graph,
            source,
            sink,
            topo,
        };
        if pg.optimal_path(&vec![0.0; pg.graph.edges.len()], None, false).is_none() {
            return Err(Error::InvalidInput("no source-sink path exists".into()));
        }
        Ok(pg)
    }

    /// Min (or max) weight source-sink path over allowed edges by dynamic
    /// programming in topological order; first relaxation in edge-index
    /// order wins ties.
    pub(crate) fn optimal_path(
        &self,
        weights: &[f64],
        allowed: Option<&[bool]>,
        maximize: bool,
    ) -> Option<Vec<f64>> {
        let g = &self.graph;
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); g.nodes];
        for (i, &(u, _)) in g.edges.iter().enumerate() {
            if allowed.is_none_or(|m| m[i]) {
                out_edges[u].push(i);
            }
        }
        let mut best: Vec<Option<f64>> = vec![None; g.nodes];
        let mut pred: Vec<Option<usize>> = vec![None; g.nodes];
        best[self.source] = Some(0.0);
        for &u in &self.topo {
            let Some(bu) = best[u] else { continue };
            for &e in &out_edges[u] {
                let v = g.edges[e].1;
                let cand = bu + weights[e];
                let better = match best[v] {
                    None => true,
                    Some(bv) => {
                        if maximize {
                            cand > bv
                        } else {
                            cand < bv
                        }
                    }
                };
                if better {
                    best[v] = Some(cand);
                    pred[v] = Some(e);
                }
            }
        }
        best[self.sink]?;
        let mut x = vec![0.0; g.edges.len()];
        let mut cur = self.sink;
        while cur != self.source {
            let e = pred[cur]?;
            x[e] = 1.0;
            cur = g.edges[e].0;
        }
        Some(x)
    }

    pub(crate) fn is_path(&self, x: &[f64]) -> bool {
        if x.iter().any(|v| *v != 0.0 && *v != 1.0) {
            return false;
        }
        let g = &self.graph;
        let mut cur = self.source;
        let mut used = 0;
        let total = x.iter().filter(|v| **v == 1.0).count();
        while cur != self.sink {
            let next: Vec<usize> = (0..g.edges.len())
                .filter(|&i| x[i] == 1.0 && g.edges[i].0 == cur)
                .collect();
            if next.len() != 1 {
                return false;
            }
            cur = g.edges[next[0]].1;
            used += 1;
            if used > total {
                return false;
            }
        }
        used == total
    }

    /// Number of source-sink paths and the longest one's edge count.
    pub(crate) fn path_stats(&self) -> (f64, usize) {
        let g = &self.graph;
        let mut count = vec![0.0f64; g.nodes];
        let mut longest: Vec<Option<usize>> = vec![None; g.nodes];
        count[self.source] = 1.0;
        longest[self.source] = Some(0);
        for &u in &self.topo {
            for &(a, b) in &g.edges {
                if a != u {
                    continue;
                }
                count[b] += count[u];
                if let Some(lu) = longest[u] {
                    longest[b] = Some(longest[b].map_or(lu + 1, |lb| lb.max(lu + 1)));
                }
            }
        }
        (count[self.sink], longest[self.sink].unwrap_or(0))
    }

    pub(crate) fn enumerate(&self, cap: usize) -> core::result::Result<Vec<Vec<f64>>, f64> {
        let (count, _) = self.path_stats();
        if count > cap as f64 {
            return Err(count);
        }
        let g = &self.graph;
        let mut out = Vec::new();
        let mut cur = vec![0.0; g.edges.len()];
        fn dfs(pg: &PathGraph, node: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
            if node == pg.sink {
                out.push(cur.clone());
                return;
            }
            for (i, &(u, v)) in pg.graph.edges.iter().enumerate() {
                if u == node {
                    cur[i] = 1.0;
                    dfs(pg, v, cur, out);
                    cur[i] = 0.0;
                }
            }
        }
        dfs(self, self.source, &mut cur, &mut out);
        Ok(out)
    }
}

fn topological_order(g: &Graph) -> Option<Vec<usize>> {
    let mut indeg = vec![0usize; g.nodes];
    for &(_, v) in &g.edges {
        indeg[v] += 1;
    }
    let mut ready: Vec<usize> = (0..g.nodes).filter(|&v| indeg[v] == 0).collect();
    ready.reverse();
    let mut order = Vec::with_capacity(g.nodes);
    while let Some(u) = ready.pop() {
        order.push(u);
        for &(a, b) in &g.edges {
            if a == u {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.push(b);
                }
            }
        }
    }
    (order.len() == g.nodes).then_some(order)
}
