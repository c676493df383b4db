//! Weak separation over a linear minimization oracle, with a vertex cache.
//!
//! A query `(c, x, Φ, K)` is answered either with a vertex `y` satisfying
//! `c·(x - y) > Φ/K` or with a negative certificate `c·(x - z) <= Φ` for
//! every `z` in the domain. The cache is scanned first; the underlying
//! oracle (an exact LMO or an augmentation loop) only runs on a miss, and a
//! negative answer is never produced from the cache alone.

use alloc::format;
use alloc::vec::Vec;

use crate::active_set::ActiveSet;
use crate::augment::{augmenting_weak_separation, AugSeparationConfig};
use crate::domains::{support_of, Domain, Vertex};
use crate::error::{Error, Result};
use crate::linalg::{check_dim, check_finite, dot};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheConfig {
    pub enabled: bool,
    /// Entries surviving an eviction.
    pub keep_size: usize,
    /// Queries between evictions.
    pub eviction_period: usize,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            keep_size: 100,
            eviction_period: 100,
        }
    }
}

impl CacheConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub vertex: Vertex,
    pub use_count: u64,
    seq: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCache {
    entries: Vec<CacheEntry>,
    calls_since_eviction: usize,
    next_seq: u64,
    config: CacheConfig,
}

impl OracleCache {
    pub fn new(config: CacheConfig) -> Self {
        Self {
            entries: Vec::new(),
            calls_since_eviction: 0,
            next_seq: 0,
            config,
        }
    }

    pub fn config(&self) -> CacheConfig {
        self.config
    }
    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn entries(&self) -> &[CacheEntry] {
        &self.entries
    }
    pub fn calls_since_eviction(&self) -> usize {
        self.calls_since_eviction
    }

    /// Counts one query and evicts when the period elapses.
    fn tick(&mut self) {
        self.calls_since_eviction += 1;
        if self.calls_since_eviction >= self.config.eviction_period {
            self.evict();
        }
    }

    /// Keeps the `keep_size` most used entries; ties go to the newer entry.
    pub fn evict(&mut self) {
        self.calls_since_eviction = 0;
        if self.entries.len() <= self.config.keep_size {
            return;
        }
        self.entries
            .sort_by(|a, b| b.use_count.cmp(&a.use_count).then(b.seq.cmp(&a.seq)));
        self.entries.truncate(self.config.keep_size);
        // restore insertion order so scans stay deterministic
        self.entries.sort_by_key(|e| e.seq);
    }

    pub fn insert(&mut self, v: Vertex) {
        if !self.config.enabled || self.entries.iter().any(|e| e.vertex.coords == v.coords) {
            return;
        }
        self.entries.push(CacheEntry {
            vertex: v,
            use_count: 0,
            seq: self.next_seq,
        });
        self.next_seq += 1;
    }

    /// Entry maximizing `score`, restricted by `eligible`; first wins ties.
    fn best_by(
        &self,
        mut eligible: impl FnMut(&Vertex) -> bool,
        mut score: impl FnMut(&Vertex) -> f64,
    ) -> Option<(usize, f64)> {
        if !self.config.enabled {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            if !eligible(&e.vertex) {
                continue;
            }
            let s = score(&e.vertex);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        best
    }

    fn hit(&mut self, i: usize) -> Vertex {
        self.entries[i].use_count += 1;
        self.entries[i].vertex.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OracleStats {
    pub total_queries: u64,
    pub cache_hits: u64,
    /// Calls to the underlying oracle (LMO, or augmentation loop).
    pub lp_calls: u64,
    /// Individual augmentation-oracle invocations.
    pub aug_calls: u64,
    pub positive_answers: u64,
    pub negative_answers: u64,
}

impl OracleStats {
    pub fn cache_hit_rate(&self) -> f64 {
        if self.total_queries == 0 {
            0.0
        } else {
            self.cache_hits as f64 / self.total_queries as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeparationOutcome {
    Positive(Vertex),
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationAnswer {
    pub outcome: SeparationOutcome,
    pub served_from_cache: bool,
    /// The underlying oracle resolved the query (always true for negatives).
    pub lp_called: bool,
    /// `max(0, c·x - min_v c·v)` when an exact LMO call resolved the query.
    pub exact_dual_gap: Option<f64>,
}

impl SeparationAnswer {
    pub fn is_positive(&self) -> bool {
        matches!(self.outcome, SeparationOutcome::Positive(_))
    }
    pub fn vertex(&self) -> Option<&Vertex> {
        match &self.outcome {
            SeparationOutcome::Positive(v) => Some(v),
            SeparationOutcome::Negative => None,
        }
    }
}

/// What resolves a cache miss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Exact linear minimization (one call per miss).
    #[default]
    Lmo,
    /// Augmentation loop on 0/1 polytopes; requires `K > 1`.
    Augmentation,
    /// Threshold-free exact LMO: every query calls the LMO, answers
    /// positively whenever the minimizer strictly improves, never caches.
    /// Used to express the non-lazy baselines.
    Exact,
}

/// Pairwise (product-domain) answer: forward vertex and away vertex. An
/// absent away vertex means the away mass is `x` itself.
#[derive(Debug, Clone, PartialEq)]
pub enum PairOutcome {
    Positive {
        plus: Vertex,
        minus: Option<Vertex>,
    },
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairAnswer {
    pub outcome: PairOutcome,
    pub served_from_cache: bool,
    pub lp_calls: u32,
    /// Exact `max σ` over admissible pairs when the LMOs resolved the query.
    pub exact_gap: Option<f64>,
}

/// Local step returned by weak local separation: `y = x - p₋ + Δ·v*` along
/// with the weight transfer that realizes it on the caller's active set.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalStep {
    pub point: Vec<f64>,
    pub vertex: Vertex,
    pub delta: f64,
    /// `(atom index, γⱼ)` with `γⱼ <= λⱼ` and `Σγⱼ = Δ`.
    pub donors: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LocalOutcome {
    Positive(LocalStep),
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalAnswer {
    pub outcome: LocalOutcome,
    pub delta: f64,
    pub inner: SeparationAnswer,
}

/// Stateful weak separation oracle: caches plus counters, owned by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct LazyOracle {
    pub cache: OracleCache,
    pub away_cache: OracleCache,
    pub stats: OracleStats,
    pub backend: Backend,
}

fn validate_query(domain: &Domain, c: &[f64], x: &[f64], phi: f64, k: f64) -> Result<()> {
    check_dim(domain.dimension(), c)?;
    check_dim(domain.dimension(), x)?;
    check_finite(c)?;
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::InvalidInput(format!("threshold phi must be positive, got {phi}")));
    }
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::InvalidInput(format!("accuracy K must be >= 1, got {k}")));
    }
    Ok(())
}

impl LazyOracle {
    pub fn new(cache: CacheConfig, backend: Backend) -> Self {
        let cache = if backend == Backend::Exact {
            CacheConfig::disabled()
        } else {
            cache
        };
        Self {
            cache: OracleCache::new(cache),
            away_cache: OracleCache::new(cache),
            stats: OracleStats::default(),
            backend,
        }
    }

    /// Cached LMO-backed weak separation.
    pub fn separate(
        &mut self,
        domain: &Domain,
        c: &[f64],
        x: &[f64],
        phi: f64,
        k: f64,
    ) -> Result<SeparationAnswer> {
        self.separate_with(domain, c, x, None, phi, k)
    }

    /// As [`Self::separate`], passing the active set the augmentation
    /// backend needs to pick its integral start.
    pub fn separate_with(
        &mut self,
        domain: &Domain,
        c: &[f64],
        x: &[f64],
        active: Option<&ActiveSet>,
        phi: f64,
        k: f64,
    ) -> Result<SeparationAnswer> {
        validate_query(domain, c, x, phi, k)?;
        self.stats.total_queries += 1;
        let answer = self.resolve(domain, c, x, active, phi, k);
        self.cache.tick();
        answer
    }

    fn resolve(
        &mut self,
        domain: &Domain,
        c: &[f64],
        x: &[f64],
        active: Option<&ActiveSet>,
        phi: f64,
        k: f64,
    ) -> Result<SeparationAnswer> {
        let cx = dot(c, x);
        let threshold = phi / k;

        if let Some((i, score)) = self.cache.best_by(|_| true, |v| cx - v.dot(c)) {
            if score > threshold {
                let v = self.cache.hit(i);
                self.stats.cache_hits += 1;
                self.stats.positive_answers += 1;
                return Ok(SeparationAnswer {
                    outcome: SeparationOutcome::Positive(v),
                    served_from_cache: true,
                    lp_called: false,
                    exact_dual_gap: None,
                });
            }
        }

        self.stats.lp_calls += 1;
        let answer = match self.backend {
            Backend::Lmo | Backend::Exact => {
                let y = domain.lmo(c)?;
                let gap = cx - y.dot(c);
                let accept = if self.backend == Backend::Exact {
                    gap > 0.0
                } else {
                    gap > threshold
                };
                if accept {
                    self.cache.insert(y.clone());
                    SeparationAnswer {
                        outcome: SeparationOutcome::Positive(y),
                        served_from_cache: false,
                        lp_called: true,
                        exact_dual_gap: Some(gap.max(0.0)),
                    }
                } else {
                    SeparationAnswer {
                        outcome: SeparationOutcome::Negative,
                        served_from_cache: false,
                        lp_called: true,
                        exact_dual_gap: Some(gap.max(0.0)),
                    }
                }
            }
            Backend::Augmentation => {
                let active = active.ok_or_else(|| {
                    Error::Config("augmentation backend needs the caller's active set".into())
                })?;
                let config = AugSeparationConfig::new(k, domain.l1_diameter())?;
                let run = augmenting_weak_separation(domain, &config, c, x, active, phi)?;
                self.stats.aug_calls += run.aug_calls as u64;
                if let Some(y) = run.answer.vertex() {
                    self.cache.insert(y.clone());
                }
                run.answer
            }
        };
        if answer.is_positive() {
            self.stats.positive_answers += 1;
        } else {
            self.stats.negative_answers += 1;
        }
        Ok(answer)
    }

    /// Weak separation over `P × P` for the pairwise objective
    /// `(∇f, -∇̃f)`. The away component is restricted to vertices supported
    /// on `supp(x)`; the score of a pair is
    /// `σ = grad·(x - v⁺) + grad·(v⁻ - x)`.
    pub fn separate_pair(
        &mut self,
        domain: &Domain,
        grad: &[f64],
        x: &[f64],
        phi: f64,
        k: f64,
    ) -> Result<PairAnswer> {
        validate_query(domain, grad, x, phi, k)?;
        self.stats.total_queries += 1;
        let answer = self.resolve_pair(domain, grad, x, phi, k);
        self.cache.tick();
        self.away_cache.tick();
        answer
    }

    fn resolve_pair(
        &mut self,
        domain: &Domain,
        grad: &[f64],
        x: &[f64],
        phi: f64,
        k: f64,
    ) -> Result<PairAnswer> {
        let gx = dot(grad, x);
        let threshold = phi / k;
        let support = support_of(x);
        let mut in_support = alloc::vec![false; x.len()];
        support.iter().for_each(|&i| in_support[i] = true);
        let supported = |v: &Vertex| {
            v.coords
                .iter()
                .enumerate()
                .all(|(i, c)| *c == 0.0 || in_support[i])
        };
        let sigma = |plus: &Vertex, minus: Option<&Vertex>| {
            let away = minus.map_or(gx, |m| m.dot(grad));
            (gx - plus.dot(grad)) + (away - gx)
        };

        let best_plus = self.cache.best_by(|_| true, |v| -v.dot(grad));
        let best_minus = self.away_cache.best_by(supported, |v| v.dot(grad));
        if let (Some((ip, _)), Some((im, _))) = (best_plus, best_minus) {
            let s = sigma(
                &self.cache.entries[ip].vertex,
                Some(&self.away_cache.entries[im].vertex),
            );
            if s > threshold {
                let plus = self.cache.hit(ip);
                let minus = self.away_cache.hit(im);
                self.stats.cache_hits += 1;
                self.stats.positive_answers += 1;
                return Ok(PairAnswer {
                    outcome: PairOutcome::Positive {
                        plus,
                        minus: Some(minus),
                    },
                    served_from_cache: true,
                    lp_calls: 0,
                    exact_gap: None,
                });
            }
        }

        self.stats.lp_calls += 2;
        let plus = domain.lmo(grad)?;
        let minus = domain.lmo_restricted(grad, &support)?;
        let s = sigma(&plus, minus.as_ref());
        let accept = if self.backend == Backend::Exact {
            s > 0.0
        } else {
            s > threshold
        };
        if accept {
            self.stats.positive_answers += 1;
            self.cache.insert(plus.clone());
            if let Some(m) = &minus {
                self.away_cache.insert(m.clone());
            }
            Ok(PairAnswer {
                outcome: PairOutcome::Positive { plus, minus },
                served_from_cache: false,
                lp_calls: 2,
                exact_gap: Some(s.max(0.0)),
            })
        } else {
            self.stats.negative_answers += 1;
            Ok(PairAnswer {
                outcome: PairOutcome::Negative,
                served_from_cache: false,
                lp_calls: 2,
                exact_gap: Some(s.max(0.0)),
            })
        }
    }

    /// Weak local separation around `x = Σλⱼvⱼ` with radius `r`.
    pub fn separate_local(
        &mut self,
        domain: &Domain,
        c: &[f64],
        active: &ActiveSet,
        r: f64,
        phi: f64,
        k: f64,
    ) -> Result<LocalAnswer> {
        if active.is_empty() {
            return Err(Error::invariant("active-set-nonempty", "weak local separation on empty decomposition"));
        }
        let mu = domain
            .mu()
            .ok_or_else(|| Error::Config("weak local separation needs the domain parameter mu".into()))?;
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
        }
        let delta = local_delta(domain.dimension(), mu, r, domain.l2_diameter());
        let x = active.point();

        let plan = greedy_away_mass(c, active, delta);
        let mut p_minus = alloc::vec![0.0; x.len()];
        for &(j, g) in &plan {
            crate::linalg::axpy(g, &active.atoms()[j].vertex.coords, &mut p_minus);
        }
        let center: Vec<f64> = p_minus.iter().map(|v| v / delta).collect();
        let inner = self.separate_with(domain, c, &center, Some(active), phi / delta, k)?;
        let outcome = match inner.vertex() {
            None => LocalOutcome::Negative,
            Some(v) => {
                let point = x
                    .iter()
                    .zip(&p_minus)
                    .zip(&v.coords)
                    .map(|((xi, pi), vi)| xi - pi + delta * vi)
                    .collect();
                LocalOutcome::Positive(LocalStep {
                    point,
                    vertex: v.clone(),
                    delta,
                    donors: plan,
                })
            }
        };
        Ok(LocalAnswer {
            outcome,
            delta,
            inner,
        })
    }
}

/// `Δ = min{√n·μ·r / D, 1}`
pub fn local_delta(n: usize, mu: f64, r: f64, diameter: f64) -> f64 {
    (libm::sqrt(n as f64) * mu * r / diameter).min(1.0)
}

/// Greedy fill of weight `delta` from atoms sorted by `c·v` descending (ties
/// in insertion order); the last donor may contribute fractionally.
pub fn greedy_away_mass(c: &[f64], active: &ActiveSet, delta: f64) -> Vec<(usize, f64)> {
    let atoms = active.atoms();
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    let scores: Vec<f64> = atoms.iter().map(|a| a.vertex.dot(c)).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut remaining = delta;
    let mut plan = Vec::new();
    for j in order {
        if remaining <= 0.0 {
            break;
        }
        let take = atoms[j].weight.min(remaining);
        plan.push((j, take));
        remaining -= take;
    }
    plan
}
