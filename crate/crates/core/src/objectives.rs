//! Smooth convex objectives, line search and random instance generators.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, sub, SymMatrix};

/// Curvature and conditioning constants of an objective over a domain.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObjectiveMeta {
    /// Curvature `C`: `f(x + γ(y-x)) <= f(x) + γ∇f(x)·(y-x) + Cγ²/2` on the domain.
    pub curvature: f64,
    /// Strong convexity `S` (0 when not strongly convex).
    pub strong_convexity: f64,
    /// Smoothness `β`.
    pub smoothness: f64,
    /// Lipschitz constant `L` over the domain.
    pub lipschitz: f64,
}

pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn meta(&self) -> ObjectiveMeta;

    /// `dᵀHd / 2` where `H` is the (constant) Hessian, for objectives that
    /// are exactly quadratic along lines; enables exact line search.
    fn quadratic_curvature_along(&self, _d: &[f64]) -> Option<f64> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn meta(&self) -> ObjectiveMeta {
        (**self).meta()
    }
    fn quadratic_curvature_along(&self, d: &[f64]) -> Option<f64> {
        (**self).quadratic_curvature_along(d)
    }
}

/// `f(x) = xᵀQx + ℓ·x + κ`. Linear when `Q` is absent.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub q: Option<SymMatrix>,
    pub linear: Vec<f64>,
    pub constant: f64,
    pub meta: ObjectiveMeta,
}

impl QuadraticForm {
    pub fn zero(n: usize) -> Self {
        Self {
            q: None,
            linear: vec![0.0; n],
            constant: 0.0,
            meta: ObjectiveMeta::default(),
        }
    }

    /// `c·x + b`; Lipschitz constant `‖c‖₂`.
    pub fn linear(c: Vec<f64>, b: f64) -> Self {
        let lipschitz = norm2(&c);
        Self {
            q: None,
            linear: c,
            constant: b,
            meta: ObjectiveMeta {
                lipschitz,
                ..ObjectiveMeta::default()
            },
        }
    }

    pub fn is_linear(&self) -> bool {
        self.q.as_ref().is_none_or(|q| q.is_zero())
    }

    /// Running-sum update; metadata of the sum is left to the caller.
    pub fn add_assign(&mut self, other: &QuadraticForm) {
        axpy(1.0, &other.linear, &mut self.linear);
        self.constant += other.constant;
        match (&mut self.q, &other.q) {
            (Some(a), Some(b)) => a.add_assign(b),
            (None, Some(b)) => self.q = Some(b.clone()),
            _ => {}
        }
    }
}

impl Objective for QuadraticForm {
    fn dim(&self) -> usize {
        self.linear.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let quad = self.q.as_ref().map_or(0.0, |q| q.quad(x));
        quad + dot(&self.linear, x) + self.constant
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.linear.clone();
        if let Some(q) = &self.q {
            axpy(2.0, &q.mul_vec(x), &mut g);
        }
        g
    }
    fn meta(&self) -> ObjectiveMeta {
        self.meta
    }
    fn quadratic_curvature_along(&self, d: &[f64]) -> Option<f64> {
        Some(self.q.as_ref().map_or(0.0, |q| q.quad(d)))
    }
}

/// `f(x) = ‖Ax - b‖²` with `A` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    a: Vec<f64>,
    rows: usize,
    cols: usize,
    b: Vec<f64>,
    gram: SymMatrix,
    lambda_min: f64,
    lambda_max: f64,
    meta: ObjectiveMeta,
}

impl QuadraticObjective {
    /// Builds the objective and its metadata relative to `domain`:
    /// `β = 2λmax(AᵀA)`, `C = βD²`, `S = 2λmin(AᵀA)` (0 when rank deficient).
    pub fn new(a: Vec<f64>, rows: usize, b: Vec<f64>, domain: &Domain) -> Result<Self> {
        let cols = domain.dimension();
        if rows == 0 || a.len() != rows * cols {
            return Err(Error::InvalidInput(alloc::format!(
                "matrix has {} entries, expected {rows}x{cols}",
                a.len()
            )));
        }
        if b.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: b.len(),
            });
        }
        crate::linalg::check_finite(&a)?;
        crate::linalg::check_finite(&b)?;
        let gram = SymMatrix::gram(&a, rows, cols);
        let (lo, hi) = gram.extreme_eigenvalues();
        let hi = hi.max(0.0);
        let lambda_min = if rows < cols || lo <= 1e-10 * hi { 0.0 } else { lo };
        let atb: Vec<f64> = (0..cols)
            .map(|j| (0..rows).map(|r| a[r * cols + j] * b[r]).sum())
            .collect();
        let d = domain.l2_diameter();
        let meta = ObjectiveMeta {
            curvature: 2.0 * hi * d * d,
            strong_convexity: 2.0 * lambda_min,
            smoothness: 2.0 * hi,
            lipschitz: 2.0 * (hi * domain.radius() + norm2(&atb)),
        };
        Ok(Self {
            a,
            rows,
            cols,
            b,
            gram,
            lambda_min,
            lambda_max: hi,
            meta,
        })
    }

    /// `‖x - b‖²` (the identity-matrix special case).
    pub fn identity_target(b: Vec<f64>, domain: &Domain) -> Result<Self> {
        let n = domain.dimension();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Self::new(a, n, b, domain)
    }

    pub fn matrix(&self) -> (&[f64], usize, usize) {
        (&self.a, self.rows, self.cols)
    }
    pub fn target(&self) -> &[f64] {
        &self.b
    }
    pub fn gram(&self) -> &SymMatrix {
        &self.gram
    }
    /// Extreme eigenvalues of `AᵀA`.
    pub fn spectrum(&self) -> (f64, f64) {
        (self.lambda_min, self.lambda_max)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| dot(&self.a[r * self.cols..(r + 1) * self.cols], x))
            .collect()
    }

    /// The same function as a [`QuadraticForm`] (`Q = AᵀA`, `ℓ = -2Aᵀb`).
    pub fn to_form(&self) -> QuadraticForm {
        let atb: Vec<f64> = (0..self.cols)
            .map(|j| (0..self.rows).map(|r| self.a[r * self.cols + j] * self.b[r]).sum())
            .collect();
        QuadraticForm {
            q: Some(self.gram.clone()),
            linear: atb.iter().map(|v| -2.0 * v).collect(),
            constant: dot(&self.b, &self.b),
            meta: self.meta,
        }
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.cols
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = sub(&self.apply(x), &self.b);
        dot(&r, &r)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = sub(&self.apply(x), &self.b);
        (0..self.cols)
            .map(|j| 2.0 * (0..self.rows).map(|i| self.a[i * self.cols + j] * r[i]).sum::<f64>())
            .collect()
    }

    fn meta(&self) -> ObjectiveMeta {
        self.meta
    }

    fn quadratic_curvature_along(&self, d: &[f64]) -> Option<f64> {
        let ad = self.apply(d);
        Some(dot(&ad, &ad))
    }
}

/// Armijo constant of the backtracking fallback.
pub const ARMIJO: f64 = 0.1;
/// Smallest step the backtracking fallback tries.
pub const MIN_BACKTRACK_STEP: f64 = 1.0 / (1u64 << 30) as f64;

/// `argmin_{γ ∈ [0,1]} f((1-γ)x + γv)`; exact for quadratics, Armijo
/// backtracking otherwise. Never returns a step that raises `f` by more
/// than `1e-12`.
pub fn line_search<F: Objective + ?Sized>(f: &F, x: &[f64], v: &[f64]) -> f64 {
    let d = sub(v, x);
    if d.iter().all(|di| *di == 0.0) {
        return 0.0;
    }
    let grad = f.gradient(x);
    line_search_with_gradient(f, x, &d, &grad)
}

pub fn line_search_with_gradient<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
    d: &[f64],
    grad: &[f64],
) -> f64 {
    let slope = dot(grad, d);
    if !(slope < 0.0) {
        return 0.0;
    }
    let fx = f.value(x);
    let at = |gamma: f64| {
        let mut y = x.to_vec();
        axpy(gamma, d, &mut y);
        f.value(&y)
    };
    let gamma = match f.quadratic_curvature_along(d) {
        Some(curv) if curv > 0.0 => (-slope / (2.0 * curv)).clamp(0.0, 1.0),
        Some(_) => 1.0,
        None => {
            let mut gamma = 1.0;
            while gamma > MIN_BACKTRACK_STEP && at(gamma) > fx + ARMIJO * gamma * slope {
                gamma *= 0.5;
            }
            gamma
        }
    };
    if at(gamma) > fx + 1e-12 {
        0.0
    } else {
        gamma
    }
}

/// `min{1, Φ/(K·C)}`
pub fn short_step(phi: f64, k: f64, curvature: f64) -> f64 {
    if curvature <= 0.0 {
        return 1.0;
    }
    (phi / (k * curvature)).min(1.0)
}

/// Random structured-regression instance: `A` has i.i.d. Bernoulli(density)
/// sparsity pattern with U[0,1) values, `b = A·w` with `w ~ U[0,1)ⁿ`.
pub fn generate_regression_instance(
    domain: &Domain,
    density: f64,
    rows: usize,
    seed: u64,
) -> Result<QuadraticObjective> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidInput(alloc::format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    if rows == 0 {
        return Err(Error::InvalidInput("rows must be positive".into()));
    }
    let n = domain.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![0.0; rows * n];
    for entry in a.iter_mut() {
        let keep = rng.gen::<f64>() < density;
        let value = rng.gen::<f64>();
        if keep {
            *entry = value;
        }
    }
    let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let b: Vec<f64> = (0..rows)
        .map(|r| dot(&a[r * n..(r + 1) * n], &w))
        .collect();
    QuadraticObjective::new(a, rows, b, domain)
}

/// `‖x - b‖²` with `b ~ U[0,1)ⁿ`.
pub fn generate_identity_instance(domain: &Domain, seed: u64) -> Result<QuadraticObjective> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<f64> = (0..domain.dimension()).map(|_| rng.gen::<f64>()).collect();
    QuadraticObjective::identity_target(b, domain)
}

/// A finite sequence of per-round losses with a running aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct LossStream {
    losses: Vec<QuadraticForm>,
    lipschitz: f64,
}

impl LossStream {
    pub fn new(losses: Vec<QuadraticForm>) -> Result<Self> {
        let Some(first) = losses.first() else {
            return Err(Error::InvalidInput("loss stream needs at least one round".into()));
        };
        let n = first.dim();
        if let Some(bad) = losses.iter().find(|l| l.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.dim(),
            });
        }
        let lipschitz = losses.iter().map(|l| l.meta.lipschitz).fold(0.0, f64::max);
        Ok(Self { losses, lipschitz })
    }

    pub fn rounds(&self) -> usize {
        self.losses.len()
    }
    pub fn dim(&self) -> usize {
        self.losses[0].dim()
    }
    /// Loss of round `t` (1-based).
    pub fn loss(&self, t: usize) -> &QuadraticForm {
        &self.losses[t - 1]
    }
    pub fn losses(&self) -> &[QuadraticForm] {
        &self.losses
    }
    /// `max_t L_t`
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    pub fn is_linear(&self) -> bool {
        self.losses.iter().all(QuadraticForm::is_linear)
    }
}

/// Incrementally maintained `F_t = Σ_{i<=t} f_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    sum: QuadraticForm,
    rounds: usize,
}

impl Aggregate {
    pub fn new(n: usize) -> Self {
        Self {
            sum: QuadraticForm::zero(n),
            rounds: 0,
        }
    }

    pub fn push(&mut self, loss: &QuadraticForm) {
        self.sum.add_assign(loss);
        self.rounds += 1;
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.sum.value(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.sum.gradient(x)
    }

    pub fn as_form(&self) -> &QuadraticForm {
        &self.sum
    }
}

/// `T` random linear losses `c·x + b`, `c ~ U[-1,1)ⁿ`, `b ~ U[0,1)`.
pub fn generate_linear_stream(n: usize, rounds: usize, seed: u64) -> Result<LossStream> {
    if rounds == 0 || n == 0 {
        return Err(Error::InvalidInput("stream needs n >= 1 and T >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let losses = (0..rounds)
        .map(|_| {
            let c: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let b = rng.gen::<f64>();
            QuadraticForm::linear(c, b)
        })
        .collect();
    LossStream::new(losses)
}

/// Surrogate loss `f̃_t(x) = ∇f_t(x_t)·x + (2L/√k) t^{-1/4} ‖x - x₁‖²` with
/// metadata `C = L√k`, `S = L/√k`, Lipschitz `3L`.
pub fn adversarial_wrapper<F: Objective + ?Sized>(
    loss: &F,
    anchor: &[f64],
    iterate: &[f64],
    lipschitz: f64,
    l1_diameter: f64,
    t: usize,
) -> Result<QuadraticForm> {
    if t == 0 || !(lipschitz > 0.0) || !(l1_diameter > 0.0) {
        return Err(Error::InvalidInput(
            "adversarial wrapper needs t >= 1, L > 0, k > 0".into(),
        ));
    }
    let g = loss.gradient(iterate);
    let sqrt_k = libm::sqrt(l1_diameter);
    let sigma = 2.0 * lipschitz / sqrt_k * libm::pow(t as f64, -0.25);
    let mut linear = g;
    axpy(-2.0 * sigma, anchor, &mut linear);
    Ok(QuadraticForm {
        q: Some(SymMatrix::scaled_identity(anchor.len(), sigma)),
        linear,
        constant: sigma * dot(anchor, anchor),
        meta: ObjectiveMeta {
            curvature: lipschitz * sqrt_k,
            strong_convexity: lipschitz / sqrt_k,
            smoothness: 2.0 * sigma,
            lipschitz: 3.0 * lipschitz,
        },
    })
}
