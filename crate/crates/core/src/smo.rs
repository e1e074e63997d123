//! Sequential minimal optimization for the soft-margin dual.
//!
//! The solver works on the minimization form
//!
//! ```text
//! min_a  1/2 a^T Q a - e^T a    s.t.  y^T a = 0,  0 <= a_t <= C
//! ```
//!
//! with `Q_st = y_s y_t K(x_s, x_t)`, and keeps the gradient `G = Q a - e`
//! up to date after every two-variable step. The reported dual objective is
//! the maximization form `sum a - 1/2 a^T Q a = -f(a)`.
//!
//! Working-pair selection: the first index is the maximal KKT violator in
//! the "up" set, the second the index of the "low" set whose error
//! `E_t = f(x_t) - y_t` is furthest from it, i.e. maximal `|E_i - E_j|` over
//! feasible directions. If a step makes no progress the partner is redrawn
//! from the remaining violators with a seeded generator.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::model::Model;
use crate::vector::{FeatureVector, Label};

/// Values this close to a box bound are snapped onto it.
const SNAP: f64 = 1e-12;
/// Curvature floor for pairs whose kernel submatrix is singular.
const TAU: f64 = 1e-12;
/// Dense copies of the training data are kept up to this many entries.
const DENSE_LIMIT: usize = 1 << 25;
/// Memory budget of the kernel row cache.
const CACHE_BYTES: usize = 256 << 20;
const FALLBACK_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Soft-margin penalty `C`, the upper bound of every dual variable.
    pub c_bound: f64,
    pub kernel: Kernel,
    /// Stopping tolerance on the KKT conditions.
    pub kkt_tolerance: f64,
    /// Maximum number of two-variable subproblems.
    pub max_passes: u64,
    /// Seed of the fallback pair generator.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c_bound: 1.0,
            kernel: Kernel::Linear,
            kkt_tolerance: 1e-3,
            max_passes: 10_000_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn new(c_bound: f64, kernel: Kernel) -> TrainConfig {
        TrainConfig {
            c_bound,
            kernel,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_bound.is_finite() && self.c_bound > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "C bound must be positive and finite, got {}",
                self.c_bound
            )));
        }
        if !(self.kkt_tolerance.is_finite() && self.kkt_tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "KKT tolerance must be positive and finite, got {}",
                self.kkt_tolerance
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidConfig("max passes must be positive".into()));
        }
        self.kernel.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainDiagnostics {
    /// `sum a - 1/2 a^T Q a` at the returned point.
    pub dual_objective: f64,
    pub iterations: u64,
    pub n_support_vectors: usize,
    /// Support vectors with `alpha = C`.
    pub n_bounded_svs: usize,
    /// Sum of hinge losses over the training set.
    pub total_slack: f64,
    pub max_kkt_violation: f64,
    /// `|sum alpha_i y_i|`
    pub balance_residual: f64,
    pub bias: f64,
    /// One dual variable per training point, in input order.
    pub alphas: Vec<f64>,
}

/// Trains a soft-margin classifier on `data`.
pub fn train(
    data: &[(FeatureVector, Label)],
    config: &TrainConfig,
) -> Result<(Model, TrainDiagnostics)> {
    train_with_observer(data, config, |_, _| {})
}

/// Like [`train`], calling `observer(iteration, dual_objective)` after every
/// two-variable step.
pub fn train_with_observer<F>(
    data: &[(FeatureVector, Label)],
    config: &TrainConfig,
    observer: F,
) -> Result<(Model, TrainDiagnostics)>
where
    F: FnMut(u64, f64),
{
    config.validate()?;
    let dim = validate_data(data)?;
    let mut solver = Solver::new(data, dim, config);
    let outcome = solver.solve(observer);
    let diagnostics = solver.diagnostics();
    log::debug!(
        "smo finished after {} iterations: objective {}, {} support vectors, max violation {}",
        diagnostics.iterations,
        diagnostics.dual_objective,
        diagnostics.n_support_vectors,
        diagnostics.max_kkt_violation
    );
    if let Err(stop) = outcome {
        log::warn!("smo stopped early: {stop:?}");
        return Err(Error::Convergence(Box::new(diagnostics)));
    }

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for ((x, y), &a) in data.iter().zip(&diagnostics.alphas) {
        if a > 0.0 {
            support_vectors.push(x.clone());
            coefficients.push(a * y.as_f64());
        }
    }
    let model = Model::new(
        config.kernel,
        diagnostics.bias,
        config.c_bound,
        dim,
        support_vectors,
        coefficients,
    )?;
    Ok((model, diagnostics))
}

fn validate_data(data: &[(FeatureVector, Label)]) -> Result<usize> {
    if data.len() < 2 {
        return Err(Error::InvalidData(format!(
            "need at least 2 samples, got {}",
            data.len()
        )));
    }
    let dim = data[0].0.dim();
    let (mut pos, mut neg) = (false, false);
    for (x, y) in data {
        x.check_dim(dim)?;
        if x.coords().iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        match y {
            Label::Positive => pos = true,
            Label::Negative => neg = true,
        }
    }
    if !(pos && neg) {
        return Err(Error::SingleClass);
    }
    Ok(dim)
}

#[derive(Debug)]
enum Stop {
    MaxPasses,
    Stalled,
}

enum Points<'a> {
    Dense { values: Vec<f64>, dim: usize },
    Sparse(&'a [(FeatureVector, Label)]),
}

struct KernelSource<'a> {
    kernel: Kernel,
    points: Points<'a>,
}

impl KernelSource<'_> {
    fn at(&self, s: usize, t: usize) -> f64 {
        match &self.points {
            Points::Dense { values, dim } => {
                let d = *dim;
                self.kernel
                    .eval_dense(&values[s * d..(s + 1) * d], &values[t * d..(t + 1) * d])
            }
            Points::Sparse(data) => self.kernel.eval_unchecked(&data[s].0, &data[t].0),
        }
    }

    fn fill_row(&self, s: usize, out: &mut [f64]) {
        for (t, slot) in out.iter_mut().enumerate() {
            *slot = self.at(s, t);
        }
    }
}

/// Least-recently-used kernel rows, bounded by [`CACHE_BYTES`].
struct RowCache {
    rows: Vec<Option<Vec<f64>>>,
    stamp: Vec<u64>,
    clock: u64,
    resident: usize,
    capacity: usize,
}

impl RowCache {
    fn new(n: usize) -> RowCache {
        let per_row = 8 * n.max(1);
        RowCache {
            rows: (0..n).map(|_| None).collect(),
            stamp: vec![0; n],
            clock: 0,
            resident: 0,
            capacity: (CACHE_BYTES / per_row).max(2),
        }
    }

    /// Makes row `idx` resident without evicting `pinned`.
    fn ensure(&mut self, idx: usize, pinned: usize, source: &KernelSource<'_>) {
        self.clock += 1;
        self.stamp[idx] = self.clock;
        if self.rows[idx].is_some() {
            return;
        }
        let n = self.rows.len();
        let mut buffer = if self.resident >= self.capacity {
            let victim = (0..n)
                .filter(|&t| t != pinned && t != idx && self.rows[t].is_some())
                .min_by_key(|&t| self.stamp[t])
                .expect("cache holds at least two rows");
            self.resident -= 1;
            self.rows[victim].take().unwrap()
        } else {
            vec![0.0; n]
        };
        source.fill_row(idx, &mut buffer);
        self.rows[idx] = Some(buffer);
        self.resident += 1;
    }

    fn row(&self, idx: usize) -> &[f64] {
        self.rows[idx].as_deref().expect("row is resident")
    }
}

struct Solver<'a> {
    source: KernelSource<'a>,
    y: Vec<f64>,
    c: f64,
    eps: f64,
    max_passes: u64,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    diag: Vec<f64>,
    cache: RowCache,
    rng: Xoshiro256StarStar,
    iterations: u64,
}

impl<'a> Solver<'a> {
    fn new(data: &'a [(FeatureVector, Label)], dim: usize, config: &TrainConfig) -> Solver<'a> {
        let n = data.len();
        let points = if n.saturating_mul(dim) <= DENSE_LIMIT {
            let mut values = vec![0.0; n * dim];
            for (row, (x, _)) in values.chunks_mut(dim.max(1)).zip(data) {
                x.scatter_into(row);
            }
            Points::Dense { values, dim }
        } else {
            Points::Sparse(data)
        };
        let source = KernelSource {
            kernel: config.kernel,
            points,
        };
        let diag = (0..n).map(|t| source.at(t, t)).collect();
        Solver {
            source,
            y: data.iter().map(|(_, y)| y.as_f64()).collect(),
            c: config.c_bound,
            eps: config.kkt_tolerance,
            max_passes: config.max_passes,
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            diag,
            cache: RowCache::new(n),
            rng: Xoshiro256StarStar::seed_from_u64(config.seed),
            iterations: 0,
        }
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.c
        }
    }

    /// `(i, max over up of -y G, j, min over low of -y G)`. Since
    /// `-y_t G_t = b - E_t`, the pair maximizes `E_j - E_i`.
    fn select_pair(&self) -> (usize, f64, usize, f64) {
        let (mut i, mut gmax) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut gmin) = (usize::MAX, f64::INFINITY);
        for t in 0..self.n() {
            let v = -self.y[t] * self.grad[t];
            if self.in_up(t) && v > gmax {
                i = t;
                gmax = v;
            }
            if self.in_low(t) && v < gmin {
                j = t;
                gmin = v;
            }
        }
        (i, gmax, j, gmin)
    }

    fn solve<F: FnMut(u64, f64)>(&mut self, mut observer: F) -> core::result::Result<(), Stop> {
        let mut objective = 0.0;
        loop {
            let (i, gmax, j, gmin) = self.select_pair();
            if gmax - gmin <= self.eps {
                // Confirm on an exactly recomputed gradient before stopping.
                self.refresh_gradient();
                let (_, gmax, _, gmin) = self.select_pair();
                objective = self.exact_objective();
                if gmax - gmin <= self.eps {
                    return Ok(());
                }
                continue;
            }
            if self.iterations >= self.max_passes {
                self.refresh_gradient();
                return Err(Stop::MaxPasses);
            }
            self.iterations += 1;

            let mut gain = self.step(i, j);
            if gain.is_none() {
                for _ in 0..FALLBACK_ATTEMPTS {
                    let candidates: Vec<usize> = (0..self.n())
                        .filter(|&t| {
                            t != i && self.in_low(t) && -self.y[t] * self.grad[t] < gmax - self.eps
                        })
                        .collect();
                    if candidates.is_empty() {
                        break;
                    }
                    let pick = candidates[(self.rng.next_u64() % candidates.len() as u64) as usize];
                    gain = self.step(i, pick);
                    if gain.is_some() {
                        break;
                    }
                }
            }
            match gain {
                Some(delta) => {
                    objective += delta;
                    observer(self.iterations, objective);
                }
                None => {
                    self.refresh_gradient();
                    return Err(Stop::Stalled);
                }
            }
        }
    }

    /// Solves the two-variable subproblem on `(i, j)`, updates the gradient
    /// and returns the dual objective gain, or `None` if nothing moved.
    fn step(&mut self, i: usize, j: usize) -> Option<f64> {
        self.cache.ensure(i, j, &self.source);
        self.cache.ensure(j, i, &self.source);
        let (yi, yj) = (self.y[i], self.y[j]);
        let kij = self.cache.row(i)[j];
        let (qii, qjj, qij) = (self.diag[i], self.diag[j], yi * yj * kij);
        let (gi, gj) = (self.grad[i], self.grad[j]);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let c = self.c;
        let (mut ai, mut aj) = (old_i, old_j);

        if yi != yj {
            let quad = positive_or_tau(qii + qjj + 2.0 * qij);
            let delta = (-gi - gj) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = positive_or_tau(qii + qjj - 2.0 * qij);
            let delta = (gi - gj) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        let ai = snap(ai, c);
        let aj = snap(aj, c);
        let (di, dj) = (ai - old_i, aj - old_j);
        if di == 0.0 && dj == 0.0 {
            return None;
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;

        let (row_i, row_j) = (self.cache.row(i), self.cache.row(j));
        for t in 0..self.grad.len() {
            let yt = self.y[t];
            self.grad[t] += yt * (yi * row_i[t] * di + yj * row_j[t] * dj);
        }
        let change =
            gi * di + gj * dj + 0.5 * (qii * di * di + qjj * dj * dj + 2.0 * qij * di * dj);
        Some(-change)
    }

    fn refresh_gradient(&mut self) {
        let n = self.n();
        let mut grad = vec![-1.0; n];
        let mut row = vec![0.0; n];
        for s in 0..n {
            let a = self.alpha[s];
            if a == 0.0 {
                continue;
            }
            match self.cache.rows[s].as_deref() {
                Some(cached) => row.copy_from_slice(cached),
                None => self.source.fill_row(s, &mut row),
            }
            let ays = a * self.y[s];
            for t in 0..n {
                grad[t] += self.y[t] * ays * row[t];
            }
        }
        self.grad = grad;
    }

    fn exact_objective(&self) -> f64 {
        0.5 * self
            .alpha
            .iter()
            .zip(&self.grad)
            .map(|(a, g)| a * (1.0 - g))
            .sum::<f64>()
    }

    /// Average of `-y G` over free vectors, else the midpoint of the
    /// feasible interval.
    fn bias(&self) -> f64 {
        let (mut sum, mut count) = (0.0, 0usize);
        for t in 0..self.n() {
            let a = self.alpha[t];
            if a > 0.0 && a < self.c {
                sum += -self.y[t] * self.grad[t];
                count += 1;
            }
        }
        if count > 0 {
            sum / count as f64
        } else {
            let (_, gmax, _, gmin) = self.select_pair();
            0.5 * (gmax + gmin)
        }
    }

    fn diagnostics(&self) -> TrainDiagnostics {
        let b = self.bias();
        let mut max_violation: f64 = 0.0;
        let mut slack = 0.0;
        let mut n_sv = 0;
        let mut n_bounded = 0;
        let mut balance = 0.0;
        for t in 0..self.n() {
            let a = self.alpha[t];
            // y f(x) - 1
            let u = self.grad[t] + self.y[t] * b;
            let violation = if a <= 0.0 {
                (-u).max(0.0)
            } else if a >= self.c {
                u.max(0.0)
            } else {
                u.abs()
            };
            max_violation = max_violation.max(violation);
            slack += (-u).max(0.0);
            balance += a * self.y[t];
            if a > 0.0 {
                n_sv += 1;
                if a >= self.c {
                    n_bounded += 1;
                }
            }
        }
        TrainDiagnostics {
            dual_objective: self.exact_objective(),
            iterations: self.iterations,
            n_support_vectors: n_sv,
            n_bounded_svs: n_bounded,
            total_slack: slack,
            max_kkt_violation: max_violation,
            balance_residual: balance.abs(),
            bias: b,
            alphas: self.alpha.clone(),
        }
    }
}

fn positive_or_tau(quad: f64) -> f64 {
    if quad > 0.0 {
        quad
    } else {
        TAU
    }
}

fn snap(a: f64, c: f64) -> f64 {
    if a < SNAP {
        0.0
    } else if a > c - SNAP {
        c
    } else {
        a
    }
}
