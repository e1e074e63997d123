//! Brute-force reference solver for the soft-margin dual.
//!
//! Pairwise projected coordinate ascent: every sweep visits all pairs
//! `(i, j)` and moves along `y_i e_i - y_j e_j`, which keeps `sum a y = 0`.
//! The step starts at the unconstrained optimum, is projected onto the box
//! and halved until the dual improves. Objective and gradient are recomputed
//! from the full matrix every time. Sweeps stop once a whole sweep improves
//! the dual by less than 1e-12.
//!
//! Nothing here shares code with the library solver.

#![allow(dead_code)]

#[derive(Debug, Clone, Copy)]
pub enum OracleKernel {
    Linear,
    Rbf(f64),
}

impl OracleKernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            OracleKernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            OracleKernel::Rbf(gamma) => {
                let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
                (-gamma * d).exp()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub alphas: Vec<f64>,
    pub objective: f64,
    pub bias: f64,
    pub sweeps: usize,
}

pub struct Oracle {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    kernel: OracleKernel,
    c: f64,
    q: Vec<Vec<f64>>,
}

impl Oracle {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>, kernel: OracleKernel, c: f64) -> Oracle {
        let n = x.len();
        let q = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| y[i] * y[j] * kernel.eval(&x[i], &x[j]))
                    .collect()
            })
            .collect();
        Oracle { x, y, kernel, c, q }
    }

    pub fn dual(&self, a: &[f64]) -> f64 {
        let n = a.len();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * a[j] * self.q[i][j];
            }
        }
        a.iter().sum::<f64>() - 0.5 * quad
    }

    fn q_times(&self, a: &[f64]) -> Vec<f64> {
        self.q
            .iter()
            .map(|row| row.iter().zip(a).map(|(q, a)| q * a).sum())
            .collect()
    }

    pub fn solve(&self) -> OracleSolution {
        let n = self.y.len();
        let c = self.c;
        let mut a = vec![0.0; n];
        let mut value = self.dual(&a);
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            let start = value;
            for i in 0..n {
                for j in (i + 1)..n {
                    let (yi, yj) = (self.y[i], self.y[j]);
                    // a_i + yi t in [0, C], a_j - yj t in [0, C]
                    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                    for (cur, dir) in [(a[i], yi), (a[j], -yj)] {
                        let (t0, t1) = ((0.0 - cur) / dir, (c - cur) / dir);
                        lo = lo.max(t0.min(t1));
                        hi = hi.min(t0.max(t1));
                    }
                    if hi - lo <= 0.0 {
                        continue;
                    }
                    let qa = self.q_times(&a);
                    let slope = yi * (1.0 - qa[i]) - yj * (1.0 - qa[j]);
                    let curvature = self.q[i][i] + self.q[j][j] - 2.0 * yi * yj * self.q[i][j];
                    let mut t = if curvature > 1e-15 {
                        slope / curvature
                    } else if slope > 0.0 {
                        hi
                    } else {
                        lo
                    };
                    t = t.clamp(lo, hi);
                    for _ in 0..80 {
                        let mut trial = a.clone();
                        trial[i] = (trial[i] + yi * t).clamp(0.0, c);
                        trial[j] = (trial[j] - yj * t).clamp(0.0, c);
                        let v = self.dual(&trial);
                        if v > value {
                            a = trial;
                            value = v;
                            break;
                        }
                        t *= 0.5;
                    }
                }
            }
            if value - start < 1e-12 || sweeps > 100_000 {
                break;
            }
        }
        let bias = self.bias(&a);
        OracleSolution {
            alphas: a,
            objective: value,
            bias,
            sweeps,
        }
    }

    fn expansion(&self, a: &[f64], x: &[f64]) -> f64 {
        (0..a.len())
            .map(|j| a[j] * self.y[j] * self.kernel.eval(&self.x[j], x))
            .sum()
    }

    /// Average over free vectors; midpoint of the KKT-feasible interval when
    /// every vector sits at a bound.
    pub fn bias(&self, a: &[f64]) -> f64 {
        let eps = 1e-8 * self.c;
        let mut free = Vec::new();
        let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..a.len() {
            let s = self.expansion(a, &self.x[i]);
            let target = self.y[i] - s;
            if a[i] > eps && a[i] < self.c - eps {
                free.push(target);
            } else {
                let at_zero = a[i] <= eps;
                // at zero: y f >= 1, at C: y f <= 1
                if (self.y[i] > 0.0) == at_zero {
                    lower = lower.max(target);
                } else {
                    upper = upper.min(target);
                }
            }
        }
        if free.is_empty() {
            0.5 * (lower + upper)
        } else {
            free.iter().sum::<f64>() / free.len() as f64
        }
    }

    pub fn decision(&self, sol: &OracleSolution, x: &[f64]) -> f64 {
        self.expansion(&sol.alphas, x) + sol.bias
    }

    pub fn total_slack(&self, sol: &OracleSolution) -> f64 {
        (0..self.y.len())
            .map(|i| (1.0 - self.y[i] * self.decision(sol, &self.x[i])).max(0.0))
            .sum()
    }
}
