//! Derivative-free minimization: Nelder–Mead with deterministic multistart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Nelder–Mead with the standard coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMead {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Stop once every vertex is within this distance (max-norm) of the best.
    pub simplex_tol: f64,
    pub max_iter: usize,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Fresh-simplex restarts from a converged point while they keep improving.
    pub polish_restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            simplex_tol: 1e-10,
            max_iter: 20_000,
            initial_step: 0.1,
            polish_restarts: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let mut best = self.run(&f, x0, self.initial_step);
        for _ in 0..self.polish_restarts {
            let again = self.run(&f, &best.x, self.initial_step * 0.1);
            let improved = again.value < best.value - 1e-15;
            let (it, ev) = (best.iterations + again.iterations, best.evaluations + again.evaluations);
            if again.value <= best.value {
                best = Minimum {
                    iterations: it,
                    evaluations: ev,
                    ..again
                };
            } else {
                best.iterations = it;
                best.evaluations = ev;
            }
            if !improved {
                break;
            }
        }
        best
    }

    fn run(&self, f: &impl Fn(&[f64]) -> f64, x0: &[f64], step: f64) -> Minimum {
        let n = x0.len();
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
        let mut evaluations = n + 1;
        let mut iterations = 0;
        let mut converged = false;

        while iterations < self.max_iter {
            // sort ascending; ties keep vertex order
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&k| simplex[k].clone()).collect();
            values = order.iter().map(|&k| values[k]).collect();

            let diameter = simplex[1..]
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&simplex[0])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if diameter < self.simplex_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
                .collect();
            let along = |coef: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + coef * (c - w))
                    .collect()
            };

            let xr = along(self.reflection);
            let fr = f(&xr);
            evaluations += 1;
            if fr < values[0] {
                let xe = along(self.reflection * self.expansion);
                let fe = f(&xe);
                evaluations += 1;
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let xc = along(self.reflection * self.contraction);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-self.contraction);
                let fc = f(&xc);
                (xc, fc)
            };
            evaluations += 1;
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            for k in 1..=n {
                let shrunk: Vec<f64> = simplex[k]
                    .iter()
                    .zip(&simplex[0])
                    .map(|(v, b)| b + self.shrink * (v - b))
                    .collect();
                values[k] = f(&shrunk);
                simplex[k] = shrunk;
            }
            evaluations += n;
        }

        let best = (0..=n)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("non-empty simplex");
        Minimum {
            x: simplex[best].clone(),
            value: values[best],
            iterations,
            evaluations,
            converged,
        }
    }
}

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        Self { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| rng.gen_range(lo..=hi))
            .collect()
    }
}

/// Orders minima by value, then lexicographically by position.
pub fn better(a: &Minimum, b: &Minimum) -> std::cmp::Ordering {
    a.value.total_cmp(&b.value).then_with(|| {
        a.x.iter()
            .zip(&b.x)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// Runs Nelder–Mead from each start point (in parallel) and returns every
/// local result in start order, plus the index of the winner.
pub fn multistart(
    nm: &NelderMead,
    f: impl Fn(&[f64]) -> f64 + Sync,
    starts: &[Vec<f64>],
) -> (Vec<Minimum>, usize) {
    let results: Vec<Minimum> = starts.par_iter().map(|x0| nm.minimize(&f, x0)).collect();
    let winner = (0..results.len())
        .min_by(|&a, &b| better(&results[a], &results[b]))
        .expect("at least one start");
    (results, winner)
}

/// `count` uniform start points from a seeded stream.
pub fn random_starts(bounds: &SearchBox, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| bounds.sample(&mut rng)).collect()
}
