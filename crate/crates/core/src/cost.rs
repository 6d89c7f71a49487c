//! Simulation cost of the constrained family.
//!
//! For a Hermitian, trace-preserving map the simulation cost (base norm) is
//! sandwiched by the Choi trace norm:
//!
//! ```text
//! ‖C‖₁ / d  ≤  cost  ≤  any (a + b) with B = a E − b F,  E, F physical.
//! ```
//!
//! The lower end is cheap; the upper end is realized by splitting `C` into its
//! positive and negative spectral parts. When both parts have input marginals
//! proportional to the identity the two ends meet and the cost is certified.

use serde::{Deserialize, Serialize};

use crate::choi::ChoiOperator;
use crate::constraints::ConstrainedParams;
use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eig, ComplexMatrix};
use crate::optim::{self, NelderMead, SearchBox};

/// Trace norm of the Choi operator of the constrained member `q`.
pub fn objective(q: &ConstrainedParams) -> f64 {
    linalg::trace_norm(q.choi().matrix())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeConfig {
    pub starts: usize,
    pub seed: u64,
    pub nelder_mead: NelderMead,
    /// Box for random starts and the certificate grid, ordered (c1, c4, t).
    pub search_box: SearchBox,
    pub grid_points: usize,
    /// A grid node beating the optimum by more than this is a competing basin.
    pub grid_margin: f64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            seed: 7,
            nelder_mead: NelderMead::default(),
            search_box: SearchBox::new(vec![-2.0, -1.0, -2.0], vec![2.0, 2.0, 2.0]),
            grid_points: 41,
            grid_margin: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCertificate {
    pub points_per_axis: usize,
    pub evaluated: usize,
    pub best_value: f64,
    pub best_node: ConstrainedParams,
    /// Grid node closest to the multistart optimum.
    pub nearest_node: ConstrainedParams,
    pub best_is_nearest: bool,
    /// No grid node beats the optimum by more than the margin.
    pub no_better_node: bool,
    /// Local minimum reached by descending from the best node.
    pub best_node_descent: ConstrainedParams,
    /// The descent from the best node ends at the multistart optimum (within
    /// 1e−5 per coordinate), so the best grid region is the optimum's basin.
    pub same_basin: bool,
}

impl GridCertificate {
    pub fn passes(&self) -> bool {
        self.no_better_node && self.same_basin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub value: f64,
    pub argmin: ConstrainedParams,
    pub grid_certificate: GridCertificate,
    pub restarts_used: usize,
    pub evaluations: usize,
}

/// Multistart Nelder–Mead over `(c1, c4, t)` followed by a grid scan.
pub fn minimize(config: &MinimizeConfig) -> MinimizeReport {
    let starts = optim::random_starts(&config.search_box, config.starts, config.seed);
    minimize_from(config, &starts)
}

/// As [`minimize`], from explicit start points.
pub fn minimize_from(config: &MinimizeConfig, starts: &[Vec<f64>]) -> MinimizeReport {
    let f = |x: &[f64]| objective(&ConstrainedParams::from_slice(x));
    let (runs, winner) = optim::multistart(&config.nelder_mead, f, starts);
    let best = &runs[winner];
    let argmin = ConstrainedParams::from_slice(&best.x);
    let grid_certificate = grid_scan(config, &argmin, best.value);
    MinimizeReport {
        value: best.value,
        argmin,
        grid_certificate,
        restarts_used: runs.len(),
        evaluations: runs.iter().map(|m| m.evaluations).sum(),
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn nearest(axis: &[f64], x: f64) -> f64 {
    *axis
        .iter()
        .min_by(|a, b| (*a - x).abs().total_cmp(&(*b - x).abs()))
        .expect("non-empty axis")
}

fn grid_scan(config: &MinimizeConfig, argmin: &ConstrainedParams, value: f64) -> GridCertificate {
    use rayon::prelude::*;

    let b = &config.search_box;
    let n = config.grid_points;
    let axes: Vec<Vec<f64>> = (0..3).map(|k| axis(b.lower[k], b.upper[k], n)).collect();
    let nodes: Vec<[f64; 3]> = axes[0]
        .iter()
        .flat_map(|&x| {
            let axes = &axes;
            axes[1]
                .iter()
                .flat_map(move |&y| axes[2].iter().map(move |&z| [x, y, z]))
        })
        .collect();
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|p| objective(&ConstrainedParams::new(p[0], p[1], p[2])))
        .collect();
    let best = (0..values.len())
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("non-empty grid");
    let best_node = ConstrainedParams::new(nodes[best][0], nodes[best][1], nodes[best][2]);
    let nearest_node = ConstrainedParams::new(
        nearest(&axes[0], argmin.c1),
        nearest(&axes[1], argmin.c4),
        nearest(&axes[2], argmin.t),
    );
    let descent = config
        .nelder_mead
        .minimize(|x: &[f64]| objective(&ConstrainedParams::from_slice(x)), &nodes[best]);
    let best_node_descent = ConstrainedParams::from_slice(&descent.x);
    let same_basin = best_node_descent
        .as_array()
        .iter()
        .zip(argmin.as_array())
        .all(|(a, b)| (a - b).abs() <= 1e-5);
    GridCertificate {
        points_per_axis: n,
        evaluated: values.len(),
        best_value: values[best],
        best_node,
        nearest_node,
        best_is_nearest: best_node == nearest_node,
        no_better_node: values[best] >= value - config.grid_margin,
        best_node_descent,
        same_basin,
    }
}

/// `B = a E⁺ − b E⁻` with `E±` built from the spectral parts of the Choi matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    pub a: f64,
    pub b: f64,
    pub e_plus: Option<ChoiOperator>,
    pub e_minus: Option<ChoiOperator>,
    /// Both parts have input marginals proportional to 𝟙 (so `E±` are TP).
    pub tp_exact: bool,
    /// Largest eigenvalue of the input marginal of `a E⁺`, resp. `b E⁻`.
    /// Dividing by these instead of `a`, `b` always gives trace-non-increasing parts.
    pub plus_marginal_norm: f64,
    pub minus_marginal_norm: f64,
}

impl Decomposition {
    pub fn cost(&self) -> f64 {
        self.a + self.b
    }

    /// `a + b` after rescaling to trace-non-increasing parts; equals
    /// [`cost`](Self::cost) when `tp_exact`.
    pub fn cptni_cost(&self) -> f64 {
        self.plus_marginal_norm + self.minus_marginal_norm
    }

    pub fn positive_part(&self) -> Option<ChoiOperator> {
        self.e_plus.as_ref().map(|e| e.scale(self.a))
    }

    pub fn negative_part(&self) -> Option<ChoiOperator> {
        self.e_minus.as_ref().map(|e| e.scale(self.b))
    }

    /// `a E⁺ − b E⁻`
    pub fn reconstruct(&self, template: &ChoiOperator) -> ChoiOperator {
        let mut m = ComplexMatrix::zeros(template.matrix().rows(), template.matrix().cols());
        if let Some(p) = self.positive_part() {
            m = &m + p.matrix();
        }
        if let Some(n) = self.negative_part() {
            m = &m - n.matrix();
        }
        template.with_matrix(m).expect("same shape")
    }

    /// Largest entry of `P · N`; zero for orthogonal supports.
    pub fn overlap(&self) -> f64 {
        match (self.positive_part(), self.negative_part()) {
            (Some(p), Some(n)) => p.matrix().matmul(n.matrix()).max_abs(),
            _ => 0.0,
        }
    }
}

/// Splits a Hermitian Choi operator into its positive and negative spectral
/// parts. Eigenvalues in `(−tol, tol)` go to the positive part.
pub fn pos_neg_split(c: &ChoiOperator, tol: f64) -> Result<Decomposition> {
    let eig = hermitian_eig(c.matrix(), tol)?;
    let pos = eig.reconstruct_with(|l| if l > -tol { l } else { 0.0 });
    let neg = eig.reconstruct_with(|l| if l > -tol { 0.0 } else { -l });
    let d = c.dim_in() as f64;
    let a = pos.trace().re / d;
    let b = neg.trace().re / d;

    let p = c.with_matrix(pos)?;
    let n = c.with_matrix(neg)?;
    let pm = p.input_marginal();
    let nm = n.input_marginal();
    let id = ComplexMatrix::identity(c.dim_in());
    let proportional = |m: &ComplexMatrix, s: f64| m.max_abs_diff(&id.scale_real(s)) <= tol * s.max(1.0);
    let tp_exact = proportional(&pm, a) && proportional(&nm, b);
    let marginal_norm = |m: &ComplexMatrix| linalg::eigenvalues(m)[0].max(0.0);

    let normalize = |part: &ChoiOperator, s: f64| (s > tol).then(|| part.scale(1.0 / s));
    Ok(Decomposition {
        a,
        b,
        e_plus: normalize(&p, a),
        e_minus: normalize(&n, b),
        tp_exact,
        plus_marginal_norm: marginal_norm(&pm),
        minus_marginal_norm: marginal_norm(&nm),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseNormBounds {
    pub lower: f64,
    pub upper: f64,
    pub certified: bool,
}

impl BaseNormBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Trace-norm lower bound and spectral-split upper bound on the simulation
/// cost of a Hermitian, trace-preserving map. `certified` when they agree
/// within `width_tol`.
pub fn base_norm_bounds(c: &ChoiOperator, tol: f64, width_tol: f64) -> Result<BaseNormBounds> {
    if !c.is_hp(tol) {
        return Err(Error::Constraint("base-norm bounds need a Hermitian-preserving map".into()));
    }
    if !c.is_tp(tol) {
        return Err(Error::Constraint("base-norm bounds need a trace-preserving map".into()));
    }
    let norm = linalg::trace_norm(c.matrix());
    let lower = norm / c.dim_in() as f64;
    let split = pos_neg_split(c, tol)?;
    let upper = split.cptni_cost().min(norm);
    Ok(BaseNormBounds {
        lower,
        upper,
        certified: upper - lower <= width_tol,
    })
}
