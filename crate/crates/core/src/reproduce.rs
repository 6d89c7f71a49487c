//! One-shot run of every headline computation, gathered into a JSON summary.

use serde::{Deserialize, Serialize};

use crate::channels::{self, DiamondReport};
use crate::choi::EquatorialState;
use crate::config::Config;
use crate::constraints;
use crate::cost;
use crate::error::Result;
use crate::sampler::{self, Observable, Scenario, ShotPlan, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub min_trace_norm: f64,
    /// `(c1, c4, t)` at the minimum.
    pub argmin: [f64; 3],
    pub sim_cost: f64,
    pub a: f64,
    pub b: f64,
    pub diamond_to_cloner: f64,
    pub diamond_to_cloner_bracket: [f64; 2],
    pub baseline_cost: f64,
    pub baseline_diamond: f64,
    pub sample_ratio: f64,
    pub baseline_sample_ratio: f64,
    pub cloner_fidelity: f64,
    pub universal_fidelity: f64,
    pub failure_rate: f64,
    pub failure_mean_estimate: f64,
    pub local_optimality_min_distance: f64,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

fn check(checks: &mut Vec<Check>, name: &str, pass: bool, detail: String) {
    checks.push(Check {
        name: name.to_string(),
        pass,
        detail,
    });
}

fn bracket_ok(d: &DiamondReport, target: f64, width: f64) -> bool {
    d.certified && (d.lower_cert - target).abs() <= width && (d.upper_cert - target).abs() <= width
}

pub fn run(config: &Config) -> Result<Summary> {
    let tol = &config.tolerances;
    let mut checks = Vec::new();

    let min = cost::minimize(&config.minimize);
    let argmin = min.argmin.as_array();
    check(
        &mut checks,
        "minimum trace norm",
        (min.value - 10.0 / 3.0).abs() <= 1e-7 && min.grid_certificate.passes(),
        format!("value {:.12}, argmin {:?}", min.value, argmin),
    );

    let target = channels::optimal_virtual_broadcaster();
    let bounds = cost::base_norm_bounds(&target, tol.spectral, tol.certificate_width)?;
    let split = cost::pos_neg_split(&target, tol.spectral)?;
    check(
        &mut checks,
        "simulation cost",
        bounds.certified && (bounds.lower - 5.0 / 3.0).abs() <= tol.certificate_width,
        format!("bracket [{:.12}, {:.12}], a = {:.12}, b = {:.12}", bounds.lower, bounds.upper, split.a, split.b),
    );

    let grid = constraints::equatorial_grid(config.grid_radii, config.grid_angles);
    let broadcast = constraints::verify_broadcast(&target, &grid, tol.broadcast)?;
    check(
        &mut checks,
        "equatorial broadcasting",
        broadcast.pass,
        format!("max deviation {:.3e}", broadcast.max_deviation),
    );

    let cloner = channels::phase_covariant_cloner();
    let to_cloner = channels::diamond_distance(&target, &cloner, &config.diamond)?;
    check(
        &mut checks,
        "distance to phase-covariant cloner",
        bracket_ok(&to_cloner, 2.0 / 3.0, tol.certificate_width) && (to_cloner.search_value - 2.0 / 3.0).abs() <= 1e-6,
        format!("{to_cloner:?}"),
    );

    let canonical = channels::canonical_broadcaster()?;
    let universal = channels::universal_cloner()?;
    let baseline_bounds = cost::base_norm_bounds(&canonical, tol.spectral, tol.certificate_width)?;
    check(
        &mut checks,
        "canonical cost",
        baseline_bounds.certified && (baseline_bounds.lower - 2.0).abs() <= tol.certificate_width,
        format!("bracket [{:.12}, {:.12}]", baseline_bounds.lower, baseline_bounds.upper),
    );
    let baseline = channels::diamond_distance(&canonical, &universal, &config.diamond)?;
    check(
        &mut checks,
        "distance to universal cloner",
        (baseline.value - 1.0).abs() <= 1e-6,
        format!("{baseline:?}"),
    );

    let s = &config.sampling;
    let plan = ShotPlan::symmetric(s.epsilon, s.delta, s.c_range)?;
    let report = sampler::sample_cost_report(&plan, &split)?;
    let baseline_split = cost::pos_neg_split(&canonical, tol.spectral)?;
    let baseline_report = sampler::sample_cost_report(&plan, &baseline_split)?;
    check(
        &mut checks,
        "sample inefficiency",
        report.ratio > 1.0 && baseline_report.ratio > 1.0,
        format!("ratios {:.6} and {:.6}", report.ratio, baseline_report.ratio),
    );

    let fid = channels::equatorial_fidelity_profile(&cloner, 36)?;
    let (lo, hi) = fid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &f| (l.min(f), h.max(f)));
    check(
        &mut checks,
        "cloner fidelity constant on equator",
        hi - lo <= 1e-10,
        format!("spread {:.3e}", hi - lo),
    );
    let universal_fidelity = channels::clone_fidelities(&universal, &crate::linalg::gates::ket(&[0]))?[0];

    let shots = sampler::inflated_shots(split.cost(), report.n_q);
    let scenario = Scenario {
        strategy: Strategy::Virtual {
            map: target.clone(),
            split: split.clone(),
        },
        rho: EquatorialState::plus(),
        observable: Observable::pauli_x(),
        epsilon: s.epsilon,
        shots,
    };
    let failures = sampler::empirical_failure_rate(&scenario, s.repetitions, config.seed)?;
    let slack = 3.0 * failures.binomial_sigma(s.delta);
    check(
        &mut checks,
        "virtual failure rate",
        failures.rate <= s.delta + slack,
        format!("rate {:.4} over {} repetitions of {} shots", failures.rate, s.repetitions, shots),
    );

    let local = channels::cloner_local_optimality(&config.local_optimality)?;
    check(
        &mut checks,
        "cloner local optimality",
        local.pass,
        format!("min distance {:.9} over {} samples", local.min_distance, local.samples),
    );

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(Summary {
        seed: config.seed,
        min_trace_norm: min.value,
        argmin,
        sim_cost: bounds.lower,
        a: split.a,
        b: split.b,
        diamond_to_cloner: to_cloner.value,
        diamond_to_cloner_bracket: [to_cloner.lower_cert, to_cloner.upper_cert],
        baseline_cost: baseline_bounds.lower,
        baseline_diamond: baseline.value,
        sample_ratio: report.ratio,
        baseline_sample_ratio: baseline_report.ratio,
        cloner_fidelity: fid[0],
        universal_fidelity,
        failure_rate: failures.rate,
        failure_mean_estimate: failures.mean_estimate,
        local_optimality_min_distance: local.min_distance,
        checks,
        all_pass,
    })
}
