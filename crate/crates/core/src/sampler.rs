//! Quasiprobability Monte-Carlo simulation of a virtual broadcaster, and the
//! copy-count comparison against handing out input copies directly.
//!
//! Shot `k` of a run with seed `s` draws from ChaCha8 keyed by `s` on stream
//! `k`, so a run gives the same integer tallies however it is sharded.
//!
//! The copy count `c²/(2ε²)·ln(2/δ)` is the Hoeffding sufficient count for an
//! estimate within `ε` with probability at least `1 − δ`. It is used as the
//! operative count for both strategies.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choi::{ChoiOperator, EquatorialState};
use crate::cost::{self, Decomposition};
use crate::error::{Error, Result};
use crate::linalg::{gates, hermitian_eig, ComplexMatrix, DEFAULT_TOL};

/// Accuracy targets and failure probabilities for the two parties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Outcome range `max − min` of the measured observables.
    pub c_range: f64,
}

impl ShotPlan {
    pub fn new(epsilon1: f64, epsilon2: f64, delta1: f64, delta2: f64, c_range: f64) -> Result<Self> {
        let all = [epsilon1, epsilon2, delta1, delta2, c_range];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) || delta1 >= 1.0 || delta2 >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "shot plan needs positive parameters and δ < 1, got {all:?}"
            )));
        }
        Ok(Self {
            epsilon1,
            epsilon2,
            delta1,
            delta2,
            c_range,
        })
    }

    pub fn symmetric(epsilon: f64, delta: f64, c_range: f64) -> Result<Self> {
        Self::new(epsilon, epsilon, delta, delta, c_range)
    }
}

/// `⌈c²/(2ε²)·ln(2/δ)⌉`
pub fn hoeffding_copies(epsilon: f64, delta: f64, c: f64) -> Result<u64> {
    if !(epsilon > 0.0 && c > 0.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "hoeffding_copies needs ε, c > 0 and 0 < δ < 1 (got ε={epsilon}, δ={delta}, c={c})"
        )));
    }
    let raw = c * c / (2.0 * epsilon * epsilon) * (2.0 / delta).ln();
    Ok(guarded_ceil(raw).max(1))
}

/// Ceiling that absorbs a few ulps of rounding, so exact integers are not
/// bumped up by one.
fn guarded_ceil(x: f64) -> u64 {
    (x * (1.0 - 4.0 * f64::EPSILON)).ceil() as u64
}

/// `⌈(a+b)²·n⌉`, the shot count a virtual strategy with cost `a+b` needs to
/// match `n` direct copies.
pub fn inflated_shots(cost: f64, n: u64) -> u64 {
    guarded_ceil(cost * cost * n as f64)
}

/// Two-outcome (or degenerate) qubit observable with cached spectral data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    matrix: ComplexMatrix,
    values: [f64; 2],
    projectors: [ComplexMatrix; 2],
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::Dimension("observable must be 2×2".into()));
        }
        let eig = hermitian_eig(&matrix, DEFAULT_TOL)?;
        let proj = |k: usize| gates::projector(&eig.vector(k));
        Ok(Self {
            values: [eig.values[0], eig.values[1]],
            projectors: [proj(0), proj(1)],
            matrix,
        })
    }

    pub fn pauli_x() -> Self {
        Self::new(gates::pauli_x()).expect("Hermitian")
    }

    pub fn pauli_y() -> Self {
        Self::new(gates::pauli_y()).expect("Hermitian")
    }

    pub fn pauli_z() -> Self {
        Self::new(gates::pauli_z()).expect("Hermitian")
    }

    pub fn identity() -> Self {
        Self::new(ComplexMatrix::identity(2)).expect("Hermitian")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn values(&self) -> [f64; 2] {
        self.values
    }

    pub fn spread(&self) -> f64 {
        self.values[0] - self.values[1]
    }

    pub fn expectation(&self, rho: &ComplexMatrix) -> f64 {
        self.matrix.matmul(rho).trace().re
    }

    /// Probability of the first eigen-outcome on `rho`, clamped to [0, 1].
    fn first_outcome_probability(&self, rho: &ComplexMatrix) -> f64 {
        self.projectors[0].matmul(rho).trace().re.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualEstimate {
    pub est1: f64,
    pub est2: f64,
    pub shots: u64,
    /// Fraction of shots that took the `E⁺` branch.
    pub plus_fraction: f64,
}

/// Per-shot sampling tables for the two branches.
struct BranchTables {
    plus_weight: f64,
    scale: f64,
    // [branch][output] probability of the first eigen-outcome
    first: [[f64; 2]; 2],
}

/// Integer tallies: branch counts and, per branch and output, counts of the
/// first eigen-outcome.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    branch: [u64; 2],
    first: [[u64; 2]; 2],
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for b in 0..2 {
            self.branch[b] += other.branch[b];
            for o in 0..2 {
                self.first[b][o] += other.first[b][o];
            }
        }
        self
    }
}

fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

fn branch_tables(d: &Decomposition, rho: &ComplexMatrix, o1: &Observable, o2: &Observable) -> Result<BranchTables> {
    let total = d.cost();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::InvalidInput("decomposition has zero weight".into()));
    }
    let mut first = [[0.0; 2]; 2];
    for (b, (part, weight)) in [(&d.e_plus, d.a), (&d.e_minus, d.b)].into_iter().enumerate() {
        if weight <= 0.0 {
            continue;
        }
        let e = part
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("decomposition is missing a weighted branch".into()))?;
        if !e.is_cptp(1e-9) {
            return Err(Error::InvalidInput(
                "decomposition branches must be CPTP to be sampled".into(),
            ));
        }
        first[b][0] = o1.first_outcome_probability(&e.marginal(rho, 1)?);
        first[b][1] = o2.first_outcome_probability(&e.marginal(rho, 2)?);
    }
    Ok(BranchTables {
        plus_weight: d.a / total,
        scale: total,
        first,
    })
}

fn tally_range(t: &BranchTables, seed: u64, range: std::ops::Range<u64>) -> Tally {
    let mut tally = Tally::default();
    for shot in range {
        let mut rng = shot_rng(seed, shot);
        let b = usize::from(rng.gen::<f64>() >= t.plus_weight);
        tally.branch[b] += 1;
        for o in 0..2 {
            if rng.gen::<f64>() < t.first[b][o] {
                tally.first[b][o] += 1;
            }
        }
    }
    tally
}

fn shard_ranges(shots: u64, shards: usize) -> Vec<std::ops::Range<u64>> {
    let shards = shards.max(1) as u64;
    let per = shots.div_ceil(shards);
    (0..shards)
        .map(|k| (k * per).min(shots)..((k + 1) * per).min(shots))
        .filter(|r| !r.is_empty())
        .collect()
}

/// Default shard count for [`simulate_virtual`]; results do not depend on it.
pub const DEFAULT_SHARDS: usize = 16;

/// Estimates `Tr[O₁ Tr₂ B(ρ)]` and `Tr[O₂ Tr₁ B(ρ)]` by quasiprobability
/// sampling from `B = a E⁺ − b E⁻`.
pub fn simulate_virtual(
    d: &Decomposition,
    rho: &EquatorialState,
    o1: &Observable,
    o2: &Observable,
    shots: u64,
    seed: u64,
) -> Result<VirtualEstimate> {
    simulate_virtual_sharded(d, rho, o1, o2, shots, seed, DEFAULT_SHARDS)
}

pub fn simulate_virtual_sharded(
    d: &Decomposition,
    rho: &EquatorialState,
    o1: &Observable,
    o2: &Observable,
    shots: u64,
    seed: u64,
    shards: usize,
) -> Result<VirtualEstimate> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be positive".into()));
    }
    let tables = branch_tables(d, &rho.density(), o1, o2)?;
    let tally = shard_ranges(shots, shards)
        .into_par_iter()
        .map(|r| tally_range(&tables, seed, r))
        .reduce(Tally::default, Tally::merge);

    let n = shots as f64;
    let estimate = |o: usize, obs: &Observable| {
        let [hi, lo] = obs.values();
        let mut signed = 0.0;
        for (b, sign) in [(0, 1.0), (1, -1.0)] {
            let firsts = tally.first[b][o] as f64;
            let rest = (tally.branch[b] - tally.first[b][o]) as f64;
            signed += sign * (firsts * hi + rest * lo);
        }
        tables.scale * signed / n
    };
    Ok(VirtualEstimate {
        est1: estimate(0, o1),
        est2: estimate(1, o2),
        shots,
        plus_fraction: tally.branch[0] as f64 / n,
    })
}

/// Sample mean of `shots` projective measurements of `o` on copies of `rho`.
pub fn simulate_direct(rho: &EquatorialState, o: &Observable, shots: u64, seed: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be positive".into()));
    }
    let p = o.first_outcome_probability(&rho.density());
    let firsts: u64 = shard_ranges(shots, DEFAULT_SHARDS)
        .into_par_iter()
        .map(|range| {
            range
                .filter(|&shot| shot_rng(seed, shot).gen::<f64>() < p)
                .count() as u64
        })
        .sum();
    let [hi, lo] = o.values();
    Ok((firsts as f64 * hi + (shots - firsts) as f64 * lo) / shots as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCostReport {
    pub plan: ShotPlan,
    pub n1: u64,
    pub n2: u64,
    pub n_q: u64,
    pub a: f64,
    pub b: f64,
    pub cost: f64,
    /// `(a+b)²·n_Q`
    pub virtual_copies: f64,
    /// `n₁ + n₂`
    pub direct_copies: u64,
    pub ratio: f64,
    /// Whether simulating the map needs no more copies than direct distribution.
    pub sample_efficient: bool,
}

pub fn sample_cost_report(plan: &ShotPlan, d: &Decomposition) -> Result<SampleCostReport> {
    let n1 = hoeffding_copies(plan.epsilon1, plan.delta1, plan.c_range)?;
    let n2 = hoeffding_copies(plan.epsilon2, plan.delta2, plan.c_range)?;
    let n_q = n1.max(n2);
    let cost = d.cost();
    let virtual_copies = cost * cost * n_q as f64;
    let direct_copies = n1 + n2;
    let ratio = virtual_copies / direct_copies as f64;
    Ok(SampleCostReport {
        plan: *plan,
        n1,
        n2,
        n_q,
        a: d.a,
        b: d.b,
        cost,
        virtual_copies,
        direct_copies,
        ratio,
        sample_efficient: ratio <= 1.0,
    })
}

/// Which strategy a failure-rate experiment runs.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Strategy {
    /// Quasiprobability sampling of `map` via its spectral split.
    Virtual { map: ChoiOperator, split: Decomposition },
    /// Measuring fresh copies of the input.
    Direct,
}

impl Strategy {
    pub fn virtual_map(map: ChoiOperator) -> Result<Self> {
        let split = cost::pos_neg_split(&map, 1e-10)?;
        Ok(Strategy::Virtual { map, split })
    }
}

/// Estimating `⟨O⟩` on output 1 (or on the input, for the direct strategy)
/// to accuracy `epsilon` with a fixed shot budget.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub strategy: Strategy,
    pub rho: EquatorialState,
    pub observable: Observable,
    pub epsilon: f64,
    pub shots: u64,
}

impl Scenario {
    /// Value the estimator targets.
    pub fn exact(&self) -> Result<f64> {
        let rho = self.rho.density();
        match &self.strategy {
            Strategy::Virtual { map, .. } => Ok(self.observable.expectation(&map.marginal(&rho, 1)?)),
            Strategy::Direct => Ok(self.observable.expectation(&rho)),
        }
    }

    fn estimate(&self, seed: u64) -> Result<f64> {
        match &self.strategy {
            Strategy::Virtual { split, .. } => {
                simulate_virtual(split, &self.rho, &self.observable, &self.observable, self.shots, seed)
                    .map(|e| e.est1)
            }
            Strategy::Direct => simulate_direct(&self.rho, &self.observable, self.shots, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub repetitions: usize,
    pub shots: u64,
    pub epsilon: f64,
    pub exact: f64,
    pub failures: usize,
    pub rate: f64,
    pub mean_estimate: f64,
    pub estimates: Vec<f64>,
}

impl FailureReport {
    /// Binomial standard deviation of the failure rate at true rate `p`.
    pub fn binomial_sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.repetitions as f64).sqrt()
    }

    /// Writes `repetition,estimate,error,failed` rows.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["repetition", "estimate", "error", "failed"])?;
        for (k, est) in self.estimates.iter().enumerate() {
            let err = est - self.exact;
            w.write_record([
                k.to_string(),
                est.to_string(),
                err.to_string(),
                (err.abs() > self.epsilon).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `repetitions` independent estimates and counts those off by more
/// than `epsilon`.
pub fn empirical_failure_rate(scenario: &Scenario, repetitions: usize, seed: u64) -> Result<FailureReport> {
    if repetitions < 100 {
        return Err(Error::InvalidInput(format!(
            "failure-rate experiments need at least 100 repetitions, got {repetitions}"
        )));
    }
    let exact = scenario.exact()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..repetitions).map(|_| master.gen()).collect();
    let estimates = seeds
        .par_iter()
        .map(|&s| scenario.estimate(s))
        .collect::<Result<Vec<f64>>>()?;
    let failures = estimates
        .iter()
        .filter(|e| (*e - exact).abs() > scenario.epsilon)
        .count();
    Ok(FailureReport {
        repetitions,
        shots: scenario.shots,
        epsilon: scenario.epsilon,
        exact,
        failures,
        rate: failures as f64 / repetitions as f64,
        mean_estimate: estimates.iter().sum::<f64>() / repetitions as f64,
        estimates,
    })
}
