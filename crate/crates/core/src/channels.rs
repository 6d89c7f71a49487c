//! Named maps and the diamond-norm distance between maps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::choi::{ChoiOperator, QubitBasis};
use crate::constraints::{self, ConstrainedParams};
use crate::cost;
use crate::error::{Error, Result};
use crate::linalg::{self, gates, hermitian_eig, kron, r, ComplexMatrix, ONE, ZERO};
use crate::optim::{self, NelderMead, SearchBox};
use crate::symmetry::{self, clifford_twirl, swap_twirl};

/// Free parameters of the minimum-cost broadcaster: c1 = 1/3, c4 = 5/12, t = 0.
pub const OPTIMAL_PARAMS: ConstrainedParams = ConstrainedParams {
    c1: 1.0 / 3.0,
    c4: 5.0 / 12.0,
    t: 0.0,
};

/// The minimum-cost member of the constrained family.
pub fn optimal_virtual_broadcaster() -> ChoiOperator {
    OPTIMAL_PARAMS.choi()
}

/// Optimal phase-covariant 1→2 cloner, with Kraus operators
/// `(|00⟩⟨0| + (|01⟩+|10⟩)⟨1|)/√3` and its bit-flipped partner.
pub fn phase_covariant_cloner() -> ChoiOperator {
    let s = 1.0 / 3f64.sqrt();
    let k1 = ComplexMatrix::from_fn(4, 2, |row, col| match (row, col) {
        (0, 0) | (1, 1) | (2, 1) => r(s),
        _ => ZERO,
    });
    let k2 = ComplexMatrix::from_fn(4, 2, |row, col| match (row, col) {
        (3, 1) | (1, 0) | (2, 0) => r(s),
        _ => ZERO,
    });
    from_kraus(&[k1, k2], vec![2, 2])
}

/// Choi operator of `ρ ↦ Σ K ρ K†`.
pub fn from_kraus(kraus: &[ComplexMatrix], dims_out: Vec<usize>) -> ChoiOperator {
    let d_in = kraus[0].cols();
    ChoiOperator::from_map(d_in, dims_out, |i, j| {
        let mut unit = ComplexMatrix::zeros(d_in, d_in);
        unit[(i, j)] = ONE;
        kraus
            .iter()
            .fold(ComplexMatrix::zeros(kraus[0].rows(), kraus[0].rows()), |acc, k| {
                &acc + &k.matmul(&unit).matmul(&k.adjoint())
            })
    })
    .expect("Kraus shapes agree")
}

/// `ρ ↦ ½{ρ ⊗ 𝟙, S}`
pub fn canonical_closed_form() -> ChoiOperator {
    let s = gates::swap();
    let id = ComplexMatrix::identity(2);
    ChoiOperator::from_map(2, vec![2, 2], |i, j| {
        let mut unit = ComplexMatrix::zeros(2, 2);
        unit[(i, j)] = ONE;
        let a = kron(&unit, &id);
        (&a.matmul(&s) + &s.matmul(&a)).scale_real(0.5)
    })
    .expect("1→2 map")
}

/// The unitarily covariant, swap-invariant, classically consistent
/// broadcaster, obtained by solving classical consistency on the range of the
/// Clifford and swap twirls. Fails if the solution is not unique or disagrees
/// with `½{ρ ⊗ 𝟙, S}` beyond 1e−12.
pub fn canonical_broadcaster() -> Result<ChoiOperator> {
    let basis = symmetry::invariant_basis(|c| clifford_twirl(&swap_twirl(c)));
    let sol = constraints::solve_classic(&basis, &QubitBasis::computational(), 1e-10)?;
    if !sol.is_unique() {
        return Err(Error::Constraint(format!(
            "unitary pipeline leaves {} free directions",
            sol.null_space.len()
        )));
    }
    let closed = canonical_closed_form();
    let gap = sol.particular.matrix().max_abs_diff(closed.matrix());
    if gap > 1e-12 {
        return Err(Error::Constraint(format!(
            "pipeline and closed-form canonical broadcaster differ by {gap:.3e}"
        )));
    }
    Ok(sol.particular)
}

/// Normalized positive part of the canonical broadcaster.
pub fn universal_cloner() -> Result<ChoiOperator> {
    let split = cost::pos_neg_split(&canonical_broadcaster()?, 1e-10)?;
    split
        .e_plus
        .ok_or_else(|| Error::Constraint("canonical broadcaster has no positive part".into()))
}

/// Fidelity `⟨ψ|Tr_other E(ψ)|ψ⟩` of each clone for pure input `ψ`.
pub fn clone_fidelities(c: &ChoiOperator, psi: &[Complex64]) -> Result<[f64; 2]> {
    let rho = gates::projector(psi);
    let mut out = [0.0; 2];
    for (k, keep) in [1, 2].into_iter().enumerate() {
        let m = c.marginal(&rho, keep)?;
        out[k] = m.matmul(&rho).trace().re;
    }
    Ok(out)
}

/// Clone fidelity of the first output at `points` equally spaced equatorial pure states.
pub fn equatorial_fidelity_profile(c: &ChoiOperator, points: usize) -> Result<Vec<f64>> {
    (0..points)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / points as f64;
            let psi = crate::choi::EquatorialState::pure_ket(phi);
            clone_fidelities(c, &psi).map(|f| f[0])
        })
        .collect()
}

/// Random CPTP map with the given output dims (qubit input), from a
/// Ginibre-distributed Choi matrix normalized to be trace preserving.
pub fn random_cptp(dims_out: Vec<usize>, rng: &mut impl Rng) -> ChoiOperator {
    let d_out: usize = dims_out.iter().product();
    let n = 2 * d_out;
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let p = ChoiOperator::new(g.matmul(&g.adjoint()), 2, dims_out).expect("shape");
    let m = p.input_marginal();
    let eig = hermitian_eig(&m, 1e-9).expect("marginal is Hermitian");
    let inv_sqrt = eig.reconstruct_with(|l| 1.0 / l.sqrt());
    let a = kron(&ComplexMatrix::identity(d_out), &inv_sqrt);
    p.with_matrix(p.matrix().conjugate_by(&a)).expect("shape")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiamondConfig {
    pub starts: usize,
    pub seed: u64,
    pub nelder_mead: NelderMead,
    /// Bracket width at which the distance counts as certified.
    pub width_tol: f64,
}

impl Default for DiamondConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 7,
            nelder_mead: NelderMead {
                simplex_tol: 1e-9,
                max_iter: 5_000,
                initial_step: 0.3,
                polish_restarts: 2,
                ..NelderMead::default()
            },
            width_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiamondReport {
    /// Best value found, never below `lower_cert` (whose witness is itself a
    /// feasible input).
    pub value: f64,
    /// Best value reached by the multistart search alone.
    pub search_value: f64,
    /// `‖C_Δ‖₁ / d`, attained by the maximally entangled input.
    pub lower_cert: f64,
    /// `λmax(Tr_out P) + λmax(Tr_out N)` for the spectral split `C_Δ = P − N`.
    pub upper_cert: f64,
    pub certified: bool,
    pub starts: usize,
}

/// Amplitudes of a unit vector in `C^dim` from `2·dim − 2` chart coordinates:
/// hyperspherical angles for the moduli, then relative phases.
pub fn sphere_chart(x: &[f64], dim: usize) -> Vec<Complex64> {
    assert_eq!(x.len(), 2 * dim - 2);
    let (angles, phases) = x.split_at(dim - 1);
    let mut moduli = vec![0.0; dim];
    let mut rest = 1.0;
    for k in 0..dim - 1 {
        moduli[k] = rest * angles[k].cos();
        rest *= angles[k].sin();
    }
    moduli[dim - 1] = rest;
    (0..dim)
        .map(|k| {
            let phase = if k == 0 { 0.0 } else { phases[k - 1] };
            Complex64::from_polar(moduli[k], phase)
        })
        .collect()
}

/// `(Δ ⊗ id)(|ψ⟩⟨ψ|)` with `ψ` on input ⊗ reference (reference dim = input dim).
pub fn extended_output(delta: &ChoiOperator, psi: &[Complex64]) -> ComplexMatrix {
    let d = delta.dim_in();
    let d_out = delta.dim_out();
    assert_eq!(psi.len(), d * d);
    let images: Vec<Vec<ComplexMatrix>> = (0..d)
        .map(|i| (0..d).map(|j| delta.unit_image(i, j)).collect())
        .collect();
    let n = d_out * d;
    let mut out = ComplexMatrix::zeros(n, n);
    for l in 0..d {
        for lp in 0..d {
            let img = &images[l][lp];
            for rr in 0..d {
                for rp in 0..d {
                    let w = psi[l * d + rr] * psi[lp * d + rp].conj();
                    if w == ZERO {
                        continue;
                    }
                    for a in 0..d_out {
                        for b in 0..d_out {
                            out[(a * d + rr, b * d + rp)] += w * img[(a, b)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Diamond-norm distance `‖Φ₁ − Φ₂‖◇` with an analytic bracket.
pub fn diamond_distance(c1: &ChoiOperator, c2: &ChoiOperator, config: &DiamondConfig) -> Result<DiamondReport> {
    let delta = c1.combine(1.0, c2, -1.0)?;
    if !delta.is_hp(1e-10) {
        return Err(Error::InvalidInput("diamond distance needs Hermitian-preserving maps".into()));
    }
    let d = delta.dim_in();
    let lower_cert = linalg::trace_norm(delta.matrix()) / d as f64;
    let split = cost::pos_neg_split(&delta, 1e-12)?;
    let upper_cert = split.cptni_cost();

    let dim = d * d;
    let f = |x: &[f64]| -linalg::trace_norm(&extended_output(&delta, &sphere_chart(x, dim)));
    let pi = std::f64::consts::PI;
    let mut lower = vec![0.0; 2 * dim - 2];
    let mut upper = vec![pi / 2.0; dim - 1];
    upper.extend(vec![2.0 * pi; dim - 1]);
    lower.truncate(2 * dim - 2);
    let bounds = SearchBox::new(lower, upper);
    let search_value = if config.starts == 0 {
        0.0
    } else {
        let starts = optim::random_starts(&bounds, config.starts, config.seed);
        let (runs, winner) = optim::multistart(&config.nelder_mead, f, &starts);
        -runs[winner].value
    };

    Ok(DiamondReport {
        value: search_value.max(lower_cert),
        search_value,
        lower_cert,
        upper_cert,
        certified: upper_cert - lower_cert <= config.width_tol,
        starts: config.starts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalOptimalityConfig {
    pub samples: usize,
    pub weights: Vec<f64>,
    pub seed: u64,
    pub tol: f64,
    pub diamond: DiamondConfig,
}

impl Default for LocalOptimalityConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            weights: vec![0.01, 0.05, 0.1],
            seed: 7,
            tol: 1e-6,
            diamond: DiamondConfig {
                starts: 2,
                ..DiamondConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalOptimalityReport {
    pub samples: usize,
    pub reference_distance: f64,
    pub min_distance: f64,
    pub min_weight: f64,
    pub below_threshold: usize,
    pub pass: bool,
}

/// Mixes the cloner with random CPTP maps and checks that none of the
/// perturbed channels gets closer to the optimal broadcaster than the cloner.
pub fn cloner_local_optimality(config: &LocalOptimalityConfig) -> Result<LocalOptimalityReport> {
    let target = optimal_virtual_broadcaster();
    let cloner = phase_covariant_cloner();
    let reference = diamond_distance(&target, &cloner, &config.diamond)?;
    let threshold = 2.0 / 3.0 - config.tol;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut min_distance = f64::INFINITY;
    let mut min_weight = f64::NAN;
    let mut below = 0;
    for k in 0..config.samples {
        let eps = config.weights[k % config.weights.len()];
        let other = random_cptp(vec![2, 2], &mut rng);
        let mixed = cloner.combine(1.0 - eps, &other, eps)?;
        let dc = DiamondConfig {
            seed: config.diamond.seed.wrapping_add(k as u64),
            ..config.diamond.clone()
        };
        let dist = diamond_distance(&target, &mixed, &dc)?;
        if dist.value < min_distance {
            min_distance = dist.value;
            min_weight = eps;
        }
        if dist.value < threshold {
            below += 1;
        }
    }
    Ok(LocalOptimalityReport {
        samples: config.samples,
        reference_distance: reference.value,
        min_distance,
        min_weight,
        below_threshold: below,
        pass: below == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;

    #[test]
    fn cloner_is_cptp_and_symmetric() {
        let e = phase_covariant_cloner();
        assert!(e.is_cp(DEFAULT_TOL) && e.is_tp(DEFAULT_TOL));
        for k in 0..12 {
            let psi = crate::choi::EquatorialState::pure_ket(0.5 * k as f64);
            let rho = gates::projector(&psi);
            let m1 = e.marginal(&rho, 1).unwrap();
            let m2 = e.marginal(&rho, 2).unwrap();
            assert!(m1.max_abs_diff(&m2) < 1e-14);
        }
    }

    #[test]
    fn cloner_lies_in_the_family() {
        let p = symmetry::extract_params(&phase_covariant_cloner(), 1e-14).unwrap();
        let want = symmetry::FamilyParams::real(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0);
        assert!(p.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn canonical_pipeline_matches_closed_form() {
        let c = canonical_broadcaster().unwrap();
        assert!(c.is_tp(1e-12) && c.is_hp(1e-12) && !c.is_cp(1e-10));
        let t = clifford_twirl(&c);
        assert!(t.matrix().max_abs_diff(c.matrix()) < 1e-13);
    }

    #[test]
    fn universal_cloner_is_covariant_cptp() {
        let u = universal_cloner().unwrap();
        assert!(u.is_cp(1e-10) && u.is_tp(1e-10));
        assert!(clifford_twirl(&u).matrix().max_abs_diff(u.matrix()) < 1e-12);
    }

    #[test]
    fn chart_gives_unit_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let v = sphere_chart(&x, 4);
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn maximally_entangled_input_reproduces_choi() {
        let c = optimal_virtual_broadcaster();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let omega = vec![r(h), ZERO, ZERO, r(h)];
        let out = extended_output(&c, &omega);
        assert!(out.max_abs_diff(&c.matrix().scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn distance_to_self_is_zero() {
        let c = phase_covariant_cloner();
        let cfg = DiamondConfig {
            starts: 2,
            ..Default::default()
        };
        let d = diamond_distance(&c, &c, &cfg).unwrap();
        assert!(d.value.abs() < 1e-12 && d.upper_cert.abs() < 1e-12 && d.certified);
    }

    #[test]
    fn distance_between_unitaries() {
        // ‖id − Z‖◇ = 2 (orthogonal outputs on |+⟩ with entanglement not needed)
        let id = ChoiOperator::identity_channel();
        let z = ChoiOperator::unitary_channel(&gates::pauli_z()).unwrap();
        let cfg = DiamondConfig {
            starts: 8,
            ..Default::default()
        };
        let d = diamond_distance(&id, &z, &cfg).unwrap();
        assert!((d.search_value - 2.0).abs() < 1e-6, "{d:?}");
        assert!(d.lower_cert <= d.search_value + 1e-9 && d.search_value <= d.upper_cert + 1e-9);
    }

    #[test]
    fn random_cptp_is_cptp() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let e = random_cptp(vec![2, 2], &mut rng);
            assert!(e.is_cp(1e-10) && e.is_tp(1e-10));
        }
    }

    #[test]
    fn moving_towards_negative_part_increases_distance() {
        let target = optimal_virtual_broadcaster();
        let split = cost::pos_neg_split(&target, 1e-10).unwrap();
        let cloner = phase_covariant_cloner();
        let mixed = cloner.combine(0.9, split.e_minus.as_ref().unwrap(), 0.1).unwrap();
        let cfg = DiamondConfig {
            starts: 4,
            ..Default::default()
        };
        let d = diamond_distance(&target, &mixed, &cfg).unwrap();
        assert!(d.value > 2.0 / 3.0 + 1e-3, "{d:?}");
    }
}
