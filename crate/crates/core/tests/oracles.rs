use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vbroadcast::channels;
use vbroadcast::choi::{ChoiOperator, EquatorialState};
use vbroadcast::cost;
use vbroadcast::linalg::{kron_all, random_hermitian, trace_norm, ComplexMatrix};
use vbroadcast::sampler::{self, Observable};
use vbroadcast::symmetry;

/// Standard normal by Box–Muller.
fn gaussian(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Haar-random SU(2) from a uniformly random unit quaternion.
fn haar_su2(rng: &mut impl Rng) -> ComplexMatrix {
    let q: Vec<f64> = (0..4).map(|_| gaussian(rng)).collect();
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (a, b, c, d) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => Complex64::new(a, b),
        (0, 1) => Complex64::new(c, d),
        (1, 0) => Complex64::new(-c, d),
        _ => Complex64::new(a, -b),
    })
}

/// `(U ⊗ U ⊗ Ū) C (U ⊗ U ⊗ Ū)†`
fn conjugate_choi(c: &ComplexMatrix, u: &ComplexMatrix) -> ComplexMatrix {
    let ub = u.conj();
    let w = kron_all([u, u, &ub]);
    w.matmul(c).matmul(&w.adjoint())
}

#[test]
fn clifford_twirl_matches_haar_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let m = random_hermitian(8, &mut rng);
    let m = m.scale_real(1.0 / m.frobenius());
    let c = ChoiOperator::new(m.clone(), 2, vec![2, 2]).unwrap();
    let exact = symmetry::clifford_twirl(&c);

    // Monte-Carlo error at N samples; it must keep shrinking like 1/√N, so an
    // inexact twirl would show up as a plateau.
    let mut acc = ComplexMatrix::zeros(8, 8);
    let mut errors = Vec::new();
    for k in 1..=1_000_000u64 {
        acc = &acc + &conjugate_choi(&m, &haar_su2(&mut rng));
        if [2_000, 10_000, 100_000, 1_000_000].contains(&k) {
            errors.push(acc.scale_real(1.0 / k as f64).max_abs_diff(exact.matrix()));
        }
    }
    println!("Haar Monte-Carlo errors at 2e3, 1e4, 1e5, 1e6 samples: {errors:?}");
    assert!(errors[0] < 1e-2, "{errors:?}");
    assert!(errors[3] < 1e-3, "{errors:?}");
    assert!(errors[3] < errors[1] / 3.0, "{errors:?}");
}

#[test]
fn universal_cloner_fidelity_is_constant() {
    let u = channels::universal_cloner().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fids: Vec<f64> = (0..100)
        .map(|_| {
            let v = haar_su2(&mut rng);
            let psi = [v[(0, 0)], v[(1, 0)]];
            let f = channels::clone_fidelities(&u, &psi).unwrap();
            assert!((f[0] - f[1]).abs() < 1e-12);
            f[0]
        })
        .collect();
    let lo = fids.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = fids.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo < 1e-10, "spread {}", hi - lo);
    // recorded value; the cloning literature quotes 5/6 for qubits
    assert!((lo - 5.0 / 6.0).abs() < 1e-10, "{lo}");
}

#[test]
fn canonical_broadcaster_is_unitarily_covariant() {
    let c = channels::canonical_broadcaster().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let u = haar_su2(&mut rng);
        assert!(conjugate_choi(c.matrix(), &u).max_abs_diff(c.matrix()) < 1e-12);
    }
}

#[test]
fn optimal_broadcaster_is_only_phase_covariant() {
    let c = channels::optimal_virtual_broadcaster();
    for k in 0..12 {
        let phi = 0.37 * k as f64;
        let u = ComplexMatrix::diag(&[Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, phi)]);
        assert!(conjugate_choi(c.matrix(), &u).max_abs_diff(c.matrix()) < 1e-13);
    }
    let h = vbroadcast::linalg::gates::hadamard();
    assert!(conjugate_choi(c.matrix(), &h).max_abs_diff(c.matrix()) > 0.1);
}

#[test]
fn maximally_entangled_input_attains_the_cloner_distance() {
    let b = channels::optimal_virtual_broadcaster();
    let delta = b.combine(1.0, &channels::phase_covariant_cloner(), -1.0).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let omega = [Complex64::new(h, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(h, 0.0)];
    let v = trace_norm(&channels::extended_output(&delta, &omega));
    assert!((v - 2.0 / 3.0).abs() < 1e-12, "{v}");
}

#[test]
fn cloner_difference_is_a_third_of_the_part_difference() {
    let b = channels::optimal_virtual_broadcaster();
    let split = cost::pos_neg_split(&b, 1e-10).unwrap();
    let diff = b.combine(1.0, &channels::phase_covariant_cloner(), -1.0).unwrap();
    let want = split
        .e_plus
        .unwrap()
        .combine(1.0 / 3.0, split.e_minus.as_ref().unwrap(), -1.0 / 3.0)
        .unwrap();
    assert!(diff.matrix().max_abs_diff(want.matrix()) < 1e-14);
}

#[test]
fn virtual_estimator_is_unbiased() {
    let b = channels::optimal_virtual_broadcaster();
    let d = cost::pos_neg_split(&b, 1e-10).unwrap();
    let rho = EquatorialState::new(0.6, 0.4).unwrap();
    let (x, y) = (Observable::pauli_x(), Observable::pauli_y());
    let exact1 = x.expectation(&b.marginal(&rho.density(), 1).unwrap());
    let exact2 = y.expectation(&b.marginal(&rho.density(), 2).unwrap());
    let shots = 100_000u64;
    let seeds = 20;
    let (mut m1, mut m2) = (0.0, 0.0);
    for seed in 0..seeds {
        let e = sampler::simulate_virtual(&d, &rho, &x, &y, shots, seed).unwrap();
        m1 += e.est1 / seeds as f64;
        m2 += e.est2 / seeds as f64;
    }
    let bound = 4.0 * d.cost() * 2.0 / ((shots * seeds) as f64).sqrt();
    assert!((m1 - exact1).abs() < bound, "{m1} vs {exact1}");
    assert!((m2 - exact2).abs() < bound, "{m2} vs {exact2}");
}

#[test]
fn direct_estimator_is_unbiased() {
    let rho = EquatorialState::new(0.5, 0.0).unwrap();
    let x = Observable::pauli_x();
    let shots = 100_000u64;
    let mean: f64 = (0..10).map(|s| sampler::simulate_direct(&rho, &x, shots, s).unwrap()).sum::<f64>() / 10.0;
    assert!((mean - 0.5).abs() < 4.0 * 2.0 / (1e6f64).sqrt());
}

#[test]
fn simulation_is_reproducible() {
    let d = cost::pos_neg_split(&channels::optimal_virtual_broadcaster(), 1e-10).unwrap();
    let x = Observable::pauli_x();
    let run = |seed| sampler::simulate_virtual(&d, &EquatorialState::plus(), &x, &x, 10_000, seed).unwrap();
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}
