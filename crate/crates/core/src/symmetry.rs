//! Group averages on 1→2 qubit Choi operators and the symmetric family they
//! project onto.
//!
//! A symmetry `U` of the map acts on its Choi operator by conjugation with
//! `U ⊗ U ⊗ U*` (two outputs, one input). Three projections are provided:
//!
//! * phase: diagonal unitaries `U_φ = diag(1, e^{iφ})`,
//! * flip: `σx` on every factor,
//! * swap: exchange of the two outputs (`S ⊗ 𝟙`, no action on the input).
//!
//! # Finite phase average
//!
//! `U_φ ⊗ U_φ ⊗ U_φ*` multiplies `|jkl⟩` by `e^{inφ}` with `n = j + k − l ∈
//! {−1, 0, 1, 2}`. A matrix element `|jkl⟩⟨j'k'l'|` therefore picks up
//! `e^{i(n − n')φ}` with `|n − n'| ≤ 3`. Averaging over the four angles
//! `φ ∈ {0, π/2, π, 3π/2}` sums `i^{m}` over a full period for every nonzero
//! `m = n − n'` in `−3..=3`, which vanishes, and leaves `m = 0` untouched. The
//! four-point average is thus exactly the continuous U(1) average.
//!
//! # The family
//!
//! Under all three symmetries the eight-dimensional space splits into one-
//! dimensional irreducible pieces, spanned by the unnormalized vectors
//!
//! | block | vectors                              | phase | swap |
//! |-------|--------------------------------------|-------|------|
//! | H1    | `|000⟩`, `|011⟩ + |101⟩`             | 0     | +1   |
//! | H2    | `|111⟩`, `|100⟩ + |010⟩`             | 1     | +1   |
//! | H3    | `|011⟩ − |101⟩`                      | 0     | −1   |
//! | H4    | `|100⟩ − |010⟩`                      | 1     | −1   |
//! | H5    | `|001⟩`                              | −1    | +1   |
//! | H6    | `|110⟩`                              | 2     | +1   |
//!
//! and the flip exchanges H1↔H2, H3↔H4, H5↔H6. An invariant operator is a
//! 2×2 block on H1 (copied to H2) plus scalars on H3 (=H4) and H5 (=H6): six
//! complex numbers `c1..c6`. In the unnormalized vectors above,
//!
//! ```text
//! C = c1 (|000⟩⟨000| + |111⟩⟨111|) + c2 (|000⟩⟨w1| + |111⟩⟨w2|)
//!   + c3 (|w1⟩⟨000| + |w2⟩⟨111|)   + c4 (|w1⟩⟨w1| + |w2⟩⟨w2|)
//!   + c5 (|a1⟩⟨a1| + |a2⟩⟨a2|)     + c6 (|001⟩⟨001| + |110⟩⟨110|)
//! ```
//!
//! with `w1 = |011⟩ + |101⟩`, `w2 = |100⟩ + |010⟩`, `a1 = |011⟩ − |101⟩`,
//! `a2 = |100⟩ − |010⟩`. In particular the diagonal entries on `|011⟩`,
//! `|101⟩`, `|010⟩`, `|100⟩` are all `c4 + c5`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choi::ChoiOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, gates, kron, ComplexMatrix, ONE, ZERO};

/// Number of equally spaced angles in the exact phase average.
pub const PHASE_POINTS: usize = 4;

fn require_broadcast_shape(c: &ChoiOperator) {
    assert!(
        c.dim_in() == 2 && c.dims_out() == [2, 2],
        "twirls act on 1→2 qubit Choi operators, got dim_in={} dims_out={:?}",
        c.dim_in(),
        c.dims_out()
    );
}

/// `U ⊗ … ⊗ U ⊗ U*` with one `U` per output factor.
pub fn covariance_action(u: &ComplexMatrix, outputs: usize) -> ComplexMatrix {
    let mut w = ComplexMatrix::identity(1);
    for _ in 0..outputs {
        w = kron(&w, u);
    }
    kron(&w, &u.conj())
}

fn average_conjugations(c: &ChoiOperator, actions: &[ComplexMatrix]) -> ChoiOperator {
    let mut acc = ComplexMatrix::zeros(c.matrix().rows(), c.matrix().cols());
    for w in actions {
        acc = &acc + &c.matrix().conjugate_by(w);
    }
    c.with_matrix(acc.scale_real(1.0 / actions.len() as f64))
        .expect("shape preserved")
}

/// Average over `points` equally spaced phase rotations.
pub fn phase_twirl_with(c: &ChoiOperator, points: usize) -> ChoiOperator {
    require_broadcast_shape(c);
    let step = std::f64::consts::TAU / points as f64;
    let actions: Vec<ComplexMatrix> = (0..points)
        .map(|k| covariance_action(&gates::phase_rotation(step * k as f64), 2))
        .collect();
    average_conjugations(c, &actions)
}

/// Exact U(1) phase average (four points, see module docs).
pub fn phase_twirl(c: &ChoiOperator) -> ChoiOperator {
    debug_assert_eq!(PHASE_POINTS as f64 * FRAC_PI_2, std::f64::consts::TAU);
    phase_twirl_with(c, PHASE_POINTS)
}

/// Average of `c` and `(S ⊗ 𝟙) c (S ⊗ 𝟙)`.
pub fn swap_twirl(c: &ChoiOperator) -> ChoiOperator {
    require_broadcast_shape(c);
    let s = kron(&gates::swap(), &ComplexMatrix::identity(2));
    average_conjugations(c, &[ComplexMatrix::identity(8), s])
}

/// Average of `c` and its conjugation by `σx ⊗ σx ⊗ σx*`.
pub fn flip_twirl(c: &ChoiOperator) -> ChoiOperator {
    require_broadcast_shape(c);
    let x = covariance_action(&gates::pauli_x(), 2);
    average_conjugations(c, &[ComplexMatrix::identity(8), x])
}

/// Projection onto the phase-, flip- and swap-invariant operators.
pub fn symmetric_twirl(c: &ChoiOperator) -> ChoiOperator {
    phase_twirl(&flip_twirl(&swap_twirl(c)))
}

/// The 24 single-qubit Cliffords modulo global phase, in a fixed
/// breadth-first order from the identity using generators `H` and `S`.
pub fn clifford_group() -> Vec<ComplexMatrix> {
    let generators = [gates::hadamard(), gates::phase_s()];
    let mut group = vec![ComplexMatrix::identity(2)];
    let mut frontier = 0;
    while frontier < group.len() {
        let g = group[frontier].clone();
        for h in &generators {
            let candidate = canonical_phase(&h.matmul(&g));
            if !group.iter().any(|k| k.max_abs_diff(&candidate) < 1e-12) {
                group.push(candidate);
            }
        }
        frontier += 1;
    }
    group
}

/// Fixes the global phase so the first entry of largest modulus is real positive.
fn canonical_phase(u: &ComplexMatrix) -> ComplexMatrix {
    let mut pivot = ZERO;
    let mut best = 0.0;
    for z in u.data() {
        if z.norm() > best + 1e-9 {
            best = z.norm();
            pivot = *z;
        }
    }
    u.scale(pivot.conj() / pivot.norm())
}

/// Exact unitary twirl: average of `U ⊗ U ⊗ U*` conjugations over the
/// Clifford group, which is a unitary 3-design.
///
/// Terms are computed in parallel and summed sequentially in group order, so
/// the result does not depend on the thread count.
pub fn clifford_twirl(c: &ChoiOperator) -> ChoiOperator {
    require_broadcast_shape(c);
    let group = clifford_group();
    let terms: Vec<ComplexMatrix> = group
        .par_iter()
        .map(|u| c.matrix().conjugate_by(&covariance_action(u, 2)))
        .collect();
    let mut acc = ComplexMatrix::zeros(8, 8);
    for t in &terms {
        acc = &acc + t;
    }
    c.with_matrix(acc.scale_real(1.0 / group.len() as f64))
        .expect("shape preserved")
}

/// Orthonormal (Hilbert-Schmidt) basis for the range of a linear projection
/// on 1→2 qubit Choi operators, found by projecting all matrix units.
pub fn invariant_basis(projection: impl Fn(&ChoiOperator) -> ChoiOperator) -> Vec<ComplexMatrix> {
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for a in 0..8 {
        for b in 0..8 {
            let mut unit = ComplexMatrix::zeros(8, 8);
            unit[(a, b)] = ONE;
            let c = ChoiOperator::new(unit, 2, vec![2, 2]).expect("8x8");
            let mut v = projection(&c).into_matrix();
            for _ in 0..2 {
                for e in &basis {
                    let coef = e.hs_inner(&v);
                    v = &v - &e.scale(coef);
                }
            }
            let norm = v.frobenius();
            if norm > 1e-9 {
                basis.push(v.scale_real(1.0 / norm));
            }
        }
    }
    basis
}

/// The six complex numbers describing a phase-, flip- and swap-invariant
/// 1→2 Choi operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
    pub c4: Complex64,
    pub c5: Complex64,
    pub c6: Complex64,
}

impl FamilyParams {
    pub fn real(c1: f64, c2: f64, c3: f64, c4: f64, c5: f64, c6: f64) -> Self {
        let r = linalg::r;
        Self {
            c1: r(c1),
            c2: r(c2),
            c3: r(c3),
            c4: r(c4),
            c5: r(c5),
            c6: r(c6),
        }
    }

    pub fn as_array(&self) -> [Complex64; 6] {
        [self.c1, self.c2, self.c3, self.c4, self.c5, self.c6]
    }

    pub fn from_array(a: [Complex64; 6]) -> Self {
        Self {
            c1: a[0],
            c2: a[1],
            c3: a[2],
            c4: a[3],
            c5: a[4],
            c6: a[5],
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Hermiticity of the induced Choi matrix: c1, c4, c5, c6 real and c3 = c2*.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        [self.c1, self.c4, self.c5, self.c6]
            .iter()
            .all(|z| z.im.abs() <= tol)
            && (self.c3 - self.c2.conj()).norm() <= tol
    }
}

const K000: usize = 0;
const K001: usize = 1;
const K010: usize = 2;
const K011: usize = 3;
const K100: usize = 4;
const K101: usize = 5;
const K110: usize = 6;
const K111: usize = 7;

fn unit_vec(entries: &[(usize, f64)]) -> Vec<Complex64> {
    let mut v = vec![ZERO; 8];
    for &(k, x) in entries {
        v[k] = linalg::r(x);
    }
    v
}

/// Assembles the invariant Choi operator from its block parameters.
pub fn family_to_choi(p: &FamilyParams) -> ChoiOperator {
    let e000 = unit_vec(&[(K000, 1.0)]);
    let e111 = unit_vec(&[(K111, 1.0)]);
    let e001 = unit_vec(&[(K001, 1.0)]);
    let e110 = unit_vec(&[(K110, 1.0)]);
    let w1 = unit_vec(&[(K011, 1.0), (K101, 1.0)]);
    let w2 = unit_vec(&[(K100, 1.0), (K010, 1.0)]);
    let a1 = unit_vec(&[(K011, 1.0), (K101, -1.0)]);
    let a2 = unit_vec(&[(K100, 1.0), (K010, -1.0)]);
    let o = ComplexMatrix::outer;

    let terms = [
        (p.c1, &o(&e000, &e000) + &o(&e111, &e111)),
        (p.c2, &o(&e000, &w1) + &o(&e111, &w2)),
        (p.c3, &o(&w1, &e000) + &o(&w2, &e111)),
        (p.c4, &o(&w1, &w1) + &o(&w2, &w2)),
        (p.c5, &o(&a1, &a1) + &o(&a2, &a2)),
        (p.c6, &o(&e001, &e001) + &o(&e110, &e110)),
    ];
    let mut m = ComplexMatrix::zeros(8, 8);
    for (coef, op) in &terms {
        m = &m + &op.scale(*coef);
    }
    ChoiOperator::new(m, 2, vec![2, 2]).expect("8x8")
}

/// Reads `c1..c6` from designated entries and checks every other entry
/// against the reconstruction.
///
/// `c1 = C[000,000]`, `c2 = C[000,011]`, `c3 = C[011,000]`,
/// `c4 ± c5 = C[011,011]`, `C[011,101]`, `c6 = C[001,001]`.
pub fn extract_params(c: &ChoiOperator, tol: f64) -> Result<FamilyParams> {
    if c.dim_in() != 2 || c.dims_out() != [2, 2] {
        return Err(Error::Dimension(format!(
            "expected a 1→2 qubit Choi operator, got dim_in={} dims_out={:?}",
            c.dim_in(),
            c.dims_out()
        )));
    }
    let m = c.matrix();
    let diag = m[(K011, K011)];
    let cross = m[(K011, K101)];
    let p = FamilyParams {
        c1: m[(K000, K000)],
        c2: m[(K000, K011)],
        c3: m[(K011, K000)],
        c4: (diag + cross) * 0.5,
        c5: (diag - cross) * 0.5,
        c6: m[(K001, K001)],
    };
    let rebuilt = family_to_choi(&p);
    let (residual, (row, col)) = rebuilt.matrix().max_abs_diff_at(m);
    if residual > tol {
        return Err(Error::OutsideFamily { residual, row, col });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_TOL;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_choi(rng: &mut impl Rng) -> ChoiOperator {
        let g = ComplexMatrix::from_fn(8, 8, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        ChoiOperator::new(g.hermitian_part(), 2, vec![2, 2]).unwrap()
    }

    fn random_params(rng: &mut impl Rng) -> FamilyParams {
        let mut z = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        FamilyParams::from_array([z(), z(), z(), z(), z(), z()])
    }

    #[test]
    fn clifford_group_has_24_distinct_unitaries() {
        let g = clifford_group();
        assert_eq!(g.len(), 24);
        for u in &g {
            let uu = u.matmul(&u.adjoint());
            assert!(uu.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
        }
    }

    #[test]
    fn twirls_are_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = random_choi(&mut rng);
        for twirl in [phase_twirl, swap_twirl, flip_twirl, clifford_twirl] {
            let once = twirl(&c);
            let twice = twirl(&once);
            assert!(twice.matrix().max_abs_diff(once.matrix()) < 1e-14);
        }
    }

    #[test]
    fn four_point_phase_average_matches_360_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..3 {
            let c = random_choi(&mut rng);
            let exact = phase_twirl(&c);
            let fine = phase_twirl_with(&c, 360);
            assert!(exact.matrix().max_abs_diff(fine.matrix()) < 1e-12);
            for n in [5, 7, 12] {
                let other = phase_twirl_with(&c, n);
                assert!(exact.matrix().max_abs_diff(other.matrix()) < 1e-12, "N = {n}");
            }
        }
    }

    #[test]
    fn swap_twirl_symmetrizes_product_maps() {
        // ρ ↦ ρ ⊗ σ for a fixed state σ
        let sigma = ComplexMatrix::from_real_rows(&[&[0.8, 0.1], &[0.1, 0.2]]);
        let unit = |i: usize, j: usize| {
            let mut u = ComplexMatrix::zeros(2, 2);
            u[(i, j)] = ONE;
            u
        };
        let product = ChoiOperator::from_map(2, vec![2, 2], |i, j| kron(&unit(i, j), &sigma)).unwrap();
        let symmetrized = ChoiOperator::from_map(2, vec![2, 2], |i, j| {
            (&kron(&unit(i, j), &sigma) + &kron(&sigma, &unit(i, j))).scale_real(0.5)
        })
        .unwrap();
        assert!(swap_twirl(&product).matrix().max_abs_diff(symmetrized.matrix()) < 1e-15);
    }

    #[test]
    fn flip_twirl_equalizes_h1_and_h2_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = phase_twirl(&swap_twirl(&random_choi(&mut rng)));
        let block = |m: &ComplexMatrix, top: usize, w: [usize; 2]| {
            // (top, w) block in the unnormalized basis {|top⟩, |w0⟩ + |w1⟩}
            let s = m[(w[0], w[0])] + m[(w[0], w[1])] + m[(w[1], w[0])] + m[(w[1], w[1])];
            [m[(top, top)], m[(top, w[0])] + m[(top, w[1])], m[(w[0], top)] + m[(w[1], top)], s]
        };
        let before_h1 = block(c.matrix(), K000, [K011, K101]);
        let before_h2 = block(c.matrix(), K111, [K100, K010]);
        assert!(before_h1.iter().zip(&before_h2).any(|(a, b)| (a - b).norm() > 1e-3));
        let f = flip_twirl(&c);
        let h1 = block(f.matrix(), K000, [K011, K101]);
        let h2 = block(f.matrix(), K111, [K100, K010]);
        for (a, b) in h1.iter().zip(&h2) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn twirls_commute_and_preserve_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let c = random_choi(&mut rng);
        let twirls: [fn(&ChoiOperator) -> ChoiOperator; 4] =
            [phase_twirl, swap_twirl, flip_twirl, clifford_twirl];
        for f in twirls {
            let t = f(&c);
            assert!((t.matrix().trace() - c.matrix().trace()).norm() < 1e-13);
            assert!(t.is_hp(1e-13));
            for g in twirls {
                let fg = f(&g(&c));
                let gf = g(&f(&c));
                assert!(fg.matrix().max_abs_diff(gf.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn invariant_span_has_six_dimensions() {
        let basis = invariant_basis(symmetric_twirl);
        assert_eq!(basis.len(), 6);
    }

    #[test]
    fn family_is_fixed_by_all_twirls() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let c = family_to_choi(&random_params(&mut rng));
        for twirl in [phase_twirl, swap_twirl, flip_twirl] {
            assert!(twirl(&c).matrix().max_abs_diff(c.matrix()) < 1e-14);
        }
    }

    #[test]
    fn diagonal_entries_of_middle_block_are_c4_plus_c5() {
        let p = FamilyParams::real(0.1, 0.2, 0.3, 0.4, 0.05, 0.6);
        let m = family_to_choi(&p).into_matrix();
        for k in [K010, K011, K100, K101] {
            assert!((m[(k, k)].re - 0.45).abs() < 1e-15, "entry {k}");
        }
        assert!((m[(K011, K101)].re - 0.35).abs() < 1e-15);
        assert!((m[(K010, K111)].re - 0.3).abs() < 1e-15);
        assert!((m[(K111, K010)].re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn real_symmetric_params_give_symmetric_operator() {
        let p = FamilyParams::real(0.3, 0.2, 0.2, 0.7, 0.0, 0.3);
        let c = family_to_choi(&p);
        assert!(c.is_hp(DEFAULT_TOL));
        assert!(swap_twirl(&c).matrix().max_abs_diff(c.matrix()) < 1e-15);
        assert!(flip_twirl(&c).matrix().max_abs_diff(c.matrix()) < 1e-15);
    }

    #[test]
    fn trace_of_family_member() {
        // diagonal: c1 twice, c6 twice, c4 + c5 four times
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let p = random_params(&mut rng);
        let want = (p.c1 + p.c6) * 2.0 + (p.c4 + p.c5) * 4.0;
        assert!((family_to_choi(&p).matrix().trace() - want).norm() < 1e-14);
    }

    #[test]
    fn extract_round_trip_and_triple_twirl() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let p = random_params(&mut rng);
            let back = extract_params(&family_to_choi(&p), 1e-12).unwrap();
            assert!(back.max_abs_diff(&p) < 1e-15);
            let t = symmetric_twirl(&random_choi(&mut rng));
            let q = extract_params(&t, 1e-12).unwrap();
            assert!(family_to_choi(&q).matrix().max_abs_diff(t.matrix()) < 1e-12);
        }
    }

    #[test]
    fn extract_names_offending_entry() {
        let p = FamilyParams::real(1.0, 0.5, 0.5, 0.4, 0.1, 0.0);
        let mut m = family_to_choi(&p).into_matrix();
        m[(K001, K110)] = linalg::r(0.25);
        let c = ChoiOperator::new(m, 2, vec![2, 2]).unwrap();
        match extract_params(&c, 1e-12) {
            Err(Error::OutsideFamily { row, col, residual }) => {
                assert_eq!((row, col), (K001, K110));
                assert!((residual - 0.25).abs() < 1e-15);
            }
            other => panic!("expected OutsideFamily, got {other:?}"),
        }
    }
}
