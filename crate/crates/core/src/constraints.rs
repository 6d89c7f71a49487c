//! Classical consistency, Hermiticity, and the broadcasting check.
//!
//! Classical consistency in the `{|+⟩, |−⟩}` basis asks that decohering the
//! input and both outputs turns the map into the classical copier. For the
//! symmetric family this is equivalent to three linear identities
//!
//! ```text
//! c3 = 1 − c2,   c5 = c4 − ½,   c6 = 2 − c1 − 4 c4,
//! ```
//!
//! and Hermiticity then forces `c2 = ½ + i t` with real `t`. What remains is
//! the real triple `(c1, c4, t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::choi::{self, BlochVector, ChoiOperator, EquatorialState, QubitBasis};
use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eig, r, ComplexMatrix};
use crate::symmetry::{family_to_choi, FamilyParams};

/// Free coordinates of the classically consistent, Hermitian family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedParams {
    pub c1: f64,
    pub c4: f64,
    /// Imaginary part of `c2`.
    pub t: f64,
}

impl ConstrainedParams {
    pub fn new(c1: f64, c4: f64, t: f64) -> Self {
        Self { c1, c4, t }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c4, self.t]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2])
    }

    pub fn choi(&self) -> ChoiOperator {
        family_to_choi(&free_to_full(self))
    }
}

/// Overwrites `c3`, `c5`, `c6` with the values classical consistency dictates.
pub fn apply_classic(p: &FamilyParams) -> FamilyParams {
    FamilyParams {
        c3: r(1.0) - p.c2,
        c5: p.c4 - 0.5,
        c6: r(2.0) - p.c1 - p.c4 * 4.0,
        ..*p
    }
}

pub fn free_to_full(q: &ConstrainedParams) -> FamilyParams {
    let p = FamilyParams {
        c1: r(q.c1),
        c2: Complex64::new(0.5, q.t),
        c3: Complex64::new(0.0, 0.0),
        c4: r(q.c4),
        c5: Complex64::new(0.0, 0.0),
        c6: Complex64::new(0.0, 0.0),
    };
    apply_classic(&p)
}

pub fn full_to_free(p: &FamilyParams, tol: f64) -> Result<ConstrainedParams> {
    if !p.is_hermitian(tol) {
        return Err(Error::Constraint(format!(
            "parameters are not Hermitian: c3 − c2* = {:.3e}, imaginary parts of c1, c4, c5, c6 = {:?}",
            (p.c3 - p.c2.conj()).norm(),
            [p.c1.im, p.c4.im, p.c5.im, p.c6.im]
        )));
    }
    let residual = apply_classic(p).max_abs_diff(p);
    if residual > tol {
        return Err(Error::Constraint(format!(
            "parameters violate classical consistency by {residual:.3e}"
        )));
    }
    Ok(ConstrainedParams::new(p.c1.re, p.c4.re, p.c2.im))
}

/// `(D⊗D)∘B∘D` for decoherence `D` in `basis`.
pub fn decohered_map(c: &ChoiOperator, basis: &QubitBasis) -> Result<ChoiOperator> {
    let d = choi::decohere(basis);
    c.after(&d)?.then_local(&[&d, &d])
}

/// Largest entrywise deviation of `(D⊗D)∘B∘D` from the classical copier,
/// over the four matrix units of `basis`.
pub fn classic_residual(c: &ChoiOperator, basis: &QubitBasis) -> Result<f64> {
    let dec = decohered_map(c, basis)?;
    let cl = choi::classical_broadcaster(basis);
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let unit = basis.unit(i, j);
            let got = dec.apply(&unit)?;
            let want = cl.apply(&unit)?;
            worst = worst.max(got.max_abs_diff(&want));
        }
    }
    Ok(worst)
}

/// Classical consistency in the `{|+⟩, |−⟩}` basis.
pub fn verify_classic(c: &ChoiOperator, tol: f64) -> bool {
    classic_residual(c, &QubitBasis::plus_minus()).is_ok_and(|res| res <= tol)
}

/// Coefficients of `|++⟩⟨++|`, `|+−⟩⟨+−|`, `|−+⟩⟨−+|`, `|−−⟩⟨−−|` in
/// `(D⊗D)∘B(|+⟩⟨+|)`.
pub fn decohered_plus_weights(c: &ChoiOperator) -> Result<[Complex64; 4]> {
    let basis = QubitBasis::plus_minus();
    let d = choi::decohere(&basis);
    let out = c.then_local(&[&d, &d])?.apply(&basis.unit(0, 0))?;
    let mut w = [Complex64::new(0.0, 0.0); 4];
    for (k, (a, b)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
        let v = linalg::kron(
            &ComplexMatrix::column(basis.vector(a)),
            &ComplexMatrix::column(basis.vector(b)),
        )
        .col(0);
        let mv = out.apply(&v);
        w[k] = v.iter().zip(mv).map(|(x, y)| x.conj() * y).sum();
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadcastReport {
    /// max over states and both outputs of ‖Tr_other B(ρ) − ρ‖₁
    pub max_deviation: f64,
    pub argmax_state: BlochVector,
    pub pass: bool,
    /// Number of tested states off the equator, where broadcasting is not
    /// guaranteed for phase-covariant maps.
    pub off_equator_inputs: usize,
}

/// Checks `Tr₁B(ρ) = Tr₂B(ρ) = ρ` on each state.
pub fn verify_broadcast(c: &ChoiOperator, states: &[BlochVector], tol: f64) -> Result<BroadcastReport> {
    let mut worst = 0.0;
    let mut arg = states
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidInput("empty state list".into()))?;
    let mut off = 0;
    for s in states {
        if !s.is_equatorial(tol) {
            off += 1;
        }
        let rho = s.density();
        for keep in [1, 2] {
            let dev = linalg::trace_norm(&(&c.marginal(&rho, keep)? - &rho));
            if dev > worst {
                worst = dev;
                arg = *s;
            }
        }
    }
    Ok(BroadcastReport {
        max_deviation: worst,
        argmax_state: arg,
        pass: worst <= tol,
        off_equator_inputs: off,
    })
}

pub fn equatorial_grid(radii: usize, angles: usize) -> Vec<BlochVector> {
    EquatorialState::grid(radii, angles)
        .iter()
        .map(EquatorialState::bloch)
        .collect()
}

/// Solution set `{particular + Σ x_k null_k}` of a linear constraint on a
/// subspace of Choi operators.
#[derive(Debug, Clone)]
pub struct AffineSolution {
    pub particular: ChoiOperator,
    pub null_space: Vec<ComplexMatrix>,
    pub residual: f64,
}

impl AffineSolution {
    pub fn is_unique(&self) -> bool {
        self.null_space.is_empty()
    }
}

/// Solves classical consistency in `basis` over `span{subspace}` by least
/// squares, returning the minimum-norm solution and the null directions.
pub fn solve_classic(subspace: &[ComplexMatrix], basis: &QubitBasis, tol: f64) -> Result<AffineSolution> {
    if subspace.is_empty() {
        return Err(Error::InvalidInput("empty subspace".into()));
    }
    let d = choi::decohere(basis);
    let as_choi = |m: &ComplexMatrix| ChoiOperator::new(m.clone(), 2, vec![2, 2]);
    let constraint = |c: &ChoiOperator| -> Result<ComplexMatrix> {
        Ok(c.after(&d)?.then_local(&[&d, &d])?.into_matrix())
    };
    let columns: Vec<ComplexMatrix> = subspace
        .iter()
        .map(|m| constraint(&as_choi(m)?))
        .collect::<Result<_>>()?;
    let target = choi::classical_broadcaster(basis).into_matrix();

    let k = columns.len();
    let gram = ComplexMatrix::from_fn(k, k, |i, j| columns[i].hs_inner(&columns[j]));
    let rhs: Vec<Complex64> = columns.iter().map(|a| a.hs_inner(&target)).collect();
    let eig = hermitian_eig(&gram, 1e-9)?;
    let scale = eig.values.first().copied().unwrap_or(0.0).max(1.0);

    let mut x = vec![Complex64::new(0.0, 0.0); k];
    let mut null_space = Vec::new();
    for (idx, &lambda) in eig.values.iter().enumerate() {
        let v = eig.vector(idx);
        if lambda > 1e-10 * scale {
            let proj: Complex64 = v.iter().zip(&rhs).map(|(a, b)| a.conj() * b).sum();
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi += vi * proj / lambda;
            }
        } else {
            let mut dir = ComplexMatrix::zeros(8, 8);
            for (vi, m) in v.iter().zip(subspace) {
                dir = &dir + &m.scale(*vi);
            }
            null_space.push(dir);
        }
    }

    let mut sol = ComplexMatrix::zeros(8, 8);
    let mut image = ComplexMatrix::zeros(8, 8);
    for ((xi, m), a) in x.iter().zip(subspace).zip(&columns) {
        sol = &sol + &m.scale(*xi);
        image = &image + &a.scale(*xi);
    }
    let residual = image.max_abs_diff(&target);
    if residual > tol {
        return Err(Error::Constraint(format!(
            "classical consistency has no solution in this subspace (residual {residual:.3e})"
        )));
    }
    Ok(AffineSolution {
        particular: as_choi(&sol)?,
        null_space,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gates::*;
    use crate::symmetry::{invariant_basis, symmetric_twirl};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-10;

    fn minimizer() -> FamilyParams {
        FamilyParams::real(1.0 / 3.0, 0.5, 0.5, 5.0 / 12.0, -1.0 / 12.0, 0.0)
    }

    #[test]
    fn apply_classic_examples() {
        let p = apply_classic(&FamilyParams::real(1.0 / 3.0, 0.5, 9.0, 5.0 / 12.0, 9.0, 9.0));
        assert!(p.max_abs_diff(&minimizer()) < 1e-15);

        let p = apply_classic(&FamilyParams::real(0.0, 1.0, 7.0, 0.5, 7.0, 7.0));
        assert!(p.max_abs_diff(&FamilyParams::real(0.0, 1.0, 0.0, 0.5, 0.0, 0.0)) < 1e-15);

        let mut p = FamilyParams::real(0.5, 0.5, 0.0, 0.3, 0.0, 0.0);
        p.c2.im = 0.2;
        let p = apply_classic(&p);
        assert!((p.c3 - Complex64::new(0.5, -0.2)).norm() < 1e-15);
        assert!((p.c5.re + 0.2).abs() < 1e-15);
        assert!((p.c6.re - 0.3).abs() < 1e-15);
    }

    #[test]
    fn free_full_round_trip() {
        let q = ConstrainedParams::new(1.0 / 3.0, 5.0 / 12.0, 0.0);
        assert!(free_to_full(&q).max_abs_diff(&minimizer()) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let q = ConstrainedParams::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-1.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let back = full_to_free(&free_to_full(&q), 1e-12).unwrap();
            assert!((back.c1 - q.c1).abs() < 1e-15);
            assert!((back.c4 - q.c4).abs() < 1e-15);
            assert!((back.t - q.t).abs() < 1e-15);
        }
    }

    #[test]
    fn full_to_free_rejects_bad_points() {
        let mut p = minimizer();
        p.c4.im = 0.1;
        assert!(matches!(full_to_free(&p, 1e-12), Err(Error::Constraint(_))));
        let mut p = minimizer();
        p.c6 = r(0.5);
        assert!(matches!(full_to_free(&p, 1e-12), Err(Error::Constraint(_))));
    }

    #[test]
    fn classic_holds_on_minimizer_and_breaks_off_family() {
        assert!(verify_classic(&family_to_choi(&minimizer()), TOL));
        let mut p = minimizer();
        p.c3 += 0.1;
        assert!(!verify_classic(&family_to_choi(&p), TOL));
    }

    #[test]
    fn decohered_weights_match_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let mut z = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let p = FamilyParams::from_array([z(), z(), z(), z(), z(), z()]);
            let w = decohered_plus_weights(&family_to_choi(&p)).unwrap();
            let base = (p.c1 + p.c6) / 4.0;
            let mid = (p.c2 + p.c3) / 2.0 + p.c4;
            assert!((w[0] - (base + mid)).norm() < 1e-14);
            assert!((w[1] - (base + p.c5)).norm() < 1e-14);
            assert!((w[2] - (base + p.c5)).norm() < 1e-14);
            // the |−−⟩ weight carries +c4, not −c4
            assert!((w[3] - (base - (p.c2 + p.c3) / 2.0 + p.c4)).norm() < 1e-14);
        }
        // constrained: the ++ weight is exactly one
        let q = ConstrainedParams::new(0.7, -0.2, 1.3);
        let w = decohered_plus_weights(&q.choi()).unwrap();
        assert!((w[0] - r(1.0)).norm() < 1e-14);
    }

    #[test]
    fn minimizer_broadcasts_on_equator() {
        let c = family_to_choi(&minimizer());
        let rep = verify_broadcast(&c, &equatorial_grid(10, 10), 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.off_equator_inputs, 0);

        // off the equator the marginals move
        let zero = BlochVector::new(0.0, 0.0, 1.0).unwrap();
        let rep = verify_broadcast(&c, &[zero], 1e-12).unwrap();
        assert_eq!(rep.off_equator_inputs, 1);
        assert!(!rep.pass);
        let m = c.marginal(&zero.density(), 1).unwrap();
        // Tr₂B(|0⟩⟨0|) = diag(c1 + c4 + c5, c4 + c5 + c6) for the minimizer
        assert!((m[(0, 0)].re - 2.0 / 3.0).abs() < 1e-14);
        assert!((m[(1, 1)].re - 1.0 / 3.0).abs() < 1e-14);
    }

    /// (1−2c4)(|00⟩⟨00|+|11⟩⟨11|) + (2c4−½)(|01⟩⟨01|+|10⟩⟨10|)
    /// + c2/2 (|00⟩+|11⟩)(⟨01|+⟨10|) + (1−c2)/2 (|01⟩+|10⟩)(⟨00|+⟨11|)
    /// + ½(|01⟩⟨10|+|10⟩⟨01|)
    fn plus_image_closed_form(q: &ConstrainedParams) -> ComplexMatrix {
        let c2 = Complex64::new(0.5, q.t);
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = r(1.0 - 2.0 * q.c4);
        m[(3, 3)] = r(1.0 - 2.0 * q.c4);
        m[(1, 1)] = r(2.0 * q.c4 - 0.5);
        m[(2, 2)] = r(2.0 * q.c4 - 0.5);
        for a in [0, 3] {
            for b in [1, 2] {
                m[(a, b)] = c2 / 2.0;
                m[(b, a)] = (r(1.0) - c2) / 2.0;
            }
        }
        m[(1, 2)] = r(0.5);
        m[(2, 1)] = r(0.5);
        m
    }

    #[test]
    fn plus_image_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let plus_state = projector(&plus());
        for k in 0..20 {
            let t = if k < 10 { 0.0 } else { rng.gen_range(-2.0..2.0) };
            let q = ConstrainedParams::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..2.0), t);
            let got = q.choi().apply(&plus_state).unwrap();
            assert!(got.max_abs_diff(&plus_image_closed_form(&q)) < 1e-12);
            assert!(linalg::is_hermitian(&got, 1e-14));
        }
    }

    #[test]
    fn generic_solve_leaves_three_real_directions() {
        let basis = invariant_basis(symmetric_twirl);
        let sol = solve_classic(&basis, &QubitBasis::plus_minus(), 1e-10).unwrap();
        assert_eq!(sol.null_space.len(), 3);
        assert!(verify_classic(&sol.particular, 1e-10));
        let p = extract_params_ok(&sol.particular);
        assert!(apply_classic(&p).max_abs_diff(&p) < 1e-12);
    }

    fn extract_params_ok(c: &ChoiOperator) -> FamilyParams {
        crate::symmetry::extract_params(c, 1e-10).unwrap()
    }

    #[test]
    fn solve_reports_inconsistency() {
        // scalar multiples of the identity never decohere to the copier
        let id = ComplexMatrix::identity(8);
        assert!(solve_classic(&[id], &QubitBasis::plus_minus(), 1e-10).is_err());
    }
}
