//! Dense complex linear algebra for small operators.
//!
//! Everything here is sized for multi-qubit operators of dimension at most 16:
//! row-major storage, no blocking, no external solver. Matrices are values;
//! every operation returns a fresh matrix.
//!
//! The Hermitian eigensolver is a cyclic complex Jacobi iteration. Each
//! rotation first removes the phase of the pivot entry with a diagonal unitary
//! and then applies a real Givens rotation, so the off-diagonal Frobenius mass
//! decreases monotonically.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for structural predicates (Hermitian, PSD, TP).
pub const DEFAULT_TOL: f64 = 1e-10;

/// Off-diagonal Frobenius mass at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-14;

const JACOBI_MAX_SWEEPS: usize = 100;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries, rejecting ragged or non-finite input.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows of real numbers.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n, m, |i, j| r(rows[i][j]))
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { r(values[i]) } else { ZERO })
    }

    /// |v⟩⟨w|
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    /// Column vector as an n×1 matrix.
    pub fn column(v: &[Complex64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`, with the position where it occurs.
    pub fn max_abs_diff_at(&self, other: &Self) -> (f64, (usize, usize)) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut best = (0.0, (0, 0));
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = (self[(i, j)] - other[(i, j)]).norm();
                if d > best.0 {
                    best = (d, (i, j));
                }
            }
        }
        best
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.max_abs_diff_at(other).0
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hilbert-Schmidt inner product Tr[self† other].
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `u · self · u†`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Hermitian part ½(m + m†).
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Kronecker product of a sequence of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// Traces out the subsystems listed in `traced` from an operator on
/// `dims[0] ⊗ dims[1] ⊗ …` (subsystem 0 leftmost).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], traced: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows != total {
        return Err(Error::Dimension(format!(
            "partial trace of a {}x{} matrix over subsystem dims {dims:?}",
            m.rows, m.cols
        )));
    }
    if let Some(&bad) = traced.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Dimension(format!(
            "subsystem index {bad} out of range for {} subsystems",
            dims.len()
        )));
    }
    let keep: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();

    // digits of a flat index, subsystem 0 most significant
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut d = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            d[k] = idx % dims[k];
            idx /= dims[k];
        }
        d
    };
    let kept_index = |d: &[usize]| keep.iter().fold(0, |acc, &k| acc * dims[k] + d[k]);

    let all_digits: Vec<Vec<usize>> = (0..total).map(digits).collect();
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for i in 0..total {
        let di = &all_digits[i];
        for j in 0..total {
            let dj = &all_digits[j];
            if traced.iter().all(|&k| di[k] == dj[k]) {
                out[(kept_index(di), kept_index(dj))] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && m.max_abs_diff(&m.adjoint()) <= tol
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.col(k)
    }

    /// Σ f(λ_k) |v_k⟩⟨v_k|
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            let v = self.vector(k);
            for i in 0..n {
                let vi = v[i] * w;
                for j in 0..n {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition of a non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let (asym, (i, j)) = m.max_abs_diff_at(&m.adjoint());
    if asym > tol {
        return Err(Error::NotHermitian {
            deviation: asym,
            row: i,
            col: j,
        });
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let stop = JACOBI_TOL * a.frobenius().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag < 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * mag).atan2(aqq - app);
                let (s, cs) = theta.sin_cos();
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane
                let gpp = r(cs);
                let gpq = r(s);
                let gqp = phase.conj() * (-s);
                let gqq = phase.conj() * cs;

                // a ← a G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                }
                // a ← G† a
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = r(a[(p, p)].re);
                a[(q, q)] = r(a[(q, q)].re);
                // v ← v G
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }
    if off_diagonal_norm(&a) >= stop.max(1e-12) {
        return Err(Error::NoConvergence(format!(
            "Jacobi left off-diagonal mass {:.3e} after {JACOBI_MAX_SWEEPS} sweeps",
            off_diagonal_norm(&a)
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..a.rows {
        for j in 0..a.cols {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues of a Hermitian matrix, descending. Panics on non-Hermitian input.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    hermitian_eig(m, DEFAULT_TOL)
        .expect("eigenvalues: matrix must be Hermitian")
        .values
}

/// Singular values, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let gram = m.adjoint().matmul(m);
    let eig = hermitian_eig(&gram, f64::INFINITY).expect("Gram matrix is Hermitian");
    eig.values.iter().map(|&x| x.max(0.0).sqrt()).collect()
}

/// Trace norm ‖m‖₁: Σ|λ| for Hermitian input, the sum of singular values otherwise.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    assert!(m.is_square(), "trace norm of a non-square matrix");
    if is_hermitian(m, 1e-12 * m.max_abs().max(1.0)) {
        eigenvalues(&m.hermitian_part()).iter().map(|x| x.abs()).sum()
    } else {
        singular_values(m).iter().sum()
    }
}

/// Hermitian within `tol` and smallest eigenvalue ≥ −tol.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> bool {
    if !is_hermitian(m, tol) {
        return false;
    }
    match hermitian_eig(m, tol) {
        Ok(e) => e.values.last().is_none_or(|&min| min >= -tol),
        Err(_) => false,
    }
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    *eigenvalues(m).last().expect("empty matrix")
}

/// Pauli and friends.
pub mod gates {
    use super::*;

    pub fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    pub fn hadamard() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]])
    }

    /// Phase gate diag(1, i).
    pub fn phase_s() -> ComplexMatrix {
        ComplexMatrix::diag(&[ONE, I])
    }

    /// U_φ = |0⟩⟨0| + e^{iφ}|1⟩⟨1|
    pub fn phase_rotation(phi: f64) -> ComplexMatrix {
        ComplexMatrix::diag(&[ONE, Complex64::from_polar(1.0, phi)])
    }

    /// Two-qubit swap.
    pub fn swap() -> ComplexMatrix {
        ComplexMatrix::from_fn(4, 4, |i, j| {
            let swapped = (i % 2) * 2 + i / 2;
            if swapped == j {
                ONE
            } else {
                ZERO
            }
        })
    }

    /// |+⟩, |−⟩ as amplitude vectors.
    pub fn plus() -> Vec<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![r(h), r(h)]
    }

    pub fn minus() -> Vec<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![r(h), r(-h)]
    }

    pub fn ket(bits: &[usize]) -> Vec<Complex64> {
        let idx = bits.iter().fold(0, |acc, &b| acc * 2 + b);
        let mut v = vec![ZERO; 1 << bits.len()];
        v[idx] = ONE;
        v
    }

    pub fn projector(v: &[Complex64]) -> ComplexMatrix {
        ComplexMatrix::outer(v, v)
    }
}

/// Hermitian part of a matrix with entries uniform in the unit square.
pub fn random_hermitian(n: usize, rng: &mut impl rand::Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    g.hermitian_part()
}
