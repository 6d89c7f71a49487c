//! Choi operators of linear maps on qubit operators.
//!
//! Convention: `C = Σ_ij B(|i⟩⟨j|) ⊗ |i⟩⟨j|`, output factors first and the input
//! factor last, all in the computational basis. A basis state `|j k l⟩` of a
//! 1→2 Choi operator has flat index `4j + 2k + l`, with `l` the input.
//!
//! The map is recovered through `B(ρ) = Tr_in[(𝟙 ⊗ ρᵀ) C]`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, gates, r, ComplexMatrix, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOperator {
    matrix: ComplexMatrix,
    dim_in: usize,
    dims_out: Vec<usize>,
}

impl ChoiOperator {
    pub fn new(matrix: ComplexMatrix, dim_in: usize, dims_out: Vec<usize>) -> Result<Self> {
        let expected = dim_in * dims_out.iter().product::<usize>();
        if !matrix.is_square() || matrix.rows() != expected {
            return Err(Error::Dimension(format!(
                "Choi matrix is {}x{} but dim_in={dim_in}, dims_out={dims_out:?} needs {expected}x{expected}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidInput("Choi matrix has non-finite entries".into()));
        }
        Ok(Self {
            matrix,
            dim_in,
            dims_out,
        })
    }

    /// Builds the Choi operator of the map whose action on the matrix unit
    /// `|i⟩⟨j|` is `action(i, j)`.
    pub fn from_map(
        dim_in: usize,
        dims_out: Vec<usize>,
        action: impl Fn(usize, usize) -> ComplexMatrix,
    ) -> Result<Self> {
        let d_out: usize = dims_out.iter().product();
        let mut m = ComplexMatrix::zeros(d_out * dim_in, d_out * dim_in);
        for i in 0..dim_in {
            for j in 0..dim_in {
                let out = action(i, j);
                if out.rows() != d_out || out.cols() != d_out {
                    return Err(Error::Dimension(format!(
                        "map sends a {dim_in}-dim unit to a {}x{} operator, expected {d_out}",
                        out.rows(),
                        out.cols()
                    )));
                }
                for a in 0..d_out {
                    for b in 0..d_out {
                        m[(a * dim_in + i, b * dim_in + j)] = out[(a, b)];
                    }
                }
            }
        }
        Self::new(m, dim_in, dims_out)
    }

    /// Choi operator of the qubit identity channel.
    pub fn identity_channel() -> Self {
        Self::from_map(2, vec![2], |i, j| {
            let mut u = ComplexMatrix::zeros(2, 2);
            u[(i, j)] = ONE;
            u
        })
        .expect("identity channel")
    }

    /// Choi operator of a unitary channel ρ ↦ UρU†.
    pub fn unitary_channel(u: &ComplexMatrix) -> Result<Self> {
        let d = u.rows();
        Self::from_map(d, vec![d], |i, j| {
            let mut unit = ComplexMatrix::zeros(d, d);
            unit[(i, j)] = ONE;
            unit.conjugate_by(u)
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dims_out(&self) -> &[usize] {
        &self.dims_out
    }

    pub fn dim_out(&self) -> usize {
        self.dims_out.iter().product()
    }

    /// Subsystem dimensions of the Choi matrix itself: outputs, then input.
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = self.dims_out.clone();
        dims.push(self.dim_in);
        dims
    }

    /// Same shape, different matrix.
    pub fn with_matrix(&self, matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix, self.dim_in, self.dims_out.clone())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim_in != other.dim_in || self.dims_out != other.dims_out {
            return Err(Error::Dimension(format!(
                "Choi shapes differ: ({}, {:?}) vs ({}, {:?})",
                self.dim_in, self.dims_out, other.dim_in, other.dims_out
            )));
        }
        Ok(())
    }

    /// `α·self + β·other`
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.same_shape(other)?;
        let m = &self.matrix.scale_real(alpha) + &other.matrix.scale_real(beta);
        self.with_matrix(m)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(s),
            dim_in: self.dim_in,
            dims_out: self.dims_out.clone(),
        }
    }

    /// Image of the matrix unit `|i⟩⟨j|`: the `(i, j)` input block of the Choi matrix.
    pub fn unit_image(&self, i: usize, j: usize) -> ComplexMatrix {
        let d = self.dim_in;
        ComplexMatrix::from_fn(self.dim_out(), self.dim_out(), |a, b| {
            self.matrix[(a * d + i, b * d + j)]
        })
    }

    /// `B(ρ) = Tr_in[(𝟙 ⊗ ρᵀ) C]`, i.e. `Σ_ij ρ_ij B(|i⟩⟨j|)`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(Error::Dimension(format!(
                "input is {}x{}, map expects {}x{}",
                rho.rows(),
                rho.cols(),
                self.dim_in,
                self.dim_in
            )));
        }
        let d_out = self.dim_out();
        let d = self.dim_in;
        let mut out = ComplexMatrix::zeros(d_out, d_out);
        for a in 0..d_out {
            for b in 0..d_out {
                let mut acc = ZERO;
                for i in 0..d {
                    for j in 0..d {
                        acc += rho[(i, j)] * self.matrix[(a * d + i, b * d + j)];
                    }
                }
                out[(a, b)] = acc;
            }
        }
        Ok(out)
    }

    /// Reduced output on factor `keep` (1 or 2) of a 1→2 map, i.e. `Tr_other[B(ρ)]`.
    pub fn marginal(&self, rho: &ComplexMatrix, keep: usize) -> Result<ComplexMatrix> {
        if self.dims_out.len() != 2 {
            return Err(Error::Dimension(format!(
                "marginal needs two output factors, map has {:?}",
                self.dims_out
            )));
        }
        let traced = match keep {
            1 => 1,
            2 => 0,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "output index must be 1 or 2, got {keep}"
                )))
            }
        };
        linalg::partial_trace(&self.apply(rho)?, &self.dims_out, &[traced])
    }

    /// `Tr_out C`, an operator on the input space.
    pub fn input_marginal(&self) -> ComplexMatrix {
        let dims = self.factor_dims();
        let outs: Vec<usize> = (0..self.dims_out.len()).collect();
        linalg::partial_trace(&self.matrix, &dims, &outs).expect("shape checked at construction")
    }

    pub fn is_tp(&self, tol: f64) -> bool {
        self.input_marginal()
            .max_abs_diff(&ComplexMatrix::identity(self.dim_in))
            <= tol
    }

    pub fn is_hp(&self, tol: f64) -> bool {
        linalg::is_hermitian(&self.matrix, tol)
    }

    pub fn is_cp(&self, tol: f64) -> bool {
        linalg::is_psd(&self.matrix, tol)
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        self.is_tp(tol) && self.is_cp(tol)
    }

    /// `self ∘ first`: apply `first`, then this map.
    pub fn after(&self, first: &ChoiOperator) -> Result<Self> {
        if first.dim_out() != self.dim_in {
            return Err(Error::Dimension(format!(
                "cannot compose: inner map outputs dim {}, outer expects {}",
                first.dim_out(),
                self.dim_in
            )));
        }
        Self::from_map(first.dim_in, self.dims_out.clone(), |i, j| {
            self.apply(&first.unit_image(i, j)).expect("dims checked")
        })
    }

    /// `(Φ₁ ⊗ Φ₂ ⊗ …) ∘ self` with one single-factor channel per output factor.
    pub fn then_local(&self, channels: &[&ChoiOperator]) -> Result<Self> {
        if channels.len() != self.dims_out.len() {
            return Err(Error::Dimension(format!(
                "{} local channels for {} output factors",
                channels.len(),
                self.dims_out.len()
            )));
        }
        let dims_in_local: Vec<usize> = channels.iter().map(|c| c.dim_in).collect();
        if dims_in_local != self.dims_out {
            return Err(Error::Dimension(format!(
                "local channels take {dims_in_local:?}, outputs are {:?}",
                self.dims_out
            )));
        }
        let local = tensor_channels(channels)?;
        let dims_out_local = local.dims_out.clone();
        Self::from_map(self.dim_in, dims_out_local, |i, j| {
            local.apply(&self.unit_image(i, j)).expect("dims checked")
        })
    }
}

/// Tensor product of channels `Φ₁ ⊗ Φ₂ ⊗ …` as one Choi operator with a single
/// (composite) input factor.
pub fn tensor_channels(channels: &[&ChoiOperator]) -> Result<ChoiOperator> {
    let dims_in: Vec<usize> = channels.iter().map(|c| c.dim_in).collect();
    let dims_out: Vec<usize> = channels.iter().map(|c| c.dim_out()).collect();
    let d_in: usize = dims_in.iter().product();
    ChoiOperator::from_map(d_in, dims_out, |i, j| {
        let di = split_index(i, &dims_in);
        let dj = split_index(j, &dims_in);
        let images: Vec<ComplexMatrix> = channels
            .iter()
            .enumerate()
            .map(|(k, ch)| ch.unit_image(di[k], dj[k]))
            .collect();
        linalg::kron_all(images.iter())
    })
}

fn split_index(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

/// JSON interchange form: `{dim_in, dims_out, re, im}` with row-major parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChoiJson {
    pub dim_in: usize,
    pub dims_out: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ChoiOperator> for ChoiJson {
    fn from(c: &ChoiOperator) -> Self {
        let n = c.matrix.rows();
        let part = |f: fn(&Complex64) -> f64| {
            (0..n)
                .map(|i| (0..n).map(|j| f(&c.matrix[(i, j)])).collect())
                .collect()
        };
        Self {
            dim_in: c.dim_in,
            dims_out: c.dims_out.clone(),
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }
}

impl TryFrom<ChoiJson> for ChoiOperator {
    type Error = Error;

    fn try_from(j: ChoiJson) -> Result<Self> {
        let n = j.re.len();
        if j.im.len() != n || j.re.iter().chain(&j.im).any(|row| row.len() != n) {
            return Err(Error::Dimension(
                "re and im must both be square arrays of the same size".into(),
            ));
        }
        let data = (0..n)
            .flat_map(|i| (0..n).map(move |k| (i, k)))
            .map(|(i, k)| Complex64::new(j.re[i][k], j.im[i][k]))
            .collect();
        ChoiOperator::new(ComplexMatrix::from_vec(n, n, data)?, j.dim_in, j.dims_out)
    }
}

impl Serialize for ChoiOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChoiJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChoiOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ChoiJson::deserialize(d)?;
        ChoiOperator::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl ChoiOperator {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("Choi operators always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: ChoiJson = serde_json::from_str(s)?;
        j.try_into()
    }
}

/// Qubit state given by its Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let len = (x * x + y * y + z * z).sqrt();
        if !len.is_finite() || len > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "Bloch vector ({x}, {y}, {z}) lies outside the unit ball"
            )));
        }
        Ok(Self { x, y, z })
    }

    /// ½(𝟙 + x σx + y σy + z σz)
    pub fn density(&self) -> ComplexMatrix {
        let h = 0.5;
        ComplexMatrix::from_vec(
            2,
            2,
            vec![
                r(h * (1.0 + self.z)),
                Complex64::new(h * self.x, -h * self.y),
                Complex64::new(h * self.x, h * self.y),
                r(h * (1.0 - self.z)),
            ],
        )
        .expect("finite")
    }

    pub fn is_equatorial(&self, tol: f64) -> bool {
        self.z.abs() <= tol
    }
}

/// Equatorial qubit state ½(𝟙 + r cos φ σx + r sin φ σy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquatorialState {
    pub r: f64,
    pub phi: f64,
}

impl EquatorialState {
    /// `r ∈ [0, 1]`; `phi` is reduced into `[0, 2π)`.
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) || !phi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "equatorial state needs 0 ≤ r ≤ 1, got r = {r}, phi = {phi}"
            )));
        }
        Ok(Self {
            r,
            phi: phi.rem_euclid(TAU),
        })
    }

    pub fn plus() -> Self {
        Self { r: 1.0, phi: 0.0 }
    }

    pub fn maximally_mixed() -> Self {
        Self { r: 0.0, phi: 0.0 }
    }

    pub fn bloch(&self) -> BlochVector {
        BlochVector {
            x: self.r * self.phi.cos(),
            y: self.r * self.phi.sin(),
            z: 0.0,
        }
    }

    pub fn density(&self) -> ComplexMatrix {
        self.bloch().density()
    }

    /// Pure-state amplitudes (|0⟩ + e^{iφ}|1⟩)/√2; only meaningful for r = 1.
    pub fn pure_ket(phi: f64) -> Vec<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![r(h), Complex64::from_polar(h, phi)]
    }

    /// `radii × angles` grid with radii spanning [0, 1] inclusive and
    /// equally spaced angles starting at 0.
    pub fn grid(radii: usize, angles: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(radii * angles);
        for i in 0..radii {
            let rad = if radii == 1 { 1.0 } else { i as f64 / (radii - 1) as f64 };
            for k in 0..angles {
                out.push(Self {
                    r: rad,
                    phi: TAU * k as f64 / angles as f64,
                });
            }
        }
        out
    }
}

/// Orthonormal qubit basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitBasis {
    vectors: [Vec<Complex64>; 2],
}

impl QubitBasis {
    pub fn new(v0: Vec<Complex64>, v1: Vec<Complex64>, tol: f64) -> Result<Self> {
        if v0.len() != 2 || v1.len() != 2 {
            return Err(Error::Dimension("qubit basis vectors must have 2 entries".into()));
        }
        let norm0: f64 = v0.iter().map(|z| z.norm_sqr()).sum();
        let norm1: f64 = v1.iter().map(|z| z.norm_sqr()).sum();
        let overlap: Complex64 = v0.iter().zip(&v1).map(|(a, b)| a.conj() * b).sum();
        if (norm0 - 1.0).abs() > tol || (norm1 - 1.0).abs() > tol || overlap.norm() > tol {
            return Err(Error::InvalidInput(format!(
                "basis is not orthonormal: |v0|² = {norm0}, |v1|² = {norm1}, |⟨v0|v1⟩| = {}",
                overlap.norm()
            )));
        }
        Ok(Self { vectors: [v0, v1] })
    }

    pub fn computational() -> Self {
        Self {
            vectors: [gates::ket(&[0]), gates::ket(&[1])],
        }
    }

    /// {|+⟩, |−⟩}
    pub fn plus_minus() -> Self {
        Self {
            vectors: [gates::plus(), gates::minus()],
        }
    }

    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i]
    }

    /// |v_i⟩⟨v_j|
    pub fn unit(&self, i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::outer(&self.vectors[i], &self.vectors[j])
    }

    fn expectation(&self, i: usize, m: &ComplexMatrix) -> Complex64 {
        let v = &self.vectors[i];
        let mv = m.apply(v);
        v.iter().zip(mv).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Decoherence D(ρ) = Σᵢ ⟨i|ρ|i⟩ |i⟩⟨i| in the given basis.
pub fn decohere(basis: &QubitBasis) -> ChoiOperator {
    ChoiOperator::from_map(2, vec![2], |i, j| {
        let mut unit = ComplexMatrix::zeros(2, 2);
        unit[(i, j)] = ONE;
        let mut out = ComplexMatrix::zeros(2, 2);
        for k in 0..2 {
            out = &out + &basis.unit(k, k).scale(basis.expectation(k, &unit));
        }
        out
    })
    .expect("qubit channel")
}

/// Classical broadcaster B_cl(ρ) = Σᵢ ⟨i|ρ|i⟩ |ii⟩⟨ii| in the given basis.
pub fn classical_broadcaster(basis: &QubitBasis) -> ChoiOperator {
    ChoiOperator::from_map(2, vec![2, 2], |i, j| {
        let mut unit = ComplexMatrix::zeros(2, 2);
        unit[(i, j)] = ONE;
        let mut out = ComplexMatrix::zeros(4, 4);
        for k in 0..2 {
            let p = basis.unit(k, k);
            out = &out + &linalg::kron(&p, &p).scale(basis.expectation(k, &unit));
        }
        out
    })
    .expect("1→2 map")
}
