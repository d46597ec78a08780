//! Truncated atom ⊗ field Hilbert space.
//!
//! Basis states |a⟩⊗|n⟩ with a ∈ {g, e} and 0 ≤ n ≤ n_max are stored at the
//! flat index `2n + a` (g = 0, e = 1), so the atom index runs fastest. Every
//! file written by this crate uses this ordering.
//!
//! The creation operator is hard-truncated, a†|·, n_max⟩ = 0. The single state
//! |e, n_max⟩ carries n_max + 1 excitations and has no coupling partner; it is
//! the *leftover* state. Everything else spans the *physical subspace*
//! (total excitation ≤ n_max) on which the model identities hold exactly.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::error::{JcmError, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance for exact algebraic identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for derived quantities (entropies, quadratures, eigensolves).
pub const DERIVED_TOL: f64 = 1e-10;
/// Allowed deviation of ⟨ψ|ψ⟩ from one for inputs that must be normalized.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cutoff {
    n_max: usize,
}

impl Cutoff {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(JcmError::InvalidCutoff(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Total dimension 2(n_max + 1).
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    pub fn index(&self, label: BareLabel) -> Result<usize> {
        if label.n > self.n_max {
            return Err(JcmError::OutOfRange {
                n: label.n,
                n_max: self.n_max,
            });
        }
        Ok(2 * label.n + label.atom.offset())
    }

    /// Inverse of [`Cutoff::index`]. Panics if `index >= dim()`.
    pub fn label(&self, index: usize) -> BareLabel {
        assert!(index < self.dim(), "basis index {index} out of range");
        let atom = if index.is_multiple_of(2) { Atom::Ground } else { Atom::Excited };
        BareLabel { atom, n: index / 2 }
    }

    /// Total excitation number of a basis state.
    pub fn excitation(&self, index: usize) -> usize {
        let l = self.label(index);
        l.n + l.atom.offset()
    }

    /// Index of |e, n_max⟩.
    pub fn leftover_index(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn physical_indices(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| i != self.leftover_index())
            .collect()
    }

    /// Physical basis states whose photon number is below n_max.
    pub fn photon_interior_indices(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.label(i).n < self.n_max)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Ground,
    Excited,
}

impl Atom {
    pub fn offset(self) -> usize {
        match self {
            Atom::Ground => 0,
            Atom::Excited => 1,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Atom::Ground => "g",
            Atom::Excited => "e",
        })
    }
}

/// Bare product state |atom⟩⊗|n⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BareLabel {
    pub atom: Atom,
    pub n: usize,
}

impl BareLabel {
    pub fn g(n: usize) -> Self {
        Self { atom: Atom::Ground, n }
    }

    pub fn e(n: usize) -> Self {
        Self { atom: Atom::Excited, n }
    }
}

/// State vector over the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: DVector<C64>,
}

impl Ket {
    pub fn zeros(dim: usize) -> Self {
        Self { amps: DVector::zeros(dim) }
    }

    pub fn from_vec(amps: Vec<C64>) -> Self {
        Self { amps: DVector::from_vec(amps) }
    }

    pub fn from_dvector(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amps
    }

    pub fn amp(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// ⟨self|other⟩, accumulated in index order.
    pub fn inner(&self, other: &Ket) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(other.amps.iter())
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn scale(&self, c: C64) -> Ket {
        Ket { amps: &self.amps * c }
    }

    /// Euclidean distance ‖self − other‖.
    pub fn distance(&self, other: &Ket) -> f64 {
        (&self.amps - &other.amps).norm()
    }

    pub fn normalized(&self) -> Ket {
        let n = self.norm();
        self.scale(C64::new(1.0 / n, 0.0))
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        let ns = self.norm_sqr();
        if (ns - 1.0).abs() > NORM_TOL {
            return Err(JcmError::NotNormalized {
                norm_sqr: ns,
                tol: NORM_TOL,
            });
        }
        Ok(())
    }
}

impl Add for &Ket {
    type Output = Ket;
    fn add(self, rhs: &Ket) -> Ket {
        Ket { amps: &self.amps + &rhs.amps }
    }
}

impl Sub for &Ket {
    type Output = Ket;
    fn sub(self, rhs: &Ket) -> Ket {
        Ket { amps: &self.amps - &rhs.amps }
    }
}

/// |label⟩ as a unit vector.
pub fn basis_ket(label: BareLabel, cutoff: Cutoff) -> Result<Ket> {
    let i = cutoff.index(label)?;
    let mut k = Ket::zeros(cutoff.dim());
    k.amps[i] = ONE;
    Ok(k)
}

/// Complex linear operator on the truncated space.
///
/// Stored densely; the largest spaces used here have a few hundred states.
#[derive(Debug, Clone, PartialEq)]
pub struct LinOp {
    mat: DMatrix<C64>,
    hermitian_hint: Option<bool>,
}

impl LinOp {
    pub fn from_matrix(mat: DMatrix<C64>) -> Self {
        assert!(mat.is_square(), "operators must be square");
        Self {
            mat,
            hermitian_hint: None,
        }
    }

    /// Wraps `mat` and records that it is Hermitian; fails if it is not
    /// within [`EXACT_TOL`].
    pub fn hermitian(mat: DMatrix<C64>) -> Result<Self> {
        let op = Self::from_matrix(mat);
        let r = op.hermiticity_residual();
        if r > EXACT_TOL {
            return Err(JcmError::ContractViolation(format!(
                "operator flagged Hermitian has |A - A^dag|_max = {r:.3e}"
            )));
        }
        Ok(Self {
            hermitian_hint: Some(true),
            ..op
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
            hermitian_hint: Some(true),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self {
            mat: DMatrix::from_diagonal(&d),
            hermitian_hint: Some(true),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::from_matrix(DMatrix::from_fn(dim, dim, f))
    }

    /// |ket⟩⟨bra|
    pub fn outer(ket: &Ket, bra: &Ket) -> Self {
        Self::from_matrix(ket.amplitudes() * bra.amplitudes().adjoint())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn hermitian_hint(&self) -> Option<bool> {
        self.hermitian_hint
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn adjoint(&self) -> LinOp {
        LinOp {
            mat: self.mat.adjoint(),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn apply(&self, ket: &Ket) -> Ket {
        Ket::from_dvector(&self.mat * ket.amplitudes())
    }

    pub fn scale(&self, c: C64) -> LinOp {
        LinOp::from_matrix(&self.mat * c)
    }

    pub fn scale_real(&self, x: f64) -> LinOp {
        LinOp {
            mat: &self.mat * C64::new(x, 0.0),
            hermitian_hint: self.hermitian_hint,
        }
    }

    /// [self, other]
    pub fn commutator(&self, other: &LinOp) -> LinOp {
        &(self * other) - &(other * self)
    }

    /// {self, other}
    pub fn anticommutator(&self, other: &LinOp) -> LinOp {
        &(self * other) + &(other * self)
    }

    /// ⟨ψ|self|ψ⟩
    pub fn expectation(&self, ket: &Ket) -> C64 {
        ket.inner(&self.apply(ket))
    }

    pub fn max_norm(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Max-norm of the compression P·self·P onto the listed basis indices.
    pub fn max_norm_on(&self, indices: &[usize]) -> f64 {
        let mut m = 0.0f64;
        for &i in indices {
            for &j in indices {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    /// ‖P(self − other)P‖_max.
    pub fn diff_max_on(&self, other: &LinOp, indices: &[usize]) -> f64 {
        (self - other).max_norm_on(indices)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.mat - self.mat.adjoint())
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// ‖self + self†‖_max.
    pub fn anti_hermiticity_residual(&self) -> f64 {
        (&self.mat + self.mat.adjoint())
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest off-diagonal magnitude.
    pub fn off_diagonal_max(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    m = m.max(self.mat[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.mat.diagonal().iter().copied().collect()
    }

    /// P·self·P as a dense matrix over the listed indices.
    pub fn restrict(&self, indices: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(indices.len(), indices.len(), |r, c| {
            self.mat[(indices[r], indices[c])]
        })
    }
}

impl Mul for &LinOp {
    type Output = LinOp;
    fn mul(self, rhs: &LinOp) -> LinOp {
        LinOp::from_matrix(&self.mat * &rhs.mat)
    }
}

impl Add for &LinOp {
    type Output = LinOp;
    fn add(self, rhs: &LinOp) -> LinOp {
        let hint = match (self.hermitian_hint, rhs.hermitian_hint) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        };
        LinOp {
            mat: &self.mat + &rhs.mat,
            hermitian_hint: hint,
        }
    }
}

impl Sub for &LinOp {
    type Output = LinOp;
    fn sub(self, rhs: &LinOp) -> LinOp {
        let hint = match (self.hermitian_hint, rhs.hermitian_hint) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        };
        LinOp {
            mat: &self.mat - &rhs.mat,
            hermitian_hint: hint,
        }
    }
}

impl Neg for &LinOp {
    type Output = LinOp;
    fn neg(self) -> LinOp {
        LinOp {
            mat: -&self.mat,
            hermitian_hint: self.hermitian_hint,
        }
    }
}

/// Field ladder and atomic Pauli operators on the full truncated space.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub a: LinOp,
    pub a_dag: LinOp,
    pub sigma_minus: LinOp,
    pub sigma_plus: LinOp,
    pub sigma_3: LinOp,
}

pub fn ladder_ops(cutoff: Cutoff) -> Ladder {
    let d = cutoff.dim();
    let mut a = DMatrix::<C64>::zeros(d, d);
    let mut sm = DMatrix::<C64>::zeros(d, d);
    let mut s3 = vec![0.0; d];
    for col in 0..d {
        let l = cutoff.label(col);
        if l.n >= 1 {
            let row = 2 * (l.n - 1) + l.atom.offset();
            a[(row, col)] = C64::new((l.n as f64).sqrt(), 0.0);
        }
        match l.atom {
            Atom::Excited => {
                sm[(col - 1, col)] = ONE;
                s3[col] = 1.0;
            }
            Atom::Ground => s3[col] = -1.0,
        }
    }
    let a = LinOp::from_matrix(a);
    let sigma_minus = LinOp::from_matrix(sm);
    Ladder {
        a_dag: a.adjoint(),
        a,
        sigma_plus: sigma_minus.adjoint(),
        sigma_minus,
        sigma_3: LinOp::from_real_diagonal(&s3),
    }
}

/// a†a with exact integer entries.
pub fn field_number(cutoff: Cutoff) -> LinOp {
    let d: Vec<f64> = (0..cutoff.dim()).map(|i| cutoff.label(i).n as f64).collect();
    LinOp::from_real_diagonal(&d)
}

/// Applies `h` eigenvalue-wise to an operator that is diagonal in the bare
/// basis with a nonnegative integer spectrum. `h` is only evaluated on the
/// integers that actually occur.
pub fn spectral_fn<F>(h: F, diag_op: &LinOp) -> Result<LinOp>
where
    F: Fn(u64) -> f64,
{
    let off = diag_op.off_diagonal_max();
    if off > EXACT_TOL {
        return Err(JcmError::ContractViolation(format!(
            "spectral_fn needs a diagonal operator; off-diagonal magnitude {off:.3e}"
        )));
    }
    let mut out = Vec::with_capacity(diag_op.dim());
    for z in diag_op.diagonal() {
        let k = z.re.round();
        if (z.re - k).abs() > EXACT_TOL || z.im.abs() > EXACT_TOL || k < 0.0 {
            return Err(JcmError::ContractViolation(format!(
                "spectral_fn needs a nonnegative integer spectrum; found eigenvalue {z}"
            )));
        }
        out.push(h(k as u64));
    }
    Ok(LinOp::from_real_diagonal(&out))
}

/// Reduced atom state ρ = Tr_field |ψ⟩⟨ψ| in (g, e) ordering.
pub fn reduced_atom_density(ket: &Ket) -> Result<Matrix2<C64>> {
    ket.check_normalized()?;
    Ok(partial_trace_unchecked(ket))
}

pub(crate) fn partial_trace_unchecked(ket: &Ket) -> Matrix2<C64> {
    let mut rho = Matrix2::<C64>::zeros();
    let amps = ket.amplitudes();
    for n in 0..amps.len() / 2 {
        let g = amps[2 * n];
        let e = amps[2 * n + 1];
        rho[(0, 0)] += g * g.conj();
        rho[(0, 1)] += g * e.conj();
        rho[(1, 0)] += e * g.conj();
        rho[(1, 1)] += e * e.conj();
    }
    rho
}
