//! The diagonalizing unitary Û = exp((π/2)𝒪), the diagonal Hamiltonians and
//! the dressed basis with its dressed ladder operators.
//!
//! Û maps bare states onto dressed states:
//! Û|g,n⟩ = |n,+⟩ and Û|e,n⟩ = |n+1,−⟩. On the leftover state |e,n_max⟩,
//! whose partner |n_max+1,−⟩ is not representable, Û acts as the identity
//! and the leftover stands in for |n_max+1,−⟩ in the explicit dressed sums.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{JcmError, Result};
use crate::model::{excitation_number, generator, ground_projector, JcmParams};
use crate::space::{basis_ket, ladder_ops, spectral_fn, BareLabel, Cutoff, Ket, LinOp, C64, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Parity::Plus => '+',
            Parity::Minus => '-',
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Dressed state |n,±⟩. There is no |0,−⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DressedLabel {
    n: usize,
    parity: Parity,
}

impl DressedLabel {
    pub fn new(n: usize, parity: Parity) -> Result<Self> {
        if n == 0 && parity == Parity::Minus {
            return Err(JcmError::ForbiddenLabel(0));
        }
        Ok(Self { n, parity })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// The bare state that Û maps onto this label.
    pub fn bare_preimage(&self) -> BareLabel {
        match self.parity {
            Parity::Plus => BareLabel::g(self.n),
            Parity::Minus => BareLabel::e(self.n - 1),
        }
    }
}

impl fmt::Display for DressedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}⟩", self.n, self.parity)
    }
}

/// Dressed labels up to n_max in output order (0,+), (1,+), (1,−), (2,+), …
pub fn dressed_labels(c: Cutoff) -> Vec<DressedLabel> {
    let mut out = vec![DressedLabel { n: 0, parity: Parity::Plus }];
    for n in 1..=c.n_max() {
        out.push(DressedLabel { n, parity: Parity::Plus });
        out.push(DressedLabel { n, parity: Parity::Minus });
    }
    out
}

/// |n,±⟩ = (|e,n−1⟩ ± |g,n⟩)/√2 for n ≥ 1, |0,+⟩ = |g,0⟩.
pub fn dressed_ket(label: DressedLabel, c: Cutoff) -> Result<Ket> {
    if label.n > c.n_max() {
        return Err(JcmError::OutOfRange {
            n: label.n,
            n_max: c.n_max(),
        });
    }
    if label.n == 0 {
        return basis_ket(BareLabel::g(0), c);
    }
    let mut k = Ket::zeros(c.dim());
    let amps = k.amplitudes_mut();
    amps[c.index(BareLabel::e(label.n - 1))?] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[c.index(BareLabel::g(label.n))?] = C64::new(label.parity.sign() * FRAC_1_SQRT_2, 0.0);
    Ok(k)
}

/// Columns are the dressed kets aligned with their bare preimages: column
/// `i` holds Û|i⟩ built from the explicit superpositions, and the leftover
/// column is |e,n_max⟩ itself.
pub fn dressed_basis_matrix(c: Cutoff) -> DMatrix<C64> {
    let d = c.dim();
    let mut v = DMatrix::<C64>::zeros(d, d);
    for col in 0..d {
        let k = match dressed_image(c, col) {
            Some(label) => dressed_ket(label, c).expect("label within cutoff"),
            None => basis_ket(c.label(col), c).expect("in range"),
        };
        v.set_column(col, k.amplitudes());
    }
    v
}

/// Dressed label of Û|i⟩ for a bare index, `None` for the leftover.
pub fn dressed_image(c: Cutoff, bare_index: usize) -> Option<DressedLabel> {
    if bare_index == c.leftover_index() {
        return None;
    }
    let l = c.label(bare_index);
    Some(match l.atom {
        crate::space::Atom::Ground => DressedLabel { n: l.n, parity: Parity::Plus },
        crate::space::Atom::Excited => DressedLabel { n: l.n + 1, parity: Parity::Minus },
    })
}

/// Matrix elements ⟨i_D|op|j_D⟩ in the dressed frame of [`dressed_basis_matrix`].
pub fn dressed_coordinates(op: &LinOp, c: Cutoff) -> DMatrix<C64> {
    let v = dressed_basis_matrix(c);
    v.adjoint() * op.matrix() * v
}

/// Projector onto the leftover state |e,n_max⟩.
fn leftover_projector(c: Cutoff) -> LinOp {
    let k = basis_ket(c.label(c.leftover_index()), c).expect("in range");
    LinOp::outer(&k, &k)
}

/// Closed form Û = (1/√2)(I − P₀ − P_L + 2𝒪) + P₀ + P_L, with P₀ = |g,0⟩⟨g,0|
/// and P_L the leftover projector.
pub fn unitary(c: Cutoff) -> LinOp {
    let fixed = &ground_projector(c) + &leftover_projector(c);
    let rotating = &(&LinOp::identity(c.dim()) - &fixed) + &generator(c).scale_real(2.0);
    &rotating.scale_real(FRAC_1_SQRT_2) + &fixed
}

/// exp((π/2)𝒪) by scaling and squaring (Padé), independent of the closed form.
pub fn unitary_via_exp(c: Cutoff) -> LinOp {
    let scaled = generator(c).scale_real(FRAC_PI_2);
    LinOp::from_matrix(scaled.into_matrix().exp())
}

/// Ĥ_ID = λ√N̂ σ₃.
pub fn diagonal_interaction(p: JcmParams, c: Cutoff) -> LinOp {
    let sqrt_n = spectral_fn(|n| (n as f64).sqrt(), &excitation_number(c)).expect("N̂ is diagonal");
    let s3 = ladder_ops(c).sigma_3;
    LinOp::hermitian((&sqrt_n * &s3).scale_real(p.lambda()).into_matrix())
        .expect("diagonal real operator")
}

/// Ĥ_D = ωN̂ + λ√N̂ σ₃.
pub fn diagonal_full(p: JcmParams, c: Cutoff) -> LinOp {
    &excitation_number(c).scale_real(p.omega()) + &diagonal_interaction(p, c)
}

/// â_D = Û a Û†.
pub fn dressed_annihilation(c: Cutoff) -> LinOp {
    let u = unitary(c);
    &(&u * &ladder_ops(c).a) * &u.adjoint()
}

/// Σ√n|n−1,+⟩⟨n,+| + Σ√(n−1)|n−1,−⟩⟨n,−|, with the leftover standing in for
/// |n_max+1,−⟩.
pub fn dressed_annihilation_explicit(c: Cutoff) -> LinOp {
    let mut op = LinOp::zeros(c.dim());
    let ket = |n, parity| dressed_ket(DressedLabel { n, parity }, c).expect("within cutoff");
    for n in 1..=c.n_max() {
        let s = C64::new((n as f64).sqrt(), 0.0);
        op = &op + &LinOp::outer(&ket(n - 1, Parity::Plus), &ket(n, Parity::Plus)).scale(s);
    }
    for n in 2..=c.n_max() {
        let s = C64::new(((n - 1) as f64).sqrt(), 0.0);
        op = &op + &LinOp::outer(&ket(n - 1, Parity::Minus), &ket(n, Parity::Minus)).scale(s);
    }
    let top = c.n_max();
    let leftover = basis_ket(c.label(c.leftover_index()), c).expect("in range");
    let s = C64::new((top as f64).sqrt(), 0.0);
    if top >= 1 {
        op = &op + &LinOp::outer(&ket(top, Parity::Minus), &leftover).scale(s);
    }
    op
}

/// σ₋D = Û σ₋ Û†.
pub fn dressed_lowering(c: Cutoff) -> LinOp {
    let u = unitary(c);
    &(&u * &ladder_ops(c).sigma_minus) * &u.adjoint()
}

/// Σ|n,+⟩⟨n+1,−|, with the leftover standing in for |n_max+1,−⟩.
pub fn dressed_lowering_explicit(c: Cutoff) -> LinOp {
    let mut op = LinOp::zeros(c.dim());
    for n in 0..c.n_max() {
        let plus = dressed_ket(DressedLabel { n, parity: Parity::Plus }, c).expect("within cutoff");
        let minus =
            dressed_ket(DressedLabel { n: n + 1, parity: Parity::Minus }, c).expect("within cutoff");
        op = &op + &LinOp::outer(&plus, &minus);
    }
    let top = dressed_ket(DressedLabel { n: c.n_max(), parity: Parity::Plus }, c).expect("within cutoff");
    let leftover = basis_ket(c.label(c.leftover_index()), c).expect("in range");
    &op + &LinOp::outer(&top, &leftover)
}

/// Dressed-frame indices whose bare preimage has photon number below n_max:
/// the subspace on which [â_D, â_D†] = I holds.
pub fn dressed_interior_indices(c: Cutoff) -> Vec<usize> {
    c.photon_interior_indices()
}

pub(crate) fn unit(c: Cutoff, index: usize) -> Ket {
    let mut k = Ket::zeros(c.dim());
    k.amplitudes_mut()[index] = ONE;
    k
}
