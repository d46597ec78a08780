//! Resonant Jaynes-Cummings Hamiltonians, the excitation number, the
//! Susskind-Glogower shift operators and the anti-Hermitian generator 𝒪 of
//! the diagonalizing rotation. ħ = 1 throughout.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{JcmError, Result};
use crate::space::{basis_ket, field_number, ladder_ops, spectral_fn, BareLabel, Cutoff, LinOp, C64, ONE};

/// Resonant model parameters; the atomic frequency always equals `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JcmParams {
    omega: f64,
    lambda: f64,
}

impl JcmParams {
    pub fn new(omega: f64, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(JcmError::InvalidParams(format!(
                "coupling lambda must be positive and finite (got {lambda})"
            )));
        }
        if !omega.is_finite() || omega < 0.0 {
            return Err(JcmError::InvalidParams(format!(
                "frequency omega must be nonnegative and finite (got {omega})"
            )));
        }
        Ok(Self { omega, lambda })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// f(n) = ½(n+1)^(−1/2).
pub(crate) fn generator_weight(n: u64) -> f64 {
    0.5 / ((n + 1) as f64).sqrt()
}

/// Pseudo-inverse of 2√n, with 0 ↦ 0.
fn half_inv_sqrt(n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        0.5 / (n as f64).sqrt()
    }
}

/// Ĥ = (ω/2)σ₃ + ω a†a + λ(a†σ₋ + σ₊a).
pub fn hamiltonian_full(p: JcmParams, c: Cutoff) -> LinOp {
    let l = ladder_ops(c);
    let free = &l.sigma_3.scale_real(0.5 * p.omega) + &field_number(c).scale_real(p.omega);
    let h = &free + &hamiltonian_interaction(p, c);
    LinOp::hermitian(h.into_matrix()).expect("JCM Hamiltonian is Hermitian")
}

/// Ĥ_I = λ(a†σ₋ + σ₊a).
pub fn hamiltonian_interaction(p: JcmParams, c: Cutoff) -> LinOp {
    let l = ladder_ops(c);
    let h = (&(&l.a_dag * &l.sigma_minus) + &(&l.sigma_plus * &l.a)).scale_real(p.lambda);
    LinOp::hermitian(h.into_matrix()).expect("interaction Hamiltonian is Hermitian")
}

/// N̂ = σ₊σ₋ + a†a, stored with exact integer entries.
pub fn excitation_number(c: Cutoff) -> LinOp {
    let d: Vec<f64> = (0..c.dim()).map(|i| c.excitation(i) as f64).collect();
    LinOp::from_real_diagonal(&d)
}

/// Ê = Σ|n⟩⟨n+1| ⊗ I_atom and its adjoint.
pub fn susskind_glogower(c: Cutoff) -> (LinOp, LinOp) {
    let d = c.dim();
    let mut e = DMatrix::<C64>::zeros(d, d);
    for n in 0..c.n_max() {
        for atom in 0..2 {
            e[(2 * n + atom, 2 * (n + 1) + atom)] = ONE;
        }
    }
    let e = LinOp::from_matrix(e);
    let e_dag = e.adjoint();
    (e, e_dag)
}

/// Which algebraic route builds 𝒪. All three coincide on the physical subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorForm {
    /// σ₊ f(a†a) a − a† f(a†a) σ₋ with f(n) = ½(n+1)^(−1/2).
    Ladder,
    /// ½(σ₊Ê − Ê†σ₋).
    Shift,
    /// (2√N̂)⁺ (σ₊a − a†σ₋), pseudo-inverse on the N = 0 sector.
    Number,
}

pub fn generator(c: Cutoff) -> LinOp {
    generator_with(GeneratorForm::Ladder, c)
}

pub fn generator_with(form: GeneratorForm, c: Cutoff) -> LinOp {
    let l = ladder_ops(c);
    match form {
        GeneratorForm::Ladder => {
            let f = spectral_fn(generator_weight, &field_number(c))
                .expect("a†a is diagonal with integer spectrum");
            let lower = &(&l.sigma_plus * &f) * &l.a;
            let raise = &(&l.a_dag * &f) * &l.sigma_minus;
            &lower - &raise
        }
        GeneratorForm::Shift => {
            let (e, e_dag) = susskind_glogower(c);
            (&(&l.sigma_plus * &e) - &(&e_dag * &l.sigma_minus)).scale_real(0.5)
        }
        GeneratorForm::Number => {
            let inv = spectral_fn(half_inv_sqrt, &excitation_number(c))
                .expect("N̂ is diagonal with integer spectrum");
            &inv * &(&(&l.sigma_plus * &l.a) - &(&l.a_dag * &l.sigma_minus))
        }
    }
}

/// Residuals of the commutator identity
/// [𝒪, Ĥ_I] = λ(σ₊σ₋√(aa†) − σ₋σ₊√(a†a)) and of its bare-state eigenactions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorReport {
    /// Max-norm of the difference of both sides on the physical subspace.
    pub identity_residual: f64,
    /// max over n of ‖[𝒪,Ĥ_I]|g,n⟩ + λ√n|g,n⟩‖, 0 ≤ n ≤ n_max.
    pub ground_eigen_residual: f64,
    /// max over n of ‖[𝒪,Ĥ_I]|e,n−1⟩ − λ√n|e,n−1⟩‖, 1 ≤ n ≤ n_max.
    pub excited_eigen_residual: f64,
    /// ‖[𝒪,Ĥ_I]|g,0⟩‖.
    pub vacuum_residual: f64,
}

impl CommutatorReport {
    pub fn max_residual(&self) -> f64 {
        self.identity_residual
            .max(self.ground_eigen_residual)
            .max(self.excited_eigen_residual)
            .max(self.vacuum_residual)
    }
}

pub fn commutator_check(c: Cutoff, p: JcmParams) -> CommutatorReport {
    let l = ladder_ops(c);
    let comm = generator(c).commutator(&hamiltonian_interaction(p, c));

    let sqrt = |n: u64| (n as f64).sqrt();
    let sqrt_aad = spectral_fn(sqrt, &(&l.a * &l.a_dag)).expect("aa† is diagonal");
    let sqrt_ada = spectral_fn(sqrt, &(&l.a_dag * &l.a)).expect("a†a is diagonal");
    let rhs = (&(&(&l.sigma_plus * &l.sigma_minus) * &sqrt_aad)
        - &(&(&l.sigma_minus * &l.sigma_plus) * &sqrt_ada))
        .scale_real(p.lambda());
    let identity_residual = comm.diff_max_on(&rhs, &c.physical_indices());

    let lam = p.lambda();
    let mut ground = 0.0f64;
    for n in 0..=c.n_max() {
        let g = basis_ket(BareLabel::g(n), c).expect("in range");
        let want = g.scale(C64::new(-lam * (n as f64).sqrt(), 0.0));
        ground = ground.max(comm.apply(&g).distance(&want));
    }
    let mut excited = 0.0f64;
    for n in 1..=c.n_max() {
        let e = basis_ket(BareLabel::e(n - 1), c).expect("in range");
        let want = e.scale(C64::new(lam * (n as f64).sqrt(), 0.0));
        excited = excited.max(comm.apply(&e).distance(&want));
    }
    let vacuum = comm
        .apply(&basis_ket(BareLabel::g(0), c).expect("in range"))
        .norm();

    CommutatorReport {
        identity_residual,
        ground_eigen_residual: ground,
        excited_eigen_residual: excited,
        vacuum_residual: vacuum,
    }
}

/// Projector |g,0⟩⟨g,0|.
pub(crate) fn ground_projector(c: Cutoff) -> LinOp {
    let g0 = basis_ket(BareLabel::g(0), c).expect("vacuum is representable");
    LinOp::outer(&g0, &g0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonalize::{dressed_ket, DressedLabel, Parity};
    use crate::space::ZERO;

    fn c(n: usize) -> Cutoff {
        Cutoff::new(n).unwrap()
    }

    fn params() -> JcmParams {
        JcmParams::new(10.0, 1.3).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(JcmParams::new(1.0, 0.0).is_err());
        assert!(JcmParams::new(-1.0, 1.0).is_err());
        assert!(JcmParams::new(0.0, 1.0).is_ok());
        assert!(JcmParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn full_hamiltonian_entries() {
        let cut = c(5);
        let p = params();
        let h = hamiltonian_full(p, cut);
        let g0 = cut.index(BareLabel::g(0)).unwrap();
        let e0 = cut.index(BareLabel::e(0)).unwrap();
        let g1 = cut.index(BareLabel::g(1)).unwrap();
        assert_eq!(h.entry(g0, g0).re, -p.omega() / 2.0);
        assert_eq!(h.entry(e0, g1).re, p.lambda());

        let l = ladder_ops(cut);
        let rest = &(&(&h - &l.sigma_3.scale_real(p.omega() / 2.0))
            - &field_number(cut).scale_real(p.omega()))
            - &hamiltonian_interaction(p, cut);
        assert_eq!(rest.max_norm(), 0.0);
        assert_eq!(h.hermitian_hint(), Some(true));
    }

    #[test]
    fn interaction_eigenstates() {
        let cut = c(6);
        let p = params();
        let h = hamiltonian_interaction(p, cut);
        let g0 = basis_ket(BareLabel::g(0), cut).unwrap();
        assert_eq!(h.apply(&g0).norm(), 0.0);
        for n in 1..=4 {
            for (parity, sign) in [(Parity::Plus, 1.0), (Parity::Minus, -1.0)] {
                let k = dressed_ket(DressedLabel::new(n, parity).unwrap(), cut).unwrap();
                let want = k.scale(C64::new(sign * p.lambda() * (n as f64).sqrt(), 0.0));
                assert!(h.apply(&k).distance(&want) <= 1e-12);
            }
        }
    }

    #[test]
    fn n2_block_eigenvalues() {
        let cut = c(4);
        let p = params();
        let h = hamiltonian_interaction(p, cut);
        let idx = [cut.index(BareLabel::e(1)).unwrap(), cut.index(BareLabel::g(2)).unwrap()];
        let block = h.restrict(&idx).map(|z| z.re);
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let s = p.lambda() * 2f64.sqrt();
        assert!((ev[0] + s).abs() < 1e-12 && (ev[1] - s).abs() < 1e-12);
    }

    #[test]
    fn excitation_number_actions() {
        let cut = c(8);
        let n_op = excitation_number(cut);
        let l = ladder_ops(cut);
        let product = &(&l.sigma_plus * &l.sigma_minus) + &(&l.a_dag * &l.a);
        assert!(n_op.diff_max_on(&product, &(0..cut.dim()).collect::<Vec<_>>()) <= 1e-12);
        assert_eq!(n_op.apply(&basis_ket(BareLabel::g(0), cut).unwrap()).norm(), 0.0);
        for n in 1..=5 {
            for parity in [Parity::Plus, Parity::Minus] {
                let k = dressed_ket(DressedLabel::new(n, parity).unwrap(), cut).unwrap();
                assert!(n_op.apply(&k).distance(&k.scale(C64::new(n as f64, 0.0))) <= 1e-12);
            }
        }
        let comm = n_op.commutator(&hamiltonian_interaction(params(), cut));
        assert_eq!(comm.max_norm_on(&cut.physical_indices()), 0.0);
    }

    #[test]
    fn shift_operator_actions() {
        let cut = c(8);
        let (e, e_dag) = susskind_glogower(cut);
        let g1 = basis_ket(BareLabel::g(1), cut).unwrap();
        let g0 = basis_ket(BareLabel::g(0), cut).unwrap();
        assert_eq!(e.apply(&g1), g0);
        assert_eq!(e.apply(&g0).norm(), 0.0);
        let prod = &e * &e_dag;
        let id = LinOp::identity(cut.dim());
        assert_eq!(prod.diff_max_on(&id, &cut.photon_interior_indices()), 0.0);
        assert_eq!(e_dag.matrix(), &e.matrix().adjoint());
    }

    #[test]
    fn generator_actions() {
        let cut = c(8);
        let o = generator(cut);
        let g0 = basis_ket(BareLabel::g(0), cut).unwrap();
        assert_eq!(o.apply(&g0).norm(), 0.0);
        // hand evaluation: f(0)·√1 = ½
        let g1 = basis_ket(BareLabel::g(1), cut).unwrap();
        let e0 = basis_ket(BareLabel::e(0), cut).unwrap();
        assert!(o.apply(&g1).distance(&e0.scale(C64::new(0.5, 0.0))) <= 1e-15);
        assert!(o.anti_hermiticity_residual() <= 1e-12);
    }

    #[test]
    fn generator_square_is_quarter_projector() {
        let cut = c(8);
        let o = generator(cut);
        let want = (&LinOp::identity(cut.dim()) - &ground_projector(cut)).scale_real(-0.25);
        assert!((&o * &o).diff_max_on(&want, &cut.physical_indices()) <= 1e-12);
    }

    #[test]
    fn three_generator_routes_agree() {
        for n_max in [1, 2, 8, 20] {
            let cut = c(n_max);
            let ladder = generator_with(GeneratorForm::Ladder, cut);
            let phys = cut.physical_indices();
            for form in [GeneratorForm::Shift, GeneratorForm::Number] {
                let other = generator_with(form, cut);
                assert!(ladder.diff_max_on(&other, &phys) <= 1e-12, "{form:?} at n_max={n_max}");
            }
        }
    }

    #[test]
    fn generator_commutes_with_excitation_number() {
        let cut = c(8);
        let comm = generator(cut).commutator(&excitation_number(cut));
        assert!(comm.max_norm_on(&cut.physical_indices()) <= 1e-12);
    }

    #[test]
    fn commutator_identity_and_eigenactions() {
        let rep = commutator_check(c(8), params());
        assert!(rep.identity_residual <= 1e-12, "{rep:?}");
        assert!(rep.ground_eigen_residual <= 1e-12, "{rep:?}");
        assert!(rep.excited_eigen_residual <= 1e-12, "{rep:?}");
        assert_eq!(rep.vacuum_residual, 0.0);
    }

    #[test]
    fn generator_on_leftover_is_zero() {
        let cut = c(5);
        let o = generator(cut);
        let mut k = crate::space::Ket::zeros(cut.dim());
        k.amplitudes_mut()[cut.leftover_index()] = ONE;
        assert!(o.apply(&k).amplitudes().iter().all(|z| *z == ZERO));
    }
}
