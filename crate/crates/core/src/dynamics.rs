//! Time evolution in the dressed frame.
//!
//! ψ(t) = Û† e^(−iĤ_ID t) Û ψ(0): one rotation into the dressed frame, an
//! exact phase per basis state, and one rotation back per sample. Û is
//! applied block by block, so a sample costs O(D).

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::blocks::{block_basis, diagonal_interaction_blocks, unitary_blocks};
use crate::coherent::{
    bare_coherent, coherent_field, entropy_unchecked, jcm_coherent, jcm_spin_coherent,
    CoherentLabel, SpinCoherentLabel,
};
use crate::diagonalize::{dressed_labels, DressedLabel, Parity};
use crate::error::{JcmError, Result};
use crate::model::{hamiltonian_full, JcmParams};
use crate::par;
use crate::space::{basis_ket, Atom, BareLabel, Cutoff, Ket, LinOp, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Picture {
    /// Generator Ĥ_I.
    Interaction,
    /// Generator ωN̂ + Ĥ_I, i.e. the full Hamiltonian without its constant −ω/2.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Ket(Ket),
    Bare(BareLabel),
    Coherent(CoherentLabel),
    SpinCoherent(SpinCoherentLabel),
    BareCoherent { atom: Atom, alpha: C64 },
}

impl InitialState {
    pub fn build(&self, c: Cutoff) -> Result<Ket> {
        match self {
            InitialState::Ket(k) => {
                if k.dim() != c.dim() {
                    return Err(JcmError::Dimension {
                        expected: c.dim(),
                        got: k.dim(),
                    });
                }
                Ok(k.clone())
            }
            InitialState::Bare(l) => basis_ket(*l, c),
            InitialState::Coherent(l) => jcm_coherent(*l, c),
            InitialState::SpinCoherent(l) => jcm_spin_coherent(*l, c),
            InitialState::BareCoherent { atom, alpha } => bare_coherent(*atom, *alpha, c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSpec {
    pub initial: InitialState,
    pub params: JcmParams,
    pub t_max: f64,
    pub steps: usize,
    pub picture: Picture,
}

impl EvolutionSpec {
    /// Uniform grid t_k = k·t_max/(steps−1).
    pub fn times(&self) -> Result<Vec<f64>> {
        if self.steps < 2 {
            return Err(JcmError::InvalidParams(format!(
                "need at least 2 time steps (got {})",
                self.steps
            )));
        }
        if !self.t_max.is_finite() {
            return Err(JcmError::InvalidParams("t_max must be finite".into()));
        }
        let last = (self.steps - 1) as f64;
        Ok((0..self.steps).map(|k| k as f64 * self.t_max / last).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    /// ⟨σ₃⟩(t)
    pub inversion: Vec<f64>,
    /// ⟨σ₊σ₋⟩(t)
    pub p_excited: Vec<f64>,
    /// Atom-field entanglement entropy in nats.
    pub entropy: Vec<f64>,
    /// |‖ψ(t)‖ − ‖ψ(0)‖|
    pub norm_drift: Vec<f64>,
}

/// Exact propagator built from the block form of Û and the dressed energies.
#[derive(Debug, Clone)]
pub struct DressedPropagator {
    cutoff: Cutoff,
    /// (basis indices, row-major block) per excitation number.
    rotation: Vec<(Vec<usize>, Vec<C64>)>,
    /// Energy of each bare basis state in the rotated frame.
    energies: Vec<f64>,
}

impl DressedPropagator {
    pub fn new(p: JcmParams, c: Cutoff, picture: Picture) -> Self {
        let rotation = unitary_blocks(c)
            .into_iter()
            .map(|b| {
                let idx = b.basis.iter().map(|&l| c.index(l).expect("in range")).collect();
                (idx, b.matrix.transpose().iter().copied().collect())
            })
            .collect();
        let mut energies = vec![0.0; c.dim()];
        for b in diagonal_interaction_blocks(p, c) {
            for (k, l) in block_basis(b.excitation, c).into_iter().enumerate() {
                let i = c.index(l).expect("in range");
                energies[i] = b.matrix[(k, k)].re;
                if picture == Picture::Full {
                    energies[i] += p.omega() * c.excitation(i) as f64;
                }
            }
        }
        Self {
            cutoff: c,
            rotation,
            energies,
        }
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    /// Rotated-frame energies indexed by bare basis state.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    fn apply_blocks(&self, ket: &Ket, adjoint: bool) -> Ket {
        let src = ket.amplitudes();
        let mut out = Ket::zeros(src.len());
        let dst = out.amplitudes_mut();
        for (idx, m) in &self.rotation {
            let k = idx.len();
            for r in 0..k {
                let mut acc = ZERO;
                for s in 0..k {
                    let e = if adjoint { m[s * k + r].conj() } else { m[r * k + s] };
                    acc += e * src[idx[s]];
                }
                dst[idx[r]] = acc;
            }
        }
        out
    }

    /// Û|ψ⟩
    pub fn rotate(&self, ket: &Ket) -> Ket {
        self.apply_blocks(ket, false)
    }

    /// Û†|ψ⟩
    pub fn unrotate(&self, ket: &Ket) -> Ket {
        self.apply_blocks(ket, true)
    }

    /// Applies the phases e^(−iE t) to a rotated-frame state and rotates back.
    pub fn from_rotated(&self, rotated: &Ket, t: f64) -> Ket {
        let phased: Vec<C64> = rotated
            .amplitudes()
            .iter()
            .zip(&self.energies)
            .map(|(a, &e)| a * C64::from_polar(1.0, -e * t))
            .collect();
        self.unrotate(&Ket::from_vec(phased))
    }

    pub fn propagate(&self, ket: &Ket, t: f64) -> Ket {
        self.from_rotated(&self.rotate(ket), t)
    }
}

/// Reference propagator from a dense eigendecomposition of a real symmetric
/// Hamiltonian.
#[derive(Debug, Clone)]
pub struct DenseEigenPropagator {
    vectors: DMatrix<C64>,
    values: Vec<f64>,
}

impl DenseEigenPropagator {
    pub fn new(h: &LinOp) -> Result<Self> {
        let imag = h.matrix().iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        if imag > 0.0 || h.hermiticity_residual() > 0.0 {
            return Err(JcmError::ContractViolation(
                "dense reference path needs a real symmetric Hamiltonian".into(),
            ));
        }
        let eig = SymmetricEigen::new(h.matrix().map(|z| z.re));
        Ok(Self {
            vectors: eig.eigenvectors.map(|x| C64::new(x, 0.0)),
            values: eig.eigenvalues.iter().copied().collect(),
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn propagate(&self, ket: &Ket, t: f64) -> Ket {
        let mut coeffs = self.vectors.adjoint() * ket.amplitudes();
        for (c, &e) in coeffs.iter_mut().zip(&self.values) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        Ket::from_dvector(&self.vectors * coeffs)
    }
}

pub(crate) fn observables(ket: &Ket) -> (f64, f64) {
    let amps = ket.amplitudes();
    let (mut pe, mut pg) = (0.0, 0.0);
    for n in 0..amps.len() / 2 {
        pg += amps[2 * n].norm_sqr();
        pe += amps[2 * n + 1].norm_sqr();
    }
    (pe - pg, pe)
}

/// Evolves the initial state and records the observable trace.
pub fn evolve(spec: &EvolutionSpec, c: Cutoff) -> Result<EvolutionTrace> {
    let times = spec.times()?;
    let psi0 = spec.initial.build(c)?;
    psi0.check_normalized()?;
    let norm0 = psi0.norm();
    let prop = DressedPropagator::new(spec.params, c, spec.picture);
    let rotated = prop.rotate(&psi0);

    let samples = par::map_slice(&times, |&t| {
        let psi = prop.from_rotated(&rotated, t);
        let (inv, pe) = observables(&psi);
        (inv, pe, entropy_unchecked(&psi), (psi.norm() - norm0).abs())
    });

    let mut trace = EvolutionTrace {
        times,
        inversion: Vec::with_capacity(samples.len()),
        p_excited: Vec::with_capacity(samples.len()),
        entropy: Vec::with_capacity(samples.len()),
        norm_drift: Vec::with_capacity(samples.len()),
    };
    for (inv, pe, s, drift) in samples {
        trace.inversion.push(inv);
        trace.p_excited.push(pe);
        trace.entropy.push(s);
        trace.norm_drift.push(drift);
    }
    Ok(trace)
}

/// Poisson-sum inversion W(t) = Σ_n p_n cos(2λ√(n+1) t) for |e⟩⊗|α⟩,
/// summed over n ≤ n_max. Independent of the operator machinery.
pub fn inversion_series(alpha: C64, p: JcmParams, c: Cutoff, times: &[f64]) -> Result<Vec<f64>> {
    let weights: Vec<f64> = coherent_field(alpha, c)?.iter().map(|z| z.norm_sqr()).collect();
    Ok(times
        .iter()
        .map(|&t| {
            weights
                .iter()
                .enumerate()
                .map(|(n, w)| w * (2.0 * p.lambda() * ((n + 1) as f64).sqrt() * t).cos())
                .sum()
        })
        .collect())
}

/// Location of the first revival of |W|: the largest local maximum inside
/// [π√n̄/λ, 3π√n̄/λ], refined by a parabola through the three grid points.
pub fn find_revival(times: &[f64], inversion: &[f64], mean_photons: f64, lambda: f64) -> Option<f64> {
    let lo = PI * mean_photons.sqrt() / lambda;
    let hi = 3.0 * lo;
    let env: Vec<f64> = inversion.iter().map(|w| w.abs()).collect();
    let mut best: Option<(usize, f64)> = None;
    for k in 1..env.len().saturating_sub(1) {
        if times[k] < lo || times[k] > hi {
            continue;
        }
        if env[k] >= env[k - 1] && env[k] >= env[k + 1] && best.is_none_or(|(_, v)| env[k] > v) {
            best = Some((k, env[k]));
        }
    }
    let (k, _) = best?;
    let (y0, y1, y2) = (env[k - 1], env[k], env[k + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    let h = times[k + 1] - times[k];
    let shift = if denom.abs() > 0.0 { 0.5 * (y0 - y2) / denom } else { 0.0 };
    Some(times[k] + shift.clamp(-1.0, 1.0) * h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub n: usize,
    pub parity: Parity,
    /// ωn ± λ√n
    pub energy: f64,
    /// Matched eigenvalue of the dense Hamiltonian, offset by +ω/2.
    pub numeric_energy: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub rows: Vec<SpectrumRow>,
    pub max_pairing_error: f64,
}

pub fn dressed_energy(label: DressedLabel, p: JcmParams) -> f64 {
    let n = label.n() as f64;
    p.omega() * n + label.parity().sign() * p.lambda() * n.sqrt()
}

/// Closed-form dressed spectrum against a dense eigensolve of Ĥ on the
/// physical subspace. Ĥ carries the constant −ω/2 from (ω/2)σ₃, which the
/// diagonal form drops, so numeric eigenvalues are shifted by +ω/2 before
/// matching. Both lists are sorted and paired by rank.
pub fn spectrum_report(p: JcmParams, c: Cutoff) -> SpectrumReport {
    let labels = dressed_labels(c);
    let closed: Vec<f64> = labels.iter().map(|&l| dressed_energy(l, p)).collect();

    let h = hamiltonian_full(p, c);
    let phys = c.physical_indices();
    let real = h.restrict(&phys).map(|z| z.re);
    let mut numeric: Vec<f64> = SymmetricEigen::new(real)
        .eigenvalues
        .iter()
        .map(|e| e + 0.5 * p.omega())
        .collect();
    numeric.sort_by(f64::total_cmp);

    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| closed[a].total_cmp(&closed[b]));
    let mut matched = vec![0.0; labels.len()];
    for (rank, &i) in order.iter().enumerate() {
        matched[i] = numeric[rank];
    }

    let rows: Vec<SpectrumRow> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| SpectrumRow {
            n: l.n(),
            parity: l.parity(),
            energy: closed[i],
            numeric_energy: matched[i],
            abs_err: (closed[i] - matched[i]).abs(),
        })
        .collect();
    let max_pairing_error = rows.iter().fold(0.0f64, |m, r| m.max(r.abs_err));
    SpectrumReport {
        rows,
        max_pairing_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonalize::dressed_ket;
    use crate::model::{excitation_number, hamiltonian_interaction};

    fn c(n: usize) -> Cutoff {
        Cutoff::new(n).unwrap()
    }

    fn spec(initial: InitialState, t_max: f64, steps: usize) -> EvolutionSpec {
        EvolutionSpec {
            initial,
            params: JcmParams::new(10.0, 1.0).unwrap(),
            t_max,
            steps,
            picture: Picture::Interaction,
        }
    }

    /// exp(−iHt) for the 2×2 block [[0, λ], [λ, 0]] in closed form.
    fn rabi_block_inversion(lambda: f64, t: f64) -> f64 {
        // start in |e,0⟩: amplitudes (cos λt, −i sin λt)
        let (ce, cg) = ((lambda * t).cos(), (lambda * t).sin());
        ce * ce - cg * cg
    }

    #[test]
    fn vacuum_rabi_oscillation() {
        let tr = evolve(&spec(InitialState::Bare(BareLabel::e(0)), 10.0, 1001), c(6)).unwrap();
        for (t, w) in tr.times.iter().zip(&tr.inversion) {
            assert!((w - (2.0 * t).cos()).abs() <= 1e-10);
            assert!((w - rabi_block_inversion(1.0, *t)).abs() <= 1e-10);
        }
    }

    #[test]
    fn ground_state_is_frozen() {
        let tr = evolve(&spec(InitialState::Bare(BareLabel::g(0)), 10.0, 101), c(6)).unwrap();
        assert!(tr.inversion.iter().all(|&w| w == -1.0));
        assert!(tr.entropy.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn dressed_states_are_stationary() {
        let cut = c(8);
        for n in 1..=4 {
            for parity in [Parity::Plus, Parity::Minus] {
                let k = dressed_ket(DressedLabel::new(n, parity).unwrap(), cut).unwrap();
                let tr = evolve(&spec(InitialState::Ket(k), 20.0, 201), cut).unwrap();
                for series in [&tr.inversion, &tr.p_excited, &tr.entropy] {
                    let first = series[0];
                    assert!(series.iter().all(|v| (v - first).abs() <= 1e-12));
                }
            }
        }
    }

    #[test]
    fn dressed_path_matches_dense_eigensolve() {
        let cut = c(20);
        let p = JcmParams::new(10.0, 1.0).unwrap();
        for picture in [Picture::Interaction, Picture::Full] {
            let fast = DressedPropagator::new(p, cut, picture);
            let h = match picture {
                Picture::Interaction => hamiltonian_interaction(p, cut),
                Picture::Full => &hamiltonian_full(p, cut)
                    + &LinOp::identity(cut.dim()).scale_real(0.5 * p.omega()),
            };
            let dense = DenseEigenPropagator::new(&h).unwrap();
            let psi = bare_coherent(Atom::Excited, C64::new(1.0, 0.7), cut).unwrap();
            for t in [0.0, 0.3, 7.5, 41.0] {
                assert!(fast.propagate(&psi, t).distance(&dense.propagate(&psi, t)) <= 1e-9);
            }
        }
    }

    #[test]
    fn conservation_and_time_reversal() {
        let cut = c(40);
        let p = JcmParams::new(10.0, 1.0).unwrap();
        let prop = DressedPropagator::new(p, cut, Picture::Interaction);
        let psi0 = bare_coherent(Atom::Excited, C64::new(2.0, 0.0), cut).unwrap();
        let h = hamiltonian_interaction(p, cut);
        let n_op = excitation_number(cut);
        let (e0, n0) = (h.expectation(&psi0).re, n_op.expectation(&psi0).re);
        for k in 0..=60 {
            let psi = prop.propagate(&psi0, k as f64);
            assert!((h.expectation(&psi).re - e0).abs() <= 1e-10);
            assert!((n_op.expectation(&psi).re - n0).abs() <= 1e-10);
            assert!((psi.norm() - psi0.norm()).abs() <= 1e-10);
        }
        let back = prop.propagate(&prop.propagate(&psi0, 17.0), -17.0);
        assert!(back.distance(&psi0) <= 1e-10);
    }

    #[test]
    fn poisson_series_matches_evolution() {
        let cut = c(40);
        let alpha = C64::new(2.0, 0.0);
        let s = EvolutionSpec {
            initial: InitialState::BareCoherent { atom: Atom::Excited, alpha },
            ..spec(InitialState::Bare(BareLabel::g(0)), 60.0, 601)
        };
        let tr = evolve(&s, cut).unwrap();
        let w = inversion_series(alpha, s.params, cut, &tr.times).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12);
        let dev = tr.inversion.iter().zip(&w).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(dev <= 1e-9, "{dev}");
    }

    #[test]
    fn revival_near_classical_estimate() {
        let cut = c(40);
        let p = JcmParams::new(10.0, 1.0).unwrap();
        let times: Vec<f64> = (0..6001).map(|k| k as f64 * 0.01).collect();
        let w = inversion_series(C64::new(3.0, 0.0), p, cut, &times).unwrap();
        let t = find_revival(&times, &w, 9.0, 1.0).unwrap();
        let expect = 2.0 * PI * 3.0;
        assert!((t - expect).abs() <= 0.15 * expect, "revival at {t}");
    }

    #[test]
    fn spectrum_rows() {
        let p = JcmParams::new(10.0, 1.0).unwrap();
        let rep = spectrum_report(p, c(3));
        assert_eq!(rep.rows.len(), 7);
        assert_eq!(rep.rows[0].energy, 0.0);
        assert_eq!(rep.rows[1].energy, 11.0);
        assert_eq!(rep.rows[2].energy, 9.0);
        let rep = spectrum_report(p, c(12));
        assert!(rep.max_pairing_error <= 1e-10);
    }

    #[test]
    fn rejects_bad_specs() {
        let cut = c(4);
        assert!(evolve(&spec(InitialState::Bare(BareLabel::e(0)), 1.0, 1), cut).is_err());
        let k = basis_ket(BareLabel::e(0), cut).unwrap().scale(C64::new(2.0, 0.0));
        assert!(matches!(
            evolve(&spec(InitialState::Ket(k), 1.0, 10), cut),
            Err(JcmError::NotNormalized { .. })
        ));
        let coh = InitialState::Coherent(CoherentLabel::new(C64::new(3.0, 0.0), Parity::Plus));
        assert!(matches!(evolve(&spec(coh, 1.0, 10), cut), Err(JcmError::CutoffTooSmall { .. })));
    }
}
