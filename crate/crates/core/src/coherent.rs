//! Oscillator, JCM and spin coherent states.
//!
//! |α,+⟩ = e^(−|α|²/2) Σ αⁿ/√n! |n,+⟩ and |α,−⟩ = e^(−|α|²/2) Σ αⁿ/√n! |n+1,−⟩
//! are right eigenstates of â_D; |ζ,n⟩ ∝ |n,+⟩ + ζ|n+1,−⟩ is the dressed
//! analogue of the two-level spin coherent state.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, Vector2};
use serde::Serialize;

use crate::diagonalize::{dressed_ket, DressedLabel, Parity};
use crate::error::{JcmError, Result};
use crate::par;
use crate::space::{basis_ket, partial_trace_unchecked, Atom, BareLabel, Cutoff, Ket, C64, ZERO};

/// Largest admissible Poisson tail beyond the cutoff.
pub const TAIL_BOUND: f64 = 1e-10;

/// Above this |α|² the vacuum amplitude e^(−|α|²/2) underflows.
const MAX_MEAN: f64 = 1400.0;

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Σ_{n > n_max} e^(−x) xⁿ/n!, summed directly from the first omitted term.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let k0 = n_max + 1;
    let mut term = (-mean + k0 as f64 * mean.ln() - ln_factorial(k0)).exp();
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        sum += term;
        k += 1;
        term *= mean / k as f64;
        if (k as f64 > mean && term <= sum * 1e-17) || term == 0.0 {
            break;
        }
    }
    sum.min(1.0)
}

/// Smallest n_max whose Poisson tail is within [`TAIL_BOUND`].
pub fn required_cutoff(mean: f64) -> usize {
    let mut n = 0;
    while poisson_tail(mean, n) > TAIL_BOUND {
        n += 1;
    }
    n
}

/// Checks that the field distribution of mean `|α|²` fits below `field_max`.
fn check_tail(alpha: C64, field_max: usize, shift: usize, c: Cutoff) -> Result<()> {
    let mean = alpha.norm_sqr();
    if mean > MAX_MEAN {
        return Err(JcmError::InvalidParams(format!(
            "|alpha|^2 = {mean} is beyond the representable range ({MAX_MEAN})"
        )));
    }
    let tail = poisson_tail(mean, field_max);
    if tail > TAIL_BOUND {
        return Err(JcmError::CutoffTooSmall {
            n_max: c.n_max(),
            required: required_cutoff(mean) + shift,
            tail,
            bound: TAIL_BOUND,
        });
    }
    Ok(())
}

/// c_n = e^(−|α|²/2) αⁿ/√n! for n < len, by upward recurrence.
pub fn coherent_amplitudes(alpha: C64, len: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(len);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..len {
        out.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// Same recurrence without the Gaussian prefactor: αⁿ/√n!.
fn weighted_amplitudes(alpha: C64, len: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(len);
    let mut c = C64::new(1.0, 0.0);
    for n in 0..len {
        out.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// Field amplitudes of |α⟩ over photon numbers 0..=n_max.
pub fn coherent_field(alpha: C64, c: Cutoff) -> Result<Vec<C64>> {
    check_tail(alpha, c.n_max(), 0, c)?;
    Ok(coherent_amplitudes(alpha, c.n_max() + 1))
}

/// |atom⟩ ⊗ |α⟩.
pub fn bare_coherent(atom: Atom, alpha: C64, c: Cutoff) -> Result<Ket> {
    let field = coherent_field(alpha, c)?;
    let mut k = Ket::zeros(c.dim());
    for (n, amp) in field.into_iter().enumerate() {
        k.amplitudes_mut()[2 * n + atom.offset()] = amp;
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentLabel {
    pub alpha: C64,
    pub parity: Parity,
}

impl CoherentLabel {
    pub fn new(alpha: C64, parity: Parity) -> Self {
        Self { alpha, parity }
    }
}

/// |α,±⟩. The − family starts at |1,−⟩, so its field distribution must fit
/// one excitation below the cutoff.
pub fn jcm_coherent(label: CoherentLabel, c: Cutoff) -> Result<Ket> {
    let shift = match label.parity {
        Parity::Plus => 0,
        Parity::Minus => 1,
    };
    check_tail(label.alpha, c.n_max() - shift, shift, c)?;
    let amps = coherent_amplitudes(label.alpha, c.n_max() + 1 - shift);
    Ok(dressed_superposition(&amps, label.parity, c))
}

/// Σ amps[k] |k + shift, parity⟩ assembled directly in the bare basis.
fn dressed_superposition(amps: &[C64], parity: Parity, c: Cutoff) -> Ket {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = Ket::zeros(c.dim());
    let v = k.amplitudes_mut();
    for (m, &a) in amps.iter().enumerate() {
        let n = match parity {
            Parity::Plus => m,
            Parity::Minus => m + 1,
        };
        if n == 0 {
            v[0] = a;
            continue;
        }
        let x = a * h;
        v[2 * (n - 1) + 1] = x;
        v[2 * n] = match parity {
            Parity::Plus => x,
            Parity::Minus => -x,
        };
    }
    k
}

/// |α,±⟩ built as Û(|g or e⟩ ⊗ |α⟩).
pub fn jcm_coherent_via_unitary(label: CoherentLabel, c: Cutoff) -> Result<Ket> {
    let atom = match label.parity {
        Parity::Plus => Atom::Ground,
        Parity::Minus => Atom::Excited,
    };
    let bare = bare_coherent(atom, label.alpha, c)?;
    Ok(crate::diagonalize::unitary(c).apply(&bare))
}

/// Residual report of the overcompleteness quadrature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessReport {
    pub probe_dim: usize,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// max |R_ij − δ_ij| over the probe labels.
    pub max_residual: f64,
    /// ⟨0,+|R|0,+⟩
    pub vacuum_diagonal: f64,
    /// |⟨1,+|R|2,−⟩|, or 0 when the probe is too small to hold both labels.
    pub cross_parity: f64,
    /// Probe labels in dressed output order.
    #[serde(skip)]
    pub labels: Vec<DressedLabel>,
    /// Integrated operator in the dressed probe basis.
    #[serde(skip)]
    pub matrix: DMatrix<C64>,
}

/// Minimal (radial, angular) node counts for a probe with photon index ≤ `probe_dim`.
pub fn required_quadrature(probe_dim: usize) -> (usize, usize) {
    (probe_dim + 1, 2 * probe_dim + 1)
}

/// Integrates (d²α/π)(|α,+⟩⟨α,+| + |α,−⟩⟨α,−|) over the dressed labels with
/// n ≤ `probe_dim`. The radial integral uses Gauss-Laguerre nodes in u = |α|²
/// (weight e^(−u), exact to polynomial degree 2M−1); the angular integral is
/// a uniform K-point rule, exact for e^(ikθ) with |k| < K.
pub fn completeness_check(
    c: Cutoff,
    radial_nodes: usize,
    angular_nodes: usize,
    probe_dim: usize,
) -> Result<CompletenessReport> {
    if probe_dim > c.n_max() {
        return Err(JcmError::OutOfRange {
            n: probe_dim,
            n_max: c.n_max(),
        });
    }
    let (req_r, req_a) = required_quadrature(probe_dim);
    if radial_nodes < req_r || angular_nodes < req_a {
        return Err(JcmError::Quadrature {
            radial: radial_nodes,
            angular: angular_nodes,
            required_radial: req_r,
            required_angular: req_a,
        });
    }

    let labels: Vec<DressedLabel> = crate::diagonalize::dressed_labels(c)
        .into_iter()
        .filter(|l| l.n() <= probe_dim)
        .collect();
    let dim = labels.len();
    let (nodes, weights) = gauss_laguerre(radial_nodes);

    let per_radius: Vec<DMatrix<C64>> = par::map_range(radial_nodes, |k| {
        let r = nodes[k].sqrt();
        let w = weights[k] / angular_nodes as f64;
        let mut acc = DMatrix::<C64>::zeros(dim, dim);
        for j in 0..angular_nodes {
            let theta = 2.0 * PI * j as f64 / angular_nodes as f64;
            let alpha = C64::from_polar(r, theta);
            let amps = weighted_amplitudes(alpha, probe_dim + 1);
            // ⟨label|α,+⟩ and ⟨label|α,−⟩
            let plus: Vec<C64> = labels
                .iter()
                .map(|l| if l.parity() == Parity::Plus { amps[l.n()] } else { ZERO })
                .collect();
            let minus: Vec<C64> = labels
                .iter()
                .map(|l| if l.parity() == Parity::Minus { amps[l.n() - 1] } else { ZERO })
                .collect();
            for a in 0..dim {
                for b in 0..dim {
                    acc[(a, b)] += (plus[a] * plus[b].conj() + minus[a] * minus[b].conj()) * w;
                }
            }
        }
        acc
    });
    let matrix = par::pairwise_sum(&per_radius, &DMatrix::zeros(dim, dim), &|a, b| a + b);

    let mut max_residual = 0.0f64;
    for a in 0..dim {
        for b in 0..dim {
            let target = if a == b { 1.0 } else { 0.0 };
            max_residual = max_residual.max((matrix[(a, b)] - C64::new(target, 0.0)).norm());
        }
    }
    let pos = |n, p| labels.iter().position(|l| l.n() == n && l.parity() == p);
    let cross_parity = match (pos(1, Parity::Plus), pos(2, Parity::Minus)) {
        (Some(a), Some(b)) => matrix[(a, b)].norm(),
        _ => 0.0,
    };
    Ok(CompletenessReport {
        probe_dim,
        radial_nodes,
        angular_nodes,
        max_residual,
        vacuum_diagonal: matrix[(0, 0)].re,
        cross_parity,
        labels,
        matrix,
    })
}

/// Laguerre polynomial L_m(x) and L_{m−1}(x) by the three-term recurrence.
fn laguerre_pair(m: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 1..m {
        let next = ((2 * k + 1) as f64 - x) * cur / (k + 1) as f64 - k as f64 * prev / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Gauss-Laguerre nodes and weights for ∫₀^∞ e^(−u) g(u) du.
///
/// Nodes start from the Golub-Welsch eigenvalues and are polished by Newton
/// steps on L_m; weights use w = x / (m² L_{m−1}(x)²).
pub fn gauss_laguerre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let jacobi = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            (2 * i + 1) as f64
        } else if i.abs_diff(j) == 1 {
            i.max(j) as f64
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = nalgebra::SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let mut weights = Vec::with_capacity(m);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (lm, lm1) = laguerre_pair(m, *x);
            // x L'_m(x) = m (L_m − L_{m−1})
            let deriv = m as f64 * (lm - lm1) / *x;
            if deriv == 0.0 {
                break;
            }
            *x -= lm / deriv;
        }
        let (_, lm1) = laguerre_pair(m, *x);
        weights.push(*x / ((m * m) as f64 * lm1 * lm1));
    }
    (nodes, weights)
}

/// |ζ⟩ = (1+|ζ|²)^(−1/2)(|g⟩ + ζ|e⟩) in (g, e) order.
pub fn spin_coherent_atom(zeta: C64) -> Vector2<C64> {
    let norm = (1.0 + zeta.norm_sqr()).sqrt().recip();
    Vector2::new(C64::new(norm, 0.0), zeta * norm)
}

/// ⟨ζ|σ₋|ζ⟩ evaluated on the two-level state.
pub fn atom_sigma_minus_expectation(state: &Vector2<C64>) -> C64 {
    // σ₋ = |g⟩⟨e|
    state[0].conj() * state[1]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinCoherentLabel {
    pub zeta: C64,
    pub n: usize,
}

impl SpinCoherentLabel {
    pub fn new(zeta: C64, n: usize) -> Self {
        Self { zeta, n }
    }
}

/// |ζ,n⟩ = (1+|ζ|²)^(−1/2)(|n,+⟩ + ζ|n+1,−⟩).
pub fn jcm_spin_coherent(label: SpinCoherentLabel, c: Cutoff) -> Result<Ket> {
    if label.n + 1 > c.n_max() {
        return Err(JcmError::OutOfRange {
            n: label.n + 1,
            n_max: c.n_max(),
        });
    }
    let atom = spin_coherent_atom(label.zeta);
    let plus = dressed_ket(DressedLabel::new(label.n, Parity::Plus)?, c)?;
    let minus = dressed_ket(DressedLabel::new(label.n + 1, Parity::Minus)?, c)?;
    Ok(&plus.scale(atom[0]) + &minus.scale(atom[1]))
}

/// Û(|ζ⟩ ⊗ |n⟩).
pub fn jcm_spin_coherent_via_unitary(label: SpinCoherentLabel, c: Cutoff) -> Result<Ket> {
    let atom = spin_coherent_atom(label.zeta);
    let g = basis_ket(BareLabel::g(label.n), c)?;
    let e = basis_ket(BareLabel::e(label.n), c)?;
    let bare = &g.scale(atom[0]) + &e.scale(atom[1]);
    Ok(crate::diagonalize::unitary(c).apply(&bare))
}

/// Von Neumann entropy of the reduced atom state, in nats.
pub fn entanglement_entropy(ket: &Ket) -> Result<f64> {
    ket.check_normalized()?;
    Ok(entropy_unchecked(ket))
}

/// Eigenvalues below 1e-14 or at 1 and above contribute nothing, so round-off
/// cannot push the entropy negative.
pub(crate) fn entropy_unchecked(ket: &Ket) -> f64 {
    let rho = partial_trace_unchecked(ket);
    let (a, d) = (rho[(0, 0)].re, rho[(1, 1)].re);
    let b = rho[(0, 1)].norm_sqr();
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b).sqrt();
    [(tr + disc) / 2.0, (tr - disc) / 2.0]
        .into_iter()
        .map(|p| if (1e-14..1.0).contains(&p) { -p * p.ln() } else { 0.0 })
        .sum()
}

pub fn nats_to_bits(s: f64) -> f64 {
    s / LN_2
}

/// |⟨ψ_sc|α,±⟩|² with ψ_sc = 2^(−1/2)(|e⟩ ± |g⟩) ⊗ |α⟩.
pub fn semiclassical_fidelity(label: CoherentLabel, c: Cutoff) -> Result<f64> {
    let jcm = jcm_coherent(label, c)?;
    let e = bare_coherent(Atom::Excited, label.alpha, c)?;
    let g = bare_coherent(Atom::Ground, label.alpha, c)?;
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let sc = &e.scale(h) + &g.scale(h * label.parity.sign());
    Ok(sc.inner(&jcm).norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonalize::{dressed_annihilation, dressed_lowering};
    use crate::space::ladder_ops;

    fn c(n: usize) -> Cutoff {
        Cutoff::new(n).unwrap()
    }

    #[test]
    fn vacuum_coherent_state() {
        let f = coherent_field(ZERO, c(5)).unwrap();
        assert_eq!(f[0], C64::new(1.0, 0.0));
        assert!(f[1..].iter().all(|z| *z == ZERO));
        let k = jcm_coherent(CoherentLabel::new(ZERO, Parity::Plus), c(5)).unwrap();
        assert_eq!(k, basis_ket(BareLabel::g(0), c(5)).unwrap());
    }

    #[test]
    fn field_eigenvalue_and_mean() {
        let cut = c(40);
        let alpha = C64::new(1.5, 0.0);
        let k = bare_coherent(Atom::Ground, alpha, cut).unwrap();
        let l = ladder_ops(cut);
        assert!(l.a.apply(&k).distance(&k.scale(alpha)) <= 1e-9);
        // Poisson mean from the truncated series, summed independently
        let mean: f64 = (0..=40)
            .map(|n| n as f64 * (-2.25f64).exp() * 2.25f64.powi(n) / (1..=n).map(|k| k as f64).product::<f64>())
            .sum();
        let n_exp = (&l.a_dag * &l.a).expectation(&k).re;
        assert!((n_exp - 2.25).abs() <= 1e-9);
        assert!((n_exp - mean).abs() <= 1e-12);
        assert!((k.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn tail_violation_reports_cutoff() {
        let err = coherent_field(C64::new(3.0, 0.0), c(10)).unwrap_err();
        match err {
            JcmError::CutoffTooSmall { required, .. } => {
                assert!(poisson_tail(9.0, required) <= TAIL_BOUND);
                assert!(poisson_tail(9.0, required - 1) > TAIL_BOUND);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn poisson_tail_matches_complement() {
        for &(x, n) in &[(1.0, 3usize), (4.0, 6), (9.0, 20)] {
            let head: f64 = (0..=n)
                .map(|k| (-x + k as f64 * f64::ln(x) - ln_factorial(k)).exp())
                .sum();
            assert!((poisson_tail(x, n) - (1.0 - head)).abs() < 1e-14);
        }
    }

    #[test]
    fn jcm_coherent_eigenstates() {
        let cut = c(40);
        let ad = dressed_annihilation(cut);
        let alpha = C64::new(1.0, 0.5);
        for parity in [Parity::Plus, Parity::Minus] {
            let k = jcm_coherent(CoherentLabel::new(alpha, parity), cut).unwrap();
            assert!(ad.apply(&k).distance(&k.scale(alpha)) <= 1e-9);
        }
    }

    #[test]
    fn families_are_orthogonal_exactly() {
        let cut = c(30);
        let p = jcm_coherent(CoherentLabel::new(C64::new(1.2, 0.0), Parity::Plus), cut).unwrap();
        let m = jcm_coherent(CoherentLabel::new(C64::new(0.0, 0.7), Parity::Minus), cut).unwrap();
        assert_eq!(p.inner(&m), ZERO);
    }

    #[test]
    fn unitary_connection() {
        let cut = c(30);
        for parity in [Parity::Plus, Parity::Minus] {
            let l = CoherentLabel::new(C64::new(-0.8, 1.1), parity);
            let direct = jcm_coherent(l, cut).unwrap();
            let via = jcm_coherent_via_unitary(l, cut).unwrap();
            assert!(direct.distance(&via) <= 1e-10);
        }
    }

    #[test]
    fn gauss_laguerre_moments() {
        // ∫ e^{-u} u^k du = k!, exact for k ≤ 2m − 1
        for m in [1, 4, 12, 32] {
            let (x, w) = gauss_laguerre(m);
            for k in 0..(2 * m).min(20) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = ln_factorial(k).exp();
                assert!((q / exact - 1.0).abs() < 1e-12, "m={m} k={k} q={q}");
            }
        }
    }

    #[test]
    fn completeness_quadrature() {
        let rep = completeness_check(c(24), 32, 64, 6).unwrap();
        assert!(rep.max_residual <= 1e-9, "{}", rep.max_residual);
        assert!((rep.vacuum_diagonal - 1.0).abs() <= 1e-10);
        assert!(rep.cross_parity <= 1e-10);
        assert_eq!(rep.labels.len(), 13);
    }

    #[test]
    fn completeness_refuses_low_order() {
        let err = completeness_check(c(24), 3, 64, 6).unwrap_err();
        assert_eq!(
            err,
            JcmError::Quadrature { radial: 3, angular: 64, required_radial: 7, required_angular: 13 }
        );
        assert!(completeness_check(c(24), 7, 12, 6).is_err());
        assert!(completeness_check(c(24), 7, 13, 6).unwrap().max_residual < 1e-12);
    }

    #[test]
    fn spin_coherent_atom_expectations() {
        let s = spin_coherent_atom(ZERO);
        assert_eq!(s, Vector2::new(C64::new(1.0, 0.0), ZERO));
        let s = spin_coherent_atom(C64::new(1.0, 0.0));
        assert!((atom_sigma_minus_expectation(&s) - C64::new(0.5, 0.0)).norm() < 1e-15);
        let s = spin_coherent_atom(C64::new(0.0, 2.0));
        assert!((atom_sigma_minus_expectation(&s) - C64::new(0.0, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn jcm_spin_coherent_properties() {
        let cut = c(8);
        let k = jcm_spin_coherent(SpinCoherentLabel::new(ZERO, 2), cut).unwrap();
        assert_eq!(k, dressed_ket(DressedLabel::new(2, Parity::Plus).unwrap(), cut).unwrap());

        let sd = dressed_lowering(cut);
        let k = jcm_spin_coherent(SpinCoherentLabel::new(C64::new(1.0, 0.0), 0), cut).unwrap();
        assert!((sd.expectation(&k) - C64::new(0.5, 0.0)).norm() <= 1e-12);

        let l = SpinCoherentLabel::new(C64::new(0.3, -0.4), 3);
        let direct = jcm_spin_coherent(l, cut).unwrap();
        assert!(direct.distance(&jcm_spin_coherent_via_unitary(l, cut).unwrap()) <= 1e-12);

        assert!(jcm_spin_coherent(SpinCoherentLabel::new(ZERO, 8), cut).is_err());
    }

    #[test]
    fn entropy_examples() {
        let cut = c(10);
        let g0 = dressed_ket(DressedLabel::new(0, Parity::Plus).unwrap(), cut).unwrap();
        assert_eq!(entanglement_entropy(&g0).unwrap(), 0.0);
        let one = dressed_ket(DressedLabel::new(1, Parity::Plus).unwrap(), cut).unwrap();
        assert!((entanglement_entropy(&one).unwrap() - LN_2).abs() <= 1e-10);
        assert!((nats_to_bits(entanglement_entropy(&one).unwrap()) - 1.0).abs() <= 1e-10);
        assert!(entanglement_entropy(&one.scale(C64::new(1.1, 0.0))).is_err());
    }

    #[test]
    fn semiclassical_limit() {
        let cut = c(80);
        let s = |r: f64| {
            entanglement_entropy(&jcm_coherent(CoherentLabel::new(C64::new(r, 0.0), Parity::Plus), cut).unwrap())
                .unwrap()
        };
        assert!(s(6.0) < s(3.0));
        let f = semiclassical_fidelity(CoherentLabel::new(C64::new(6.0, 0.0), Parity::Plus), cut).unwrap();
        assert!(f >= 0.99, "{f}");
    }
}
