//! Exact excitation-number block structure.
//!
//! Operators that commute with N̂ split into a 1×1 block at N = 0 (basis
//! |g,0⟩), 2×2 blocks for 1 ≤ N ≤ n_max (basis |e,N−1⟩, |g,N⟩) and the 1×1
//! leftover block at N = n_max + 1 (basis |e,n_max⟩).

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::error::{JcmError, Result};
use crate::model::{generator_weight, JcmParams};
use crate::par;
use crate::space::{BareLabel, Cutoff, LinOp, C64, EXACT_TOL, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationBlock {
    pub excitation: usize,
    pub basis: Vec<BareLabel>,
    pub matrix: DMatrix<C64>,
}

impl ExcitationBlock {
    pub fn is_leftover(&self, c: Cutoff) -> bool {
        self.excitation == c.n_max() + 1
    }
}

/// Bare basis of the excitation block `n`, in block order.
pub fn block_basis(n: usize, c: Cutoff) -> Vec<BareLabel> {
    if n == 0 {
        vec![BareLabel::g(0)]
    } else if n <= c.n_max() {
        vec![BareLabel::e(n - 1), BareLabel::g(n)]
    } else {
        assert_eq!(n, c.n_max() + 1, "no block with {n} excitations");
        vec![BareLabel::e(c.n_max())]
    }
}

fn block_indices(n: usize, c: Cutoff) -> Vec<usize> {
    block_basis(n, c)
        .into_iter()
        .map(|l| c.index(l).expect("block basis is in range"))
        .collect()
}

/// Largest |A_ij| connecting states of different excitation number.
pub fn off_block_max(op: &LinOp, c: Cutoff) -> f64 {
    let d = c.dim();
    let mut m = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if c.excitation(i) != c.excitation(j) {
                m = m.max(op.entry(i, j).norm());
            }
        }
    }
    m
}

/// Splits an excitation-conserving operator into its blocks.
pub fn block_decompose(op: &LinOp, c: Cutoff) -> Result<Vec<ExcitationBlock>> {
    if op.dim() != c.dim() {
        return Err(JcmError::Dimension {
            expected: c.dim(),
            got: op.dim(),
        });
    }
    let off = off_block_max(op, c);
    if off > EXACT_TOL {
        return Err(JcmError::Structure { max_off_block: off });
    }
    Ok(par::map_range(c.n_max() + 2, |n| {
        let idx = block_indices(n, c);
        ExcitationBlock {
            excitation: n,
            basis: block_basis(n, c),
            matrix: op.restrict(&idx),
        }
    }))
}

/// Inverse of [`block_decompose`]; entries between blocks are zero.
pub fn reassemble(blocks: &[ExcitationBlock], c: Cutoff) -> Result<LinOp> {
    let mut m = DMatrix::<C64>::zeros(c.dim(), c.dim());
    for b in blocks {
        let idx: Vec<usize> = b.basis.iter().map(|&l| c.index(l)).collect::<Result<_>>()?;
        if b.matrix.nrows() != idx.len() || b.matrix.ncols() != idx.len() {
            return Err(JcmError::Dimension {
                expected: idx.len(),
                got: b.matrix.nrows(),
            });
        }
        for (r, &i) in idx.iter().enumerate() {
            for (s, &j) in idx.iter().enumerate() {
                m[(i, j)] = b.matrix[(r, s)];
            }
        }
    }
    Ok(LinOp::from_matrix(m))
}

fn build_blocks(c: Cutoff, f: impl Fn(usize) -> DMatrix<C64> + Sync + Send) -> Vec<ExcitationBlock> {
    par::map_range(c.n_max() + 2, |n| ExcitationBlock {
        excitation: n,
        basis: block_basis(n, c),
        matrix: f(n),
    })
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Ĥ_I built block by block: [[0, λ√N], [λ√N, 0]].
pub fn interaction_blocks(p: JcmParams, c: Cutoff) -> Vec<ExcitationBlock> {
    build_blocks(c, |n| {
        if n == 0 || n > c.n_max() {
            DMatrix::from_element(1, 1, ZERO)
        } else {
            let g = re((n as f64).sqrt()) * re(p.lambda());
            DMatrix::from_row_slice(2, 2, &[ZERO, g, g, ZERO])
        }
    })
}

/// Û built block by block: (1/√2)[[1, s], [−s, 1]] with s = 2 f(N−1) √N = 1.
pub fn unitary_blocks(c: Cutoff) -> Vec<ExcitationBlock> {
    let h = re(FRAC_1_SQRT_2);
    build_blocks(c, |n| {
        if n == 0 || n > c.n_max() {
            DMatrix::from_element(1, 1, ONE)
        } else {
            let s = re(2.0) * (re(generator_weight((n - 1) as u64)) * re((n as f64).sqrt()));
            DMatrix::from_row_slice(2, 2, &[h, s * h, -s * h, h])
        }
    })
}

/// Ĥ_ID built block by block: diag(+λ√N, −λ√N); the leftover keeps the
/// truncated interaction energy 0 rather than λ√(n_max+1).
pub fn diagonal_interaction_blocks(p: JcmParams, c: Cutoff) -> Vec<ExcitationBlock> {
    build_blocks(c, |n| {
        if n == 0 || n > c.n_max() {
            DMatrix::from_element(1, 1, ZERO)
        } else {
            let e = p.lambda() * (n as f64).sqrt();
            DMatrix::from_row_slice(2, 2, &[re(e), ZERO, ZERO, re(-e)])
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonalize::{dressed_annihilation, unitary};
    use crate::model::{excitation_number, hamiltonian_full, hamiltonian_interaction};

    fn c(n: usize) -> Cutoff {
        Cutoff::new(n).unwrap()
    }

    #[test]
    fn interaction_block_at_one_excitation() {
        let cut = c(4);
        let p = JcmParams::new(3.0, 0.8).unwrap();
        let blocks = block_decompose(&hamiltonian_interaction(p, cut), cut).unwrap();
        assert_eq!(blocks.len(), cut.n_max() + 2);
        let b1 = &blocks[1];
        assert_eq!(b1.basis, vec![BareLabel::e(0), BareLabel::g(1)]);
        let want = DMatrix::from_row_slice(2, 2, &[ZERO, re(0.8), re(0.8), ZERO]);
        assert_eq!(b1.matrix, want);
        assert!(blocks.last().unwrap().is_leftover(cut));
    }

    #[test]
    fn unitary_block_at_one_excitation() {
        let cut = c(4);
        let blocks = block_decompose(&unitary(cut), cut).unwrap();
        let h = FRAC_1_SQRT_2;
        let m = &blocks[1].matrix;
        // column 2 is Û|g,1⟩ = |1,+⟩ = (|e,0⟩ + |g,1⟩)/√2
        let want = [[h, h], [-h, h]];
        for r in 0..2 {
            for s in 0..2 {
                assert!((m[(r, s)] - re(want[r][s])).norm() <= 1e-15);
            }
        }
    }

    #[test]
    fn lowering_operator_is_refused() {
        let cut = c(5);
        let err = block_decompose(&dressed_annihilation(cut), cut).unwrap_err();
        match err {
            JcmError::Structure { max_off_block } => assert!(max_off_block > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reassembly_is_exact() {
        let cut = c(9);
        let p = JcmParams::new(10.0, 1.0).unwrap();
        for op in [
            hamiltonian_interaction(p, cut),
            hamiltonian_full(p, cut),
            excitation_number(cut),
            unitary(cut),
        ] {
            let blocks = block_decompose(&op, cut).unwrap();
            assert_eq!(reassemble(&blocks, cut).unwrap().matrix(), op.matrix());
        }
    }

    #[test]
    fn native_blocks_match_dense_construction() {
        let cut = c(12);
        let p = JcmParams::new(10.0, 0.9).unwrap();
        let h = reassemble(&interaction_blocks(p, cut), cut).unwrap();
        assert_eq!(h.matrix(), hamiltonian_interaction(p, cut).matrix());
        let u = reassemble(&unitary_blocks(cut), cut).unwrap();
        assert_eq!(u.matrix(), unitary(cut).matrix());
    }
}
