//! Gate matrices. Multi-qubit matrices index basis states with the first
//! operand as the most significant bit.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const UNITARY_TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateUnitary {
    pub name: String,
    pub matrix: CMatrix,
}

impl GateUnitary {
    pub fn new(name: impl Into<String>, matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if d != matrix.ncols() || !d.is_power_of_two() || d < 2 {
            return Err(Error::WrongDimension {
                expected: d.next_power_of_two().max(2),
                got: matrix.ncols(),
            });
        }
        let dev = unitarity_deviation(&matrix);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            name: name.into(),
            matrix,
        })
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.dimension().trailing_zeros() as usize
    }
}

/// `max |U^dagger U - I|`.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let prod = m.adjoint() * m;
    let id = CMatrix::identity(m.nrows(), m.ncols());
    max_abs_diff(&prod, &id)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Deviation after removing the global phase that best aligns `a` with `b`.
pub fn phase_insensitive_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 1e-15 {
        overlap / overlap.norm()
    } else {
        c(1.0)
    };
    let aligned = a.map(|x| x / phase);
    max_abs_diff(&aligned, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoutingKind {
    UPrime,
    UDoublePrime,
    Cswap,
}

fn permutation(dim: usize, images: &[(usize, usize, f64)]) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for &(col, row, sign) in images {
        m[(row, col)] = c(sign);
    }
    m
}

/// Exact 8x8 routing matrices over `|control, target1, target2>`.
pub fn routing_unitary(kind: RoutingKind) -> GateUnitary {
    let (name, images): (&str, Vec<(usize, usize, f64)>) = match kind {
        RoutingKind::UPrime => (
            "U'",
            vec![
                (0, 0, 1.0),
                (1, 1, 1.0),
                (2, 2, 1.0),
                (3, 3, 1.0),
                (4, 4, 1.0),
                (5, 6, 1.0),
                (6, 5, 1.0),
                (7, 7, -1.0),
            ],
        ),
        RoutingKind::UDoublePrime => (
            "U''",
            vec![
                (0, 0, 1.0),
                (7, 1, -1.0),
                (2, 2, 1.0),
                (5, 3, 1.0),
                (4, 4, 1.0),
                (6, 5, 1.0),
                (3, 6, 1.0),
                (1, 7, 1.0),
            ],
        ),
        RoutingKind::Cswap => (
            "CSWAP",
            vec![
                (0, 0, 1.0),
                (1, 1, 1.0),
                (2, 2, 1.0),
                (3, 3, 1.0),
                (4, 4, 1.0),
                (5, 6, 1.0),
                (6, 5, 1.0),
                (7, 7, 1.0),
            ],
        ),
    };
    GateUnitary::new(name, permutation(8, &images)).expect("signed permutation is unitary")
}

pub fn hadamard() -> CMatrix {
    let h = c(FRAC_1_SQRT_2);
    CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_y() -> CMatrix {
    let i = Complex64::i();
    CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

pub fn ry(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
}

pub fn cz() -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(1.0), c(1.0), c(-1.0)]))
}

pub fn swap() -> CMatrix {
    permutation(4, &[(0, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 3, 1.0)])
}

/// Lifts a `k`-qubit matrix acting on `slots` into an `n`-qubit operator.
pub fn embed(gate: &CMatrix, slots: &[usize], n: usize) -> CMatrix {
    let k = slots.len();
    debug_assert_eq!(gate.nrows(), 1 << k);
    let dim = 1usize << n;
    let bit = |slot: usize| n - 1 - slot;
    let mask: usize = slots.iter().map(|&s| 1 << bit(s)).sum();
    let sub = |state: usize| -> usize {
        slots
            .iter()
            .fold(0, |acc, &s| (acc << 1) | ((state >> bit(s)) & 1))
    };
    let spread = |local: usize| -> usize {
        slots
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &s)| acc | (((local >> (k - 1 - j)) & 1) << bit(s)))
    };
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let rest = col & !mask;
        let local_in = sub(col);
        for local_out in 0..(1 << k) {
            let v = gate[(local_out, local_in)];
            if v != c(0.0) {
                out[(rest | spread(local_out), col)] += v;
            }
        }
    }
    out
}

/// 16x16 router over `(control, input, left, right)`: with the control at 1
/// the input exchanges with the right output, otherwise with the left one.
/// Each exchange is the upward-routing unitary, so `|11>` picks up a sign.
pub fn router_matrix() -> CMatrix {
    let u = routing_unitary(RoutingKind::UPrime).matrix;
    let x0 = embed(&pauli_x(), &[0], 4);
    let right = embed(&u, &[0, 1, 3], 4);
    let left = embed(&u, &[0, 1, 2], 4);
    right * &x0 * left * x0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_matrices_are_unitary_and_self_inverse() {
        for kind in [RoutingKind::UPrime, RoutingKind::Cswap] {
            let u = routing_unitary(kind).matrix;
            assert_eq!(max_abs_diff(&(&u * &u), &CMatrix::identity(8, 8)), 0.0);
        }
        let u2 = routing_unitary(RoutingKind::UDoublePrime).matrix;
        assert_eq!(unitarity_deviation(&u2), 0.0);
    }

    #[test]
    fn uprime_action() {
        let u = routing_unitary(RoutingKind::UPrime).matrix;
        assert_eq!(u[(5, 6)], c(1.0));
        assert_eq!(u[(7, 7)], c(-1.0));
        let cs = routing_unitary(RoutingKind::Cswap).matrix;
        assert_eq!(cs[(6, 5)], c(1.0));
    }

    #[test]
    fn embed_matches_kron() {
        let h = hadamard();
        let x = pauli_x();
        let kron = h.kronecker(&x);
        let emb = embed(&h, &[0], 2) * embed(&x, &[1], 2);
        assert!(max_abs_diff(&kron, &emb) < 1e-15);
        // operand order reversal equals conjugation by swap
        let s = swap();
        let cz_rev = embed(&cz(), &[1, 0], 2);
        assert!(max_abs_diff(&cz_rev, &(&s * cz() * &s)) < 1e-15);
    }

    #[test]
    fn router_routes() {
        let w = router_matrix();
        assert!(unitarity_deviation(&w) < 1e-15);
        assert!(max_abs_diff(&(&w * &w), &CMatrix::identity(16, 16)) < 1e-15);
        // |c=1, in=1, l=0, r=0> -> |1, 0, 0, 1>
        assert_eq!(w[(0b1001, 0b1100)], c(1.0));
        // |c=0, in=1, l=0, r=0> -> |0, 0, 1, 0>
        assert_eq!(w[(0b0010, 0b0100)], c(1.0));
        // |c=0, in=1, l=1, r=1> -> -|0, 1, 1, 1>
        assert_eq!(w[(0b0111, 0b0111)], c(-1.0));
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::from_element(2, 2, c(1.0));
        assert!(matches!(GateUnitary::new("bad", m), Err(Error::NotUnitary(_))));
        let m = CMatrix::identity(3, 3);
        assert!(GateUnitary::new("bad", m).is_err());
    }
}
