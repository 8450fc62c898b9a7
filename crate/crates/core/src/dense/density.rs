use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::dense::state::DenseState;
use crate::error::{Error, Result};
use crate::gates::unitary::CMatrix;
use crate::model::{AddressState, ClassicalData, QramGeometry, QubitRole};

pub const MAX_SUBSET: usize = 10;
const PSD_TOL: f64 = 1e-9;

/// Reduced density matrix of `qubits`, the first listed qubit as the most
/// significant bit. The state is assumed normalized.
pub fn reduced_density(state: &DenseState, qubits: &[usize]) -> Result<CMatrix> {
    let k = qubits.len();
    if k > MAX_SUBSET {
        return Err(Error::SubsetTooLarge {
            got: k,
            limit: MAX_SUBSET,
        });
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= state.qubit_count()) {
        return Err(Error::OperandOutOfRange {
            qubit: q,
            count: state.qubit_count(),
        });
    }
    // active members contribute index bits, inactive ones a fixed bit
    let mut fixed = 0usize;
    let mut active_slots: Vec<(usize, usize)> = Vec::new();
    for (s, &q) in qubits.iter().enumerate() {
        let local_bit = 1usize << (k - 1 - s);
        match state.position(q) {
            Some(j) => active_slots.push((1usize << j, local_bit)),
            None => {
                if state.classical_value(q) == Some(1) {
                    fixed |= local_bit;
                }
            }
        }
    }
    let mask: usize = active_slots.iter().map(|(b, _)| b).sum();
    let combos = 1usize << active_slots.len();
    let spread = |c: usize| -> (usize, usize) {
        let mut global = 0;
        let mut local = fixed;
        for (t, &(gb, lb)) in active_slots.iter().enumerate() {
            if c >> t & 1 == 1 {
                global |= gb;
                local |= lb;
            }
        }
        (global, local)
    };
    let table: Vec<(usize, usize)> = (0..combos).map(spread).collect();
    let dim = 1usize << k;
    let mut rho = CMatrix::zeros(dim, dim);
    let amps = state.amplitudes();
    for rest in 0..amps.len() {
        if rest & mask != 0 {
            continue;
        }
        for &(gi, li) in &table {
            let a = amps[rest | gi];
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for &(gj, lj) in &table {
                rho[(li, lj)] += a * amps[rest | gj].conj();
            }
        }
    }
    Ok(rho)
}

/// Von Neumann entropy in bits.
pub fn entanglement_entropy(rho: &CMatrix) -> Result<f64> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::WrongDimension {
            expected: rho.nrows(),
            got: rho.ncols(),
        });
    }
    let eig = SymmetricEigen::new(rho.clone());
    let mut s = 0.0;
    for &l in eig.eigenvalues.iter() {
        if l < -PSD_TOL {
            return Err(Error::NotPsd(l));
        }
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

pub fn eigenvalues(rho: &CMatrix) -> Vec<f64> {
    SymmetricEigen::new(rho.clone()).eigenvalues.iter().copied().collect()
}

/// `|<a|b>|^2` for two full state vectors.
pub fn state_fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// Ideal `sum_i alpha_i |i>|x_i>` over the address qubits and `D`, address
/// bit 1 as the most significant bit.
pub fn ideal_output(geometry: &QramGeometry, address: &AddressState, data: &ClassicalData) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << (geometry.layers() + 1)];
    for &(a, i) in address.components() {
        v[(i << 1) | data.get(i) as usize] = a;
    }
    v
}

/// `<psi_ideal| rho_AD |psi_ideal>` computed from the reduced density matrix.
pub fn dense_query_fidelity(
    state: &DenseState,
    geometry: &QramGeometry,
    address: &AddressState,
    data: &ClassicalData,
) -> Result<f64> {
    let mut qubits: Vec<usize> = (1..=geometry.layers())
        .map(|l| geometry.qubit(QubitRole::Address(l)))
        .collect();
    qubits.push(geometry.qubit(QubitRole::Data));
    let rho = reduced_density(state, &qubits)?;
    let psi = ideal_output(geometry, address, data);
    let mut f = Complex64::new(0.0, 0.0);
    for (i, pi) in psi.iter().enumerate() {
        for (j, pj) in psi.iter().enumerate() {
            f += pi.conj() * rho[(i, j)] * pj;
        }
    }
    Ok(f.re / state.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::unitary::{cz, hadamard};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn product_state_is_pure() {
        let mut s = DenseState::new(3);
        s.apply_matrix(&hadamard(), &[1]).unwrap();
        let rho = reduced_density(&s, &[1]).unwrap();
        let purity = (&rho * &rho).trace().re;
        assert!((purity - 1.0).abs() < 1e-12);
        assert!(entanglement_entropy(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn bell_marginal() {
        let mut s = DenseState::new(2);
        s.apply_matrix(&hadamard(), &[0]).unwrap();
        s.apply_matrix(&hadamard(), &[1]).unwrap();
        s.apply_matrix(&cz(), &[0, 1]).unwrap();
        s.apply_matrix(&hadamard(), &[1]).unwrap();
        let rho = reduced_density(&s, &[1]).unwrap();
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!(rho[(0, 1)].norm() < 1e-12);
        assert!((entanglement_entropy(&rho).unwrap() - 1.0).abs() < 1e-12);
        let full = reduced_density(&s, &[1, 0]).unwrap();
        assert!((full[(3, 0)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mixture_entropies() {
        let r = FRAC_1_SQRT_2;
        let plus = CMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5].map(|x| Complex64::new(x, 0.0)));
        let zero = CMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0].map(|x| Complex64::new(x, 0.0)));
        let half = (&plus + &zero) * Complex64::new(0.5, 0.0);
        let l = 0.5 * (1.0 + r);
        let want = -(l * l.log2() + (1.0 - l) * (1.0 - l).log2());
        assert!((entanglement_entropy(&half).unwrap() - want).abs() < 1e-12);
        let bad = CMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, -0.5].map(|x| Complex64::new(x, 0.0)));
        assert!(matches!(entanglement_entropy(&bad), Err(Error::NotPsd(_))));
    }

    #[test]
    fn subset_limit() {
        let s = DenseState::new(12);
        let q: Vec<usize> = (0..11).collect();
        assert!(matches!(reduced_density(&s, &q), Err(Error::SubsetTooLarge { .. })));
    }

    /// Entropy of a real symmetric 2x2 matrix from its closed-form eigenvalues.
    fn entropy_2x2(a: f64, b: f64, d: f64) -> f64 {
        let m = (a + d) / 2.0;
        let r = (((a - d) / 2.0).powi(2) + b * b).sqrt();
        [m + r, m - r].iter().filter(|&&l| l > 0.0).map(|l| -l * l.log2()).sum()
    }

    #[test]
    fn mixture_oracle_values() {
        // p|+><+| + (1-p)|0><0| = [[1 - p/2, p/2], [p/2, p/2]]
        for (p, want) in [(0.5, 0.6009), (0.25, 0.4838)] {
            let e = entropy_2x2(1.0 - p / 2.0, p / 2.0, p / 2.0);
            assert!((e - want).abs() < 1e-3, "p={p} e={e}");
        }
    }

    #[test]
    fn loaded_router_marginals() {
        use crate::dense::dense_run;
        use crate::model::{build_query_circuit, Phase};
        use crate::noise::ErrorConfiguration;
        // After loading |+++>, node 1 branches on which subtree holds the
        // lower bits. Those branch states overlap by |<0|T>|^2 = 1/4, T being
        // the loaded subtree, so the off-diagonal is 1/8. Node 2 is active
        // with probability 1/2 and then entangled with the position of bit 3
        // (overlap 1/2). A layer 3 node holds |+> with probability 1/4.
        let g = QramGeometry::new(3).unwrap();
        let c = build_query_circuit(g, &ClassicalData::zeros(&g))
            .unwrap()
            .truncated_after(Phase::AddressLoading);
        let s = dense_run(&c, &AddressState::uniform(3), &ErrorConfiguration::empty()).unwrap();
        let expect = [(1, [0.5, 0.125, 0.5]), (2, [0.75, 0.125, 0.25]), (4, [0.875, 0.125, 0.125])];
        for (node, [a, b, d]) in expect {
            let rho = reduced_density(&s, &[g.qubit(QubitRole::Control(node))]).unwrap();
            assert!((rho[(0, 0)].re - a).abs() < 1e-12, "node {node}: {rho}");
            assert!((rho[(0, 1)].re - b).abs() < 1e-12, "node {node}: {rho}");
            assert!((rho[(1, 1)].re - d).abs() < 1e-12, "node {node}: {rho}");
            let sv = entanglement_entropy(&rho).unwrap();
            assert!((sv - entropy_2x2(a, b, d)).abs() < 1e-10);
        }
    }
}
