use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::state::DenseState;
use crate::error::{Error, Result};
use crate::gates::unitary::{cz, hadamard};
use crate::noise::Pauli;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TeleportMode {
    PostSelect,
    Feedforward,
}

const GROUND_TOL: f64 = 1e-12;

fn cnot(state: &mut DenseState, control: usize, target: usize) -> Result<()> {
    state.apply_matrix(&hadamard(), &[target])?;
    state.apply_matrix(&cz(), &[control, target])?;
    state.apply_matrix(&hadamard(), &[target])
}

/// Moves the state of `source` onto `destination` through a Bell pair on
/// `(ancilla, destination)`. Returns the probability of keeping the run
/// (1/4 for post-selection on `|Phi+>`, 1 with feedforward). Source and
/// ancilla end in `|0>`.
pub fn teleport_retrieval<R: Rng + ?Sized>(
    state: &mut DenseState,
    source: usize,
    ancilla: usize,
    destination: usize,
    mode: TeleportMode,
    rng: &mut R,
) -> Result<f64> {
    for (name, q) in [("ancilla", ancilla), ("destination", destination)] {
        if q >= state.qubit_count() {
            return Err(Error::OperandOutOfRange {
                qubit: q,
                count: state.qubit_count(),
            });
        }
        if state.prob_one(q) > GROUND_TOL {
            return Err(Error::NotGround(format!("{name} qubit {q}")));
        }
    }
    state.apply_matrix(&hadamard(), &[ancilla])?;
    cnot(state, ancilla, destination)?;
    cnot(state, source, ancilla)?;
    state.apply_matrix(&hadamard(), &[source])?;

    let (m_s, m_a) = match mode {
        TeleportMode::PostSelect => (0u8, 0u8),
        TeleportMode::Feedforward => {
            let p_s = state.prob_one(source);
            let m_s = (rng.gen::<f64>() < p_s) as u8;
            let mut probe = state.clone();
            let kept = probe.project(source, m_s)?;
            let p_a = if kept > 0.0 { probe.prob_one(ancilla) / kept } else { 0.0 };
            (m_s, (rng.gen::<f64>() < p_a) as u8)
        }
    };
    let p1 = state.project(source, m_s)?;
    let p2 = if p1 > 0.0 { state.project(ancilla, m_a)? / p1 } else { 0.0 };
    let keep = p1 * p2;
    state.normalize();
    if m_a == 1 {
        state.apply_pauli(destination, Pauli::X)?;
        state.apply_pauli(ancilla, Pauli::X)?;
    }
    if m_s == 1 {
        state.apply_pauli(destination, Pauli::Z)?;
        state.apply_pauli(source, Pauli::X)?;
    }
    Ok(match mode {
        TeleportMode::PostSelect => keep,
        TeleportMode::Feedforward => 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::density::reduced_density;
    use crate::gates::unitary::{ry, CMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn prepared(gate: Option<CMatrix>) -> DenseState {
        let mut s = DenseState::new(3);
        if let Some(g) = gate {
            s.apply_matrix(&g, &[0]).unwrap();
        }
        s
    }

    #[test]
    fn post_select_keeps_a_quarter() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for gate in [None, Some(hadamard()), Some(ry(1.1))] {
            let mut s = prepared(gate);
            let before = reduced_density(&s, &[0]).unwrap();
            let keep = teleport_retrieval(&mut s, 0, 1, 2, TeleportMode::PostSelect, &mut rng).unwrap();
            assert!((keep - 0.25).abs() < 1e-12);
            let after = reduced_density(&s, &[2]).unwrap();
            for (a, b) in before.iter().zip(after.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
            assert_eq!(s.classical_value(0), Some(0));
            assert_eq!(s.classical_value(1), Some(0));
        }
    }

    #[test]
    fn feedforward_is_exact_per_shot() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let mut s = prepared(Some(ry(0.7)));
            let before = reduced_density(&s, &[0]).unwrap();
            teleport_retrieval(&mut s, 0, 1, 2, TeleportMode::Feedforward, &mut rng).unwrap();
            let after = reduced_density(&s, &[2]).unwrap();
            for (a, b) in before.iter().zip(after.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn busy_ancilla_rejected() {
        let mut s = DenseState::new(3);
        s.apply_pauli(1, Pauli::X).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            teleport_retrieval(&mut s, 0, 1, 2, TeleportMode::PostSelect, &mut rng),
            Err(Error::NotGround(_))
        ));
    }
}
