//! Compares two ways of booking the noise of a decomposed gate against the
//! exact noisy decomposition, on density matrices.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::reference::{RefGate, ReferenceCircuit};
use crate::gates::unitary::{embed, pauli_x, pauli_y, pauli_z, CMatrix};

fn paulis_on(slots: &[usize], n: usize) -> Vec<CMatrix> {
    let singles = [pauli_x(), pauli_y(), pauli_z()];
    let mut out = vec![CMatrix::identity(1 << n, 1 << n)];
    for &s in slots {
        let mut next = Vec::with_capacity(out.len() * 4);
        for p in &out {
            next.push(p.clone());
            for m in &singles {
                next.push(embed(m, &[s], n) * p);
            }
        }
        out = next;
    }
    out.remove(0);
    out
}

/// `(1 - p) rho + p / (4^k - 1) sum_P P rho P` over the non-identity Paulis
/// on `slots`.
pub fn depolarize(rho: &CMatrix, slots: &[usize], n: usize, p: f64) -> CMatrix {
    if p == 0.0 {
        return rho.clone();
    }
    let ps = paulis_on(slots, n);
    let w = p / ps.len() as f64;
    let mut out = rho * Complex64::new(1.0 - p, 0.0);
    for m in &ps {
        out += (m * rho * m.adjoint()) * Complex64::new(w, 0.0);
    }
    out
}

pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = a - b;
    0.5 * SymmetricEigen::new(diff).eigenvalues.iter().map(|l| l.abs()).sum::<f64>()
}

fn site_rate(g: &RefGate, e_t: f64, e_s: f64) -> f64 {
    if g.is_cz() {
        e_t
    } else {
        e_s
    }
}

fn gate_matrix(g: &RefGate, n: usize) -> CMatrix {
    ReferenceCircuit {
        operands: n,
        gates: vec![*g],
    }
    .unitary()
}

/// Each constituent followed by its own depolarizing channel.
pub fn exact_noisy(circuit: &ReferenceCircuit, rho: &CMatrix, e_t: f64, e_s: f64) -> CMatrix {
    let n = circuit.operands;
    let mut r = rho.clone();
    for g in &circuit.gates {
        let u = gate_matrix(g, n);
        r = &u * r * u.adjoint();
        r = depolarize(&r, &g.slots(), n, site_rate(g, e_t, e_s));
    }
    r
}

/// Ideal unitary, then every constituent's channel in decomposition order.
pub fn sequential_after(circuit: &ReferenceCircuit, rho: &CMatrix, e_t: f64, e_s: f64) -> CMatrix {
    let n = circuit.operands;
    let u = circuit.unitary();
    let mut r = &u * rho * u.adjoint();
    for g in &circuit.gates {
        r = depolarize(&r, &g.slots(), n, site_rate(g, e_t, e_s));
    }
    r
}

/// Ideal unitary, then one depolarizing channel over all operands with the
/// same total error probability.
pub fn lumped_after(circuit: &ReferenceCircuit, rho: &CMatrix, e_t: f64, e_s: f64) -> CMatrix {
    let n = circuit.operands;
    let u = circuit.unitary();
    let clean: f64 = circuit.gates.iter().map(|g| 1.0 - site_rate(g, e_t, e_s)).product();
    let slots: Vec<usize> = (0..n).collect();
    depolarize(&(&u * rho * u.adjoint()), &slots, n, 1.0 - clean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub input: String,
    pub sequential: f64,
    pub lumped: f64,
}

/// Product state from symbols `0`, `1`, `+`, `-`, first symbol most significant.
pub fn product_density(symbols: &str) -> Result<CMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![Complex64::new(1.0, 0.0)];
    for c in symbols.chars() {
        let (a, b) = match c {
            '0' => (1.0, 0.0),
            '1' => (0.0, 1.0),
            '+' => (r, r),
            '-' => (r, -r),
            _ => return Err(Error::InvalidParameter(format!("bad state symbol {c:?}"))),
        };
        v = v
            .iter()
            .flat_map(|x| [x * a, x * b])
            .collect();
    }
    let psi = nalgebra::DVector::from_vec(v);
    Ok(&psi * psi.adjoint())
}

pub const PROBE_INPUTS: [&str; 4] = ["000", "1+0", "110", "+++"];

/// Trace distance of each booking scheme to the exact noisy circuit.
pub fn compare_calibrations(
    circuit: &ReferenceCircuit,
    inputs: &[&str],
    e_t: f64,
    e_s: f64,
) -> Result<Vec<ProbeResult>> {
    inputs
        .iter()
        .map(|s| {
            if s.chars().count() != circuit.operands {
                return Err(Error::SizeMismatch(format!(
                    "probe {s:?} does not match {} operands",
                    circuit.operands
                )));
            }
            let rho = product_density(s)?;
            let exact = exact_noisy(circuit, &rho, e_t, e_s);
            Ok(ProbeResult {
                input: s.to_string(),
                sequential: trace_distance(&sequential_after(circuit, &rho, e_t, e_s), &exact),
                lumped: trace_distance(&lumped_after(circuit, &rho, e_t, e_s), &exact),
            })
        })
        .collect()
}
