use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::unitary::{cz, hadamard, router_matrix, CMatrix};
use crate::model::{AddressState, CircuitIR, GateApp, GateKind, QramGeometry, QubitRole};
use crate::noise::{ErrorConfiguration, Pauli};

pub const MAX_ACTIVE: usize = 26;
const PRUNE_TOL: f64 = 1e-20;

/// State vector over the qubits that currently carry quantum information.
/// Every other qubit holds a known classical bit. Bit `j` of an amplitude
/// index belongs to `active[j]`.
#[derive(Debug, Clone)]
pub struct DenseState {
    active: Vec<usize>,
    position: Vec<Option<usize>>,
    classical: Vec<u8>,
    amps: Vec<Complex64>,
    cap: usize,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl DenseState {
    pub fn new(qubits: usize) -> Self {
        Self {
            active: Vec::new(),
            position: vec![None; qubits],
            classical: vec![0; qubits],
            amps: vec![Complex64::new(1.0, 0.0)],
            cap: MAX_ACTIVE,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn from_address(geometry: &QramGeometry, address: &AddressState) -> Result<Self> {
        address.check(geometry)?;
        let mut s = Self::new(geometry.qubit_count());
        let l = geometry.layers();
        if let [(amp, bits)] = address.components() {
            for layer in 1..=l {
                s.classical[geometry.qubit(QubitRole::Address(layer))] = address.bit(*bits, layer);
            }
            s.amps[0] = *amp;
            return Ok(s);
        }
        for layer in 1..=l {
            s.activate(geometry.qubit(QubitRole::Address(layer)))?;
        }
        s.amps.iter_mut().for_each(|a| *a = zero());
        for &(amp, bits) in address.components() {
            let mut idx = 0;
            for layer in 1..=l {
                idx |= (address.bit(bits, layer) as usize) << (layer - 1);
            }
            s.amps[idx] = amp;
        }
        Ok(s)
    }

    pub fn qubit_count(&self) -> usize {
        self.position.len()
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    pub fn is_active(&self, q: usize) -> bool {
        self.position[q].is_some()
    }

    /// Classical value of an inactive qubit.
    pub fn classical_value(&self, q: usize) -> Option<u8> {
        self.position[q].is_none().then(|| self.classical[q])
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check(&self, qubits: &[usize]) -> Result<()> {
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.qubit_count()) {
            return Err(Error::OperandOutOfRange {
                qubit: q,
                count: self.qubit_count(),
            });
        }
        Ok(())
    }

    pub fn activate(&mut self, q: usize) -> Result<usize> {
        if let Some(p) = self.position[q] {
            return Ok(p);
        }
        if self.active.len() >= self.cap {
            return Err(Error::QubitCap { cap: self.cap });
        }
        let j = self.active.len();
        let n = self.amps.len();
        let mut amps = vec![zero(); 2 * n];
        let offset = if self.classical[q] == 1 { n } else { 0 };
        amps[offset..offset + n].copy_from_slice(&self.amps);
        self.amps = amps;
        self.active.push(q);
        self.position[q] = Some(j);
        Ok(j)
    }

    /// Drops `q` from the vector if it is (numerically) in a basis state.
    pub fn try_deactivate(&mut self, q: usize) {
        let Some(j) = self.position[q] else { return };
        let bit = 1usize << j;
        let w1: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let w0 = self.norm_sqr() - w1;
        let value = if w1 < PRUNE_TOL {
            0
        } else if w0 < PRUNE_TOL {
            1
        } else {
            return;
        };
        let low = bit - 1;
        let mut amps = vec![zero(); self.amps.len() / 2];
        for (i, &a) in self.amps.iter().enumerate() {
            if (i & bit != 0) == (value == 1) {
                amps[(i & low) | ((i >> (j + 1)) << j)] = a;
            }
        }
        self.amps = amps;
        self.active.remove(j);
        self.position[q] = None;
        self.classical[q] = value;
        for (p, &other) in self.active.iter().enumerate().skip(j) {
            self.position[other] = Some(p);
        }
    }

    /// Applies a `2^k x 2^k` matrix to `qubits`, the first one as the most
    /// significant local bit.
    pub fn apply_matrix(&mut self, m: &CMatrix, qubits: &[usize]) -> Result<()> {
        self.check(qubits)?;
        let k = qubits.len();
        if m.nrows() != 1 << k || m.ncols() != 1 << k {
            return Err(Error::WrongDimension {
                expected: 1 << k,
                got: m.nrows(),
            });
        }
        let bits: Vec<usize> = qubits
            .iter()
            .map(|&q| self.activate(q).map(|p| 1usize << p))
            .collect::<Result<_>>()?;
        let mask: usize = bits.iter().sum();
        let dim = 1 << k;
        let offsets: Vec<usize> = (0..dim)
            .map(|local| {
                (0..k)
                    .filter(|&s| (local >> (k - 1 - s)) & 1 == 1)
                    .map(|s| bits[s])
                    .sum()
            })
            .collect();
        let mut buf = vec![zero(); dim];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (b, &o) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base | o];
            }
            for (r, &o) in offsets.iter().enumerate() {
                let mut acc = zero();
                for (c, &b) in buf.iter().enumerate() {
                    let v = m[(r, c)];
                    if v.re != 0.0 || v.im != 0.0 {
                        acc += v * b;
                    }
                }
                self.amps[base | o] = acc;
            }
        }
        for &q in qubits {
            self.try_deactivate(q);
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) -> Result<()> {
        self.check(&[q])?;
        match self.position[q] {
            None => {
                let v = self.classical[q];
                let phase = match (p, v) {
                    (Pauli::X, _) => Complex64::new(1.0, 0.0),
                    (Pauli::Z, 0) => Complex64::new(1.0, 0.0),
                    (Pauli::Z, _) => Complex64::new(-1.0, 0.0),
                    (Pauli::Y, 0) => Complex64::i(),
                    (Pauli::Y, _) => -Complex64::i(),
                };
                if p != Pauli::Z {
                    self.classical[q] ^= 1;
                }
                if phase != Complex64::new(1.0, 0.0) {
                    self.amps.iter_mut().for_each(|a| *a *= phase);
                }
            }
            Some(j) => {
                let bit = 1usize << j;
                for i in 0..self.amps.len() {
                    if i & bit != 0 {
                        continue;
                    }
                    let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                    let (n0, n1) = match p {
                        Pauli::X => (a1, a0),
                        Pauli::Y => (-Complex64::i() * a1, Complex64::i() * a0),
                        Pauli::Z => (a0, -a1),
                    };
                    self.amps[i] = n0;
                    self.amps[i | bit] = n1;
                }
            }
        }
        Ok(())
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(&[a, b])?;
        let (pa, pb) = (self.position[a], self.position[b]);
        self.position[a] = pb;
        self.position[b] = pa;
        if let Some(p) = pa {
            self.active[p] = b;
        }
        if let Some(p) = pb {
            self.active[p] = a;
        }
        self.classical.swap(a, b);
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(&[a, b])?;
        match (self.classical_value(a), self.classical_value(b)) {
            (Some(0), _) | (_, Some(0)) => Ok(()),
            (Some(_), _) => self.apply_pauli(b, Pauli::Z),
            (_, Some(_)) => self.apply_pauli(a, Pauli::Z),
            (None, None) => self.apply_matrix(&cz(), &[a, b]),
        }
    }

    pub fn apply_router(&mut self, ops: [usize; 4], w: &CMatrix) -> Result<()> {
        self.check(&ops)?;
        let values: Option<Vec<u8>> = ops.iter().map(|&q| self.classical_value(q)).collect();
        if let Some(values) = values {
            let col = values.iter().fold(0usize, |acc, &v| (acc << 1) | v as usize);
            let (row, amp) = (0..16)
                .map(|r| (r, w[(r, col)]))
                .find(|(_, v)| v.norm() > 0.5)
                .expect("router is a signed permutation");
            for (s, &q) in ops.iter().enumerate() {
                self.classical[q] = ((row >> (3 - s)) & 1) as u8;
            }
            if amp != Complex64::new(1.0, 0.0) {
                self.amps.iter_mut().for_each(|a| *a *= amp);
            }
            return Ok(());
        }
        self.apply_matrix(w, &ops)
    }

    pub fn apply_gate(&mut self, gate: &GateApp, w: &CMatrix) -> Result<()> {
        let q = &gate.qubits;
        match gate.kind {
            GateKind::H => self.apply_matrix(&hadamard(), &[q[0]]),
            GateKind::X | GateKind::PauliX => self.apply_pauli(q[0], Pauli::X),
            GateKind::PauliY => self.apply_pauli(q[0], Pauli::Y),
            GateKind::PauliZ => self.apply_pauli(q[0], Pauli::Z),
            GateKind::Swap => self.apply_swap(q[0], q[1]),
            GateKind::Cz => self.apply_cz(q[0], q[1]),
            GateKind::RoutingDown | GateKind::RoutingUp => {
                self.apply_router([q[0], q[1], q[2], q[3]], w)
            }
        }
    }

    /// Amplitudes over all qubits, qubit 0 as the most significant bit.
    pub fn to_full(&self) -> Result<Vec<Complex64>> {
        let n = self.qubit_count();
        if n > MAX_ACTIVE {
            return Err(Error::QubitCap { cap: MAX_ACTIVE });
        }
        let mut base = 0usize;
        for q in 0..n {
            if self.position[q].is_none() && self.classical[q] == 1 {
                base |= 1 << (n - 1 - q);
            }
        }
        let mut out = vec![zero(); 1 << n];
        for (i, &a) in self.amps.iter().enumerate() {
            let mut idx = base;
            for (j, &q) in self.active.iter().enumerate() {
                if i >> j & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            out[idx] = a;
        }
        Ok(out)
    }

    /// Projects qubit `q` onto `value` and returns the probability of that
    /// outcome. The state is left unnormalized.
    pub fn project(&mut self, q: usize, value: u8) -> Result<f64> {
        self.check(&[q])?;
        match self.position[q] {
            None => {
                if self.classical[q] == value {
                    Ok(self.norm_sqr())
                } else {
                    self.amps.iter_mut().for_each(|a| *a = zero());
                    Ok(0.0)
                }
            }
            Some(j) => {
                let bit = 1usize << j;
                let mut kept = 0.0;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if ((i & bit != 0) as u8) != value {
                        *a = zero();
                    } else {
                        kept += a.norm_sqr();
                    }
                }
                if kept > 0.0 {
                    self.try_deactivate(q);
                }
                Ok(kept)
            }
        }
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// Probability that `q` reads 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        match self.position[q] {
            None => self.classical[q] as f64 * self.norm_sqr(),
            Some(j) => self
                .amps
                .iter()
                .enumerate()
                .filter(|(i, _)| i >> j & 1 == 1)
                .map(|(_, a)| a.norm_sqr())
                .sum(),
        }
    }

    pub(crate) fn position(&self, q: usize) -> Option<usize> {
        self.position[q]
    }
}

/// Exact evolution with the same event ordering as the sparse engine.
pub fn dense_run(
    circuit: &CircuitIR,
    address: &AddressState,
    errors: &ErrorConfiguration,
) -> Result<DenseState> {
    let mut state = DenseState::from_address(circuit.geometry(), address)?;
    run_dense(&mut state, circuit, errors)?;
    Ok(state)
}

pub fn run_dense(state: &mut DenseState, circuit: &CircuitIR, errors: &ErrorConfiguration) -> Result<()> {
    let w = router_matrix();
    let mut gate_errors = errors.gate_errors.iter().peekable();
    let mut injections = errors.injections.iter().peekable();
    for (i, gate) in circuit.gates().iter().enumerate() {
        while let Some(inj) = injections.next_if(|e| e.before_gate == i) {
            state.apply_pauli(inj.qubit, inj.pauli)?;
        }
        state.apply_gate(gate, &w)?;
        while let Some(e) = gate_errors.next_if(|e| e.position == i) {
            for &(q, p) in &e.paulis {
                state.apply_pauli(q, p)?;
            }
        }
    }
    for inj in injections {
        state.apply_pauli(inj.qubit, inj.pauli)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::unitary::{pauli_x, swap};

    #[test]
    fn activation_and_pruning() {
        let mut s = DenseState::new(3);
        s.apply_matrix(&hadamard(), &[1]).unwrap();
        assert_eq!(s.active_count(), 1);
        s.apply_matrix(&hadamard(), &[1]).unwrap();
        assert_eq!(s.active_count(), 0);
        assert!((s.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        s.apply_pauli(2, Pauli::X).unwrap();
        assert_eq!(s.classical_value(2), Some(1));
    }

    #[test]
    fn swap_relabel_matches_matrix() {
        let mut a = DenseState::new(3);
        a.apply_matrix(&hadamard(), &[0]).unwrap();
        a.apply_pauli(2, Pauli::X).unwrap();
        let mut b = a.clone();
        a.apply_swap(0, 2).unwrap();
        b.apply_matrix(&swap(), &[0, 2]).unwrap();
        let (fa, fb) = (a.to_full().unwrap(), b.to_full().unwrap());
        for (x, y) in fa.iter().zip(&fb) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn pauli_fast_path_matches_matrix() {
        for p in Pauli::ALL {
            let mut a = DenseState::new(2);
            a.apply_pauli(1, p).unwrap();
            let mut b = DenseState::new(2);
            b.apply_matrix(&hadamard(), &[0]).unwrap();
            b.apply_pauli(1, p).unwrap();
            b.apply_matrix(&hadamard(), &[0]).unwrap();
            let (fa, fb) = (a.to_full().unwrap(), b.to_full().unwrap());
            for (x, y) in fa.iter().zip(&fb) {
                assert!((x - y).norm() < 1e-12, "{p}");
            }
        }
        let mut c = DenseState::new(1);
        c.apply_matrix(&pauli_x(), &[0]).unwrap();
        assert_eq!(c.classical_value(0), Some(1));
    }

    #[test]
    fn qubit_cap() {
        let mut s = DenseState::new(4).with_cap(2);
        s.apply_matrix(&hadamard(), &[0]).unwrap();
        s.apply_matrix(&hadamard(), &[1]).unwrap();
        assert!(matches!(s.apply_matrix(&hadamard(), &[2]), Err(Error::QubitCap { cap: 2 })));
    }
}
