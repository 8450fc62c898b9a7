use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{AddressState, GateApp, GateKind, QramGeometry};
use crate::noise::Pauli;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Tag {
    Zero,
    One,
    Plus,
    Minus,
}

impl Tag {
    pub fn is_computational(self) -> bool {
        matches!(self, Tag::Zero | Tag::One)
    }

    pub fn symbol(self) -> char {
        match self {
            Tag::Zero => '0',
            Tag::One => '1',
            Tag::Plus => '+',
            Tag::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        Some(match c {
            '0' => Tag::Zero,
            '1' => Tag::One,
            '+' => Tag::Plus,
            '-' => Tag::Minus,
            _ => return None,
        })
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Tag::Zero
        } else {
            Tag::One
        }
    }

    /// `<self|other>`; always real.
    pub fn overlap(self, other: Tag) -> f64 {
        use Tag::*;
        match (self, other) {
            (a, b) if a == b => 1.0,
            (Zero, One) | (One, Zero) | (Plus, Minus) | (Minus, Plus) => 0.0,
            (One, Minus) | (Minus, One) => -FRAC_1_SQRT_2,
            _ => FRAC_1_SQRT_2,
        }
    }

    /// Amplitudes on `|0>` and `|1>`.
    pub fn vector(self) -> [f64; 2] {
        match self {
            Tag::Zero => [1.0, 0.0],
            Tag::One => [0.0, 1.0],
            Tag::Plus => [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            Tag::Minus => [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        }
    }

    pub fn apply_pauli(self, p: Pauli) -> (Tag, Complex64) {
        use Tag::*;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        match (p, self) {
            (Pauli::X, Zero) => (One, one),
            (Pauli::X, One) => (Zero, one),
            (Pauli::X, Plus) => (Plus, one),
            (Pauli::X, Minus) => (Minus, -one),
            (Pauli::Z, Zero) => (Zero, one),
            (Pauli::Z, One) => (One, -one),
            (Pauli::Z, Plus) => (Minus, one),
            (Pauli::Z, Minus) => (Plus, one),
            (Pauli::Y, Zero) => (One, i),
            (Pauli::Y, One) => (Zero, -i),
            (Pauli::Y, Plus) => (Minus, -i),
            (Pauli::Y, Minus) => (Plus, i),
        }
    }

    pub fn hadamard(self) -> Tag {
        match self {
            Tag::Zero => Tag::Plus,
            Tag::Plus => Tag::Zero,
            Tag::One => Tag::Minus,
            Tag::Minus => Tag::One,
        }
    }
}

pub const DEFAULT_CAP_FACTOR: usize = 4;

/// A sum of product states whose factors are `|0>`, `|1>`, `|+>` or `|->`.
/// Tags are stored row-major, `qubits` entries per component.
#[derive(Debug, Clone, PartialEq)]
pub struct EcsState {
    qubits: usize,
    tags: Vec<Tag>,
    amps: Vec<Complex64>,
    cap: usize,
}

impl EcsState {
    pub fn init_state(geometry: &QramGeometry, address: &AddressState) -> Result<Self> {
        address.check(geometry)?;
        let q = geometry.qubit_count();
        let l = geometry.layers();
        let mut tags = vec![Tag::Zero; q * address.len()];
        let mut amps = Vec::with_capacity(address.len());
        for (k, &(amp, bits)) in address.components().iter().enumerate() {
            for layer in 1..=l {
                tags[k * q + layer - 1] = Tag::from_bit(address.bit(bits, layer));
            }
            amps.push(amp);
        }
        Ok(Self {
            qubits: q,
            tags,
            amps,
            cap: (DEFAULT_CAP_FACTOR * address.len()).max(1),
        })
    }

    pub fn from_components(qubits: usize, components: Vec<(Complex64, Vec<Tag>)>) -> Result<Self> {
        let mut tags = Vec::with_capacity(qubits * components.len());
        let mut amps = Vec::with_capacity(components.len());
        for (amp, t) in components {
            if t.len() != qubits {
                return Err(Error::WrongDimension {
                    expected: qubits,
                    got: t.len(),
                });
            }
            tags.extend(t);
            amps.push(amp);
        }
        let cap = (DEFAULT_CAP_FACTOR * amps.len()).max(1);
        Ok(Self {
            qubits,
            tags,
            amps,
            cap,
        })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap.max(self.len());
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amps[k]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn tags(&self, k: usize) -> &[Tag] {
        &self.tags[k * self.qubits..(k + 1) * self.qubits]
    }

    pub fn tag(&self, k: usize, q: usize) -> Tag {
        self.tags[k * self.qubits + q]
    }

    fn set(&mut self, k: usize, q: usize, t: Tag) {
        self.tags[k * self.qubits + q] = t;
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    pub(crate) fn retain_components(&mut self, keep: &[bool]) {
        let q = self.qubits;
        let mut w = 0;
        for k in 0..self.len() {
            if keep[k] {
                if w != k {
                    self.amps[w] = self.amps[k];
                    self.tags.copy_within(k * q..(k + 1) * q, w * q);
                }
                w += 1;
            }
        }
        self.amps.truncate(w);
        self.tags.truncate(w * q);
    }

    pub(crate) fn set_tag(&mut self, k: usize, q: usize, t: Tag) {
        self.set(k, q, t);
    }

    pub(crate) fn amplitude_mut(&mut self, k: usize) -> &mut Complex64 {
        &mut self.amps[k]
    }

    fn check_operands(&self, qubits: &[usize]) -> Result<()> {
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.qubits) {
            return Err(Error::OperandOutOfRange {
                qubit: q,
                count: self.qubits,
            });
        }
        Ok(())
    }

    /// Rewrites a `|+>`/`|->` factor of component `k` on qubit `q` as two
    /// computational components. The `|1>` half is appended at the end.
    fn split(&mut self, k: usize, q: usize) -> Result<()> {
        let t = self.tag(k, q);
        debug_assert!(!t.is_computational());
        if self.len() >= self.cap {
            return Err(Error::ComponentCap { cap: self.cap });
        }
        let sign = if t == Tag::Minus { -1.0 } else { 1.0 };
        let amp = self.amps[k] * FRAC_1_SQRT_2;
        self.amps[k] = amp;
        self.set(k, q, Tag::Zero);
        let start = k * self.qubits;
        self.tags.extend_from_within(start..start + self.qubits);
        let n = self.len();
        self.amps.push(amp * sign);
        self.set(n, q, Tag::One);
        Ok(())
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) -> Result<()> {
        self.check_operands(&[q])?;
        for k in 0..self.len() {
            let (t, phase) = self.tag(k, q).apply_pauli(p);
            self.set(k, q, t);
            self.amps[k] *= phase;
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_operands(&[q])?;
        for k in 0..self.len() {
            let t = self.tag(k, q).hadamard();
            self.set(k, q, t);
        }
        Ok(())
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_operands(&[a, b])?;
        let q = self.qubits;
        for k in 0..self.len() {
            self.tags.swap(k * q + a, k * q + b);
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_operands(&[a, b])?;
        let mut k = 0;
        while k < self.len() {
            let (ta, tb) = (self.tag(k, a), self.tag(k, b));
            if ta == Tag::Zero || tb == Tag::Zero {
                k += 1;
            } else if ta == Tag::One {
                let (t, ph) = tb.apply_pauli(Pauli::Z);
                self.set(k, b, t);
                self.amps[k] *= ph;
                k += 1;
            } else if tb == Tag::One {
                let (t, ph) = ta.apply_pauli(Pauli::Z);
                self.set(k, a, t);
                self.amps[k] *= ph;
                k += 1;
            } else {
                self.split(k, a)?;
            }
        }
        Ok(())
    }

    /// Router on `(control, input, left, right)`: the input exchanges with the
    /// right output when the control is `|1>` and with the left one otherwise,
    /// with a sign when both exchanged qubits are `|1>`.
    pub fn apply_router(&mut self, ops: [usize; 4]) -> Result<()> {
        self.check_operands(&ops)?;
        let [c, input, left, right] = ops;
        let mut k = 0;
        while k < self.len() {
            let tc = self.tag(k, c);
            if !tc.is_computational() {
                self.split(k, c)?;
                continue;
            }
            let out = if tc == Tag::One { right } else { left };
            let (ti, to) = (self.tag(k, input), self.tag(k, out));
            if !ti.is_computational() {
                self.split(k, input)?;
                continue;
            }
            if !to.is_computational() {
                self.split(k, out)?;
                continue;
            }
            match (ti, to) {
                (Tag::One, Tag::One) => self.amps[k] = -self.amps[k],
                (Tag::Zero, Tag::Zero) => {}
                _ => {
                    self.set(k, input, to);
                    self.set(k, out, ti);
                }
            }
            k += 1;
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &GateApp) -> Result<()> {
        let q = &gate.qubits;
        match gate.kind {
            GateKind::H => self.apply_h(q[0]),
            GateKind::X | GateKind::PauliX => self.apply_pauli(q[0], Pauli::X),
            GateKind::PauliY => self.apply_pauli(q[0], Pauli::Y),
            GateKind::PauliZ => self.apply_pauli(q[0], Pauli::Z),
            GateKind::Swap => self.apply_swap(q[0], q[1]),
            GateKind::Cz => self.apply_cz(q[0], q[1]),
            GateKind::RoutingDown | GateKind::RoutingUp => self.apply_router([q[0], q[1], q[2], q[3]]),
        }
    }

    /// Merges components with identical tags and drops zero amplitudes.
    pub fn canonicalize(&mut self) {
        let q = self.qubits;
        let mut index: HashMap<&[Tag], usize> = HashMap::new();
        let mut amps: Vec<Complex64> = Vec::new();
        let mut order: Vec<usize> = Vec::new();
        for k in 0..self.amps.len() {
            let key = &self.tags[k * q..(k + 1) * q];
            match index.get(key) {
                Some(&slot) => amps[slot] += self.amps[k],
                None => {
                    index.insert(key, amps.len());
                    amps.push(self.amps[k]);
                    order.push(k);
                }
            }
        }
        let mut tags = Vec::with_capacity(order.len() * q);
        let mut kept = Vec::with_capacity(order.len());
        for (slot, &k) in order.iter().enumerate() {
            if amps[slot].norm() > 0.0 {
                tags.extend_from_slice(&self.tags[k * q..(k + 1) * q]);
                kept.push(amps[slot]);
            }
        }
        self.tags = tags;
        self.amps = kept;
    }

    /// `<other|self>`.
    pub fn inner(&self, other: &EcsState) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for l in 0..other.len() {
            for k in 0..self.len() {
                let ov = tag_overlap(other.tags(l), self.tags(k));
                if ov != 0.0 {
                    total += other.amps[l].conj() * self.amps[k] * ov;
                }
            }
        }
        total
    }

    /// Squared norm via the Gram sum over components with identical tags
    /// grouped first.
    pub fn norm_sqr(&self) -> f64 {
        let q = self.qubits;
        let mut index: HashMap<&[Tag], usize> = HashMap::new();
        let mut groups: Vec<(&[Tag], Complex64)> = Vec::new();
        for k in 0..self.len() {
            let t = &self.tags[k * q..(k + 1) * q];
            match index.get(t) {
                Some(&g) => groups[g].1 += self.amps[k],
                None => {
                    index.insert(t, groups.len());
                    groups.push((t, self.amps[k]));
                }
            }
        }
        gram_sum(&groups)
    }

    /// Dense amplitudes over all qubits, qubit 0 as the most significant bit.
    pub fn materialize(&self) -> Result<Vec<Complex64>> {
        if self.qubits > 26 {
            return Err(Error::QubitCap { cap: 26 });
        }
        let dim = 1usize << self.qubits;
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for k in 0..self.len() {
            let mut terms: Vec<(usize, f64)> = vec![(0, 1.0)];
            for &t in self.tags(k) {
                let v = t.vector();
                let mut next = Vec::with_capacity(terms.len() * 2);
                for (idx, a) in terms {
                    if v[0] != 0.0 {
                        next.push((idx << 1, a * v[0]));
                    }
                    if v[1] != 0.0 {
                        next.push(((idx << 1) | 1, a * v[1]));
                    }
                }
                terms = next;
            }
            for (idx, a) in terms {
                out[idx] += self.amps[k] * a;
            }
        }
        Ok(out)
    }

    /// One line per component: `<re> <im> <tags>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for k in 0..self.len() {
            let a = self.amps[k];
            let tags: String = self.tags(k).iter().map(|t| t.symbol()).collect();
            let _ = writeln!(out, "{:.12} {:.12} {}", a.re, a.im, tags);
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut components = Vec::new();
        let mut qubits = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: n + 1,
                msg: msg.to_string(),
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(err("expected `<re> <im> <tags>`"));
            }
            let re = f[0].parse().map_err(|_| err("bad real part"))?;
            let im = f[1].parse().map_err(|_| err("bad imaginary part"))?;
            let tags = f[2]
                .chars()
                .map(Tag::from_symbol)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err("bad tag symbol"))?;
            if *qubits.get_or_insert(tags.len()) != tags.len() {
                return Err(err("inconsistent tag length"));
            }
            components.push((Complex64::new(re, im), tags));
        }
        Self::from_components(qubits.unwrap_or(0), components)
    }
}

pub fn tag_overlap(bra: &[Tag], ket: &[Tag]) -> f64 {
    let mut acc = 1.0;
    for (&b, &k) in bra.iter().zip(ket) {
        if b != k {
            acc *= b.overlap(k);
            if acc == 0.0 {
                return 0.0;
            }
        }
    }
    acc
}

/// `sum_{g,h} s_g conj(s_h) <T_h|T_g>` over grouped components.
pub(crate) fn gram_sum(groups: &[(&[Tag], Complex64)]) -> f64 {
    let mut total = 0.0;
    for (g, &(tg, sg)) in groups.iter().enumerate() {
        if sg.norm_sqr() == 0.0 {
            continue;
        }
        total += sg.norm_sqr();
        for &(th, sh) in &groups[g + 1..] {
            if sh.norm_sqr() == 0.0 {
                continue;
            }
            let ov = tag_overlap(th, tg);
            if ov != 0.0 {
                total += 2.0 * (sg * sh.conj()).re * ov;
            }
        }
    }
    total
}
