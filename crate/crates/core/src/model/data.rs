use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QramGeometry;

/// Classical memory contents. `bits[i]` is the value stored at address `i`,
/// where `i` reads the address bitstring big-endian (bit 1 routes at the root).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassicalData {
    bits: Vec<u8>,
}

impl ClassicalData {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if !bits.len().is_power_of_two() || bits.len() < 2 {
            return Err(Error::InvalidData(format!(
                "length {} is not a power of two >= 2",
                bits.len()
            )));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidData(format!("entry {b} is not a bit")));
        }
        Ok(Self { bits })
    }

    pub fn zeros(geometry: &QramGeometry) -> Self {
        Self {
            bits: vec![0; geometry.memory_size()],
        }
    }

    pub fn ones(geometry: &QramGeometry) -> Self {
        Self {
            bits: vec![1; geometry.memory_size()],
        }
    }

    /// Parses `0101`-style strings (character `i` is `x_i`) or the keywords
    /// `all-ones` / `all-zeros`.
    pub fn parse(spec: &str, geometry: &QramGeometry) -> Result<Self> {
        let data = match spec {
            "all-ones" => Self::ones(geometry),
            "all-zeros" => Self::zeros(geometry),
            _ => {
                let bits = spec
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        _ => Err(Error::InvalidData(format!("bad character {c:?} in {spec:?}"))),
                    })
                    .collect::<Result<Vec<u8>>>()?;
                Self::new(bits)?
            }
        };
        data.check(geometry)?;
        Ok(data)
    }

    pub fn check(&self, geometry: &QramGeometry) -> Result<()> {
        if self.bits.len() != geometry.memory_size() {
            return Err(Error::SizeMismatch(format!(
                "data has {} entries but a {}-layer tree stores {}",
                self.bits.len(),
                geometry.layers(),
                geometry.memory_size()
            )));
        }
        Ok(())
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, address: usize) -> u8 {
        self.bits[address]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl std::fmt::Display for ClassicalData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// A superposition of address basis states `sum_i alpha_i |i>_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressState {
    layers: usize,
    components: Vec<(Complex64, usize)>,
}

const NORM_TOL: f64 = 1e-12;

impl AddressState {
    pub fn new(layers: usize, components: Vec<(Complex64, usize)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidAddress("no components".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &(_, bits) in &components {
            if bits >> layers != 0 {
                return Err(Error::InvalidAddress(format!(
                    "address {bits} does not fit in {layers} bits"
                )));
            }
            if !seen.insert(bits) {
                return Err(Error::InvalidAddress(format!("duplicate address {bits}")));
            }
        }
        let norm: f64 = components.iter().map(|(a, _)| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidAddress(format!("norm^2 is {norm}, expected 1")));
        }
        Ok(Self { layers, components })
    }

    pub fn basis(layers: usize, address: usize) -> Result<Self> {
        Self::new(layers, vec![(Complex64::new(1.0, 0.0), address)])
    }

    /// `|+ ... +>`, expanded over all `2^L` basis addresses.
    pub fn uniform(layers: usize) -> Self {
        let n = 1usize << layers;
        let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        Self {
            layers,
            components: (0..n).map(|i| (amp, i)).collect(),
        }
    }

    /// `(|a> + |b>) / sqrt 2`.
    pub fn bell(layers: usize, a: usize, b: usize) -> Result<Self> {
        let amp = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(layers, vec![(amp, a), (amp, b)])
    }

    /// Product address from per-bit symbols `0`, `1`, `+`, `-`, e.g. `00+`.
    pub fn product(spec: &str) -> Result<Self> {
        let layers = spec.chars().count();
        let mut components = vec![(Complex64::new(1.0, 0.0), 0usize)];
        for c in spec.chars() {
            let mut next = Vec::with_capacity(components.len() * 2);
            for (amp, bits) in components {
                match c {
                    '0' => next.push((amp, bits << 1)),
                    '1' => next.push((amp, (bits << 1) | 1)),
                    '+' | '-' => {
                        let s = if c == '-' { -1.0 } else { 1.0 };
                        next.push((amp * FRAC_1_SQRT_2, bits << 1));
                        next.push((amp * (s * FRAC_1_SQRT_2), (bits << 1) | 1));
                    }
                    _ => {
                        return Err(Error::InvalidAddress(format!(
                            "bad symbol {c:?} in product address {spec:?}"
                        )))
                    }
                }
            }
            components = next;
        }
        Self::new(layers, components)
    }

    /// Parses `basis:<bits>`, `uniform`, `bell:<b1>,<b2>` or `product:<symbols>`.
    pub fn parse(spec: &str, layers: usize) -> Result<Self> {
        let parse_bits = |s: &str| -> Result<usize> {
            if s.len() != layers || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::InvalidAddress(format!(
                    "{s:?} is not a {layers}-bit string"
                )));
            }
            Ok(usize::from_str_radix(s, 2).expect("validated bitstring"))
        };
        let state = if spec == "uniform" {
            Self::uniform(layers)
        } else if let Some(bits) = spec.strip_prefix("basis:") {
            Self::basis(layers, parse_bits(bits)?)?
        } else if let Some(pair) = spec.strip_prefix("bell:") {
            let (a, b) = pair
                .split_once(',')
                .ok_or_else(|| Error::InvalidAddress(format!("bell spec {spec:?} needs two addresses")))?;
            Self::bell(layers, parse_bits(a)?, parse_bits(b)?)?
        } else if let Some(symbols) = spec.strip_prefix("product:") {
            let state = Self::product(symbols)?;
            if state.layers != layers {
                return Err(Error::SizeMismatch(format!(
                    "product address {symbols:?} has {} bits, tree has {layers} layers",
                    state.layers
                )));
            }
            state
        } else {
            return Err(Error::InvalidAddress(format!("unknown address spec {spec:?}")));
        };
        Ok(state)
    }

    /// Reads lines of `<re> <im> <bits>`; blank lines and `#` comments are skipped.
    pub fn parse_component_list(text: &str, layers: usize) -> Result<Self> {
        let mut components = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: n + 1,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err("expected `<re> <im> <bits>`"));
            }
            let re: f64 = fields[0].parse().map_err(|_| err("bad real part"))?;
            let im: f64 = fields[1].parse().map_err(|_| err("bad imaginary part"))?;
            if fields[2].len() != layers {
                return Err(err("bitstring length does not match layers"));
            }
            let bits = usize::from_str_radix(fields[2], 2).map_err(|_| err("bad bitstring"))?;
            components.push((Complex64::new(re, im), bits));
        }
        Self::new(layers, components)
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn components(&self) -> &[(Complex64, usize)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn amplitude_map(&self) -> HashMap<usize, Complex64> {
        self.components.iter().map(|&(a, i)| (i, a)).collect()
    }

    pub fn check(&self, geometry: &QramGeometry) -> Result<()> {
        if self.layers != geometry.layers() {
            return Err(Error::SizeMismatch(format!(
                "address has {} bits, tree has {} layers",
                self.layers,
                geometry.layers()
            )));
        }
        Ok(())
    }

    /// Bit `layer` (1-based, big-endian) of an address value.
    pub fn bit(&self, address: usize, layer: usize) -> u8 {
        ((address >> (self.layers - layer)) & 1) as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_parsing() {
        let g = QramGeometry::new(2).unwrap();
        let d = ClassicalData::parse("0101", &g).unwrap();
        assert_eq!(d.bits(), &[0, 1, 0, 1]);
        assert_eq!(d.to_string(), "0101");
        assert_eq!(ClassicalData::parse("all-ones", &g).unwrap().bits(), &[1; 4]);
        assert!(ClassicalData::parse("010", &g).is_err());
        assert!(ClassicalData::parse("01010101", &g).is_err());
        assert!(ClassicalData::parse("01a1", &g).is_err());
    }

    #[test]
    fn address_specs() {
        let a = AddressState::parse("basis:10", 2).unwrap();
        assert_eq!(a.components(), &[(Complex64::new(1.0, 0.0), 2)]);
        let u = AddressState::parse("uniform", 2).unwrap();
        assert_eq!(u.len(), 4);
        let b = AddressState::parse("bell:00,11", 2).unwrap();
        assert_eq!(b.len(), 2);
        let p = AddressState::parse("product:00+", 3).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.components()[1].1, 1);
        assert!(AddressState::parse("basis:1", 2).is_err());
        assert!(AddressState::parse("bell:00,00", 2).is_err());
        assert!(AddressState::parse("product:0+", 3).is_err());
    }

    #[test]
    fn rejects_unnormalized() {
        let c = Complex64::new(0.5, 0.0);
        assert!(AddressState::new(2, vec![(c, 0), (c, 1)]).is_err());
    }

    #[test]
    fn component_list_file() {
        let text = "# two components\n0.7071067811865476 0 00\n0 0.7071067811865476 11\n";
        let a = AddressState::parse_component_list(text, 2).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a.components()[1].0, Complex64::new(0.0, FRAC_1_SQRT_2));
        let err = AddressState::parse_component_list("1 0 0\n", 2).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
