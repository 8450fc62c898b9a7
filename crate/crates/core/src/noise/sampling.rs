use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::CircuitIR;
use crate::noise::events::{ErrorConfiguration, GateError, InjectedError, Pauli};
use crate::noise::model::{error_sites, NoiseModel, Site, SiteKind};

/// How Monte Carlo configurations are drawn.
///
/// `Conditioned` only draws configurations with at least one error and
/// leaves it to the estimator to weight them by `1 - P(no error)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMode {
    Direct,
    Conditioned,
}

impl std::str::FromStr for SamplingMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SamplingMode::Direct),
            "conditioned" => Ok(SamplingMode::Conditioned),
            _ => Err(crate::error::Error::InvalidParameter(format!("unknown sampling mode {s:?}"))),
        }
    }
}

/// Per-sample generator: stream `index` of the master seed.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone)]
pub struct Sampler {
    sites: Vec<Site>,
    /// Probability that at least one of sites `0..=j` fires.
    cumulative: Vec<f64>,
    p_any: f64,
}

impl Sampler {
    pub fn new(circuit: &CircuitIR, model: &NoiseModel) -> Result<Self> {
        let sites = error_sites(circuit, model)?;
        let mut cumulative = Vec::with_capacity(sites.len());
        let mut c = 0.0;
        let mut log_clean = 0.0;
        for s in &sites {
            c += (1.0 - c) * s.p;
            cumulative.push(c);
            log_clean += (-s.p).ln_1p();
        }
        Ok(Self {
            sites,
            cumulative,
            p_any: -log_clean.exp_m1(),
        })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    /// Probability that a configuration is error free.
    pub fn p_clean(&self) -> f64 {
        1.0 - self.p_any
    }

    pub fn p_any(&self) -> f64 {
        self.p_any
    }

    /// Expected number of fired sites.
    pub fn expected_events(&self) -> f64 {
        self.sites.iter().map(|s| s.p).sum()
    }

    fn fire<R: Rng + ?Sized>(site: &Site, rng: &mut R, out: &mut ErrorConfiguration) {
        match site.kind {
            SiteKind::Inject(q) => out.injections.push(InjectedError {
                before_gate: site.position,
                qubit: q,
                pauli: Pauli::ALL[rng.gen_range(0..3)],
            }),
            SiteKind::Single(q) => {
                let p = Pauli::ALL[rng.gen_range(0..3)];
                push_gate_error(out, site.position, &[(q, p)]);
            }
            SiteKind::Pair(a, b) => {
                let (pa, pb) = Pauli::pair_from_index(rng.gen_range(0..15));
                let mut paulis = Vec::with_capacity(2);
                if let Some(p) = pa {
                    paulis.push((a, p));
                }
                if let Some(p) = pb {
                    paulis.push((b, p));
                }
                push_gate_error(out, site.position, &paulis);
            }
        }
    }

    pub fn sample_direct<R: Rng + ?Sized>(&self, rng: &mut R) -> ErrorConfiguration {
        let mut out = ErrorConfiguration::empty();
        for site in &self.sites {
            if rng.gen::<f64>() < site.p {
                Self::fire(site, rng, &mut out);
            }
        }
        out
    }

    /// Draws a configuration conditioned on at least one event. The first
    /// event comes from the exact first-failure distribution; later sites are
    /// independent. Returns `None` when no site can fire.
    pub fn sample_conditioned<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<ErrorConfiguration> {
        let last = *self.cumulative.last()?;
        if last <= 0.0 {
            return None;
        }
        let u = rng.gen::<f64>() * last;
        let first = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.sites.len() - 1);
        let mut out = ErrorConfiguration::empty();
        Self::fire(&self.sites[first], rng, &mut out);
        for site in &self.sites[first + 1..] {
            if rng.gen::<f64>() < site.p {
                Self::fire(site, rng, &mut out);
            }
        }
        Some(out)
    }
}

fn push_gate_error(out: &mut ErrorConfiguration, position: usize, paulis: &[(usize, Pauli)]) {
    match out.gate_errors.last_mut() {
        Some(e) if e.position == position => e.paulis.extend_from_slice(paulis),
        _ => out.gate_errors.push(GateError {
            position,
            paulis: paulis.to_vec(),
        }),
    }
}

/// One direct Monte Carlo draw from stream 0 of `seed`.
pub fn sample_configuration(circuit: &CircuitIR, model: &NoiseModel, seed: u64) -> Result<ErrorConfiguration> {
    let sampler = Sampler::new(circuit, model)?;
    Ok(sampler.sample_direct(&mut sample_rng(seed, 0)))
}
