//! Router post-selection: keep only runs whose routers in the first `K`
//! layers read `|0>`.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ecs::{query_fidelity, run_circuit, EcsState, Tag};
use crate::error::{Error, Result};
use crate::model::{AddressState, CircuitIR, ClassicalData, QramGeometry, QubitRole};
use crate::noise::{sample_rng, ErrorConfiguration, NoiseModel, Sampler, SamplingMode};
use crate::par::map_indexed;

/// z for a two-sided 95% interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionMode {
    All,
    /// Only nodes lying on the path of some queried address.
    QueriedBranchesOnly,
    UnqueriedBranchesOnly,
}

impl SelectionMode {
    pub fn token(self) -> &'static str {
        match self {
            SelectionMode::All => "all",
            SelectionMode::QueriedBranchesOnly => "queried",
            SelectionMode::UnqueriedBranchesOnly => "unqueried",
        }
    }
}

impl std::fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(SelectionMode::All),
            "queried" => Ok(SelectionMode::QueriedBranchesOnly),
            "unqueried" => Ok(SelectionMode::UnqueriedBranchesOnly),
            _ => Err(Error::InvalidParameter(format!("unknown selection mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MitigationConfig {
    pub k_layers: usize,
    pub mode: SelectionMode,
    /// Also project the incident qubits of the selected nodes.
    pub include_incident: bool,
}

impl MitigationConfig {
    pub fn new(k_layers: usize) -> Self {
        Self {
            k_layers,
            mode: SelectionMode::All,
            include_incident: true,
        }
    }

    pub fn with_mode(mut self, mode: SelectionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self, geometry: &QramGeometry) -> Result<()> {
        if self.k_layers > geometry.layers() {
            return Err(Error::InvalidParameter(format!(
                "K = {} exceeds L = {}",
                self.k_layers,
                geometry.layers()
            )));
        }
        Ok(())
    }

    /// Qubits measured by the post-selection, in increasing order.
    pub fn scope(&self, geometry: &QramGeometry, address: &AddressState) -> Result<Vec<usize>> {
        self.validate(geometry)?;
        let mut out = Vec::new();
        for layer in 1..=self.k_layers {
            for node in geometry.nodes_in_layer(layer) {
                let queried = address
                    .components()
                    .iter()
                    .any(|&(_, i)| geometry.node_serves(node, i));
                let selected = match self.mode {
                    SelectionMode::All => true,
                    SelectionMode::QueriedBranchesOnly => queried,
                    SelectionMode::UnqueriedBranchesOnly => !queried,
                };
                if selected {
                    out.push(geometry.qubit(QubitRole::Control(node)));
                    if self.include_incident {
                        out.push(geometry.qubit(QubitRole::Incident(node)));
                    }
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// Projects every qubit of `scope` onto `|0>`. Returns the renormalized state
/// and the keep probability; a zero keep probability leaves an empty state.
pub fn postselect_qubits(state: &EcsState, scope: &[usize]) -> (EcsState, f64) {
    let mut out = state.clone();
    let mut keep = vec![true; out.len()];
    for (k, kept) in keep.iter_mut().enumerate() {
        let mut factor = 1.0;
        for &q in scope {
            match out.tag(k, q) {
                Tag::Zero => {}
                Tag::One => {
                    *kept = false;
                    break;
                }
                Tag::Plus | Tag::Minus => {
                    factor *= FRAC_1_SQRT_2;
                    out.set_tag(k, q, Tag::Zero);
                }
            }
        }
        if *kept && factor != 1.0 {
            *out.amplitude_mut(k) *= factor;
        }
    }
    out.retain_components(&keep);
    let p = out.norm_sqr();
    if p <= 0.0 {
        out.retain_components(&vec![false; out.len()]);
        return (out, 0.0);
    }
    out.scale(1.0 / p.sqrt());
    (out, p.min(1.0))
}

pub fn postselect(
    state: &EcsState,
    config: &MitigationConfig,
    geometry: &QramGeometry,
    address: &AddressState,
) -> Result<(EcsState, f64)> {
    let scope = config.scope(geometry, address)?;
    Ok(postselect_qubits(state, &scope))
}

/// Mitigated fidelity `F'` and valid fraction, both with 95% half-widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MitigatedEstimate {
    pub fidelity: f64,
    pub fidelity_ci: f64,
    pub valid_fraction: f64,
    pub valid_fraction_ci: f64,
    pub n_samples: usize,
}

/// How a sample's keep probability enters the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Acceptance {
    /// Weight each sample by its exact keep probability.
    Weighted,
    /// Accept each sample with its keep probability, like a measurement.
    Strict,
}

impl std::str::FromStr for Acceptance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" => Ok(Acceptance::Weighted),
            "strict" => Ok(Acceptance::Strict),
            _ => Err(Error::InvalidParameter(format!("unknown acceptance rule {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub sampling: SamplingMode,
    pub acceptance: Acceptance,
    /// Sample `i` draws from stream `first_stream + i` of the seed.
    pub first_stream: u64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            sampling: SamplingMode::Conditioned,
            acceptance: Acceptance::Weighted,
            first_stream: 0,
        }
    }
}

/// Per-sample `(w, w F)` for one configuration.
type Pair = (f64, f64);

fn score(
    state: &EcsState,
    scope: &[usize],
    geometry: &QramGeometry,
    address: &AddressState,
    data: &ClassicalData,
) -> Result<Pair> {
    let (projected, w) = postselect_qubits(state, scope);
    if w == 0.0 {
        return Ok((0.0, 0.0));
    }
    Ok((w, w * query_fidelity(&projected, geometry, address, data)?))
}

fn run_one(
    circuit: &CircuitIR,
    address: &AddressState,
    data: &ClassicalData,
    errors: &ErrorConfiguration,
    scopes: &[Vec<usize>],
) -> Result<Vec<Pair>> {
    let g = circuit.geometry();
    let mut state = EcsState::init_state(g, address)?;
    run_circuit(&mut state, circuit, errors)?;
    scopes.iter().map(|s| score(&state, s, g, address, data)).collect()
}

fn accept<R: Rng + ?Sized>(pair: Pair, acceptance: Acceptance, rng: &mut R) -> Pair {
    match acceptance {
        Acceptance::Weighted => pair,
        Acceptance::Strict => {
            let (w, wf) = pair;
            if w > 0.0 && rng.gen::<f64>() < w {
                (1.0, wf / w)
            } else {
                (0.0, 0.0)
            }
        }
    }
}

/// Ratio estimate `(c0 + b mean(y)) / (d0 + b mean(x))` from per-sample
/// pairs, with the delta-method half-width.
fn ratio_estimate(pairs: &[Pair], b: f64, clean: Pair) -> Result<MitigatedEstimate> {
    let n = pairs.len();
    let nf = n as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(x, y) in pairs {
        sx += x;
        sy += y;
    }
    let (mx, my) = (sx / nf, sy / nf);
    let a = 1.0 - b;
    let den = a * clean.0 + b * mx;
    if den <= 0.0 {
        return Err(Error::AllRejected);
    }
    let r = (a * clean.1 + b * my) / den;
    let (mut vr, mut vx) = (0.0, 0.0);
    for &(x, y) in pairs {
        let d = y - r * x;
        vr += d * d;
        vx += (x - mx) * (x - mx);
    }
    let dof = (nf - 1.0).max(1.0);
    let se_r = b * (vr / dof / nf).sqrt() / den;
    let se_x = b * (vx / dof / nf).sqrt();
    Ok(MitigatedEstimate {
        fidelity: r.clamp(0.0, 1.0),
        fidelity_ci: Z95 * se_r,
        valid_fraction: den.clamp(0.0, 1.0),
        valid_fraction_ci: Z95 * se_x,
        n_samples: n,
    })
}

/// Estimates `F'` for several post-selection configurations from one shared
/// set of noisy trajectories. `K = 0` gives the plain query fidelity.
pub fn mitigated_query_many(
    circuit: &CircuitIR,
    address: &AddressState,
    data: &ClassicalData,
    model: &NoiseModel,
    configs: &[MitigationConfig],
    n: usize,
    seed: u64,
    options: EstimatorOptions,
) -> Result<Vec<MitigatedEstimate>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n}")));
    }
    let g = circuit.geometry();
    let scopes = configs
        .iter()
        .map(|c| c.scope(g, address))
        .collect::<Result<Vec<_>>>()?;
    let sampler = Sampler::new(circuit, model)?;
    let clean = run_one(circuit, address, data, &ErrorConfiguration::empty(), &scopes)?;
    let (b, conditioned) = match options.sampling {
        SamplingMode::Direct => (1.0, false),
        SamplingMode::Conditioned => (sampler.p_any(), true),
    };
    if conditioned && b == 0.0 {
        return clean
            .iter()
            .map(|&c| ratio_estimate(&vec![c; n], 0.0, c))
            .collect();
    }
    let per_sample: Vec<Vec<Pair>> = map_indexed(n, |i| {
        let mut rng = sample_rng(seed, options.first_stream + i as u64);
        let errors = if conditioned {
            sampler.sample_conditioned(&mut rng).unwrap_or_else(ErrorConfiguration::empty)
        } else {
            sampler.sample_direct(&mut rng)
        };
        let pairs = if errors.is_empty() {
            clean.clone()
        } else {
            run_one(circuit, address, data, &errors, &scopes)?
        };
        Ok(pairs.into_iter().map(|p| accept(p, options.acceptance, &mut rng)).collect())
    })?;
    (0..configs.len())
        .map(|c| {
            let column: Vec<Pair> = per_sample.iter().map(|row| row[c]).collect();
            ratio_estimate(&column, b, clean[c])
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn mitigated_query(
    circuit: &CircuitIR,
    address: &AddressState,
    data: &ClassicalData,
    model: &NoiseModel,
    config: &MitigationConfig,
    n: usize,
    seed: u64,
    options: EstimatorOptions,
) -> Result<MitigatedEstimate> {
    if n < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 samples, got {n}")));
    }
    Ok(mitigated_query_many(circuit, address, data, model, &[*config], n, seed, options)?[0])
}

/// `ceil(1.96^2 p (1 - p) / delta^2)`: samples for a 95% half-width `delta`.
pub fn required_samples(delta: f64, p_hat: f64) -> Result<u64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::InvalidParameter(format!("p = {p_hat} is outside [0, 1]")));
    }
    let raw = Z95 * Z95 * p_hat * (1.0 - p_hat) / (delta * delta);
    // 1.96^2 * 0.25 / 1e-4 lands a few ulps above 9604
    Ok((raw - 1e-9).ceil().max(0.0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_query_circuit;
    use num_complex::Complex64;

    fn one_plus() -> EcsState {
        EcsState::from_components(2, vec![(Complex64::new(1.0, 0.0), vec![Tag::Plus, Tag::One])]).unwrap()
    }

    #[test]
    fn plus_tag_keeps_half() {
        let (s, p) = postselect_qubits(&one_plus(), &[0]);
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(s.tags(0), &[Tag::Zero, Tag::One]);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_tag_drops_component() {
        let (s, p) = postselect_qubits(&one_plus(), &[1]);
        assert_eq!(p, 0.0);
        assert!(s.is_empty());
    }

    #[test]
    fn minus_has_no_sign() {
        let s = EcsState::from_components(1, vec![(Complex64::new(1.0, 0.0), vec![Tag::Minus])]).unwrap();
        let (out, p) = postselect_qubits(&s, &[0]);
        assert!((p - 0.5).abs() < 1e-15);
        assert!((out.amplitude(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scope_modes_partition() {
        let g = QramGeometry::new(2).unwrap();
        let a = AddressState::parse("basis:01", 2).unwrap();
        let all = MitigationConfig::new(2).scope(&g, &a).unwrap();
        let q = MitigationConfig::new(2)
            .with_mode(SelectionMode::QueriedBranchesOnly)
            .scope(&g, &a)
            .unwrap();
        let u = MitigationConfig::new(2)
            .with_mode(SelectionMode::UnqueriedBranchesOnly)
            .scope(&g, &a)
            .unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(q.len(), 4);
        assert_eq!(u.len(), 2);
        let mut both = [q, u].concat();
        both.sort_unstable();
        assert_eq!(both, all);
        assert!(MitigationConfig::new(3).scope(&g, &a).is_err());
    }

    #[test]
    fn noiseless_estimates_are_perfect() {
        let g = QramGeometry::new(2).unwrap();
        let data = ClassicalData::parse("0110", &g).unwrap();
        let c = build_query_circuit(g, &data).unwrap();
        let a = AddressState::uniform(2);
        for sampling in [SamplingMode::Direct, SamplingMode::Conditioned] {
            for acceptance in [Acceptance::Weighted, Acceptance::Strict] {
                let opts = EstimatorOptions {
                    sampling,
                    acceptance,
                    first_stream: 0,
                };
                for k in 0..=2 {
                    let e = mitigated_query(&c, &a, &data, &NoiseModel::noiseless(), &MitigationConfig::new(k), 100, 1, opts)
                        .unwrap();
                    assert!((e.fidelity - 1.0).abs() < 1e-12);
                    assert!((e.valid_fraction - 1.0).abs() < 1e-12);
                    assert!(e.fidelity_ci.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn direct_and_conditioned_agree() {
        let g = QramGeometry::new(2).unwrap();
        let data = ClassicalData::ones(&g);
        let c = build_query_circuit(g, &data).unwrap();
        let a = AddressState::uniform(2);
        let m = NoiseModel::new(5e-3).unwrap();
        let cfg = [MitigationConfig::new(0), MitigationConfig::new(2)];
        let opts = |sampling| EstimatorOptions {
            sampling,
            acceptance: Acceptance::Weighted,
            first_stream: 0,
        };
        let d = mitigated_query_many(&c, &a, &data, &m, &cfg, 4000, 3, opts(SamplingMode::Direct)).unwrap();
        let k = mitigated_query_many(&c, &a, &data, &m, &cfg, 4000, 3, opts(SamplingMode::Conditioned)).unwrap();
        for (x, y) in d.iter().zip(&k) {
            let tol = 1.5 * (x.fidelity_ci + y.fidelity_ci) + 1e-9;
            assert!((x.fidelity - y.fidelity).abs() < tol, "{x:?} vs {y:?}");
            assert!(y.fidelity_ci < x.fidelity_ci);
        }
        assert!(k[1].fidelity > k[0].fidelity);
        assert!(k[1].valid_fraction < 1.0);
    }

    #[test]
    fn sample_sizes() {
        assert_eq!(required_samples(0.01, 0.5).unwrap(), 9604);
        assert_eq!(required_samples(0.01, 0.0).unwrap(), 0);
        assert_eq!(required_samples(0.01, 1.0).unwrap(), 0);
        assert!(required_samples(0.0, 0.5).is_err());
        assert!(required_samples(-1.0, 0.5).is_err());
    }
}
