use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{
    dense_query_fidelity, dense_run, entanglement_entropy, reduced_density, teleport_retrieval, DenseState,
    TeleportMode,
};
use crate::error::{Error, Result};
use crate::experiments::schema::{ExperimentResult, FitRecord, Row};
use crate::experiments::stats::linear_fit;
use crate::gates::unitary::CMatrix;
use crate::mitigation::{mitigated_query_many, EstimatorOptions, MitigatedEstimate, MitigationConfig, SelectionMode, Z95};
use crate::model::{build_query_circuit, AddressState, CircuitIR, ClassicalData, Phase, QramGeometry, QubitRole};
use crate::noise::{injection_rate, node_injection, sample_rng, ErrorConfiguration, InjectedError, NoiseModel, Pauli};

/// Lowest fidelity treated as the linear small-error regime in threshold fits.
pub const LINEAR_DOMAIN_MIN: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub samples: usize,
    pub seed: u64,
    pub options: EstimatorOptions,
}

impl McSettings {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            options: EstimatorOptions::default(),
        }
    }
}

/// A query: tree size, address state and memory contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub geometry: QramGeometry,
    pub address: AddressState,
    pub data: ClassicalData,
}

impl Workload {
    pub fn new(geometry: QramGeometry, address: AddressState, data: ClassicalData) -> Result<Self> {
        address.check(&geometry)?;
        data.check(&geometry)?;
        Ok(Self {
            geometry,
            address,
            data,
        })
    }

    /// Uniform address over all-ones memory.
    pub fn standard(layers: usize) -> Result<Self> {
        let g = QramGeometry::new(layers)?;
        Self::new(g, AddressState::uniform(layers), ClassicalData::ones(&g))
    }

    pub fn circuit(&self) -> Result<CircuitIR> {
        build_query_circuit(self.geometry, &self.data)
    }

    fn estimate(&self, model: &NoiseModel, configs: &[MitigationConfig], s: &McSettings) -> Result<Vec<MitigatedEstimate>> {
        let c = self.circuit()?;
        mitigated_query_many(&c, &self.address, &self.data, model, configs, s.samples, s.seed, s.options)
    }
}

fn fit_rows(
    result: &ExperimentResult,
    name: &str,
    rows: Vec<usize>,
    x: (&str, &dyn Fn(&Row) -> f64),
    y: (&str, &dyn Fn(&Row) -> f64),
    sigma: &dyn Fn(&Row) -> f64,
) -> Result<Option<FitRecord>> {
    if rows.len() < 2 {
        return Ok(None);
    }
    let pick = |f: &dyn Fn(&Row) -> f64| rows.iter().map(|&i| f(&result.rows[i])).collect::<Vec<_>>();
    let fit = linear_fit(&pick(x.1), &pick(y.1), Some(&pick(sigma)))?;
    Ok(Some(FitRecord {
        name: name.to_string(),
        rows,
        x: x.0.to_string(),
        y: y.0.to_string(),
        fit,
    }))
}

fn param_f64(row: &Row, name: &str) -> f64 {
    row.get_param(name).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN)
}

/// One-sigma error of `log(1 - F)` from the 95% half-width.
fn log_infidelity_sigma(row: &Row) -> f64 {
    row.fidelity_ci.unwrap_or(0.0) / Z95 / row.infidelity().unwrap_or(f64::NAN)
}

fn positive_infidelity(result: &ExperimentResult, keep: impl Fn(&Row) -> bool) -> Vec<usize> {
    (0..result.rows.len())
        .filter(|&i| {
            let r = &result.rows[i];
            keep(r) && r.infidelity().is_some_and(|v| v > 0.0)
        })
        .collect()
}

/// Unmitigated infidelity per tree depth with a fit of `log(1 - F)` against
/// `log L`. Uniform address, all-ones memory.
pub fn scaling_experiment(layers: &[usize], model: &NoiseModel, s: &McSettings) -> Result<ExperimentResult> {
    if let Some(l) = layers.iter().find(|l| !(2..=9).contains(*l)) {
        return Err(Error::InvalidParameter(format!("scaling layers must lie in 2..=9, got {l}")));
    }
    if s.samples < 1000 {
        return Err(Error::InvalidParameter(format!("scaling needs at least 1000 samples, got {}", s.samples)));
    }
    let mut result = ExperimentResult::new("scaling", s.seed);
    result.push_meta_number("e_t", model.e_t);
    result.push_meta_number("e_s", model.e_s);
    result.push_meta("sampling", format!("{:?}", s.options.sampling).to_lowercase());
    for &l in layers {
        let w = Workload::standard(l)?;
        let e = w.estimate(model, &[MitigationConfig::new(0)], s)?[0];
        result.rows.push(
            Row::new(e.n_samples as u64, s.seed)
                .param("layers", l)
                .fidelity(e.fidelity, e.fidelity_ci),
        );
    }
    let rows = positive_infidelity(&result, |_| true);
    let log_l = |r: &Row| param_f64(r, "layers").ln();
    let log_i = |r: &Row| r.infidelity().unwrap_or(f64::NAN).ln();
    match fit_rows(&result, "scaling", rows, ("log(layers)", &log_l), ("log(infidelity)", &log_i), &log_infidelity_sigma)? {
        Some(f) => result.fits.push(f),
        None => result.push_meta("fit", "absent"),
    }
    Ok(result)
}

/// Mitigated infidelity and valid fraction per post-selection depth `K`,
/// all computed from one shared set of trajectories. Fits `log(1 - F')`
/// against `log K` over `K >= 2`.
pub fn mitigation_sweep(
    workload: &Workload,
    model: &NoiseModel,
    k_range: &[usize],
    mode: SelectionMode,
    s: &McSettings,
) -> Result<ExperimentResult> {
    let configs: Vec<MitigationConfig> = k_range.iter().map(|&k| MitigationConfig::new(k).with_mode(mode)).collect();
    for c in &configs {
        c.validate(&workload.geometry)?;
    }
    let estimates = workload.estimate(model, &configs, s)?;
    let mut result = ExperimentResult::new("mitigation", s.seed);
    result.push_meta_number("e_t", model.e_t);
    result.push_meta_number("e_s", model.e_s);
    result.push_meta("mode", mode);
    for (k, e) in k_range.iter().zip(&estimates) {
        result.rows.push(
            Row::new(e.n_samples as u64, s.seed)
                .param("layers", workload.geometry.layers())
                .param("k", k)
                .fidelity(e.fidelity, e.fidelity_ci)
                .valid(e.valid_fraction, e.valid_fraction_ci),
        );
    }
    let rows = positive_infidelity(&result, |r| param_f64(r, "k") >= 2.0);
    let log_k = |r: &Row| param_f64(r, "k").ln();
    let log_i = |r: &Row| r.infidelity().unwrap_or(f64::NAN).ln();
    if let Some(f) = fit_rows(&result, "infidelity_vs_k", rows, ("log(k)", &log_k), ("log(infidelity)", &log_i), &log_infidelity_sigma)? {
        result.fits.push(f);
    }
    Ok(result)
}

/// Exact fidelity slope against `e_d` for a depolarizing injection on `qubit`
/// after `phase`, with no other noise: `(1/4) sum_P (F_P - F_0)`.
pub fn injection_oracle(workload: &Workload, qubit: usize, phase: Phase) -> Result<(f64, f64)> {
    let c = workload.circuit()?;
    let fid = |errors: &ErrorConfiguration| -> Result<f64> {
        let st = dense_run(&c, &workload.address, errors)?;
        dense_query_fidelity(&st, &workload.geometry, &workload.address, &workload.data)
    };
    let f0 = fid(&ErrorConfiguration::empty())?;
    let mut sum = 0.0;
    for pauli in Pauli::ALL {
        let errors = ErrorConfiguration {
            gate_errors: vec![],
            injections: vec![InjectedError {
                before_gate: c.boundary_after(phase),
                qubit,
                pauli,
            }],
        };
        sum += fid(&errors)? - f0;
    }
    Ok((f0, sum / 4.0))
}

/// Fidelity against the injected rate `e_d = 4p/3` for each last-layer
/// target node, with a least-squares slope per node and the exact line from
/// the dense oracle.
pub fn injection_experiment(
    workload: &Workload,
    targets: &[usize],
    p_grid: &[f64],
    background: &NoiseModel,
    s: &McSettings,
) -> Result<ExperimentResult> {
    let g = workload.geometry;
    let last = g.layers();
    let mut result = ExperimentResult::new("injection", s.seed);
    result.push_meta_number("background_e_t", background.e_t);
    result.push_meta_number("background_e_s", background.e_s);
    result.push_meta("streams", "row r uses streams r*n..(r+1)*n");
    for &node in targets {
        if !g.nodes().contains(&node) || g.layer_of(node) != last {
            return Err(Error::InvalidParameter(format!("node {node} is not in layer {last}")));
        }
        let spec = node_injection(&g, node, 0.0);
        let (f0, slope) = injection_oracle(workload, spec.qubit, spec.phase)?;
        result.push_meta_number(&format!("oracle_slope.node{node}"), slope);
        let first = result.rows.len();
        for &p in p_grid {
            let e_d = injection_rate(p)?;
            let model = background.clone().with_injection(node_injection(&g, node, p))?;
            // disjoint streams keep the points of one line independent
            let mut row_settings = *s;
            row_settings.options.first_stream = (result.rows.len() * s.samples) as u64;
            let e = workload.estimate(&model, &[MitigationConfig::new(0)], &row_settings)?[0];
            result.rows.push(
                Row::new(e.n_samples as u64, s.seed)
                    .param("node", node)
                    .param("p", p)
                    .param("e_d", e_d)
                    .fidelity(e.fidelity, e.fidelity_ci)
                    .extra("oracle_fidelity", f0 + slope * e_d),
            );
        }
        let rows: Vec<usize> = (first..result.rows.len()).collect();
        let x = |r: &Row| param_f64(r, "e_d");
        let y = |r: &Row| r.fidelity.unwrap_or(f64::NAN);
        let sigma = |r: &Row| r.fidelity_ci.unwrap_or(0.0) / Z95;
        if let Some(f) = fit_rows(&result, &format!("node{node}"), rows, ("e_d", &x), ("fidelity", &y), &sigma)? {
            result.fits.push(f);
        }
    }
    Ok(result)
}

/// Von Neumann entropy of every control qubit right after address loading.
pub fn entropy_by_layer(layers: usize, address: &AddressState) -> Result<ExperimentResult> {
    let g = QramGeometry::new(layers)?;
    let c = build_query_circuit(g, &ClassicalData::zeros(&g))?.truncated_after(Phase::AddressLoading);
    let state = dense_run(&c, address, &ErrorConfiguration::empty())?;
    let mut result = ExperimentResult::new("entropy", 0);
    for layer in 1..=layers {
        let mut values = Vec::new();
        for node in g.nodes_in_layer(layer) {
            let rho = reduced_density(&state, &[g.qubit(QubitRole::Control(node))])?;
            let s = entanglement_entropy(&rho)?;
            values.push(s);
            result.rows.push(Row::new(0, 0).param("layer", layer).param("node", node).extra("entropy", s));
        }
        let hi = values.iter().cloned().fold(f64::MIN, f64::max);
        let lo = values.iter().cloned().fold(f64::MAX, f64::min);
        result.push_meta_number(&format!("entropy.layer{layer}"), values[0]);
        result.push_meta_number(&format!("spread.layer{layer}"), hi - lo);
    }
    Ok(result)
}

/// Per-layer entropies as stored in an entropy result.
pub fn layer_entropies(result: &ExperimentResult) -> Vec<f64> {
    (1..)
        .map_while(|l| result.get_meta(&format!("entropy.layer{l}")).and_then(|v| v.parse().ok()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourResult {
    /// Fidelity over the `(L, e_t)` grid with one linear fit per depth.
    pub grid: ExperimentResult,
    /// Threshold rate per `(L, target)` with the power-law fits.
    pub thresholds: ExperimentResult,
}

/// Gate error rate `e*` needed for each target fidelity, from a linear fit
/// of `F` against `e_t` over the rows with `F >= 0.8`, then a fit of
/// `log e*` against `log L`.
pub fn threshold_contour(layers: &[usize], e_grid: &[f64], targets: &[f64], s: &McSettings) -> Result<ContourResult> {
    let mut grid = ExperimentResult::new("contour", s.seed);
    grid.push_meta_number("linear_domain_min_fidelity", LINEAR_DOMAIN_MIN);
    let mut thresholds = ExperimentResult::new("threshold", s.seed);
    for &l in layers {
        let w = Workload::standard(l)?;
        let first = grid.rows.len();
        for &e_t in e_grid {
            let e = w.estimate(&NoiseModel::new(e_t)?, &[MitigationConfig::new(0)], s)?[0];
            grid.rows.push(
                Row::new(e.n_samples as u64, s.seed)
                    .param("layers", l)
                    .param("e_t", e_t)
                    .fidelity(e.fidelity, e.fidelity_ci),
            );
        }
        let rows: Vec<usize> = (first..grid.rows.len())
            .filter(|&i| grid.rows[i].fidelity.is_some_and(|f| f >= LINEAR_DOMAIN_MIN))
            .collect();
        let fids: Vec<f64> = rows.iter().filter_map(|&i| grid.rows[i].fidelity).collect();
        let x = |r: &Row| param_f64(r, "e_t");
        let y = |r: &Row| r.fidelity.unwrap_or(f64::NAN);
        let sigma = |r: &Row| r.fidelity_ci.unwrap_or(0.0) / Z95;
        let fit = fit_rows(&grid, &format!("L{l}"), rows, ("e_t", &x), ("fidelity", &y), &sigma)?;
        for &target in targets {
            let mut row = Row::new(s.samples as u64, s.seed).param("layers", l).param("target", target);
            if target >= 1.0 {
                row = row.extra("e_star", 0.0).extra("e_star_stderr", 0.0).extra("degenerate", 1.0);
            } else {
                let bracketed = fids.iter().any(|&f| f >= target) && fids.iter().any(|&f| f <= target);
                let f = match (&fit, bracketed) {
                    (Some(f), true) => f,
                    _ => return Err(Error::NotBracketed { target, layers: l }),
                };
                let (e_star, se) = f.fit.solve(target);
                row = row.extra("e_star", e_star).extra("e_star_stderr", se).extra("degenerate", 0.0);
            }
            thresholds.rows.push(row);
        }
        if let Some(f) = fit {
            grid.fits.push(f);
        }
    }
    for &target in targets.iter().filter(|&&t| t < 1.0) {
        let rows: Vec<usize> = (0..thresholds.rows.len())
            .filter(|&i| param_f64(&thresholds.rows[i], "target") == target)
            .collect();
        let x = |r: &Row| param_f64(r, "layers").ln();
        let y = |r: &Row| r.get_extra("e_star").unwrap_or(f64::NAN).ln();
        let sigma = |r: &Row| r.get_extra("e_star_stderr").unwrap_or(0.0) / r.get_extra("e_star").unwrap_or(f64::NAN);
        let name = format!("alpha.F{target}");
        if let Some(f) = fit_rows(&thresholds, &name, rows, ("log(layers)", &x), ("log(e_star)", &y), &sigma)? {
            thresholds.fits.push(f);
        }
    }
    Ok(ContourResult { grid, thresholds })
}

/// The six cardinal single-qubit states.
pub const CARDINAL_STATES: [&str; 6] = ["0", "1", "+", "-", "+i", "-i"];

pub fn cardinal_vector(name: &str) -> Result<[Complex64; 2]> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    Ok(match name {
        "0" => [c(1.0, 0.0), c(0.0, 0.0)],
        "1" => [c(0.0, 0.0), c(1.0, 0.0)],
        "+" => [c(r, 0.0), c(r, 0.0)],
        "-" => [c(r, 0.0), c(-r, 0.0)],
        "+i" => [c(r, 0.0), c(0.0, r)],
        "-i" => [c(r, 0.0), c(0.0, -r)],
        _ => return Err(Error::InvalidParameter(format!("unknown cardinal state {name:?}"))),
    })
}

/// Unitary whose first column is `v`.
fn preparation(v: [Complex64; 2]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[v[0], -v[1].conj(), v[1], v[0].conj()])
}

fn expectation(rho: &CMatrix, basis: char) -> f64 {
    match basis {
        'x' => 2.0 * rho[(0, 1)].re,
        'y' => -2.0 * rho[(0, 1)].im,
        _ => (rho[(0, 0)] - rho[(1, 1)]).re,
    }
}

/// Teleports each cardinal state from qubit 0 to qubit 2. Post-selection
/// gives the fidelity and keep probability; feedforward is sampled shot by
/// shot and measured in the X, Y and Z bases.
pub fn teleport_experiment(samples: usize, seed: u64) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::new("teleport", seed);
    for (index, name) in CARDINAL_STATES.iter().enumerate() {
        let v = cardinal_vector(name)?;
        let fresh = || -> Result<DenseState> {
            let mut s = DenseState::new(3);
            s.apply_matrix(&preparation(v), &[0])?;
            Ok(s)
        };
        let source = reduced_density(&fresh()?, &[0])?;
        let fidelity = |rho: &CMatrix| {
            (v[0].conj() * rho[(0, 0)] * v[0]
                + v[0].conj() * rho[(0, 1)] * v[1]
                + v[1].conj() * rho[(1, 0)] * v[0]
                + v[1].conj() * rho[(1, 1)] * v[1])
                .re
        };
        let mut rng = sample_rng(seed, index as u64);
        let mut st = fresh()?;
        let keep = teleport_retrieval(&mut st, 0, 1, 2, TeleportMode::PostSelect, &mut rng)?;
        let f_post = fidelity(&reduced_density(&st, &[2])?).clamp(0.0, 1.0);
        let mut row = Row::new(samples as u64, seed)
            .param("state", name)
            .fidelity(f_post, 0.0)
            .extra("keep", keep);
        let mut f_min = f64::INFINITY;
        for basis in ['x', 'y', 'z'] {
            let expected = ((1.0 + expectation(&source, basis)) / 2.0).clamp(0.0, 1.0);
            let mut hits = 0usize;
            for _ in 0..samples {
                let mut st = fresh()?;
                teleport_retrieval(&mut st, 0, 1, 2, TeleportMode::Feedforward, &mut rng)?;
                let rho = reduced_density(&st, &[2])?;
                f_min = f_min.min(fidelity(&rho).clamp(0.0, 1.0));
                let p_plus = (1.0 + expectation(&rho, basis)) / 2.0;
                hits += (rng.gen::<f64>() < p_plus) as usize;
            }
            let p_hat = hits as f64 / samples as f64;
            let ci = Z95 * (expected * (1.0 - expected) / samples as f64).sqrt();
            row = row
                .extra(&format!("p_plus_{basis}"), p_hat)
                .extra(&format!("p_plus_{basis}_expected"), expected)
                .extra(&format!("p_plus_{basis}_ci"), ci);
        }
        result.rows.push(row.extra("feedforward_min_fidelity", f_min));
    }
    Ok(result)
}
