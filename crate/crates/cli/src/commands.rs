use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bbqram::config::{noise_from_kv, KvDocument};
use bbqram::ecs::simulate_query;
use bbqram::experiments::{
    entropy_by_layer, injection_experiment, layer_entropies, mitigation_sweep, scaling_experiment, teleport_experiment,
    threshold_contour, ExperimentResult, McSettings, Row, Workload,
};
use bbqram::gates::verify::PASS_TOL;
use bbqram::gates::{routing_unitary, verify_reference_circuit, verify_routing_equivalence, RoutingKind, Scenario};
use bbqram::gates::reference::{router_star, uprime_one_target, ReferenceCircuit};
use bbqram::mitigation::{mitigated_query, Acceptance, EstimatorOptions, MitigationConfig, SelectionMode};
use bbqram::model::{build_query_circuit, circuit_stats, AddressState, ClassicalData, Phase, QramGeometry};
use bbqram::noise::calibration::{compare_calibrations, PROBE_INPUTS};
use bbqram::noise::{correct_readout, ErrorConfiguration, NoiseModel, Response, SamplingMode};

use crate::settings::{parse_list, CommandName, OutputFormat, Values};
use crate::ConfigError;

/// What a finished run produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    /// Rows whose confidence interval is wider than the effect they measure.
    pub weak: Vec<String>,
}

pub fn run(cmd: CommandName, doc: &KvDocument, out_dir: &Path) -> Result<Outcome> {
    let v = Values(doc);
    let format: OutputFormat = match v.text("format")? {
        "csv" => OutputFormat::Csv,
        "json" => OutputFormat::Json,
        "both" => OutputFormat::Both,
        other => return Err(ConfigError(format!("format: unknown value {other:?}")).into()),
    };
    let mut out = Outcome::default();
    let mut emit = |r: &ExperimentResult| -> Result<()> {
        out.written.extend(write_result(r, format, out_dir)?);
        out.weak.extend(weak_rows(r));
        Ok(())
    };
    match cmd {
        CommandName::Build => {
            let g = geometry(&v)?;
            let c = build_query_circuit(g, &data(&v, &g)?)?;
            print!("{}", c.dump());
        }
        CommandName::Stats => {
            let g = geometry(&v)?;
            let model = noise_from_kv(doc, &g)?;
            let c = build_query_circuit(g, &data(&v, &g)?)?;
            let s = circuit_stats(&c, &model.registry)?;
            println!("layers {}  gates {}", g.layers(), s.gate_count);
            println!("{:<18} {:>10} {:>10} {:>10} {:>10}", "phase", "opt_cz", "opt_depth", "base_cz", "base_depth");
            for phase in Phase::ALL {
                let (o, b) = (s.optimized.per_phase.get(&phase), s.baseline.per_phase.get(&phase));
                let (o, b) = (o.copied().unwrap_or_default(), b.copied().unwrap_or_default());
                println!(
                    "{:<18} {:>10} {:>10} {:>10} {:>10}",
                    phase.token(),
                    o.cz_count,
                    o.cz_depth,
                    b.cz_count,
                    b.cz_depth
                );
            }
            let (o, b) = (s.optimized.total, s.baseline.total);
            println!("{:<18} {:>10} {:>10} {:>10} {:>10}", "total", o.cz_count, o.cz_depth, b.cz_count, b.cz_depth);
            let pct = |x: Option<f64>| x.map(|r| format!("{:.1}%", 100.0 * r)).unwrap_or_else(|| "n/a".into());
            println!("reduction: count {}  depth {}", pct(s.count_reduction), pct(s.depth_reduction));
        }
        CommandName::VerifyGates => verify_gates(doc)?,
        CommandName::Simulate => emit(&simulate(&v, doc)?)?,
        CommandName::Scaling => {
            let layers = v.range("layers")?;
            let g = QramGeometry::new(*layers.iter().max().expect("non-empty list"))?;
            let model = noise_from_kv(doc, &g)?;
            let r = scaling_experiment(&layers, &model, &mc(&v)?)?;
            if let Some(f) = r.fit("scaling") {
                println!("slope {:.4} +- {:.4}", f.fit.slope, f.fit.slope_stderr);
            }
            emit(&r)?;
        }
        CommandName::Mitigate => {
            let w = workload(&v)?;
            let model = noise_from_kv(doc, &w.geometry)?;
            let k_range = match v.opt_text("k_range") {
                Some(_) => v.range("k_range")?,
                None => (0..=w.geometry.layers()).collect(),
            };
            let mode: SelectionMode = v.parse("mode")?;
            let r = mitigation_sweep(&w, &model, &k_range, mode, &mc(&v)?)?;
            for row in &r.rows {
                println!(
                    "k={} fidelity {:.6} +- {:.2e} valid {:.5}",
                    row.get_param("k").unwrap_or("?"),
                    row.fidelity.unwrap_or(f64::NAN),
                    row.fidelity_ci.unwrap_or(f64::NAN),
                    row.valid_fraction.unwrap_or(f64::NAN)
                );
            }
            emit(&r)?;
        }
        CommandName::Inject => {
            let w = workload(&v)?;
            let background = noise_from_kv(doc, &w.geometry)?;
            let nodes = match v.opt_text("nodes") {
                Some(_) => v.list::<usize>("nodes")?,
                None => w.geometry.nodes_in_layer(w.geometry.layers()).collect(),
            };
            let p_grid: Vec<f64> = v.list("p_grid")?;
            let r = injection_experiment(&w, &nodes, &p_grid, &background, &mc(&v)?)?;
            for f in &r.fits {
                let oracle = r.get_meta(&format!("oracle_slope.{}", f.name)).unwrap_or("?");
                println!("{}: slope {:.4} +- {:.4} (exact {oracle})", f.name, f.fit.slope, f.fit.slope_stderr);
            }
            emit(&r)?;
        }
        CommandName::Entropy => {
            let layers = v.single("layers")?;
            let address = address(&v, layers)?;
            let r = entropy_by_layer(layers, &address)?;
            for (l, s) in layer_entropies(&r).iter().enumerate() {
                println!("layer {} entropy {s:.5}", l + 1);
            }
            emit(&r)?;
        }
        CommandName::Contour => {
            let layers = v.range("layers")?;
            let r = threshold_contour(&layers, &v.list::<f64>("e_grid")?, &v.list::<f64>("targets")?, &mc(&v)?)?;
            for f in &r.thresholds.fits {
                println!("{}: exponent {:.4} +- {:.4}", f.name, f.fit.slope, f.fit.slope_stderr);
            }
            emit(&r.grid)?;
            emit(&r.thresholds)?;
        }
        CommandName::Teleport => {
            let r = teleport_experiment(v.parse("samples")?, v.parse("seed")?)?;
            for row in &r.rows {
                println!(
                    "{:>3}: fidelity {:.6} keep {:.4}",
                    row.get_param("state").unwrap_or("?"),
                    row.fidelity.unwrap_or(f64::NAN),
                    row.get_extra("keep").unwrap_or(f64::NAN)
                );
            }
            emit(&r)?;
        }
        CommandName::ReadoutCorrect => readout(&v)?,
    }
    for p in &out.written {
        println!("wrote {}", p.display());
    }
    Ok(out)
}

fn geometry(v: &Values) -> Result<QramGeometry> {
    Ok(QramGeometry::new(v.single("layers")?)?)
}

fn data(v: &Values, g: &QramGeometry) -> Result<ClassicalData> {
    Ok(ClassicalData::parse(v.text("data")?, g)?)
}

fn address(v: &Values, layers: usize) -> Result<AddressState> {
    let spec = v.text("address")?;
    match spec.strip_prefix("file:") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {path}: {e}")))?;
            Ok(AddressState::parse_component_list(&text, layers).with_context(|| format!("address file {path}"))?)
        }
        None => Ok(AddressState::parse(spec, layers)?),
    }
}

fn workload(v: &Values) -> Result<Workload> {
    let g = geometry(v)?;
    Ok(Workload::new(g, address(v, g.layers())?, data(v, &g)?)?)
}

fn mc(v: &Values) -> Result<McSettings> {
    let mut s = McSettings::new(v.parse("samples")?, v.parse("seed")?);
    s.options = EstimatorOptions {
        sampling: v.parse::<SamplingMode>("sampling")?,
        acceptance: v.parse::<Acceptance>("acceptance")?,
        first_stream: 0,
    };
    Ok(s)
}

fn simulate(v: &Values, doc: &KvDocument) -> Result<ExperimentResult> {
    let w = workload(v)?;
    let model = noise_from_kv(doc, &w.geometry)?;
    let config = MitigationConfig::new(v.parse("k")?).with_mode(v.parse("mode")?);
    config.validate(&w.geometry)?;
    let seed: u64 = v.parse("seed")?;
    let mut result = ExperimentResult::new("simulate", seed);
    result.push_meta_number("e_t", model.e_t);
    result.push_meta_number("e_s", model.e_s);
    let row = Row::new(0, seed)
        .param("layers", w.geometry.layers())
        .param("address", v.text("address")?)
        .param("data", &w.data)
        .param("k", config.k_layers);
    let row = if model.is_noiseless() {
        let (_, f) = simulate_query(&w.circuit()?, &w.address, &w.data, &ErrorConfiguration::empty())?;
        println!("fidelity {f:.6} (exact)");
        result.push_meta("engine", "exact");
        row.fidelity(f, 0.0).valid(1.0, 0.0)
    } else {
        let s = mc(v)?;
        let e = mitigated_query(&w.circuit()?, &w.address, &w.data, &model, &config, s.samples, seed, s.options)?;
        println!("fidelity {:.6} +- {:.2e}", e.fidelity, e.fidelity_ci);
        println!("valid_fraction {:.6} +- {:.2e}", e.valid_fraction, e.valid_fraction_ci);
        result.push_meta("engine", "monte_carlo");
        let mut row = row.fidelity(e.fidelity, e.fidelity_ci).valid(e.valid_fraction, e.valid_fraction_ci);
        row.n_samples = e.n_samples as u64;
        row
    };
    result.rows.push(row);
    Ok(result)
}

fn verify_gates(doc: &KvDocument) -> Result<()> {
    let v = Values(doc);
    let e_t: f64 = v.parse("noise.e_t")?;
    let e_s: f64 = match v.opt_text("noise.e_s") {
        Some(_) => v.parse("noise.e_s")?,
        None => e_t / 10.0,
    };
    // Registry overrides only change counts, so a one-layer geometry suffices.
    let model: NoiseModel = noise_from_kv(doc, &QramGeometry::new(1)?)?;
    let mut failed = Vec::new();
    let mut show = |r: bbqram::gates::VerificationReport| {
        print!("{r}");
        if !r.passed() {
            failed.push(r.subject.clone());
        }
    };
    show(verify_routing_equivalence(&routing_unitary(RoutingKind::UPrime), Scenario::UpwardConstraints)?);
    show(verify_routing_equivalence(
        &routing_unitary(RoutingKind::UDoublePrime),
        Scenario::DownwardConstraints,
    )?);
    for ((op, case), entry) in model.registry.entries() {
        if entry.reference.is_some() {
            show(verify_reference_circuit(&model.registry, *op, *case)?);
        }
    }
    println!("pass tolerance {PASS_TOL:e}");
    println!();
    println!("noise booking, trace distance to the exact noisy circuit (e_t {e_t}, e_s {e_s}):");
    let probes: [(&str, ReferenceCircuit, Vec<&str>); 2] = [
        ("U' one-target (5 CZ)", uprime_one_target(), PROBE_INPUTS.to_vec()),
        ("router star (10 CZ)", router_star(), vec!["0000", "1+0+", "++0+", "+++0"]),
    ];
    for (name, circuit, inputs) in probes {
        println!("  {name}");
        for r in compare_calibrations(&circuit, &inputs, e_t, e_s)? {
            let better = if r.sequential <= r.lumped { "sequential" } else { "lumped" };
            println!(
                "    |{}>  sequential {:.3e}  lumped {:.3e}  closer: {better}",
                r.input, r.sequential, r.lumped
            );
        }
    }
    if !failed.is_empty() {
        bail!("verification failed: {}", failed.join(", "));
    }
    Ok(())
}

fn readout(v: &Values) -> Result<()> {
    let hist: Vec<f64> = v.list("hist")?;
    let clip: bool = v.parse("clip")?;
    let mats = v
        .text("response")?
        .split(';')
        .map(|m| {
            let x: Vec<f64> = parse_list(m).map_err(|e| ConfigError(format!("response: {e}")))?;
            match x.as_slice() {
                [a, b, c, d] => Ok([[*a, *b], [*c, *d]]),
                _ => Err(ConfigError(format!("response: expected 4 entries per matrix, got {}", x.len()))),
            }
        })
        .collect::<Result<Vec<Response>, ConfigError>>()?;
    if !hist.len().is_power_of_two() || hist.len() < 2 {
        return Err(ConfigError(format!("hist: {} entries is not a power of two", hist.len())).into());
    }
    let n = hist.len().trailing_zeros() as usize;
    let mats = match mats.len() {
        1 => vec![mats[0]; n],
        _ => mats,
    };
    let corrected = correct_readout(&hist, &mats, clip)?;
    let text: Vec<String> = corrected.iter().map(|x| format!("{x:.6}")).collect();
    println!("corrected {}", text.join(","));
    println!("sum {:.9}", corrected.iter().sum::<f64>());
    Ok(())
}

fn write_result(r: &ExperimentResult, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = format!("{}_seed{}", r.id, r.seed);
    let mut written = Vec::new();
    let mut put = |ext: &str, text: String| -> Result<()> {
        let path = dir.join(format!("{stem}.{ext}"));
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(())
    };
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        put("csv", r.to_csv()?)?;
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        put("json", r.to_json()?)?;
    }
    Ok(written)
}

fn weak_rows(r: &ExperimentResult) -> Vec<String> {
    r.rows
        .iter()
        .enumerate()
        .filter(|(_, row)| row.statistically_weak())
        .map(|(i, row)| {
            format!(
                "{} row {i}: half-width {:.2e} exceeds infidelity {:.2e}",
                r.id,
                row.fidelity_ci.unwrap_or(f64::NAN),
                row.infidelity().unwrap_or(f64::NAN)
            )
        })
        .collect()
}
