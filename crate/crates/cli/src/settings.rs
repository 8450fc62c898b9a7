//! Flag handling. Every run is reduced to a flat key-value document: the
//! `--config` file first, flags on top, then per-command defaults. That
//! document is what `--dump-config` writes, so re-running it reproduces the
//! outputs exactly.

use std::path::PathBuf;

use bbqram::config::{is_noise_key, KvDocument};
use clap::{Args, ValueEnum};

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandName {
    Build,
    Stats,
    VerifyGates,
    Simulate,
    Scaling,
    Mitigate,
    Inject,
    Entropy,
    Contour,
    Teleport,
    ReadoutCorrect,
}

impl CommandName {
    pub fn token(self) -> &'static str {
        match self {
            CommandName::Build => "build",
            CommandName::Stats => "stats",
            CommandName::VerifyGates => "verify-gates",
            CommandName::Simulate => "simulate",
            CommandName::Scaling => "scaling",
            CommandName::Mitigate => "mitigate",
            CommandName::Inject => "inject",
            CommandName::Entropy => "entropy",
            CommandName::Contour => "contour",
            CommandName::Teleport => "teleport",
            CommandName::ReadoutCorrect => "readout-correct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunOpts {
    /// Base configuration in `key = value` form; flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the effective configuration here before running.
    #[arg(long, value_name = "FILE")]
    pub dump_config: Option<PathBuf>,
    /// Tree depth: `3`, an inclusive range `2..5`, or a list `2,4,6`.
    #[arg(long)]
    pub layers: Option<String>,
    /// Memory contents: a bitstring, `all-ones` or `all-zeros`.
    #[arg(long)]
    pub data: Option<String>,
    /// `uniform`, `basis:<bits>`, `bell:<b1>,<b2>`, `product:<symbols>` or
    /// `file:<path>` with `<re> <im> <bits>` lines.
    #[arg(long)]
    pub address: Option<String>,
    /// Two-qubit gate error rate.
    #[arg(long = "e_t", visible_alias = "e-t")]
    pub e_t: Option<f64>,
    /// Single-qubit gate error rate, `e_t / 10` when absent.
    #[arg(long = "e_s", visible_alias = "e-s")]
    pub e_s: Option<f64>,
    /// Injection `<qubit> <phase> <p>`, repeatable, e.g. `C4 data_loading 0.1`.
    #[arg(long)]
    pub inject: Vec<String>,
    /// Post-selection depth for `simulate`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Post-selection depths for `mitigate`, range or list.
    #[arg(long)]
    pub k_range: Option<String>,
    /// Post-selection scope: `all`, `queried` or `unqueried`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `conditioned` or `direct`.
    #[arg(long)]
    pub sampling: Option<String>,
    /// `weighted` or `strict`.
    #[arg(long)]
    pub acceptance: Option<String>,
    /// Last-layer injection targets, comma separated.
    #[arg(long)]
    pub nodes: Option<String>,
    /// Injection probabilities, comma separated.
    #[arg(long)]
    pub p_grid: Option<String>,
    /// Gate error rates for the contour grid, comma separated.
    #[arg(long)]
    pub e_grid: Option<String>,
    /// Target fidelities for the contour thresholds, comma separated.
    #[arg(long)]
    pub targets: Option<String>,
    /// Measured distribution over bitstrings, comma separated.
    #[arg(long)]
    pub hist: Option<String>,
    /// Per-qubit response `r00,r01,r10,r11`, one per qubit separated by `;`,
    /// or a single matrix shared by all qubits.
    #[arg(long)]
    pub response: Option<String>,
    /// Project the corrected distribution onto the probability simplex.
    #[arg(long)]
    pub clip: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, env = "QRAM_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

enum Need {
    Required,
    Default(&'static str),
    Optional,
}

const MC: [(&str, Need); 4] = [
    ("samples", Need::Default("10000")),
    ("seed", Need::Default("0")),
    ("sampling", Need::Default("conditioned")),
    ("acceptance", Need::Default("weighted")),
];

/// Noise keys a command accepts.
#[derive(Clone, Copy, PartialEq, Eq)]
enum NoiseKeys {
    None,
    /// Rates and registry overrides only.
    Rates,
    All,
}

fn key_table(cmd: CommandName) -> (Vec<(&'static str, Need)>, NoiseKeys) {
    use CommandName::*;
    let mut keys = vec![("command", Need::Required), ("format", Need::Default("csv"))];
    let noise = match cmd {
        Build => {
            keys.extend([("layers", Need::Required), ("data", Need::Default("all-ones"))]);
            NoiseKeys::None
        }
        Stats => {
            keys.extend([("layers", Need::Required), ("data", Need::Default("all-ones"))]);
            NoiseKeys::Rates
        }
        VerifyGates => {
            keys.push(("noise.e_t", Need::Default("0.001")));
            NoiseKeys::Rates
        }
        Simulate => {
            keys.extend([
                ("layers", Need::Required),
                ("data", Need::Default("all-ones")),
                ("address", Need::Default("uniform")),
                ("noise.e_t", Need::Default("0")),
                ("k", Need::Default("0")),
                ("mode", Need::Default("all")),
            ]);
            keys.extend(MC);
            NoiseKeys::All
        }
        Scaling => {
            keys.extend([("layers", Need::Required), ("noise.e_t", Need::Default("0.0001"))]);
            keys.extend(MC);
            NoiseKeys::Rates
        }
        Mitigate => {
            keys.extend([
                ("layers", Need::Required),
                ("data", Need::Default("all-ones")),
                ("address", Need::Default("uniform")),
                ("noise.e_t", Need::Default("0.0001")),
                ("k_range", Need::Optional),
                ("mode", Need::Default("all")),
            ]);
            keys.extend(MC);
            NoiseKeys::All
        }
        Inject => {
            keys.extend([
                ("layers", Need::Required),
                ("data", Need::Default("all-ones")),
                ("address", Need::Default("uniform")),
                ("noise.e_t", Need::Default("0")),
                ("nodes", Need::Optional),
                ("p_grid", Need::Default("0,0.05,0.1,0.15,0.2")),
            ]);
            keys.extend(MC);
            NoiseKeys::Rates
        }
        Entropy => {
            keys.extend([("layers", Need::Required), ("address", Need::Default("uniform"))]);
            NoiseKeys::None
        }
        Contour => {
            keys.extend([
                ("layers", Need::Required),
                ("e_grid", Need::Default("2e-5,5e-5,1e-4,2e-4,5e-4,1e-3,2e-3,3e-3")),
                ("targets", Need::Default("0.99,0.95")),
            ]);
            keys.extend(MC);
            NoiseKeys::None
        }
        Teleport => {
            keys.extend([("samples", Need::Default("2000")), ("seed", Need::Default("0"))]);
            NoiseKeys::None
        }
        ReadoutCorrect => {
            keys.extend([("hist", Need::Required), ("response", Need::Required), ("clip", Need::Default("false"))]);
            NoiseKeys::None
        }
    };
    (keys, noise)
}

fn accepts(keys: &[(&str, Need)], noise: NoiseKeys, key: &str) -> bool {
    if keys.iter().any(|(k, _)| *k == key) {
        return true;
    }
    match noise {
        NoiseKeys::None => false,
        NoiseKeys::Rates => is_noise_key(key) && !key.starts_with("noise.inject."),
        NoiseKeys::All => is_noise_key(key),
    }
}

/// Builds the effective configuration of one run.
pub fn effective_config(cmd: CommandName, opts: &RunOpts) -> Result<KvDocument, ConfigError> {
    let mut doc = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            KvDocument::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
        }
        None => KvDocument::new(),
    };
    if let Some(e) = doc.get("command") {
        if e.value != cmd.token() {
            return Err(ConfigError(format!(
                "config line {} is for command {}, not {}",
                e.line,
                e.value,
                cmd.token()
            )));
        }
    }
    doc.set("command", cmd.token());
    let mut set = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            doc.set(key, v);
        }
    };
    set("layers", opts.layers.clone());
    set("data", opts.data.clone());
    set("address", opts.address.clone());
    set("noise.e_t", opts.e_t.map(|v| v.to_string()));
    set("noise.e_s", opts.e_s.map(|v| v.to_string()));
    set("k", opts.k.map(|v| v.to_string()));
    set("k_range", opts.k_range.clone());
    set("mode", opts.mode.clone());
    set("samples", opts.samples.map(|v| v.to_string()));
    set("seed", opts.seed.map(|v| v.to_string()));
    set("sampling", opts.sampling.clone());
    set("acceptance", opts.acceptance.clone());
    set("nodes", opts.nodes.clone());
    set("p_grid", opts.p_grid.clone());
    set("e_grid", opts.e_grid.clone());
    set("targets", opts.targets.clone());
    set("hist", opts.hist.clone());
    set("response", opts.response.clone());
    set("clip", opts.clip.then(|| "true".to_string()));
    set(
        "format",
        opts.format.map(|f| f.to_possible_value().expect("plain variant").get_name().to_string()),
    );
    if !opts.inject.is_empty() {
        doc.remove_prefix("noise.inject.");
        for (i, spec) in opts.inject.iter().enumerate() {
            doc.set(&format!("noise.inject.{i}"), spec);
        }
    }

    let (keys, noise) = key_table(cmd);
    if let Some(e) = doc.entries().iter().find(|e| !accepts(&keys, noise, &e.key)) {
        let origin = if e.line == 0 {
            "flag".to_string()
        } else {
            format!("config line {}", e.line)
        };
        return Err(ConfigError(format!("{origin}: {} does not take {}", cmd.token(), e.key)));
    }
    for (key, need) in &keys {
        if doc.get(key).is_some() {
            continue;
        }
        match need {
            Need::Required => return Err(ConfigError(format!("{} needs {key}", cmd.token()))),
            Need::Default(v) => doc.set(key, v),
            Need::Optional => {}
        }
    }
    Ok(doc)
}

/// Typed access with messages that name the key and its source line.
pub struct Values<'a>(pub &'a KvDocument);

impl Values<'_> {
    fn fail(&self, key: &str, msg: impl std::fmt::Display) -> ConfigError {
        match self.0.get(key).map(|e| e.line) {
            Some(line) if line > 0 => ConfigError(format!("line {line}: {key}: {msg}")),
            _ => ConfigError(format!("{key}: {msg}")),
        }
    }

    pub fn text(&self, key: &str) -> Result<&str, ConfigError> {
        self.0
            .get(key)
            .map(|e| e.value.as_str())
            .ok_or_else(|| ConfigError(format!("missing {key}")))
    }

    pub fn opt_text(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|e| e.value.as_str())
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.text(key)?;
        raw.parse().map_err(|e| self.fail(key, format!("{raw:?}: {e}")))
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.text(key)?;
        parse_list(raw).map_err(|e| self.fail(key, e))
    }

    /// `n`, `a..b` (inclusive) or `a,b,c`.
    pub fn range(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        let raw = self.text(key)?;
        parse_range(raw).map_err(|e| self.fail(key, e))
    }

    pub fn single(&self, key: &str) -> Result<usize, ConfigError> {
        match self.range(key)?.as_slice() {
            [n] => Ok(*n),
            _ => Err(self.fail(key, "expected a single value")),
        }
    }
}

pub fn parse_list<T: std::str::FromStr>(raw: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err("empty list".into());
    }
    items
        .iter()
        .map(|s| s.parse().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

pub fn parse_range(raw: &str) -> Result<Vec<usize>, String> {
    if let Some((a, b)) = raw.split_once("..") {
        let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let b: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if a > b {
            return Err(format!("empty range {raw}"));
        }
        return Ok((a..=b).collect());
    }
    parse_list(raw)
}
