//! Flat `key = value` configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key ws* '=' ws* value
//! key     := [A-Za-z0-9_.-]+
//! value   := any* (trimmed, may be empty)
//! ```
//!
//! Keys are unique. Values are read by the consumer; errors name the line.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gates::registry::{DecompositionRegistry, RegistryOp};
use crate::model::{Connectivity, Phase, QramGeometry};
use crate::noise::{InjectionSpec, NoiseModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// 1-based source line, 0 for entries built in code.
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvDocument {
    entries: Vec<Entry>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || "_.-".contains(c))
}

impl KvDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: n + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let k = k.trim();
            if !valid_key(k) {
                return Err(err(format!("bad key {k:?}")));
            }
            if let Some(prev) = doc.entries.iter().find(|e| e.key == k) {
                return Err(err(format!("duplicate key {k} (first on line {})", prev.line)));
            }
            doc.entries.push(Entry {
                key: k.to_string(),
                value: v.trim().to_string(),
                line: n + 1,
            });
        }
        Ok(doc)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        debug_assert!(valid_key(key));
        let value = value.to_string();
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value,
            None => self.entries.push(Entry {
                key: key.to_string(),
                value,
                line: 0,
            }),
        }
    }

    /// Drops every entry whose key starts with `prefix`.
    pub fn remove_prefix(&mut self, prefix: &str) {
        self.entries.retain(|e| !e.key.starts_with(prefix));
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Entries whose key starts with `prefix`.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key.starts_with(prefix))
    }

    /// Parses the value of `key` if present.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|err| Error::Parse {
                line: e.line,
                msg: format!("{key}: {err}"),
            }),
        }
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{} = {}", e.key, e.value);
        }
        out
    }

    /// Fails on the first key not accepted by `known`.
    pub fn reject_unknown(&self, known: impl Fn(&str) -> bool) -> Result<()> {
        match self.entries.iter().find(|e| !known(&e.key)) {
            Some(e) => Err(Error::Parse {
                line: e.line,
                msg: format!("unknown key {}", e.key),
            }),
            None => Ok(()),
        }
    }
}

pub fn is_noise_key(k: &str) -> bool {
    matches!(k, "noise.e_t" | "noise.e_s") || k.starts_with("noise.inject.") || k.starts_with("registry.")
}

/// Writes the rates, injections (`noise.inject.<i> = <qubit> <phase> <p>`)
/// and registry entries that differ from the standard table
/// (`registry.<op>.<case> = <cz> <single>`).
pub fn noise_to_kv(model: &NoiseModel, geometry: &QramGeometry, doc: &mut KvDocument) {
    doc.set("noise.e_t", model.e_t);
    doc.set("noise.e_s", model.e_s);
    for (i, inj) in model.injections.iter().enumerate() {
        doc.set(
            &format!("noise.inject.{i}"),
            format!("{} {} {}", geometry.name(inj.qubit), inj.phase.token(), inj.p),
        );
    }
    let standard = DecompositionRegistry::standard();
    for ((op, case), entry) in model.registry.entries() {
        if standard.get(*op, *case).ok() != Some(entry) {
            let sq = entry.single_qubit_count.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
            doc.set(&format!("registry.{}.{}", op.token(), case.token()), format!("{} {sq}", entry.cz_count));
        }
    }
}

/// Reads the noise keys. Missing `noise.e_s` defaults to `e_t / 10`.
pub fn noise_from_kv(doc: &KvDocument, geometry: &QramGeometry) -> Result<NoiseModel> {
    let e_t: f64 = doc.parsed("noise.e_t")?.unwrap_or(0.0);
    let e_s: f64 = doc.parsed("noise.e_s")?.unwrap_or(e_t / 10.0);
    let mut model = NoiseModel::with_rates(e_t, e_s).map_err(|e| at_key(doc, "noise.e_t", e))?;
    let mut injections: Vec<(usize, &Entry)> = Vec::new();
    for e in doc.with_prefix("noise.inject.") {
        let idx = e.key["noise.inject.".len()..].parse::<usize>().map_err(|_| Error::Parse {
            line: e.line,
            msg: format!("injection key {} needs a numeric index", e.key),
        })?;
        injections.push((idx, e));
    }
    injections.sort_by_key(|(i, _)| *i);
    for (_, e) in injections {
        let perr = |msg: String| Error::Parse { line: e.line, msg };
        let f: Vec<&str> = e.value.split_whitespace().collect();
        if f.len() != 3 {
            return Err(perr("expected `<qubit> <phase> <p>`".into()));
        }
        let qubit = geometry.parse_qubit(f[0]).map_err(|x| perr(x.to_string()))?;
        let phase: Phase = f[1].parse().map_err(|x: Error| perr(x.to_string()))?;
        let p: f64 = f[2].parse().map_err(|_| perr(format!("bad probability {:?}", f[2])))?;
        model = model
            .with_injection(InjectionSpec { qubit, phase, p })
            .map_err(|x| perr(x.to_string()))?;
    }
    for e in doc.with_prefix("registry.") {
        let perr = |msg: String| Error::Parse { line: e.line, msg };
        let rest = &e.key["registry.".len()..];
        let (op, case) = rest
            .split_once('.')
            .ok_or_else(|| perr("expected registry.<op>.<case>".into()))?;
        let op: RegistryOp = op.parse().map_err(|x: Error| perr(x.to_string()))?;
        let case: Connectivity = case.parse().map_err(|x: Error| perr(x.to_string()))?;
        let f: Vec<&str> = e.value.split_whitespace().collect();
        let count = |s: &str| s.parse::<usize>().map_err(|_| perr(format!("bad count {s:?}")));
        let (cz, sq) = match f.as_slice() {
            [cz] => (count(cz)?, None),
            [cz, "-"] => (count(cz)?, None),
            [cz, sq] => (count(cz)?, Some(count(sq)?)),
            _ => return Err(perr("expected `<cz> [<single>]`".into())),
        };
        model.registry.set_counts(op, case, Some(cz), sq);
    }
    Ok(model)
}

fn at_key(doc: &KvDocument, key: &str, e: Error) -> Error {
    Error::Parse {
        line: doc.get(key).map(|x| x.line).unwrap_or(0),
        msg: e.to_string(),
    }
}
