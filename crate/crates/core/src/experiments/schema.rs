//! Result tables and their CSV/JSON encodings.
//!
//! CSV layout: a header row of `param.*` columns, then the fixed columns
//! `fidelity, fidelity_ci, infidelity, valid_fraction, valid_fraction_ci,
//! n_samples, seed`, then `extra.*` columns. Empty cells mean "not
//! applicable". Footer lines start with `#`:
//!
//! ```text
//! # fit slope=<v> stderr=<v> rows=<i,j,...> name=<id> intercept=<v> ...
//! # meta <key>=<value>
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::stats::LineFit;

pub const FIXED_COLUMNS: [&str; 7] = [
    "fidelity",
    "fidelity_ci",
    "infidelity",
    "valid_fraction",
    "valid_fraction_ci",
    "n_samples",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// Independent variables, in column order.
    pub params: Vec<(String, String)>,
    pub fidelity: Option<f64>,
    pub fidelity_ci: Option<f64>,
    pub valid_fraction: Option<f64>,
    pub valid_fraction_ci: Option<f64>,
    pub n_samples: u64,
    pub seed: u64,
    pub extra: Vec<(String, Option<f64>)>,
}

impl Row {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self {
            params: Vec::new(),
            fidelity: None,
            fidelity_ci: None,
            valid_fraction: None,
            valid_fraction_ci: None,
            n_samples,
            seed,
            extra: Vec::new(),
        }
    }

    pub fn param(mut self, name: &str, value: impl ToString) -> Self {
        self.params.push((name.to_string(), value.to_string()));
        self
    }

    pub fn fidelity(mut self, f: f64, ci: f64) -> Self {
        self.fidelity = Some(f);
        self.fidelity_ci = Some(ci);
        self
    }

    pub fn valid(mut self, v: f64, ci: f64) -> Self {
        self.valid_fraction = Some(v);
        self.valid_fraction_ci = Some(ci);
        self
    }

    pub fn extra(mut self, name: &str, value: f64) -> Self {
        self.extra.push((name.to_string(), Some(value)));
        self
    }

    pub fn infidelity(&self) -> Option<f64> {
        self.fidelity.map(|f| 1.0 - f)
    }

    pub fn get_param(&self, name: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn get_extra(&self, name: &str) -> Option<f64> {
        self.extra.iter().find(|(k, _)| k == name).and_then(|(_, v)| *v)
    }

    /// A half-width wider than the estimated infidelity itself.
    pub fn statistically_weak(&self) -> bool {
        match (self.infidelity(), self.fidelity_ci) {
            (Some(i), Some(ci)) => i > 0.0 && ci > i,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub name: String,
    /// Row indices entering the fit.
    pub rows: Vec<usize>,
    /// Descriptions of the axes, e.g. `log(layers)`.
    pub x: String,
    pub y: String,
    pub fit: LineFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub id: String,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub fits: Vec<FitRecord>,
    pub meta: Vec<(String, String)>,
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn num(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn parse_num(s: &str, line: usize, col: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Parse {
        line,
        msg: format!("column {col}: {s:?} is not a number"),
    })
}

impl ExperimentResult {
    pub fn new(id: &str, seed: u64) -> Self {
        Self {
            id: id.to_string(),
            seed,
            rows: Vec::new(),
            fits: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push_meta_number(&mut self, key: &str, value: f64) {
        self.push_meta(key, format_number(value));
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn fit(&self, name: &str) -> Option<&FitRecord> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn any_weak(&self) -> bool {
        self.rows.iter().any(Row::statistically_weak)
    }

    fn column_names(&self) -> Result<(Vec<String>, Vec<String>)> {
        let first = match self.rows.first() {
            Some(r) => r,
            None => return Ok((Vec::new(), Vec::new())),
        };
        let params: Vec<String> = first.params.iter().map(|(k, _)| k.clone()).collect();
        let extras: Vec<String> = first.extra.iter().map(|(k, _)| k.clone()).collect();
        for (i, r) in self.rows.iter().enumerate() {
            let p: Vec<&String> = r.params.iter().map(|(k, _)| k).collect();
            let e: Vec<&String> = r.extra.iter().map(|(k, _)| k).collect();
            if p != params.iter().collect::<Vec<_>>() || e != extras.iter().collect::<Vec<_>>() {
                return Err(Error::SizeMismatch(format!("row {i} has different columns")));
            }
        }
        Ok((params, extras))
    }

    pub fn to_csv(&self) -> Result<String> {
        let (params, extras) = self.column_names()?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = params
            .iter()
            .map(|p| format!("param.{p}"))
            .chain(FIXED_COLUMNS.iter().map(|s| s.to_string()))
            .chain(extras.iter().map(|e| format!("extra.{e}")))
            .collect();
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&header).map_err(io)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.params.iter().map(|(_, v)| v.clone()).collect();
            rec.extend([
                num(r.fidelity),
                num(r.fidelity_ci),
                num(r.infidelity()),
                num(r.valid_fraction),
                num(r.valid_fraction_ci),
                r.n_samples.to_string(),
                r.seed.to_string(),
            ]);
            rec.extend(r.extra.iter().map(|(_, v)| num(*v)));
            w.write_record(&rec).map_err(io)?;
        }
        let mut out = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
            .map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&format!("# meta id={}\n# meta seed={}\n", self.id, self.seed));
        for (k, v) in &self.meta {
            out.push_str(&format!("# meta {k}={v}\n"));
        }
        for f in &self.fits {
            let rows: Vec<String> = f.rows.iter().map(|r| r.to_string()).collect();
            out.push_str(&format!(
                "# fit slope={} stderr={} rows={} name={} intercept={} intercept_stderr={} covariance={} weighted={} x={} y={}\n",
                format_number(f.fit.slope),
                format_number(f.fit.slope_stderr),
                rows.join(","),
                f.name,
                format_number(f.fit.intercept),
                format_number(f.fit.intercept_stderr),
                format_number(f.fit.covariance),
                f.fit.weighted,
                f.x,
                f.y
            ));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }

    /// Parses and validates the CSV encoding.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut body = String::new();
        let mut footer = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                footer.push((n + 1, rest.trim()));
            } else if !footer.is_empty() && !line.trim().is_empty() {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: "data row after footer".into(),
                });
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
            .iter()
            .map(str::to_string)
            .collect();
        let np = header.iter().take_while(|h| h.starts_with("param.")).count();
        for (i, want) in FIXED_COLUMNS.iter().enumerate() {
            match header.get(np + i) {
                Some(h) if h == want => {}
                Some(h) => {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("expected column {want}, found {h}"),
                    })
                }
                None => {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("missing column {want}"),
                    })
                }
            }
        }
        let extras = &header[np + FIXED_COLUMNS.len()..];
        if let Some(bad) = extras.iter().find(|h| !h.starts_with("extra.")) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unexpected column {bad}"),
            });
        }
        let mut result = ExperimentResult::new("", 0);
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            let cell = |j: usize| rec.get(j).unwrap_or("");
            let mut row = Row::new(0, 0);
            for j in 0..np {
                row.params.push((header[j][6..].to_string(), cell(j).to_string()));
            }
            let f = |k: usize| parse_num(cell(np + k), line, FIXED_COLUMNS[k]);
            row.fidelity = f(0)?;
            row.fidelity_ci = f(1)?;
            let infid = f(2)?;
            if row.infidelity().zip(infid).is_some_and(|(a, b)| (a - b).abs() > 1e-12)
                || row.fidelity.is_some() != infid.is_some()
            {
                return Err(Error::Parse {
                    line,
                    msg: "infidelity does not equal 1 - fidelity".into(),
                });
            }
            row.valid_fraction = f(3)?;
            row.valid_fraction_ci = f(4)?;
            let int = |k: usize| {
                cell(np + k).parse::<u64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("column {}: {:?} is not an integer", FIXED_COLUMNS[k], cell(np + k)),
                })
            };
            row.n_samples = int(5)?;
            row.seed = int(6)?;
            for (j, name) in extras.iter().enumerate() {
                let v = parse_num(cell(np + FIXED_COLUMNS.len() + j), line, name)?;
                row.extra.push((name[6..].to_string(), v));
            }
            for v in [row.fidelity, row.valid_fraction].into_iter().flatten() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("fraction {v} outside [0, 1]"),
                    });
                }
            }
            if [row.fidelity_ci, row.valid_fraction_ci].iter().flatten().any(|&c| c < 0.0) {
                return Err(Error::Parse {
                    line,
                    msg: "negative half-width".into(),
                });
            }
            result.rows.push(row);
        }
        for (line, text) in footer {
            let perr = |msg: String| Error::Parse { line, msg };
            if let Some(rest) = text.strip_prefix("meta ") {
                let (k, v) = rest.split_once('=').ok_or_else(|| perr("meta line without `=`".into()))?;
                match k {
                    "id" => result.id = v.to_string(),
                    "seed" => result.seed = v.parse().map_err(|_| perr(format!("bad seed {v:?}")))?,
                    _ => result.push_meta(k, v),
                }
            } else if let Some(rest) = text.strip_prefix("fit ") {
                result.fits.push(parse_fit(rest, result.rows.len()).map_err(perr)?);
            } else {
                return Err(perr(format!("unknown footer line {text:?}")));
            }
        }
        Ok(result)
    }
}

fn parse_fit(text: &str, row_count: usize) -> std::result::Result<FitRecord, String> {
    let fields: Vec<(&str, &str)> = text
        .split_whitespace()
        .map(|kv| kv.split_once('=').ok_or(format!("fit field {kv:?} without `=`")))
        .collect::<std::result::Result<_, _>>()?;
    let order: Vec<&str> = fields.iter().take(3).map(|(k, _)| *k).collect();
    if order != ["slope", "stderr", "rows"] {
        return Err("fit line must start with slope, stderr, rows".into());
    }
    let get = |k: &str| fields.iter().find(|(n, _)| *n == k).map(|(_, v)| *v);
    let float = |k: &str| -> std::result::Result<f64, String> {
        get(k)
            .ok_or(format!("fit line lacks {k}"))?
            .parse()
            .map_err(|_| format!("fit {k} is not a number"))
    };
    let rows = match get("rows").unwrap_or("") {
        "" => Vec::new(),
        list => list
            .split(',')
            .map(|r| r.parse::<usize>().map_err(|_| format!("bad row index {r:?}")))
            .collect::<std::result::Result<Vec<_>, _>>()?,
    };
    if let Some(r) = rows.iter().find(|&&r| r >= row_count) {
        return Err(format!("fit refers to row {r} of {row_count}"));
    }
    Ok(FitRecord {
        name: get("name").unwrap_or("fit").to_string(),
        rows,
        x: get("x").unwrap_or("").to_string(),
        y: get("y").unwrap_or("").to_string(),
        fit: LineFit {
            slope: float("slope")?,
            slope_stderr: float("stderr")?,
            intercept: float("intercept").unwrap_or(f64::NAN),
            intercept_stderr: float("intercept_stderr").unwrap_or(f64::NAN),
            covariance: float("covariance").unwrap_or(f64::NAN),
            weighted: get("weighted") == Some("true"),
        },
    })
}
