//! Two-column point tables in CSV and JSON.
//!
//! CSV: one `# key=value,...` metadata line, a column-name line, then rows.
//! JSON: `{"meta": {...}, "columns": [..], "points": [[x, y], ...]}`.
//! Numbers are rounded to 12 significant digits in both encodings, so the
//! two parse back to identical values.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub kind: String,
    pub sensitivity: f64,
    pub sigma2: f64,
    pub dim: u32,
    pub rounds: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePointTable {
    pub meta: TableMeta,
    pub columns: [String; 2],
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug)]
pub struct ParseError(String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed table: {}", self.0)
    }
}

impl std::error::Error for ParseError {}

/// Rounds to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn num(v: f64) -> String {
    format!("{:?}", round12(v))
}

impl CurvePointTable {
    pub fn new(
        meta: TableMeta,
        columns: [&str; 2],
        points: impl IntoIterator<Item = (f64, f64)>,
    ) -> Self {
        CurvePointTable {
            meta,
            columns: columns.map(String::from),
            points: points
                .into_iter()
                .map(|(x, y)| [round12(x), round12(y)])
                .collect(),
        }
    }

    pub fn csv_header(&self) -> String {
        let m = &self.meta;
        let mut s = format!(
            "# kind={},sensitivity={},sigma2={},dim={},rounds={}",
            m.kind,
            num(m.sensitivity),
            num(m.sigma2),
            m.dim,
            m.rounds
        );
        if let Some(g) = m.gamma {
            let _ = write!(s, ",gamma={}", num(g));
        }
        if let Some(seed) = m.seed {
            let _ = write!(s, ",seed={seed}");
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.csv_header();
        let _ = write!(s, "\n{},{}\n", self.columns[0], self.columns[1]);
        for [x, y] in &self.points {
            let _ = writeln!(s, "{},{}", num(*x), num(*y));
        }
        s
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("finite numbers serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("finite numbers serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError(e.to_string()))
    }

    /// Parses the first table in `text`; later tables and comment lines are
    /// ignored.
    pub fn from_csv(text: &str) -> Result<Self, ParseError> {
        let mut lines = text.lines().skip_while(|l| l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| ParseError("empty input".into()))?;
        let meta = parse_header(header)?;
        let cols = lines
            .next()
            .ok_or_else(|| ParseError("missing column line".into()))?;
        let (a, b) = cols
            .split_once(',')
            .ok_or_else(|| ParseError(cols.into()))?;
        let mut points = Vec::new();
        for line in lines {
            if line.trim().is_empty() || line.starts_with('#') {
                break;
            }
            let (x, y) = line
                .split_once(',')
                .ok_or_else(|| ParseError(line.into()))?;
            let x = x.trim().parse().map_err(|_| ParseError(line.into()))?;
            let y = y.trim().parse().map_err(|_| ParseError(line.into()))?;
            points.push([x, y]);
        }
        Ok(CurvePointTable {
            meta,
            columns: [a.into(), b.into()],
            points,
        })
    }
}

fn parse_header(line: &str) -> Result<TableMeta, ParseError> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| ParseError(line.into()))?
        .trim();
    let mut meta = TableMeta {
        kind: String::new(),
        sensitivity: f64::NAN,
        sigma2: f64::NAN,
        dim: 0,
        rounds: 0,
        gamma: None,
        seed: None,
    };
    let bad = |k: &str| ParseError(format!("bad value for {k}"));
    for field in body.split(',') {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| ParseError(field.into()))?;
        match k {
            "kind" => meta.kind = v.into(),
            "sensitivity" => meta.sensitivity = v.parse().map_err(|_| bad(k))?,
            "sigma2" => meta.sigma2 = v.parse().map_err(|_| bad(k))?,
            "dim" => meta.dim = v.parse().map_err(|_| bad(k))?,
            "rounds" => meta.rounds = v.parse().map_err(|_| bad(k))?,
            "gamma" => meta.gamma = Some(v.parse().map_err(|_| bad(k))?),
            "seed" => meta.seed = Some(v.parse().map_err(|_| bad(k))?),
            _ => {}
        }
    }
    if meta.kind.is_empty() {
        return Err(ParseError("header without kind".into()));
    }
    Ok(meta)
}

/// Several tables plus named scalar results.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub tables: Vec<CurvePointTable>,
    pub summary: Vec<(String, SummaryValue)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SummaryValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for SummaryValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SummaryValue::Number(v) => f.write_str(&num(*v)),
            SummaryValue::Text(s) => f.write_str(s),
        }
    }
}

impl Report {
    pub fn number(&mut self, key: &str, v: f64) {
        self.summary.push((key.into(), SummaryValue::Number(v)));
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) {
        self.summary
            .push((key.into(), SummaryValue::Text(v.into())));
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            s.push_str(&t.to_csv());
        }
        if !self.summary.is_empty() {
            let fields: Vec<String> = self
                .summary
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            let _ = writeln!(s, "\n# summary {}", fields.join(","));
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut summary = serde_json::Map::new();
        for (k, v) in &self.summary {
            let v = match v {
                SummaryValue::Number(x) => serde_json::json!(round12(*x)),
                SummaryValue::Text(t) => serde_json::json!(t),
            };
            summary.insert(k.clone(), v);
        }
        let tables: Vec<_> = self
            .tables
            .iter()
            .map(CurvePointTable::to_json_value)
            .collect();
        let doc = serde_json::json!({ "tables": tables, "summary": summary });
        serde_json::to_string_pretty(&doc).expect("finite numbers serialize")
    }
}
