//! Result rows and their CSV form.
//!
//! Line 1 is a version stamp, line 2 the column header. Values carry 17
//! significant digits; fields are comma-separated and lines end in `\n`.
//! Annotations are `key=value` pairs joined by `;`.

use std::fmt::Write as _;

pub const FORMAT_VERSION: &str = "# mgrit-modes-results v1";

pub const COLUMNS: [&str; 16] = [
    "problem",
    "method",
    "variant",
    "relax",
    "levels",
    "cycle",
    "m",
    "m2",
    "nx",
    "nt",
    "k",
    "value",
    "theta_x",
    "theta_y",
    "omega0",
    "annotations",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub problem: String,
    pub method: String,
    pub variant: String,
    pub relax: String,
    pub levels: usize,
    pub cycle: String,
    pub m: usize,
    pub m2: usize,
    pub nx: usize,
    pub nt: usize,
    pub k: usize,
    /// `None` marks a row whose computation failed (see annotations).
    pub value: Option<f64>,
    pub theta_x: Option<f64>,
    pub theta_y: Option<f64>,
    pub omega0: Option<f64>,
    pub annotations: Vec<(String, String)>,
}

impl ResultRow {
    pub fn annotation(&self, key: &str) -> Option<&str> {
        self.annotations.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn is_error(&self) -> bool {
        self.value.is_none()
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            ',' | ';' | '\n' | '\r' => ' ',
            c => c,
        })
        .collect()
}

fn number(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.16e}"))
}

/// Sorts by (method, variant, k), keeping the insertion order of ties.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| (&a.method, &a.variant, a.k).cmp(&(&b.method, &b.variant, b.k)));
}

pub fn render(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_VERSION);
    out.push('\n');
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let notes: Vec<String> = r
            .annotations
            .iter()
            .map(|(k, v)| format!("{}={}", sanitize(k), sanitize(v)))
            .collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            sanitize(&r.problem),
            sanitize(&r.method),
            sanitize(&r.variant),
            r.relax,
            r.levels,
            r.cycle,
            r.m,
            r.m2,
            r.nx,
            r.nt,
            r.k,
            number(r.value),
            number(r.theta_x),
            number(r.theta_y),
            number(r.omega0),
            notes.join(";")
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReadError {
    #[error("missing version line `{FORMAT_VERSION}`")]
    Version,
    #[error("header does not match the expected columns")]
    Header,
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
}

fn parse_opt(s: &str, line: usize) -> Result<Option<f64>, ReadError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| ReadError::Row {
        line,
        message: format!("bad number `{s}`"),
    })
}

fn parse_usize(s: &str, line: usize) -> Result<usize, ReadError> {
    s.parse().map_err(|_| ReadError::Row {
        line,
        message: format!("bad integer `{s}`"),
    })
}

/// Inverse of [`render`].
pub fn parse(text: &str) -> Result<Vec<ResultRow>, ReadError> {
    let mut lines = text.lines();
    if lines.next() != Some(FORMAT_VERSION) {
        return Err(ReadError::Version);
    }
    if lines.next() != Some(COLUMNS.join(",").as_str()) {
        return Err(ReadError::Header);
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 3;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != COLUMNS.len() {
            return Err(ReadError::Row {
                line: n,
                message: format!("{} fields, expected {}", f.len(), COLUMNS.len()),
            });
        }
        let annotations = f[15]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|kv| {
                let (k, v) = kv.split_once('=').unwrap_or((kv, ""));
                (k.to_string(), v.to_string())
            })
            .collect();
        rows.push(ResultRow {
            problem: f[0].into(),
            method: f[1].into(),
            variant: f[2].into(),
            relax: f[3].into(),
            levels: parse_usize(f[4], n)?,
            cycle: f[5].into(),
            m: parse_usize(f[6], n)?,
            m2: parse_usize(f[7], n)?,
            nx: parse_usize(f[8], n)?,
            nt: parse_usize(f[9], n)?,
            k: parse_usize(f[10], n)?,
            value: parse_opt(f[11], n)?,
            theta_x: parse_opt(f[12], n)?,
            theta_y: parse_opt(f[13], n)?,
            omega0: parse_opt(f[14], n)?,
            annotations,
        });
    }
    Ok(rows)
}
