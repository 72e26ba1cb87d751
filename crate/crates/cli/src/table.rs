//! Result tables and their CSV form.
//!
//! Layout: `# key: value` metadata lines, one `name_unit` header row, then
//! data rows. Values carry 9 significant digits in the shortest of fixed or
//! exponent notation; lines end in LF.

use std::io::Write;
use std::path::Path;

use crate::error::CliError;

pub const TIMESTAMP_KEY: &str = "timestamp";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    /// Empty for dimensionless quantities.
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }

    pub fn header(&self) -> String {
        if self.unit.is_empty() {
            self.name.clone()
        } else {
            format!("{}_{}", self.name, self.unit)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    /// Ordered `(key, value)` pairs; keys are unique.
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(name: &str, columns: Vec<Column>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table `{}`", self.name);
        self.rows.push(row);
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.metadata.push((key.into(), value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, header: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.header() == header || c.name == header)
    }

    pub fn column(&self, header: &str) -> Option<Vec<f64>> {
        let k = self.column_index(header)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let units: Vec<&str> = self.columns.iter().map(|c| c.unit.as_str()).collect();
        out.push_str(&format!("# units: {}\n", units.join(",")));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.columns.iter().map(Column::header))
            .expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_value(*v)))
                .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii"));
        out
    }

    pub fn from_csv(name: &str, text: &str) -> Result<Self, CliError> {
        let bad = |m: String| CliError::Io(format!("{name}: {m}"));
        let mut metadata = Vec::new();
        let mut units: Option<Vec<String>> = None;
        let mut body = String::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest
                    .split_once(": ")
                    .ok_or_else(|| bad(format!("bad metadata line `{line}`")))?;
                if k == "units" {
                    units = Some(v.split(',').map(str::to_owned).collect());
                } else {
                    metadata.push((k.to_owned(), v.to_owned()));
                }
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let headers: Vec<String> = r
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let units = units.unwrap_or_else(|| vec![String::new(); headers.len()]);
        if units.len() != headers.len() {
            return Err(bad("units line does not match the header".into()));
        }
        let columns = headers
            .iter()
            .zip(&units)
            .map(|(h, u)| {
                let name = if u.is_empty() {
                    h.clone()
                } else {
                    h.strip_suffix(&format!("_{u}")).unwrap_or(h).to_owned()
                };
                Column { name, unit: u.clone() }
            })
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}"))))
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Ok(Self {
            name: name.into(),
            columns,
            rows,
            metadata,
        })
    }

    /// Write `<dir>/<name>.csv` through a temporary file and rename.
    pub fn write(&self, dir: &Path) -> Result<std::path::PathBuf, CliError> {
        let path = dir.join(format!("{}.csv", self.name));
        write_atomic(&path, self.to_csv().as_bytes())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
        Self::from_csv(name, &text)
    }
}

/// CSV text without the timestamp line: the part that must be reproducible.
pub fn payload(csv_text: &str) -> String {
    let prefix = format!("# {TIMESTAMP_KEY}: ");
    csv_text
        .lines()
        .filter(|l| !l.starts_with(&prefix))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(CliError::io)?;
    tmp.write_all(bytes).map_err(CliError::io)?;
    tmp.flush().map_err(CliError::io)?;
    tmp.persist(path)
        .map_err(|e| CliError::io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// 9 significant digits, `%g` style.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_fraction(&format!("{:.*}", (8 - exp) as usize, v)).to_owned()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
