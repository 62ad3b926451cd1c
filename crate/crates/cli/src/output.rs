//! Tabular output as CSV with a `#` header block, or as JSON with the same
//! schema.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // shortest representation that parses back to the same bits
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Int(v) => json!(v),
            _ => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar summaries such as fitted exponents.
    pub fits: Vec<(&'static str, f64)>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<Column>) -> Self {
        Self {
            command,
            columns,
            rows: Vec::new(),
            fits: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, config_hash: &str) -> String {
        match format {
            Format::Csv => self.to_csv(config_hash),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json(config_hash))
                    .expect("json values serialise");
                s.push('\n');
                s
            }
        }
    }

    fn to_csv(&self, config_hash: &str) -> String {
        let mut out = format!(
            "# bisphere {VERSION}\n# command: {}\n# config-sha256: {config_hash}\n",
            self.command
        );
        let units: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{}={}", c.name, c.unit))
            .collect();
        out += &format!("# units: {}\n", units.join(" "));
        let names: Vec<&str> = self.columns.iter().map(|c| c.name).collect();
        out += &names.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out += &cells.join(",");
            out.push('\n');
        }
        for (name, v) in &self.fits {
            out += &format!("# fit {name} = {v:e}\n");
        }
        out
    }

    fn to_json(&self, config_hash: &str) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let fits: serde_json::Map<String, Value> = self
            .fits
            .iter()
            .map(|(k, v)| (k.to_string(), Cell::Num(*v).json()))
            .collect();
        json!({
            "tool": "bisphere",
            "version": VERSION,
            "command": self.command,
            "config_sha256": config_hash,
            "columns": self.columns,
            "rows": rows,
            "fits": fits,
        })
    }
}

/// Hash of the settings that determine the data; output destinations and
/// the worker count are left out.
pub fn config_hash(config: &RunConfig) -> String {
    let mut physical = config.clone();
    physical.output.path = None;
    physical.output.error_json = None;
    physical.jobs = None;
    let canonical = serde_json::to_vec(&physical).expect("config serialises");
    format!("{:x}", Sha256::digest(&canonical))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Writes the table to `config.output.path` (plus a `.meta.json` sidecar)
/// or to stdout.
pub fn emit(table: &Table, config: &RunConfig, argv: &[String]) -> Result<(), CliError> {
    let hash = config_hash(config);
    let body = table.render(config.output.format, &hash);
    let Some(path) = &config.output.path else {
        std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Io(e.to_string()))?;
        return Ok(());
    };
    std::fs::write(path, body)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "tool": "bisphere",
        "version": VERSION,
        "command": table.command,
        "argv": argv,
        "config": config,
        "config_sha256": hash,
        "created_unix": created,
        "rows": table.rows.len(),
    });
    let meta_path = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).expect("metadata serialises") + "\n";
    std::fs::write(&meta_path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", meta_path.display())))
}

/// Best effort: a failure to write the error report is only logged.
pub fn write_error_json(path: &Path, err: &CliError) {
    let report =
        json!({ "exit_code": err.exit_code(), "kind": err.kind(), "message": err.to_string() });
    let text = serde_json::to_string_pretty(&report).expect("report serialises") + "\n";
    if let Err(e) = std::fs::write(path, text) {
        log::error!("cannot write error report {}: {e}", path.display());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        let mut t = Table::new(
            "demo",
            vec![col("x", "1"), col("n", "count"), col("y", "length")],
        );
        t.push(vec![0.1.into(), 3usize.into(), Cell::Missing]);
        t.push(vec![(1.0 / 3.0).into(), 4usize.into(), 1e-300.into()]);
        t.fits.push(("slope", -1.0));
        t
    }

    #[test]
    fn csv_numbers_round_trip_exactly() {
        let csv = table().render(Format::Csv, "abc");
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], "x,n,y");
        let second: Vec<&str> = data[2].split(',').collect();
        assert_eq!(
            second[0].parse::<f64>().unwrap().to_bits(),
            (1.0f64 / 3.0).to_bits()
        );
        assert_eq!(second[2].parse::<f64>().unwrap(), 1e-300);
        assert!(data[1].ends_with(','));
        assert!(csv.contains("# units: x=1 n=count y=length"));
        assert!(csv.ends_with("# fit slope = -1e0\n"));
    }

    #[test]
    fn json_mirrors_columns() {
        let v: Value = serde_json::from_str(&table().render(Format::Json, "abc")).unwrap();
        assert_eq!(v["columns"][2]["unit"], "length");
        assert_eq!(v["rows"][0][2], Value::Null);
        assert_eq!(v["rows"][1][0].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(v["fits"]["slope"], -1.0);
    }

    #[test]
    fn hash_depends_on_config() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.jobs = Some(3);
        b.output.path = Some("x.csv".into());
        assert_eq!(config_hash(&a), config_hash(&b));
        b.geometry.r2 = 2.0;
        assert_ne!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            sidecar_path(Path::new("/tmp/run.csv")),
            PathBuf::from("/tmp/run.csv.meta.json")
        );
    }
}
