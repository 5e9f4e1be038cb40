//! CSV tables, gnuplot columns and the manifest, all written with fixed
//! formatting so that a rerun reproduces the files byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub notes: Vec<String>,
    /// Columns to emit as `x y` data files, as (x, y) column indices.
    pub plots: Vec<(usize, usize)>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            plots: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn plot_all_against(mut self, x: usize) -> Self {
        self.plots = (0..self.columns.len()).filter(|&c| c != x).map(|c| (x, c)).collect();
        self
    }
}

/// Nine significant digits, as in `7.14457716e-1`.
pub fn number(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.8e}")
    }
}

pub fn manifest_hash(manifest: &str) -> String {
    hex::encode(Sha256::digest(manifest.as_bytes()))
}

pub fn render_csv(table: &Table, hash: &str, label: &str) -> String {
    let mut s = String::new();
    writeln!(s, "# spinsq {} {label}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(s, "# manifest-sha256: {hash}").unwrap();
    for n in &table.notes {
        writeln!(s, "# {n}").unwrap();
    }
    writeln!(s, "{}", table.columns.join(",")).unwrap();
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&v| number(v)).collect();
        writeln!(s, "{}", cells.join(",")).unwrap();
    }
    s
}

fn render_plot(table: &Table, x: usize, y: usize) -> String {
    let mut s = format!("# {} {}\n", table.columns[x], table.columns[y]);
    for row in &table.rows {
        writeln!(s, "{} {}", number(row[x]), number(row[y])).unwrap();
    }
    s
}

/// Write the manifest, every table as `<name>.csv` and the requested plot
/// columns as `<name>_<y>.dat`. Returns the manifest hash.
pub fn write_artifacts(dir: &Path, manifest: &str, label: &str, tables: &[Table]) -> std::io::Result<String> {
    fs::create_dir_all(dir)?;
    let hash = manifest_hash(manifest);
    fs::write(dir.join("manifest.toml"), manifest)?;
    for t in tables {
        fs::write(dir.join(format!("{}.csv", t.name)), render_csv(t, &hash, label))?;
        for &(x, y) in &t.plots {
            fs::write(dir.join(format!("{}_{}.dat", t.name, t.columns[y])), render_plot(t, x, y))?;
        }
    }
    Ok(hash)
}
