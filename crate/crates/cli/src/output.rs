//! CSV files with a `#` header block, and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

/// Shortest round-trip decimal form; `-0` keeps its sign.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Paths derived from the main output path.
#[derive(Debug, Clone)]
pub struct OutputSet {
    main: PathBuf,
}

impl OutputSet {
    /// Output set rooted at `main`.
    pub fn new(main: PathBuf) -> Self {
        OutputSet { main }
    }

    /// The main CSV path.
    pub fn main(&self) -> &Path {
        &self.main
    }

    /// `<dir>/<stem>.<suffix>`.
    pub fn sibling(&self, suffix: &str) -> PathBuf {
        let stem = self
            .main
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.main.with_file_name(format!("{stem}.{suffix}"))
    }

    /// Manifest path.
    pub fn manifest(&self) -> PathBuf {
        self.sibling("manifest.json")
    }
}

/// File name without directories, as recorded in the manifest.
pub fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Streaming CSV table.
pub struct Table {
    w: csv::Writer<BufWriter<File>>,
    rows: usize,
}

impl Table {
    /// Writes the `#` comment block and the column row.
    pub fn create(path: &Path, comments: &[String], columns: &[&str]) -> std::io::Result<Self> {
        let mut f = create(path)?;
        for c in comments {
            writeln!(f, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(f);
        w.write_record(columns).map_err(std::io::Error::other)?;
        Ok(Table { w, rows: 0 })
    }

    /// Appends one row.
    pub fn row<I, S>(&mut self, fields: I) -> std::io::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.rows += 1;
        self.w.write_record(fields).map_err(std::io::Error::other)
    }

    /// Flushes and returns the number of data rows.
    pub fn finish(mut self) -> std::io::Result<usize> {
        self.w.flush()?;
        Ok(self.rows)
    }
}

/// Writes pretty JSON with a trailing newline; object keys are sorted.
pub fn write_json(path: &Path, v: &Value) -> std::io::Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, v).map_err(std::io::Error::other)?;
    writeln!(f)?;
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn siblings_share_stem() {
        let o = OutputSet::new(PathBuf::from("data/confined.csv"));
        assert_eq!(
            o.sibling("turning.csv"),
            PathBuf::from("data/confined.turning.csv")
        );
        assert_eq!(o.manifest(), PathBuf::from("data/confined.manifest.json"));
        assert_eq!(num(-0.0), "-0.0");
        assert_eq!(num(1.0), "1.0");
        assert_eq!(num(0.1), "0.1");
    }
}
