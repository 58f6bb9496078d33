//! Comma-separated tables with a `#`-commented provenance preamble.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub struct Table {
    preamble: Vec<String>,
    header: String,
    rows: Vec<String>,
}

impl Table {
    pub fn new(preamble: Vec<String>, header: impl Into<String>) -> Self {
        Self {
            preamble,
            header: header.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: String) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for line in &self.preamble {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(s, "{}", self.header);
        for r in &self.rows {
            let _ = writeln!(s, "{r}");
        }
        s
    }

    /// Writes `dir/name` through a temporary file and a rename.
    pub fn write_atomic(&self, dir: &Path, name: &str) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
        fs::write(&tmp, self.render())?;
        if let Err(e) = fs::rename(&tmp, &path) {
            let _ = fs::remove_file(&tmp);
            return Err(e);
        }
        Ok(path)
    }
}
