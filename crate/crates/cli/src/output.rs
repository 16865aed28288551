//! Output files. Each is written under a `.partial` name and renamed once
//! complete, so an interrupted run never leaves a file that looks finished.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

fn partial(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: vec![],
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Names written so far, in order.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn commit(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        let tmp = partial(&path);
        fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
        fs::rename(&tmp, &path).with_context(|| format!("cannot finalize {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn text(&mut self, name: &str, s: &str) -> Result<()> {
        self.commit(name, s.as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.commit(name, s.as_bytes())
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(&table.header)?;
        for r in &table.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().context("csv buffer")?;
        self.commit(name, &bytes)
    }
}

/// String table destined for CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[k].parse().ok()).collect()
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
