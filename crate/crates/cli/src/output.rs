use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use dismem_core::figure::{emit_figure, render, FigureData, FigureKind, FigureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the resolved configuration and options, hex.
    pub config_digest: String,
    pub version: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` when set.
    pub timestamp: u64,
    pub artifacts: Vec<String>,
}

pub fn digest<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    let hash = Sha256::digest(&bytes);
    Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

/// Where a command's results go: stdout, or files under `--out`.
pub struct Sink<'a> {
    pub format: Format,
    pub out_dir: Option<PathBuf>,
    pub stdout: &'a mut dyn Write,
    artifacts: Vec<PathBuf>,
}

impl<'a> Sink<'a> {
    pub fn new(format: Format, out_dir: Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Self> {
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(Self {
            format,
            out_dir,
            stdout,
            artifacts: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.out_dir.as_ref().map(|d| d.join(name))
    }

    fn write_file(&mut self, path: &Path, contents: &str) -> Result<()> {
        std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.push(path.to_path_buf());
        Ok(())
    }

    /// Writes `contents` to `<out>/<name>` or to stdout.
    pub fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        match self.path(name) {
            Some(p) => self.write_file(&p, contents),
            None => {
                self.stdout.write_all(contents.as_bytes())?;
                Ok(())
            }
        }
    }

    /// Always to stdout, even with `--out`.
    pub fn say(&mut self, line: &str) -> Result<()> {
        writeln!(self.stdout, "{line}")?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.put(&format!("{stem}.json"), &text)
    }

    /// SVG plus sibling CSV under `--out`; SVG alone on stdout.
    pub fn figure(&mut self, stem: &str, kind: FigureKind, title: &str, data: FigureData<'_>) -> Result<()> {
        match self.path(&format!("{stem}.svg")) {
            Some(p) => {
                let spec = FigureSpec::new(kind, title, p);
                let emitted = emit_figure(&spec, data)?;
                self.artifacts.push(emitted.svg);
                self.artifacts.push(emitted.csv);
            }
            None => {
                let spec = FigureSpec::new(kind, title, format!("{stem}.svg"));
                let r = render(&spec, data)?;
                self.stdout.write_all(r.svg.as_bytes())?;
            }
        }
        Ok(())
    }

    /// The CSV half of a figure, on its own.
    pub fn figure_csv(&mut self, stem: &str, kind: FigureKind, data: FigureData<'_>) -> Result<()> {
        let spec = FigureSpec::new(kind, stem, format!("{stem}.svg"));
        let r = render(&spec, data)?;
        self.put(&format!("{stem}.csv"), &r.csv)
    }

    pub fn unsupported(&self, command: &str) -> Result<()> {
        bail!("--format {:?} is not supported by `{command}`", self.format)
    }

    /// Writes `manifest.json` when results went to a directory.
    pub fn finish(mut self, command: &str, config_digest: String) -> Result<Option<RunManifest>> {
        let Some(dir) = self.out_dir.clone() else {
            return Ok(None);
        };
        let names = self
            .artifacts
            .iter()
            .map(|p| p.strip_prefix(&dir).unwrap_or(p).display().to_string())
            .collect();
        let manifest = RunManifest {
            command: command.to_string(),
            config_digest,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
            artifacts: names,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        self.write_file(&dir.join("manifest.json"), &text)?;
        Ok(Some(manifest))
    }
}

/// Left-aligned plain-text table.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&mut header.iter().copied());
    out += &line(&mut widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str));
    for row in rows {
        out += &line(&mut row.iter().map(String::as_str));
    }
    out
}

pub fn csv_rows(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
