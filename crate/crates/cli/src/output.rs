use crate::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Magic bytes of the binary field format.
pub const FIELD_MAGIC: &[u8; 4] = b"RFLD";
pub const FIELD_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_hash: &'a str,
    artifacts: &'a [Artifact],
}

/// Output directory that records every file it writes.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        Ok(Self { root: root.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact { path: name.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(path)
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes a CSV with a fixed header; every row must match its length.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    /// Writes `manifest.json` listing all artifacts so far.
    pub fn finish(mut self, command: &str, config_hash: &str) -> Result<Vec<Artifact>, CliError> {
        let manifest = Manifest { tool: "richards-front", version: env!("CARGO_PKG_VERSION"), command, config_hash, artifacts: &self.artifacts };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        let path = self.root.join("manifest.json");
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        Ok(std::mem::take(&mut self.artifacts))
    }
}

/// Locale-independent float formatting with full round-trip precision.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

/// Little-endian field series:
/// `magic, version: u32, dimension: u32, cells: u32, count: u32,
/// half_width: f64`, then per snapshot `t: f64` and `cells^dimension` values.
pub fn encode_fields(dimension: usize, cells: usize, half_width: f64, fields: &[richards_front::solver::SolutionField]) -> Vec<u8> {
    let n = cells.pow(dimension as u32);
    let mut out = Vec::with_capacity(28 + fields.len() * (n + 1) * 8);
    out.extend_from_slice(FIELD_MAGIC);
    for x in [FIELD_VERSION, dimension as u32, cells as u32, fields.len() as u32] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&half_width.to_le_bytes());
    for f in fields {
        out.extend_from_slice(&f.t.to_le_bytes());
        for v in &f.v {
            out.write_all(&v.to_le_bytes()).expect("writing to a Vec cannot fail");
        }
    }
    out
}

/// Inverse of [`encode_fields`].
pub fn decode_fields(bytes: &[u8]) -> Option<(usize, usize, f64, Vec<richards_front::solver::SolutionField>)> {
    let rd_u32 = |o: usize| bytes.get(o..o + 4).map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")));
    let rd_f64 = |o: usize| bytes.get(o..o + 8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")));
    if bytes.get(..4)? != FIELD_MAGIC || rd_u32(4)? != FIELD_VERSION {
        return None;
    }
    let (dim, cells, count) = (rd_u32(8)? as usize, rd_u32(12)? as usize, rd_u32(16)? as usize);
    let half_width = rd_f64(20)?;
    let n = cells.checked_pow(dim as u32)?;
    let mut off = 28;
    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        let t = rd_f64(off)?;
        off += 8;
        let v = (0..n).map(|k| rd_f64(off + 8 * k)).collect::<Option<Vec<f64>>>()?;
        off += 8 * n;
        fields.push(richards_front::solver::SolutionField { t, v });
    }
    (off == bytes.len()).then_some((dim, cells, half_width, fields))
}
