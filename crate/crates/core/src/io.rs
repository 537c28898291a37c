//! Versioned line-oriented text container shared by reservoir, conceptor and
//! model files.
//!
//! ```text
//! <magic> v<version>
//! key=value
//! @matrix_name
//! matrix <rows> <cols>
//! <row-major values>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored outside matrix blocks.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{fmt_f64, Matrix};

pub struct DocWriter {
    out: String,
}

impl DocWriter {
    pub fn new(magic: &str, version: u32) -> Self {
        DocWriter { out: format!("{magic} v{version}\n") }
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.out.push_str(key);
        self.out.push('=');
        self.out.push_str(&value.to_string());
        self.out.push('\n');
        self
    }

    pub fn real(&mut self, key: &str, value: f64) -> &mut Self {
        self.kv(key, fmt_f64(value))
    }

    pub fn reals(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.kv(key, joined.join(","))
    }

    pub fn matrix(&mut self, name: &str, m: &Matrix) -> &mut Self {
        self.out.push('@');
        self.out.push_str(name);
        self.out.push('\n');
        m.write_text(&mut self.out);
        self
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub struct Doc {
    path: PathBuf,
    pub version: u32,
    values: HashMap<String, (usize, String)>,
    matrices: HashMap<String, Matrix>,
}

impl Doc {
    pub fn parse(text: &str, magic: &str, path: &Path) -> Result<Doc> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, 1, "empty file"))?;
        let version = header
            .strip_prefix(magic)
            .and_then(|rest| rest.trim().strip_prefix('v'))
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or_else(|| Error::parse(path, 1, 1, format!("expected `{magic} v<N>` header")))?;

        let mut values = HashMap::new();
        let mut matrices = HashMap::new();
        while let Some((ln, line)) = lines.next() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('@') {
                let m = Matrix::read_text(&mut lines, path)?;
                if matrices.insert(name.to_string(), m).is_some() {
                    return Err(Error::parse(path, ln + 1, 1, format!("duplicate matrix `{name}`")));
                }
            } else if let Some((k, v)) = line.split_once('=') {
                if values.insert(k.trim().to_string(), (ln + 1, v.trim().to_string())).is_some() {
                    return Err(Error::parse(path, ln + 1, 1, format!("duplicate key `{k}`")));
                }
            } else {
                return Err(Error::parse(path, ln + 1, 1, format!("expected key=value, got `{line}`")));
            }
        }
        Ok(Doc { path: path.to_path_buf(), version, values, matrices })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::parse(&self.path, 0, 0, format!("missing key `{key}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.str(key)?;
        let line = self.values[key].0;
        raw.parse()
            .map_err(|_| Error::parse(&self.path, line, key.len() + 2, format!("invalid value `{raw}` for `{key}`")))
    }

    pub fn reals(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.str(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        let line = self.values[key].0;
        raw.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(&self.path, line, 0, format!("invalid number `{t}` in `{key}`")))
            })
            .collect()
    }

    pub fn matrix(&self, name: &str) -> Result<&Matrix> {
        self.matrices
            .get(name)
            .ok_or_else(|| Error::parse(&self.path, 0, 0, format!("missing matrix `@{name}`")))
    }

    pub fn bad(&self, key: &str, message: impl Into<String>) -> Error {
        let line = self.values.get(key).map_or(0, |(l, _)| *l);
        Error::parse(&self.path, line, 0, message)
    }
}

/// Writes `contents` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{file_name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}
