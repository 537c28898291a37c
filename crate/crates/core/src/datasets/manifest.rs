//! Dataset manifests.
//!
//! ```text
//! #schema: lat_accel,long_accel,grav_accel,speed
//! #sample_rate: 10
//! #classes: stop,straight_ahead
//! path,label,split,kind
//! series/a.csv,stop,train,csv
//! ```
//!
//! `#schema` is required. `#classes` fixes the class order; without it,
//! integer labels must be exactly `0..m` and other labels are ordered by first
//! appearance. Paths are relative to the manifest's directory.

use std::path::{Path, PathBuf};

use super::{read_csv_series, write_csv_series, Dataset, Split};
use crate::error::{Error, Result};
use crate::features::read_wav;
use crate::series::LabeledSeries;

const COLUMN_HEADER: &str = "path,label,split,kind";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryKind {
    Csv,
    Wav,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: String,
    pub split: Split,
    pub kind: EntryKind,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub root: PathBuf,
    pub schema: Vec<String>,
    pub sample_rate_hz: Option<f64>,
    pub classes: Option<Vec<String>>,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str, path: &Path) -> Result<Manifest> {
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut schema = None;
        let mut sample_rate_hz = None;
        let mut classes = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(directive) = line.strip_prefix('#') {
                let Some((key, value)) = directive.split_once(':') else { continue };
                let list = || value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect::<Vec<_>>();
                match key.trim() {
                    "schema" => schema = Some(list()),
                    "classes" => classes = Some(list()),
                    "sample_rate" => {
                        let hz = value.trim().parse::<f64>().ok().filter(|v| *v > 0.0).ok_or_else(|| {
                            Error::parse(path, line_no, 1, format!("invalid sample rate `{}`", value.trim()))
                        })?;
                        sample_rate_hz = Some(hz);
                    }
                    _ => {}
                }
                continue;
            }
            if line == COLUMN_HEADER {
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 4 {
                return Err(Error::parse(path, line_no, 1, format!("expected `{COLUMN_HEADER}`, got `{line}`")));
            }
            let split = cells[2]
                .parse::<Split>()
                .map_err(|_| Error::parse(path, line_no, 3, format!("split must be train or test, got `{}`", cells[2])))?;
            let kind = match cells[3] {
                "csv" => EntryKind::Csv,
                "wav" => EntryKind::Wav,
                other => return Err(Error::parse(path, line_no, 4, format!("kind must be csv or wav, got `{other}`"))),
            };
            if cells[0].is_empty() || cells[1].is_empty() {
                return Err(Error::parse(path, line_no, 1, "path and label must be non-empty"));
            }
            entries.push(ManifestEntry { path: PathBuf::from(cells[0]), label: cells[1].to_string(), split, kind, line: line_no });
        }
        let schema = schema.ok_or_else(|| Error::parse(path, 1, 1, "missing `#schema:` header"))?;
        if schema.is_empty() {
            return Err(Error::parse(path, 1, 1, "schema lists no channels"));
        }
        Ok(Manifest { root, schema, sample_rate_hz, classes, entries })
    }

    /// Class names in label order.
    pub fn class_order(&self) -> Result<Vec<String>> {
        if let Some(classes) = &self.classes {
            for e in &self.entries {
                if !classes.contains(&e.label) {
                    return Err(Error::SchemaMismatch(format!("line {}: label `{}` not in #classes", e.line, e.label)));
                }
            }
            return Ok(classes.clone());
        }
        let numeric: Option<Vec<usize>> = self.entries.iter().map(|e| e.label.parse().ok()).collect();
        if let Some(nums) = numeric {
            let m = nums.iter().max().map_or(0, |&x| x + 1);
            let mut seen = vec![false; m];
            nums.iter().for_each(|&n| seen[n] = true);
            if let Some(missing) = seen.iter().position(|s| !s) {
                return Err(Error::SchemaMismatch(format!("integer labels are not contiguous: {missing} missing")));
            }
            return Ok((0..m).map(|i| i.to_string()).collect());
        }
        let mut order: Vec<String> = Vec::new();
        for e in &self.entries {
            if !order.contains(&e.label) {
                order.push(e.label.clone());
            }
        }
        Ok(order)
    }
}

pub fn load_manifest(path: &Path) -> Result<Dataset> {
    let text = crate::io::read_to_string(path)?;
    let manifest = Manifest::parse(&text, path)?;
    if manifest.entries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let classes = manifest.class_order()?;
    let mut dataset = Dataset { classes: classes.clone(), channel_names: manifest.schema.clone(), train: Vec::new(), test: Vec::new() };
    for e in &manifest.entries {
        let file = manifest.root.join(&e.path);
        if !file.is_file() {
            return Err(Error::MissingFile(file));
        }
        let mut series = match e.kind {
            EntryKind::Csv => {
                let (s, header) = read_csv_series(&file)?;
                if header != manifest.schema {
                    return Err(Error::SchemaMismatch(format!(
                        "{}: columns [{}] differ from schema [{}]",
                        file.display(),
                        header.join(","),
                        manifest.schema.join(",")
                    )));
                }
                s
            }
            EntryKind::Wav => {
                if manifest.schema.len() != 1 {
                    return Err(Error::SchemaMismatch(format!(
                        "{}: audio entries need a single-channel schema",
                        file.display()
                    )));
                }
                let audio = read_wav(&file)?;
                LabeledSeries::from_samples(&audio.samples)?.with_sample_rate(f64::from(audio.sample_rate))
            }
        };
        if series.sample_rate_hz.is_none() {
            series.sample_rate_hz = manifest.sample_rate_hz;
        }
        let label = classes.iter().position(|c| *c == e.label).expect("class order covers every label");
        series = series.with_label(label).with_id(e.path.to_string_lossy());
        match e.split {
            Split::Train => dataset.train.push(series),
            Split::Test => dataset.test.push(series),
        }
    }
    dataset.validate()?;
    Ok(dataset)
}

/// Writes every series as CSV under `dir/series/` plus `dir/manifest.txt`;
/// returns the manifest path.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<PathBuf> {
    dataset.validate()?;
    let series_dir = dir.join("series");
    std::fs::create_dir_all(&series_dir).map_err(|e| Error::io(&series_dir, e))?;
    let mut out = format!("#schema: {}\n", dataset.channel_names.join(","));
    let rate = dataset.train.iter().chain(&dataset.test).find_map(|s| s.sample_rate_hz);
    if let Some(hz) = rate {
        out.push_str(&format!("#sample_rate: {hz}\n"));
    }
    out.push_str(&format!("#classes: {}\n{COLUMN_HEADER}\n", dataset.classes.join(",")));
    for (split, items) in [(Split::Train, &dataset.train), (Split::Test, &dataset.test)] {
        for s in items {
            let name: String = s.id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
            let rel = format!("series/{name}.csv");
            write_csv_series(&dir.join(&rel), s, &dataset.channel_names)?;
            let label = &dataset.classes[s.label.expect("validated")];
            out.push_str(&format!("{rel},{label},{},csv\n", split.name()));
        }
    }
    let path = dir.join("manifest.txt");
    crate::io::write_atomic(&path, out.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn empty_entry_list() {
        let dir = tempfile::tempdir().unwrap();
        let m = write(dir.path(), "m.txt", "#schema: a\npath,label,split,kind\n");
        assert!(matches!(load_manifest(&m), Err(Error::EmptyDataset)));
    }

    #[test]
    fn missing_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let m = write(dir.path(), "m.txt", "#schema: a\nnope.csv,x,train,csv\n");
        match load_manifest(&m) {
            Err(Error::MissingFile(p)) => assert!(p.ends_with("nope.csv")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "s.csv", "a,b\n1,2\n3,4\n");
        let m = write(dir.path(), "m.txt", "#schema: a\ns.csv,x,train,csv\n");
        assert!(matches!(load_manifest(&m), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn parse_errors_cite_lines() {
        let p = Path::new("m.txt");
        match Manifest::parse("#schema: a\nfile.csv,x,validation,csv\n", p) {
            Err(Error::Parse { line: 2, column: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(Manifest::parse("file.csv,x,train,csv\n", p).is_err());
        assert!(Manifest::parse("#schema: a\nfile.csv,x,train\n", p).is_err());
        assert!(Manifest::parse("#schema: a\nfile.csv,x,train,mp3\n", p).is_err());
    }

    #[test]
    fn class_orders() {
        let p = Path::new("m.txt");
        let m = Manifest::parse("#schema: a\nx,b,train,csv\ny,a,train,csv\nz,b,test,csv\n", p).unwrap();
        assert_eq!(m.class_order().unwrap(), vec!["b", "a"]);
        let m = Manifest::parse("#schema: a\nx,1,train,csv\ny,0,train,csv\n", p).unwrap();
        assert_eq!(m.class_order().unwrap(), vec!["0", "1"]);
        let m = Manifest::parse("#schema: a\nx,2,train,csv\ny,0,train,csv\n", p).unwrap();
        assert!(m.class_order().is_err());
        let m = Manifest::parse("#schema: a\n#classes: a,b\nx,c,train,csv\n", p).unwrap();
        assert!(m.class_order().is_err());
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let s = |v: f64, label, id: &str| {
            LabeledSeries::new(Matrix::from_rows(&[[v, v + 0.1, v / 3.0]]).unwrap()).unwrap().with_label(label).with_id(id)
        };
        let ds = Dataset {
            classes: vec!["up".into(), "down".into()],
            channel_names: vec!["x".into()],
            train: vec![s(1.0, 0, "a"), s(2.0, 1, "b")],
            test: vec![s(3.0, 1, "c")],
        };
        let path = write_dataset(dir.path(), &ds).unwrap();
        let back = load_manifest(&path).unwrap();
        assert_eq!(back.classes, ds.classes);
        assert_eq!(back.train.len(), 2);
        for (a, b) in ds.train.iter().chain(&ds.test).zip(back.train.iter().chain(&back.test)) {
            assert_eq!(a.values, b.values);
            assert_eq!(a.label, b.label);
        }
    }
}
