use std::path::Path;

use super::{ClassifierModel, MODEL_VERSION};
use crate::conceptor::{Aggregate, Conceptor, EvidenceMode};
use crate::error::{Error, Result};
use crate::features::{MfccConfig, NormalizationParams, PreprocessConfig, Preprocessor};
use crate::io::{Doc, DocWriter};

const MAGIC: &str = "cesn-model";

impl ClassifierModel {
    pub fn to_text(&self) -> String {
        let mut w = DocWriter::new(MAGIC, MODEL_VERSION);
        w.kv("classes", self.classes.join(","))
            .real("aperture", self.aperture)
            .kv("evidence.aggregate", match self.evidence.aggregate {
                Aggregate::Mean => "mean",
                Aggregate::Sum => "sum",
            })
            .kv("evidence.normalize_states", self.evidence.normalize_states);
        write_preprocessor(&mut w, &self.preprocessor);
        self.reservoir.write_into(&mut w, "reservoir.");
        for (j, (p, n)) in self.positive.iter().zip(&self.negative).enumerate() {
            p.write_into(&mut w, &format!("positive.{j}."));
            n.write_into(&mut w, &format!("negative.{j}."));
        }
        w.finish()
    }

    pub fn from_text(text: &str, path: &Path) -> Result<ClassifierModel> {
        let doc = Doc::parse(text, MAGIC, path)?;
        if doc.version != MODEL_VERSION {
            return Err(doc.bad("", format!("unsupported model version {}", doc.version)));
        }
        let classes: Vec<String> = doc.str("classes")?.split(',').map(str::to_string).collect();
        if classes.len() < 2 {
            return Err(doc.bad("classes", "a model needs at least two classes"));
        }
        let aggregate = match doc.str("evidence.aggregate")? {
            "mean" => Aggregate::Mean,
            "sum" => Aggregate::Sum,
            other => return Err(doc.bad("evidence.aggregate", format!("unknown aggregate `{other}`"))),
        };
        let evidence = EvidenceMode { aggregate, normalize_states: doc.get("evidence.normalize_states")? };
        let preprocessor = read_preprocessor(&doc)?;
        let reservoir = crate::reservoir::Reservoir::read_from(&doc, "reservoir.")?;
        let mut positive = Vec::with_capacity(classes.len());
        let mut negative = Vec::with_capacity(classes.len());
        for j in 0..classes.len() {
            positive.push(Conceptor::read_from(&doc, &format!("positive.{j}."))?);
            negative.push(Conceptor::read_from(&doc, &format!("negative.{j}."))?);
        }
        if positive.iter().chain(&negative).any(|c| c.dim() != reservoir.size()) {
            return Err(doc.bad("reservoir.n_neurons", "conceptor size differs from reservoir size"));
        }
        if preprocessor.output_channels() != reservoir.input_dim() {
            return Err(doc.bad("reservoir.input_dim", "reservoir input size differs from preprocessing output"));
        }
        Ok(ClassifierModel {
            reservoir,
            classes,
            positive,
            negative,
            aperture: doc.get("aperture")?,
            preprocessor,
            evidence,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if self.classes.iter().any(|c| c.contains(',') || c.contains('\n') || c.is_empty()) {
            return Err(Error::Config("class names must be non-empty and free of commas and newlines".into()));
        }
        crate::io::write_atomic(path, self.to_text().as_bytes())
    }

    pub fn load(path: &Path) -> Result<ClassifierModel> {
        Self::from_text(&crate::io::read_to_string(path)?, path)
    }
}

fn write_preprocessor(w: &mut DocWriter, p: &Preprocessor) {
    let c = &p.config;
    w.kv("pre.input_channels", p.input_channels)
        .kv("pre.resample", c.resample)
        .kv("pre.support_points", c.support_points)
        .kv("pre.normalize", c.normalize);
    if let Some(norm) = &p.normalization {
        w.reals("pre.norm.shift", &norm.shift).reals("pre.norm.scale", &norm.scale);
    }
    w.kv("pre.mfcc", c.mfcc.is_some());
    if let Some(m) = &c.mfcc {
        w.kv("pre.mfcc.frame_length", m.frame_length)
            .kv("pre.mfcc.hop_length", m.hop_length)
            .kv("pre.mfcc.n_mels", m.n_mels)
            .kv("pre.mfcc.n_coeffs", m.n_coeffs)
            .real("pre.mfcc.fmin_hz", m.fmin_hz)
            .kv("pre.mfcc.fmax_hz", m.fmax_hz.map_or("none".to_string(), crate::numerics::fmt_f64))
            .real("pre.mfcc.log_floor", m.log_floor)
            .kv("pre.mfcc.keep_c0", m.keep_c0);
    }
}

fn read_preprocessor(doc: &Doc) -> Result<Preprocessor> {
    let mfcc = if doc.get::<bool>("pre.mfcc")? {
        let fmax_hz = match doc.str("pre.mfcc.fmax_hz")? {
            "none" => None,
            _ => Some(doc.get("pre.mfcc.fmax_hz")?),
        };
        let cfg = MfccConfig {
            frame_length: doc.get("pre.mfcc.frame_length")?,
            hop_length: doc.get("pre.mfcc.hop_length")?,
            n_mels: doc.get("pre.mfcc.n_mels")?,
            n_coeffs: doc.get("pre.mfcc.n_coeffs")?,
            fmin_hz: doc.get("pre.mfcc.fmin_hz")?,
            fmax_hz,
            log_floor: doc.get("pre.mfcc.log_floor")?,
            keep_c0: doc.get("pre.mfcc.keep_c0")?,
        };
        cfg.validate()?;
        Some(cfg)
    } else {
        None
    };
    let config = PreprocessConfig {
        mfcc,
        normalize: doc.get("pre.normalize")?,
        resample: doc.get("pre.resample")?,
        support_points: doc.get("pre.support_points")?,
    };
    let normalization = if config.normalize {
        let norm = NormalizationParams { shift: doc.reals("pre.norm.shift")?, scale: doc.reals("pre.norm.scale")? };
        if norm.shift.len() != norm.scale.len() {
            return Err(doc.bad("pre.norm.scale", "shift and scale lengths differ"));
        }
        Some(norm)
    } else {
        None
    };
    let p = Preprocessor { config, normalization, input_channels: doc.get("pre.input_channels")? };
    if p.normalization.as_ref().is_some_and(|n| n.channels() != p.output_channels()) {
        return Err(doc.bad("pre.norm.shift", "normalization width differs from feature channels"));
    }
    Ok(p)
}
