//! Labelled datasets: manifest/CSV/WAV ingestion and synthetic corpora.

mod csv_series;
mod manifest;
mod synth;

pub use csv_series::{read_csv_series, write_csv_series};
pub use manifest::{load_manifest, write_dataset, EntryKind, Manifest, ManifestEntry};
pub use synth::{synth_maneuver, synth_sinusoid, synthesize, SynthSpec, SynthTask, MANEUVER_CHANNELS, MANEUVER_CLASSES};

use crate::error::{Error, Result};
use crate::series::LabeledSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(Error::Config(format!("unknown split `{s}`"))),
        }
    }
}

/// Class-labelled train/test series. Every series carries a label indexing `classes`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub classes: Vec<String>,
    pub channel_names: Vec<String>,
    pub train: Vec<LabeledSeries>,
    pub test: Vec<LabeledSeries>,
}

impl Dataset {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn split(&self, split: Split) -> &[LabeledSeries] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }

    /// Per-class sample counts for a split.
    pub fn class_counts(&self, split: Split) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for s in self.split(split) {
            if let Some(l) = s.label {
                counts[l] += 1;
            }
        }
        counts
    }

    /// Checks labels, channel counts and id uniqueness across splits.
    pub fn validate(&self) -> Result<()> {
        if self.train.is_empty() && self.test.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let d = self.channel_names.len();
        let mut ids = std::collections::HashSet::new();
        for s in self.train.iter().chain(&self.test) {
            match s.label {
                Some(l) if l < self.classes.len() => {}
                _ => return Err(Error::SchemaMismatch(format!("series `{}` has no valid label", s.id))),
            }
            if s.channels() != d {
                return Err(Error::SchemaMismatch(format!(
                    "series `{}` has {} channels, schema has {d}",
                    s.id,
                    s.channels()
                )));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(Error::SchemaMismatch(format!("duplicate series id `{}`", s.id)));
            }
        }
        Ok(())
    }
}
