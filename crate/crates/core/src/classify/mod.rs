//! Conceptor classifier: one positive conceptor `Cʲ` per class built from the
//! pooled reservoir states of its training samples, and one negative
//! conceptor `Nʲ = ¬(C¹ ∨ … ∨ Cʲ⁻¹ ∨ Cʲ⁺¹ ∨ … ∨ Cᵐ)`. A sample is assigned
//! to the class with the largest combined evidence `E⁺ + E⁻`.

mod cv;
mod metrics;
mod model_io;
mod sweep;

pub use cv::{cross_validate_aperture, default_aperture_grid, stratified_folds, CvReport, CvRow, DEFAULT_FOLDS};
pub use metrics::{evaluate, shuffle_baseline_error, Family, Metrics};
pub use sweep::{sweep, Ablation, CellStats, SweepAxis, SweepConfig, SweepReport, TrialResult};

use crate::conceptor::{Conceptor, Correlation, EvidenceMode};
use crate::error::{Error, Result};
use crate::features::{PreprocessConfig, Preprocessor};
use crate::reservoir::{Reservoir, ReservoirParams, StateSequence};
use crate::series::LabeledSeries;

pub const MODEL_VERSION: u32 = 1;
pub const DEFAULT_APERTURE: f64 = 15.0;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub reservoir: ReservoirParams,
    pub aperture: f64,
    pub preprocess: PreprocessConfig,
    pub evidence: EvidenceMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            reservoir: ReservoirParams::default(),
            aperture: DEFAULT_APERTURE,
            preprocess: PreprocessConfig::default(),
            evidence: EvidenceMode::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierModel {
    pub reservoir: Reservoir,
    pub classes: Vec<String>,
    pub positive: Vec<Conceptor>,
    pub negative: Vec<Conceptor>,
    pub aperture: f64,
    pub preprocessor: Preprocessor,
    pub evidence: EvidenceMode,
}

/// Evidence of one sample against every class.
#[derive(Clone, Debug, PartialEq)]
pub struct EvidenceReport {
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
    pub combined: Vec<f64>,
    pub decided: usize,
    /// `combined[decided]` minus the runner-up.
    pub margin: f64,
}

impl EvidenceReport {
    pub fn from_parts(pos: Vec<f64>, neg: Vec<f64>) -> EvidenceReport {
        let combined: Vec<f64> = pos.iter().zip(&neg).map(|(p, n)| p + n).collect();
        let decided = argmax(&combined);
        let runner_up = combined
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != decided)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let margin = combined[decided] - runner_up;
        EvidenceReport { pos, neg, combined, decided, margin }
    }

    /// Decision of one evidence family on its own.
    pub fn decided_by(&self, family: Family) -> usize {
        match family {
            Family::Positive => argmax(&self.pos),
            Family::Negative => argmax(&self.neg),
            Family::Combined => self.decided,
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub enum OpenSet {
    Closed,
    Global(f64),
    /// Threshold on the decided class's combined evidence, per class.
    PerClass(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prediction {
    Class(usize),
    Reject,
}

/// Reservoir, fitted preprocessing and per-class correlations of a training
/// set. Conceptors for any aperture can be derived from it without re-driving.
pub(crate) struct Harvest {
    pub preprocessor: Preprocessor,
    pub reservoir: Reservoir,
    pub correlations: Vec<Correlation>,
}

impl Harvest {
    pub fn collect(train_set: &[LabeledSeries], classes: &[String], cfg: &TrainConfig) -> Result<Harvest> {
        let m = classes.len();
        if m < 2 {
            return Err(Error::SingleClass);
        }
        let mut by_class: Vec<Vec<&LabeledSeries>> = vec![Vec::new(); m];
        for s in train_set {
            match s.label {
                Some(l) if l < m => by_class[l].push(s),
                _ => return Err(Error::Config(format!("training series `{}` has no valid label", s.id))),
            }
        }
        if let Some(j) = by_class.iter().position(Vec::is_empty) {
            return Err(Error::EmptyClass(classes[j].clone()));
        }
        let preprocessor = Preprocessor::fit(&cfg.preprocess, train_set)?;
        let reservoir = Reservoir::generate(&cfg.reservoir, preprocessor.output_channels())?;
        let correlations = by_class
            .iter()
            .map(|samples| {
                let states = samples
                    .iter()
                    .map(|s| reservoir.drive(&preprocessor.apply(s)?.values))
                    .collect::<Result<Vec<StateSequence>>>()?;
                Correlation::pooled(&states)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Harvest { preprocessor, reservoir, correlations })
    }

    pub fn build(&self, classes: &[String], aperture: f64, evidence: EvidenceMode) -> Result<ClassifierModel> {
        let positive = self
            .correlations
            .iter()
            .map(|r| Conceptor::from_correlation(r, aperture))
            .collect::<Result<Vec<_>>>()?;
        let negative = negative_conceptors(&positive)?;
        Ok(ClassifierModel {
            reservoir: self.reservoir.clone(),
            classes: classes.to_vec(),
            positive,
            negative,
            aperture,
            preprocessor: self.preprocessor.clone(),
            evidence,
        })
    }
}

/// `Nʲ = ¬(fold_or of every other class in class order)`.
pub fn negative_conceptors(positive: &[Conceptor]) -> Result<Vec<Conceptor>> {
    if positive.len() < 2 {
        return Err(Error::SingleClass);
    }
    (0..positive.len())
        .map(|j| {
            let mut others = positive.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, c)| c);
            let first = others.next().expect("at least one other class").clone();
            let union = others.try_fold(first, |acc, c| acc.or(c))?;
            Ok(union.not())
        })
        .collect()
}

/// Trains a classifier; series labels index `classes`.
pub fn train(train_set: &[LabeledSeries], classes: &[String], cfg: &TrainConfig) -> Result<ClassifierModel> {
    Harvest::collect(train_set, classes, cfg)?.build(classes, cfg.aperture, cfg.evidence)
}

impl ClassifierModel {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Preprocesses a raw sample and drives the reservoir with it.
    pub fn states(&self, sample: &LabeledSeries) -> Result<StateSequence> {
        self.reservoir.drive(&self.preprocessor.apply(sample)?.values)
    }

    pub fn evidences(&self, sample: &LabeledSeries) -> Result<EvidenceReport> {
        self.evidence_for_states(&self.states(sample)?)
    }

    pub fn evidence_for_states(&self, states: &StateSequence) -> Result<EvidenceReport> {
        let pos = self.positive.iter().map(|c| c.evidence(states, self.evidence)).collect::<Result<Vec<_>>>()?;
        let neg = self.negative.iter().map(|c| c.evidence(states, self.evidence)).collect::<Result<Vec<_>>>()?;
        Ok(EvidenceReport::from_parts(pos, neg))
    }

    pub fn predict(&self, sample: &LabeledSeries, open_set: &OpenSet) -> Result<Prediction> {
        let report = self.evidences(sample)?;
        Ok(decide(&report, open_set))
    }

    /// Per-class thresholds at the `q`-th percentile (0..=100, linear
    /// interpolation) of the training combined evidence of each class.
    pub fn calibrate_thresholds(&self, train_set: &[LabeledSeries], q: f64) -> Result<Vec<f64>> {
        if !(0.0..=100.0).contains(&q) {
            return Err(Error::Config(format!("percentile must lie in [0, 100], got {q}")));
        }
        let mut per_class: Vec<Vec<f64>> = vec![Vec::new(); self.num_classes()];
        for s in train_set {
            let label = s.label.filter(|&l| l < self.num_classes()).ok_or_else(|| {
                Error::Config(format!("calibration series `{}` has no valid label", s.id))
            })?;
            per_class[label].push(self.evidences(s)?.combined[label]);
        }
        per_class
            .into_iter()
            .enumerate()
            .map(|(j, mut v)| {
                if v.is_empty() {
                    return Err(Error::EmptyClass(self.classes[j].clone()));
                }
                v.sort_by(f64::total_cmp);
                Ok(percentile_sorted(&v, q))
            })
            .collect()
    }
}

pub fn decide(report: &EvidenceReport, open_set: &OpenSet) -> Prediction {
    let best = report.decided;
    let threshold = match open_set {
        OpenSet::Closed => return Prediction::Class(best),
        OpenSet::Global(t) => *t,
        OpenSet::PerClass(ts) => ts[best],
    };
    if report.combined[best] < threshold {
        Prediction::Reject
    } else {
        Prediction::Class(best)
    }
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    fn scaled(n: usize, v: f64) -> Conceptor {
        Conceptor::from_matrix(Matrix::scaled_identity(n, v), None).unwrap()
    }

    #[test]
    fn argmax_ties_go_to_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(argmax(&[5.0]), 0);
    }

    #[test]
    fn report_combines_and_decides() {
        let r = EvidenceReport::from_parts(vec![0.2, 0.5, 0.1], vec![0.3, 0.1, 0.9]);
        assert_eq!(r.combined, vec![0.5, 0.6, 1.0]);
        assert_eq!(r.decided, 2);
        assert!((r.margin - 0.4).abs() < 1e-15);
        assert_eq!(r.decided_by(Family::Positive), 1);
        assert_eq!(r.decided_by(Family::Negative), 2);
    }

    #[test]
    fn two_class_negatives_are_plain_negations() {
        let c1 = Conceptor::from_matrix(Matrix::from_diag(&[0.9, 0.2]), None).unwrap();
        let c2 = Conceptor::from_matrix(Matrix::from_diag(&[0.1, 0.7]), None).unwrap();
        let neg = negative_conceptors(&[c1.clone(), c2.clone()]).unwrap();
        assert_eq!(neg[0], c2.not());
        assert_eq!(neg[1], c1.not());
    }

    #[test]
    fn three_class_fold_matches_manual() {
        let cs = [scaled(2, 0.3), scaled(2, 0.6), Conceptor::from_matrix(Matrix::from_diag(&[0.8, 0.1]), None).unwrap()];
        let neg = negative_conceptors(&cs).unwrap();
        let manual = cs[1].or(&cs[2]).unwrap().not();
        assert!(neg[0].matrix().max_abs_diff(manual.matrix()) < 1e-8);
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(negative_conceptors(&[scaled(2, 0.5)]), Err(Error::SingleClass)));
    }

    #[test]
    fn open_set_decisions() {
        let r = EvidenceReport::from_parts(vec![0.9, 0.1], vec![0.8, 0.2]);
        assert_eq!(decide(&r, &OpenSet::Closed), Prediction::Class(0));
        assert_eq!(decide(&r, &OpenSet::Global(2.01)), Prediction::Reject);
        assert_eq!(decide(&r, &OpenSet::Global(1.0)), Prediction::Class(0));
        assert_eq!(decide(&r, &OpenSet::PerClass(vec![1.8, 0.0])), Prediction::Reject);
    }

    #[test]
    fn percentiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile_sorted(&v, 0.0), 1.0);
        assert_eq!(percentile_sorted(&v, 100.0), 5.0);
        assert_eq!(percentile_sorted(&v, 50.0), 3.0);
        assert!((percentile_sorted(&v, 5.0) - 1.2).abs() < 1e-12);
    }
}
