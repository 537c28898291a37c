use super::{ClassifierModel, EvidenceReport};
use crate::error::{Error, Result};
use crate::numerics::{fmt_f64, Rng};
use crate::series::LabeledSeries;

/// Which evidence drives a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Positive,
    Negative,
    Combined,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Positive, Family::Negative, Family::Combined];

    pub fn name(self) -> &'static str {
        match self {
            Family::Positive => "pos",
            Family::Negative => "neg",
            Family::Combined => "combined",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub classes: Vec<String>,
    pub total: usize,
    /// `confusion[true][predicted]` for combined decisions.
    pub confusion: Vec<Vec<usize>>,
    /// `1 − trace / total` of the confusion matrix.
    pub error_rate: f64,
    /// Overall accuracy in percent, indexed like [`Family::ALL`].
    pub accuracy: [f64; 3],
    /// Per-class accuracy in percent; `None` for classes absent from the set.
    pub class_accuracy: Vec<[Option<f64>; 3]>,
}

impl Metrics {
    pub fn from_reports(classes: &[String], outcomes: &[(usize, EvidenceReport)]) -> Result<Metrics> {
        if outcomes.is_empty() {
            return Err(Error::EmptyTestSet);
        }
        let m = classes.len();
        let mut confusion = vec![vec![0usize; m]; m];
        let mut correct = vec![[0usize; 3]; m];
        let mut support = vec![0usize; m];
        for (truth, report) in outcomes {
            support[*truth] += 1;
            confusion[*truth][report.decided] += 1;
            for f in Family::ALL {
                if report.decided_by(f) == *truth {
                    correct[*truth][f.index()] += 1;
                }
            }
        }
        let total = outcomes.len();
        let trace: usize = (0..m).map(|j| confusion[j][j]).sum();
        let mut accuracy = [0.0; 3];
        for f in Family::ALL {
            let hits: usize = correct.iter().map(|c| c[f.index()]).sum();
            accuracy[f.index()] = 100.0 * hits as f64 / total as f64;
        }
        let class_accuracy = (0..m)
            .map(|j| {
                let mut row = [None; 3];
                if support[j] > 0 {
                    for f in Family::ALL {
                        row[f.index()] = Some(100.0 * correct[j][f.index()] as f64 / support[j] as f64);
                    }
                }
                row
            })
            .collect();
        Ok(Metrics {
            classes: classes.to_vec(),
            total,
            confusion,
            error_rate: 1.0 - trace as f64 / total as f64,
            accuracy,
            class_accuracy,
        })
    }

    pub fn accuracy_of(&self, family: Family) -> f64 {
        self.accuracy[family.index()]
    }

    pub fn class_accuracy_of(&self, class: usize, family: Family) -> Option<f64> {
        self.class_accuracy[class][family.index()]
    }

    /// Long-format table `metric,class,family,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,class,family,value\n");
        out.push_str(&format!("error_rate,all,combined,{}\n", fmt_f64(self.error_rate)));
        for f in Family::ALL {
            out.push_str(&format!("accuracy,all,{},{}\n", f.name(), fmt_f64(self.accuracy_of(f))));
        }
        for (j, class) in self.classes.iter().enumerate() {
            for f in Family::ALL {
                let v = self.class_accuracy_of(j, f).map_or("nan".to_string(), fmt_f64);
                out.push_str(&format!("accuracy,{class},{},{v}\n", f.name()));
            }
        }
        out
    }

    /// Confusion matrix with true classes as rows.
    pub fn confusion_csv(&self) -> String {
        let mut out = format!("true\\predicted,{}\n", self.classes.join(","));
        for (class, row) in self.classes.iter().zip(&self.confusion) {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            out.push_str(&format!("{class},{}\n", cells.join(",")));
        }
        out
    }
}

/// Scores a model on labelled series.
pub fn evaluate(model: &ClassifierModel, test_set: &[LabeledSeries]) -> Result<Metrics> {
    let outcomes = test_set
        .iter()
        .map(|s| {
            let truth = s.label.filter(|&l| l < model.num_classes()).ok_or_else(|| {
                Error::Config(format!("test series `{}` has no valid label", s.id))
            })?;
            Ok((truth, model.evidences(s)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Metrics::from_reports(&model.classes, &outcomes)
}

/// Mean error rate of predicting a random permutation of the true labels.
pub fn shuffle_baseline_error(labels: &[usize], draws: usize, rng: &mut Rng) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if draws == 0 {
        return Err(Error::Config("shuffle baseline needs at least one draw".into()));
    }
    let mut shuffled = labels.to_vec();
    let mut wrong = 0usize;
    for _ in 0..draws {
        rng.shuffle(&mut shuffled);
        wrong += labels.iter().zip(&shuffled).filter(|(a, b)| a != b).count();
    }
    Ok(wrong as f64 / (draws * labels.len()) as f64)
}
