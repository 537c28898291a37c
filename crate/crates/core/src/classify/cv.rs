use super::{EvidenceReport, Harvest, TrainConfig};
use crate::conceptor::Conceptor;
use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::reservoir::StateSequence;
use crate::series::LabeledSeries;

pub const DEFAULT_FOLDS: usize = 5;

/// 20 log-spaced apertures from 1e-2 to 1e4.
pub fn default_aperture_grid() -> Vec<f64> {
    (0..20).map(|i| 10f64.powf(-2.0 + 6.0 * i as f64 / 19.0)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvRow {
    pub aperture: f64,
    /// Combined-evidence accuracy in percent on each held-out fold.
    pub fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub best: f64,
    pub rows: Vec<CvRow>,
}

impl CvReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("aperture,mean_accuracy\n");
        for r in &self.rows {
            out.push_str(&format!("{},{}\n", crate::numerics::fmt_f64(r.aperture), crate::numerics::fmt_f64(r.mean_accuracy)));
        }
        out
    }
}

/// Assigns every sample a fold so that each class is spread evenly.
pub fn stratified_folds(labels: &[usize], num_classes: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = Rng::seed(seed);
    let mut assignment = vec![0; labels.len()];
    for j in 0..num_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == j).collect();
        rng.shuffle(&mut members);
        for (k, i) in members.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    assignment
}

/// Picks the aperture with the best mean held-out combined accuracy; ties go
/// to the smallest aperture. Reservoir states are computed once per fold and
/// reused for every grid value.
pub fn cross_validate_aperture(
    train_set: &[LabeledSeries],
    classes: &[String],
    cfg: &TrainConfig,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<CvReport> {
    if grid.is_empty() {
        return Err(Error::Config("aperture grid is empty".into()));
    }
    if let Some(&bad) = grid.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::NonPositiveAperture(bad));
    }
    if folds < 2 {
        return Err(Error::Config(format!("cross-validation needs at least 2 folds, got {folds}")));
    }
    let m = classes.len();
    if m < 2 {
        return Err(Error::SingleClass);
    }
    let labels = train_set
        .iter()
        .map(|s| s.label.filter(|&l| l < m).ok_or_else(|| Error::Config(format!("series `{}` has no valid label", s.id))))
        .collect::<Result<Vec<_>>>()?;
    for (j, class) in classes.iter().enumerate() {
        let got = labels.iter().filter(|&&l| l == j).count();
        if got < folds {
            return Err(Error::TooFewSamplesPerClass { class: class.clone(), got, needed: folds });
        }
    }

    let mut apertures = grid.to_vec();
    apertures.sort_by(f64::total_cmp);
    apertures.dedup();

    let assignment = stratified_folds(&labels, m, folds, seed);
    let mut fold_accuracy = vec![Vec::with_capacity(folds); apertures.len()];
    for fold in 0..folds {
        let (held_out, fit): (Vec<usize>, Vec<usize>) = (0..train_set.len()).partition(|&i| assignment[i] == fold);
        let fit_set: Vec<LabeledSeries> = fit.iter().map(|&i| train_set[i].clone()).collect();
        let harvest = Harvest::collect(&fit_set, classes, cfg)?;
        let held_states = held_out
            .iter()
            .map(|&i| harvest.reservoir.drive(&harvest.preprocessor.apply(&train_set[i])?.values))
            .collect::<Result<Vec<StateSequence>>>()?;
        for (a, &aperture) in apertures.iter().enumerate() {
            let positive = harvest
                .correlations
                .iter()
                .map(|r| Conceptor::from_correlation(r, aperture))
                .collect::<Result<Vec<_>>>()?;
            let negative = super::negative_conceptors(&positive)?;
            let mut hits = 0usize;
            for (states, &i) in held_states.iter().zip(&held_out) {
                let pos = positive.iter().map(|c| c.evidence(states, cfg.evidence)).collect::<Result<Vec<_>>>()?;
                let neg = negative.iter().map(|c| c.evidence(states, cfg.evidence)).collect::<Result<Vec<_>>>()?;
                if EvidenceReport::from_parts(pos, neg).decided == labels[i] {
                    hits += 1;
                }
            }
            fold_accuracy[a].push(100.0 * hits as f64 / held_out.len() as f64);
        }
    }

    let rows: Vec<CvRow> = apertures
        .iter()
        .zip(fold_accuracy)
        .map(|(&aperture, fold_accuracy)| {
            let mean_accuracy = fold_accuracy.iter().sum::<f64>() / folds as f64;
            CvRow { aperture, fold_accuracy, mean_accuracy }
        })
        .collect();
    let mut best = &rows[0];
    for r in &rows[1..] {
        if r.mean_accuracy > best.mean_accuracy {
            best = r;
        }
    }
    Ok(CvReport { best: best.aperture, rows })
}
