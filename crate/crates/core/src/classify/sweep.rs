use std::time::Instant;

use rayon::prelude::*;

use super::{evaluate, train, Family, Metrics, TrainConfig};
use crate::datasets::{Dataset, Split};
use crate::error::{Error, Result};
use crate::features::ResampleMode;
use crate::numerics::{derive_seed, fmt_f64};
use crate::reservoir::Activation;
use crate::series::LabeledSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    ReservoirSize,
    TrainingSize,
    Ablation,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::ReservoirSize => "reservoir_size",
            SweepAxis::TrainingSize => "training_size",
            SweepAxis::Ablation => "ablation",
        }
    }

    /// Grid used when none is given.
    pub fn default_grid(self) -> Vec<usize> {
        match self {
            SweepAxis::ReservoirSize => vec![2, 4, 6, 8, 10, 20, 30, 40, 60],
            SweepAxis::TrainingSize => (2..=8).collect(),
            SweepAxis::Ablation => Vec::new(),
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reservoir_size" | "reservoir-size" => Ok(SweepAxis::ReservoirSize),
            "training_size" | "training-size" => Ok(SweepAxis::TrainingSize),
            "ablation" => Ok(SweepAxis::Ablation),
            _ => Err(Error::Config(format!("unknown sweep axis `{s}`"))),
        }
    }
}

/// Model variants compared on the ablation axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ablation {
    Original,
    /// Identity activation.
    Linear,
    /// No support-point resampling.
    NoInterpolation,
    Both,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [Ablation::Original, Ablation::Linear, Ablation::NoInterpolation, Ablation::Both];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::Original => "original",
            Ablation::Linear => "linear",
            Ablation::NoInterpolation => "no_interpolation",
            Ablation::Both => "linear_no_interpolation",
        }
    }

    fn apply(self, base: &TrainConfig) -> TrainConfig {
        let mut cfg = base.clone();
        if matches!(self, Ablation::Linear | Ablation::Both) {
            cfg.reservoir.activation = Activation::Identity;
        }
        if matches!(self, Ablation::NoInterpolation | Ablation::Both) {
            cfg.preprocess.resample = ResampleMode::None;
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    /// Reservoir sizes or training sizes; ignored on the ablation axis.
    pub grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub base: TrainConfig,
    /// Training samples per class outside the training-size axis; `None` uses all.
    pub train_per_class: Option<usize>,
    /// Worker threads; `None` uses the rayon default.
    pub jobs: Option<usize>,
}

impl SweepConfig {
    pub fn new(axis: SweepAxis, trials: usize, seed: u64) -> SweepConfig {
        SweepConfig {
            axis,
            grid: axis.default_grid(),
            trials,
            seed,
            base: TrainConfig::default(),
            train_per_class: None,
            jobs: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub cell: usize,
    pub trial: usize,
    pub seed: u64,
    pub train: Metrics,
    pub test: Metrics,
    pub train_seconds: f64,
    /// Mean wall time to classify one test sample.
    pub classify_seconds: f64,
}

/// Accuracy statistics in percent over the trials of one cell and split.
#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub cell: String,
    pub split: Split,
    /// `[mean, min, max]` per family, indexed like [`Family::ALL`].
    pub overall: [[f64; 3]; 3],
    /// Per class and family; `None` when the class never appears in the split.
    pub per_class: Vec<[Option<[f64; 3]>; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub cells: Vec<String>,
    pub classes: Vec<String>,
    pub trials: Vec<TrialResult>,
    pub stats: Vec<CellStats>,
}

const STAT_NAMES: [&str; 3] = ["mean", "min", "max"];

impl SweepReport {
    pub fn stats_for(&self, cell: usize, split: Split) -> &CellStats {
        let split_index = match split {
            Split::Train => 0,
            Split::Test => 1,
        };
        &self.stats[2 * cell + split_index]
    }

    pub fn mean_accuracy(&self, cell: usize, split: Split, family: Family) -> f64 {
        self.stats_for(cell, split).overall[family as usize][0]
    }

    /// `quality_original − quality_variant` of mean accuracy, so a negative
    /// value means the original is worse. Ablation axis only.
    pub fn delta_quality(&self, cell: usize, split: Split, family: Family) -> Option<f64> {
        let original = self.cells.iter().position(|c| c == Ablation::Original.name())?;
        (self.axis == SweepAxis::Ablation)
            .then(|| self.mean_accuracy(original, split, family) - self.mean_accuracy(cell, split, family))
    }

    /// Long-format table `axis,cell,split,family,class,stat,value`. Runtimes
    /// are left out so equal seeds give byte-identical output.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis,cell,split,family,class,stat,value\n");
        let axis = self.axis.name();
        for (c, cell) in self.cells.iter().enumerate() {
            for split in [Split::Train, Split::Test] {
                let st = self.stats_for(c, split);
                for f in Family::ALL {
                    let prefix = format!("{axis},{cell},{},{}", split.name(), f.name());
                    for (k, stat) in STAT_NAMES.iter().enumerate() {
                        out.push_str(&format!("{prefix},all,{stat},{}\n", fmt_f64(st.overall[f as usize][k])));
                    }
                    if let Some(d) = self.delta_quality(c, split, f) {
                        out.push_str(&format!("{prefix},all,delta_quality,{}\n", fmt_f64(d)));
                    }
                    for (j, class) in self.classes.iter().enumerate() {
                        if let Some(v) = st.per_class[j][f as usize] {
                            for (k, stat) in STAT_NAMES.iter().enumerate() {
                                out.push_str(&format!("{prefix},{class},{stat},{}\n", fmt_f64(v[k])));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Mean training time and per-sample classification time per cell.
    pub fn runtime_csv(&self) -> String {
        let mut out = String::from("cell,mean_train_seconds,mean_classify_seconds\n");
        for (c, cell) in self.cells.iter().enumerate() {
            let rows: Vec<&TrialResult> = self.trials.iter().filter(|t| t.cell == c).collect();
            let n = rows.len() as f64;
            let train = rows.iter().map(|t| t.train_seconds).sum::<f64>() / n;
            let classify = rows.iter().map(|t| t.classify_seconds).sum::<f64>() / n;
            out.push_str(&format!("{cell},{train:.6},{classify:.6}\n"));
        }
        out
    }

    /// Fixed-width summary of mean test accuracy per cell.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<24} {:>8} {:>8} {:>8}", self.axis.name(), "h+", "h-", "combined");
        if self.axis == SweepAxis::Ablation {
            out.push_str(&format!(" {:>8}", "delta"));
        }
        out.push('\n');
        for (c, cell) in self.cells.iter().enumerate() {
            out.push_str(&format!("{cell:<24}"));
            for f in Family::ALL {
                out.push_str(&format!(" {:>8.2}", self.mean_accuracy(c, Split::Test, f)));
            }
            if let Some(d) = self.delta_quality(c, Split::Test, Family::Combined) {
                out.push_str(&format!(" {d:>8.2}"));
            }
            out.push('\n');
        }
        out
    }
}

struct Cell {
    name: String,
    config: TrainConfig,
    train_per_class: Option<usize>,
    /// Seed column shared by cells whose trials must reuse the same reservoirs.
    seed_column: u64,
}

fn cells(cfg: &SweepConfig) -> Result<Vec<Cell>> {
    let base = &cfg.base;
    let cells: Vec<Cell> = match cfg.axis {
        SweepAxis::ReservoirSize => cfg
            .grid
            .iter()
            .enumerate()
            .map(|(c, &n)| {
                let mut config = base.clone();
                config.reservoir.n_neurons = n;
                Cell { name: n.to_string(), config, train_per_class: cfg.train_per_class, seed_column: c as u64 }
            })
            .collect(),
        SweepAxis::TrainingSize => cfg
            .grid
            .iter()
            .enumerate()
            .map(|(c, &n)| Cell { name: n.to_string(), config: base.clone(), train_per_class: Some(n), seed_column: c as u64 })
            .collect(),
        SweepAxis::Ablation => Ablation::ALL
            .iter()
            .map(|a| Cell { name: a.name().to_string(), config: a.apply(base), train_per_class: cfg.train_per_class, seed_column: 0 })
            .collect(),
    };
    if cells.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    for c in &cells {
        c.config.reservoir.validate()?;
    }
    Ok(cells)
}

/// The first `n` training samples of every class, in dataset order.
fn training_subset(dataset: &Dataset, n: Option<usize>) -> Result<Vec<LabeledSeries>> {
    let counts = dataset.class_counts(Split::Train);
    let Some(n) = n else {
        return Ok(dataset.train.clone());
    };
    if n == 0 {
        return Err(Error::InsufficientData("training size must be at least 1".into()));
    }
    if let Some(j) = counts.iter().position(|&k| k < n) {
        return Err(Error::InsufficientData(format!(
            "class `{}` has {} training samples, protocol needs {n}",
            dataset.classes[j], counts[j]
        )));
    }
    let mut taken = vec![0usize; dataset.num_classes()];
    Ok(dataset
        .train
        .iter()
        .filter(|s| {
            let l = s.label.expect("validated dataset");
            taken[l] += 1;
            taken[l] <= n
        })
        .cloned()
        .collect())
}

fn run_trial(dataset: &Dataset, train_set: &[LabeledSeries], cell: &Cell, c: usize, trial: usize, seed: u64) -> Result<TrialResult> {
    let mut config = cell.config.clone();
    config.reservoir.seed = seed;
    let start = Instant::now();
    let model = train(train_set, &dataset.classes, &config)?;
    let train_seconds = start.elapsed().as_secs_f64();
    let train_metrics = evaluate(&model, train_set)?;
    let start = Instant::now();
    let test = evaluate(&model, &dataset.test)?;
    let classify_seconds = start.elapsed().as_secs_f64() / dataset.test.len() as f64;
    Ok(TrialResult { cell: c, trial, seed, train: train_metrics, test, train_seconds, classify_seconds })
}

fn stats(values: impl Iterator<Item = f64>) -> Option<[f64; 3]> {
    let mut n = 0usize;
    let (mut sum, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        n += 1;
        sum += v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (n > 0).then(|| [sum / n as f64, lo, hi])
}

fn cell_stats(name: &str, split: Split, runs: &[&Metrics], m: usize) -> CellStats {
    let mut overall = [[0.0; 3]; 3];
    for f in Family::ALL {
        overall[f as usize] = stats(runs.iter().map(|r| r.accuracy_of(f))).expect("at least one trial");
    }
    let per_class = (0..m)
        .map(|j| Family::ALL.map(|f| stats(runs.iter().filter_map(|r| r.class_accuracy_of(j, f)))))
        .collect();
    CellStats { cell: name.to_string(), split, overall, per_class }
}

/// Trains and evaluates `trials` random reservoirs per grid cell. Trial `t`
/// of cell `c` uses reservoir seed `derive_seed(seed, c, t)`; ablation
/// variants share the seeds of cell 0 so they are compared on identical
/// reservoirs.
pub fn sweep(dataset: &Dataset, cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.trials == 0 {
        return Err(Error::Config("sweep needs at least one trial".into()));
    }
    if dataset.test.is_empty() {
        return Err(Error::InsufficientData("dataset has no test split".into()));
    }
    dataset.validate()?;
    let cells = cells(cfg)?;
    let subsets = cells.iter().map(|c| training_subset(dataset, c.train_per_class)).collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let run = || {
        jobs.par_iter()
            .map(|&(c, t)| {
                let seed = derive_seed(cfg.seed, cells[c].seed_column, t as u64);
                run_trial(dataset, &subsets[c], &cells[c], c, t, seed)
            })
            .collect::<Result<Vec<_>>>()
    };
    let trials = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let m = dataset.num_classes();
    let mut stats = Vec::with_capacity(2 * cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let mine: Vec<&TrialResult> = trials.iter().filter(|t| t.cell == c).collect();
        let train: Vec<&Metrics> = mine.iter().map(|t| &t.train).collect();
        let test: Vec<&Metrics> = mine.iter().map(|t| &t.test).collect();
        stats.push(cell_stats(&cell.name, Split::Train, &train, m));
        stats.push(cell_stats(&cell.name, Split::Test, &test, m));
    }
    Ok(SweepReport {
        axis: cfg.axis,
        cells: cells.into_iter().map(|c| c.name).collect(),
        classes: dataset.classes.clone(),
        trials,
        stats,
    })
}
