use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use cesn::classify::{cross_validate_aperture, sweep, Family, SweepConfig};
use cesn::datasets::{load_manifest, read_csv_series, synthesize, write_dataset, Dataset, Split};
use cesn::features::{read_wav, Preprocessor};
use cesn::io::write_atomic;
use cesn::numerics::fmt_f64;
use cesn::{evaluate, train, ClassifierModel, LabeledSeries, OpenSet, Prediction};

use crate::config::{CommandKind, RunConfig};
use crate::{selftest, Failure};

type Outcome = Result<String, Failure>;

pub fn run(cfg: &RunConfig) -> Outcome {
    match cfg.command {
        CommandKind::Synth => synth(cfg),
        CommandKind::Features => features(cfg),
        CommandKind::Train => train_model(cfg),
        CommandKind::Predict => predict(cfg),
        CommandKind::Eval => eval(cfg),
        CommandKind::Sweep => run_sweep(cfg),
        CommandKind::Selftest => selftest::run(cfg.seed),
    }
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, Failure> {
    p.as_deref().ok_or_else(|| Failure::Usage(format!("missing --{what}")))
}

fn load(path: &Path) -> Result<Dataset, Failure> {
    Ok(load_manifest(path).with_context(|| format!("loading dataset {}", path.display()))?)
}

fn load_model(path: &Path) -> Result<ClassifierModel, Failure> {
    Ok(ClassifierModel::load(path).with_context(|| format!("loading model {}", path.display()))?)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    Ok(write_atomic(path, text.as_bytes())?)
}

/// `dir/stem.suffix` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Refuses to write a dataset into the directory an input manifest lives in.
fn ensure_fresh_dir(out: &Path, input: Option<&Path>) -> Result<(), Failure> {
    if let Some(input) = input {
        let parent = input.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if let (Ok(a), Ok(b)) = (std::fs::canonicalize(out), std::fs::canonicalize(parent)) {
            if a == b {
                return Err(Failure::Usage("--out must differ from the input dataset directory".into()));
            }
        }
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    Ok(())
}

/// First `n` training series of every class, or all when `n` is `None`.
fn first_per_class(set: &[LabeledSeries], classes: usize, n: Option<usize>) -> Vec<LabeledSeries> {
    let Some(n) = n else { return set.to_vec() };
    let mut taken = vec![0; classes];
    set.iter()
        .filter(|s| {
            let l = s.label.expect("dataset series are labelled");
            taken[l] += 1;
            taken[l] <= n
        })
        .cloned()
        .collect()
}

fn synth(cfg: &RunConfig) -> Outcome {
    let out = required(&cfg.out, "out")?;
    let mut spec = cfg.synth.clone();
    spec.seed = cfg.seed;
    let dataset = synthesize(&spec)?;
    ensure_fresh_dir(out, None)?;
    let manifest = write_dataset(out, &dataset)?;
    Ok(format!(
        "synth: {} classes, {} train / {} test series -> {}",
        dataset.num_classes(),
        dataset.train.len(),
        dataset.test.len(),
        manifest.display()
    ))
}

fn features(cfg: &RunConfig) -> Outcome {
    let data = required(&cfg.data, "data")?;
    let out = required(&cfg.out, "out")?;
    let dataset = load(data)?;
    let pre = Preprocessor::fit(&cfg.train.preprocess, &dataset.train)?;
    let apply = |set: &[LabeledSeries]| -> Result<Vec<LabeledSeries>, cesn::Error> {
        set.iter()
            .map(|s| pre.apply(s).map(|p| LabeledSeries { sample_rate_hz: None, ..p }))
            .collect()
    };
    let channel_names = if pre.output_channels() == dataset.channel_names.len() && cfg.train.preprocess.mfcc.is_none() {
        dataset.channel_names.clone()
    } else {
        (1..=pre.output_channels()).map(|i| format!("mfcc{i}")).collect()
    };
    let processed = Dataset {
        classes: dataset.classes.clone(),
        channel_names,
        train: apply(&dataset.train)?,
        test: apply(&dataset.test)?,
    };
    ensure_fresh_dir(out, Some(data))?;
    let manifest = write_dataset(out, &processed)?;
    Ok(format!(
        "features: {} series with {} channels -> {}",
        processed.train.len() + processed.test.len(),
        processed.channel_names.len(),
        manifest.display()
    ))
}

fn train_model(cfg: &RunConfig) -> Outcome {
    let data = required(&cfg.data, "data")?;
    let model_path = required(&cfg.model, "model")?;
    let dataset = load(data)?;
    let train_set = first_per_class(&dataset.train, dataset.num_classes(), cfg.train_per_class);
    let mut train_cfg = cfg.train.clone();
    let mut cv_note = String::new();
    if let Some(grid) = &cfg.cv_grid {
        let report = cross_validate_aperture(&train_set, &dataset.classes, &train_cfg, grid, cfg.cv_folds, cfg.seed)?;
        let cv_path = sibling(model_path, "cv.csv");
        write(&cv_path, &report.to_csv())?;
        train_cfg.aperture = report.best;
        cv_note = format!(", cross-validated aperture (report {})", cv_path.display());
    }
    let start = Instant::now();
    let model = train(&train_set, &dataset.classes, &train_cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    model.save(model_path)?;
    Ok(format!(
        "train: {} classes, {} series, {} neurons, aperture {}{cv_note}, {seconds:.3} s -> {}",
        model.num_classes(),
        train_set.len(),
        model.reservoir.size(),
        fmt_f64(model.aperture),
        model_path.display()
    ))
}

fn read_input(path: &Path) -> Result<LabeledSeries, Failure> {
    let is_wav = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    let series = if is_wav {
        let audio = read_wav(path)?;
        LabeledSeries::from_samples(&audio.samples)?.with_sample_rate(f64::from(audio.sample_rate))
    } else {
        read_csv_series(path)?.0
    };
    Ok(series.with_id(path.display().to_string()))
}

fn predict(cfg: &RunConfig) -> Outcome {
    let model = load_model(required(&cfg.model, "model")?)?;
    let open_set = match (cfg.threshold, cfg.calibrate) {
        (Some(t), _) => OpenSet::Global(t),
        (None, Some(q)) => {
            let dataset = load(required(&cfg.data, "data")?)?;
            if dataset.classes != model.classes {
                return Err(Failure::Data(anyhow::anyhow!("calibration dataset classes differ from the model's classes")));
            }
            OpenSet::PerClass(model.calibrate_thresholds(&dataset.train, q)?)
        }
        (None, None) => OpenSet::Closed,
    };
    let mut csv = String::from("input,prediction,combined_evidence\n");
    let mut rejected = 0;
    for path in &cfg.inputs {
        let series = read_input(path)?;
        let report = model.evidences(&series).with_context(|| format!("classifying {}", path.display()))?;
        let label = match cesn::classify::decide(&report, &open_set) {
            Prediction::Class(j) => model.classes[j].as_str(),
            Prediction::Reject => {
                rejected += 1;
                "reject"
            }
        };
        csv.push_str(&format!("{},{label},{}\n", path.display(), fmt_f64(report.combined[report.decided])));
    }
    match &cfg.out {
        Some(out) => {
            write(out, &csv)?;
            Ok(format!("predict: {} inputs, {rejected} rejected -> {}", cfg.inputs.len(), out.display()))
        }
        None => Ok(csv.trim_end().to_string()),
    }
}

fn eval(cfg: &RunConfig) -> Outcome {
    let model = load_model(required(&cfg.model, "model")?)?;
    let dataset = load(required(&cfg.data, "data")?)?;
    if dataset.classes != model.classes {
        return Err(Failure::Data(anyhow::anyhow!("dataset classes differ from the model's classes")));
    }
    let metrics = evaluate(&model, dataset.split(cfg.split))?;
    let summary = format!(
        "eval: {} {} series, accuracy h+ {:.2}% h- {:.2}% combined {:.2}%",
        metrics.total,
        cfg.split.name(),
        metrics.accuracy_of(Family::Positive),
        metrics.accuracy_of(Family::Negative),
        metrics.accuracy_of(Family::Combined)
    );
    match &cfg.out {
        Some(out) => {
            write(out, &metrics.to_csv())?;
            let confusion = sibling(out, "confusion.csv");
            write(&confusion, &metrics.confusion_csv())?;
            Ok(format!("{summary} -> {}, {}", out.display(), confusion.display()))
        }
        None => Ok(format!("{}{summary}", metrics.to_csv())),
    }
}

fn run_sweep(cfg: &RunConfig) -> Outcome {
    let dataset = match &cfg.data {
        Some(path) => load(path)?,
        None => {
            let mut spec = cfg.synth.clone();
            spec.seed = cfg.seed;
            synthesize(&spec)?
        }
    };
    let sweep_cfg = SweepConfig {
        axis: cfg.axis,
        grid: cfg.grid.clone(),
        trials: cfg.trials,
        seed: cfg.seed,
        base: cfg.train.clone(),
        train_per_class: cfg.train_per_class,
        jobs: cfg.jobs,
    };
    let start = Instant::now();
    let report = sweep(&dataset, &sweep_cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    let best = (0..report.cells.len())
        .max_by(|&a, &b| {
            let acc = |c| report.mean_accuracy(c, Split::Test, Family::Combined);
            acc(a).total_cmp(&acc(b)).then(b.cmp(&a))
        })
        .expect("sweep has at least one cell");
    let summary = format!(
        "sweep: {} cells x {} trials in {seconds:.2} s, best test accuracy {:.2}% at {}={}",
        report.cells.len(),
        cfg.trials,
        report.mean_accuracy(best, Split::Test, Family::Combined),
        report.axis.name(),
        report.cells[best]
    );
    match &cfg.out {
        Some(out) => {
            write(out, &report.to_csv())?;
            let runtime = sibling(out, "runtime.csv");
            write(&runtime, &report.runtime_csv())?;
            Ok(format!("{summary} -> {}, {}", out.display(), runtime.display()))
        }
        None => Ok(format!("{}{summary}", report.to_table())),
    }
}
