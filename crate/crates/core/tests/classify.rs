use cesn::classify::*;
use cesn::datasets::{synthesize, Dataset, Split, SynthSpec};
use cesn::features::ResampleMode;
use cesn::numerics::{Matrix, Rng};
use cesn::{Conceptor, Error, LabeledSeries};

fn maneuver(m: usize, train: usize, test: usize) -> Dataset {
    synthesize(&SynthSpec::maneuver(m, train, test, 21)).unwrap()
}

fn sinusoid_config() -> TrainConfig {
    let mut cfg = TrainConfig::default();
    cfg.preprocess.resample = ResampleMode::None;
    cfg.aperture = 100.0;
    cfg
}

#[test]
fn two_class_negatives_are_single_negations() {
    let ds = maneuver(2, 4, 1);
    let model = train(&ds.train, &ds.classes, &TrainConfig::default()).unwrap();
    assert_eq!(model.negative[0], model.positive[1].not());
    assert_eq!(model.negative[1], model.positive[0].not());
}

#[test]
fn identical_classes_give_equal_conceptors() {
    let ds = maneuver(2, 3, 1);
    let mut twin: Vec<LabeledSeries> = ds.train.iter().filter(|s| s.label == Some(0)).cloned().collect();
    let copies: Vec<LabeledSeries> = twin.iter().map(|s| s.clone().with_label(1)).collect();
    twin.extend(copies);
    let model = train(&twin, &ds.classes, &TrainConfig::default()).unwrap();
    assert!(model.positive[0].matrix().max_abs_diff(model.positive[1].matrix()) < 1e-10);
}

#[test]
fn four_class_sinusoid_conceptors_are_bounded() {
    let ds = synthesize(&SynthSpec::sinusoid(4, 5, 2, 3)).unwrap();
    let model = train(&ds.train, &ds.classes, &sinusoid_config()).unwrap();
    assert_eq!(model.positive.len() + model.negative.len(), 8);
    for c in model.positive.iter().chain(&model.negative) {
        for s in c.singular_values() {
            assert!((-1e-10..=1.0 + 1e-10).contains(&s), "{s}");
        }
    }
}

#[test]
fn empty_and_single_class_errors() {
    let ds = maneuver(3, 2, 1);
    let only_two: Vec<LabeledSeries> = ds.train.iter().filter(|s| s.label != Some(2)).cloned().collect();
    assert!(matches!(train(&only_two, &ds.classes, &TrainConfig::default()), Err(Error::EmptyClass(c)) if c == ds.classes[2]));
    assert!(matches!(train(&ds.train, &ds.classes[..1], &TrainConfig::default()), Err(_)));
    let single: Vec<LabeledSeries> = ds.train.iter().filter(|s| s.label == Some(0)).cloned().collect();
    assert!(matches!(train(&single, &ds.classes[..1], &TrainConfig::default()), Err(Error::SingleClass)));
}

#[test]
fn training_samples_are_recognized() {
    let ds = maneuver(7, 8, 1);
    let mut cfg = TrainConfig::default();
    cfg.reservoir.n_neurons = 30;
    let model = train(&ds.train, &ds.classes, &cfg).unwrap();
    let metrics = evaluate(&model, &ds.train).unwrap();
    assert!(metrics.error_rate <= 0.05, "training error {}", metrics.error_rate);
}

#[test]
fn evidence_report_structure() {
    let ds = maneuver(4, 3, 2);
    let model = train(&ds.train, &ds.classes, &TrainConfig::default()).unwrap();
    for s in &ds.test {
        let r = model.evidences(s).unwrap();
        for j in 0..4 {
            assert_eq!(r.combined[j], r.pos[j] + r.neg[j]);
            assert!(r.combined[j] <= 2.0 + 1e-12);
        }
        assert_eq!(r.decided, argmax(&r.combined));
        let shifted = EvidenceReport::from_parts(r.pos.iter().map(|v| v + 3.5).collect(), r.neg.iter().map(|v| v - 1.25).collect());
        assert_eq!(shifted.decided, r.decided);
    }
}

#[test]
fn identity_and_zero_conceptors_give_unit_positive_evidence() {
    let ds = maneuver(3, 2, 1);
    let mut model = train(&ds.train, &ds.classes, &TrainConfig::default()).unwrap();
    let n = model.reservoir.size();
    model.positive = vec![Conceptor::zero(n), Conceptor::identity(n), Conceptor::zero(n)];
    let r = model.evidences(&ds.test[0]).unwrap();
    assert!((r.pos[1] - 1.0).abs() < 1e-12);
    assert_eq!((r.pos[0], r.pos[2]), (0.0, 0.0));
}

#[test]
fn all_zero_conceptors_decide_class_zero() {
    let ds = maneuver(3, 2, 3);
    let mut model = train(&ds.train, &ds.classes, &TrainConfig::default()).unwrap();
    let n = model.reservoir.size();
    model.positive = vec![Conceptor::zero(n); 3];
    model.negative = negative_conceptors(&model.positive).unwrap();
    let metrics = evaluate(&model, &ds.test).unwrap();
    let prevalence = ds.test.iter().filter(|s| s.label == Some(0)).count() as f64 / ds.test.len() as f64;
    assert!(metrics.confusion.iter().all(|row| row[1..].iter().all(|&c| c == 0)));
    assert_eq!(metrics.error_rate, 1.0 - prevalence);
}

#[test]
fn error_rate_matches_confusion_trace() {
    let ds = maneuver(5, 3, 4);
    let model = train(&ds.train, &ds.classes, &TrainConfig::default()).unwrap();
    let m = evaluate(&model, &ds.test).unwrap();
    let trace: usize = (0..5).map(|j| m.confusion[j][j]).sum();
    assert_eq!(m.error_rate, 1.0 - trace as f64 / m.total as f64);
    assert!(matches!(evaluate(&model, &[]), Err(Error::EmptyTestSet)));
}

#[test]
fn class_permutation_permutes_predictions() {
    let ds = maneuver(4, 4, 3);
    let perm = [2usize, 0, 3, 1];
    let relabel = |s: &LabeledSeries| s.clone().with_label(perm[s.label.unwrap()]);
    let mut classes = vec![String::new(); 4];
    for (j, c) in ds.classes.iter().enumerate() {
        classes[perm[j]] = c.clone();
    }
    let permuted: Vec<LabeledSeries> = ds.train.iter().map(relabel).collect();
    let a = train(&ds.train, &ds.classes, &TrainConfig::default()).unwrap();
    let b = train(&permuted, &classes, &TrainConfig::default()).unwrap();
    for s in &ds.test {
        assert_eq!(perm[a.evidences(s).unwrap().decided], b.evidences(s).unwrap().decided);
    }
}

#[test]
fn training_is_deterministic_and_model_files_round_trip() {
    let ds = maneuver(3, 3, 2);
    let a = train(&ds.train, &ds.classes, &TrainConfig::default()).unwrap();
    let b = train(&ds.train, &ds.classes, &TrainConfig::default()).unwrap();
    assert_eq!(a.to_text(), b.to_text());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    a.save(&path).unwrap();
    let back = ClassifierModel::load(&path).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.to_text(), a.to_text());
    for s in &ds.test {
        assert_eq!(back.evidences(s).unwrap(), a.evidences(s).unwrap());
    }
}

#[test]
fn mfcc_model_round_trips() {
    let mut cfg = TrainConfig::default();
    cfg.preprocess.mfcc = Some(cesn::features::MfccConfig::default());
    let mut rng = Rng::seed(4);
    let tone = |f: f64, rng: &mut Rng| {
        let x: Vec<f64> = (0..2048).map(|t| (2.0 * std::f64::consts::PI * f * t as f64 / 8000.0).sin() + 0.01 * rng.standard_normal()).collect();
        LabeledSeries::from_samples(&x).unwrap().with_sample_rate(8000.0)
    };
    let train_set: Vec<LabeledSeries> = (0..4).map(|i| tone(300.0 + 1500.0 * (i % 2) as f64, &mut rng).with_label(i % 2)).collect();
    let classes = vec!["low".to_string(), "high".to_string()];
    let model = train(&train_set, &classes, &cfg).unwrap();
    let back = ClassifierModel::from_text(&model.to_text(), std::path::Path::new("m")).unwrap();
    assert_eq!(back, model);
}

#[test]
fn corrupted_model_files_are_rejected() {
    let ds = maneuver(2, 2, 1);
    let text = train(&ds.train, &ds.classes, &TrainConfig::default()).unwrap().to_text();
    let p = std::path::Path::new("model.txt");
    assert!(ClassifierModel::from_text(&text.replacen("cesn-model v1", "cesn-model v9", 1), p).is_err());
    assert!(ClassifierModel::from_text(&text.replacen("cesn-model", "something", 1), p).is_err());
    let cut: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
    assert!(ClassifierModel::from_text(&cut, p).is_err());
}

#[test]
fn open_set_thresholds() {
    let ds = synthesize(&SynthSpec::sinusoid(4, 8, 2, 8)).unwrap();
    let model = train(&ds.train, &ds.classes, &sinusoid_config()).unwrap();
    for s in &ds.test {
        assert_ne!(model.predict(s, &OpenSet::Closed).unwrap(), Prediction::Reject);
        assert_eq!(model.predict(s, &OpenSet::Global(2.0 + 1e-9)).unwrap(), Prediction::Reject);
    }
    let thresholds = model.calibrate_thresholds(&ds.train, 5.0).unwrap();
    let open = OpenSet::PerClass(thresholds);
    let mut rng = Rng::seed(77);
    let mut rejected = 0;
    for _ in 0..40 {
        let noise: Vec<f64> = (0..72).map(|_| rng.standard_normal()).collect();
        if model.predict(&LabeledSeries::from_samples(&noise).unwrap(), &open).unwrap() == Prediction::Reject {
            rejected += 1;
        }
    }
    assert!(rejected >= 20, "only {rejected}/40 noise samples rejected");
}

#[test]
fn channel_mismatch_is_reported() {
    let ds = maneuver(2, 2, 1);
    let model = train(&ds.train, &ds.classes, &TrainConfig::default()).unwrap();
    let wrong = LabeledSeries::new(Matrix::zeros(3, 20)).unwrap();
    assert!(matches!(model.evidences(&wrong), Err(Error::ChannelMismatch { .. })));
}

#[test]
fn cross_validation_edge_cases() {
    let ds = maneuver(3, 5, 1);
    let cfg = TrainConfig::default();
    let one = cross_validate_aperture(&ds.train, &ds.classes, &cfg, &[3.0], 5, 1).unwrap();
    assert_eq!(one.best, 3.0);
    let grid = [0.5, 10.0, 100.0];
    let dup = [100.0, 0.5, 10.0, 10.0, 0.5];
    let a = cross_validate_aperture(&ds.train, &ds.classes, &cfg, &grid, 5, 1).unwrap();
    let b = cross_validate_aperture(&ds.train, &ds.classes, &cfg, &dup, 5, 1).unwrap();
    assert_eq!(a, b);
    assert!(matches!(
        cross_validate_aperture(&ds.train, &ds.classes, &cfg, &grid, 6, 1),
        Err(Error::TooFewSamplesPerClass { got: 5, needed: 6, .. })
    ));
    assert!(cross_validate_aperture(&ds.train, &ds.classes, &cfg, &[], 5, 1).is_err());
    assert!(cross_validate_aperture(&ds.train, &ds.classes, &cfg, &grid, 1, 1).is_err());
}

#[test]
fn cross_validation_ties_pick_smallest_aperture() {
    let ds = maneuver(2, 4, 1);
    // Both classes perfectly separable at every aperture in this range.
    let report = cross_validate_aperture(&ds.train, &ds.classes, &TrainConfig::default(), &[40.0, 20.0, 80.0], 2, 3).unwrap();
    let top = report.rows.iter().map(|r| r.mean_accuracy).fold(f64::NEG_INFINITY, f64::max);
    let first_top = report.rows.iter().find(|r| r.mean_accuracy == top).unwrap();
    assert_eq!(report.best, first_top.aperture);
}

#[test]
fn cross_validated_aperture_is_stable_on_resplit() {
    let ds = synthesize(&SynthSpec::sinusoid(8, 10, 0, 13)).unwrap();
    let cfg = sinusoid_config();
    let grid = default_aperture_grid();
    let first = cross_validate_aperture(&ds.train, &ds.classes, &cfg, &grid, 5, 1).unwrap();
    let resplit = cross_validate_aperture(&ds.train, &ds.classes, &cfg, &grid, 5, 2).unwrap();
    let top = resplit.rows.iter().map(|r| r.mean_accuracy).fold(f64::NEG_INFINITY, f64::max);
    let chosen = resplit.rows.iter().find(|r| r.aperture == first.best).unwrap();
    assert!(top - chosen.mean_accuracy <= 2.0 + 1e-9, "chosen {} vs max {top}", chosen.mean_accuracy);
}

#[test]
fn single_cell_sweep_equals_train_and_evaluate() {
    let ds = maneuver(3, 3, 2);
    let mut cfg = SweepConfig::new(SweepAxis::ReservoirSize, 1, 42);
    cfg.grid = vec![8];
    let report = sweep(&ds, &cfg).unwrap();
    let mut tc = TrainConfig::default();
    tc.reservoir.n_neurons = 8;
    tc.reservoir.seed = cesn::numerics::derive_seed(42, 0, 0);
    let model = train(&ds.train, &ds.classes, &tc).unwrap();
    let direct = evaluate(&model, &ds.test).unwrap();
    assert_eq!(report.trials[0].test, direct);
    assert_eq!(report.mean_accuracy(0, Split::Test, Family::Combined), direct.accuracy_of(Family::Combined));
}

#[test]
fn sweeps_are_reproducible_across_job_counts() {
    let ds = maneuver(3, 4, 2);
    let mut cfg = SweepConfig::new(SweepAxis::TrainingSize, 3, 9);
    cfg.grid = vec![2, 4];
    cfg.jobs = Some(1);
    let a = sweep(&ds, &cfg).unwrap();
    cfg.jobs = Some(3);
    let b = sweep(&ds, &cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    for st in &a.stats {
        for f in st.overall {
            assert!(f.iter().all(|v| (0.0..=100.0).contains(v)));
            assert!(f[1] <= f[0] && f[0] <= f[2]);
        }
    }
}

#[test]
fn ablation_sweep_reports_delta() {
    let ds = maneuver(3, 3, 2);
    let report = sweep(&ds, &SweepConfig::new(SweepAxis::Ablation, 2, 4)).unwrap();
    assert_eq!(report.cells, ["original", "linear", "no_interpolation", "linear_no_interpolation"]);
    assert_eq!(report.delta_quality(0, Split::Test, Family::Combined), Some(0.0));
    // Every variant of a trial runs on the same seed.
    let seeds: Vec<u64> = report.trials.iter().filter(|t| t.trial == 1).map(|t| t.seed).collect();
    assert!(seeds.windows(2).all(|w| w[0] == w[1]));
    assert!(report.to_csv().contains("ablation,linear,test,combined,all,delta_quality,"));
}

#[test]
fn sweep_needs_enough_data() {
    let ds = maneuver(3, 3, 2);
    let mut cfg = SweepConfig::new(SweepAxis::TrainingSize, 1, 1);
    cfg.grid = vec![4];
    assert!(matches!(sweep(&ds, &cfg), Err(Error::InsufficientData(_))));
    let no_test = Dataset { test: Vec::new(), ..ds };
    assert!(matches!(sweep(&no_test, &SweepConfig::new(SweepAxis::Ablation, 1, 1)), Err(Error::InsufficientData(_))));
}

#[test]
fn shuffle_baseline_matches_chance() {
    let ds = synthesize(&SynthSpec::sinusoid(8, 1, 10, 2)).unwrap();
    let labels: Vec<usize> = ds.test.iter().map(|s| s.label.unwrap()).collect();
    let e = shuffle_baseline_error(&labels, 1000, &mut Rng::seed(1)).unwrap();
    assert!((e - 0.875).abs() <= 0.05, "{e}");
}
