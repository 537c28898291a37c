//! Quick in-process invariant checks.

use std::path::Path;

use cesn::datasets::{synthesize, SynthSpec};
use cesn::features::{mfcc, MfccConfig, ResampleMode};
use cesn::numerics::{random_matrix, spectral_radius, sym_eig, Distribution, Rng};
use cesn::{train, ClassifierModel, Conceptor, Correlation, Reservoir, ReservoirParams, StateSequence, TrainConfig};

use crate::Failure;

type Check = fn(u64) -> Result<(), String>;

const CHECKS: [(&str, Check); 6] = [
    ("conceptor spectrum law", spectrum_law),
    ("boolean algebra", boolean_algebra),
    ("reservoir spectral radius", reservoir_radius),
    ("mfcc silence and frame count", mfcc_silence),
    ("model text round trip", model_round_trip),
    ("training samples recognized", recognizes_training_data),
];

pub fn run(seed: u64) -> Result<String, Failure> {
    let mut failed = Vec::new();
    for (name, check) in CHECKS {
        match check(seed) {
            Ok(()) => eprintln!("PASS {name}"),
            Err(e) => {
                eprintln!("FAIL {name}: {e}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        Ok(format!("selftest: {} checks passed", CHECKS.len()))
    } else {
        Err(Failure::Data(anyhow::anyhow!("selftest: {} of {} checks failed: {}", failed.len(), CHECKS.len(), failed.join(", "))))
    }
}

fn err(e: cesn::Error) -> String {
    e.to_string()
}

fn random_conceptor(n: usize, aperture: f64, rng: &mut Rng) -> Result<(Correlation, Conceptor), String> {
    let x = random_matrix(n, 4 * n, Distribution::StandardNormal, rng).map_err(err)?;
    let corr = Correlation::from_states(&StateSequence { states: x, washout_dropped: 0 }).map_err(err)?;
    let c = Conceptor::from_correlation(&corr, aperture).map_err(err)?;
    Ok((corr, c))
}

fn spectrum_law(seed: u64) -> Result<(), String> {
    let mut rng = Rng::seed(seed);
    for aperture in [0.5, 1.0, 10.0] {
        let (corr, c) = random_conceptor(5, aperture, &mut rng)?;
        let sigma = sym_eig(&corr.r).map_err(err)?.eigenvalues;
        for (s, sig) in c.singular_values().iter().zip(&sigma) {
            let expected = sig.max(0.0) / (sig.max(0.0) + aperture.powi(-2));
            if (s - expected).abs() > 1e-8 {
                return Err(format!("singular value {s} vs {expected} at aperture {aperture}"));
            }
        }
    }
    Ok(())
}

fn boolean_algebra(seed: u64) -> Result<(), String> {
    let mut rng = Rng::seed(seed ^ 0xb001);
    let (_, a) = random_conceptor(4, 2.0, &mut rng)?;
    let (_, b) = random_conceptor(4, 3.0, &mut rng)?;
    if a.not().not().matrix() != a.matrix() {
        return Err("double negation is not exact".into());
    }
    let ab = a.and(&b).map_err(err)?;
    let ba = b.and(&a).map_err(err)?;
    if ab.matrix().max_abs_diff(ba.matrix()) > 1e-8 {
        return Err("AND is not commutative".into());
    }
    let or = a.or(&b).map_err(err)?;
    let de_morgan = a.not().and(&b.not()).map_err(err)?;
    if or.not().matrix().max_abs_diff(de_morgan.matrix()) > 1e-8 {
        return Err("de Morgan law violated".into());
    }
    let with_zero = a.or(&Conceptor::zero(4)).map_err(err)?;
    if with_zero.matrix().max_abs_diff(a.matrix()) > 1e-6 {
        return Err("zero is not neutral for OR".into());
    }
    Ok(())
}

fn reservoir_radius(seed: u64) -> Result<(), String> {
    let params = ReservoirParams { n_neurons: 20, seed, ..Default::default() };
    let res = Reservoir::generate(&params, 3).map_err(err)?;
    let rho = spectral_radius(&res.w_res, &mut Rng::seed(seed ^ 0x5eed)).map_err(err)?;
    if (rho - params.spectral_radius_target).abs() > 1e-6 {
        return Err(format!("spectral radius {rho}, target {}", params.spectral_radius_target));
    }
    Ok(())
}

fn mfcc_silence(_seed: u64) -> Result<(), String> {
    let cfg = MfccConfig::default();
    let n = 4000;
    let out = mfcc(&vec![0.0; n], 16000.0, &cfg).map_err(err)?;
    if out.steps() != cfg.frame_count(n) || out.steps() != (n - 512) / 128 + 1 {
        return Err(format!("{} frames for {n} samples", out.steps()));
    }
    if out.values.max_abs() > 1e-9 {
        return Err(format!("silence gives coefficient magnitude {}", out.values.max_abs()));
    }
    Ok(())
}

fn small_model(seed: u64) -> Result<(ClassifierModel, Vec<cesn::LabeledSeries>), String> {
    let data = synthesize(&SynthSpec::sinusoid(3, 6, 0, seed)).map_err(err)?;
    let mut cfg = TrainConfig::default();
    cfg.reservoir.n_neurons = 20;
    cfg.reservoir.seed = seed;
    cfg.preprocess.resample = ResampleMode::None;
    cfg.aperture = 100.0;
    let model = train(&data.train, &data.classes, &cfg).map_err(err)?;
    Ok((model, data.train))
}

fn model_round_trip(seed: u64) -> Result<(), String> {
    let (model, _) = small_model(seed)?;
    let text = model.to_text();
    let back = ClassifierModel::from_text(&text, Path::new("<selftest>")).map_err(err)?;
    if back != model || back.to_text() != text {
        return Err("model differs after a text round trip".into());
    }
    Ok(())
}

fn recognizes_training_data(seed: u64) -> Result<(), String> {
    let (model, train_set) = small_model(seed)?;
    let hits = train_set
        .iter()
        .map(|s| model.evidences(s).map(|r| usize::from(Some(r.decided) == s.label)))
        .sum::<Result<usize, _>>()
        .map_err(err)?;
    if 10 * hits < 8 * train_set.len() {
        return Err(format!("{hits} of {} training series recognized", train_set.len()));
    }
    Ok(())
}
