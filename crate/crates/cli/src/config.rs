//! Effective run configuration: built from an optional key=value file, the
//! `CESN_SEED` environment variable and command-line flags (later sources
//! win), and written back in the same key=value form.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use cesn::classify::{default_aperture_grid, SweepAxis, TrainConfig, DEFAULT_FOLDS};
use cesn::datasets::{Split, SynthSpec, SynthTask};
use cesn::features::{MfccConfig, ResampleMode};
use cesn::Activation;

pub const SEED_ENV: &str = "CESN_SEED";
const DEFAULT_SEED: u64 = 1;
const SYNTH_ONLY: [&str; 5] = ["task", "classes", "test_per_class", "noise", "channels"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Synth,
    Features,
    Train,
    Predict,
    Eval,
    Sweep,
    Selftest,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Synth => "synth",
            CommandKind::Features => "features",
            CommandKind::Train => "train",
            CommandKind::Predict => "predict",
            CommandKind::Eval => "eval",
            CommandKind::Sweep => "sweep",
            CommandKind::Selftest => "selftest",
        }
    }

    /// Keys a command reads, in the order they are written out.
    fn keys(self) -> Vec<&'static str> {
        const SYNTH: &[&str] = &["task", "classes", "train_per_class", "test_per_class", "noise", "channels"];
        const PRE: &[&str] = &["normalize", "resample", "support_points", "mfcc", "n_mels", "n_coeffs", "frame_length", "hop_length", "keep_c0"];
        const RES: &[&str] = &["reservoir_size", "spectral_radius", "input_scaling", "bias_scaling", "activation", "washout", "aperture"];
        let parts: &[&[&str]] = match self {
            CommandKind::Synth => &[&["out", "seed"], SYNTH],
            CommandKind::Features => &[&["data", "out"], PRE],
            CommandKind::Train => &[&["data", "model", "seed", "train_per_class", "cv_grid", "cv_folds"], RES, PRE],
            CommandKind::Predict => &[&["model", "input", "out", "threshold", "calibrate", "data"]],
            CommandKind::Eval => &[&["model", "data", "split", "out"]],
            CommandKind::Sweep => &[&["data", "out", "seed", "axis", "grid", "trials", "jobs"], SYNTH, RES, PRE],
            CommandKind::Selftest => &[&["seed"]],
        };
        parts.iter().flat_map(|p| p.iter().copied()).collect()
    }
}

impl FromStr for CommandKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            CommandKind::Synth,
            CommandKind::Features,
            CommandKind::Train,
            CommandKind::Predict,
            CommandKind::Eval,
            CommandKind::Sweep,
            CommandKind::Selftest,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// Flag name for a config key.
pub fn flag(key: &str) -> String {
    format!("--{}", key.replace('_', "-"))
}

/// Raw key=value settings before validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.replace('-', "_"), value.into());
    }

    pub fn parse_file(text: &str, origin: &str) -> Result<Settings, String> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("{origin}:{}: expected key=value, got `{line}`", i + 1))?;
            s.set(k.trim(), v.trim());
        }
        Ok(s)
    }

    pub fn merge(&mut self, other: Settings) {
        self.0.extend(other.0);
    }
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub split: Split,
    pub seed: u64,
    pub synth: SynthSpec,
    pub train: TrainConfig,
    pub cv_grid: Option<Vec<f64>>,
    pub cv_folds: usize,
    pub threshold: Option<f64>,
    pub calibrate: Option<f64>,
    pub trials: usize,
    pub jobs: Option<usize>,
    pub axis: SweepAxis,
    pub grid: Vec<usize>,
    pub train_per_class: Option<usize>,
}

struct Reader<'a> {
    settings: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, String> {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|_| format!("invalid value `{v}` for {}: expected {what}", flag(key))))
            .transpose()
    }

    fn or<T: FromStr>(&self, key: &str, what: &str, default: T) -> Result<T, String> {
        Ok(self.get(key, what)?.unwrap_or(default))
    }

    fn list<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<Vec<T>>, String> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|t| t.trim().parse::<T>().map_err(|_| format!("invalid entry `{t}` in {}: expected {what}", flag(key))))
                    .collect()
            })
            .transpose()
    }
}

fn bool_value(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

#[derive(Clone, Copy)]
struct Flag(bool);

impl FromStr for Flag {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        bool_value(s).map(Flag).ok_or(())
    }
}

impl RunConfig {
    /// Validates settings for `command`; errors name the offending flag.
    pub fn resolve(command: CommandKind, settings: &Settings) -> Result<RunConfig, String> {
        let allowed = command.keys();
        for key in settings.0.keys() {
            if key == "command" {
                continue;
            }
            if !allowed.contains(&key.as_str()) {
                return Err(format!("{} is not used by `{}`", flag(key), command.name()));
            }
        }
        if let Some(c) = settings.0.get("command") {
            if c != command.name() {
                return Err(format!("config file is for `{c}`, not `{}`", command.name()));
            }
        }
        let r = Reader { settings: &settings.0 };
        if command == CommandKind::Sweep && r.raw("data").is_some() {
            if let Some(k) = SYNTH_ONLY.iter().find(|k| r.raw(k).is_some()) {
                return Err(format!("{} describes a synthetic corpus and cannot be combined with --data", flag(k)));
            }
        }
        let seed = match r.get::<u64>("seed", "an unsigned integer")? {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v.trim().parse().map_err(|_| format!("invalid value `{v}` in {SEED_ENV}: expected an unsigned integer"))?,
                Err(_) => DEFAULT_SEED,
            },
        };

        let task: SynthTask = r.or("task", "sinusoid or maneuver", SynthTask::Maneuver)?;
        let base = match task {
            SynthTask::Sinusoid => SynthSpec::sinusoid(8, 8, 8, seed),
            SynthTask::Maneuver => SynthSpec::maneuver(7, 8, 6, seed),
        };
        let synth = SynthSpec {
            classes: r.or("classes", "an integer", base.classes)?,
            train_per_class: r.or("train_per_class", "an integer", base.train_per_class)?,
            test_per_class: r.or("test_per_class", "an integer", base.test_per_class)?,
            noise_std: r.or("noise", "a number", base.noise_std)?,
            channels: r.or("channels", "an integer", base.channels)?,
            ..base
        };

        let mut train = TrainConfig::default();
        let res = &mut train.reservoir;
        res.n_neurons = r.or("reservoir_size", "an integer", res.n_neurons)?;
        res.spectral_radius_target = r.or("spectral_radius", "a number", res.spectral_radius_target)?;
        res.input_scaling = r.or("input_scaling", "a number", res.input_scaling)?;
        res.bias_scaling = r.or("bias_scaling", "a number", res.bias_scaling)?;
        res.activation = r.or::<Activation>("activation", "tanh or linear", res.activation)?;
        res.washout = r.or("washout", "an integer", res.washout)?;
        res.seed = seed;
        res.validate().map_err(|e| e.to_string())?;
        train.aperture = r.or("aperture", "a positive number", train.aperture)?;
        if !(train.aperture > 0.0 && train.aperture.is_finite()) {
            return Err(format!("{} must be positive, got {}", flag("aperture"), train.aperture));
        }
        let pre = &mut train.preprocess;
        pre.normalize = r.or("normalize", "true or false", Flag(pre.normalize))?.0;
        pre.resample = r.or::<ResampleMode>("resample", "polynomial[:degree], linear or none", pre.resample)?;
        pre.support_points = r.or("support_points", "an integer", pre.support_points)?;
        if pre.resample != ResampleMode::None && pre.support_points < 2 {
            return Err(format!("{} must be at least 2", flag("support_points")));
        }
        if r.or("mfcc", "true or false", Flag(false))?.0 {
            let d = MfccConfig::default();
            let cfg = MfccConfig {
                n_mels: r.or("n_mels", "an integer", d.n_mels)?,
                n_coeffs: r.or("n_coeffs", "an integer", d.n_coeffs)?,
                frame_length: r.or("frame_length", "an integer", d.frame_length)?,
                hop_length: r.or("hop_length", "an integer", d.hop_length)?,
                keep_c0: r.or("keep_c0", "true or false", Flag(d.keep_c0))?.0,
                ..d
            };
            cfg.validate().map_err(|e| format!("invalid MFCC settings: {e}"))?;
            pre.mfcc = Some(cfg);
        } else if let Some(k) = ["n_mels", "n_coeffs", "frame_length", "hop_length", "keep_c0"].iter().find(|k| r.raw(k).is_some()) {
            return Err(format!("{} needs --mfcc true", flag(k)));
        }

        let cv_grid = match r.raw("cv_grid") {
            None => None,
            Some("default") => Some(default_aperture_grid()),
            Some(_) => r.list::<f64>("cv_grid", "a number")?,
        };
        if cv_grid.as_ref().is_some_and(|g| g.is_empty() || g.iter().any(|a| !(*a > 0.0 && a.is_finite()))) {
            return Err(format!("{} needs positive apertures", flag("cv_grid")));
        }
        let cv_folds = r.or("cv_folds", "an integer", DEFAULT_FOLDS)?;
        if cv_folds < 2 {
            return Err(format!("{} must be at least 2", flag("cv_folds")));
        }

        let threshold = r.get::<f64>("threshold", "a number")?;
        let calibrate = r.get::<f64>("calibrate", "a percentile in [0, 100]")?;
        if threshold.is_some() && calibrate.is_some() {
            return Err(format!("{} and {} are mutually exclusive", flag("threshold"), flag("calibrate")));
        }
        if calibrate.is_some_and(|q| !(0.0..=100.0).contains(&q)) {
            return Err(format!("{} must lie in [0, 100]", flag("calibrate")));
        }

        let axis: SweepAxis = r.or("axis", "reservoir-size, training-size or ablation", SweepAxis::ReservoirSize)?;
        let grid = r.list::<usize>("grid", "an integer")?.unwrap_or_else(|| axis.default_grid());
        if axis == SweepAxis::Ablation && r.raw("grid").is_some() {
            return Err(format!("{} is not used on the ablation axis", flag("grid")));
        }
        if axis != SweepAxis::Ablation && grid.is_empty() {
            return Err(format!("{} is empty", flag("grid")));
        }
        let trials = r.or("trials", "an integer", 20)?;
        if trials == 0 {
            return Err(format!("{} must be at least 1", flag("trials")));
        }
        let jobs = r.get::<usize>("jobs", "an integer")?;
        if jobs == Some(0) {
            return Err(format!("{} must be at least 1", flag("jobs")));
        }

        let inputs: Vec<PathBuf> = r.raw("input").map(|v| v.split(',').map(PathBuf::from).collect()).unwrap_or_default();
        let cfg = RunConfig {
            command,
            data: r.raw("data").map(PathBuf::from),
            out: r.raw("out").map(PathBuf::from),
            model: r.raw("model").map(PathBuf::from),
            inputs,
            split: r.or("split", "train or test", Split::Test)?,
            seed,
            synth,
            train,
            cv_grid,
            cv_folds,
            threshold,
            calibrate,
            trials,
            jobs,
            axis,
            grid,
            train_per_class: match command {
                CommandKind::Train => r.get("train_per_class", "an integer")?,
                CommandKind::Sweep if r.raw("data").is_some() => r.get("train_per_class", "an integer")?,
                _ => None,
            },
        };
        cfg.check_required()?;
        Ok(cfg)
    }

    fn check_required(&self) -> Result<(), String> {
        let need = |present: bool, key: &str| if present { Ok(()) } else { Err(format!("`{}` needs {}", self.command.name(), flag(key))) };
        match self.command {
            CommandKind::Synth => need(self.out.is_some(), "out"),
            CommandKind::Features => need(self.data.is_some(), "data").and(need(self.out.is_some(), "out")),
            CommandKind::Train => need(self.data.is_some(), "data").and(need(self.model.is_some(), "model")),
            CommandKind::Predict => {
                need(self.model.is_some(), "model")?;
                need(!self.inputs.is_empty(), "input")?;
                if self.calibrate.is_some() {
                    need(self.data.is_some(), "data")?;
                }
                Ok(())
            }
            CommandKind::Eval => need(self.model.is_some(), "model").and(need(self.data.is_some(), "data")),
            CommandKind::Sweep | CommandKind::Selftest => Ok(()),
        }
    }

    /// Every setting the command reads, including defaults, as key=value lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("command={}\n", self.command.name());
        for key in self.command.keys() {
            if let Some(v) = self.value(key) {
                out.push_str(&format!("{key}={v}\n"));
            }
        }
        out
    }

    fn value(&self, key: &str) -> Option<String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let res = &self.train.reservoir;
        let pre = &self.train.preprocess;
        let mfcc = pre.mfcc.as_ref();
        Some(match key {
            "data" => return path(&self.data),
            "out" => return path(&self.out),
            "model" => return path(&self.model),
            "input" => {
                let list: Vec<String> = self.inputs.iter().map(|p| p.display().to_string()).collect();
                list.join(",")
            }
            "split" => self.split.name().to_string(),
            "seed" => self.seed.to_string(),
            k if self.command == CommandKind::Sweep && self.data.is_some() && SYNTH_ONLY.contains(&k) => return None,
            "task" => self.synth.task.to_string(),
            "classes" => self.synth.classes.to_string(),
            "train_per_class" if self.command == CommandKind::Synth => self.synth.train_per_class.to_string(),
            "train_per_class" if self.command == CommandKind::Sweep && self.data.is_none() => self.synth.train_per_class.to_string(),
            "train_per_class" => return self.train_per_class.map(|n| n.to_string()),
            "test_per_class" => self.synth.test_per_class.to_string(),
            "noise" => self.synth.noise_std.to_string(),
            "channels" => self.synth.channels.to_string(),
            "reservoir_size" => res.n_neurons.to_string(),
            "spectral_radius" => res.spectral_radius_target.to_string(),
            "input_scaling" => res.input_scaling.to_string(),
            "bias_scaling" => res.bias_scaling.to_string(),
            "activation" => res.activation.name().to_string(),
            "washout" => res.washout.to_string(),
            "aperture" => self.train.aperture.to_string(),
            "normalize" => pre.normalize.to_string(),
            "resample" => pre.resample.to_string(),
            "support_points" => pre.support_points.to_string(),
            "mfcc" => mfcc.is_some().to_string(),
            "n_mels" => return mfcc.map(|m| m.n_mels.to_string()),
            "n_coeffs" => return mfcc.map(|m| m.n_coeffs.to_string()),
            "frame_length" => return mfcc.map(|m| m.frame_length.to_string()),
            "hop_length" => return mfcc.map(|m| m.hop_length.to_string()),
            "keep_c0" => return mfcc.map(|m| m.keep_c0.to_string()),
            "cv_grid" => {
                let grid = self.cv_grid.as_ref()?;
                grid.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
            }
            "cv_folds" => self.cv_folds.to_string(),
            "threshold" => return self.threshold.map(|t| t.to_string()),
            "calibrate" => return self.calibrate.map(|q| q.to_string()),
            "trials" => self.trials.to_string(),
            "jobs" => return self.jobs.map(|j| j.to_string()),
            "axis" => self.axis.name().to_string(),
            "grid" if self.axis == SweepAxis::Ablation => return None,
            "grid" => self.grid.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(","),
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Settings {
        let mut s = Settings::default();
        for (k, v) in pairs {
            s.set(k, *v);
        }
        s
    }

    #[test]
    fn emitted_config_resolves_to_itself() {
        let s = settings(&[("data", "m.txt"), ("model", "model.txt"), ("reservoir-size", "30"), ("cv_grid", "1,10"), ("seed", "9")]);
        let cfg = RunConfig::resolve(CommandKind::Train, &s).unwrap();
        let text = cfg.to_text();
        let again = RunConfig::resolve(CommandKind::Train, &Settings::parse_file(&text, "cfg").unwrap()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_text(), text);
    }

    #[test]
    fn sweep_config_round_trips() {
        let s = settings(&[("axis", "ablation"), ("trials", "3"), ("task", "sinusoid"), ("mfcc", "false")]);
        let cfg = RunConfig::resolve(CommandKind::Sweep, &s).unwrap();
        let again = RunConfig::resolve(CommandKind::Sweep, &Settings::parse_file(&cfg.to_text(), "cfg").unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn errors_name_the_flag() {
        let bad = |pairs: &[(&str, &str)], cmd| RunConfig::resolve(cmd, &settings(pairs)).unwrap_err();
        assert!(bad(&[("out", "d"), ("classes", "x")], CommandKind::Synth).contains("--classes"));
        assert!(bad(&[("out", "d"), ("axis", "ablation")], CommandKind::Synth).contains("--axis"));
        assert!(bad(&[("data", "m"), ("model", "x"), ("activation", "relu")], CommandKind::Train).contains("--activation"));
        assert!(bad(&[("data", "m")], CommandKind::Train).contains("--model"));
        assert!(bad(&[("trials", "0")], CommandKind::Sweep).contains("--trials"));
        assert!(bad(&[("n_mels", "20")], CommandKind::Sweep).contains("--n-mels"));
    }

    #[test]
    fn config_file_syntax() {
        let s = Settings::parse_file("# comment\nreservoir-size = 12\n\nseed=3\n", "f").unwrap();
        assert_eq!(s, settings(&[("reservoir_size", "12"), ("seed", "3")]));
        assert!(Settings::parse_file("oops\n", "f").unwrap_err().contains("f:1"));
    }
}
