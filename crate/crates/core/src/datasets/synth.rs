//! Synthetic stand-in corpora.
//!
//! * `sinusoid`: class `j` is `sin(2π f_j t + φ)` with `f_j = (j+1)·base`
//!   cycles per step, random phase and Gaussian noise; optionally lifted to
//!   several channels by a fixed random linear map.
//! * `maneuver`: 4-channel 10 Hz driving data (lateral, longitudinal and
//!   vertical acceleration in m/s², speed in m/s) drawn from per-class
//!   templates with randomised amplitudes and durations.

use std::f64::consts::PI;

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};
use crate::series::LabeledSeries;

pub const MANEUVER_CLASSES: [&str; 7] =
    ["stop", "straight_ahead", "start_up", "slow_down", "full_braking", "left_turn", "right_turn"];
pub const MANEUVER_CHANNELS: [&str; 4] = ["lat_accel", "long_accel", "grav_accel", "speed"];
const GRAVITY: f64 = 9.81;
const MANEUVER_RATE_HZ: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthTask {
    Sinusoid,
    Maneuver,
}

impl std::str::FromStr for SynthTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinusoid" => Ok(SynthTask::Sinusoid),
            "maneuver" => Ok(SynthTask::Maneuver),
            _ => Err(Error::BadSpec(format!("unknown task `{s}` (expected sinusoid or maneuver)"))),
        }
    }
}

impl std::fmt::Display for SynthTask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SynthTask::Sinusoid => "sinusoid",
            SynthTask::Maneuver => "maneuver",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub task: SynthTask,
    pub classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub noise_std: f64,
    /// Inclusive length range in time steps.
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
    /// Sinusoid only: cycles per step of class 0.
    pub base_frequency: f64,
    /// Sinusoid only: number of channels after the random lift (1 = no lift).
    pub channels: usize,
}

impl SynthSpec {
    pub fn sinusoid(classes: usize, train_per_class: usize, test_per_class: usize, seed: u64) -> Self {
        SynthSpec {
            task: SynthTask::Sinusoid,
            classes,
            train_per_class,
            test_per_class,
            noise_std: 0.1,
            min_len: 48,
            max_len: 96,
            seed,
            base_frequency: 1.0 / 32.0,
            channels: 1,
        }
    }

    /// 2–10 s at 10 Hz.
    pub fn maneuver(classes: usize, train_per_class: usize, test_per_class: usize, seed: u64) -> Self {
        SynthSpec {
            task: SynthTask::Maneuver,
            classes,
            train_per_class,
            test_per_class,
            noise_std: 0.2,
            min_len: 20,
            max_len: 100,
            seed,
            base_frequency: 0.0,
            channels: 4,
        }
    }

    fn validate(&self) -> Result<()> {
        let max_classes = match self.task {
            SynthTask::Sinusoid => 8,
            SynthTask::Maneuver => 7,
        };
        if self.classes < 1 || self.classes > max_classes {
            return Err(Error::BadSpec(format!("{} task supports 1..={max_classes} classes, got {}", self.task, self.classes)));
        }
        if self.min_len < 2 || self.min_len > self.max_len {
            return Err(Error::BadSpec(format!("invalid length range {}..={}", self.min_len, self.max_len)));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::BadSpec(format!("noise_std must be non-negative, got {}", self.noise_std)));
        }
        if self.train_per_class + self.test_per_class == 0 {
            return Err(Error::BadSpec("no samples requested".into()));
        }
        match self.task {
            SynthTask::Sinusoid => {
                let top = self.base_frequency * self.classes as f64;
                if !(self.base_frequency > 0.0 && top < 0.5) {
                    return Err(Error::BadSpec(format!("class frequencies must lie in (0, 0.5) cycles/step, top is {top}")));
                }
                if self.channels < 1 {
                    return Err(Error::BadSpec("need at least one channel".into()));
                }
            }
            SynthTask::Maneuver => {
                if self.channels != 4 {
                    return Err(Error::BadSpec("maneuver data always has 4 channels".into()));
                }
            }
        }
        Ok(())
    }
}

pub fn synthesize(spec: &SynthSpec) -> Result<Dataset> {
    match spec.task {
        SynthTask::Sinusoid => synth_sinusoid(spec),
        SynthTask::Maneuver => synth_maneuver(spec),
    }
}

/// Draws samples class by class; the generator for sample `i` of class `j` is
/// a dedicated substream, so changing one count does not perturb other classes.
fn generate(spec: &SynthSpec, mut sample: impl FnMut(usize, &mut Rng) -> Result<LabeledSeries>) -> Result<(Vec<LabeledSeries>, Vec<LabeledSeries>)> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..spec.classes {
        for i in 0..spec.train_per_class + spec.test_per_class {
            let mut rng = Rng::substream(spec.seed, ((class as u64) << 32) | i as u64);
            let (split, dest) = if i < spec.train_per_class { ("train", &mut train) } else { ("test", &mut test) };
            let s = sample(class, &mut rng)?.with_label(class).with_id(format!("{}-c{class}-{split}-{i}", spec.task));
            dest.push(s);
        }
    }
    Ok((train, test))
}

pub fn synth_sinusoid(spec: &SynthSpec) -> Result<Dataset> {
    if spec.task != SynthTask::Sinusoid {
        return Err(Error::BadSpec("not a sinusoid spec".into()));
    }
    spec.validate()?;
    let lift = if spec.channels > 1 {
        let mut rng = Rng::substream(spec.seed, u64::MAX);
        Some((0..spec.channels).map(|_| (rng.normal(0.0, 1.0), rng.uniform_pm1())).collect::<Vec<_>>())
    } else {
        None
    };
    let (train, test) = generate(spec, |class, rng| {
        let len = rng.int_inclusive(spec.min_len, spec.max_len);
        let phase = rng.uniform_range(0.0, 2.0 * PI);
        let freq = (class + 1) as f64 * spec.base_frequency;
        let clean = clean_sinusoid(freq, phase, len);
        let values = match &lift {
            None => {
                let noisy: Vec<f64> = clean.iter().map(|v| v + noise(rng, spec.noise_std)).collect();
                Matrix::from_vec(1, len, noisy)?
            }
            Some(weights) => {
                let mut m = Matrix::zeros(spec.channels, len);
                for (c, &(w, b)) in weights.iter().enumerate() {
                    for t in 0..len {
                        m[(c, t)] = w * clean[t] + b + noise(rng, spec.noise_std);
                    }
                }
                m
            }
        };
        LabeledSeries::new(values)
    })?;
    let classes = (0..spec.classes).map(|j| format!("f{}", j + 1)).collect();
    let channel_names = (0..spec.channels).map(|c| format!("x{c}")).collect();
    Ok(Dataset { classes, channel_names, train, test })
}

fn clean_sinusoid(freq: f64, phase: f64, len: usize) -> Vec<f64> {
    (0..len).map(|t| (2.0 * PI * freq * t as f64 + phase).sin()).collect()
}

fn noise(rng: &mut Rng, std: f64) -> f64 {
    if std == 0.0 {
        0.0
    } else {
        rng.normal(0.0, std)
    }
}

pub fn synth_maneuver(spec: &SynthSpec) -> Result<Dataset> {
    if spec.task != SynthTask::Maneuver {
        return Err(Error::BadSpec("not a maneuver spec".into()));
    }
    spec.validate()?;
    let (mut train, mut test) = generate(spec, |class, rng| {
        let len = rng.int_inclusive(spec.min_len, spec.max_len);
        let clean = maneuver_template(class, len, rng);
        let mut values = Matrix::zeros(4, len);
        for c in 0..4 {
            for t in 0..len {
                values[(c, t)] = clean[c][t] + noise(rng, spec.noise_std);
            }
        }
        LabeledSeries::new(values)
    })?;
    for s in train.iter_mut().chain(test.iter_mut()) {
        s.sample_rate_hz = Some(MANEUVER_RATE_HZ);
    }
    Ok(Dataset {
        classes: MANEUVER_CLASSES[..spec.classes].iter().map(|s| s.to_string()).collect(),
        channel_names: MANEUVER_CHANNELS.iter().map(|s| s.to_string()).collect(),
        train,
        test,
    })
}

/// Smooth bump on `[0, 1]`: 0 at both ends, 1 in the middle.
fn bump(u: f64) -> f64 {
    if (0.0..=1.0).contains(&u) {
        (PI * u).sin().powi(2)
    } else {
        0.0
    }
}

/// Clean `[lat, long, grav, speed]` channels for one maneuver of `len` steps.
fn maneuver_template(class: usize, len: usize, rng: &mut Rng) -> [Vec<f64>; 4] {
    let dt = 1.0 / MANEUVER_RATE_HZ;
    let mut lat = vec![0.0; len];
    let mut long = vec![0.0; len];
    let grav = vec![GRAVITY; len];
    let mut speed = vec![0.0; len];
    let u = |t: usize| t as f64 / (len - 1) as f64;
    let duration = (len - 1) as f64 * dt;

    let integrate = |long: &[f64], v0: f64| -> Vec<f64> {
        let mut v = v0;
        long.iter()
            .map(|a| {
                let out = v;
                v = (v + a * dt).max(0.0);
                out
            })
            .collect()
    };

    match class {
        // stop
        0 => {}
        // straight ahead
        1 => speed.fill(rng.uniform_range(8.0, 20.0)),
        // start up: acceleration pulse from standstill
        2 => {
            let peak = rng.uniform_range(1.5, 3.0);
            for t in 0..len {
                long[t] = peak * bump(u(t));
            }
            speed = integrate(&long, 0.0);
        }
        // slow down: mild deceleration that keeps the car moving
        3 => {
            let v0 = rng.uniform_range(12.0, 20.0);
            let peak = rng.uniform_range(1.0, 2.5).min(1.8 * (v0 - 2.0) / duration);
            for t in 0..len {
                long[t] = -peak * bump(u(t));
            }
            speed = integrate(&long, v0);
        }
        // full braking: cruise, hard stop, standstill
        4 => {
            let v0 = rng.uniform_range(12.0, 25.0);
            let decel = rng.uniform_range(6.5, 9.0);
            let start = ((len as f64) * rng.uniform_range(0.1, 0.3)) as usize;
            let mut v = v0;
            for t in 0..len {
                speed[t] = v;
                if t >= start && v > 0.0 {
                    long[t] = -decel;
                    v = (v - decel * dt).max(0.0);
                }
            }
            // the template must show the braking peak even for very short series
            if long.iter().all(|&a| a > -decel) {
                long[len - 1] = -decel;
            }
        }
        // left / right turn: lateral bump at constant speed
        5 | 6 => {
            let sign = if class == 5 { 1.0 } else { -1.0 };
            let peak = rng.uniform_range(2.0, 4.0);
            speed.fill(rng.uniform_range(5.0, 12.0));
            for t in 0..len {
                lat[t] = sign * peak * bump(u(t));
            }
        }
        _ => unreachable!("validated class count"),
    }
    [lat, long, grav, speed]
}
