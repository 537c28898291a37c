//! Echo state network generation, state harvesting and the linear readout.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{Doc, DocWriter};
use crate::numerics::{random_matrix, solve_spd, spectral_radius, Distribution, Matrix, Rng};

const RHO_FLOOR: f64 = 1e-12;
const MAX_GENERATION_ATTEMPTS: usize = 5;
/// Spectral-radius estimation uses stream `attempt + SPECTRAL_STREAM_OFFSET`.
const SPECTRAL_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "linear",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "linear" | "identity" => Ok(Activation::Identity),
            _ => Err(Error::Config(format!("unknown activation `{s}` (expected tanh or linear)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReservoirParams {
    pub n_neurons: usize,
    /// Spectral radius of the final recurrent matrix; must lie in (0, 1).
    pub spectral_radius_target: f64,
    pub input_scaling: f64,
    pub bias_scaling: f64,
    pub activation: Activation,
    pub washout: usize,
    pub seed: u64,
}

impl Default for ReservoirParams {
    fn default() -> Self {
        ReservoirParams {
            n_neurons: 10,
            spectral_radius_target: 0.9,
            input_scaling: 1.0,
            bias_scaling: 0.2,
            activation: Activation::Tanh,
            washout: 0,
            seed: 1,
        }
    }
}

impl ReservoirParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_neurons < 1 {
            return Err(Error::Config("reservoir needs at least one neuron".into()));
        }
        if !(self.spectral_radius_target > 0.0 && self.spectral_radius_target < 1.0) {
            return Err(Error::Config(format!(
                "spectral radius target must lie in (0, 1), got {}",
                self.spectral_radius_target
            )));
        }
        if !(self.input_scaling > 0.0 && self.input_scaling.is_finite()) {
            return Err(Error::Config(format!("input scaling must be positive, got {}", self.input_scaling)));
        }
        if !(self.bias_scaling >= 0.0 && self.bias_scaling.is_finite()) {
            return Err(Error::Config(format!("bias scaling must be non-negative, got {}", self.bias_scaling)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reservoir {
    pub w_res: Matrix,
    pub w_in: Matrix,
    pub bias: Vec<f64>,
    pub params: ReservoirParams,
}

/// Reservoir states `N × L`, one column per retained time step.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSequence {
    pub states: Matrix,
    pub washout_dropped: usize,
}

impl StateSequence {
    pub fn dim(&self) -> usize {
        self.states.rows()
    }

    pub fn len(&self) -> usize {
        self.states.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.states.cols() == 0
    }

    /// Concatenates sequences along time.
    pub fn concat(parts: &[StateSequence]) -> Result<StateSequence> {
        let mats: Vec<&Matrix> = parts.iter().map(|s| &s.states).collect();
        Ok(StateSequence {
            states: Matrix::hcat(&mats)?,
            washout_dropped: parts.iter().map(|s| s.washout_dropped).sum(),
        })
    }
}

impl Reservoir {
    /// Builds a reservoir: `W₀ ~ N(0,1)`, `W_res = α·W₀/ρ(W₀)`,
    /// `W_in ~ N(0,1)·input_scaling`, `b ~ N(0,1)·bias_scaling`.
    ///
    /// A degenerate `W₀` (spectral radius below 1e-12) is redrawn from the next
    /// substream, up to five attempts in total.
    pub fn generate(params: &ReservoirParams, input_dim: usize) -> Result<Reservoir> {
        params.validate()?;
        if input_dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let n = params.n_neurons;
        for attempt in 0..MAX_GENERATION_ATTEMPTS as u64 {
            let mut rng = Rng::substream(params.seed, attempt);
            let w0 = random_matrix(n, n, Distribution::StandardNormal, &mut rng)?;
            let rho = spectral_radius(&w0, &mut Rng::substream(params.seed, attempt + SPECTRAL_STREAM_OFFSET))?;
            if rho < RHO_FLOOR {
                continue;
            }
            let w_res = w0.scale(params.spectral_radius_target / rho);
            let w_in = random_matrix(n, input_dim, Distribution::StandardNormal, &mut rng)?.scale(params.input_scaling);
            let bias = (0..n).map(|_| rng.standard_normal() * params.bias_scaling).collect();
            return Ok(Reservoir { w_res, w_in, bias, params: params.clone() });
        }
        Err(Error::DegenerateW0 { attempts: MAX_GENERATION_ATTEMPTS })
    }

    /// Assembles a reservoir from explicit weights.
    pub fn from_parts(w_res: Matrix, w_in: Matrix, bias: Vec<f64>, params: ReservoirParams) -> Result<Reservoir> {
        w_res.ensure_square()?;
        let n = w_res.rows();
        if w_in.rows() != n || bias.len() != n {
            return Err(Error::dims(
                format!("w_in {n}xd and bias {n}"),
                format!("w_in {}x{} and bias {}", w_in.rows(), w_in.cols(), bias.len()),
            ));
        }
        if w_in.cols() == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Reservoir { w_res, w_in, bias, params: ReservoirParams { n_neurons: n, ..params } })
    }

    pub fn size(&self) -> usize {
        self.w_res.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_in.cols()
    }

    /// Runs `x(n+1) = f(W_res x(n) + W_in p(n+1) + b)` from `x(0) = 0` over the
    /// columns of `input` (`d × L`) and drops the first `washout` states.
    pub fn drive(&self, input: &Matrix) -> Result<StateSequence> {
        self.drive_from(input, &vec![0.0; self.size()])
    }

    pub fn drive_from(&self, input: &Matrix, initial: &[f64]) -> Result<StateSequence> {
        let n = self.size();
        if input.rows() != self.input_dim() {
            return Err(Error::dims(format!("{} input channels", self.input_dim()), input.rows()));
        }
        if initial.len() != n {
            return Err(Error::dims(format!("initial state of length {n}"), initial.len()));
        }
        let washout = self.params.washout;
        let steps = input.cols();
        if steps <= washout {
            return Err(Error::TooShort { needed: washout, got: steps });
        }
        let act = self.params.activation;
        let d = self.input_dim();
        let mut x = initial.to_vec();
        let mut next = vec![0.0; n];
        let mut p = vec![0.0; d];
        let mut states = Matrix::zeros(n, steps - washout);
        for t in 0..steps {
            for (c, pc) in p.iter_mut().enumerate() {
                *pc = input[(c, t)];
            }
            for (i, out) in next.iter_mut().enumerate() {
                let pre = crate::numerics::dot(self.w_res.row(i), &x) + crate::numerics::dot(self.w_in.row(i), &p) + self.bias[i];
                *out = act.apply(pre);
            }
            std::mem::swap(&mut x, &mut next);
            if t >= washout {
                states.set_column(t - washout, &x);
            }
        }
        Ok(StateSequence { states, washout_dropped: washout })
    }

    pub fn to_text(&self) -> String {
        let mut w = DocWriter::new("cesn-reservoir", 1);
        self.write_into(&mut w, "");
        w.finish()
    }

    pub(crate) fn write_into(&self, w: &mut DocWriter, prefix: &str) {
        let p = &self.params;
        w.kv(&format!("{prefix}n_neurons"), p.n_neurons)
            .real(&format!("{prefix}spectral_radius_target"), p.spectral_radius_target)
            .real(&format!("{prefix}input_scaling"), p.input_scaling)
            .real(&format!("{prefix}bias_scaling"), p.bias_scaling)
            .kv(&format!("{prefix}activation"), p.activation.name())
            .kv(&format!("{prefix}washout"), p.washout)
            .kv(&format!("{prefix}seed"), p.seed)
            .kv(&format!("{prefix}input_dim"), self.input_dim())
            .matrix(&format!("{prefix}w_res"), &self.w_res)
            .matrix(&format!("{prefix}w_in"), &self.w_in)
            .reals(&format!("{prefix}bias"), &self.bias);
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Reservoir> {
        let doc = Doc::parse(text, "cesn-reservoir", path)?;
        if doc.version != 1 {
            return Err(doc.bad("", format!("unsupported reservoir version {}", doc.version)));
        }
        Self::read_from(&doc, "")
    }

    pub(crate) fn read_from(doc: &Doc, prefix: &str) -> Result<Reservoir> {
        let key = |k: &str| format!("{prefix}{k}");
        let params = ReservoirParams {
            n_neurons: doc.get(&key("n_neurons"))?,
            spectral_radius_target: doc.get(&key("spectral_radius_target"))?,
            input_scaling: doc.get(&key("input_scaling"))?,
            bias_scaling: doc.get(&key("bias_scaling"))?,
            activation: doc.get(&key("activation"))?,
            washout: doc.get(&key("washout"))?,
            seed: doc.get(&key("seed"))?,
        };
        let input_dim: usize = doc.get(&key("input_dim"))?;
        let w_res = doc.matrix(&key("w_res"))?.clone();
        let w_in = doc.matrix(&key("w_in"))?.clone();
        let bias = doc.reals(&key("bias"))?;
        if w_res.rows() != params.n_neurons || w_in.cols() != input_dim {
            return Err(doc.bad(&key("n_neurons"), "reservoir matrix shapes disagree with metadata"));
        }
        Reservoir::from_parts(w_res, w_in, bias, params)
    }
}

/// Ridge regression readout: `W_out = argmin ‖W X − Y‖² + ridge‖W‖²`,
/// solved from `(X Xᵀ + ridge·I) W_outᵀ = X Yᵀ`.
pub fn fit_readout(states: &StateSequence, targets: &Matrix, ridge: f64) -> Result<Matrix> {
    let x = &states.states;
    if targets.cols() != x.cols() {
        return Err(Error::dims(format!("{} target columns", x.cols()), targets.cols()));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Config(format!("ridge must be non-negative, got {ridge}")));
    }
    let gram = x.gram().add_diag(ridge);
    let rhs = x.matmul(&targets.transpose());
    match solve_spd(&gram, &rhs) {
        Ok(w_t) => Ok(w_t.transpose()),
        Err(Error::NotPositiveDefinite { .. }) => Err(Error::SingularGram),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, alpha: f64, seed: u64) -> ReservoirParams {
        ReservoirParams { n_neurons: n, spectral_radius_target: alpha, seed, ..Default::default() }
    }

    #[test]
    fn generated_spectral_radius_matches_target() {
        let r = Reservoir::generate(&params(10, 0.9, 1), 1).unwrap();
        let rho = spectral_radius(&r.w_res, &mut Rng::seed(99)).unwrap();
        assert!((rho - 0.9).abs() < 1e-4, "rho = {rho}");
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(12, 0.8, 77);
        assert_eq!(Reservoir::generate(&p, 3).unwrap(), Reservoir::generate(&p, 3).unwrap());
    }

    #[test]
    fn input_weight_shape() {
        let r = Reservoir::generate(&params(2, 0.5, 3), 4).unwrap();
        assert_eq!(r.w_in.shape(), (2, 4));
        assert_eq!(r.bias.len(), 2);
    }

    #[test]
    fn params_validation() {
        assert!(Reservoir::generate(&params(5, 1.0, 1), 1).is_err());
        assert!(Reservoir::generate(&params(0, 0.5, 1), 1).is_err());
        assert!(Reservoir::generate(&params(5, 0.5, 1), 0).is_err());
    }

    #[test]
    fn zero_input_zero_bias_stays_at_zero() {
        let p = ReservoirParams { bias_scaling: 0.0, ..params(6, 0.9, 4) };
        let r = Reservoir::generate(&p, 2).unwrap();
        let s = r.drive(&Matrix::zeros(2, 15)).unwrap();
        assert!(s.states.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_network_copies_input() {
        let p = ReservoirParams { activation: Activation::Identity, ..params(3, 0.5, 0) };
        let r = Reservoir::from_parts(Matrix::zeros(3, 3), Matrix::identity(3), vec![0.0; 3], p).unwrap();
        let input = Matrix::from_rows(&[[1.0, 2.0, 3.0, 4.0], [0.5, -1.0, 0.0, 2.0], [9.0, 8.0, 7.0, 6.0]]).unwrap();
        assert_eq!(r.drive(&input).unwrap().states, input);
    }

    #[test]
    fn tanh_states_are_bounded() {
        let r = Reservoir::generate(&params(20, 0.9, 8), 1).unwrap();
        let input = Matrix::from_vec(1, 50, (0..50).map(|t| 5.0 * (t as f64 * 0.3).sin()).collect()).unwrap();
        let s = r.drive(&input).unwrap();
        assert!(s.states.as_slice().iter().all(|v| v.abs() < 1.0));
    }

    // Under a constant input the state converges to a fixed point; once the
    // transient is over, step sizes shrink monotonically.
    #[test]
    fn constant_input_converges() {
        for seed in 0..5 {
            let r = Reservoir::generate(&params(10, 0.9, seed), 1).unwrap();
            let s = r.drive(&Matrix::from_vec(1, 120, vec![0.5; 120]).unwrap()).unwrap();
            let steps: Vec<f64> = (1..120)
                .map(|t| {
                    let a = s.states.column(t);
                    let b = s.states.column(t - 1);
                    a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
                })
                .collect();
            for w in steps[20..].windows(2) {
                assert!(w[1] <= w[0] || w[1] < 1e-14, "seed {seed}: {} > {}", w[1], w[0]);
            }
            assert!(steps.last().unwrap() < &1e-3);
        }
    }

    #[test]
    fn washout_drops_leading_states() {
        let p = ReservoirParams { washout: 3, ..params(4, 0.9, 2) };
        let r = Reservoir::generate(&p, 1).unwrap();
        let input = Matrix::from_vec(1, 10, (0..10).map(|t| t as f64 / 10.0).collect()).unwrap();
        let full = Reservoir { params: ReservoirParams { washout: 0, ..p.clone() }, ..r.clone() }.drive(&input).unwrap();
        let s = r.drive(&input).unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(s.washout_dropped, 3);
        assert_eq!(s.states, full.states.columns_range(3, 10));
        assert!(matches!(r.drive(&Matrix::zeros(1, 3)), Err(Error::TooShort { .. })));
    }

    #[test]
    fn drive_checks_channels() {
        let r = Reservoir::generate(&params(4, 0.9, 2), 2).unwrap();
        assert!(matches!(r.drive(&Matrix::zeros(3, 5)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn readout_zero_targets() {
        let r = Reservoir::generate(&params(5, 0.9, 2), 1).unwrap();
        let s = r.drive(&Matrix::from_vec(1, 30, (0..30).map(|t| (t as f64).cos()).collect()).unwrap()).unwrap();
        let w = fit_readout(&s, &Matrix::zeros(2, 30), 1e-6).unwrap();
        assert_eq!(w.shape(), (2, 5));
        assert!(w.max_abs() == 0.0);
    }

    #[test]
    fn readout_single_neuron() {
        let s = StateSequence { states: Matrix::from_rows(&[[1.0, 1.0, 1.0]]).unwrap(), washout_dropped: 0 };
        let w = fit_readout(&s, &Matrix::from_rows(&[[2.0, 2.0, 2.0]]).unwrap(), 0.0).unwrap();
        assert!((w[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn readout_recovers_linear_map() {
        let mut rng = Rng::seed(5);
        let x = random_matrix(6, 40, Distribution::StandardNormal, &mut rng).unwrap();
        let m = random_matrix(3, 6, Distribution::StandardNormal, &mut rng).unwrap();
        let y = m.matmul(&x);
        let w = fit_readout(&StateSequence { states: x, washout_dropped: 0 }, &y, 0.0).unwrap();
        assert!(w.max_abs_diff(&m) < 1e-8);
    }

    #[test]
    fn readout_singular_gram() {
        let s = StateSequence { states: Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap(), washout_dropped: 0 };
        assert!(matches!(fit_readout(&s, &Matrix::zeros(1, 2), 0.0), Err(Error::SingularGram)));
    }

    #[test]
    fn text_round_trip() {
        let r = Reservoir::generate(&params(4, 0.7, 9), 2).unwrap();
        let back = Reservoir::from_text(&r.to_text(), Path::new("r")).unwrap();
        assert_eq!(r, back);
    }
}
