//! Conceptor matrices, their Boolean algebra, and quadratic-form evidence.
//!
//! A conceptor for states with correlation `R` and aperture `α` is
//! `C = R (R + α⁻² I)⁻¹`; its eigenvalues are `σᵢ / (σᵢ + α⁻²)` for the
//! eigenvalues `σᵢ` of `R`. Boolean operations follow the usual conceptor
//! logic:
//!
//! * `¬C = I − C`
//! * `C₁ ∧ C₂ = (C₁⁻¹ + C₂⁻¹ − I)⁻¹`
//! * `C₁ ∨ C₂ = ¬(¬C₁ ∧ ¬C₂)`
//!
//! Every conceptor carries its complement `I − C`, so negation is an exact
//! involution and De Morgan's law holds bit for bit.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{Doc, DocWriter};
use crate::numerics::{inverse_spd, sym_eig, Cholesky, Matrix};
use crate::reservoir::StateSequence;

/// Regulariser added to each operand before inversion in `and`.
pub const AND_REGULARIZER: f64 = 1e-10;

/// Sample correlation `R = X Xᵀ / L` of reservoir states.
#[derive(Clone, Debug, PartialEq)]
pub struct Correlation {
    pub r: Matrix,
    pub sample_count: usize,
}

impl Correlation {
    pub fn from_states(states: &StateSequence) -> Result<Correlation> {
        Self::pooled(std::slice::from_ref(states))
    }

    /// Correlation of the time-concatenation of several state sequences.
    pub fn pooled(parts: &[StateSequence]) -> Result<Correlation> {
        let total: usize = parts.iter().map(StateSequence::len).sum();
        let dim = parts.first().map(StateSequence::dim).ok_or(Error::EmptyStates)?;
        if total == 0 {
            return Err(Error::EmptyStates);
        }
        let mut sum = Matrix::zeros(dim, dim);
        for p in parts {
            if p.dim() != dim {
                return Err(Error::dims(format!("state dimension {dim}"), p.dim()));
            }
            sum = sum.add(&p.states.gram());
        }
        Ok(Correlation { r: sum.scale(1.0 / total as f64).symmetrize(), sample_count: total })
    }

    pub fn dim(&self) -> usize {
        self.r.rows()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Aggregate {
    #[default]
    Mean,
    Sum,
}

/// How a state sequence is reduced to a scalar evidence value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvidenceMode {
    pub aggregate: Aggregate,
    /// Scale each state to unit length before forming `zᵀ C z`.
    pub normalize_states: bool,
}

impl Default for EvidenceMode {
    fn default() -> Self {
        EvidenceMode { aggregate: Aggregate::Mean, normalize_states: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Conceptor {
    c: Matrix,
    complement: Matrix,
    aperture: Option<f64>,
}

impl Conceptor {
    /// `C = R (R + α⁻² I)⁻¹`.
    pub fn from_correlation(corr: &Correlation, aperture: f64) -> Result<Conceptor> {
        if !(aperture > 0.0 && aperture.is_finite()) {
            return Err(Error::NonPositiveAperture(aperture));
        }
        let r = &corr.r;
        let mu = aperture.powi(-2);
        // R and (R + μI)⁻¹ commute, so C = (R + μI)⁻¹ R.
        let c = match Cholesky::factor(&r.add_diag(mu)) {
            Ok(chol) => chol.solve(r)?.symmetrize(),
            Err(Error::NotPositiveDefinite { .. }) => {
                sym_eig(r)?.reconstruct_with(|s| {
                    let s = s.max(0.0);
                    s / (s + mu)
                })
            }
            Err(e) => return Err(e),
        };
        Ok(Self::with_aperture(c, Some(aperture)))
    }

    /// Wraps an explicit symmetric matrix (symmetrized on entry).
    pub fn from_matrix(c: Matrix, aperture: Option<f64>) -> Result<Conceptor> {
        c.ensure_square()?;
        c.ensure_finite()?;
        if !c.is_symmetric(1e-8) {
            return Err(Error::Config("conceptor matrix must be symmetric".into()));
        }
        Ok(Self::with_aperture(c.symmetrize(), aperture))
    }

    fn with_aperture(c: Matrix, aperture: Option<f64>) -> Conceptor {
        let complement = Matrix::identity(c.rows()).sub(&c);
        Conceptor { c, complement, aperture }
    }

    pub fn zero(dim: usize) -> Conceptor {
        Self::with_aperture(Matrix::zeros(dim, dim), None)
    }

    pub fn identity(dim: usize) -> Conceptor {
        Self::with_aperture(Matrix::identity(dim), None)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.c
    }

    pub fn aperture(&self) -> Option<f64> {
        self.aperture
    }

    pub fn dim(&self) -> usize {
        self.c.rows()
    }

    /// Eigenvalues (equal to the singular values, `C` being symmetric PSD), descending.
    pub fn singular_values(&self) -> Vec<f64> {
        sym_eig(&self.c).expect("conceptor matrices are square and finite").eigenvalues
    }

    /// `¬C = I − C`.
    pub fn not(&self) -> Conceptor {
        Conceptor { c: self.complement.clone(), complement: self.c.clone(), aperture: None }
    }

    /// `C₁ ∧ C₂ = (C₁⁻¹ + C₂⁻¹ − I)⁻¹`, with each operand shifted by
    /// [`AND_REGULARIZER`] before inversion and the result's eigenvalues
    /// clipped to `[0, 1]`.
    pub fn and(&self, other: &Conceptor) -> Result<Conceptor> {
        self.check_dim(other)?;
        let n = self.dim();
        let a = regularized_inverse(&self.c)?;
        let b = regularized_inverse(&other.c)?;
        let sum = a.add(&b).add_diag(-1.0);
        let inv = match inverse_spd(&sum) {
            Ok(m) => m,
            Err(Error::NotPositiveDefinite { .. }) => {
                sym_eig(&sum)?.reconstruct_with(|l| if l > 0.0 { 1.0 / l } else { 0.0 })
            }
            Err(e) => return Err(e),
        };
        let eig = sym_eig(&inv)?;
        let in_range = eig.eigenvalues.iter().all(|&l| (0.0..=1.0).contains(&l));
        let c = if in_range { inv } else { eig.reconstruct_with(|l| l.clamp(0.0, 1.0)) };
        debug_assert_eq!(c.rows(), n);
        Ok(Self::with_aperture(c, None))
    }

    /// `C₁ ∨ C₂ = ¬(¬C₁ ∧ ¬C₂)`.
    pub fn or(&self, other: &Conceptor) -> Result<Conceptor> {
        Ok(self.not().and(&other.not())?.not())
    }

    fn check_dim(&self, other: &Conceptor) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::dims(format!("conceptor dimension {}", self.dim()), other.dim()))
        }
    }

    /// Aggregated quadratic form `x(n)ᵀ C x(n)` over the columns of `states`.
    ///
    /// With `normalize_states` every column is scaled to unit length first (zero
    /// columns contribute 0), which puts mean evidence in `[0, 1]`.
    pub fn evidence(&self, states: &StateSequence, mode: EvidenceMode) -> Result<f64> {
        if states.dim() != self.dim() {
            return Err(Error::dims(format!("state dimension {}", self.dim()), states.dim()));
        }
        if states.is_empty() {
            return Err(Error::EmptyStates);
        }
        let x = &states.states;
        let mut col = vec![0.0; x.rows()];
        let mut total = 0.0;
        for t in 0..x.cols() {
            for (i, v) in col.iter_mut().enumerate() {
                *v = x[(i, t)];
            }
            let q = self.c.quadratic_form(&col);
            total += if mode.normalize_states {
                let sq: f64 = col.iter().map(|v| v * v).sum();
                if sq > 0.0 { q / sq } else { 0.0 }
            } else {
                q
            };
        }
        Ok(match mode.aggregate {
            Aggregate::Mean => total / x.cols() as f64,
            Aggregate::Sum => total,
        })
    }

    pub fn to_text(&self) -> String {
        let mut w = DocWriter::new("cesn-conceptor", 1);
        self.write_into(&mut w, "");
        w.finish()
    }

    pub(crate) fn write_into(&self, w: &mut DocWriter, prefix: &str) {
        match self.aperture {
            Some(a) => w.real(&format!("{prefix}aperture"), a),
            None => w.kv(&format!("{prefix}aperture"), "none"),
        };
        w.matrix(&format!("{prefix}c"), &self.c).matrix(&format!("{prefix}complement"), &self.complement);
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Conceptor> {
        let doc = Doc::parse(text, "cesn-conceptor", path)?;
        Self::read_from(&doc, "")
    }

    pub(crate) fn read_from(doc: &Doc, prefix: &str) -> Result<Conceptor> {
        let key = format!("{prefix}aperture");
        let aperture = match doc.str(&key)? {
            "none" => None,
            _ => Some(doc.get::<f64>(&key)?),
        };
        let mut conceptor = Self::from_matrix(doc.matrix(&format!("{prefix}c"))?.clone(), aperture)?;
        let complement_key = format!("{prefix}complement");
        if let Ok(complement) = doc.matrix(&complement_key) {
            if complement.shape() != conceptor.c.shape() || complement.max_abs_diff(&conceptor.complement) > 1e-8 {
                return Err(doc.bad(&complement_key, "stored complement differs from I - C"));
            }
            conceptor.complement = complement.clone();
        }
        Ok(conceptor)
    }
}

/// `(C + δI)⁻¹`, falling back to an eigenvalue-clipped inverse when `C` has
/// slightly negative eigenvalues from rounding.
fn regularized_inverse(c: &Matrix) -> Result<Matrix> {
    match inverse_spd(&c.add_diag(AND_REGULARIZER)) {
        Ok(m) => Ok(m),
        Err(Error::NotPositiveDefinite { .. }) => {
            Ok(sym_eig(c)?.reconstruct_with(|l| 1.0 / (l.max(0.0) + AND_REGULARIZER)))
        }
        Err(e) => Err(e),
    }
}
