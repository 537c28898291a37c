//! Spectral radius of a general real square matrix.
//!
//! Uses the growth rate `ρ(W) = lim ‖Wᵏ v‖^(1/k)` rather than a Rayleigh
//! quotient, so complex or sign-alternating dominant eigenvalues do not make
//! the estimate oscillate. The powers are formed by repeated squaring with
//! renormalisation (`k = 2, 4, 8, …`), which keeps the estimate bounded and
//! makes the transient error decay like `1/k` in the exponent.

use super::{norm2, Matrix, Rng};
use crate::error::Result;

pub const MAX_ITERATIONS: usize = 500;
pub const REL_TOL: f64 = 1e-10;

pub fn spectral_radius(w: &Matrix, rng: &mut Rng) -> Result<f64> {
    w.ensure_square()?;
    w.ensure_finite()?;
    let n = w.rows();
    let mut v: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let vn = norm2(&v);
    v.iter_mut().for_each(|x| *x /= vn);

    // invariant: W^(2^k) = exp(2^k * log_scale) * b
    let mut b = w.clone();
    let mut log_scale = 0.0;
    let mut power = 1.0_f64;
    let mut prev = f64::NAN;
    let mut stable = 0;

    for _ in 0..MAX_ITERATIONS {
        let bn = b.frobenius_norm();
        if bn == 0.0 {
            return Ok(0.0);
        }
        let bv = norm2(&b.mat_vec(&v));
        let growth = if bv > 0.0 { bv } else { bn };
        let estimate = (log_scale + growth.ln() / power).exp();

        if (estimate - prev).abs() <= REL_TOL * estimate {
            stable += 1;
            if stable >= 2 {
                return Ok(estimate);
            }
        } else {
            stable = 0;
        }
        prev = estimate;

        log_scale += bn.ln() / power;
        let bhat = b.scale(1.0 / bn);
        b = bhat.matmul(&bhat);
        power *= 2.0;
        if !power.is_finite() {
            break;
        }
    }
    Ok(if prev.is_finite() { prev } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho(w: &Matrix) -> f64 {
        spectral_radius(w, &mut Rng::seed(0)).unwrap()
    }

    #[test]
    fn identity() {
        assert!((rho(&Matrix::identity(2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_is_zero() {
        let w = Matrix::from_rows(&[[0.0, 2.0], [0.0, 0.0]]).unwrap();
        assert!(rho(&w).abs() < 1e-6);
    }

    #[test]
    fn diagonal_with_negative_dominant() {
        assert!((rho(&Matrix::from_diag(&[0.3, -0.9])) - 0.9).abs() < 1e-9);
    }

    #[test]
    fn rotation_has_complex_dominant_pair() {
        // eigenvalues 0.8·e^{±iπ/5}
        let (c, s) = ((std::f64::consts::PI / 5.0).cos(), (std::f64::consts::PI / 5.0).sin());
        let w = Matrix::from_rows(&[[0.8 * c, -0.8 * s], [0.8 * s, 0.8 * c]]).unwrap();
        assert!((rho(&w) - 0.8).abs() < 1e-9);
    }

    #[test]
    fn jordan_block() {
        let w = Matrix::from_rows(&[[0.5, 1.0], [0.0, 0.5]]).unwrap();
        assert!((rho(&w) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn scaled_identity_exact() {
        for &c in &[-3.5, 0.25, 7.0] {
            assert!((rho(&Matrix::scaled_identity(4, c)) - c.abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn non_square() {
        assert!(spectral_radius(&Matrix::zeros(2, 3), &mut Rng::seed(0)).is_err());
    }
}
