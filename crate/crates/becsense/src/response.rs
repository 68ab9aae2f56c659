//! Frequency-domain susceptibilities and the output transfer functions.
//!
//! Fourier convention: `d/dt -> -i*omega`, so the susceptibility matrix is
//! `chi(omega) = (-i*omega*I - A)^{-1}` and the bare cavity inverse response
//! reads `chi_0^{-1} = kappa/2 - i*omega`. Reality of the drift matrix gives
//! `chi(-omega) = conj(chi(omega))`.

use nalgebra::{Matrix3, Matrix6};
use num_complex::Complex64;

use crate::dynamics::DriftMatrix;
use crate::error::{Error, Result};
use crate::model::LinearModel;

/// Magnitude below which a complex denominator counts as a pole.
pub const POLE_TOLERANCE: f64 = 1e-30;

/// Full 6x6 susceptibility at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Susceptibility {
    pub omega: f64,
    pub chi: Matrix6<Complex64>,
}

/// Inverts `(-i*omega*I - A)`; the oracle route against which the closed
/// forms are checked.
pub fn susceptibility_full(a: &DriftMatrix, omega: f64) -> Result<Susceptibility> {
    let mut m = a.matrix.map(|x| Complex64::new(-x, 0.0));
    for i in 0..6 {
        m[(i, i)] -= Complex64::new(0.0, omega);
    }
    let chi = m
        .try_inverse()
        .ok_or_else(|| Error::singular("(-i omega I - A) is not invertible", Some(omega)))?;
    Ok(Susceptibility { omega, chi })
}

/// The three susceptibility elements feeding the output phase quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiElements {
    pub omega: f64,
    /// `(P_a <- P_a^in)` element.
    pub chi22: Complex64,
    /// `(P_a <- X_b^in)` element.
    pub chi23: Complex64,
    /// `(P_a <- X_d^in)` element.
    pub chi25: Complex64,
}

/// Closed forms built from the scalar inverse responses
/// `chi_0^{-1} = kappa/2 - i*omega` and
/// `chi_{-m(-d)}^{-1} = gamma/2 - lambda - i*omega`:
///
/// ```text
/// chi22 = [chi0^-1 + g^2 chi_-m + G^2 chi_-d]^-1
/// chi23 = g [chi0^-1 chi_-m^-1 + g^2 + G^2 chi_-d chi_-m^-1]^-1
/// chi25 = -G [chi0^-1 chi_-d^-1 + G^2 + g^2 chi_-m chi_-d^-1]^-1
/// ```
///
/// Evaluated in the multiplied-through cofactor form over the common
/// determinant `chi0^-1 chi_-m^-1 chi_-d^-1 + g^2 chi_-d^-1 + G^2 chi_-m^-1`,
/// which is singular exactly where the response has a pole; the scalar
/// zeros of `chi_-m^-1`/`chi_-d^-1` are removable once the modes couple.
pub fn chi_closed_form(model: &LinearModel, omega: f64) -> Result<ChiElements> {
    let g = Complex64::new(model.g, 0.0);
    let g_bog = Complex64::new(model.g_bog, 0.0);
    let chi0_inv = Complex64::new(model.kappa / 2.0, -omega);
    let chim_inv = Complex64::new(model.gamma_m / 2.0 - model.lambda_m, -omega);
    let chid_inv = Complex64::new(model.gamma_d / 2.0 - model.lambda_d, -omega);

    let det = chi0_inv * chim_inv * chid_inv + g * g * chid_inv + g_bog * g_bog * chim_inv;
    if det.norm() < POLE_TOLERANCE {
        return Err(Error::singular(
            "response determinant vanishes (pole)",
            Some(omega),
        ));
    }

    Ok(ChiElements {
        omega,
        chi22: chim_inv * chid_inv / det,
        chi23: g * chid_inv / det,
        chi25: -g_bog * chim_inv / det,
    })
}

/// 3x3 inversion of the signal block `(P_a, X_b, X_d)`; middle route between
/// the closed forms and the full 6x6 oracle.
pub fn susceptibility_signal_block(model: &LinearModel, omega: f64) -> Result<ChiElements> {
    let a = crate::dynamics::build_drift_matrix(model);
    let block = a.signal_block();
    let mut m = block.map(|x| Complex64::new(-x, 0.0));
    for i in 0..3 {
        m[(i, i)] -= Complex64::new(0.0, omega);
    }
    let inv: Matrix3<Complex64> = m.try_inverse().ok_or_else(|| {
        Error::singular(
            "signal block (-i omega I - A) is not invertible",
            Some(omega),
        )
    })?;
    Ok(ChiElements {
        omega,
        chi22: inv[(0, 0)],
        chi23: inv[(0, 1)],
        chi25: inv[(0, 2)],
    })
}

/// Coefficients mapping the input noises onto the output phase quadrature:
/// `A = 1 - kappa*chi22`, `B = sqrt(kappa*gamma_m)*chi23`,
/// `D = sqrt(kappa*gamma_d)*chi25`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferFunctions {
    pub omega: f64,
    pub a_coef: Complex64,
    pub b_coef: Complex64,
    pub d_coef: Complex64,
}

pub fn transfer_functions(model: &LinearModel, omega: f64) -> Result<TransferFunctions> {
    let chi = chi_closed_form(model, omega)?;
    Ok(TransferFunctions {
        omega,
        a_coef: Complex64::new(1.0, 0.0) - model.kappa * chi.chi22,
        b_coef: (model.kappa * model.gamma_m).sqrt() * chi.chi23,
        d_coef: (model.kappa * model.gamma_d).sqrt() * chi.chi25,
    })
}
