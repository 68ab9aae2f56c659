//! Force-referred noise, sensitivity and signal-to-noise ratio.
//!
//! The output spectrum divided by the mechanical gain and rescaled by the
//! transduction constant `m*hbar*omega_m*gamma_m` gives the noise-force
//! power spectral density
//!
//! ```text
//! S_N(omega) = m hbar omega_m gamma_m [ (n_m + 1/2) + n_add(omega) ]   (N^2/Hz)
//! ```
//!
//! so extra mechanical gain amplifies signal and thermal noise alike and the
//! sensitivity `sqrt(S_N)` depends only on the added noise. Densities are
//! two-sided symmetric.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::LinearModel;
use crate::params::ThermalEnvironment;
use crate::response::transfer_functions;
use crate::spectra::added_noise;
use crate::HBAR;

/// Mass and frequency of the mechanical transducer; together with the
/// model's `gamma_m` they set the force scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceScale {
    /// Mirror mass, kg.
    pub mass: f64,
    /// Mechanical frequency, rad/s.
    pub omega_m: f64,
}

impl ForceScale {
    /// `m*hbar*omega_m*gamma_m`, N^2/Hz per quantum.
    pub fn transduction_constant(&self, gamma_m: f64) -> f64 {
        self.mass * HBAR * self.omega_m * gamma_m
    }
}

/// Classical input force.
///
/// A monochromatic tone `F(t) = F0 sin(omega_f t)` is phased so that at
/// `omega_f = omega_m` its content lands in the signal quadrature around
/// `omega = 0`. Arbitrary waveforms enter as tabulated spectra `F(omega)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ForceSignal {
    Tone {
        /// Amplitude F0, N.
        amplitude: f64,
        /// Tone frequency, rad/s.
        frequency: f64,
    },
    Tabulated(TabulatedSpectrum),
}

impl ForceSignal {
    pub fn tone(amplitude: f64, frequency: f64) -> Result<Self> {
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::invalid("amplitude", "tone amplitude must be >= 0"));
        }
        if !frequency.is_finite() || frequency <= 0.0 {
            return Err(Error::invalid("frequency", "tone frequency must be > 0"));
        }
        Ok(ForceSignal::Tone {
            amplitude,
            frequency,
        })
    }
}

/// Sampled complex force spectrum on an ascending frequency grid.
///
/// A real time-domain force obeys `F(-omega) = conj(F(omega))`; this is
/// enforced when both signs are covered by the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    omegas: Vec<f64>,
    values: Vec<Complex64>,
}

impl TabulatedSpectrum {
    pub fn new(omegas: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if omegas.len() != values.len() || omegas.len() < 2 {
            return Err(Error::invalid(
                "tabulated force",
                "need matching grids with at least two samples",
            ));
        }
        if !omegas.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid(
                "tabulated force",
                "frequency grid must be strictly ascending",
            ));
        }
        let table = TabulatedSpectrum { omegas, values };
        // Hermitian check on mirrored sample pairs.
        for (i, &w) in table.omegas.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            if let Ok(v_minus) = table.interpolate(-w) {
                let v = table.values[i];
                let err = (v_minus - v.conj()).norm();
                if err > 1e-9 * v.norm().max(1e-300) {
                    return Err(Error::invalid(
                        "tabulated force",
                        format!("not Hermitian at omega = {w:e}: F(-w) != conj(F(w))"),
                    ));
                }
            }
        }
        Ok(table)
    }

    pub fn min_omega(&self) -> f64 {
        self.omegas[0]
    }

    pub fn max_omega(&self) -> f64 {
        *self.omegas.last().unwrap()
    }

    fn interpolate(&self, omega: f64) -> Result<Complex64> {
        let (min, max) = (self.min_omega(), self.max_omega());
        if omega < min || omega > max {
            return Err(Error::OutOfRange { omega, min, max });
        }
        let idx = self.omegas.partition_point(|&w| w < omega);
        if idx == 0 {
            return Ok(self.values[0]);
        }
        if idx == self.omegas.len() {
            return Ok(*self.values.last().unwrap());
        }
        let (w0, w1) = (self.omegas[idx - 1], self.omegas[idx]);
        let t = (omega - w0) / (w1 - w0);
        Ok(self.values[idx - 1] * (1.0 - t) + self.values[idx] * t)
    }
}

/// Signal content reaching the mechanical input quadrature:
/// `F~(omega) = (1/2)[F(omega + omega_m) - F(omega - omega_m)]`.
///
/// For a tone the spectrum is a line pair, so `F~` is itself a set of lines;
/// the returned value is the line amplitude when `omega` coincides with one
/// (relative tolerance `1e-9`), zero otherwise. A resonant tone
/// (`omega_f = omega_m`) puts `|F~(0)| = F0/2`.
pub fn force_transform(signal: &ForceSignal, omega: f64, omega_m: f64) -> Result<Complex64> {
    match signal {
        ForceSignal::Tone {
            amplitude,
            frequency,
        } => {
            // F(t) = F0 sin(w_f t): amplitude -i F0/2 at +w_f, +i F0/2 at -w_f.
            let up = Complex64::new(0.0, -amplitude / 2.0);
            let down = Complex64::new(0.0, amplitude / 2.0);
            let tol = 1e-9 * omega_m.abs().max(*frequency).max(1.0);
            let mut out = Complex64::new(0.0, 0.0);
            let matches = |a: f64, b: f64| (a - b).abs() <= tol;
            // + (1/2) F(omega + omega_m)
            if matches(omega + omega_m, *frequency) {
                out += 0.5 * up;
            }
            if matches(omega + omega_m, -*frequency) {
                out += 0.5 * down;
            }
            // - (1/2) F(omega - omega_m)
            if matches(omega - omega_m, *frequency) {
                out -= 0.5 * up;
            }
            if matches(omega - omega_m, -*frequency) {
                out -= 0.5 * down;
            }
            Ok(out)
        }
        ForceSignal::Tabulated(table) => {
            let plus = table.interpolate(omega + omega_m)?;
            let minus = table.interpolate(omega - omega_m)?;
            Ok(0.5 * (plus - minus))
        }
    }
}

/// Noise-force power spectral density `S_N(omega)`, N^2/Hz.
pub fn noise_force_spectrum(
    model: &LinearModel,
    scale: &ForceScale,
    env: &ThermalEnvironment,
    omega: f64,
) -> Result<f64> {
    let tf = transfer_functions(model, omega)?;
    let n_add = added_noise(&tf, env)?;
    Ok(scale.transduction_constant(model.gamma_m) * ((env.n_m + 0.5) + n_add))
}

/// Minimum detectable force `sqrt(S_N(omega))`, N/sqrt(Hz).
pub fn sensitivity(
    model: &LinearModel,
    scale: &ForceScale,
    env: &ThermalEnvironment,
    omega: f64,
) -> Result<f64> {
    Ok(noise_force_spectrum(model, scale, env, omega)?.sqrt())
}

/// Signal-to-noise ratio `r(omega) = |F~(omega)| / sqrt(S_N(omega))`.
pub fn snr(
    signal: &ForceSignal,
    model: &LinearModel,
    scale: &ForceScale,
    env: &ThermalEnvironment,
    omega: f64,
) -> Result<f64> {
    let f = force_transform(signal, omega, scale.omega_m)?;
    Ok(f.norm() / sensitivity(model, scale, env, omega)?)
}

/// Per-frequency sensing record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingPoint {
    pub omega: f64,
    /// N^2/Hz.
    pub s_n: f64,
    /// N/sqrt(Hz).
    pub sensitivity: f64,
    /// Dimensionless; zero when no signal is supplied.
    pub snr: f64,
}

pub fn sensing_point(
    signal: Option<&ForceSignal>,
    model: &LinearModel,
    scale: &ForceScale,
    env: &ThermalEnvironment,
    omega: f64,
) -> Result<SensingPoint> {
    let s_n = noise_force_spectrum(model, scale, env, omega)?;
    let sens = s_n.sqrt();
    let snr = match signal {
        Some(sig) => force_transform(sig, omega, scale.omega_m)?.norm() / sens,
        None => 0.0,
    };
    Ok(SensingPoint {
        omega,
        s_n,
        sensitivity: sens,
        snr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn rb_scale() -> (ForceScale, f64) {
        (
            ForceScale {
                mass: 1e-12,
                omega_m: 1e5,
            },
            TAU * 100.0,
        )
    }

    fn dimensionless(c0: f64, c1: f64, xi_m: f64, xi_d: f64) -> LinearModel {
        let gamma_m = TAU * 100.0;
        LinearModel::from_cooperativities(c0, c1, xi_m, xi_d, 1e5 * gamma_m, gamma_m, gamma_m)
            .unwrap()
    }

    #[test]
    fn zero_force_gives_zero_transform() {
        let sig = ForceSignal::tone(0.0, 1e5).unwrap();
        let f = force_transform(&sig, 0.0, 1e5).unwrap();
        assert_eq!(f.norm(), 0.0);
    }

    #[test]
    fn resonant_tone_carries_half_amplitude_at_zero() {
        let sig = ForceSignal::tone(2.0e-18, 1e5).unwrap();
        let f0 = force_transform(&sig, 0.0, 1e5).unwrap();
        assert_relative_eq!(f0.norm(), 1.0e-18, max_relative = 1e-12);
        // Off the line positions the transform vanishes.
        let f = force_transform(&sig, 0.3e5, 1e5).unwrap();
        assert_eq!(f.norm(), 0.0);
        // The 2*omega_m images carry a quarter amplitude each.
        let f2 = force_transform(&sig, 2e5, 1e5).unwrap();
        assert_relative_eq!(f2.norm(), 0.5e-18, max_relative = 1e-12);
    }

    #[test]
    fn tabulated_transform_antihermitian_for_real_force() {
        // Real even force => F(omega) real and even => F~(-w) = -conj(F~(w)).
        let omegas: Vec<f64> = (-200..=200).map(|i| i as f64 * 1e3).collect();
        let values: Vec<Complex64> = omegas
            .iter()
            .map(|w| Complex64::new(1e-18 * (-(w / 8e4).powi(2)).exp(), 0.0))
            .collect();
        let table = TabulatedSpectrum::new(omegas, values).unwrap();
        let sig = ForceSignal::Tabulated(table);
        for w in [0.0, 1.7e4, 5.3e4] {
            let plus = force_transform(&sig, w, 1e5).unwrap();
            let minus = force_transform(&sig, -w, 1e5).unwrap();
            assert!((minus + plus.conj()).norm() <= 1e-12 * plus.norm().max(1e-300));
        }
    }

    #[test]
    fn tabulated_rejects_non_hermitian_tables() {
        let omegas = vec![-1.0, 0.0, 1.0];
        let values = vec![
            Complex64::new(1.0, 0.5),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        ];
        assert!(TabulatedSpectrum::new(omegas, values).is_err());
    }

    #[test]
    fn tabulated_out_of_range_is_reported() {
        let omegas = vec![-1e4, 0.0, 1e4];
        let values = vec![Complex64::new(0.0, 0.0); 3];
        let sig = ForceSignal::Tabulated(TabulatedSpectrum::new(omegas, values).unwrap());
        assert!(matches!(
            force_transform(&sig, 0.0, 1e5),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn bare_matched_sensitivity_reference() {
        // c0 = 0.04, xi_m = 0.96, zero temperature: n_add(0) = 0 and
        // sqrt(S_N) = sqrt(m hbar omega_m gamma_m / 2) = 5.756e-20 N/rtHz.
        let (scale, _) = rb_scale();
        let m = dimensionless(0.04, 0.0, 0.96, 0.0);
        let env = ThermalEnvironment::zero();
        let s = sensitivity(&m, &scale, &env, 0.0).unwrap();
        assert_relative_eq!(s, 5.755897039532621e-20, max_relative = 1e-12);
        assert!((s - 5.76e-20).abs() / 5.76e-20 < 0.01);
    }

    #[test]
    fn hybrid_sensitivity_reference() {
        let (scale, _) = rb_scale();
        let m = dimensionless(0.04, 0.5, 0.98, 1.42);
        let env = ThermalEnvironment::zero();
        let s = sensitivity(&m, &scale, &env, 0.0).unwrap();
        assert!((s - 5.82e-20).abs() / 5.82e-20 < 0.02, "s = {s}");
    }

    #[test]
    fn zero_noise_floor() {
        let (scale, gamma_m) = rb_scale();
        let m = dimensionless(0.04, 0.0, 0.96, 0.0);
        let env = ThermalEnvironment::zero();
        let s_n = noise_force_spectrum(&m, &scale, &env, 0.0).unwrap();
        assert_relative_eq!(
            s_n,
            scale.transduction_constant(gamma_m) / 2.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn force_referred_spectrum_equals_output_over_gain() {
        // S_N = const * S_out / R_m pointwise: gain cancels out.
        use crate::spectra::{mechanical_response, output_spectrum};
        let (scale, _) = rb_scale();
        let m = dimensionless(0.04, 0.5, 0.98, 1.42);
        let env = ThermalEnvironment::from_occupations(0.0, 1e3, 0.0).unwrap();
        for x in [0.0, 0.03, 0.4, 1.5] {
            let w = x * m.gamma_m;
            let tf = transfer_functions(&m, w).unwrap();
            let direct = noise_force_spectrum(&m, &scale, &env, w).unwrap();
            let via_output = scale.transduction_constant(m.gamma_m) * output_spectrum(&tf, &env)
                / mechanical_response(&tf);
            assert_relative_eq!(direct, via_output, max_relative = 1e-12);
        }
    }

    #[test]
    fn sensitivity_grows_with_thermal_occupation() {
        let (scale, _) = rb_scale();
        let m = dimensionless(0.04, 0.5, 0.98, 1.42);
        let mut last = 0.0;
        for n_m in [0.0, 1.0, 10.0, 1e3] {
            let env = ThermalEnvironment::from_occupations(0.0, n_m, 0.0).unwrap();
            let s = sensitivity(&m, &scale, &env, 0.0).unwrap();
            assert!(s > last);
            last = s;
        }
    }

    #[test]
    fn snr_definitions() {
        let (scale, _) = rb_scale();
        let m = dimensionless(0.04, 0.0, 0.96, 0.0);
        let env = ThermalEnvironment::zero();
        let s = sensitivity(&m, &scale, &env, 0.0).unwrap();

        // F~ = 0 -> r = 0.
        let silent = ForceSignal::tone(0.0, scale.omega_m).unwrap();
        assert_eq!(snr(&silent, &m, &scale, &env, 0.0).unwrap(), 0.0);

        // Resonant tone with |F~(0)| = amplitude/2 = sensitivity -> r = 1.
        let marginal = ForceSignal::tone(2.0 * s, scale.omega_m).unwrap();
        assert_relative_eq!(
            snr(&marginal, &m, &scale, &env, 0.0).unwrap(),
            1.0,
            max_relative = 1e-12
        );

        // Three sigma detection threshold -> r = 3.
        let confident = ForceSignal::tone(6.0 * s, scale.omega_m).unwrap();
        assert_relative_eq!(
            snr(&confident, &m, &scale, &env, 0.0).unwrap(),
            3.0,
            max_relative = 1e-12
        );

        // The r = 3 threshold amplitude sits at the 1.8e-19 N/rtHz scale.
        assert!((3.0 * s - 18e-20).abs() / 18e-20 < 0.05);
    }

    #[test]
    fn snr_linear_in_signal() {
        let (scale, _) = rb_scale();
        let m = dimensionless(0.04, 0.5, 0.98, 1.42);
        let env = ThermalEnvironment::zero();
        let r1 = snr(
            &ForceSignal::tone(1e-19, scale.omega_m).unwrap(),
            &m,
            &scale,
            &env,
            0.0,
        )
        .unwrap();
        let r5 = snr(
            &ForceSignal::tone(5e-19, scale.omega_m).unwrap(),
            &m,
            &scale,
            &env,
            0.0,
        )
        .unwrap();
        assert_relative_eq!(r5, 5.0 * r1, max_relative = 1e-12);
    }
}
