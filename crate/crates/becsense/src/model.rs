//! Compact description of the linearized three-mode system.

use crate::error::{Error, Result};
use crate::params::{DerivedParams, ModulationSettings, SystemParams};

/// Rates, field-enhanced couplings and modulation amplitudes that fully
/// determine the linearized dynamics. All entries in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    pub kappa: f64,
    pub gamma_m: f64,
    pub gamma_d: f64,
    /// Optomechanical coupling `g = g0*a_bar`.
    pub g: f64,
    /// Opto-atomic coupling `G = G0*a_bar`.
    pub g_bog: f64,
    pub lambda_m: f64,
    pub lambda_d: f64,
}

impl LinearModel {
    /// Builds the model from a dimensionless operating point
    /// `(C0, C1, xi_m, xi_d)` and the three damping rates.
    pub fn from_cooperativities(
        c0: f64,
        c1: f64,
        xi_m: f64,
        xi_d: f64,
        kappa: f64,
        gamma_m: f64,
        gamma_d: f64,
    ) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("gamma_m", gamma_m), ("gamma_d", gamma_d)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        for (name, v) in [("c0", c0), ("c1", c1)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(LinearModel {
            kappa,
            gamma_m,
            gamma_d,
            g: (c0 * kappa * gamma_m).sqrt() / 2.0,
            g_bog: (c1 * kappa * gamma_d).sqrt() / 2.0,
            lambda_m: xi_m * gamma_m / 2.0,
            lambda_d: xi_d * gamma_d / 2.0,
        })
    }

    pub fn from_derived(
        params: &SystemParams,
        derived: &DerivedParams,
        mods: &ModulationSettings,
    ) -> Self {
        LinearModel {
            kappa: params.kappa,
            gamma_m: params.gamma_m,
            gamma_d: params.gamma_d,
            g: derived.g,
            g_bog: derived.g_bog,
            lambda_m: mods.lambda_m,
            lambda_d: mods.lambda_d,
        }
    }

    pub fn c0(&self) -> f64 {
        4.0 * self.g * self.g / (self.kappa * self.gamma_m)
    }

    pub fn c1(&self) -> f64 {
        4.0 * self.g_bog * self.g_bog / (self.kappa * self.gamma_d)
    }

    pub fn xi_m(&self) -> f64 {
        2.0 * self.lambda_m / self.gamma_m
    }

    pub fn xi_d(&self) -> f64 {
        2.0 * self.lambda_d / self.gamma_d
    }

    pub fn modulation(&self) -> ModulationSettings {
        ModulationSettings::from_lambda(self.lambda_m, self.lambda_d, self.gamma_m, self.gamma_d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cooperativities_round_trip() {
        let m = LinearModel::from_cooperativities(0.04, 0.5, 0.98, 1.42, 1e5, 1.0, 1.0).unwrap();
        assert_relative_eq!(m.c0(), 0.04, max_relative = 1e-14);
        assert_relative_eq!(m.c1(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(m.xi_m(), 0.98, max_relative = 1e-14);
        assert_relative_eq!(m.xi_d(), 1.42, max_relative = 1e-14);
    }

    #[test]
    fn rejects_negative_cooperativity() {
        assert!(LinearModel::from_cooperativities(-0.1, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(LinearModel::from_cooperativities(0.1, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0).is_err());
    }
}
