//! Impedance matching and the laboratory parameter chain.
//!
//! Zero on-resonance optical gain requires
//!
//! ```text
//! C0 + (xi_m - 1) [1 - C1/(1 - xi_d)] = 0 ,   C0 + C1 <= 1 ,
//! ```
//!
//! which this module solves for either modulation amplitude, audits as a
//! residual, and converts into laboratory parameters (detunings, drive
//! frequency and pump rate) for a chosen pair of cooperativities.

use crate::dynamics::{build_drift_matrix, stability_eigen, MARGINAL_BAND};
use crate::error::{Error, Result};
use crate::model::LinearModel;
use crate::params::{derive_on_branch, DerivedParams, DetuningBranch, SystemParams};
use crate::HBAR;

/// Left-hand side of the matching condition; zero at an exactly matched
/// point. Defined for `xi_d != 1`.
pub fn matching_residual(c0: f64, c1: f64, xi_m: f64, xi_d: f64) -> Result<f64> {
    if c1 != 0.0 && xi_d == 1.0 {
        return Err(Error::singular(
            "matching residual undefined at xi_d = 1",
            None,
        ));
    }
    let bracket = if c1 == 0.0 {
        1.0
    } else {
        1.0 - c1 / (1.0 - xi_d)
    };
    Ok(c0 + (xi_m - 1.0) * bracket)
}

/// Result of solving the matching condition for `xi_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiDSolution {
    Value(f64),
    /// With `C1 = 0` the condition does not involve `xi_d`; it either holds
    /// for every value or for none.
    Unconstrained,
}

/// Solves `C0 + (xi_m - 1)[1 - C1/(1 - xi_d)] = 0` for the atomic
/// modulation: `xi_d = 1 - C1 (1 - xi_m) / ((1 - xi_m) - C0)`.
pub fn solve_xi_d(c0: f64, c1: f64, xi_m: f64) -> Result<XiDSolution> {
    if c1 == 0.0 {
        let residual = c0 + (xi_m - 1.0);
        if residual.abs() <= 1e-12 {
            return Ok(XiDSolution::Unconstrained);
        }
        return Err(Error::Infeasible(format!(
            "with C1 = 0 the matching condition fixes xi_m = 1 - C0; \
             residual {residual:e} cannot be removed by xi_d"
        )));
    }
    let den = (1.0 - xi_m) - c0;
    if den.abs() <= 1e-12 * (1.0 - xi_m).abs().max(c0) {
        return Err(Error::singular(
            format!("degenerate matching: 1 - xi_m = C0 = {c0} (xi_d solution at infinity)"),
            None,
        ));
    }
    Ok(XiDSolution::Value(1.0 - c1 * (1.0 - xi_m) / den))
}

/// Solves the matching condition for the mechanical modulation:
/// `xi_m = 1 - C0 / [1 - C1/(1 - xi_d)]`.
pub fn solve_xi_m(c0: f64, c1: f64, xi_d: f64) -> Result<f64> {
    let bracket = if c1 == 0.0 {
        1.0
    } else {
        if xi_d == 1.0 {
            return Err(Error::singular("xi_d = 1 with C1 > 0", None));
        }
        1.0 - c1 / (1.0 - xi_d)
    };
    if bracket == 0.0 {
        return Err(Error::singular(
            format!("matching bracket 1 - C1/(1 - xi_d) vanishes at xi_d = {xi_d}"),
            None,
        ));
    }
    Ok(1.0 - c0 / bracket)
}

/// Dimensionless audit of an operating point: matching residual, the
/// `C0 + C1 <= 1` side condition (reported, not enforced) and the
/// eigenvalue stability verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub c0: f64,
    pub c1: f64,
    pub xi_m: f64,
    pub xi_d: f64,
    /// `None` when the residual itself is singular (`xi_d = 1`).
    pub matching_residual: Option<f64>,
    pub sum_constraint_satisfied: bool,
    pub stable: bool,
    pub marginal: bool,
    pub max_real_eigenvalue: f64,
}

pub fn verify_operating_point(model: &LinearModel) -> Result<OperatingPoint> {
    let (c0, c1) = (model.c0(), model.c1());
    let (xi_m, xi_d) = (model.xi_m(), model.xi_d());
    let eig = stability_eigen(&build_drift_matrix(model))?;
    Ok(OperatingPoint {
        c0,
        c1,
        xi_m,
        xi_d,
        matching_residual: matching_residual(c0, c1, xi_m, xi_d).ok(),
        sum_constraint_satisfied: c0 + c1 <= 1.0,
        stable: eig.max_real < 0.0,
        marginal: eig.max_real <= 0.0 && eig.max_real >= -MARGINAL_BAND * model.gamma_m,
        max_real_eigenvalue: eig.max_real,
    })
}

/// Relative tolerance for the red-detuned consistency checks.
pub const RED_DETUNED_TOLERANCE: f64 = 1e-6;

/// Consistency of a derived operating point with the red-detuned regime
/// `delta0_eff = omega_d = omega_m`. Residuals are reported, never enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedDetunedAudit {
    /// `|omega_d - omega_m| / omega_m`.
    pub omega_d_residual: f64,
    /// `|delta0_eff - omega_d| / omega_d`.
    pub detuning_residual: f64,
    pub within_tolerance: bool,
}

pub fn audit_red_detuned(params: &SystemParams, derived: &DerivedParams) -> RedDetunedAudit {
    let omega_d_residual = (derived.omega_d - params.omega_m).abs() / params.omega_m;
    let detuning_residual = (derived.delta0_eff - derived.omega_d).abs() / derived.omega_d;
    RedDetunedAudit {
        omega_d_residual,
        detuning_residual,
        within_tolerance: omega_d_residual <= RED_DETUNED_TOLERANCE
            && detuning_residual <= RED_DETUNED_TOLERANCE,
    }
}

/// Target cooperativities for [`design_experiment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooperativityTargets {
    pub c0: f64,
    pub c1: f64,
}

/// Laboratory recipe realizing a red-detuned operating point, with every
/// intermediate retained for audit. All frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabRecipe {
    pub targets: CooperativityTargets,
    /// s-wave collision frequency `omega_m - 4*omega_r` (zero in the bare
    /// chain, where no condensate is present).
    pub omega_sw: f64,
    pub omega_d: f64,
    /// Atom-laser detuning; in the bare chain this echoes the supplied
    /// drive frequency.
    pub delta_a: f64,
    pub omega_l: f64,
    /// Intracavity photon number.
    pub n_cav: f64,
    /// Pump rate E_L.
    pub pump_rate: f64,
    // audit trail
    pub x_zp: f64,
    pub g0: f64,
    pub g0_bog: f64,
    pub u0: f64,
    pub delta0: f64,
}

impl LabRecipe {
    /// Copies the recipe's drive settings onto a parameter set, closing the
    /// loop back into [`crate::params::derive_on_branch`].
    pub fn apply(&self, base: &SystemParams) -> SystemParams {
        SystemParams {
            omega_l: self.omega_l,
            pump_rate: self.pump_rate,
            ..*base
        }
    }
}

/// Converts target cooperativities into laboratory parameters:
///
/// 1. `omega_sw = omega_m - 4*omega_r` tunes the Bogoliubov mode onto the
///    mechanical resonance;
/// 2. `delta_a = -(g_a^2/g0) sqrt(N gamma_m C0 / (8 gamma_d C1))` fixes the
///    cooperativity ratio;
/// 3. `omega_l = omega_a - delta_a`;
/// 4. `n_cav = (omega_m*Delta0 - omega_m^2) / (2(g0^2 + G0^2))` enforces the
///    effective detuning `= omega_m` after the mean-field shift;
/// 5. `E_L = sqrt(n_cav (kappa^2/4 + omega_m^2))`.
///
/// With `C1 = 0` (no condensate) steps 2-3 are skipped and the supplied
/// `omega_l` is kept.
pub fn design_experiment(targets: CooperativityTargets, base: &SystemParams) -> Result<LabRecipe> {
    base.validate()?;
    if !targets.c0.is_finite() || targets.c0 <= 0.0 {
        return Err(Error::invalid("c0", "target cooperativity must be > 0"));
    }
    if targets.c1 < 0.0 {
        return Err(Error::invalid("c1", "target cooperativity must be >= 0"));
    }

    let x_zp = (HBAR / (2.0 * base.mass * base.omega_m)).sqrt();
    let g0 = x_zp * base.omega_c / base.cavity_length;

    let bare = targets.c1 == 0.0;
    let (omega_sw, omega_d, delta_a, omega_l, u0, g0_bog) = if bare {
        let delta_a = base.omega_a - base.omega_l;
        (0.0, base.omega_m, delta_a, base.omega_l, 0.0, 0.0)
    } else {
        let omega_sw = base.omega_m - 4.0 * base.omega_r;
        if omega_sw <= 0.0 {
            return Err(Error::invalid(
                "omega_r",
                format!(
                    "omega_m = {:e} must exceed 4*omega_r = {:e}",
                    base.omega_m,
                    4.0 * base.omega_r
                ),
            ));
        }
        let delta_a = -(base.g_a * base.g_a / g0)
            * (base.n_atoms * base.gamma_m * targets.c0 / (8.0 * base.gamma_d * targets.c1)).sqrt();
        let omega_l = base.omega_a - delta_a;
        let u0 = -base.g_a * base.g_a / delta_a;
        let g0_bog = (2.0 * base.n_atoms).sqrt() * u0 / 4.0;
        (omega_sw, base.omega_m, delta_a, omega_l, u0, g0_bog)
    };

    let stark = if bare {
        0.0
    } else {
        -base.n_atoms * base.g_a * base.g_a / (2.0 * delta_a)
    };
    let delta0 = base.omega_c - omega_l + stark;

    let n_cav =
        (base.omega_m * delta0 - base.omega_m * base.omega_m) / (2.0 * (g0 * g0 + g0_bog * g0_bog));
    if !n_cav.is_finite() || n_cav <= 0.0 {
        return Err(Error::Infeasible(format!(
            "red-detuned condition needs Delta0 > omega_m; got Delta0 = {delta0:e}, \
             n_cav = {n_cav:e}"
        )));
    }
    let pump_rate = (n_cav * (base.kappa * base.kappa / 4.0 + base.omega_m * base.omega_m)).sqrt();

    Ok(LabRecipe {
        targets,
        omega_sw,
        omega_d,
        delta_a,
        omega_l,
        n_cav,
        pump_rate,
        x_zp,
        g0,
        g0_bog,
        u0,
        delta0,
    })
}

/// Re-derives the operating point from a recipe on the red-detuned branch.
pub fn rederive(recipe: &LabRecipe, base: &SystemParams) -> Result<DerivedParams> {
    derive_on_branch(&recipe.apply(base), DetuningBranch::RedDetuned)
}
