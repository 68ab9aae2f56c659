//! Physical parameters and the derived operating point.
//!
//! Unit convention: every frequency, rate and detuning is angular (rad/s).
//! Conversions from ordinary frequency happen at the configuration layer,
//! never here.

use crate::error::{Error, Result};
use crate::{BOLTZMANN, HBAR};

/// Raw parameters of cavity, mirror, condensate and drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Cavity damping rate, rad/s.
    pub kappa: f64,
    /// Mechanical frequency, rad/s.
    pub omega_m: f64,
    /// Mechanical damping rate, rad/s.
    pub gamma_m: f64,
    /// Mirror mass, kg.
    pub mass: f64,
    /// Cavity length, m.
    pub cavity_length: f64,
    /// Bare cavity frequency, rad/s.
    pub omega_c: f64,
    /// Number of condensate atoms.
    pub n_atoms: f64,
    /// Atomic mass, kg.
    pub atom_mass: f64,
    /// Atom-field coupling, rad/s.
    pub g_a: f64,
    /// Atomic transition frequency, rad/s.
    pub omega_a: f64,
    /// Recoil frequency, rad/s.
    pub omega_r: f64,
    /// Bogoliubov mode damping rate, rad/s.
    pub gamma_d: f64,
    /// Beam waist of the cavity mode, m.
    pub beam_waist: f64,
    /// Pump rate of the driving laser E_L, rad/s.
    pub pump_rate: f64,
    /// Drive laser frequency, rad/s.
    pub omega_l: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kappa", self.kappa),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("mass", self.mass),
            ("cavity_length", self.cavity_length),
            ("omega_c", self.omega_c),
            ("atom_mass", self.atom_mass),
            ("g_a", self.g_a),
            ("omega_a", self.omega_a),
            ("omega_r", self.omega_r),
            ("gamma_d", self.gamma_d),
            ("beam_waist", self.beam_waist),
            ("omega_l", self.omega_l),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        if !self.n_atoms.is_finite() || self.n_atoms < 1.0 {
            return Err(Error::invalid("n_atoms", "must be >= 1"));
        }
        if !self.pump_rate.is_finite() || self.pump_rate < 0.0 {
            return Err(Error::invalid("pump_rate", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Parametric modulation amplitudes of the mirror spring constant and the
/// atomic collision frequency. Phases are fixed so both amplitudes are real.
///
/// The dimensionless forms are `xi = 2*lambda/gamma` of the respective mode;
/// both representations are kept consistent at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSettings {
    /// Mechanical modulation amplitude, rad/s.
    pub lambda_m: f64,
    /// Atomic modulation amplitude, rad/s.
    pub lambda_d: f64,
    /// 2*lambda_m/gamma_m.
    pub xi_m: f64,
    /// 2*lambda_d/gamma_d.
    pub xi_d: f64,
}

impl ModulationSettings {
    pub fn from_xi(xi_m: f64, xi_d: f64, gamma_m: f64, gamma_d: f64) -> Self {
        ModulationSettings {
            lambda_m: xi_m * gamma_m / 2.0,
            lambda_d: xi_d * gamma_d / 2.0,
            xi_m,
            xi_d,
        }
    }

    pub fn from_lambda(lambda_m: f64, lambda_d: f64, gamma_m: f64, gamma_d: f64) -> Self {
        ModulationSettings {
            lambda_m,
            lambda_d,
            xi_m: 2.0 * lambda_m / gamma_m,
            xi_d: 2.0 * lambda_d / gamma_d,
        }
    }

    /// Both modulations switched off.
    pub fn off() -> Self {
        ModulationSettings {
            lambda_m: 0.0,
            lambda_d: 0.0,
            xi_m: 0.0,
            xi_d: 0.0,
        }
    }
}

/// Mean thermal occupations of the cavity, mechanical and Bogoliubov baths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalEnvironment {
    pub n_c: f64,
    pub n_m: f64,
    pub n_d: f64,
}

impl ThermalEnvironment {
    pub fn zero() -> Self {
        ThermalEnvironment {
            n_c: 0.0,
            n_m: 0.0,
            n_d: 0.0,
        }
    }

    pub fn from_occupations(n_c: f64, n_m: f64, n_d: f64) -> Result<Self> {
        for (name, v) in [("n_c", n_c), ("n_m", n_m), ("n_d", n_d)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(
                    name,
                    format!("occupation must be finite and >= 0, got {v}"),
                ));
            }
        }
        Ok(ThermalEnvironment { n_c, n_m, n_d })
    }

    /// Occupations of all three baths at a common temperature.
    pub fn from_temperature(
        temperature: f64,
        omega_c: f64,
        omega_m: f64,
        omega_d: f64,
    ) -> Result<Self> {
        Ok(ThermalEnvironment {
            n_c: thermal_occupation(omega_c, temperature)?,
            n_m: thermal_occupation(omega_m, temperature)?,
            n_d: thermal_occupation(omega_d, temperature)?,
        })
    }
}

/// Bose occupation `1/(exp(hbar*omega/kB*T) - 1)`; zero at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::invalid("omega", format!("must be > 0, got {omega}")));
    }
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(Error::invalid(
            "temperature",
            format!("must be >= 0, got {temperature}"),
        ));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (BOLTZMANN * temperature);
    // exp_m1 keeps precision in the high-temperature regime x << 1.
    Ok(x.exp_m1().recip())
}

/// Which root of the steady-state photon-number equation `derive` reports.
///
/// The mean field obeys `abar^2 * (kappa^2/4 + (Delta0 - s*abar^2)^2) = E_L^2`
/// with `s = 2*(g0^2/omega_m + G0^2/omega_d)`, a cubic in `abar^2` that is
/// bistable for a strongly Stark-shifted cavity. The two branches of
/// interest:
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetuningBranch {
    /// Smallest non-negative root: the branch continuously connected to the
    /// undriven cavity (`E_L -> 0`). The mean-field back-shift of the
    /// detuning is perturbative here.
    #[default]
    LowField,
    /// Root whose effective detuning is closest to the Bogoliubov frequency,
    /// i.e. the red-detuned operating point the design chain targets.
    RedDetuned,
}

/// Operating point computed from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Zero-point position fluctuation, m.
    pub x_zp: f64,
    /// Single-photon optomechanical coupling, rad/s.
    pub g0: f64,
    /// Single-photon coupling of the Bogoliubov mode, rad/s.
    pub g0_bog: f64,
    /// Lattice depth per photon, rad/s.
    pub u0: f64,
    /// Atom-laser detuning `omega_a - omega_l`, rad/s.
    pub delta_a: f64,
    /// s-wave collision frequency, rad/s.
    pub omega_sw: f64,
    /// Bogoliubov frequency `4*omega_r + omega_sw`, rad/s.
    pub omega_d: f64,
    /// Stark-shifted cavity detuning, rad/s.
    pub delta0: f64,
    /// Effective detuning after the mean-field back-shift, rad/s.
    pub delta0_eff: f64,
    /// Steady optical amplitude (dimensionless, >= 0).
    pub a_bar: f64,
    /// Steady mechanical mean field.
    pub b_bar: f64,
    /// Steady atomic mean field.
    pub d_bar: f64,
    /// Field-enhanced optomechanical coupling `g0*a_bar`, rad/s.
    pub g: f64,
    /// Field-enhanced opto-atomic coupling `G0*a_bar`, rad/s.
    pub g_bog: f64,
    /// Optomechanical cooperativity `4g^2/(kappa*gamma_m)`.
    pub c0: f64,
    /// Opto-atomic cooperativity `4G^2/(kappa*gamma_d)`.
    pub c1: f64,
    /// Root selection used for `a_bar`.
    pub branch: DetuningBranch,
}

/// Derives the operating point on the default [`DetuningBranch::LowField`]
/// branch.
pub fn derive(params: &SystemParams) -> Result<DerivedParams> {
    derive_on_branch(params, DetuningBranch::LowField)
}

/// Full derivation chain: zero-point motion, couplings, detunings,
/// self-consistent mean fields and cooperativities.
///
/// The Bogoliubov frequency is tuned to the mechanical resonance
/// (`omega_sw = omega_m - 4*omega_r`), the regime every other module
/// assumes.
pub fn derive_on_branch(params: &SystemParams, branch: DetuningBranch) -> Result<DerivedParams> {
    params.validate()?;

    let x_zp = (HBAR / (2.0 * params.mass * params.omega_m)).sqrt();
    let g0 = x_zp * params.omega_c / params.cavity_length;

    let delta_a = params.omega_a - params.omega_l;
    if delta_a == 0.0 {
        return Err(Error::singular(
            "atom-laser detuning delta_a = 0 (lattice depth diverges)",
            None,
        ));
    }
    let u0 = -params.g_a * params.g_a / delta_a;
    let g0_bog = (2.0 * params.n_atoms).sqrt() * u0 / 4.0;

    let omega_sw = params.omega_m - 4.0 * params.omega_r;
    if omega_sw <= 0.0 {
        return Err(Error::invalid(
            "omega_r",
            format!(
                "omega_m = {:e} must exceed 4*omega_r = {:e} for a positive collision frequency",
                params.omega_m,
                4.0 * params.omega_r
            ),
        ));
    }
    let omega_d = 4.0 * params.omega_r + omega_sw;

    let delta0 = (params.omega_c - params.omega_l) + params.n_atoms * u0 / 2.0;

    // Mean-field self-consistency for n = abar^2:
    //   n * (kappa^2/4 + (delta0 - s*n)^2) = E_L^2,
    // with the back-shift slope s from b_bar and d_bar.
    let shift = 2.0 * (g0 * g0 / params.omega_m + g0_bog * g0_bog / omega_d);
    let n_bar = steady_photon_number(
        params.pump_rate,
        params.kappa,
        delta0,
        shift,
        omega_d,
        branch,
    )?;

    let a_bar = n_bar.sqrt();
    let delta0_eff = delta0 - shift * n_bar;
    let b_bar = g0 * n_bar / params.omega_m;
    let d_bar = -g0_bog * n_bar / omega_d;
    let g = g0 * a_bar;
    let g_bog = g0_bog * a_bar;

    Ok(DerivedParams {
        x_zp,
        g0,
        g0_bog,
        u0,
        delta_a,
        omega_sw,
        omega_d,
        delta0,
        delta0_eff,
        a_bar,
        b_bar,
        d_bar,
        g,
        g_bog,
        c0: 4.0 * g * g / (params.kappa * params.gamma_m),
        c1: 4.0 * g_bog * g_bog / (params.kappa * params.gamma_d),
        branch,
    })
}

/// Solves `n*(kappa^2/4 + (delta0 - s*n)^2) = e_l^2` for `n >= 0` and picks
/// the root named by `branch`. `target` is the effective detuning the
/// red-detuned branch aims for (the Bogoliubov frequency).
fn steady_photon_number(
    e_l: f64,
    kappa: f64,
    delta0: f64,
    s: f64,
    target: f64,
    branch: DetuningBranch,
) -> Result<f64> {
    let k2 = kappa * kappa / 4.0;
    let e2 = e_l * e_l;
    if e_l == 0.0 {
        return Ok(0.0);
    }
    if s == 0.0 {
        return Ok(e2 / (k2 + delta0 * delta0));
    }

    // Real roots of the cubic s^2 n^3 - 2 s delta0 n^2 + (k2 + delta0^2) n - e2,
    // seeded by the companion-matrix spectrum and polished in the factored
    // residual form, which stays well conditioned across the branches.
    let p2 = -2.0 * delta0 / s;
    let p1 = (k2 + delta0 * delta0) / (s * s);
    let p0 = -e2 / (s * s);
    let companion = nalgebra::Matrix3::new(
        -p2, -p1, -p0, //
        1.0, 0.0, 0.0, //
        0.0, 1.0, 0.0,
    );
    let schur = companion
        .try_schur(f64::EPSILON, 1000)
        .ok_or_else(|| Error::Numeric("companion eigenvalue solve failed".into()))?;
    let eigen = schur.complex_eigenvalues();

    let residual = |n: f64| {
        let det = delta0 - s * n;
        n * (k2 + det * det) - e2
    };
    let residual_prime = |n: f64| {
        let det = delta0 - s * n;
        k2 + det * det - 2.0 * s * n * det
    };

    let mut roots: Vec<f64> = Vec::new();
    for ev in eigen.iter() {
        if ev.im.abs() > 1e-8 * (ev.re.abs() + 1.0) {
            continue;
        }
        let mut n = ev.re.max(0.0);
        for _ in 0..60 {
            let f = residual(n);
            let fp = residual_prime(n);
            if fp == 0.0 {
                break;
            }
            let step = f / fp;
            n -= step;
            if step.abs() <= 1e-15 * n.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        if n.is_finite() && n >= 0.0 && residual(n).abs() <= 1e-6 * e2.max(1.0) {
            roots.push(n);
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(f64::MIN_POSITIVE));

    if roots.is_empty() {
        return Err(Error::NonConvergence {
            iterations: 60,
            residual: residual(e2 / (k2 + delta0 * delta0)).abs(),
        });
    }

    Ok(match branch {
        DetuningBranch::LowField => roots[0],
        DetuningBranch::RedDetuned => *roots
            .iter()
            .min_by(|a, b| {
                let da = (delta0 - s * **a - target).abs();
                let db = (delta0 - s * **b - target).abs();
                da.total_cmp(&db)
            })
            .unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    /// Rb cavity of the design examples; omega_l/pump_rate left at the
    /// matched drive values the design chain produces.
    pub(crate) fn rb_params() -> SystemParams {
        SystemParams {
            kappa: TAU * 1.3e6,
            omega_m: 1e5,
            gamma_m: TAU * 100.0,
            mass: 1e-12,
            cavity_length: 178e-6,
            omega_c: 2.4150426385e15,
            n_atoms: 1e5,
            atom_mass: 1.44316060e-25,
            g_a: TAU * 14.1e6,
            omega_a: 2.41419e15,
            omega_r: 23.7e3,
            gamma_d: TAU * 100.0,
            beam_waist: 25e-6,
            pump_rate: 1.8964745121e8,
            omega_l: 2.4149866546e15,
        }
    }

    #[test]
    fn occupation_zero_temperature() {
        assert_eq!(thermal_occupation(1e5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn occupation_is_one_at_ln2() {
        // hbar*omega/kB*T = ln 2  =>  exp = 2  =>  occupation 1
        let t = HBAR * 1e5 / (BOLTZMANN * std::f64::consts::LN_2);
        assert_relative_eq!(
            thermal_occupation(1e5, t).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn occupation_matches_high_temperature_expansion() {
        // x = 1e-3: occupation = 1/x - 1/2 + x/12 + O(x^3)
        let x = 1e-3;
        let t = HBAR * 1e5 / (BOLTZMANN * x);
        let n = thermal_occupation(1e5, t).unwrap();
        let leading = 1.0 / x - 0.5;
        assert!((n - leading).abs() < 1.01 * x / 12.0, "n = {n}");
        assert_relative_eq!(n, 999.5000833333, max_relative = 1e-10);
    }

    #[test]
    fn occupation_rejects_bad_inputs() {
        assert!(thermal_occupation(0.0, 1.0).is_err());
        assert!(thermal_occupation(-1.0, 1.0).is_err());
        assert!(thermal_occupation(1e5, -1.0).is_err());
    }

    #[test]
    fn occupation_monotone_in_temperature_and_frequency() {
        let mut last = 0.0;
        for t in [1e-6, 1e-5, 1e-4, 1e-3, 1e-2] {
            let n = thermal_occupation(1e5, t).unwrap();
            assert!(n > last);
            last = n;
        }
        let mut last = f64::INFINITY;
        for w in [1e4, 1e5, 1e6, 1e7] {
            let n = thermal_occupation(w, 1e-4).unwrap();
            assert!(n < last);
            last = n;
        }
    }

    #[test]
    fn no_drive_means_no_coupling() {
        let mut p = rb_params();
        p.pump_rate = 0.0;
        let d = derive(&p).unwrap();
        assert_eq!(d.a_bar, 0.0);
        assert_eq!(d.g, 0.0);
        assert_eq!(d.g_bog, 0.0);
        assert_eq!(d.c0, 0.0);
        assert_eq!(d.c1, 0.0);
    }

    #[test]
    fn cooperativity_identity() {
        let p = rb_params();
        for branch in [DetuningBranch::LowField, DetuningBranch::RedDetuned] {
            let d = derive_on_branch(&p, branch).unwrap();
            let c0 = 4.0 * d.g * d.g / (p.kappa * p.gamma_m);
            let c1 = 4.0 * d.g_bog * d.g_bog / (p.kappa * p.gamma_d);
            assert_relative_eq!(c0, d.c0, max_relative = 1e-12);
            assert_relative_eq!(c1, d.c1, max_relative = 1e-12);
            assert_relative_eq!(d.g, d.g0 * d.a_bar, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_point_motion_definition() {
        let p = rb_params();
        let d = derive(&p).unwrap();
        assert_relative_eq!(
            d.x_zp,
            (HBAR / (2.0 * p.mass * p.omega_m)).sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn red_detuned_branch_reproduces_design_photon_number() {
        // Drive the cavity with the matched values for the (0.04, 0.5)
        // cooperativity design; the red-detuned root sits at n_cav ~ 2155
        // with the effective detuning equal to the mechanical frequency.
        use crate::design::{design_experiment, CooperativityTargets};
        let base = rb_params();
        let recipe = design_experiment(CooperativityTargets { c0: 0.04, c1: 0.5 }, &base).unwrap();
        let p = recipe.apply(&base);
        let d = derive_on_branch(&p, DetuningBranch::RedDetuned).unwrap();
        let n_cav = d.a_bar * d.a_bar;
        assert_relative_eq!(n_cav, 2155.0, max_relative = 1e-2);
        assert_relative_eq!(n_cav, recipe.n_cav, max_relative = 1e-9);
        assert_relative_eq!(d.delta0_eff, p.omega_m, max_relative = 1e-6);
        assert_relative_eq!(d.omega_d, p.omega_m, max_relative = 1e-12);
        // The same parameters on the low-field branch sit at a microscopic
        // photon number: the two roots differ by eight orders of magnitude.
        let low = derive(&p).unwrap();
        assert!(low.a_bar * low.a_bar < 1e-3);
    }

    #[test]
    fn low_field_branch_scaling_with_drive() {
        // Doubling E_L doubles a_bar and quadruples both cooperativities on
        // the low-field branch, where the back-shift is perturbative.
        let p = rb_params();
        let d1 = derive(&p).unwrap();
        let mut p2 = p;
        p2.pump_rate *= 2.0;
        let d2 = derive(&p2).unwrap();
        assert_relative_eq!(d2.a_bar, 2.0 * d1.a_bar, max_relative = 1e-2);
        assert_relative_eq!(d2.c0, 4.0 * d1.c0, max_relative = 1e-2);
        assert_relative_eq!(d2.c1, 4.0 * d1.c1, max_relative = 1e-2);
    }

    #[test]
    fn branches_agree_when_the_root_is_unique() {
        // A weak drive leaves a single steady state; branch selection is
        // then immaterial.
        let mut p = rb_params();
        p.pump_rate = 1e3;
        let low = derive(&p).unwrap();
        let red = derive_on_branch(&p, DetuningBranch::RedDetuned).unwrap();
        assert_relative_eq!(low.a_bar, red.a_bar, max_relative = 1e-12);
        assert_relative_eq!(low.c0, red.c0, max_relative = 1e-12);
    }

    #[test]
    fn derive_is_deterministic() {
        let p = rb_params();
        let a = derive_on_branch(&p, DetuningBranch::RedDetuned).unwrap();
        let b = derive_on_branch(&p, DetuningBranch::RedDetuned).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn derive_rejects_zero_detuning() {
        let mut p = rb_params();
        p.omega_l = p.omega_a;
        assert!(matches!(derive(&p), Err(Error::Singular { .. })));
    }

    #[test]
    fn derive_rejects_recoil_above_mechanical_frequency() {
        let mut p = rb_params();
        p.omega_r = p.omega_m; // 4*omega_r > omega_m
        assert!(derive(&p).is_err());
    }

    #[test]
    fn modulation_representations_stay_consistent() {
        let gamma_m = TAU * 100.0;
        let gamma_d = TAU * 10.0;
        let m = ModulationSettings::from_xi(0.98, 1.42, gamma_m, gamma_d);
        assert_relative_eq!(2.0 * m.lambda_m / gamma_m, m.xi_m, max_relative = 1e-15);
        assert_relative_eq!(2.0 * m.lambda_d / gamma_d, m.xi_d, max_relative = 1e-15);
        let m2 = ModulationSettings::from_lambda(m.lambda_m, m.lambda_d, gamma_m, gamma_d);
        assert_relative_eq!(m2.xi_m, 0.98, max_relative = 1e-14);
        assert_relative_eq!(m2.xi_d, 1.42, max_relative = 1e-14);
    }

    #[test]
    fn thermal_environment_checks_sign() {
        assert!(ThermalEnvironment::from_occupations(0.0, -1.0, 0.0).is_err());
        let env = ThermalEnvironment::from_temperature(1e-6, 2.4e15, 1e5, 1e5).unwrap();
        assert_eq!(env.n_c, 0.0); // optical mode is empty at microkelvin
        assert!(env.n_m > 0.0);
        assert_relative_eq!(env.n_m, env.n_d, max_relative = 1e-12);
    }
}
