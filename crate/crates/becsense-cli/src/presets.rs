//! Built-in operating points.
//!
//! `fig2-curve1..7` and `fig3-curve1..5` are dimensionless spectra
//! scenarios on a common scale set (`gamma_m = 2*pi*100 rad/s`,
//! `kappa = 1e5*gamma_m`, `omega_m = 1e5 rad/s`, 1 ng mirror, 1000 thermal
//! phonons). `rb-lab` is the full rubidium cavity used by the `design`
//! subcommand; its cavity frequency is tuned so the red-detuned chain lands
//! on an intracavity photon number of 2155 at the (0.04, 0.5) cooperativity
//! targets.

use crate::config::{
    CouplingSection, MatchingMode, ModulationInput, ModulationSection, ScenarioConfig,
    SweepSection, SystemSection, ThermalSection,
};

const TAU: f64 = std::f64::consts::TAU;
const GAMMA_M: f64 = TAU * 100.0;

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: ScenarioConfig,
}

fn dimensionless(
    c0: f64,
    c1: f64,
    xi_m: f64,
    xi_d: f64,
    gamma_d_over_gamma_m: f64,
) -> ScenarioConfig {
    ScenarioConfig {
        preset: None,
        system: SystemSection {
            kappa: Some(1e5 * GAMMA_M),
            omega_m: Some(1e5),
            gamma_m: Some(GAMMA_M),
            gamma_d: Some(gamma_d_over_gamma_m * GAMMA_M),
            mass: Some(1e-12),
            ..SystemSection::default()
        },
        coupling: CouplingSection {
            c0: Some(c0),
            c1: Some(c1),
        },
        modulation: ModulationSection {
            mode: Some(MatchingMode::AsGiven),
            input: Some(ModulationInput::Xi { xi_m, xi_d }),
        },
        thermal: ThermalSection {
            temperature: None,
            n_c: Some(0.0),
            n_m: Some(1e3),
            n_d: Some(0.0),
        },
        sweep: SweepSection::default(),
        force: Default::default(),
    }
}

fn rb_lab() -> ScenarioConfig {
    ScenarioConfig {
        preset: None,
        system: SystemSection {
            kappa: Some(TAU * 1.3e6),
            omega_m: Some(1e5),
            gamma_m: Some(TAU * 100.0),
            gamma_d: Some(TAU * 100.0),
            mass: Some(1e-12),
            cavity_length: Some(178e-6),
            omega_c: Some(2.4150426385e15),
            n_atoms: Some(1e5),
            atom_mass: Some(1.44316060e-25),
            g_a: Some(TAU * 14.1e6),
            omega_a: Some(2.41419e15),
            omega_r: Some(23.7e3),
            beam_waist: Some(25e-6),
            pump_rate: None,
            omega_l: None,
            branch: None,
        },
        coupling: CouplingSection {
            c0: Some(0.04),
            c1: Some(0.5),
        },
        modulation: ModulationSection {
            mode: Some(MatchingMode::AsGiven),
            input: Some(ModulationInput::Xi {
                xi_m: 0.98,
                xi_d: 1.42,
            }),
        },
        thermal: ThermalSection {
            temperature: None,
            n_c: Some(0.0),
            n_m: Some(0.0),
            n_d: Some(0.0),
        },
        sweep: SweepSection::default(),
        force: Default::default(),
    }
}

pub fn presets() -> Vec<Preset> {
    vec![
        Preset {
            name: "fig2-curve1",
            summary: "bare mirror, matched: C0=0.04, xi_m=0.96",
            config: dimensionless(0.04, 0.0, 0.96, 0.0, 1.0),
        },
        Preset {
            name: "fig2-curve2",
            summary: "hybrid, matched pair as quoted, narrow atomic linewidth: \
                      C0=0.04, C1=0.5, xi=(0.98, 1.42), gamma_m/gamma_d=1e2",
            config: dimensionless(0.04, 0.5, 0.98, 1.42, 1e-2),
        },
        Preset {
            name: "fig2-curve3",
            summary: "hybrid, matched pair as quoted: C0=0.04, C1=0.5, xi=(0.98, 1.42)",
            config: dimensionless(0.04, 0.5, 0.98, 1.42, 1.0),
        },
        Preset {
            name: "fig2-curve4",
            summary: "hybrid, matched pair as quoted, wide atomic linewidth: \
                      C0=0.04, C1=0.5, xi=(0.98, 1.42), gamma_m/gamma_d=1e-2",
            config: dimensionless(0.04, 0.5, 0.98, 1.42, 1e2),
        },
        Preset {
            name: "fig2-curve5",
            summary: "hybrid, mechanical modulation only: C0=0.04, C1=0.5, xi=(0.92, 0)",
            config: dimensionless(0.04, 0.5, 0.92, 0.0, 1.0),
        },
        Preset {
            name: "fig2-curve6",
            summary: "off-modulations transducer: C0=C1=0.5, xi=(0, 0)",
            config: dimensionless(0.5, 0.5, 0.0, 0.0, 1.0),
        },
        Preset {
            name: "fig2-curve7",
            summary: "unmatched point: C0=0.04, C1=0.5, xi=(0.9, 0.2)",
            config: dimensionless(0.04, 0.5, 0.9, 0.2, 1.0),
        },
        Preset {
            name: "fig3-curve1",
            summary: "bare mirror, weak coupling: C0=0.04, xi_m=0.96",
            config: dimensionless(0.04, 0.0, 0.96, 0.0, 1.0),
        },
        Preset {
            name: "fig3-curve2",
            summary: "bare mirror, strong coupling: C0=0.4, xi_m=0.6",
            config: dimensionless(0.4, 0.0, 0.6, 0.0, 1.0),
        },
        Preset {
            name: "fig3-curve3",
            summary: "hybrid, large cooperativity ratio: C0=0.04, C1=0.5, xi=(0.98, 1.42)",
            config: dimensionless(0.04, 0.5, 0.98, 1.42, 1.0),
        },
        Preset {
            name: "fig3-curve4",
            summary: "hybrid, moderate ratio: C0=0.4, C1=0.5, xi=(0.84, 1.32)",
            config: dimensionless(0.4, 0.5, 0.84, 1.32, 1.0),
        },
        Preset {
            name: "fig3-curve5",
            summary: "hybrid, small atomic cooperativity: C0=0.04, C1=0.05, xi=(0.30, 0.94)",
            config: dimensionless(0.04, 0.05, 0.30, 0.94, 1.0),
        },
        Preset {
            name: "rb-lab",
            summary: "rubidium cavity parameter set for the design chain, \
                      targets (C0, C1) = (0.04, 0.5), zero temperature",
            config: rb_lab(),
        },
    ]
}

pub fn find_preset(name: &str) -> Option<ScenarioConfig> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .map(|p| p.config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let all = presets();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                assert_ne!(a.name, b.name);
            }
        }
    }

    #[test]
    fn dimensionless_presets_are_complete() {
        for p in presets() {
            if p.name == "rb-lab" {
                continue;
            }
            let sys = &p.config.system;
            assert!(sys.kappa.is_some() && sys.gamma_m.is_some() && sys.gamma_d.is_some());
            assert!(sys.omega_m.is_some() && sys.mass.is_some());
            assert!(p.config.coupling.c0.is_some());
            assert!(p.config.modulation.input.is_some());
        }
    }
}
