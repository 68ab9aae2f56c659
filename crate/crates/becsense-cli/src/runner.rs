//! Scenario assembly and subcommand execution.

use anyhow::{anyhow, bail, Context};

use becsense::design::{
    design_experiment, solve_xi_d, verify_operating_point, CooperativityTargets, LabRecipe,
    OperatingPoint, XiDSolution,
};
use becsense::sensing::{sensing_point, ForceScale, ForceSignal};
use becsense::spectra::{
    on_resonance_formulas, point as spectrum_point, sweep, uniform_grid, window_below_around_zero,
    SpectrumPoint, SweepPoint, SweepResult, SQL,
};
use becsense::{
    derive_on_branch, DerivedParams, DetuningBranch, Error as CoreError, LinearModel,
    ModulationSettings, SystemParams, ThermalEnvironment,
};

use crate::config::{
    dump_config, merge_defaults, MatchingMode, ModulationInput, ScenarioConfig, DEFAULT_OMEGA_MAX,
    DEFAULT_OMEGA_MIN, DEFAULT_POINTS,
};
use crate::output::{fmt12, write_csv, write_kv, CsvRow};
use crate::presets::find_preset;

/// Applies the preset (explicit keys win) and, in solve-matching mode,
/// replaces `xi_d` by the exact matching solution. Idempotent.
pub fn expand_config(user: &ScenarioConfig, force_solve: bool) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = match &user.preset {
        Some(name) => {
            let base = find_preset(name)
                .ok_or_else(|| anyhow!("unknown preset `{name}`; see `presets list`"))?;
            merge_defaults(user, &base)
        }
        None => user.clone(),
    };
    if force_solve {
        cfg.modulation.mode = Some(MatchingMode::SolveMatching);
    }

    if cfg.modulation.mode == Some(MatchingMode::SolveMatching) {
        let (c0, c1) = (
            cfg.coupling
                .c0
                .ok_or_else(|| anyhow!("solve-matching needs [coupling] c0"))?,
            cfg.coupling.c1.unwrap_or(0.0),
        );
        let Some(ModulationInput::Xi { xi_m, xi_d }) = cfg.modulation.input else {
            bail!("solve-matching needs xi_m/xi_d modulation input");
        };
        match solve_xi_d(c0, c1, xi_m)? {
            XiDSolution::Value(v) => {
                cfg.modulation.input = Some(ModulationInput::Xi { xi_m, xi_d: v });
            }
            XiDSolution::Unconstrained => {
                // Bare system already matched; xi_d stays as given.
                cfg.modulation.input = Some(ModulationInput::Xi { xi_m, xi_d });
            }
        }
    }
    Ok(cfg)
}

/// Everything a spectra/sensing run needs, assembled from an expanded
/// configuration.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub model: LinearModel,
    pub env: ThermalEnvironment,
    pub scale: ForceScale,
    pub force: Option<ForceSignal>,
    /// Grid in units of `gamma_m`.
    pub grid: Vec<f64>,
    pub operating_point: OperatingPoint,
    /// Populated on the full-physics path (no `[coupling]` section).
    pub derived: Option<DerivedParams>,
}

fn require(slot: Option<f64>, name: &str) -> anyhow::Result<f64> {
    slot.ok_or_else(|| anyhow!("missing [system] key `{name}`"))
}

fn full_system(cfg: &ScenarioConfig) -> anyhow::Result<SystemParams> {
    let s = &cfg.system;
    Ok(SystemParams {
        kappa: require(s.kappa, "kappa_*")?,
        omega_m: require(s.omega_m, "omega_m_*")?,
        gamma_m: require(s.gamma_m, "gamma_m_*")?,
        mass: require(s.mass, "mass")?,
        cavity_length: require(s.cavity_length, "cavity_length")?,
        omega_c: require(s.omega_c, "omega_c_*")?,
        n_atoms: require(s.n_atoms, "n_atoms")?,
        atom_mass: require(s.atom_mass, "atom_mass")?,
        g_a: require(s.g_a, "g_a_*")?,
        omega_a: require(s.omega_a, "omega_a_*")?,
        omega_r: require(s.omega_r, "omega_r_*")?,
        gamma_d: require(s.gamma_d, "gamma_d_*")?,
        beam_waist: require(s.beam_waist, "beam_waist")?,
        pump_rate: require(s.pump_rate, "pump_rate_*")?,
        omega_l: require(s.omega_l, "omega_l_*")?,
    })
}

fn modulation(
    cfg: &ScenarioConfig,
    gamma_m: f64,
    gamma_d: f64,
) -> anyhow::Result<ModulationSettings> {
    match cfg.modulation.input {
        Some(ModulationInput::Xi { xi_m, xi_d }) => {
            Ok(ModulationSettings::from_xi(xi_m, xi_d, gamma_m, gamma_d))
        }
        Some(ModulationInput::Lambda { lambda_m, lambda_d }) => Ok(
            ModulationSettings::from_lambda(lambda_m, lambda_d, gamma_m, gamma_d),
        ),
        None => bail!("missing [modulation] section (xi_* or lambda_* keys)"),
    }
}

fn environment(
    cfg: &ScenarioConfig,
    omega_m: f64,
    omega_c: Option<f64>,
) -> anyhow::Result<ThermalEnvironment> {
    if let Some(t) = cfg.thermal.temperature {
        // The optical bath is empty at any laboratory temperature unless the
        // cavity frequency is known; the Bogoliubov mode sits at omega_m.
        let n_c = match omega_c {
            Some(wc) => becsense::thermal_occupation(wc, t)?,
            None => 0.0,
        };
        let n_m = becsense::thermal_occupation(omega_m, t)?;
        return Ok(ThermalEnvironment::from_occupations(n_c, n_m, n_m)?);
    }
    Ok(ThermalEnvironment::from_occupations(
        cfg.thermal.n_c.unwrap_or(0.0),
        cfg.thermal.n_m.unwrap_or(0.0),
        cfg.thermal.n_d.unwrap_or(0.0),
    )?)
}

pub fn build_scenario(cfg: &ScenarioConfig) -> anyhow::Result<Scenario> {
    let gamma_m = require(cfg.system.gamma_m, "gamma_m_*")?;
    let gamma_d = require(cfg.system.gamma_d, "gamma_d_*")?;
    let kappa = require(cfg.system.kappa, "kappa_*")?;
    let omega_m = require(cfg.system.omega_m, "omega_m_*")?;
    let mass = require(cfg.system.mass, "mass")?;
    let mods = modulation(cfg, gamma_m, gamma_d)?;

    let (model, derived) = match cfg.coupling.c0 {
        Some(c0) => {
            // Dimensionless path: cooperativities fix the couplings.
            let c1 = cfg.coupling.c1.unwrap_or(0.0);
            let mut model =
                LinearModel::from_cooperativities(c0, c1, 0.0, 0.0, kappa, gamma_m, gamma_d)?;
            model.lambda_m = mods.lambda_m;
            model.lambda_d = mods.lambda_d;
            (model, None)
        }
        None => {
            // Full-physics path: derive the couplings from the raw system.
            let params = full_system(cfg)?;
            let branch = cfg.system.branch.unwrap_or(DetuningBranch::RedDetuned);
            let derived = derive_on_branch(&params, branch)?;
            (
                LinearModel::from_derived(&params, &derived, &mods),
                Some(derived),
            )
        }
    };

    let env = environment(cfg, omega_m, cfg.system.omega_c)?;
    let scale = ForceScale { mass, omega_m };
    let force = match cfg.force.amplitude {
        Some(a) if a > 0.0 => Some(ForceSignal::tone(
            a,
            cfg.force.frequency.unwrap_or(omega_m),
        )?),
        _ => None,
    };
    let grid = uniform_grid(
        cfg.sweep.omega_min.unwrap_or(DEFAULT_OMEGA_MIN),
        cfg.sweep.omega_max.unwrap_or(DEFAULT_OMEGA_MAX),
        cfg.sweep.points.unwrap_or(DEFAULT_POINTS),
    );
    let operating_point = verify_operating_point(&model)?;

    Ok(Scenario {
        config: cfg.clone(),
        model,
        env,
        scale,
        force,
        grid,
        operating_point,
        derived,
    })
}

/// A finished sweep: the CSV body, its metadata sidecar and any warnings
/// for the diagnostic stream.
pub struct SweepOutput {
    pub csv: String,
    pub meta: String,
    pub warnings: Vec<String>,
    pub result: SweepResult,
}

pub fn run_sweep(scenario: &Scenario, source: &str, timestamp: u64) -> anyhow::Result<SweepOutput> {
    let gamma_m = scenario.model.gamma_m;
    let grid_rads: Vec<f64> = scenario.grid.iter().map(|x| x * gamma_m).collect();
    let result = sweep(&scenario.model, &scenario.env, &grid_rads)?;

    let mut rows = Vec::with_capacity(result.points.len());
    for (x, entry) in scenario.grid.iter().zip(result.points.iter()) {
        let row = match entry {
            SweepPoint::Ok(p) => csv_row(scenario, *x, p),
            SweepPoint::Singular { .. } => CsvRow {
                omega_over_gamma_m: *x,
                r_m: f64::NAN,
                n_add: f64::NAN,
                s_out: f64::NAN,
                sensitivity: f64::NAN,
                snr: f64::NAN,
            },
        };
        rows.push(row);
    }

    let mut warnings = Vec::new();
    if !result.stable {
        warnings.push(format!(
            "operating point is linearly unstable (max Re eigenvalue = {} rad/s); \
             the frequency-domain response is reported anyway",
            fmt12(result.max_real_eigenvalue)
        ));
    }
    if result.marginal {
        warnings.push("operating point is marginally stable".to_string());
    }
    if !scenario.operating_point.sum_constraint_satisfied {
        warnings.push("C0 + C1 > 1: outside the matched-amplifier regime".to_string());
    }
    if result.singular_count > 0 {
        warnings.push(format!(
            "{} grid point(s) hit a response pole; rows carry nan",
            result.singular_count
        ));
    }

    let meta = sweep_meta(scenario, &result, source, timestamp);
    Ok(SweepOutput {
        csv: write_csv(&rows),
        meta,
        warnings,
        result,
    })
}

fn csv_row(scenario: &Scenario, x: f64, p: &SpectrumPoint) -> CsvRow {
    let sens = sensing_point(
        scenario.force.as_ref(),
        &scenario.model,
        &scenario.scale,
        &scenario.env,
        p.omega,
    );
    match sens {
        Ok(s) => CsvRow {
            omega_over_gamma_m: x,
            r_m: p.r_m,
            n_add: p.n_add.unwrap_or(f64::NAN),
            s_out: p.s_out,
            sensitivity: s.sensitivity,
            snr: s.snr,
        },
        Err(_) => CsvRow {
            omega_over_gamma_m: x,
            r_m: p.r_m,
            n_add: p.n_add.unwrap_or(f64::NAN),
            s_out: p.s_out,
            sensitivity: f64::NAN,
            snr: f64::NAN,
        },
    }
}

fn flatten_config(cfg: &ScenarioConfig, out: &mut Vec<(String, String)>) {
    for line in dump_config(cfg).lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(section) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            out.push(("config.section".to_string(), section.to_string()));
        } else if let Some((k, v)) = line.split_once('=') {
            out.push((format!("config.{}", k.trim()), v.trim().to_string()));
        }
    }
}

fn sweep_meta(scenario: &Scenario, result: &SweepResult, source: &str, timestamp: u64) -> String {
    let gamma_m = scenario.model.gamma_m;
    let nadd_samples: Vec<(f64, f64)> = result
        .points
        .iter()
        .filter_map(|p| p.point().and_then(|q| q.n_add.map(|n| (q.omega, n))))
        .collect();
    let window = window_below_around_zero(&nadd_samples, SQL) / gamma_m;

    let op = &scenario.operating_point;
    let mut pairs: Vec<(String, String)> = vec![
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("generated_unix_s".into(), timestamp.to_string()),
        ("source_config".into(), source.to_string()),
        ("stable".into(), result.stable.to_string()),
        ("marginal".into(), result.marginal.to_string()),
        (
            "max_real_eigenvalue_rads".into(),
            fmt12(result.max_real_eigenvalue),
        ),
        ("c0".into(), fmt12(op.c0)),
        ("c1".into(), fmt12(op.c1)),
        ("xi_m".into(), fmt12(op.xi_m)),
        ("xi_d".into(), fmt12(op.xi_d)),
        (
            "matching_residual".into(),
            op.matching_residual
                .map(fmt12)
                .unwrap_or_else(|| "undefined".into()),
        ),
        (
            "sum_constraint_satisfied".into(),
            op.sum_constraint_satisfied.to_string(),
        ),
        (
            "amplification_bandwidth_gamma_m".into(),
            fmt12(result.amplification_bandwidth / gamma_m),
        ),
        (
            "sub_sql_bandwidth_gamma_m".into(),
            fmt12(result.sub_sql_bandwidth / gamma_m),
        ),
        ("sub_sql_window_gamma_m".into(), fmt12(window)),
        ("singular_points".into(), result.singular_count.to_string()),
    ];
    if let Some(d) = &scenario.derived {
        pairs.push(("derived.n_cav".into(), fmt12(d.a_bar * d.a_bar)));
        pairs.push(("derived.c0".into(), fmt12(d.c0)));
        pairs.push(("derived.c1".into(), fmt12(d.c1)));
        pairs.push(("derived.delta0_eff_rads".into(), fmt12(d.delta0_eff)));
    }
    flatten_config(&scenario.config, &mut pairs);
    write_kv(&pairs)
}

/// Runs the laboratory design chain on a configuration carrying both the
/// full `[system]` and `[coupling]` targets.
pub fn run_design(cfg: &ScenarioConfig) -> anyhow::Result<(LabRecipe, String)> {
    let c0 = cfg
        .coupling
        .c0
        .ok_or_else(|| anyhow!("design needs [coupling] c0 (target cooperativity)"))?;
    let c1 = cfg.coupling.c1.unwrap_or(0.0);

    let mut sys = cfg.system.clone();
    if c1 > 0.0 {
        // The hybrid chain determines the drive itself.
        if sys.omega_l.is_none() {
            sys.omega_l = sys.omega_a;
        }
        if sys.pump_rate.is_none() {
            sys.pump_rate = Some(0.0);
        }
    } else if sys.omega_l.is_none() {
        bail!(
            "bare-system design (c1 = 0) requires an explicit atom detuning: \
             set omega_l_* in [system] or include a condensate (c1 > 0)"
        );
    } else if sys.pump_rate.is_none() {
        sys.pump_rate = Some(0.0);
    }
    let shadow = ScenarioConfig {
        system: sys,
        ..cfg.clone()
    };
    let params = full_system(&shadow).context("design needs the full [system] section")?;
    // The placeholder drive must still pass validation.
    let params = SystemParams {
        omega_l: if c1 > 0.0 {
            params.omega_a
        } else {
            params.omega_l
        },
        ..params
    };
    let recipe = design_experiment(CooperativityTargets { c0, c1 }, &params)?;

    let text = recipe_text(&recipe);
    Ok((recipe, text))
}

fn recipe_text(r: &LabRecipe) -> String {
    let tau = std::f64::consts::TAU;
    let pairs: Vec<(String, String)> = vec![
        ("c0_target".into(), fmt12(r.targets.c0)),
        ("c1_target".into(), fmt12(r.targets.c1)),
        ("omega_sw_rads".into(), fmt12(r.omega_sw)),
        ("omega_d_rads".into(), fmt12(r.omega_d)),
        ("delta_a_rads".into(), fmt12(r.delta_a)),
        ("delta_a_hz".into(), fmt12(r.delta_a / tau)),
        ("omega_l_rads".into(), fmt12(r.omega_l)),
        ("n_cav".into(), fmt12(r.n_cav)),
        ("pump_rate_rads".into(), fmt12(r.pump_rate)),
        ("x_zp_m".into(), fmt12(r.x_zp)),
        ("g0_rads".into(), fmt12(r.g0)),
        ("g0_bog_rads".into(), fmt12(r.g0_bog)),
        ("u0_rads".into(), fmt12(r.u0)),
        ("delta0_rads".into(), fmt12(r.delta0)),
    ];
    write_kv(&pairs)
}

/// Single-frequency report as key=value text.
pub fn run_point(scenario: &Scenario, omega: f64) -> anyhow::Result<String> {
    let p = spectrum_point(&scenario.model, &scenario.env, omega)?;
    let op = &scenario.operating_point;
    let mut pairs: Vec<(String, String)> = vec![
        ("omega_rads".into(), fmt12(omega)),
        (
            "omega_over_gamma_m".into(),
            fmt12(omega / scenario.model.gamma_m),
        ),
        ("stable".into(), op.stable.to_string()),
        ("marginal".into(), op.marginal.to_string()),
        (
            "matching_residual".into(),
            op.matching_residual
                .map(fmt12)
                .unwrap_or_else(|| "undefined".into()),
        ),
        ("R_m".into(), fmt12(p.r_m)),
        (
            "n_add".into(),
            p.n_add.map(fmt12).unwrap_or_else(|| "undefined".into()),
        ),
        ("S_out".into(), fmt12(p.s_out)),
    ];
    match sensing_point(
        scenario.force.as_ref(),
        &scenario.model,
        &scenario.scale,
        &scenario.env,
        omega,
    ) {
        Ok(s) => {
            pairs.push(("sensitivity_N_per_sqrtHz".into(), fmt12(s.sensitivity)));
            pairs.push(("snr".into(), fmt12(s.snr)));
        }
        Err(_) => {
            pairs.push(("sensitivity_N_per_sqrtHz".into(), "undefined".into()));
            pairs.push(("snr".into(), "undefined".into()));
        }
    }
    if omega == 0.0 {
        if let Ok(on) = on_resonance_formulas(
            scenario.model.c0(),
            scenario.model.c1(),
            scenario.model.xi_m(),
            scenario.model.xi_d(),
            &scenario.env,
        ) {
            pairs.push(("gain_amplitude".into(), fmt12(on.gain_amplitude)));
            pairs.push(("optical_gain".into(), fmt12(on.optical_gain)));
            pairs.push(("R_m_on_resonance".into(), fmt12(on.r_m0)));
            pairs.push(("n_add_on_resonance".into(), fmt12(on.n_add0)));
        }
        if let Some(n) = p.n_add {
            pairs.push(("sub_SQL".into(), (n < SQL).to_string()));
        }
    }
    Ok(write_kv(&pairs))
}

/// Stability report as key=value text.
pub fn run_stability(scenario: &Scenario) -> anyhow::Result<String> {
    let report = becsense::dynamics::stability_report(&scenario.model)?;
    let op = &scenario.operating_point;
    let opt = |v: Option<f64>| v.map(fmt12).unwrap_or_else(|| "undefined".into());
    let pairs: Vec<(String, String)> = vec![
        ("stable".into(), report.stable.to_string()),
        ("marginal".into(), report.marginal.to_string()),
        (
            "max_real_eigenvalue_rads".into(),
            fmt12(report.max_real_eigenvalue),
        ),
        ("c0".into(), fmt12(op.c0)),
        ("c1".into(), fmt12(op.c1)),
        ("xi_m".into(), fmt12(op.xi_m)),
        ("xi_d".into(), fmt12(op.xi_d)),
        ("lambda_m_rads".into(), fmt12(scenario.model.lambda_m)),
        ("lambda_d_rads".into(), fmt12(scenario.model.lambda_d)),
        ("collective_c_m".into(), opt(report.collective_c_m)),
        ("collective_c_d".into(), opt(report.collective_c_d)),
        ("lambda_m_max_rads".into(), opt(report.lambda_m_max)),
        ("lambda_d_max_rads".into(), opt(report.lambda_d_max)),
        (
            "lambda_m_threshold_rads".into(),
            opt(report.lambda_m_threshold),
        ),
        (
            "lambda_d_threshold_rads".into(),
            opt(report.lambda_d_threshold),
        ),
        (
            "matching_residual".into(),
            op.matching_residual
                .map(fmt12)
                .unwrap_or_else(|| "undefined".into()),
        ),
        (
            "sum_constraint_satisfied".into(),
            op.sum_constraint_satisfied.to_string(),
        ),
    ];
    Ok(write_kv(&pairs))
}

/// Maps failures onto the documented exit codes: 2 config, 3 infeasible or
/// singular, 4 numeric.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<crate::config::ConfigError>().is_some() {
        return 2;
    }
    if let Some(core) = err.downcast_ref::<CoreError>() {
        return match core {
            CoreError::InvalidParameter { .. } => 2,
            CoreError::Singular { .. }
            | CoreError::TransductionDead { .. }
            | CoreError::Infeasible(_)
            | CoreError::OutOfRange { .. } => 3,
            CoreError::NonConvergence { .. } | CoreError::Numeric(_) => 4,
        };
    }
    2
}

/// Parses `--omega` values: `<number><unit>` with unit `rads`, `hz`, or
/// `gm` (multiples of gamma_m).
pub fn parse_omega(text: &str, gamma_m: f64) -> anyhow::Result<f64> {
    let t = text.trim();
    for (suffix, scale) in [
        ("rads", 1.0),
        ("hz", std::f64::consts::TAU),
        ("gamma_m", gamma_m),
        ("gm", gamma_m),
    ] {
        if let Some(num) = t.strip_suffix(suffix) {
            let v: f64 = num
                .trim()
                .parse()
                .map_err(|_| anyhow!("bad --omega value `{text}`"))?;
            return Ok(v * scale);
        }
    }
    bail!("--omega needs a unit suffix: `rads`, `hz`, or `gm` (e.g. `0.1gm`)")
}
