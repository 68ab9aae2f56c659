//! INI-style scenario configuration.
//!
//! Flat `key = value` sections, UTF-8, `#` comments. Frequency-valued keys
//! must carry a unit suffix: `_hz` values are multiplied by 2*pi on load,
//! `_rads` values are taken verbatim; a bare frequency key is an error.
//! Dumps always use `_rads`, so any emitted config parses back unchanged.

use std::fmt;

use becsense::DetuningBranch;

const TAU: f64 = std::f64::consts::TAU;

/// Parse or validation failure with the 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            column,
            message: message.into(),
        }
    }

    /// Error tied to the whole file rather than one token.
    pub fn global(message: impl Into<String>) -> Self {
        ConfigError::new(0, 0, message)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config error: {}", self.message)
        } else {
            write!(f, "{}:{}: {}", self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchingMode {
    #[default]
    AsGiven,
    SolveMatching,
}

/// Modulation amplitudes, one representation per config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulationInput {
    Xi { xi_m: f64, xi_d: f64 },
    Lambda { lambda_m: f64, lambda_d: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemSection {
    pub kappa: Option<f64>,
    pub omega_m: Option<f64>,
    pub gamma_m: Option<f64>,
    pub gamma_d: Option<f64>,
    pub mass: Option<f64>,
    pub cavity_length: Option<f64>,
    pub omega_c: Option<f64>,
    pub n_atoms: Option<f64>,
    pub atom_mass: Option<f64>,
    pub g_a: Option<f64>,
    pub omega_a: Option<f64>,
    pub omega_r: Option<f64>,
    pub beam_waist: Option<f64>,
    pub pump_rate: Option<f64>,
    pub omega_l: Option<f64>,
    pub branch: Option<DetuningBranch>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CouplingSection {
    pub c0: Option<f64>,
    pub c1: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModulationSection {
    pub mode: Option<MatchingMode>,
    pub input: Option<ModulationInput>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThermalSection {
    pub temperature: Option<f64>,
    pub n_c: Option<f64>,
    pub n_m: Option<f64>,
    pub n_d: Option<f64>,
}

/// Sweep window in units of `gamma_m`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepSection {
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub points: Option<usize>,
}

pub const DEFAULT_OMEGA_MIN: f64 = -2.0;
pub const DEFAULT_OMEGA_MAX: f64 = 2.0;
pub const DEFAULT_POINTS: usize = 4001;

/// Monochromatic test tone; frequency defaults to the mechanical resonance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ForceSection {
    pub amplitude: Option<f64>,
    pub frequency: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioConfig {
    pub preset: Option<String>,
    pub system: SystemSection,
    pub coupling: CouplingSection,
    pub modulation: ModulationSection,
    pub thermal: ThermalSection,
    pub sweep: SweepSection,
    pub force: ForceSection,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn parse_f64(value: &str, line: usize, column: usize) -> Result<f64, ConfigError> {
    value.trim().parse::<f64>().map_err(|_| {
        ConfigError::new(
            line,
            column,
            format!("expected a number, got `{}`", value.trim()),
        )
    })
}

/// Resolves a frequency key: `<base>_hz` scales by 2*pi, `<base>_rads` is
/// verbatim. Returns `None` when `key` does not belong to `base`.
fn frequency_value(
    key: &str,
    base: &str,
    raw: f64,
    line: usize,
    column: usize,
) -> Result<Option<f64>, ConfigError> {
    if let Some(rest) = key.strip_prefix(base) {
        match rest {
            "_hz" => return Ok(Some(raw * TAU)),
            "_rads" => return Ok(Some(raw)),
            "" => {
                return Err(ConfigError::new(
                    line,
                    column,
                    format!(
                        "frequency key `{base}` needs a unit suffix: `{base}_hz` or `{base}_rads`"
                    ),
                ))
            }
            _ => {}
        }
    }
    Ok(None)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut section: Option<String> = None;
    let mut seen_keys: Vec<(String, String)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw_line);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let column = raw_line.find(trimmed.chars().next().unwrap()).unwrap_or(0) + 1;

        if let Some(body) = trimmed.strip_prefix('[') {
            let Some(name) = body.strip_suffix(']') else {
                return Err(ConfigError::new(
                    line_no,
                    column,
                    "unterminated section header",
                ));
            };
            let name = name.trim().to_ascii_lowercase();
            match name.as_str() {
                "scenario" | "system" | "coupling" | "modulation" | "thermal" | "sweep"
                | "force" => section = Some(name),
                other => {
                    return Err(ConfigError::new(
                        line_no,
                        column,
                        format!("unknown section `[{other}]`"),
                    ))
                }
            }
            continue;
        }

        let Some((key_raw, value_raw)) = trimmed.split_once('=') else {
            return Err(ConfigError::new(line_no, column, "expected `key = value`"));
        };
        let key = key_raw.trim().to_ascii_lowercase();
        let value = value_raw.trim();
        let key_column = raw_line
            .find(key_raw.trim())
            .map(|c| c + 1)
            .unwrap_or(column);

        let Some(section_name) = section.as_deref() else {
            return Err(ConfigError::new(
                line_no,
                key_column,
                format!("key `{key}` appears before any section header"),
            ));
        };

        if seen_keys
            .iter()
            .any(|(s, k)| s == section_name && *k == key)
        {
            return Err(ConfigError::new(
                line_no,
                key_column,
                format!("duplicate key `{key}` in [{section_name}]"),
            ));
        }
        seen_keys.push((section_name.to_string(), key.clone()));

        apply_key(&mut cfg, section_name, &key, value, line_no, key_column)?;
    }

    validate_groups(&cfg)?;
    Ok(cfg)
}

fn apply_key(
    cfg: &mut ScenarioConfig,
    section: &str,
    key: &str,
    value: &str,
    line: usize,
    column: usize,
) -> Result<(), ConfigError> {
    let num = || parse_f64(value, line, column);
    match section {
        "scenario" => match key {
            "preset" => cfg.preset = Some(value.to_string()),
            other => {
                return Err(ConfigError::new(
                    line,
                    column,
                    format!("unknown key `{other}` in [scenario]"),
                ))
            }
        },
        "system" => {
            let sys = &mut cfg.system;
            let raw = if key == "branch" { 0.0 } else { num()? };
            for (base, slot) in [
                ("kappa", &mut sys.kappa),
                ("omega_m", &mut sys.omega_m),
                ("gamma_m", &mut sys.gamma_m),
                ("gamma_d", &mut sys.gamma_d),
                ("omega_c", &mut sys.omega_c),
                ("g_a", &mut sys.g_a),
                ("omega_a", &mut sys.omega_a),
                ("omega_r", &mut sys.omega_r),
                ("pump_rate", &mut sys.pump_rate),
                ("omega_l", &mut sys.omega_l),
            ] {
                if let Some(v) = frequency_value(key, base, raw, line, column)? {
                    *slot = Some(v);
                    return Ok(());
                }
            }
            match key {
                "mass" => sys.mass = Some(raw),
                "cavity_length" => sys.cavity_length = Some(raw),
                "n_atoms" => sys.n_atoms = Some(raw),
                "atom_mass" => sys.atom_mass = Some(raw),
                "beam_waist" => sys.beam_waist = Some(raw),
                "branch" => {
                    sys.branch =
                        Some(match value {
                            "low-field" => DetuningBranch::LowField,
                            "red-detuned" => DetuningBranch::RedDetuned,
                            other => return Err(ConfigError::new(
                                line,
                                column,
                                format!(
                                    "branch must be `low-field` or `red-detuned`, got `{other}`"
                                ),
                            )),
                        })
                }
                other => {
                    return Err(ConfigError::new(
                        line,
                        column,
                        format!("unknown key `{other}` in [system]"),
                    ))
                }
            }
        }
        "coupling" => match key {
            "c0" => cfg.coupling.c0 = Some(num()?),
            "c1" => cfg.coupling.c1 = Some(num()?),
            other => {
                return Err(ConfigError::new(
                    line,
                    column,
                    format!("unknown key `{other}` in [coupling]"),
                ))
            }
        },
        "modulation" => match key {
            "mode" => {
                cfg.modulation.mode = Some(match value {
                    "as-given" => MatchingMode::AsGiven,
                    "solve-matching" => MatchingMode::SolveMatching,
                    other => {
                        return Err(ConfigError::new(
                            line,
                            column,
                            format!("mode must be `as-given` or `solve-matching`, got `{other}`"),
                        ))
                    }
                })
            }
            "xi_m" | "xi_d" => {
                let v = num()?;
                let (mut xi_m, mut xi_d) = match cfg.modulation.input {
                    Some(ModulationInput::Xi { xi_m, xi_d }) => (xi_m, xi_d),
                    Some(ModulationInput::Lambda { .. }) => {
                        return Err(ConfigError::new(
                            line,
                            column,
                            "cannot mix xi_* and lambda_* keys in [modulation]",
                        ))
                    }
                    None => (0.0, 0.0),
                };
                if key == "xi_m" {
                    xi_m = v;
                } else {
                    xi_d = v;
                }
                cfg.modulation.input = Some(ModulationInput::Xi { xi_m, xi_d });
            }
            _ => {
                let raw = num()?;
                let mut applied = false;
                let mut lambda_m_new = None;
                let mut lambda_d_new = None;
                if let Some(v) = frequency_value(key, "lambda_m", raw, line, column)? {
                    lambda_m_new = Some(v);
                    applied = true;
                }
                if let Some(v) = frequency_value(key, "lambda_d", raw, line, column)? {
                    lambda_d_new = Some(v);
                    applied = true;
                }
                if !applied {
                    return Err(ConfigError::new(
                        line,
                        column,
                        format!("unknown key `{key}` in [modulation]"),
                    ));
                }
                let (mut lambda_m, mut lambda_d) = match cfg.modulation.input {
                    Some(ModulationInput::Lambda { lambda_m, lambda_d }) => (lambda_m, lambda_d),
                    Some(ModulationInput::Xi { .. }) => {
                        return Err(ConfigError::new(
                            line,
                            column,
                            "cannot mix xi_* and lambda_* keys in [modulation]",
                        ))
                    }
                    None => (0.0, 0.0),
                };
                if let Some(v) = lambda_m_new {
                    lambda_m = v;
                }
                if let Some(v) = lambda_d_new {
                    lambda_d = v;
                }
                cfg.modulation.input = Some(ModulationInput::Lambda { lambda_m, lambda_d });
            }
        },
        "thermal" => match key {
            "temperature_k" => cfg.thermal.temperature = Some(num()?),
            "n_c" => cfg.thermal.n_c = Some(num()?),
            "n_m" => cfg.thermal.n_m = Some(num()?),
            "n_d" => cfg.thermal.n_d = Some(num()?),
            "temperature" => {
                return Err(ConfigError::new(
                    line,
                    column,
                    "temperature needs its unit suffix: `temperature_k`",
                ))
            }
            other => {
                return Err(ConfigError::new(
                    line,
                    column,
                    format!("unknown key `{other}` in [thermal]"),
                ))
            }
        },
        "sweep" => match key {
            "omega_min" => cfg.sweep.omega_min = Some(num()?),
            "omega_max" => cfg.sweep.omega_max = Some(num()?),
            "points" => {
                cfg.sweep.points = Some(value.parse::<usize>().map_err(|_| {
                    ConfigError::new(line, column, format!("expected an integer, got `{value}`"))
                })?)
            }
            other => {
                return Err(ConfigError::new(
                    line,
                    column,
                    format!("unknown key `{other}` in [sweep]"),
                ))
            }
        },
        "force" => match key {
            "amplitude_n" => cfg.force.amplitude = Some(num()?),
            _ => {
                let raw = num()?;
                if let Some(v) = frequency_value(key, "frequency", raw, line, column)? {
                    cfg.force.frequency = Some(v);
                } else {
                    return Err(ConfigError::new(
                        line,
                        column,
                        format!("unknown key `{key}` in [force]"),
                    ));
                }
            }
        },
        _ => unreachable!("section names are validated on entry"),
    }
    Ok(())
}

fn validate_groups(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    if cfg.thermal.temperature.is_some()
        && (cfg.thermal.n_c.is_some() || cfg.thermal.n_m.is_some() || cfg.thermal.n_d.is_some())
    {
        return Err(ConfigError::global(
            "[thermal] takes either temperature_k or explicit occupations, not both",
        ));
    }
    if let Some(points) = cfg.sweep.points {
        if points < 2 {
            return Err(ConfigError::global("[sweep] points must be >= 2"));
        }
    }
    Ok(())
}

/// Fills every unset field of `cfg` from `base` (preset defaults). The
/// modulation, thermal and force sections are taken as whole groups: any
/// explicit user entry replaces the preset's entire section.
pub fn merge_defaults(cfg: &ScenarioConfig, base: &ScenarioConfig) -> ScenarioConfig {
    let mut out = cfg.clone();
    macro_rules! fill {
        ($($field:ident).+) => {
            if out.$($field).+.is_none() {
                out.$($field).+ = base.$($field).+.clone();
            }
        };
    }
    fill!(system.kappa);
    fill!(system.omega_m);
    fill!(system.gamma_m);
    fill!(system.gamma_d);
    fill!(system.mass);
    fill!(system.cavity_length);
    fill!(system.omega_c);
    fill!(system.n_atoms);
    fill!(system.atom_mass);
    fill!(system.g_a);
    fill!(system.omega_a);
    fill!(system.omega_r);
    fill!(system.beam_waist);
    fill!(system.pump_rate);
    fill!(system.omega_l);
    fill!(system.branch);
    fill!(coupling.c0);
    fill!(coupling.c1);
    fill!(sweep.omega_min);
    fill!(sweep.omega_max);
    fill!(sweep.points);

    if out.modulation.mode.is_none() {
        out.modulation.mode = base.modulation.mode;
    }
    if out.modulation.input.is_none() {
        out.modulation.input = base.modulation.input;
    }
    let user_thermal_set = cfg.thermal.temperature.is_some()
        || cfg.thermal.n_c.is_some()
        || cfg.thermal.n_m.is_some()
        || cfg.thermal.n_d.is_some();
    if !user_thermal_set {
        out.thermal = base.thermal;
    }
    let user_force_set = cfg.force.amplitude.is_some() || cfg.force.frequency.is_some();
    if !user_force_set {
        out.force = base.force;
    }
    out
}

fn push_kv(out: &mut String, key: &str, value: f64) {
    // Shortest representation that parses back to the same f64, so dumped
    // configs reload without loss.
    out.push_str(&format!("{key} = {value:e}\n"));
}

/// Serializes a configuration; the output parses back to an identical
/// structure (frequencies are emitted with the `_rads` suffix).
pub fn dump_config(cfg: &ScenarioConfig) -> String {
    let mut s = String::new();
    s.push_str("[scenario]\n");
    if let Some(p) = &cfg.preset {
        s.push_str(&format!("preset = {p}\n"));
    }

    s.push_str("\n[system]\n");
    let sys = &cfg.system;
    for (key, v) in [
        ("kappa_rads", sys.kappa),
        ("omega_m_rads", sys.omega_m),
        ("gamma_m_rads", sys.gamma_m),
        ("gamma_d_rads", sys.gamma_d),
        ("mass", sys.mass),
        ("cavity_length", sys.cavity_length),
        ("omega_c_rads", sys.omega_c),
        ("n_atoms", sys.n_atoms),
        ("atom_mass", sys.atom_mass),
        ("g_a_rads", sys.g_a),
        ("omega_a_rads", sys.omega_a),
        ("omega_r_rads", sys.omega_r),
        ("beam_waist", sys.beam_waist),
        ("pump_rate_rads", sys.pump_rate),
        ("omega_l_rads", sys.omega_l),
    ] {
        if let Some(v) = v {
            push_kv(&mut s, key, v);
        }
    }
    if let Some(branch) = sys.branch {
        let name = match branch {
            DetuningBranch::LowField => "low-field",
            DetuningBranch::RedDetuned => "red-detuned",
        };
        s.push_str(&format!("branch = {name}\n"));
    }

    s.push_str("\n[coupling]\n");
    if let Some(c0) = cfg.coupling.c0 {
        push_kv(&mut s, "c0", c0);
    }
    if let Some(c1) = cfg.coupling.c1 {
        push_kv(&mut s, "c1", c1);
    }

    s.push_str("\n[modulation]\n");
    if let Some(mode) = cfg.modulation.mode {
        let name = match mode {
            MatchingMode::AsGiven => "as-given",
            MatchingMode::SolveMatching => "solve-matching",
        };
        s.push_str(&format!("mode = {name}\n"));
    }
    match cfg.modulation.input {
        Some(ModulationInput::Xi { xi_m, xi_d }) => {
            push_kv(&mut s, "xi_m", xi_m);
            push_kv(&mut s, "xi_d", xi_d);
        }
        Some(ModulationInput::Lambda { lambda_m, lambda_d }) => {
            push_kv(&mut s, "lambda_m_rads", lambda_m);
            push_kv(&mut s, "lambda_d_rads", lambda_d);
        }
        None => {}
    }

    s.push_str("\n[thermal]\n");
    if let Some(t) = cfg.thermal.temperature {
        push_kv(&mut s, "temperature_k", t);
    }
    for (key, v) in [
        ("n_c", cfg.thermal.n_c),
        ("n_m", cfg.thermal.n_m),
        ("n_d", cfg.thermal.n_d),
    ] {
        if let Some(v) = v {
            push_kv(&mut s, key, v);
        }
    }

    s.push_str("\n[sweep]\n");
    if let Some(v) = cfg.sweep.omega_min {
        push_kv(&mut s, "omega_min", v);
    }
    if let Some(v) = cfg.sweep.omega_max {
        push_kv(&mut s, "omega_max", v);
    }
    if let Some(p) = cfg.sweep.points {
        s.push_str(&format!("points = {p}\n"));
    }

    let force_set = cfg.force.amplitude.is_some() || cfg.force.frequency.is_some();
    if force_set {
        s.push_str("\n[force]\n");
        if let Some(a) = cfg.force.amplitude {
            push_kv(&mut s, "amplitude_n", a);
        }
        if let Some(f) = cfg.force.frequency {
            push_kv(&mut s, "frequency_rads", f);
        }
    }
    s
}
