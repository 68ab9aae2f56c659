//! Output phase-quadrature spectrum, mechanical response and added noise.
//!
//! The decomposition `S_out = R_m * [(n_m + 1/2) + n_add]` holds identically
//! at every frequency: `R_m = |B|^2` is the power gain seen by the
//! signal-carrying mechanical input quadrature, and `n_add` re-expresses the
//! optical and atomic vacuum contributions as extra thermal quanta at the
//! mechanical input. The standard quantum limit in these units is
//! `n_add = 1/2`.

use crate::dynamics::{build_drift_matrix, stability_eigen, MARGINAL_BAND};
use crate::error::{Error, Result};
use crate::model::LinearModel;
use crate::params::ThermalEnvironment;
use crate::response::{transfer_functions, TransferFunctions};

/// Added-noise value defining the standard quantum limit.
pub const SQL: f64 = 0.5;

/// Total output spectral density
/// `(n_c+1/2)|A|^2 + (n_m+1/2)|B|^2 + (n_d+1/2)|D|^2`.
pub fn output_spectrum(tf: &TransferFunctions, env: &ThermalEnvironment) -> f64 {
    (env.n_c + 0.5) * tf.a_coef.norm_sqr()
        + (env.n_m + 0.5) * tf.b_coef.norm_sqr()
        + (env.n_d + 0.5) * tf.d_coef.norm_sqr()
}

/// Mechanical response `R_m = |B|^2 = kappa*gamma_m*|chi23|^2`.
pub fn mechanical_response(tf: &TransferFunctions) -> f64 {
    tf.b_coef.norm_sqr()
}

/// Added measurement noise
/// `n_add = (n_c+1/2)|A|^2/|B|^2 + (n_d+1/2)|D|^2/|B|^2`.
pub fn added_noise(tf: &TransferFunctions, env: &ThermalEnvironment) -> Result<f64> {
    let b2 = tf.b_coef.norm_sqr();
    if b2 == 0.0 {
        return Err(Error::TransductionDead { omega: tf.omega });
    }
    Ok((env.n_c + 0.5) * tf.a_coef.norm_sqr() / b2 + (env.n_d + 0.5) * tf.d_coef.norm_sqr() / b2)
}

/// On-resonance closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnResonance {
    /// Signed amplitude gain `sqrt(G_a)`; negative past the matching point.
    pub gain_amplitude: f64,
    /// Optical power gain `G_a`.
    pub optical_gain: f64,
    pub r_m0: f64,
    pub n_add0: f64,
}

/// Evaluates the `omega = 0` closed forms:
///
/// ```text
/// sqrt(G_a) = [C0 - (1-xi_m) + C1 (1-xi_m)/(1-xi_d)]
///           / [C0 + (1-xi_m) + C1 (1-xi_m)/(1-xi_d)]
/// R_m(0)    = C0 (sqrt(G_a) - 1)^2 / (1-xi_m)^2
/// n_add(0)  = (1-xi_m)^2/C0 [ G_a/(sqrt(G_a)-1)^2 (n_c+1/2)
///                             + C1/(1-xi_d)^2 (n_d+1/2) ]
/// ```
pub fn on_resonance_formulas(
    c0: f64,
    c1: f64,
    xi_m: f64,
    xi_d: f64,
    env: &ThermalEnvironment,
) -> Result<OnResonance> {
    if c0 <= 0.0 {
        return Err(Error::invalid("c0", "on-resonance forms need C0 > 0"));
    }
    let um = 1.0 - xi_m;
    if um == 0.0 {
        return Err(Error::singular(
            "xi_m = 1 (mechanical response diverges)",
            Some(0.0),
        ));
    }
    let atomic = if c1 == 0.0 {
        0.0
    } else {
        let ud = 1.0 - xi_d;
        if ud == 0.0 {
            return Err(Error::singular("xi_d = 1 with C1 > 0", Some(0.0)));
        }
        c1 * um / ud
    };
    let num = c0 - um + atomic;
    let den = c0 + um + atomic;
    if den == 0.0 {
        return Err(Error::singular(
            "gain amplitude denominator vanishes",
            Some(0.0),
        ));
    }
    let gain_amplitude = num / den;
    let optical_gain = gain_amplitude * gain_amplitude;
    let roll = gain_amplitude - 1.0;
    let r_m0 = c0 * roll * roll / (um * um);
    let mut n_add0 = 0.0;
    if roll != 0.0 {
        n_add0 += optical_gain / (roll * roll) * (env.n_c + 0.5);
    }
    if c1 != 0.0 {
        let ud = 1.0 - xi_d;
        n_add0 += c1 / (ud * ud) * (env.n_d + 0.5);
    }
    n_add0 *= um * um / c0;
    Ok(OnResonance {
        gain_amplitude,
        optical_gain,
        r_m0,
        n_add0,
    })
}

/// `omega = 0` values with both modulations off:
/// `R_m = 4 C0/(1+C0+C1)^2`,
/// `n_add = (1/C0)[(C0+C1-1)^2/4 (n_c+1/2) + C1 (n_d+1/2)]`.
pub fn off_modulation_formulas(c0: f64, c1: f64, env: &ThermalEnvironment) -> Result<(f64, f64)> {
    if c0 <= 0.0 {
        return Err(Error::invalid("c0", "off-modulation forms need C0 > 0"));
    }
    let sum = 1.0 + c0 + c1;
    let r_m0 = 4.0 * c0 / (sum * sum);
    let miss = c0 + c1 - 1.0;
    let n_add0 = (miss * miss / 4.0 * (env.n_c + 0.5) + c1 * (env.n_d + 0.5)) / c0;
    Ok((n_add0, r_m0))
}

/// One frequency sample of the output spectrum and its decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub s_out: f64,
    pub r_m: f64,
    /// `None` when the transduction channel is dead (`|B| = 0`).
    pub n_add: Option<f64>,
    /// Signed `sqrt(G_a)`, populated only at `omega = 0`.
    pub gain_amplitude: Option<f64>,
}

/// Sweep entry: either a sample or an annotated singularity.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepPoint {
    Ok(SpectrumPoint),
    Singular { omega: f64, message: String },
}

impl SweepPoint {
    pub fn omega(&self) -> f64 {
        match self {
            SweepPoint::Ok(p) => p.omega,
            SweepPoint::Singular { omega, .. } => *omega,
        }
    }

    pub fn point(&self) -> Option<&SpectrumPoint> {
        match self {
            SweepPoint::Ok(p) => Some(p),
            SweepPoint::Singular { .. } => None,
        }
    }
}

/// Result of a frequency sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Eigenvalue verdict for the swept model.
    pub stable: bool,
    pub marginal: bool,
    pub max_real_eigenvalue: f64,
    /// Measure of `{omega : R_m(omega) > 1}` on the grid, rad/s.
    pub amplification_bandwidth: f64,
    /// Measure of `{omega : n_add(omega) < 1/2}` on the grid, rad/s.
    pub sub_sql_bandwidth: f64,
    pub singular_count: usize,
}

/// Uniform grid of `points` frequencies over `[omega_min, omega_max]`.
pub fn uniform_grid(omega_min: f64, omega_max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "grid needs at least two points");
    let step = (omega_max - omega_min) / (points - 1) as f64;
    (0..points).map(|i| omega_min + step * i as f64).collect()
}

/// Evaluates the spectrum decomposition over `grid`. Singular frequencies
/// are annotated per point and the sweep continues; instability does not
/// stop the sweep (the report carries the verdict).
pub fn sweep(model: &LinearModel, env: &ThermalEnvironment, grid: &[f64]) -> Result<SweepResult> {
    let eig = stability_eigen(&build_drift_matrix(model))?;
    let mut points = Vec::with_capacity(grid.len());
    let mut singular_count = 0;
    for &omega in grid {
        match point(model, env, omega) {
            Ok(p) => points.push(SweepPoint::Ok(p)),
            Err(e) => {
                singular_count += 1;
                points.push(SweepPoint::Singular {
                    omega,
                    message: e.to_string(),
                });
            }
        }
    }

    let rm_samples: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.point().map(|q| (q.omega, q.r_m)))
        .collect();
    let nadd_samples: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.point().and_then(|q| q.n_add.map(|n| (q.omega, n))))
        .collect();

    Ok(SweepResult {
        amplification_bandwidth: measure_above(&rm_samples, 1.0),
        sub_sql_bandwidth: measure_below(&nadd_samples, SQL),
        stable: eig.max_real < 0.0,
        marginal: eig.max_real <= 0.0 && eig.max_real >= -MARGINAL_BAND * model.gamma_m,
        max_real_eigenvalue: eig.max_real,
        singular_count,
        points,
    })
}

/// Single spectrum sample. `gain_amplitude` is attached at exactly
/// `omega = 0` when the on-resonance forms apply.
pub fn point(model: &LinearModel, env: &ThermalEnvironment, omega: f64) -> Result<SpectrumPoint> {
    let tf = transfer_functions(model, omega)?;
    let s_out = output_spectrum(&tf, env);
    let r_m = mechanical_response(&tf);
    let n_add = match added_noise(&tf, env) {
        Ok(n) => Some(n),
        Err(Error::TransductionDead { .. }) => None,
        Err(e) => return Err(e),
    };
    let gain_amplitude = if omega == 0.0 {
        on_resonance_formulas(model.c0(), model.c1(), model.xi_m(), model.xi_d(), env)
            .ok()
            .map(|o| o.gain_amplitude)
    } else {
        None
    };
    Ok(SpectrumPoint {
        omega,
        s_out,
        r_m,
        n_add,
        gain_amplitude,
    })
}

/// Lebesgue measure of `{omega : value > threshold}`, with the crossing
/// positions linearly interpolated between samples.
pub fn measure_above(samples: &[(f64, f64)], threshold: f64) -> f64 {
    measure(samples, |v| v > threshold, threshold)
}

/// Measure of `{omega : value < threshold}`.
pub fn measure_below(samples: &[(f64, f64)], threshold: f64) -> f64 {
    measure(samples, |v| v < threshold, threshold)
}

fn measure(samples: &[(f64, f64)], keep: impl Fn(f64) -> bool, threshold: f64) -> f64 {
    let mut total = 0.0;
    for pair in samples.windows(2) {
        let (w1, v1) = pair[0];
        let (w2, v2) = pair[1];
        let in1 = keep(v1);
        let in2 = keep(v2);
        if in1 && in2 {
            total += w2 - w1;
        } else if in1 != in2 && v2 != v1 {
            let cross = w1 + (threshold - v1) / (v2 - v1) * (w2 - w1);
            total += if in1 { cross - w1 } else { w2 - cross };
        }
    }
    total
}

/// Width of the maximal contiguous interval containing `omega = 0` (the
/// sample nearest zero) on which `value < threshold`; edges interpolated.
pub fn window_below_around_zero(samples: &[(f64, f64)], threshold: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let center = samples
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.0.abs().total_cmp(&b.0.abs()))
        .map(|(i, _)| i)
        .unwrap();
    if samples[center].1.is_nan() || samples[center].1 >= threshold {
        return 0.0;
    }
    let mut hi_idx = center;
    while hi_idx + 1 < samples.len() && samples[hi_idx + 1].1 < threshold {
        hi_idx += 1;
    }
    let mut lo_idx = center;
    while lo_idx > 0 && samples[lo_idx - 1].1 < threshold {
        lo_idx -= 1;
    }
    let hi = if hi_idx + 1 < samples.len() {
        let (w1, v1) = samples[hi_idx];
        let (w2, v2) = samples[hi_idx + 1];
        if v2 != v1 {
            w1 + (threshold - v1) / (v2 - v1) * (w2 - w1)
        } else {
            w1
        }
    } else {
        samples[hi_idx].0
    };
    let lo = if lo_idx > 0 {
        let (w1, v1) = samples[lo_idx - 1];
        let (w2, v2) = samples[lo_idx];
        if v2 != v1 {
            w1 + (threshold - v1) / (v2 - v1) * (w2 - w1)
        } else {
            w2
        }
    } else {
        samples[lo_idx].0
    };
    hi - lo
}
