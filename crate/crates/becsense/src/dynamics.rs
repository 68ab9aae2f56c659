//! Drift matrix of the quadrature Langevin equations and stability.
//!
//! Quadrature ordering throughout: `(X_a, P_a, X_b, P_b, X_d, P_d)`, i.e.
//! optical, mechanical, Bogoliubov. In the red-detuned rotating frame the
//! dynamics split into two uncoupled 3x3 blocks: `(X_a, P_b, P_d)` and
//! `(P_a, X_b, X_d)`; only the latter reaches the measured output phase
//! quadrature.

use nalgebra::{Matrix3, Matrix6};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::LinearModel;

/// The 6x6 real drift matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftMatrix {
    pub matrix: Matrix6<f64>,
}

impl DriftMatrix {
    /// Block acting on `(P_a, X_b, X_d)`, the signal-carrying quadratures.
    pub fn signal_block(&self) -> Matrix3<f64> {
        let a = &self.matrix;
        Matrix3::new(
            a[(1, 1)],
            a[(1, 2)],
            a[(1, 4)],
            a[(2, 1)],
            a[(2, 2)],
            a[(2, 4)],
            a[(4, 1)],
            a[(4, 2)],
            a[(4, 4)],
        )
    }

    /// Block acting on `(X_a, P_b, P_d)`.
    pub fn idler_block(&self) -> Matrix3<f64> {
        let a = &self.matrix;
        Matrix3::new(
            a[(0, 0)],
            a[(0, 3)],
            a[(0, 5)],
            a[(3, 0)],
            a[(3, 3)],
            a[(3, 5)],
            a[(5, 0)],
            a[(5, 3)],
            a[(5, 5)],
        )
    }
}

/// Builds the drift matrix. Beam-splitter couplings `±g` tie `(X_a, P_b)`
/// and `(P_a, X_b)`, `±G` tie `(X_a, P_d)` and `(P_a, X_d)`; the diagonal
/// carries damping and parametric (anti)damping.
pub fn build_drift_matrix(model: &LinearModel) -> DriftMatrix {
    let LinearModel {
        kappa,
        gamma_m,
        gamma_d,
        g,
        g_bog,
        lambda_m,
        lambda_d,
    } = *model;

    let mut a = Matrix6::zeros();
    a[(0, 0)] = -kappa / 2.0;
    a[(0, 3)] = -g;
    a[(0, 5)] = g_bog;

    a[(1, 1)] = -kappa / 2.0;
    a[(1, 2)] = g;
    a[(1, 4)] = -g_bog;

    a[(2, 1)] = -g;
    a[(2, 2)] = lambda_m - gamma_m / 2.0;

    a[(3, 0)] = g;
    a[(3, 3)] = -(lambda_m + gamma_m / 2.0);

    a[(4, 1)] = g_bog;
    a[(4, 4)] = lambda_d - gamma_d / 2.0;

    a[(5, 0)] = -g_bog;
    a[(5, 5)] = -(lambda_d + gamma_d / 2.0);

    DriftMatrix { matrix: a }
}

/// Collective cooperativities `(C_m, C_d)` in the closed form
///
/// ```text
/// C_m = C0 (1 + C1 - xi_d^2) / [(1 + C1 - xi_d^2)^2 - xi_d^2 C1^2]
/// ```
///
/// and the same with `(0,m) <-> (1,d)`. Note this reduces to the exact
/// instability threshold only for vanishing modulation of the other mode;
/// see [`threshold_cooperativity_m`] for the exact boundary.
pub fn collective_cooperativity(c0: f64, c1: f64, xi_m: f64, xi_d: f64) -> Result<(f64, f64)> {
    let c_m = collective_one(c0, c1, xi_d)?;
    let c_d = collective_one(c1, c0, xi_m)?;
    Ok((c_m, c_d))
}

fn collective_one(c_this: f64, c_other: f64, xi_other: f64) -> Result<f64> {
    let head = 1.0 + c_other - xi_other * xi_other;
    let den = head * head - xi_other * xi_other * c_other * c_other;
    if den == 0.0 {
        return Err(Error::singular(
            format!("collective cooperativity denominator vanishes at xi = {xi_other}"),
            None,
        ));
    }
    Ok(c_this * head / den)
}

/// Exact static-bifurcation cooperativity for the mechanical mode at fixed
/// atomic modulation: the determinant of the signal block changes sign at
/// `xi_m = 1 + C0 (1 - xi_d) / (1 - xi_d + C1)`, independent of `kappa` and
/// the damping ratio.
pub fn threshold_cooperativity_m(c0: f64, c1: f64, xi_d: f64) -> Result<f64> {
    let den = 1.0 - xi_d + c1;
    if den == 0.0 {
        return Err(Error::singular(
            format!("threshold denominator 1 - xi_d + C1 vanishes at xi_d = {xi_d}"),
            None,
        ));
    }
    Ok(c0 * (1.0 - xi_d) / den)
}

/// Counterpart of [`threshold_cooperativity_m`] for the Bogoliubov mode at
/// fixed mechanical modulation.
pub fn threshold_cooperativity_d(c0: f64, c1: f64, xi_m: f64) -> Result<f64> {
    threshold_cooperativity_m(c1, c0, xi_m)
}

/// Modulation amplitude bound `lambda_max = (gamma/2)(1 + C)`.
pub fn modulation_bound(gamma: f64, collective_c: f64) -> f64 {
    gamma / 2.0 * (1.0 + collective_c)
}

/// Relative width of the marginal-stability band, in units of `gamma_m`.
pub const MARGINAL_BAND: f64 = 1e-9;

/// Eigenvalue summary of a drift matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSummary {
    pub eigenvalues: [Complex64; 6],
    pub max_real: f64,
}

/// All six eigenvalues via a real Schur decomposition of the full matrix.
pub fn stability_eigen(a: &DriftMatrix) -> Result<EigenSummary> {
    let schur = a
        .matrix
        .try_schur(f64::EPSILON, 2000)
        .ok_or_else(|| Error::Numeric("Schur iteration on the drift matrix stalled".into()))?;
    let ev = schur.complex_eigenvalues();
    let mut eigenvalues = [Complex64::new(0.0, 0.0); 6];
    for (slot, v) in eigenvalues.iter_mut().zip(ev.iter()) {
        *slot = Complex64::new(v.re, v.im);
    }
    let max_real = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(EigenSummary {
        eigenvalues,
        max_real,
    })
}

/// Eigenvalues of one 3x3 block.
pub fn block_eigenvalues(block: &Matrix3<f64>) -> Result<[Complex64; 3]> {
    let schur = block
        .try_schur(f64::EPSILON, 2000)
        .ok_or_else(|| Error::Numeric("Schur iteration on a 3x3 block stalled".into()))?;
    let ev = schur.complex_eigenvalues();
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (slot, v) in out.iter_mut().zip(ev.iter()) {
        *slot = Complex64::new(v.re, v.im);
    }
    Ok(out)
}

/// Stability verdict plus the analytic bounds reported alongside.
///
/// `stable` is decided by the full eigenvalue spectrum (authoritative).
/// Points with the largest real part inside `[-MARGINAL_BAND*gamma_m, 0]`
/// are flagged `marginal`: impedance-matched operating points sit close to
/// threshold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    pub marginal: bool,
    /// Largest real part over the six eigenvalues, rad/s.
    pub max_real_eigenvalue: f64,
    /// Closed-form collective cooperativities; `None` if their denominator
    /// vanishes at this operating point.
    pub collective_c_m: Option<f64>,
    pub collective_c_d: Option<f64>,
    /// `(gamma/2)(1 + C)` bounds from the collective cooperativities.
    pub lambda_m_max: Option<f64>,
    pub lambda_d_max: Option<f64>,
    /// Exact static-bifurcation bounds from the determinant criterion.
    pub lambda_m_threshold: Option<f64>,
    pub lambda_d_threshold: Option<f64>,
}

pub fn stability_report(model: &LinearModel) -> Result<StabilityReport> {
    let eig = stability_eigen(&build_drift_matrix(model))?;
    let (c0, c1) = (model.c0(), model.c1());
    let (xi_m, xi_d) = (model.xi_m(), model.xi_d());

    let collective = collective_cooperativity(c0, c1, xi_m, xi_d).ok();
    let (collective_c_m, collective_c_d) = match collective {
        Some((m, d)) => (Some(m), Some(d)),
        None => (None, None),
    };

    Ok(StabilityReport {
        stable: eig.max_real < 0.0,
        marginal: eig.max_real <= 0.0 && eig.max_real >= -MARGINAL_BAND * model.gamma_m,
        max_real_eigenvalue: eig.max_real,
        collective_c_m,
        collective_c_d,
        lambda_m_max: collective_c_m.map(|c| modulation_bound(model.gamma_m, c)),
        lambda_d_max: collective_c_d.map(|c| modulation_bound(model.gamma_d, c)),
        lambda_m_threshold: threshold_cooperativity_m(c0, c1, xi_d)
            .ok()
            .map(|c| modulation_bound(model.gamma_m, c)),
        lambda_d_threshold: threshold_cooperativity_d(c0, c1, xi_m)
            .ok()
            .map(|c| modulation_bound(model.gamma_d, c)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dimensionless(c0: f64, c1: f64, xi_m: f64, xi_d: f64, gd_over_gm: f64) -> LinearModel {
        let gamma_m = std::f64::consts::TAU * 100.0;
        LinearModel::from_cooperativities(
            c0,
            c1,
            xi_m,
            xi_d,
            1e5 * gamma_m,
            gamma_m,
            gd_over_gm * gamma_m,
        )
        .unwrap()
    }

    #[test]
    fn uncoupled_unmodulated_matrix_is_diagonal() {
        let m = dimensionless(0.0, 0.0, 0.0, 0.0, 1.0);
        let a = build_drift_matrix(&m).matrix;
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert_eq!(a[(i, j)], 0.0, "({i},{j})");
                }
            }
        }
        assert_relative_eq!(a[(0, 0)], -m.kappa / 2.0);
        assert_relative_eq!(a[(1, 1)], -m.kappa / 2.0);
        assert_relative_eq!(a[(2, 2)], -m.gamma_m / 2.0);
        assert_relative_eq!(a[(3, 3)], -m.gamma_m / 2.0);
        assert_relative_eq!(a[(4, 4)], -m.gamma_d / 2.0);
        assert_relative_eq!(a[(5, 5)], -m.gamma_d / 2.0);
    }

    #[test]
    fn fourteen_nonzero_entries_when_fully_driven() {
        // 6 diagonal + 4 couplings each for g and G.
        let m = dimensionless(0.04, 0.5, 0.98, 1.42, 1.0);
        let a = build_drift_matrix(&m).matrix;
        let nonzero = a.iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 14);
    }

    #[test]
    fn modulated_diagonal_entries() {
        // xi_m = 0.98 puts the X_b diagonal at gamma_m*(0.98 - 1)/2.
        let m = dimensionless(0.04, 0.5, 0.98, 1.42, 1.0);
        let a = build_drift_matrix(&m).matrix;
        assert_relative_eq!(a[(2, 2)], -0.01 * m.gamma_m, max_relative = 1e-12);
        assert_relative_eq!(
            a[(3, 3)],
            -(m.lambda_m + m.gamma_m / 2.0),
            max_relative = 1e-12
        );
        assert_relative_eq!(a[(4, 4)], 0.21 * m.gamma_d, max_relative = 1e-12);
    }

    #[test]
    fn collective_cooperativity_limits() {
        let (c_m, _) = collective_cooperativity(0.3, 0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(c_m, 0.3, max_relative = 1e-15);
        let (_, c_d) = collective_cooperativity(0.0, 0.7, 0.0, 0.0).unwrap();
        assert_relative_eq!(c_d, 0.7, max_relative = 1e-15);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn collective_cooperativity_reference_point() {
        // Frozen from a 40-digit evaluation of the closed form.
        let (c_m, c_d) = collective_cooperativity(0.04, 0.5, 0.98, 1.42).unwrap();
        assert_relative_eq!(c_m, 0.086997892103745154804, max_relative = 1e-12);
        assert_relative_eq!(c_d, 8.2924959162582924959, max_relative = 1e-12);
    }

    #[test]
    fn modulation_bound_examples() {
        assert_relative_eq!(modulation_bound(2.0, 0.0), 1.0);
        assert_relative_eq!(modulation_bound(2.0, 1.0), 2.0);
        // The closed-form bound admits the strongly modulated atomic point.
        let (_, c_d) = collective_cooperativity(0.04, 0.5, 0.98, 1.42).unwrap();
        let gamma_d = 1.0;
        assert!(modulation_bound(gamma_d, c_d) / gamma_d >= 1.42 / 2.0);
    }

    #[test]
    fn diagonal_matrix_eigenvalues() {
        let m = dimensionless(0.0, 0.0, 0.0, 0.0, 1.0);
        let eig = stability_eigen(&build_drift_matrix(&m)).unwrap();
        assert!(eig.max_real < 0.0);
        // Slowest decay is the least damped mode.
        assert_relative_eq!(
            eig.max_real,
            -m.gamma_m.min(m.gamma_d).min(m.kappa) / 2.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn bare_parametric_threshold() {
        // No coupling: xi > 1 antidamps one quadrature.
        let below = dimensionless(0.0, 0.0, 0.99, 0.0, 1.0);
        assert!(
            stability_eigen(&build_drift_matrix(&below))
                .unwrap()
                .max_real
                < 0.0
        );
        let above = dimensionless(0.0, 0.0, 2.0, 0.0, 1.0);
        let eig = stability_eigen(&build_drift_matrix(&above)).unwrap();
        assert!(eig.max_real > 0.0);
        assert_relative_eq!(eig.max_real, above.gamma_m / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn block_union_equals_full_spectrum() {
        let m = dimensionless(0.2, 0.4, 0.7, 0.3, 0.5);
        let a = build_drift_matrix(&m);
        let full = stability_eigen(&a).unwrap();
        let mut union: Vec<Complex64> = block_eigenvalues(&a.signal_block())
            .unwrap()
            .into_iter()
            .chain(block_eigenvalues(&a.idler_block()).unwrap())
            .collect();
        let scale = m.kappa;
        for f in full.eigenvalues.iter() {
            let (idx, nearest) = union
                .iter()
                .enumerate()
                .min_by(|(_, x), (_, y)| (*x - f).norm().total_cmp(&(*y - f).norm()))
                .map(|(i, z)| (i, *z))
                .unwrap();
            assert!(
                (nearest - f).norm() <= 1e-10 * scale,
                "eigenvalue {f} vs block {nearest}"
            );
            union.swap_remove(idx);
        }
    }

    #[test]
    fn scan_boundary_matches_static_threshold() {
        // Scanning xi_m upward at the strongly modulated atomic point, the
        // first sign change of the max real eigenvalue sits on the exact
        // determinant boundary.
        let boundary = |c0: f64, c1: f64, xi_d: f64| -> f64 {
            let mut lo = 0.0;
            let mut hi = 3.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let m = dimensionless(c0, c1, mid, xi_d, 1.0);
                let eig = stability_eigen(&build_drift_matrix(&m)).unwrap();
                if eig.max_real < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let bisected = boundary(0.04, 0.5, 1.42);
        let analytic = 1.0 + threshold_cooperativity_m(0.04, 0.5, 1.42).unwrap();
        assert_relative_eq!(bisected, analytic, max_relative = 1e-6);
        assert_relative_eq!(bisected, 0.79, max_relative = 1e-6);
    }

    #[test]
    fn strongly_modulated_operating_point_is_unstable() {
        // The c0=0.04, c1=0.5, xi=(0.98, 1.42) point violates the static
        // criterion regardless of the damping ratio.
        for gd in [1e-2, 1.0, 1e2] {
            let m = dimensionless(0.04, 0.5, 0.98, 1.42, gd);
            let eig = stability_eigen(&build_drift_matrix(&m)).unwrap();
            assert!(eig.max_real > 0.0, "gd/gm = {gd}");
        }
        // ...while the matched xi_d = 0 point is comfortably stable.
        let m = dimensionless(0.04, 0.5, 0.92, 0.0, 1.0);
        assert!(stability_eigen(&build_drift_matrix(&m)).unwrap().max_real < 0.0);
    }

    #[test]
    fn report_carries_bounds() {
        let m = dimensionless(0.04, 0.5, 0.92, 0.0, 1.0);
        let r = stability_report(&m).unwrap();
        assert!(r.stable);
        assert!(!r.marginal);
        let c_m = collective_cooperativity(0.04, 0.5, 0.92, 0.0).unwrap().0;
        assert_relative_eq!(
            r.lambda_m_max.unwrap(),
            modulation_bound(m.gamma_m, c_m),
            max_relative = 1e-12
        );
        assert!(r.lambda_m_threshold.is_some());
    }

    #[test]
    fn threshold_singularity_is_reported() {
        assert!(threshold_cooperativity_m(0.1, 0.5, 1.5).is_err());
        assert!(collective_cooperativity(0.1, 1.0, 0.0, 1.0).is_err());
    }
}
