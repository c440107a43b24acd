//! Ground truth for the certificates: `‖e^{At}‖` from the matrix
//! exponential, the closed-form solution of a single oscillator, and a
//! cross-check of the block resolvent formula.

use rayon::prelude::*;

use crate::envelope::DecayCertificate;
use crate::error::Result;
use crate::linalg::{expm, inverse, spectral_norm, Matrix};
use crate::system::SecondOrderSystem;

/// Relative width of the band around `d = 2k` treated as critical.
pub const TOL_CRIT: f64 = 1e-9;
/// Largest tolerated `‖e^{At}‖ − c·e^{βt}` for a certificate to pass.
pub const TOL_VIOLATION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

/// `exp(t·[[0, k], [−k, −d]])` in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedForm2x2 {
    pub k: f64,
    pub d: f64,
    pub regime: Regime,
    /// `√|4k² − d²| / 2`; zero in the critical band.
    pub delta: f64,
}

impl ClosedForm2x2 {
    pub fn new(k: f64, d: f64) -> Self {
        let gap = 4.0 * k * k - d * d;
        let regime = if gap.abs() <= TOL_CRIT * (4.0 * k * k + d * d) {
            Regime::Critical
        } else if gap > 0.0 {
            Regime::Underdamped
        } else {
            Regime::Overdamped
        };
        let delta = if regime == Regime::Critical {
            0.0
        } else {
            gap.abs().sqrt() / 2.0
        };
        ClosedForm2x2 {
            k,
            d,
            regime,
            delta,
        }
    }

    pub fn phase_matrix(&self) -> Matrix {
        Matrix::from_row_slice(2, 2, &[0.0, self.k, -self.k, -self.d])
    }

    /// With `B = A + (d/2)I`, `B² = −δ²I` (underdamped) or `+δ²I`
    /// (overdamped), so `e^{At} = e^{−dt/2}(c(t)·I + s(t)·B)`.
    pub fn exp(&self, t: f64) -> [[f64; 2]; 2] {
        let (k, d) = (self.k, self.d);
        let h = d / 2.0;
        // (e^{-dt/2}·c, e^{-dt/2}·s)
        let (c, s) = match self.regime {
            Regime::Underdamped => {
                let damp = (-h * t).exp();
                let (sin, cos) = (self.delta * t).sin_cos();
                (damp * cos, damp * sin / self.delta)
            }
            Regime::Critical => {
                let damp = (-h * t).exp();
                (damp, damp * t)
            }
            Regime::Overdamped => {
                // both exponents are negative, so nothing overflows
                let slow = ((self.delta - h) * t).exp();
                let fast = ((-self.delta - h) * t).exp();
                ((slow + fast) / 2.0, (slow - fast) / (2.0 * self.delta))
            }
        };
        [[c + s * h, s * k], [-s * k, c - s * h]]
    }
}

pub fn closed_form_exp(cf: &ClosedForm2x2, t: f64) -> Matrix {
    let e = cf.exp(t);
    Matrix::from_row_slice(2, 2, &[e[0][0], e[0][1], e[1][0], e[1][1]])
}

#[derive(Clone, Debug)]
pub struct NormCurve {
    pub t_grid: Vec<f64>,
    pub norms: Vec<f64>,
}

/// `‖e^{At}‖` at every grid point.
pub fn norm_curve(sys: &SecondOrderSystem, t_grid: &[f64]) -> Result<NormCurve> {
    let a = sys.phase_operator().a;
    let norms = t_grid
        .par_iter()
        .map(|&t| expm(&a, t).map(|e| spectral_norm(&e)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(NormCurve {
        t_grid: t_grid.to_vec(),
        norms,
    })
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    /// `max_t ‖e^{At}‖ − c·e^{βt}`; positive means the certificate fails.
    pub max_violation: f64,
    /// `c·e^{βt} − ‖e^{At}‖` per grid point.
    pub slack_curve: Vec<f64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.max_violation <= TOL_VIOLATION
    }
}

pub fn verify_certificate(
    sys: &SecondOrderSystem,
    cert: &DecayCertificate,
    t_grid: &[f64],
) -> Result<VerificationReport> {
    let curve = norm_curve(sys, t_grid)?;
    let slack_curve: Vec<f64> = t_grid
        .iter()
        .zip(&curve.norms)
        .map(|(&t, &n)| cert.bound_at(t) - n)
        .collect();
    let max_violation = slack_curve
        .iter()
        .map(|s| -s)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(VerificationReport {
        max_violation,
        slack_curve,
    })
}

/// Largest `‖R_block(λ) − (A − λI)⁻¹‖ / ‖(A − λI)⁻¹‖` over `lambdas`.
pub fn resolvent_check(sys: &SecondOrderSystem, lambdas: &[f64]) -> Result<f64> {
    let a = sys.phase_operator().a;
    let id = Matrix::identity(a.nrows(), a.ncols());
    let mut worst = 0.0f64;
    for &lambda in lambdas {
        let block = sys.resolvent_block(lambda)?;
        let direct = inverse(&(&a - &id * lambda))?;
        worst = worst.max(spectral_norm(&(&block - &direct)) / spectral_norm(&direct));
    }
    Ok(worst)
}

/// Least-squares slope of `log ‖e^{At}‖` over the points with
/// `t ≥ t_max / 10`.
pub fn tail_decay_rate(curve: &NormCurve) -> f64 {
    let t_max = curve.t_grid.iter().copied().fold(0.0, f64::max);
    let (ts, ys): (Vec<f64>, Vec<f64>) = curve
        .t_grid
        .iter()
        .zip(&curve.norms)
        .filter(|(&t, &n)| t >= t_max / 10.0 && n > 0.0)
        .map(|(&t, &n)| (t, n.ln()))
        .unzip();
    let len = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / len;
    let ym = ys.iter().sum::<f64>() / len;
    let cov: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let var: f64 = ts.iter().map(|t| (t - tm).powi(2)).sum();
    cov / var
}
