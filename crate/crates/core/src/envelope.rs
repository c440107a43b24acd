//! Decay envelopes: the pointwise minimum of certificates over a grid of
//! shifts, the partial-overdamping classification, the comparison abscissa
//! `γ_b`, and the modal shortcut for modally damped systems.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    gen_sym_eigen_highest, gen_sym_eigen_lowest, norm_2x2, spectral_abscissa, spectral_norm,
    sym_eigen, Matrix, SymMatrix,
};
use crate::oracle::{norm_curve, ClosedForm2x2};
use crate::spectral_shift::{compute_gamma, GammaPath, DEFAULT_TOL_BISECT};
use crate::system::SecondOrderSystem;
use crate::transform::{certificate_at, ShiftTransform};

pub const DEFAULT_N_MU: usize = 16;
/// Relative commutator size below which a system counts as modally damped.
pub const TOL_COMMUTE: f64 = 1e-10;
/// `γ − γ₀` above `TOL_PARTIAL·max(1, |γ₀|)` counts as partial overdamping.
pub const TOL_PARTIAL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondMode {
    /// `‖L(μ)‖‖L(μ)⁻¹‖` from singular values.
    Exact,
    /// Product of the block-norm bounds of both factors.
    Lemma,
}

/// A verified-by-construction pair with `‖e^{At}‖ ≤ c_beta·e^{beta·t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayCertificate {
    pub beta: f64,
    pub c_beta: f64,
    pub mu_source: f64,
    pub cond_mode: CondMode,
    pub notes: String,
}

impl DecayCertificate {
    pub(crate) fn from_transform(tr: &ShiftTransform, cond_mode: CondMode) -> Self {
        let (cond, notes) = match cond_mode {
            CondMode::Exact => (tr.cond_exact, "exact condition number of L(mu)".to_string()),
            CondMode::Lemma => (
                tr.cond_lemma,
                format!(
                    "block-norm bounds: L {:.6e}, L^-1 {:.6e}",
                    tr.bounds_l.min(),
                    tr.bounds_l_inv.min()
                ),
            ),
        };
        DecayCertificate {
            beta: tr.mu,
            // a condition number is at least one; rounding can land just below
            c_beta: cond.max(1.0),
            mu_source: tr.mu,
            cond_mode,
            notes,
        }
    }

    pub fn bound_at(&self, t: f64) -> f64 {
        self.c_beta * (self.beta * t).exp()
    }
}

#[derive(Clone, Debug)]
pub struct EnvelopeCurve {
    pub t_grid: Vec<f64>,
    pub bound: Vec<f64>,
    pub best_mu: Vec<f64>,
    pub oracle_norm: Option<Vec<f64>>,
    pub certificates: Vec<DecayCertificate>,
}

impl EnvelopeCurve {
    fn from_certificates(certificates: Vec<DecayCertificate>, t_grid: &[f64]) -> Self {
        let (bound, best_mu) = t_grid
            .iter()
            .map(|&t| {
                certificates.iter().map(|c| (c.bound_at(t), c.beta)).fold(
                    (f64::INFINITY, 0.0),
                    |best, cur| if cur.0 < best.0 { cur } else { best },
                )
            })
            .unzip();
        EnvelopeCurve {
            t_grid: t_grid.to_vec(),
            bound,
            best_mu,
            oracle_norm: None,
            certificates,
        }
    }
}

/// Distance kept from `γ`, where the condition number blows up.
pub fn edge_offset(gamma: f64, tol_bisect: f64) -> f64 {
    (tol_bisect * gamma.abs().max(1.0)).max(1e-6 * gamma.abs())
}

/// `n_mu` equidistant shifts from `γ + δ` up to `0` inclusive; a single
/// shift is `0`.
///
/// Grids with `n' − 1` a multiple of `n − 1` contain the `n`-grid.
pub fn mu_grid(gamma: f64, n_mu: usize, tol_bisect: f64) -> Vec<f64> {
    if n_mu <= 1 {
        return vec![0.0];
    }
    let lo = gamma + edge_offset(gamma, tol_bisect);
    let last = (n_mu - 1) as f64;
    (0..n_mu)
        .map(|j| {
            if j + 1 == n_mu {
                0.0
            } else {
                lo * (1.0 - j as f64 / last)
            }
        })
        .collect()
}

/// Envelope over the default shift grid with exact condition numbers.
pub fn envelope(
    sys: &SecondOrderSystem,
    n_mu: usize,
    t_grid: &[f64],
    with_oracle: bool,
) -> Result<EnvelopeCurve> {
    let gamma = compute_gamma(sys, DEFAULT_TOL_BISECT)?;
    let mus = mu_grid(gamma.gamma, n_mu, DEFAULT_TOL_BISECT);
    envelope_from_shifts(sys, &mus, CondMode::Exact, t_grid, with_oracle)
}

/// Envelope over explicit shifts. Shifts whose transform is numerically
/// inadmissible are skipped; at least one must survive.
pub fn envelope_from_shifts(
    sys: &SecondOrderSystem,
    mus: &[f64],
    cond_mode: CondMode,
    t_grid: &[f64],
    with_oracle: bool,
) -> Result<EnvelopeCurve> {
    let results: Vec<Result<DecayCertificate>> = mus
        .par_iter()
        .map(|&mu| certificate_at(sys, mu, cond_mode))
        .collect();
    let mut certificates = Vec::with_capacity(results.len());
    let mut first_err = None;
    for r in results {
        match r {
            Ok(c) => certificates.push(c),
            Err(e @ (Error::PencilNotPd { .. } | Error::DampingIndefinite { .. })) => {
                first_err.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if certificates.is_empty() {
        return Err(first_err.unwrap_or(Error::ShiftOutOfRange { mu: f64::NAN }));
    }
    let mut curve = EnvelopeCurve::from_certificates(certificates, t_grid);
    if with_oracle {
        curve.oracle_norm = Some(norm_curve(sys, t_grid)?.norms);
    }
    Ok(curve)
}

/// `max{ -λ_min(C, 2M), -1 / (λ_max(C, K) + 2√λ_max(K, M)) }`.
pub fn batkai_bound(sys: &SecondOrderSystem) -> Result<f64> {
    let first = -gen_sym_eigen_lowest(sys.c(), &(sys.m() * 2.0))?;
    let c_over_k = gen_sym_eigen_highest(sys.c(), sys.k())?;
    let k_over_m = gen_sym_eigen_highest(sys.k(), sys.m())?;
    Ok(first.max(-1.0 / (c_over_k + 2.0 * k_over_m.sqrt())))
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub gamma: f64,
    pub gamma_b: f64,
    pub gamma0: f64,
    pub partially_overdamped: bool,
    /// Largest real part of the spectrum of the phase operator.
    pub spectral_abscissa: f64,
    pub path: GammaPath,
    /// `γ_b < γ`, i.e. the comparison abscissa is the sharper one.
    pub batkai_tighter: bool,
}

pub fn classify(sys: &SecondOrderSystem) -> Result<ComparisonReport> {
    let g = compute_gamma(sys, DEFAULT_TOL_BISECT)?;
    let gamma_b = batkai_bound(sys)?;
    let abscissa = spectral_abscissa(&sys.phase_operator().a)?;
    Ok(ComparisonReport {
        gamma: g.gamma,
        gamma_b,
        gamma0: g.gamma0,
        partially_overdamped: g.gamma > g.gamma0 + TOL_PARTIAL * g.gamma0.abs().max(1.0),
        spectral_abscissa: abscissa,
        path: g.path,
        batkai_tighter: gamma_b < g.gamma,
    })
}

/// One decoupled oscillator `ẍ + d ẋ + k² x = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub k: f64,
    pub d: f64,
}

impl Mode {
    /// `Re((−d + √(d² − 4k²))/2)`, the exact decay type of the mode.
    pub fn type_bound(&self) -> f64 {
        let disc = self.d * self.d - 4.0 * self.k * self.k;
        if disc > 0.0 {
            -2.0 * self.k * self.k / (self.d + disc.sqrt())
        } else {
            -self.d / 2.0
        }
    }

    pub fn closed_form(&self) -> ClosedForm2x2 {
        ClosedForm2x2::new(self.k, self.d)
    }

    /// `(‖L(μ)‖, ‖L(μ)⁻¹‖)` of the mode, or `None` when `μ` is inadmissible.
    pub fn transform_norms(&self, mu: f64) -> Option<(f64, f64)> {
        let s2 = mu * mu + mu * self.d + self.k * self.k;
        if !(s2 > 0.0) || 2.0 * mu + self.d < -1e-12 * self.d {
            return None;
        }
        let s = s2.sqrt();
        let fwd = norm_2x2([[self.k / s, 0.0], [mu / s, 1.0]]);
        let inv = norm_2x2([[s / self.k, 0.0], [-mu / self.k, 1.0]]);
        Some((fwd, inv))
    }
}

/// Splits a modally damped system into its oscillators, or returns `None`
/// when mass-normalized damping and stiffness do not commute.
pub fn modal_decompose(sys: &SecondOrderSystem) -> Result<Option<Vec<Mode>>> {
    let mi = sys.m_inv_sqrt().as_matrix();
    let ct = SymMatrix::symmetrize(mi * sys.c().as_matrix() * mi);
    let kt = SymMatrix::symmetrize(mi * sys.k().as_matrix() * mi);
    let commutator = ct.as_matrix() * kt.as_matrix() - kt.as_matrix() * ct.as_matrix();
    let scale = spectral_norm(&ct) * spectral_norm(&kt);
    if spectral_norm(&commutator) > TOL_COMMUTE * scale {
        return Ok(None);
    }

    let eig_k = sym_eigen(&kt)?;
    let n = sys.dim();
    let mut basis = eig_k.vectors.clone();
    // repeated stiffness eigenvalues leave the basis free inside the
    // cluster; fix it by diagonalizing the damping there
    let cluster_tol = 1e-8 * eig_k.values.amax();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig_k.values[end] - eig_k.values[end - 1] <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let v = eig_k.vectors.columns(start, end - start).into_owned();
            let sub = SymMatrix::symmetrize(v.transpose() * ct.as_matrix() * &v);
            let rot = sym_eigen(&sub)?.vectors;
            basis.columns_mut(start, end - start).copy_from(&(&v * rot));
        }
        start = end;
    }
    let diag_c: Matrix = basis.transpose() * ct.as_matrix() * &basis;
    let diag_k: Matrix = basis.transpose() * kt.as_matrix() * &basis;
    Ok(Some(
        (0..n)
            .map(|i| Mode {
                k: diag_k[(i, i)].max(0.0).sqrt(),
                d: diag_c[(i, i)],
            })
            .collect(),
    ))
}

/// `max` over modes of the exact type of each mode.
pub fn modal_gamma(modes: &[Mode]) -> f64 {
    modes
        .iter()
        .map(Mode::type_bound)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Envelope of an orthogonal sum of oscillators, computed mode by mode.
///
/// `L(μ)` of the sum is block diagonal, so its condition number is
/// `max ‖L_i‖ · max ‖L_i⁻¹‖`; the oracle is the largest closed-form norm.
pub fn modal_envelope(modes: &[Mode], n_mu: usize, t_grid: &[f64]) -> Result<EnvelopeCurve> {
    if modes.is_empty() {
        return Err(Error::DimensionMismatch("no modes".into()));
    }
    let gamma = modal_gamma(modes);
    let certificates: Vec<DecayCertificate> = mu_grid(gamma, n_mu, DEFAULT_TOL_BISECT)
        .into_iter()
        .filter_map(|mu| {
            let mut fwd = 0.0f64;
            let mut inv = 0.0f64;
            for mode in modes {
                let (f, i) = mode.transform_norms(mu)?;
                fwd = fwd.max(f);
                inv = inv.max(i);
            }
            Some(DecayCertificate {
                beta: mu,
                c_beta: (fwd * inv).max(1.0),
                mu_source: mu,
                cond_mode: CondMode::Exact,
                notes: "modal closed form".into(),
            })
        })
        .collect();
    if certificates.is_empty() {
        return Err(Error::ShiftOutOfRange { mu: gamma });
    }
    let forms: Vec<ClosedForm2x2> = modes.iter().map(Mode::closed_form).collect();
    let oracle = t_grid
        .iter()
        .map(|&t| forms.iter().map(|f| norm_2x2(f.exp(t))).fold(0.0, f64::max))
        .collect();
    let mut curve = EnvelopeCurve::from_certificates(certificates, t_grid);
    curve.oracle_norm = Some(oracle);
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{
        modally_damped_system, partially_overdamped_system, random_system, underdamped_system,
    };
    use crate::spectral_shift::max_sampled_discriminant;
    use approx::assert_abs_diff_eq;

    fn osc(k: f64, d: f64) -> SecondOrderSystem {
        SecondOrderSystem::oscillator(k, d).unwrap()
    }

    fn linspace(end: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| end * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn grid_shape() {
        let g = mu_grid(-0.5, 4, DEFAULT_TOL_BISECT);
        assert_eq!(g.len(), 4);
        assert_eq!(g[3].to_bits(), 0.0f64.to_bits());
        assert_abs_diff_eq!(g[0], -0.5 + 5e-7, epsilon = 1e-15);
        assert_eq!(mu_grid(-0.5, 1, DEFAULT_TOL_BISECT), vec![0.0]);
        let fine = mu_grid(-0.5, 31, DEFAULT_TOL_BISECT);
        for mu in &g {
            assert!(fine.iter().any(|f| (f - mu).abs() < 1e-15));
        }
    }

    #[test]
    fn four_shift_envelope_dominates_the_scalar_norm() {
        let t = linspace(10.0, 101);
        let curve = envelope(&osc(1.0, 1.0), 4, &t, true).unwrap();
        assert_eq!(curve.certificates.len(), 4);
        let oracle = curve.oracle_norm.as_ref().unwrap();
        for (b, o) in curve.bound.iter().zip(oracle) {
            assert!(*b >= o - 1e-9);
        }
        for (i, &ti) in t.iter().enumerate() {
            let min = curve
                .certificates
                .iter()
                .map(|c| c.bound_at(ti))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(curve.bound[i], min);
        }
    }

    #[test]
    fn single_shift_envelope_is_the_contraction() {
        let t = linspace(5.0, 11);
        let curve = envelope(&osc(1.0, 1.0), 1, &t, false).unwrap();
        assert!(curve.bound.iter().all(|&b| b == 1.0));
        assert!(curve.best_mu.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn envelope_is_non_increasing() {
        let t = linspace(30.0, 200);
        let curve = envelope(&random_system(4, 3), 16, &t, false).unwrap();
        assert!(curve.bound.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn refinement_tightens_the_envelope() {
        let sys = osc(1.0, 0.5);
        let t = linspace(40.0, 400);
        let coarse = envelope(&sys, 4, &t, false).unwrap();
        let nested = envelope(&sys, 31, &t, false).unwrap();
        for (f, c) in nested.bound.iter().zip(&coarse.bound) {
            assert!(f <= c);
        }
        let fine = envelope(&sys, 32, &t, false).unwrap();
        for (f, c) in fine.bound.iter().zip(&coarse.bound) {
            assert!(*f <= c * (1.0 + 1e-12), "{f} > {c}");
        }
    }

    #[test]
    fn batkai_scalar_values() {
        // k = 1: max{-1/(d + 2), -d/2}
        assert_abs_diff_eq!(
            batkai_bound(&osc(1.0, 1.0)).unwrap(),
            -1.0 / 3.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            batkai_bound(&osc(1.0, 0.5)).unwrap(),
            -0.25,
            epsilon = 1e-14
        );
        let r = classify(&osc(1.0, 1.0)).unwrap();
        assert!(r.gamma < r.gamma_b);
        let r = classify(&osc(1.0, 0.5)).unwrap();
        assert_abs_diff_eq!(r.gamma, r.gamma_b, epsilon = 1e-14);
    }

    #[test]
    fn batkai_general_stiffness() {
        // K = [k²]: sup C/K = d/k², sup K/M = k²
        let (k, d) = (2.0, 3.0);
        let expected = (-d / 2.0f64).max(-1.0 / (d / (k * k) + 2.0 * k));
        assert_abs_diff_eq!(batkai_bound(&osc(k, d)).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn classify_scalar_cases() {
        let r = classify(&osc(1.0, 3.0)).unwrap();
        assert_abs_diff_eq!(r.gamma0, -1.5, epsilon = 1e-14);
        assert!(r.partially_overdamped);
        let exact = (-3.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(r.gamma, exact, epsilon = 1e-9);
        assert_abs_diff_eq!(r.spectral_abscissa, exact, epsilon = 1e-12);

        let r = classify(&osc(1.0, 1.0)).unwrap();
        assert!(!r.partially_overdamped);
        assert_eq!(r.gamma, r.gamma0);

        let i = SymMatrix::identity(3);
        let sys = SecondOrderSystem::new(i.clone(), &i * 2.0, i).unwrap();
        let r = classify(&sys).unwrap();
        assert!(!r.partially_overdamped);
        assert_abs_diff_eq!(r.gamma, -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.gamma0, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn partially_overdamped_gamma_is_the_spectral_abscissa() {
        for seed in 0..5 {
            let r = classify(&partially_overdamped_system(4, seed)).unwrap();
            assert!(r.partially_overdamped, "seed {seed}");
            assert!((r.gamma - r.spectral_abscissa).abs() <= 1e-6);
        }
    }

    #[test]
    fn underdamped_systems_do_not_beat_batkai() {
        for seed in 0..10 {
            let sys = underdamped_system(1 + seed as usize % 5, seed);
            assert!(max_sampled_discriminant(&sys, 10_000, seed) < 0.0);
            let r = classify(&sys).unwrap();
            assert!(r.gamma <= r.gamma_b + 1e-10);
        }
    }

    #[test]
    fn envelopes_dominate_oracle_on_random_systems() {
        for seed in 0..20 {
            let sys = random_system(1 + seed as usize % 8, 300 + seed);
            let g = compute_gamma(&sys, DEFAULT_TOL_BISECT).unwrap();
            let t = linspace(20.0 / g.gamma.abs(), 40);
            let curve = envelope(&sys, 8, &t, true).unwrap();
            for (b, o) in curve.bound.iter().zip(curve.oracle_norm.unwrap()) {
                assert!(*b >= o - 1e-9);
            }
        }
    }

    #[test]
    fn diagonal_systems_decompose_into_coordinates() {
        let sys = SecondOrderSystem::new(
            SymMatrix::from_diagonal(&[2.0, 1.0]),
            SymMatrix::from_diagonal(&[1.0, 3.0]),
            SymMatrix::from_diagonal(&[8.0, 4.0]),
        )
        .unwrap();
        let mut modes = modal_decompose(&sys).unwrap().unwrap();
        modes.sort_by(|a, b| a.k.total_cmp(&b.k));
        assert_abs_diff_eq!(modes[0].k, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(modes[0].d, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(modes[1].k, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(modes[1].d, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn constructed_modal_system_recovers_its_modes() {
        let (sys, mut modes) = modally_damped_system(4, 9);
        let mut found = modal_decompose(&sys).unwrap().unwrap();
        modes.sort_by(|a, b| a.k.total_cmp(&b.k));
        found.sort_by(|a, b| a.k.total_cmp(&b.k));
        for (a, b) in modes.iter().zip(&found) {
            assert_abs_diff_eq!(a.k, b.k, epsilon = 1e-10);
            assert_abs_diff_eq!(a.d, b.d, epsilon = 1e-10);
        }
        let g = compute_gamma(&sys, DEFAULT_TOL_BISECT).unwrap();
        assert_abs_diff_eq!(g.gamma, modal_gamma(&modes), epsilon = 1e-9);
    }

    #[test]
    fn generic_systems_are_not_modal() {
        assert!(modal_decompose(&random_system(3, 1)).unwrap().is_none());
    }

    #[test]
    fn modal_envelope_examples() {
        let t = linspace(10.0, 51);
        let single = modal_envelope(&[Mode { k: 1.0, d: 1.0 }], 16, &t).unwrap();
        let generic = envelope(&osc(1.0, 1.0), 16, &t, true).unwrap();
        for i in 0..t.len() {
            assert_abs_diff_eq!(single.bound[i], generic.bound[i], epsilon = 1e-12);
            assert_abs_diff_eq!(
                single.oracle_norm.as_ref().unwrap()[i],
                generic.oracle_norm.as_ref().unwrap()[i],
                epsilon = 1e-10
            );
        }
        let modes = [Mode { k: 1.0, d: 1.0 }, Mode { k: 2.0, d: 0.5 }];
        assert_abs_diff_eq!(modal_gamma(&modes), -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(
            modal_gamma(&[Mode { k: 1.0, d: 3.0 }]),
            (-3.0 + 5f64.sqrt()) / 2.0,
            epsilon = 1e-15
        );
    }
}
