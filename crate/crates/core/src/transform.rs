//! The shift transform `L(μ)` linking the original and shifted phase spaces,
//! `y = e^{μt} L(μ) w`, and the decay certificate it yields:
//! `‖e^{At}‖ ≤ ‖L(μ)‖ ‖L(μ)⁻¹‖ e^{μt}` for admissible `μ ≤ 0`.

use crate::envelope::{CondMode, DecayCertificate};
use crate::error::{Error, Result};
use crate::linalg::{block2, spectral_norm, sym_eigen, sym_inv_sqrt, sym_sqrt, Matrix, SymMatrix};
use crate::system::SecondOrderSystem;

/// Relative tolerance below zero allowed for the smallest eigenvalue of
/// `2μM + C`. The boundary case `μ = γ₀` has a singular shifted damping and
/// still gives a dissipative shifted operator.
const TOL_DAMPING: f64 = 1e-12;

/// Norm bounds for a block matrix `[[A, 0], [B, I]]`.
///
/// Only `bound_quadratic` holds for all blocks. With `a = ‖A‖`,
/// `b = ‖B‖` and `‖Lx‖² ≤ a²u² + (bu + v)²` (`u² + v² = 1`), the norm is at
/// most the largest singular value of `[[a, 0], [b, 1]]`; that majorant is
/// below `max{a, 1 + b}` when `a ≤ 1` and below `max{a + b, 1}` when
/// `a ≥ 1`, but not otherwise (`A = 10·I, B = I` and `A = 0, B = I`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaBounds {
    /// `√(1 + ‖AᵀA + BᵀB‖)`
    pub bound_quadratic: f64,
    /// `max{‖A‖, 1 + ‖B‖}`
    pub bound_max_shift: f64,
    /// `max{‖A‖ + ‖B‖, 1}`
    pub bound_sum: f64,
    /// `‖A‖ ≤ 1`, so `bound_max_shift` holds.
    pub max_shift_certified: bool,
    /// `‖A‖ ≥ 1`, so `bound_sum` holds.
    pub sum_certified: bool,
}

impl LemmaBounds {
    /// Smallest of the bounds that are guaranteed to hold.
    pub fn min(&self) -> f64 {
        let mut best = self.bound_quadratic;
        if self.max_shift_certified {
            best = best.min(self.bound_max_shift);
        }
        if self.sum_certified {
            best = best.min(self.bound_sum);
        }
        best
    }
}

pub fn lemma_bounds(a_block: &Matrix, b_block: &Matrix) -> LemmaBounds {
    let na = spectral_norm(a_block);
    let nb = spectral_norm(b_block);
    let gram = a_block.transpose() * a_block + b_block.transpose() * b_block;
    LemmaBounds {
        bound_quadratic: (1.0 + spectral_norm(&gram)).sqrt(),
        bound_max_shift: na.max(1.0 + nb),
        bound_sum: (na + nb).max(1.0),
        max_shift_certified: na <= 1.0,
        sum_certified: na >= 1.0,
    }
}

/// `[[A, 0], [B, I]]`.
pub fn lower_block(a_block: &Matrix, b_block: &Matrix) -> Matrix {
    let n = a_block.nrows();
    block2(
        a_block,
        &Matrix::zeros(n, n),
        b_block,
        &Matrix::identity(n, n),
    )
}

#[derive(Clone, Debug)]
pub struct ShiftTransform {
    pub mu: f64,
    pub l: Matrix,
    /// Built from its own closed form, not by inverting `l`.
    pub l_inv: Matrix,
    pub norm_l: f64,
    pub norm_l_inv: f64,
    pub cond_exact: f64,
    /// Product of the smallest block-norm bound of each factor.
    pub cond_lemma: f64,
    pub bounds_l: LemmaBounds,
    pub bounds_l_inv: LemmaBounds,
}

/// Checks that `μ ≤ 0` and that both `K(μ)` and `2μM + C` are definite
/// (the latter up to [`TOL_DAMPING`]), which is exactly the admissible
/// range `(γ, 0]`.
pub fn check_shift(sys: &SecondOrderSystem, mu: f64) -> Result<SymMatrix> {
    if !(mu <= 0.0) {
        return Err(Error::ShiftOutOfRange { mu });
    }
    let pencil = sys.pencil_at(mu);
    if !pencil.pd {
        return Err(Error::PencilNotPd { mu });
    }
    let damping = sym_eigen(&sys.shifted_damping(mu))?;
    if damping.values[0] < -TOL_DAMPING * damping.values.amax() {
        return Err(Error::DampingIndefinite { mu });
    }
    Ok(pencil.value)
}

pub fn build_transform(sys: &SecondOrderSystem, mu: f64) -> Result<ShiftTransform> {
    let kmu = check_shift(sys, mu)?;
    let kmu_sqrt = sym_sqrt(&kmu)?;
    let kmu_inv_sqrt = sym_inv_sqrt(&kmu, "K(mu)")?;

    let (a_fwd, b_fwd, a_inv, b_inv) = if mu == 0.0 {
        // K(0) = K, so both factors are exactly the identity
        let n = sys.dim();
        let (id, zero) = (Matrix::identity(n, n), Matrix::zeros(n, n));
        (id.clone(), zero.clone(), id, zero)
    } else {
        (
            sys.k_sqrt().as_matrix() * kmu_inv_sqrt.as_matrix(),
            sys.m_sqrt().as_matrix() * kmu_inv_sqrt.as_matrix() * mu,
            kmu_sqrt.as_matrix() * sys.k_inv_sqrt().as_matrix(),
            sys.m_sqrt().as_matrix() * sys.k_inv_sqrt().as_matrix() * -mu,
        )
    };

    let l = lower_block(&a_fwd, &b_fwd);
    let l_inv = lower_block(&a_inv, &b_inv);
    let norm_l = spectral_norm(&l);
    let norm_l_inv = spectral_norm(&l_inv);
    let bounds_l = lemma_bounds(&a_fwd, &b_fwd);
    let bounds_l_inv = lemma_bounds(&a_inv, &b_inv);
    Ok(ShiftTransform {
        mu,
        l,
        l_inv,
        norm_l,
        norm_l_inv,
        cond_exact: norm_l * norm_l_inv,
        cond_lemma: bounds_l.min() * bounds_l_inv.min(),
        bounds_l,
        bounds_l_inv,
    })
}

/// `‖L(μ)Â − (A − μI)L(μ)‖ / (‖A‖ ‖L(μ)‖)`.
pub fn similarity_residual(sys: &SecondOrderSystem, mu: f64) -> Result<f64> {
    let tr = build_transform(sys, mu)?;
    let a = sys.phase_operator().a;
    let a_hat = sys.shifted_phase_operator(mu)?.a;
    let n2 = a.nrows();
    let lhs = &tr.l * a_hat;
    let rhs = (&a - Matrix::identity(n2, n2) * mu) * &tr.l;
    Ok(spectral_norm(&(lhs - rhs)) / (spectral_norm(&a) * tr.norm_l))
}

pub fn certificate_at(
    sys: &SecondOrderSystem,
    mu: f64,
    cond_mode: CondMode,
) -> Result<DecayCertificate> {
    let tr = build_transform(sys, mu)?;
    Ok(DecayCertificate::from_transform(&tr, cond_mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gaussian_matrix, random_system, rng};
    use crate::linalg::expm;
    use crate::spectral_shift::{compute_gamma, DEFAULT_TOL_BISECT};
    use approx::assert_abs_diff_eq;

    fn osc(k: f64, d: f64) -> SecondOrderSystem {
        SecondOrderSystem::oscillator(k, d).unwrap()
    }

    fn check_invariants(tr: &ShiftTransform) {
        let n = tr.l.nrows();
        let id = Matrix::identity(n, n);
        assert!(spectral_norm(&(&tr.l * &tr.l_inv - &id)) <= 1e-10 * tr.cond_exact);
        assert!(spectral_norm(&(&tr.l_inv * &tr.l - &id)) <= 1e-10 * tr.cond_exact);
        assert!(tr.cond_exact <= tr.cond_lemma * (1.0 + 1e-12));
    }

    #[test]
    fn zero_shift_is_the_identity() {
        let sys = random_system(3, 3);
        let tr = build_transform(&sys, 0.0).unwrap();
        assert_eq!(tr.l, Matrix::identity(6, 6));
        assert_eq!(tr.l_inv, Matrix::identity(6, 6));
        assert_eq!(tr.cond_exact, 1.0);
        check_invariants(&tr);
        let cert = certificate_at(&sys, 0.0, CondMode::Exact).unwrap();
        assert_eq!((cert.beta, cert.c_beta), (0.0, 1.0));
    }

    #[test]
    fn scalar_transform_by_hand() {
        let tr = build_transform(&osc(1.0, 1.0), -0.25).unwrap();
        let s = 0.8125f64.sqrt();
        let expected = Matrix::from_row_slice(2, 2, &[1.0 / s, 0.0, -0.25 / s, 1.0]);
        assert!((&tr.l - expected).amax() < 1e-15);
        assert_abs_diff_eq!(tr.l[(0, 0)], 1.10940, epsilon = 1e-5);
        assert_abs_diff_eq!(tr.l[(1, 0)], -0.27735, epsilon = 1e-5);
        check_invariants(&tr);
    }

    #[test]
    fn large_stiffness_ratio_gives_near_identity() {
        let tr = build_transform(&osc(100.0, 1.0), -0.5).unwrap();
        assert!(spectral_norm(&(&tr.l - Matrix::identity(2, 2))) < 1e-2);
        assert!(tr.cond_exact < 1.01);
    }

    #[test]
    fn inadmissible_shifts() {
        let sys = osc(1.0, 3.0);
        assert_eq!(
            build_transform(&sys, 0.1).unwrap_err(),
            Error::ShiftOutOfRange { mu: 0.1 }
        );
        assert_eq!(
            build_transform(&sys, -0.5).unwrap_err(),
            Error::PencilNotPd { mu: -0.5 }
        );
        // K(μ) = μ² + μ + 1 is definite for every μ, but 2μ + 1 < 0 here
        assert_eq!(
            build_transform(&osc(1.0, 1.0), -3.0).unwrap_err(),
            Error::DampingIndefinite { mu: -3.0 }
        );
    }

    #[test]
    fn lemma_bounds_trivial_blocks() {
        let i = Matrix::identity(3, 3);
        let z = Matrix::zeros(3, 3);
        let b = lemma_bounds(&i, &z);
        assert_abs_diff_eq!(b.bound_quadratic, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.bound_max_shift, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.bound_sum, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(spectral_norm(&lower_block(&i, &z)), 1.0, epsilon = 1e-15);

        let b = lemma_bounds(&z, &z);
        assert_abs_diff_eq!(spectral_norm(&lower_block(&z, &z)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.bound_max_shift, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.bound_sum, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn lemma_bounds_dominate_random_blocks() {
        let mut r = rng(21);
        for _ in 0..500 {
            let a = gaussian_matrix(&mut r, 3, 3);
            let b = gaussian_matrix(&mut r, 3, 3);
            let exact = spectral_norm(&lower_block(&a, &b));
            let bounds = lemma_bounds(&a, &b);
            assert!(bounds.bound_quadratic >= exact * (1.0 - 1e-12));
            assert!(bounds.min() >= exact * (1.0 - 1e-12));
        }
    }

    #[test]
    fn conditional_bounds_hold_where_certified() {
        let mut r = rng(22);
        for i in 0..2000 {
            // alternate between contracting and expanding diagonal blocks
            let scale = if i % 2 == 0 { 0.2 } else { 2.0 };
            let a = gaussian_matrix(&mut r, 3, 3) * scale;
            let b = gaussian_matrix(&mut r, 3, 3);
            let exact = spectral_norm(&lower_block(&a, &b));
            let bounds = lemma_bounds(&a, &b);
            if bounds.max_shift_certified {
                assert!(bounds.bound_max_shift >= exact * (1.0 - 1e-12));
            }
            if bounds.sum_certified {
                assert!(bounds.bound_sum >= exact * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn max_shift_bound_fails_for_large_diagonal_block() {
        let a = Matrix::identity(2, 2) * 10.0;
        let b = Matrix::identity(2, 2);
        let bounds = lemma_bounds(&a, &b);
        let exact = spectral_norm(&lower_block(&a, &b));
        assert_abs_diff_eq!(
            exact,
            crate::linalg::norm_2x2([[10.0, 0.0], [1.0, 1.0]]),
            epsilon = 1e-12
        );
        assert!(exact > 101f64.sqrt());
        assert_eq!(bounds.bound_max_shift, 10.0);
        assert!(!bounds.max_shift_certified);
    }

    #[test]
    fn sum_bound_fails_without_a_dominant_diagonal_block() {
        let n = 2;
        let a = Matrix::zeros(n, n);
        let b = Matrix::identity(n, n);
        let bounds = lemma_bounds(&a, &b);
        let exact = spectral_norm(&lower_block(&a, &b));
        assert_abs_diff_eq!(exact, 2f64.sqrt(), epsilon = 1e-14);
        assert_eq!(bounds.bound_sum, 1.0);
        assert!(!bounds.sum_certified);
        assert!(bounds.min() >= exact);
    }

    #[test]
    fn similarity_identity() {
        assert!(similarity_residual(&osc(1.0, 1.0), -0.25).unwrap() <= 1e-12);
        assert!(similarity_residual(&osc(1.0, 1.0), 0.0).unwrap() <= 1e-15);
        for seed in 0..10 {
            let sys = random_system(2 + seed as usize % 4, seed);
            let g = compute_gamma(&sys, DEFAULT_TOL_BISECT).unwrap();
            for frac in [0.9, 0.5, 0.1] {
                let res = similarity_residual(&sys, frac * g.gamma).unwrap();
                assert!(res <= 1e-10, "seed {seed}: {res}");
            }
        }
    }

    #[test]
    fn explicit_inverse_on_random_systems() {
        for seed in 0..50 {
            let sys = random_system(1 + seed as usize % 5, 1000 + seed);
            let g = compute_gamma(&sys, DEFAULT_TOL_BISECT).unwrap();
            for frac in [0.999, 0.7, 0.3, 0.0] {
                let tr = build_transform(&sys, frac * g.gamma).unwrap();
                check_invariants(&tr);
            }
        }
    }

    #[test]
    fn certificates_dominate_the_semigroup() {
        for seed in 0..5 {
            let sys = random_system(3, 50 + seed);
            let g = compute_gamma(&sys, DEFAULT_TOL_BISECT).unwrap();
            let a = sys.phase_operator().a;
            for frac in [0.95, 0.5] {
                let mu = frac * g.gamma;
                let exact = certificate_at(&sys, mu, CondMode::Exact).unwrap();
                let lemma = certificate_at(&sys, mu, CondMode::Lemma).unwrap();
                assert!(lemma.c_beta >= exact.c_beta);
                let t_end = 50.0 / mu.abs();
                for i in 0..=60 {
                    let t = t_end * (i as f64 / 60.0).powi(2);
                    let norm = spectral_norm(&expm(&a, t).unwrap());
                    assert!(norm <= exact.c_beta * (mu * t).exp() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn scalar_certificate_condition_by_hand() {
        // L = [[a, 0], [b, 1]]: singular values from the 2x2 formula
        let s = 0.8125f64.sqrt();
        let (a, b) = (1.0 / s, -0.25 / s);
        let sigma = |m: [[f64; 2]; 2]| crate::linalg::norm_2x2(m);
        let cond = sigma([[a, 0.0], [b, 1.0]]) * sigma([[s, 0.0], [0.25, 1.0]]);
        let cert = certificate_at(&osc(1.0, 1.0), -0.25, CondMode::Exact).unwrap();
        assert_abs_diff_eq!(cert.c_beta, cond, epsilon = 1e-13);
        assert_eq!(cert.beta, -0.25);

        let cert = certificate_at(&osc(1.0, 1.0), 0.0, CondMode::Exact).unwrap();
        assert_eq!((cert.beta, cert.c_beta), (0.0, 1.0));
    }

    #[test]
    fn asymptotic_regime_certificate() {
        let cert = certificate_at(&osc(100.0, 1.0), -0.5, CondMode::Exact).unwrap();
        assert!(cert.c_beta < 1.01);
        assert_eq!(cert.beta, -0.5);
    }

    #[test]
    fn condition_number_is_continuous_in_the_shift() {
        let sys = random_system(3, 77);
        let g = compute_gamma(&sys, DEFAULT_TOL_BISECT).unwrap();
        let mu = 0.6 * g.gamma;
        let base = build_transform(&sys, mu).unwrap().cond_exact;
        let mut last = f64::INFINITY;
        for k in 1..6 {
            let delta = 10f64.powi(-2 * k) * g.gamma.abs();
            let gap = (build_transform(&sys, mu + delta).unwrap().cond_exact - base).abs();
            assert!(gap <= last + 1e-13);
            last = gap;
        }
        assert!(last < 1e-8);
    }
}
