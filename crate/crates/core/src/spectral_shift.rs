//! The spectral-shift abscissa `γ = sup_x Re p₊(x)`.
//!
//! `γ` is computed from its characterization as the infimum of the shifts
//! `μ` at which both `K(μ)` and `2μM + C` are positive definite: first
//! `γ₀ = -inf xᵀCx / (2xᵀMx)` from a symmetric-definite eigenproblem, then,
//! unless `K(γ₀)` is already definite, a bisection on the definiteness of
//! `K(μ)` over `(γ₀, 0]`.
//!
//! The Rayleigh roots `p±(x)` and the sampling and ascent routines below are
//! independent views of the same number through its supremum definition.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generate::{random_unit_vector, rng};
use crate::linalg::{gen_sym_eigen_lowest, spectral_norm, Vector};
use crate::system::SecondOrderSystem;

/// Default relative width at which the bisection stops.
pub const DEFAULT_TOL_BISECT: f64 = 1e-10;
pub const MAX_BISECTION_STEPS: usize = 200;
/// `γ₀` above `-TOL_HALT·‖C‖/‖M‖` counts as zero.
pub const TOL_HALT: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 20_240_607;

const ASCENT_MIN_STEP: f64 = 1e-8;

/// Roots of the scalar quadratic `(xᵀMx)λ² + (xᵀCx)λ + xᵀKx = 0`.
#[derive(Clone, Debug)]
pub struct RayleighRoots {
    /// The normalized direction.
    pub x: Vector,
    /// `(xᵀCx / 2xᵀMx)² − xᵀKx / xᵀMx`.
    pub discriminant: f64,
    pub p_plus: Complex64,
    pub p_minus: Complex64,
}

/// Scalar roots from the three quadratic forms. Complex roots take the
/// square root of a negative discriminant with positive imaginary part.
fn roots_from_forms(m: f64, c: f64, k: f64) -> (f64, Complex64, Complex64) {
    let half = c / (2.0 * m);
    let product = k / m;
    let disc = half * half - product;
    if disc >= 0.0 {
        // larger-magnitude root first, the other via Vieta to avoid cancellation
        let p_minus = -half - disc.sqrt();
        let p_plus = if p_minus != 0.0 {
            product / p_minus
        } else {
            0.0
        };
        (
            disc,
            Complex64::new(p_plus, 0.0),
            Complex64::new(p_minus, 0.0),
        )
    } else {
        let im = (-disc).sqrt();
        (disc, Complex64::new(-half, im), Complex64::new(-half, -im))
    }
}

fn forms(sys: &SecondOrderSystem, x: &Vector) -> (f64, f64, f64) {
    (
        sys.m().quad_form(x),
        sys.c().quad_form(x),
        sys.k().quad_form(x),
    )
}

/// `Re p₊(x)` for an arbitrary nonzero `x`.
pub fn re_p_plus(sys: &SecondOrderSystem, x: &Vector) -> f64 {
    let (m, c, k) = forms(sys, x);
    roots_from_forms(m, c, k).1.re
}

pub fn rayleigh_roots(sys: &SecondOrderSystem, x: &Vector) -> Result<RayleighRoots> {
    if x.len() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a system of dimension {}",
            x.len(),
            sys.dim()
        )));
    }
    let norm = x.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let x = x / norm;
    let (m, c, k) = forms(sys, &x);
    let (discriminant, p_plus, p_minus) = roots_from_forms(m, c, k);
    Ok(RayleighRoots {
        x,
        discriminant,
        p_plus,
        p_minus,
    })
}

/// `γ₀ = -λ_min(C, 2M)`.
pub fn gamma_zero(sys: &SecondOrderSystem) -> Result<f64> {
    let two_m = sys.m() * 2.0;
    Ok(-gen_sym_eigen_lowest(sys.c(), &two_m)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaPath {
    /// `γ₀` is numerically zero; only reported through [`Error::NoDecayBound`].
    HaltedZeroDampingGap,
    GammaEqualsGamma0,
    Bisected,
}

#[derive(Clone, Debug)]
pub struct GammaResult {
    pub gamma0: f64,
    pub gamma: f64,
    pub path: GammaPath,
    pub bisection_iterations: usize,
    pub pd_at_gamma_plus_eps: bool,
    /// Final bracket width of the bisection, zero when no bisection ran.
    pub bracket_width: f64,
}

pub fn compute_gamma(sys: &SecondOrderSystem, tol_bisect: f64) -> Result<GammaResult> {
    let gamma0 = gamma_zero(sys)?;
    let tol_halt = TOL_HALT * spectral_norm(sys.c()) / spectral_norm(sys.m());
    if gamma0 >= -tol_halt {
        return Err(Error::NoDecayBound { gamma0 });
    }
    if sys.pencil_at(gamma0).pd {
        return Ok(GammaResult {
            gamma0,
            gamma: gamma0,
            path: GammaPath::GammaEqualsGamma0,
            bisection_iterations: 0,
            pd_at_gamma_plus_eps: sys.pencil_at(gamma0 + tol_bisect).pd,
            bracket_width: 0.0,
        });
    }

    // Offsets from γ₀; K(γ₀ + 0) fails, K(γ₀ + |γ₀|) = K holds.
    let (mut lo, mut hi) = (0.0, -gamma0);
    let width = tol_bisect * gamma0.abs().max(1.0);
    let mut iterations = 0;
    while hi - lo > width && iterations < MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if sys.pencil_about(gamma0, mid).pd {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let gamma = gamma0 + hi;
    Ok(GammaResult {
        gamma0,
        gamma,
        path: GammaPath::Bisected,
        bisection_iterations: iterations,
        pd_at_gamma_plus_eps: sys.pencil_about(gamma0, hi + tol_bisect).pd,
        bracket_width: hi - lo,
    })
}

/// `p₊(x)` and `p₋(x)` for `n_samples` seeded random unit vectors, in
/// sample order.
pub fn sample_numerical_range(
    sys: &SecondOrderSystem,
    n_samples: usize,
    rng_seed: u64,
) -> Vec<Complex64> {
    sample_roots(sys, n_samples, rng_seed)
        .into_iter()
        .flat_map(|(_, p, q)| [p, q])
        .collect()
}

/// Largest `D(x)` over the same samples as [`sample_numerical_range`].
pub fn max_sampled_discriminant(sys: &SecondOrderSystem, n_samples: usize, rng_seed: u64) -> f64 {
    sample_roots(sys, n_samples, rng_seed)
        .into_iter()
        .map(|(d, _, _)| d)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn sample_roots(
    sys: &SecondOrderSystem,
    n_samples: usize,
    rng_seed: u64,
) -> Vec<(f64, Complex64, Complex64)> {
    let mut r = rng(rng_seed);
    let xs: Vec<Vector> = (0..n_samples)
        .map(|_| random_unit_vector(&mut r, sys.dim()))
        .collect();
    xs.par_iter()
        .map(|x| {
            let (m, c, k) = forms(sys, x);
            roots_from_forms(m, c, k)
        })
        .collect()
}

/// Best `Re p₊(x)` found by plane-rotation ascent on the unit sphere from
/// `restarts` random starts. Always a lower estimate of `γ`.
pub fn maximize_re_pplus(sys: &SecondOrderSystem, restarts: usize, rng_seed: u64) -> f64 {
    let n = sys.dim();
    if n == 1 {
        return re_p_plus(sys, &Vector::from_element(1, 1.0));
    }
    (0..restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut r = rng(rng_seed.wrapping_add(i as u64));
            let start = random_unit_vector(&mut r, n);
            ascend(sys, start)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

fn ascend(sys: &SecondOrderSystem, mut x: Vector) -> f64 {
    let n = x.len();
    let mut best = re_p_plus(sys, &x);
    let mut step = std::f64::consts::FRAC_PI_4;
    while step >= ASCENT_MIN_STEP {
        let mut improved = false;
        for i in 0..n {
            for j in (i + 1)..n {
                for angle in [step, -step] {
                    let (s, c) = angle.sin_cos();
                    let mut y = x.clone();
                    y[i] = c * x[i] - s * x[j];
                    y[j] = s * x[i] + c * x[j];
                    let value = re_p_plus(sys, &y);
                    if value > best {
                        best = value;
                        x = y;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}
