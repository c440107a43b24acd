//! The damped wave equation `w_tt + c(x) w_t − w_xx = 0` on `(0, ℓ)` with
//! Dirichlet ends, discretized by second differences.
//!
//! `K_h = h⁻² tridiag(−1, 2, −1)` is the positive definite discrete
//! `−∂²`, `C = diag(c(x_i))` and `M = I`. The condition number of the
//! shift transform is bounded through three lowest eigenvalues:
//!
//! * `λ₁`: lowest `λ` with `diag(μ² + μc) u = λ K_h u`,
//! * `λ₂`: lowest eigenvalue of `diag(μc) + K_h`,
//! * `λ₃`: lowest `λ` with `K_h u = −λμ u`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{gen_sym_eigen_lowest, norm_2x2, spectral_norm, sym_eigen, Matrix, SymMatrix};
use crate::system::SecondOrderSystem;
use crate::transform::build_transform;

/// Damping coefficient `c(x)` on the interval.
#[derive(Clone, Debug, PartialEq)]
pub enum DampingSpec {
    Const(f64),
    /// `v1` on the left half, `v2` from the midpoint on.
    Piecewise(f64, f64),
    /// One sample per interior node.
    Samples(Vec<f64>),
}

impl DampingSpec {
    /// Parses `const:<v>`, `piecewise:<v1>,<v2>` or `file:<path>`; the file
    /// holds whitespace-separated samples.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("damping spec `{spec}` has no kind prefix")))?;
        let number = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad damping value `{s}`")))
        };
        match kind {
            "const" => Ok(DampingSpec::Const(number(rest)?)),
            "piecewise" => {
                let (a, b) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::Parse("piecewise damping needs two values".into()))?;
                Ok(DampingSpec::Piecewise(number(a)?, number(b)?))
            }
            "file" => {
                let path = Path::new(rest);
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let samples = text
                    .split_whitespace()
                    .map(number)
                    .collect::<Result<Vec<f64>>>()?;
                Ok(DampingSpec::Samples(samples))
            }
            other => Err(Error::Parse(format!("unknown damping kind `{other}`"))),
        }
    }
}

impl FromStr for DampingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DampingSpec::parse(s)
    }
}

impl fmt::Display for DampingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DampingSpec::Const(v) => write!(f, "const:{v}"),
            DampingSpec::Piecewise(a, b) => write!(f, "piecewise:{a},{b}"),
            DampingSpec::Samples(s) => write!(f, "samples[{}]", s.len()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WaveDiscretization {
    pub n_interior: usize,
    pub h: f64,
    pub laplacian: SymMatrix,
    pub damping_diag: Vec<f64>,
    pub mass: SymMatrix,
}

pub fn discretize(n: usize, length: f64, damping: &DampingSpec) -> Result<WaveDiscretization> {
    match damping {
        DampingSpec::Const(v) => discretize_with(n, length, |_| *v),
        DampingSpec::Piecewise(a, b) => {
            discretize_with(n, length, |x| if x < length / 2.0 { *a } else { *b })
        }
        DampingSpec::Samples(s) => {
            if s.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{} damping samples for {n} interior nodes",
                    s.len()
                )));
            }
            discretize_with(n, length, |x| {
                s[(x * (n + 1) as f64 / length).round() as usize - 1]
            })
        }
    }
}

/// Discretization with `c` sampled at the interior nodes `x_i = i·h`.
pub fn discretize_with(
    n: usize,
    length: f64,
    c: impl Fn(f64) -> f64,
) -> Result<WaveDiscretization> {
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "need at least 2 interior nodes, got {n}"
        )));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::Parse(format!(
            "interval length must be positive, got {length}"
        )));
    }
    let h = length / (n + 1) as f64;
    let damping_diag: Vec<f64> = (1..=n).map(|i| c(i as f64 * h)).collect();
    if let Some(&bad) = damping_diag.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositiveDamping(bad));
    }
    let scale = 1.0 / (h * h);
    let lap = Matrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 * scale,
        1 => -scale,
        _ => 0.0,
    });
    Ok(WaveDiscretization {
        n_interior: n,
        h,
        laplacian: SymMatrix::symmetrize(lap),
        damping_diag,
        mass: SymMatrix::identity(n),
    })
}

impl WaveDiscretization {
    pub fn system(&self) -> Result<SecondOrderSystem> {
        SecondOrderSystem::new(
            self.mass.clone(),
            SymMatrix::from_diagonal(&self.damping_diag),
            self.laplacian.clone(),
        )
    }

    pub fn lambda_min_laplacian(&self) -> Result<f64> {
        Ok(sym_eigen(&self.laplacian)?.values[0])
    }

    fn weighted(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d: Vec<f64> = self.damping_diag.iter().map(|&c| f(c)).collect();
        SymMatrix::from_diagonal(&d)
    }
}

pub fn lambda1(disc: &WaveDiscretization, mu: f64) -> Result<f64> {
    gen_sym_eigen_lowest(&disc.weighted(|c| mu * mu + mu * c), &disc.laplacian)
}

pub fn lambda2(disc: &WaveDiscretization, mu: f64) -> Result<f64> {
    let shifted = &disc.weighted(|c| mu * c) + &disc.laplacian;
    Ok(sym_eigen(&shifted)?.values[0])
}

pub fn lambda3(disc: &WaveDiscretization, mu: f64) -> Result<f64> {
    if mu == 0.0 {
        return Err(Error::ZeroShift);
    }
    Ok(disc.lambda_min_laplacian()? / -mu)
}

#[derive(Clone, Debug)]
pub struct WaveBoundComponents {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub mu: f64,
    /// `max{1/√(1+λ₁), 1 + 1/√(μ²+λ₂)}·(1 + 1/√λ₃)`.
    pub c_mu_bound: f64,
    /// A guaranteed bound from the same three eigenvalues: `‖[[a, 0], [b, 1]]‖`
    /// for `L(μ)` with `a² = 1/(1+λ₁)`, `b² = μ²/(μ²+λ₂)`, times
    /// `‖[[1, 0], [b', 1]]‖` for `L(μ)⁻¹` with `b'² = |μ|/λ₃`.
    pub c_mu_bound_certified: f64,
}

pub fn wave_bound(disc: &WaveDiscretization, mu: f64) -> Result<WaveBoundComponents> {
    let l1 = lambda1(disc, mu)?;
    let l2 = lambda2(disc, mu)?;
    let l3 = lambda3(disc, mu)?;
    if !(l1 < 0.0 && 1.0 + l1 > 0.0) {
        return Err(Error::InvalidShift(format!(
            "mu = {mu}: lambda1 = {l1} outside (-1, 0)"
        )));
    }
    if !(mu * mu + l2 > 0.0) {
        return Err(Error::InvalidShift(format!(
            "mu = {mu}: mu^2 + lambda2 = {} <= 0",
            mu * mu + l2
        )));
    }
    if !(l3 > 0.0) {
        return Err(Error::InvalidShift(format!(
            "mu = {mu}: lambda3 = {l3} <= 0"
        )));
    }
    let head = 1.0 / (1.0 + l1).sqrt();
    let denom2 = (mu * mu + l2).sqrt();
    let c_mu_bound = head.max(1.0 + 1.0 / denom2) * (1.0 + 1.0 / l3.sqrt());
    let c_mu_bound_certified = norm_2x2([[head, 0.0], [mu.abs() / denom2, 1.0]])
        * norm_2x2([[1.0, 0.0], [(mu.abs() / l3).sqrt(), 1.0]]);
    Ok(WaveBoundComponents {
        lambda1: l1,
        lambda2: l2,
        lambda3: l3,
        mu,
        c_mu_bound,
        c_mu_bound_certified,
    })
}

/// Squared norms of the blocks of `L(μ) = [[A, 0], [B, I]]` and
/// `L(μ)⁻¹ = [[A', 0], [B', I]]` together with the exact condition number.
#[derive(Clone, Debug)]
pub struct TransformBlocks {
    pub a_sq: f64,
    pub b_sq: f64,
    pub b_inv_sq: f64,
    pub cond_exact: f64,
}

pub fn transform_blocks(disc: &WaveDiscretization, mu: f64) -> Result<TransformBlocks> {
    let sys = disc.system()?;
    let tr = build_transform(&sys, mu)?;
    let n = disc.n_interior;
    let block = |m: &Matrix| spectral_norm(&m.view((n, 0), (n, n)).into_owned()).powi(2);
    Ok(TransformBlocks {
        a_sq: spectral_norm(&tr.l.view((0, 0), (n, n)).into_owned()).powi(2),
        b_sq: block(&tr.l),
        b_inv_sq: block(&tr.l_inv),
        cond_exact: tr.cond_exact,
    })
}
