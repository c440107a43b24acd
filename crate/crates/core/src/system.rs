//! The damped system `M ẍ + C ẋ + K x = 0`, its quadratic pencil and its
//! phase-space operators.

use crate::error::{Error, Result};
use crate::linalg::{block2, is_positive_definite, sym_inv_sqrt, sym_sqrt, Matrix, SymMatrix};

/// A validated triple of symmetric positive definite coefficients.
///
/// The square roots `M^{±1/2}` and `K^{±1/2}` are computed once on
/// construction since every phase-space quantity needs them.
#[derive(Clone, Debug)]
pub struct SecondOrderSystem {
    m: SymMatrix,
    c: SymMatrix,
    k: SymMatrix,
    m_sqrt: SymMatrix,
    m_inv_sqrt: SymMatrix,
    k_sqrt: SymMatrix,
    k_inv_sqrt: SymMatrix,
}

impl SecondOrderSystem {
    pub fn new(m: SymMatrix, c: SymMatrix, k: SymMatrix) -> Result<Self> {
        let n = m.dim();
        for (name, a) in [("C", &c), ("K", &k)] {
            if a.dim() != n {
                return Err(Error::DimensionMismatch(format!(
                    "M is {n}x{n} but {name} is {0}x{0}",
                    a.dim()
                )));
            }
        }
        for (name, a) in [("M", &m), ("C", &c), ("K", &k)] {
            if !is_positive_definite(a) {
                return Err(Error::NotPd(name.to_string()));
            }
        }
        let m_sqrt = sym_sqrt(&m)?;
        let m_inv_sqrt = sym_inv_sqrt(&m, "M")?;
        let k_sqrt = sym_sqrt(&k)?;
        let k_inv_sqrt = sym_inv_sqrt(&k, "K")?;
        Ok(SecondOrderSystem {
            m,
            c,
            k,
            m_sqrt,
            m_inv_sqrt,
            k_sqrt,
            k_inv_sqrt,
        })
    }

    /// Builds from raw matrices, checking symmetry of each by name.
    pub fn from_matrices(m: Matrix, c: Matrix, k: Matrix) -> Result<Self> {
        Self::new(
            SymMatrix::named(m, "M")?,
            SymMatrix::named(c, "C")?,
            SymMatrix::named(k, "K")?,
        )
    }

    /// The scalar oscillator `ẍ + d ẋ + k² x = 0`, whose phase matrix is
    /// `[[0, k], [-k, -d]]`.
    pub fn oscillator(k: f64, d: f64) -> Result<Self> {
        Self::new(
            SymMatrix::identity(1),
            SymMatrix::from_diagonal(&[d]),
            SymMatrix::from_diagonal(&[k * k]),
        )
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn m(&self) -> &SymMatrix {
        &self.m
    }

    pub fn c(&self) -> &SymMatrix {
        &self.c
    }

    pub fn k(&self) -> &SymMatrix {
        &self.k
    }

    pub fn m_sqrt(&self) -> &SymMatrix {
        &self.m_sqrt
    }

    pub fn m_inv_sqrt(&self) -> &SymMatrix {
        &self.m_inv_sqrt
    }

    pub fn k_sqrt(&self) -> &SymMatrix {
        &self.k_sqrt
    }

    pub fn k_inv_sqrt(&self) -> &SymMatrix {
        &self.k_inv_sqrt
    }

    /// `K(λ) = λ²M + λC + K`.
    pub fn pencil_at(&self, shift: f64) -> QuadraticPencilValue {
        let value = &(&(&self.m * (shift * shift)) + &(&self.c * shift)) + &self.k;
        QuadraticPencilValue::new(shift, value)
    }

    /// `K(base + offset)` expanded about `base`:
    /// `K(base) + offset·C(base) + offset²·M`.
    ///
    /// Exact for the quadratic, but resolves `K` near a double root of the
    /// pencil far better than direct evaluation when `base` sits at it.
    pub fn pencil_about(&self, base: f64, offset: f64) -> QuadraticPencilValue {
        let at_base = self.pencil_at(base).value;
        let slope = self.shifted_damping(base);
        let value = &(&at_base + &(&slope * offset)) + &(&self.m * (offset * offset));
        QuadraticPencilValue::new(base + offset, value)
    }

    /// `C(μ) = 2μM + C`.
    pub fn shifted_damping(&self, mu: f64) -> SymMatrix {
        &(&self.m * (2.0 * mu)) + &self.c
    }

    /// `-M^{-1/2} C M^{-1/2}`.
    fn damping_block(&self, c: &SymMatrix) -> Matrix {
        -(self.m_inv_sqrt.as_matrix() * c.as_matrix() * self.m_inv_sqrt.as_matrix())
    }

    /// The phase-space generator for `y = (K^{1/2}x, M^{1/2}ẋ)`.
    pub fn phase_operator(&self) -> PhaseOperator {
        let upper = self.k_sqrt.as_matrix() * self.m_inv_sqrt.as_matrix();
        let lower = -(self.m_inv_sqrt.as_matrix() * self.k_sqrt.as_matrix());
        let n = self.dim();
        PhaseOperator {
            a: block2(
                &Matrix::zeros(n, n),
                &upper,
                &lower,
                &self.damping_block(&self.c),
            ),
            kind: PhaseKind::Original,
        }
    }

    /// The generator for `w = (K(μ)^{1/2}z, M^{1/2}ż)` after substituting
    /// `x = e^{μt} z`; the damping block carries `C(μ)`.
    pub fn shifted_phase_operator(&self, mu: f64) -> Result<PhaseOperator> {
        let pencil = self.pencil_at(mu);
        if !pencil.pd {
            return Err(Error::PencilNotPd { mu });
        }
        let kmu_sqrt = sym_sqrt(&pencil.value)?;
        let upper = kmu_sqrt.as_matrix() * self.m_inv_sqrt.as_matrix();
        let lower = -(self.m_inv_sqrt.as_matrix() * kmu_sqrt.as_matrix());
        let n = self.dim();
        let damping = self.damping_block(&self.shifted_damping(mu));
        Ok(PhaseOperator {
            a: block2(&Matrix::zeros(n, n), &upper, &lower, &damping),
            kind: PhaseKind::Shifted(mu),
        })
    }

    /// `(A - λI)⁻¹` assembled blockwise from `K(λ)⁻¹`.
    ///
    /// A verification utility; the bound computation never calls it.
    pub fn resolvent_block(&self, lambda: f64) -> Result<Matrix> {
        if lambda == 0.0 {
            return Err(Error::ZeroShift);
        }
        let pencil = self.pencil_at(lambda);
        if !pencil.pd {
            return Err(Error::PencilNotPd { mu: lambda });
        }
        let n = self.dim();
        let kinv = pencil
            .value
            .as_matrix()
            .clone()
            .cholesky()
            .ok_or(Error::PencilNotPd { mu: lambda })?
            .inverse();
        let ks = self.k_sqrt.as_matrix();
        let ms = self.m_sqrt.as_matrix();
        let id = Matrix::identity(n, n);
        let r11 = (ks * &kinv * ks - &id) / lambda;
        let r12 = -(ks * &kinv * ms);
        let r21 = ms * &kinv * ks;
        let r22 = -(ms * &kinv * ms) * lambda;
        Ok(block2(&r11, &r12, &r21, &r22))
    }
}

/// `K(λ)` at a real shift together with its definiteness.
#[derive(Clone, Debug)]
pub struct QuadraticPencilValue {
    pub shift: f64,
    pub value: SymMatrix,
    pub pd: bool,
}

impl QuadraticPencilValue {
    fn new(shift: f64, value: SymMatrix) -> Self {
        let pd = is_positive_definite(&value);
        QuadraticPencilValue { shift, value, pd }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseKind {
    Original,
    Shifted(f64),
}

/// A `2n × 2n` phase-space generator.
#[derive(Clone, Debug)]
pub struct PhaseOperator {
    pub a: Matrix,
    pub kind: PhaseKind,
}

impl PhaseOperator {
    /// Largest eigenvalue of the symmetric part `(A + Aᵀ)/2`.
    pub fn dissipativity(&self) -> Result<f64> {
        let sym = SymMatrix::symmetrize(self.a.clone());
        let eig = crate::linalg::sym_eigen(&sym)?;
        Ok(eig.values[eig.values.len() - 1])
    }
}
