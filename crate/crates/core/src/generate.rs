//! Seeded generators for test and example systems.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::envelope::Mode;
use crate::linalg::{Matrix, SymMatrix, Vector};
use crate::system::SecondOrderSystem;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Gaussian direction normalized to unit length.
pub fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// `G Gᵀ / n + floor·I` with standard normal `G`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> SymMatrix {
    let g = gaussian_matrix(rng, n, n);
    SymMatrix::symmetrize(&g * g.transpose() / n as f64 + Matrix::identity(n, n) * floor)
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    gaussian_matrix(rng, n, n).qr().q()
}

/// A generic SPD triple.
pub fn random_system(dim: usize, seed: u64) -> SecondOrderSystem {
    let mut rng = rng(seed);
    let m = random_spd(&mut rng, dim, 0.5);
    let c = random_spd(&mut rng, dim, 0.2);
    let k = random_spd(&mut rng, dim, 0.5);
    SecondOrderSystem::new(m, c, k).expect("generated matrices are SPD")
}

/// Light damping everywhere: the discriminant `D(x)` is negative for every
/// direction.
pub fn underdamped_system(dim: usize, seed: u64) -> SecondOrderSystem {
    let mut rng = rng(seed);
    let m = random_spd(&mut rng, dim, 0.5);
    let c = &random_spd(&mut rng, dim, 0.05) * 0.05;
    let k = random_spd(&mut rng, dim, 1.0);
    SecondOrderSystem::new(m, c, k).expect("generated matrices are SPD")
}

/// Moderate damping plus one very heavily damped direction, which pushes
/// the spectral-shift abscissa strictly above `γ₀`.
pub fn partially_overdamped_system(dim: usize, seed: u64) -> SecondOrderSystem {
    let mut rng = rng(seed);
    let m = random_spd(&mut rng, dim, 0.5);
    let k = random_spd(&mut rng, dim, 0.5);
    let light = random_spd(&mut rng, dim, 0.5);
    let v = random_unit_vector(&mut rng, dim);
    let heavy = SymMatrix::symmetrize(&v * v.transpose() * 200.0);
    SecondOrderSystem::new(m, &light + &heavy, k).expect("generated matrices are SPD")
}

/// A system whose mass-normalized damping and stiffness share an
/// eigenbasis, returned with its modes.
pub fn modally_damped_system(dim: usize, seed: u64) -> (SecondOrderSystem, Vec<Mode>) {
    let mut rng = rng(seed);
    let m = random_spd(&mut rng, dim, 0.5);
    let q = random_orthogonal(&mut rng, dim);
    let k_dist = Uniform::new(0.5, 3.0).expect("valid range");
    let d_dist = Uniform::new(0.2, 4.0).expect("valid range");
    let modes: Vec<Mode> = (0..dim)
        .map(|_| Mode {
            k: k_dist.sample(&mut rng),
            d: d_dist.sample(&mut rng),
        })
        .collect();
    let kt = Vector::from_iterator(dim, modes.iter().map(|md| md.k * md.k));
    let ct = Vector::from_iterator(dim, modes.iter().map(|md| md.d));
    let ms = crate::linalg::sym_sqrt(&m).expect("SPD");
    let lift = |diag: Vector| {
        let tilde = &q * Matrix::from_diagonal(&diag) * q.transpose();
        SymMatrix::symmetrize(ms.as_matrix() * tilde * ms.as_matrix())
    };
    let sys = SecondOrderSystem::new(m.clone(), lift(ct), lift(kt)).expect("SPD");
    (sys, modes)
}
