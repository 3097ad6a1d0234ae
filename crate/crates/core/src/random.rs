//! Random states, unitaries and circuits for sampling-based checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::qmath::{c, CMatrix, CVector, DensityMatrix, C64};

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-random unitary from the phase-corrected QR decomposition of a
/// Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniformly random normalised state vector.
pub fn pure_state_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
    let n = v.norm();
    v / c(n, 0.0)
}

pub fn pure_state<R: Rng + ?Sized>(qubit_dims: Vec<usize>, rng: &mut R) -> DensityMatrix {
    let dim = 1 << qubit_dims.iter().sum::<usize>();
    let psi = pure_state_vector(dim, rng);
    DensityMatrix::from_parts_unchecked(&psi * psi.adjoint(), qubit_dims)
}

/// Full-rank mixed state `G G^dagger / Tr(G G^dagger)` (Hilbert-Schmidt measure).
pub fn mixed_state<R: Rng + ?Sized>(qubit_dims: Vec<usize>, rng: &mut R) -> DensityMatrix {
    let dim = 1 << qubit_dims.iter().sum::<usize>();
    let g = ginibre(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = crate::qmath::trace(&m).re;
    DensityMatrix::from_parts_unchecked(crate::qmath::hermitian_part(&(m / c(tr, 0.0))), qubit_dims)
}
