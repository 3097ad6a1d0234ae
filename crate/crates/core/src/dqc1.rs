//! The one-clean-qubit trace estimation circuit.
//!
//! A control qubit prepared in `(I + alpha Z) / 2` and an `n`-qubit register in
//! `I / 2^n` pass through a Hadamard on the control followed by a controlled
//! `U`. The control's coherences then carry `alpha Tr(U) / 2^n`, so
//! `<X> = alpha Re[Tr U / N]` and `<Y> = alpha Im[Tr U / N]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    c, hadamard, identity, pauli_z, qubits_for_dim, tensor, trace, CMatrix, DensityMatrix,
    MatrixJson, C64, ONE,
};

/// Tolerance on `U^dagger U = I` when loading a unitary.
pub const UNITARY_TOL: f64 = 1e-8;

/// Unitary acting on an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    n: usize,
    entries: CMatrix,
}

impl UnitaryMatrix {
    /// Validates unitarity to [`UNITARY_TOL`], naming the worst entry of
    /// `U^dagger U - I` on failure.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidArgument(format!(
                "unitary must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let n = qubits_for_dim(entries.nrows())?;
        if n == 0 {
            return Err(Error::InvalidArgument(
                "register needs at least one qubit".into(),
            ));
        }
        let gram = entries.adjoint() * &entries;
        let mut worst = (0.0, 0, 0);
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { ONE } else { C64::new(0.0, 0.0) };
                let d = (gram[(i, j)] - target).norm();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        if worst.0 > UNITARY_TOL {
            return Err(Error::NotUnitary {
                row: worst.1,
                col: worst.2,
                deviation: worst.0,
            });
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            entries: identity(1 << n),
        }
    }

    /// Register qubit count.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Tensor product `self ⊗ other` as a unitary on both registers.
    pub fn tensor(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix {
            n: self.n + other.n,
            entries: tensor(&self.entries, &other.entries),
        }
    }
}

impl Serialize for UnitaryMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(&self.entries).serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = MatrixJson::deserialize(d)?;
        json.to_matrix()
            .and_then(UnitaryMatrix::new)
            .map_err(serde::de::Error::custom)
    }
}

/// Parameters of a DQC1 instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dqc1Config {
    pub n: usize,
    pub alpha: f64,
    pub theta: f64,
}

impl Dqc1Config {
    pub fn new(n: usize, alpha: f64, theta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Ok(Self { n, alpha, theta })
    }

    /// Purity `Tr(rho_c^2) = (1 + alpha^2) / 2` of the control input.
    pub fn purity(&self) -> f64 {
        (1.0 + self.alpha * self.alpha) / 2.0
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    Ok(())
}

/// `diag(1, e^{i theta})` on one qubit.
pub fn z_theta(theta: f64) -> UnitaryMatrix {
    let mut entries = identity(2);
    entries[(1, 1)] = C64::from_polar(1.0, theta);
    UnitaryMatrix { n: 1, entries }
}

/// Input state `(I^{⊗n+1} + alpha Z ⊗ I^{⊗n}) / 2^{n+1}`, split as control | register.
pub fn build_input(n: usize, alpha: f64) -> Result<DensityMatrix> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let dim = 2usize << n;
    let m = (identity(dim) + tensor(&pauli_z(), &identity(1 << n)) * c(alpha, 0.0))
        * c(1.0 / dim as f64, 0.0);
    Ok(DensityMatrix::from_parts_unchecked(m, vec![1, n]))
}

/// Controlled-`U` with the control as the slowest qubit: `diag(I, U)`.
pub fn controlled(u: &UnitaryMatrix) -> CMatrix {
    let d = u.dim();
    let mut m = identity(2 * d);
    m.view_mut((d, d), (d, d)).copy_from(u.entries());
    m
}

/// Full circuit unitary: Hadamard on the control, then controlled-`U`.
pub fn circuit_unitary(u: &UnitaryMatrix) -> CMatrix {
    controlled(u) * tensor(&hadamard(), &identity(u.dim()))
}

/// Output state in closed block form `(1/2N) [[I, alpha U^dagger], [alpha U, I]]`.
pub fn output_state(u: &UnitaryMatrix, alpha: f64) -> Result<DensityMatrix> {
    check_alpha(alpha)?;
    let d = u.dim();
    let scale = c(1.0 / (2 * d) as f64, 0.0);
    let a = c(alpha, 0.0);
    let mut m = identity(2 * d);
    m.view_mut((0, d), (d, d))
        .copy_from(&(u.entries().adjoint() * a));
    m.view_mut((d, 0), (d, d)).copy_from(&(u.entries() * a));
    Ok(DensityMatrix::from_parts_unchecked(
        m * scale,
        vec![1, u.n()],
    ))
}

/// Output state obtained by conjugating the input with the circuit unitary.
pub fn output_state_by_circuit(u: &UnitaryMatrix, alpha: f64) -> Result<DensityMatrix> {
    build_input(u.n(), alpha)?.conjugate_by(&circuit_unitary(u))
}

/// `Tr(U) / 2^n`.
pub fn normalized_trace(u: &UnitaryMatrix) -> C64 {
    trace(u.entries()) / u.dim() as f64
}

/// Reduced control state `[[1/2, alpha Tr(U)^*/2N], [alpha Tr(U)/2N, 1/2]]`.
pub fn reduced_control(u: &UnitaryMatrix, alpha: f64) -> Result<DensityMatrix> {
    check_alpha(alpha)?;
    let off = normalized_trace(u) * alpha / 2.0;
    let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), off.conj(), off, c(0.5, 0.0)]);
    Ok(DensityMatrix::from_parts_unchecked(m, vec![1]))
}

/// Exact control expectations `(<X>, <Y>) = alpha (Re, Im)[Tr U / N]`.
pub fn exact_expectations(u: &UnitaryMatrix, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let t = normalized_trace(u);
    Ok((alpha * t.re, alpha * t.im))
}
