//! Dense complex linear algebra over multi-qubit Hilbert spaces.
//!
//! Matrices are `nalgebra` dynamic matrices of `Complex<f64>`. Multi-qubit
//! operators use the convention that the first tensor factor is the slowest
//! varying index, so the control qubit of a DQC1 circuit (subsystem 0) selects
//! the 2x2 block structure of the full state.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Trace tolerance for a valid density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Hermiticity tolerance for a valid density matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated in a density matrix; values in
/// `[-EIG_TOL, 0)` are clamped to zero wherever a spectrum is consumed.
pub const EIG_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Kronecker product, `a`'s index slowest.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a sequence of factors, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_i() -> CMatrix {
    identity(2)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

/// Rank-one projector `|psi><psi|`.
pub fn projector(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise deviation from Hermiticity and where it occurs.
pub fn hermitian_deviation(m: &CMatrix) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst.0 {
                worst = (d, i, j);
            }
        }
    }
    worst
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument(format!(
            "matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub(crate) fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    check_square(m)?;
    let (deviation, row, col) = hermitian_deviation(m);
    if deviation > tol {
        return Err(Error::NotHermitian {
            row,
            col,
            deviation,
        });
    }
    Ok(())
}

/// Hermitian part `(m + m^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues descending with
/// matching eigenvector columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, k| {
        eig.eigenvectors[(r, order[k])]
    });
    (values, vectors)
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
pub fn eigvals_hermitian(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m, 1e-9)?;
    let mut values: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Shannon entropy in bits of a probability spectrum, `0 log 0 = 0`.
/// Entries in `[-EIG_TOL, 0)` count as zero.
pub fn shannon_bits(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy in bits of a unit-trace Hermitian PSD matrix.
pub(crate) fn spectral_entropy(m: &CMatrix) -> f64 {
    if m.nrows() == 2 {
        let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
        let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return shannon_bits(&[mean + gap, (mean - gap).max(0.0)]);
    }
    let values: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .map(|&v| v.max(0.0))
        .collect();
    shannon_bits(&values)
}

/// Matrix function applied through the spectrum of a Hermitian matrix.
pub(crate) fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(f(v), 0.0)),
    ));
    &vectors * diag * vectors.adjoint()
}

/// Dimension of a qubit register, checking the size is a power of two.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Hermitian, unit-trace, positive semidefinite state over qubit subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    qubit_dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates the state invariants. `qubit_dims` lists qubit counts per
    /// subsystem, slowest factor first.
    pub fn new(entries: CMatrix, qubit_dims: Vec<usize>) -> Result<Self> {
        let rho = Self::with_dims(entries, qubit_dims)?;
        rho.validate()?;
        Ok(rho)
    }

    fn with_dims(entries: CMatrix, qubit_dims: Vec<usize>) -> Result<Self> {
        let dim = check_square(&entries)?;
        let n = qubits_for_dim(dim)?;
        if qubit_dims.is_empty() || qubit_dims.iter().any(|&q| q == 0) {
            return Err(Error::InvalidArgument(
                "subsystem qubit counts must be positive".into(),
            ));
        }
        let total: usize = qubit_dims.iter().sum();
        if total != n {
            return Err(Error::DimensionMismatch {
                expected: 1 << total,
                found: dim,
            });
        }
        Ok(Self {
            entries,
            qubit_dims,
        })
    }

    /// Builds a state whose invariants hold by construction.
    pub(crate) fn from_parts_unchecked(entries: CMatrix, qubit_dims: Vec<usize>) -> Self {
        debug_assert_eq!(entries.nrows(), 1 << qubit_dims.iter().sum::<usize>());
        Self {
            entries,
            qubit_dims,
        }
    }

    fn validate(&self) -> Result<()> {
        let tr = trace(&self.entries);
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace is {:.12} + {:.12}i, expected 1",
                tr.re, tr.im
            )));
        }
        let (deviation, row, col) = hermitian_deviation(&self.entries);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                row,
                col,
                deviation,
            });
        }
        let min = eigvals_hermitian(&self.entries)?
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -EIG_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// Pure state `|psi><psi|`; `psi` is normalised first.
    pub fn from_pure(psi: &CVector, qubit_dims: Vec<usize>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let psi = psi / c(norm, 0.0);
        Self::new(projector(&psi), qubit_dims)
    }

    pub fn maximally_mixed(qubit_dims: Vec<usize>) -> Self {
        let dim = 1usize << qubit_dims.iter().sum::<usize>();
        Self::from_parts_unchecked(identity(dim) * c(1.0 / dim as f64, 0.0), qubit_dims)
    }

    /// Product state over the subsystems of `a` and `b`.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        let mut dims = a.qubit_dims.clone();
        dims.extend_from_slice(&b.qubit_dims);
        Self::from_parts_unchecked(tensor(&a.entries, &b.entries), dims)
    }

    /// Same entries regrouped into different subsystems.
    pub fn regroup(&self, qubit_dims: Vec<usize>) -> Result<Self> {
        Self::with_dims(self.entries.clone(), qubit_dims)
    }

    /// Conjugation `U rho U^dagger` for a unitary of matching dimension.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        let entries = hermitian_part(&(u * &self.entries * u.adjoint()));
        Ok(Self::from_parts_unchecked(entries, self.qubit_dims.clone()))
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn qubit_dims(&self) -> &[usize] {
        &self.qubit_dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.qubit_dims.iter().sum()
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.entries * &self.entries)).re
    }
}

/// Hermitian operator used as a measurement observable.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable {
    entries: CMatrix,
}

impl HermitianObservable {
    pub fn new(entries: CMatrix) -> Result<Self> {
        check_hermitian(&entries, 1e-12)?;
        Ok(Self { entries })
    }

    pub fn x() -> Self {
        Self { entries: pauli_x() }
    }

    pub fn y() -> Self {
        Self { entries: pauli_y() }
    }

    pub fn z() -> Self {
        Self { entries: pauli_z() }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }
}

/// Reduced state of subsystem `keep`, tracing out every other subsystem.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let dims = rho.qubit_dims();
    if dims.len() < 2 {
        return Err(Error::InvalidArgument(
            "partial trace needs at least two subsystems".into(),
        ));
    }
    if keep >= dims.len() {
        return Err(Error::InvalidArgument(format!(
            "subsystem index {keep} out of range for {} subsystems",
            dims.len()
        )));
    }
    let before = 1usize << dims[..keep].iter().sum::<usize>();
    let kept = 1usize << dims[keep];
    let after = 1usize << dims[keep + 1..].iter().sum::<usize>();
    let m = rho.entries();
    let reduced = CMatrix::from_fn(kept, kept, |a, b| {
        let mut acc = ZERO;
        for i in 0..before {
            for k in 0..after {
                acc += m[((i * kept + a) * after + k, (i * kept + b) * after + k)];
            }
        }
        acc
    });
    Ok(DensityMatrix::from_parts_unchecked(
        reduced,
        vec![dims[keep]],
    ))
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    spectral_entropy(rho.entries())
}

/// `Tr(rho * obs)`; the imaginary residue must vanish within 1e-10.
pub fn expectation(rho: &DensityMatrix, obs: &HermitianObservable) -> Result<f64> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: obs.dim(),
        });
    }
    let value = trace(&(rho.entries() * obs.entries()));
    if value.im.abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "expectation has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let sqrt_rho = hermitian_map(rho.entries(), |v| v.max(0.0).sqrt());
    let inner = &sqrt_rho * sigma.entries() * &sqrt_rho;
    let root_trace: f64 = hermitian_part(&inner)
        .symmetric_eigenvalues()
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Trace distance `||rho - sigma||_1 / 2`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let diff = rho.entries() - sigma.entries();
    Ok(0.5
        * hermitian_part(&diff)
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v.abs())
            .sum::<f64>())
}

/// Matrix exchange format `{"dim": d, "re": [[..]], "im": [[..]]}`.
///
/// `qubit_dims` is an optional extension carried by density matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_dims: Option<Vec<usize>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            dim: m.nrows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
            qubit_dims: None,
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if d == 0 || !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::InvalidArgument(format!(
                "matrix json must hold {d}x{d} \"re\" and \"im\" arrays"
            )));
        }
        Ok(CMatrix::from_fn(d, d, |i, j| {
            c(self.re[i][j], self.im[i][j])
        }))
    }
}

impl From<&DensityMatrix> for MatrixJson {
    fn from(rho: &DensityMatrix) -> Self {
        let mut json = MatrixJson::from_matrix(rho.entries());
        json.qubit_dims = Some(rho.qubit_dims().to_vec());
        json
    }
}

impl TryFrom<&MatrixJson> for DensityMatrix {
    type Error = Error;

    /// Without explicit `qubit_dims`, a single-qubit matrix is one subsystem
    /// and larger ones split as control qubit | register.
    fn try_from(json: &MatrixJson) -> Result<Self> {
        let m = json.to_matrix()?;
        let n = qubits_for_dim(json.dim)?;
        let dims = match &json.qubit_dims {
            Some(d) => d.clone(),
            None if n <= 1 => vec![n.max(1)],
            None => vec![1, n - 1],
        };
        DensityMatrix::new(m, dims)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = MatrixJson::deserialize(d)?;
        DensityMatrix::try_from(&json).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            values.len(),
            values.iter().map(|&v| c(v, 0.0)),
        ))
    }

    fn ket(amps: &[C64]) -> CVector {
        CVector::from_column_slice(amps)
    }

    fn bell_phi_plus() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&ket(&[c(h, 0.), ZERO, ZERO, c(h, 0.)]), vec![1, 1]).unwrap()
    }

    #[test]
    fn tensor_examples() {
        assert_eq!(tensor(&identity(2), &identity(2)), identity(4));
        assert_eq!(tensor(&pauli_z(), &identity(2)), diag(&[1., 1., -1., -1.]));
        let zero = diag(&[1., 0.]);
        let half_i = identity(2) * c(0.5, 0.);
        assert_eq!(tensor(&zero, &half_i), diag(&[0.5, 0.5, 0., 0.]));
    }

    #[test]
    fn tensor_is_associative() {
        let a = pauli_x();
        let b = pauli_y() * c(0.3, -1.2);
        let cc = hadamard();
        assert_eq!(tensor(&tensor(&a, &b), &cc), tensor(&a, &tensor(&b, &cc)));
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let a = DensityMatrix::new(
            CMatrix::from_row_slice(2, 2, &[c(0.7, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.)]),
            vec![1],
        )
        .unwrap();
        let b = DensityMatrix::new(diag(&[0.25, 0.75]), vec![1]).unwrap();
        let ab = DensityMatrix::product(&a, &b);
        let back = partial_trace(&ab, 0).unwrap();
        assert!((back.entries() - a.entries()).norm() < 1e-14);
        let bb = partial_trace(&ab, 1).unwrap();
        assert!((bb.entries() - b.entries()).norm() < 1e-14);

        let bell = bell_phi_plus();
        for keep in 0..2 {
            let r = partial_trace(&bell, keep).unwrap();
            assert!((r.entries() - identity(2) * c(0.5, 0.)).norm() < 1e-14);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = DensityMatrix::maximally_mixed(vec![1, 1]);
        assert!(matches!(
            partial_trace(&rho, 2),
            Err(Error::InvalidArgument(_))
        ));
        let single = DensityMatrix::maximally_mixed(vec![2]);
        assert!(partial_trace(&single, 0).is_err());
    }

    #[test]
    fn partial_trace_middle_subsystem() {
        let a = DensityMatrix::new(diag(&[0.9, 0.1]), vec![1]).unwrap();
        let b = DensityMatrix::new(diag(&[0.2, 0.8]), vec![1]).unwrap();
        let m = DensityMatrix::new(diag(&[0.6, 0.4]), vec![1]).unwrap();
        let abm = DensityMatrix::product(&DensityMatrix::product(&a, &m), &b);
        let r = partial_trace(&abm, 1).unwrap();
        assert!((r.entries() - m.entries()).norm() < 1e-14);
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(
            vn_entropy(&DensityMatrix::maximally_mixed(vec![1])),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(vn_entropy(&bell_phi_plus()), 0.0, epsilon = 1e-12);
        // -(3/4) log2(3/4) - (1/4) log2(1/4)
        let oracle = -(0.75f64 * 0.75f64.log2()) - 0.25 * 0.25f64.log2();
        assert_abs_diff_eq!(oracle, 0.811278, epsilon = 1e-6);
        let rho = DensityMatrix::new(diag(&[0.75, 0.25]), vec![1]).unwrap();
        assert_abs_diff_eq!(vn_entropy(&rho), oracle, epsilon = 1e-12);
    }

    #[test]
    fn expectation_examples() {
        let mixed = DensityMatrix::maximally_mixed(vec![1]);
        assert_abs_diff_eq!(expectation(&mixed, &HermitianObservable::z()).unwrap(), 0.0);
        let zero = DensityMatrix::new(diag(&[1., 0.]), vec![1]).unwrap();
        assert_abs_diff_eq!(expectation(&zero, &HermitianObservable::z()).unwrap(), 1.0);
        assert!(matches!(
            expectation(&mixed, &HermitianObservable::identity(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigvals_examples() {
        assert_eq!(eigvals_hermitian(&pauli_z()).unwrap(), vec![1.0, -1.0]);
        let quarter = eigvals_hermitian(&(identity(4) * c(0.25, 0.))).unwrap();
        for v in quarter {
            assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
        }
        let x = eigvals_hermitian(&pauli_x()).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], -1.0, epsilon = 1e-14);
        let skew = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
        assert!(matches!(
            eigvals_hermitian(&skew),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let zero = DensityMatrix::new(diag(&[1., 0.]), vec![1]).unwrap();
        let one = DensityMatrix::new(diag(&[0., 1.]), vec![1]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(vec![1]);
        assert_abs_diff_eq!(fidelity(&zero, &zero).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&zero, &one).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&zero, &mixed).unwrap(), 0.5, epsilon = 1e-12);
        assert!(fidelity(&zero, &bell_phi_plus()).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(matches!(
            DensityMatrix::new(diag(&[0.6, 0.6]), vec![1]),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            DensityMatrix::new(diag(&[1.2, -0.2]), vec![1]),
            Err(Error::InvalidState(_))
        ));
        let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.1, 0.), ZERO, c(0.5, 0.)]);
        assert!(matches!(
            DensityMatrix::new(non_herm, vec![1]),
            Err(Error::NotHermitian { .. })
        ));
        assert!(DensityMatrix::new(diag(&[0.5, 0.5]), vec![2]).is_err());
        // tiny negative eigenvalues within tolerance are accepted
        assert!(DensityMatrix::new(diag(&[1.0 + 5e-11, -5e-11]), vec![1]).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let rho = bell_phi_plus();
        let text = serde_json::to_string(&rho).unwrap();
        let back: DensityMatrix = serde_json::from_str(&text).unwrap();
        assert!((back.entries() - rho.entries()).norm() < 1e-15);
        assert_eq!(back.qubit_dims(), &[1, 1]);

        let bare = r#"{"dim": 2, "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]]}"#;
        let zero: DensityMatrix = serde_json::from_str(bare).unwrap();
        assert_eq!(zero.qubit_dims(), &[1]);
        let bad = r#"{"dim": 2, "re": [[1, 0]], "im": [[0, 0], [0, 0]]}"#;
        assert!(serde_json::from_str::<DensityMatrix>(bad).is_err());
    }
}
