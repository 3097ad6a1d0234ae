//! Over-complete two-qubit state tomography with Poissonian counts.
//!
//! Each qubit is projected onto one of the six Pauli eigenstates, giving 36
//! product settings. Counts are normalised within each complete group of four
//! settings sharing the same pair of axes, inverted to the 16 two-qubit Pauli
//! expectations by linear least squares, and projected onto the closest
//! physical state.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::qmath::{
    c, check_hermitian, eigh, hermitian_part, pauli_i, pauli_x, pauli_y, pauli_z, tensor, CMatrix,
    CVector, DensityMatrix,
};
use crate::rng::{family, stream_id, task_rng};

/// Hermiticity tolerance accepted by [`psd_project`].
pub const PSD_HERMITIAN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One of the six single-qubit projection states `|0>, |1>, |±>, |±i>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Eigenstate {
    ZPlus,
    ZMinus,
    XPlus,
    XMinus,
    YPlus,
    YMinus,
}

impl Eigenstate {
    pub const ALL: [Eigenstate; 6] = [
        Eigenstate::ZPlus,
        Eigenstate::ZMinus,
        Eigenstate::XPlus,
        Eigenstate::XMinus,
        Eigenstate::YPlus,
        Eigenstate::YMinus,
    ];

    pub fn axis(self) -> Axis {
        match self {
            Eigenstate::ZPlus | Eigenstate::ZMinus => Axis::Z,
            Eigenstate::XPlus | Eigenstate::XMinus => Axis::X,
            Eigenstate::YPlus | Eigenstate::YMinus => Axis::Y,
        }
    }

    /// Eigenvalue of the axis Pauli, `±1`.
    pub fn sign(self) -> f64 {
        match self {
            Eigenstate::ZPlus | Eigenstate::XPlus | Eigenstate::YPlus => 1.0,
            _ => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Eigenstate::ZPlus => "z+",
            Eigenstate::ZMinus => "z-",
            Eigenstate::XPlus => "x+",
            Eigenstate::XMinus => "x-",
            Eigenstate::YPlus => "y+",
            Eigenstate::YMinus => "y-",
        }
    }

    pub fn vector(self) -> CVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            Eigenstate::ZPlus => (c(1.0, 0.0), c(0.0, 0.0)),
            Eigenstate::ZMinus => (c(0.0, 0.0), c(1.0, 0.0)),
            Eigenstate::XPlus => (c(h, 0.0), c(h, 0.0)),
            Eigenstate::XMinus => (c(h, 0.0), c(-h, 0.0)),
            Eigenstate::YPlus => (c(h, 0.0), c(0.0, h)),
            Eigenstate::YMinus => (c(h, 0.0), c(0.0, -h)),
        };
        CVector::from_vec(vec![a, b])
    }

    /// `Tr(Π σ_p)` for `p` indexing `[I, X, Y, Z]`.
    fn pauli_overlap(self, p: usize) -> f64 {
        let axis_index = match self.axis() {
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        };
        match p {
            0 => 1.0,
            p if p == axis_index => self.sign(),
            _ => 0.0,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        let s = s.replace('\u{2212}', "-");
        Eigenstate::ALL.into_iter().find(|e| e.label() == s)
    }
}

/// Product projector `|a><a| ⊗ |b><b|`, serialised as e.g. `"z+x-"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TomographySetting {
    pub basis_a: Eigenstate,
    pub basis_b: Eigenstate,
}

impl TomographySetting {
    pub fn new(basis_a: Eigenstate, basis_b: Eigenstate) -> Self {
        Self { basis_a, basis_b }
    }

    pub fn projector(&self) -> CMatrix {
        let a = self.basis_a.vector();
        let b = self.basis_b.vector();
        tensor(&(&a * a.adjoint()), &(&b * b.adjoint()))
    }

    fn group(&self) -> (Axis, Axis) {
        (self.basis_a.axis(), self.basis_b.axis())
    }

    /// Row of the linear map from the 16 Pauli expectations to `Tr(ρ Π)`.
    fn design_row(&self) -> [f64; 16] {
        let mut row = [0.0; 16];
        for p in 0..4 {
            for q in 0..4 {
                row[4 * p + q] =
                    0.25 * self.basis_a.pauli_overlap(p) * self.basis_b.pauli_overlap(q);
            }
        }
        row
    }
}

impl fmt::Display for TomographySetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.basis_a.label(), self.basis_b.label())
    }
}

impl FromStr for TomographySetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('\u{2212}', "-");
        let bad = || Error::InvalidArgument(format!("unknown tomography setting {s:?}"));
        if s.len() != 4 || !s.is_ascii() {
            return Err(bad());
        }
        let a = Eigenstate::parse(&s[..2]).ok_or_else(bad)?;
        let b = Eigenstate::parse(&s[2..]).ok_or_else(bad)?;
        Ok(Self::new(a, b))
    }
}

impl Serialize for TomographySetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TomographySetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All 36 product settings, first qubit slowest.
pub fn all_settings() -> Vec<TomographySetting> {
    Eigenstate::ALL
        .into_iter()
        .flat_map(|a| {
            Eigenstate::ALL
                .into_iter()
                .map(move |b| TomographySetting::new(a, b))
        })
        .collect()
}

/// The 16-setting set `{z+, z-, x+, y+}^2`, just enough to fix a state.
pub fn minimal_settings() -> Vec<TomographySetting> {
    use Eigenstate::*;
    let basis = [ZPlus, ZMinus, XPlus, YPlus];
    basis
        .into_iter()
        .flat_map(|a| basis.into_iter().map(move |b| TomographySetting::new(a, b)))
        .collect()
}

/// `Tr(ρ Π_k)` for every setting.
pub fn setting_probabilities(
    rho: &DensityMatrix,
    settings: &[TomographySetting],
) -> Result<Vec<f64>> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    Ok(settings
        .iter()
        .map(|s| (rho.entries() * s.projector()).trace().re)
        .collect())
}

/// Counts for one simulated tomography experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyRun {
    pub settings: Vec<TomographySetting>,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub seed: u64,
    /// Stream index within the seed; nonzero for runs drawn inside a sweep.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub task: u32,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

/// Poisson counts with means `mean_counts · Tr(ρ Π_k)` over all 36 settings.
pub fn simulate_counts(rho: &DensityMatrix, mean_counts: f64, seed: u64) -> Result<TomographyRun> {
    simulate_counts_task(rho, mean_counts, seed, 0)
}

/// As [`simulate_counts`], drawing from stream `task` of the seed.
pub fn simulate_counts_task(
    rho: &DensityMatrix,
    mean_counts: f64,
    seed: u64,
    task: u32,
) -> Result<TomographyRun> {
    if !(mean_counts > 0.0 && mean_counts.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mean counts must be positive, got {mean_counts}"
        )));
    }
    let settings = all_settings();
    let probs = setting_probabilities(rho, &settings)?;
    let mut rng = task_rng(seed, stream_id(family::TOMOGRAPHY, task));
    let counts = probs
        .iter()
        .map(|&p| {
            let rate = mean_counts * p.max(0.0);
            if rate <= 0.0 {
                return Ok(0);
            }
            let dist = Poisson::new(rate)
                .map_err(|e| Error::InvalidArgument(format!("poisson rate {rate}: {e}")))?;
            Ok(dist.sample(&mut rng) as u64)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(TomographyRun {
        settings,
        counts,
        mean: mean_counts,
        seed,
        task,
    })
}

/// One run per seed, simulated independently.
pub fn simulate_ensemble(
    rho: &DensityMatrix,
    mean_counts: f64,
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<TomographyRun>> {
    exec.try_map(seeds.len(), |i| simulate_counts(rho, mean_counts, seeds[i]))
}

/// Converts raw counts to probabilities.
///
/// Settings in a complete group (all four sign combinations of one axis pair)
/// are divided by the group total. Settings in incomplete groups are divided
/// by the mean total of the complete groups.
fn normalise(settings: &[TomographySetting], values: &[f64]) -> Result<Vec<f64>> {
    let mut groups: HashMap<(Axis, Axis), (usize, f64)> = HashMap::new();
    for (s, &v) in settings.iter().zip(values) {
        let g = groups.entry(s.group()).or_insert((0, 0.0));
        g.0 += 1;
        g.1 += v;
    }
    let mut complete = 0usize;
    let mut complete_total = 0.0;
    for (&(a, b), &(members, total)) in &groups {
        if members == 4 {
            if total <= 0.0 {
                return Err(Error::Reconstruction(format!(
                    "no counts in basis pair {a:?}{b:?}"
                )));
            }
            complete += 1;
            complete_total += total;
        }
    }
    if complete == 0 {
        return Err(Error::Reconstruction(
            "no complete basis pair to normalise counts".into(),
        ));
    }
    let fallback = complete_total / complete as f64;
    Ok(settings
        .iter()
        .zip(values)
        .map(|(s, &v)| {
            let (members, total) = groups[&s.group()];
            v / if members == 4 { total } else { fallback }
        })
        .collect())
}

fn pauli_basis() -> [CMatrix; 4] {
    [pauli_i(), pauli_x(), pauli_y(), pauli_z()]
}

/// Least-squares estimate before positivity is imposed.
///
/// `values` may be raw counts or any quantity proportional to them.
pub fn linear_inversion(settings: &[TomographySetting], values: &[f64]) -> Result<CMatrix> {
    if settings.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: settings.len(),
            found: values.len(),
        });
    }
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidArgument(
            "counts must be finite and nonnegative".into(),
        ));
    }
    let probs = normalise(settings, values)?;
    let design = DMatrix::from_fn(settings.len(), 16, |k, j| settings[k].design_row()[j]);
    let svd = design.svd(true, true);
    let smallest = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if settings.len() < 16 || smallest < 1e-9 {
        return Err(Error::Reconstruction(
            "settings do not determine a two-qubit state".into(),
        ));
    }
    let expectations = svd
        .solve(&DVector::from_vec(probs), 1e-12)
        .map_err(|e| Error::Reconstruction(e.to_string()))?;

    let paulis = pauli_basis();
    let mut m = CMatrix::zeros(4, 4);
    for p in 0..4 {
        for q in 0..4 {
            m += tensor(&paulis[p], &paulis[q]) * c(0.25 * expectations[4 * p + q], 0.0);
        }
    }
    Ok(hermitian_part(&m))
}

/// Linear inversion followed by [`psd_project`]; needs all 36 settings.
pub fn reconstruct(run: &TomographyRun) -> Result<DensityMatrix> {
    if run.settings.len() != run.counts.len() {
        return Err(Error::DimensionMismatch {
            expected: run.settings.len(),
            found: run.counts.len(),
        });
    }
    let mut index = HashMap::new();
    for (k, s) in run.settings.iter().enumerate() {
        if index.insert(*s, k).is_some() {
            return Err(Error::Reconstruction(format!("setting {s} listed twice")));
        }
    }
    let mut counts = Vec::with_capacity(36);
    let settings = all_settings();
    for s in &settings {
        let k = index
            .get(s)
            .ok_or_else(|| Error::Reconstruction(format!("setting {s} missing")))?;
        counts.push(run.counts[*k] as f64);
    }
    reconstruct_with_settings(&settings, &counts)
}

/// Reconstruction from any informationally complete subset of settings.
pub fn reconstruct_with_settings(
    settings: &[TomographySetting],
    values: &[f64],
) -> Result<DensityMatrix> {
    let m = linear_inversion(settings, values)?;
    let rho = psd_project(&m)?;
    rho.regroup(vec![1, 1])
}

/// Nearest unit-trace PSD matrix in Frobenius norm.
pub fn psd_project(m: &CMatrix) -> Result<DensityMatrix> {
    let projected = psd_project_matrix(m, 1.0)?;
    let dims = match crate::qmath::qubits_for_dim(m.nrows())? {
        0 => return Err(Error::InvalidArgument("empty matrix".into())),
        1 => vec![1],
        n => vec![1, n - 1],
    };
    Ok(DensityMatrix::from_parts_unchecked(projected, dims))
}

/// Nearest PSD matrix with trace `target_trace`: the spectrum is projected
/// onto the scaled probability simplex and the eigenvectors kept.
pub fn psd_project_matrix(m: &CMatrix, target_trace: f64) -> Result<CMatrix> {
    if !(target_trace > 0.0 && target_trace.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target trace must be positive, got {target_trace}"
        )));
    }
    check_hermitian(m, PSD_HERMITIAN_TOL)?;
    let (values, vectors) = eigh(m);
    let clipped = simplex_projection(&values, target_trace);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        clipped.len(),
        clipped.iter().map(|&v| c(v, 0.0)),
    ));
    Ok(hermitian_part(&(&vectors * diag * vectors.adjoint())))
}

/// Euclidean projection of `v` onto `{x >= 0, sum x = t}`.
fn simplex_projection(v: &[f64], t: f64) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - t) / (j + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|&x| (x - shift).max(0.0)).collect()
}
