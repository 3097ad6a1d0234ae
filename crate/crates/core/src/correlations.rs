//! Correlation measures on bipartite states: mutual information, discord
//! minimised over local projective measurements, concurrence and tangle.
//!
//! Discord conditions on a rank-one projective measurement `{Π+, Π-}` along a
//! Bloch direction of one qubit. The measurement-dependent conditional entropy
//! is minimised by a deterministic two-stage search: a 64x128 (polar x
//! azimuth) grid, then Nelder-Mead refinement from the best grid cells.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    c, hermitian_map, partial_trace, pauli_y, spectral_entropy, tensor, trace, vn_entropy, CMatrix,
    DensityMatrix, C64, ZERO,
};

/// Unit vector `(sin t cos p, sin t sin p, cos t)` on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochDirection {
    pub polar: f64,
    pub azimuth: f64,
}

impl BlochDirection {
    /// Normalises arbitrary angles into `polar ∈ [0, π]`, `azimuth ∈ [0, 2π)`.
    pub fn new(polar: f64, azimuth: f64) -> Self {
        let [x, y, z] = Self { polar, azimuth }.vector();
        Self::from_vector([x, y, z])
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let polar = (v[2] / norm).clamp(-1.0, 1.0).acos();
        let mut azimuth = v[1].atan2(v[0]);
        if azimuth < 0.0 {
            azimuth += 2.0 * PI;
        }
        if azimuth >= 2.0 * PI {
            azimuth = 0.0;
        }
        Self { polar, azimuth }
    }

    pub fn vector(&self) -> [f64; 3] {
        let (st, ct) = self.polar.sin_cos();
        let (sp, cp) = self.azimuth.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Eigenvectors of `n·σ` for the `+1` and `-1` outcomes.
    pub fn basis(&self) -> [[C64; 2]; 2] {
        measurement_basis(self.polar, self.azimuth)
    }
}

fn measurement_basis(polar: f64, azimuth: f64) -> [[C64; 2]; 2] {
    let (s, co) = (polar / 2.0).sin_cos();
    let phase = C64::from_polar(1.0, azimuth);
    [[c(co, 0.0), phase * s], [c(s, 0.0), -phase * co]]
}

/// `(<psi| ⊗ I) m (|psi> ⊗ I)` with `psi` acting on qubit `q` of `n_qubits`.
fn contract_qubit(m: &CMatrix, n_qubits: usize, q: usize, psi: &[C64; 2]) -> CMatrix {
    let lo = 1usize << (n_qubits - q - 1);
    let hi = 1usize << q;
    let out_dim = hi * lo;
    let bra = [psi[0].conj(), psi[1].conj()];
    CMatrix::from_fn(out_dim, out_dim, |r, col| {
        let (rh, rl) = (r / lo, r % lo);
        let (ch, cl) = (col / lo, col % lo);
        let mut acc = ZERO;
        for b in 0..2 {
            let row = (rh * 2 + b) * lo + rl;
            for bp in 0..2 {
                let cc = (ch * 2 + bp) * lo + cl;
                acc += bra[b] * psi[bp] * m[(row, cc)];
            }
        }
        acc
    })
}

/// Which side of a control | register state is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscordDirection {
    /// Condition on measurements of the control (subsystem 0): `D(r, c)`.
    MeasureControl,
    /// Condition on measurements of the register (subsystem 1): `D(c, r)`.
    MeasureRegister,
}

impl DiscordDirection {
    pub fn measured(self) -> usize {
        match self {
            DiscordDirection::MeasureControl => 0,
            DiscordDirection::MeasureRegister => 1,
        }
    }
}

fn check_bipartite(rho: &DensityMatrix) -> Result<()> {
    if rho.qubit_dims().len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a bipartite state, got {} subsystems",
            rho.qubit_dims().len()
        )));
    }
    Ok(())
}

/// `H(rho_c) + H(rho_r) - H(rho_cr)` in bits.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    check_bipartite(rho)?;
    let a = partial_trace(rho, 0)?;
    let b = partial_trace(rho, 1)?;
    Ok(vn_entropy(&a) + vn_entropy(&b) - vn_entropy(rho))
}

/// Settings of the conditional-entropy minimiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub polar_steps: usize,
    pub azimuth_steps: usize,
    /// Number of best grid cells refined by Nelder-Mead.
    pub refine_starts: usize,
    /// Spread of objective values across the simplex at convergence.
    pub ftol: f64,
    /// Simplex extent in radians at convergence.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            polar_steps: 64,
            azimuth_steps: 128,
            refine_starts: 4,
            ftol: 1e-8,
            xtol: 1e-7,
            max_iter: 500,
        }
    }
}

/// Minimised average conditional entropy and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEntropy {
    pub bits: f64,
    pub direction: BlochDirection,
    pub evaluations: usize,
}

/// Measurement-conditioned entropy objective for one measured qubit.
struct MeasuredObjective<'a> {
    rho: &'a CMatrix,
    n_qubits: usize,
    qubit: usize,
}

impl MeasuredObjective<'_> {
    fn eval(&self, polar: f64, azimuth: f64) -> f64 {
        measurement_basis(polar, azimuth)
            .iter()
            .map(|psi| {
                let sigma = contract_qubit(self.rho, self.n_qubits, self.qubit, psi);
                let p = trace(&sigma).re;
                if p <= 1e-15 {
                    0.0
                } else {
                    p * spectral_entropy(&(sigma / c(p, 0.0)))
                }
            })
            .sum()
    }
}

fn measured_qubit(rho: &DensityMatrix, measured: usize) -> Result<usize> {
    check_bipartite(rho)?;
    let dims = rho.qubit_dims();
    if measured >= 2 {
        return Err(Error::InvalidArgument(format!(
            "subsystem index {measured} out of range"
        )));
    }
    if dims[measured] != 1 {
        return Err(Error::Unsupported(format!(
            "projective minimisation over a {}-qubit subsystem",
            dims[measured]
        )));
    }
    Ok(dims[..measured].iter().sum())
}

/// Exhaustive grid over `polar_steps x azimuth_steps` directions, polar in
/// `[0, π]` inclusive.
pub fn grid_min_conditional_entropy(
    rho: &DensityMatrix,
    measured: usize,
    polar_steps: usize,
    azimuth_steps: usize,
) -> Result<ConditionalEntropy> {
    let qubit = measured_qubit(rho, measured)?;
    let obj = MeasuredObjective {
        rho: rho.entries(),
        n_qubits: rho.n_qubits(),
        qubit,
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..polar_steps {
        let t = PI * i as f64 / (polar_steps - 1).max(1) as f64;
        for j in 0..azimuth_steps {
            let p = 2.0 * PI * j as f64 / azimuth_steps as f64;
            let f = obj.eval(t, p);
            if f < best.0 {
                best = (f, t, p);
            }
        }
    }
    Ok(ConditionalEntropy {
        bits: best.0.max(0.0),
        direction: BlochDirection::new(best.1, best.2),
        evaluations: polar_steps * azimuth_steps,
    })
}

/// Minimum over one-qubit projective measurements on subsystem `measured` of
/// the average entropy of the other subsystem.
pub fn min_conditional_entropy(rho: &DensityMatrix, measured: usize) -> Result<ConditionalEntropy> {
    min_conditional_entropy_with(rho, measured, &OptimizerSettings::default())
}

pub fn min_conditional_entropy_with(
    rho: &DensityMatrix,
    measured: usize,
    settings: &OptimizerSettings,
) -> Result<ConditionalEntropy> {
    let qubit = measured_qubit(rho, measured)?;
    let obj = MeasuredObjective {
        rho: rho.entries(),
        n_qubits: rho.n_qubits(),
        qubit,
    };
    // polar spans [0, π) in steps of π/polar_steps; azimuth [0, 2π). Both
    // grids contain the Pauli axes.
    let dt = PI / settings.polar_steps as f64;
    let dp = 2.0 * PI / settings.azimuth_steps as f64;
    let mut cells = Vec::with_capacity(settings.polar_steps * settings.azimuth_steps);
    for i in 0..settings.polar_steps {
        let t = dt * i as f64;
        for j in 0..settings.azimuth_steps {
            let p = dp * j as f64;
            cells.push((obj.eval(t, p), t, p));
            if i == 0 {
                // azimuth is irrelevant at the pole
                break;
            }
        }
    }
    let mut evaluations = cells.len();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = cells[0];
    for &(_, t, p) in cells.iter().take(settings.refine_starts.max(1)) {
        let run = nelder_mead(
            |x| obj.eval(x[0], x[1]),
            &[t, p],
            &[dt, dp],
            settings.ftol,
            settings.xtol,
            settings.max_iter,
        );
        evaluations += run.evaluations;
        if run.value < best.0 {
            best = (run.value, run.point[0], run.point[1]);
        }
    }
    Ok(ConditionalEntropy {
        bits: best.0.max(0.0),
        direction: BlochDirection::new(best.1, best.2),
        evaluations,
    })
}

/// Discord `I - J` with `J` the measurement-conditioned mutual information.
pub fn discord(rho: &DensityMatrix, direction: DiscordDirection) -> Result<f64> {
    discord_with(rho, direction, &OptimizerSettings::default()).map(|(d, _)| d)
}

pub fn discord_with(
    rho: &DensityMatrix,
    direction: DiscordDirection,
    settings: &OptimizerSettings,
) -> Result<(f64, ConditionalEntropy)> {
    let measured = direction.measured();
    let cond = min_conditional_entropy_with(rho, measured, settings)?;
    let unmeasured = partial_trace(rho, 1 - measured)?;
    let mutual = mutual_information(rho)?;
    Ok((mutual - vn_entropy(&unmeasured) + cond.bits, cond))
}

/// Upper bound on discord from product rank-one projective measurements on
/// every qubit of the measured subsystem; exact discord when that subsystem
/// is a single qubit.
///
/// The search starts from all Pauli-axis product bases and refines the best
/// with Nelder-Mead. A value near zero certifies vanishing discord.
pub fn discord_product_bound(rho: &DensityMatrix, direction: DiscordDirection) -> Result<f64> {
    check_bipartite(rho)?;
    let measured = direction.measured();
    if rho.qubit_dims()[measured] == 1 {
        return discord(rho, direction);
    }
    let dims = rho.qubit_dims();
    let k = dims[measured];
    let first = if measured == 0 { 0 } else { dims[0] };
    let n_qubits = rho.n_qubits();
    let objective = |angles: &[f64]| -> f64 {
        // contract measured qubits from the highest index so lower positions stay fixed
        let mut branches = vec![rho.entries().clone()];
        for q in (0..k).rev() {
            let basis = measurement_basis(angles[2 * q], angles[2 * q + 1]);
            let width = n_qubits - (k - 1 - q);
            branches = branches
                .iter()
                .flat_map(|m| {
                    basis
                        .iter()
                        .map(move |psi| contract_qubit(m, width, first + q, psi))
                })
                .collect();
        }
        branches
            .iter()
            .map(|sigma| {
                let p = trace(sigma).re;
                if p <= 1e-15 {
                    0.0
                } else {
                    p * spectral_entropy(&(sigma / c(p, 0.0)))
                }
            })
            .sum()
    };
    let axes = [(0.0, 0.0), (PI / 2.0, 0.0), (PI / 2.0, PI / 2.0)];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for code in 0..3usize.pow(k as u32) {
        let mut x = Vec::with_capacity(2 * k);
        let mut rest = code;
        for _ in 0..k {
            let (t, p) = axes[rest % 3];
            rest /= 3;
            x.extend_from_slice(&[t, p]);
        }
        let f = objective(&x);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, x));
        }
    }
    let (f0, x0) = best.expect("at least one start");
    let run = nelder_mead(objective, &x0, &vec![0.1; 2 * k], 1e-12, 1e-9, 2000);
    let cond = run.value.min(f0).max(0.0);
    let unmeasured = partial_trace(rho, 1 - measured)?;
    Ok(mutual_information(rho)? - vn_entropy(&unmeasured) + cond)
}

fn spin_flip() -> CMatrix {
    tensor(&pauli_y(), &pauli_y())
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`, with `l_i` the
/// descending square roots of the spectrum of `rho (Y⊗Y) rho^* (Y⊗Y)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho)?;
    let yy = spin_flip();
    let flipped = &yy * rho.entries().map(|z| z.conj()) * &yy;
    // sqrt(rho) flipped sqrt(rho) is Hermitian and isospectral with rho * flipped
    let root = hermitian_map(rho.entries(), |v| v.max(0.0).sqrt());
    let m = &root * flipped * &root;
    let mut lambdas: Vec<f64> = crate::qmath::hermitian_part(&m)
        .symmetric_eigenvalues()
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// Concurrence squared.
pub fn tangle(rho: &DensityMatrix) -> Result<f64> {
    concurrence(rho).map(|c| c * c)
}

/// All correlation measures for one two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub mutual_info: f64,
    /// Discord conditioned on measuring the control.
    pub discord_rc: f64,
    /// Discord conditioned on measuring the register.
    pub discord_cr: f64,
    pub concurrence: f64,
    pub tangle: f64,
    /// Optimal measurement direction on the control.
    pub argmin_direction: BlochDirection,
    /// Optimal measurement direction on the register.
    pub argmin_direction_register: BlochDirection,
    pub optimizer_evals: usize,
}

pub fn correlation_report(rho: &DensityMatrix) -> Result<CorrelationReport> {
    check_two_qubit(rho)?;
    let rho = if rho.qubit_dims() == [1, 1] {
        rho.clone()
    } else {
        rho.regroup(vec![1, 1])?
    };
    let settings = OptimizerSettings::default();
    let (discord_rc, cond_c) = discord_with(&rho, DiscordDirection::MeasureControl, &settings)?;
    let (discord_cr, cond_r) = discord_with(&rho, DiscordDirection::MeasureRegister, &settings)?;
    let conc = concurrence(&rho)?;
    Ok(CorrelationReport {
        mutual_info: mutual_information(&rho)?,
        discord_rc,
        discord_cr,
        concurrence: conc,
        tangle: conc * conc,
        argmin_direction: cond_c.direction,
        argmin_direction_register: cond_r.direction,
        optimizer_evals: cond_c.evaluations + cond_r.evaluations,
    })
}

pub(crate) struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder-Mead simplex minimisation with standard coefficients. Stops once
/// both the spread of objective values is below `ftol` and the simplex fits
/// within `xtol`, or after `max_iter` iterations.
pub(crate) fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    start: &[f64],
    step: &[f64],
    ftol: f64,
    xtol: f64,
    max_iter: usize,
) -> Minimum {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += step[i];
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evaluations = dim + 1;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        let extent = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= ftol && extent <= xtol {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflected = lerp(&centroid, &worst.0, -1.0);
        let fr = f(&reflected);
        evaluations += 1;
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst.0, -2.0);
            let fe = f(&expanded);
            evaluations += 1;
            simplex[dim] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let (target, ft) = if fr < worst.1 {
                (&reflected, fr)
            } else {
                (&worst.0, worst.1)
            };
            let contracted = lerp(&centroid, target, 0.5);
            let fc = f(&contracted);
            evaluations += 1;
            if fc < ft {
                simplex[dim] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &vertex.0, 0.5);
                    let fx = f(&x);
                    *vertex = (x, fx);
                }
                evaluations += dim;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    Minimum {
        point,
        value,
        evaluations,
    }
}
