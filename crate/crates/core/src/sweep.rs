//! Parameter sweeps of the single-register DQC1 circuit with `U = Z_θ`.
//!
//! Each grid point is independent and draws from its own random streams
//! (indexed by the point), so rows are identical whether points are
//! evaluated sequentially or in parallel.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::correlations::{discord, tangle, DiscordDirection};
use crate::dqc1::{check_alpha, exact_expectations, output_state, z_theta};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::GENERATOR_NAME;
use crate::sampling::{sample_quadratures, SamplingMode};
use crate::tomography::{reconstruct, simulate_counts_task};

pub const DEFAULT_STEPS: usize = 41;
pub const DEFAULT_MEAN_COUNTS: f64 = 1e4;

/// Quantity requested from a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepOutput {
    Trace,
    Discord,
    Tangle,
    Tomo,
}

impl std::str::FromStr for SweepOutput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trace" => Ok(SweepOutput::Trace),
            "discord" => Ok(SweepOutput::Discord),
            "tangle" => Ok(SweepOutput::Tangle),
            "tomo" => Ok(SweepOutput::Tomo),
            other => Err(Error::InvalidArgument(format!(
                "unknown sweep output {other:?}; expected trace, discord, tangle or tomo"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    pub steps: usize,
    pub alpha: f64,
    /// Runs per quadrature; 0 reports exact values in the estimate columns.
    pub shots: u64,
    pub seed: u64,
    pub outputs: BTreeSet<SweepOutput>,
    /// Mean counts per tomography setting, used by [`SweepOutput::Tomo`].
    #[serde(default = "default_mean_counts")]
    pub mean_counts: f64,
    #[serde(default)]
    pub mode: SamplingMode,
}

fn default_mean_counts() -> f64 {
    DEFAULT_MEAN_COUNTS
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            theta_min: -std::f64::consts::PI,
            theta_max: std::f64::consts::PI,
            steps: DEFAULT_STEPS,
            alpha: 1.0,
            shots: 0,
            seed: 0,
            outputs: BTreeSet::from([SweepOutput::Trace]),
            mean_counts: DEFAULT_MEAN_COUNTS,
            mode: SamplingMode::Binomial,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidArgument(format!(
                "steps must be at least 2, got {}",
                self.steps
            )));
        }
        if self.steps > u32::MAX as usize {
            return Err(Error::InvalidArgument("too many steps".into()));
        }
        if !(self.theta_min.is_finite() && self.theta_max.is_finite())
            || self.theta_min >= self.theta_max
        {
            return Err(Error::InvalidArgument(format!(
                "need theta_min < theta_max, got {} and {}",
                self.theta_min, self.theta_max
            )));
        }
        check_alpha(self.alpha)?;
        if self.outputs.is_empty() {
            return Err(Error::InvalidArgument("no sweep outputs requested".into()));
        }
        if self.outputs.contains(&SweepOutput::Tomo)
            && !(self.mean_counts > 0.0 && self.mean_counts.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "mean counts must be positive, got {}",
                self.mean_counts
            )));
        }
        Ok(())
    }

    /// Evenly spaced grid including both endpoints.
    pub fn thetas(&self) -> Vec<f64> {
        let span = self.theta_max - self.theta_min;
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.theta_max
                } else {
                    self.theta_min + span * i as f64 / last as f64
                }
            })
            .collect()
    }

    fn wants(&self, o: SweepOutput) -> bool {
        self.outputs.contains(&o)
    }
}

/// Control expectations at one grid point; `re_*`/`im_*` are `<X>`/`<Y>`,
/// which carry the factor alpha. `trace_*_est` divide it back out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceColumns {
    pub re_exact: f64,
    pub im_exact: f64,
    pub re_est: f64,
    pub im_est: f64,
    pub trace_re_est: f64,
    pub trace_im_est: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomographyColumns {
    pub tomo_discord_rc: f64,
    pub tomo_discord_cr: f64,
    pub tomo_tangle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceColumns>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discord_rc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discord_cr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tangle: Option<f64>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub tomo: Option<TomographyColumns>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub config: SweepConfig,
    pub generator: String,
    pub rows: Vec<SweepRow>,
}

pub fn run_sweep(config: &SweepConfig, exec: Execution) -> Result<SweepTable> {
    config.validate()?;
    let thetas = config.thetas();
    let rows = exec.try_map(thetas.len(), |i| sweep_point(config, thetas[i], i as u32))?;
    Ok(SweepTable {
        config: config.clone(),
        generator: GENERATOR_NAME.to_string(),
        rows,
    })
}

fn sweep_point(config: &SweepConfig, theta: f64, task: u32) -> Result<SweepRow> {
    let u = z_theta(theta);
    let alpha = config.alpha;
    let trace = if config.wants(SweepOutput::Trace) {
        let (x, y) = exact_expectations(&u, alpha)?;
        let (re_est, im_est) = if config.shots == 0 {
            (x, y)
        } else {
            sample_quadratures(x, y, config.shots, config.seed, task, config.mode)?
        };
        let rescale = |v: f64| if alpha == 0.0 { f64::NAN } else { v / alpha };
        Some(TraceColumns {
            re_exact: x,
            im_exact: y,
            re_est,
            im_est,
            trace_re_est: rescale(re_est),
            trace_im_est: rescale(im_est),
        })
    } else {
        None
    };

    let needs_state = config.wants(SweepOutput::Discord)
        || config.wants(SweepOutput::Tangle)
        || config.wants(SweepOutput::Tomo);
    let rho = if needs_state {
        Some(output_state(&u, alpha)?)
    } else {
        None
    };
    let mut row = SweepRow {
        theta,
        trace,
        discord_rc: None,
        discord_cr: None,
        tangle: None,
        tomo: None,
    };
    if let Some(rho) = &rho {
        if config.wants(SweepOutput::Discord) {
            row.discord_rc = Some(discord(rho, DiscordDirection::MeasureControl)?);
            row.discord_cr = Some(discord(rho, DiscordDirection::MeasureRegister)?);
        }
        if config.wants(SweepOutput::Tangle) {
            row.tangle = Some(tangle(rho)?);
        }
        if config.wants(SweepOutput::Tomo) {
            let run = simulate_counts_task(rho, config.mean_counts, config.seed, task)?;
            let recon = reconstruct(&run)?;
            row.tomo = Some(TomographyColumns {
                tomo_discord_rc: discord(&recon, DiscordDirection::MeasureControl)?,
                tomo_discord_cr: discord(&recon, DiscordDirection::MeasureRegister)?,
                tomo_tangle: tangle(&recon)?,
            });
        }
    }
    Ok(row)
}

/// Fixed 17-significant-digit rendering used in every CSV cell.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn mode_name(mode: SamplingMode) -> &'static str {
    match mode {
        SamplingMode::Binomial => "binomial",
        SamplingMode::Poisson => "poisson",
    }
}

impl SweepTable {
    pub fn column_names(&self) -> Vec<&'static str> {
        let c = &self.config;
        let mut cols = vec!["theta", "alpha"];
        if c.wants(SweepOutput::Trace) {
            cols.extend([
                "re_exact",
                "im_exact",
                "re_est",
                "im_est",
                "trace_re_est",
                "trace_im_est",
            ]);
        }
        cols.extend(["shots", "seed", "mode"]);
        if c.wants(SweepOutput::Discord) {
            cols.extend(["discord_rc", "discord_cr"]);
        }
        if c.wants(SweepOutput::Tangle) {
            cols.push("tangle");
        }
        if c.wants(SweepOutput::Tomo) {
            cols.extend([
                "mean_counts",
                "tomo_discord_rc",
                "tomo_discord_cr",
                "tomo_tangle",
            ]);
        }
        cols
    }

    /// One header row, then one row per grid point in theta order. Run
    /// settings repeat on every row so each file describes itself.
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut out = self.column_names().join(",");
        out.push('\n');
        for row in &self.rows {
            let mut cells = vec![format_real(row.theta), format_real(c.alpha)];
            if let Some(t) = &row.trace {
                cells.extend(
                    [
                        t.re_exact,
                        t.im_exact,
                        t.re_est,
                        t.im_est,
                        t.trace_re_est,
                        t.trace_im_est,
                    ]
                    .map(format_real),
                );
            }
            cells.push(c.shots.to_string());
            cells.push(c.seed.to_string());
            cells.push(mode_name(c.mode).to_string());
            if let (Some(rc), Some(cr)) = (row.discord_rc, row.discord_cr) {
                cells.extend([format_real(rc), format_real(cr)]);
            }
            if let Some(t) = row.tangle {
                cells.push(format_real(t));
            }
            if let Some(t) = &row.tomo {
                cells.push(format_real(c.mean_counts));
                cells
                    .extend([t.tomo_discord_rc, t.tomo_discord_cr, t.tomo_tangle].map(format_real));
            }
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}
