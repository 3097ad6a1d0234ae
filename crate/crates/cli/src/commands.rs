use std::path::Path;

use dqc1_sim::clifford::{random_circuit, verify_zero_discord, CliffordCircuit};
use dqc1_sim::correlations::{concurrence, correlation_report};
use dqc1_sim::dqc1::{normalized_trace, UnitaryMatrix};
use dqc1_sim::exec::Execution;
use dqc1_sim::qmath::{DensityMatrix, MatrixJson};
use dqc1_sim::rng::{task_rng, GENERATOR_NAME};
use dqc1_sim::sampling::{estimate_control, shots_required, SamplingMode};
use dqc1_sim::sweep::{run_sweep, SweepConfig};
use dqc1_sim::tomography::{reconstruct, simulate_counts, TomographyRun};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::output::{emit, json_text, report_csv, Format};
use crate::{Cli, Command, StateArgs, SweepArgs, TomoAction, TraceArgs, VerifyArgs};

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Sweep(args) => sweep(cli, args),
        Command::Trace(args) => trace(cli, args),
        Command::Discord(args) => discord(cli, args),
        Command::Tangle(args) => tangle(cli, args),
        Command::Tomo { action } => tomo(cli, action),
        Command::VerifyClifford(args) => verify(cli, args),
    }
}

fn execution() -> Execution {
    if Execution::parallel_available() {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn read_state(path: &Path) -> CliResult<DensityMatrix> {
    let json: MatrixJson = read_json(path)?;
    Ok(DensityMatrix::try_from(&json)?)
}

fn read_unitary(path: &Path) -> CliResult<UnitaryMatrix> {
    let json: MatrixJson = read_json(path)?;
    Ok(UnitaryMatrix::new(json.to_matrix()?)?)
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(v).map_err(dqc1_sim::Error::from)?)
}

/// Reports default to JSON; `--format csv` flattens them to two lines.
fn emit_report(cli: &Cli, report: &Value) -> CliResult<()> {
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json_text(report)?,
        Format::Csv => report_csv(report),
    };
    emit(cli.out.as_deref(), &text)
}

fn resolve_sweep(cli: &Cli, args: &SweepArgs) -> CliResult<SweepConfig> {
    let mut config = match &args.config {
        Some(path) => read_json(path)?,
        None => SweepConfig::default(),
    };
    if let Some(v) = args.theta_min {
        config.theta_min = v;
    }
    if let Some(v) = args.theta_max {
        config.theta_max = v;
    }
    if let Some(v) = args.steps {
        config.steps = v;
    }
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.shots {
        config.shots = v;
    }
    if let Some(v) = &args.outputs {
        config.outputs = v.iter().copied().collect();
    }
    if let Some(v) = args.mean_counts {
        config.mean_counts = v;
    }
    if let Some(v) = args.mode {
        config.mode = v;
    }
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    Ok(config)
}

fn sweep(cli: &Cli, args: &SweepArgs) -> CliResult<()> {
    let config = resolve_sweep(cli, args)?;
    let table = run_sweep(&config, execution())?;
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json()?,
    };
    emit(cli.out.as_deref(), &text)
}

fn trace(cli: &Cli, args: &TraceArgs) -> CliResult<()> {
    let u = read_unitary(&args.unitary)?;
    let seed = cli.seed.unwrap_or(0);
    let shots = shots_required(args.epsilon, args.p_error, args.alpha)?;
    let est = estimate_control(&u, args.alpha, shots, seed, 0, args.mode)?;
    let exact = normalized_trace(&u);
    let report = json!({
        "shots_used": shots,
        "estimate_re": est.trace.re,
        "estimate_im": est.trace.im,
        "exact_re": exact.re,
        "exact_im": exact.im,
        "abs_error": (est.trace - exact).norm(),
        "raw_x": est.raw_x,
        "raw_y": est.raw_y,
        "alpha": args.alpha,
        "epsilon": args.epsilon,
        "p_error": args.p_error,
        "mode": match args.mode {
            SamplingMode::Binomial => "binomial",
            SamplingMode::Poisson => "poisson",
        },
        "seed": seed,
        "generator": GENERATOR_NAME,
        "unitary": args.unitary.display().to_string(),
    });
    emit_report(cli, &report)
}

fn discord(cli: &Cli, args: &StateArgs) -> CliResult<()> {
    let rho = read_state(&args.state)?;
    let mut report = to_value(&correlation_report(&rho)?)?;
    report["state"] = json!(args.state.display().to_string());
    emit_report(cli, &report)
}

fn tangle(cli: &Cli, args: &StateArgs) -> CliResult<()> {
    let rho = read_state(&args.state)?;
    let c = concurrence(&rho)?;
    let report = json!({
        "concurrence": c,
        "tangle": c * c,
        "state": args.state.display().to_string(),
    });
    emit_report(cli, &report)
}

fn tomo(cli: &Cli, action: &TomoAction) -> CliResult<()> {
    if cli.format == Some(Format::Csv) {
        return Err(CliError::Usage("tomo reads and writes JSON only".into()));
    }
    let value = match action {
        TomoAction::Simulate { state, mean_counts } => {
            let rho = read_state(state)?;
            to_value(&simulate_counts(&rho, *mean_counts, cli.seed.unwrap_or(0))?)?
        }
        TomoAction::Reconstruct { counts } => {
            let run: TomographyRun = read_json(counts)?;
            let rho = reconstruct(&run)?;
            to_value(&MatrixJson::from(&rho))?
        }
    };
    emit(cli.out.as_deref(), &json_text(&value)?)
}

fn verify(cli: &Cli, args: &VerifyArgs) -> CliResult<()> {
    let seed = cli.seed.unwrap_or(0);
    let (circuit, source) = match (&args.circuit, args.random) {
        (Some(path), None) => {
            let text = read_text(path)?;
            let circuit = CliffordCircuit::from_json_str(&text).map_err(|e| match e {
                dqc1_sim::Error::MalformedCircuit { index, reason } => {
                    dqc1_sim::Error::MalformedCircuit {
                        index,
                        reason: format!("{reason} (in {})", path.display()),
                    }
                }
                other => other,
            })?;
            (circuit, json!(path.display().to_string()))
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(CliError::Usage("--random needs at least one qubit".into()));
            }
            let mut rng = task_rng(seed, 0);
            let circuit = random_circuit(n, args.gates, &mut rng);
            (
                circuit,
                json!({ "qubits": n, "gates": args.gates, "seed": seed }),
            )
        }
        _ => {
            return Err(CliError::Usage(
                "pass either --circuit FILE or --random N".into(),
            ))
        }
    };
    let report = verify_zero_discord(&circuit)?;
    let verified = report.verified;
    let mut value = to_value(&report)?;
    value["source"] = source;
    value["circuit"] = circuit.to_json_value();
    emit_report(cli, &value)?;
    if verified {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(
            "circuit output has nonzero discord".into(),
        ))
    }
}
