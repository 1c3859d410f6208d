use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use plank_core::certificate;
use plank_core::complex::{CVector, Complex};
use plank_core::diagnostics::{self, ProbeOptions, ProbeVariant};
use plank_core::exec::{self, Exec};
use plank_core::instance::{self, PlankInstance, WeightMode};
use plank_core::json::to_canonical_string;
use plank_core::oracle;
use plank_core::rng::RngState;
use plank_core::solver::{self, SolveConfig};

use crate::manifest::{fnv1a_hex, RunManifest};
use crate::{
    DiagArgs, DiagWhat, GenMode, GenerateArgs, OracleArgs, SolveArgs, VariantArg, VerifyArgs,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<plank_core::PlankError> for CliError {
    fn from(err: plank_core::PlankError) -> Self {
        CliError::invalid(err.to_string())
    }
}

type CmdResult = Result<u8, CliError>;

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<PlankInstance, CliError> {
    let text = read_text(path)?;
    let (inst, report) = instance::from_json_with_report(&text)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    for note in &report.notes {
        eprintln!("note: {}: {note}", path.display());
    }
    Ok(inst)
}

/// Reads a vector from either a solve result (`{"u": ...}`) or a bare array.
fn load_vector(path: &Path) -> Result<CVector, CliError> {
    let text = read_text(path)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::invalid(format!(
            "{}: parse error at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let raw = match doc {
        Value::Object(mut map) => map
            .remove("u")
            .ok_or_else(|| CliError::invalid(format!("{}: missing field `u`", path.display())))?,
        other => other,
    };
    serde_json::from_value(raw)
        .map_err(|e| CliError::invalid(format!("{}: field `u`: {e}", path.display())))
}

/// Writes `payload` to `out` (manifest to stdout) or to stdout (manifest to
/// stderr).
fn emit<T: Serialize>(
    payload: &T,
    out: Option<&Path>,
    manifest: RunManifest,
) -> Result<(), CliError> {
    let body = to_canonical_string(payload) + "\n";
    let manifest = to_canonical_string(&manifest);
    match out {
        Some(path) => {
            fs::write(path, body)
                .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
            println!("{manifest}");
        }
        None => {
            std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| CliError::invalid(e.to_string()))?;
            eprintln!("{manifest}");
        }
    }
    Ok(())
}

fn manifest<A: Serialize>(
    command: &'static str,
    args: &A,
    inst: Option<&PlankInstance>,
    started: Instant,
) -> RunManifest {
    RunManifest {
        command,
        config: serde_json::to_value(args).unwrap_or(Value::Null),
        instance_digest: inst.map(|i| fnv1a_hex(instance::to_json(i).as_bytes())),
        wall_time_ms: started.elapsed().as_millis() as u64,
        version: env!("CARGO_PKG_VERSION"),
    }
}

pub fn generate(args: &GenerateArgs) -> CmdResult {
    let started = Instant::now();
    if args.d == 0 {
        return Err(CliError::invalid("--d must be at least 1"));
    }
    let n = match (args.mode, args.n) {
        (GenMode::Tight, _) => args.d,
        (_, Some(n)) if n >= 1 => n,
        (_, Some(_)) => return Err(CliError::invalid("--n must be at least 1")),
        (_, None) => return Err(CliError::invalid("--n is required for this mode")),
    };
    let inst = match args.mode {
        GenMode::Equal => instance::gen_random(args.d, n, args.seed, WeightMode::Equal),
        GenMode::Random => instance::gen_random(args.d, n, args.seed, WeightMode::Random),
        GenMode::Tight => instance::gen_tight(args.d),
        GenMode::Repeated => instance::gen_repeated(args.d, n),
    };
    let body = instance::to_json(&inst) + "\n";
    let m = to_canonical_string(&manifest("generate", args, Some(&inst), started));
    match &args.out {
        Some(path) => {
            fs::write(path, body)
                .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
            println!("{m}");
        }
        None => {
            print!("{body}");
            eprintln!("{m}");
        }
    }
    Ok(EXIT_OK)
}

pub fn solve(args: &SolveArgs) -> CmdResult {
    let started = Instant::now();
    let inst = load_instance(&args.input)?;
    let config = SolveConfig {
        residual_tol: args.residual_tol,
        margin_tol: args.margin_tol,
        max_iters: args.max_iters,
        multistart: args.multistart,
        seed: args.seed,
        exec: Exec::for_threads(args.threads),
        ..SolveConfig::default()
    };
    config.check()?;
    let result = exec::with_threads(args.threads, || solver::solve(&inst, &config))?;
    emit(
        &result,
        args.out.as_deref(),
        manifest("solve", args, Some(&inst), started),
    )?;
    Ok(if result.is_converged() {
        EXIT_OK
    } else {
        eprintln!("solve finished with status {:?}", result.status);
        EXIT_NOT_CONVERGED
    })
}

pub fn verify(args: &VerifyArgs) -> CmdResult {
    let started = Instant::now();
    let inst = load_instance(&args.input)?;
    let u = load_vector(&args.solution)?;
    let cert = certificate::verify(&inst, &u, args.tol_norm, args.tol_margin);
    emit(&cert, None, manifest("verify", args, Some(&inst), started))?;
    Ok(if cert.passed() { EXIT_OK } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct PPrimeReport {
    j: usize,
    raw: Complex,
    closed_form: Complex,
    abs_diff: f64,
    residual: f64,
    derivative_factor: f64,
}

#[derive(Serialize)]
struct CircleReport {
    j: usize,
    center: Complex,
    radius: f64,
}

pub fn diag(args: &DiagArgs) -> CmdResult {
    let started = Instant::now();
    let inst = load_instance(&args.input)?;
    let u = load_vector(&args.u)?;
    if u.dim() != inst.d {
        return Err(CliError::invalid(format!(
            "vector has dimension {}, instance has d = {}",
            u.dim(),
            inst.d
        )));
    }
    if args.j == 0 || args.j > inst.n() {
        return Err(CliError::invalid(format!(
            "--j must lie in 1..={} (got {})",
            inst.n(),
            args.j
        )));
    }
    let j = args.j - 1;
    let payload: Value = match args.what {
        DiagWhat::Pprime => {
            let raw = diagnostics::p_prime_zero_raw(&inst, &u, j)?;
            let closed_form = diagnostics::p_prime_zero_stationary(&inst, &u, j)?;
            let r = inst.vector(j).inner(&u)?.abs();
            let report = PPrimeReport {
                j: args.j,
                raw,
                closed_form,
                abs_diff: (raw - closed_form).abs(),
                residual: solver::residual(&inst, &u).unwrap_or(f64::INFINITY),
                derivative_factor: diagnostics::stationary_derivative_factor(inst.n(), r),
            };
            serde_json::to_value(report).expect("plain data")
        }
        DiagWhat::Circle => {
            let spec = diagnostics::circle_of(&u, &inst, j)?;
            serde_json::to_value(CircleReport {
                j: args.j,
                center: spec.center,
                radius: spec.radius,
            })
            .expect("plain data")
        }
        DiagWhat::Probe => {
            let variant = match args.variant {
                VariantArg::Holomorphic => ProbeVariant::Holomorphic,
                VariantArg::Weighted => ProbeVariant::Weighted,
                VariantArg::Auto if inst.is_equal_weight() => ProbeVariant::Holomorphic,
                VariantArg::Auto => ProbeVariant::Weighted,
            };
            let options = ProbeOptions {
                boundary_samples: args.boundary_samples,
                interior_samples: args.interior_samples,
                variant,
                exec: Exec::Sequential,
            };
            let report = diagnostics::max_modulus_probe(
                &inst,
                &u,
                j,
                &options,
                &mut RngState::new(args.seed),
            )?;
            serde_json::to_value(report).expect("plain data")
        }
    };
    // serde_json::Value maps non-finite floats to null already
    emit(&payload, None, manifest("diag", args, Some(&inst), started))?;
    Ok(EXIT_OK)
}

pub fn oracle(args: &OracleArgs) -> CmdResult {
    let started = Instant::now();
    let inst = load_instance(&args.input)?;
    let exec = Exec::for_threads(args.threads);
    let result = exec::with_threads(args.threads, || match (args.grid, args.samples) {
        (Some(grid), _) => oracle::brute_force_d2(&inst, grid, exec),
        (None, Some(samples)) => oracle::random_restart_oracle(&inst, samples, args.seed, exec),
        (None, None) => unreachable!("clap enforces one budget flag"),
    })?;
    emit(
        &result,
        args.out.as_deref(),
        manifest("oracle", args, Some(&inst), started),
    )?;
    Ok(EXIT_OK)
}
