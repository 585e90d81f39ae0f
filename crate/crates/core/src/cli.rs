//! Command-line front end.
//!
//! Every subcommand writes only to its `--out` path (plus a `<out>.json`
//! provenance sidecar for CSV outputs). Provenance records the fully resolved
//! argument vector, minus `--out`, `--config` and `--workers`, so re-running
//! with those arguments reproduces the file byte for byte.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::dynamics::{hamiltonian_at, EvolutionConfig, DEFAULT_DT};
use crate::edgestates::Branch;
use crate::ensemble::{
    collapse_axis, default_w_grid, gap_scan, run_ensemble, EnsembleResult, EnsembleSpec, DEFAULT_SAMPLES,
    SEED_RULE,
};
use crate::error::Error;
use crate::hamiltonian::{linspace, spectrum_sweep};
use crate::model::{sample_disorder, ChainSpec};
use crate::protocols::{fidelity, full_state_fidelity, protocol_gap, transfer, Protocol, TransferReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Coupling scale of the superconducting chain, `g1/2π` in MHz.
pub const DEFAULT_G1_MHZ: f64 = 250.0;

#[derive(Debug, Parser)]
#[command(name = "topotransfer", version, about = "Edge-state transfer in SSH-type qubit chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-excitation spectrum versus θ.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// One adiabatic transfer run.
    #[command(args_override_self = true)]
    Transfer(TransferArgs),
    /// Disorder-averaged fidelity versus W.
    #[command(args_override_self = true)]
    Ensemble(EnsembleArgs),
    /// Bulk–edge gap versus chain length.
    #[command(name = "gap-scan", args_override_self = true)]
    GapScan(GapScanArgs),
    /// Fidelity versus lg(W/Δ) for several chain lengths.
    #[command(args_override_self = true)]
    Collapse(CollapseArgs),
    /// Regenerate every figure's data set into a timestamped directory.
    #[command(args_override_self = true)]
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args, Clone)]
struct ChainArgs {
    /// Unit-cell period.
    #[arg(long = "p", default_value_t = 2)]
    p: usize,
    #[arg(long)]
    qubits: usize,
    /// Defaults to 1 for p = 2 and 0 otherwise.
    #[arg(long, allow_hyphen_values = true)]
    g0: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    g1: f64,
}

impl ChainArgs {
    fn spec(&self) -> Result<ChainSpec, Error> {
        let g0 = self.g0.unwrap_or(if self.p == 2 { 1.0 } else { 0.0 });
        ChainSpec::new(self.p, self.qubits, g0, self.g1)
    }
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta_min: f64,
    #[arg(long, default_value_t = 2.0 * PI, allow_hyphen_values = true)]
    theta_max: f64,
    #[arg(long, default_value_t = 200)]
    theta_steps: usize,
    #[arg(long)]
    disorder_w: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TransferArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value = "plus")]
    branch: Branch,
    #[arg(long)]
    disorder_w: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Trajectory snapshot stride in steps; 0 disables the trajectory file.
    #[arg(long, default_value_t = 0)]
    record_every: usize,
    /// Trajectory CSV path (default `<out>.trajectory.csv`).
    #[arg(long)]
    trajectory_out: Option<PathBuf>,
    /// Skip the dt/2 convergence re-run.
    #[arg(long)]
    skip_convergence: bool,
    /// Input amplitude on |e⟩ for the full-state diagnostic.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Input amplitude on |g⟩ for the full-state diagnostic.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[command(flatten)]
    physical: PhysicalArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Clone)]
struct PhysicalArgs {
    /// Annotate output with physical times for the given coupling scale.
    #[arg(long)]
    physical: bool,
    #[arg(long, default_value_t = DEFAULT_G1_MHZ)]
    g1_mhz: f64,
}

#[derive(Debug, Args, Clone)]
struct WGridArgs {
    #[arg(long)]
    w_min: Option<f64>,
    #[arg(long)]
    w_max: Option<f64>,
    #[arg(long)]
    w_steps: Option<usize>,
}

#[derive(Debug, Args, Clone)]
struct SamplingArgs {
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[arg(long, default_value = "plus")]
    branch: Branch,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    omega: f64,
    #[command(flatten)]
    grid: WGridArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Include per-sample fidelities in the provenance sidecar.
    #[arg(long)]
    keep_samples: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GapScanArgs {
    #[arg(long = "p", default_value_t = 2)]
    p: usize,
    #[arg(long, value_delimiter = ',')]
    qubits_list: Vec<usize>,
    #[arg(long, default_value_t = 201)]
    theta_steps: usize,
    /// Defaults to the protocol's sweep start.
    #[arg(long, allow_hyphen_values = true)]
    theta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_max: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CollapseArgs {
    #[arg(long = "p", default_value_t = 2)]
    p: usize,
    #[arg(long, value_delimiter = ',')]
    qubits_list: Vec<usize>,
    /// One ramp rate per chain length.
    #[arg(long, value_delimiter = ',')]
    omega_list: Vec<f64>,
    #[command(flatten)]
    grid: WGridArgs,
    /// Sample W = Δ·10^x on a uniform x grid instead of a W grid.
    #[arg(long, allow_hyphen_values = true)]
    lg_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lg_max: Option<f64>,
    #[arg(long)]
    lg_steps: Option<usize>,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Parent directory; a `run-<unix time>` directory is created inside.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[arg(long)]
    workers: Option<usize>,
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERICAL, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidChain(_) | Error::InvalidArgument(_) | Error::LengthMismatch { .. } => {
                CliError::usage(e.to_string())
            }
            _ => CliError::numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::numerical(format!("i/o error: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

/// Entry point; `args` excludes the program name. Returns the exit code.
pub fn run(args: &[String]) -> i32 {
    match execute(args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn execute(args: &[String]) -> CliResult<()> {
    let expanded = expand_config(args)?;
    let argv = std::iter::once("topotransfer".to_string()).chain(expanded.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    Ok(())
                }
                _ => {
                    eprint!("{e}");
                    Err(CliError::usage("invalid arguments"))
                }
            };
        }
    };
    let provenance_args = provenance_args(&expanded);
    match cli.command {
        Command::Spectrum(a) => cmd_spectrum(&a, &provenance_args),
        Command::Transfer(a) => cmd_transfer(&a, &provenance_args),
        Command::Ensemble(a) => cmd_ensemble(&a, &provenance_args),
        Command::GapScan(a) => cmd_gap_scan(&a, &provenance_args),
        Command::Collapse(a) => cmd_collapse(&a, &provenance_args),
        Command::Reproduce(a) => cmd_reproduce(&a),
    }
}

/// Splices `key = value` lines of a `--config` file in front of the
/// command-line flags, which therefore take precedence.
fn expand_config(args: &[String]) -> CliResult<Vec<String>> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args.to_vec());
    };
    let (path, consumed) = match args[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => match args.get(pos + 1) {
            Some(p) => (p.clone(), 2),
            None => return Err(CliError::usage("--config needs a file path")),
        },
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::usage(format!("cannot read {path}: {e}")))?;
    let mut from_file = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => match line.split_once(char::is_whitespace) {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (line, "true"),
            },
        };
        if key.is_empty() {
            return Err(CliError::usage(format!("{path}:{}: missing key", lineno + 1)));
        }
        let flag = format!("--{}", key.trim_start_matches("--"));
        match value {
            "true" => from_file.push(flag),
            "false" => {}
            v => {
                from_file.push(flag);
                from_file.push(v.to_string());
            }
        }
    }

    let mut rest: Vec<String> = args[..pos].iter().chain(&args[pos + consumed..]).cloned().collect();
    // the subcommand stays first
    let insert_at = usize::from(!rest.is_empty() && !rest[0].starts_with('-'));
    rest.splice(insert_at..insert_at, from_file);
    Ok(rest)
}

/// Resolved arguments without output location, config path or worker count.
fn provenance_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip_next = false;
    for a in args {
        if skip_next {
            skip_next = false;
            continue;
        }
        if ["--out", "--workers", "--config", "--trajectory-out"].contains(&a.as_str()) {
            skip_next = true;
            continue;
        }
        if ["--out=", "--workers=", "--config=", "--trajectory-out="].iter().any(|p| a.starts_with(p)) {
            continue;
        }
        out.push(a.clone());
    }
    out
}

/// Full round-trip precision.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

/// `<out>.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn provenance(command: &str, args: &[String], extra: serde_json::Value) -> serde_json::Value {
    json!({
        "tool": "topotransfer",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "args": args,
        "units": "energies in g1, times in 1/g1, hbar = 1",
        "details": extra,
    })
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn protocol_for(p: usize, branch: Branch) -> CliResult<Protocol> {
    match p {
        2 => Ok(Protocol::SingleQubit),
        3 => Ok(Protocol::BellPair(branch)),
        _ => Err(CliError::usage(format!("transfer protocols exist for p = 2 and p = 3, got {p}"))),
    }
}

fn w_grid(grid: &WGridArgs, protocol: Protocol) -> CliResult<Vec<f64>> {
    if grid.w_min.is_none() && grid.w_max.is_none() && grid.w_steps.is_none() {
        return Ok(default_w_grid(protocol));
    }
    let default = default_w_grid(protocol);
    let lo = grid.w_min.unwrap_or(0.0);
    let hi = grid.w_max.unwrap_or(*default.last().unwrap_or(&1.0));
    let steps = grid.w_steps.unwrap_or(if lo == hi { 1 } else { default.len() });
    if steps == 0 || hi < lo || lo < 0.0 {
        return Err(CliError::usage(format!("invalid W grid [{lo}, {hi}] with {steps} steps")));
    }
    Ok(linspace(lo, hi, steps))
}

fn cmd_spectrum(a: &SpectrumArgs, args: &[String]) -> CliResult<()> {
    let spec = a.chain.spec()?;
    if a.theta_steps == 0 {
        return Err(CliError::usage("--theta-steps must be >= 1"));
    }
    let disorder = a.disorder_w.map(|w| sample_disorder(w, spec.bonds(), a.seed)).transpose()?;
    let grid = linspace(a.theta_min, a.theta_max, a.theta_steps);
    let spectra = spectrum_sweep(&spec, &grid, disorder.as_ref())?;

    let mut csv = String::from("theta");
    for k in 1..=spec.qubits {
        let _ = write!(csv, ",e_{k}");
    }
    csv.push('\n');
    for (theta, s) in grid.iter().zip(&spectra) {
        csv.push_str(&fmt_f64(*theta));
        for e in &s.eigenvalues {
            csv.push(',');
            csv.push_str(&fmt_f64(*e));
        }
        csv.push('\n');
    }
    write_file(&a.out, &csv)?;
    let prov = provenance(
        "spectrum",
        args,
        json!({ "chain": spec, "disorder": disorder }),
    );
    write_file(&sidecar_path(&a.out), &to_json(&prov)?)
}

/// Physical-unit annotation for `g1/2π = g1_mhz` MHz.
pub fn physical_annotation(g1_mhz: f64, t_final: f64, omega: f64) -> serde_json::Value {
    let g1_angular = 2.0 * PI * g1_mhz * 1e6;
    json!({
        "g1_over_2pi_mhz": g1_mhz,
        "g1_rad_per_s": g1_angular,
        "t_final_seconds": t_final / g1_angular,
        "omega_rad_per_s": omega * g1_angular,
    })
}

fn cmd_transfer(a: &TransferArgs, args: &[String]) -> CliResult<()> {
    let spec = a.chain.spec()?;
    let protocol = protocol_for(spec.period, a.branch)?;
    let disorder = a.disorder_w.map(|w| sample_disorder(w, spec.bonds(), a.seed)).transpose()?;
    let cfg = EvolutionConfig { dt: a.dt, record_every: a.record_every, convergence_check: !a.skip_convergence };
    let report = transfer(protocol, &spec, a.omega, disorder.as_ref(), &cfg)?;
    if report.adiabatic_margin >= 1.0 {
        eprintln!(
            "warning: sqrt(g1*omega)/gap = {:.3} >= 1; the ramp is not adiabatic",
            report.adiabatic_margin
        );
    }

    let mut doc = serde_json::to_value(&report).map_err(|e| CliError::numerical(e.to_string()))?;
    let obj = doc.as_object_mut().expect("report serializes to an object");
    if a.alpha.is_some() || a.beta.is_some() {
        let target = protocol.target_state(&spec)?;
        let traj_final = &report.trajectory.as_ref().map(|t| t.final_state.clone());
        let overlap = match traj_final {
            Some(f) => target.inner(f)?,
            None => {
                // the report drops the trajectory when not recording; rerun cheaply
                let cfg1 = EvolutionConfig { dt: a.dt, record_every: 0, convergence_check: false };
                let sched = protocol.schedule(a.omega)?;
                let psi0 = protocol.initial_state(&spec)?;
                let t = crate::dynamics::evolve(&spec, &sched, disorder.as_ref(), &psi0, &cfg1)?;
                target.inner(&t.final_state)?
            }
        };
        let full = full_state_fidelity(a.alpha.unwrap_or(1.0), a.beta.unwrap_or(0.0), overlap)?;
        obj.insert("full_state".into(), json!(full));
    }
    if a.physical.physical {
        obj.insert(
            "physical".into(),
            physical_annotation(a.physical.g1_mhz, report.t_final, report.omega),
        );
    }
    obj.insert("provenance".into(), provenance("transfer", args, json!({ "disorder": disorder })));
    write_file(&a.out, &to_json(&doc)?)?;

    if a.record_every > 0 {
        let path = a.trajectory_out.clone().unwrap_or_else(|| {
            let mut s = a.out.as_os_str().to_owned();
            s.push(".trajectory.csv");
            PathBuf::from(s)
        });
        write_file(&path, &trajectory_csv(&report, &spec, protocol, disorder.as_ref())?)?;
    }
    Ok(())
}

fn trajectory_csv(
    report: &TransferReport,
    spec: &ChainSpec,
    protocol: Protocol,
    disorder: Option<&crate::model::DisorderRealization>,
) -> CliResult<String> {
    let traj = report.trajectory.as_ref().ok_or_else(|| CliError::numerical("no trajectory recorded"))?;
    let schedule = protocol.schedule(report.omega)?;
    let target = protocol.target_state(spec)?;
    let mut csv = String::from("t,theta,norm,fidelity_to_target,edge_energy_expectation\n");
    for (t, psi) in traj.times.iter().zip(&traj.states) {
        let h = hamiltonian_at(spec, &schedule, disorder, *t)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(schedule.theta_at(*t)),
            fmt_f64(psi.norm()),
            fmt_f64(fidelity(&target, psi)?),
            fmt_f64(h.expectation(psi)),
        );
    }
    Ok(csv)
}

fn ensemble_csv(result: &EnsembleResult) -> String {
    let mut csv = String::from("w,mean_fidelity,std_dev\n");
    for p in &result.points {
        let _ = writeln!(csv, "{},{},{}", fmt_f64(p.w), fmt_f64(p.mean_fidelity), fmt_f64(p.std_dev));
    }
    csv
}

fn cmd_ensemble(a: &EnsembleArgs, args: &[String]) -> CliResult<()> {
    let chain = a.chain.spec()?;
    let protocol = protocol_for(chain.period, a.sampling.branch)?;
    let spec = EnsembleSpec {
        protocol,
        chain,
        omega: a.omega,
        w_grid: w_grid(&a.grid, protocol)?,
        samples: a.sampling.samples,
        master_seed: a.sampling.master_seed,
        dt: a.sampling.dt,
        keep_samples: a.keep_samples,
    };
    let result = run_ensemble(&spec, a.sampling.workers)?;
    write_file(&a.out, &ensemble_csv(&result))?;
    let prov = provenance("ensemble", args, json!({ "seed_rule": SEED_RULE, "result": result }));
    write_file(&sidecar_path(&a.out), &to_json(&prov)?)
}

fn cmd_gap_scan(a: &GapScanArgs, args: &[String]) -> CliResult<()> {
    let default_range = protocol_for(a.p, Branch::Plus)?.theta_range();
    let range = (a.theta_min.unwrap_or(default_range.0), a.theta_max.unwrap_or(default_range.1));
    if a.qubits_list.is_empty() {
        return Err(CliError::usage("--qubits-list is empty"));
    }
    let rows = gap_scan(a.p, &a.qubits_list, range, a.theta_steps);
    let mut csv = String::from("qubits,gap\n");
    for r in &rows {
        match (r.gap, &r.error) {
            (Some(g), _) => {
                let _ = writeln!(csv, "{},{}", r.qubits, fmt_f64(g));
            }
            (None, err) => {
                eprintln!("warning: M = {}: {}", r.qubits, err.as_deref().unwrap_or("failed"));
                let _ = writeln!(csv, "{},NaN", r.qubits);
            }
        }
    }
    write_file(&a.out, &csv)?;
    let prov = provenance("gap-scan", args, json!({ "theta_range": range, "rows": rows }));
    write_file(&sidecar_path(&a.out), &to_json(&prov)?)
}

fn cmd_collapse(a: &CollapseArgs, args: &[String]) -> CliResult<()> {
    if a.qubits_list.is_empty() || a.qubits_list.len() != a.omega_list.len() {
        return Err(CliError::usage("--qubits-list and --omega-list must be non-empty and of equal length"));
    }
    let protocol = protocol_for(a.p, a.sampling.branch)?;
    let lg_mode = a.lg_min.is_some() || a.lg_max.is_some() || a.lg_steps.is_some();
    let mut csv = String::from("qubits,lg_w_over_gap,mean_fidelity\n");
    let mut results = Vec::new();
    for (&m, &omega) in a.qubits_list.iter().zip(&a.omega_list) {
        let chain = crate::ensemble::protocol_chain(a.p, m)?;
        let grid = if lg_mode {
            let gap = protocol_gap(protocol, &chain)?;
            let (lo, hi) = (a.lg_min.unwrap_or(-2.0), a.lg_max.unwrap_or(0.0));
            linspace(lo, hi, a.lg_steps.unwrap_or(9)).iter().map(|x| gap * 10f64.powf(*x)).collect()
        } else {
            w_grid(&a.grid, protocol)?
        };
        let spec = EnsembleSpec {
            protocol,
            chain,
            omega,
            w_grid: grid,
            samples: a.sampling.samples,
            master_seed: a.sampling.master_seed,
            dt: a.sampling.dt,
            keep_samples: false,
        };
        let result = run_ensemble(&spec, a.sampling.workers)?;
        let skipped = result.points.iter().filter(|p| p.w == 0.0).count();
        if skipped > 0 {
            eprintln!("note: M = {m}: {skipped} W = 0 point(s) have no log-axis image and were skipped");
        }
        for c in collapse_axis(&result)? {
            let _ = writeln!(csv, "{},{},{}", m, fmt_f64(c.x), fmt_f64(c.mean_fidelity));
        }
        results.push(result);
    }
    write_file(&a.out, &csv)?;
    let prov = provenance("collapse", args, json!({ "seed_rule": SEED_RULE, "results": results }));
    write_file(&sidecar_path(&a.out), &to_json(&prov)?)
}

fn cmd_reproduce(a: &ReproduceArgs) -> CliResult<()> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let dir = a.out.join(format!("run-{stamp}"));
    fs::create_dir_all(&dir)?;
    let out = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let samples = a.samples.to_string();
    let seed = a.master_seed.to_string();
    let mut common = vec!["--samples".to_string(), samples.clone(), "--master-seed".into(), seed.clone()];
    if let Some(w) = a.workers {
        common.extend(["--workers".to_string(), w.to_string()]);
    }

    let mut jobs: Vec<Vec<String>> = Vec::new();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    jobs.push([s(&["spectrum", "--p", "2", "--qubits", "9", "--out"]), vec![out("fig2a_spectrum_p2_m9.csv")]].concat());
    for (w, tag) in [("0.6", "w0.6"), ("0.8", "w0.8")] {
        jobs.push(
            [
                s(&["spectrum", "--p", "2", "--qubits", "9", "--disorder-w", w, "--seed", &seed, "--out"]),
                vec![out(&format!("fig2cd_spectrum_p2_m9_{tag}.csv"))],
            ]
            .concat(),
        );
    }
    for (m, om) in [("9", "0.04"), ("15", "0.02"), ("21", "0.01")] {
        jobs.push(
            [
                s(&["ensemble", "--p", "2", "--qubits", m, "--omega", om, "--out"]),
                vec![out(&format!("fig2b_ensemble_p2_m{m}.csv"))],
                common.clone(),
            ]
            .concat(),
        );
    }
    jobs.push([s(&["spectrum", "--p", "3", "--qubits", "8", "--g0", "0", "--out"]), vec![out("fig3a_spectrum_p3_m8.csv")]].concat());
    for (m, om) in [("8", "0.01"), ("14", "0.004"), ("20", "0.001")] {
        jobs.push(
            [
                s(&["ensemble", "--p", "3", "--qubits", m, "--omega", om, "--out"]),
                vec![out(&format!("fig3b_ensemble_p3_m{m}.csv"))],
                common.clone(),
            ]
            .concat(),
        );
    }
    jobs.push([s(&["gap-scan", "--p", "2", "--qubits-list", "9,15,21,31,41,51", "--out"]), vec![out("fig4a_gap_p2.csv")]].concat());
    jobs.push([s(&["gap-scan", "--p", "3", "--qubits-list", "8,14,20,26,32,38,50", "--out"]), vec![out("fig4a_gap_p3.csv")]].concat());
    jobs.push(
        [
            s(&["collapse", "--p", "2", "--qubits-list", "9,15,21", "--omega-list", "0.04,0.02,0.01", "--lg-min", "-2", "--lg-max", "0.5", "--lg-steps", "11", "--out"]),
            vec![out("fig4b_collapse_p2.csv")],
            common.clone(),
        ]
        .concat(),
    );
    jobs.push(
        [
            s(&["collapse", "--p", "3", "--qubits-list", "8,14,20", "--omega-list", "0.01,0.004,0.001", "--lg-min", "-2", "--lg-max", "0.5", "--lg-steps", "11", "--out"]),
            vec![out("fig4b_collapse_p3.csv")],
            common,
        ]
        .concat(),
    );

    for job in jobs {
        eprintln!("reproduce: {}", job.join(" "));
        execute(&job)?;
    }
    println!("{}", dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn provenance_strips_locations() {
        let args = sv(&["ensemble", "--qubits", "9", "--out", "x.csv", "--workers", "8", "--omega", "0.1"]);
        assert_eq!(provenance_args(&args), sv(&["ensemble", "--qubits", "9", "--omega", "0.1"]));
    }

    #[test]
    fn config_lines_go_before_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.conf");
        fs::write(&cfg, "# demo\nqubits = 9\nomega 0.04\nkeep-samples = true\nphysical = false\n").unwrap();
        let args = sv(&["ensemble", "--config", cfg.to_str().unwrap(), "--qubits", "15"]);
        let out = expand_config(&args).unwrap();
        assert_eq!(out, sv(&["ensemble", "--qubits", "9", "--omega", "0.04", "--keep-samples", "--qubits", "15"]));
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, PI, -1e-300, 2.0f64.sqrt()] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn physical_times_at_250_mhz() {
        let p2 = physical_annotation(250.0, PI / 0.01, 0.01);
        assert!((p2["t_final_seconds"].as_f64().unwrap() - 0.2e-6).abs() < 1e-12);
        let p3 = physical_annotation(250.0, (PI / 3.0) / 0.001, 0.001);
        assert!((p3["t_final_seconds"].as_f64().unwrap() - 0.6667e-6).abs() < 1e-9);
    }
}
