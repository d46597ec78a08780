//! The `jcm` command-line front end.
//!
//! Every subcommand renders its artifact to a string first and writes it
//! once, so identical configurations give byte-identical files. Exit codes:
//! 0 success, 1 failed check or I/O error, 2 usage or input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coherent::{
    completeness_check, jcm_coherent, nats_to_bits, CoherentLabel, SpinCoherentLabel,
};
use crate::diagonalize::{dressed_ket, DressedLabel, Parity};
use crate::dynamics::{evolve, spectrum_report, EvolutionSpec, InitialState, Picture};
use crate::model::JcmParams;
use crate::par;
use crate::space::{Atom, BareLabel, Cutoff, C64};
use crate::verify::{run_suite, CheckResult};
use crate::JcmError;

pub const DEFAULT_NMAX: usize = 32;
pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_OMEGA: f64 = 10.0;
pub const DEFAULT_TMAX: f64 = 10.0;
pub const DEFAULT_STEPS: usize = 1001;
/// Tolerance of the completeness subcommand when `--tolerance` is absent.
pub const COMPLETENESS_TOL: f64 = 1e-9;

pub const INITIAL_GRAMMAR: &str =
    "bare:<g|e>:<n> | coh:<+|->:<re>,<im> | spin:<n>:<re>,<im> | barecoh:<g|e>:<re>,<im>";

#[derive(Debug, Parser)]
#[command(name = "jcm", version, about = "Jaynes-Cummings model toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Photon-number cutoff [default: 32]
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Coupling λ [default: 1]
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Field frequency ω [default: 10]
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Replace every pinned check tolerance with this value
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format [default: json for verify and completeness, csv otherwise]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for the numerical core
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// File of `key = value` lines; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EntropyUnits {
    Bits,
    Nats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PictureArg {
    Interaction,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Dressed,
    Bare,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form dressed energies against a dense eigensolve
    Spectrum {
        /// Report energies divided by λ
        #[arg(long = "lambda-units")]
        lambda_units: bool,
    },
    /// Run every registered identity check
    Verify,
    /// Evolve an initial state and write the observable trace
    Evolve {
        /// Initial state: bare:<g|e>:<n> | coh:<+|->:<re>,<im> | spin:<n>:<re>,<im> | barecoh:<g|e>:<re>,<im>
        #[arg(allow_hyphen_values = true)]
        initial: String,
        /// Final time [default: 10]
        #[arg(long)]
        tmax: Option<f64>,
        /// Number of samples including t = 0 [default: 1001]
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_enum, default_value = "interaction")]
        picture: PictureArg,
        #[arg(long = "entropy-units", value_enum, default_value = "bits")]
        entropy_units: EntropyUnits,
    },
    /// Amplitudes of a JCM coherent state
    Coherent {
        /// Complex amplitude as re,im
        #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
        alpha: String,
        /// + or -
        #[arg(long, allow_hyphen_values = true, default_value = "+")]
        parity: String,
        #[arg(long, value_enum, default_value = "dressed")]
        basis: BasisArg,
    },
    /// Resolution-of-identity residual of the coherent-state quadrature
    Completeness {
        #[arg(long, default_value_t = 6)]
        probe: usize,
        #[arg(long, default_value_t = 32)]
        radial: usize,
        #[arg(long, default_value_t = 64)]
        angular: usize,
    },
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandConfig,
    pub n_max: usize,
    pub lambda: f64,
    pub omega: f64,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandConfig {
    Spectrum {
        lambda_units: bool,
    },
    Verify,
    Evolve {
        initial: InitialState,
        t_max: f64,
        steps: usize,
        picture: Picture,
        entropy_units: EntropyUnits,
    },
    Coherent {
        label: CoherentLabel,
        basis: BasisArg,
    },
    Completeness {
        probe: usize,
        radial: usize,
        angular: usize,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
}

impl From<JcmError> for CliError {
    fn from(e: JcmError) -> Self {
        CliError::Usage(e.to_string())
    }
}

struct Outcome {
    body: String,
    summary: Option<String>,
    failed: bool,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let cfg = match resolve(cli) {
        Ok(cfg) => cfg,
        Err(e) => return report(e, stderr),
    };
    match execute(&cfg) {
        Ok(outcome) => {
            if let Err(e) = emit(&cfg, &outcome, stdout) {
                return report(e, stderr);
            }
            if let Some(s) = &outcome.summary {
                let _ = writeln!(stderr, "{s}");
            }
            i32::from(outcome.failed)
        }
        Err(e) => report(e, stderr),
    }
}

fn report(e: CliError, stderr: &mut dyn Write) -> i32 {
    match e {
        CliError::Usage(m) => {
            let _ = writeln!(stderr, "error: {m}");
            2
        }
        CliError::Io(m) => {
            let _ = writeln!(stderr, "error: {m}");
            1
        }
    }
}

fn emit(cfg: &RunConfig, outcome: &Outcome, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(outcome.body.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Values read from a config file.
#[derive(Debug, Default, Clone, PartialEq)]
struct FileConfig {
    nmax: Option<usize>,
    lambda: Option<f64>,
    omega: Option<f64>,
    tolerance: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
    tmax: Option<f64>,
    steps: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("config line {line}: invalid value {v:?} for {key}")))
}

fn parse_config(text: &str) -> Result<FileConfig, CliError> {
    let mut fc = FileConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {line_no}: expected key = value")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "nmax" | "n_max" => fc.nmax = Some(parse_value(key, value, line_no)?),
            "lambda" => fc.lambda = Some(parse_value(key, value, line_no)?),
            "omega" => fc.omega = Some(parse_value(key, value, line_no)?),
            "tolerance" => fc.tolerance = Some(parse_value(key, value, line_no)?),
            "out" => fc.out = Some(PathBuf::from(value)),
            "format" => {
                fc.format = Some(Format::from_str(value, true).map_err(|_| {
                    CliError::Usage(format!("config line {line_no}: format must be csv or json"))
                })?)
            }
            "threads" => fc.threads = Some(parse_value(key, value, line_no)?),
            "tmax" => fc.tmax = Some(parse_value(key, value, line_no)?),
            "steps" => fc.steps = Some(parse_value(key, value, line_no)?),
            other => {
                return Err(CliError::Usage(format!("config line {line_no}: unknown key {other:?}")))
            }
        }
    }
    Ok(fc)
}

fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let g = cli.global;
    let file = match &g.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };
    let n_max = g.nmax.or(file.nmax).unwrap_or(DEFAULT_NMAX);
    let lambda = g.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA);
    let omega = g.omega.or(file.omega).unwrap_or(DEFAULT_OMEGA);
    let tolerance = g.tolerance.or(file.tolerance);
    if let Some(t) = tolerance {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Usage(format!("tolerance must be finite and nonnegative (got {t})")));
        }
    }
    let threads = g.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }

    let command = match cli.command {
        Command::Spectrum { lambda_units } => CommandConfig::Spectrum { lambda_units },
        Command::Verify => CommandConfig::Verify,
        Command::Evolve {
            initial,
            tmax,
            steps,
            picture,
            entropy_units,
        } => CommandConfig::Evolve {
            initial: parse_initial(&initial)?,
            t_max: tmax.or(file.tmax).unwrap_or(DEFAULT_TMAX),
            steps: steps.or(file.steps).unwrap_or(DEFAULT_STEPS),
            picture: match picture {
                PictureArg::Interaction => Picture::Interaction,
                PictureArg::Full => Picture::Full,
            },
            entropy_units,
        },
        Command::Coherent {
            alpha,
            parity,
            basis,
        } => CommandConfig::Coherent {
            label: CoherentLabel::new(
                parse_complex(&alpha).map_err(CliError::Usage)?,
                parse_parity(&parity).map_err(CliError::Usage)?,
            ),
            basis,
        },
        Command::Completeness {
            probe,
            radial,
            angular,
        } => CommandConfig::Completeness {
            probe,
            radial,
            angular,
        },
    };

    Ok(RunConfig {
        command,
        n_max,
        lambda,
        omega,
        tolerance,
        out: g.out.or(file.out),
        format: g.format.or(file.format),
        threads,
    })
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected <re>,<im>, got {s:?}"))?;
    let re: f64 = re.trim().parse().map_err(|_| format!("invalid real part {re:?}"))?;
    let im: f64 = im.trim().parse().map_err(|_| format!("invalid imaginary part {im:?}"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(format!("complex value must be finite, got {s:?}"));
    }
    Ok(C64::new(re, im))
}

fn parse_parity(s: &str) -> Result<Parity, String> {
    match s {
        "+" => Ok(Parity::Plus),
        "-" => Ok(Parity::Minus),
        _ => Err(format!("parity must be + or -, got {s:?}")),
    }
}

fn parse_atom(s: &str) -> Result<Atom, String> {
    match s {
        "g" => Ok(Atom::Ground),
        "e" => Ok(Atom::Excited),
        _ => Err(format!("atom must be g or e, got {s:?}")),
    }
}

/// Parses an initial-state string such as `bare:e:0` or `coh:+:1.5,-0.5`.
pub fn parse_initial(s: &str) -> Result<InitialState, InitialSpecError> {
    let fail = |why: String| InitialSpecError(format!("{why}; expected {INITIAL_GRAMMAR}"));
    let mut parts = s.splitn(3, ':');
    let kind = parts.next().unwrap_or("");
    let a = parts.next().ok_or_else(|| fail(format!("malformed initial state {s:?}")))?;
    let b = parts.next().ok_or_else(|| fail(format!("malformed initial state {s:?}")))?;
    match kind {
        "bare" => {
            let atom = parse_atom(a).map_err(fail)?;
            let n: usize = b.parse().map_err(|_| fail(format!("invalid photon number {b:?}")))?;
            Ok(InitialState::Bare(BareLabel { atom, n }))
        }
        "coh" => {
            let parity = parse_parity(a).map_err(fail)?;
            let alpha = parse_complex(b).map_err(fail)?;
            if parity == Parity::Minus && alpha == C64::new(0.0, 0.0) {
                return Err(InitialSpecError(JcmError::ForbiddenLabel(0).to_string()));
            }
            Ok(InitialState::Coherent(CoherentLabel::new(alpha, parity)))
        }
        "spin" => {
            let n: usize = a.parse().map_err(|_| fail(format!("invalid photon number {a:?}")))?;
            let zeta = parse_complex(b).map_err(fail)?;
            Ok(InitialState::SpinCoherent(SpinCoherentLabel::new(zeta, n)))
        }
        "barecoh" => {
            let atom = parse_atom(a).map_err(fail)?;
            let alpha = parse_complex(b).map_err(fail)?;
            Ok(InitialState::BareCoherent { atom, alpha })
        }
        _ => Err(fail(format!("unknown initial state kind {kind:?}"))),
    }
}

/// Rejected initial-state string; the message lists the grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialSpecError(pub String);

impl std::fmt::Display for InitialSpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<InitialSpecError> for CliError {
    fn from(e: InitialSpecError) -> Self {
        CliError::Usage(e.0)
    }
}

fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let c = Cutoff::new(cfg.n_max)?;
    let p = JcmParams::new(cfg.omega, cfg.lambda)?;
    let work = || dispatch(cfg, c, p);
    match cfg.threads {
        Some(t) => par::with_threads(t, work).map_err(CliError::Usage)?,
        None => work(),
    }
}

fn dispatch(cfg: &RunConfig, c: Cutoff, p: JcmParams) -> Result<Outcome, CliError> {
    match &cfg.command {
        CommandConfig::Spectrum { lambda_units } => cmd_spectrum(cfg, c, p, *lambda_units),
        CommandConfig::Verify => Ok(cmd_verify(cfg, c, p)),
        CommandConfig::Evolve {
            initial,
            t_max,
            steps,
            picture,
            entropy_units,
        } => {
            let spec = EvolutionSpec {
                initial: initial.clone(),
                params: p,
                t_max: *t_max,
                steps: *steps,
                picture: *picture,
            };
            cmd_evolve(cfg, &spec, *entropy_units, c)
        }
        CommandConfig::Coherent { label, basis } => cmd_coherent(cfg, *label, *basis, c),
        CommandConfig::Completeness {
            probe,
            radial,
            angular,
        } => cmd_completeness(cfg, c, *probe, *radial, *angular),
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn cmd_spectrum(cfg: &RunConfig, c: Cutoff, p: JcmParams, lambda_units: bool) -> Result<Outcome, CliError> {
    let mut report = spectrum_report(p, c);
    if lambda_units {
        for r in &mut report.rows {
            r.energy /= p.lambda();
            r.numeric_energy /= p.lambda();
            r.abs_err /= p.lambda();
        }
        report.max_pairing_error /= p.lambda();
    }
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("N,parity,energy,numeric_energy,abs_err\n");
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.n,
                    r.parity,
                    fmt_f64(r.energy),
                    fmt_f64(r.numeric_energy),
                    fmt_f64(r.abs_err)
                );
            }
            s
        }
        Format::Json => to_json(&report.rows),
    };
    Ok(Outcome {
        body,
        summary: Some(format!(
            "{} dressed levels, max |closed - numeric| = {:.3e}",
            report.rows.len(),
            report.max_pairing_error
        )),
        failed: false,
    })
}

fn cmd_verify(cfg: &RunConfig, c: Cutoff, p: JcmParams) -> Outcome {
    let results: Vec<CheckResult> = run_suite(c, p, cfg.tolerance);
    let passed = results.iter().filter(|r| r.pass).count();
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&results),
        Format::Csv => {
            let mut s = String::from("check_name,residual,tolerance,pass\n");
            for r in &results {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    r.check_name.replace(',', ";"),
                    fmt_f64(r.residual),
                    fmt_f64(r.tolerance),
                    r.pass
                );
            }
            s
        }
    };
    let mut summary = format!("{passed}/{} checks passed", results.len());
    for r in results.iter().filter(|r| !r.pass) {
        let _ = write!(
            summary,
            "\nFAIL {}: residual {:.3e} > tolerance {:.3e}",
            r.check_name, r.residual, r.tolerance
        );
    }
    Outcome {
        body,
        summary: Some(summary),
        failed: passed != results.len(),
    }
}

fn cmd_evolve(
    cfg: &RunConfig,
    spec: &EvolutionSpec,
    units: EntropyUnits,
    c: Cutoff,
) -> Result<Outcome, CliError> {
    let trace = evolve(spec, c)?;
    let entropy: Vec<f64> = match units {
        EntropyUnits::Bits => trace.entropy.iter().map(|&s| nats_to_bits(s)).collect(),
        EntropyUnits::Nats => trace.entropy.clone(),
    };
    let entropy_col = match units {
        EntropyUnits::Bits => "entropy_bits",
        EntropyUnits::Nats => "entropy_nats",
    };
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = format!("t,inversion,p_excited,{entropy_col},norm_drift\n");
            for (k, s_k) in entropy.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    fmt_f64(trace.times[k]),
                    fmt_f64(trace.inversion[k]),
                    fmt_f64(trace.p_excited[k]),
                    fmt_f64(*s_k),
                    fmt_f64(trace.norm_drift[k])
                );
            }
            s
        }
        Format::Json => {
            let mut v = serde_json::json!({
                "t": trace.times,
                "inversion": trace.inversion,
                "p_excited": trace.p_excited,
                "norm_drift": trace.norm_drift,
            });
            v[entropy_col] = serde_json::json!(entropy);
            to_json(&v)
        }
    };
    let final_drift = trace.norm_drift.last().copied().unwrap_or(0.0);
    let max_inv = trace.inversion.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    Ok(Outcome {
        body,
        summary: Some(format!(
            "{} samples, final norm drift {:.3e}, max |inversion| {:.6}",
            trace.times.len(),
            final_drift,
            max_inv
        )),
        failed: false,
    })
}

fn cmd_coherent(
    cfg: &RunConfig,
    label: CoherentLabel,
    basis: BasisArg,
    c: Cutoff,
) -> Result<Outcome, CliError> {
    let ket = jcm_coherent(label, c)?;
    let format = cfg.format.unwrap_or(Format::Csv);
    let body = match basis {
        BasisArg::Dressed => {
            let first = match label.parity {
                Parity::Plus => 0,
                Parity::Minus => 1,
            };
            let mut rows = Vec::new();
            for n in first..=c.n_max() {
                let l = DressedLabel::new(n, label.parity)?;
                rows.push((n, dressed_ket(l, c)?.inner(&ket)));
            }
            match format {
                Format::Csv => {
                    let mut s = String::from("n,parity,re,im\n");
                    for (n, z) in &rows {
                        let _ = writeln!(s, "{n},{},{},{}", label.parity, fmt_f64(z.re), fmt_f64(z.im));
                    }
                    s
                }
                Format::Json => {
                    let v: Vec<_> = rows
                        .iter()
                        .map(|(n, z)| {
                            serde_json::json!({"n": n, "parity": label.parity, "re": z.re, "im": z.im})
                        })
                        .collect();
                    to_json(&v)
                }
            }
        }
        BasisArg::Bare => {
            let amps = ket.amplitudes();
            match format {
                Format::Csv => {
                    let mut s = String::from("basis_index,re,im\n");
                    for (i, z) in amps.iter().enumerate() {
                        let _ = writeln!(s, "{i},{},{}", fmt_f64(z.re), fmt_f64(z.im));
                    }
                    s
                }
                Format::Json => {
                    let v: Vec<_> = amps
                        .iter()
                        .enumerate()
                        .map(|(i, z)| serde_json::json!({"basis_index": i, "re": z.re, "im": z.im}))
                        .collect();
                    to_json(&v)
                }
            }
        }
    };
    Ok(Outcome {
        body,
        summary: None,
        failed: false,
    })
}

#[derive(serde::Serialize)]
struct CompletenessOutput {
    probe_dim: usize,
    radial_nodes: usize,
    angular_nodes: usize,
    max_residual: f64,
    vacuum_diagonal: f64,
    cross_parity: f64,
    tolerance: f64,
    pass: bool,
}

fn cmd_completeness(
    cfg: &RunConfig,
    c: Cutoff,
    probe: usize,
    radial: usize,
    angular: usize,
) -> Result<Outcome, CliError> {
    let r = completeness_check(c, radial, angular, probe)?;
    let tolerance = cfg.tolerance.unwrap_or(COMPLETENESS_TOL);
    let out = CompletenessOutput {
        probe_dim: r.probe_dim,
        radial_nodes: r.radial_nodes,
        angular_nodes: r.angular_nodes,
        max_residual: r.max_residual,
        vacuum_diagonal: r.vacuum_diagonal,
        cross_parity: r.cross_parity,
        tolerance,
        pass: r.max_residual <= tolerance,
    };
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&out),
        Format::Csv => format!(
            "probe_dim,radial_nodes,angular_nodes,max_residual,vacuum_diagonal,cross_parity,tolerance,pass\n{},{},{},{},{},{},{},{}\n",
            out.probe_dim,
            out.radial_nodes,
            out.angular_nodes,
            fmt_f64(out.max_residual),
            fmt_f64(out.vacuum_diagonal),
            fmt_f64(out.cross_parity),
            fmt_f64(out.tolerance),
            out.pass
        ),
    };
    Ok(Outcome {
        body,
        summary: Some(format!(
            "completeness residual {:.3e} (tolerance {:.1e})",
            out.max_residual, tolerance
        )),
        failed: !out.pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parses_keys_and_comments() {
        let fc = parse_config("# defaults\nnmax = 12\nomega=5 # trailing\n\nformat = json\n").unwrap();
        assert_eq!(fc.nmax, Some(12));
        assert_eq!(fc.omega, Some(5.0));
        assert_eq!(fc.format, Some(Format::Json));
        assert_eq!(fc.lambda, None);
    }

    #[test]
    fn config_file_rejects_unknown_keys_and_bad_values() {
        assert!(parse_config("colour = red").is_err());
        assert!(parse_config("nmax = lots").is_err());
        assert!(parse_config("nmax 3").is_err());
    }

    #[test]
    fn initial_spec_grammar() {
        assert_eq!(
            parse_initial("bare:e:0").unwrap(),
            InitialState::Bare(BareLabel::e(0))
        );
        assert_eq!(
            parse_initial("coh:-:1.5,-2").unwrap(),
            InitialState::Coherent(CoherentLabel::new(C64::new(1.5, -2.0), Parity::Minus))
        );
        assert_eq!(
            parse_initial("spin:3:0.5,0").unwrap(),
            InitialState::SpinCoherent(SpinCoherentLabel::new(C64::new(0.5, 0.0), 3))
        );
        assert_eq!(
            parse_initial("barecoh:g:0,2").unwrap(),
            InitialState::BareCoherent {
                atom: Atom::Ground,
                alpha: C64::new(0.0, 2.0)
            }
        );
    }

    #[test]
    fn malformed_initial_specs_list_the_grammar() {
        for bad in ["", "bare:x:0", "bare:e", "coh:*:1,0", "coh:+:1", "spin:a:0,0", "fock:e:1"] {
            let e = parse_initial(bad).unwrap_err();
            assert!(e.0.contains(INITIAL_GRAMMAR), "{bad}: {e}");
        }
    }

    #[test]
    fn vacuum_minus_coherent_state_is_rejected() {
        let e = parse_initial("coh:-:0,0").unwrap_err();
        assert!(e.0.contains("does not exist"));
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = fmt_f64(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
    }
}
