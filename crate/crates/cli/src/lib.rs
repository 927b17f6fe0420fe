//! The `krein` command line: matrix JSON in, JSON or CSV reports out.
//!
//! Exit codes: 0 everything passed, 1 an inequality was violated, 2 an input
//! was outside a theorem's hypothesis, 3 the input itself was invalid.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use krein_core::geneig::solve_pencil;
use krein_core::krein::{decompose_from_basis, decompose_spectral};
use krein_core::ops::krein_adjoint;
use krein_core::sweep::{run_sweep, SweepConfig, TrialOutcome};
use krein_core::uncertainty::{verify_relation, CommutatorForm, CommutatorSpec, RelationId, StateVector, Verdict};
use krein_core::wavepacket::{gaussian_widths, required_half_width, sampled_packet, Grid, WavePacketParams};
use krein_core::{GramForm, Matrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Violation = 1,
    HypothesisViolation = 2,
    InputError = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Parser, Debug)]
#[command(name = "krein", version, about = "Krein-space linear algebra and uncertainty-relation checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Output {
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Canonical decomposition and fundamental symmetry of a Gram matrix.
    Decompose {
        #[arg(long)]
        gram: PathBuf,
        /// Columns spanning the positive subspace (oblique decomposition).
        #[arg(long, requires = "neg")]
        pos: Option<PathBuf>,
        /// Columns spanning the negative subspace.
        #[arg(long, requires = "pos")]
        neg: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Krein adjoint `J A^H J`.
    Adjoint {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        symmetry: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Generalized eigenproblem `Ax = lambda Bx`.
    Geneig {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "B")]
        b: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate one uncertainty relation on given operators and state.
    Check {
        #[arg(long, value_parser = parse_relation)]
        relation: RelationId,
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "B")]
        b: PathBuf,
        /// Fundamental symmetry; the identity when omitted.
        #[arg(long = "J")]
        j: Option<PathBuf>,
        #[arg(long)]
        state: PathBuf,
        /// Imaginary part of the commutator constant `a`.
        #[arg(long = "a-im", allow_negative_numbers = true)]
        a_im: Option<f64>,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        beta: f64,
        /// Commutator form; defaults to `aj` or `b2` by relation.
        #[arg(long, value_enum)]
        form: Option<FormArg>,
        #[command(flatten)]
        output: Output,
    },
    /// Seeded randomized sweep of a relation, as CSV.
    Sweep {
        #[arg(long, value_parser = parse_relation)]
        relation: RelationId,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Gaussian wave-packet widths and sampled density.
    Wavepacket {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        k0: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Write `x,f2_numeric,f2_closed` samples to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormArg {
    /// `[A,B] = aJ`
    Aj,
    /// `[A,B] = a(I + beta B^2)`
    B2,
    /// `[A,B] = a(I + beta B^H B)`
    Bstarb,
}

fn parse_relation(s: &str) -> Result<RelationId, String> {
    s.parse::<RelationId>().map_err(|_| {
        let names: Vec<&str> = RelationId::ALL.iter().map(|r| r.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

/// Failure that ends the run with exit code 3.
struct InputError(String);

impl From<krein_core::Error> for InputError {
    fn from(e: krein_core::Error) -> Self {
        Self(e.to_string())
    }
}

fn read_matrix(path: &Path) -> Result<Matrix, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Matrix::from_json(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn read_vector(path: &Path) -> Result<Vec<C64>, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Matrix::vector_from_json(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn emit(output: &Output, text: &str, stdout: &mut dyn Write) -> Result<(), InputError> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| InputError(format!("stdout: {e}"))),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let info = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            let _ = if info { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return if info { ExitStatus::Pass } else { ExitStatus::InputError };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(status) => status,
        Err(InputError(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            ExitStatus::InputError
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<ExitStatus, InputError> {
    match command {
        Command::Decompose { gram, pos, neg, output } => {
            let form = GramForm::new(read_matrix(&gram)?)?;
            let d = match (pos, neg) {
                (Some(p), Some(n)) => decompose_from_basis(&form, &read_matrix(&p)?, &read_matrix(&n)?)?,
                _ => decompose_spectral(&form)?,
            };
            let (plus, minus) = d.signature();
            let value = json!({
                "source": d.source,
                "signature": [plus, minus],
                "j": d.j,
                "p_plus": d.p_plus,
                "p_minus": d.p_minus,
                "majorant_gram": d.majorant_gram(),
                "residuals": d.residuals(),
                "axioms": d.verify_symmetry_axioms().checks,
            });
            emit(&output, &pretty(&value), stdout)?;
            Ok(ExitStatus::Pass)
        }
        Command::Adjoint { op, symmetry, output } => {
            let adj = krein_adjoint(&read_matrix(&op)?, &read_matrix(&symmetry)?)?;
            emit(&output, &format!("{}\n", adj.to_json()), stdout)?;
            Ok(ExitStatus::Pass)
        }
        Command::Geneig { a, b, tol, output } => {
            let report = solve_pencil(&read_matrix(&a)?, &read_matrix(&b)?, tol)?;
            emit(&output, &pretty(&report.to_json_value()), stdout)?;
            Ok(ExitStatus::Pass)
        }
        Command::Check { relation, a, b, j, state, a_im, beta, form, output } => {
            let a = read_matrix(&a)?;
            let b = read_matrix(&b)?;
            let n = a.require_square("A")?;
            let j = match j {
                Some(p) => read_matrix(&p)?,
                None => Matrix::identity(n),
            };
            let phi = StateVector::new(read_vector(&state)?)?;
            let spec = match a_im {
                Some(a_im) => {
                    let form = match form {
                        Some(FormArg::Aj) => CommutatorForm::AJ,
                        Some(FormArg::B2) => CommutatorForm::AIPlusBetaB2,
                        Some(FormArg::Bstarb) => CommutatorForm::AIPlusBetaBstarB,
                        None if matches!(relation, RelationId::GupKrein | RelationId::GupHilbert) => {
                            CommutatorForm::AIPlusBetaB2
                        }
                        None => CommutatorForm::AJ,
                    };
                    Some(CommutatorSpec::new(C64::new(0.0, a_im), beta, form)?)
                }
                None => None,
            };
            let report = verify_relation(relation, &a, &b, &j, &phi, spec.as_ref())?;
            let value = serde_json::to_value(report).expect("report serializes");
            emit(&output, &pretty(&value), stdout)?;
            Ok(match report.verdict {
                Verdict::Pass => ExitStatus::Pass,
                Verdict::Fail => ExitStatus::Violation,
                Verdict::FailHypothesis => ExitStatus::HypothesisViolation,
            })
        }
        Command::Sweep { relation, dim, trials, seed, tol, output } => {
            let config = SweepConfig { relation, dim, trials, seed, tol };
            let result = run_sweep(&config)?;
            emit(&output, &result.to_csv(), stdout)?;
            Ok(if result.count(TrialOutcome::HypothesisViolation) > 0 {
                ExitStatus::HypothesisViolation
            } else if result.count(TrialOutcome::Violation) > 0 {
                ExitStatus::Violation
            } else {
                ExitStatus::Pass
            })
        }
        Command::Wavepacket { alpha, k0, grid, csv, output } => {
            let p = WavePacketParams::new(alpha, k0)?;
            let widths = gaussian_widths(&p)?;
            if let Some(path) = csv {
                let g = Grid::symmetric(required_half_width(&p), grid)?;
                let samples = sampled_packet(&g, &p)?;
                let mut text = String::from("x,f2_numeric,f2_closed\n");
                for ((x, num), closed) in samples.x.iter().zip(&samples.numeric).zip(&samples.closed) {
                    text.push_str(&format!("{x:.16e},{num:.16e},{closed:.16e}\n"));
                }
                std::fs::write(&path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            }
            let summary = format!("dx,dk,product\n{:.16e},{:.16e},{:.16e}\n", widths.dx, widths.dk, widths.product);
            emit(&output, &summary, stdout)?;
            Ok(ExitStatus::Pass)
        }
    }
}
