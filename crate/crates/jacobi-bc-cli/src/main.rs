//! Batch front end for the boundary-control toolkit.
//!
//! Commands read structured-text documents, write deterministic output
//! (floats at 17 significant digits, so identical inputs give
//! byte-identical files) and report through the exit status: 0 for
//! success or an accepted verdict, 1 when well-formed data is rejected
//! by the mathematics, 2 for malformed input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use jacobi_bc::characterize::{DET_TOL_SCALE, ROUNDTRIP_TOL};
use jacobi_bc::exact::{rational_to_f64, rationals_from_f64};
use jacobi_bc::inverse::RecoveryStep;
use jacobi_bc::io::{
    diagnostics_csv, format_float, parse_coefficient_document, parse_coefficients, parse_measure,
    parse_response, wavefield_csv, write_coefficients, write_response, write_spectral_data,
};
use jacobi_bc::spectral::validate_schrodinger_measure_scaled;
use jacobi_bc::{
    characterize_jacobi_exact, recover_factorization, recover_factorization_exact, recover_krein,
    response_from_measure, response_vector, spectral_data, step_forward, BoundaryProblem,
    CharacterizationReport, ControlVector, Error, FailingCondition, JacobiCoefficients,
    RecoveryResult, Result, Verdict,
};

#[derive(Parser)]
#[command(
    name = "jacobi-bc",
    version,
    about = "Boundary-control tools for semi-infinite Jacobi matrices",
    long_about = "Deterministic batch tools around the boundary-control method for \
semi-infinite Jacobi matrices: forward simulation, response extraction, two inverse \
routes, response characterization and the spectral/measure side.\n\n\
Exit status: 0 on success or an accepted verdict; 1 when well-formed data is rejected \
by the mathematics (failed characterization, inadmissible response, out-of-tolerance \
round trip); 2 for malformed input or unusable parameters.\n\n\
All file output is byte-deterministic; floats are printed with 17 significant digits. \
Set JACOBI_BC_LOG=1 for progress notes on standard error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Float,
    Exact,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Krein,
    Factorization,
}

/// Flags shared by every command. `--mode` and `--tol` are accepted
/// everywhere and ignored with a notice where they do not apply.
#[derive(Args)]
struct Common {
    /// Input document path
    #[arg(long, value_name = "PATH")]
    input: PathBuf,

    /// Arithmetic mode; `exact` is honored by invert and characterize
    #[arg(long, value_enum, default_value_t = Mode::Float)]
    mode: Mode,

    /// Tolerance override where the command applies one
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the boundary-driven lattice and export the grid as CSV
    ///
    /// The input document holds the coefficient window ("a", "b") and may
    /// carry a boundary control as an "f" list; without one the unit
    /// impulse is used.
    Forward {
        #[command(flatten)]
        common: Common,
        /// Final time of the simulation
        #[arg(short = 'T', long = "horizon", value_parser = clap::value_parser!(u16).range(1..))]
        t: u16,
        /// CSV output path (header n,t,value)
        #[arg(long, value_name = "PATH")]
        output: PathBuf,
    },

    /// Compute the response vector of a coefficient window
    ///
    /// Emits the 2T-1 entries an inversion at horizon T consumes.
    Response {
        #[command(flatten)]
        common: Common,
        /// Horizon T; the output holds r_0 .. r_{2T-2}
        #[arg(short = 'T', long = "horizon", value_parser = clap::value_parser!(u16).range(1..))]
        t: u16,
        /// Response document output path
        #[arg(long, value_name = "PATH")]
        output: PathBuf,
    },

    /// Recover a coefficient window from a response document
    ///
    /// Writes the coefficient file plus a per-index diagnostics CSV next
    /// to it (same stem, extension diag.csv).
    Invert {
        #[command(flatten)]
        common: Common,
        /// Horizon T; defaults to the largest the response supports
        #[arg(short = 'T', long = "horizon", value_parser = clap::value_parser!(u16).range(1..))]
        t: Option<u16>,
        /// Inverse route
        #[arg(long, value_enum, default_value_t = Method::Factorization)]
        method: Method,
        /// Coefficient document output path
        #[arg(long, value_name = "PATH")]
        output: PathBuf,
    },

    /// Decide whether a vector is the response of some coefficient window
    Characterize {
        #[command(flatten)]
        common: Common,
        /// Optional path for the verdict report (also printed)
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },

    /// Eigenvalues and weights of the finite interval problem
    ///
    /// The output also lists the atoms of the induced spectral measure,
    /// so it is a valid input for moments and validate-measure.
    SpectralData {
        #[command(flatten)]
        common: Common,
        /// Interval length N (sites 1..N evolve, site N+1 is pinned)
        #[arg(short = 'N', long = "interval", value_parser = clap::value_parser!(u16).range(1..))]
        n: u16,
        /// Boundary parameter of the pinning condition
        #[arg(long = "h", value_name = "H", default_value_t = 0.0, allow_negative_numbers = true)]
        h: f64,
        /// Spectral document output path
        #[arg(long, value_name = "PATH")]
        output: PathBuf,
    },

    /// Chebyshev moments of a measure, emitted as a response document
    Moments {
        #[command(flatten)]
        common: Common,
        /// Horizon T; emits the 2T-1 moments an inversion consumes
        #[arg(short = 'T', long = "horizon", value_parser = clap::value_parser!(u16).range(1..))]
        t: u16,
        /// Response document output path
        #[arg(long, value_name = "PATH")]
        output: PathBuf,
    },

    /// Test whether a measure is a spectral measure of a window with all
    /// off-diagonal coefficients equal to one
    ValidateMeasure {
        #[command(flatten)]
        common: Common,
        /// Largest horizon whose determinant condition is checked
        #[arg(short = 'T', long = "horizon", value_parser = clap::value_parser!(u16).range(1..))]
        t: u16,
        /// Optional path for the verdict report (also printed)
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },

    /// Response -> inversion -> response self-test on a coefficient window
    Roundtrip {
        #[command(flatten)]
        common: Common,
        /// Horizon T; defaults to the window length
        #[arg(short = 'T', long = "horizon", value_parser = clap::value_parser!(u16).range(1..))]
        t: Option<u16>,
        /// Inverse route under test
        #[arg(long, value_enum, default_value_t = Method::Factorization)]
        method: Method,
        /// Optional path for the deviation report (also printed)
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Well-formed files whose data the mathematics refuses exit 1; shape,
/// syntax and parameter problems exit 2.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::NotPositiveDefinite { .. }
        | Error::NonPositiveLeadingEntry { .. }
        | Error::InvalidRecoveredSquare { .. }
        | Error::DegenerateControl { .. }
        | Error::ResidualTooLarge { .. }
        | Error::EigenNonConvergence { .. } => 1,
        _ => 2,
    }
}

fn log_on() -> bool {
    matches!(std::env::var("JACOBI_BC_LOG"), Ok(v) if !v.is_empty() && v != "0" && !v.eq_ignore_ascii_case("off"))
}

fn log(msg: &str) {
    if log_on() {
        eprintln!("[jacobi-bc] {msg}");
    }
}

fn notice(msg: &str) {
    eprintln!("notice: {msg}");
}

fn ignore_mode(common: &Common, cmd: &str) {
    if common.mode == Mode::Exact {
        notice(&format!("--mode exact is ignored by {cmd}; using float arithmetic"));
    }
}

fn ignore_tol(common: &Common, cmd: &str) {
    if common.tol.is_some() {
        notice(&format!("--tol is ignored by {cmd}"));
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// coeffs.json -> coeffs.diag.csv, extensionless stems gain the suffix.
fn diag_path(output: &Path) -> PathBuf {
    output.with_extension("diag.csv")
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Forward { common, t, output } => {
            ignore_mode(&common, "forward");
            ignore_tol(&common, "forward");
            let doc = parse_coefficient_document(&read(&common.input)?)?;
            let t = t as usize;
            let control = match doc.control {
                Some(f) => f,
                None => {
                    log("no control field; driving with the unit impulse");
                    ControlVector::delta(t + 1)
                }
            };
            let w = step_forward(&doc.coeffs, &control, t)?;
            log(&format!("stepped {} sites to time {t}", w.n_max() + 1));
            write_out(&output, &wavefield_csv(&w))?;
            Ok(0)
        }

        Command::Response { common, t, output } => {
            ignore_mode(&common, "response");
            ignore_tol(&common, "response");
            let c = parse_coefficients(&read(&common.input)?)?;
            let k = 2 * t as usize - 1;
            let r = response_vector(&c, k)?;
            log(&format!("extracted {k} response entries"));
            write_out(&output, &write_response(&r))?;
            Ok(0)
        }

        Command::Invert {
            common,
            t,
            method,
            output,
        } => {
            ignore_tol(&common, "invert");
            let r = parse_response(&read(&common.input)?)?;
            let t = t.map(|v| v as usize).unwrap_or(r.len().div_ceil(2));
            log(&format!("inverting at horizon {t}"));
            let (coeffs, steps) = match (method, common.mode) {
                (Method::Factorization, Mode::Exact) => {
                    let rats = rationals_from_f64(r.as_slice())?;
                    let rec = recover_factorization_exact(&rats, t)?;
                    if !rec.sqrt_exact.iter().all(|&x| x) {
                        notice(
                            "some recovered off-diagonal entries are irrational; \
float square roots were substituted",
                        );
                    }
                    (exact_window(&rec)?, exact_steps(&rec))
                }
                (Method::Krein, Mode::Exact) => {
                    notice(
                        "exact mode applies to the factorization method; \
using float arithmetic for krein",
                    );
                    let rec = recover_krein(&r, t)?;
                    (rec.coefficients()?, rec.steps)
                }
                (Method::Factorization, Mode::Float) => {
                    let rec = recover_factorization(&r, t)?;
                    (rec.coefficients()?, rec.steps)
                }
                (Method::Krein, Mode::Float) => {
                    let rec = recover_krein(&r, t)?;
                    (rec.coefficients()?, rec.steps)
                }
            };
            write_out(&output, &write_coefficients(&coeffs))?;
            write_out(&diag_path(&output), &diagnostics_csv(&steps))?;
            Ok(0)
        }

        Command::Characterize { common, output } => {
            let r = parse_response(&read(&common.input)?)?;
            let report = match common.mode {
                Mode::Float => jacobi_bc::characterize::characterize_jacobi_scaled(
                    r.as_slice(),
                    common.tol.unwrap_or(ROUNDTRIP_TOL),
                    true,
                )?,
                Mode::Exact => {
                    if common.tol.is_some() {
                        notice("--tol is ignored in exact mode");
                    }
                    let rats = rationals_from_f64(r.as_slice())?;
                    characterize_jacobi_exact(&rats)?
                }
            };
            let text = report_text(&report);
            print!("{text}");
            if let Some(path) = output {
                write_out(&path, &text)?;
            }
            Ok(if report.accepted() { 0 } else { 1 })
        }

        Command::SpectralData {
            common,
            n,
            h,
            output,
        } => {
            ignore_mode(&common, "spectral-data");
            ignore_tol(&common, "spectral-data");
            let c = parse_coefficients(&read(&common.input)?)?;
            let problem = BoundaryProblem::new(c, n as usize, h)?;
            let sd = spectral_data(&problem)?;
            log(&format!("{} eigenvalues extracted", sd.lambdas.len()));
            write_out(&output, &write_spectral_data(&sd)?)?;
            Ok(0)
        }

        Command::Moments { common, t, output } => {
            ignore_mode(&common, "moments");
            ignore_tol(&common, "moments");
            let mu = parse_measure(&read(&common.input)?)?;
            let k = 2 * t as usize - 1;
            let r = response_from_measure(&mu, k)?;
            log(&format!("emitted {k} moments"));
            write_out(&output, &write_response(&r))?;
            Ok(0)
        }

        Command::ValidateMeasure { common, t, output } => {
            ignore_mode(&common, "validate-measure");
            let mu = parse_measure(&read(&common.input)?)?;
            let report = validate_schrodinger_measure_scaled(
                &mu,
                t as usize,
                common.tol.unwrap_or(DET_TOL_SCALE),
            )?;
            let text = report_text(&report);
            print!("{text}");
            if let Some(path) = output {
                write_out(&path, &text)?;
            }
            Ok(if report.accepted() { 0 } else { 1 })
        }

        Command::Roundtrip {
            common,
            t,
            method,
            output,
        } => {
            ignore_mode(&common, "roundtrip");
            let c = parse_coefficients(&read(&common.input)?)?;
            let t = t.map(|v| v as usize).unwrap_or(c.window());
            let k = 2 * t - 1;
            let r = response_vector(&c, k)?;
            let rec = match method {
                Method::Factorization => recover_factorization(&r, t)?,
                Method::Krein => recover_krein(&r, t)?,
            };
            let again = response_vector(&rec.coefficients()?, k)?;
            let mut worst = 0.0f64;
            for i in 0..k {
                let dev = (again.entry(i) - r.entry(i)).abs() / (1.0 + r.entry(i).abs());
                worst = worst.max(dev);
            }
            let tol = common.tol.unwrap_or(1e-6);
            let pass = worst <= tol;
            let text = format!(
                "{{\n  \"max_deviation\": {},\n  \"tolerance\": {},\n  \"verdict\": \"{}\"\n}}\n",
                format_float(worst),
                format_float(tol),
                if pass { "pass" } else { "fail" }
            );
            print!("{text}");
            if let Some(path) = output {
                write_out(&path, &text)?;
            }
            Ok(if pass { 0 } else { 1 })
        }
    }
}

/// Rebuilds a simulation window from an exact recovery, padding the
/// undetermined trailing diagonal entry like the float route does.
fn exact_window(rec: &jacobi_bc::ExactRecovery) -> Result<JacobiCoefficients> {
    let mut b = rec.b_f64();
    b.push(0.0);
    JacobiCoefficients::new(rec.a_f64(), b)
}

fn exact_steps(rec: &jacobi_bc::ExactRecovery) -> Vec<RecoveryStep> {
    let a = rec.a_f64();
    let b = rec.b_f64();
    (0..a.len())
        .map(|k| RecoveryStep {
            k,
            det_cbar: if k == 0 {
                1.0
            } else {
                rational_to_f64(&rec.dets[k - 1])
            },
            det_cbar_sub: if k == 0 {
                0.0
            } else {
                rational_to_f64(&rec.sub_dets[k - 1])
            },
            a: a[k],
            b: if k == 0 { None } else { Some(b[k - 1]) },
        })
        .collect()
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_else(|| "null".into())
}

fn float_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| format_float(x)).collect();
    format!("[{}]", items.join(", "))
}

fn failing_text(c: &FailingCondition) -> String {
    match c {
        FailingCondition::InvalidLeadingEntry { value } => {
            format!("leading entry {} is not positive", format_float(*value))
        }
        FailingCondition::NotPositiveDefinite { k, pivot } => format!(
            "connecting matrix loses positive definiteness at order {k} (pivot {})",
            format_float(*pivot)
        ),
        FailingCondition::DetNotOne { l, det, tolerance } => format!(
            "determinant at horizon {l} is {} (allowed deviation {})",
            format_float(*det),
            format_float(*tolerance)
        ),
        FailingCondition::RoundtripMismatch { t, deviation } => format!(
            "re-simulated response deviates by {} at entry {t}",
            format_float(*deviation)
        ),
    }
}

fn report_text(report: &CharacterizationReport) -> String {
    let verdict = match report.verdict {
        Verdict::Accepted => "accepted",
        Verdict::Rejected => "rejected",
    };
    let failing = report
        .failing_condition
        .as_ref()
        .map(|c| format!("\"{}\"", failing_text(c)))
        .unwrap_or_else(|| "null".into());
    let (rec_a, rec_b) = match &report.recovered {
        Some(RecoveryResult { a, b, .. }) => (float_list(a), float_list(b)),
        None => ("null".into(), "null".into()),
    };
    format!(
        "{{\n  \"verdict\": \"{verdict}\",\n  \"failing_condition\": {failing},\n  \
\"smallest_pivot\": {},\n  \"max_det_deviation\": {},\n  \
\"max_roundtrip_deviation\": {},\n  \"recovered_a\": {rec_a},\n  \
\"recovered_b\": {rec_b}\n}}\n",
        opt_float(report.smallest_pivot),
        opt_float(report.max_det_deviation),
        opt_float(report.max_roundtrip_deviation),
    )
}
