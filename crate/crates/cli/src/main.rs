//! `halley-cert` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 criterion failed, 3 table with
//! uncertified rows, 4 solver failure.

mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use halley_cert::certificate::{
    kantorovich_certificate, smale_certificate, ConvergenceCertificate, KantorovichInputs, SmaleInputs,
    DEFAULT_SEQ_LEN,
};
use halley_cert::hammerstein::{solve_and_check_with, table1, HammersteinSpec, DEFAULT_LAMBDAS};
use halley_cert::problem::Method;

use crate::output::Format;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_CRITERION_FAILED: u8 = 2;
const EXIT_PARTIAL_TABLE: u8 = 3;
const EXIT_SOLVER_FAILURE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "halley-cert", version, about = "Halley's method with semilocal convergence certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a convergence certificate from starting-point bounds.
    #[command(subcommand)]
    Certificate(CertificateCommand),
    /// Existence and uniqueness radii for the Hammerstein example.
    Table1(Table1Args),
    /// Solve a discretized problem and cross-check its certificate.
    #[command(subcommand)]
    Solve(SolveCommand),
}

#[derive(Debug, Args)]
struct FormatArg {
    #[arg(long, value_enum, env = "HALLEY_CERT_FORMAT", default_value = "human")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum CertificateCommand {
    /// Cubic majorant from beta, eta and the Lipschitz constant L.
    Kantorovich {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        lip: f64,
        #[arg(long, default_value_t = DEFAULT_SEQ_LEN)]
        seq_len: usize,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Rational majorant from beta and gamma.
    Smale {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = DEFAULT_SEQ_LEN)]
        seq_len: usize,
        #[command(flatten)]
        format: FormatArg,
    },
}

#[derive(Debug, Args)]
struct Table1Args {
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAMBDAS)]
    lambdas: Vec<f64>,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Halley,
    Newton,
    Chebyshev,
    Family,
}

#[derive(Debug, Subcommand)]
enum SolveCommand {
    /// Nyström-discretized Hammerstein equation with n = 3, f = 1.
    Hammerstein {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iters: usize,
        #[arg(long, value_enum, default_value = "halley")]
        method: MethodArg,
        /// Series coefficients a_0,a_1,... for `--method family`.
        #[arg(long, value_delimiter = ',')]
        coeffs: Vec<f64>,
        #[command(flatten)]
        format: FormatArg,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let code = match cli.command {
        Command::Certificate(cmd) => cmd_certificate(cmd),
        Command::Table1(args) => cmd_table1(args),
        Command::Solve(cmd) => cmd_solve(cmd),
    };
    ExitCode::from(code)
}

fn usage_error(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn cmd_certificate(cmd: CertificateCommand) -> u8 {
    let (cert, format): (halley_cert::Result<ConvergenceCertificate>, Format) = match cmd {
        CertificateCommand::Kantorovich { beta, eta, lip, seq_len, format } => {
            (kantorovich_certificate(&KantorovichInputs { beta, eta, lip }, seq_len), format.format)
        }
        CertificateCommand::Smale { beta, gamma, seq_len, format } => {
            (smale_certificate(&SmaleInputs { beta, gamma }, seq_len), format.format)
        }
    };
    match cert {
        Ok(cert) => {
            print!("{}", output::certificate(&cert, format));
            if cert.is_certified() {
                EXIT_OK
            } else {
                EXIT_CRITERION_FAILED
            }
        }
        Err(e) => usage_error(e),
    }
}

fn cmd_table1(args: Table1Args) -> u8 {
    let rows = table1(&args.lambdas);
    print!("{}", output::table1(&rows, args.format.format));
    if rows.iter().all(|r| r.certified) {
        EXIT_OK
    } else {
        EXIT_PARTIAL_TABLE
    }
}

fn cmd_solve(cmd: SolveCommand) -> u8 {
    let SolveCommand::Hammerstein { lambda, nodes, tol, max_iters, method, coeffs, format } = cmd;
    let method = match (method, coeffs.is_empty()) {
        (MethodArg::Family, true) => return usage_error("--method family requires --coeffs"),
        (MethodArg::Family, false) => Method::Family(coeffs),
        (_, false) => return usage_error("--coeffs is only valid with --method family"),
        (MethodArg::Halley, true) => Method::Halley,
        (MethodArg::Newton, true) => Method::newton(),
        (MethodArg::Chebyshev, true) => Method::chebyshev(),
    };
    let spec = HammersteinSpec::new(lambda, nodes);
    match solve_and_check_with(&spec, &method, tol, max_iters) {
        Ok(report) => {
            print!("{}", output::solve_report(&report, format.format));
            if report.converged {
                EXIT_OK
            } else {
                eprintln!("solver stopped: {:?}", report.trace.stop_reason);
                EXIT_SOLVER_FAILURE
            }
        }
        Err(e) => usage_error(e),
    }
}
