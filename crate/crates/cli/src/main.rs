//! `bochner`: run verification suites and evaluate single projections and derivatives.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bochner_core::oracle::{fd_derivative, fd_schedule, oracle_project, OracleConfig, RegionLocked};
use bochner_core::verify::{self, PsiModeName, Suite, VerificationReport, VerifyConfig};
use bochner_core::{
    BallSpec, BochnerSpace, CylinderSpec, DerivativeOptions, DerivativeOutcome, Element, SetSpec, SupportSet,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bochner_cli::{CliError, InstanceFile};

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_NOT_COVERED: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "bochner",
    version,
    about = "Metric projections and their derivatives in finite Bochner spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PsiArg {
    Analytic,
    Numeric,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification battery and write a JSON report.
    Verify {
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instances per check; the per-check defaults apply when omitted.
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 1 runs serially.
        #[arg(long)]
        jobs: Option<usize>,
        /// How the smoothness function is evaluated inside derivative formulas.
        #[arg(long, value_enum, default_value = "analytic")]
        psi: PsiArg,
    },
    /// Project the instance element onto its set.
    Project {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Directional derivative of the projection, closed form against finite differences.
    Derivative {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the two-atom worked examples.
    Demo,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: verify::UnknownSuite| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Verify {
            suite,
            seed,
            instances,
            out,
            jobs,
            psi,
        } => {
            let cfg = VerifyConfig {
                seed,
                instances,
                psi: match psi {
                    PsiArg::Analytic => PsiModeName::Analytic,
                    PsiArg::Numeric => PsiModeName::Numeric,
                },
                ..VerifyConfig::default()
            };
            let report = match jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()?
                    .install(|| verify::run(suite, cfg)),
                None => verify::run(suite, cfg),
            };
            cmd_verify(&report, out.as_deref())
        }
        Command::Project { input, out } => cmd_project(&input, out.as_deref()),
        Command::Derivative { input, out } => cmd_derivative(&input, out.as_deref()),
        Command::Demo => Ok(cmd_demo()),
    }
}

fn emit(out: Option<&Path>, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("output serializes") + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Write(path.to_path_buf(), e)),
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn cmd_verify(report: &VerificationReport, out: Option<&Path>) -> Result<u8, CliError> {
    for c in report.checks() {
        println!(
            "{} {:<52} max_error {:<10.3e} tolerance {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.max_error,
            c.tolerance
        );
        if let Some(note) = &c.note {
            println!("     {note}");
        }
    }
    println!(
        "{}: {} checks, {} instances",
        if report.pass { "PASS" } else { "FAIL" },
        report.checks().count(),
        report.environment.total_instances
    );
    if let Some(path) = out {
        emit(Some(path), report)?;
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct ProjectOutput {
    status: &'static str,
    set: &'static str,
    /// Region of the element relative to the ball; absent for subspaces.
    region: Option<&'static str>,
    projection: Vec<Vec<f64>>,
    distance: f64,
}

fn cmd_project(input: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let inst = InstanceFile::load(input)?.build()?;
    let g = &inst.element;
    let pg = inst.set.project(g)?;
    let region = inst.set.classify(g, DerivativeOptions::default().tol)?;
    emit(
        out,
        &ProjectOutput {
            status: "OK",
            set: inst.set.kind(),
            region: region.map(|r| r.as_str()),
            distance: g.sub(&pg)?.norm(),
            projection: pg.to_rows(),
        },
    )?;
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct DerivativeOutput {
    status: &'static str,
    set: &'static str,
    region: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_estimate: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_error_bound: Option<f64>,
    /// `|closed_form - fd_estimate| / (1 + |closed_form|)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn cmd_derivative(input: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let inst = InstanceFile::load(input)?.build()?;
    let h = inst
        .direction
        .ok_or(CliError::Invalid("derivative needs a direction"))?;
    if h.is_zero() {
        return Err(CliError::Invalid("direction must be non-zero"));
    }
    let (g, set) = (&inst.element, &inst.set);
    let opts = DerivativeOptions::default();
    let region = set.classify(g, opts.tol)?.map(|r| r.as_str());
    let mut report = DerivativeOutput {
        status: "OK",
        set: set.kind(),
        region,
        closed_form: None,
        fd_estimate: None,
        fd_error_bound: None,
        residual: None,
        note: None,
    };
    let closed = match set.derivative(g, &h, opts)? {
        DerivativeOutcome::Covered(d) => d,
        DerivativeOutcome::NotCovered(class) => {
            report.status = "NOT_COVERED";
            report.note = Some(format!("no closed form at a {} point", class.as_str()));
            emit(out, &report)?;
            return Ok(EXIT_NOT_COVERED);
        }
    };
    report.closed_form = Some(closed.to_rows());
    let fd = RegionLocked::at(set, g, opts.tol).and_then(|lock| fd_derivative(&lock, g, &h, &fd_schedule(set, g, &h)?));
    match fd {
        Ok(fd) => {
            report.residual = Some(closed.sub(&fd.estimate)?.norm() / (1.0 + closed.norm()));
            report.fd_error_bound = Some(fd.error_bound);
            report.fd_estimate = Some(fd.estimate.to_rows());
        }
        Err(e) => report.note = Some(format!("finite differences unavailable: {e}")),
    }
    emit(out, &report)?;
    Ok(EXIT_PASS)
}

/// One worked example: closed form, expected value and the barrier oracle's answer.
struct Worked {
    label: &'static str,
    statement: &'static str,
    set: SetSpec,
    expected: [f64; 2],
}

fn worked_examples() -> Vec<Worked> {
    let space = BochnerSpace::build(vec![1.0, 1.0], 1, 2.0, 2.0).expect("valid space");
    let a = SupportSet::new(&space, &[0]).expect("valid support");
    let ball = BallSpec::centered(a, 1.0).expect("valid ball");
    vec![
        Worked {
            label: "ball",
            statement: "P_B g = g_A scaled onto the sphere of radius r in L_p(A; X)",
            set: SetSpec::Ball(ball.clone()),
            expected: [1.0, 0.0],
        },
        Worked {
            label: "cylinder",
            statement: "P_C g rescales the A rows and keeps the S \\ A rows",
            set: SetSpec::Cylinder(CylinderSpec::new(ball)),
            expected: [1.0, 3.0],
        },
    ]
}

fn cmd_demo() -> u8 {
    println!("two unit atoms, X = R with rho = 2, p = 2, A = {{0}}, r = 1, center 0, g = (2, 3)");
    let mut ok = true;
    for w in worked_examples() {
        let g = Element::from_flat(w.set.space(), vec![2.0, 3.0]).expect("valid element");
        let closed = w.set.project(&g).expect("projection is defined");
        let expected = Element::from_flat(w.set.space(), w.expected.to_vec()).expect("valid element");
        let oracle = oracle_project(&g, &w.set, &OracleConfig::default());
        let closed_gap = closed.sub(&expected).expect("same space").norm();
        let line = match oracle {
            Ok(o) => {
                let gap = o.minimizer.sub(&closed).expect("same space").norm();
                let pass = closed_gap <= 1e-12 && gap <= 1e-4 && o.audit_pass;
                ok &= pass;
                format!(
                    "verified against: barrier oracle, |oracle - closed| = {gap:.1e}, audit {}, distance^p = {:.12}",
                    if o.audit_pass { "clean" } else { "found a better point" },
                    o.objective
                )
            }
            Err(e) => {
                ok = false;
                format!("barrier oracle failed: {e}")
            }
        };
        let v = closed.values();
        println!("{:<8} (2, 3) -> ({}, {})  {}", w.label, v[0], v[1], w.statement);
        println!("         {line}");
    }
    println!("{}", if ok { "PASS" } else { "FAIL" });
    if ok {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
