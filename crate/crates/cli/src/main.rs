//! Batch front end: parse spec files or ensemble descriptions, dispatch the
//! requested checks, and emit machine-readable reports with meaningful exit
//! codes (0 all hold, 1 violation, 2 input error, 3 convergence failure).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bandedge::bounds::{evaluate_bound, BoundReport, BoundTarget, TheoremId, Verdict};
use bandedge::eigen::{discrete_spectrum, EigenvalueReport};
use bandedge::ensemble::{
    analytic_example, conjecture_probe, counterexample_scaling, counterexample_theorem3,
    EnsembleConfig, ExampleId, SignPolicy,
};
use bandedge::error::Error;
use bandedge::lattice::{lattice_eigen_report, strip_inequality_check, strip_trace_check};
use bandedge::operator::{Band, LineKind, Perturbation, TruncationPlan};
use bandedge::report::{
    eigen_report_to_json, fmt_float, probe_to_json, reports_to_csv, reports_to_json,
};
use bandedge::schema::{parse_spec, spec_to_json, AnySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "bandedge", version, about = "Discrete spectra and eigenvalue-moment bound verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; csv only applies to bound-report lists.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Eigenvalue convergence tolerance for window growth.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Cap on the truncation window size in sites.
    #[arg(long, global = true)]
    max_window: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the discrete spectrum of a spec file.
    Spectrum {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Verify bounds against a spec file.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        /// Theorem ids, comma separated (e.g. T1,T2,E16a).
        #[arg(long, value_delimiter = ',', required = true)]
        theorem: Vec<String>,
        /// Exponent for the p-parametrized families.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Run a solvable example and compare against its closed form.
    Example {
        /// One of Ex4_1, Ex4_2, HalfLineSite1, HalfLineBond1.
        #[arg(long)]
        id: String,
        #[arg(long)]
        param: f64,
        /// Optional theorem ids to verify on the example spec.
        #[arg(long, value_delimiter = ',')]
        theorem: Vec<String>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Probe the one-sided bond-defect variant over a random ensemble.
    Probe {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Build the sub-half-power spike construction and measure it.
    Counterexample {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        beta: Option<f64>,
        /// Number of spikes.
        #[arg(long)]
        n: Option<usize>,
        /// Spike spacing in sites.
        #[arg(long)]
        m: Option<i64>,
        /// Derive beta, n, m from the epsilon scaling instead.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Verify lattice bounds against a lattice spec file.
    Lattice {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        theorem: Vec<String>,
        #[arg(long)]
        p: Option<f64>,
        /// Also run the first-axis strip inequality checks (matrix and
        /// trace form); JSON output only.
        #[arg(long)]
        strip_check: bool,
    },
    /// Verify bounds over a seeded random ensemble.
    Sweep {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        theorem: Vec<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value_t = KindArg::Whole)]
        kind: KindArg,
        #[arg(long, default_value_t = 6)]
        support_max: usize,
        #[arg(long, default_value_t = 2.0)]
        b_max: f64,
        #[arg(long, default_value_t = 1.0)]
        a_min: f64,
        #[arg(long, default_value_t = 1.0)]
        a_max: f64,
        #[arg(long, value_enum, default_value_t = SignsArg::Mixed)]
        signs: SignsArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Half,
    Whole,
}

impl KindArg {
    fn to_kind(self) -> LineKind {
        match self {
            KindArg::Half => LineKind::HalfLine,
            KindArg::Whole => LineKind::WholeLine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SignsArg {
    Mixed,
    Positive,
    Negative,
}

impl SignsArg {
    fn to_policy(self) -> SignPolicy {
        match self {
            SignsArg::Mixed => SignPolicy::Mixed,
            SignsArg::Positive => SignPolicy::Positive,
            SignsArg::Negative => SignPolicy::Negative,
        }
    }
}

struct RunOutput {
    bytes: String,
    exit: u8,
}

fn exit_from_reports(reports: &[BoundReport]) -> u8 {
    if reports.iter().any(|r| r.verdict == Verdict::Violated) {
        1
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        3
    } else {
        0
    }
}

fn plan_from(cli_tol: Option<f64>, cli_max: Option<usize>, default_tol: f64) -> TruncationPlan {
    let mut plan = TruncationPlan::default().with_tolerance(cli_tol.unwrap_or(default_tol));
    if let Some(max) = cli_max {
        plan = plan.with_max_size(max);
    }
    plan
}

fn parse_theorems(names: &[String], p: Option<f64>) -> Result<Vec<TheoremId>, Error> {
    names.iter().map(|n| TheoremId::parse(n, p)).collect()
}

fn load_spec(path: &PathBuf) -> Result<AnySpec, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text)
}

/// Spectrum of a chain spec; a capped window comes back as a non-converged
/// report rather than a failure so the caller can still emit it.
fn chain_spectrum(spec: &Perturbation, plan: &TruncationPlan) -> Result<EigenvalueReport, Error> {
    match discrete_spectrum(spec, plan, &Band::chain()) {
        Ok(r) => Ok(r),
        Err(Error::NoConvergence { report, .. }) => Ok(*report),
        Err(e) => Err(e),
    }
}

fn render_reports(reports: &[BoundReport], format: Format) -> String {
    match format {
        Format::Json => reports_to_json(reports),
        Format::Csv => reports_to_csv(reports),
    }
}

fn require_json(format: Format, what: &str) -> Result<(), Error> {
    if format == Format::Csv {
        return Err(Error::Input(format!(
            "{what} emits a structured JSON document; csv only applies to bound-report lists"
        )));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<RunOutput, Error> {
    match &cli.command {
        Command::Spectrum { spec } => {
            require_json(cli.format, "spectrum")?;
            let plan = plan_from(cli.tol, cli.max_window, 1e-10);
            let report = match load_spec(spec)? {
                AnySpec::Chain(p) => chain_spectrum(&p, &plan)?,
                AnySpec::Lattice(l) => lattice_eigen_report(&l)?,
            };
            Ok(RunOutput {
                bytes: eigen_report_to_json(&report),
                exit: if report.converged { 0 } else { 3 },
            })
        }
        Command::Verify { spec, theorem, p } => {
            let ids = parse_theorems(theorem, *p)?;
            let plan = plan_from(cli.tol, cli.max_window, 1e-10);
            let reports = match load_spec(spec)? {
                AnySpec::Chain(chain) => {
                    if let Some(id) = ids.iter().find(|id| id.is_lattice()) {
                        return Err(Error::Input(format!(
                            "{} applies to lattice specs",
                            id.label()
                        )));
                    }
                    let report = chain_spectrum(&chain, &plan)?;
                    ids.iter()
                        .map(|&id| evaluate_bound(id, &BoundTarget::Chain(&chain), &report))
                        .collect::<Result<Vec<_>, _>>()?
                }
                AnySpec::Lattice(lattice) => {
                    if let Some(id) = ids.iter().find(|id| !id.is_lattice()) {
                        return Err(Error::Input(format!(
                            "{} applies to chain specs",
                            id.label()
                        )));
                    }
                    bandedge::lattice::lattice_bounds_check(&lattice, &ids)?
                }
            };
            Ok(RunOutput {
                exit: exit_from_reports(&reports),
                bytes: render_reports(&reports, cli.format),
            })
        }
        Command::Example {
            id,
            param,
            theorem,
            p,
        } => {
            let example = analytic_example(ExampleId::parse(id)?, *param)?;
            let ids = parse_theorems(theorem, *p)?;
            let plan = plan_from(cli.tol, cli.max_window, 1e-10);
            let report = chain_spectrum(&example.spec, &plan)?;
            let reports = ids
                .iter()
                .map(|&id| evaluate_bound(id, &BoundTarget::Chain(&example.spec), &report))
                .collect::<Result<Vec<_>, _>>()?;
            if cli.format == Format::Csv {
                return Ok(RunOutput {
                    exit: exit_from_reports(&reports),
                    bytes: reports_to_csv(&reports),
                });
            }
            let mut computed: Vec<f64> = report
                .e_plus
                .iter()
                .chain(&report.e_minus)
                .copied()
                .collect();
            computed.sort_by(|a, b| b.total_cmp(a));
            let mut predicted = example.predicted.clone();
            predicted.sort_by(|a, b| b.total_cmp(a));
            let deviation = if computed.len() == predicted.len() {
                computed
                    .iter()
                    .zip(&predicted)
                    .map(|(c, q)| (c - q).abs())
                    .fold(0.0f64, f64::max)
            } else {
                f64::INFINITY
            };
            let mut bytes = String::new();
            let _ = write!(
                bytes,
                "{{\"id\":\"{}\",\"parameter\":{},\"predicted\":[{}],\"t1_lhs\":{},\"t1_rhs\":{},\"max_prediction_deviation\":{},\"spectrum\":{}",
                example.id.label(),
                fmt_float(example.parameter),
                example
                    .predicted
                    .iter()
                    .map(|&v| fmt_float(v))
                    .collect::<Vec<_>>()
                    .join(","),
                fmt_float(example.t1_lhs),
                fmt_float(example.t1_rhs),
                fmt_float(deviation),
                eigen_report_to_json(&report).trim_end(),
            );
            bytes.push_str(",\"reports\":");
            bytes.push_str(reports_to_json(&reports).trim_end());
            bytes.push_str("}\n");
            let mut exit = exit_from_reports(&reports);
            if exit == 0 && !report.converged {
                exit = 3;
            }
            Ok(RunOutput { bytes, exit })
        }
        Command::Probe { seed, samples } => {
            require_json(cli.format, "probe")?;
            let cfg = EnsembleConfig::mixed(*seed, *samples, LineKind::WholeLine);
            let plan = plan_from(cli.tol, cli.max_window, 1e-10);
            let outcome = conjecture_probe(&cfg, &plan)?;
            Ok(RunOutput {
                bytes: probe_to_json(*seed, &outcome),
                exit: 0,
            })
        }
        Command::Counterexample { p, beta, n, m, eps } => {
            require_json(cli.format, "counterexample")?;
            let (beta, n, m) = match eps {
                Some(eps) => counterexample_scaling(*p, *eps)?,
                None => {
                    let missing = |flag: &str| {
                        Error::Input(format!("--{flag} is required unless --eps is given"))
                    };
                    (
                        beta.ok_or_else(|| missing("beta"))?,
                        n.ok_or_else(|| missing("n"))?,
                        m.ok_or_else(|| missing("m"))?,
                    )
                }
            };
            let built = counterexample_theorem3(*p, beta, n, m)?;
            let plan = plan_from(cli.tol, cli.max_window, 1e-8);
            let report = chain_spectrum(&built.spec, &plan)?;
            let mut moment_sum = 0.0;
            for &e in report.e_plus.iter().chain(&report.e_minus) {
                moment_sum += (e.abs() - 2.0).powf(*p);
            }
            let ratio = moment_sum / built.l1_norm;
            let bytes = format!(
                "{{\"p\":{},\"beta\":{},\"n_spikes\":{},\"spacing\":{},\"l1_norm\":{},\"moment_lower_bound\":{},\"computed_moment_sum\":{},\"moment_to_norm_ratio\":{},\"spacing_warning\":{},\"converged\":{},\"n_eigenvalues\":{},\"spec\":{}}}\n",
                fmt_float(*p),
                fmt_float(built.beta),
                built.n_spikes,
                built.spacing,
                fmt_float(built.l1_norm),
                fmt_float(built.moment_lower_bound),
                fmt_float(moment_sum),
                fmt_float(ratio),
                built.spacing_warning,
                report.converged,
                report.e_plus.len() + report.e_minus.len(),
                spec_to_json(&AnySpec::Chain(built.spec.clone())),
            );
            Ok(RunOutput {
                bytes,
                exit: if report.converged { 0 } else { 3 },
            })
        }
        Command::Lattice {
            spec,
            theorem,
            p,
            strip_check,
        } => {
            let ids = parse_theorems(theorem, *p)?;
            let AnySpec::Lattice(lattice) = load_spec(spec)? else {
                return Err(Error::Input("lattice command needs a lattice spec".into()));
            };
            let reports = bandedge::lattice::lattice_bounds_check(&lattice, &ids)?;
            if !strip_check {
                return Ok(RunOutput {
                    exit: exit_from_reports(&reports),
                    bytes: render_reports(&reports, cli.format),
                });
            }
            require_json(cli.format, "lattice --strip-check")?;
            let strip_gap = strip_inequality_check(&lattice)?;
            let trace_gap = strip_trace_check(&lattice)?;
            let bytes = format!(
                "{{\"reports\":{},\"strip\":{{\"min_eig\":{},\"trace_gap\":{}}}}}\n",
                reports_to_json(&reports).trim_end(),
                fmt_float(strip_gap),
                fmt_float(trace_gap),
            );
            Ok(RunOutput {
                exit: exit_from_reports(&reports),
                bytes,
            })
        }
        Command::Sweep {
            seed,
            samples,
            theorem,
            p,
            kind,
            support_max,
            b_max,
            a_min,
            a_max,
            signs,
        } => {
            let ids = parse_theorems(theorem, *p)?;
            if let Some(id) = ids.iter().find(|id| id.is_lattice()) {
                return Err(Error::Input(format!(
                    "{} applies to lattice specs; sweep draws chain ensembles",
                    id.label()
                )));
            }
            let cfg = EnsembleConfig {
                seed: *seed,
                count: *samples,
                kind: kind.to_kind(),
                support: (1, (*support_max).max(1)),
                b_range: (0.0, *b_max),
                a_range: (*a_min, *a_max),
                sign_policy: signs.to_policy(),
            };
            let plan = plan_from(cli.tol, cli.max_window, 1e-10);
            let mut reports = Vec::with_capacity(samples * ids.len());
            for k in 0..*samples {
                let spec = bandedge::ensemble::ensemble_member(&cfg, k)?;
                let report = chain_spectrum(&spec, &plan)?;
                for &id in &ids {
                    reports.push(evaluate_bound(id, &BoundTarget::Chain(&spec), &report)?);
                }
            }
            Ok(RunOutput {
                exit: exit_from_reports(&reports),
                bytes: render_reports(&reports, cli.format),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let wrote = match &cli.out {
                Some(path) => std::fs::write(path, &out.bytes)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{}", out.bytes);
                    Ok(())
                }
            };
            match wrote {
                Ok(()) => ExitCode::from(out.exit),
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(2)
                }
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::NoConvergence { .. } => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
