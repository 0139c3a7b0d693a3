//! Command-line surface for the gradrate toolkit.
//!
//! Exit codes: 0 success, 1 internal/solver failure, 2 usage error.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use gradrate::certify::{Certificate, CertificateParams};
use gradrate::classes::CurvatureClass;
use gradrate::pep::{build_pep_pl, build_pep_qfg, build_pep_qgg, PepProblem};
use gradrate::rates::{
    optimal_step, rate_pl, rate_pl_polyak, rate_qfg_nstep, rate_qgg, regime_of, Regime,
};
use gradrate::sdp::{check_dual_feasibility, solve, SdpStatus, SolveOptions};
use gradrate::sim::{builtin_zoo, empirical_rate, gd_run};

#[derive(Parser)]
#[command(
    name = "gradrate",
    version,
    about = "Worst-case rates of the fixed-step gradient method: closed forms, performance-estimation SDPs, proof certificates and simulations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Pretty,
    Csv,
    Json,
}

#[derive(Args)]
struct ClassArgs {
    /// Minimum curvature (non-positive)
    #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
    mu: f64,
    /// Maximum curvature
    #[arg(long = "L", default_value_t = 1.0)]
    l: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Per-step contraction bounds at one step length or over a grid
    Bound {
        #[command(flatten)]
        class: ClassArgs,
        /// PŁ constant
        #[arg(long)]
        mup: f64,
        /// Single step length
        #[arg(long, conflicts_with = "t_grid")]
        t: Option<f64>,
        /// Step grid lo:hi:count
        #[arg(long = "t-grid")]
        t_grid: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// Optimal fixed step length and its rate
    Step {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        mup: f64,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// Build and solve a performance-estimation SDP
    Pep {
        #[command(subcommand)]
        kind: PepKind,
    },
    /// Worst-case bound under gradient growth: PEP vs closed form, as CSV
    Figure1 {
        /// Number of grid points for mu_g/L
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Lower end of the mu_g/L grid (exclusive of 0)
        #[arg(long, default_value_t = 0.02)]
        lo: f64,
        /// Upper end of the mu_g/L grid (exclusive of 1)
        #[arg(long, default_value_t = 0.98)]
        hi: f64,
        /// Output path; `-` for stdout
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Verify a proof certificate by random sampling
    Certify {
        #[arg(long = "case", value_enum)]
        case: CertCase,
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        mup: Option<f64>,
        #[arg(long)]
        muq: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long = "N", default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 20240817)]
        seed: u64,
    },
    /// Run the gradient method on a zoo function and check bound compliance
    Simulate {
        /// Zoo function name; try `--list`
        #[arg(long)]
        function: Option<String>,
        /// Comma-separated start point
        #[arg(long, allow_hyphen_values = true)]
        start: Option<String>,
        /// Fixed step length, repeated `--steps` times
        #[arg(long, conflicts_with = "schedule")]
        t: Option<f64>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Explicit comma-separated step schedule
        #[arg(long)]
        schedule: Option<String>,
        /// Output path for the trajectory CSV; `-` for stdout
        #[arg(long, default_value = "-")]
        out: String,
        /// List available zoo functions and exit
        #[arg(long)]
        list: bool,
    },
}

#[derive(Subcommand)]
enum PepKind {
    /// One-step problem under the PŁ inequality
    Pl {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        mup: f64,
        #[arg(long)]
        t: f64,
        /// Also check the matching proof certificate as an SDP dual
        #[arg(long)]
        certify: bool,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// One-step problem under quadratic gradient growth (t = 1/L, mu = -L)
    Qgg {
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long)]
        mug: f64,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// N-step problem under quadratic functional growth (t = 1/L, mu = -L)
    Qfg {
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long)]
        muq: f64,
        #[arg(long = "N", default_value_t = 1)]
        n: u32,
        /// Also check the N-step proof certificate as an SDP dual
        #[arg(long)]
        certify: bool,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CertCase {
    PlI,
    PlIi,
    PlIii,
    Qfg,
}

enum CliError {
    Usage(String),
    Internal(String),
}

impl From<gradrate::Error> for CliError {
    fn from(e: gradrate::Error) -> Self {
        match e {
            gradrate::Error::Solver(msg) => CliError::Internal(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn solve_options() -> SolveOptions {
    SolveOptions {
        verbose: std::env::var("GRADRATE_VERBOSE").map_or(false, |v| v != "0" && !v.is_empty()),
        ..Default::default()
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "grid spec `{spec}` must be lo:hi:count"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid bound `{}`", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid bound `{}`", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("bad grid count `{}`", parts[2])))?;
    if count < 1 || hi < lo {
        return Err(CliError::Usage(format!("degenerate grid `{spec}`")));
    }
    Ok((0..count)
        .map(|i| {
            if count == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            }
        })
        .collect())
}

fn parse_vec(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number `{s}`")))
        })
        .collect()
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::CaseI => "I",
        Regime::CaseII => "II",
        Regime::CaseIII => "III",
        Regime::Baseline => "baseline",
        Regime::NStep => "n-step",
    }
}

fn write_output(path: &str, content: &str) -> Result<(), CliError> {
    if path == "-" {
        print!("{content}");
        Ok(())
    } else {
        std::fs::write(path, content)
            .map_err(|e| CliError::Internal(format!("cannot write {path}: {e}")))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Command::Bound {
            class,
            mup,
            t,
            t_grid,
            format,
        } => cmd_bound(class, mup, t, t_grid, format),
        Command::Step { class, mup, format } => cmd_step(class, mup, format),
        Command::Pep { kind } => cmd_pep(kind),
        Command::Figure1 {
            points,
            lo,
            hi,
            out,
        } => cmd_figure1(points, lo, hi, &out),
        Command::Certify {
            case,
            class,
            mup,
            muq,
            t,
            n,
            samples,
            dim,
            seed,
        } => cmd_certify(case, class, mup, muq, t, n, samples, dim, seed),
        Command::Simulate {
            function,
            start,
            t,
            steps,
            schedule,
            out,
            list,
        } => cmd_simulate(function, start, t, steps, schedule, &out, list),
    }
}

fn cmd_bound(
    class: ClassArgs,
    mup: f64,
    t: Option<f64>,
    t_grid: Option<String>,
    format: Format,
) -> Result<(), CliError> {
    let cls = CurvatureClass::new(class.mu, class.l)?;
    let grid = match (t, t_grid) {
        (Some(t), None) => vec![t],
        (None, Some(spec)) => parse_grid(&spec)?,
        (None, None) => return Err(CliError::Usage("one of --t or --t-grid is required".into())),
        _ => unreachable!("clap conflicts_with"),
    };
    // validate everything before computing anything
    for &t in &grid {
        regime_of(&cls, t)?;
    }
    let rows: Vec<(f64, Regime, f64, f64)> = grid
        .par_iter()
        .map(|&t| {
            let b = rate_pl(&cls, mup, t).expect("validated");
            let p = rate_pl_polyak(cls.l(), mup, t).expect("validated");
            (t, b.regime, b.rho, p.rho)
        })
        .collect();
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("t,regime,rate,rate_polyak\n");
            for (t, r, b, p) in &rows {
                let _ = writeln!(out, "{t},{},{b},{p}", regime_name(*r));
            }
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|(t, r, b, p)| {
                    serde_json::json!({
                        "t": t, "regime": regime_name(*r), "rate": b, "rate_polyak": p
                    })
                })
                .collect();
            out = serde_json::to_string_pretty(&items).expect("serializable") + "\n";
        }
        Format::Pretty => {
            let _ = writeln!(
                out,
                "{:>12}  {:>6}  {:>18}  {:>18}",
                "t", "case", "rate", "rate (classical)"
            );
            for (t, r, b, p) in &rows {
                let _ = writeln!(out, "{t:>12.6}  {:>6}  {b:>18.12}  {p:>18.12}", regime_name(*r));
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn cmd_step(class: ClassArgs, mup: f64, format: Format) -> Result<(), CliError> {
    let cls = CurvatureClass::new(class.mu, class.l)?;
    let t_star = optimal_step(&cls, mup)?;
    let h = rate_pl(&cls, mup, t_star)?.rho;
    match format {
        Format::Csv => println!("t_star,rate\n{t_star},{h}"),
        Format::Json => println!("{}", serde_json::json!({ "t_star": t_star, "rate": h })),
        Format::Pretty => {
            println!("optimal step  t* = {t_star:.12}");
            println!("worst-case rate h(t*) = {h:.12}");
        }
    }
    Ok(())
}

struct PepReport {
    kind: &'static str,
    objective: f64,
    closed_bound: Option<f64>,
    solver_gap: f64,
    status: SdpStatus,
    iterations: usize,
    certificate_residual: Option<f64>,
}

fn solve_report(
    prob: &PepProblem,
    kind: &'static str,
    closed_bound: Option<f64>,
    cert: Option<&Certificate>,
) -> Result<PepReport, CliError> {
    let sol = solve(prob, &solve_options())?;
    if sol.status != SdpStatus::Optimal {
        return Err(CliError::Internal(format!(
            "solver returned {:?} after {} iterations",
            sol.status, sol.iterations
        )));
    }
    let certificate_residual = match cert {
        Some(c) => {
            let duals = c.dual_vector(prob)?;
            Some(check_dual_feasibility(prob, &duals)?)
        }
        None => None,
    };
    Ok(PepReport {
        kind,
        objective: sol.objective,
        closed_bound,
        solver_gap: sol.gap,
        status: sol.status,
        iterations: sol.iterations,
        certificate_residual,
    })
}

fn print_pep_report(r: &PepReport, format: Format) {
    match format {
        Format::Csv => {
            let closed = r.closed_bound.map_or(String::new(), |v| format!("{v}"));
            let cert = r
                .certificate_residual
                .map_or(String::new(), |v| format!("{v}"));
            println!(
                "kind,objective,closed_bound,gap_vs_closed,solver_gap,iterations,certificate_residual"
            );
            println!(
                "{},{},{},{},{},{},{}",
                r.kind,
                r.objective,
                closed,
                r.closed_bound
                    .map_or(String::new(), |v| format!("{}", v - r.objective)),
                r.solver_gap,
                r.iterations,
                cert
            );
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::json!({
                    "kind": r.kind,
                    "objective": r.objective,
                    "closed_bound": r.closed_bound,
                    "gap_vs_closed": r.closed_bound.map(|v| v - r.objective),
                    "solver_gap": r.solver_gap,
                    "status": format!("{:?}", r.status),
                    "iterations": r.iterations,
                    "certificate_residual": r.certificate_residual,
                })
            );
        }
        Format::Pretty => {
            println!("problem            {}", r.kind);
            println!("SDP objective      {:.12}", r.objective);
            if let Some(v) = r.closed_bound {
                println!("closed-form bound  {v:.12}");
                println!("gap vs closed      {:+.3e}", v - r.objective);
            }
            println!(
                "solver             {:?} in {} iterations, duality gap {:.3e}",
                r.status, r.iterations, r.solver_gap
            );
            if let Some(res) = r.certificate_residual {
                println!("certificate        dual-feasibility residual {res:.3e}");
            }
        }
    }
}

fn cmd_pep(kind: PepKind) -> Result<(), CliError> {
    match kind {
        PepKind::Pl {
            class,
            mup,
            t,
            certify,
            format,
        } => {
            let cls = CurvatureClass::new(class.mu, class.l)?;
            let prob = build_pep_pl(&cls, mup, t)?;
            let closed = rate_pl(&cls, mup, t)?.rho;
            let cert = if certify {
                let params = match regime_of(&cls, t)? {
                    Regime::CaseI => CertificateParams::PlCaseI { cls, mu_p: mup, t },
                    Regime::CaseIII => CertificateParams::PlCaseIII { cls, mu_p: mup, t },
                    _ => CertificateParams::PlCaseII { cls, mu_p: mup, t },
                };
                Some(Certificate::new(params)?)
            } else {
                None
            };
            let report = solve_report(&prob, "pl", Some(closed), cert.as_ref())?;
            print_pep_report(&report, format);
        }
        PepKind::Qgg { l, mug, format } => {
            let prob = build_pep_qgg(l, mug)?;
            let closed = rate_qgg(l, mug)?.rho;
            let report = solve_report(&prob, "qgg", Some(closed), None)?;
            print_pep_report(&report, format);
        }
        PepKind::Qfg {
            l,
            muq,
            n,
            certify,
            format,
        } => {
            let prob = build_pep_qfg(l, muq, n)?;
            let closed = rate_qfg_nstep(l, muq, n)?.rho;
            let cert = if certify {
                Some(Certificate::new(CertificateParams::QfgNStep {
                    l,
                    mu_q: muq,
                    n,
                })?)
            } else {
                None
            };
            let report = solve_report(&prob, "qfg", Some(closed), cert.as_ref())?;
            print_pep_report(&report, format);
        }
    }
    Ok(())
}

fn cmd_figure1(points: usize, lo: f64, hi: f64, out: &str) -> Result<(), CliError> {
    if !(0.0 < lo && lo <= hi && hi < 1.0) {
        return Err(CliError::Usage(format!(
            "grid [{lo}, {hi}] must lie strictly inside (0, 1)"
        )));
    }
    if points < 1 {
        return Err(CliError::Usage("need at least one grid point".into()));
    }
    let ratios: Vec<f64> = (0..points)
        .map(|i| {
            if points == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect();
    let rows: Vec<Result<(f64, f64, f64), CliError>> = ratios
        .par_iter()
        .map(|&x| {
            let prob = build_pep_qgg(1.0, x)?;
            let sol = solve(&prob, &solve_options())?;
            if sol.status != SdpStatus::Optimal {
                return Err(CliError::Internal(format!(
                    "solver returned {:?} at mu_g/L = {x}",
                    sol.status
                )));
            }
            let closed = rate_qgg(1.0, x)?.rho;
            Ok((x, sol.objective, closed))
        })
        .collect();
    let mut csv = String::from("ratio,pep_bound,closed_bound\n");
    for row in rows {
        let (x, pep, closed) = row?;
        if pep > closed {
            return Err(CliError::Internal(format!(
                "PEP bound {pep} above closed bound {closed} at {x}"
            )));
        }
        let _ = writeln!(csv, "{x},{pep},{closed}");
    }
    write_output(out, &csv)
}

#[allow(clippy::too_many_arguments)]
fn cmd_certify(
    case: CertCase,
    class: ClassArgs,
    mup: Option<f64>,
    muq: Option<f64>,
    t: Option<f64>,
    n: u32,
    samples: usize,
    dim: usize,
    seed: u64,
) -> Result<(), CliError> {
    let params = match case {
        CertCase::Qfg => {
            let mu_q = muq.ok_or_else(|| CliError::Usage("--muq required for qfg".into()))?;
            CertificateParams::QfgNStep { l: class.l, mu_q, n }
        }
        _ => {
            let cls = CurvatureClass::new(class.mu, class.l)?;
            let mu_p = mup.ok_or_else(|| CliError::Usage("--mup required for pl cases".into()))?;
            let t = t.ok_or_else(|| CliError::Usage("--t required for pl cases".into()))?;
            match case {
                CertCase::PlI => CertificateParams::PlCaseI { cls, mu_p, t },
                CertCase::PlIi => CertificateParams::PlCaseII { cls, mu_p, t },
                CertCase::PlIii => CertificateParams::PlCaseIII { cls, mu_p, t },
                CertCase::Qfg => unreachable!(),
            }
        }
    };
    let cert = Certificate::new(params)?;
    let residual = cert.verify_identity(samples, dim, seed)?;
    println!("certified rate      {:.12}", cert.rate());
    println!("multipliers:");
    for (name, v) in &cert.multipliers {
        println!("  {name:<18} {v:.12}");
    }
    println!(
        "max normalized identity residual over {samples} samples (dim {dim}, seed {seed}): {residual:.3e}"
    );
    if residual > 1e-9 {
        return Err(CliError::Internal(format!(
            "identity residual {residual:.3e} exceeds 1e-9"
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    function: Option<String>,
    start: Option<String>,
    t: Option<f64>,
    steps: usize,
    schedule: Option<String>,
    out: &str,
    list: bool,
) -> Result<(), CliError> {
    let zoo = builtin_zoo();
    if list {
        for f in &zoo {
            let k = &f.known_constants;
            println!(
                "{:<24} dim {}  mu {:>5}  L {:>5}  mu_p {}",
                f.name,
                f.dim(),
                k.curvature.mu(),
                k.curvature.l(),
                k.pl.map_or("-".into(), |v| format!("{v}")),
            );
        }
        return Ok(());
    }
    let name =
        function.ok_or_else(|| CliError::Usage("--function required (see --list)".into()))?;
    let f = zoo
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| CliError::Usage(format!("unknown function `{name}` (see --list)")))?;
    let x1 = match start {
        Some(s) => parse_vec(&s)?,
        None => vec![1.0; f.dim()],
    };
    if x1.len() != f.dim() {
        return Err(CliError::Usage(format!(
            "start has dimension {}, function needs {}",
            x1.len(),
            f.dim()
        )));
    }
    let sched = match (t, schedule) {
        (Some(t), None) => vec![t; steps],
        (None, Some(s)) => parse_vec(&s)?,
        (None, None) => {
            let l = f.known_constants.curvature.l();
            vec![1.0 / l; steps]
        }
        _ => unreachable!("clap conflicts_with"),
    };
    let traj = gd_run(f, &x1, &sched)?;
    let csv = traj.to_csv(f.f_star);

    // bound-compliance verdict against the certified constants
    let verdict = match f.known_constants.pl {
        Some(mu_p) => {
            let cls = f.known_constants.curvature;
            let ratios = empirical_rate(&traj, f.f_star);
            let mut worst_margin = f64::NEG_INFINITY;
            let mut violated = None;
            for (k, (r, &tk)) in ratios.iter().zip(&sched).enumerate() {
                let bound = rate_pl(&cls, mu_p, tk)?.rho;
                worst_margin = worst_margin.max(r - bound);
                if *r > bound + 1e-10 {
                    violated = Some((k, *r, bound));
                    break;
                }
            }
            match violated {
                Some((k, r, b)) => {
                    return Err(CliError::Internal(format!(
                        "bound violated at step {k}: ratio {r} > bound {b}"
                    )))
                }
                None => format!(
                    "bound-compliance: OK ({} ratios, worst margin to bound {:+.3e})",
                    ratios.len(),
                    worst_margin
                ),
            }
        }
        None => "bound-compliance: skipped (no PŁ constant certified for this function)".into(),
    };

    if out == "-" {
        print!("{csv}");
        eprintln!("{verdict}");
    } else {
        write_output(out, &csv)?;
        println!("{verdict}");
    }
    Ok(())
}
