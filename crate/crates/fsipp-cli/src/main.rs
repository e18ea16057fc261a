//! Command-line front end for the solver library.
//!
//! Exit codes are the machine contract:
//! 0 success · 1 input or I/O error · 2 numerical trouble ·
//! 3 validation failure · 4 non-member · 5 inconclusive.
//! Machine-readable output (JSON, CSV) goes to stdout or `--out`; human
//! progress notes go to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fsipp::moments::IndexSet;
use fsipp::poly::Monomial;
use fsipp::relax::{self, FsippProblem};
use fsipp::sdp::{sdpa, Status};
use fsipp::{diag, soscert};
use fsipp_cli::schema::{status_str, ConfigFile, ProblemFile, ResultFile, ResultRecord};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_NON_MEMBER: u8 = 4;
const EXIT_INCONCLUSIVE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "fsipp",
    version,
    about = "Lower bounds and feasible-set approximations for fractional \
             semi-infinite polynomial programs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the relaxation hierarchy and emit a JSON result file
    Solve {
        /// Problem file (JSON)
        file: PathBuf,
        /// Single relaxation order to solve
        #[arg(long, conflicts_with = "orders")]
        order: Option<u32>,
        /// Range of orders, e.g. "1..8" (inclusive) or "8" for 1..8
        #[arg(long)]
        orders: Option<String>,
        /// Override the solver tolerance from the problem file
        #[arg(long)]
        tol: Option<f64>,
        /// Attach the index-gap diagnostic to each record (needs n ≤ 3)
        #[arg(long)]
        diagnostics: bool,
        /// Skip the convexity certification preflight
        #[arg(long)]
        force: bool,
        /// Write the result file here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether a point belongs to the order-k outer approximation
    Member {
        file: PathBuf,
        /// Comma-separated coordinates, e.g. "-0.5,-0.5"
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 3)]
        order: u32,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Trace the boundary of the outer approximation as CSV (m ∈ {2, 3})
    Boundary {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: u32,
        /// Number of support directions, spread evenly
        #[arg(long, default_value_t = 64)]
        directions: usize,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the convexity structure of the problem data
    Certify { file: PathBuf },
    /// Print an exact moment of an index set
    Moments {
        /// Built-in set kind: box, sphere, or ball
        #[arg(long, conflicts_with = "file")]
        set: Option<String>,
        /// Dimension of the built-in set (defaults to the length of --beta)
        #[arg(long)]
        n: Option<usize>,
        /// Take the index set from this problem file instead
        #[arg(long)]
        file: Option<PathBuf>,
        /// Comma-separated exponents, e.g. "2,2"
        #[arg(long)]
        beta: String,
    },
    /// Lower bound via plain grid discretization of the index set
    Discretize {
        file: PathBuf,
        /// Grid refinement N: the grid is {-1 + 2i/N} per axis
        #[arg(long, default_value_t = 2)]
        grid: u32,
    },
    /// Export the order-k relaxation in sparse SDPA format
    ExportSdpa {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        order: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Solve {
            file,
            order,
            orders,
            tol,
            diagnostics,
            force,
            out,
        } => cmd_solve(&file, order, orders.as_deref(), tol, diagnostics, force, out.as_deref()),
        Cmd::Member {
            file,
            point,
            order,
            tol,
        } => cmd_member(&file, &point, order, tol),
        Cmd::Boundary {
            file,
            order,
            directions,
            tol,
            out,
        } => cmd_boundary(&file, order, directions, tol, out.as_deref()),
        Cmd::Certify { file } => cmd_certify(&file),
        Cmd::Moments { set, n, file, beta } => cmd_moments(set.as_deref(), n, file.as_deref(), &beta),
        Cmd::Discretize { file, grid } => cmd_discretize(&file, grid),
        Cmd::ExportSdpa { file, order, out } => cmd_export_sdpa(&file, order, &out),
    };
    ExitCode::from(code)
}

/// Load and convert a problem file; errors are printed and mapped to the
/// input exit code by the caller.
fn load(file: &Path) -> Result<(ProblemFile, FsippProblem), String> {
    let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let pf: ProblemFile =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let prob = pf
        .to_problem()
        .map_err(|e| format!("{}: {e}", file.display()))?;
    Ok((pf, prob))
}

fn parse_orders(order: Option<u32>, orders: Option<&str>) -> Result<Vec<u32>, String> {
    let ks: Vec<u32> = match (order, orders) {
        (Some(k), None) => vec![k],
        (None, Some(spec)) => {
            let parse = |s: &str| -> Result<u32, String> {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| format!("invalid order {s:?}"))
            };
            if let Some((lo, hi)) = spec.split_once("..") {
                let lo = parse(lo)?;
                let hi = parse(hi)?;
                if lo > hi {
                    return Err(format!("empty order range {spec:?}"));
                }
                (lo..=hi).collect()
            } else {
                (1..=parse(spec)?).collect()
            }
        }
        (None, None) => (1..=4).collect(),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    if ks.iter().any(|&k| k == 0) {
        return Err("orders start at 1".to_string());
    }
    Ok(ks)
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, content).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn cmd_solve(
    file: &Path,
    order: Option<u32>,
    orders: Option<&str>,
    tol_flag: Option<f64>,
    diagnostics: bool,
    force: bool,
    out: Option<&Path>,
) -> u8 {
    let (pf, prob) = match load(file) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let ks = match parse_orders(order, orders) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let tol = tol_flag.unwrap_or(pf.config.tol);

    if force {
        eprintln!("note: certification preflight skipped (--force)");
    } else {
        let report = soscert::validate_problem(&prob);
        if !report.passed() {
            eprintln!("validation failed:\n{}", report.summary());
            return EXIT_VALIDATION;
        }
        if report.pointwise_only() {
            eprintln!(
                "note: parametric constraint certified pointwise on a grid, \
                 not jointly"
            );
        }
    }

    let mut records = Vec::with_capacity(ks.len());
    let mut any_trouble = false;
    let mut gap_unsupported = false;
    for &k in &ks {
        let r = relax::solve_order(&prob, k, tol);
        if r.status != Status::Optimal {
            any_trouble = true;
        }
        let gap = if diagnostics {
            match r.functional.as_ref() {
                Some(l) => match diag::gap_e(&prob, l, k, tol) {
                    Ok(rep) => Some(rep.e),
                    Err(e) => {
                        if !gap_unsupported {
                            eprintln!("note: gap diagnostic unavailable: {e}");
                            gap_unsupported = true;
                        }
                        None
                    }
                },
                None => None,
            }
        } else {
            None
        };
        eprintln!(
            "k={k}: {} r_k={} t={:.2}s",
            status_str(r.status),
            r.lower_bound,
            r.wall_time_s
        );
        records.push(ResultRecord::from_hierarchy(&r, gap));
    }

    let result = ResultFile::new(
        file.display().to_string(),
        ConfigFile {
            r: pf.config.r,
            gstar: pf.config.gstar,
            tol,
        },
        records,
    );
    let json = serde_json::to_string_pretty(&result).expect("result serialization");
    if let Err(e) = write_or_print(out, &json) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    if any_trouble {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    }
}

fn cmd_member(file: &Path, point: &str, order: u32, tol_flag: Option<f64>) -> u8 {
    let (pf, prob) = match load(file) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let u: Vec<f64> = match point
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
    {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: invalid point {point:?}: {e}");
            return EXIT_INPUT;
        }
    };
    if u.len() != prob.m() {
        eprintln!(
            "error: point has {} coordinates, problem has {} variables",
            u.len(),
            prob.m()
        );
        return EXIT_INPUT;
    }
    let tol = tol_flag.unwrap_or(pf.config.tol);
    match relax::membership(&prob, &u, order, tol) {
        Ok(true) => {
            println!("member");
            EXIT_OK
        }
        Ok(false) => {
            println!("non-member");
            EXIT_NON_MEMBER
        }
        Err(e) => {
            eprintln!("note: {e}");
            println!("inconclusive");
            EXIT_INCONCLUSIVE
        }
    }
}

/// Evenly spread unit directions: a circle for m = 2, a Fibonacci sphere
/// for m = 3.
fn spread_directions(m: usize, count: usize) -> Vec<Vec<f64>> {
    match m {
        2 => (0..count)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => Vec::new(),
    }
}

fn cmd_boundary(
    file: &Path,
    order: u32,
    directions: usize,
    tol_flag: Option<f64>,
    out: Option<&Path>,
) -> u8 {
    let (pf, prob) = match load(file) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    if directions == 0 {
        eprintln!("error: need at least one direction");
        return EXIT_INPUT;
    }
    let tol = tol_flag.unwrap_or(pf.config.tol);
    let dirs = spread_directions(prob.m(), directions);
    let trace = match relax::boundary_trace(&prob, order, &dirs, tol) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let m = prob.m();
    let mut csv = String::from("dir_index,angle");
    for i in 0..m {
        csv.push_str(&format!(",x{}", i + 1));
    }
    csv.push_str(",status\n");
    let mut solved = 0usize;
    for s in &trace {
        csv.push_str(&format!("{},{:.6}", s.dir_index, s.angle));
        match &s.point {
            Some(p) => {
                solved += 1;
                for v in p {
                    csv.push_str(&format!(",{v:.9}"));
                }
            }
            None => {
                for _ in 0..m {
                    csv.push(',');
                }
            }
        }
        csv.push_str(&format!(",{}\n", status_str(s.status)));
    }
    if let Err(e) = write_or_print(out, csv.trim_end()) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    eprintln!("{solved}/{} directions solved at order {order}", trace.len());
    if solved == 0 {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    }
}

fn cmd_certify(file: &Path) -> u8 {
    let (_, prob) = match load(file) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let report = soscert::validate_problem(&prob);
    println!("{}", report.summary());
    if report.passed() {
        println!("result: pass");
        EXIT_OK
    } else {
        let rejected = report.f.is_rejected()
            || report.g.is_rejected()
            || report.phi.iter().any(|c| c.is_rejected())
            || report
                .p_pointwise
                .as_ref()
                .is_some_and(|pw| pw.failures > 0)
            || (report.p_pointwise.is_none() && report.p_joint.is_rejected());
        if rejected {
            println!("result: fail");
            EXIT_VALIDATION
        } else {
            println!("result: inconclusive");
            EXIT_INCONCLUSIVE
        }
    }
}

fn cmd_moments(set: Option<&str>, n: Option<usize>, file: Option<&Path>, beta: &str) -> u8 {
    let beta: Vec<u32> = match beta
        .split(',')
        .map(|s| s.trim().parse::<u32>())
        .collect::<Result<Vec<u32>, _>>()
    {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: invalid exponents {beta:?}: {e}");
            return EXIT_INPUT;
        }
    };
    let index_set = match (set, file) {
        (None, Some(path)) => match load(path) {
            Ok((_, prob)) => prob.index_set().clone(),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
        },
        (Some(kind), None) => {
            let dim = n.unwrap_or(beta.len());
            match kind {
                "box" => IndexSet::Box { n: dim },
                "sphere" => IndexSet::Sphere { n: dim },
                "ball" => IndexSet::Ball { n: dim },
                other => {
                    eprintln!(
                        "error: unknown set {other:?} (expected box, sphere, or ball; \
                         use --file for simplex sets)"
                    );
                    return EXIT_INPUT;
                }
            }
        }
        _ => {
            eprintln!("error: pass exactly one of --set or --file");
            return EXIT_INPUT;
        }
    };
    if beta.len() != index_set.n() {
        eprintln!(
            "error: {} exponents for a {}-dimensional set",
            beta.len(),
            index_set.n()
        );
        return EXIT_INPUT;
    }
    let value = index_set.raw_moment(&Monomial::new(beta));
    println!("{value:.12}");
    EXIT_OK
}

fn cmd_discretize(file: &Path, grid: u32) -> u8 {
    let (_, prob) = match load(file) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let res = match relax::discretize_baseline(&prob, grid) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let json = serde_json::json!({
        "status": status_str(res.status),
        "lower_bound": res.lower_bound.is_finite().then_some(res.lower_bound),
        "minimizer": res.minimizer,
        "grid_points": res.grid_points,
    });
    println!("{}", serde_json::to_string_pretty(&json).expect("serialization"));
    if res.status == Status::Optimal {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    }
}

fn cmd_export_sdpa(file: &Path, order: u32, out: &Path) -> u8 {
    let (_, prob) = match load(file) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let prog = relax::build_dual(&prob, order);
    if let Err(e) = sdpa::export(&prog, out) {
        eprintln!("error: {}: {e}", out.display());
        return EXIT_INPUT;
    }
    eprintln!("wrote {}", out.display());
    EXIT_OK
}
