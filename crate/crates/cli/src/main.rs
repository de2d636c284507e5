//! `loplab`: classify shock fronts, sweep parameter space, inspect roots and matrices.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use loplab_core::classify::{classify, ClassifyOptions, StabilityVerdict, Verdict};
use loplab_core::config::ParameterFile;
use loplab_core::lopatinski::{
    find_boundary_roots, scan_boundary_axis, transition_points, RootRecord,
};
use loplab_core::params::{check_lax_with, LaxOptions};
use loplab_core::scan::{interior_winding, scan_interior_roots, ScanConfig};
use loplab_core::sweep::{sweep, write_csv, write_jsonl, SweepSpec};
use loplab_core::system::{SystemMatrices, BOUNDARY_ROWS, UNKNOWNS};
use loplab_core::verify::{verify, VerifyOptions};
use loplab_core::{Deformation, Error, Execution, ShockParameters};
use serde_json::json;

const EXIT_INADMISSIBLE: u8 = 2;
const EXIT_DISAGREEMENT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "loplab",
    version,
    about = "Uniform/weak stability of shock fronts in 2D isentropic elastodynamics"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "LOPLAB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one parameter point.
    Classify {
        #[command(flatten)]
        point: PointArgs,
        /// Closed-form condition only, no root finding.
        #[arg(long)]
        fast: bool,
        /// Also compute the winding number around the interior scan window.
        #[arg(long)]
        winding: bool,
        #[arg(long)]
        json: bool,
    },
    /// Sweep a grid of parameters described by a TOML file.
    Scan {
        spec: PathBuf,
        /// Output file; `.csv` or `.jsonl` selects the format. Defaults to CSV on stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the format implied by `--out`.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Evaluate points one at a time.
        #[arg(long)]
        sequential: bool,
    },
    /// List the roots of the reduced boundary system.
    Roots {
        #[command(flatten)]
        point: PointArgs,
        /// Also scan the right half plane.
        #[arg(long)]
        interior: bool,
        #[arg(long, default_value_t = 400)]
        axis_samples: usize,
        #[arg(long)]
        json: bool,
    },
    /// Run the self-consistency suites at one point and print a JSON report.
    Verify {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the interior and boundary coefficient matrices.
    DumpMatrices {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct PointArgs {
    /// TOML parameter file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Downstream Mach number M.
    #[arg(long)]
    mach: Option<f64>,
    /// Density ratio R.
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    f11: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    f12: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    f21: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    f22: Option<f64>,
    /// Upstream Mach number M_-, enables the upstream Lax check.
    #[arg(long)]
    mach_upstream: Option<f64>,
}

struct Point {
    params: ShockParameters,
    lax: LaxOptions,
    scan: ScanConfig,
}

impl PointArgs {
    fn resolve(&self) -> anyhow::Result<Point> {
        let file = match &self.config {
            Some(path) => Some(
                ParameterFile::load(path).with_context(|| format!("reading {}", path.display()))?,
            ),
            None => None,
        };
        let base = file
            .as_ref()
            .map(|f| f.deformation.into())
            .unwrap_or(Deformation::ZERO);
        let mach = self
            .mach
            .or(file.as_ref().map(|f| f.mach))
            .ok_or_else(|| anyhow!("--mach is required"))?;
        let ratio = self
            .ratio
            .or(file.as_ref().map(|f| f.ratio))
            .ok_or_else(|| anyhow!("--ratio is required"))?;
        let f = Deformation::new(
            self.f11.unwrap_or(base.f11),
            self.f12.unwrap_or(base.f12),
            self.f21.unwrap_or(base.f21),
            self.f22.unwrap_or(base.f22),
        );
        let mut params = ShockParameters::new(mach, ratio, f)?;
        if let Some(m) = self
            .mach_upstream
            .or(file.as_ref().and_then(|f| f.mach_upstream))
        {
            params = params.with_upstream(m)?;
        }
        Ok(Point {
            params,
            lax: file.as_ref().map(|f| f.lax_options()).unwrap_or_default(),
            scan: file.as_ref().and_then(|f| f.solver).unwrap_or_default(),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: LOPLAB_THREADS must be at least 1");
            return ExitCode::from(EXIT_INADMISSIBLE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Disagreement(_)) => ExitCode::from(EXIT_DISAGREEMENT),
                Some(Error::InvalidParameters(_) | Error::NonHyperbolicPoint { .. }) => {
                    ExitCode::from(EXIT_INADMISSIBLE)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Classify {
            point,
            fast,
            winding,
            json,
        } => cmd_classify(&point.resolve()?, fast, winding, json),
        Command::Scan {
            spec,
            out,
            format,
            sequential,
        } => cmd_scan(&spec, out.as_deref(), format, sequential),
        Command::Roots {
            point,
            interior,
            axis_samples,
            json,
        } => cmd_roots(&point.resolve()?, interior, axis_samples, json),
        Command::Verify {
            point,
            samples,
            seed,
        } => cmd_verify(&point.resolve()?, samples, seed),
        Command::DumpMatrices { point, json } => cmd_dump(&point.resolve()?, json),
    }
}

fn cmd_classify(pt: &Point, fast: bool, winding: bool, json: bool) -> anyhow::Result<ExitCode> {
    let mut opts = if fast {
        ClassifyOptions::fast()
    } else {
        ClassifyOptions::default()
    };
    opts.lax = pt.lax;
    opts.scan = pt.scan;
    opts.scan.winding |= winding;
    let (v, code) = match classify(&pt.params, &opts) {
        Ok(v) => {
            let code = if v.verdict == Verdict::Inadmissible {
                EXIT_INADMISSIBLE
            } else {
                0
            };
            (v, code)
        }
        Err(Error::Disagreement(v)) => (*v, EXIT_DISAGREEMENT),
        Err(e) => return Err(e.into()),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        print_verdict(&v, fast);
    }
    if code == EXIT_DISAGREEMENT {
        eprintln!("error: closed form and numerical classification disagree");
    }
    Ok(ExitCode::from(code))
}

fn print_verdict(v: &StabilityVerdict, fast: bool) {
    println!("verdict: {}", v.verdict);
    let a = &v.admissibility;
    println!(
        "lax: downstream {} (M - M1 = {:.6e}, M* - M = {:.6e}), upstream {:?}",
        a.downstream, a.margin_lower, a.margin_upper, a.upstream
    );
    let Some(d) = &v.derived else { return };
    println!(
        "K = {:.12}  K1 = {:.12}  K2 = {:.12}  K3 = {:.12}",
        d.k, d.k1, d.k2, d.k3
    );
    println!(
        "margin K1 + K2 - K = {:.6e}{}",
        v.margin,
        if v.extended_precision {
            " (double-double)"
        } else {
            ""
        }
    );
    if v.verdict == Verdict::Inadmissible {
        return;
    }
    println!(
        "conditions: quartic {}, K < K1 + K2 {}, elastic Mach {}",
        v.condition_usc_prime, v.condition_usc_hat, v.condition_usc1
    );
    if fast {
        return;
    }
    println!("boundary roots: {}", v.delta_branch_roots);
    for r in &v.boundary_roots {
        print_root(r);
    }
    if let Some(n) = v.axis_roots {
        println!("axis scan roots: {n}");
    }
    println!("interior roots: {}", v.interior_roots.len());
    for r in &v.interior_roots {
        print_root(r);
    }
    if let Some(w) = v.winding {
        println!("winding number: {w}");
    }
    println!("agreement: {}", v.agreement);
}

fn print_root(r: &RootRecord) {
    let branch = r.branch.map_or(String::new(), |b| format!(" branch {b:?}"));
    println!(
        "  s = {:+.12}{:+.12}i  lambda = {:+.12}{:+.12}i  omega = {:+}  residual {:.2e}{branch}",
        r.s.re, r.s.im, r.lambda.re, r.lambda.im, r.omega, r.normalized_residual
    );
}

fn cmd_scan(
    spec_path: &Path,
    out: Option<&Path>,
    format: Option<Format>,
    sequential: bool,
) -> anyhow::Result<ExitCode> {
    let spec =
        SweepSpec::load(spec_path).with_context(|| format!("reading {}", spec_path.display()))?;
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let result = sweep(&spec, exec)?;
    let format = match (format, out) {
        (Some(f), _) => f,
        (None, Some(p)) => match p.extension().and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            Some("jsonl") | Some("json") => Format::Jsonl,
            _ => bail!("cannot infer the format of {}; use --format", p.display()),
        },
        (None, None) => Format::Csv,
    };
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => write_csv(&result.rows, sink)?,
        Format::Jsonl => write_jsonl(&result.rows, sink)?,
    }
    if !result.disagreements.is_empty() {
        eprintln!(
            "error: {} point(s) where the numerical checks disagree, first at row {}",
            result.disagreements.len(),
            result.disagreements[0]
        );
        return Ok(ExitCode::from(EXIT_DISAGREEMENT));
    }
    Ok(ExitCode::SUCCESS)
}

fn inadmissible(pt: &Point) -> bool {
    !check_lax_with(&pt.params, &pt.lax).admissible()
}

fn cmd_roots(
    pt: &Point,
    interior: bool,
    axis_samples: usize,
    json: bool,
) -> anyhow::Result<ExitCode> {
    if inadmissible(pt) {
        eprintln!("error: parameters violate the Lax inequalities");
        return Ok(ExitCode::from(EXIT_INADMISSIBLE));
    }
    let d = pt.params.derive()?;
    let tp = transition_points(&d);
    let boundary = find_boundary_roots(&d)?;
    let axis = scan_boundary_axis(&d, axis_samples)?;
    let (inner, winding) = if interior {
        let cfg = ScanConfig {
            winding: true,
            ..pt.scan
        };
        (
            Some(scan_interior_roots(&d, &cfg, Execution::default())),
            interior_winding(&d, &cfg),
        )
    } else {
        (None, None)
    };
    if json {
        let doc = json!({
            "transition_points": tp,
            "boundary_roots": boundary,
            "axis_scan_roots": axis,
            "interior_roots": inner,
            "winding": winding,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!(
            "xi*+ = {:.12}  xi*- = {:.12}",
            tp.xi_star_plus, tp.xi_star_minus
        );
        println!(
            "delta*+ = {:.12}  delta*- = {:.12}",
            tp.delta_star_plus, tp.delta_star_minus
        );
        println!("boundary roots: {}", boundary.len());
        boundary.iter().for_each(print_root);
        println!("axis scan roots: {}", axis.len());
        axis.iter().for_each(print_root);
        if let Some(inner) = &inner {
            println!("interior roots: {}", inner.len());
            inner.iter().for_each(print_root);
            if let Some(w) = winding {
                println!("winding number: {w}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(pt: &Point, samples: usize, seed: u64) -> anyhow::Result<ExitCode> {
    if inadmissible(pt) {
        eprintln!("error: parameters violate the Lax inequalities");
        return Ok(ExitCode::from(EXIT_INADMISSIBLE));
    }
    let opts = VerifyOptions {
        samples,
        seed,
        scan: ScanConfig {
            winding: true,
            ..pt.scan
        },
        exec: Execution::default(),
    };
    let report = verify(&pt.params, &opts)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_DISAGREEMENT)
    })
}

fn cmd_dump(pt: &Point, json: bool) -> anyhow::Result<ExitCode> {
    let d = pt.params.derive()?;
    let mats = SystemMatrices::assemble(&d);
    if json {
        let mut doc = serde_json::Map::new();
        doc.insert("unknowns".into(), json!(UNKNOWNS));
        doc.insert("boundary_rows".into(), json!(BOUNDARY_ROWS));
        doc.insert("derived".into(), serde_json::to_value(d)?);
        for (name, m) in mats.named() {
            doc.insert(name.into(), json!(m.rows()));
        }
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!("unknowns: {}", UNKNOWNS.join(" "));
    for (name, m) in mats.named() {
        println!("{name}:");
        for row in m.rows() {
            let cells: Vec<String> = row.iter().map(|x| format!("{:>14.8}", x + 0.0)).collect();
            println!("{}", cells.join(""));
        }
    }
    println!("boundary rows: {}", BOUNDARY_ROWS.join(" "));
    Ok(ExitCode::SUCCESS)
}
