//! Command-line front end: spec ingestion, region computation,
//! symmetrizability verdicts, the binary-symmetric figure sweep,
//! verification of the region identities, and the Monte-Carlo simulator.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or validation
//! error, 3 budget exhaustion (best-effort output still written).

use clap::{Parser, Subcommand, ValueEnum};
use savbc::bsc_example::{bs_region_boundary, BsSavbcParams};
use savbc::channels::SavbcSpec;
use savbc::geometry::{RatePair, RateRegion};
use savbc::measures::AuxiliaryJoint;
use savbc::regions::{
    bounding_triangle, compute_region, corner_points, verify_inner_outer, verify_q_absorption,
    SearchBudget,
};
use savbc::simulator::{
    average_channel, estimate_error, exhaustive_adversary, generate_code, greedy_adversary,
    StatePlan,
};
use savbc::symmetrizability::{interior_nonempty, is_symmetrizable};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "savbc",
    about = "Capacity regions and simulation for semi-arbitrarily-varying broadcast channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the capacity region of a channel spec
    Region {
        #[arg(long)]
        input: PathBuf,
        /// output basename; writes `<output>.csv` and `<output>.json`
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 64)]
        directions: usize,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        /// auxiliary cardinality; defaults to |X| + 1
        #[arg(long)]
        u_size: Option<usize>,
    },
    /// Decide symmetrizability of the state family
    Symmetrizable {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Emit boundary and hull CSVs for the binary-symmetric instance
    BscFigure {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        /// repeatable; one output pair per value
        #[arg(long = "p-max", required = true)]
        p_max: Vec<f64>,
        #[arg(long, default_value_t = 201)]
        alpha_samples: usize,
        /// output directory
        #[arg(long)]
        output: PathBuf,
    },
    /// Check the region identities numerically on a spec
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        u_size: Option<usize>,
        #[arg(long, default_value_t = 2)]
        q_size: usize,
        /// previously emitted region CSV to re-check against the spec
        #[arg(long)]
        region_file: Option<PathBuf>,
    },
    /// Estimate the message-averaged error of a superposition code
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rc: f64,
        #[arg(long)]
        rp: f64,
        #[arg(long, default_value_t = 8)]
        blocklength: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Adversary::Greedy)]
        adversary: Adversary,
        /// superposition flip probability for binary inputs; defaults to
        /// a cloud equal to the channel input
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV log to append the run row to
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Adversary {
    Greedy,
    Exhaustive,
}

/// Nine significant digits, locale-independent.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

fn load_spec(path: &Path) -> Result<SavbcSpec, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    SavbcSpec::parse_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn region_csv(region: &RateRegion) -> String {
    let mut out = String::from("rc,rp\n");
    for v in region.vertices() {
        let _ = writeln!(out, "{},{}", sig9(v.rc), sig9(v.rp));
    }
    out
}

fn parse_region_csv(text: &str) -> Result<RateRegion, String> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("rc")) {
            continue;
        }
        let mut parts = line.split(',');
        let rc: f64 = parts
            .next()
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| format!("line {}: bad rc", i + 1))?;
        let rp: f64 = parts
            .next()
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| format!("line {}: bad rp", i + 1))?;
        points.push(RatePair::new(rc, rp));
    }
    if points.is_empty() {
        return Err("region file has no vertices".into());
    }
    Ok(RateRegion::from_points(&points))
}

fn thread_cap_from_env() -> Result<(), String> {
    // computation is sequential; the cap is validated and trivially
    // honored
    if let Ok(raw) = std::env::var("SAVBC_THREADS") {
        let parsed: usize = raw
            .parse()
            .map_err(|_| format!("SAVBC_THREADS must be a positive integer, got {raw:?}"))?;
        if parsed == 0 {
            return Err("SAVBC_THREADS must be positive".into());
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_region(
    input: &Path,
    output: &Path,
    seed: u64,
    tol: f64,
    directions: usize,
    restarts: usize,
    max_iters: usize,
    u_size: Option<usize>,
) -> Result<u8, String> {
    let spec = load_spec(input)?;
    let budget = SearchBudget {
        directions,
        restarts,
        max_iters,
        u_size,
        seed,
    };
    let result = compute_region(&spec, &budget, tol).map_err(|e| e.to_string())?;
    let csv_path = output.with_extension("csv");
    let json_path = output.with_extension("json");
    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| e.to_string())?;
        }
    }
    std::fs::write(&csv_path, region_csv(&result.region)).map_err(|e| e.to_string())?;
    let metadata = serde_json::json!({
        "spec_hash": format!("{:016x}", fnv1a(spec.to_json().as_bytes())),
        "seed": seed,
        "tolerance": tol,
        "directions": directions,
        "restarts": restarts,
        "max_iters": max_iters,
        "u_size": u_size,
        "warnings": result.warnings,
        "vertices": result.region.vertices().iter().map(|v| [v.rc, v.rp]).collect::<Vec<_>>(),
    });
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&metadata).expect("metadata serializes"),
    )
    .map_err(|e| e.to_string())?;
    println!(
        "region: {} vertices -> {} and {}",
        result.region.vertices().len(),
        csv_path.display(),
        json_path.display()
    );
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if result.warnings.is_empty() { 0 } else { 3 })
}

fn cmd_symmetrizable(input: &Path, tol: f64) -> Result<u8, String> {
    let spec = load_spec(input)?;
    let report = is_symmetrizable(spec.family(), tol).map_err(|e| e.to_string())?;
    println!(
        "verdict: {}",
        if report.symmetrizable {
            "symmetrizable"
        } else {
            "nonsymmetrizable"
        }
    );
    println!("residual: {}", sig9(report.residual));
    if report.borderline {
        println!("borderline: residual within a decade of the tolerance");
    }
    if report.symmetrizable {
        println!("witness sigma(s|x):");
        for (x, row) in report.witness.sigma.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|&v| sig9(v)).collect();
            println!("  x={x}: {}", cells.join(" "));
        }
    }
    let interior = interior_nonempty(&spec, tol).map_err(|e| e.to_string())?;
    println!(
        "interior: {}",
        if interior.nonempty { "nonempty" } else { "empty" }
    );
    for reason in &interior.reasons {
        println!("  reason: {reason}");
    }
    Ok(0)
}

fn cmd_bsc_figure(
    p: f64,
    p_min: f64,
    p_max: &[f64],
    alpha_samples: usize,
    output: &Path,
) -> Result<u8, String> {
    std::fs::create_dir_all(output).map_err(|e| e.to_string())?;
    for &pm in p_max {
        let params = BsSavbcParams::new(p, p_min.min(pm), pm).map_err(|e| e.to_string())?;
        let boundary = bs_region_boundary(&params, alpha_samples).map_err(|e| e.to_string())?;
        let mut csv = String::from("alpha,rc_bound,rp_bound,sum_bound\n");
        for s in &boundary.samples {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                sig9(s.alpha),
                sig9(s.rc_bound),
                sig9(s.rp_bound),
                sig9(s.sum_bound)
            );
        }
        let boundary_path = output.join(format!("boundary_pmax_{pm}.csv"));
        std::fs::write(&boundary_path, csv).map_err(|e| e.to_string())?;
        let hull_path = output.join(format!("hull_pmax_{pm}.csv"));
        std::fs::write(&hull_path, region_csv(&boundary.hull)).map_err(|e| e.to_string())?;
        println!(
            "p_max {pm}: {} alpha samples -> {} ({})",
            boundary.samples.len(),
            boundary_path.display(),
            if boundary.is_triangle {
                "sum-rate triangle"
            } else {
                "curved hull"
            }
        );
    }
    Ok(0)
}

fn cmd_verify(
    input: &Path,
    samples: usize,
    seed: u64,
    tol: f64,
    u_size: Option<usize>,
    q_size: usize,
    region_file: Option<&Path>,
) -> Result<u8, String> {
    let spec = load_spec(input)?;
    let u = u_size.unwrap_or(spec.x_size() + 1);
    let mut all_pass = true;

    let q_report =
        verify_q_absorption(&spec, u, q_size, samples, seed, tol).map_err(|e| e.to_string())?;
    println!(
        "q-absorption: {} (max violations: common {}, private {}, sum {})",
        if q_report.pass { "pass" } else { "FAIL" },
        sig9(q_report.max_violation_common),
        sig9(q_report.max_violation_private),
        sig9(q_report.max_violation_sum)
    );
    all_pass &= q_report.pass;

    let io_report = verify_inner_outer(&spec, u, q_size, samples, seed, 1e-2)
        .map_err(|e| e.to_string())?;
    println!(
        "inner/outer: {} ({} containment violations, global distance {})",
        if io_report.pass { "pass" } else { "FAIL" },
        io_report.containment_violations,
        sig9(io_report.global_distance)
    );
    all_pass &= io_report.pass;

    let budget = SearchBudget {
        directions: 16,
        restarts: 6,
        max_iters: 400,
        u_size,
        seed,
    };
    let region = compute_region(&spec, &budget, 1e-6)
        .map_err(|e| e.to_string())?
        .region;
    let corner_ok = check_region_against_spec(&spec, &region)?;
    println!(
        "corner points and bounding triangle: {}",
        if corner_ok { "pass" } else { "FAIL" }
    );
    all_pass &= corner_ok;

    if let Some(path) = region_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let stored = parse_region_csv(&text)?;
        let stored_ok = check_region_against_spec(&spec, &stored)?;
        println!(
            "stored region file: {}",
            if stored_ok { "pass" } else { "FAIL" }
        );
        all_pass &= stored_ok;
    }

    Ok(if all_pass { 0 } else { 1 })
}

/// The containment claims every region must satisfy: both corner points
/// inside (slack 1e-3) and all vertices inside the bounding triangle
/// (slack 1e-6).
fn check_region_against_spec(spec: &SavbcSpec, region: &RateRegion) -> Result<bool, String> {
    let (lower, upper) = corner_points(spec, 1e-6).map_err(|e| e.to_string())?;
    let triangle = bounding_triangle(spec, 1e-9).map_err(|e| e.to_string())?;
    let mut ok = region.contains(lower, 1e-3) && region.contains(upper, 1e-3);
    for &v in region.vertices() {
        ok &= triangle.contains(v, 1e-6);
    }
    Ok(ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    input: &Path,
    rc: f64,
    rp: f64,
    blocklength: usize,
    trials: u64,
    adversary: Adversary,
    alpha: Option<f64>,
    seed: u64,
    output: Option<&Path>,
) -> Result<u8, String> {
    let spec = load_spec(input)?;
    if rc < 0.0 || rp < 0.0 {
        return Err("rates must be nonnegative".into());
    }
    let aux = match alpha {
        Some(a) => {
            if spec.x_size() != 2 {
                return Err("--alpha requires a binary input alphabet".into());
            }
            AuxiliaryJoint::binary_superposition(a).map_err(|e| e.to_string())?
        }
        None => {
            let px = vec![1.0 / spec.x_size() as f64; spec.x_size()];
            AuxiliaryJoint::u_equals_x(&px).map_err(|e| e.to_string())?
        }
    };
    let code = generate_code(&aux, blocklength, rc, rp, seed).map_err(|e| e.to_string())?;
    let greedy_plan = StatePlan::Mixed(
        greedy_adversary(&code, spec.family(), 1e-9).map_err(|e| e.to_string())?,
    );
    let nominal = vec![
        average_channel(spec.family(), &greedy_plan).map_err(|e| e.to_string())?;
        blocklength
    ];
    let (label, estimate) = match adversary {
        Adversary::Greedy => {
            let estimate = estimate_error(
                &code,
                spec.w(),
                spec.family(),
                &greedy_plan,
                &nominal,
                trials,
                seed,
            )
            .map_err(|e| e.to_string())?;
            ("greedy", estimate)
        }
        Adversary::Exhaustive => {
            let (sequence, estimate) =
                exhaustive_adversary(&code, spec.w(), spec.family(), &nominal, trials, seed)
                    .map_err(|e| e.to_string())?;
            let rendered: Vec<String> = sequence.iter().map(|s| s.to_string()).collect();
            println!("worst state sequence: [{}]", rendered.join(" "));
            ("exhaustive", estimate)
        }
    };
    println!(
        "n={blocklength} rc={} rp={} messages={}x{} trials={trials} adversary={label}",
        sig9(rc),
        sig9(rp),
        code.common_count(),
        code.private_count()
    );
    println!(
        "p_err={} half_width={} seed={seed}",
        sig9(estimate.p_err),
        sig9(estimate.half_width)
    );
    if let Some(log) = output {
        let header = "n,rc,rp,trials,adversary,p_err,half_width,seed\n";
        let need_header = std::fs::metadata(log).map(|m| m.len() == 0).unwrap_or(true);
        let mut row = String::new();
        if need_header {
            row.push_str(header);
        }
        let _ = writeln!(
            row,
            "{blocklength},{},{},{trials},{label},{},{},{seed}",
            sig9(rc),
            sig9(rp),
            sig9(estimate.p_err),
            sig9(estimate.half_width)
        );
        use std::io::Write;
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(log)
            .map_err(|e| e.to_string())?;
        file.write_all(row.as_bytes()).map_err(|e| e.to_string())?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = thread_cap_from_env() {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    let outcome = match &cli.command {
        Command::Region {
            input,
            output,
            seed,
            tol,
            directions,
            restarts,
            max_iters,
            u_size,
        } => cmd_region(
            input, output, *seed, *tol, *directions, *restarts, *max_iters, *u_size,
        ),
        Command::Symmetrizable { input, tol } => cmd_symmetrizable(input, *tol),
        Command::BscFigure {
            p,
            p_min,
            p_max,
            alpha_samples,
            output,
        } => cmd_bsc_figure(*p, *p_min, p_max, *alpha_samples, output),
        Command::Verify {
            input,
            samples,
            seed,
            tol,
            u_size,
            q_size,
            region_file,
        } => cmd_verify(
            input,
            *samples,
            *seed,
            *tol,
            *u_size,
            *q_size,
            region_file.as_deref(),
        ),
        Command::Simulate {
            input,
            rc,
            rp,
            blocklength,
            trials,
            adversary,
            alpha,
            seed,
            output,
        } => cmd_simulate(
            input,
            *rc,
            *rp,
            *blocklength,
            *trials,
            *adversary,
            *alpha,
            *seed,
            output.as_deref(),
        ),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
