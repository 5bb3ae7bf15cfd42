//! Command-line front end: integral evaluation, identity verification,
//! zero counting, diagram scanning, and figure rendering.

use clap::{Args, Parser, Subcommand, ValueEnum};
use duffing_core::config::{parse_complex, RunConfig};
use duffing_core::error::Error as CoreError;
use duffing_core::level_curve::{
    integrate_cycle, integrate_cycle_derivative, Cycle, CycleSpec, Exponent, Side,
};
use duffing_core::picard_fuchs::{i4prime, Evaluator};
use duffing_core::zero_counter::{count_zeros, ContourCache, CountStatus, MelnikovParams};
use duffing_core::{atlas, verify};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "duffing", version, about = "Abelian integrals and Melnikov zero diagrams of the asymmetric Duffing oscillator")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// key=value config file; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// worker threads (0 = all cores); 1 gives bit-identical serial runs
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// seed for sampling-based verification
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// quadrature relative tolerance
    #[arg(long, global = true)]
    quad_rtol: Option<f64>,
    /// ODE relative tolerance
    #[arg(long, global = true)]
    ode_rtol: Option<f64>,
    /// ODE absolute tolerance
    #[arg(long, global = true)]
    ode_atol: Option<f64>,
    /// keyhole contour radius
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// keyhole cut offset
    #[arg(long, global = true)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an integral at an energy by quadrature and/or continuation
    Eval(EvalArgs),
    /// Run a verification suite and print its residual table
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Count zeros of l0 I0 + l2 I2 + l4 I4' in the cut plane (JSON output)
    Count {
        #[arg(allow_hyphen_values = true)]
        lambda0: f64,
        #[arg(allow_hyphen_values = true)]
        lambda2: f64,
        #[arg(allow_hyphen_values = true)]
        lambda4: f64,
    },
    /// Scan a projective parameter space and write dataset, summary and SVG
    Scan(ScanArgs),
    /// Re-render the SVG figure from a saved dataset
    Render {
        /// dataset.jsonl produced by scan
        #[arg(long)]
        input: PathBuf,
        /// output SVG path
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EvalArgs {
    /// exponent of the integrand x^i y dx: 0, 2 or 4 (4 denotes I4')
    #[arg(long)]
    i: u32,
    /// energy, real or complex `a+bi`
    #[arg(long, allow_hyphen_values = true)]
    h: String,
    /// cycle for real-energy quadrature
    #[arg(long, value_enum, default_value = "gamma")]
    cycle: CycleArg,
    /// branch-cut side for delta0 quadrature and boundary values
    #[arg(long, value_enum, default_value = "upper")]
    side: SideArg,
}

#[derive(Args)]
struct ScanArgs {
    /// parameter space: rp1 (first Melnikov function) or rp2 (principal part)
    #[arg(long, value_enum)]
    space: SpaceArg,
    /// grid resolution (cells per axis, or angular cells for rp1)
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// output directory for dataset.jsonl, summary.csv and figure.svg
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Pf,
    Monodromy,
    Wronskian,
    Asymptotics,
}

#[derive(Clone, Copy, ValueEnum)]
enum CycleArg {
    Gamma,
    Delta0,
    #[value(name = "delta+1")]
    DeltaPlus1,
    #[value(name = "delta-1")]
    DeltaMinus1,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Upper,
    Lower,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Rp1,
    Rp2,
}

fn exit_code_for(err: &CoreError) -> u8 {
    if err.is_domain() {
        2
    } else {
        3
    }
}

fn build_config(g: &GlobalOpts) -> Result<RunConfig, CoreError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &g.config {
        cfg.apply_file(path)?;
    }
    cfg.apply_env()?;
    if let Some(v) = g.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.quad_rtol {
        cfg.quad_rtol = v;
    }
    if let Some(v) = g.ode_rtol {
        cfg.ode_rtol = v;
    }
    if let Some(v) = g.ode_atol {
        cfg.ode_atol = v;
    }
    if let Some(v) = g.radius {
        cfg.contour_radius = v;
    }
    if let Some(v) = g.delta {
        cfg.contour_delta = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global().ok();
    }
    match run(cli.command, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn make_evaluator(cfg: &RunConfig) -> Result<Evaluator, CoreError> {
    Evaluator::new(cfg.quad_rtol, cfg.ode_tol(), cfg.clearance)
}

fn run(cmd: Command, cfg: &RunConfig) -> Result<ExitCode, CoreError> {
    match cmd {
        Command::Eval(args) => cmd_eval(args, cfg),
        Command::Verify { suite } => cmd_verify(suite, cfg),
        Command::Count { lambda0, lambda2, lambda4 } => cmd_count(lambda0, lambda2, lambda4, cfg),
        Command::Scan(args) => cmd_scan(args, cfg),
        Command::Render { input, out } => cmd_render(input, out),
    }
}

fn fmt_c(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.16e}", z.re)
    } else {
        format!("{:.16e} {} {:.16e}i", z.re, if z.im < 0.0 { "-" } else { "+" }, z.im.abs())
    }
}

fn cmd_eval(args: EvalArgs, cfg: &RunConfig) -> Result<ExitCode, CoreError> {
    let h = parse_complex(&args.h)?;
    let i = Exponent::from_power(args.i)?;
    let cycle = match args.cycle {
        CycleArg::Gamma => Cycle::Gamma,
        CycleArg::Delta0 => Cycle::Delta0,
        CycleArg::DeltaPlus1 => Cycle::DeltaPlus1,
        CycleArg::DeltaMinus1 => Cycle::DeltaMinus1,
    };
    let side = match args.side {
        SideArg::Upper => Side::Upper,
        SideArg::Lower => Side::Lower,
    };
    let ev = make_evaluator(cfg)?;

    // continuation value (I4' via the algebraic relation)
    let pv = ev.periods(h)?;
    let cont = match i {
        Exponent::X0 => pv.i0,
        Exponent::X2 => pv.i2,
        Exponent::X4 => i4prime(&pv)?,
    };
    println!("continuation  {}", fmt_c(cont));

    // quadrature route where the cycle exists at real h
    if h.im == 0.0 {
        let spec = CycleSpec::new(cycle, if cycle == Cycle::Gamma { Side::NotOnCut } else { side });
        let quad = if i == Exponent::X4 {
            // I4' is the derivative integral of x^4 y dx
            integrate_cycle_derivative(spec, Exponent::X4, h.re, cfg.quad_rtol)
        } else {
            integrate_cycle(spec, i, h.re, cfg.quad_rtol)
        };
        match quad {
            Ok(q) => {
                println!("quadrature    {}", fmt_c(q));
                println!("difference    {:.3e}", (q - cont).norm());
            }
            Err(e) if e.is_domain() => {
                println!("quadrature    (cycle unavailable at this energy: {e})");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_report(name: &str, report: &verify::Report) {
    println!("suite {name}");
    for ch in &report.checks {
        println!(
            "  [{}] {:<58} residual {:>12.4e}  tol {:>8.1e}",
            if ch.passed() { "pass" } else { "FAIL" },
            ch.name,
            ch.residual,
            ch.tolerance
        );
    }
    for (name, value) in &report.measured {
        println!("  measured {:<50} {:+.12e}", name, value);
    }
    let n_pass = report.checks.iter().filter(|c| c.passed()).count();
    println!("  {} of {} checks passed", n_pass, report.checks.len());
}

fn cmd_verify(suite: Suite, cfg: &RunConfig) -> Result<ExitCode, CoreError> {
    let ev = make_evaluator(cfg)?;
    let report = match suite {
        Suite::Pf => {
            let mut r = verify::verify_pf(&ev, 1e-6, 1e-8)?;
            r.checks.extend(verify::verify_i4prime_relation(&ev, 10, 1e-6)?.checks);
            r
        }
        Suite::Monodromy => {
            let mut r = verify::verify_monodromy(&ev, 1e-5)?;
            r.checks.extend(verify::verify_saddle_ratio(&ev, 1e-6)?.checks);
            r
        }
        Suite::Wronskian => verify::verify_wronskian(&ev, 1e-5, 1e-6)?,
        Suite::Asymptotics => verify::verify_asymptotics(&ev, 1e-4)?,
    };
    let name = match suite {
        Suite::Pf => "pf",
        Suite::Monodromy => "monodromy",
        Suite::Wronskian => "wronskian",
        Suite::Asymptotics => "asymptotics",
    };
    print_report(name, &report);
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_count(l0: f64, l2: f64, l4: f64, cfg: &RunConfig) -> Result<ExitCode, CoreError> {
    let ev = make_evaluator(cfg)?;
    let cache = ContourCache::new();
    let params = MelnikovParams::new(l0, l2, l4)?;
    let contour = cfg.contour();
    let z = count_zeros(&ev, &cache, &params, &contour)?;
    let out = serde_json::json!({
        "count": z.count,
        "status": format!("{:?}", z.status),
        "winding_defect": z.winding_defect,
        "min_modulus_on_contour": z.min_modulus_on_contour,
        "lambda": params.as_array(),
    });
    println!("{}", serde_json::to_string(&out).unwrap());
    Ok(ExitCode::SUCCESS)
}

fn cmd_scan(args: ScanArgs, cfg: &RunConfig) -> Result<ExitCode, CoreError> {
    let ev = make_evaluator(cfg)?;
    let cache = ContourCache::new();
    let space = match args.space {
        SpaceArg::Rp1 => atlas::Space::Rp1,
        SpaceArg::Rp2 => atlas::Space::Rp2,
    };
    let contour = cfg.contour();
    let result = atlas::scan(&ev, &cache, space, args.resolution, &contour)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CoreError::InvalidInput(format!("cannot create {}: {e}", args.out.display())))?;
    let write_err =
        |e: std::io::Error| CoreError::InvalidInput(format!("cannot write output: {e}"));
    let mut f = std::fs::File::create(args.out.join("dataset.jsonl")).map_err(write_err)?;
    atlas::write_dataset(&result, &mut f).map_err(write_err)?;
    let mut f = std::fs::File::create(args.out.join("summary.csv")).map_err(write_err)?;
    atlas::write_summary(&result, &mut f).map_err(write_err)?;
    std::fs::write(args.out.join("figure.svg"), atlas::render_svg(&result)).map_err(write_err)?;
    let stable = result.cells.iter().filter(|c| c.status == CountStatus::Stable).count();
    println!(
        "scanned {} cells ({} stable, {:.1}%); wrote dataset.jsonl, summary.csv, figure.svg to {}",
        result.cells.len(),
        stable,
        100.0 * stable as f64 / result.cells.len() as f64,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_render(input: PathBuf, out: PathBuf) -> Result<ExitCode, CoreError> {
    let file = std::fs::File::open(&input)
        .map_err(|e| CoreError::InvalidInput(format!("cannot open {}: {e}", input.display())))?;
    let result = atlas::read_dataset(std::io::BufReader::new(file))?;
    std::fs::write(&out, atlas::render_svg(&result))
        .map_err(|e| CoreError::InvalidInput(format!("cannot write {}: {e}", out.display())))?;
    println!("rendered {} cells to {}", result.cells.len(), out.display());
    Ok(ExitCode::SUCCESS)
}
