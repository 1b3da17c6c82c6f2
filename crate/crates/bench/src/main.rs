use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rbfpde::linalg::SolverChoice;
use rbfpde_bench::config::{parse_basis, parse_solver, RunConfig};
use rbfpde_bench::report::{emit_report, emit_tables, Format};
use rbfpde_bench::runner::run_cell;
use rbfpde_bench::verify::{self, Check};
use rbfpde_bench::{convergence_sweep, run_case, Method, Registry, RunOptions};

/// Meshfree RBF benchmarks: boundary knot, boundary particle and modified
/// Kansa methods on manufactured-solution problems.
#[derive(Parser)]
#[command(name = "rbfpde", version)]
struct Cli {
    /// Problem registry (TOML); the built-in one is used by default.
    #[arg(long, global = true)]
    registry: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case.
    Run(RunArgs),
    /// Run one case per boundary count in a schedule.
    Sweep(RunArgs),
    /// Reproduce the published tables; exits nonzero if any cell misses its bound.
    Tables {
        /// Only this table.
        #[arg(long)]
        table: Option<u32>,
        #[arg(long, default_value = "markdown", value_parser = parse_format)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suites.
    Verify,
    /// List registered problems.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long)]
    boundary_nodes: Option<usize>,
    #[arg(long)]
    interior_nodes: Option<usize>,
    /// Points per side of a unit-square MKM lattice.
    #[arg(long)]
    lattice: Option<usize>,
    /// BPM truncation order.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    dirichlet_fraction: Option<f64>,
    /// `lu`, `tsvd` or `tsvd:<rcut>`.
    #[arg(long, value_parser = parse_solver)]
    solver: Option<SolverChoice>,
    /// DRM basis: `linear`, `thin-plate`, `cubic` or `mq:<c>`.
    #[arg(long, value_parser = parse_basis)]
    basis: Option<rbfpde::rbf::RbfKind>,
    /// MKM shape parameter.
    #[arg(long)]
    shape: Option<f64>,
    /// Comma-separated boundary counts (sweep only).
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock times in the report.
    #[arg(long)]
    timing: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: rbfpde_bench::BenchError| e.to_string())
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: rbfpde_bench::BenchError| e.to_string())
}

struct Resolved {
    problem: String,
    method: Method,
    options: RunOptions,
    schedule: Vec<usize>,
    format: Format,
    out: Option<PathBuf>,
    timing: bool,
}

fn resolve(args: RunArgs) -> Result<Resolved> {
    let cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    let defaults = RunOptions::default();
    let Some(problem) = args.problem.or(cfg.problem) else {
        bail!("no problem given (use --problem or `problem =` in the config)");
    };
    let options = RunOptions {
        boundary: args.boundary_nodes.or(cfg.boundary_nodes).unwrap_or(defaults.boundary),
        interior: args.interior_nodes.or(cfg.interior_nodes).unwrap_or(defaults.interior),
        lattice: args.lattice.or(cfg.lattice),
        order: args.order.or(cfg.order).unwrap_or(defaults.order),
        dirichlet_fraction: args.dirichlet_fraction.or(cfg.dirichlet_fraction),
        solver: args.solver.or(cfg.solver).unwrap_or(defaults.solver),
        drm_basis: args.basis.or(cfg.basis).unwrap_or(defaults.drm_basis),
        shape: args.shape.or(cfg.shape),
        eval_points: None,
    };
    Ok(Resolved {
        problem,
        method: args.method.or(cfg.method).unwrap_or(Method::Bkm),
        options,
        schedule: args.schedule.or(cfg.schedule).unwrap_or_else(|| vec![16, 32, 64]),
        format: args.format.or(cfg.format).unwrap_or(Format::Csv),
        out: args.out.or(cfg.out),
        timing: args.timing || cfg.timing.unwrap_or(false),
    })
}

fn write_out(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_checks(checks: &[Check]) -> bool {
    let mut ok = true;
    for c in checks {
        let status = if c.passed() { "pass" } else { "FAIL" };
        ok &= c.passed();
        println!("{status}  {}  defect {:.2e} (tolerance {:.0e})", c.name, c.defect, c.tolerance);
    }
    ok
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let registry = match &cli.registry {
        Some(path) => Registry::from_toml_str(&fs::read_to_string(path)?)?,
        None => Registry::builtin()?,
    };
    match cli.command {
        Command::Run(args) => {
            let r = resolve(args)?;
            let problem = registry.get(&r.problem)?;
            let result = run_case(problem, r.method, &r.options);
            write_out(&emit_report(std::slice::from_ref(&result), r.format, r.timing), r.out.as_ref())?;
            if let Some(f) = result.failure {
                eprintln!("run failed: {f}");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Sweep(args) => {
            let r = resolve(args)?;
            let problem = registry.get(&r.problem)?;
            let results = convergence_sweep(problem, r.method, &r.schedule, &r.options)?;
            write_out(&emit_report(&results, r.format, r.timing), r.out.as_ref())?;
        }
        Command::Tables { table, format, out } => {
            let mut runs = Vec::new();
            for cell in registry.cells.iter().filter(|c| table.map_or(true, |t| c.table == t)) {
                let (result, pass) = run_cell(&registry, cell)?;
                runs.push((cell.clone(), result, pass));
            }
            let text = match format {
                Format::Markdown => emit_tables(&runs),
                Format::Csv => emit_report(&runs.iter().map(|(_, r, _)| r.clone()).collect::<Vec<_>>(), Format::Csv, false),
            };
            write_out(&text, out.as_ref())?;
            let misses = runs.iter().filter(|(_, _, pass)| !pass).count();
            if misses > 0 {
                eprintln!("{misses} of {} cells missed their bound", runs.len());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Verify => {
            let mut ok = print_checks(&verify::registry_consistency(&registry));
            ok &= print_checks(&verify::kernel_certification(5, 1e-5)?);
            ok &= print_checks(&verify::symmetry_suite(1e-9)?);
            ok &= print_checks(&verify::bpm_identities(&registry, 1e-12)?);
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::List => {
            for p in registry.problems() {
                let params: Vec<String> = p.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let peclet = p.peclet().map(|v| format!(" P={v:.4}")).unwrap_or_default();
                println!(
                    "{:<30} {}d {:?} {}{peclet}{}",
                    p.id,
                    p.op.dim(),
                    p.domain,
                    params.join(" "),
                    if p.homogeneous { " homogeneous" } else { "" }
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
