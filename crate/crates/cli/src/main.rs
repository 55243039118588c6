//! Command-line front end: flags (or a flat key=value config file, flags
//! winning) select the case, mesh family, refinement levels and method
//! options; each run writes a CSV convergence table and per-level VTK files.

use clap::Parser;
use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use swg_cli::{run, RunConfig, RunError};
use swg_core::{CaseName, Formulation, H1Variant, HScale, MeshFamily};

#[derive(Parser, Debug)]
#[command(
    name = "swg",
    about = "P0 simplified weak Galerkin solver for linear elasticity on polytopal meshes",
    long_about = None
)]
struct Cli {
    /// Flat key=value config file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark case: tc1, tc2, tc3_mixed, tc3d_1, tc3d_2, cook, shear_beam.
    #[arg(long)]
    case: Option<String>,
    /// Mesh family: triangular, rectangular/quadrilateral, hexagonal,
    /// octagonal, tetrahedral, cubic, hex_prism.
    #[arg(long)]
    mesh: Option<String>,
    /// Comma-separated subdivision levels, e.g. 4,8,16,32.
    #[arg(long)]
    levels: Option<String>,
    /// Tangential-jump stabilization weight (0 disables the jump terms).
    #[arg(long)]
    kappa: Option<f64>,
    /// Include the one-sided tangential terms on boundary facets.
    #[arg(long = "boundary-stab", value_parser = ["on", "off"])]
    boundary_stab: Option<String>,
    /// Formulation: primal or mixed.
    #[arg(long)]
    formulation: Option<String>,
    /// Young's modulus override.
    #[arg(long = "E")]
    youngs: Option<f64>,
    /// Poisson ratio override.
    #[arg(long)]
    nu: Option<f64>,
    /// Solver relative-residual tolerance, in (0, 1e-6].
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory for CSV/VTK artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// H1 error variant: discrete or reconstructed.
    #[arg(long = "h1-norm", value_parser = ["discrete", "reconstructed"])]
    h1_norm: Option<String>,
    /// Stabilizer length scale: local (per element) or global.
    #[arg(long = "h-scale", value_parser = ["local", "global"])]
    h_scale: Option<String>,
    /// Skip writing per-level VTK files.
    #[arg(long)]
    no_vtk: bool,
    /// Dump each level's mesh as JSON (debugging aid).
    #[arg(long = "export-mesh")]
    export_mesh: bool,
    /// Dump each level's unconstrained operator as coordinate triplets.
    #[arg(long = "export-matrix")]
    export_matrix: bool,
}

fn parse_config_file(path: &PathBuf) -> Result<HashMap<String, String>, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(RunError::Config(format!(
                "{}:{}: expected key=value, got '{raw}'",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn merge(cli: Cli) -> Result<RunConfig, RunError> {
    let file = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };
    let pick = |flag: Option<String>, key: &str| -> Option<String> {
        flag.or_else(|| file.get(key).cloned())
    };
    let pick_num = |flag: Option<f64>, key: &str| -> Result<Option<f64>, RunError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match file.get(key) {
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| RunError::Config(format!("key '{key}': bad number '{v}'"))),
            None => Ok(None),
        }
    };

    let mut config = RunConfig::default();
    if let Some(case) = pick(cli.case, "case") {
        config.case = CaseName::from_str(&case)?;
    }
    if let Some(mesh) = pick(cli.mesh, "mesh") {
        config.family = MeshFamily::from_str(&mesh)?;
    }
    if let Some(levels) = pick(cli.levels, "levels") {
        config.levels = levels
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| RunError::Config(format!("bad level '{t}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
    }
    if let Some(kappa) = pick_num(cli.kappa, "kappa")? {
        config.kappa = kappa;
    }
    if let Some(bs) = pick(cli.boundary_stab, "boundary-stab") {
        config.boundary_tangential = match bs.as_str() {
            "on" => true,
            "off" => false,
            other => return Err(RunError::Config(format!("boundary-stab: '{other}'"))),
        };
    }
    if let Some(f) = pick(cli.formulation, "formulation") {
        config.formulation = match f.as_str() {
            "primal" => Formulation::Primal,
            "mixed" => Formulation::Mixed,
            other => return Err(RunError::Config(format!("formulation: '{other}'"))),
        };
    }
    config.youngs = pick_num(cli.youngs, "E")?;
    config.poisson = pick_num(cli.nu, "nu")?;
    if let Some(tol) = pick_num(cli.tol, "tol")? {
        config.tol = tol;
    }
    if let Some(out) = cli.out.or_else(|| file.get("out").map(PathBuf::from)) {
        config.out_dir = out;
    }
    if let Some(h1) = pick(cli.h1_norm, "h1-norm") {
        config.h1_variant = match h1.as_str() {
            "discrete" => H1Variant::Discrete,
            "reconstructed" => H1Variant::Reconstructed,
            other => return Err(RunError::Config(format!("h1-norm: '{other}'"))),
        };
    }
    if let Some(hs) = pick(cli.h_scale, "h-scale") {
        config.h_scale = match hs.as_str() {
            "local" => HScale::Local,
            "global" => HScale::Global,
            other => return Err(RunError::Config(format!("h-scale: '{other}'"))),
        };
    }
    config.emit_vtk = !cli.no_vtk
        && file
            .get("vtk")
            .map_or(true, |v| v != "off" && v != "false");
    config.export_mesh = cli.export_mesh;
    config.export_matrix = cli.export_matrix;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("SWG_THREADS") {
        match threads.parse::<usize>() {
            Ok(k) if k >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
            _ => {
                eprintln!("SWG_THREADS must be a positive integer, got '{threads}'");
                return ExitCode::from(2);
            }
        }
    }
    let config = match merge(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut out = std::io::stdout();
    match run(&config, &mut out) {
        Ok(summary) => {
            println!("table written to {}", summary.csv_path.display());
            if summary.all_levels_failed {
                // every level singular: distinct status so scripts can tell
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
