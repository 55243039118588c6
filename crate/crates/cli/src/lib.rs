//! Config-driven convergence studies and benchmarks over the SWG solver:
//! mesh sweep, assembly, solve, error tables, CSV and VTK artifacts.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use swg_core::{
    assemble_system, generate_cook_mesh, generate_mesh, get_case, recover_pressure, solve,
    write_csv, write_vtk, AnalyticCase, AssemblyError, CaseDomain, CaseError, CaseName,
    ErrorReport, FieldSolution, Formulation, H1Variant, HScale, LevelRecord, MeshError,
    MeshFamily, PolytopalMesh, SolveReport, SolveStatus, StabilizationConfig,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config error: {0}")]
    Config(String),
}

/// Everything one study needs; mirrors the CLI flags one to one.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub case: CaseName,
    pub family: MeshFamily,
    pub levels: Vec<usize>,
    pub kappa: f64,
    pub boundary_tangential: bool,
    pub formulation: Formulation,
    pub youngs: Option<f64>,
    pub poisson: Option<f64>,
    pub tol: f64,
    pub out_dir: PathBuf,
    pub h1_variant: H1Variant,
    pub h_scale: HScale,
    pub emit_vtk: bool,
    pub export_mesh: bool,
    pub export_matrix: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case: CaseName::Tc1,
            family: MeshFamily::Rectangular,
            levels: vec![4, 8, 16, 32],
            kappa: 1.0,
            boundary_tangential: false,
            formulation: Formulation::Primal,
            youngs: None,
            poisson: None,
            tol: 1e-10,
            out_dir: PathBuf::from("swg-out"),
            h1_variant: H1Variant::Discrete,
            h_scale: HScale::Local,
            emit_vtk: true,
            export_mesh: false,
            export_matrix: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.levels.is_empty() {
            return Err(RunError::Config("levels must be nonempty".into()));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RunError::Config(
                "levels must be strictly increasing".into(),
            ));
        }
        if self.kappa < 0.0 {
            return Err(RunError::Config("kappa must be nonnegative".into()));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return Err(RunError::Config("tol must lie in (0, 1e-6]".into()));
        }
        Ok(())
    }
}

/// Mesh for the case's domain with its boundary layout applied.
pub fn build_case_mesh(
    case: &AnalyticCase,
    family: MeshFamily,
    n: usize,
) -> Result<PolytopalMesh, RunError> {
    let mut mesh = match case.domain {
        CaseDomain::Box(b) => generate_mesh(family, n, &b)?,
        CaseDomain::CookQuad => generate_cook_mesh(family, n)?,
    };
    mesh.set_boundary_tags(&*case.boundary);
    Ok(mesh)
}

pub struct LevelResult {
    pub record: LevelRecord,
    pub solve_report: SolveReport,
    pub mesh: PolytopalMesh,
    pub solution: Option<FieldSolution>,
    pub pressure: Vec<f64>,
}

/// Cook membrane probe point: midpoint of the loaded end.
pub const COOK_TIP: [f64; 3] = [48.0, 52.0, 0.0];

/// One refinement level: generate, assemble, solve, post-process. Singular
/// systems come back as a dash row rather than an error.
pub fn run_level(config: &RunConfig, case: &AnalyticCase, n: usize) -> Result<LevelResult, RunError> {
    let mesh = build_case_mesh(case, config.family, n)?;
    let stab = StabilizationConfig::new(config.kappa, config.boundary_tangential);
    let system = assemble_system(
        &mesh,
        &case.material,
        &stab,
        config.formulation,
        config.h_scale,
        &*case.body_force,
        &*case.traction,
        &*case.dirichlet,
    )?;
    let dofs = system.dof_map.n_disp;
    let (solution, solve_report) = solve(&system, config.tol);
    if solve_report.status == SolveStatus::Singular {
        return Ok(LevelResult {
            record: LevelRecord::singular(n, mesh.h, dofs),
            solve_report,
            mesh,
            solution: None,
            pressure: Vec::new(),
        });
    }
    let pressure = match &solution.pressure {
        Some(p) => p.clone(),
        None => recover_pressure(&mesh, &solution, case.material.lambda),
    };
    let tip = if case.domain_is_cook() {
        swg_core::evaluate_displacement(&mesh, &solution, &COOK_TIP).map(|u| u[1])
    } else {
        None
    };
    let record = if case.displacement.is_some() {
        let (e_l2, e_h1, e_p) =
            swg_core::compute_errors(&mesh, case, &solution, &pressure, config.h1_variant);
        LevelRecord {
            n,
            h: mesh.h,
            dofs,
            e_l2,
            e_h1,
            e_p,
            singular: false,
            tip,
        }
    } else {
        LevelRecord {
            n,
            h: mesh.h,
            dofs,
            e_l2: f64::NAN,
            e_h1: f64::NAN,
            e_p: f64::NAN,
            singular: false,
            tip,
        }
    };
    Ok(LevelResult {
        record,
        solve_report,
        mesh,
        solution: Some(solution),
        pressure,
    })
}

trait CookCheck {
    fn domain_is_cook(&self) -> bool;
}

impl CookCheck for AnalyticCase {
    fn domain_is_cook(&self) -> bool {
        matches!(self.domain, CaseDomain::CookQuad)
    }
}

pub struct RunSummary {
    pub report: ErrorReport,
    pub tips: Vec<Option<f64>>,
    pub all_levels_failed: bool,
    pub csv_path: PathBuf,
}

fn create(path: &PathBuf) -> Result<fs::File, RunError> {
    fs::File::create(path).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Full study: every level, then the CSV table and per-level VTK artifacts.
/// Returns the collected records; `all_levels_failed` is set when every
/// level came back singular.
pub fn run(config: &RunConfig, log: &mut dyn Write) -> Result<RunSummary, RunError> {
    config.validate()?;
    let case = get_case(config.case, config.youngs, config.poisson)?;
    fs::create_dir_all(&config.out_dir).map_err(|source| RunError::Io {
        path: config.out_dir.display().to_string(),
        source,
    })?;
    let stem = format!("{}_{}", config.case.as_str(), config.family.name());
    let mut report = ErrorReport::default();
    let mut tips = Vec::new();

    for &n in &config.levels {
        let level = run_level(config, &case, n)?;
        if level.record.singular {
            let _ = writeln!(
                log,
                "n={n:>3}  dof={:>7}  singular (pivot at free dof {:?})",
                level.record.dofs, level.solve_report.singular_pivot
            );
        } else if let Some(tip) = level.record.tip {
            let _ = writeln!(
                log,
                "n={n:>3}  dof={:>7}  tip_y={tip:.6}  residual={:.2e}",
                level.record.dofs, level.solve_report.relative_residual
            );
        } else {
            let _ = writeln!(
                log,
                "n={n:>3}  dof={:>7}  e_l2={:.4e}  e_h1={:.4e}  e_p={:.4e}  residual={:.2e}",
                level.record.dofs,
                level.record.e_l2,
                level.record.e_h1,
                level.record.e_p,
                level.solve_report.relative_residual
            );
        }
        if config.export_mesh {
            let path = config.out_dir.join(format!("{stem}_n{n}_mesh.json"));
            fs::write(&path, level.mesh.to_json()).map_err(|source| RunError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        if config.export_matrix {
            let stab = StabilizationConfig::new(config.kappa, config.boundary_tangential);
            let dof_map = swg_core::build_dof_map(&level.mesh, config.formulation)?;
            let op = swg_core::assemble_operator(
                &level.mesh,
                &dof_map,
                &case.material,
                &stab,
                config.h_scale,
            )?;
            let path = config.out_dir.join(format!("{stem}_n{n}_matrix.txt"));
            let mut f = create(&path)?;
            op.write_triplets(&mut f).map_err(|source| RunError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        if config.emit_vtk && !level.record.singular {
            if let Some(sol) = &level.solution {
                let path = config.out_dir.join(format!("{stem}_n{n}.vtk"));
                let mut f = create(&path)?;
                write_vtk(&level.mesh, sol, &level.pressure, &mut f).map_err(|source| {
                    RunError::Io {
                        path: path.display().to_string(),
                        source,
                    }
                })?;
            }
        }
        tips.push(level.record.tip);
        report.records.push(level.record);
    }

    let csv_path = config.out_dir.join(format!("{stem}.csv"));
    let mut f = create(&csv_path)?;
    write_csv(&report, &mut f).map_err(|source| RunError::Io {
        path: csv_path.display().to_string(),
        source,
    })?;

    let all_levels_failed = report.records.iter().all(|r| r.singular);
    let rates = report.rates();
    if let Some(last) = report.records.len().checked_sub(1) {
        if !report.records[last].singular && report.records[last].e_l2.is_finite() {
            let fmt = |r: Option<f64>| r.map_or("-".to_string(), |v| format!("{v:.2}"));
            let _ = writeln!(
                log,
                "final rates: l2={} h1={} p={}",
                fmt(rates[last][0]),
                fmt(rates[last][1]),
                fmt(rates[last][2])
            );
        }
    }
    if all_levels_failed {
        let _ = writeln!(log, "all levels singular; no results to report");
    }
    Ok(RunSummary {
        report,
        tips,
        all_levels_failed,
        csv_path,
    })
}
