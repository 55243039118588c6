//! P0 simplified weak Galerkin (SWG) finite elements for linear elasticity
//! on general polygonal and polyhedral meshes.
//!
//! Displacement unknowns are piecewise constants on element facets; an
//! element-local affine least-squares extension reconstructs interior values.
//! The library covers structured polytopal mesh families, the mixed
//! (displacement/pseudo-pressure) and primal formulations with an optional
//! tangential-jump stabilizer, a direct symmetric solver with singularity
//! detection, manufactured-solution benchmarks, and convergence-table
//! post-processing.

pub mod assembly;
pub mod cases;
pub mod elements;
pub mod geometry;
pub mod postproc;
pub mod quadrature;
pub mod solver;

pub use assembly::{
    apply_dirichlet, assemble_operator, assemble_rhs, assemble_system, build_dof_map,
    dirichlet_values, AssemblyError, DofMap, Formulation, GlobalSystem, SymCsr,
};
pub use cases::{get_case, verify_case_consistency, AnalyticCase, CaseDomain, CaseError, CaseName};
pub use elements::{
    ElementView, HScale, KernelError, MaterialParams, StabilizationConfig,
};
pub use geometry::generators::{
    generate_cook_mesh, generate_mesh, BoxDomain, MeshError, MeshFamily,
};
pub use geometry::{validate_mesh, BoundaryTag, Element, Facet, Point, PolytopalMesh};
pub use postproc::{
    compute_errors, evaluate_displacement, recover_pressure, write_csv, write_vtk, ErrorReport,
    FieldSolution, H1Variant, LevelRecord,
};
pub use solver::{solve, solve_reduced, SolveReport, SolveStatus};
