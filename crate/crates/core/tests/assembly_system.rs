//! Global assembly against a DOF-pair bilinear-form oracle, Dirichlet
//! elimination behavior, and a first whole-pipeline affine solve.

use swg_core::elements::{weak_divergence, weak_gradient, ElementView};
use swg_core::{
    apply_dirichlet, assemble_operator, assemble_rhs, assemble_system, build_dof_map,
    dirichlet_values, generate_mesh, solve, AssemblyError, BoundaryTag, BoxDomain, Formulation,
    HScale, MaterialParams, MeshFamily, Point, SolveStatus, StabilizationConfig,
};

#[test]
fn dof_counts_rectangular_all_dirichlet() {
    let mesh = generate_mesh(MeshFamily::Rectangular, 2, &BoxDomain::unit_square()).unwrap();
    let dof_map = build_dof_map(&mesh, Formulation::Mixed).unwrap();
    assert_eq!(dof_map.n_disp, 24);
    assert_eq!(dof_map.n_constrained(), 16);
    assert_eq!(dof_map.n_pressure, 4);
}

#[test]
fn dof_counts_mixed_bc_layout() {
    let mut mesh = generate_mesh(MeshFamily::Rectangular, 2, &BoxDomain::unit_square()).unwrap();
    mesh.set_boundary_tags(&|p: &Point| {
        if p[0].abs() < 1e-9 {
            BoundaryTag::Dirichlet
        } else {
            BoundaryTag::Neumann
        }
    });
    let dof_map = build_dof_map(&mesh, Formulation::Primal).unwrap();
    // two facets on x = 0, two components each
    assert_eq!(dof_map.n_constrained(), 4);
}

#[test]
fn empty_dirichlet_set_refused() {
    let mut mesh = generate_mesh(MeshFamily::Rectangular, 2, &BoxDomain::unit_square()).unwrap();
    mesh.set_boundary_tags(&|_: &Point| BoundaryTag::Neumann);
    match build_dof_map(&mesh, Formulation::Primal) {
        Err(AssemblyError::NoDirichletBoundary) => {}
        other => panic!("expected NoDirichletBoundary, got {other:?}"),
    }
}

/// Brute-force global bilinear form a(phi_i, phi_j) evaluated DOF pair by
/// DOF pair from the weak operators; includes the tangential jump terms.
fn bilinear_form_oracle(
    mesh: &swg_core::PolytopalMesh,
    mat: &MaterialParams,
    stab: &StabilizationConfig,
    phi_i: &[f64],
    phi_j: &[f64],
) -> f64 {
    let dim = mesh.dim;
    let mut total = 0.0;
    for e in 0..mesh.elements.len() {
        let view = ElementView::new(mesh, e);
        let n = view.n;
        let local = |phi: &[f64]| -> Vec<f64> {
            let mut v = vec![0.0; dim * n];
            for (i, &f) in view.facet_ids.iter().enumerate() {
                for k in 0..dim {
                    v[k * n + i] = phi[f * dim + k];
                }
            }
            v
        };
        let (ui, uj) = (local(phi_i), local(phi_j));
        let eps = |w: &[f64]| -> [[f64; 3]; 3] {
            let mut g = [[0.0; 3]; 3];
            for c in 0..dim {
                let gc = weak_gradient(&view, &w[c * n..(c + 1) * n]);
                for b in 0..dim {
                    g[c][b] = gc[b];
                }
            }
            let mut out = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    out[a][b] = 0.5 * (g[a][b] + g[b][a]);
                }
            }
            out
        };
        let (ei, ej) = (eps(&ui), eps(&uj));
        let mut frob = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                frob += ei[a][b] * ej[a][b];
            }
        }
        total += 2.0 * mat.mu * frob * view.volume;
        total += mat.lambda
            * weak_divergence(&view, &ui)
            * weak_divergence(&view, &uj)
            * view.volume;
        // definition-level S_T through the projection of each component
        let proj = swg_core::elements::projection_matrix(&view).unwrap();
        for c in 0..dim {
            let fit = |w: &[f64], i: usize| -> f64 {
                let mut s = 0.0;
                for r in 0..=dim {
                    let basis = if r == 0 {
                        1.0
                    } else {
                        view.midpoints[i][r - 1] - view.centroid[r - 1]
                    };
                    let coef: f64 = (0..n).map(|m| proj[(r, m)] * w[c * n + m]).sum();
                    s += coef * basis;
                }
                s
            };
            for i in 0..n {
                total += (fit(&ui, i) - ui[c * n + i]) * (fit(&uj, i) - uj[c * n + i])
                    * view.measures[i]
                    / view.diameter;
            }
        }
    }
    if stab.kappa > 0.0 {
        for (fid, f) in mesh.facets.iter().enumerate() {
            let boundary = f.right.is_none();
            if boundary && !stab.boundary_tangential {
                continue;
            }
            let gamma = StabilizationConfig::gamma(boundary);
            let jump = |phi: &[f64], comp: usize| -> [f64; 3] {
                let lv = ElementView::new(mesh, f.left);
                let n = lv.n;
                let mut vals = vec![0.0; n];
                for (i, &ff) in lv.facet_ids.iter().enumerate() {
                    vals[i] = phi[ff * dim + comp];
                }
                let mut g = weak_gradient(&lv, &vals);
                if let Some(r) = f.right {
                    let rv = ElementView::new(mesh, r);
                    let mut rvals = vec![0.0; rv.n];
                    for (i, &ff) in rv.facet_ids.iter().enumerate() {
                        rvals[i] = phi[ff * dim + comp];
                    }
                    let gr = weak_gradient(&rv, &rvals);
                    for k in 0..3 {
                        g[k] -= gr[k];
                    }
                }
                // tangential part: remove the normal component
                let dn: f64 = (0..3).map(|k| g[k] * f.normal[k]).sum();
                [
                    g[0] - dn * f.normal[0],
                    g[1] - dn * f.normal[1],
                    g[2] - dn * f.normal[2],
                ]
            };
            for c in 0..dim {
                let ji = jump(phi_i, c);
                let jj = jump(phi_j, c);
                let dot: f64 = (0..3).map(|k| ji[k] * jj[k]).sum();
                total += stab.kappa * f.diameter.powi(gamma) * f.measure * dot;
                let _ = fid;
            }
        }
    }
    total
}

#[test]
fn global_matrix_matches_bilinear_form_oracle() {
    // two-element rectangular mesh, kappa = 1 with boundary terms on so every
    // code path contributes
    let mesh = generate_mesh(
        MeshFamily::Rectangular,
        1,
        &BoxDomain::new_2d([0.0, 0.0], [2.0, 1.0]),
    )
    .unwrap();
    assert_eq!(mesh.elements.len(), 2);
    let mat = MaterialParams::from_young_poisson(1.0, 0.45).unwrap();
    let stab = StabilizationConfig::new(1.0, true);
    let dof_map = build_dof_map(&mesh, Formulation::Primal).unwrap();
    let op = assemble_operator(&mesh, &dof_map, &mat, &stab, HScale::Local).unwrap();

    let nd = dof_map.n_disp;
    for i in 0..nd {
        let mut phi_i = vec![0.0; nd];
        phi_i[i] = 1.0;
        for j in 0..nd {
            let mut phi_j = vec![0.0; nd];
            phi_j[j] = 1.0;
            let oracle = bilinear_form_oracle(&mesh, &mat, &stab, &phi_i, &phi_j);
            let got = op.get(i, j);
            assert!(
                (got - oracle).abs() < 1e-12 * oracle.abs().max(1.0),
                "entry ({i},{j}): {got} vs {oracle}"
            );
        }
    }
}

#[test]
fn assembled_operator_annihilates_translations() {
    let mesh = generate_mesh(MeshFamily::Hexagonal, 4, &BoxDomain::unit_square()).unwrap();
    let mat = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
    let stab = StabilizationConfig::new(1.0, false);
    let dof_map = build_dof_map(&mesh, Formulation::Primal).unwrap();
    let op = assemble_operator(&mesh, &dof_map, &mat, &stab, HScale::Local).unwrap();
    let norm = op.frobenius_norm();
    for comp in 0..2 {
        let mut t = vec![0.0; dof_map.n_total()];
        for f in 0..mesh.facets.len() {
            t[dof_map.disp_dof(f, comp)] = 1.0;
        }
        let mut y = vec![0.0; dof_map.n_total()];
        op.matvec(&t, &mut y);
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(ynorm <= 1e-10 * norm, "component {comp}: |Kt| = {ynorm}");
    }
}

#[test]
fn assembly_is_symmetric() {
    let mesh = generate_mesh(MeshFamily::Octagonal, 3, &BoxDomain::unit_square()).unwrap();
    let mat = MaterialParams::from_young_poisson(1.0, 0.45).unwrap();
    let stab = StabilizationConfig::new(1.0, true);
    let dof_map = build_dof_map(&mesh, Formulation::Mixed).unwrap();
    let op = assemble_operator(&mesh, &dof_map, &mat, &stab, HScale::Local).unwrap();
    assert!(op.symmetry_defect() < 1e-12);
}

#[test]
fn dirichlet_projection_values() {
    let mesh = generate_mesh(MeshFamily::Rectangular, 2, &BoxDomain::unit_square()).unwrap();
    let dof_map = build_dof_map(&mesh, Formulation::Primal).unwrap();
    // affine g: facet average equals the midpoint value
    let g = |p: &Point| [1.0 + 2.0 * p[0] - p[1], 0.5 * p[1], 0.0];
    let values = dirichlet_values(&mesh, &dof_map, &g);
    for (fid, f) in mesh.facets.iter().enumerate() {
        if f.right.is_none() {
            let expect = g(&f.midpoint);
            for k in 0..2 {
                assert!((values[dof_map.disp_dof(fid, k)] - expect[k]).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn zero_dirichlet_keeps_rhs() {
    let mesh = generate_mesh(MeshFamily::Rectangular, 2, &BoxDomain::unit_square()).unwrap();
    let mat = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
    let stab = StabilizationConfig::off();
    let dof_map = build_dof_map(&mesh, Formulation::Primal).unwrap();
    let op = assemble_operator(&mesh, &dof_map, &mat, &stab, HScale::Local).unwrap();
    let f = |_: &Point| [1.0, -2.0, 0.0];
    let rhs = assemble_rhs(&mesh, &dof_map, &f, &|_| [0.0; 3]).unwrap();
    let sys = apply_dirichlet(&op, &rhs, &dof_map, vec![0.0; dof_map.n_disp]);
    for (fi, &dof) in sys.free_of_full.iter().enumerate() {
        assert_eq!(sys.rhs[fi], rhs[dof]);
    }
}

#[test]
fn single_element_fully_constrained() {
    let mesh = generate_mesh(MeshFamily::Rectangular, 1, &BoxDomain::unit_square()).unwrap();
    let mat = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
    let sys = assemble_system(
        &mesh,
        &mat,
        &StabilizationConfig::off(),
        Formulation::Primal,
        HScale::Local,
        &|_| [0.0; 3],
        &|_| [0.0; 3],
        &|_| [0.0; 3],
    )
    .unwrap();
    // every displacement DOF is constrained: the free system is empty
    assert_eq!(sys.matrix.n, 0);
    let (sol, report) = solve(&sys, 1e-10);
    assert_eq!(report.status, SolveStatus::Converged);
    assert!(sol.u.iter().all(|&v| v == 0.0));
}

#[test]
fn affine_patch_solve_is_exact() {
    // u = (1 + 2x - y, 3 - x + y): zero body force, Dirichlet everywhere;
    // facet averages of the exact field must come back unchanged
    let exact = |p: &Point| [1.0 + 2.0 * p[0] - p[1], 3.0 - p[0] + p[1], 0.0];
    for family in [
        MeshFamily::Rectangular,
        MeshFamily::Triangular,
        MeshFamily::Hexagonal,
        MeshFamily::Octagonal,
    ] {
        let mesh = generate_mesh(family, 3, &BoxDomain::unit_square()).unwrap();
        let mat = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
        let sys = assemble_system(
            &mesh,
            &mat,
            &StabilizationConfig::new(1.0, false),
            Formulation::Primal,
            HScale::Local,
            &|_| [0.0; 3],
            &|_| [0.0; 3],
            &exact,
        )
        .unwrap();
        let (sol, report) = solve(&sys, 1e-10);
        assert_eq!(report.status, SolveStatus::Converged, "{family:?}");
        for (fid, f) in mesh.facets.iter().enumerate() {
            let expect = exact(&f.midpoint);
            for k in 0..2 {
                let got = sol.u[fid * 2 + k];
                assert!(
                    (got - expect[k]).abs() < 1e-9,
                    "{family:?} facet {fid} comp {k}: {got} vs {}",
                    expect[k]
                );
            }
        }
    }
}

#[test]
fn mixed_and_primal_solutions_agree() {
    let mesh = generate_mesh(MeshFamily::Rectangular, 4, &BoxDomain::unit_square()).unwrap();
    let mat = MaterialParams::from_young_poisson(1.0, 0.45).unwrap();
    let stab = StabilizationConfig::new(1.0, false);
    let f = |p: &Point| [p[0].sin(), p[1].cos(), 0.0];
    let g = |_: &Point| [0.0; 3];
    let mut solutions = Vec::new();
    for formulation in [Formulation::Primal, Formulation::Mixed] {
        let sys = assemble_system(
            &mesh,
            &mat,
            &stab,
            formulation,
            HScale::Local,
            &f,
            &|_| [0.0; 3],
            &g,
        )
        .unwrap();
        let (sol, report) = solve(&sys, 1e-12);
        assert_eq!(report.status, SolveStatus::Converged);
        solutions.push(sol);
    }
    let max_diff = solutions[0]
        .u
        .iter()
        .zip(solutions[1].u.iter())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(max_diff < 1e-10, "primal vs mixed: {max_diff}");
}
