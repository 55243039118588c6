//! Pressure recovery, error norms, convergence tables, and CSV/VTK export.

use crate::assembly::Formulation;
use crate::cases::AnalyticCase;
use crate::elements::{
    eval_extension, extension_coefficients, projection_matrix, weak_divergence, weak_gradient,
    ElementView,
};
use crate::geometry::{Point, PolytopalMesh};
use crate::quadrature::element_quadrature;
use rayon::prelude::*;
use std::io::Write;

/// Facet-wise constant displacement plus element-wise constant pressure.
#[derive(Clone, Debug)]
pub struct FieldSolution {
    pub dim: usize,
    pub formulation: Formulation,
    /// Displacement values, `dim` per facet (Dirichlet facets carry the
    /// eliminated boundary values).
    pub u: Vec<f64>,
    /// Pressure per element; solved in the mixed form, recovered otherwise.
    pub pressure: Option<Vec<f64>>,
}

impl FieldSolution {
    /// Local stacked DOF values `[u_1..u_N, v_1.., (w_1..)]` of one element.
    pub fn element_values(&self, mesh: &PolytopalMesh, elem: usize) -> Vec<f64> {
        let facets = &mesh.elements[elem].facets;
        let n = facets.len();
        let mut vals = vec![0.0; self.dim * n];
        for (i, &f) in facets.iter().enumerate() {
            for k in 0..self.dim {
                vals[k * n + i] = self.u[f * self.dim + k];
            }
        }
        vals
    }
}

/// Pseudo-pressure recovery p|_T = lambda div_w(u_b) from a primal solution.
pub fn recover_pressure(mesh: &PolytopalMesh, sol: &FieldSolution, lambda: f64) -> Vec<f64> {
    (0..mesh.elements.len())
        .map(|e| {
            let view = ElementView::new(mesh, e);
            lambda * weak_divergence(&view, &sol.element_values(mesh, e))
        })
        .collect()
}

/// Which H1-type error is reported: the discrete weak-gradient distance to
/// the cell-averaged exact gradient, or the gradient of the affine
/// reconstruction integrated against the exact gradient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum H1Variant {
    Discrete,
    Reconstructed,
}

/// One refinement level of a convergence study.
#[derive(Clone, Debug)]
pub struct LevelRecord {
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub e_l2: f64,
    pub e_h1: f64,
    pub e_p: f64,
    pub singular: bool,
    /// Cook benchmark scalar: vertical displacement at the probe point.
    pub tip: Option<f64>,
}

impl LevelRecord {
    pub fn singular(n: usize, h: f64, dofs: usize) -> Self {
        LevelRecord {
            n,
            h,
            dofs,
            e_l2: f64::NAN,
            e_h1: f64::NAN,
            e_p: f64::NAN,
            singular: true,
            tip: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ErrorReport {
    pub records: Vec<LevelRecord>,
}

impl ErrorReport {
    /// Convergence rates log(e_prev/e_cur) / log(h_prev/h_cur) per column
    /// (L2, H1, pressure); `None` where a previous level is missing or either
    /// level is singular.
    pub fn rates(&self) -> Vec<[Option<f64>; 3]> {
        let mut out = vec![[None; 3]; self.records.len()];
        for i in 1..self.records.len() {
            let (prev, cur) = (&self.records[i - 1], &self.records[i]);
            if prev.singular || cur.singular {
                continue;
            }
            let scale = (prev.h / cur.h).ln();
            let rate = |ep: f64, ec: f64| -> Option<f64> {
                if ep > 0.0 && ec > 0.0 {
                    Some((ep / ec).ln() / scale)
                } else {
                    None
                }
            };
            out[i] = [
                rate(prev.e_l2, cur.e_l2),
                rate(prev.e_h1, cur.e_h1),
                rate(prev.e_p, cur.e_p),
            ];
        }
        out
    }
}

/// Displacement and pressure errors of a converged solution against the
/// case's exact fields. Integration runs per element in parallel with a
/// deterministic ordered reduction.
pub fn compute_errors(
    mesh: &PolytopalMesh,
    case: &AnalyticCase,
    sol: &FieldSolution,
    pressure: &[f64],
    h1: H1Variant,
) -> (f64, f64, f64) {
    let u_exact = case
        .displacement
        .as_ref()
        .expect("compute_errors needs exact displacement");
    let grad_exact = case
        .displacement_gradient
        .as_ref()
        .expect("compute_errors needs exact gradient");
    let p_exact = case
        .pressure
        .as_ref()
        .expect("compute_errors needs exact pressure");
    let dim = mesh.dim;

    let partials: Vec<[f64; 3]> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| {
            let view = ElementView::new(mesh, e);
            let proj = projection_matrix(&view).expect("converged solve implies valid elements");
            let vals = sol.element_values(mesh, e);
            let coeff = extension_coefficients(&view, &proj, &vals);
            let quad = element_quadrature(mesh, e);

            let mut l2 = 0.0;
            for (x, w) in &quad {
                let uh = eval_extension(&coeff, &view.centroid, x);
                let ue = u_exact(x);
                for k in 0..dim {
                    l2 += w * (ue[k] - uh[k]) * (ue[k] - uh[k]);
                }
            }

            let h1_part = match h1 {
                H1Variant::Discrete => {
                    // cell average of the exact gradient vs the weak gradient
                    let mut avg = [[0.0; 3]; 3];
                    for (x, w) in &quad {
                        let g = grad_exact(x);
                        for i in 0..dim {
                            for j in 0..dim {
                                avg[i][j] += w * g[i][j];
                            }
                        }
                    }
                    let mut s = 0.0;
                    for k in 0..dim {
                        let gw = weak_gradient(&view, &vals[k * view.n..(k + 1) * view.n]);
                        for j in 0..dim {
                            let diff = avg[k][j] / view.volume - gw[j];
                            s += view.volume * diff * diff;
                        }
                    }
                    s
                }
                H1Variant::Reconstructed => {
                    // gradient of the affine reconstruction is constant
                    let mut s = 0.0;
                    for (x, w) in &quad {
                        let g = grad_exact(x);
                        for k in 0..dim {
                            for j in 0..dim {
                                let diff = g[k][j] - coeff[(j + 1, k)];
                                s += w * diff * diff;
                            }
                        }
                    }
                    s
                }
            };

            let dp = p_exact(&view.centroid) - pressure[e];
            [l2, h1_part, view.volume * dp * dp]
        })
        .collect();

    let mut sums = [0.0; 3];
    for p in partials {
        for k in 0..3 {
            sums[k] += p[k];
        }
    }
    (
        sums[0].max(0.0).sqrt(),
        sums[1].max(0.0).sqrt(),
        sums[2].max(0.0).sqrt(),
    )
}

/// Evaluates the affine reconstruction s(u_b) at a point inside the mesh
/// (containing element chosen deterministically). Returns `None` outside.
pub fn evaluate_displacement(
    mesh: &PolytopalMesh,
    sol: &FieldSolution,
    point: &Point,
) -> Option<[f64; 3]> {
    let elem = locate_element(mesh, point)?;
    let view = ElementView::new(mesh, elem);
    let proj = projection_matrix(&view).ok()?;
    let coeff = extension_coefficients(&view, &proj, &sol.element_values(mesh, elem));
    Some(eval_extension(&coeff, &view.centroid, point))
}

/// First element (in id order) whose convex hull contains the point, with a
/// small boundary tolerance.
pub fn locate_element(mesh: &PolytopalMesh, point: &Point) -> Option<usize> {
    let tol = 1e-10 * mesh.h.max(1.0);
    'next: for e in 0..mesh.elements.len() {
        for &f in &mesh.elements[e].facets {
            let n = mesh.outward_normal(e, f);
            let m = mesh.facets[f].midpoint;
            let mut d = 0.0;
            for k in 0..3 {
                d += (point[k] - m[k]) * n[k];
            }
            if d > tol {
                continue 'next;
            }
        }
        return Some(e);
    }
    None
}

/// Writes the convergence table. Header and layout are fixed:
/// `n,h,dof,e_u_l2,r_l2,e_u_h1,r_h1,e_p,r_p`; singular levels print dashes.
pub fn write_csv(report: &ErrorReport, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "n,h,dof,e_u_l2,r_l2,e_u_h1,r_h1,e_p,r_p")?;
    let rates = report.rates();
    for (rec, rate) in report.records.iter().zip(rates.iter()) {
        let fe = |v: f64| {
            if v.is_finite() {
                format!("{v:.6e}")
            } else {
                "-".to_string()
            }
        };
        let fr = |r: Option<f64>| {
            if rec.singular {
                "-".to_string()
            } else {
                r.map_or(String::new(), |v| format!("{v:.2}"))
            }
        };
        writeln!(
            w,
            "{},{:.6e},{},{},{},{},{},{},{}",
            rec.n,
            rec.h,
            rec.dofs,
            fe(rec.e_l2),
            fr(rate[0]),
            fe(rec.e_h1),
            fr(rate[1]),
            fe(rec.e_p),
            fr(rate[2]),
        )?;
    }
    Ok(())
}

/// Legacy ASCII VTK unstructured grid: polygon cells in 2D, face-stream
/// polyhedra in 3D, vertex-averaged reconstructed displacement as point data
/// and the pseudo-pressure as cell data. Display-only output.
pub fn write_vtk(
    mesh: &PolytopalMesh,
    sol: &FieldSolution,
    pressure: &[f64],
    w: &mut dyn Write,
) -> std::io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "swg solution")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.vertices.len())?;
    for v in &mesh.vertices {
        writeln!(w, "{:.10e} {:.10e} {:.10e}", v[0], v[1], v[2])?;
    }

    if mesh.dim == 2 {
        let total: usize = mesh.elements.iter().map(|e| e.vertices.len() + 1).sum();
        writeln!(w, "CELLS {} {}", mesh.elements.len(), total)?;
        for el in &mesh.elements {
            write!(w, "{}", el.vertices.len())?;
            for &v in &el.vertices {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        writeln!(w, "CELL_TYPES {}", mesh.elements.len())?;
        for _ in &mesh.elements {
            writeln!(w, "7")?; // VTK_POLYGON
        }
    } else {
        // face-stream encoding: nTotal nFaces (nPts ids..) per face
        let mut total = 0usize;
        for el in &mesh.elements {
            total += 2;
            for &f in &el.facets {
                total += 1 + mesh.facets[f].vertices.len();
            }
        }
        writeln!(w, "CELLS {} {}", mesh.elements.len(), total)?;
        for el in &mesh.elements {
            let stream: usize = el
                .facets
                .iter()
                .map(|&f| 1 + mesh.facets[f].vertices.len())
                .sum::<usize>()
                + 1;
            write!(w, "{} {}", stream, el.facets.len())?;
            for &f in &el.facets {
                write!(w, " {}", mesh.facets[f].vertices.len())?;
                for &v in &mesh.facets[f].vertices {
                    write!(w, " {v}")?;
                }
            }
            writeln!(w)?;
        }
        writeln!(w, "CELL_TYPES {}", mesh.elements.len())?;
        for _ in &mesh.elements {
            writeln!(w, "42")?; // VTK_POLYHEDRON
        }
    }

    // vertex displacement: reconstruction evaluated per element, averaged
    // over incident elements
    let mut disp = vec![[0.0f64; 3]; mesh.vertices.len()];
    let mut count = vec![0usize; mesh.vertices.len()];
    for e in 0..mesh.elements.len() {
        let view = ElementView::new(mesh, e);
        if let Ok(proj) = projection_matrix(&view) {
            let coeff = extension_coefficients(&view, &proj, &sol.element_values(mesh, e));
            for &v in &mesh.elements[e].vertices {
                let val = eval_extension(&coeff, &view.centroid, &mesh.vertices[v]);
                for k in 0..3 {
                    disp[v][k] += val[k];
                }
                count[v] += 1;
            }
        }
    }
    writeln!(w, "POINT_DATA {}", mesh.vertices.len())?;
    writeln!(w, "VECTORS displacement double")?;
    for (d, c) in disp.iter().zip(count.iter()) {
        let s = (*c).max(1) as f64;
        writeln!(
            w,
            "{:.10e} {:.10e} {:.10e}",
            d[0] / s,
            d[1] / s,
            d[2] / s
        )?;
    }
    writeln!(w, "CELL_DATA {}", mesh.elements.len())?;
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for p in pressure {
        writeln!(w, "{p:.10e}")?;
    }
    Ok(())
}
