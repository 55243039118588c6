//! Global DOF numbering, assembly of the mixed and primal systems, and
//! Dirichlet elimination.
//!
//! Displacement DOFs are numbered `facet * d + component`, pressure DOFs (in
//! the mixed form) follow after all displacement DOFs. Element kernels are
//! evaluated in parallel; accumulation runs in a fixed element-then-facet
//! order so assembled values do not depend on the thread count.

use crate::elements::{
    edge_jump_block, element_load, element_stiffness_mixed, element_stiffness_primal,
    facet_neumann_load, projection_matrix, ElementView, HScale, KernelError, MaterialParams,
    StabilizationConfig,
};
use crate::geometry::{BoundaryTag, Point, PolytopalMesh};
use crate::quadrature::facet_average;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::io::Write;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    Mixed,
    Primal,
}

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("no Dirichlet facet: the unconstrained operator has a rigid-motion kernel")]
    NoDirichletBoundary,
    #[error("boundary facet {0} is untagged (still marked interior)")]
    UntaggedBoundary(usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Global DOF layout for one mesh and formulation.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub dim: usize,
    pub formulation: Formulation,
    pub n_facets: usize,
    pub n_elements: usize,
    /// Displacement DOF count, `dim * n_facets`.
    pub n_disp: usize,
    /// Pressure DOF count, `n_elements` for the mixed form and 0 otherwise.
    pub n_pressure: usize,
    /// Dirichlet-constrained displacement DOFs.
    pub constrained: Vec<bool>,
}

impl DofMap {
    pub fn n_total(&self) -> usize {
        self.n_disp + self.n_pressure
    }

    pub fn disp_dof(&self, facet: usize, comp: usize) -> usize {
        facet * self.dim + comp
    }

    pub fn pressure_dof(&self, elem: usize) -> usize {
        self.n_disp + elem
    }

    pub fn n_constrained(&self) -> usize {
        self.constrained.iter().filter(|&&c| c).count()
    }
}

/// Builds the DOF numbering; requires every boundary facet tagged and a
/// nonempty Dirichlet set.
pub fn build_dof_map(
    mesh: &PolytopalMesh,
    formulation: Formulation,
) -> Result<DofMap, AssemblyError> {
    let dim = mesh.dim;
    let n_facets = mesh.facets.len();
    let mut constrained = vec![false; dim * n_facets];
    let mut has_dirichlet = false;
    for (fid, f) in mesh.facets.iter().enumerate() {
        match (f.right.is_some(), f.tag) {
            (false, BoundaryTag::Dirichlet) => {
                has_dirichlet = true;
                for k in 0..dim {
                    constrained[fid * dim + k] = true;
                }
            }
            (false, BoundaryTag::Interior) => {
                return Err(AssemblyError::UntaggedBoundary(fid));
            }
            _ => {}
        }
    }
    if !has_dirichlet {
        return Err(AssemblyError::NoDirichletBoundary);
    }
    let n_pressure = match formulation {
        Formulation::Mixed => mesh.elements.len(),
        Formulation::Primal => 0,
    };
    Ok(DofMap {
        dim,
        formulation,
        n_facets,
        n_elements: mesh.elements.len(),
        n_disp: dim * n_facets,
        n_pressure,
        constrained,
    })
}

/// Compressed sparse rows with the full (both triangles) symmetric pattern.
#[derive(Clone, Debug)]
pub struct SymCsr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SymCsr {
    /// Builds from unordered triplets; duplicate entries are summed in their
    /// generation order, keeping assembly deterministic.
    pub fn from_triplets(n: usize, rows: &[u32], cols: &[u32], vals: &[f64]) -> SymCsr {
        let nnz = rows.len();
        let mut count = vec![0usize; n + 1];
        for &r in rows {
            count[r as usize + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut order: Vec<u32> = vec![0; nnz];
        let mut next = count.clone();
        for (t, &r) in rows.iter().enumerate() {
            order[next[r as usize]] = t as u32;
            next[r as usize] += 1;
        }
        let mut row_ptr = vec![0usize; n + 1];
        let mut out_cols = Vec::with_capacity(nnz);
        let mut out_vals = Vec::with_capacity(nnz);
        let mut scratch: Vec<(u32, u32)> = Vec::new();
        for r in 0..n {
            scratch.clear();
            for &t in &order[count[r]..count[r + 1]] {
                scratch.push((cols[t as usize], t));
            }
            // stable by column, then generation order: deterministic sums
            scratch.sort();
            let mut last_col = u32::MAX;
            for &(c, t) in scratch.iter() {
                if c == last_col {
                    *out_vals.last_mut().unwrap() += vals[t as usize];
                } else {
                    out_cols.push(c as usize);
                    out_vals.push(vals[t as usize]);
                    last_col = c;
                }
            }
            row_ptr[r + 1] = out_cols.len();
        }
        SymCsr {
            n,
            row_ptr,
            cols: out_cols,
            vals: out_vals,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut s = 0.0;
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[idx] * x[self.cols[idx]];
            }
            y[r] = s;
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn max_abs_diag(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.n {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[idx] == r {
                    m = m.max(self.vals[idx].abs());
                }
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest relative symmetry defect max |a_ij - a_ji| / ||A||_max.
    pub fn symmetry_defect(&self) -> f64 {
        let mut max_entry = 0.0f64;
        let mut defect = 0.0f64;
        for r in 0..self.n {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[idx];
                max_entry = max_entry.max(self.vals[idx].abs());
                if c > r {
                    let mirror = self.get(c, r);
                    defect = defect.max((self.vals[idx] - mirror).abs());
                }
            }
        }
        if max_entry == 0.0 {
            0.0
        } else {
            defect / max_entry
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
            if self.cols[idx] == c {
                return self.vals[idx];
            }
        }
        0.0
    }

    /// Writes `row col value` triplets (1-based indices) for external checks.
    pub fn write_triplets(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "% {} {} {}", self.n, self.n, self.nnz())?;
        for r in 0..self.n {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                writeln!(w, "{} {} {:.16e}", r + 1, self.cols[idx] + 1, self.vals[idx])?;
            }
        }
        Ok(())
    }
}

struct Triplets {
    rows: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Triplets {
    fn new() -> Self {
        Triplets {
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    fn push(&mut self, r: usize, c: usize, v: f64) {
        self.rows.push(r as u32);
        self.cols.push(c as u32);
        self.vals.push(v);
    }
}

fn element_dofs(mesh: &PolytopalMesh, dof_map: &DofMap, elem: usize) -> Vec<usize> {
    let el = &mesh.elements[elem];
    let n = el.facets.len();
    let mut dofs = Vec::with_capacity(dof_map.dim * n + 1);
    for k in 0..dof_map.dim {
        for &fid in &el.facets {
            dofs.push(dof_map.disp_dof(fid, k));
        }
    }
    if dof_map.formulation == Formulation::Mixed {
        dofs.push(dof_map.pressure_dof(elem));
    }
    dofs
}

/// Assembles the unconstrained symmetric operator over all DOFs (no boundary
/// conditions applied).
pub fn assemble_operator(
    mesh: &PolytopalMesh,
    dof_map: &DofMap,
    mat: &MaterialParams,
    stab: &StabilizationConfig,
    h_scale: HScale,
) -> Result<SymCsr, AssemblyError> {
    let blocks: Result<Vec<DMatrix<f64>>, KernelError> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| {
            let view = ElementView::new(mesh, e);
            match dof_map.formulation {
                Formulation::Mixed => element_stiffness_mixed(&view, mat, h_scale),
                Formulation::Primal => element_stiffness_primal(&view, mat, h_scale),
            }
        })
        .collect();
    let blocks = blocks?;
    let jumps: Vec<Option<crate::elements::JumpBlock>> = (0..mesh.facets.len())
        .into_par_iter()
        .map(|f| edge_jump_block(mesh, f, stab))
        .collect();

    let mut trip = Triplets::new();
    for (e, block) in blocks.iter().enumerate() {
        let dofs = element_dofs(mesh, dof_map, e);
        debug_assert_eq!(dofs.len(), block.nrows());
        for (li, &gi) in dofs.iter().enumerate() {
            for (lj, &gj) in dofs.iter().enumerate() {
                let v = block[(li, lj)];
                if v != 0.0 {
                    trip.push(gi, gj, v);
                }
            }
        }
    }
    for jump in jumps.iter().flatten() {
        let left = &mesh.elements[jump.left].facets;
        let mut facets: Vec<usize> = left.clone();
        if let Some(r) = jump.right {
            facets.extend_from_slice(&mesh.elements[r].facets);
        }
        for k in 0..dof_map.dim {
            for (li, &fi) in facets.iter().enumerate() {
                let gi = dof_map.disp_dof(fi, k);
                for (lj, &fj) in facets.iter().enumerate() {
                    let v = jump.matrix[(li, lj)];
                    if v != 0.0 {
                        trip.push(gi, dof_map.disp_dof(fj, k), v);
                    }
                }
            }
        }
    }
    Ok(SymCsr::from_triplets(
        dof_map.n_total(),
        &trip.rows,
        &trip.cols,
        &trip.vals,
    ))
}

/// Assembles the load vector: body force against the affine extension basis
/// plus Neumann facet tractions.
pub fn assemble_rhs(
    mesh: &PolytopalMesh,
    dof_map: &DofMap,
    body_force: &(dyn Fn(&Point) -> [f64; 3] + Sync),
    traction: &(dyn Fn(&Point) -> [f64; 3] + Sync),
) -> Result<Vec<f64>, AssemblyError> {
    let loads: Result<Vec<Vec<f64>>, KernelError> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| {
            let view = ElementView::new(mesh, e);
            let proj = projection_matrix(&view)?;
            Ok(element_load(&view, &proj, body_force))
        })
        .collect();
    let loads = loads?;
    let mut rhs = vec![0.0; dof_map.n_total()];
    for (e, load) in loads.iter().enumerate() {
        let el = &mesh.elements[e];
        let n = el.facets.len();
        for k in 0..dof_map.dim {
            for (i, &fid) in el.facets.iter().enumerate() {
                rhs[dof_map.disp_dof(fid, k)] += load[k * n + i];
            }
        }
    }
    for (fid, f) in mesh.facets.iter().enumerate() {
        if f.right.is_none() && f.tag == BoundaryTag::Neumann {
            let g = facet_neumann_load(mesh, fid, traction);
            for k in 0..dof_map.dim {
                rhs[dof_map.disp_dof(fid, k)] += g[k];
            }
        }
    }
    Ok(rhs)
}

/// Facet averages of the Dirichlet datum on constrained facets (zero
/// elsewhere), i.e. the boundary projection of g.
pub fn dirichlet_values(
    mesh: &PolytopalMesh,
    dof_map: &DofMap,
    g: &(dyn Fn(&Point) -> [f64; 3] + Sync),
) -> Vec<f64> {
    let mut values = vec![0.0; dof_map.n_disp];
    for (fid, f) in mesh.facets.iter().enumerate() {
        if f.right.is_none() && f.tag == BoundaryTag::Dirichlet {
            let avg = facet_average(mesh, fid, g);
            for k in 0..dof_map.dim {
                values[dof_map.disp_dof(fid, k)] = avg[k];
            }
        }
    }
    values
}

/// Constrained linear system over the free DOFs, after symmetric Dirichlet
/// elimination.
pub struct GlobalSystem {
    pub formulation: Formulation,
    pub dof_map: DofMap,
    pub matrix: SymCsr,
    pub rhs: Vec<f64>,
    /// Free index -> full DOF id.
    pub free_of_full: Vec<usize>,
    /// Full DOF id -> free index.
    pub full_to_free: Vec<Option<usize>>,
    /// Eliminated Dirichlet values per displacement DOF.
    pub dirichlet: Vec<f64>,
}

/// Eliminates constrained DOFs: known values move to the right-hand side and
/// the reduced matrix keeps the symmetric free-free block.
pub fn apply_dirichlet(
    operator: &SymCsr,
    rhs: &[f64],
    dof_map: &DofMap,
    dirichlet: Vec<f64>,
) -> GlobalSystem {
    let n_total = dof_map.n_total();
    let mut full_to_free = vec![None; n_total];
    let mut free_of_full = Vec::new();
    for dof in 0..n_total {
        let constrained = dof < dof_map.n_disp && dof_map.constrained[dof];
        if !constrained {
            full_to_free[dof] = Some(free_of_full.len());
            free_of_full.push(dof);
        }
    }
    let n_free = free_of_full.len();
    let mut red_rows: Vec<u32> = Vec::new();
    let mut red_cols: Vec<u32> = Vec::new();
    let mut red_vals: Vec<f64> = Vec::new();
    let mut red_rhs = vec![0.0; n_free];
    for (fi, &dof) in free_of_full.iter().enumerate() {
        red_rhs[fi] = rhs[dof];
        for idx in operator.row_ptr[dof]..operator.row_ptr[dof + 1] {
            let c = operator.cols[idx];
            let v = operator.vals[idx];
            match full_to_free[c] {
                Some(fc) => {
                    red_rows.push(fi as u32);
                    red_cols.push(fc as u32);
                    red_vals.push(v);
                }
                None => {
                    red_rhs[fi] -= v * dirichlet[c];
                }
            }
        }
    }
    let matrix = SymCsr::from_triplets(n_free, &red_rows, &red_cols, &red_vals);
    GlobalSystem {
        formulation: dof_map.formulation,
        dof_map: dof_map.clone(),
        matrix,
        rhs: red_rhs,
        free_of_full,
        full_to_free,
        dirichlet,
    }
}

/// One-call assembly: operator, loads, boundary projection, elimination.
#[allow(clippy::too_many_arguments)]
pub fn assemble_system(
    mesh: &PolytopalMesh,
    mat: &MaterialParams,
    stab: &StabilizationConfig,
    formulation: Formulation,
    h_scale: HScale,
    body_force: &(dyn Fn(&Point) -> [f64; 3] + Sync),
    traction: &(dyn Fn(&Point) -> [f64; 3] + Sync),
    dirichlet_datum: &(dyn Fn(&Point) -> [f64; 3] + Sync),
) -> Result<GlobalSystem, AssemblyError> {
    let dof_map = build_dof_map(mesh, formulation)?;
    let operator = assemble_operator(mesh, &dof_map, mat, stab, h_scale)?;
    let rhs = assemble_rhs(mesh, &dof_map, body_force, traction)?;
    let values = dirichlet_values(mesh, &dof_map, dirichlet_datum);
    Ok(apply_dirichlet(&operator, &rhs, &dof_map, values))
}
