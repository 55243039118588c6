//! Direct solution of the assembled symmetric systems.
//!
//! The solver factors the reduced matrix as L D L^t inside a reverse
//! Cuthill-McKee envelope. The primal system is positive definite; the mixed
//! saddle-point system is symmetric quasi-definite (positive displacement
//! pivots, negative pressure pivots), so the factorization needs no pivoting.
//! A pivot below 1e-12 times the largest diagonal declares the system
//! singular instead of returning a garbage solution. Solutions are refined
//! against the original matrix until the requested residual is met.

use crate::assembly::{Formulation, GlobalSystem, SymCsr};
use crate::postproc::FieldSolution;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    Singular,
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// ||Ax - b|| / ||b||, recomputed from the original matrix.
    pub relative_residual: f64,
    pub refinement_steps: usize,
    /// Free-DOF index of the failing pivot when singular.
    pub singular_pivot: Option<usize>,
    /// Stored envelope entries of the factor.
    pub profile_entries: usize,
}

const PIVOT_RTOL: f64 = 1e-12;

/// Reverse Cuthill-McKee ordering (new index -> old index), deterministic.
fn rcm_order(m: &SymCsr) -> Vec<usize> {
    let n = m.n;
    let degree = |v: usize| m.row_ptr[v + 1] - m.row_ptr[v];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut scratch: Vec<usize> = Vec::new();

    let bfs = |root: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>| {
        let start = out.len();
        out.push(root);
        visited[root] = true;
        let mut head = start;
        while head < out.len() {
            let v = out[head];
            head += 1;
            let mut nbrs: Vec<usize> = (m.row_ptr[v]..m.row_ptr[v + 1])
                .map(|i| m.cols[i])
                .filter(|&u| u != v && !visited[u])
                .collect();
            nbrs.sort_by_key(|&u| (degree(u), u));
            for u in nbrs {
                if !visited[u] {
                    visited[u] = true;
                    out.push(u);
                }
            }
        }
    };

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start: min degree in the component, then hop to
        // the far end of a BFS once
        let mut comp = Vec::new();
        let mut probe = visited.clone();
        bfs(seed, &mut probe, &mut comp);
        let mut root = *comp
            .iter()
            .min_by_key(|&&v| (degree(v), v))
            .expect("nonempty component");
        scratch.clear();
        let mut probe2 = visited.clone();
        bfs(root, &mut probe2, &mut scratch);
        root = *scratch.last().unwrap();
        bfs(root, &mut visited, &mut order);
    }
    order.reverse();
    order
}

struct Envelope {
    n: usize,
    first: Vec<usize>,
    pos: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl Envelope {
    /// Lays out the envelope of the permuted matrix and copies its values.
    fn from_csr(m: &SymCsr, perm: &[usize], inv: &[usize]) -> Envelope {
        let n = m.n;
        let mut first: Vec<usize> = (0..n).collect();
        for old_row in 0..n {
            let i = inv[old_row];
            for idx in m.row_ptr[old_row]..m.row_ptr[old_row + 1] {
                let j = inv[m.cols[idx]];
                if j < first[i] {
                    first[i] = j;
                }
            }
        }
        let mut pos = vec![0usize; n + 1];
        for i in 0..n {
            pos[i + 1] = pos[i] + (i - first[i]);
        }
        let total = pos[n];
        assert!(
            total < 400_000_000,
            "factor envelope too large ({total} entries); system is beyond desk scale"
        );
        let mut vals = vec![0.0; total];
        let mut diag = vec![0.0; n];
        for (i, &old_row) in perm.iter().enumerate() {
            for idx in m.row_ptr[old_row]..m.row_ptr[old_row + 1] {
                let j = inv[m.cols[idx]];
                let v = m.vals[idx];
                if j == i {
                    diag[i] = v;
                } else if j < i {
                    vals[pos[i] + (j - first[i])] = v;
                }
            }
        }
        Envelope {
            n,
            first,
            pos,
            vals,
            diag,
        }
    }

    /// In-place LDL^t; returns the failing pivot index if one collapses.
    fn factor(&mut self, pivot_floor: f64) -> Option<usize> {
        for i in 0..self.n {
            let fi = self.first[i];
            let (done, active) = self.vals.split_at_mut(self.pos[i]);
            let row_i = &mut active[..i - fi];
            for j in fi..i {
                let fj = self.first[j];
                let kstart = fi.max(fj);
                let mut s = row_i[j - fi];
                let lj = &done[self.pos[j] + (kstart - fj)..self.pos[j] + (j - fj)];
                let li = &row_i[kstart - fi..j - fi];
                for (t, (a, b)) in li.iter().zip(lj.iter()).enumerate() {
                    s -= a * b * self.diag[kstart + t];
                }
                row_i[j - fi] = s / self.diag[j];
            }
            let mut dii = self.diag[i];
            for (k, v) in row_i.iter().enumerate() {
                dii -= v * v * self.diag[fi + k];
            }
            if dii.abs() < pivot_floor {
                return Some(i);
            }
            self.diag[i] = dii;
        }
        None
    }

    fn solve(&self, b: &mut [f64]) {
        // L z = b
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.vals[self.pos[i]..self.pos[i + 1]];
            let mut s = b[i];
            for (k, v) in row.iter().enumerate() {
                s -= v * b[fi + k];
            }
            b[i] = s;
        }
        // D y = z
        for i in 0..self.n {
            b[i] /= self.diag[i];
        }
        // L^t x = y
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.vals[self.pos[i]..self.pos[i + 1]];
            let xi = b[i];
            for (k, v) in row.iter().enumerate() {
                b[fi + k] -= v * xi;
            }
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Factors and solves a reduced system, refining until the relative residual
/// meets `tol` (at most four refinement passes).
pub fn solve_reduced(matrix: &SymCsr, rhs: &[f64], tol: f64) -> (Vec<f64>, SolveReport) {
    let n = matrix.n;
    let nb = norm2(rhs);
    if n == 0 || nb == 0.0 {
        return (
            vec![0.0; n],
            SolveReport {
                status: SolveStatus::Converged,
                relative_residual: 0.0,
                refinement_steps: 0,
                singular_pivot: None,
                profile_entries: 0,
            },
        );
    }
    let perm = rcm_order(matrix);
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut env = Envelope::from_csr(matrix, &perm, &inv);
    let profile_entries = env.vals.len();
    let pivot_floor = PIVOT_RTOL * matrix.max_abs_diag();
    if let Some(p) = env.factor(pivot_floor) {
        return (
            vec![0.0; n],
            SolveReport {
                status: SolveStatus::Singular,
                relative_residual: f64::INFINITY,
                refinement_steps: 0,
                singular_pivot: Some(perm[p]),
                profile_entries,
            },
        );
    }

    let solve_once = |b: &[f64]| {
        let mut pb = vec![0.0; n];
        for i in 0..n {
            pb[i] = b[perm[i]];
        }
        env.solve(&mut pb);
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[perm[i]] = pb[i];
        }
        x
    };

    let mut x = solve_once(rhs);
    let mut residual = vec![0.0; n];
    let mut rel = 0.0;
    let mut steps = 0;
    for pass in 0..=4 {
        matrix.matvec(&x, &mut residual);
        for i in 0..n {
            residual[i] = rhs[i] - residual[i];
        }
        rel = norm2(&residual) / nb;
        if rel <= tol || pass == 4 {
            steps = pass;
            break;
        }
        let dx = solve_once(&residual);
        for i in 0..n {
            x[i] += dx[i];
        }
    }
    let status = if rel <= tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIter
    };
    (
        x,
        SolveReport {
            status,
            relative_residual: rel,
            refinement_steps: steps,
            singular_pivot: None,
            profile_entries,
        },
    )
}

/// Solves an assembled system and expands the result to a facet field,
/// merging the eliminated Dirichlet values back in.
pub fn solve(system: &GlobalSystem, tol: f64) -> (FieldSolution, SolveReport) {
    assert!(
        tol > 0.0 && tol <= 1e-6,
        "solver tolerance must lie in (0, 1e-6]"
    );
    let (x, report) = solve_reduced(&system.matrix, &system.rhs, tol);
    let dof_map = &system.dof_map;
    let mut u = system.dirichlet.clone();
    let mut pressure = match system.formulation {
        Formulation::Mixed => Some(vec![0.0; dof_map.n_pressure]),
        Formulation::Primal => None,
    };
    if report.status != SolveStatus::Singular {
        for (fi, &dof) in system.free_of_full.iter().enumerate() {
            if dof < dof_map.n_disp {
                u[dof] = x[fi];
            } else if let Some(p) = pressure.as_mut() {
                p[dof - dof_map.n_disp] = x[fi];
            }
        }
    }
    (
        FieldSolution {
            dim: dof_map.dim,
            formulation: system.formulation,
            u,
            pressure,
        },
        report,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csr_from_dense(a: &[&[f64]]) -> SymCsr {
        let n = a.len();
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if a[i][j] != 0.0 {
                    rows.push(i as u32);
                    cols.push(j as u32);
                    vals.push(a[i][j]);
                }
            }
        }
        SymCsr::from_triplets(n, &rows, &cols, &vals)
    }

    #[test]
    fn identity_system() {
        let m = csr_from_dense(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let (x, rep) = solve_reduced(&m, &[3.0, -4.0], 1e-12);
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!((x[0] - 3.0).abs() < 1e-14 && (x[1] + 4.0).abs() < 1e-14);
        assert!(rep.relative_residual <= 1e-12);
    }

    #[test]
    fn indefinite_quasi_definite_system() {
        // saddle-point sign structure: positive then negative pivots
        let m = csr_from_dense(&[&[4.0, 1.0, 1.0], &[1.0, 3.0, 0.5], &[1.0, 0.5, -2.0]]);
        let b = [1.0, 2.0, 3.0];
        let (x, rep) = solve_reduced(&m, &b, 1e-12);
        assert_eq!(rep.status, SolveStatus::Converged);
        let mut r = vec![0.0; 3];
        m.matvec(&x, &mut r);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_system_detected() {
        let m = csr_from_dense(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let (_, rep) = solve_reduced(&m, &[1.0, 0.0], 1e-12);
        assert_eq!(rep.status, SolveStatus::Singular);
        assert!(rep.singular_pivot.is_some());
    }

    #[test]
    fn deterministic_solves() {
        let m = csr_from_dense(&[
            &[4.0, 1.0, 0.0, 0.3],
            &[1.0, 5.0, 1.0, 0.0],
            &[0.0, 1.0, 6.0, 1.0],
            &[0.3, 0.0, 1.0, 7.0],
        ]);
        let b = [1.0, -2.0, 3.0, -4.0];
        let (x1, _) = solve_reduced(&m, &b, 1e-12);
        let (x2, _) = solve_reduced(&m, &b, 1e-12);
        assert_eq!(x1, x2);
    }
}
