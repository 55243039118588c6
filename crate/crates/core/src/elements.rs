//! Per-element SWG kernels: weak differential operators, the affine extension
//! operator, stabilizer and gradient blocks, element stiffness matrices for
//! the mixed and primal forms, load vectors, and the facet-jump stiffness.
//!
//! All operations are pure functions of immutable inputs and safe to evaluate
//! concurrently across elements. Local displacement DOFs are stacked per
//! component: `[u_1..u_N, v_1..v_N, (w_1..w_N)]`, followed by the single
//! pressure DOF in mixed element matrices.

use crate::geometry::{Point, PolytopalMesh};
use crate::quadrature::{element_quadrature, facet_quadrature};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("element {element} is degenerate: least-squares system M^t E M is singular")]
    DegenerateElement { element: usize },
    #[error("material parameters invalid: {0}")]
    InvalidMaterial(String),
}

/// Lamé description of a linear isotropic material.
#[derive(Clone, Copy, Debug)]
pub struct MaterialParams {
    pub youngs: f64,
    pub poisson: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl MaterialParams {
    /// Plane-strain conversion from engineering constants.
    pub fn from_young_poisson(youngs: f64, poisson: f64) -> Result<Self, KernelError> {
        if !(youngs > 0.0) {
            return Err(KernelError::InvalidMaterial(format!("E = {youngs}")));
        }
        if !(poisson < 0.5) || !poisson.is_finite() {
            return Err(KernelError::InvalidMaterial(format!(
                "nu = {poisson} must be finite and < 0.5"
            )));
        }
        let lambda = youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        let mu = youngs / (2.0 * (1.0 + poisson));
        Ok(MaterialParams {
            youngs,
            poisson,
            lambda,
            mu,
        })
    }

    pub fn from_lame(lambda: f64, mu: f64) -> Result<Self, KernelError> {
        if !(mu > 0.0) || !lambda.is_finite() {
            return Err(KernelError::InvalidMaterial(format!(
                "lambda = {lambda}, mu = {mu}"
            )));
        }
        let youngs = mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu);
        let poisson = lambda / (2.0 * (lambda + mu));
        Ok(MaterialParams {
            youngs,
            poisson,
            lambda,
            mu,
        })
    }
}

/// Which length scale divides the boundary stabilizer S_T.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HScale {
    /// Element diameter h_T (mesh-grading robust; the default).
    Local,
    /// Global meshsize h.
    Global,
}

/// Tangential-jump stabilization controls: weight kappa >= 0 and whether the
/// one-sided boundary terms (facet exponent gamma = 2) are included.
#[derive(Clone, Copy, Debug)]
pub struct StabilizationConfig {
    pub kappa: f64,
    pub boundary_tangential: bool,
}

impl StabilizationConfig {
    pub fn new(kappa: f64, boundary_tangential: bool) -> Self {
        assert!(kappa >= 0.0, "kappa must be nonnegative");
        StabilizationConfig {
            kappa,
            boundary_tangential,
        }
    }

    pub fn off() -> Self {
        StabilizationConfig {
            kappa: 0.0,
            boundary_tangential: false,
        }
    }

    /// Facet exponent: 1 on interior facets, 2 on boundary facets.
    pub fn gamma(is_boundary: bool) -> i32 {
        if is_boundary {
            2
        } else {
            1
        }
    }
}

/// Geometry of one element gathered for kernel evaluation: outward normals,
/// facet measures and midpoints in the element's facet order.
pub struct ElementView<'a> {
    pub mesh: &'a PolytopalMesh,
    pub elem: usize,
    pub dim: usize,
    pub n: usize,
    pub volume: f64,
    pub centroid: Point,
    pub diameter: f64,
    pub facet_ids: Vec<usize>,
    pub normals: Vec<Point>,
    pub measures: Vec<f64>,
    pub midpoints: Vec<Point>,
}

impl<'a> ElementView<'a> {
    pub fn new(mesh: &'a PolytopalMesh, elem: usize) -> Self {
        let el = &mesh.elements[elem];
        let facet_ids = el.facets.clone();
        let normals = facet_ids
            .iter()
            .map(|&f| mesh.outward_normal(elem, f))
            .collect();
        let measures = facet_ids.iter().map(|&f| mesh.facets[f].measure).collect();
        let midpoints = facet_ids.iter().map(|&f| mesh.facets[f].midpoint).collect();
        ElementView {
            mesh,
            elem,
            dim: mesh.dim,
            n: facet_ids.len(),
            volume: el.measure,
            centroid: el.centroid,
            diameter: el.diameter,
            facet_ids,
            normals,
            measures,
            midpoints,
        }
    }

    /// Weighted normal components Q_k[i] = n_{k,i} |e_i| for k < dim.
    pub fn normal_weights(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|k| {
                (0..self.n)
                    .map(|i| self.normals[i][k] * self.measures[i])
                    .collect()
            })
            .collect()
    }

    fn h_len(&self, scale: HScale) -> f64 {
        match scale {
            HScale::Local => self.diameter,
            HScale::Global => self.mesh.h,
        }
    }
}

/// Least-squares coefficient matrix D = (M^t E M)^{-1} M^t E of the affine
/// extension; row 0 holds the constant weights, rows 1..=d the gradient
/// weights about the centroid.
pub fn projection_matrix(view: &ElementView) -> Result<DMatrix<f64>, KernelError> {
    let (n, d) = (view.n, view.dim);
    let mut m = DMatrix::zeros(n, d + 1);
    for i in 0..n {
        m[(i, 0)] = 1.0;
        for k in 0..d {
            m[(i, k + 1)] = view.midpoints[i][k] - view.centroid[k];
        }
    }
    // M^t E with E = diag(|e_i|)
    let mut mte = m.transpose();
    for i in 0..n {
        for r in 0..=d {
            mte[(r, i)] *= view.measures[i];
        }
    }
    let gram = &mte * &m;
    let chol = gram
        .cholesky()
        .ok_or(KernelError::DegenerateElement { element: view.elem })?;
    Ok(chol.solve(&mte))
}

/// Weak gradient of facet-constant scalar data: (1/|T|) sum v_i |e_i| n_i.
pub fn weak_gradient(view: &ElementView, vb: &[f64]) -> Point {
    debug_assert_eq!(vb.len(), view.n);
    let mut g = [0.0; 3];
    for i in 0..view.n {
        let w = vb[i] * view.measures[i] / view.volume;
        for k in 0..3 {
            g[k] += w * view.normals[i][k];
        }
    }
    g
}

/// Weak divergence of facet-constant vector data (components stacked).
pub fn weak_divergence(view: &ElementView, ub: &[f64]) -> f64 {
    debug_assert_eq!(ub.len(), view.n * view.dim);
    let mut div = 0.0;
    for k in 0..view.dim {
        for i in 0..view.n {
            div += ub[k * view.n + i] * view.measures[i] * view.normals[i][k];
        }
    }
    div / view.volume
}

/// Weak curl fixed by the defining relation (curl, phi) = -<v x n, phi>:
/// -(1/|T|) sum v_i x n_i |e_i|. In 2D only the z component is nonzero.
pub fn weak_curl(view: &ElementView, ub: &[f64]) -> Point {
    debug_assert_eq!(ub.len(), view.n * view.dim);
    let n = view.n;
    let mut c = [0.0; 3];
    for i in 0..n {
        let v = [
            ub[i],
            ub[n + i],
            if view.dim == 3 { ub[2 * n + i] } else { 0.0 },
        ];
        let nv = view.normals[i];
        let w = view.measures[i] / view.volume;
        c[0] -= w * (v[1] * nv[2] - v[2] * nv[1]);
        c[1] -= w * (v[2] * nv[0] - v[0] * nv[2]);
        c[2] -= w * (v[0] * nv[1] - v[1] * nv[0]);
    }
    c
}

/// Scalar stabilizer block A = h^{-1} (E - E M (M^t E M)^{-1} M^t E);
/// symmetric PSD with the midpoint samples of affine functions as kernel.
pub fn stabilizer_matrix(view: &ElementView, h_scale: HScale) -> Result<DMatrix<f64>, KernelError> {
    let d = projection_matrix(view)?;
    let n = view.n;
    let h = view.h_len(h_scale);
    // E M D = (E M) (M^t E M)^{-1} (E M)^t, assembled symmetrically
    let mut em = DMatrix::zeros(n, view.dim + 1);
    for i in 0..n {
        em[(i, 0)] = view.measures[i];
        for k in 0..view.dim {
            em[(i, k + 1)] = (view.midpoints[i][k] - view.centroid[k]) * view.measures[i];
        }
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = view.measures[i];
    }
    a -= &em * &d;
    a.scale_mut(1.0 / h);
    // symmetrize away factorization roundoff
    let sym = (&a + a.transpose()).scale(0.5);
    Ok(sym)
}

/// Gradient block b_{ij} = 2 mu n_i . n_j |e_i||e_j| / |T|.
pub fn gradient_block(view: &ElementView, mu: f64) -> DMatrix<f64> {
    let n = view.n;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut nd = 0.0;
            for k in 0..view.dim {
                nd += view.normals[i][k] * view.normals[j][k];
            }
            b[(i, j)] = 2.0 * mu * nd * view.measures[i] * view.measures[j] / view.volume;
        }
    }
    b
}

/// Displacement-displacement block of the element matrix: per-component
/// copies of A + B with the weak-curl correction subtracted, realizing
/// 2 mu (eps_w, eps_w) + S_T.
pub fn displacement_block(
    view: &ElementView,
    mat: &MaterialParams,
    h_scale: HScale,
) -> Result<DMatrix<f64>, KernelError> {
    let (n, dim) = (view.n, view.dim);
    let a = stabilizer_matrix(view, h_scale)?;
    let b = gradient_block(view, mat.mu);
    let q = view.normal_weights();
    let mut k = DMatrix::zeros(dim * n, dim * n);
    for c in 0..dim {
        for i in 0..n {
            for j in 0..n {
                k[(c * n + i, c * n + j)] = a[(i, j)] + b[(i, j)];
            }
        }
    }
    // curl Gram vectors over stacked components
    let curl_vectors: Vec<Vec<(usize, f64)>> = if dim == 2 {
        vec![q[1]
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, -v))
            .chain(q[0].iter().enumerate().map(|(i, &v)| (n + i, v)))
            .collect()]
    } else {
        vec![
            q[2].iter()
                .enumerate()
                .map(|(i, &v)| (n + i, -v))
                .chain(q[1].iter().enumerate().map(|(i, &v)| (2 * n + i, v)))
                .collect(),
            q[2].iter()
                .enumerate()
                .map(|(i, &v)| (i, v))
                .chain(q[0].iter().enumerate().map(|(i, &v)| (2 * n + i, -v)))
                .collect(),
            q[1].iter()
                .enumerate()
                .map(|(i, &v)| (i, -v))
                .chain(q[0].iter().enumerate().map(|(i, &v)| (n + i, v)))
                .collect(),
        ]
    };
    let scale = mat.mu / view.volume;
    for w in &curl_vectors {
        for &(i, wi) in w {
            for &(j, wj) in w {
                k[(i, j)] -= scale * wi * wj;
            }
        }
    }
    Ok(k)
}

/// Mixed element matrix over `[u.., v.., (w..,) p]`: displacement block,
/// pressure coupling columns Q_k, and the -|T|/lambda corner.
pub fn element_stiffness_mixed(
    view: &ElementView,
    mat: &MaterialParams,
    h_scale: HScale,
) -> Result<DMatrix<f64>, KernelError> {
    let (n, dim) = (view.n, view.dim);
    let disp = displacement_block(view, mat, h_scale)?;
    let q = view.normal_weights();
    let size = dim * n + 1;
    let mut k = DMatrix::zeros(size, size);
    k.view_mut((0, 0), (dim * n, dim * n)).copy_from(&disp);
    for c in 0..dim {
        for i in 0..n {
            k[(c * n + i, dim * n)] = q[c][i];
            k[(dim * n, c * n + i)] = q[c][i];
        }
    }
    k[(dim * n, dim * n)] = -view.volume / mat.lambda;
    Ok(k)
}

/// Primal element matrix: the mixed displacement block plus the statically
/// condensed pressure, lambda/|T| (Q-stack)(Q-stack)^t.
pub fn element_stiffness_primal(
    view: &ElementView,
    mat: &MaterialParams,
    h_scale: HScale,
) -> Result<DMatrix<f64>, KernelError> {
    let (n, dim) = (view.n, view.dim);
    let mut k = displacement_block(view, mat, h_scale)?;
    let q = view.normal_weights();
    let scale = mat.lambda / view.volume;
    for ci in 0..dim {
        for i in 0..n {
            for cj in 0..dim {
                for j in 0..n {
                    k[(ci * n + i, cj * n + j)] += scale * q[ci][i] * q[cj][j];
                }
            }
        }
    }
    Ok(k)
}

/// Element load vector F with F[k*N+i] = integral of f_k times the affine
/// extension basis of facet i.
pub fn element_load(
    view: &ElementView,
    proj: &DMatrix<f64>,
    f: &dyn Fn(&Point) -> [f64; 3],
) -> Vec<f64> {
    let (n, dim) = (view.n, view.dim);
    let mut load = vec![0.0; dim * n];
    for (x, w) in element_quadrature(view.mesh, view.elem) {
        let fx = f(&x);
        let mut basis = vec![1.0; dim + 1];
        for k in 0..dim {
            basis[k + 1] = x[k] - view.centroid[k];
        }
        for i in 0..n {
            let mut s = 0.0;
            for r in 0..=dim {
                s += proj[(r, i)] * basis[r];
            }
            for k in 0..dim {
                load[k * n + i] += w * fx[k] * s;
            }
        }
    }
    load
}

/// Neumann facet load G = integral of the traction over the facet.
pub fn facet_neumann_load(
    mesh: &PolytopalMesh,
    facet: usize,
    rho: &dyn Fn(&Point) -> [f64; 3],
) -> [f64; 3] {
    let mut g = [0.0; 3];
    for (x, w) in facet_quadrature(mesh, facet) {
        let r = rho(&x);
        for k in 0..3 {
            g[k] += w * r[k];
        }
    }
    g
}

/// Per-scalar-component facet-jump stiffness over the concatenated DOFs of
/// the adjacent elements (left facets first, then right facets).
pub struct JumpBlock {
    pub left: usize,
    pub right: Option<usize>,
    /// Column count of the left element's facets inside `matrix`.
    pub n_left: usize,
    pub matrix: DMatrix<f64>,
}

/// Stiffness of kappa h_e^gamma <[grad_w,tau u], [grad_w,tau v]>_e for one
/// facet: the Gram matrix of the tangential weak-gradient jump functional,
/// scaled by kappa h_e^gamma |e|. Boundary facets use the one-sided trace
/// with gamma = 2 and are included only when `boundary_tangential` is set.
pub fn edge_jump_block(
    mesh: &PolytopalMesh,
    facet: usize,
    config: &StabilizationConfig,
) -> Option<JumpBlock> {
    if config.kappa == 0.0 {
        return None;
    }
    let f = &mesh.facets[facet];
    let right = f.right;
    if right.is_none() && !config.boundary_tangential {
        return None;
    }
    let left = f.left;
    let lv = ElementView::new(mesh, left);
    let rv = right.map(|r| ElementView::new(mesh, r));
    let n_left = lv.n;
    let n_total = n_left + rv.as_ref().map_or(0, |v| v.n);
    let dim = mesh.dim;

    // jump functional K: DOFs -> weak-gradient difference (d rows)
    let mut kmat = DMatrix::zeros(dim, n_total);
    for i in 0..n_left {
        for k in 0..dim {
            kmat[(k, i)] = lv.measures[i] * lv.normals[i][k] / lv.volume;
        }
    }
    if let Some(ref v) = rv {
        for j in 0..v.n {
            for k in 0..dim {
                kmat[(k, n_left + j)] = -v.measures[j] * v.normals[j][k] / v.volume;
            }
        }
    }
    // project rows onto the facet plane: P = I - n n^t (in 2D this is tau tau^t)
    let nrm = f.normal;
    let mut proj = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            proj[(a, b)] = if a == b { 1.0 } else { 0.0 };
            proj[(a, b)] -= nrm[a] * nrm[b];
        }
    }
    let pk = proj * &kmat;
    let gamma = StabilizationConfig::gamma(right.is_none());
    let scale = config.kappa * f.diameter.powi(gamma) * f.measure;
    let matrix = (pk.transpose() * pk).scale(scale);
    Some(JumpBlock {
        left,
        right,
        n_left,
        matrix,
    })
}

/// Coefficients of the affine extension s(u_b): column k holds
/// `[c0, c1, .., cd]` with s_k(x) = c0 + sum_j c_j (x_j - x_T,j).
pub fn extension_coefficients(
    view: &ElementView,
    proj: &DMatrix<f64>,
    ub: &[f64],
) -> DMatrix<f64> {
    let (n, dim) = (view.n, view.dim);
    let mut coeff = DMatrix::zeros(dim + 1, dim);
    for k in 0..dim {
        for r in 0..=dim {
            let mut s = 0.0;
            for i in 0..n {
                s += proj[(r, i)] * ub[k * n + i];
            }
            coeff[(r, k)] = s;
        }
    }
    coeff
}

/// Evaluates the affine extension at a point.
pub fn eval_extension(coeff: &DMatrix<f64>, centroid: &Point, x: &Point) -> [f64; 3] {
    let dim = coeff.ncols();
    let mut out = [0.0; 3];
    for k in 0..dim {
        let mut s = coeff[(0, k)];
        for j in 0..dim {
            s += coeff[(j + 1, k)] * (x[j] - centroid[j]);
        }
        out[k] = s;
    }
    out
}

/// Quadratic form of the scalar stabilizer S_T applied to stacked vector data.
pub fn stabilizer_quadratic_form(a: &DMatrix<f64>, ub: &[f64], dim: usize) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for c in 0..dim {
        for i in 0..n {
            for j in 0..n {
                s += ub[c * n + i] * a[(i, j)] * ub[c * n + j];
            }
        }
    }
    s
}
