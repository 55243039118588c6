//! Quadrature rules on polytopal cells and their facets.
//!
//! Polygons are fanned into triangles from the centroid and integrated with a
//! degree-4 symmetric triangle rule; polyhedra are fanned into tetrahedra via
//! face-centroid pyramids with a degree-3 rule. Facet integrals use two-point
//! Gauss per edge (2D) and the triangle rule on fanned faces (3D). These
//! choices are exact for the polynomial loads used by the manufactured cases.

use crate::geometry::{Point, PolytopalMesh};

/// Degree-4 symmetric triangle rule (6 points), barycentric (a, b, b) orbits.
/// Weights sum to 1 and scale by the triangle area.
const TRI_DEG4: [([f64; 3], f64); 6] = [
    (
        [
            0.108_103_018_168_070,
            0.445_948_490_915_965,
            0.445_948_490_915_965,
        ],
        0.223_381_589_678_011,
    ),
    (
        [
            0.445_948_490_915_965,
            0.108_103_018_168_070,
            0.445_948_490_915_965,
        ],
        0.223_381_589_678_011,
    ),
    (
        [
            0.445_948_490_915_965,
            0.445_948_490_915_965,
            0.108_103_018_168_070,
        ],
        0.223_381_589_678_011,
    ),
    (
        [
            0.816_847_572_980_459,
            0.091_576_213_509_771,
            0.091_576_213_509_771,
        ],
        0.109_951_743_655_322,
    ),
    (
        [
            0.091_576_213_509_771,
            0.816_847_572_980_459,
            0.091_576_213_509_771,
        ],
        0.109_951_743_655_322,
    ),
    (
        [
            0.091_576_213_509_771,
            0.091_576_213_509_771,
            0.816_847_572_980_459,
        ],
        0.109_951_743_655_322,
    ),
];

/// Degree-3 tetrahedron rule (5 points, one negative centroid weight).
const TET_DEG3: [([f64; 4], f64); 5] = [
    ([0.25, 0.25, 0.25, 0.25], -0.8),
    ([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0], 0.45),
    ([1.0 / 6.0, 0.5, 1.0 / 6.0, 1.0 / 6.0], 0.45),
    ([1.0 / 6.0, 1.0 / 6.0, 0.5, 1.0 / 6.0], 0.45),
    ([1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5], 0.45),
];

/// Two-point Gauss abscissae on [-1, 1].
const GAUSS2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

fn lerp(a: &Point, b: &Point, t: f64) -> Point {
    [
        a[0] + t * (b[0] - a[0]),
        a[1] + t * (b[1] - a[1]),
        a[2] + t * (b[2] - a[2]),
    ]
}

fn tri_area_2d(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn tri_area_3d(a: &Point, b: &Point, c: &Point) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let w = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    0.5 * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt()
}

fn tet_volume(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let w = [d[0] - a[0], d[1] - a[1], d[2] - a[2]];
    (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0]))
        / 6.0
}

fn push_triangle(points: &mut Vec<(Point, f64)>, a: &Point, b: &Point, c: &Point, area: f64) {
    for (bary, w) in TRI_DEG4 {
        let x = [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
            bary[0] * a[2] + bary[1] * b[2] + bary[2] * c[2],
        ];
        points.push((x, w * area));
    }
}

/// Quadrature points and weights covering element `elem`; weights sum to |T|.
pub fn element_quadrature(mesh: &PolytopalMesh, elem: usize) -> Vec<(Point, f64)> {
    let el = &mesh.elements[elem];
    let c = el.centroid;
    let mut out = Vec::new();
    if mesh.dim == 2 {
        let verts = &el.vertices;
        for i in 0..verts.len() {
            let a = mesh.vertices[verts[i]];
            let b = mesh.vertices[verts[(i + 1) % verts.len()]];
            let area = tri_area_2d(&c, &a, &b);
            push_triangle(&mut out, &c, &a, &b, area);
        }
    } else {
        for &fid in &el.facets {
            let f = &mesh.facets[fid];
            let fc = f.midpoint;
            let nv = f.vertices.len();
            for i in 0..nv {
                let a = mesh.vertices[f.vertices[i]];
                let b = mesh.vertices[f.vertices[(i + 1) % nv]];
                let vol = tet_volume(&c, &fc, &a, &b).abs();
                for (bary, w) in TET_DEG3 {
                    let x = [
                        bary[0] * c[0] + bary[1] * fc[0] + bary[2] * a[0] + bary[3] * b[0],
                        bary[0] * c[1] + bary[1] * fc[1] + bary[2] * a[1] + bary[3] * b[1],
                        bary[0] * c[2] + bary[1] * fc[2] + bary[2] * a[2] + bary[3] * b[2],
                    ];
                    out.push((x, w * vol));
                }
            }
        }
    }
    out
}

/// Quadrature points and weights on facet `fid`; weights sum to |e|.
pub fn facet_quadrature(mesh: &PolytopalMesh, fid: usize) -> Vec<(Point, f64)> {
    let f = &mesh.facets[fid];
    let mut out = Vec::new();
    if mesh.dim == 2 {
        let a = mesh.vertices[f.vertices[0]];
        let b = mesh.vertices[f.vertices[1]];
        for t in GAUSS2 {
            out.push((lerp(&a, &b, 0.5 * (1.0 + t)), 0.5 * f.measure));
        }
    } else {
        let fc = f.midpoint;
        let nv = f.vertices.len();
        for i in 0..nv {
            let a = mesh.vertices[f.vertices[i]];
            let b = mesh.vertices[f.vertices[(i + 1) % nv]];
            let area = tri_area_3d(&fc, &a, &b);
            push_triangle(&mut out, &fc, &a, &b, area);
        }
    }
    out
}

/// Facet average of a vector-valued function (the L2 projection onto
/// facet-wise constants).
pub fn facet_average(
    mesh: &PolytopalMesh,
    fid: usize,
    f: &dyn Fn(&Point) -> [f64; 3],
) -> [f64; 3] {
    let mut acc = [0.0; 3];
    for (x, w) in facet_quadrature(mesh, fid) {
        let v = f(&x);
        for k in 0..3 {
            acc[k] += w * v[k];
        }
    }
    let m = mesh.facets[fid].measure;
    [acc[0] / m, acc[1] / m, acc[2] / m]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::single_polygon_mesh;

    #[test]
    fn triangle_rule_exact_to_degree_four() {
        // Reference triangle, monomials x^p y^q with p+q <= 4 against closed form
        // integral p! q! / (p+q+2)!.
        let mesh = single_polygon_mesh(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let pts = element_quadrature(&mesh, 0);
        let fact = |k: usize| (1..=k).product::<usize>() as f64;
        for p in 0..=4usize {
            for q in 0..=(4 - p) {
                let num: f64 = pts
                    .iter()
                    .map(|(x, w)| w * x[0].powi(p as i32) * x[1].powi(q as i32))
                    .sum();
                let exact = fact(p) * fact(q) / fact(p + q + 2);
                assert!(
                    (num - exact).abs() < 1e-14,
                    "x^{p} y^{q}: {num} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn edge_rule_exact_for_cubics() {
        let mesh = single_polygon_mesh(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        // facet 0 is the edge from (0,0) to (1,0)
        let pts = facet_quadrature(&mesh, 0);
        let num: f64 = pts.iter().map(|(x, w)| w * x[0].powi(3)).sum();
        assert!((num - 0.25).abs() < 1e-15);
    }

    #[test]
    fn facet_average_of_sine() {
        // unit edge: Gauss-2 truncation error for sin is O(3e-4)
        let mesh = single_polygon_mesh(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let avg = facet_average(&mesh, 0, &|x| [x[0].sin(), 0.0, 0.0]);
        assert!((avg[0] - (1.0 - 1.0f64.cos())).abs() < 5e-4);

        // mesh-scale edge of length 1/8: error shrinks with h^4, under 1e-6
        let small = single_polygon_mesh(&[
            [0.0, 0.0, 0.0],
            [0.125, 0.0, 0.0],
            [0.0, 0.125, 0.0],
        ]);
        let avg = facet_average(&small, 0, &|x| [x[0].sin(), 0.0, 0.0]);
        let exact = (1.0 - 0.125f64.cos()) / 0.125;
        assert!((avg[0] - exact).abs() < 1e-6);
    }
}
