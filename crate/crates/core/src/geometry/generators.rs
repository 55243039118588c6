//! Structured polytopal mesh families on axis-aligned boxes.
//!
//! 2D families: triangular, rectangular, hexagonal (honeycomb clipped to the
//! box), octagonal (truncated-square tiling of octagons plus small squares).
//! 3D families: tetrahedral (six tets per cube, consistent diagonals), cubic,
//! and hexagon-based prisms. Hexagonal tilings are clipped against the box
//! and slivers of relative area below 1e-12 are discarded; clipped polygons
//! stay first-class elements. Identical inputs produce bit-identical meshes.

use super::{build_mesh_2d, build_mesh_3d, polygon_area_centroid, Point, PolytopalMesh};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFamily {
    Triangular,
    Rectangular,
    Hexagonal,
    Octagonal,
    Tetrahedral,
    Cubic,
    HexPrism,
}

impl MeshFamily {
    pub fn dim(&self) -> usize {
        match self {
            MeshFamily::Triangular
            | MeshFamily::Rectangular
            | MeshFamily::Hexagonal
            | MeshFamily::Octagonal => 2,
            _ => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeshFamily::Triangular => "triangular",
            MeshFamily::Rectangular => "rectangular",
            MeshFamily::Hexagonal => "hexagonal",
            MeshFamily::Octagonal => "octagonal",
            MeshFamily::Tetrahedral => "tetrahedral",
            MeshFamily::Cubic => "cubic",
            MeshFamily::HexPrism => "hex_prism",
        }
    }
}

impl std::str::FromStr for MeshFamily {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, MeshError> {
        match s.to_ascii_lowercase().as_str() {
            "triangular" | "triangle" => Ok(MeshFamily::Triangular),
            "rectangular" | "quadrilateral" | "quad" => Ok(MeshFamily::Rectangular),
            "hexagonal" | "hexagon" => Ok(MeshFamily::Hexagonal),
            "octagonal" | "octagon" | "polygonal" => Ok(MeshFamily::Octagonal),
            "tetrahedral" | "tet" => Ok(MeshFamily::Tetrahedral),
            "cubic" | "cube" => Ok(MeshFamily::Cubic),
            "hex_prism" | "hexprism" | "hexagon_prism" => Ok(MeshFamily::HexPrism),
            other => Err(MeshError::UnknownFamily(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("unknown mesh family '{0}'")]
    UnknownFamily(String),
    #[error("family {family} is {family_dim}D but the domain is {domain_dim}D")]
    DimensionMismatch {
        family: &'static str,
        family_dim: usize,
        domain_dim: usize,
    },
    #[error("subdivision count must be at least 1")]
    InvalidSubdivisions,
    #[error("degenerate domain box")]
    DegenerateDomain,
}

/// Axis-aligned box domain; `dim` selects how many coordinates are active.
#[derive(Clone, Copy, Debug)]
pub struct BoxDomain {
    pub lo: Point,
    pub hi: Point,
    pub dim: usize,
}

impl BoxDomain {
    pub fn unit_square() -> Self {
        BoxDomain {
            lo: [0.0, 0.0, 0.0],
            hi: [1.0, 1.0, 0.0],
            dim: 2,
        }
    }

    pub fn unit_cube() -> Self {
        BoxDomain {
            lo: [0.0, 0.0, 0.0],
            hi: [1.0, 1.0, 1.0],
            dim: 3,
        }
    }

    pub fn new_2d(lo: [f64; 2], hi: [f64; 2]) -> Self {
        BoxDomain {
            lo: [lo[0], lo[1], 0.0],
            hi: [hi[0], hi[1], 0.0],
            dim: 2,
        }
    }

    pub fn new_3d(lo: [f64; 3], hi: [f64; 3]) -> Self {
        BoxDomain { lo, hi, dim: 3 }
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|k| self.extent(k)).product()
    }

    fn min_side(&self) -> f64 {
        (0..self.dim).map(|k| self.extent(k)).fold(f64::MAX, f64::min)
    }

    fn is_degenerate(&self) -> bool {
        (0..self.dim).any(|k| self.extent(k) <= 0.0)
    }
}

/// Generates the requested mesh family with `n` subdivisions per (shortest)
/// side, so the meshsize is about `min_side / n`.
pub fn generate_mesh(
    family: MeshFamily,
    n: usize,
    domain: &BoxDomain,
) -> Result<PolytopalMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidSubdivisions);
    }
    if domain.is_degenerate() {
        return Err(MeshError::DegenerateDomain);
    }
    if family.dim() != domain.dim {
        return Err(MeshError::DimensionMismatch {
            family: family.name(),
            family_dim: family.dim(),
            domain_dim: domain.dim,
        });
    }
    let mesh = match family {
        MeshFamily::Rectangular => build_mesh_2d(&rect_cells(n, domain), family.name()),
        MeshFamily::Triangular => build_mesh_2d(&tri_cells(n, domain), family.name()),
        MeshFamily::Hexagonal => build_mesh_2d(&hex_cells(n, domain), family.name()),
        MeshFamily::Octagonal => build_mesh_2d(&oct_cells(n, domain), family.name()),
        MeshFamily::Cubic => build_mesh_3d(&cube_cells(n, domain), family.name()),
        MeshFamily::Tetrahedral => build_mesh_3d(&tet_cells(n, domain), family.name()),
        MeshFamily::HexPrism => build_mesh_3d(&hex_prism_cells(n, domain), family.name()),
    };
    Ok(mesh)
}

/// Generates a 2D family on the unit square and maps every vertex through
/// `map` before building, e.g. onto the Cook membrane quadrilateral.
pub fn generate_mapped_2d(
    family: MeshFamily,
    n: usize,
    map: &dyn Fn(f64, f64) -> (f64, f64),
    label: &str,
) -> Result<PolytopalMesh, MeshError> {
    if family.dim() != 2 {
        return Err(MeshError::DimensionMismatch {
            family: family.name(),
            family_dim: family.dim(),
            domain_dim: 2,
        });
    }
    let unit = BoxDomain::unit_square();
    let mut cells = match family {
        MeshFamily::Rectangular => rect_cells(n, &unit),
        MeshFamily::Triangular => tri_cells(n, &unit),
        MeshFamily::Hexagonal => hex_cells(n, &unit),
        MeshFamily::Octagonal => oct_cells(n, &unit),
        _ => unreachable!(),
    };
    for cell in &mut cells {
        for p in cell.iter_mut() {
            let (x, y) = map(p[0], p[1]);
            *p = [x, y, 0.0];
        }
    }
    Ok(build_mesh_2d(&cells, label))
}

/// Bilinear map from the unit square onto the Cook membrane quadrilateral
/// (0,0), (48,44), (48,60), (0,44).
pub fn cook_map(x: f64, y: f64) -> (f64, f64) {
    (48.0 * x, 44.0 * x * (1.0 - y) + 44.0 * y + 16.0 * x * y)
}

/// Cook membrane mesh for any 2D family.
pub fn generate_cook_mesh(family: MeshFamily, n: usize) -> Result<PolytopalMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidSubdivisions);
    }
    let label = format!("cook_{}", family.name());
    generate_mapped_2d(family, n, &cook_map, &label)
}

fn grid_counts(n: usize, domain: &BoxDomain) -> Vec<usize> {
    let size = domain.min_side() / n as f64;
    (0..domain.dim)
        .map(|k| ((domain.extent(k) / size).round() as usize).max(1))
        .collect()
}

fn rect_cells(n: usize, domain: &BoxDomain) -> Vec<Vec<Point>> {
    let counts = grid_counts(n, domain);
    let (nx, ny) = (counts[0], counts[1]);
    let x = |i: usize| domain.lo[0] + domain.extent(0) * i as f64 / nx as f64;
    let y = |j: usize| domain.lo[1] + domain.extent(1) * j as f64 / ny as f64;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![
                [x(i), y(j), 0.0],
                [x(i + 1), y(j), 0.0],
                [x(i + 1), y(j + 1), 0.0],
                [x(i), y(j + 1), 0.0],
            ]);
        }
    }
    cells
}

fn tri_cells(n: usize, domain: &BoxDomain) -> Vec<Vec<Point>> {
    let mut cells = Vec::new();
    for quad in rect_cells(n, domain) {
        cells.push(vec![quad[0], quad[1], quad[2]]);
        cells.push(vec![quad[0], quad[2], quad[3]]);
    }
    cells
}

/// Sutherland-Hodgman clip of a convex polygon against one axis plane.
fn clip_axis(poly: &[Point], axis: usize, bound: f64, keep_below: bool) -> Vec<Point> {
    let inside = |p: &Point| {
        if keep_below {
            p[axis] <= bound
        } else {
            p[axis] >= bound
        }
    };
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let cur = poly[i];
        let nxt = poly[(i + 1) % poly.len()];
        let cur_in = inside(&cur);
        let nxt_in = inside(&nxt);
        if cur_in {
            out.push(cur);
        }
        if cur_in != nxt_in {
            let t = (bound - cur[axis]) / (nxt[axis] - cur[axis]);
            out.push([
                cur[0] + t * (nxt[0] - cur[0]),
                cur[1] + t * (nxt[1] - cur[1]),
                0.0,
            ]);
        }
    }
    out
}

fn clip_to_box(poly: &[Point], domain: &BoxDomain) -> Vec<Point> {
    let mut p = poly.to_vec();
    for axis in 0..2 {
        p = clip_axis(&p, axis, domain.lo[axis], false);
        if p.len() < 3 {
            return Vec::new();
        }
        p = clip_axis(&p, axis, domain.hi[axis], true);
        if p.len() < 3 {
            return Vec::new();
        }
    }
    // drop ring vertices below the mesh-builder snap tolerance so clipped
    // polygons never carry degenerate edges into the builder or extrusion
    let tol = 1e-9
        * domain
            .hi
            .iter()
            .chain(domain.lo.iter())
            .fold(1.0f64, |m, c| m.max(c.abs()));
    let mut out: Vec<Point> = Vec::with_capacity(p.len());
    for q in p {
        if out.last().map_or(true, |last| super::dist(last, &q) >= tol) {
            out.push(q);
        }
    }
    while out.len() > 1 && super::dist(&out[0], out.last().unwrap()) < tol {
        out.pop();
    }
    if out.len() < 3 {
        return Vec::new();
    }
    out
}

fn hex_cells(n: usize, domain: &BoxDomain) -> Vec<Vec<Point>> {
    // Pointy-top hexagons with diameter close to min_side/n. The row pitch is
    // tuned so hexagon centers land exactly on the bottom and top box edges:
    // boundary cells are then clipped through their midline into pentagons
    // and quads, never into triangles (which carry no boundary stabilizer).
    let r_target = domain.min_side() / (2.0 * n as f64);
    let rows = ((domain.extent(1) / (1.5 * r_target)).round() as i64).max(2);
    let r = domain.extent(1) / (1.5 * rows as f64);
    let w = 3.0f64.sqrt() * r;
    let ypitch = 1.5 * r;
    let full_area = 1.5 * 3.0f64.sqrt() * r * r;

    let imin = -2i64;
    let imax = (domain.extent(0) / w).ceil() as i64 + 2;

    let mut cells = Vec::new();
    for j in 0..=rows {
        let cy = domain.lo[1] + j as f64 * ypitch;
        let offset = if j.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
        for i in imin..=imax {
            let cx = domain.lo[0] + (i as f64 + offset) * w;
            let hexagon: Vec<Point> = (0..6)
                .map(|k| {
                    let t = std::f64::consts::PI / 6.0 + std::f64::consts::PI / 3.0 * k as f64;
                    [cx + r * t.cos(), cy + r * t.sin(), 0.0]
                })
                .collect();
            let clipped = clip_to_box(&hexagon, domain);
            if clipped.len() < 3 {
                continue;
            }
            let (area, _) = polygon_area_centroid(&clipped);
            if area > 1e-12 * full_area {
                cells.push(clipped);
            }
        }
    }
    cells
}

fn oct_cells(n: usize, domain: &BoxDomain) -> Vec<Vec<Point>> {
    // truncated-square tiling: an octagon inscribed in every grid cell plus the
    // small squares left at interior grid vertices; boundary vertices get the
    // clipped halves (triangles) so the box is covered exactly
    let counts = grid_counts(n, domain);
    let (nx, ny) = (counts[0], counts[1]);
    let sx = domain.extent(0) / nx as f64;
    let sy = domain.extent(1) / ny as f64;
    let c = sx.min(sy) / (2.0 + 2.0f64.sqrt());
    let x = |i: usize| domain.lo[0] + sx * i as f64;
    let y = |j: usize| domain.lo[1] + sy * j as f64;

    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (x0, x1, y0, y1) = (x(i), x(i + 1), y(j), y(j + 1));
            cells.push(vec![
                [x0 + c, y0, 0.0],
                [x1 - c, y0, 0.0],
                [x1, y0 + c, 0.0],
                [x1, y1 - c, 0.0],
                [x1 - c, y1, 0.0],
                [x0 + c, y1, 0.0],
                [x0, y1 - c, 0.0],
                [x0, y0 + c, 0.0],
            ]);
        }
    }
    // interior vertices: rotated squares
    for j in 1..ny {
        for i in 1..nx {
            let (vx, vy) = (x(i), y(j));
            cells.push(vec![
                [vx + c, vy, 0.0],
                [vx, vy + c, 0.0],
                [vx - c, vy, 0.0],
                [vx, vy - c, 0.0],
            ]);
        }
    }
    // boundary vertices: half squares
    for i in 1..nx {
        let vx = x(i);
        cells.push(vec![
            [vx - c, domain.lo[1], 0.0],
            [vx + c, domain.lo[1], 0.0],
            [vx, domain.lo[1] + c, 0.0],
        ]);
        cells.push(vec![
            [vx + c, domain.hi[1], 0.0],
            [vx - c, domain.hi[1], 0.0],
            [vx, domain.hi[1] - c, 0.0],
        ]);
    }
    for j in 1..ny {
        let vy = y(j);
        cells.push(vec![
            [domain.lo[0], vy + c, 0.0],
            [domain.lo[0], vy - c, 0.0],
            [domain.lo[0] + c, vy, 0.0],
        ]);
        cells.push(vec![
            [domain.hi[0], vy - c, 0.0],
            [domain.hi[0], vy + c, 0.0],
            [domain.hi[0] - c, vy, 0.0],
        ]);
    }
    // domain corners: quarter squares
    cells.push(vec![
        [domain.lo[0], domain.lo[1], 0.0],
        [domain.lo[0] + c, domain.lo[1], 0.0],
        [domain.lo[0], domain.lo[1] + c, 0.0],
    ]);
    cells.push(vec![
        [domain.hi[0], domain.lo[1], 0.0],
        [domain.hi[0], domain.lo[1] + c, 0.0],
        [domain.hi[0] - c, domain.lo[1], 0.0],
    ]);
    cells.push(vec![
        [domain.hi[0], domain.hi[1], 0.0],
        [domain.hi[0] - c, domain.hi[1], 0.0],
        [domain.hi[0], domain.hi[1] - c, 0.0],
    ]);
    cells.push(vec![
        [domain.lo[0], domain.hi[1], 0.0],
        [domain.lo[0], domain.hi[1] - c, 0.0],
        [domain.lo[0] + c, domain.hi[1], 0.0],
    ]);
    cells
}

fn box_faces(lo: Point, hi: Point) -> Vec<Vec<Point>> {
    let v = |a: usize, b: usize, c: usize| {
        [
            if a == 0 { lo[0] } else { hi[0] },
            if b == 0 { lo[1] } else { hi[1] },
            if c == 0 { lo[2] } else { hi[2] },
        ]
    };
    vec![
        vec![v(0, 0, 0), v(1, 0, 0), v(1, 1, 0), v(0, 1, 0)],
        vec![v(0, 0, 1), v(1, 0, 1), v(1, 1, 1), v(0, 1, 1)],
        vec![v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(0, 0, 1)],
        vec![v(0, 1, 0), v(1, 1, 0), v(1, 1, 1), v(0, 1, 1)],
        vec![v(0, 0, 0), v(0, 1, 0), v(0, 1, 1), v(0, 0, 1)],
        vec![v(1, 0, 0), v(1, 1, 0), v(1, 1, 1), v(1, 0, 1)],
    ]
}

fn cube_cells(n: usize, domain: &BoxDomain) -> Vec<Vec<Vec<Point>>> {
    let counts = grid_counts(n, domain);
    let coord = |axis: usize, i: usize| {
        domain.lo[axis] + domain.extent(axis) * i as f64 / counts[axis] as f64
    };
    let mut cells = Vec::new();
    for k in 0..counts[2] {
        for j in 0..counts[1] {
            for i in 0..counts[0] {
                let lo = [coord(0, i), coord(1, j), coord(2, k)];
                let hi = [coord(0, i + 1), coord(1, j + 1), coord(2, k + 1)];
                cells.push(box_faces(lo, hi));
            }
        }
    }
    cells
}

fn tet_cells(n: usize, domain: &BoxDomain) -> Vec<Vec<Vec<Point>>> {
    // Kuhn subdivision: six tets per cube along vertex-ordered paths from the
    // low corner to the high corner; face diagonals match across cubes
    let counts = grid_counts(n, domain);
    let coord = |axis: usize, i: usize| {
        domain.lo[axis] + domain.extent(axis) * i as f64 / counts[axis] as f64
    };
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut cells = Vec::new();
    for k in 0..counts[2] {
        for j in 0..counts[1] {
            for i in 0..counts[0] {
                let lo = [coord(0, i), coord(1, j), coord(2, k)];
                let hi = [coord(0, i + 1), coord(1, j + 1), coord(2, k + 1)];
                for perm in PERMS {
                    let mut p = lo;
                    let mut verts = vec![p];
                    for &axis in &perm {
                        p[axis] = hi[axis];
                        verts.push(p);
                    }
                    let faces = vec![
                        vec![verts[0], verts[1], verts[2]],
                        vec![verts[0], verts[1], verts[3]],
                        vec![verts[0], verts[2], verts[3]],
                        vec![verts[1], verts[2], verts[3]],
                    ];
                    cells.push(faces);
                }
            }
        }
    }
    cells
}

fn hex_prism_cells(n: usize, domain: &BoxDomain) -> Vec<Vec<Vec<Point>>> {
    let base = BoxDomain::new_2d(
        [domain.lo[0], domain.lo[1]],
        [domain.hi[0], domain.hi[1]],
    );
    let polys = hex_cells(n, &base);
    let size = base.min_side() / n as f64;
    let nz = ((domain.extent(2) / size).round() as usize).max(1);
    let z = |k: usize| domain.lo[2] + domain.extent(2) * k as f64 / nz as f64;

    let mut cells = Vec::new();
    for k in 0..nz {
        let (z0, z1) = (z(k), z(k + 1));
        for poly in &polys {
            let bottom: Vec<Point> = poly.iter().map(|p| [p[0], p[1], z0]).collect();
            let top: Vec<Point> = poly.iter().map(|p| [p[0], p[1], z1]).collect();
            let mut faces = vec![bottom.clone(), top.clone()];
            for i in 0..poly.len() {
                let a = i;
                let b = (i + 1) % poly.len();
                faces.push(vec![bottom[a], bottom[b], top[b], top[a]]);
            }
            cells.push(faces);
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_mesh;

    #[test]
    fn rectangular_counts() {
        let mesh = generate_mesh(MeshFamily::Rectangular, 2, &BoxDomain::unit_square()).unwrap();
        assert_eq!(mesh.elements.len(), 4);
        assert_eq!(mesh.facets.len(), 12);
        assert!(validate_mesh(&mesh, Some(1.0)).is_empty());
    }

    #[test]
    fn triangular_counts() {
        let mesh = generate_mesh(MeshFamily::Triangular, 2, &BoxDomain::unit_square()).unwrap();
        assert_eq!(mesh.elements.len(), 8);
        assert_eq!(mesh.facets.len(), 16);
        assert!(validate_mesh(&mesh, Some(1.0)).is_empty());
    }

    #[test]
    fn cubic_counts() {
        let mesh = generate_mesh(MeshFamily::Cubic, 2, &BoxDomain::unit_cube()).unwrap();
        assert_eq!(mesh.elements.len(), 8);
        assert_eq!(mesh.facets.len(), 36);
        assert!(validate_mesh(&mesh, Some(1.0)).is_empty());
    }

    #[test]
    fn hexagonal_euler_and_coverage() {
        let mesh = generate_mesh(MeshFamily::Hexagonal, 8, &BoxDomain::unit_square()).unwrap();
        // oracle: independent incidence count over the generated arrays
        let mut seen = std::collections::HashSet::new();
        for f in &mesh.facets {
            let key = (f.vertices[0].min(f.vertices[1]), f.vertices[0].max(f.vertices[1]));
            assert!(seen.insert(key), "duplicate facet");
        }
        let euler = mesh.vertices.len() as i64 - mesh.facets.len() as i64
            + mesh.elements.len() as i64;
        assert_eq!(euler, 1);
        assert!(validate_mesh(&mesh, Some(1.0)).is_empty());
    }

    #[test]
    fn octagonal_valid() {
        for n in [1, 3, 8] {
            let mesh =
                generate_mesh(MeshFamily::Octagonal, n, &BoxDomain::unit_square()).unwrap();
            assert!(validate_mesh(&mesh, Some(1.0)).is_empty(), "n = {n}");
        }
    }

    #[test]
    fn tetrahedral_valid() {
        let mesh = generate_mesh(MeshFamily::Tetrahedral, 2, &BoxDomain::unit_cube()).unwrap();
        assert_eq!(mesh.elements.len(), 48);
        assert!(validate_mesh(&mesh, Some(1.0)).is_empty());
    }

    #[test]
    fn hex_prism_valid() {
        let mesh = generate_mesh(MeshFamily::HexPrism, 4, &BoxDomain::unit_cube()).unwrap();
        assert!(validate_mesh(&mesh, Some(1.0)).is_empty());
    }

    #[test]
    fn beam_box_scales_layers() {
        let beam = BoxDomain::new_3d([-1.0, -1.0, 0.0], [1.0, 1.0, 10.0]);
        let mesh = generate_mesh(MeshFamily::Cubic, 4, &beam).unwrap();
        assert_eq!(mesh.elements.len(), 4 * 4 * 20);
        assert!(validate_mesh(&mesh, Some(40.0)).is_empty());
    }

    #[test]
    fn cook_mesh_covers_quadrilateral() {
        let mesh = generate_cook_mesh(MeshFamily::Rectangular, 4).unwrap();
        // area of the Cook quadrilateral by the shoelace formula
        let quad = [(0.0, 0.0), (48.0, 44.0), (48.0, 60.0), (0.0, 44.0)];
        let mut area = 0.0;
        for i in 0..4 {
            let (x0, y0) = quad[i];
            let (x1, y1) = quad[(i + 1) % 4];
            area += 0.5 * (x0 * y1 - x1 * y0);
        }
        assert!(validate_mesh(&mesh, Some(area)).is_empty());
    }

    #[test]
    fn deterministic_generation() {
        let a = generate_mesh(MeshFamily::Hexagonal, 6, &BoxDomain::unit_square()).unwrap();
        let b = generate_mesh(MeshFamily::Hexagonal, 6, &BoxDomain::unit_square()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn family_dimension_mismatch() {
        let err = generate_mesh(MeshFamily::Cubic, 2, &BoxDomain::unit_square());
        assert!(matches!(err, Err(MeshError::DimensionMismatch { .. })));
    }
}
