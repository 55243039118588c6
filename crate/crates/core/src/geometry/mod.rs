//! Polytopal mesh data model and geometric validation.
//!
//! A mesh stores vertices, facets (edges in 2D, planar faces in 3D) and
//! elements. Facet unknowns live at midpoints (2D) or area centroids (3D);
//! each facet records the element on its "left" side, whose outward normal is
//! stored, and optionally the element on its right. Meshes are immutable
//! after construction and safe to share across threads.

pub mod generators;

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Coordinates are always stored with three components; 2D meshes keep z = 0.
pub type Point = [f64; 3];

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
}

/// Edge (2D) or planar face (3D) of an element.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Facet {
    /// Ordered vertex loop (two entries in 2D).
    pub vertices: Vec<usize>,
    /// Midpoint (2D) or area centroid (3D); carries the facet unknowns.
    pub midpoint: Point,
    /// Length (2D) or area (3D).
    pub measure: f64,
    /// Facet diameter h_e.
    pub diameter: f64,
    /// Element on the side the stored normal points away from.
    pub left: usize,
    /// Adjacent element across the facet; `None` on the boundary.
    pub right: Option<usize>,
    pub tag: BoundaryTag,
    /// Unit normal pointing out of `left`.
    pub normal: Point,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Element {
    /// Facet ids in boundary order (2D) or face order (3D).
    pub facets: Vec<usize>,
    /// Vertex ids; counterclockwise boundary loop in 2D.
    pub vertices: Vec<usize>,
    /// Area (2D) or volume (3D).
    pub measure: f64,
    pub centroid: Point,
    /// Element diameter h_T (max vertex pair distance).
    pub diameter: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopalMesh {
    pub dim: usize,
    pub vertices: Vec<Point>,
    pub facets: Vec<Facet>,
    pub elements: Vec<Element>,
    /// Global meshsize h = max element diameter.
    pub h: f64,
    pub family: String,
}

impl PolytopalMesh {
    /// Outward unit normal of `facet` as seen from `elem`.
    pub fn outward_normal(&self, elem: usize, facet: usize) -> Point {
        let f = &self.facets[facet];
        if f.left == elem {
            f.normal
        } else {
            [-f.normal[0], -f.normal[1], -f.normal[2]]
        }
    }

    pub fn boundary_facets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.facets.len()).filter(|&i| self.facets[i].right.is_none())
    }

    /// Retags every boundary facet by its midpoint. Interior facets are left
    /// untouched; the classifier must not return `Interior`.
    pub fn set_boundary_tags(&mut self, classify: &dyn Fn(&Point) -> BoundaryTag) {
        for f in &mut self.facets {
            if f.right.is_none() {
                f.tag = classify(&f.midpoint);
            }
        }
    }

    pub fn total_measure(&self) -> f64 {
        self.elements.iter().map(|e| e.measure).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mesh serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// One invariant violation found by [`validate_mesh`].
#[derive(Clone, Debug)]
pub struct ValidationIssue {
    /// Which invariant failed.
    pub kind: String,
    /// Offending facet/element id.
    pub entity: String,
    pub detail: String,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [{}]: {}", self.kind, self.entity, self.detail)
    }
}

/// Checks every mesh invariant and reports each violation; an empty report
/// means the mesh is consistent. `expected_measure` additionally checks the
/// domain coverage identity.
pub fn validate_mesh(mesh: &PolytopalMesh, expected_measure: Option<f64>) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let mut push = |kind: &str, entity: String, detail: String| {
        issues.push(ValidationIssue {
            kind: kind.to_string(),
            entity,
            detail,
        });
    };

    for (i, f) in mesh.facets.iter().enumerate() {
        if (norm(&f.normal) - 1.0).abs() > 1e-12 {
            push(
                "unit-normal",
                format!("facet {i}"),
                format!("|n| = {}", norm(&f.normal)),
            );
        }
        if f.measure <= 0.0 {
            push(
                "facet-measure",
                format!("facet {i}"),
                format!("|e| = {}", f.measure),
            );
        }
        if f.diameter <= 0.0 {
            push(
                "facet-diameter",
                format!("facet {i}"),
                format!("h_e = {}", f.diameter),
            );
        }
        let interior = f.right.is_some();
        if interior != (f.tag == BoundaryTag::Interior) {
            push(
                "tag-adjacency",
                format!("facet {i}"),
                format!("tag {:?} with right = {:?}", f.tag, f.right),
            );
        }
    }

    // Facet reference counts from the element side.
    let mut refs = vec![0usize; mesh.facets.len()];
    for (ei, el) in mesh.elements.iter().enumerate() {
        if el.measure <= 0.0 {
            push(
                "element-measure",
                format!("element {ei}"),
                format!("|T| = {}", el.measure),
            );
        }
        let mut closure = [0.0; 3];
        let mut perimeter = 0.0;
        for &fid in &el.facets {
            refs[fid] += 1;
            let f = &mesh.facets[fid];
            let n = mesh.outward_normal(ei, fid);
            for k in 0..3 {
                closure[k] += f.measure * n[k];
            }
            perimeter += f.measure;
        }
        let worst = closure.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if worst > 1e-12 * perimeter {
            push(
                "closure-identity",
                format!("element {ei}"),
                format!("|sum |e| n| = {worst:.3e} (perimeter {perimeter:.3e})"),
            );
        }
    }
    for (i, f) in mesh.facets.iter().enumerate() {
        let expected = if f.right.is_some() { 2 } else { 1 };
        if refs[i] != expected {
            push(
                "facet-adjacency",
                format!("facet {i}"),
                format!("referenced by {} elements, expected {expected}", refs[i]),
            );
        }
    }

    if mesh.dim == 2 {
        let euler = mesh.vertices.len() as i64 - mesh.facets.len() as i64
            + mesh.elements.len() as i64;
        if euler != 1 {
            push(
                "euler-characteristic",
                "mesh".to_string(),
                format!("V - E + F = {euler}, expected 1"),
            );
        }
    }

    if let Some(total) = expected_measure {
        let covered = mesh.total_measure();
        if (covered - total).abs() > 1e-10 * total.max(1.0) {
            push(
                "domain-coverage",
                "mesh".to_string(),
                format!("sum |T| = {covered}, expected {total}"),
            );
        }
    }

    issues
}

/// Deduplicating vertex pool; points closer than `tol` merge to one id.
struct VertexPool {
    tol: f64,
    bins: HashMap<[i64; 3], Vec<usize>>,
    points: Vec<Point>,
}

impl VertexPool {
    fn new(tol: f64) -> Self {
        VertexPool {
            tol,
            bins: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, p: &Point) -> [i64; 3] {
        [
            (p[0] / self.tol).floor() as i64,
            (p[1] / self.tol).floor() as i64,
            (p[2] / self.tol).floor() as i64,
        ]
    }

    fn insert(&mut self, p: Point) -> usize {
        let k = self.key(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let kk = [k[0] + dx, k[1] + dy, k[2] + dz];
                    if let Some(ids) = self.bins.get(&kk) {
                        for &id in ids {
                            if dist(&self.points[id], &p) < self.tol {
                                return id;
                            }
                        }
                    }
                }
            }
        }
        let id = self.points.len();
        self.points.push(p);
        self.bins.entry(k).or_default().push(id);
        id
    }
}

fn polygon_signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = &pts[i];
        let q = &pts[(i + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// Shoelace area and centroid of a simple polygon (counterclockwise positive).
pub fn polygon_area_centroid(pts: &[Point]) -> (f64, Point) {
    let n = pts.len();
    let mut a = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = &pts[i];
        let q = &pts[(i + 1) % n];
        let w = p[0] * q[1] - q[0] * p[1];
        a += w;
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    a *= 0.5;
    (a, [cx / (6.0 * a), cy / (6.0 * a), 0.0])
}

fn max_pair_distance(pts: &[Point]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(dist(&pts[i], &pts[j]));
        }
    }
    d
}

/// Assembles a 2D mesh from counterclockwise polygon cells given by raw
/// coordinates. Shared edges are matched by snapped vertex identity; boundary
/// facets default to the Dirichlet tag.
pub fn build_mesh_2d(cells: &[Vec<Point>], family: &str) -> PolytopalMesh {
    let scale = cells
        .iter()
        .flatten()
        .fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
        .max(1.0);
    let mut pool = VertexPool::new(1e-9 * scale);
    let mut facets: Vec<Facet> = Vec::new();
    let mut facet_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut elements = Vec::new();

    for raw in cells {
        let mut pts: Vec<Point> = raw.clone();
        if polygon_signed_area(&pts) < 0.0 {
            pts.reverse();
        }
        let vids: Vec<usize> = pts.iter().map(|p| pool.insert(*p)).collect();
        // snapped coordinates, with consecutive duplicates dropped
        let mut loop_ids: Vec<usize> = Vec::new();
        for &v in &vids {
            if loop_ids.last() != Some(&v) {
                loop_ids.push(v);
            }
        }
        if loop_ids.last() == Some(&loop_ids[0]) {
            loop_ids.pop();
        }
        assert!(loop_ids.len() >= 3, "degenerate cell after vertex snapping");
        let coords: Vec<Point> = loop_ids.iter().map(|&v| pool.points[v]).collect();
        let (area, centroid) = polygon_area_centroid(&coords);
        assert!(area > 0.0, "cell with nonpositive area {area}");

        let elem_id = elements.len();
        let mut facet_ids = Vec::with_capacity(loop_ids.len());
        for i in 0..loop_ids.len() {
            let a = loop_ids[i];
            let b = loop_ids[(i + 1) % loop_ids.len()];
            let key = (a.min(b), a.max(b));
            match facet_of.get(&key) {
                Some(&fid) => {
                    facets[fid].right = Some(elem_id);
                    facets[fid].tag = BoundaryTag::Interior;
                    facet_ids.push(fid);
                }
                None => {
                    let pa = pool.points[a];
                    let pb = pool.points[b];
                    let len = dist(&pa, &pb);
                    let d = sub(&pb, &pa);
                    let fid = facets.len();
                    facets.push(Facet {
                        vertices: vec![a, b],
                        midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.0],
                        measure: len,
                        diameter: len,
                        left: elem_id,
                        right: None,
                        tag: BoundaryTag::Dirichlet,
                        normal: [d[1] / len, -d[0] / len, 0.0],
                    });
                    facet_of.insert(key, fid);
                    facet_ids.push(fid);
                }
            }
        }
        elements.push(Element {
            facets: facet_ids,
            vertices: loop_ids,
            measure: area,
            centroid,
            diameter: max_pair_distance(&coords),
        });
    }

    let h = elements.iter().fold(0.0f64, |m, e| m.max(e.diameter));
    PolytopalMesh {
        dim: 2,
        vertices: pool.points,
        facets,
        elements,
        h,
        family: family.to_string(),
    }
}

fn face_geometry(loop_pts: &[Point]) -> (f64, Point, Point) {
    // area, area centroid, unit normal of a planar polygon given by its loop
    let n = loop_pts.len();
    let mut m = [0.0; 3];
    for p in loop_pts {
        for k in 0..3 {
            m[k] += p[k] / n as f64;
        }
    }
    let mut area_vec = [0.0; 3];
    let mut area = 0.0;
    let mut centroid = [0.0; 3];
    for i in 0..n {
        let a = &loop_pts[i];
        let b = &loop_pts[(i + 1) % n];
        let cr = cross(&sub(a, &m), &sub(b, &m));
        let t_area_vec = [0.5 * cr[0], 0.5 * cr[1], 0.5 * cr[2]];
        let t_area = norm(&t_area_vec);
        for k in 0..3 {
            area_vec[k] += t_area_vec[k];
            centroid[k] += t_area * (m[k] + a[k] + b[k]) / 3.0;
        }
        area += t_area;
    }
    let nn = norm(&area_vec);
    (
        area,
        [centroid[0] / area, centroid[1] / area, centroid[2] / area],
        [area_vec[0] / nn, area_vec[1] / nn, area_vec[2] / nn],
    )
}

/// Assembles a 3D mesh from cells given as lists of planar face loops.
/// Face loop orientation is normalized to point out of the owning cell, so
/// generators may emit loops in either winding.
pub fn build_mesh_3d(cells: &[Vec<Vec<Point>>], family: &str) -> PolytopalMesh {
    let scale = cells
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, p| {
            m.max(p[0].abs()).max(p[1].abs()).max(p[2].abs())
        })
        .max(1.0);
    let mut pool = VertexPool::new(1e-9 * scale);
    let mut facets: Vec<Facet> = Vec::new();
    let mut facet_of: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut elements = Vec::new();

    for raw_cell in cells {
        let elem_id = elements.len();
        // register vertices and collect cleaned loops
        let mut loops: Vec<Vec<usize>> = Vec::new();
        for raw_face in raw_cell {
            let vids: Vec<usize> = raw_face.iter().map(|p| pool.insert(*p)).collect();
            let mut cleaned = Vec::new();
            for &v in &vids {
                if cleaned.last() != Some(&v) {
                    cleaned.push(v);
                }
            }
            if cleaned.last() == Some(&cleaned[0]) {
                cleaned.pop();
            }
            assert!(cleaned.len() >= 3, "degenerate face in cell {elem_id}");
            loops.push(cleaned);
        }

        // approximate cell center from unique vertices, for orientation checks
        let mut cell_vids: Vec<usize> = loops.iter().flatten().copied().collect();
        cell_vids.sort_unstable();
        cell_vids.dedup();
        let mut center = [0.0; 3];
        for &v in &cell_vids {
            for k in 0..3 {
                center[k] += pool.points[v][k] / cell_vids.len() as f64;
            }
        }

        let mut facet_ids = Vec::with_capacity(loops.len());
        let mut volume = 0.0;
        let mut centroid = [0.0; 3];
        for lp in &mut loops {
            let pts: Vec<Point> = lp.iter().map(|&v| pool.points[v]).collect();
            let (_, fc, nrm) = face_geometry(&pts);
            if dot(&nrm, &sub(&fc, &center)) < 0.0 {
                lp.reverse();
            }
            let pts: Vec<Point> = lp.iter().map(|&v| pool.points[v]).collect();
            let (area, fc, nrm) = face_geometry(&pts);

            // signed tet fan for volume and centroid
            for i in 0..pts.len() {
                let a = &pts[i];
                let b = &pts[(i + 1) % pts.len()];
                let u = sub(&fc, &center);
                let v = sub(a, &center);
                let w = sub(b, &center);
                let vol = dot(&u, &cross(&v, &w)) / 6.0;
                volume += vol;
                for k in 0..3 {
                    centroid[k] += vol * (center[k] + fc[k] + a[k] + b[k]) / 4.0;
                }
            }

            let mut key = lp.clone();
            key.sort_unstable();
            match facet_of.get(&key) {
                Some(&fid) => {
                    facets[fid].right = Some(elem_id);
                    facets[fid].tag = BoundaryTag::Interior;
                    facet_ids.push(fid);
                }
                None => {
                    let fid = facets.len();
                    facets.push(Facet {
                        vertices: lp.clone(),
                        midpoint: fc,
                        measure: area,
                        diameter: max_pair_distance(&pts),
                        left: elem_id,
                        right: None,
                        tag: BoundaryTag::Dirichlet,
                        normal: nrm,
                    });
                    facet_of.insert(key, fid);
                    facet_ids.push(fid);
                }
            }
        }
        assert!(volume > 0.0, "cell {elem_id} with nonpositive volume");
        for k in 0..3 {
            centroid[k] /= volume;
        }
        let coords: Vec<Point> = cell_vids.iter().map(|&v| pool.points[v]).collect();
        elements.push(Element {
            facets: facet_ids,
            vertices: cell_vids,
            measure: volume,
            centroid,
            diameter: max_pair_distance(&coords),
        });
    }

    let h = elements.iter().fold(0.0f64, |m, e| m.max(e.diameter));
    PolytopalMesh {
        dim: 3,
        vertices: pool.points,
        facets,
        elements,
        h,
        family: family.to_string(),
    }
}

/// Mesh holding a single polygon; handy for per-element computations.
pub fn single_polygon_mesh(verts: &[Point]) -> PolytopalMesh {
    build_mesh_2d(&[verts.to_vec()], "single")
}

/// Mesh holding a single polyhedron given by its face loops.
pub fn single_polyhedron_mesh(faces: &[Vec<Point>]) -> PolytopalMesh {
    build_mesh_3d(&[faces.to_vec()], "single")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_geometry() {
        let mesh = single_polygon_mesh(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ]);
        let el = &mesh.elements[0];
        assert!((el.measure - 1.0).abs() < 1e-15);
        assert!(dist(&el.centroid, &[0.5, 0.5, 0.0]) < 1e-15);
        let expected = [
            [0.0, -1.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
        ];
        for (i, &fid) in el.facets.iter().enumerate() {
            assert!((mesh.facets[fid].measure - 1.0).abs() < 1e-15);
            assert!(dist(&mesh.outward_normal(0, fid), &expected[i]) < 1e-15);
        }
    }

    #[test]
    fn right_triangle_geometry() {
        let mesh =
            single_polygon_mesh(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let el = &mesh.elements[0];
        assert!((el.measure - 0.5).abs() < 1e-15);
        let hyp = &mesh.facets[el.facets[1]];
        assert!((hyp.measure - 2.0f64.sqrt()).abs() < 1e-15);
        let s = 1.0 / 2.0f64.sqrt();
        assert!(dist(&hyp.normal, &[s, s, 0.0]) < 1e-15);
    }

    #[test]
    fn regular_hexagon_area() {
        // oracle: shoelace evaluated here, independent of the builder path
        let verts: Vec<Point> = (0..6)
            .map(|k| {
                let t = std::f64::consts::PI / 3.0 * k as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        let mut oracle = 0.0;
        for i in 0..6 {
            let p = verts[i];
            let q = verts[(i + 1) % 6];
            oracle += 0.5 * (p[0] * q[1] - q[0] * p[1]);
        }
        let mesh = single_polygon_mesh(&verts);
        let exact = 3.0 * 3.0f64.sqrt() / 2.0;
        assert!((oracle - exact).abs() < 1e-12);
        assert!((mesh.elements[0].measure - exact).abs() < 1e-12);
    }

    #[test]
    fn flipped_normal_is_flagged() {
        let mut mesh = single_polygon_mesh(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ]);
        mesh.facets[0].normal = [0.0, 1.0, 0.0]; // flip the bottom edge inward
        let issues = validate_mesh(&mesh, None);
        assert!(issues.iter().any(|i| i.kind == "closure-identity"));
    }

    #[test]
    fn duplicated_facet_reference_is_flagged() {
        let mut mesh = single_polygon_mesh(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ]);
        let dup = mesh.elements[0].facets[0];
        mesh.elements[0].facets.push(dup);
        let issues = validate_mesh(&mesh, None);
        assert!(issues.iter().any(|i| i.kind == "facet-adjacency"));
    }

    #[test]
    fn unit_cube_geometry() {
        let v = |x: f64, y: f64, z: f64| [x, y, z];
        let faces = vec![
            vec![v(0., 0., 0.), v(1., 0., 0.), v(1., 1., 0.), v(0., 1., 0.)],
            vec![v(0., 0., 1.), v(1., 0., 1.), v(1., 1., 1.), v(0., 1., 1.)],
            vec![v(0., 0., 0.), v(1., 0., 0.), v(1., 0., 1.), v(0., 0., 1.)],
            vec![v(0., 1., 0.), v(1., 1., 0.), v(1., 1., 1.), v(0., 1., 1.)],
            vec![v(0., 0., 0.), v(0., 1., 0.), v(0., 1., 1.), v(0., 0., 1.)],
            vec![v(1., 0., 0.), v(1., 1., 0.), v(1., 1., 1.), v(1., 0., 1.)],
        ];
        let mesh = single_polyhedron_mesh(&faces);
        let el = &mesh.elements[0];
        assert!((el.measure - 1.0).abs() < 1e-14);
        assert!(dist(&el.centroid, &[0.5, 0.5, 0.5]) < 1e-14);
        assert!(validate_mesh(&mesh, Some(1.0)).is_empty());
    }
}
