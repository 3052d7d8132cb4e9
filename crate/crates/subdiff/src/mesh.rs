//! Primal triangulations and their barycentric dual meshes.
//!
//! The primal mesh is a conforming triangulation of a convex polygonal
//! domain; the built-in constructor produces the uniform right-angle mesh of
//! the unit square with diameter sqrt(2)/M. The dual mesh assigns every node
//! a control volume bounded by edge midpoints and triangle barycenters;
//! interior nodes carry the flux segments used by the finite volume
//! operators, boundary volumes exist only for area bookkeeping.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PrimalMesh {
    pub vertices: Vec<[f64; 2]>,
    /// vertex indices, counterclockwise
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// vertex id -> contiguous interior unknown index
    pub interior_index: Vec<Option<usize>>,
    /// unknown index -> vertex id
    pub interior_nodes: Vec<usize>,
    /// max triangle diameter
    pub h: f64,
    /// subdivision count for the built-in unit-square mesh
    structured_m: Option<usize>,
}

fn tri_signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl PrimalMesh {
    /// Uniform right-angle triangulation of the unit square: (M+1)^2 lattice
    /// vertices, each cell split along its main diagonal.
    pub fn uniform_unit_square(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "subdivision count must be >= 2, got {m}"
            )));
        }
        let np = m + 1;
        let mut vertices = Vec::with_capacity(np * np);
        let mut boundary = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                vertices.push([i as f64 / m as f64, j as f64 / m as f64]);
                boundary.push(i == 0 || j == 0 || i == m || j == m);
            }
        }
        let vid = |i: usize, j: usize| j * np + i;
        let mut triangles = Vec::with_capacity(2 * m * m);
        for j in 0..m {
            for i in 0..m {
                let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        let mut mesh = Self {
            vertices,
            triangles,
            boundary,
            interior_index: Vec::new(),
            interior_nodes: Vec::new(),
            h: std::f64::consts::SQRT_2 / m as f64,
            structured_m: Some(m),
        };
        mesh.index_interior();
        mesh.validate()?;
        Ok(mesh)
    }

    /// Parse the plain-text mesh format: `$nodes` lines `id x y boundary_flag`
    /// followed by `$triangles` lines `id v1 v2 v3`, ids 1-based. Triangles
    /// are reoriented counterclockwise if needed.
    pub fn from_text(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Nodes,
            Triangles,
        }
        let mut section = Section::None;
        let mut nodes: Vec<(usize, [f64; 2], bool)> = Vec::new();
        let mut tris: Vec<(usize, [usize; 3])> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "$nodes" => {
                    section = Section::Nodes;
                    continue;
                }
                "$triangles" => {
                    section = Section::Triangles;
                    continue;
                }
                _ => {}
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |what: &str| {
                Error::MeshFile(format!("line {}: {}", lineno + 1, what))
            };
            match section {
                Section::None => return Err(bad("data before a section header")),
                Section::Nodes => {
                    if fields.len() != 4 {
                        return Err(bad("expected `id x y boundary_flag`"));
                    }
                    let id: usize = fields[0].parse().map_err(|_| bad("bad node id"))?;
                    let x: f64 = fields[1].parse().map_err(|_| bad("bad x"))?;
                    let y: f64 = fields[2].parse().map_err(|_| bad("bad y"))?;
                    let flag: u8 = fields[3].parse().map_err(|_| bad("bad boundary flag"))?;
                    nodes.push((id, [x, y], flag != 0));
                }
                Section::Triangles => {
                    if fields.len() != 4 {
                        return Err(bad("expected `id v1 v2 v3`"));
                    }
                    let id: usize = fields[0].parse().map_err(|_| bad("bad triangle id"))?;
                    let mut v = [0usize; 3];
                    for (slot, f) in v.iter_mut().zip(&fields[1..]) {
                        *slot = f.parse().map_err(|_| bad("bad vertex id"))?;
                    }
                    tris.push((id, v));
                }
            }
        }
        if nodes.is_empty() || tris.is_empty() {
            return Err(Error::MeshFile("missing $nodes or $triangles data".into()));
        }
        nodes.sort_by_key(|n| n.0);
        for (expect, node) in nodes.iter().enumerate() {
            if node.0 != expect + 1 {
                return Err(Error::MeshFile(format!(
                    "node ids must be 1..=n contiguous, found {}",
                    node.0
                )));
            }
        }
        let vertices: Vec<[f64; 2]> = nodes.iter().map(|n| n.1).collect();
        let boundary: Vec<bool> = nodes.iter().map(|n| n.2).collect();
        tris.sort_by_key(|t| t.0);
        let mut triangles = Vec::with_capacity(tris.len());
        for (_, v) in tris {
            let mut t = [v[0] - 1, v[1] - 1, v[2] - 1];
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::MeshFile("triangle references unknown node".into()));
            }
            if tri_signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < 0.0 {
                t.swap(1, 2);
            }
            triangles.push(t);
        }
        let h = triangles
            .iter()
            .map(|t| {
                let d = |a: usize, b: usize| {
                    let (p, q) = (vertices[a], vertices[b]);
                    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
                };
                d(t[0], t[1]).max(d(t[1], t[2])).max(d(t[2], t[0]))
            })
            .fold(0.0, f64::max);
        let mut mesh = Self {
            vertices,
            triangles,
            boundary,
            interior_index: Vec::new(),
            interior_nodes: Vec::new(),
            h,
            structured_m: None,
        };
        mesh.index_interior();
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text)
    }

    fn index_interior(&mut self) {
        self.interior_index = vec![None; self.vertices.len()];
        self.interior_nodes.clear();
        for (v, &on_boundary) in self.boundary.iter().enumerate() {
            if !on_boundary {
                self.interior_index[v] = Some(self.interior_nodes.len());
                self.interior_nodes.push(v);
            }
        }
    }

    fn validate(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            let area = self.triangle_area(t);
            if area <= 0.0 {
                return Err(Error::Geometry(format!(
                    "triangle {t} {tri:?} has non-positive area {area:.3e}"
                )));
            }
        }
        Ok(())
    }

    pub fn n_interior(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn structured_subdivisions(&self) -> Option<usize> {
        self.structured_m
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        tri_signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Gradients of the three barycentric basis functions on triangle t
    /// (constant vectors).
    pub fn p1_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let twice_area = 2.0 * self.triangle_area(t);
        [
            [(pb[1] - pc[1]) / twice_area, (pc[0] - pb[0]) / twice_area],
            [(pc[1] - pa[1]) / twice_area, (pa[0] - pc[0]) / twice_area],
            [(pa[1] - pb[1]) / twice_area, (pb[0] - pa[0]) / twice_area],
        ]
    }

    /// Barycentric coordinates of a point with respect to triangle t.
    pub fn barycentric(&self, t: usize, p: [f64; 2]) -> [f64; 3] {
        let [a, b, c] = self.triangles[t];
        let area = self.triangle_area(t);
        let la = tri_signed_area(p, self.vertices[b], self.vertices[c]) / area;
        let lb = tri_signed_area(self.vertices[a], p, self.vertices[c]) / area;
        [la, lb, 1.0 - la - lb]
    }

    /// Locate the triangle containing a point: index arithmetic on the
    /// structured mesh, brute-force scan otherwise.
    pub fn locate(&self, p: [f64; 2]) -> Result<usize> {
        if let Some(m) = self.structured_m {
            let (x, y) = (p[0], p[1]);
            if !(-1e-12..=1.0 + 1e-12).contains(&x) || !(-1e-12..=1.0 + 1e-12).contains(&y) {
                return Err(Error::OutOfDomain { x, y });
            }
            let mf = m as f64;
            let i = ((x * mf).floor() as usize).min(m - 1);
            let j = ((y * mf).floor() as usize).min(m - 1);
            let fx = x * mf - i as f64;
            let fy = y * mf - j as f64;
            // cells are split along the diagonal from (i,j) to (i+1,j+1)
            let cell = 2 * (j * m + i);
            return Ok(if fy <= fx { cell } else { cell + 1 });
        }
        for t in 0..self.triangles.len() {
            let bary = self.barycentric(t, p);
            if bary.iter().all(|&l| l >= -1e-12) {
                return Ok(t);
            }
        }
        Err(Error::OutOfDomain { x: p[0], y: p[1] })
    }

    /// Evaluate the piecewise-linear field given by interior coefficients
    /// (zero on the boundary) at a point.
    pub fn eval_p1(&self, coeffs: &[f64], p: [f64; 2]) -> Result<f64> {
        if coeffs.len() != self.n_interior() {
            return Err(Error::DimensionMismatch {
                expected: self.n_interior(),
                got: coeffs.len(),
            });
        }
        let t = self.locate(p)?;
        let bary = self.barycentric(t, p);
        let mut val = 0.0;
        for (k, &v) in self.triangles[t].iter().enumerate() {
            if let Some(u) = self.interior_index[v] {
                val += bary[k] * coeffs[u];
            }
        }
        Ok(val)
    }
}

/// One flux segment of a control-volume boundary: endpoints `a -> b` (an edge
/// midpoint or barycenter each) and the triangle that contains it. Segments
/// are ordered counterclockwise, so the outward normal is the right-hand
/// rotation of b - a.
#[derive(Debug, Clone, Copy)]
pub struct FluxSegment {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub tri: usize,
}

#[derive(Debug, Clone)]
pub struct DualMesh {
    /// flux segments per interior unknown, chained into a closed polygon
    pub segments: Vec<Vec<FluxSegment>>,
    /// control volume area per interior unknown
    pub cv_area: Vec<f64>,
    /// control volume area for every vertex (boundary volumes included,
    /// bookkeeping only)
    pub cv_area_all: Vec<f64>,
}

impl DualMesh {
    pub fn build(mesh: &PrimalMesh) -> Result<Self> {
        for t in 0..mesh.triangles.len() {
            if mesh.triangle_area(t) <= 0.0 {
                return Err(Error::Geometry(format!("degenerate triangle {t}")));
            }
        }
        let n_vert = mesh.vertices.len();
        // incident triangles per vertex, each recorded as (other ccw pair)
        let mut fans: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n_vert]; // (tri, va, vb)
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for k in 0..3 {
                let p = tri[k];
                let va = tri[(k + 1) % 3];
                let vb = tri[(k + 2) % 3];
                fans[p].push((t, va, vb));
            }
        }
        let mut segments = vec![Vec::new(); mesh.n_interior()];
        let mut cv_area_all = vec![0.0; n_vert];
        let mut cv_area = vec![0.0; mesh.n_interior()];
        for v in 0..n_vert {
            let fan = &fans[v];
            if fan.is_empty() {
                return Err(Error::Geometry(format!("vertex {v} belongs to no triangle")));
            }
            // chain the fan: next triangle is the one whose entry edge is the
            // current exit edge
            let mut by_entry = std::collections::HashMap::new();
            for &(t, va, vb) in fan {
                if by_entry.insert(va, (t, va, vb)).is_some() {
                    return Err(Error::Geometry(format!(
                        "non-manifold fan at vertex {v}"
                    )));
                }
            }
            // boundary fans start at the edge that is nobody's exit
            let exits: std::collections::HashSet<usize> =
                fan.iter().map(|&(_, _, vb)| vb).collect();
            let start = fan
                .iter()
                .find(|&&(_, va, _)| !exits.contains(&va))
                .copied()
                .unwrap_or(fan[0]);
            let mut chain = Vec::with_capacity(fan.len());
            let mut cur = start;
            for _ in 0..fan.len() {
                chain.push(cur);
                match by_entry.get(&cur.2) {
                    Some(&next) => cur = next,
                    None => break,
                }
            }
            if chain.len() != fan.len() {
                return Err(Error::Geometry(format!(
                    "disconnected triangle fan at vertex {v}"
                )));
            }
            let p = mesh.vertices[v];
            let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let mut poly: Vec<[f64; 2]> = Vec::with_capacity(2 * chain.len() + 1);
            let mut segs: Vec<FluxSegment> = Vec::with_capacity(2 * chain.len());
            for &(t, va, vb) in &chain {
                let m_in = mid(p, mesh.vertices[va]);
                let q = {
                    let [a, b, c] = mesh.triangles[t];
                    [
                        (mesh.vertices[a][0] + mesh.vertices[b][0] + mesh.vertices[c][0]) / 3.0,
                        (mesh.vertices[a][1] + mesh.vertices[b][1] + mesh.vertices[c][1]) / 3.0,
                    ]
                };
                let m_out = mid(p, mesh.vertices[vb]);
                segs.push(FluxSegment { a: m_in, b: q, tri: t });
                segs.push(FluxSegment { a: q, b: m_out, tri: t });
                poly.push(m_in);
                poly.push(q);
            }
            let is_interior = !mesh.boundary[v];
            if is_interior {
                // closed polygon of midpoints and barycenters
            } else {
                // close the boundary volume along the two boundary edge
                // halves through the vertex itself
                let last_exit = mid(p, mesh.vertices[chain.last().unwrap().2]);
                poly.push(last_exit);
                poly.push(p);
            }
            let mut area = 0.0;
            for i in 0..poly.len() {
                let a = poly[i];
                let b = poly[(i + 1) % poly.len()];
                area += a[0] * b[1] - b[0] * a[1];
            }
            area *= 0.5;
            cv_area_all[v] = area;
            if let Some(u) = mesh.interior_index[v] {
                cv_area[u] = area;
                segments[u] = segs;
            }
        }
        Ok(Self {
            segments,
            cv_area,
            cv_area_all,
        })
    }

    pub fn total_area(&self) -> f64 {
        self.cv_area_all.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mesh_counts() {
        let mesh = PrimalMesh::uniform_unit_square(8).unwrap();
        assert_eq!(mesh.vertices.len(), 81);
        assert_eq!(mesh.triangles.len(), 128);
        assert_eq!(mesh.n_interior(), 49);
        let m2 = PrimalMesh::uniform_unit_square(2).unwrap();
        assert_eq!(m2.vertices.len(), 9);
        assert_eq!(m2.triangles.len(), 8);
        assert_eq!(m2.n_interior(), 1);
    }

    #[test]
    fn uniform_mesh_diameter_exact() {
        let mesh = PrimalMesh::uniform_unit_square(10).unwrap();
        assert_eq!(mesh.h, std::f64::consts::SQRT_2 / 10.0);
        assert!((mesh.h - 0.141421).abs() < 1e-6);
    }

    #[test]
    fn rejects_tiny_subdivision() {
        assert!(PrimalMesh::uniform_unit_square(1).is_err());
    }

    #[test]
    fn triangles_cover_domain() {
        for m in [2, 5, 8] {
            let mesh = PrimalMesh::uniform_unit_square(m).unwrap();
            assert!((mesh.total_area() - 1.0).abs() < 1e-12);
            for t in 0..mesh.triangles.len() {
                assert!(mesh.triangle_area(t) > 0.0);
            }
        }
    }

    #[test]
    fn dual_mesh_partitions_domain() {
        for m in [2, 4, 9] {
            let mesh = PrimalMesh::uniform_unit_square(m).unwrap();
            let dual = DualMesh::build(&mesh).unwrap();
            assert!(
                (dual.total_area() - 1.0).abs() < 1e-12,
                "m={m}: {}",
                dual.total_area()
            );
        }
    }

    #[test]
    fn dual_volume_is_third_of_incident_area() {
        let mesh = PrimalMesh::uniform_unit_square(2).unwrap();
        let dual = DualMesh::build(&mesh).unwrap();
        // single interior node with six incident triangles of area 1/8
        assert_eq!(mesh.n_interior(), 1);
        assert!((dual.cv_area[0] - 0.25).abs() < 1e-14);
        // against the generic 1/3 identity on a bigger mesh
        let mesh = PrimalMesh::uniform_unit_square(5).unwrap();
        let dual = DualMesh::build(&mesh).unwrap();
        for (u, &v) in mesh.interior_nodes.iter().enumerate() {
            let incident: f64 = (0..mesh.triangles.len())
                .filter(|&t| mesh.triangles[t].contains(&v))
                .map(|t| mesh.triangle_area(t))
                .sum();
            assert!((dual.cv_area[u] - incident / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_segments_chain_into_closed_polygon() {
        let mesh = PrimalMesh::uniform_unit_square(4).unwrap();
        let dual = DualMesh::build(&mesh).unwrap();
        for segs in &dual.segments {
            assert!(!segs.is_empty());
            for w in segs.windows(2) {
                assert!(
                    (w[0].b[0] - w[1].a[0]).abs() < 1e-14
                        && (w[0].b[1] - w[1].a[1]).abs() < 1e-14
                );
            }
            let first = segs.first().unwrap();
            let last = segs.last().unwrap();
            assert!(
                (last.b[0] - first.a[0]).abs() < 1e-14 && (last.b[1] - first.a[1]).abs() < 1e-14
            );
        }
    }

    #[test]
    fn dual_segment_endpoints_are_midpoints_or_barycenters() {
        let mesh = PrimalMesh::uniform_unit_square(2).unwrap();
        let dual = DualMesh::build(&mesh).unwrap();
        let is_close = |a: [f64; 2], b: [f64; 2]| {
            (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14
        };
        for seg in &dual.segments[0] {
            let [va, vb, vc] = mesh.triangles[seg.tri].map(|v| mesh.vertices[v]);
            let candidates = [
                [(va[0] + vb[0]) / 2.0, (va[1] + vb[1]) / 2.0],
                [(vb[0] + vc[0]) / 2.0, (vb[1] + vc[1]) / 2.0],
                [(vc[0] + va[0]) / 2.0, (vc[1] + va[1]) / 2.0],
                [(va[0] + vb[0] + vc[0]) / 3.0, (va[1] + vb[1] + vc[1]) / 3.0],
            ];
            for p in [seg.a, seg.b] {
                assert!(candidates.iter().any(|&c| is_close(c, p)), "{p:?}");
            }
        }
    }

    #[test]
    fn closed_boundary_has_zero_net_normal() {
        // net outward flux of a constant-gradient field through a closed
        // control-volume boundary vanishes
        let mesh = PrimalMesh::uniform_unit_square(4).unwrap();
        let dual = DualMesh::build(&mesh).unwrap();
        let g = [0.3, -1.7];
        for segs in &dual.segments {
            let mut flux = 0.0;
            for s in segs {
                let (dx, dy) = (s.b[0] - s.a[0], s.b[1] - s.a[1]);
                flux += g[0] * dy - g[1] * dx;
            }
            assert!(flux.abs() < 1e-12);
        }
    }

    #[test]
    fn eval_p1_reproduces_nodal_values_and_linears() {
        let mesh = PrimalMesh::uniform_unit_square(4).unwrap();
        let g = |x: f64, y: f64| x + y;
        let coeffs: Vec<f64> = mesh
            .interior_nodes
            .iter()
            .map(|&v| g(mesh.vertices[v][0], mesh.vertices[v][1]))
            .collect();
        // exact at an interior vertex
        let v = mesh.interior_nodes[3];
        let p = mesh.vertices[v];
        let got = mesh.eval_p1(&coeffs, p).unwrap();
        assert!((got - g(p[0], p[1])).abs() < 1e-14);
        // zero coefficients evaluate to zero anywhere
        let zeros = vec![0.0; mesh.n_interior()];
        assert_eq!(mesh.eval_p1(&zeros, [0.37, 0.81]).unwrap(), 0.0);
    }

    #[test]
    fn eval_p1_out_of_domain() {
        let mesh = PrimalMesh::uniform_unit_square(4).unwrap();
        let zeros = vec![0.0; mesh.n_interior()];
        assert!(mesh.eval_p1(&zeros, [1.5, 0.5]).is_err());
    }

    #[test]
    fn mesh_file_round_trip() {
        // two triangles over the unit square, one interior-free mesh
        let text = "\
$nodes
1 0.0 0.0 1
2 1.0 0.0 1
3 1.0 1.0 1
4 0.0 1.0 1
$triangles
1 1 2 3
2 1 3 4
";
        let mesh = PrimalMesh::from_text(text).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.triangles.len(), 2);
        assert_eq!(mesh.n_interior(), 0);
        assert!((mesh.total_area() - 1.0).abs() < 1e-14);
        assert!((mesh.h - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn mesh_file_reorients_clockwise_triangles() {
        let text = "\
$nodes
1 0.0 0.0 1
2 1.0 0.0 1
3 0.0 1.0 1
$triangles
1 1 3 2
";
        let mesh = PrimalMesh::from_text(text).unwrap();
        assert!(mesh.triangle_area(0) > 0.0);
    }

    #[test]
    fn mesh_file_bad_input() {
        assert!(PrimalMesh::from_text("$nodes\n1 0 0\n").is_err());
        assert!(PrimalMesh::from_text("junk\n").is_err());
        let missing_tri = "$nodes\n1 0.0 0.0 1\n";
        assert!(PrimalMesh::from_text(missing_tri).is_err());
    }
}
