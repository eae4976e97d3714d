//! Oriented triangulations of the unit sphere Sⁿ ⊂ R^{n+1} for n = 1, 2, 3.
//!
//! The base complex is the boundary of the cross-polytope (vertices ±eᵢ,
//! 2^{n+1} facets). Each refinement splits every edge at its midpoint,
//! pushes the midpoint back onto the sphere, and replaces every n-simplex by
//! 2ⁿ children. A simplex is positively oriented when the determinant of the
//! matrix whose rows are its vertex vectors is positive; radial reprojection
//! scales rows by positive factors, so it never flips that sign.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::fields::norm;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("sphere dimension {0} is not supported (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("refinement level {level} exceeds the cap {cap} for S^{n}")]
    LevelCap { n: usize, level: u32, cap: u32 },
}

/// Highest refinement level allowed for Sⁿ.
pub fn max_level(n: usize) -> u32 {
    if n <= 2 {
        6
    } else {
        5
    }
}

#[derive(Debug, Clone)]
pub struct TriangulatedSphere {
    n: usize,
    level: u32,
    /// Flat storage, `n + 1` coordinates per vertex.
    coords: Vec<f64>,
    /// Flat storage, `n + 1` vertex indices per simplex.
    cells: Vec<usize>,
}

impl TriangulatedSphere {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len() / (self.n + 1)
    }

    pub fn simplex_count(&self) -> usize {
        self.cells.len() / (self.n + 1)
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        let k = self.n + 1;
        &self.coords[i * k..(i + 1) * k]
    }

    pub fn simplex(&self, s: usize) -> &[usize] {
        let k = self.n + 1;
        &self.cells[s * k..(s + 1) * k]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.n + 1)
    }

    pub fn simplices(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks_exact(self.n + 1)
    }

    /// Builds a mesh from raw parts without any validation. Used to feed
    /// deliberately broken meshes to [`validate_mesh`].
    pub fn from_parts(n: usize, level: u32, vertices: Vec<Vec<f64>>, simplices: Vec<Vec<usize>>) -> Self {
        Self {
            n,
            level,
            coords: vertices.into_iter().flatten().collect(),
            cells: simplices.into_iter().flatten().collect(),
        }
    }

    /// Determinant of the matrix whose rows are the vertices of simplex `s`.
    pub fn orientation_det(&self, s: usize) -> f64 {
        let rows: Vec<&[f64]> = self.simplex(s).iter().map(|&v| self.vertex(v)).collect();
        det_rows(&rows)
    }

    /// Σ det / (n+1)!, the volume enclosed by the inscribed polytope.
    pub fn signed_volume(&self) -> f64 {
        let fact: f64 = (1..=self.n + 1).map(|k| k as f64).product();
        (0..self.simplex_count())
            .map(|s| self.orientation_det(s))
            .sum::<f64>()
            / fact
    }

    /// Largest chord length over all simplex edges.
    pub fn max_edge_chord(&self) -> f64 {
        let mut best = 0.0f64;
        for cell in self.simplices() {
            for a in 0..cell.len() {
                for b in a + 1..cell.len() {
                    best = best.max(chord(self.vertex(cell[a]), self.vertex(cell[b])));
                }
            }
        }
        best
    }

    /// OFF-format text: vertex coordinates followed by cells.
    pub fn to_off(&self) -> String {
        let mut out = String::new();
        out.push_str("OFF\n");
        let _ = writeln!(out, "{} {} 0", self.vertex_count(), self.simplex_count());
        for v in self.vertices() {
            let line: Vec<String> = v.iter().map(|c| format!("{c:.17}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        for cell in self.simplices() {
            let line: Vec<String> = cell.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "{} {}", cell.len(), line.join(" "));
        }
        out
    }
}

pub(crate) fn chord(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn det_rows(rows: &[&[f64]]) -> f64 {
    let k = rows.len();
    DMatrix::from_fn(k, k, |i, j| rows[i][j]).determinant()
}

fn cross_polytope(n: usize) -> TriangulatedSphere {
    let k = n + 1;
    // vertex 2i is +e_i, vertex 2i+1 is -e_i
    let mut coords = vec![0.0; 2 * k * k];
    for i in 0..k {
        coords[(2 * i) * k + i] = 1.0;
        coords[(2 * i + 1) * k + i] = -1.0;
    }
    let mut cells = Vec::with_capacity(k << k);
    for mask in 0..(1usize << k) {
        let mut cell: Vec<usize> = (0..k).map(|i| 2 * i + ((mask >> i) & 1)).collect();
        // det of the signed unit rows is the product of the signs
        if mask.count_ones() % 2 == 1 {
            cell.swap(0, 1);
        }
        cells.extend(cell);
    }
    TriangulatedSphere { n, level: 0, coords, cells }
}

/// Cross-polytope boundary refined `level` times.
pub fn build_mesh(n: usize, level: u32) -> Result<TriangulatedSphere, MeshError> {
    if !(1..=3).contains(&n) {
        return Err(MeshError::UnsupportedDimension(n));
    }
    let cap = max_level(n);
    if level > cap {
        return Err(MeshError::LevelCap { n, level, cap });
    }
    let mut mesh = cross_polytope(n);
    for _ in 0..level {
        mesh = refine(&mesh)?;
    }
    Ok(mesh)
}

/// Shared, lazily built meshes keyed by `(n, level)`.
pub fn cached_mesh(n: usize, level: u32) -> Result<Arc<TriangulatedSphere>, MeshError> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<TriangulatedSphere>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().expect("mesh cache poisoned").get(&(n, level)) {
        return Ok(Arc::clone(m));
    }
    let mesh = if level == 0 {
        Arc::new(build_mesh(n, 0)?)
    } else {
        let coarser = cached_mesh(n, level - 1)?;
        Arc::new(refine(&coarser)?)
    };
    let mut guard = cache.lock().expect("mesh cache poisoned");
    Ok(Arc::clone(guard.entry((n, level)).or_insert(mesh)))
}

struct Refiner<'a> {
    src: &'a TriangulatedSphere,
    coords: Vec<f64>,
    midpoints: HashMap<(usize, usize), usize>,
}

impl Refiner<'_> {
    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let k = self.src.n + 1;
        let mut mid: Vec<f64> = self
            .src
            .vertex(a)
            .iter()
            .zip(self.src.vertex(b))
            .map(|(x, y)| 0.5 * (x + y))
            .collect();
        let len = norm(&mid);
        mid.iter_mut().for_each(|c| *c /= len);
        let idx = self.coords.len() / k;
        self.coords.extend(mid);
        self.midpoints.insert(key, idx);
        idx
    }

    fn vertex(&self, i: usize) -> &[f64] {
        let k = self.src.n + 1;
        &self.coords[i * k..(i + 1) * k]
    }

    fn push_oriented(&self, cells: &mut Vec<usize>, mut cell: Vec<usize>) {
        let rows: Vec<&[f64]> = cell.iter().map(|&v| self.vertex(v)).collect();
        if det_rows(&rows) < 0.0 {
            cell.swap(0, 1);
        }
        cells.extend(cell);
    }
}

/// One level of edge-midpoint subdivision with radial reprojection.
pub fn refine(mesh: &TriangulatedSphere) -> Result<TriangulatedSphere, MeshError> {
    let n = mesh.n;
    let cap = max_level(n);
    if mesh.level + 1 > cap {
        return Err(MeshError::LevelCap { n, level: mesh.level + 1, cap });
    }
    let mut r = Refiner {
        src: mesh,
        coords: mesh.coords.clone(),
        midpoints: HashMap::new(),
    };
    let mut cells = Vec::with_capacity(mesh.cells.len() << n);
    for s in 0..mesh.simplex_count() {
        let c = mesh.simplex(s).to_vec();
        match n {
            1 => {
                let m = r.midpoint(c[0], c[1]);
                cells.extend([c[0], m, m, c[1]]);
            }
            2 => {
                let (a, b, cc) = (c[0], c[1], c[2]);
                let ab = r.midpoint(a, b);
                let bc = r.midpoint(b, cc);
                let ca = r.midpoint(cc, a);
                cells.extend([a, ab, ca, ab, b, bc, ca, bc, cc, ab, bc, ca]);
            }
            3 => refine_tet(&mut r, &c, &mut cells),
            _ => return Err(MeshError::UnsupportedDimension(n)),
        }
    }
    Ok(TriangulatedSphere {
        n,
        level: mesh.level + 1,
        coords: r.coords,
        cells,
    })
}

/// Four corner tetrahedra plus the inner octahedron split along its
/// shortest diagonal (ties go to the diagonal with the lowest vertex index).
fn refine_tet(r: &mut Refiner<'_>, c: &[usize], cells: &mut Vec<usize>) {
    let (a, b, cc, d) = (c[0], c[1], c[2], c[3]);
    let ab = r.midpoint(a, b);
    let ac = r.midpoint(a, cc);
    let ad = r.midpoint(a, d);
    let bc = r.midpoint(b, cc);
    let bd = r.midpoint(b, d);
    let cd = r.midpoint(cc, d);

    r.push_oriented(cells, vec![a, ab, ac, ad]);
    r.push_oriented(cells, vec![ab, b, bc, bd]);
    r.push_oriented(cells, vec![ac, bc, cc, cd]);
    r.push_oriented(cells, vec![ad, bd, cd, d]);

    // opposite vertex pairs of the octahedron
    let diagonals = [(ab, cd), (ac, bd), (ad, bc)];
    let mut best = 0;
    let mut best_len = f64::INFINITY;
    let mut best_key = usize::MAX;
    for (i, &(p, q)) in diagonals.iter().enumerate() {
        let len = chord(r.vertex(p), r.vertex(q));
        let key = p.min(q);
        let shorter = len < best_len - 1e-12;
        let tie = (len - best_len).abs() <= 1e-12 && key < best_key;
        if shorter || tie {
            best = i;
            best_len = len;
            best_key = key;
        }
    }
    let (p, q) = diagonals[best];
    let (r1, r2) = diagonals[(best + 1) % 3];
    let (s1, s2) = diagonals[(best + 2) % 3];
    // equator cycle r1, s1, r2, s2 around the diagonal
    for (u, v) in [(r1, s1), (s1, r2), (r2, s2), (s2, r1)] {
        r.push_oriented(cells, vec![p, q, u, v]);
    }
}

/// Problems found by [`validate_mesh`]. Empty on a valid mesh.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MeshReport {
    /// Simplices whose orientation determinant is not positive.
    pub orientation_violations: Vec<usize>,
    /// (n−1)-faces (sorted vertex tuples) not shared by exactly two simplices.
    pub non_manifold_faces: Vec<Vec<usize>>,
    /// Vertices whose norm differs from 1 by more than 1e−12.
    pub off_sphere_vertices: Vec<usize>,
    /// Vertex pairs closer than 1e−9.
    pub duplicate_vertices: Vec<(usize, usize)>,
}

impl MeshReport {
    pub fn is_valid(&self) -> bool {
        self.orientation_violations.is_empty()
            && self.non_manifold_faces.is_empty()
            && self.off_sphere_vertices.is_empty()
            && self.duplicate_vertices.is_empty()
    }
}

pub fn validate_mesh(mesh: &TriangulatedSphere) -> MeshReport {
    let mut report = MeshReport::default();
    for s in 0..mesh.simplex_count() {
        if mesh.orientation_det(s) <= 0.0 {
            report.orientation_violations.push(s);
        }
    }

    let mut faces: HashMap<Vec<usize>, usize> = HashMap::new();
    for cell in mesh.simplices() {
        for skip in 0..cell.len() {
            let mut face: Vec<usize> = cell
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect();
            face.sort_unstable();
            *faces.entry(face).or_default() += 1;
        }
    }
    let mut bad: Vec<Vec<usize>> = faces.into_iter().filter(|(_, c)| *c != 2).map(|(f, _)| f).collect();
    bad.sort();
    report.non_manifold_faces = bad;

    for (i, v) in mesh.vertices().enumerate() {
        if (norm(v) - 1.0).abs() > 1e-12 {
            report.off_sphere_vertices.push(i);
        }
    }

    // spatial hash with cells larger than the duplicate radius
    const TOL: f64 = 1e-9;
    const CELL: f64 = 1e-6;
    let key = |v: &[f64]| -> Vec<i64> { v.iter().map(|c| (c / CELL).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, v) in mesh.vertices().enumerate() {
        grid.entry(key(v)).or_default().push(i);
    }
    let k = mesh.ambient_dim();
    let offsets = 3usize.pow(k as u32);
    for (i, v) in mesh.vertices().enumerate() {
        let base = key(v);
        for o in 0..offsets {
            let mut probe = base.clone();
            let mut rest = o;
            for c in probe.iter_mut() {
                *c += (rest % 3) as i64 - 1;
                rest /= 3;
            }
            if let Some(bucket) = grid.get(&probe) {
                for &j in bucket {
                    if j > i && chord(v, mesh.vertex(j)) < TOL {
                        report.duplicate_vertices.push((i, j));
                    }
                }
            }
        }
    }
    report
}
