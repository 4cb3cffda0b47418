//! Moving meshes: time-stamped node coordinates over a fixed connectivity.
//!
//! The geometric and approximation spaces coincide (isoparametric P1/Q1), so
//! mesh nodes are also the degrees of freedom. Periodic meshes store, per
//! cell-local node, the image offset that places the node next to its cell.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use super::element::{ElementKind, ReferenceElement, MAX_LOCAL};
use super::quadrature::QuadratureRule;
use super::{FemError, Mat2, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Left,
    Right,
    Bottom,
    Top,
    /// Boundary node of an imported mesh that is not on a bounding-box side.
    Other,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 5] = [
        BoundaryTag::Left,
        BoundaryTag::Right,
        BoundaryTag::Bottom,
        BoundaryTag::Top,
        BoundaryTag::Other,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Left => "left",
            BoundaryTag::Right => "right",
            BoundaryTag::Bottom => "bottom",
            BoundaryTag::Top => "top",
            BoundaryTag::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// Unit direction tangent to a side of an axis-aligned box.
    pub fn tangent(self) -> Option<Point> {
        match self {
            BoundaryTag::Left | BoundaryTag::Right => Some([0.0, 1.0]),
            BoundaryTag::Bottom | BoundaryTag::Top => Some([1.0, 0.0]),
            BoundaryTag::Other => None,
        }
    }
}

/// Sparse adjacency of the degrees of freedom: `j` is a column of row `i`
/// when the supports of the two shape functions overlap.
#[derive(Debug, Clone)]
pub struct Graph {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    /// Entry index of `(i, i)`.
    pub diag: Vec<usize>,
    /// Entry index of `(j, i)` for entry `(i, j)`.
    pub transpose: Vec<usize>,
    /// Offset of the periodic image of `j` as seen from `i`.
    pub image_offset: Vec<Point>,
    /// For each cell, the `n_local x n_local` entry indices of local pairs.
    pub cell_entries: Vec<usize>,
}

impl Graph {
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// Entry index of `(i, j)`, if the pair is coupled.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row(i);
        self.cols[r.clone()].binary_search(&j).ok().map(|k| r.start + k)
    }
}

#[derive(Debug)]
pub struct Topology {
    kind: ElementKind,
    n_nodes: usize,
    cells: Vec<usize>,
    shifts: Option<Vec<Point>>,
    boundary: Vec<u8>,
    graph: Graph,
}

impl Topology {
    fn new(
        kind: ElementKind,
        n_nodes: usize,
        cells: Vec<usize>,
        shifts: Option<Vec<Point>>,
        boundary: Vec<u8>,
    ) -> Result<Self, FemError> {
        let nf = kind.n_local();
        if cells.len() % nf != 0 {
            return Err(FemError::Topology(format!(
                "connectivity length {} is not a multiple of {nf}",
                cells.len()
            )));
        }
        if let Some(&bad) = cells.iter().find(|&&c| c >= n_nodes) {
            return Err(FemError::Topology(format!("node index {bad} out of range")));
        }
        if boundary.len() != n_nodes {
            return Err(FemError::Topology("boundary tag table has wrong length".into()));
        }
        let graph = build_graph(n_nodes, nf, &cells, shifts.as_deref())?;
        Ok(Self {
            kind,
            n_nodes,
            cells,
            shifts,
            boundary,
            graph,
        })
    }
}

fn build_graph(n_nodes: usize, nf: usize, cells: &[usize], shifts: Option<&[Point]>) -> Result<Graph, FemError> {
    let mut rows: Vec<Vec<(usize, Point)>> = vec![Vec::new(); n_nodes];
    let shift = |k: usize| shifts.map_or([0.0, 0.0], |s| s[k]);
    for (c, nodes) in cells.chunks(nf).enumerate() {
        for a in 0..nf {
            for b in 0..nf {
                let sa = shift(c * nf + a);
                let sb = shift(c * nf + b);
                rows[nodes[a]].push((nodes[b], [sb[0] - sa[0], sb[1] - sa[1]]));
            }
        }
    }
    let mut row_ptr = Vec::with_capacity(n_nodes + 1);
    let mut cols = Vec::new();
    let mut image_offset = Vec::new();
    row_ptr.push(0);
    for (i, row) in rows.iter_mut().enumerate() {
        row.sort_by(|x, y| x.0.cmp(&y.0));
        let mut k = 0;
        while k < row.len() {
            let (j, off) = row[k];
            let mut m = k + 1;
            while m < row.len() && row[m].0 == j {
                let o = row[m].1;
                if (o[0] - off[0]).abs() > 1e-12 || (o[1] - off[1]).abs() > 1e-12 {
                    return Err(FemError::Topology(format!(
                        "pair ({i}, {j}) coupled through two periodic images; refine the periodic direction"
                    )));
                }
                m += 1;
            }
            cols.push(j);
            image_offset.push(off);
            k = m;
        }
        row_ptr.push(cols.len());
    }
    let find = |i: usize, j: usize| -> usize {
        let r = row_ptr[i]..row_ptr[i + 1];
        r.start + cols[r].binary_search(&j).expect("pair present")
    };
    let diag = (0..n_nodes).map(|i| find(i, i)).collect();
    let mut transpose = vec![0; cols.len()];
    for i in 0..n_nodes {
        for k in row_ptr[i]..row_ptr[i + 1] {
            transpose[k] = find(cols[k], i);
        }
    }
    let mut cell_entries = Vec::with_capacity(cells.len() * nf);
    for nodes in cells.chunks(nf) {
        for a in 0..nf {
            for b in 0..nf {
                cell_entries.push(find(nodes[a], nodes[b]));
            }
        }
    }
    Ok(Graph {
        row_ptr,
        cols,
        diag,
        transpose,
        image_offset,
        cell_entries,
    })
}

/// A mesh at one time level.
#[derive(Debug, Clone)]
pub struct Mesh {
    topo: Arc<Topology>,
    coords: Vec<Point>,
    time: f64,
}

impl Mesh {
    pub fn new(
        kind: ElementKind,
        coords: Vec<Point>,
        cells: Vec<usize>,
        boundary: Vec<u8>,
        shifts: Option<Vec<Point>>,
    ) -> Result<Self, FemError> {
        let topo = Topology::new(kind, coords.len(), cells, shifts, boundary)?;
        Ok(Self {
            topo: Arc::new(topo),
            coords,
            time: 0.0,
        })
    }

    pub fn kind(&self) -> ElementKind {
        self.topo.kind
    }

    pub fn dim(&self) -> usize {
        self.topo.kind.dim()
    }

    pub fn n_nodes(&self) -> usize {
        self.topo.n_nodes
    }

    pub fn n_cells(&self) -> usize {
        self.topo.cells.len() / self.topo.kind.n_local()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn graph(&self) -> &Graph {
        &self.topo.graph
    }

    pub fn is_periodic(&self) -> bool {
        self.topo.shifts.is_some()
    }

    pub fn cell_nodes(&self, cell: usize) -> &[usize] {
        let nf = self.topo.kind.n_local();
        &self.topo.cells[cell * nf..(cell + 1) * nf]
    }

    /// Whether two meshes share the same connectivity object.
    pub fn same_topology(&self, other: &Mesh) -> bool {
        Arc::ptr_eq(&self.topo, &other.topo)
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.topo.boundary[node] != 0
    }

    pub fn has_tag(&self, node: usize, tag: BoundaryTag) -> bool {
        self.topo.boundary[node] & tag.bit() != 0
    }

    pub fn tags(&self, node: usize) -> impl Iterator<Item = BoundaryTag> + '_ {
        BoundaryTag::ALL.into_iter().filter(move |t| self.has_tag(node, *t))
    }

    /// Node coordinates of a cell with periodic images applied.
    pub fn cell_points(&self, cell: usize) -> [Point; MAX_LOCAL] {
        let nf = self.topo.kind.n_local();
        let mut out = [[0.0; 2]; MAX_LOCAL];
        for (a, &n) in self.cell_nodes(cell).iter().enumerate() {
            let mut p = self.coords[n];
            if let Some(s) = &self.topo.shifts {
                let o = s[cell * nf + a];
                p[0] += o[0];
                p[1] += o[1];
            }
            out[a] = p;
        }
        out
    }

    /// Same connectivity, new coordinates and time stamp.
    pub fn with_coords(&self, coords: Vec<Point>, time: f64) -> Mesh {
        assert_eq!(coords.len(), self.n_nodes());
        Mesh {
            topo: Arc::clone(&self.topo),
            coords,
            time,
        }
    }

    /// Mesh with nodes moved to `a_i + dt * w_i`, stamped `time + dt`.
    pub fn displaced(&self, w: &[Point], dt: f64) -> Mesh {
        let coords = self
            .coords
            .iter()
            .zip(w)
            .map(|(a, v)| [a[0] + dt * v[0], a[1] + dt * v[1]])
            .collect();
        self.with_coords(coords, self.time + dt)
    }

    /// Evaluates the geometric map of `cell` at reference point `xhat`,
    /// returning the physical point and the Jacobian `dx/dxhat`. In 1D the
    /// Jacobian is embedded as `diag(dx/dxhat, 1)`.
    pub fn geometric_map(&self, cell: usize, xhat: Point) -> (Point, Mat2) {
        let el = ReferenceElement::new(self.kind());
        let pts = self.cell_points(cell);
        map_with(&pts, self.kind(), &el.values(xhat), &el.gradients(xhat))
    }

    /// Total measure of the mesh.
    pub fn volume(&self) -> f64 {
        let quad = QuadratureRule::default_for(self.kind());
        let mut v = 0.0;
        for c in 0..self.n_cells() {
            for (p, w) in quad.points.iter().zip(&quad.weights) {
                let (_, j) = self.geometric_map(c, *p);
                v += w * det2(&j);
            }
        }
        v
    }

    /// Affine position of node `j` as seen from node `i` (periodic image).
    pub fn neighbor_position(&self, entry: usize) -> Point {
        let g = self.graph();
        let j = g.cols[entry];
        let o = g.image_offset[entry];
        [self.coords[j][0] + o[0], self.coords[j][1] + o[1]]
    }

    // --- structured generators ---

    /// Uniform P1 mesh of `[x0, x1]` with `n` cells.
    pub fn interval(x0: f64, x1: f64, n: usize) -> Result<Mesh, FemError> {
        let xs: Vec<f64> = (0..=n).map(|k| x0 + (x1 - x0) * k as f64 / n as f64).collect();
        Self::interval_from_nodes(&xs)
    }

    pub fn interval_from_nodes(xs: &[f64]) -> Result<Mesh, FemError> {
        let n = xs.len() - 1;
        let coords = xs.iter().map(|&x| [x, 0.0]).collect();
        let cells = (0..n).flat_map(|k| [k, k + 1]).collect();
        let mut boundary = vec![0u8; n + 1];
        boundary[0] = BoundaryTag::Left.bit();
        boundary[n] = BoundaryTag::Right.bit();
        Mesh::new(ElementKind::Segment, coords, cells, boundary, None)
    }

    /// Periodic uniform P1 mesh of `[x0, x1)` with `n >= 3` cells.
    pub fn periodic_interval(x0: f64, x1: f64, n: usize) -> Result<Mesh, FemError> {
        if n < 3 {
            return Err(FemError::Topology("periodic interval needs at least 3 cells".into()));
        }
        let len = x1 - x0;
        let coords = (0..n).map(|k| [x0 + len * k as f64 / n as f64, 0.0]).collect();
        let mut cells = Vec::with_capacity(2 * n);
        let mut shifts = Vec::with_capacity(2 * n);
        for k in 0..n {
            cells.push(k);
            cells.push((k + 1) % n);
            shifts.push([0.0, 0.0]);
            shifts.push(if k + 1 == n { [len, 0.0] } else { [0.0, 0.0] });
        }
        Mesh::new(ElementKind::Segment, coords, cells, vec![0; n], Some(shifts))
    }

    /// Tensor-product mesh with the given node abscissae and ordinates.
    /// Triangles split each quadrilateral along its `(0,0)-(1,1)` diagonal.
    pub fn tensor_rectangle(xs: &[f64], ys: &[f64], kind: ElementKind) -> Result<Mesh, FemError> {
        if kind.dim() != 2 {
            return Err(FemError::Topology("tensor rectangle needs a 2D element".into()));
        }
        let (nx, ny) = (xs.len(), ys.len());
        let id = |i: usize, j: usize| j * nx + i;
        let mut coords = Vec::with_capacity(nx * ny);
        let mut boundary = vec![0u8; nx * ny];
        for (j, &y) in ys.iter().enumerate() {
            for (i, &x) in xs.iter().enumerate() {
                coords.push([x, y]);
                let b = &mut boundary[id(i, j)];
                if i == 0 {
                    *b |= BoundaryTag::Left.bit();
                }
                if i == nx - 1 {
                    *b |= BoundaryTag::Right.bit();
                }
                if j == 0 {
                    *b |= BoundaryTag::Bottom.bit();
                }
                if j == ny - 1 {
                    *b |= BoundaryTag::Top.bit();
                }
            }
        }
        let mut cells = Vec::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                match kind {
                    ElementKind::Quadrilateral => cells.extend([a, b, c, d]),
                    _ => cells.extend([a, b, c, a, c, d]),
                }
            }
        }
        Mesh::new(kind, coords, cells, boundary, None)
    }

    pub fn uniform_rectangle(lo: Point, hi: Point, nx: usize, ny: usize, kind: ElementKind) -> Result<Mesh, FemError> {
        let xs: Vec<f64> = (0..=nx)
            .map(|k| lo[0] + (hi[0] - lo[0]) * k as f64 / nx as f64)
            .collect();
        let ys: Vec<f64> = (0..=ny)
            .map(|k| lo[1] + (hi[1] - lo[1]) * k as f64 / ny as f64)
            .collect();
        Self::tensor_rectangle(&xs, &ys, kind)
    }

    /// Doubly periodic uniform mesh of `[lo, hi)` with `nx, ny >= 3` cells.
    pub fn periodic_rectangle(lo: Point, hi: Point, nx: usize, ny: usize, kind: ElementKind) -> Result<Mesh, FemError> {
        if nx < 3 || ny < 3 || kind.dim() != 2 {
            return Err(FemError::Topology(
                "periodic rectangle needs a 2D element and at least 3 cells per direction".into(),
            ));
        }
        let (lx, ly) = (hi[0] - lo[0], hi[1] - lo[1]);
        let id = |i: usize, j: usize| (j % ny) * nx + (i % nx);
        let mut coords = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                coords.push([lo[0] + lx * i as f64 / nx as f64, lo[1] + ly * j as f64 / ny as f64]);
            }
        }
        let shift = |i: usize, j: usize| -> Point { [if i == nx { lx } else { 0.0 }, if j == ny { ly } else { 0.0 }] };
        let mut cells = Vec::new();
        let mut shifts = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let order: &[usize] = match kind {
                    ElementKind::Quadrilateral => &[0, 1, 2, 3],
                    _ => &[0, 1, 2, 0, 2, 3],
                };
                for &k in order {
                    let (ci, cj) = corners[k];
                    cells.push(id(ci, cj));
                    shifts.push(shift(ci, cj));
                }
            }
        }
        Mesh::new(kind, coords, cells, vec![0; nx * ny], Some(shifts))
    }

    // --- plain-text import/export ---

    /// Reads `dim nnodes ncells kind`, then node coordinates, then 1-based
    /// cell connectivity. Boundary nodes are found topologically and tagged
    /// by the bounding-box side they lie on.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Mesh, FemError> {
        let mut tokens = Vec::new();
        for line in reader.lines() {
            let line = line.map_err(|e| FemError::Parse(e.to_string()))?;
            let line = line.split('#').next().unwrap_or("");
            tokens.extend(line.split_whitespace().map(str::to_owned));
        }
        let mut it = tokens.into_iter();
        let mut next = |what: &str| it.next().ok_or_else(|| FemError::Parse(format!("missing {what}")));
        let num = |s: String| -> Result<usize, FemError> {
            s.parse().map_err(|_| FemError::Parse(format!("bad integer {s:?}")))
        };
        let dim = num(next("dim")?)?;
        let nn = num(next("nnodes")?)?;
        let nc = num(next("ncells")?)?;
        let kind: ElementKind = next("kind")?.parse()?;
        if kind.dim() != dim {
            return Err(FemError::Parse(format!("kind {kind} does not match dim {dim}")));
        }
        let mut coords = Vec::with_capacity(nn);
        for _ in 0..nn {
            let mut p = [0.0; 2];
            for v in p.iter_mut().take(dim) {
                let s = next("coordinate")?;
                *v = s
                    .parse()
                    .map_err(|_| FemError::Parse(format!("bad coordinate {s:?}")))?;
            }
            coords.push(p);
        }
        let nf = kind.n_local();
        let mut cells = Vec::with_capacity(nc * nf);
        for _ in 0..nc * nf {
            let v = num(next("cell index")?)?;
            if v == 0 {
                return Err(FemError::Parse("cell indices are 1-based".into()));
            }
            cells.push(v - 1);
        }
        let boundary = detect_boundary(kind, &coords, &cells);
        Mesh::new(kind, coords, cells, boundary, None)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let dim = self.dim();
        writeln!(w, "{} {} {} {}", dim, self.n_nodes(), self.n_cells(), self.kind())?;
        for p in &self.coords {
            let parts: Vec<String> = p[..dim].iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", parts.join(" "))?;
        }
        for c in 0..self.n_cells() {
            let parts: Vec<String> = self.cell_nodes(c).iter().map(|n| (n + 1).to_string()).collect();
            writeln!(w, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}

fn detect_boundary(kind: ElementKind, coords: &[Point], cells: &[usize]) -> Vec<u8> {
    let nf = kind.n_local();
    let mut facets: HashMap<Vec<usize>, usize> = HashMap::new();
    for nodes in cells.chunks(nf) {
        let local: Vec<Vec<usize>> = match kind {
            ElementKind::Segment => vec![vec![nodes[0]], vec![nodes[1]]],
            _ => (0..nf)
                .map(|a| {
                    let mut e = vec![nodes[a], nodes[(a + 1) % nf]];
                    e.sort_unstable();
                    e
                })
                .collect(),
        };
        for f in local {
            *facets.entry(f).or_default() += 1;
        }
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in coords {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let scale = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
    let tol = 1e-10 * scale;
    let mut boundary = vec![0u8; coords.len()];
    for (f, count) in facets {
        if count != 1 {
            continue;
        }
        for n in f {
            let p = coords[n];
            let mut b = 0u8;
            if (p[0] - lo[0]).abs() <= tol {
                b |= BoundaryTag::Left.bit();
            }
            if (p[0] - hi[0]).abs() <= tol {
                b |= BoundaryTag::Right.bit();
            }
            if kind.dim() == 2 {
                if (p[1] - lo[1]).abs() <= tol {
                    b |= BoundaryTag::Bottom.bit();
                }
                if (p[1] - hi[1]).abs() <= tol {
                    b |= BoundaryTag::Top.bit();
                }
            }
            if b == 0 {
                b = BoundaryTag::Other.bit();
            }
            boundary[n] |= b;
        }
    }
    boundary
}

/// Physical point and Jacobian from cell node coordinates and reference
/// shape values/gradients.
#[inline]
pub(crate) fn map_with(
    pts: &[Point; MAX_LOCAL],
    kind: ElementKind,
    values: &[f64; MAX_LOCAL],
    grads: &[Point; MAX_LOCAL],
) -> (Point, Mat2) {
    let mut x = [0.0; 2];
    let mut j = [[0.0; 2]; 2];
    for a in 0..kind.n_local() {
        let p = pts[a];
        let g = grads[a];
        x[0] += values[a] * p[0];
        x[1] += values[a] * p[1];
        j[0][0] += p[0] * g[0];
        j[0][1] += p[0] * g[1];
        j[1][0] += p[1] * g[0];
        j[1][1] += p[1] * g[1];
    }
    if kind.dim() == 1 {
        j[0][1] = 0.0;
        j[1][0] = 0.0;
        j[1][1] = 1.0;
    }
    (x, j)
}

#[inline]
pub fn det2(j: &Mat2) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// Transpose of the inverse of `j`, given its determinant.
#[inline]
pub(crate) fn inv_transpose(j: &Mat2, det: f64) -> Mat2 {
    [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_square_has_scaled_identity_jacobian() {
        let h = 0.3;
        let m = Mesh::tensor_rectangle(&[1.0, 1.0 + h], &[2.0, 2.0 + h], ElementKind::Quadrilateral).unwrap();
        let (x, j) = m.geometric_map(0, [0.5, 0.5]);
        assert!((x[0] - (1.0 + h / 2.0)).abs() < 1e-15);
        assert!((j[0][0] - h).abs() < 1e-15 && (j[1][1] - h).abs() < 1e-15);
        assert!(j[0][1].abs() < 1e-15 && j[1][0].abs() < 1e-15);
    }

    #[test]
    fn identity_placement_gives_identity_map() {
        let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 1, 1, ElementKind::Quadrilateral).unwrap();
        let (x, j) = m.geometric_map(0, [0.25, 0.7]);
        assert_eq!(x, [0.25, 0.7]);
        assert_eq!(j, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn sheared_quad_is_area_preserving() {
        let coords = vec![[0.0, 0.0], [1.0, 0.0], [1.5, 1.0], [0.5, 1.0]];
        let m = Mesh::new(ElementKind::Quadrilateral, coords, vec![0, 1, 2, 3], vec![0; 4], None).unwrap();
        let (_, j) = m.geometric_map(0, [0.5, 0.5]);
        assert!((det2(&j) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn graph_is_symmetric_with_transpose() {
        for kind in [ElementKind::Triangle, ElementKind::Quadrilateral] {
            let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 3, 2, kind).unwrap();
            let g = m.graph();
            for i in 0..m.n_nodes() {
                for k in g.row(i) {
                    let kt = g.transpose[k];
                    assert_eq!(g.cols[kt], i);
                    assert_eq!(g.transpose[kt], k);
                }
            }
            // interior node of a Q1 grid couples with 9 dofs, of the split grid with 7
            let center = m.graph().row(5).len();
            assert_eq!(center, if kind == ElementKind::Quadrilateral { 9 } else { 7 });
        }
    }

    #[test]
    fn periodic_meshes_have_no_boundary_and_tile_the_box() {
        let m = Mesh::periodic_rectangle([0.0, 0.0], [2.0, 1.0], 4, 3, ElementKind::Quadrilateral).unwrap();
        assert!((0..m.n_nodes()).all(|n| !m.is_boundary(n)));
        assert!((m.volume() - 2.0).abs() < 1e-14);
        let p = Mesh::periodic_interval(0.0, 1.0, 5).unwrap();
        assert!((p.volume() - 1.0).abs() < 1e-15);
        assert!(Mesh::periodic_interval(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn text_round_trip_preserves_mesh_and_tags() {
        let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 2, 3, ElementKind::Triangle).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let r = Mesh::read_text(buf.as_slice()).unwrap();
        assert_eq!(r.n_cells(), m.n_cells());
        assert_eq!(r.coords(), m.coords());
        for n in 0..m.n_nodes() {
            assert_eq!(r.tags(n).collect::<Vec<_>>(), m.tags(n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn text_import_rejects_bad_input() {
        assert!(Mesh::read_text("2 3 1 q1\n0 0\n1 0\n0 1\n1 2 3".as_bytes()).is_err());
        assert!(Mesh::read_text("1 2 1 p1-segment\n0\n1\n0 1".as_bytes()).is_err());
        let ok = Mesh::read_text("1 3 2 p1-segment\n0\n0.5\n1\n1 2\n2 3\n".as_bytes()).unwrap();
        assert!(ok.has_tag(0, BoundaryTag::Left) && ok.has_tag(2, BoundaryTag::Right));
        assert!(!ok.is_boundary(1));
    }
}
