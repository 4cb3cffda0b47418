//! Per-time-level stencil quantities: `c_ij = ∫ ψ_i ∇ψ_j`, lumped masses,
//! local mesh sizes and the mesh structure parameter κ.

use super::element::{ElementKind, ReferenceElement, MAX_LOCAL};
use super::mesh::{det2, inv_transpose, map_with, Mesh};
use super::quadrature::{QuadratureRule, TemporalRule};
use super::{FemError, Point};

#[derive(Debug, Clone)]
pub struct StencilField {
    /// One vector per graph entry of the mesh adjacency.
    pub c: Vec<Point>,
    /// Lumped masses `∫ ψ_i` (time-averaged for temporal stencils).
    pub mass: Vec<f64>,
    pub h_min: Vec<f64>,
    pub kappa: Vec<f64>,
    /// Largest `|c_ij + c_ji|` over interior pairs before symmetrization.
    pub antisymmetry_defect: f64,
}

impl StencilField {
    pub fn norm(&self, entry: usize) -> f64 {
        let c = self.c[entry];
        (c[0] * c[0] + c[1] * c[1]).sqrt()
    }

    /// `max_i ‖Σ_j c_ij‖`.
    pub fn row_sum_defect(&self, mesh: &Mesh) -> f64 {
        let g = mesh.graph();
        (0..g.n_rows())
            .map(|i| {
                let s = g
                    .row(i)
                    .fold([0.0, 0.0], |a, k| [a[0] + self.c[k][0], a[1] + self.c[k][1]]);
                s[0].hypot(s[1])
            })
            .fold(0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.c.len()).map(|k| self.norm(k)).fold(0.0, f64::max)
    }
}

struct CellEval {
    weights: [f64; 16],
    values: [[f64; MAX_LOCAL]; 16],
    grads: [[Point; MAX_LOCAL]; 16],
    n: usize,
}

/// Physical shape values, gradients and `w_q det J` at the quadrature
/// points of one cell.
fn eval_cell(
    mesh: &Mesh,
    cell: usize,
    quad: &QuadratureRule,
    ref_vals: &[[f64; MAX_LOCAL]],
    ref_grads: &[[Point; MAX_LOCAL]],
) -> Result<CellEval, FemError> {
    let kind = mesh.kind();
    let nf = kind.n_local();
    let pts = mesh.cell_points(cell);
    assert!(quad.len() <= 16, "quadrature rule too large for cell evaluation");
    let mut out = CellEval {
        weights: [0.0; 16],
        values: [[0.0; MAX_LOCAL]; 16],
        grads: [[[0.0; 2]; MAX_LOCAL]; 16],
        n: quad.len(),
    };
    for q in 0..quad.len() {
        let (_, j) = map_with(&pts, kind, &ref_vals[q], &ref_grads[q]);
        let det = det2(&j);
        if !(det > 0.0) {
            return Err(FemError::InvalidMesh { cell, det });
        }
        let jit = inv_transpose(&j, det);
        out.weights[q] = quad.weights[q] * det;
        out.values[q] = ref_vals[q];
        for a in 0..nf {
            let g = ref_grads[q][a];
            out.grads[q][a] = [jit[0][0] * g[0] + jit[0][1] * g[1], jit[1][0] * g[0] + jit[1][1] * g[1]];
        }
    }
    Ok(out)
}

struct Tabulated {
    vals: Vec<[f64; MAX_LOCAL]>,
    grads: Vec<[Point; MAX_LOCAL]>,
}

fn tabulate(kind: ElementKind, quad: &QuadratureRule) -> Tabulated {
    let el = ReferenceElement::new(kind);
    Tabulated {
        vals: quad.points.iter().map(|&p| el.values(p)).collect(),
        grads: quad.points.iter().map(|&p| el.gradients(p)).collect(),
    }
}

struct Raw {
    c: Vec<Point>,
    mass: Vec<f64>,
    gmax: Vec<f64>,
    kappa_num: Vec<f64>,
}

fn assemble_raw(mesh: &Mesh, quad: &QuadratureRule) -> Result<Raw, FemError> {
    let g = mesh.graph();
    let nf = mesh.kind().n_local();
    let tab = tabulate(mesh.kind(), quad);
    let mut raw = Raw {
        c: vec![[0.0; 2]; g.nnz()],
        mass: vec![0.0; mesh.n_nodes()],
        gmax: vec![0.0; g.nnz()],
        kappa_num: vec![0.0; mesh.n_nodes()],
    };
    for cell in 0..mesh.n_cells() {
        let ev = eval_cell(mesh, cell, quad, &tab.vals, &tab.grads)?;
        let nodes = mesh.cell_nodes(cell);
        let entries = &g.cell_entries[cell * nf * nf..(cell + 1) * nf * nf];
        let mut cell_int = [0.0; MAX_LOCAL];
        let mut gmax = [0.0_f64; MAX_LOCAL];
        for q in 0..ev.n {
            let w = ev.weights[q];
            for b in 0..nf {
                let gb = ev.grads[q][b];
                gmax[b] = gmax[b].max(gb[0] * gb[0] + gb[1] * gb[1]);
            }
            for a in 0..nf {
                let wa = w * ev.values[q][a];
                cell_int[a] += wa;
                for b in 0..nf {
                    let e = entries[a * nf + b];
                    let gb = ev.grads[q][b];
                    raw.c[e][0] += wa * gb[0];
                    raw.c[e][1] += wa * gb[1];
                }
            }
        }
        for a in 0..nf {
            for b in 0..nf {
                let e = entries[a * nf + b];
                raw.gmax[e] = raw.gmax[e].max(gmax[b].sqrt());
            }
        }
        for a in 0..nf {
            raw.mass[nodes[a]] += cell_int[a];
            let others = (0..nf).filter(|&b| nodes[b] != nodes[a]).count();
            raw.kappa_num[nodes[a]] += others as f64 * cell_int[a];
        }
    }
    Ok(raw)
}

/// Enforces `c_ij = -c_ji` on interior pairs and restores zero row sums on
/// interior rows through the diagonal. Returns the pre-symmetrization defect.
fn symmetrize(mesh: &Mesh, c: &mut [Point]) -> f64 {
    let g = mesh.graph();
    let mut defect: f64 = 0.0;
    for i in 0..mesh.n_nodes() {
        if mesh.is_boundary(i) {
            continue;
        }
        for k in g.row(i) {
            let j = g.cols[k];
            if j <= i || mesh.is_boundary(j) {
                continue;
            }
            let kt = g.transpose[k];
            let s = [c[k][0] + c[kt][0], c[k][1] + c[kt][1]];
            defect = defect.max(s[0].hypot(s[1]));
            let v = [(c[k][0] - c[kt][0]) / 2.0, (c[k][1] - c[kt][1]) / 2.0];
            c[k] = v;
            c[kt] = [-v[0], -v[1]];
        }
    }
    for i in 0..mesh.n_nodes() {
        if mesh.is_boundary(i) {
            continue;
        }
        let d = g.diag[i];
        let mut s = [0.0, 0.0];
        for k in g.row(i) {
            if k != d {
                s[0] += c[k][0];
                s[1] += c[k][1];
            }
        }
        c[d] = [-s[0], -s[1]];
    }
    defect
}

fn h_min_from(mesh: &Mesh, gmax: &[f64]) -> Vec<f64> {
    let g = mesh.graph();
    (0..mesh.n_nodes())
        .map(|i| {
            g.row(i)
                .map(|k| if gmax[k] > 0.0 { 1.0 / gmax[k] } else { f64::INFINITY })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn check_masses(mass: &[f64]) -> Result<(), FemError> {
    match mass.iter().position(|&m| !(m > 0.0)) {
        Some(i) => Err(FemError::ZeroMass(i)),
        None => Ok(()),
    }
}

pub fn assemble_stencil(mesh: &Mesh, quad: &QuadratureRule) -> Result<StencilField, FemError> {
    let mut raw = assemble_raw(mesh, quad)?;
    check_masses(&raw.mass)?;
    let defect = symmetrize(mesh, &mut raw.c);
    let h_min = h_min_from(mesh, &raw.gmax);
    let kappa = raw.kappa_num.iter().zip(&raw.mass).map(|(k, m)| k / m).collect();
    Ok(StencilField {
        c: raw.c,
        mass: raw.mass,
        h_min,
        kappa,
        antisymmetry_defect: defect,
    })
}

/// Time-averaged stencil over the meshes `a + dt ζ_l W`.
pub fn temporal_stencil(
    mesh: &Mesh,
    w: &[Point],
    dt: f64,
    quad: &QuadratureRule,
    rule: &TemporalRule,
) -> Result<StencilField, FemError> {
    let n = mesh.n_nodes();
    let nnz = mesh.graph().nnz();
    let mut c = vec![[0.0; 2]; nnz];
    let mut mass = vec![0.0; n];
    let mut kappa_num = vec![0.0; n];
    let mut h_min = vec![f64::INFINITY; n];
    for (&zeta, &omega) in rule.nodes.iter().zip(&rule.weights) {
        let m = mesh.displaced(w, zeta * dt);
        let raw = match assemble_raw(&m, quad) {
            Ok(r) => r,
            Err(FemError::InvalidMesh { .. }) => {
                let cells = cell_min_dets(&m)
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d <= 0.0)
                    .map(|(k, _)| k)
                    .collect();
                return Err(FemError::Inverted { zeta, cells });
            }
            Err(e) => return Err(e),
        };
        for k in 0..nnz {
            c[k][0] += omega * raw.c[k][0];
            c[k][1] += omega * raw.c[k][1];
        }
        for i in 0..n {
            mass[i] += omega * raw.mass[i];
            kappa_num[i] += omega * raw.kappa_num[i];
        }
        for (h, hl) in h_min.iter_mut().zip(h_min_from(&m, &raw.gmax)) {
            *h = h.min(hl);
        }
    }
    check_masses(&mass)?;
    let defect = symmetrize(mesh, &mut c);
    let kappa = kappa_num.iter().zip(&mass).map(|(k, m)| k / m).collect();
    Ok(StencilField {
        c,
        mass,
        h_min,
        kappa,
        antisymmetry_defect: defect,
    })
}

/// `m_i = ∫ ψ_i` on the current mesh.
pub fn exact_masses(mesh: &Mesh) -> Result<Vec<f64>, FemError> {
    let quad = QuadratureRule::default_for(mesh.kind());
    let tab = tabulate(mesh.kind(), &quad);
    let nf = mesh.kind().n_local();
    let mut mass = vec![0.0; mesh.n_nodes()];
    for cell in 0..mesh.n_cells() {
        let ev = eval_cell(mesh, cell, &quad, &tab.vals, &tab.grads)?;
        let nodes = mesh.cell_nodes(cell);
        for q in 0..ev.n {
            for a in 0..nf {
                mass[nodes[a]] += ev.weights[q] * ev.values[q][a];
            }
        }
    }
    check_masses(&mass)?;
    Ok(mass)
}

/// Smallest Jacobian determinant of a cell, sampled at the default
/// quadrature points and at the reference vertices. For P1 and Q1 maps
/// det J is affine in each reference variable, so the vertex values bound it.
pub fn cell_min_det(mesh: &Mesh, cell: usize) -> f64 {
    let tab = det_points(mesh.kind());
    min_det_with(mesh, cell, &tab)
}

/// [`cell_min_det`] for every cell.
pub fn cell_min_dets(mesh: &Mesh) -> Vec<f64> {
    let tab = det_points(mesh.kind());
    (0..mesh.n_cells()).map(|c| min_det_with(mesh, c, &tab)).collect()
}

/// Reference nodes followed by the default quadrature points.
fn det_points(kind: ElementKind) -> Tabulated {
    let el = ReferenceElement::new(kind);
    let quad = QuadratureRule::default_for(kind);
    let pts: Vec<Point> = el.nodes().iter().chain(&quad.points).copied().collect();
    Tabulated {
        vals: pts.iter().map(|&p| el.values(p)).collect(),
        grads: pts.iter().map(|&p| el.gradients(p)).collect(),
    }
}

fn min_det_with(mesh: &Mesh, cell: usize, tab: &Tabulated) -> f64 {
    let pts = mesh.cell_points(cell);
    tab.vals
        .iter()
        .zip(&tab.grads)
        .map(|(v, g)| det2(&map_with(&pts, mesh.kind(), v, g).1))
        .fold(f64::INFINITY, f64::min)
}

/// Max over cells and quadrature points of the forward-difference
/// `d/dt det J` minus `(div v) det J`, with `v` the isoparametric
/// interpolant of `w`.
pub fn liouville_residual(mesh: &Mesh, w: &[Point], dt_probe: f64) -> Result<f64, FemError> {
    let quad = QuadratureRule::default_for(mesh.kind());
    let tab = tabulate(mesh.kind(), &quad);
    let moved = mesh.displaced(w, dt_probe);
    let nf = mesh.kind().n_local();
    let mut res: f64 = 0.0;
    for cell in 0..mesh.n_cells() {
        let p0 = mesh.cell_points(cell);
        let p1 = moved.cell_points(cell);
        let nodes = mesh.cell_nodes(cell);
        for q in 0..quad.len() {
            let (_, j0) = map_with(&p0, mesh.kind(), &tab.vals[q], &tab.grads[q]);
            let (_, j1) = map_with(&p1, mesh.kind(), &tab.vals[q], &tab.grads[q]);
            let (d0, d1) = (det2(&j0), det2(&j1));
            if !(d0 > 0.0) {
                return Err(FemError::InvalidMesh { cell, det: d0 });
            }
            if !(d1 > 0.0) {
                return Err(FemError::Inverted {
                    zeta: 1.0,
                    cells: vec![cell],
                });
            }
            let jit = inv_transpose(&j0, d0);
            let mut div = 0.0;
            for a in 0..nf {
                let g = tab.grads[q][a];
                let gx = [jit[0][0] * g[0] + jit[0][1] * g[1], jit[1][0] * g[0] + jit[1][1] * g[1]];
                let v = w[nodes[a]];
                div += v[0] * gx[0] + if mesh.dim() == 2 { v[1] * gx[1] } else { 0.0 };
            }
            res = res.max(((d1 - d0) / dt_probe - div * d0).abs());
        }
    }
    Ok(res)
}

/// Relative defect of the discrete GCL identity
/// `m_i(t+dt) - m_i(t) = dt Σ_l ω_l Σ_j W_j · c_ij(t_l)`.
pub fn gcl_defect(mesh: &Mesh, w: &[Point], dt: f64, rule: &TemporalRule) -> Result<f64, FemError> {
    let quad = QuadratureRule::default_for(mesh.kind());
    let st = temporal_stencil(mesh, w, dt, &quad, rule)?;
    let m0 = exact_masses(mesh)?;
    let m1 = exact_masses(&mesh.displaced(w, dt))?;
    let g = mesh.graph();
    let scale = m0.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mut defect: f64 = 0.0;
    for i in 0..mesh.n_nodes() {
        let flux: f64 = g
            .row(i)
            .map(|k| {
                let wj = w[g.cols[k]];
                wj[0] * st.c[k][0] + wj[1] * st.c[k][1]
            })
            .sum();
        defect = defect.max((m1[i] - m0[i] - dt * flux).abs());
    }
    Ok(defect / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::element::ElementKind;

    fn default(mesh: &Mesh) -> StencilField {
        assemble_stencil(mesh, &QuadratureRule::default_for(mesh.kind())).unwrap()
    }

    fn entry(mesh: &Mesh, i: usize, j: usize) -> usize {
        mesh.graph().find(i, j).unwrap()
    }

    #[test]
    fn one_dimensional_hat_functions() {
        let h = 0.25;
        let m = Mesh::interval(0.0, 1.0, 4).unwrap();
        let s = default(&m);
        let i = 2;
        assert!((s.mass[i] - h).abs() < 1e-15);
        assert!((s.c[entry(&m, i, 3)][0] - 0.5).abs() < 1e-15);
        assert!((s.c[entry(&m, i, 1)][0] + 0.5).abs() < 1e-15);
        assert!(s.c[entry(&m, i, 2)][0].abs() < 1e-15);
        assert!((s.h_min[i] - h).abs() < 1e-15);
        assert!((s.kappa[i] - 1.0).abs() < 1e-15);
        let ex = exact_masses(&m).unwrap();
        assert!((ex[0] - h / 2.0).abs() < 1e-15 && (ex[4] - h / 2.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_q1_east_neighbor() {
        // Tensor-product oracle: c_ij,x = (∫ φ_0 φ_1')(∫ φ φ over two cells) =
        // (1/2)(2h/3) = h/3, c_ij,y = (∫φ_0φ_1)(∫ φ_0 φ_0' over both cells) = 0.
        let h = 0.2;
        let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 5, 5, ElementKind::Quadrilateral).unwrap();
        let s = default(&m);
        let i = 6 * 2 + 2;
        let c = s.c[entry(&m, i, i + 1)];
        assert!((c[0] - h / 3.0).abs() < 1e-15);
        assert!(c[1].abs() < 1e-15);
        // diagonal neighbor: (1/2)(h/6) per direction
        let c = s.c[entry(&m, i, i + 7)];
        assert!((c[0] - h / 12.0).abs() < 1e-15 && (c[1] - h / 12.0).abs() < 1e-15);
        assert!((s.mass[i] - h * h).abs() < 1e-15);
        assert!((s.kappa[i] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn stencil_invariants_on_perturbed_meshes() {
        for kind in [ElementKind::Triangle, ElementKind::Quadrilateral] {
            let m0 = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 6, 5, kind).unwrap();
            let coords = m0
                .coords()
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    if m0.is_boundary(k) {
                        *p
                    } else {
                        [
                            p[0] + 0.03 * (7.0 * k as f64).sin(),
                            p[1] + 0.03 * (3.0 * k as f64).cos(),
                        ]
                    }
                })
                .collect();
            let m = m0.with_coords(coords, 0.0);
            let s = default(&m);
            assert!(s.row_sum_defect(&m) <= 1e-13 * s.max_norm());
            assert!(s.antisymmetry_defect < 1e-15);
            assert!(s.mass.iter().all(|&x| x > 0.0));
            let total: f64 = s.mass.iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
            for i in 0..m.n_nodes() {
                assert!(s.kappa[i] <= (m.graph().row(i).len() - 1) as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn temporal_stencil_stationary_and_translation() {
        let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 4, 4, ElementKind::Quadrilateral).unwrap();
        let quad = QuadratureRule::default_for(m.kind());
        let s = default(&m);
        let zero = vec![[0.0; 2]; m.n_nodes()];
        let t = temporal_stencil(&m, &zero, 0.1, &quad, &TemporalRule::midpoint()).unwrap();
        assert_eq!(s.c, t.c);
        let shift = vec![[0.3, -0.7]; m.n_nodes()];
        let t = temporal_stencil(&m, &shift, 0.1, &quad, &TemporalRule::midpoint()).unwrap();
        for (a, b) in s.c.iter().zip(&t.c) {
            assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn temporal_stencil_two_cell_midpoint() {
        // nodes 0, h, 2h; middle node moves right by dt/2 = h/8 at the midpoint.
        let h = 1.0;
        let m = Mesh::interval(0.0, 2.0 * h, 2).unwrap();
        let w = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]];
        let quad = QuadratureRule::default_for(m.kind());
        let t = temporal_stencil(&m, &w, h / 4.0, &quad, &TemporalRule::midpoint()).unwrap();
        // c_{1,0} = -1/2 and c_{1,2} = 1/2 regardless of lengths in 1D;
        // boundary row: c_{0,1} = ∫ ψ_0 ψ_1' = 1/2.
        assert!((t.c[entry(&m, 1, 0)][0] + 0.5).abs() < 1e-15);
        assert!((t.c[entry(&m, 0, 1)][0] - 0.5).abs() < 1e-15);
        assert!((t.mass[1] - h).abs() < 1e-15);
        assert!((t.mass[0] - (h + h / 8.0) / 2.0).abs() < 1e-15);
        assert!((t.h_min[1] - (h - h / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn inverted_intermediate_mesh_names_zeta() {
        let m = Mesh::interval(0.0, 2.0, 2).unwrap();
        let w = vec![[0.0, 0.0], [-1.0, 0.0], [0.0, 0.0]];
        let quad = QuadratureRule::default_for(m.kind());
        let err = temporal_stencil(&m, &w, 3.0, &quad, &TemporalRule::midpoint()).unwrap_err();
        assert_eq!(
            err,
            FemError::Inverted {
                zeta: 0.5,
                cells: vec![0]
            }
        );
    }

    #[test]
    fn liouville_residual_cases() {
        let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 3, 3, ElementKind::Quadrilateral).unwrap();
        let zero = vec![[0.0; 2]; m.n_nodes()];
        assert_eq!(liouville_residual(&m, &zero, 1e-3).unwrap(), 0.0);
        let tr = vec![[1.0, 2.0]; m.n_nodes()];
        assert!(liouville_residual(&m, &tr, 1e-3).unwrap() < 1e-12);
        let line = Mesh::interval(0.0, 1.0, 1).unwrap();
        let w: Vec<Point> = line.coords().to_vec();
        for dt in [1e-2, 1e-3] {
            assert!(liouville_residual(&line, &w, dt).unwrap() <= 10.0 * dt);
        }
    }

    #[test]
    fn gcl_identity_holds_with_midpoint_rule() {
        for kind in [ElementKind::Triangle, ElementKind::Quadrilateral] {
            let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 4, 3, kind).unwrap();
            let w: Vec<Point> = m
                .coords()
                .iter()
                .map(|p| [(3.0 * p[1]).sin(), p[0] * p[0] - p[1]])
                .collect();
            assert!(gcl_defect(&m, &w, 0.05, &TemporalRule::midpoint()).unwrap() < 1e-13);
        }
    }
}
