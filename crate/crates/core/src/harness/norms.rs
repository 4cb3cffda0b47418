use crate::fem::{det2, Mesh, Point, QuadratureRule, ReferenceElement};
use crate::systems::Conserved;

/// Value of component `k` of the finite-element field at reference point
/// `xhat` of `cell`.
pub fn field_value(mesh: &Mesh, el: &ReferenceElement, u: &[Conserved], k: usize, cell: usize, xhat: Point) -> f64 {
    let v = el.values(xhat);
    mesh.cell_nodes(cell)
        .iter()
        .enumerate()
        .map(|(a, &n)| v[a] * u[n][k])
        .sum()
}

/// `(‖u_h - u‖_{L¹}, ‖u_h - u‖_{L²})` for component `k`, by Gauss
/// quadrature with `n` points per direction on the current mesh.
pub fn error_norms(mesh: &Mesh, u: &[Conserved], k: usize, n: usize, exact: impl Fn(Point) -> f64) -> (f64, f64) {
    let el = ReferenceElement::new(mesh.kind());
    let quad = QuadratureRule::gauss(mesh.kind(), n);
    let (mut l1, mut l2) = (0.0, 0.0);
    for cell in 0..mesh.n_cells() {
        for (xq, wq) in quad.points.iter().zip(&quad.weights) {
            let (x, j) = mesh.geometric_map(cell, *xq);
            let det = det2(&j);
            let e = field_value(mesh, &el, u, k, cell, *xq) - exact(x);
            l1 += wq * det * e.abs();
            l2 += wq * det * e * e;
        }
    }
    (l1, l2.sqrt())
}

/// Observed order `log(e_prev/e) / log(h_prev/h)`.
pub fn rate(e_prev: f64, e: f64, h_prev: f64, h: f64) -> f64 {
    (e_prev / e).ln() / (h_prev / h).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::ElementKind;
    use crate::systems::scalar;

    #[test]
    fn exact_interpolant_has_zero_error() {
        for kind in [ElementKind::Triangle, ElementKind::Quadrilateral] {
            let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 2.0], 3, 5, kind).unwrap();
            let u: Vec<_> = m.coords().iter().map(|p| scalar(2.0 * p[0] - p[1])).collect();
            let (a, b) = error_norms(&m, &u, 0, 3, |p| 2.0 * p[0] - p[1]);
            assert!(a < 1e-14 && b < 1e-14);
        }
    }

    #[test]
    fn constant_offset_and_cauchy_schwarz() {
        let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 4, 4, ElementKind::Quadrilateral).unwrap();
        let u = vec![scalar(0.25); m.n_nodes()];
        let (a, b) = error_norms(&m, &u, 0, 2, |_| 0.0);
        assert!((a - 0.25).abs() < 1e-14 && (b - 0.25).abs() < 1e-14);
        let m = Mesh::uniform_rectangle([0.0, 0.0], [2.0, 1.0], 4, 4, ElementKind::Triangle).unwrap();
        let u: Vec<_> = m.coords().iter().map(|p| scalar(p[0] * p[1])).collect();
        let (a, b) = error_norms(&m, &u, 0, 4, |p| (3.0 * p[0]).sin());
        assert!(a <= 2f64.sqrt() * b);
    }

    #[test]
    fn rate_formula() {
        assert_eq!(rate(1.0, 1.0, 0.1, 0.05), 0.0);
        assert!((rate(1.0, 0.5, 0.1, 0.05) - 1.0).abs() < 1e-15);
    }
}
