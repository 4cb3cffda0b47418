//! Spatial quadrature on reference cells and temporal rules on `[0, 1]`.

use super::element::ElementKind;
use super::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Rule used for stencil assembly: 2-point Gauss on segments, the
    /// 3-point degree-2 rule on triangles, 2x2 Gauss on quadrilaterals.
    pub fn default_for(kind: ElementKind) -> Self {
        match kind {
            ElementKind::Segment | ElementKind::Quadrilateral => Self::gauss(kind, 2),
            ElementKind::Triangle => {
                let w = 1.0 / 6.0;
                Self {
                    points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
                    weights: vec![w, w, w],
                }
            }
        }
    }

    /// Tensor Gauss-Legendre rule with `n` points per direction. Triangles
    /// use the collapsed (Duffy) square.
    pub fn gauss(kind: ElementKind, n: usize) -> Self {
        let (x1, w1) = gauss_legendre_unit(n);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match kind {
            ElementKind::Segment => {
                for (x, w) in x1.iter().zip(&w1) {
                    points.push([*x, 0.0]);
                    weights.push(*w);
                }
            }
            ElementKind::Quadrilateral => {
                for (y, wy) in x1.iter().zip(&w1) {
                    for (x, wx) in x1.iter().zip(&w1) {
                        points.push([*x, *y]);
                        weights.push(wx * wy);
                    }
                }
            }
            ElementKind::Triangle => {
                for (u, wu) in x1.iter().zip(&w1) {
                    for (v, wv) in x1.iter().zip(&w1) {
                        points.push([*u, *v * (1.0 - *u)]);
                        weights.push(wu * wv * (1.0 - *u));
                    }
                }
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one Gauss point");
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for k in 0..n {
        // Newton on P_n starting from the Chebyshev-like guess.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[n - 1 - k] = 0.5 * (x + 1.0);
        ws[n - 1 - k] = 0.5 * w;
    }
    (xs, ws)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Temporal quadrature `(zeta_l, omega_l)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TemporalRule {
    /// Midpoint rule, exact for polynomials of degree at most one.
    pub fn midpoint() -> Self {
        Self {
            nodes: vec![0.5],
            weights: vec![1.0],
        }
    }

    pub fn gauss(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre_unit(n);
        Self { nodes, weights }
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(rule: &QuadratureRule, f: impl Fn(Point) -> f64) -> f64 {
        rule.points.iter().zip(&rule.weights).map(|(p, w)| w * f(*p)).sum()
    }

    #[test]
    fn weights_sum_to_reference_volume() {
        for kind in [ElementKind::Segment, ElementKind::Triangle, ElementKind::Quadrilateral] {
            let r = QuadratureRule::default_for(kind);
            let s: f64 = r.weights.iter().sum();
            assert!((s - kind.reference_volume()).abs() < 1e-15);
            let g = QuadratureRule::gauss(kind, 4);
            let s: f64 = g.weights.iter().sum();
            assert!((s - kind.reference_volume()).abs() < 1e-14);
        }
    }

    #[test]
    fn default_rules_reach_their_degree() {
        // 2x2 Gauss integrates x^3 y^3 exactly: 1/16.
        let q = QuadratureRule::default_for(ElementKind::Quadrilateral);
        let v = integrate(&q, |[x, y]| x.powi(3) * y.powi(3));
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
        // Triangle rule integrates x^2 exactly: 1/12; and xy: 1/24.
        let t = QuadratureRule::default_for(ElementKind::Triangle);
        assert!((integrate(&t, |[x, _]| x * x) - 1.0 / 12.0).abs() < 1e-15);
        assert!((integrate(&t, |[x, y]| x * y) - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_high_degree() {
        let (x, w) = gauss_legendre_unit(5);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert!((v - 0.1).abs() < 1e-14);
        let tri = QuadratureRule::gauss(ElementKind::Triangle, 4);
        // int over triangle of x^2 y^2 = 2!2!/6! = 4/720
        assert!((integrate(&tri, |[x, y]| x * x * y * y) - 4.0 / 720.0).abs() < 1e-15);
    }

    #[test]
    fn midpoint_is_exact_for_linears() {
        let r = TemporalRule::midpoint();
        let v: f64 = r.nodes.iter().zip(&r.weights).map(|(z, w)| w * (3.0 * z + 1.0)).sum();
        assert_eq!(v, 2.5);
        assert_eq!(r.exact_degree(), 1);
    }
}
