//! Linear Lagrange reference elements (P1 segment, P1 triangle, Q1 quadrilateral).

use std::fmt;
use std::str::FromStr;

use super::{FemError, Point};

/// Maximum number of local shape functions over all supported elements.
pub const MAX_LOCAL: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    /// Linear element on the unit segment `[0, 1]`.
    Segment,
    /// Linear element on the unit triangle `(0,0), (1,0), (0,1)`.
    Triangle,
    /// Bilinear element on the unit square, nodes numbered counterclockwise.
    Quadrilateral,
}

impl ElementKind {
    pub fn dim(self) -> usize {
        match self {
            ElementKind::Segment => 1,
            ElementKind::Triangle | ElementKind::Quadrilateral => 2,
        }
    }

    pub fn n_local(self) -> usize {
        match self {
            ElementKind::Segment => 2,
            ElementKind::Triangle => 3,
            ElementKind::Quadrilateral => 4,
        }
    }

    /// Measure of the reference cell.
    pub fn reference_volume(self) -> f64 {
        match self {
            ElementKind::Segment | ElementKind::Quadrilateral => 1.0,
            ElementKind::Triangle => 0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Segment => "p1-segment",
            ElementKind::Triangle => "p1",
            ElementKind::Quadrilateral => "q1",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementKind {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "p1-segment" | "segment" | "p1-1d" => Ok(ElementKind::Segment),
            "p1" | "p1-triangle" | "triangle" => Ok(ElementKind::Triangle),
            "q1" | "q1-quadrilateral" | "quadrilateral" | "quad" => Ok(ElementKind::Quadrilateral),
            other => Err(FemError::UnsupportedElement(other.to_string())),
        }
    }
}

/// Reference element with its Lagrange nodes and shape functions.
///
/// Shape functions are nonnegative on the reference cell and form a
/// partition of unity; gradients therefore sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    kind: ElementKind,
}

impl ReferenceElement {
    pub fn new(kind: ElementKind) -> Self {
        Self { kind }
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn n_shape(&self) -> usize {
        self.kind.n_local()
    }

    /// Reference coordinates of the local Lagrange nodes.
    pub fn nodes(&self) -> &'static [Point] {
        match self.kind {
            ElementKind::Segment => &[[0.0, 0.0], [1.0, 0.0]],
            ElementKind::Triangle => &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            ElementKind::Quadrilateral => &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    pub fn shape_value(&self, i: usize, x: Point) -> f64 {
        self.values(x)[i]
    }

    pub fn shape_gradient(&self, i: usize, x: Point) -> Point {
        self.gradients(x)[i]
    }

    /// All shape values at `x`; entries past `n_shape()` are zero.
    pub fn values(&self, x: Point) -> [f64; MAX_LOCAL] {
        let [s, t] = x;
        match self.kind {
            ElementKind::Segment => [1.0 - s, s, 0.0, 0.0],
            ElementKind::Triangle => [1.0 - s - t, s, t, 0.0],
            ElementKind::Quadrilateral => [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t],
        }
    }

    /// All reference gradients at `x`. In 1D the second component is zero.
    pub fn gradients(&self, x: Point) -> [Point; MAX_LOCAL] {
        let [s, t] = x;
        match self.kind {
            ElementKind::Segment => [[-1.0, 0.0], [1.0, 0.0], [0.0; 2], [0.0; 2]],
            ElementKind::Triangle => [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0], [0.0; 2]],
            ElementKind::Quadrilateral => [[-(1.0 - t), -(1.0 - s)], [1.0 - t, -s], [t, s], [-t, 1.0 - s]],
        }
    }

    /// Whether `x` lies in the closed reference cell (with slack `tol`).
    pub fn contains(&self, x: Point, tol: f64) -> bool {
        let [s, t] = x;
        match self.kind {
            ElementKind::Segment => s >= -tol && s <= 1.0 + tol,
            ElementKind::Triangle => s >= -tol && t >= -tol && s + t <= 1.0 + tol,
            ElementKind::Quadrilateral => s >= -tol && s <= 1.0 + tol && t >= -tol && t <= 1.0 + tol,
        }
    }
}

/// Builds a reference element from its textual kind (`p1-segment`, `p1`, `q1`).
pub fn build_reference_element(kind: &str) -> Result<ReferenceElement, FemError> {
    Ok(ReferenceElement::new(kind.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KINDS: [ElementKind; 3] = [ElementKind::Segment, ElementKind::Triangle, ElementKind::Quadrilateral];

    fn samples(kind: ElementKind) -> Vec<Point> {
        let mut pts = Vec::new();
        for a in 0..=10 {
            for b in 0..=10 {
                let p = [a as f64 / 10.0, b as f64 / 10.0];
                let p = if kind.dim() == 1 { [p[0], 0.0] } else { p };
                if ReferenceElement::new(kind).contains(p, 0.0) {
                    pts.push(p);
                }
            }
        }
        pts
    }

    #[test]
    fn quad_center_values_are_quarter() {
        let el = ReferenceElement::new(ElementKind::Quadrilateral);
        for i in 0..4 {
            assert_eq!(el.shape_value(i, [0.5, 0.5]), 0.25);
        }
    }

    #[test]
    fn triangle_vertex_is_lagrange() {
        let el = ReferenceElement::new(ElementKind::Triangle);
        let v = el.values([0.0, 0.0]);
        assert_eq!(&v[..3], &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn partition_of_unity_and_positivity() {
        for kind in KINDS {
            let el = ReferenceElement::new(kind);
            for x in samples(kind) {
                let v = el.values(x);
                let g = el.gradients(x);
                let sum: f64 = v.iter().sum();
                assert!((sum - 1.0).abs() < 1e-15, "{kind} sum {sum}");
                assert!(v.iter().all(|&s| s >= -1e-15));
                let gs = g.iter().fold([0.0, 0.0], |a, b| [a[0] + b[0], a[1] + b[1]]);
                assert!(gs[0].abs() < 1e-15 && gs[1].abs() < 1e-15);
            }
        }
    }

    #[test]
    fn lagrange_property_at_nodes() {
        for kind in KINDS {
            let el = ReferenceElement::new(kind);
            for (j, &node) in el.nodes().iter().enumerate() {
                for i in 0..el.n_shape() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_eq!(el.shape_value(i, node), expect);
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for kind in KINDS {
            let el = ReferenceElement::new(kind);
            let x = [0.3, if kind.dim() == 2 { 0.2 } else { 0.0 }];
            for i in 0..el.n_shape() {
                let g = el.shape_gradient(i, x);
                for k in 0..kind.dim() {
                    let mut xp = x;
                    let mut xm = x;
                    xp[k] += h;
                    xm[k] -= h;
                    let fd = (el.shape_value(i, xp) - el.shape_value(i, xm)) / (2.0 * h);
                    assert!((fd - g[k]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn unsupported_kind_is_rejected() {
        assert!(matches!(
            build_reference_element("p2"),
            Err(FemError::UnsupportedElement(_))
        ));
        assert_eq!(
            build_reference_element("Q1").unwrap().kind(),
            ElementKind::Quadrilateral
        );
    }
}
