//! Scalar conservation laws: linear transport, 2D Burgers and KPP.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::{Conserved, EntropyKind, Flux, HyperbolicSystem};
use crate::fem::Point;

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn scalar_flux(v: Point) -> Flux {
    [v, [0.0; 2], [0.0; 2], [0.0; 2]]
}

pub type VelocityField = Arc<dyn Fn(Point, f64) -> Point + Send + Sync>;

#[derive(Clone)]
pub enum Beta {
    Constant(Point),
    Field(VelocityField),
}

impl Beta {
    pub fn at(&self, x: Point, t: f64) -> Point {
        match self {
            Beta::Constant(b) => *b,
            Beta::Field(f) => f(x, t),
        }
    }
}

impl fmt::Debug for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Constant(b) => write!(f, "Constant({b:?})"),
            Beta::Field(_) => f.write_str("Field(..)"),
        }
    }
}

/// `∂_t u + ∇·(β u) = 0`.
#[derive(Debug, Clone)]
pub struct Transport {
    pub beta: Beta,
}

pub fn make_transport(beta: Point) -> Transport {
    Transport {
        beta: Beta::Constant(beta),
    }
}

pub fn make_transport_field(beta: impl Fn(Point, f64) -> Point + Send + Sync + 'static) -> Transport {
    Transport {
        beta: Beta::Field(Arc::new(beta)),
    }
}

impl HyperbolicSystem for Transport {
    fn name(&self) -> &'static str {
        "transport"
    }

    fn n_components(&self) -> usize {
        1
    }

    fn is_autonomous(&self) -> bool {
        matches!(self.beta, Beta::Constant(_))
    }

    fn flux(&self, u: &Conserved, x: Point, t: f64) -> Flux {
        let b = self.beta.at(x, t);
        scalar_flux([b[0] * u[0], b[1] * u[0]])
    }

    fn wave_fan(&self, n: Point, _ul: &Conserved, _ur: &Conserved, xl: Point, xr: Point, t: f64) -> (f64, f64) {
        let a = dot(self.beta.at(xl, t), n);
        let b = dot(self.beta.at(xr, t), n);
        (a.min(b), a.max(b))
    }

    fn spectral_radius(&self, n: Point, _u: &Conserved, x: Point, t: f64) -> f64 {
        dot(self.beta.at(x, t), n).abs()
    }

    fn admissible(&self, u: &Conserved) -> bool {
        u[0].is_finite()
    }

    fn lagrangian_velocity(&self, _u: &Conserved, x: Point, t: f64) -> Point {
        self.beta.at(x, t)
    }

    fn entropy(&self, which: EntropyKind, u: &Conserved, x: Point, t: f64) -> Option<(f64, Point)> {
        (which == EntropyKind::Square).then(|| {
            let b = self.beta.at(x, t);
            let h = 0.5 * u[0] * u[0];
            (h, [b[0] * h, b[1] * h])
        })
    }
}

/// `∂_t u + ∇·(½ u² β) = 0` with `β = (1, 1)`.
#[derive(Debug, Clone)]
pub struct Burgers {
    pub beta: Point,
}

pub fn make_burgers_2d() -> Burgers {
    Burgers { beta: [1.0, 1.0] }
}

impl HyperbolicSystem for Burgers {
    fn name(&self) -> &'static str {
        "burgers"
    }

    fn n_components(&self) -> usize {
        1
    }

    fn flux(&self, u: &Conserved, _x: Point, _t: f64) -> Flux {
        let h = 0.5 * u[0] * u[0];
        scalar_flux([h * self.beta[0], h * self.beta[1]])
    }

    fn wave_fan(&self, n: Point, ul: &Conserved, ur: &Conserved, _xl: Point, _xr: Point, _t: f64) -> (f64, f64) {
        // f'(s)·n = s (β·n) is monotone in s, so the endpoints bound it.
        let b = dot(self.beta, n);
        let (a, c) = (ul[0] * b, ur[0] * b);
        (a.min(c), a.max(c))
    }

    fn spectral_radius(&self, n: Point, u: &Conserved, _x: Point, _t: f64) -> f64 {
        (u[0] * dot(self.beta, n)).abs()
    }

    fn admissible(&self, u: &Conserved) -> bool {
        u[0].is_finite()
    }

    fn lagrangian_velocity(&self, u: &Conserved, _x: Point, _t: f64) -> Point {
        [u[0] * self.beta[0], u[0] * self.beta[1]]
    }

    fn entropy(&self, which: EntropyKind, u: &Conserved, _x: Point, _t: f64) -> Option<(f64, Point)> {
        (which == EntropyKind::Square).then(|| {
            let c = u[0].powi(3) / 3.0;
            (0.5 * u[0] * u[0], [c * self.beta[0], c * self.beta[1]])
        })
    }
}

/// `∂_t u + ∇·(sin u, cos u) = 0`.
#[derive(Debug, Clone, Default)]
pub struct Kpp;

pub fn make_kpp() -> Kpp {
    Kpp
}

/// Range of `cos(s)` for `s ∈ [a, b]`.
fn cos_range(a: f64, b: f64) -> (f64, f64) {
    let (ca, cb) = (a.cos(), b.cos());
    let mut lo = ca.min(cb);
    let mut hi = ca.max(cb);
    if b - a >= 2.0 * PI {
        return (-1.0, 1.0);
    }
    // smallest multiple of 2π in [a, b] -> max 1; odd multiple of π -> min -1
    if (a / (2.0 * PI)).ceil() * 2.0 * PI <= b {
        hi = 1.0;
    }
    if ((a - PI) / (2.0 * PI)).ceil() * 2.0 * PI + PI <= b {
        lo = -1.0;
    }
    (lo, hi)
}

impl HyperbolicSystem for Kpp {
    fn name(&self) -> &'static str {
        "kpp"
    }

    fn n_components(&self) -> usize {
        1
    }

    fn flux(&self, u: &Conserved, _x: Point, _t: f64) -> Flux {
        scalar_flux([u[0].sin(), u[0].cos()])
    }

    fn wave_fan(&self, n: Point, ul: &Conserved, ur: &Conserved, _xl: Point, _xr: Point, _t: f64) -> (f64, f64) {
        // f'(s)·n = cos(s) n1 - sin(s) n2 = |n| cos(s + φ), φ = atan2(n2, n1).
        let norm = n[0].hypot(n[1]);
        if norm == 0.0 {
            return (0.0, 0.0);
        }
        let phi = n[1].atan2(n[0]);
        let (a, b) = (ul[0].min(ur[0]), ul[0].max(ur[0]));
        let (lo, hi) = cos_range(a + phi, b + phi);
        (norm * lo, norm * hi)
    }

    fn spectral_radius(&self, n: Point, u: &Conserved, _x: Point, _t: f64) -> f64 {
        (u[0].cos() * n[0] - u[0].sin() * n[1]).abs()
    }

    fn admissible(&self, u: &Conserved) -> bool {
        u[0].is_finite()
    }

    fn lagrangian_velocity(&self, u: &Conserved, _x: Point, _t: f64) -> Point {
        [u[0].cos(), -u[0].sin()]
    }

    fn entropy(&self, which: EntropyKind, u: &Conserved, _x: Point, _t: f64) -> Option<(f64, Point)> {
        (which == EntropyKind::Square).then(|| {
            let (s, c) = u[0].sin_cos();
            (0.5 * u[0] * u[0], [u[0] * s + c - 1.0, u[0] * c - s])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::scalar as st;
    use super::*;

    const O: Point = [0.0, 0.0];

    #[test]
    fn transport_examples() {
        let t = make_transport([1.0, 0.0]);
        assert_eq!(t.max_speed([1.0, 0.0], &st(3.0), &st(-1.0), O, O, 0.0), 1.0);
        let z = make_transport([0.0, 0.0]);
        assert_eq!(z.max_speed([0.6, 0.8], &st(3.0), &st(-1.0), O, O, 0.0), 0.0);
        let rot = make_transport_field(|x, t| {
            let c = (2.0 * PI * t).cos();
            let (px, py) = (PI * x[0], PI * x[1]);
            [px.sin() * py.cos() * c, -px.cos() * py.sin() * c]
        });
        let b = rot.lagrangian_velocity(&st(0.0), [0.5, 0.5], 0.0);
        assert!(b[0].abs() < 1e-15 && b[1].abs() < 1e-15);
        assert!(!rot.is_autonomous());
    }

    #[test]
    fn burgers_examples() {
        let b = make_burgers_2d();
        assert_eq!(b.max_speed([1.0, 0.0], &st(1.0), &st(0.0), O, O, 0.0), 1.0);
        assert_eq!(b.max_speed([1.0, 0.0], &st(0.0), &st(0.0), O, O, 0.0), 0.0);
        let n = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()];
        assert!(b.max_speed(n, &st(5.0), &st(-3.0), O, O, 0.0) < 1e-15);
        assert_eq!(b.lagrangian_velocity(&st(1.0), O, 0.0), [1.0, 1.0]);
    }

    #[test]
    fn kpp_examples() {
        let k = make_kpp();
        let n = [0.3f64.cos(), 0.3f64.sin()];
        assert_eq!(k.max_speed(n, &st(0.1), &st(0.1 + 2.0 * PI), O, O, 0.0), 1.0);
        assert_eq!(k.max_speed([1.0, 0.0], &st(0.0), &st(0.0), O, O, 0.0), 1.0);
        let v = k.max_speed([0.0, 1.0], &st(PI / 4.0), &st(PI / 2.0), O, O, 0.0);
        assert!((v - 1.0).abs() < 1e-15);
        // interval [0.1, 0.2] along (1,0): cos is monotone there
        let (l, r) = k.wave_fan([1.0, 0.0], &st(0.2), &st(0.1), O, O, 0.0);
        assert!((l - 0.2f64.cos()).abs() < 1e-15 && (r - 0.1f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn cos_range_detects_extrema() {
        assert_eq!(cos_range(-0.1, 0.1).1, 1.0);
        assert_eq!(cos_range(3.0, 3.2).0, -1.0);
        assert_eq!(cos_range(-3.2, -3.0).0, -1.0);
        let (lo, hi) = cos_range(0.5, 1.0);
        assert_eq!((lo, hi), (1.0f64.cos(), 0.5f64.cos()));
        assert_eq!(cos_range(6.2, 6.4).1, 1.0);
    }
}
