//! Compressible Euler equations with an ideal-gas equation of state.

use super::{Conserved, EntropyKind, Flux, HyperbolicSystem, SystemError};
use crate::fem::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler {
    pub gamma: f64,
    pub dim: usize,
}

pub fn make_euler(gamma: f64, dim: usize) -> Result<Euler, SystemError> {
    if !(gamma > 1.0) {
        return Err(SystemError::InvalidParameter(format!(
            "gamma must exceed 1, got {gamma}"
        )));
    }
    if !(1..=2).contains(&dim) {
        return Err(SystemError::InvalidParameter(format!(
            "dimension must be 1 or 2, got {dim}"
        )));
    }
    Ok(Euler { gamma, dim })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerPrimitive {
    pub rho: f64,
    pub u: Point,
    pub p: f64,
}

impl EulerPrimitive {
    pub fn new(rho: f64, u: Point, p: f64) -> Self {
        Self { rho, u, p }
    }

    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }

    pub fn total_energy(&self, gamma: f64) -> f64 {
        self.p / (gamma - 1.0) + 0.5 * self.rho * (self.u[0] * self.u[0] + self.u[1] * self.u[1])
    }
}

impl Euler {
    fn e_index(&self) -> usize {
        self.dim + 1
    }

    pub fn to_conserved(&self, w: &EulerPrimitive) -> Conserved {
        let mut u = [0.0; 4];
        u[0] = w.rho;
        for k in 0..self.dim {
            u[1 + k] = w.rho * w.u[k];
        }
        let mut w = *w;
        if self.dim == 1 {
            w.u[1] = 0.0;
        }
        u[self.e_index()] = w.total_energy(self.gamma);
        u
    }

    pub fn to_primitive(&self, u: &Conserved) -> EulerPrimitive {
        let rho = u[0];
        let mut vel = [0.0; 2];
        for k in 0..self.dim {
            vel[k] = u[1 + k] / rho;
        }
        EulerPrimitive {
            rho,
            u: vel,
            p: self.pressure(u),
        }
    }

    /// Internal energy per unit volume, `E - ½ρ|u|²`.
    pub fn internal_energy(&self, u: &Conserved) -> f64 {
        let m2: f64 = (0..self.dim).map(|k| u[1 + k] * u[1 + k]).sum();
        u[self.e_index()] - 0.5 * m2 / u[0]
    }

    pub fn pressure(&self, u: &Conserved) -> f64 {
        (self.gamma - 1.0) * self.internal_energy(u)
    }
}

impl HyperbolicSystem for Euler {
    fn name(&self) -> &'static str {
        "euler"
    }

    fn n_components(&self) -> usize {
        self.dim + 2
    }

    fn flux(&self, u: &Conserved, _x: Point, _t: f64) -> Flux {
        let w = self.to_primitive(u);
        let mut f = [[0.0; 2]; 4];
        let e = self.e_index();
        for r in 0..self.dim {
            f[0][r] = u[1 + r];
            for k in 0..self.dim {
                f[1 + k][r] = u[1 + k] * w.u[r] + if k == r { w.p } else { 0.0 };
            }
            f[e][r] = (u[e] + w.p) * w.u[r];
        }
        f
    }

    fn wave_fan(&self, n: Point, ul: &Conserved, ur: &Conserved, _xl: Point, _xr: Point, _t: f64) -> (f64, f64) {
        euler_wave_speeds(n, &self.to_primitive(ul), &self.to_primitive(ur), self.gamma)
    }

    fn spectral_radius(&self, n: Point, u: &Conserved, _x: Point, _t: f64) -> f64 {
        let w = self.to_primitive(u);
        (w.u[0] * n[0] + w.u[1] * n[1]).abs() + w.sound_speed(self.gamma) * n[0].hypot(n[1])
    }

    fn admissible(&self, u: &Conserved) -> bool {
        u[..self.n_components()].iter().all(|v| v.is_finite()) && u[0] > 0.0 && self.internal_energy(u) > 0.0
    }

    fn lagrangian_velocity(&self, u: &Conserved, _x: Point, _t: f64) -> Point {
        self.to_primitive(u).u
    }

    fn entropy(&self, which: EntropyKind, u: &Conserved, _x: Point, _t: f64) -> Option<(f64, Point)> {
        (which == EntropyKind::Physical).then(|| {
            let w = self.to_primitive(u);
            let eta = -w.rho * (w.p * w.rho.powf(-self.gamma)).ln() / (self.gamma - 1.0);
            (eta, [eta * w.u[0], eta * w.u[1]])
        })
    }
}

/// Pressure function of one side of the Riemann problem and its derivative.
fn side(p: f64, rho: f64, pk: f64, c: f64, gamma: f64) -> (f64, f64) {
    if p > pk {
        let a = 2.0 / ((gamma + 1.0) * rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * pk;
        let s = (a / (p + b)).sqrt();
        ((p - pk) * s, s * (1.0 - 0.5 * (p - pk) / (p + b)))
    } else {
        let z = (gamma - 1.0) / (2.0 * gamma);
        let r = (p / pk).powf(z);
        let d = (p / pk).powf(-(gamma + 1.0) / (2.0 * gamma)) / (rho * c);
        (2.0 * c / (gamma - 1.0) * (r - 1.0), d)
    }
}

fn two_rarefaction(ul: f64, ur: f64, l: &EulerPrimitive, r: &EulerPrimitive, cl: f64, cr: f64, gamma: f64) -> f64 {
    let z = (gamma - 1.0) / (2.0 * gamma);
    let num = (cl + cr - 0.5 * (gamma - 1.0) * (ur - ul)).max(0.0);
    (num / (cl / l.p.powf(z) + cr / r.p.powf(z))).powf(1.0 / z)
}

/// Star pressure and velocity of the Riemann problem along `n`, or `None`
/// when the data generate vacuum.
pub fn star_state(n: Point, l: &EulerPrimitive, r: &EulerPrimitive, gamma: f64) -> Option<(f64, f64)> {
    let nn = n[0].hypot(n[1]);
    let (nx, ny) = (n[0] / nn, n[1] / nn);
    let ul = l.u[0] * nx + l.u[1] * ny;
    let ur = r.u[0] * nx + r.u[1] * ny;
    let (cl, cr) = (l.sound_speed(gamma), r.sound_speed(gamma));
    let du = ur - ul;
    let phi = |p: f64| {
        let (fl, dl) = side(p, l.rho, l.p, cl, gamma);
        let (fr, dr) = side(p, r.rho, r.p, cr, gamma);
        (fl + fr + du, dl + dr)
    };
    if 2.0 * (cl + cr) / (gamma - 1.0) <= du {
        return None;
    }
    let p_tr = two_rarefaction(ul, ur, l, r, cl, cr, gamma);
    let mut lo = 0.0;
    let mut hi = p_tr.max(l.p).max(r.p);
    while phi(hi).0 < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut p = p_tr.clamp(lo, hi);
    if !(p > 0.0) {
        p = 0.5 * (lo + hi);
    }
    let mut converged = false;
    for _ in 0..100 {
        let (f, df) = phi(p);
        if f < 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let mut next = p - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - p).abs();
        p = next;
        if step <= 1e-10 * p || hi - lo <= 1e-10 * p {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("star-pressure Newton iteration did not converge; using the two-rarefaction bound");
        p = p_tr;
    }
    let (fl, _) = side(p, l.rho, l.p, cl, gamma);
    let (fr, _) = side(p, r.rho, r.p, cr, gamma);
    Some((p, 0.5 * (ul + ur) + 0.5 * (fr - fl)))
}

/// Leftmost and rightmost wave speeds of the Riemann problem along `n`.
/// The direction is normalized; the returned speeds are scaled back by `|n|`.
pub fn euler_wave_speeds(n: Point, l: &EulerPrimitive, r: &EulerPrimitive, gamma: f64) -> (f64, f64) {
    let nn = n[0].hypot(n[1]);
    if nn == 0.0 {
        return (0.0, 0.0);
    }
    let (nx, ny) = (n[0] / nn, n[1] / nn);
    let ul = l.u[0] * nx + l.u[1] * ny;
    let ur = r.u[0] * nx + r.u[1] * ny;
    let (cl, cr) = (l.sound_speed(gamma), r.sound_speed(gamma));
    let (ql, qr) = match star_state([nx, ny], l, r, gamma) {
        Some((p, _)) => {
            let k = (gamma + 1.0) / (2.0 * gamma);
            (
                (1.0 + k * (p / l.p - 1.0).max(0.0)).sqrt(),
                (1.0 + k * (p / r.p - 1.0).max(0.0)).sqrt(),
            )
        }
        None => (1.0, 1.0),
    };
    (nn * (ul - cl * ql), nn * (ur + cr * qr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sod() -> (EulerPrimitive, EulerPrimitive) {
        (
            EulerPrimitive::new(1.0, [0.0, 0.0], 1.0),
            EulerPrimitive::new(0.125, [0.0, 0.0], 0.1),
        )
    }

    #[test]
    fn conserved_and_flux_examples() {
        let e = make_euler(1.4, 2).unwrap();
        let u = e.to_conserved(&EulerPrimitive::new(1.0, [0.0, 0.0], 1.0));
        assert!((u[3] - 2.5).abs() < 1e-15);
        let u = e.to_conserved(&EulerPrimitive::new(1.0, [1.0, 0.0], 1.0));
        assert!((u[3] - 3.0).abs() < 1e-15);
        let f = e.flux(&u, [0.0; 2], 0.0);
        assert_eq!(f[0], [1.0, 0.0]);
        assert!((f[1][0] - 2.0).abs() < 1e-15 && f[1][1] == 0.0);
        assert!((f[3][0] - 4.0).abs() < 1e-15 && f[3][1] == 0.0);
        assert!(!e.admissible(&[1.0, 10.0, 0.0, 1.0]));
        assert!(e.checked_flux(&[1.0, 10.0, 0.0, 1.0], [0.0; 2], 0.0).is_err());
        assert!(make_euler(1.0, 2).is_err());
    }

    #[test]
    fn equal_states_give_sound_speeds() {
        let w = EulerPrimitive::new(1.0, [0.0, 0.0], 1.0);
        let (l, r) = euler_wave_speeds([1.0, 0.0], &w, &w, 1.4);
        assert!((l + 1.4f64.sqrt()).abs() < 1e-12 && (r - 1.4f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sod_star_state_and_speeds() {
        let (l, r) = sod();
        let (p, u) = star_state([1.0, 0.0], &l, &r, 1.4).unwrap();
        assert!((p - 0.30313).abs() < 1e-5, "{p}");
        assert!((u - 0.92745).abs() < 1e-5, "{u}");
        let (ll, lr) = euler_wave_speeds([1.0, 0.0], &l, &r, 1.4);
        assert!((ll + 1.4f64.sqrt()).abs() < 1e-12);
        assert!((lr - 1.7522).abs() < 1e-4, "{lr}");
        // mirrored data with reversed normal
        let (ml, mr) = euler_wave_speeds([-1.0, 0.0], &r, &l, 1.4);
        assert!((ml + lr).abs() < 1e-12 && (mr + ll).abs() < 1e-12);
    }

    #[test]
    fn vacuum_returns_head_speeds() {
        let l = EulerPrimitive::new(1.0, [-10.0, 0.0], 1.0);
        let r = EulerPrimitive::new(1.0, [10.0, 0.0], 1.0);
        assert!(star_state([1.0, 0.0], &l, &r, 1.4).is_none());
        let (a, b) = euler_wave_speeds([1.0, 0.0], &l, &r, 1.4);
        let c = 1.4f64.sqrt();
        assert!((a - (-10.0 - c)).abs() < 1e-12 && (b - (10.0 + c)).abs() < 1e-12);
    }

    #[test]
    fn physical_entropy_is_finite_and_flux_scales() {
        let e = make_euler(1.4, 1).unwrap();
        let u = e.to_conserved(&EulerPrimitive::new(2.0, [0.5, 0.0], 3.0));
        let (eta, q) = e.entropy(EntropyKind::Physical, &u, [0.0; 2], 0.0).unwrap();
        assert!((q[0] - 0.5 * eta).abs() < 1e-14);
        assert_eq!(e.n_components(), 3);
    }
}
