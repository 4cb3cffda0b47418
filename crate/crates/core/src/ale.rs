//! ALE node velocities and mesh-motion validity checks.

use std::fmt;

use crate::fem::{cell_min_dets, BoundaryTag, Mesh, Point};
use crate::systems::{Conserved, HyperbolicSystem, VelocityField};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AleError {
    #[error("smoothed ALE velocity requested with dt = 0")]
    DegenerateStep,
    #[error("invalid ALE parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone)]
pub enum AleMode {
    /// Eulerian mesh, `W = 0`.
    None,
    /// `W_i = β(a_i, t)`.
    Analytic(VelocityField),
    /// `W_i = f'(U_i)` (scalars) or the fluid velocity (Euler).
    Lagrangian,
    /// Lagrangian positions blended with `sweeps` neighbor-averaging passes.
    SmoothedLagrangian { omega: f64, sweeps: usize },
}

impl fmt::Debug for AleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AleMode::None => f.write_str("None"),
            AleMode::Analytic(_) => f.write_str("Analytic(..)"),
            AleMode::Lagrangian => f.write_str("Lagrangian"),
            AleMode::SmoothedLagrangian { omega, sweeps } => {
                write!(f, "SmoothedLagrangian {{ omega: {omega}, sweeps: {sweeps} }}")
            }
        }
    }
}

#[derive(Clone)]
pub enum BoundaryMotion {
    Fixed,
    /// Keep only the component tangent to the tagged side.
    Slide,
    Free,
    Prescribed(VelocityField),
}

impl fmt::Debug for BoundaryMotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryMotion::Fixed => "Fixed",
            BoundaryMotion::Slide => "Slide",
            BoundaryMotion::Free => "Free",
            BoundaryMotion::Prescribed(_) => "Prescribed(..)",
        })
    }
}

#[derive(Debug, Clone)]
pub struct AleStrategy {
    pub mode: AleMode,
    /// Per-tag policies, applied in order; untagged sides use `Free`.
    pub boundary: Vec<(BoundaryTag, BoundaryMotion)>,
}

impl AleStrategy {
    pub fn new(mode: AleMode) -> Result<Self, AleError> {
        if let AleMode::SmoothedLagrangian { omega, .. } = mode {
            if !(0.0..=1.0).contains(&omega) {
                return Err(AleError::InvalidParameter(format!(
                    "omega must lie in [0, 1], got {omega}"
                )));
            }
        }
        Ok(Self {
            mode,
            boundary: Vec::new(),
        })
    }

    /// Smoothed Lagrangian motion with `ω = 0.9` and two sweeps.
    pub fn smoothed_default() -> Self {
        Self::new(AleMode::SmoothedLagrangian { omega: 0.9, sweeps: 2 }).expect("valid defaults")
    }

    pub fn with_boundary(mut self, tag: BoundaryTag, motion: BoundaryMotion) -> Self {
        self.boundary.retain(|(t, _)| *t != tag);
        self.boundary.push((tag, motion));
        self
    }

    pub fn with_all_boundaries(mut self, motion: BoundaryMotion) -> Self {
        for tag in BoundaryTag::ALL {
            self = self.with_boundary(tag, motion.clone());
        }
        self
    }

    /// True when `W` does not depend on the step size.
    pub fn is_step_independent(&self) -> bool {
        !matches!(self.mode, AleMode::SmoothedLagrangian { omega, sweeps } if omega < 1.0 && sweeps > 0)
    }

    fn apply_boundary(&self, mesh: &Mesh, w: &mut [Point], t: f64) {
        for (tag, motion) in &self.boundary {
            for (i, wi) in w.iter_mut().enumerate() {
                if !mesh.has_tag(i, *tag) {
                    continue;
                }
                match motion {
                    BoundaryMotion::Fixed => *wi = [0.0, 0.0],
                    BoundaryMotion::Free => {}
                    BoundaryMotion::Slide => {
                        if let Some(tg) = tag.tangent() {
                            let s = wi[0] * tg[0] + wi[1] * tg[1];
                            *wi = [s * tg[0], s * tg[1]];
                        }
                    }
                    BoundaryMotion::Prescribed(f) => *wi = f(mesh.coords()[i], t),
                }
            }
        }
    }

    fn base_velocities(&self, mesh: &Mesh, u: &[Conserved], system: &dyn HyperbolicSystem, t: f64) -> Vec<Point> {
        let a = mesh.coords();
        let mut w: Vec<Point> = match &self.mode {
            AleMode::None => vec![[0.0, 0.0]; a.len()],
            AleMode::Analytic(beta) => a.iter().map(|&x| beta(x, t)).collect(),
            AleMode::Lagrangian | AleMode::SmoothedLagrangian { .. } => a
                .iter()
                .zip(u)
                .map(|(&x, ui)| system.lagrangian_velocity(ui, x, t))
                .collect(),
        };
        if mesh.dim() == 1 {
            for wi in &mut w {
                wi[1] = 0.0;
            }
        }
        self.apply_boundary(mesh, &mut w, t);
        w
    }

    /// Step-size independent stand-in for the smoothed velocity:
    /// `ω W_lag + (1 - ω) S0(W_lag)` where `S0` averages velocities.
    pub fn velocity_proxy(&self, mesh: &Mesh, u: &[Conserved], system: &dyn HyperbolicSystem, t: f64) -> Vec<Point> {
        let w_lag = self.base_velocities(mesh, u, system, t);
        match self.mode {
            AleMode::SmoothedLagrangian { omega, sweeps } => {
                let s = smooth(mesh, &w_lag, sweeps, false);
                blend(&w_lag, &s, omega)
            }
            _ => w_lag,
        }
    }
}

fn blend(a: &[Point], b: &[Point], omega: f64) -> Vec<Point> {
    a.iter()
        .zip(b)
        .map(|(x, y)| [omega * x[0] + (1.0 - omega) * y[0], omega * x[1] + (1.0 - omega) * y[1]])
        .collect()
}

/// Jacobi neighbor-averaging sweeps over interior dofs. With `positions`
/// the periodic image offsets are applied so averages stay local.
fn smooth(mesh: &Mesh, field: &[Point], sweeps: usize, positions: bool) -> Vec<Point> {
    let g = mesh.graph();
    let mut cur = field.to_vec();
    let mut next = cur.clone();
    for _ in 0..sweeps {
        for i in 0..mesh.n_nodes() {
            if mesh.is_boundary(i) {
                continue;
            }
            let mut s = [0.0, 0.0];
            let mut n = 0usize;
            for k in g.row(i) {
                let j = g.cols[k];
                if j == i {
                    continue;
                }
                let mut p = cur[j];
                if positions {
                    p[0] += g.image_offset[k][0];
                    p[1] += g.image_offset[k][1];
                }
                s[0] += p[0];
                s[1] += p[1];
                n += 1;
            }
            if n > 0 {
                next[i] = [s[0] / n as f64, s[1] / n as f64];
            }
        }
        std::mem::swap(&mut cur, &mut next);
        next.copy_from_slice(&cur);
    }
    cur
}

pub fn node_velocities(
    strategy: &AleStrategy,
    mesh: &Mesh,
    u: &[Conserved],
    system: &dyn HyperbolicSystem,
    t: f64,
    dt: f64,
) -> Result<Vec<Point>, AleError> {
    let w_lag = strategy.base_velocities(mesh, u, system, t);
    let (omega, sweeps) = match strategy.mode {
        AleMode::SmoothedLagrangian { omega, sweeps } => (omega, sweeps),
        _ => return Ok(w_lag),
    };
    if dt == 0.0 {
        return Err(AleError::DegenerateStep);
    }
    let a = mesh.coords();
    let a_lag: Vec<Point> = a
        .iter()
        .zip(&w_lag)
        .map(|(x, v)| [x[0] + dt * v[0], x[1] + dt * v[1]])
        .collect();
    let a_s = smooth(mesh, &a_lag, sweeps, true);
    let mut w: Vec<Point> = blend(&a_lag, &a_s, omega)
        .iter()
        .zip(a)
        .map(|(p, x)| [(p[0] - x[0]) / dt, (p[1] - x[1]) / dt])
        .collect();
    for (i, wi) in w.iter_mut().enumerate() {
        if mesh.is_boundary(i) {
            *wi = w_lag[i];
        }
    }
    Ok(w)
}

/// Relative validity threshold on det J.
pub const EPS_DET: f64 = 1e-10;

/// Cells whose Jacobian determinant on the moved mesh `a + dt W`, or on the
/// temporal midpoint mesh, falls below `EPS_DET` times its current value.
pub fn check_invertibility(mesh: &Mesh, w: &[Point], dt: f64) -> Result<(), Vec<usize>> {
    let mid = mesh.displaced(w, 0.5 * dt);
    let end = mesh.displaced(w, dt);
    let (d0, d_mid, d_end) = (cell_min_dets(mesh), cell_min_dets(&mid), cell_min_dets(&end));
    let bad: Vec<usize> = (0..mesh.n_cells())
        .filter(|&c| {
            let floor = EPS_DET * d0[c].max(0.0);
            !(d_end[c] > floor) || !(d_mid[c] > floor)
        })
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::ElementKind;
    use crate::systems::{make_burgers_2d, scalar};

    #[test]
    fn none_gives_zero() {
        let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 3, 3, ElementKind::Triangle).unwrap();
        let u = vec![scalar(1.0); m.n_nodes()];
        let s = AleStrategy::new(AleMode::None).unwrap();
        let w = node_velocities(&s, &m, &u, &make_burgers_2d(), 0.0, 0.1).unwrap();
        assert!(w.iter().all(|v| *v == [0.0, 0.0]));
    }

    #[test]
    fn burgers_lagrangian_velocity() {
        let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 3, 3, ElementKind::Quadrilateral).unwrap();
        let u = vec![scalar(1.0); m.n_nodes()];
        let s = AleStrategy::new(AleMode::Lagrangian).unwrap();
        let w = node_velocities(&s, &m, &u, &make_burgers_2d(), 0.0, 0.1).unwrap();
        assert!(w.iter().all(|v| *v == [1.0, 1.0]));
    }

    #[test]
    fn three_node_pure_smoothing() {
        let m = Mesh::interval_from_nodes(&[0.0, 0.4, 1.0]).unwrap();
        let u = vec![scalar(0.0); 3];
        let s = AleStrategy::new(AleMode::SmoothedLagrangian { omega: 0.0, sweeps: 1 }).unwrap();
        let dt = 0.25;
        let w = node_velocities(&s, &m, &u, &make_burgers_2d(), 0.0, dt).unwrap();
        assert!((w[1][0] - 0.1 / dt).abs() < 1e-14);
        assert_eq!(w[0], [0.0, 0.0]);
        assert_eq!(
            node_velocities(&s, &m, &u, &make_burgers_2d(), 0.0, 0.0),
            Err(AleError::DegenerateStep)
        );
    }

    #[test]
    fn omega_one_and_zero_sweeps_are_lagrangian() {
        let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 4, 4, ElementKind::Quadrilateral).unwrap();
        let u: Vec<Conserved> = (0..m.n_nodes()).map(|k| scalar((k as f64 * 0.7).sin())).collect();
        let sys = make_burgers_2d();
        let lag = node_velocities(&AleStrategy::new(AleMode::Lagrangian).unwrap(), &m, &u, &sys, 0.0, 0.1).unwrap();
        for mode in [
            AleMode::SmoothedLagrangian { omega: 1.0, sweeps: 2 },
            AleMode::SmoothedLagrangian { omega: 0.5, sweeps: 0 },
        ] {
            let w = node_velocities(&AleStrategy::new(mode).unwrap(), &m, &u, &sys, 0.0, 0.1).unwrap();
            for (a, b) in w.iter().zip(&lag) {
                assert!((a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn fixed_boundary_never_moves_and_slide_is_tangential() {
        let m = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 4, 4, ElementKind::Quadrilateral).unwrap();
        let u = vec![scalar(1.0); m.n_nodes()];
        let s = AleStrategy::smoothed_default().with_all_boundaries(BoundaryMotion::Fixed);
        let w = node_velocities(&s, &m, &u, &make_burgers_2d(), 0.0, 0.05).unwrap();
        for i in 0..m.n_nodes() {
            if m.is_boundary(i) {
                assert_eq!(w[i], [0.0, 0.0]);
            }
        }
        let s = AleStrategy::new(AleMode::Lagrangian)
            .unwrap()
            .with_all_boundaries(BoundaryMotion::Slide);
        let w = node_velocities(&s, &m, &u, &make_burgers_2d(), 0.0, 0.05).unwrap();
        assert_eq!(w[2], [1.0, 0.0]); // bottom side
        assert_eq!(w[0], [0.0, 0.0]); // corner
        assert_eq!(w[5], [0.0, 1.0]); // left side
    }

    #[test]
    fn invertibility_examples() {
        let m = Mesh::interval(0.0, 2.0, 2).unwrap();
        assert!(check_invertibility(&m, &[[0.0; 2]; 3], 10.0).is_ok());
        assert!(check_invertibility(&m, &[[3.0, 0.0]; 3], 10.0).is_ok());
        let w = [[0.0, 0.0], [-1.0, 0.0], [0.0, 0.0]];
        assert_eq!(check_invertibility(&m, &w, 1.5), Err(vec![0]));
    }
}
