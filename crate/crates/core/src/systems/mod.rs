//! Hyperbolic systems: fluxes, admissible sets, maximal wave speeds of the
//! projected Riemann problem, and entropy pairs.

mod euler;
mod scalar;

use std::fmt::Debug;
use std::sync::Arc;

use crate::fem::Point;

pub use euler::{euler_wave_speeds, make_euler, star_state, Euler, EulerPrimitive};
pub use scalar::{
    make_burgers_2d, make_kpp, make_transport, make_transport_field, Beta, Burgers, Kpp, Transport, VelocityField,
};

/// Conserved variables; only the first `n_components()` entries are used.
pub type Conserved = [f64; 4];
/// Flux matrix: one `d`-vector per conserved component.
pub type Flux = [Point; 4];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SystemError {
    #[error("state {0:?} is not admissible")]
    NotAdmissible(Vec<f64>),
    #[error("entropy pair {0:?} is not registered for {1}")]
    UnknownEntropy(EntropyKind, &'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyKind {
    /// `η = u²/2` for scalar equations.
    Square,
    /// `η = -ρ log(p ρ^{-γ}) / (γ - 1)` for the Euler equations.
    Physical,
}

pub trait HyperbolicSystem: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn n_components(&self) -> usize;

    fn is_scalar(&self) -> bool {
        self.n_components() == 1
    }

    /// False when the flux depends explicitly on space or time.
    fn is_autonomous(&self) -> bool {
        true
    }

    /// Flux at state `u`; `x` and `t` only matter for non-autonomous systems.
    fn flux(&self, u: &Conserved, x: Point, t: f64) -> Flux;

    fn checked_flux(&self, u: &Conserved, x: Point, t: f64) -> Result<Flux, SystemError> {
        if self.admissible(u) {
            Ok(self.flux(u, x, t))
        } else {
            Err(SystemError::NotAdmissible(u[..self.n_components()].to_vec()))
        }
    }

    /// `(λ_L, λ_R)` bounding the wave fan of the Riemann problem with data
    /// `ul` (at `xl`) and `ur` (at `xr`) along the direction `n`.
    fn wave_fan(&self, n: Point, ul: &Conserved, ur: &Conserved, xl: Point, xr: Point, t: f64) -> (f64, f64);

    fn max_speed(&self, n: Point, ul: &Conserved, ur: &Conserved, xl: Point, xr: Point, t: f64) -> f64 {
        let (l, r) = self.wave_fan(n, ul, ur, xl, xr, t);
        l.abs().max(r.abs())
    }

    /// Spectral radius of the directional flux Jacobian at a single state.
    fn spectral_radius(&self, n: Point, u: &Conserved, x: Point, t: f64) -> f64;

    fn admissible(&self, u: &Conserved) -> bool;

    /// Velocity that moves the mesh with the flow: `f'(u)` for scalars,
    /// the fluid velocity for Euler.
    fn lagrangian_velocity(&self, u: &Conserved, x: Point, t: f64) -> Point;

    /// `(η, q)` for a registered entropy pair, `None` if not registered.
    fn entropy(&self, which: EntropyKind, u: &Conserved, x: Point, t: f64) -> Option<(f64, Point)>;

    /// Membership of `u` in the invariant set built from `neighbors`:
    /// local min/max for scalars, positivity for Euler.
    fn in_invariant_set(&self, u: &Conserved, neighbors: &[Conserved], slack: f64) -> bool {
        if self.is_scalar() {
            let lo = neighbors.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = neighbors.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
            u[0] >= lo - slack && u[0] <= hi + slack
        } else {
            self.admissible(u)
        }
    }
}

pub type SystemRef = Arc<dyn HyperbolicSystem>;

/// Fastest speed of the translated flux `f - u⊗W` given the fan of `f`
/// and `w_n = W·n`.
#[inline]
pub fn shifted_lambda_max(lambda_l: f64, lambda_r: f64, w_n: f64) -> f64 {
    (lambda_l - w_n).abs().max((lambda_r - w_n).abs())
}

pub fn entropy_pair_eval(
    system: &dyn HyperbolicSystem,
    which: EntropyKind,
    u: &Conserved,
) -> Result<(f64, Point), SystemError> {
    if !system.admissible(u) {
        return Err(SystemError::NotAdmissible(u[..system.n_components()].to_vec()));
    }
    system
        .entropy(which, u, [0.0, 0.0], 0.0)
        .ok_or(SystemError::UnknownEntropy(which, system.name()))
}

/// Scalar state helper.
#[inline]
pub fn scalar(v: f64) -> Conserved {
    [v, 0.0, 0.0, 0.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_speed_examples() {
        assert_eq!(shifted_lambda_max(-1.0, 1.0, 0.0), 1.0);
        assert_eq!(shifted_lambda_max(-1.0, 1.0, 1.0), 2.0);
        let v = shifted_lambda_max(-1.18322, 1.7522, 0.5);
        assert!((v - 1.68322).abs() < 1e-12);
        for (l, r) in [(-3.0, 0.5), (0.2, 0.7), (-2.0, -1.0)] {
            assert_eq!(shifted_lambda_max(l, r, 0.0), f64::max(f64::abs(l), f64::abs(r)));
        }
    }

    #[test]
    fn entropy_pair_examples() {
        let t = make_transport([1.0, -2.0]);
        let (eta, q) = entropy_pair_eval(&t, EntropyKind::Square, &scalar(2.0)).unwrap();
        assert_eq!(eta, 2.0);
        assert_eq!(q, [2.0, -4.0]);
        let b = make_burgers_2d();
        let (eta, q) = entropy_pair_eval(&b, EntropyKind::Square, &scalar(1.0)).unwrap();
        assert_eq!(eta, 0.5);
        assert!((q[0] - 1.0 / 3.0).abs() < 1e-16 && (q[1] - 1.0 / 3.0).abs() < 1e-16);
        let k = make_kpp();
        assert_eq!(
            entropy_pair_eval(&k, EntropyKind::Square, &scalar(0.0)).unwrap(),
            (0.0, [0.0, 0.0])
        );
        assert!(matches!(
            entropy_pair_eval(&k, EntropyKind::Physical, &scalar(0.0)),
            Err(SystemError::UnknownEntropy(..))
        ));
    }
}
