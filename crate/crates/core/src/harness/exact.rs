//! Reference solutions of the benchmark problems.

use std::f64::consts::PI;

use crate::fem::Point;
use crate::systems::{star_state, EulerPrimitive};

/// Swirling velocity `(sin πx cos πy, -cos πx sin πy) cos 2πt` on the unit square.
pub fn rotation_beta(x: Point, t: f64) -> Point {
    let g = (2.0 * PI * t).cos();
    let (sx, cx) = (PI * x[0]).sin_cos();
    let (sy, cy) = (PI * x[1]).sin_cos();
    [sx * cy * g, -cx * sy * g]
}

pub fn rotation_initial(x: Point) -> f64 {
    x[0] + x[1]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("characteristic integration from ({x:?}, t = {t}) did not meet tolerance {tol:e}")]
pub struct OdeError {
    pub x: Point,
    pub t: f64,
    pub tol: f64,
}

/// Solution of the rotation problem by tracing the characteristic through
/// `(x, t)` back to `t = 0` with an adaptive Dormand-Prince 5(4) integrator.
pub fn exact_rotation(x: Point, t: f64, tol: f64) -> Result<f64, OdeError> {
    Ok(rotation_initial(trace_back(x, t, tol)?))
}

fn trace_back(x: Point, t: f64, tol: f64) -> Result<Point, OdeError> {
    if t == 0.0 {
        return Ok(x);
    }
    // Integrate in reversed time s = t - τ: dX/ds = -β(X, t - s).
    let f = |s: f64, y: Point| {
        let b = rotation_beta(y, t - s);
        [-b[0], -b[1]]
    };
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [&[f64]; 6] = [
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
        ],
        &[
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut y = x;
    let mut s = 0.0;
    let mut h = (t * 0.01).min(0.01);
    let mut k = [[0.0; 2]; 7];
    k[0] = f(s, y);
    let mut evals = 0usize;
    while s < t {
        if evals > 1_000_000 || h < 1e-14 * t {
            return Err(OdeError { x, t, tol });
        }
        h = h.min(t - s);
        for st in 0..6 {
            let mut yy = y;
            for (m, a) in A[st].iter().enumerate() {
                yy[0] += h * a * k[m][0];
                yy[1] += h * a * k[m][1];
            }
            k[st + 1] = f(s + C[st] * h, yy);
        }
        evals += 6;
        let mut y5 = y;
        for (m, a) in A[5].iter().enumerate() {
            y5[0] += h * a * k[m][0];
            y5[1] += h * a * k[m][1];
        }
        let mut err = 0.0_f64;
        for c in 0..2 {
            let e: f64 = (0..7).map(|m| E[m] * k[m][c]).sum::<f64>() * h;
            let sc = tol * (1.0 + y[c].abs().max(y5[c].abs()));
            err = err.max((e / sc).abs());
        }
        if err <= 1.0 {
            s += h;
            y = y5;
            k[0] = k[6];
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= fac;
    }
    Ok(y)
}

/// Exact solution of 2D Burgers with `β = (1, 1)` and `u_0 = 1` on `(0, 1)²`.
pub fn exact_burgers(x: Point, t: f64) -> f64 {
    let (x1, x2) = if x[1] <= x[0] { (x[0], x[1]) } else { (x[1], x[0]) };
    if t == 0.0 {
        let inside = |v: f64| (0.0..1.0).contains(&v);
        return if inside(x1) && inside(x2) { 1.0 } else { 0.0 };
    }
    let alpha = x1 - x2;
    let alpha0 = 1.0 - 0.5 * t;
    if alpha > 1.0 {
        0.0
    } else if alpha <= alpha0 {
        if (0.0..t).contains(&x2) {
            x2 / t
        } else if x2 >= t && x2 < 0.5 * t + 1.0 - alpha {
            1.0
        } else {
            0.0
        }
    } else if x2 >= 0.0 && x2 < (2.0 * t * (1.0 - alpha)).sqrt() {
        x2 / t
    } else {
        0.0
    }
}

/// Noh density: 16 inside the shock `|x| < t/3`, `1 + t/|x|` outside.
pub fn exact_noh_density(x: Point, t: f64) -> f64 {
    let r = x[0].hypot(x[1]);
    if r < t / 3.0 {
        16.0
    } else {
        1.0 + t / r
    }
}

/// Noh state outside the shock, used as boundary data.
pub fn noh_outer_state(x: Point, t: f64) -> EulerPrimitive {
    let r = x[0].hypot(x[1]);
    if r == 0.0 {
        return EulerPrimitive::new(1.0, [0.0, 0.0], NOH_PRESSURE);
    }
    EulerPrimitive::new(1.0 + t / r, [-x[0] / r, -x[1] / r], NOH_PRESSURE)
}

pub const NOH_PRESSURE: f64 = 1e-15;

pub fn sod_left() -> EulerPrimitive {
    EulerPrimitive::new(1.0, [0.0, 0.0], 1.0)
}

pub fn sod_right() -> EulerPrimitive {
    EulerPrimitive::new(0.125, [0.0, 0.0], 0.1)
}

/// Exact Sod solution `(ρ, u, p)` at `x₁` with the diaphragm at `x₁ = 0.5`.
pub fn exact_sod(x1: f64, t: f64, gamma: f64) -> (f64, f64, f64) {
    sample_riemann(&sod_left(), &sod_right(), gamma, (x1 - 0.5) / t)
}

/// Samples the exact 1D Riemann solution along `x` at similarity
/// coordinate `xi = x/t`. Vacuum-free data only.
pub fn sample_riemann(l: &EulerPrimitive, r: &EulerPrimitive, gamma: f64, xi: f64) -> (f64, f64, f64) {
    let (ps, us) = star_state([1.0, 0.0], l, r, gamma).expect("vacuum-free data");
    let g1 = (gamma - 1.0) / (gamma + 1.0);
    let left_side = xi <= us;
    let (k, sgn) = if left_side { (l, 1.0) } else { (r, -1.0) };
    // Work in the frame where the wave family is left-facing.
    let (rho, u, p) = (k.rho, sgn * k.u[0], k.p);
    let (u_star, xi) = (sgn * us, sgn * xi);
    let c = (gamma * p / rho).sqrt();
    let (rho_out, u_out, p_out) = if ps > p {
        let shock = u - c * ((gamma + 1.0) / (2.0 * gamma) * ps / p + (gamma - 1.0) / (2.0 * gamma)).sqrt();
        if xi <= shock {
            (rho, u, p)
        } else {
            let rs = rho * (ps / p + g1) / (g1 * ps / p + 1.0);
            (rs, u_star, ps)
        }
    } else {
        let head = u - c;
        let cs = c * (ps / p).powf((gamma - 1.0) / (2.0 * gamma));
        let tail = u_star - cs;
        if xi <= head {
            (rho, u, p)
        } else if xi >= tail {
            (rho * (ps / p).powf(1.0 / gamma), u_star, ps)
        } else {
            let cf = 2.0 / (gamma + 1.0) * (c + 0.5 * (gamma - 1.0) * (u - xi));
            let uf = 2.0 / (gamma + 1.0) * (c + 0.5 * (gamma - 1.0) * u + xi);
            let rf = rho * (cf / c).powf(2.0 / (gamma - 1.0));
            (rf, uf, p * (cf / c).powf(2.0 * gamma / (gamma - 1.0)))
        }
    };
    (rho_out, sgn * u_out, p_out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burgers_examples() {
        assert_eq!(exact_burgers([0.5, 0.5], 1.0), 0.5);
        assert_eq!(exact_burgers([1.9, 0.5], 0.5), 0.0);
        assert_eq!(exact_burgers([0.7, 0.3], 0.0), 1.0);
        for (a, b) in [(0.3, 1.1), (0.05, 0.9), (1.2, 0.4)] {
            assert_eq!(exact_burgers([a, b], 0.7), exact_burgers([b, a], 0.7));
        }
    }

    #[test]
    fn noh_examples() {
        assert_eq!(exact_noh_density([0.1, 0.0], 0.6), 16.0);
        assert!((exact_noh_density([0.3, 0.4], 0.6) - 2.2).abs() < 1e-15);
        assert!((exact_noh_density([1e8, 0.0], 0.6) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn sod_sampler() {
        let (r, u, p) = exact_sod(0.5, 1e-9, 1.4);
        // at the diaphragm the star state is sampled once t > 0
        assert!(u > 0.0 && p < 1.0 && r < 1.0);
        assert_eq!(exact_sod(0.0, 0.2, 1.4), (1.0, 0.0, 1.0));
        assert_eq!(exact_sod(1.0, 0.2, 1.4), (0.125, 0.0, 0.1));
        let (rl, ul, pl) = exact_sod(0.5 + 1.2 * 0.2, 0.2, 1.4);
        assert!((ul - 0.92745).abs() < 1e-4 && (pl - 0.30313).abs() < 1e-4);
        assert!((rl - 0.26557).abs() < 1e-4);
        let (rc, _, _) = exact_sod(0.5 + 0.5 * 0.2, 0.2, 1.4);
        assert!((rc - 0.42632).abs() < 1e-4);
        let (_, _, p_fan) = exact_sod(0.5 - 0.5 * 0.2, 0.2, 1.4);
        assert!(p_fan > 0.30313 && p_fan < 1.0);
    }

    #[test]
    fn rotation_oracle_matches_reparametrized_flow() {
        // β = g(t) b(x) so the flow at time t is the flow of b at G(t) = sin(2πt)/(2π).
        assert_eq!(exact_rotation([0.3, 0.8], 0.0, 1e-12).unwrap(), 1.1);
        let x = [0.3, 0.6];
        let u = exact_rotation(x, 0.5, 1e-12).unwrap();
        assert!((u - 0.9).abs() < 1e-9, "{u}");
        let back = trace_back(x, 0.25, 1e-12).unwrap();
        // autonomous flow of b backwards over 1/(2π)
        let fwd = {
            let mut p = back;
            let n = 20000;
            let h = 1.0 / (2.0 * PI) / n as f64;
            for _ in 0..n {
                let f = |q: Point| rotation_beta(q, 0.0);
                let k1 = f(p);
                let k2 = f([p[0] + 0.5 * h * k1[0], p[1] + 0.5 * h * k1[1]]);
                let k3 = f([p[0] + 0.5 * h * k2[0], p[1] + 0.5 * h * k2[1]]);
                let k4 = f([p[0] + h * k3[0], p[1] + h * k3[1]]);
                for c in 0..2 {
                    p[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                }
            }
            p
        };
        assert!((fwd[0] - x[0]).abs() < 1e-10 && (fwd[1] - x[1]).abs() < 1e-10);
        // the boundary is invariant
        let b = trace_back([0.0, 0.4], 0.25, 1e-12).unwrap();
        assert!(b[0].abs() < 1e-14);
    }
}
