use super::{SchemeError, SpeedReference};
use crate::fem::{Mesh, Point, StencilField};
use crate::systems::{shifted_lambda_max, Conserved, HyperbolicSystem};

/// Graph viscosity on the mesh adjacency plus the per-dof speeds used by
/// the time-step estimate.
#[derive(Debug, Clone)]
pub struct Viscosity {
    /// `d_ij` per graph entry, diagonal included.
    pub d: Vec<f64>,
    /// `λ_{i,max}` of the translated flux.
    pub lambda_shifted: Vec<f64>,
    /// Same maximum for the untranslated flux.
    pub lambda_eulerian: Vec<f64>,
}

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `d_ij = max(λ(g_j, n_ij, U_i, U_j)‖c_ij‖, λ(g_i, n_ji, U_j, U_i)‖c_ji‖)`,
/// `d_ii = -Σ_{j≠i} d_ij`. With `enabled = false` all `d_ij` vanish but the
/// speeds are still computed.
pub fn compute_dij(
    mesh: &Mesh,
    st: &StencilField,
    u: &[Conserved],
    w: &[Point],
    system: &dyn HyperbolicSystem,
    t: f64,
    enabled: bool,
) -> Result<Viscosity, SchemeError> {
    let g = mesh.graph();
    let x = mesh.coords();
    let n = mesh.n_nodes();
    let mut d = vec![0.0; g.nnz()];
    let mut ls = vec![0.0_f64; n];
    let mut le = vec![0.0_f64; n];
    for i in 0..n {
        for k in g.row(i) {
            let j = g.cols[k];
            if j < i {
                continue;
            }
            let cij = st.c[k];
            let nij = (cij[0] * cij[0] + cij[1] * cij[1]).sqrt();
            if j == i {
                if nij > 0.0 {
                    let e = [cij[0] / nij, cij[1] / nij];
                    let (l, r) = system.wave_fan(e, &u[i], &u[i], x[i], x[i], t);
                    let s = shifted_lambda_max(l, r, dot(w[i], e));
                    ls[i] = ls[i].max(s);
                    le[i] = le[i].max(l.abs().max(r.abs()));
                }
                continue;
            }
            let kt = g.transpose[k];
            let cji = st.c[kt];
            let nji = (cji[0] * cji[0] + cji[1] * cji[1]).sqrt();
            let (mut s1, mut e1, mut s2, mut e2) = (0.0, 0.0, 0.0, 0.0);
            let mut fan_ij = None;
            if nij > 0.0 {
                let e = [cij[0] / nij, cij[1] / nij];
                let (l, r) = system.wave_fan(e, &u[i], &u[j], x[i], x[j], t);
                s1 = shifted_lambda_max(l, r, dot(w[j], e));
                e1 = l.abs().max(r.abs());
                fan_ij = Some((l, r));
            }
            if nji > 0.0 {
                let e = [cji[0] / nji, cji[1] / nji];
                // Reflected Riemann problem: reuse the fan when c_ji = -c_ij.
                let (l, r) = match fan_ij {
                    Some((l, r)) if cji[0] == -cij[0] && cji[1] == -cij[1] => (-r, -l),
                    _ => system.wave_fan(e, &u[j], &u[i], x[j], x[i], t),
                };
                s2 = shifted_lambda_max(l, r, dot(w[i], e));
                e2 = l.abs().max(r.abs());
            }
            let dij = (s1 * nij).max(s2 * nji);
            if dij.is_nan() || s1.is_nan() || s2.is_nan() {
                return Err(SchemeError::NumericSpeed { i, j });
            }
            if enabled {
                d[k] = dij;
                d[kt] = dij;
            }
            let s = s1.max(s2);
            let e = e1.max(e2);
            ls[i] = ls[i].max(s);
            ls[j] = ls[j].max(s);
            le[i] = le[i].max(e);
            le[j] = le[j].max(e);
        }
    }
    for i in 0..n {
        let di = g.diag[i];
        let s: f64 = g.row(i).filter(|&k| k != di).map(|k| d[k]).sum();
        d[di] = -s;
    }
    Ok(Viscosity {
        d,
        lambda_shifted: ls,
        lambda_eulerian: le,
    })
}

/// `cfl · min_i h_min_i / (2 λ_i κ_i)`, capped by `dt_max`.
pub fn estimate_dt(st: &StencilField, visc: &Viscosity, cfl: f64, dt_max: f64, speed: SpeedReference) -> f64 {
    let mut dt = dt_max;
    for i in 0..st.mass.len() {
        let lambda = match speed {
            SpeedReference::Shifted => visc.lambda_shifted[i],
            SpeedReference::ShiftedOrEulerian => visc.lambda_shifted[i].max(visc.lambda_eulerian[i]),
        };
        if lambda > 0.0 {
            dt = dt.min(cfl * st.h_min[i] / (2.0 * lambda * st.kappa[i]));
        }
    }
    dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_stencil, QuadratureRule};
    use crate::systems::{make_burgers_2d, make_transport, scalar};

    fn line(n: usize) -> (Mesh, StencilField) {
        let m = Mesh::periodic_interval(0.0, 1.0, n).unwrap();
        let s = assemble_stencil(&m, &QuadratureRule::default_for(m.kind())).unwrap();
        (m, s)
    }

    #[test]
    fn constant_transport_gives_norm_of_c() {
        let (m, s) = line(8);
        let u = vec![scalar(2.0); 8];
        let w = vec![[0.0; 2]; 8];
        let v = compute_dij(&m, &s, &u, &w, &make_transport([1.0, 0.0]), 0.0, true).unwrap();
        let g = m.graph();
        for i in 0..8 {
            for k in g.row(i) {
                if g.cols[k] != i {
                    assert!((v.d[k] - s.norm(k)).abs() < 1e-15);
                }
            }
            let rs: f64 = g.row(i).map(|k| v.d[k]).sum();
            assert!(rs.abs() < 1e-15);
        }
        let z = compute_dij(&m, &s, &u, &w, &make_transport([0.0, 0.0]), 0.0, true).unwrap();
        assert!(z.d.iter().all(|&d| d == 0.0));
        assert_eq!(estimate_dt(&s, &z, 1.0, 7.0, SpeedReference::Shifted), 7.0);
    }

    #[test]
    fn burgers_pair_example() {
        let (m, s) = line(4);
        let mut u = vec![scalar(0.0); 4];
        u[1] = scalar(1.0);
        let w = vec![[0.0; 2]; 4];
        let v = compute_dij(&m, &s, &u, &w, &make_burgers_2d(), 0.0, true).unwrap();
        let k = m.graph().find(1, 2).unwrap();
        assert!((s.c[k][0] - 0.5).abs() < 1e-15);
        assert!((v.d[k] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_transport_time_step() {
        let (m, s) = line(10);
        let u = vec![scalar(1.0); 10];
        let v = compute_dij(&m, &s, &u, &vec![[0.0; 2]; 10], &make_transport([1.0, 0.0]), 0.0, true).unwrap();
        let h = 0.1;
        let dt = estimate_dt(&s, &v, 1.0, 1.0, SpeedReference::Shifted);
        assert!((dt - h / 2.0).abs() < 1e-15);
        let half = estimate_dt(&s, &v, 0.5, 1.0, SpeedReference::Shifted);
        assert_eq!(half, dt / 2.0);
        // moving with the flow removes the translated speed entirely
        let v = compute_dij(
            &m,
            &s,
            &u,
            &vec![[1.0, 0.0]; 10],
            &make_transport([1.0, 0.0]),
            0.0,
            true,
        )
        .unwrap();
        assert!(v.d.iter().all(|&d| d.abs() < 1e-15));
        assert_eq!(estimate_dt(&s, &v, 1.0, 3.0, SpeedReference::Shifted), 3.0);
        assert!((estimate_dt(&s, &v, 1.0, 3.0, SpeedReference::ShiftedOrEulerian) - h / 2.0).abs() < 1e-15);
    }
}
