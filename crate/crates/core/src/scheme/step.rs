use super::bc::{apply_bc, BcTable};
use super::viscosity::{compute_dij, Viscosity};
use super::{Rejection, SchemeError, SchemeVersion, SolverState, StepError, StepReport};
use crate::ale::{check_invertibility, node_velocities, AleStrategy};
use crate::fem::{
    assemble_stencil, cell_min_dets, exact_masses, temporal_stencil, Mesh, Point, QuadratureRule, StencilField,
    TemporalRule,
};
use crate::systems::{Conserved, EntropyKind, HyperbolicSystem};

/// Everything a step needs besides the state and the mesh motion.
#[derive(Clone)]
pub struct StepContext<'a> {
    pub system: &'a dyn HyperbolicSystem,
    pub bc: &'a BcTable,
    pub viscosity: bool,
    /// Assert local bounds (autonomous scalars) or admissibility (systems).
    pub check_invariants: bool,
    /// Entropy pair monitored on version-1 steps.
    pub entropy: Option<EntropyKind>,
    pub quad: QuadratureRule,
    pub temporal: TemporalRule,
}

impl<'a> StepContext<'a> {
    pub fn new(system: &'a dyn HyperbolicSystem, bc: &'a BcTable, kind: crate::fem::ElementKind) -> Self {
        Self {
            system,
            bc,
            viscosity: true,
            check_invariants: true,
            entropy: None,
            quad: QuadratureRule::default_for(kind),
            temporal: TemporalRule::midpoint(),
        }
    }
}

/// Absolute slack on local bounds.
const BOUND_SLACK: f64 = 1e-12;

/// `f(U_j) - U_j ⊗ W_j` per dof.
fn translated_fluxes(state: &SolverState, w: &[Point], system: &dyn HyperbolicSystem) -> Vec<[Point; 4]> {
    let t = state.t();
    let x = state.mesh.coords();
    let nc = system.n_components();
    (0..state.u.len())
        .map(|j| {
            let mut f = system.flux(&state.u[j], x[j], t);
            for k in 0..nc {
                f[k][0] -= state.u[j][k] * w[j][0];
                f[k][1] -= state.u[j][k] * w[j][1];
            }
            f
        })
        .collect()
}

fn v1_masses(state: &SolverState, w: &[Point], dt: f64, st: &StencilField) -> Vec<f64> {
    let g = state.mesh.graph();
    (0..state.mass.len())
        .map(|i| {
            let s: f64 = g
                .row(i)
                .map(|k| {
                    let wj = w[g.cols[k]];
                    wj[0] * st.c[k][0] + wj[1] * st.c[k][1]
                })
                .sum();
            state.mass[i] + dt * s
        })
        .collect()
}

fn relative_defect(before: &Conserved, after: &Conserved, scale: f64) -> f64 {
    let diff = before.iter().zip(after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let norm = before.iter().map(|v| v.abs()).fold(0.0, f64::max).max(scale);
    if norm > 0.0 {
        diff / norm
    } else {
        diff
    }
}

#[allow(clippy::too_many_arguments)]
fn advance(
    state: &SolverState,
    w: &[Point],
    dt: f64,
    st: &StencilField,
    visc: &Viscosity,
    mass_new: Vec<f64>,
    new_mesh: Mesh,
    ctx: &StepContext<'_>,
    monitor_entropy: bool,
) -> Result<(SolverState, StepReport), StepError> {
    if let Some(i) = mass_new.iter().position(|&m| !(m > 0.0)) {
        return Err(StepError::Rejected(Rejection::NonPositiveMass {
            dof: i,
            mass: mass_new[i],
        }));
    }
    let system = ctx.system;
    let nc = system.n_components();
    let g = state.mesh.graph();
    let gflux = translated_fluxes(state, w, system);
    let n = state.u.len();
    let mut u_new = vec![[0.0; 4]; n];
    let mut min_conv = f64::INFINITY;
    let mut worst = 0;
    for i in 0..n {
        let mut acc = [0.0; 4];
        for k in 0..nc {
            acc[k] = state.mass[i] * state.u[i][k];
        }
        for e in g.row(i) {
            let j = g.cols[e];
            let c = st.c[e];
            let d = visc.d[e];
            for k in 0..nc {
                acc[k] -= dt * (gflux[j][k][0] * c[0] + gflux[j][k][1] * c[1] - d * state.u[j][k]);
            }
        }
        for k in 0..nc {
            u_new[i][k] = acc[k] / mass_new[i];
        }
        let conv = 1.0 + 2.0 * dt * visc.d[g.diag[i]] / mass_new[i];
        if conv < min_conv {
            min_conv = conv;
            worst = i;
        }
    }
    if min_conv < 0.0 {
        return Err(StepError::Rejected(Rejection::Convexity {
            dof: worst,
            coefficient: min_conv,
        }));
    }
    let t_new = state.t() + dt;
    if ctx.check_invariants {
        check_invariants(state, &u_new, system, t_new)?;
    }
    let entropy_max = match (monitor_entropy, ctx.entropy) {
        (true, Some(pair)) => {
            let r = residual(state, &u_new, &mass_new, st, visc, w, dt, system, pair);
            Some(r.into_iter().fold(f64::NEG_INFINITY, f64::max))
        }
        _ => None,
    };
    let mut next = SolverState {
        mesh: new_mesh,
        u: u_new,
        mass: mass_new,
        step: state.step + 1,
    };
    let total_before = state.totals();
    let total_after = next.totals();
    let scale: f64 = state.mass.iter().zip(&state.u).map(|(m, u)| m * u[0].abs()).sum();
    let report = StepReport {
        step: next.step,
        t: t_new,
        dt,
        reductions: 0,
        min_convexity: min_conv,
        row_sum_defect: st.row_sum_defect(&state.mesh),
        total_before,
        total_after,
        conservation_defect: relative_defect(&total_before, &total_after, scale),
        entropy_max,
    };
    apply_bc(&mut next, ctx.bc, t_new)?;
    Ok((next, report))
}

fn check_invariants(
    state: &SolverState,
    u_new: &[Conserved],
    system: &dyn HyperbolicSystem,
    t: f64,
) -> Result<(), SchemeError> {
    let g = state.mesh.graph();
    if system.is_scalar() {
        if !system.is_autonomous() {
            return Ok(());
        }
        for i in 0..u_new.len() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for k in g.row(i) {
                let v = state.u[g.cols[k]][0];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let v = u_new[i][0];
            if !(v >= lo - BOUND_SLACK && v <= hi + BOUND_SLACK) {
                return Err(SchemeError::InvariantViolation {
                    dof: i,
                    t,
                    detail: format!("value {v} outside local bounds [{lo}, {hi}]"),
                });
            }
        }
    } else if let Some(i) = u_new.iter().position(|u| !system.admissible(u)) {
        return Err(SchemeError::InvariantViolation {
            dof: i,
            t,
            detail: format!("state {:?} is not admissible", &u_new[i][..system.n_components()]),
        });
    }
    Ok(())
}

fn moved_mesh(state: &SolverState, w: &[Point], dt: f64) -> Result<Mesh, StepError> {
    check_invertibility(&state.mesh, w, dt).map_err(|cells| StepError::Rejected(Rejection::Inverted { cells }))?;
    Ok(state.mesh.displaced(w, dt))
}

/// Version-1 forward-Euler step with `c_ij` from the mesh at `t^n`.
pub fn euler_step_v1(
    state: &SolverState,
    w: &[Point],
    dt: f64,
    stencil: &StencilField,
    ctx: &StepContext<'_>,
) -> Result<(SolverState, StepReport), StepError> {
    let visc = compute_dij(&state.mesh, stencil, &state.u, w, ctx.system, state.t(), ctx.viscosity)?;
    euler_step_v1_with(state, w, dt, stencil, &visc, ctx)
}

pub(crate) fn euler_step_v1_with(
    state: &SolverState,
    w: &[Point],
    dt: f64,
    stencil: &StencilField,
    visc: &Viscosity,
    ctx: &StepContext<'_>,
) -> Result<(SolverState, StepReport), StepError> {
    let mesh = moved_mesh(state, w, dt)?;
    let mass_new = v1_masses(state, w, dt, stencil);
    advance(state, w, dt, stencil, visc, mass_new, mesh, ctx, true)
}

/// Version-2 forward-Euler step with time-averaged `c_ij` and exact masses.
pub fn euler_step_v2(
    state: &SolverState,
    w: &[Point],
    dt: f64,
    ctx: &StepContext<'_>,
) -> Result<(SolverState, StepReport), StepError> {
    let mesh = moved_mesh(state, w, dt)?;
    let st = temporal_stencil(&state.mesh, w, dt, &ctx.quad, &ctx.temporal)?;
    let visc = compute_dij(&state.mesh, &st, &state.u, w, ctx.system, state.t(), ctx.viscosity)?;
    let mass_new = exact_masses(&mesh)?;
    advance(state, w, dt, &st, &visc, mass_new, mesh, ctx, false)
}

/// Mass-weighted convex combination `α s_a + (1 - α) s_b` of positions,
/// masses and states, stamped at time `t`.
fn combine(a: &SolverState, b: &SolverState, alpha: f64, t: f64, nc: usize) -> Result<SolverState, StepError> {
    let beta = 1.0 - alpha;
    let coords: Vec<Point> = a
        .mesh
        .coords()
        .iter()
        .zip(b.mesh.coords())
        .map(|(p, q)| [alpha * p[0] + beta * q[0], alpha * p[1] + beta * q[1]])
        .collect();
    let mesh = a.mesh.with_coords(coords, t);
    let bad: Vec<usize> = cell_min_dets(&mesh)
        .iter()
        .enumerate()
        .filter(|(_, &d)| !(d > 0.0))
        .map(|(c, _)| c)
        .collect();
    if !bad.is_empty() {
        return Err(StepError::Rejected(Rejection::Inverted { cells: bad }));
    }
    let mut mass = Vec::with_capacity(a.mass.len());
    let mut u = Vec::with_capacity(a.mass.len());
    for i in 0..a.mass.len() {
        let (ma, mb) = (alpha * a.mass[i], beta * b.mass[i]);
        let m = ma + mb;
        let mut v = [0.0; 4];
        for k in 0..nc {
            v[k] = (ma * a.u[i][k] + mb * b.u[i][k]) / m;
        }
        mass.push(m);
        u.push(v);
    }
    Ok(SolverState {
        mesh,
        u,
        mass,
        step: b.step,
    })
}

/// One version-1 substep with the ALE velocity evaluated at the state's time.
fn substep(
    state: &SolverState,
    strategy: &AleStrategy,
    dt: f64,
    ctx: &StepContext<'_>,
) -> Result<(SolverState, StepReport), StepError> {
    let st = assemble_stencil(&state.mesh, &ctx.quad)?;
    let w = node_velocities(strategy, &state.mesh, &state.u, ctx.system, state.t(), dt)?;
    euler_step_v1(state, &w, dt, &st, ctx)
}

/// Third-order SSP Runge-Kutta built from three version-1 substeps.
/// `first` optionally supplies the velocity, stencil and viscosity of the
/// first substep when they are already known.
pub fn ssp_rk3_step(
    state: &SolverState,
    strategy: &AleStrategy,
    dt: f64,
    ctx: &StepContext<'_>,
    first: Option<(&[Point], &StencilField, &Viscosity)>,
) -> Result<(SolverState, StepReport), StepError> {
    let nc = ctx.system.n_components();
    let t0 = state.t();
    let (s1, r1) = match first {
        Some((w, st, visc)) => euler_step_v1_with(state, w, dt, st, visc, ctx)?,
        None => substep(state, strategy, dt, ctx)?,
    };
    let (s2t, r2) = substep(&s1, strategy, dt, ctx)?;
    let mut s2 = combine(state, &s2t, 0.75, t0 + 0.5 * dt, nc)?;
    apply_bc(&mut s2, ctx.bc, t0 + 0.5 * dt)?;
    let (s3t, r3) = substep(&s2, strategy, dt, ctx)?;
    let mut s3 = combine(state, &s3t, 1.0 / 3.0, t0 + dt, nc)?;
    s3.step = state.step + 1;
    let total_before = state.totals();
    let total_after = s3.totals();
    let scale: f64 = state.mass.iter().zip(&state.u).map(|(m, u)| m * u[0].abs()).sum();
    apply_bc(&mut s3, ctx.bc, t0 + dt)?;
    let report = StepReport {
        step: s3.step,
        t: s3.t(),
        dt,
        reductions: 0,
        min_convexity: r1.min_convexity.min(r2.min_convexity).min(r3.min_convexity),
        row_sum_defect: r1.row_sum_defect.max(r2.row_sum_defect).max(r3.row_sum_defect),
        total_before,
        total_after,
        conservation_defect: relative_defect(&total_before, &total_after, scale),
        entropy_max: None,
    };
    Ok((s3, report))
}

/// `U^{n+1}` from the non-conservative form
/// `mass^{n+1}(U_i^{n+1} - U_i^n)/dt = Σ_j ((U_j - U_i)⊗W_j - f(U_j))·c_ij + d_ij U_j`.
/// For version 2 `stencil` must be the time-averaged one.
pub fn nonconservative_update(
    state: &SolverState,
    w: &[Point],
    dt: f64,
    stencil: &StencilField,
    visc: &Viscosity,
    system: &dyn HyperbolicSystem,
    version: SchemeVersion,
) -> Result<Vec<Conserved>, SchemeError> {
    let mass_new = match version {
        SchemeVersion::V1 => v1_masses(state, w, dt, stencil),
        SchemeVersion::V2 => exact_masses(&state.mesh.displaced(w, dt))?,
    };
    let g = state.mesh.graph();
    let x = state.mesh.coords();
    let t = state.t();
    let nc = system.n_components();
    let fluxes: Vec<_> = (0..state.u.len()).map(|j| system.flux(&state.u[j], x[j], t)).collect();
    Ok((0..state.u.len())
        .map(|i| {
            let mut acc = [0.0; 4];
            for e in g.row(i) {
                let j = g.cols[e];
                let c = stencil.c[e];
                let wc = w[j][0] * c[0] + w[j][1] * c[1];
                for k in 0..nc {
                    let fc = fluxes[j][k][0] * c[0] + fluxes[j][k][1] * c[1];
                    acc[k] += (state.u[j][k] - state.u[i][k]) * wc - fc + visc.d[e] * state.u[j][k];
                }
            }
            let mut u = state.u[i];
            for k in 0..nc {
                u[k] += dt * acc[k] / mass_new[i];
            }
            u
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn residual(
    before: &SolverState,
    u_new: &[Conserved],
    mass_new: &[f64],
    st: &StencilField,
    visc: &Viscosity,
    w: &[Point],
    dt: f64,
    system: &dyn HyperbolicSystem,
    pair: EntropyKind,
) -> Vec<f64> {
    let g = before.mesh.graph();
    let x = before.mesh.coords();
    let t = before.t();
    let eq: Vec<(f64, Point)> = (0..before.u.len())
        .map(|j| {
            system
                .entropy(pair, &before.u[j], x[j], t)
                .unwrap_or((f64::NAN, [f64::NAN; 2]))
        })
        .collect();
    (0..before.u.len())
        .map(|i| {
            let eta_new = system.entropy(pair, &u_new[i], x[i], t).map_or(f64::NAN, |p| p.0);
            let mut r = (mass_new[i] * eta_new - before.mass[i] * eq[i].0) / dt;
            for e in g.row(i) {
                let j = g.cols[e];
                let c = st.c[e];
                let (eta, q) = eq[j];
                r += (q[0] - eta * w[j][0]) * c[0] + (q[1] - eta * w[j][1]) * c[1];
                r -= visc.d[e] * eta;
            }
            r
        })
        .collect()
}

/// Per-dof residual of the discrete entropy inequality of version 1:
/// `[𝔪^{n+1} η(U^{n+1}) - 𝔪^n η(U^n)]/dt + Σ_j (q_j - η_j W_j)·c_ij - Σ_j d_ij η_j`,
/// nonpositive on accepted steps.
#[allow(clippy::too_many_arguments)]
pub fn entropy_residual(
    before: &SolverState,
    after: &SolverState,
    stencil: &StencilField,
    visc: &Viscosity,
    w: &[Point],
    dt: f64,
    system: &dyn HyperbolicSystem,
    pair: EntropyKind,
) -> Vec<f64> {
    residual(before, &after.u, &after.mass, stencil, visc, w, dt, system, pair)
}

/// Rebuilds `U^{n+1}` as `(1 - Σ_{j≠i} 2 d_ij dt/𝔪_i) U_i + Σ_{j≠i} (dt/𝔪_i) 2 d_ij Ū_ij`
/// with `2 d_ij Ū_ij = (f_i - f_j - (U_i - U_j)⊗W_j)·c_ij + d_ij (U_i + U_j)`.
/// Returns the reconstruction and the smallest weight on `U_i`.
pub fn convex_reconstruction(
    state: &SolverState,
    w: &[Point],
    dt: f64,
    stencil: &StencilField,
    visc: &Viscosity,
    mass_new: &[f64],
    system: &dyn HyperbolicSystem,
) -> (Vec<Conserved>, f64) {
    let g = state.mesh.graph();
    let x = state.mesh.coords();
    let t = state.t();
    let nc = system.n_components();
    let fl: Vec<_> = (0..state.u.len()).map(|j| system.flux(&state.u[j], x[j], t)).collect();
    let mut min_coef = f64::INFINITY;
    let out = (0..state.u.len())
        .map(|i| {
            let coef = 1.0 + 2.0 * dt * visc.d[g.diag[i]] / mass_new[i];
            min_coef = min_coef.min(coef);
            let mut v = [0.0; 4];
            for k in 0..nc {
                v[k] = coef * state.u[i][k];
            }
            for e in g.row(i) {
                let j = g.cols[e];
                if j == i {
                    continue;
                }
                let c = stencil.c[e];
                let d = visc.d[e];
                for k in 0..nc {
                    let du = state.u[i][k] - state.u[j][k];
                    let two_d_ubar = (fl[i][k][0] - fl[j][k][0] - du * w[j][0]) * c[0]
                        + (fl[i][k][1] - fl[j][k][1] - du * w[j][1]) * c[1]
                        + d * (state.u[i][k] + state.u[j][k]);
                    v[k] += dt / mass_new[i] * two_d_ubar;
                }
            }
            v
        })
        .collect();
    (out, min_coef)
}

/// Masses at `t^{n+1}` implied by each scheme version.
pub fn masses_after(
    state: &SolverState,
    w: &[Point],
    dt: f64,
    stencil: &StencilField,
    version: SchemeVersion,
) -> Result<Vec<f64>, SchemeError> {
    Ok(match version {
        SchemeVersion::V1 => v1_masses(state, w, dt, stencil),
        SchemeVersion::V2 => exact_masses(&state.mesh.displaced(w, dt))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::ElementKind;
    use crate::scheme::BcTable;
    use crate::systems::{make_transport, scalar};

    fn periodic_line(n: usize, u: impl Fn(f64) -> f64) -> SolverState {
        let m = Mesh::periodic_interval(0.0, 1.0, n).unwrap();
        let vals = m.coords().iter().map(|p| scalar(u(p[0]))).collect();
        SolverState::new(m, vals).unwrap()
    }

    #[test]
    fn eulerian_transport_conserves_and_is_bounded() {
        let sys = make_transport([1.0, 0.0]);
        let bc = BcTable::periodic();
        let ctx = StepContext::new(&sys, &bc, ElementKind::Segment);
        let mut s = periodic_line(20, |x| if x < 0.5 { 1.0 } else { 0.0 });
        let w = vec![[0.0; 2]; 20];
        let total0 = s.totals()[0];
        for _ in 0..30 {
            let st = assemble_stencil(&s.mesh, &ctx.quad).unwrap();
            let (n, r) = euler_step_v1(&s, &w, 0.02, &st, &ctx).unwrap();
            assert!(r.min_convexity >= 0.0);
            s = n;
        }
        assert!((s.totals()[0] - total0).abs() <= 1e-13 * total0);
    }

    #[test]
    fn rigid_translation_v2_keeps_state() {
        // W = β: the translated flux vanishes and masses are translation invariant.
        let sys = make_transport([1.0, 0.0]);
        let bc = BcTable::none();
        let ctx = StepContext::new(&sys, &bc, ElementKind::Segment);
        let m = Mesh::interval(0.0, 2.0, 2).unwrap();
        let s = SolverState::new(m, vec![scalar(1.0), scalar(3.0), scalar(2.0)]).unwrap();
        let (n, _) = euler_step_v2(&s, &[[1.0, 0.0]; 3], 0.3, &ctx).unwrap();
        for (a, b) in n.u.iter().zip(&s.u) {
            assert!((a[0] - b[0]).abs() < 1e-15);
        }
        assert!((n.mesh.coords()[0][0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn w_zero_v1_and_v2_coincide() {
        let sys = make_transport([0.7, -0.2]);
        let bc = BcTable::periodic();
        let m = Mesh::periodic_rectangle([0.0, 0.0], [1.0, 1.0], 5, 4, ElementKind::Quadrilateral).unwrap();
        let vals = m.coords().iter().map(|p| scalar((6.0 * p[0]).sin() + p[1])).collect();
        let s = SolverState::new(m, vals).unwrap();
        let ctx = StepContext::new(&sys, &bc, ElementKind::Quadrilateral);
        let w = vec![[0.0; 2]; s.u.len()];
        let st = assemble_stencil(&s.mesh, &ctx.quad).unwrap();
        let (a, _) = euler_step_v1(&s, &w, 0.01, &st, &ctx).unwrap();
        let (b, _) = euler_step_v2(&s, &w, 0.01, &ctx).unwrap();
        for (x, y) in a.u.iter().zip(&b.u) {
            assert!((x[0] - y[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn oversized_step_is_rejected() {
        let sys = make_transport([1.0, 0.0]);
        let bc = BcTable::periodic();
        let ctx = StepContext::new(&sys, &bc, ElementKind::Segment);
        let s = periodic_line(10, |x| x);
        let st = assemble_stencil(&s.mesh, &ctx.quad).unwrap();
        let r = euler_step_v1(&s, &[[0.0; 2]; 10], 1.0, &st, &ctx);
        assert!(matches!(r, Err(StepError::Rejected(Rejection::Convexity { .. }))));
    }
}
