//! Randomized property suites for the stability and consistency results the
//! scheme is built on. Each suite returns a [`SuiteResult`]; the command-line
//! `check` subcommand and the acceptance tests both run them.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ale::{AleMode, AleStrategy};
use crate::fem::{
    assemble_stencil, gcl_defect, liouville_residual, temporal_stencil, ElementKind, Mesh, Point, QuadratureRule,
    StencilField, TemporalRule,
};
use crate::scheme::{
    compute_dij, convex_reconstruction, entropy_residual, estimate_dt, euler_step_v1, euler_step_v2, masses_after,
    nonconservative_update, run, ssp_rk3_step, BcTable, Integrator, RunOptions, SchemeVersion, SolverState,
    SpeedReference, StepContext, StepError, StepReport, Viscosity,
};
use crate::systems::{
    euler_wave_speeds, make_burgers_2d, make_euler, make_kpp, make_transport, scalar, Conserved, EntropyKind,
    EulerPrimitive, HyperbolicSystem,
};

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Rand = ChaCha8Rng;

const SCALAR_SLACK: f64 = 1e-12;

/// The four systems exercised by the suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sys {
    Transport,
    Burgers,
    Kpp,
    Euler,
}

const SYSTEMS: [Sys; 4] = [Sys::Transport, Sys::Burgers, Sys::Kpp, Sys::Euler];

fn system(s: Sys) -> Box<dyn HyperbolicSystem> {
    match s {
        Sys::Transport => Box::new(make_transport([0.8, -0.6])),
        Sys::Burgers => Box::new(make_burgers_2d()),
        Sys::Kpp => Box::new(make_kpp()),
        Sys::Euler => Box::new(make_euler(1.4, 2).expect("valid gamma")),
    }
}

fn random_state(rng: &mut Rand, s: Sys) -> Conserved {
    match s {
        Sys::Transport | Sys::Burgers => scalar(rng.gen_range(-1.0..1.0)),
        Sys::Kpp => scalar(rng.gen_range(0.0..4.0 * PI)),
        Sys::Euler => random_euler(rng, 1.4),
    }
}

fn random_euler(rng: &mut Rand, gamma: f64) -> Conserved {
    let w = EulerPrimitive::new(
        rng.gen_range(0.2..2.0),
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        rng.gen_range(0.2..2.0),
    );
    make_euler(gamma, 2).expect("valid gamma").to_conserved(&w)
}

/// Smooth state field with one or two jumps so that both smooth and
/// discontinuous regimes appear.
fn random_field(rng: &mut Rand, s: Sys, mesh: &Mesh) -> Vec<Conserved> {
    let a = random_state(rng, s);
    let b = random_state(rng, s);
    let k = rng.gen_range(1..3) as f64;
    let cut = rng.gen_range(0.2..0.8);
    let rough = rng.gen_bool(0.3);
    mesh.coords()
        .iter()
        .map(|p| {
            if rough {
                return random_state(rng, s);
            }
            let th = 0.5 + 0.5 * (2.0 * PI * k * (p[0] + 0.5 * p[1])).sin();
            let base = if p[0] < cut { a } else { b };
            let other = if p[0] < cut { b } else { a };
            let mut u = [0.0; 4];
            for c in 0..4 {
                u[c] = base[c] + 0.3 * th * (other[c] - base[c]);
            }
            u
        })
        .collect()
}

/// Random P1 or Q1 mesh on the unit square (1D segments occasionally),
/// periodic or not, with interior nodes jittered.
fn random_mesh(rng: &mut Rand, allow_1d: bool) -> Mesh {
    let periodic = rng.gen_bool(0.5);
    if allow_1d && rng.gen_bool(0.15) {
        let n = rng.gen_range(5..12);
        let mesh = if periodic {
            Mesh::periodic_interval(0.0, 1.0, n).expect("valid interval")
        } else {
            Mesh::interval(0.0, 1.0, n).expect("valid interval")
        };
        return jitter(rng, &mesh, 1.0 / n as f64, 1.0 / n as f64);
    }
    let kind = if rng.gen_bool(0.5) {
        ElementKind::Triangle
    } else {
        ElementKind::Quadrilateral
    };
    let nx = rng.gen_range(3..7);
    let ny = rng.gen_range(3..7);
    let mesh = if periodic {
        Mesh::periodic_rectangle([0.0, 0.0], [1.0, 1.0], nx, ny, kind).expect("valid mesh")
    } else {
        Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], nx, ny, kind).expect("valid mesh")
    };
    jitter(rng, &mesh, 1.0 / nx as f64, 1.0 / ny as f64)
}

fn jitter(rng: &mut Rand, mesh: &Mesh, hx: f64, hy: f64) -> Mesh {
    let two_d = mesh.dim() == 2;
    let coords = mesh
        .coords()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if mesh.is_boundary(i) {
                return *p;
            }
            let dy = if two_d {
                0.15 * hy * rng.gen_range(-1.0..1.0)
            } else {
                0.0
            };
            [p[0] + 0.15 * hx * rng.gen_range(-1.0..1.0), p[1] + dy]
        })
        .collect();
    mesh.with_coords(coords, 0.0)
}

/// Smooth periodic velocity field plus optional nodal noise; zero `y`
/// component in 1D.
fn random_velocity(rng: &mut Rand, mesh: &Mesh) -> Vec<Point> {
    let amp = rng.gen_range(0.0..1.0);
    let k = [rng.gen_range(1..3) as f64, rng.gen_range(1..3) as f64];
    let phase = [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)];
    let drift = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
    let noise = if rng.gen_bool(0.3) { 0.2 * amp } else { 0.0 };
    let two_d = mesh.dim() == 2;
    mesh.coords()
        .iter()
        .map(|p| {
            let s = (2.0 * PI * (k[0] * p[0] + k[1] * p[1]) + phase[0]).sin();
            let c = (2.0 * PI * (k[1] * p[0] - k[0] * p[1]) + phase[1]).cos();
            let w = [
                drift[0] + amp * s + noise * rng.gen_range(-1.0..1.0),
                drift[1] + amp * c + noise * rng.gen_range(-1.0..1.0),
            ];
            if two_d {
                w
            } else {
                [w[0], 0.0]
            }
        })
        .collect()
}

/// Step size that keeps the motion mild: a fraction of the smallest cell
/// size over the largest velocity.
fn motion_dt(mesh: &Mesh, w: &[Point]) -> f64 {
    let st = assemble_stencil(mesh, &QuadratureRule::default_for(mesh.kind())).expect("valid mesh");
    let h = st.h_min.iter().copied().fold(f64::INFINITY, f64::min);
    let v = w.iter().map(|p| p[0].hypot(p[1])).fold(1e-12, f64::max);
    0.1 * h / v
}

struct Trial {
    before: SolverState,
    after: SolverState,
    report: StepReport,
    w: Vec<Point>,
    dt: f64,
    stencil: StencilField,
    visc: Viscosity,
}

/// One accepted forward-Euler step of `version`, halving `dt` on rejection.
fn accepted_step(
    state: &SolverState,
    w: &[Point],
    mut dt: f64,
    version: SchemeVersion,
    ctx: &StepContext<'_>,
) -> Result<Trial, String> {
    let quad = &ctx.quad;
    for _ in 0..40 {
        let (stencil, attempt) = match version {
            SchemeVersion::V1 => {
                let st = assemble_stencil(&state.mesh, quad).map_err(|e| e.to_string())?;
                let r = euler_step_v1(state, w, dt, &st, ctx);
                (Some(st), r)
            }
            SchemeVersion::V2 => (None, euler_step_v2(state, w, dt, ctx)),
        };
        match attempt {
            Ok((after, report)) => {
                let stencil = match stencil {
                    Some(s) => s,
                    None => temporal_stencil(&state.mesh, w, dt, quad, &ctx.temporal).map_err(|e| e.to_string())?,
                };
                let visc = compute_dij(&state.mesh, &stencil, &state.u, w, ctx.system, state.t(), ctx.viscosity)
                    .map_err(|e| e.to_string())?;
                return Ok(Trial {
                    before: state.clone(),
                    after,
                    report,
                    w: w.to_vec(),
                    dt,
                    stencil,
                    visc,
                });
            }
            Err(StepError::Rejected(_)) => dt *= 0.5,
            Err(StepError::Failed(e)) => return Err(e.to_string()),
        }
    }
    Err("step rejected 40 times".into())
}

/// Step size from the invariant-domain bound for the given velocity.
fn cfl_dt(state: &SolverState, w: &[Point], ctx: &StepContext<'_>, cfl: f64) -> f64 {
    let st = assemble_stencil(&state.mesh, &ctx.quad).expect("valid mesh");
    let v = compute_dij(&state.mesh, &st, &state.u, w, ctx.system, state.t(), true).expect("finite speeds");
    estimate_dt(&st, &v, cfl, 1.0, SpeedReference::ShiftedOrEulerian).min(4.0 * motion_dt(&state.mesh, w))
}

fn max_abs(u: &[Conserved], nc: usize) -> f64 {
    u.iter()
        .flat_map(|v| v[..nc].iter())
        .fold(0.0_f64, |a, b| a.max(b.abs()))
}

fn max_diff(a: &[Conserved], b: &[Conserved], nc: usize) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (0..nc).map(move |k| (x[k] - y[k]).abs()))
        .fold(0.0, f64::max)
}

/// Local bounds for scalars, positivity for Euler, on 200 random single steps
/// of both versions; every step also reproduces the convex-combination form.
pub fn invariant_domain_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut rng = Rand::seed_from_u64(seed);
    let bc = BcTable::none();
    let mut violations = 0;
    let mut worst_recon: f64 = 0.0;
    let mut min_coef = f64::INFINITY;
    let mut errors = Vec::new();
    for t in 0..trials {
        let s = SYSTEMS[t % 4];
        let version = if (t / 4) % 2 == 0 {
            SchemeVersion::V1
        } else {
            SchemeVersion::V2
        };
        let sys = system(s);
        let mesh = random_mesh(&mut rng, true);
        let u = random_field(&mut rng, s, &mesh);
        let state = SolverState::new(mesh, u).expect("valid mesh");
        let w = random_velocity(&mut rng, &state.mesh);
        let mut ctx = StepContext::new(sys.as_ref(), &bc, state.mesh.kind());
        ctx.check_invariants = false;
        let dt = cfl_dt(&state, &w, &ctx, rng.gen_range(0.3..1.0));
        let trial = match accepted_step(&state, &w, dt, version, &ctx) {
            Ok(r) => r,
            Err(e) => {
                errors.push(format!("trial {t}: {e}"));
                continue;
            }
        };
        let g = trial.before.mesh.graph();
        for i in 0..trial.after.u.len() {
            let ok = if sys.is_scalar() {
                let (lo, hi) = g
                    .row(i)
                    .map(|k| trial.before.u[g.cols[k]][0])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
                let v = trial.after.u[i][0];
                v >= lo - SCALAR_SLACK && v <= hi + SCALAR_SLACK
            } else {
                let e = make_euler(1.4, 2).expect("valid gamma");
                trial.after.u[i][0] > 0.0 && e.internal_energy(&trial.after.u[i]) > 0.0
            };
            if !ok {
                violations += 1;
            }
        }
        let mass_new = masses_after(&trial.before, &trial.w, trial.dt, &trial.stencil, version).expect("valid mesh");
        let (recon, coef) = convex_reconstruction(
            &trial.before,
            &trial.w,
            trial.dt,
            &trial.stencil,
            &trial.visc,
            &mass_new,
            sys.as_ref(),
        );
        let nc = sys.n_components();
        let scale = max_abs(&trial.after.u, nc).max(1.0);
        worst_recon = worst_recon.max(max_diff(&recon, &trial.after.u, nc) / scale);
        min_coef = min_coef.min(coef).min(trial.report.min_convexity);
    }
    let passed = violations == 0 && errors.is_empty() && worst_recon <= 1e-12 && min_coef >= 0.0;
    SuiteResult {
        name: "invariant domain",
        passed,
        detail: format!(
            "{trials} steps, {violations} violations, min convexity {min_coef:.3e}, \
             reconstruction defect {worst_recon:.2e}{}",
            first_error(&errors)
        ),
    }
}

fn first_error(errors: &[String]) -> String {
    errors
        .first()
        .map(|e| format!(", {} failures, first: {e}", errors.len()))
        .unwrap_or_default()
}

/// Periodic scalar and Euler runs of 100 steps with moving meshes; the total
/// of `mass·U` must be preserved.
pub fn conservation_suite(seed: u64, steps: usize) -> SuiteResult {
    let mut rng = Rand::seed_from_u64(seed);
    let bc = BcTable::periodic();
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    let mut runs = 0;
    for s in [Sys::Burgers, Sys::Kpp, Sys::Euler] {
        for version in [SchemeVersion::V1, SchemeVersion::V2] {
            for kind in [ElementKind::Triangle, ElementKind::Quadrilateral] {
                let sys = system(s);
                let mesh = Mesh::periodic_rectangle([0.0, 0.0], [1.0, 1.0], 8, 8, kind).expect("valid mesh");
                let mesh = jitter(&mut rng, &mesh, 0.125, 0.125);
                let phase = rng.gen_range(0.0..2.0 * PI);
                let u: Vec<Conserved> = mesh
                    .coords()
                    .iter()
                    .map(|p| {
                        let th = (2.0 * PI * p[0] + phase).sin() * (2.0 * PI * p[1]).cos();
                        match s {
                            Sys::Euler => make_euler(1.4, 2)
                                .expect("valid gamma")
                                .to_conserved(&EulerPrimitive::new(
                                    1.0 + 0.3 * th,
                                    [0.3 * th, -0.2 * th],
                                    1.0 + 0.2 * th,
                                )),
                            Sys::Kpp => scalar(PI + 2.0 * th),
                            _ => scalar(1.0 + 0.5 * th),
                        }
                    })
                    .collect();
                let state = SolverState::new(mesh, u).expect("valid mesh");
                let total0 = state.totals();
                let norm0 = total0.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
                let ctx = StepContext::new(sys.as_ref(), &bc, kind);
                let opts = RunOptions {
                    version,
                    integrator: Integrator::ForwardEuler,
                    cfl: 0.5,
                    final_time: 1e3,
                    max_steps: Some(steps),
                    ..RunOptions::default()
                };
                match run(state, &AleStrategy::smoothed_default(), &ctx, &opts) {
                    Ok(out) => {
                        runs += 1;
                        let total = out.state.totals();
                        let drift = total
                            .iter()
                            .zip(&total0)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        let per_step = out.reports.iter().map(|r| r.conservation_defect).fold(0.0, f64::max);
                        worst = worst.max(drift / norm0).max(per_step);
                        if out.reports.len() != steps {
                            errors.push(format!("{s:?} {version:?}: only {} steps", out.reports.len()));
                        }
                    }
                    Err(e) => errors.push(format!("{s:?} {version:?} {kind:?}: {e}")),
                }
            }
        }
    }
    SuiteResult {
        name: "conservation",
        passed: errors.is_empty() && worst <= 1e-12,
        detail: format!(
            "{runs} periodic runs of {steps} steps, max relative defect {worst:.2e}{}",
            first_error(&errors)
        ),
    }
}

/// Constant states are fixed points of both versions and of SSP-RK3 under
/// random mesh motion.
pub fn dgcl_suite(seed: u64, motions: usize) -> SuiteResult {
    let mut rng = Rand::seed_from_u64(seed);
    let bc = BcTable::none();
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for t in 0..motions {
        let s = SYSTEMS[t % 4];
        let sys = system(s);
        let mesh = random_mesh(&mut rng, true);
        let c = random_state(&mut rng, s);
        let state = SolverState::new(mesh.clone(), vec![c; mesh.n_nodes()]).expect("valid mesh");
        let w = random_velocity(&mut rng, &mesh);
        let ctx = StepContext::new(sys.as_ref(), &bc, mesh.kind());
        let dt = cfl_dt(&state, &w, &ctx, 0.5);
        let nc = sys.n_components();
        let scale = max_abs(&state.u, nc).max(1.0);
        for version in [SchemeVersion::V1, SchemeVersion::V2] {
            match accepted_step(&state, &w, dt, version, &ctx) {
                Ok(tr) => worst = worst.max(max_diff(&tr.after.u, &state.u, nc) / scale),
                Err(e) => errors.push(format!("motion {t} {version:?}: {e}")),
            }
        }
        let field = {
            let w0 = w.clone();
            let pts: Vec<Point> = mesh.coords().to_vec();
            // nodal velocities extended to a space-time field by nearest node lookup
            Arc::new(move |x: Point, tt: f64| {
                let (mut best, mut d) = (0, f64::INFINITY);
                for (i, p) in pts.iter().enumerate() {
                    let e = (p[0] - x[0]).hypot(p[1] - x[1]);
                    if e < d {
                        d = e;
                        best = i;
                    }
                }
                let s = 1.0 + 0.5 * tt;
                [w0[best][0] * s, w0[best][1] * s]
            })
        };
        let strategy = AleStrategy::new(AleMode::Analytic(field)).expect("valid mode");
        let mut h = dt;
        let mut done = false;
        for _ in 0..40 {
            match ssp_rk3_step(&state, &strategy, h, &ctx, None) {
                Ok((after, _)) => {
                    worst = worst.max(max_diff(&after.u, &state.u, nc) / scale);
                    done = true;
                    break;
                }
                Err(StepError::Rejected(_)) => h *= 0.5,
                Err(StepError::Failed(e)) => {
                    errors.push(format!("motion {t} ssp: {e}"));
                    done = true;
                    break;
                }
            }
        }
        if !done {
            errors.push(format!("motion {t} ssp: rejected 40 times"));
        }
    }
    SuiteResult {
        name: "DGCL",
        passed: errors.is_empty() && worst <= 1e-14,
        detail: format!(
            "{motions} motions x 3 steppers, max deviation {worst:.2e}{}",
            first_error(&errors)
        ),
    }
}

/// Conservative and non-conservative updates agree on random instances.
pub fn equivalence_suite(seed: u64, instances: usize) -> SuiteResult {
    let mut rng = Rand::seed_from_u64(seed);
    let bc = BcTable::none();
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for t in 0..instances {
        let s = SYSTEMS[t % 4];
        let version = if (t / 4) % 2 == 0 {
            SchemeVersion::V1
        } else {
            SchemeVersion::V2
        };
        let sys = system(s);
        let mesh = random_mesh(&mut rng, true);
        let u = random_field(&mut rng, s, &mesh);
        let state = SolverState::new(mesh, u).expect("valid mesh");
        let w = random_velocity(&mut rng, &state.mesh);
        let mut ctx = StepContext::new(sys.as_ref(), &bc, state.mesh.kind());
        ctx.check_invariants = false;
        let dt = cfl_dt(&state, &w, &ctx, 0.9);
        match accepted_step(&state, &w, dt, version, &ctx) {
            Ok(tr) => {
                let nc = sys.n_components();
                match nonconservative_update(&tr.before, &tr.w, tr.dt, &tr.stencil, &tr.visc, sys.as_ref(), version) {
                    Ok(alt) => {
                        let scale = max_abs(&tr.after.u, nc).max(1e-300);
                        worst = worst.max(max_diff(&alt, &tr.after.u, nc) / scale);
                    }
                    Err(e) => errors.push(format!("instance {t}: {e}")),
                }
            }
            Err(e) => errors.push(format!("instance {t}: {e}")),
        }
    }
    SuiteResult {
        name: "form equivalence",
        passed: errors.is_empty() && worst <= 1e-12,
        detail: format!(
            "{instances} instances, max relative difference {worst:.2e}{}",
            first_error(&errors)
        ),
    }
}

/// Mass identity on random moving P1/Q1 meshes and first-order decay of the
/// Liouville residual.
pub fn gcl_suite(seed: u64, meshes: usize) -> SuiteResult {
    let mut rng = Rand::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for t in 0..meshes {
        let mesh = random_mesh(&mut rng, true);
        let w = random_velocity(&mut rng, &mesh);
        let dt = 2.0 * motion_dt(&mesh, &w);
        match gcl_defect(&mesh, &w, dt, &TemporalRule::midpoint()) {
            Ok(d) => worst = worst.max(d),
            Err(e) => errors.push(format!("mesh {t}: {e}")),
        }
    }
    let mut ratios = Vec::new();
    for kind in [ElementKind::Triangle, ElementKind::Quadrilateral] {
        let mesh = Mesh::uniform_rectangle([0.0, 0.0], [1.0, 1.0], 6, 6, kind).expect("valid mesh");
        let w: Vec<Point> = mesh
            .coords()
            .iter()
            .map(|p| [(PI * p[1]).sin() * p[0] + p[0] * p[0], p[0] * p[1] - 0.5 * p[1] * p[1]])
            .collect();
        let probes: Vec<f64> = (0..4).map(|k| 0.02 / f64::powi(2.0, k)).collect();
        let res: Vec<f64> = match probes.iter().map(|&d| liouville_residual(&mesh, &w, d)).collect() {
            Ok(r) => r,
            Err(e) => {
                errors.push(format!("liouville {kind:?}: {e}"));
                continue;
            }
        };
        ratios.extend(res.windows(2).map(|p| p[0] / p[1]));
    }
    let ratios_ok = !ratios.is_empty() && ratios.iter().all(|r| (1.7..=2.3).contains(r));
    SuiteResult {
        name: "GCL and Liouville",
        passed: errors.is_empty() && worst <= 1e-11 && ratios_ok,
        detail: format!(
            "{meshes} meshes, max mass-identity defect {worst:.2e}, residual ratios {:?}{}",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            first_error(&errors)
        ),
    }
}

/// Discrete entropy inequality with the square entropy on random scalar
/// version-1 steps.
pub fn entropy_suite(seed: u64, steps: usize) -> SuiteResult {
    let mut rng = Rand::seed_from_u64(seed);
    let bc = BcTable::none();
    let mut worst = f64::NEG_INFINITY;
    let mut errors = Vec::new();
    for t in 0..steps {
        let s = [Sys::Transport, Sys::Burgers, Sys::Kpp][t % 3];
        let sys = system(s);
        let mesh = random_mesh(&mut rng, true);
        let u = random_field(&mut rng, s, &mesh);
        let state = SolverState::new(mesh, u).expect("valid mesh");
        let w = random_velocity(&mut rng, &state.mesh);
        let mut ctx = StepContext::new(sys.as_ref(), &bc, state.mesh.kind());
        ctx.check_invariants = false;
        let dt = cfl_dt(&state, &w, &ctx, rng.gen_range(0.3..1.0));
        match accepted_step(&state, &w, dt, SchemeVersion::V1, &ctx) {
            Ok(tr) => {
                let r = entropy_residual(
                    &tr.before,
                    &tr.after,
                    &tr.stencil,
                    &tr.visc,
                    &tr.w,
                    tr.dt,
                    sys.as_ref(),
                    EntropyKind::Square,
                );
                worst = r.into_iter().fold(worst, f64::max);
            }
            Err(e) => errors.push(format!("step {t}: {e}")),
        }
    }
    SuiteResult {
        name: "entropy inequality",
        passed: errors.is_empty() && worst <= 1e-12,
        detail: format!("{steps} steps, max residual {worst:.2e}{}", first_error(&errors)),
    }
}

/// Leftmost and rightmost wave speeds of the exact Riemann solution along a
/// unit direction, found by bisection on the pressure function and
/// Rankine-Hugoniot shock speeds. `None` for vacuum.
pub fn riemann_fan_oracle(l: &EulerPrimitive, r: &EulerPrimitive, n: Point, gamma: f64) -> (f64, f64) {
    let ul = l.u[0] * n[0] + l.u[1] * n[1];
    let ur = r.u[0] * n[0] + r.u[1] * n[1];
    let (cl, cr) = (l.sound_speed(gamma), r.sound_speed(gamma));
    let branch = |p: f64, k: &EulerPrimitive, c: f64| {
        if p > k.p {
            let a = 2.0 / ((gamma + 1.0) * k.rho);
            let b = (gamma - 1.0) / (gamma + 1.0) * k.p;
            (p - k.p) * (a / (p + b)).sqrt()
        } else {
            2.0 * c / (gamma - 1.0) * ((p / k.p).powf((gamma - 1.0) / (2.0 * gamma)) - 1.0)
        }
    };
    let f = |p: f64| branch(p, l, cl) + branch(p, r, cr) + ur - ul;
    if f(0.0) >= 0.0 {
        // vacuum: the fan is bounded by the two rarefaction heads
        return (ul - cl, ur + cr);
    }
    let (mut lo, mut hi) = (0.0, l.p.max(r.p));
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let ps = 0.5 * (lo + hi);
    let us = 0.5 * (ul + ur) + 0.5 * (branch(ps, r, cr) - branch(ps, l, cl));
    let hugoniot_density = |k: &EulerPrimitive| {
        let g = (gamma - 1.0) / (gamma + 1.0);
        k.rho * (ps / k.p + g) / (g * ps / k.p + 1.0)
    };
    let left = if ps > l.p {
        // mass conservation across the shock: ρ_L (u_L - S) = ρ* (u* - S)
        let rs = hugoniot_density(l);
        (rs * us - l.rho * ul) / (rs - l.rho)
    } else {
        ul - cl
    };
    let right = if ps > r.p {
        let rs = hugoniot_density(r);
        (rs * us - r.rho * ur) / (rs - r.rho)
    } else {
        ur + cr
    };
    (left, right)
}

fn log_uniform(rng: &mut Rand, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo..hi))
}

/// Guaranteed-bound property of the wave-speed estimators against
/// brute-force references.
pub fn wave_speed_suite(seed: u64, pairs: usize) -> SuiteResult {
    let mut rng = Rand::seed_from_u64(seed);
    let mut euler_fail = 0;
    let mut slack = f64::INFINITY;
    for _ in 0..pairs {
        let gamma = match rng.gen_range(0..3) {
            0 => 1.4,
            1 => 5.0 / 3.0,
            _ => rng.gen_range(1.05..3.0),
        };
        let mut prim = || {
            EulerPrimitive::new(
                log_uniform(&mut rng, -3.0, 1.0),
                [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)],
                log_uniform(&mut rng, -3.0, 1.0),
            )
        };
        let (l, r) = (prim(), prim());
        let th = rng.gen_range(0.0..2.0 * PI);
        let n = [th.cos(), th.sin()];
        let (ll, lr) = euler_wave_speeds(n, &l, &r, gamma);
        let (ol, or) = riemann_fan_oracle(&l, &r, n, gamma);
        let tol = 1e-8 * (1.0 + ol.abs().max(or.abs()));
        if !(ll <= ol + tol && lr >= or - tol) {
            euler_fail += 1;
        }
        slack = slack.min(ol - ll).min(lr - or);
    }
    let mut scalar_fail = 0;
    let scalars: [Box<dyn HyperbolicSystem>; 3] = [
        Box::new(make_transport([0.8, -0.6])),
        Box::new(make_burgers_2d()),
        Box::new(make_kpp()),
    ];
    let derivs: [fn(f64, Point) -> f64; 3] = [
        |_, n| 0.8 * n[0] - 0.6 * n[1],
        |s, n| s * (n[0] + n[1]),
        |s, n| s.cos() * n[0] - s.sin() * n[1],
    ];
    for (sys, fp) in scalars.iter().zip(derivs) {
        for _ in 0..pairs {
            let (a, b) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            let th = rng.gen_range(0.0..2.0 * PI);
            let n = [th.cos(), th.sin()];
            let bound = sys.max_speed(n, &scalar(a), &scalar(b), [0.0; 2], [0.0; 2], 0.0);
            let sampled = (0..100)
                .map(|k| fp(a + (b - a) * k as f64 / 99.0, n).abs())
                .fold(0.0, f64::max);
            if bound < sampled - 1e-12 {
                scalar_fail += 1;
            }
        }
    }
    SuiteResult {
        name: "wave speeds",
        passed: euler_fail == 0 && scalar_fail == 0,
        detail: format!(
            "{pairs} Euler pairs ({euler_fail} failures, min margin {slack:.2e}), \
             {} scalar samples ({scalar_fail} failures)",
            3 * pairs
        ),
    }
}

/// All suites with their default sizes.
pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    vec![
        invariant_domain_suite(seed, 200),
        conservation_suite(seed.wrapping_add(1), 100),
        dgcl_suite(seed.wrapping_add(2), 50),
        equivalence_suite(seed.wrapping_add(3), 100),
        gcl_suite(seed.wrapping_add(4), 40),
        entropy_suite(seed.wrapping_add(5), 100),
        wave_speed_suite(seed.wrapping_add(6), 10_000),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_reproduces_sod_shock() {
        let l = EulerPrimitive::new(1.0, [0.0, 0.0], 1.0);
        let r = EulerPrimitive::new(0.125, [0.0, 0.0], 0.1);
        let (a, b) = riemann_fan_oracle(&l, &r, [1.0, 0.0], 1.4);
        assert!((a + 1.4f64.sqrt()).abs() < 1e-12);
        assert!((b - 1.7522).abs() < 1e-4);
    }

    #[test]
    fn small_suites_pass() {
        for r in [
            invariant_domain_suite(7, 16),
            dgcl_suite(7, 8),
            equivalence_suite(7, 16),
            entropy_suite(7, 12),
            wave_speed_suite(7, 500),
        ] {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
