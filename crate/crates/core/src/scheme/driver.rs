use std::io::Write;

use super::step::{euler_step_v1_with, euler_step_v2, ssp_rk3_step, StepContext};
use super::viscosity::{compute_dij, estimate_dt};
use super::{Integrator, SchemeError, SchemeVersion, SolverState, SpeedReference, StepError, StepReport};
use crate::ale::{node_velocities, AleStrategy};
use crate::fem::assemble_stencil;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub version: SchemeVersion,
    pub integrator: Integrator,
    pub cfl: f64,
    pub dt_max: f64,
    pub final_time: f64,
    pub speed: SpeedReference,
    /// Consecutive halvings allowed before a step is a hard failure.
    pub max_reductions: usize,
    pub max_steps: Option<usize>,
    /// Prescribed step size. The wave-speed estimate is skipped, but
    /// rejected steps are still halved.
    pub fixed_dt: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            version: SchemeVersion::V1,
            integrator: Integrator::ForwardEuler,
            cfl: 0.5,
            dt_max: f64::INFINITY,
            final_time: 1.0,
            speed: SpeedReference::Shifted,
            max_reductions: 20,
            max_steps: None,
            fixed_dt: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SolverState,
    pub reports: Vec<StepReport>,
}

/// Advances `state` to `opts.final_time`.
///
/// Each step estimates `dt` from velocities built with the previously
/// accepted step size (or the step-independent proxy on the first step),
/// clips it at the final time, and halves it on every rejection.
pub fn run(
    mut state: SolverState,
    strategy: &AleStrategy,
    ctx: &StepContext<'_>,
    opts: &RunOptions,
) -> Result<RunOutcome, SchemeError> {
    if opts.version == SchemeVersion::V2 && opts.integrator == Integrator::SspRk3 {
        return Err(SchemeError::Config("SSP-RK3 is only available for version 1".into()));
    }
    if !(opts.cfl > 0.0) {
        return Err(SchemeError::Config(format!("cfl must be positive, got {}", opts.cfl)));
    }
    let system = ctx.system;
    let independent = strategy.is_step_independent();
    let t_end = opts.final_time;
    let t_tol = 1e-12 * t_end.abs().max(1.0);
    let mut reports = Vec::new();
    let mut dt_prev: Option<f64> = None;
    while t_end - state.t() > t_tol {
        if opts.max_steps.is_some_and(|m| reports.len() >= m) {
            break;
        }
        let t = state.t();
        let stencil = assemble_stencil(&state.mesh, &ctx.quad)?;
        let w_est = match (independent, dt_prev) {
            (true, _) => node_velocities(strategy, &state.mesh, &state.u, system, t, 1.0)?,
            (false, Some(d)) => node_velocities(strategy, &state.mesh, &state.u, system, t, d)?,
            (false, None) => strategy.velocity_proxy(&state.mesh, &state.u, system, t),
        };
        let visc = compute_dij(&state.mesh, &stencil, &state.u, &w_est, system, t, ctx.viscosity)?;
        let mut dt = match opts.fixed_dt {
            Some(d) => d.min(opts.dt_max),
            None => estimate_dt(&stencil, &visc, opts.cfl, opts.dt_max, opts.speed),
        };
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SchemeError::Config(format!("time step estimate {dt} at t = {t}")));
        }
        let remaining = t_end - t;
        if dt >= remaining {
            dt = remaining;
        }
        let mut reductions = 0;
        let (next, mut report) = loop {
            let attempt = match (opts.version, opts.integrator) {
                (SchemeVersion::V1, Integrator::ForwardEuler) => {
                    if independent {
                        euler_step_v1_with(&state, &w_est, dt, &stencil, &visc, ctx)
                    } else {
                        let w = node_velocities(strategy, &state.mesh, &state.u, system, t, dt)?;
                        let v = compute_dij(&state.mesh, &stencil, &state.u, &w, system, t, ctx.viscosity)?;
                        euler_step_v1_with(&state, &w, dt, &stencil, &v, ctx)
                    }
                }
                (SchemeVersion::V2, _) => {
                    let w = if independent {
                        w_est.clone()
                    } else {
                        node_velocities(strategy, &state.mesh, &state.u, system, t, dt)?
                    };
                    euler_step_v2(&state, &w, dt, ctx)
                }
                (SchemeVersion::V1, Integrator::SspRk3) => {
                    let first = independent.then_some((w_est.as_slice(), &stencil, &visc));
                    ssp_rk3_step(&state, strategy, dt, ctx, first)
                }
            };
            match attempt {
                Ok(r) => break r,
                Err(StepError::Failed(e)) => return Err(e),
                Err(StepError::Rejected(why)) => {
                    reductions += 1;
                    if reductions > opts.max_reductions {
                        return Err(SchemeError::TooManyReductions {
                            t,
                            reductions: opts.max_reductions,
                            last: why,
                        });
                    }
                    log::debug!("t = {t}: rejected dt = {dt:e} ({why}), halving");
                    dt *= 0.5;
                }
            }
        };
        report.reductions = reductions;
        log::trace!(
            "step {} t = {:.6} dt = {:.3e} convexity = {:.3e}",
            report.step,
            report.t,
            report.dt,
            report.min_convexity
        );
        dt_prev = Some(dt);
        state = next;
        reports.push(report);
    }
    Ok(RunOutcome { state, reports })
}

/// Writes step reports as CSV with columns
/// `n,t,dt,reductions,min_convexity,conservation_defect,entropy_max`.
pub fn write_reports_csv<W: Write>(out: W, reports: &[StepReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "t",
        "dt",
        "reductions",
        "min_convexity",
        "conservation_defect",
        "entropy_max",
    ])?;
    for r in reports {
        w.write_record([
            r.step.to_string(),
            format!("{:e}", r.t),
            format!("{:e}", r.dt),
            r.reductions.to_string(),
            format!("{:e}", r.min_convexity),
            format!("{:e}", r.conservation_defect),
            r.entropy_max.map(|v| format!("{v:e}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
