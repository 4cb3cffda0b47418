use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::exact::{
    exact_burgers, exact_noh_density, exact_rotation, exact_sod, noh_outer_state, rotation_beta, rotation_initial,
    sod_left, sod_right,
};
use super::norms::{error_norms, rate};
use super::HarnessError;
use crate::ale::{AleMode, AleStrategy, BoundaryMotion};
use crate::fem::{assemble_stencil, BoundaryTag, ElementKind, Mesh, Point};
use crate::scheme::{
    compute_dij, run, BcTable, BoundaryCondition, Integrator, RunOptions, RunOutcome, SchemeVersion, SolverState,
    SpeedReference, StepContext,
};
use crate::systems::{
    make_burgers_2d, make_euler, make_kpp, make_transport_field, scalar, Conserved, EulerPrimitive, HyperbolicSystem,
    SystemRef,
};

const GAMMA_SOD: f64 = 1.4;
const GAMMA_NOH: f64 = 5.0 / 3.0;
/// Tolerance of the characteristic oracle for the rotation problem.
const ROTATION_ODE_TOL: f64 = 1e-12;
/// Gauss points per direction for error integrals.
const NORM_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Rotation,
    Burgers2d,
    Kpp,
    Sod,
    Noh,
}

impl Problem {
    pub const ALL: [Problem; 5] = [
        Problem::Rotation,
        Problem::Burgers2d,
        Problem::Kpp,
        Problem::Sod,
        Problem::Noh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Rotation => "rotation",
            Problem::Burgers2d => "burgers2d",
            Problem::Kpp => "kpp",
            Problem::Sod => "sod",
            Problem::Noh => "noh",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Problem {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Problem::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown problem '{s}'")))
    }
}

/// One benchmark configuration; `level` selects the mesh resolution.
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub problem: Problem,
    pub kind: ElementKind,
    pub version: SchemeVersion,
    pub integrator: Integrator,
    pub cfl: f64,
    pub final_time: f64,
    pub viscosity: bool,
    pub speed: SpeedReference,
    pub ale: AleStrategy,
    /// Noh only: four-quadrant mesh with 1:2 cell size jumps.
    pub nonuniform: bool,
    pub check_invariants: bool,
    /// Use equal steps of at most `cfl` times the Courant step of the initial
    /// mesh. Under Lagrangian motion the translated speeds are `O(h)` and the
    /// rotation field stops at `t = 1/4`, so the adaptive estimate would not
    /// refine the step with the mesh.
    pub uniform_dt: bool,
}

impl BenchmarkSpec {
    /// Standard setup of each benchmark, with Q1 elements.
    pub fn standard(problem: Problem) -> Self {
        let smoothed = AleStrategy::smoothed_default();
        let (integrator, cfl, final_time, speed, ale) = match problem {
            // W = β at the nodes; β·n = 0 on the boundary so it slides by itself.
            Problem::Rotation => (
                Integrator::SspRk3,
                1.0,
                0.5,
                SpeedReference::Shifted,
                AleStrategy::new(AleMode::Analytic(Arc::new(rotation_beta))).expect("valid mode"),
            ),
            Problem::Burgers2d => (
                Integrator::ForwardEuler,
                0.1,
                1.0,
                SpeedReference::Shifted,
                smoothed.with_all_boundaries(BoundaryMotion::Fixed),
            ),
            // The outer boundary is advected with the background velocity.
            Problem::Kpp => (
                Integrator::ForwardEuler,
                0.1,
                1.0,
                SpeedReference::Shifted,
                smoothed.with_all_boundaries(BoundaryMotion::Free),
            ),
            Problem::Sod => (
                Integrator::ForwardEuler,
                0.1,
                0.2,
                SpeedReference::Shifted,
                smoothed
                    .with_boundary(BoundaryTag::Bottom, BoundaryMotion::Slide)
                    .with_boundary(BoundaryTag::Top, BoundaryMotion::Slide)
                    .with_boundary(BoundaryTag::Left, BoundaryMotion::Fixed)
                    .with_boundary(BoundaryTag::Right, BoundaryMotion::Fixed),
            ),
            // The boundary moves radially inwards with unit speed.
            Problem::Noh => (
                Integrator::ForwardEuler,
                0.2,
                0.6,
                SpeedReference::Shifted,
                smoothed.with_all_boundaries(BoundaryMotion::Prescribed(Arc::new(|x: Point, _t| {
                    let r = x[0].hypot(x[1]);
                    [-x[0] / r, -x[1] / r]
                }))),
            ),
        };
        Self {
            problem,
            kind: ElementKind::Quadrilateral,
            version: SchemeVersion::V1,
            integrator,
            cfl,
            final_time,
            viscosity: true,
            speed,
            ale,
            nonuniform: false,
            check_invariants: true,
            uniform_dt: problem == Problem::Rotation,
        }
    }

    pub fn with_kind(mut self, kind: ElementKind) -> Self {
        self.kind = kind;
        self
    }

    /// Cells per direction at `level`.
    pub fn cells(&self, level: usize) -> (usize, usize) {
        let s = 1usize << level;
        match self.problem {
            Problem::Rotation | Problem::Burgers2d | Problem::Kpp => (8 * s, 8 * s),
            Problem::Sod => (20 * s, 4),
            Problem::Noh if self.nonuniform => (96 * s, 96 * s),
            Problem::Noh => (30 * s, 30 * s),
        }
    }

    pub fn dofs(&self, level: usize) -> usize {
        let (nx, ny) = self.cells(level);
        (nx + 1) * (ny + 1)
    }

    /// Representative mesh size along the refined direction.
    pub fn mesh_size(&self, level: usize) -> f64 {
        let (lo, hi) = self.domain();
        (hi[0] - lo[0]) / self.cells(level).0 as f64
    }

    /// Initial computational box.
    pub fn domain(&self) -> (Point, Point) {
        match self.problem {
            Problem::Rotation | Problem::Sod => ([0.0, 0.0], [1.0, 1.0]),
            Problem::Burgers2d => ([-0.25, -0.25], [1.75, 1.75]),
            Problem::Kpp => ([-2.5, -2.0], [1.5, 2.5]),
            Problem::Noh => ([-1.0, -1.0], [1.0, 1.0]),
        }
    }

    pub fn mesh(&self, level: usize) -> Result<Mesh, HarnessError> {
        let (lo, hi) = self.domain();
        if self.problem == Problem::Noh && self.nonuniform {
            // 32 cells on [-1, 0] and 64 on [0, 1] in both directions (at level 0).
            let s = 1usize << level;
            let line = |coarse: usize, fine: usize| -> Vec<f64> {
                let mut v: Vec<f64> = (0..coarse).map(|i| -1.0 + i as f64 / coarse as f64).collect();
                v.extend((0..=fine).map(|i| i as f64 / fine as f64));
                v
            };
            let xs = line(32 * s, 64 * s);
            return Ok(Mesh::tensor_rectangle(&xs, &xs, self.kind)?);
        }
        let (nx, ny) = self.cells(level);
        Ok(Mesh::uniform_rectangle(lo, hi, nx, ny, self.kind)?)
    }

    pub fn system(&self) -> SystemRef {
        match self.problem {
            Problem::Rotation => Arc::new(make_transport_field(rotation_beta)),
            Problem::Burgers2d => Arc::new(make_burgers_2d()),
            Problem::Kpp => Arc::new(make_kpp()),
            Problem::Sod => Arc::new(make_euler(GAMMA_SOD, 2).expect("valid gamma")),
            Problem::Noh => Arc::new(make_euler(GAMMA_NOH, 2).expect("valid gamma")),
        }
    }

    fn gamma(&self) -> f64 {
        if self.problem == Problem::Noh {
            GAMMA_NOH
        } else {
            GAMMA_SOD
        }
    }

    fn euler_state(&self, w: &EulerPrimitive) -> Conserved {
        make_euler(self.gamma(), 2).expect("valid gamma").to_conserved(w)
    }

    pub fn initial(&self, x: Point) -> Conserved {
        match self.problem {
            Problem::Rotation => scalar(rotation_initial(x)),
            Problem::Burgers2d => scalar(exact_burgers(x, 0.0)),
            Problem::Kpp => scalar(if x[0].hypot(x[1]) < 1.0 { 3.5 * PI } else { 0.25 * PI }),
            // Nodes on the diaphragm take the left state.
            Problem::Sod => self.euler_state(&if x[0] <= 0.5 { sod_left() } else { sod_right() }),
            Problem::Noh => self.euler_state(&noh_outer_state(x, 0.0)),
        }
    }

    pub fn bc(&self) -> BcTable {
        let dirichlet = |f: Arc<dyn Fn(Point, f64) -> Conserved + Send + Sync>| {
            let mut t = BcTable::none();
            for tag in [
                BoundaryTag::Left,
                BoundaryTag::Right,
                BoundaryTag::Bottom,
                BoundaryTag::Top,
            ] {
                t = t.with(tag, BoundaryCondition::Dirichlet(f.clone()));
            }
            t
        };
        match self.problem {
            Problem::Rotation => BcTable::none(),
            Problem::Burgers2d => dirichlet(Arc::new(|_, _| scalar(0.0))),
            Problem::Kpp => dirichlet(Arc::new(|_, _| scalar(0.25 * PI))),
            Problem::Sod => {
                let (l, r) = (self.euler_state(&sod_left()), self.euler_state(&sod_right()));
                BcTable::none()
                    .with(BoundaryTag::Left, BoundaryCondition::Dirichlet(Arc::new(move |_, _| l)))
                    .with(
                        BoundaryTag::Right,
                        BoundaryCondition::Dirichlet(Arc::new(move |_, _| r)),
                    )
                    .with(BoundaryTag::Bottom, BoundaryCondition::DoNothing)
                    .with(BoundaryTag::Top, BoundaryCondition::DoNothing)
            }
            Problem::Noh => {
                let euler = make_euler(GAMMA_NOH, 2).expect("valid gamma");
                dirichlet(Arc::new(move |x, t| euler.to_conserved(&noh_outer_state(x, t))))
            }
        }
    }

    /// Exact value of the first component (density for Euler) at `(x, t)`.
    pub fn exact(&self, x: Point, t: f64) -> Option<f64> {
        match self.problem {
            Problem::Rotation => exact_rotation(x, t, ROTATION_ODE_TOL).ok(),
            Problem::Burgers2d => Some(exact_burgers(x, t)),
            Problem::Kpp => None,
            Problem::Sod => Some(exact_sod(x[0], t, GAMMA_SOD).0),
            Problem::Noh => Some(exact_noh_density(x, t)),
        }
    }

    pub fn has_exact(&self) -> bool {
        self.problem != Problem::Kpp
    }

    /// Global bounds of the initial data for scalar problems.
    pub fn scalar_bounds(&self) -> Option<(f64, f64)> {
        match self.problem {
            Problem::Rotation => Some((0.0, 2.0)),
            Problem::Burgers2d => Some((0.0, 1.0)),
            Problem::Kpp => Some((0.25 * PI, 3.5 * PI)),
            Problem::Sod | Problem::Noh => None,
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            version: self.version,
            integrator: self.integrator,
            cfl: self.cfl,
            final_time: self.final_time,
            speed: self.speed,
            ..RunOptions::default()
        }
    }

    pub fn initial_state(&self, level: usize) -> Result<SolverState, HarnessError> {
        let mesh = self.mesh(level)?;
        let u = mesh.coords().iter().map(|&x| self.initial(x)).collect();
        Ok(SolverState::new(mesh, u)?)
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub level: usize,
    pub dofs: usize,
    pub h: f64,
    pub outcome: RunOutcome,
    /// `(L¹, L²)` error of the first component, when an exact solution exists.
    pub errors: Option<(f64, f64)>,
    pub seconds: f64,
}

/// Courant step `min_i h_min_i / λ` on the initial mesh, with `λ` the
/// largest untranslated wave speed over the whole mesh.
fn courant_time_step(
    state: &SolverState,
    system: &dyn HyperbolicSystem,
    ctx: &StepContext<'_>,
) -> Result<f64, HarnessError> {
    let st = assemble_stencil(&state.mesh, &ctx.quad)?;
    let rest = vec![[0.0; 2]; state.mesh.n_nodes()];
    let v = compute_dij(&state.mesh, &st, &state.u, &rest, system, state.t(), false)?;
    let lambda = v.lambda_eulerian.iter().copied().fold(0.0, f64::max);
    let h = st.h_min.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(h / lambda)
}

pub fn run_benchmark(spec: &BenchmarkSpec, level: usize) -> Result<BenchmarkRun, HarnessError> {
    let start = Instant::now();
    let state = spec.initial_state(level)?;
    let system = spec.system();
    let bc = spec.bc();
    let mut ctx = StepContext::new(system.as_ref(), &bc, spec.kind);
    ctx.viscosity = spec.viscosity;
    ctx.check_invariants = spec.check_invariants;
    let mut opts = spec.run_options();
    if spec.uniform_dt {
        let dt = spec.cfl * courant_time_step(&state, system.as_ref(), &ctx)?;
        // equal steps that land on the final time
        opts.fixed_dt = Some(spec.final_time / (spec.final_time / dt).ceil());
    }
    let outcome = run(state, &spec.ale, &ctx, &opts)?;
    let errors = if spec.has_exact() {
        let t = outcome.state.t();
        if let Problem::Rotation = spec.problem {
            // surface oracle failures instead of silently dropping points
            for &x in outcome.state.mesh.coords() {
                exact_rotation(x, t, ROTATION_ODE_TOL)?;
            }
        }
        Some(error_norms(
            &outcome.state.mesh,
            &outcome.state.u,
            0,
            NORM_POINTS,
            |x| spec.exact(x, t).unwrap_or(f64::NAN),
        ))
    } else {
        None
    };
    let run = BenchmarkRun {
        level,
        dofs: spec.dofs(level),
        h: spec.mesh_size(level),
        outcome,
        errors,
        seconds: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "{} level {} ({} dofs): {} steps, errors {:?}, {:.1}s",
        spec.problem,
        level,
        run.dofs,
        run.outcome.reports.len(),
        run.errors,
        run.seconds
    );
    Ok(run)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub dofs: usize,
    pub h: f64,
    pub l1: f64,
    pub l1_rate: Option<f64>,
    pub l2: f64,
    pub l2_rate: Option<f64>,
}

/// Rows with rates `log(e_{k-1}/e_k) / log(h_{k-1}/h_k)`.
pub fn convergence_rows(data: &[(usize, f64, f64, f64)]) -> Vec<ConvergenceRow> {
    data.iter()
        .enumerate()
        .map(|(k, &(dofs, h, l1, l2))| {
            let prev = k.checked_sub(1).map(|p| data[p]);
            ConvergenceRow {
                dofs,
                h,
                l1,
                l1_rate: prev.map(|(_, hp, e, _)| rate(e, l1, hp, h)),
                l2,
                l2_rate: prev.map(|(_, hp, _, e)| rate(e, l2, hp, h)),
            }
        })
        .collect()
}

/// Thread cap from `ALE_IDP_THREADS`, if set.
pub fn thread_cap() -> Option<usize> {
    std::env::var("ALE_IDP_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Runs every level (concurrently, up to the thread cap) and tabulates errors.
pub fn convergence_study(spec: &BenchmarkSpec, levels: &[usize]) -> Result<Vec<ConvergenceRow>, HarnessError> {
    if levels.len() < 2 {
        return Err(HarnessError::Config(
            "a convergence study needs at least two levels".into(),
        ));
    }
    if !spec.has_exact() {
        return Err(HarnessError::NoExactSolution(spec.problem));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| HarnessError::Config(e.to_string()))?;
    let runs: Vec<Result<BenchmarkRun, HarnessError>> =
        pool.install(|| levels.par_iter().map(|&l| run_benchmark(spec, l)).collect());
    let mut data = Vec::with_capacity(levels.len());
    for r in runs {
        let r = r?;
        let (l1, l2) = r.errors.expect("exact solution available");
        data.push((r.dofs, r.h, l1, l2));
    }
    Ok(convergence_rows(&data))
}

pub fn write_table_csv<W: std::io::Write>(out: W, rows: &[ConvergenceRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dofs", "h", "l1", "l1_rate", "l2", "l2_rate"])?;
    let opt = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.dofs.to_string(),
            format!("{:e}", r.h),
            format!("{:.6e}", r.l1),
            opt(r.l1_rate),
            format!("{:.6e}", r.l2),
            opt(r.l2_rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::NOH_PRESSURE;

    #[test]
    fn mesh_families() {
        let r = BenchmarkSpec::standard(Problem::Rotation);
        assert_eq!(
            (0..5).map(|l| r.dofs(l)).collect::<Vec<_>>(),
            [81, 289, 1089, 4225, 16641]
        );
        let s = BenchmarkSpec::standard(Problem::Sod);
        assert_eq!(s.cells(2), (80, 4));
        assert_eq!(s.dofs(4), 1605);
        let n = BenchmarkSpec::standard(Problem::Noh);
        assert_eq!((0..3).map(|l| n.dofs(l)).collect::<Vec<_>>(), [961, 3721, 14641]);
    }

    #[test]
    fn noh_nonuniform_quadrants() {
        let mut n = BenchmarkSpec::standard(Problem::Noh);
        n.nonuniform = true;
        let m = n.mesh(0).unwrap();
        let mut q = [0usize; 4];
        for c in 0..m.n_cells() {
            let p = m.cell_points(c);
            let cx = (p[0][0] + p[2][0]) / 2.0;
            let cy = (p[0][1] + p[2][1]) / 2.0;
            q[(cx > 0.0) as usize + 2 * (cy > 0.0) as usize] += 1;
        }
        // bottom-left, bottom-right, top-left, top-right
        assert_eq!(q, [32 * 32, 64 * 32, 32 * 64, 64 * 64]);
    }

    #[test]
    fn initial_data() {
        let s = BenchmarkSpec::standard(Problem::Sod);
        assert_eq!(s.initial([0.5, 0.2])[0], 1.0);
        assert_eq!(s.initial([0.51, 0.2])[0], 0.125);
        let n = BenchmarkSpec::standard(Problem::Noh);
        let u = n.initial([0.0, 0.0]);
        assert_eq!(u[1], 0.0);
        assert!((u[3] - NOH_PRESSURE / (GAMMA_NOH - 1.0)).abs() < 1e-30);
        let k = BenchmarkSpec::standard(Problem::Kpp);
        assert_eq!(k.initial([0.0, 0.0])[0], 3.5 * PI);
    }

    #[test]
    fn rates_from_rows() {
        let rows = convergence_rows(&[(81, 0.1, 1.0, 2.0), (289, 0.05, 0.5, 0.5)]);
        assert_eq!(rows[0].l1_rate, None);
        assert!((rows[1].l1_rate.unwrap() - 1.0).abs() < 1e-14);
        assert!((rows[1].l2_rate.unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn smallest_rotation_runs() {
        let mut spec = BenchmarkSpec::standard(Problem::Rotation);
        spec.viscosity = false;
        let r = run_benchmark(&spec, 0).unwrap();
        let (l1, _) = r.errors.unwrap();
        assert!(l1 < 2e-3, "{l1}");
    }
}
