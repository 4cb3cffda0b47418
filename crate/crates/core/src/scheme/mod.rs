//! Graph-viscosity ALE time steppers.

mod bc;
mod driver;
mod step;
mod viscosity;

use crate::ale::AleError;
use crate::fem::{exact_masses, FemError, Mesh};
use crate::systems::Conserved;

pub use bc::{apply_bc, BcTable, BoundaryCondition, StateFn};
pub use driver::{run, write_reports_csv, RunOptions, RunOutcome};
pub use step::{
    convex_reconstruction, entropy_residual, euler_step_v1, euler_step_v2, masses_after, nonconservative_update,
    ssp_rk3_step, StepContext,
};
pub use viscosity::{compute_dij, estimate_dt, Viscosity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeVersion {
    /// Evolved masses, `c_ij` at `t^n`.
    V1,
    /// Exact masses, `c_ij` averaged over the temporal quadrature.
    V2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    ForwardEuler,
    SspRk3,
}

/// Wave speed entering the time-step estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedReference {
    /// Speed of the translated flux `f - u⊗W`, as in the invariant-domain CFL.
    Shifted,
    /// Larger of the translated and untranslated speeds.
    ShiftedOrEulerian,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub mesh: Mesh,
    pub u: Vec<Conserved>,
    /// `𝔪_i` for version 1, `m_i` for version 2.
    pub mass: Vec<f64>,
    pub step: usize,
}

impl SolverState {
    /// State with exact initial masses `∫ ψ_i`.
    pub fn new(mesh: Mesh, u: Vec<Conserved>) -> Result<Self, SchemeError> {
        assert_eq!(mesh.n_nodes(), u.len());
        let mass = exact_masses(&mesh)?;
        Ok(Self { mesh, u, mass, step: 0 })
    }

    pub fn t(&self) -> f64 {
        self.mesh.time()
    }

    /// `Σ_i mass_i U_i`.
    pub fn totals(&self) -> Conserved {
        let mut s = [0.0; 4];
        for (m, u) in self.mass.iter().zip(&self.u) {
            for k in 0..4 {
                s[k] += m * u[k];
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub reductions: usize,
    /// `min_i (1 - Σ_{j≠i} 2 d_ij dt / mass_i^{n+1})`.
    pub min_convexity: f64,
    /// `max_i ‖Σ_j c_ij‖`.
    pub row_sum_defect: f64,
    pub total_before: Conserved,
    pub total_after: Conserved,
    /// Relative change of `Σ mass U` over the step, before boundary overwrites.
    pub conservation_defect: f64,
    pub entropy_max: Option<f64>,
}

/// Why a trial step was refused; the caller retries with half the step.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    NonPositiveMass { dof: usize, mass: f64 },
    Convexity { dof: usize, coefficient: f64 },
    Inverted { cells: Vec<usize> },
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::NonPositiveMass { dof, mass } => write!(f, "mass of dof {dof} is {mass:e}"),
            Rejection::Convexity { dof, coefficient } => {
                write!(f, "convexity coefficient of dof {dof} is {coefficient:e}")
            }
            Rejection::Inverted { cells } => write!(f, "{} cell(s) inverted, first {}", cells.len(), cells[0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemeError {
    #[error("wave speed is not a number for dof pair ({i}, {j})")]
    NumericSpeed { i: usize, j: usize },
    #[error("step at t = {t} rejected {reductions} times; last reason: {last}")]
    TooManyReductions { t: f64, reductions: usize, last: Rejection },
    #[error("invariant violated at dof {dof}, t = {t}: {detail}")]
    InvariantViolation { dof: usize, t: f64, detail: String },
    #[error("boundary conditions: {0}")]
    Boundary(String),
    #[error("unsupported configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Ale(#[from] AleError),
}

impl SchemeError {
    /// Process exit code for command-line drivers.
    pub fn exit_code(&self) -> i32 {
        match self {
            SchemeError::InvariantViolation { .. } => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepError {
    Rejected(Rejection),
    Failed(SchemeError),
}

impl From<SchemeError> for StepError {
    fn from(e: SchemeError) -> Self {
        StepError::Failed(e)
    }
}

impl From<FemError> for StepError {
    fn from(e: FemError) -> Self {
        StepError::Failed(e.into())
    }
}

impl From<AleError> for StepError {
    fn from(e: AleError) -> Self {
        StepError::Failed(e.into())
    }
}
