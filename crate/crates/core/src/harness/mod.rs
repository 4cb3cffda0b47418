//! Benchmarks, exact solutions, error norms, convergence studies and output.

mod benchmarks;
mod config;
mod exact;
mod norms;
mod vtk;

pub use benchmarks::{
    convergence_rows, convergence_study, run_benchmark, thread_cap, write_table_csv, BenchmarkRun, BenchmarkSpec,
    ConvergenceRow, Problem,
};
pub use config::RunConfig;
pub use exact::{
    exact_burgers, exact_noh_density, exact_rotation, exact_sod, noh_outer_state, rotation_beta, rotation_initial,
    sample_riemann, sod_left, sod_right, OdeError, NOH_PRESSURE,
};
pub use norms::{error_norms, field_value, rate};
pub use vtk::write_vtk;

use crate::fem::FemError;
use crate::scheme::SchemeError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("problem {0} has no exact solution")]
    NoExactSolution(Problem),
    #[error("configuration: {0}")]
    Config(String),
}

impl From<FemError> for HarnessError {
    fn from(e: FemError) -> Self {
        HarnessError::Scheme(e.into())
    }
}

impl HarnessError {
    /// 3 for invariant violations, 2 for any other failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Scheme(e) => e.exit_code(),
            _ => 2,
        }
    }
}
