use std::fmt;
use std::sync::Arc;

use super::{SchemeError, SolverState};
use crate::fem::{BoundaryTag, Point};
use crate::systems::Conserved;

pub type StateFn = Arc<dyn Fn(Point, f64) -> Conserved + Send + Sync>;

#[derive(Clone)]
pub enum BoundaryCondition {
    DoNothing,
    /// Strong overwrite with the prescribed state at `(a_i, t)`.
    Dirichlet(StateFn),
    /// The tagged side is identified with its partner when the mesh is built.
    Periodic,
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::DoNothing => "DoNothing",
            BoundaryCondition::Dirichlet(_) => "Dirichlet(..)",
            BoundaryCondition::Periodic => "Periodic",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct BcTable {
    pub entries: Vec<(BoundaryTag, BoundaryCondition)>,
}

impl BcTable {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn periodic() -> Self {
        let mut t = Self::default();
        for tag in [
            BoundaryTag::Left,
            BoundaryTag::Right,
            BoundaryTag::Bottom,
            BoundaryTag::Top,
        ] {
            t = t.with(tag, BoundaryCondition::Periodic);
        }
        t
    }

    pub fn with(mut self, tag: BoundaryTag, bc: BoundaryCondition) -> Self {
        self.entries.retain(|(t, _)| *t != tag);
        self.entries.push((tag, bc));
        self
    }

    pub fn has_dirichlet(&self) -> bool {
        self.entries
            .iter()
            .any(|(_, b)| matches!(b, BoundaryCondition::Dirichlet(_)))
    }
}

pub fn apply_bc(state: &mut SolverState, bc: &BcTable, t: f64) -> Result<(), SchemeError> {
    let mesh = &state.mesh;
    for (tag, cond) in &bc.entries {
        match cond {
            BoundaryCondition::DoNothing => {}
            BoundaryCondition::Periodic => {
                if let Some(i) = (0..mesh.n_nodes()).find(|&i| mesh.has_tag(i, *tag)) {
                    return Err(SchemeError::Boundary(format!(
                        "periodic condition on side {} but dof {i} has no periodic partner",
                        tag.as_str()
                    )));
                }
            }
            BoundaryCondition::Dirichlet(g) => {
                for i in 0..mesh.n_nodes() {
                    if mesh.has_tag(i, *tag) {
                        state.u[i] = g(mesh.coords()[i], t);
                    }
                }
            }
        }
    }
    Ok(())
}
