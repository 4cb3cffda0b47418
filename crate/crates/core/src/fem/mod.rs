//! Reference elements, moving meshes, quadrature and stencil assembly.

pub mod element;
pub mod mesh;
pub mod quadrature;
pub mod stencil;

pub use element::{build_reference_element, ElementKind, ReferenceElement, MAX_LOCAL};
pub use mesh::{det2, BoundaryTag, Graph, Mesh};
pub use quadrature::{QuadratureRule, TemporalRule};
pub use stencil::{
    assemble_stencil, cell_min_det, cell_min_dets, exact_masses, gcl_defect, liouville_residual, temporal_stencil,
    StencilField,
};

pub type Point = [f64; 2];
/// Row-major 2x2 matrix, `m[r][c]`.
pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("unsupported element kind {0:?} (expected p1-segment, p1 or q1)")]
    UnsupportedElement(String),
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("mesh file: {0}")]
    Parse(String),
    #[error("mesh invalid: cell {cell} has det J = {det:e}")]
    InvalidMesh { cell: usize, det: f64 },
    #[error("lumped mass of dof {0} is not positive")]
    ZeroMass(usize),
    #[error("intermediate mesh at zeta = {zeta} is inverted in {} cell(s), first {}", .cells.len(), .cells[0])]
    Inverted { zeta: f64, cells: Vec<usize> },
}
