use std::io::{self, Write};

use crate::fem::{ElementKind, Mesh};

/// Legacy ASCII VTK unstructured grid with nodal scalar fields.
pub fn write_vtk<W: Write>(mut w: W, mesh: &Mesh, fields: &[(&str, Vec<f64>)]) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "ale-idp t={:e}", mesh.time())?;
    writeln!(w, "ASCII\nDATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_nodes())?;
    for p in mesh.coords() {
        writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
    }
    let nf = mesh.kind().n_local();
    writeln!(w, "CELLS {} {}", mesh.n_cells(), mesh.n_cells() * (nf + 1))?;
    for c in 0..mesh.n_cells() {
        write!(w, "{nf}")?;
        for n in mesh.cell_nodes(c) {
            write!(w, " {n}")?;
        }
        writeln!(w)?;
    }
    let ty = match mesh.kind() {
        ElementKind::Segment => 3,
        ElementKind::Triangle => 5,
        ElementKind::Quadrilateral => 9,
    };
    writeln!(w, "CELL_TYPES {}", mesh.n_cells())?;
    for _ in 0..mesh.n_cells() {
        writeln!(w, "{ty}")?;
    }
    if !fields.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.n_nodes())?;
    }
    for (name, vals) in fields {
        assert_eq!(vals.len(), mesh.n_nodes(), "field {name} has the wrong length");
        writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
        for v in vals {
            writeln!(w, "{v:e}")?;
        }
    }
    Ok(())
}
