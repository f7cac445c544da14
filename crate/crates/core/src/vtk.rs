//! Legacy-VTK output of the mesh and nodal fields (biquadratic quads).

use std::io::{self, Write};

use crate::fem::StateVector;
use crate::mesh::VelocityMesh;

const VTK_BIQUADRATIC_QUAD: u8 = 28;

/// Local nodes in VTK order: corners counter-clockwise, edge midpoints, centre.
const VTK_ORDER: [usize; 9] = [0, 2, 8, 6, 1, 5, 7, 3, 4];

/// Writes the mesh with one point-data array per named species. Hanging
/// node values are resolved from their constraints.
pub fn write_vtk<W: Write>(
    mut w: W,
    mesh: &VelocityMesh,
    state: Option<(&StateVector, &[String])>,
    title: &str,
) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.num_nodes())?;
    for p in mesh.nodes() {
        writeln!(w, "{:.17e} {:.17e} 0", p[0], p[1])?;
    }
    let nc = mesh.num_cells();
    writeln!(w, "CELLS {} {}", nc, nc * 10)?;
    for nodes in mesh.cell_nodes() {
        write!(w, "9")?;
        for &k in &VTK_ORDER {
            write!(w, " {}", nodes[k])?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(w, "{VTK_BIQUADRATIC_QUAD}")?;
    }
    writeln!(w, "CELL_DATA {nc}")?;
    writeln!(w, "SCALARS level int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for c in mesh.cells() {
        writeln!(w, "{}", c.key.level)?;
    }
    if let Some((state, names)) = state {
        writeln!(w, "POINT_DATA {}", mesh.num_nodes())?;
        for a in 0..state.num_species() {
            let name = names
                .get(a)
                .map(|n| sanitize(n))
                .unwrap_or_else(|| format!("species_{a}"));
            writeln!(w, "SCALARS f_{name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in mesh.resolve_nodal(state.species(a)) {
                writeln!(w, "{v:.17e}")?;
            }
        }
    }
    Ok(())
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}
