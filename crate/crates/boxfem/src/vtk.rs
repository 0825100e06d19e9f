//! Legacy ASCII VTK export of the solid mesh with result fields, for
//! inspection in ParaView or similar.

use std::io::{self, Write};

use crate::fem::stress::{nodal_average, StressField};
use crate::mesh::Mesh;

/// Writes the mesh as an unstructured grid: hexes plus tendon bars as line
/// cells, with segment and material ids per cell. `u` (3 dof per node) adds
/// a displacement vector field, `stress` the six nodal-averaged stress
/// components. Tendon bars carry the segment id `-1`.
pub fn write_vtk<W: Write>(
    mut w: W,
    mesh: &Mesh,
    u: Option<&[f64]>,
    stress: Option<&StressField>,
) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "box girder model")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(w, "POINTS {} double", mesh.nodes.len())?;
    for p in &mesh.nodes {
        writeln!(w, "{:.9e} {:.9e} {:.9e}", p[0], p[1], p[2])?;
    }

    let n_cells = mesh.hexes.len() + mesh.trusses.len();
    let n_ints = 9 * mesh.hexes.len() + 3 * mesh.trusses.len();
    writeln!(w, "CELLS {n_cells} {n_ints}")?;
    for h in &mesh.hexes {
        write!(w, "8")?;
        for v in h.nodes {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    for t in &mesh.trusses {
        writeln!(w, "2 {} {}", t.nodes[0], t.nodes[1])?;
    }
    writeln!(w, "CELL_TYPES {n_cells}")?;
    for _ in &mesh.hexes {
        writeln!(w, "12")?;
    }
    for _ in &mesh.trusses {
        writeln!(w, "3")?;
    }

    writeln!(w, "CELL_DATA {n_cells}")?;
    writeln!(w, "SCALARS segment int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for h in &mesh.hexes {
        writeln!(w, "{}", h.segment)?;
    }
    for _ in &mesh.trusses {
        writeln!(w, "-1")?;
    }
    writeln!(w, "SCALARS material int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for h in &mesh.hexes {
        writeln!(w, "{}", h.material)?;
    }
    for t in &mesh.trusses {
        writeln!(w, "{}", t.material)?;
    }

    if u.is_none() && stress.is_none() {
        return Ok(());
    }
    writeln!(w, "POINT_DATA {}", mesh.nodes.len())?;
    if let Some(u) = u {
        assert_eq!(u.len(), 3 * mesh.nodes.len(), "dof vector length");
        writeln!(w, "VECTORS displacement double")?;
        for v in 0..mesh.nodes.len() {
            writeln!(
                w,
                "{:.9e} {:.9e} {:.9e}",
                u[3 * v],
                u[3 * v + 1],
                u[3 * v + 2]
            )?;
        }
    }
    if let Some(stress) = stress {
        let all = vec![true; mesh.hexes.len()];
        let nodal = nodal_average(mesh, &all, stress);
        let names = ["sxx", "syy", "szz", "sxy", "syz", "szx"];
        for (c, name) in names.iter().enumerate() {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for s in &nodal {
                writeln!(w, "{:.9e}", s[c])?;
            }
        }
    }
    Ok(())
}
