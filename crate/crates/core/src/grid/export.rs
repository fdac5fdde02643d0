//! Mesh and data export.
//!
//! Two- and three-dimensional views are written as legacy ASCII
//! unstructured-grid files (pixel cells in 2D, voxel cells for undeformed
//! 3D grids, hexahedra for deformed ones). Other dimensions have no cell
//! type in that format; use the CSV writer instead, which works in any
//! dimension.

use std::io::{self, Write};

use super::view::GridView;

/// Writes the view as a legacy ASCII VTK unstructured grid, with optional
/// per-point and per-cell scalar fields. Supports 2D and 3D views.
pub fn write_vtk<W: Write>(
    view: &GridView,
    title: &str,
    point_data: &[(&str, &[f64])],
    cell_data: &[(&str, &[f64])],
    w: &mut W,
) -> io::Result<()> {
    let dim = view.dim();
    assert!(dim == 2 || dim == 3, "VTK export covers 2D and 3D views");
    let grid = view.grid();
    let n_points = view.size(dim);
    let n_cells = view.size(0);
    for (name, data) in point_data {
        assert_eq!(data.len(), n_points, "point field '{name}' has the wrong length");
    }
    for (name, data) in cell_data {
        assert_eq!(data.len(), n_cells, "cell field '{name}' has the wrong length");
    }

    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(w, "POINTS {n_points} double")?;
    for v in view.entities(dim) {
        let p = grid.geometry(&v).center();
        let mut c = [0.0; 3];
        c[..dim].copy_from_slice(p.as_slice());
        writeln!(w, "{} {} {}", c[0], c[1], c[2])?;
    }

    let corners = 1usize << dim;
    // undeformed grids are axis-aligned (pixel/voxel corner order is the
    // binary numbering used by the reference cube); deformed 3D cells are
    // general hexahedra, which list the bottom and top faces cyclically
    let (cell_type, order): (u8, &[usize]) = match (dim, grid.has_coordinate_map()) {
        (2, _) => (8, &[0, 1, 2, 3]),
        (3, false) => (11, &[0, 1, 2, 3, 4, 5, 6, 7]),
        (3, true) => (12, &[0, 1, 3, 2, 4, 5, 7, 6]),
        _ => unreachable!(),
    };
    writeln!(w, "CELLS {} {}", n_cells, n_cells * (corners + 1))?;
    for cell in view.cells() {
        write!(w, "{corners}")?;
        for &k in order {
            write!(w, " {}", view.sub_index(&cell, k, dim))?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {n_cells}")?;
    for _ in 0..n_cells {
        writeln!(w, "{cell_type}")?;
    }

    if !point_data.is_empty() {
        writeln!(w, "POINT_DATA {n_points}")?;
        for (name, data) in point_data {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in *data {
                writeln!(w, "{v}")?;
            }
        }
    }
    if !cell_data.is_empty() {
        writeln!(w, "CELL_DATA {n_cells}")?;
        for (name, data) in cell_data {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in *data {
                writeln!(w, "{v}")?;
            }
        }
    }
    Ok(())
}

/// Writes one row per view cell: the cell center coordinates followed by
/// the given per-cell fields. Works in any dimension.
pub fn write_cells_csv<W: Write>(
    view: &GridView,
    cell_data: &[(&str, &[f64])],
    w: &mut W,
) -> io::Result<()> {
    let dim = view.dim();
    let n_cells = view.size(0);
    for (name, data) in cell_data {
        assert_eq!(data.len(), n_cells, "cell field '{name}' has the wrong length");
    }
    for a in 0..dim {
        write!(w, "{}x{a}", if a == 0 { "" } else { "," })?;
    }
    for (name, _) in cell_data {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for (i, cell) in view.cells().enumerate() {
        let c = view.grid().geometry(&cell).center();
        for a in 0..dim {
            write!(w, "{}{}", if a == 0 { "" } else { "," }, c[a])?;
        }
        for (_, data) in cell_data {
            write!(w, ",{}", data[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}
