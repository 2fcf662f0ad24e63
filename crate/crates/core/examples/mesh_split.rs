//! Structured mesh of the three-region test problem, split along the
//! subdomain lines, with PML strips attached.

use conical_dd::fem::adaptive::attach_pml;
use conical_dd::geometry::{Mesh, Side};
use conical_dd::pml::{generate_grid, PmlConfig};
use conical_dd::scenarios::academic;

fn main() -> conical_dd::Result<()> {
    let ac = academic()?;
    let mesh = Mesh::build_with_lines(&ac.geometry, 6, ac.wavelength, &ac.lines)?;
    println!(
        "mesh: {} vertices, {} triangles, {} edges, h_max on the boundary {:.4}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        mesh.edges.len(),
        mesh.h_max_boundary
    );
    let grid = generate_grid(&PmlConfig::defaults(2.0 * std::f64::consts::PI / ac.wavelength, mesh.h_max_boundary, 1));
    for (j, piece) in mesh.split(&ac.lines)?.iter().enumerate() {
        let m = attach_pml(&piece.mesh, &grid.xi)?;
        println!(
            "subdomain {j}: x2 in [{:.2}, {:.2}], {} triangles, {} PML quads, coupling lines {:.2} / {:.2}",
            piece.mesh.x2_bottom,
            piece.mesh.x2_top,
            m.triangles.len(),
            m.quads.len(),
            m.coupling_line(Side::Top),
            m.coupling_line(Side::Bottom)
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        mesh.write_text(std::fs::File::create(&path)?)?;
        println!("mesh written to {path}");
    }
    Ok(())
}
