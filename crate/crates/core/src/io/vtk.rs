//! VTK legacy ASCII snapshots on the mesh vertices.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::mesh::Mesh;
use crate::model::State;
use crate::spaces::Discretization;
use crate::timestepping::Sink;

/// Writes `φ`, `ψ`, `p` and the vertex values of `u`.
///
/// Vertex DOFs are numbered first in every space, so vertex `v` reads entry
/// `v` of each coefficient vector.
pub fn write_vtk(w: &mut impl Write, mesh: &Mesh, state: &State) -> io::Result<()> {
    let nv = mesh.n_vertices();
    let nt = mesh.n_triangles();
    let n_vel = state.u.len() / 2;
    if state.phi.len() < nv || state.psi.len() < nv || state.p.len() < nv || n_vel < nv {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "state does not match the mesh"));
    }
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "smectic step {} t {:e}", state.step, state.t)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {nv} double")?;
    for p in &mesh.vertices {
        writeln!(w, "{:.16e} {:.16e} 0", p[0], p[1])?;
    }
    writeln!(w, "CELLS {nt} {}", 4 * nt)?;
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {nv}")?;
    for (name, data) in [("phi", &state.phi), ("psi", &state.psi), ("pressure", &state.p)] {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in &data[..nv] {
            writeln!(w, "{v:.16e}")?;
        }
    }
    writeln!(w, "VECTORS velocity double")?;
    for v in 0..nv {
        writeln!(w, "{:.16e} {:.16e} 0", state.u[v], state.u[n_vel + v])?;
    }
    Ok(())
}

pub fn write_vtk_snapshot(state: &State, mesh: &Mesh, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vtk(&mut w, mesh, state)?;
    w.flush()
}

/// Writes `snapshot_NNNNNN.vtk` files into a directory.
pub struct VtkSink {
    pub dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl VtkSink {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), written: Vec::new() }
    }
}

impl Sink for VtkSink {
    fn snapshot(&mut self, disc: &Discretization, state: &State) -> io::Result<()> {
        let path = self.dir.join(format!("snapshot_{:06}.vtk", state.step));
        write_vtk_snapshot(state, &disc.mesh, &path)?;
        self.written.push(path);
        Ok(())
    }
}
