use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::records::write_text;
use crate::error::{Error, Result};
use crate::geometry::{sgnpow, SuperQuadricState};

/// Triangle mesh in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vector3<f64>>,
    pub faces: Vec<[usize; 3]>,
}

/// Triangulates the surface on a `grid_u` (latitude, poles included) by
/// `grid_v` (longitude) parameter grid, giving `grid_u * grid_v` vertices.
pub fn superquadric_mesh(q: &SuperQuadricState, grid_u: usize, grid_v: usize) -> Result<Mesh> {
    if grid_u < 3 || grid_v < 3 {
        return Err(Error::InvalidParameter(format!(
            "mesh grid needs at least 3x3, got {grid_u}x{grid_v}"
        )));
    }
    let s = &q.shape;
    let mut vertices = Vec::with_capacity(grid_u * grid_v);
    for i in 0..grid_u {
        let eta =
            -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / (grid_u - 1) as f64;
        // exact pole coordinates
        let (se, ce) = match i {
            0 => (-1.0, 0.0),
            _ if i == grid_u - 1 => (1.0, 0.0),
            _ => eta.sin_cos(),
        };
        for j in 0..grid_v {
            let omega =
                -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / grid_v as f64;
            let (so, co) = omega.sin_cos();
            let local = Vector3::new(
                s.alpha.x * sgnpow(ce, s.eps1) * sgnpow(co, s.eps2),
                s.alpha.y * sgnpow(ce, s.eps1) * sgnpow(so, s.eps2),
                s.alpha.z * sgnpow(se, s.eps1),
            );
            vertices.push(q.pose.transform(&local));
        }
    }
    let idx = |i: usize, j: usize| i * grid_v + j % grid_v;
    let mut faces = Vec::new();
    for i in 0..grid_u - 1 {
        for j in 0..grid_v {
            let (a, b, c, d) = (idx(i, j), idx(i, j + 1), idx(i + 1, j + 1), idx(i + 1, j));
            // pole rows collapse to a point; keep one triangle per quad there
            if i != 0 {
                faces.push([a, c, b]);
            }
            if i + 1 != grid_u - 1 {
                faces.push([a, d, c]);
            }
        }
    }
    Ok(Mesh { vertices, faces })
}

/// Writes an ASCII PLY file.
pub fn write_ply(path: &Path, mesh: &Mesh) -> Result<()> {
    let mut s = String::new();
    let _ = write!(
        s,
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n\
         element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices.len(),
        mesh.faces.len()
    );
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", v.x, v.y, v.z);
    }
    for f in &mesh.faces {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    write_text(path, &s)
}
