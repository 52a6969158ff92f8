//! Indexed triangle meshes and a few closed primitives.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;


use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

impl TriangleMesh {
    /// Checks index ranges and rejects zero-area faces. Watertightness is
    /// checked when the dual graph is built.
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::InvalidMesh("mesh has no faces".into()));
        }
        for (i, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(alloc::format!("face {i} indexes a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(alloc::format!("face {i} repeats a vertex")));
            }
        }
        if vertices.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        let mesh = Self { vertices, faces };
        for i in 0..mesh.faces.len() {
            if mesh.face_area(i) <= 1e-14 {
                return Err(Error::InvalidMesh(alloc::format!("face {i} has zero area")));
            }
        }
        Ok(mesh)
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i]);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    pub fn centroid(&self, f: usize) -> [f64; 3] {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0, (a[2] + b[2] + c[2]) / 3.0]
    }

    pub fn edge_midpoint(&self, a: usize, b: usize) -> [f64; 3] {
        let (p, q) = (self.vertices[a], self.vertices[b]);
        [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]
    }

    /// Disjoint union, used to build disconnected test inputs.
    pub fn union(&self, other: &Self) -> Self {
        let offset = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| f.map(|v| v + offset)));
        Self { vertices, faces }
    }

    pub fn translated(&self, by: [f64; 3]) -> Self {
        let vertices = self.vertices.iter().map(|v| [v[0] + by[0], v[1] + by[1], v[2] + by[2]]).collect();
        Self { vertices, faces: self.faces.clone() }
    }

    pub fn tetrahedron() -> Self {
        Self {
            vertices: vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]],
            faces: vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
        }
    }

    pub fn octahedron() -> Self {
        Self {
            vertices: vec![
                [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0],
            ],
            faces: vec![
                [0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
                [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5],
            ],
        }
    }

    /// Unit cube split into 12 triangles.
    pub fn cube() -> Self {
        let mut vertices = Vec::new();
        for i in 0..8 {
            vertices.push([(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        let quads = [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]];
        let faces = quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect();
        Self { vertices, faces }
    }

    pub fn icosahedron() -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let vertices = vec![
            [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
            [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
            [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
        ];
        let faces = vec![
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ];
        Self { vertices, faces }
    }

    /// Splits every triangle into four and pushes new vertices onto the
    /// unit sphere.
    pub fn subdivide_sphere(&self) -> Self {
        let mut vertices: Vec<[f64; 3]> = self.vertices.iter().map(|&v| normalize(v)).collect();
        let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                vertices.len() - 1
            })
        };
        let mut faces = Vec::with_capacity(self.faces.len() * 4);
        for &[a, b, c] in &self.faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            faces.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        Self { vertices, faces }
    }

    /// Torus with `major × minor` quads, each split into two triangles.
    pub fn torus(major: usize, minor: usize, big_r: f64, small_r: f64) -> Self {
        let mut vertices = Vec::with_capacity(major * minor);
        for i in 0..major {
            let u = 2.0 * core::f64::consts::PI * i as f64 / major as f64;
            for j in 0..minor {
                let v = 2.0 * core::f64::consts::PI * j as f64 / minor as f64;
                let r = big_r + small_r * v.cos();
                vertices.push([r * u.cos(), r * u.sin(), small_r * v.sin()]);
            }
        }
        let idx = |i: usize, j: usize| (i % major) * minor + (j % minor);
        let mut faces = Vec::with_capacity(2 * major * minor);
        for i in 0..major {
            for j in 0..minor {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
        Self { vertices, faces }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitives_validate() {
        for m in [
            TriangleMesh::tetrahedron(),
            TriangleMesh::octahedron(),
            TriangleMesh::cube(),
            TriangleMesh::icosahedron(),
            TriangleMesh::icosahedron().subdivide_sphere(),
            TriangleMesh::torus(8, 5, 2.0, 0.7),
        ] {
            assert!(TriangleMesh::new(m.vertices.clone(), m.faces.clone()).is_ok());
        }
        assert_eq!(TriangleMesh::icosahedron().subdivide_sphere().faces.len(), 80);
    }

    #[test]
    fn rejects_bad_faces() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 2]]).is_err());
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 5]]).is_err());
        assert!(TriangleMesh::new(v, vec![[0, 1, 1]]).is_err());
    }
}
