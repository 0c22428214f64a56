//! Structured bilinear-quadrilateral meshes of a rectangular layer.

use crate::error::{Error, Result};
use crate::material::LayerGeometry;

/// Order in which grid nodes are numbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOrdering {
    /// x varies fastest. Keeps Bloch-folded couplings within one grid row.
    RowMajor,
    /// y varies fastest. Narrow band for long strips.
    ColumnMajor,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    /// Node coordinates (x, y) in metres; y = 0 is the fixed bottom.
    pub nodes: Vec<[f64; 2]>,
    /// Counter-clockwise connectivity: (i,j), (i+1,j), (i+1,j+1), (i,j+1).
    pub elements: Vec<[usize; 4]>,
    pub nx: usize,
    pub ny: usize,
    pub ordering: NodeOrdering,
    /// Bottom edge (y = 0), sorted by x.
    pub bottom: Vec<usize>,
    /// Top edge (y = T), sorted by x.
    pub top: Vec<usize>,
    /// Left edge (x = 0), sorted by y.
    pub left: Vec<usize>,
    /// Right edge (x = width), sorted by y.
    pub right: Vec<usize>,
}

impl Mesh {
    pub fn structured(width: f64, height: f64, nx: usize, ny: usize, ordering: NodeOrdering) -> Result<Self> {
        if nx == 0 || ny == 0 || !(width > 0.0) || !(height > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "structured mesh needs positive extent and counts (w={width}, h={height}, nx={nx}, ny={ny})"
            )));
        }
        let id = |i: usize, j: usize| match ordering {
            NodeOrdering::RowMajor => j * (nx + 1) + i,
            NodeOrdering::ColumnMajor => i * (ny + 1) + j,
        };
        let n_nodes = (nx + 1) * (ny + 1);
        let mut nodes = vec![[0.0; 2]; n_nodes];
        for j in 0..=ny {
            for i in 0..=nx {
                nodes[id(i, j)] = [width * i as f64 / nx as f64, height * j as f64 / ny as f64];
            }
        }
        let mut elements = Vec::with_capacity(nx * ny);
        // element order follows the node ordering so neighbours stay close
        match ordering {
            NodeOrdering::RowMajor => {
                for j in 0..ny {
                    for i in 0..nx {
                        elements.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
                    }
                }
            }
            NodeOrdering::ColumnMajor => {
                for i in 0..nx {
                    for j in 0..ny {
                        elements.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
                    }
                }
            }
        }
        Ok(Mesh {
            nodes,
            elements,
            nx,
            ny,
            ordering,
            bottom: (0..=nx).map(|i| id(i, 0)).collect(),
            top: (0..=nx).map(|i| id(i, ny)).collect(),
            left: (0..=ny).map(|j| id(0, j)).collect(),
            right: (0..=ny).map(|j| id(nx, j)).collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn dof_count(&self) -> usize {
        2 * self.nodes.len()
    }

    /// Node index of grid position (i, j).
    pub fn node_id(&self, i: usize, j: usize) -> usize {
        match self.ordering {
            NodeOrdering::RowMajor => j * (self.nx + 1) + i,
            NodeOrdering::ColumnMajor => i * (self.ny + 1) + j,
        }
    }
}

/// Bloch-cell mesh spanning [0, a] × [0, T].
pub fn build_mesh(geometry: &LayerGeometry) -> Result<Mesh> {
    geometry.validate()?;
    Mesh::structured(
        geometry.cell_length,
        geometry.thickness,
        geometry.columns(),
        geometry.rows(),
        NodeOrdering::RowMajor,
    )
}
