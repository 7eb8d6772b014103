use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::grid::{AxisSet, Chain, GridCell, VertexBox};

/// Column-major sparse integer matrix: `cols[j]` lists `(row, value)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<Vec<(usize, i64)>>,
}

impl SparseMatrix {
    /// `self * other`, dense result (test-sized matrices only).
    pub fn mul_dense(&self, other: &SparseMatrix) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0i64; other.cols.len()]; self.rows];
        for (k, col) in other.cols.iter().enumerate() {
            for &(mid, b) in col {
                for &(r, a) in &self.cols[mid] {
                    out[r][k] += a * b;
                }
            }
        }
        out
    }
}

/// All scale-0 cells of a vertex box, indexed per dimension on first use.
#[derive(Debug)]
pub struct WindowComplex {
    bx: VertexBox,
    cells: Vec<OnceLock<Vec<GridCell>>>,
    index: Vec<OnceLock<HashMap<GridCell, usize>>>,
}

impl WindowComplex {
    pub fn new(bx: VertexBox) -> Self {
        WindowComplex {
            cells: (0..=bx.n).map(|_| OnceLock::new()).collect(),
            index: (0..=bx.n).map(|_| OnceLock::new()).collect(),
            bx,
        }
    }

    /// Bounding box of the chain's support grown by `margin`.
    pub fn around(c: &Chain, n: usize, margin: i64) -> Result<Self> {
        let bx = Self::box_around(c, n, margin)?;
        Ok(WindowComplex::new(bx))
    }

    pub fn box_around(c: &Chain, n: usize, margin: i64) -> Result<VertexBox> {
        if c.scale() != 0 {
            return Err(Error::ScaleMismatch("windows hold scale-0 chains".into()));
        }
        Ok(c
            .bounding_box(n)
            .unwrap_or_else(|| VertexBox::new(&vec![0; n], &vec![0; n]))
            .expand(margin))
    }

    pub fn bounds(&self) -> &VertexBox {
        &self.bx
    }

    pub fn dim(&self) -> usize {
        self.bx.n
    }

    pub fn cells(&self, d: usize) -> &[GridCell] {
        self.cells[d].get_or_init(|| self.bx.cells_of_dim(d))
    }

    /// Number of `d`-cells, without enumerating them.
    pub fn cell_count(&self, d: usize) -> usize {
        let ext = self.bx.extents();
        AxisSet::all_of_size(self.bx.n, d)
            .into_iter()
            .map(|a| {
                (0..self.bx.n)
                    .map(|j| (ext[j] + i64::from(!a.contains(j))).max(0) as usize)
                    .product::<usize>()
            })
            .sum()
    }

    fn index(&self, d: usize) -> &HashMap<GridCell, usize> {
        self.index[d].get_or_init(|| {
            self.cells(d)
                .iter()
                .enumerate()
                .map(|(i, c)| (*c, i))
                .collect()
        })
    }

    pub fn index_of(&self, d: usize, cell: &GridCell) -> Option<usize> {
        self.index(d).get(cell).copied()
    }

    pub fn contains(&self, c: &Chain) -> bool {
        c.terms().iter().all(|(cell, _)| self.bx.contains_cell(cell))
    }

    /// `d_d`: from `d`-cells to `(d-1)`-cells.
    pub fn boundary_matrix(&self, d: usize) -> SparseMatrix {
        assert!(d >= 1 && d <= self.dim());
        let index = self.index(d - 1);
        let cols = self
            .cells(d)
            .iter()
            .map(|c| c.faces().map(|(f, s)| (index[&f], s)).collect())
            .collect();
        SparseMatrix {
            rows: self.cells(d - 1).len(),
            cols,
        }
    }
}
