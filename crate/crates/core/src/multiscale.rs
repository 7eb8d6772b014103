//! Formal sums of chains living at different dyadic scales.

use crate::error::{Error, Result};
use crate::grid::{Chain, CubicalGrid};

/// Parts at pairwise distinct scales, all of one dimension, sorted by scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiscaleChain {
    dim: usize,
    parts: Vec<Chain>,
}

impl MultiscaleChain {
    pub fn new(dim: usize) -> Self {
        MultiscaleChain {
            dim,
            parts: Vec::new(),
        }
    }

    pub fn from_parts(grid: &CubicalGrid, dim: usize, parts: Vec<Chain>) -> Result<Self> {
        let mut m = MultiscaleChain::new(dim);
        for p in parts {
            m.push(grid, p)?;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parts(&self) -> &[Chain] {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.is_zero())
    }

    /// Adds a part, merging with an existing part of the same scale.
    pub fn push(&mut self, grid: &CubicalGrid, part: Chain) -> Result<()> {
        if part.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}-chain pushed into a {}-dimensional multiscale chain",
                part.dim(),
                self.dim
            )));
        }
        if part.is_zero() {
            return Ok(());
        }
        match self.parts.binary_search_by_key(&part.scale(), |p| p.scale()) {
            Ok(i) => {
                let aligned = grid.reframe(&part, self.parts[i].origin())?;
                let sum = self.parts[i].add(&aligned)?;
                if sum.is_zero() {
                    self.parts.remove(i);
                } else {
                    self.parts[i] = sum;
                }
            }
            Err(i) => self.parts.insert(i, part),
        }
        Ok(())
    }

    /// Sum of native-scale masses.
    pub fn mass(&self, grid: &CubicalGrid) -> u128 {
        self.parts.iter().map(|p| grid.mass(p)).sum()
    }

    /// Everything subdivided to scale 0 and summed.
    pub fn flatten(&self, grid: &CubicalGrid) -> Result<Chain> {
        let mut acc = Chain::zero(0, self.dim);
        for p in &self.parts {
            let fine = grid.subdivide_to(p, 0)?;
            acc = acc.add(&fine)?;
        }
        Ok(acc)
    }

    /// Boundary of [`MultiscaleChain::flatten`], computed without
    /// flattening: boundaries are taken at native scale and pushed down one
    /// scale at a time, which is exact because subdivision commutes with the
    /// boundary.
    pub fn flat_boundary(&self, grid: &CubicalGrid) -> Result<Chain> {
        if self.dim == 0 {
            return Err(Error::BoundaryOfVertex);
        }
        let mut acc: Option<Chain> = None;
        for p in self.parts.iter().rev() {
            let b = grid.boundary(p)?;
            acc = Some(match acc {
                None => b,
                Some(mut a) => {
                    while a.scale() > p.scale() {
                        a = grid.subdivide(&a)?;
                    }
                    let a = grid.reframe(&a, b.origin())?;
                    a.add(&b)?
                }
            });
        }
        match acc {
            None => Ok(Chain::zero(0, self.dim - 1)),
            Some(a) => grid.subdivide_to(&a, 0),
        }
    }
}
