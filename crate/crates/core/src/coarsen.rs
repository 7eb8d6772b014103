//! Approximation of a fine chain by a chain one dyadic scale coarser, via
//! intersection numbers with the dual cells of the coarse grid.
//!
//! Units: everything here is measured in the fine chain's corner units. One
//! coarse cell spans `L_j = 2^{w_j}` fine units along axis `j`, and the coarse
//! vertex planes sit at `o_j + L_j C` for an [`Offset`] `o`.
//!
//! The dual of a coarse cell `sigma` with axes `A` is centred at `sigma`'s
//! centre and spans the complementary axes with one coarse length. Counting
//! uses the dual grid pushed by `-epsilon` along every axis, which makes the
//! intersection pattern generic:
//!
//! * along `j` in `A`, a fine cell `[a, a + 1]` meets the centre `c` iff
//!   `a < c <= a + 1`;
//! * along `j` not in `A`, the fine coordinate `a` lies in the dual iff
//!   `c_j - L_j / 2 <= a < c_j + L_j / 2`.
//!
//! With this rule every fine cell meets at most one dual of its own axis type
//! and the resulting operator commutes with the boundary.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AxisSet, Chain, Coords, CubicalGrid, GridCell, MAX_DIM};
use crate::weights::WeightTable;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Translate of the coarse grid relative to the fine one, `0 <= o_j < L_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Offset(pub Coords);

impl Offset {
    pub fn zero() -> Self {
        Offset([0; MAX_DIM])
    }

    pub fn new(o: &[i64]) -> Self {
        let mut c = [0; MAX_DIM];
        c[..o.len()].copy_from_slice(o);
        Offset(c)
    }

    pub fn as_slice(&self, n: usize) -> &[i64] {
        &self.0[..n]
    }

    /// The full offset domain (`2^kappa` elements) in lexicographic order.
    pub fn all(grid: &CubicalGrid) -> Vec<Offset> {
        let n = grid.dim();
        let mut out = vec![Offset::zero()];
        for j in 0..n {
            let r = grid.ratio(j);
            out = out
                .into_iter()
                .flat_map(|o| {
                    (0..r).map(move |t| {
                        let mut x = o;
                        x.0[j] = t;
                        x
                    })
                })
                .collect();
        }
        out
    }

    pub fn validate(&self, grid: &CubicalGrid) -> Result<()> {
        for j in 0..grid.dim() {
            if self.0[j] < 0 || self.0[j] >= grid.ratio(j) {
                return Err(Error::InvalidArgument(format!(
                    "offset {:?} out of range on axis {j}",
                    self.as_slice(grid.dim())
                )));
            }
        }
        Ok(())
    }
}

/// Geometry of one coarsening step at a fixed offset.
#[derive(Clone, Debug)]
pub struct CoarseGrid<'a> {
    grid: &'a CubicalGrid,
    offset: Offset,
}

impl<'a> CoarseGrid<'a> {
    pub fn new(grid: &'a CubicalGrid, offset: Offset) -> Self {
        CoarseGrid { grid, offset }
    }

    pub fn grid(&self) -> &'a CubicalGrid {
        self.grid
    }

    pub fn offset(&self) -> Offset {
        self.offset
    }

    fn len(&self, j: usize) -> i64 {
        self.grid.ratio(j)
    }

    /// Fine position of coarse plane `c` along axis `j`.
    pub fn plane(&self, j: usize, c: i64) -> i64 {
        self.offset.0[j] + self.len(j) * c
    }

    /// Nearest coarse plane, ties going up.
    pub fn round(&self, j: usize, a: i64) -> i64 {
        let l = self.len(j);
        (a - self.offset.0[j] + l / 2).div_euclid(l)
    }

    /// The coarse interval whose centre lies in `(a, a + 1]`, if any.
    pub fn central(&self, j: usize, a: i64) -> Option<i64> {
        let l = self.len(j);
        let shifted = a - self.offset.0[j] - (l / 2 - 1);
        (shifted.rem_euclid(l) == 0).then(|| shifted.div_euclid(l))
    }

    /// The coarse cell whose dual a fine cell meets, if any.
    pub fn project_cell(&self, cell: &GridCell) -> Option<GridCell> {
        let n = self.grid.dim();
        let mut corner = [0i64; MAX_DIM];
        for (j, c) in corner.iter_mut().enumerate().take(n) {
            let a = cell.corner[j];
            *c = if cell.axes.contains(j) {
                self.central(j, a)?
            } else {
                self.round(j, a)
            };
        }
        Some(GridCell {
            axes: cell.axes,
            corner,
        })
    }

    /// Children (fine cells) of a coarse cell.
    pub fn children(&self, coarse: &GridCell) -> Vec<GridCell> {
        let n = self.grid.dim();
        let mut base = *coarse;
        for j in 0..n {
            base.corner[j] = self.plane(j, coarse.corner[j]);
        }
        let mut out = vec![base];
        for j in coarse.axes.iter() {
            let l = self.len(j);
            out = out
                .into_iter()
                .flat_map(|c| {
                    (0..l).map(move |t| {
                        let mut x = c;
                        x.corner[j] += t;
                        x
                    })
                })
                .collect();
        }
        out
    }

    /// Vertex box (fine units) of the closure of the smallest coarse cell
    /// containing a fine cell.
    pub fn carrier(&self, cell: &GridCell) -> CarrierBox {
        let n = self.grid.dim();
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [0i64; MAX_DIM];
        for j in 0..n {
            let l = self.len(j);
            let a = cell.corner[j];
            let rel = a - self.offset.0[j];
            if !cell.axes.contains(j) && rel.rem_euclid(l) == 0 {
                lo[j] = a;
                hi[j] = a;
            } else {
                let c = rel.div_euclid(l);
                lo[j] = self.plane(j, c);
                hi[j] = lo[j] + l;
            }
        }
        CarrierBox(crate::grid::VertexBox { n, lo, hi })
    }

    /// Base-unit origin of the coarse frame for a fine chain.
    fn coarse_origin(&self, fine: &Chain) -> Coords {
        let mut origin = *fine.origin();
        for (j, o) in origin.iter_mut().enumerate().take(self.grid.dim()) {
            *o += self.offset.0[j] * self.grid.cell_length(j, fine.scale());
        }
        origin
    }

    /// `P(c) = sum_sigma i(c, sigma*) sigma`, as a chain at `scale + 1`.
    pub fn coarsen(&self, c: &Chain) -> Result<Chain> {
        let terms: Vec<(GridCell, i64)> = c
            .terms()
            .iter()
            .filter_map(|&(cell, k)| self.project_cell(&cell).map(|p| (p, k)))
            .collect();
        self.grid
            .chain(c.scale() + 1, c.dim(), self.coarse_origin(c), terms)
    }

    /// `l1(P(c))` without building the chain's frame.
    pub fn coarsened_l1(&self, c: &Chain) -> u64 {
        let mut terms: Vec<(GridCell, i64)> = c
            .terms()
            .iter()
            .filter_map(|&(cell, k)| self.project_cell(&cell).map(|p| (p, k)))
            .collect();
        crate::grid::normalize_terms(&mut terms);
        terms.iter().map(|t| t.1.unsigned_abs()).sum()
    }

    /// Subdivision of a coarse chain (from [`CoarseGrid::coarsen`]) back
    /// into the fine chain's frame.
    pub fn refine(&self, coarse: &Chain, fine_frame: &Chain) -> Result<Chain> {
        let sub = self.grid.subdivide(coarse)?;
        self.grid.reframe(&sub, fine_frame.origin())
    }
}

/// Closure of one coarse cell, in fine units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CarrierBox(pub crate::grid::VertexBox);

/// Dual of a coarse cell `sigma` at a given offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DualCell {
    pub coarse: GridCell,
    pub offset: Offset,
}

impl DualCell {
    pub fn new(coarse: GridCell, offset: Offset) -> Self {
        DualCell { coarse, offset }
    }

    pub fn dim(&self, n: usize) -> usize {
        n - self.coarse.dim()
    }

    /// Twice the centre of `sigma` in fine units (kept integral).
    fn doubled_center(&self, grid: &CubicalGrid, j: usize) -> i64 {
        let l = grid.ratio(j);
        let start = self.offset.0[j] + l * self.coarse.corner[j];
        2 * start + if self.coarse.axes.contains(j) { l } else { 0 }
    }

    /// Whether a fine cell meets this dual under the `-epsilon` rule.
    pub fn meets(&self, grid: &CubicalGrid, cell: &GridCell) -> bool {
        if cell.axes != self.coarse.axes {
            return false;
        }
        (0..grid.dim()).all(|j| {
            let c2 = self.doubled_center(grid, j);
            let a2 = 2 * cell.corner[j];
            if cell.axes.contains(j) {
                a2 < c2 && c2 <= a2 + 2
            } else {
                let l = grid.ratio(j);
                c2 - l <= a2 && a2 < c2 + l
            }
        })
    }
}

/// `i(c, sigma*)`: the signed count of cells of `c` meeting the dual.
pub fn intersection_number(grid: &CubicalGrid, c: &Chain, dual: &DualCell) -> Result<i64> {
    let n = grid.dim();
    if c.dim() + dual.dim(n) != n {
        return Err(Error::DimensionMismatch(format!(
            "{}-chain against a {}-dimensional dual in dimension {n}",
            c.dim(),
            dual.dim(n)
        )));
    }
    Ok(c.terms()
        .iter()
        .filter(|(cell, _)| dual.meets(grid, cell))
        .map(|t| t.1)
        .sum())
}

pub fn coarsen(grid: &CubicalGrid, c: &Chain, offset: Offset) -> Result<Chain> {
    offset.validate(grid)?;
    CoarseGrid::new(grid, offset).coarsen(c)
}

fn offset_l1s(grid: &CubicalGrid, c: &Chain) -> Vec<(Offset, u64)> {
    let offsets = Offset::all(grid);
    let eval = |o: &Offset| (*o, CoarseGrid::new(grid, *o).coarsened_l1(c));
    #[cfg(feature = "parallel")]
    {
        offsets.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        offsets.iter().map(eval).collect()
    }
}

/// Exhaustive offset study of one chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OffsetStudy {
    pub l1_by_offset: Vec<(Offset, u64)>,
    pub mean: Ratio<u64>,
    pub best: Offset,
    pub min: u64,
}

pub fn offset_study(grid: &CubicalGrid, c: &Chain) -> OffsetStudy {
    let l1_by_offset = offset_l1s(grid, c);
    let total: u64 = l1_by_offset.iter().map(|t| t.1).sum();
    let mean = Ratio::new(total, l1_by_offset.len() as u64);
    // offsets come in lexicographic order, so the first minimum wins ties
    let (best, min) = l1_by_offset
        .iter()
        .copied()
        .fold(None, |acc: Option<(Offset, u64)>, (o, v)| match acc {
            Some((_, m)) if m <= v => acc,
            _ => Some((o, v)),
        })
        .expect("offset domain is never empty");
    OffsetStudy {
        l1_by_offset,
        mean,
        best,
        min,
    }
}

/// Mean of `l1(coarsen(c, o))` over the whole offset domain.
pub fn offset_l1_average(grid: &CubicalGrid, c: &Chain) -> Ratio<u64> {
    offset_study(grid, c).mean
}

/// Offset minimizing `l1(coarsen(c, o))`, lexicographically first on ties.
pub fn best_offset(grid: &CubicalGrid, c: &Chain) -> Result<(Offset, Chain)> {
    let study = offset_study(grid, c);
    let chain = coarsen(grid, c, study.best)?;
    Ok((study.best, chain))
}

/// Relative dual mass of one coarsening step for `d`-chains:
/// `C(n, d) * 2^(k(n-d)) / 2^kappa`.
pub fn dual_mass_factor(weights: &WeightTable, d: usize) -> Ratio<u64> {
    let n = weights.dim();
    let classes = AxisSet::all_of_size(n, d).len() as u64;
    let dual = weights.k(n - d);
    Ratio::new(classes << dual, 1u64 << weights.kappa)
}

/// Measured averaging constant `mean / (l1(c) * dual_mass_factor)`.
pub fn averaging_constant(weights: &WeightTable, c: &Chain, mean: Ratio<u64>) -> Option<f64> {
    if c.l1() == 0 {
        return None;
    }
    let f = dual_mass_factor(weights, c.dim());
    let v = mean / (f * c.l1());
    Some(*v.numer() as f64 / *v.denom() as f64)
}
