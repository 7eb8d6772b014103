//! Nested anisotropic cubical grids and integer chains on them.
//!
//! A cell at scale `i` spanning axes `A` with corner `c` occupies, along axis
//! `j` and in base units, `origin_j + [c_j L_j, (c_j + 1) L_j]` when `j` is in
//! `A` and the single coordinate `origin_j + c_j L_j` otherwise, where
//! `L_j = 2^(i w_j)`. The `origin` is a per-chain frame shift produced by
//! coarsening at a nonzero offset; it is kept canonical, `0 <= origin_j < L_j`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::weights::WeightTable;

pub const MAX_DIM: usize = 8;

pub type Coords = [i64; MAX_DIM];

/// Sorted set of spanned axes, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct AxisSet(pub u8);

impl AxisSet {
    pub const EMPTY: AxisSet = AxisSet(0);

    pub fn from_axes(axes: &[usize]) -> Self {
        AxisSet(axes.iter().fold(0u8, |m, &j| m | (1 << j)))
    }

    pub fn full(n: usize) -> Self {
        AxisSet(((1u16 << n) - 1) as u8)
    }

    pub fn contains(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn with(self, j: usize) -> Self {
        AxisSet(self.0 | (1 << j))
    }

    pub fn without(self, j: usize) -> Self {
        AxisSet(self.0 & !(1 << j))
    }

    pub fn complement(self, n: usize) -> Self {
        AxisSet(!self.0 & AxisSet::full(n).0)
    }

    /// Number of spanned axes strictly below `j`.
    pub fn rank_below(self, j: usize) -> usize {
        (self.0 & ((1u16 << j) - 1) as u8).count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_DIM).filter(move |&j| self.contains(j))
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All axis sets of size `d` in an `n`-dimensional space, ascending.
    pub fn all_of_size(n: usize, d: usize) -> Vec<AxisSet> {
        (0u16..(1 << n))
            .filter(|m| m.count_ones() as usize == d)
            .map(|m| AxisSet(m as u8))
            .collect()
    }
}

impl fmt::Debug for AxisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

/// A cell of one scale, without the scale itself (the owning chain has it).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridCell {
    pub axes: AxisSet,
    pub corner: Coords,
}

impl GridCell {
    pub fn new(axes: &[usize], corner: &[i64]) -> Self {
        let mut c = [0i64; MAX_DIM];
        c[..corner.len()].copy_from_slice(corner);
        GridCell {
            axes: AxisSet::from_axes(axes),
            corner: c,
        }
    }

    pub fn vertex(corner: &[i64]) -> Self {
        GridCell::new(&[], corner)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Faces with their incidence signs; `(-1)^k` for the `k`-th spanned
    /// axis, `+` on the upper face and `-` on the lower one.
    pub fn faces(&self) -> impl Iterator<Item = (GridCell, i64)> + '_ {
        self.axes.iter().enumerate().flat_map(move |(k, j)| {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let axes = self.axes.without(j);
            let lower = GridCell {
                axes,
                corner: self.corner,
            };
            let mut upper = lower;
            upper.corner[j] += 1;
            [(upper, sign), (lower, -sign)]
        })
    }
}

impl fmt::Debug for GridCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self
            .corner
            .iter()
            .rposition(|&c| c != 0)
            .map_or(0, |p| p + 1)
            .max(self.axes.iter().last().map_or(0, |j| j + 1));
        write!(f, "{:?}@{:?}", self.axes, &self.corner[..n])
    }
}

/// Sort, merge and drop zero coefficients.
pub(crate) fn normalize_terms(terms: &mut Vec<(GridCell, i64)>) {
    terms.sort_unstable_by_key(|a| a.0);
    let mut out: Vec<(GridCell, i64)> = Vec::with_capacity(terms.len());
    for &(cell, c) in terms.iter() {
        match out.last_mut() {
            Some(last) if last.0 == cell => last.1 += c,
            _ => out.push((cell, c)),
        }
    }
    out.retain(|t| t.1 != 0);
    *terms = out;
}

/// Sparse integer chain on the scale-`scale` grid of a fixed frame.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Chain {
    scale: u32,
    dim: usize,
    origin: Coords,
    terms: Vec<(GridCell, i64)>,
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Chain(scale {}, dim {}, origin {:?}) ",
            self.scale, self.dim, self.origin
        )?;
        f.debug_map()
            .entries(self.terms.iter().map(|(c, k)| (c, k)))
            .finish()
    }
}

impl Chain {
    /// The zero chain at scale `scale` in the base frame.
    pub fn zero(scale: u32, dim: usize) -> Self {
        Chain {
            scale,
            dim,
            origin: [0; MAX_DIM],
            terms: Vec::new(),
        }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> &Coords {
        &self.origin
    }

    pub fn terms(&self) -> &[(GridCell, i64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, cell: &GridCell) -> i64 {
        self.terms
            .binary_search_by(|t| t.0.cmp(cell))
            .map_or(0, |i| self.terms[i].1)
    }

    /// Sum of absolute coefficients.
    pub fn l1(&self) -> u64 {
        self.terms.iter().map(|t| t.1.unsigned_abs()).sum()
    }

    pub fn same_frame(&self, other: &Chain) -> bool {
        self.scale == other.scale && self.dim == other.dim && self.origin == other.origin
    }

    fn check_frame(&self, other: &Chain) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim, other.dim
            )));
        }
        if self.scale != other.scale || self.origin != other.origin {
            return Err(Error::ScaleMismatch(format!(
                "scale {} origin {:?} vs scale {} origin {:?}",
                self.scale, self.origin, other.scale, other.origin
            )));
        }
        Ok(())
    }

    /// `self + factor * other`; both chains must share scale, dim and frame.
    pub fn add_scaled(&self, other: &Chain, factor: i64) -> Result<Chain> {
        self.check_frame(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        terms.extend_from_slice(&self.terms);
        terms.extend(other.terms.iter().map(|&(c, k)| (c, k * factor)));
        normalize_terms(&mut terms);
        Ok(Chain { terms, ..*self })
    }

    pub fn add(&self, other: &Chain) -> Result<Chain> {
        self.add_scaled(other, 1)
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain> {
        self.add_scaled(other, -1)
    }

    pub fn neg(&self) -> Chain {
        Chain {
            terms: self.terms.iter().map(|&(c, k)| (c, -k)).collect(),
            ..*self
        }
    }

    /// Chain with the same frame and new terms (normalized).
    pub fn with_terms(&self, mut terms: Vec<(GridCell, i64)>) -> Chain {
        normalize_terms(&mut terms);
        Chain {
            terms,
            ..*self
        }
    }

    /// Chain of another dimension in the same scale and frame.
    pub fn sibling(&self, dim: usize, mut terms: Vec<(GridCell, i64)>) -> Chain {
        normalize_terms(&mut terms);
        Chain {
            dim,
            terms,
            ..*self
        }
    }

    /// Smallest vertex box (in this chain's scale units) containing the
    /// support, or `None` for the zero chain.
    pub fn bounding_box(&self, n: usize) -> Option<VertexBox> {
        let first = self.terms.first()?;
        let mut lo = first.0.corner;
        let mut hi = first.0.corner;
        for (cell, _) in &self.terms {
            for j in 0..n {
                let top = cell.corner[j] + cell.axes.contains(j) as i64;
                lo[j] = lo[j].min(cell.corner[j]);
                hi[j] = hi[j].max(top);
            }
        }
        Some(VertexBox { n, lo, hi })
    }
}

/// Closed box of grid vertices `[lo_j, hi_j]` (in some scale's units).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VertexBox {
    pub n: usize,
    pub lo: Coords,
    pub hi: Coords,
}

impl VertexBox {
    pub fn new(lo: &[i64], hi: &[i64]) -> Self {
        let mut l = [0; MAX_DIM];
        let mut h = [0; MAX_DIM];
        l[..lo.len()].copy_from_slice(lo);
        h[..hi.len()].copy_from_slice(hi);
        VertexBox {
            n: lo.len(),
            lo: l,
            hi: h,
        }
    }

    pub fn contains_cell(&self, cell: &GridCell) -> bool {
        (0..self.n).all(|j| {
            let c = cell.corner[j];
            let top = c + cell.axes.contains(j) as i64;
            c >= self.lo[j] && top <= self.hi[j]
        })
    }

    pub fn expand(&self, margin: i64) -> VertexBox {
        let mut b = *self;
        for j in 0..self.n {
            b.lo[j] -= margin;
            b.hi[j] += margin;
        }
        b
    }

    pub fn extents(&self) -> Vec<i64> {
        (0..self.n).map(|j| self.hi[j] - self.lo[j]).collect()
    }

    /// Every cell spanning exactly `axes` inside the box, in ascending order.
    pub fn cells(&self, axes: AxisSet) -> Vec<GridCell> {
        let mut ranges = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let top = if axes.contains(j) { self.hi[j] - 1 } else { self.hi[j] };
            if top < self.lo[j] {
                return Vec::new();
            }
            ranges.push((self.lo[j], top));
        }
        let mut out = Vec::new();
        let mut corner = [0i64; MAX_DIM];
        for j in 0..self.n {
            corner[j] = ranges[j].0;
        }
        loop {
            out.push(GridCell { axes, corner });
            let mut j = self.n;
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                if corner[j] < ranges[j].1 {
                    corner[j] += 1;
                    break;
                }
                corner[j] = ranges[j].0;
            }
        }
    }

    /// Every `d`-cell inside the box.
    pub fn cells_of_dim(&self, d: usize) -> Vec<GridCell> {
        let mut out = Vec::new();
        for axes in AxisSet::all_of_size(self.n, d) {
            out.extend(self.cells(axes));
        }
        out.sort_unstable();
        out
    }
}

/// The ambient multiscale complex of a group: dimension and weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicalGrid {
    weights: WeightTable,
}

impl CubicalGrid {
    pub fn new(weights: WeightTable) -> Self {
        CubicalGrid { weights }
    }

    pub fn for_group(group: &GroupSpec) -> Result<Self> {
        Ok(CubicalGrid::new(WeightTable::for_group(group)?))
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    pub fn axis_weight(&self, j: usize) -> u32 {
        self.weights.axis_weights[j]
    }

    /// Cell length along axis `j` at `scale`, in base units.
    pub fn cell_length(&self, j: usize, scale: u32) -> i64 {
        1i64 << (scale * self.axis_weight(j))
    }

    /// Child count along axis `j` for one subdivision step.
    pub fn ratio(&self, j: usize) -> i64 {
        1i64 << self.axis_weight(j)
    }

    /// Builds a chain from arbitrary terms and frame, canonicalizing the
    /// origin into `[0, L_j)`.
    pub fn chain(
        &self,
        scale: u32,
        dim: usize,
        origin: Coords,
        terms: Vec<(GridCell, i64)>,
    ) -> Result<Chain> {
        let n = self.dim();
        for (cell, _) in &terms {
            if cell.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "cell {cell:?} in a {dim}-chain"
                )));
            }
            if cell.axes.iter().any(|j| j >= n) || cell.corner[n..].iter().any(|&c| c != 0) {
                return Err(Error::DimensionMismatch(format!(
                    "cell {cell:?} outside a {n}-dimensional grid"
                )));
            }
        }
        let mut shift = [0i64; MAX_DIM];
        let mut canon = [0i64; MAX_DIM];
        for j in 0..n {
            let len = self.cell_length(j, scale);
            shift[j] = origin[j].div_euclid(len);
            canon[j] = origin[j].rem_euclid(len);
        }
        let mut terms: Vec<(GridCell, i64)> = terms
            .into_iter()
            .map(|(mut c, k)| {
                for j in 0..n {
                    c.corner[j] += shift[j];
                }
                (c, k)
            })
            .collect();
        normalize_terms(&mut terms);
        Ok(Chain {
            scale,
            dim,
            origin: canon,
            terms,
        })
    }

    /// Scale-0 chain in the base frame.
    pub fn base_chain(&self, dim: usize, terms: Vec<(GridCell, i64)>) -> Result<Chain> {
        self.chain(0, dim, [0; MAX_DIM], terms)
    }

    pub fn boundary(&self, c: &Chain) -> Result<Chain> {
        if c.dim == 0 {
            return Err(Error::BoundaryOfVertex);
        }
        let mut terms = Vec::with_capacity(c.terms.len() * 2 * c.dim);
        for &(cell, k) in &c.terms {
            terms.extend(cell.faces().map(|(f, s)| (f, s * k)));
        }
        normalize_terms(&mut terms);
        Ok(Chain {
            dim: c.dim - 1,
            terms,
            ..*c
        })
    }

    /// Dimension-0 chains count as cycles.
    pub fn is_cycle(&self, c: &Chain) -> bool {
        c.dim == 0 || self.boundary(c).map(|b| b.is_zero()).unwrap_or(false)
    }

    /// Splits every cell into its `prod_{j in A} 2^{w_j}` children at
    /// `scale - 1`, each with the parent's coefficient.
    pub fn subdivide(&self, c: &Chain) -> Result<Chain> {
        if c.scale == 0 {
            return Err(Error::SubdivideBaseScale);
        }
        let n = self.dim();
        let mut terms = Vec::new();
        for &(cell, k) in &c.terms {
            let mut base = cell;
            for j in 0..n {
                base.corner[j] *= self.ratio(j);
            }
            let mut children = vec![base];
            for j in cell.axes.iter() {
                let r = self.ratio(j);
                children = children
                    .into_iter()
                    .flat_map(|ch| {
                        (0..r).map(move |t| {
                            let mut x = ch;
                            x.corner[j] += t;
                            x
                        })
                    })
                    .collect();
            }
            terms.extend(children.into_iter().map(|ch| (ch, k)));
        }
        // finer cells need the origin reduced modulo the smaller length
        self.chain(c.scale - 1, c.dim, c.origin, terms)
    }

    pub fn subdivide_to(&self, c: &Chain, scale: u32) -> Result<Chain> {
        if scale > c.scale {
            return Err(Error::ScaleMismatch(format!(
                "cannot subdivide scale {} up to {scale}",
                c.scale
            )));
        }
        let mut out = c.clone();
        while out.scale > scale {
            out = self.subdivide(&out)?;
        }
        Ok(out)
    }

    /// `sum |coeff| * 2^(scale * k(dim))`.
    pub fn mass(&self, c: &Chain) -> u128 {
        c.l1() as u128 * self.weights.cell_mass(c.dim, c.scale)
    }

    /// Re-expresses the chain in another (same-scale) frame; both origins
    /// must differ by whole cells.
    pub fn reframe(&self, c: &Chain, origin: &Coords) -> Result<Chain> {
        let n = self.dim();
        let mut terms = c.terms.clone();
        for j in 0..n {
            let delta = c.origin[j] - origin[j];
            let len = self.cell_length(j, c.scale);
            if delta % len != 0 {
                return Err(Error::ScaleMismatch(format!(
                    "frames {:?} and {:?} are not aligned at scale {}",
                    c.origin, origin, c.scale
                )));
            }
            for t in terms.iter_mut() {
                t.0.corner[j] += delta / len;
            }
        }
        Ok(Chain {
            origin: *origin,
            terms,
            ..*c
        })
    }

    /// Translates the support by whole cells.
    pub fn translate(&self, c: &Chain, by: &[i64]) -> Chain {
        let terms = c
            .terms
            .iter()
            .map(|&(mut cell, k)| {
                for (j, &b) in by.iter().enumerate() {
                    cell.corner[j] += b;
                }
                (cell, k)
            })
            .collect();
        c.with_terms(terms)
    }

    /// The solid box of top cells `prod_j [lo_j, hi_j)` at scale 0.
    pub fn solid_box(&self, bx: &VertexBox) -> Chain {
        let n = self.dim();
        let terms = bx.cells(AxisSet::full(n)).into_iter().map(|c| (c, 1)).collect();
        Chain {
            scale: 0,
            dim: n,
            origin: [0; MAX_DIM],
            terms,
        }
    }

    /// Boundary of the solid box, generated face layer by face layer.
    pub fn box_boundary(&self, bx: &VertexBox) -> Chain {
        let n = self.dim();
        let full = AxisSet::full(n);
        let mut terms = Vec::new();
        for j in 0..n {
            if bx.hi[j] <= bx.lo[j] {
                return Chain::zero(0, n - 1);
            }
        }
        for j in 0..n {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let axes = full.without(j);
            let mut layer = *bx;
            layer.lo[j] = bx.lo[j];
            layer.hi[j] = bx.lo[j];
            terms.extend(layer.cells(axes).into_iter().map(|c| (c, -sign)));
            layer.lo[j] = bx.hi[j];
            layer.hi[j] = bx.hi[j];
            terms.extend(layer.cells(axes).into_iter().map(|c| (c, sign)));
        }
        normalize_terms(&mut terms);
        Chain {
            scale: 0,
            dim: n - 1,
            origin: [0; MAX_DIM],
            terms,
        }
    }
}
