//! Chain homotopy between a fine cycle and the subdivision of its coarsening.
//!
//! `Q` is built cell by cell, by induction on dimension:
//! `Q(tau) = contract(sub P(tau) - tau - Q(d tau))` inside the carrier of
//! `tau`, so that `dQ(tau) + Q(d tau) = sub P(tau) - tau` holds exactly.

use std::collections::HashMap;

use crate::coarsen::{CarrierBox, CoarseGrid, Offset};
use crate::error::{Error, Result};
use crate::grid::{normalize_terms, Chain, CubicalGrid, GridCell, VertexBox};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

type Terms = Vec<(GridCell, i64)>;

/// Prism contraction of a cycle onto the lower corner of a box, axis by
/// axis. Returns `F` with `dF = z` and support in the box.
pub fn contract_box(grid: &CubicalGrid, z: &Chain, bx: &CarrierBox) -> Result<Chain> {
    let n = grid.dim();
    if z.dim() >= n && !z.is_zero() {
        return Err(Error::Internal(format!(
            "nonzero top-dimensional cycle in a box: {z:?}"
        )));
    }
    if !grid.is_cycle(z) {
        return Err(Error::NotACycle);
    }
    let terms = contract_terms(n, z.terms(), &bx.0)?;
    Ok(z.sibling(z.dim() + 1, terms))
}

fn contract_terms(n: usize, z: &[(GridCell, i64)], bx: &VertexBox) -> Result<Terms> {
    if let Some((cell, _)) = z.iter().find(|(c, _)| !bx.contains_cell(c)) {
        return Err(Error::SupportEscapesBox(format!("{cell:?} not in {bx:?}")));
    }
    let mut cur: Terms = z.to_vec();
    let mut filling: Terms = Vec::new();
    for j in 0..n {
        let lo = bx.lo[j];
        for &(cell, k) in &cur {
            if cell.axes.contains(j) {
                continue;
            }
            let axes = cell.axes.with(j);
            let sign = if axes.rank_below(j) % 2 == 0 { 1 } else { -1 };
            for b in lo..cell.corner[j] {
                let mut corner = cell.corner;
                corner[j] = b;
                filling.push((GridCell { axes, corner }, sign * k));
            }
        }
        cur = cur
            .into_iter()
            .filter(|(c, _)| !c.axes.contains(j))
            .map(|(mut c, k)| {
                c.corner[j] = lo;
                (c, k)
            })
            .collect();
        normalize_terms(&mut cur);
    }
    if !cur.is_empty() {
        return Err(if cur[0].0.dim() == 0 {
            Error::NotACycle
        } else {
            Error::Internal(format!("contraction left {cur:?}"))
        });
    }
    normalize_terms(&mut filling);
    Ok(filling)
}

/// One coarsening step with its bridge: `dH = sub(alpha_next) - alpha`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyStep {
    pub alpha: Chain,
    pub offset: Offset,
    pub alpha_next: Chain,
    pub bridge: Chain,
    pub mass: u128,
}

impl HomotopyStep {
    /// `mass(H) / (2^{i k(d+1)} l1(alpha_next))`, when the next cycle is
    /// nonzero.
    pub fn homotopy_constant(&self) -> Option<f64> {
        let next = self.alpha_next.l1();
        (next > 0).then(|| self.bridge.l1() as f64 / next as f64)
    }
}

/// Memoized per-cell homotopy for one coarsening step.
pub struct Homotopy<'a> {
    cg: CoarseGrid<'a>,
    memo: HashMap<GridCell, Terms>,
}

impl<'a> Homotopy<'a> {
    pub fn new(grid: &'a CubicalGrid, offset: Offset) -> Self {
        Homotopy {
            cg: CoarseGrid::new(grid, offset),
            memo: HashMap::new(),
        }
    }

    pub fn coarse(&self) -> &CoarseGrid<'a> {
        &self.cg
    }

    pub fn carrier(&self, cell: &GridCell) -> CarrierBox {
        self.cg.carrier(cell)
    }

    /// Edge path from `v` to its coarse vertex, one axis at a time in
    /// ascending order.
    fn vertex_path(&self, v: &GridCell) -> Terms {
        let target = self.cg.project_cell(v).expect("vertices always project");
        let mut at = v.corner;
        let mut path = Vec::new();
        for j in 0..self.cg.grid().dim() {
            let goal = self.cg.plane(j, target.corner[j]);
            let axes = crate::grid::AxisSet::from_axes(&[j]);
            while at[j] != goal {
                let step = (goal - at[j]).signum();
                let mut corner = at;
                if step < 0 {
                    corner[j] -= 1;
                }
                path.push((GridCell { axes, corner }, step));
                at[j] += step;
            }
        }
        path
    }

    /// `sub P(tau) - tau - Q(d tau)`; faces must already be memoized.
    fn defect(&self, cell: &GridCell) -> Terms {
        let mut rho: Terms = Vec::new();
        if let Some(p) = self.cg.project_cell(cell) {
            rho.extend(self.cg.children(&p).into_iter().map(|c| (c, 1)));
        }
        rho.push((*cell, -1));
        if cell.dim() > 0 {
            for (f, s) in cell.faces() {
                let qf = &self.memo[&f];
                rho.extend(qf.iter().map(|&(c, k)| (c, -s * k)));
            }
        }
        normalize_terms(&mut rho);
        rho
    }

    fn solve(&self, cell: &GridCell) -> Result<Terms> {
        if cell.dim() == 0 {
            return Ok(self.vertex_path(cell));
        }
        let rho = self.defect(cell);
        contract_terms(self.cg.grid().dim(), &rho, &self.carrier(cell).0)
    }

    /// Memoizes `Q` on the closure of the given cells, one dimension level
    /// at a time.
    pub fn prepare(&mut self, cells: &[GridCell]) -> Result<()> {
        let top = match cells.iter().map(|c| c.dim()).max() {
            Some(d) => d,
            None => return Ok(()),
        };
        let mut levels: Vec<Vec<GridCell>> = vec![Vec::new(); top + 1];
        for c in cells {
            levels[c.dim()].push(*c);
        }
        for d in (1..=top).rev() {
            let mut faces: Vec<GridCell> = levels[d]
                .iter()
                .flat_map(|c| c.faces().map(|f| f.0).collect::<Vec<_>>())
                .collect();
            levels[d - 1].append(&mut faces);
        }
        for level in levels.iter_mut() {
            level.sort_unstable();
            level.dedup();
            level.retain(|c| !self.memo.contains_key(c));
            let this = &*self;
            #[cfg(feature = "parallel")]
            let solved: Vec<Result<Terms>> = level.par_iter().map(|c| this.solve(c)).collect();
            #[cfg(not(feature = "parallel"))]
            let solved: Vec<Result<Terms>> = level.iter().map(|c| this.solve(c)).collect();
            for (c, q) in level.iter().zip(solved) {
                self.memo.insert(*c, q?);
            }
        }
        Ok(())
    }

    /// `Q(tau)` for one fine cell.
    pub fn q_cell(&mut self, cell: &GridCell) -> Result<&[(GridCell, i64)]> {
        self.prepare(std::slice::from_ref(cell))?;
        Ok(&self.memo[cell])
    }

    /// `Q` extended linearly to a chain; result lives in the chain's frame.
    pub fn q_chain(&mut self, c: &Chain) -> Result<Chain> {
        let cells: Vec<GridCell> = c.terms().iter().map(|t| t.0).collect();
        self.prepare(&cells)?;
        let mut terms: Terms = Vec::new();
        for &(cell, k) in c.terms() {
            terms.extend(self.memo[&cell].iter().map(|&(q, s)| (q, s * k)));
        }
        Ok(c.sibling(c.dim() + 1, terms))
    }

    /// Checks `dQ(tau) + Q(d tau) = sub P(tau) - tau` and the support of
    /// `Q(tau)` for one cell.
    pub fn check_cell(&mut self, cell: &GridCell) -> Result<bool> {
        let grid = self.cg.grid();
        let single = grid.base_chain(cell.dim(), vec![(*cell, 1)])?;
        let q = self.q_chain(&single)?;
        if !q.terms().iter().all(|(c, _)| self.carrier(cell).0.contains_cell(c)) {
            return Ok(false);
        }
        let mut lhs = grid.boundary(&q)?;
        if cell.dim() > 0 {
            let faces = grid.boundary(&single)?;
            lhs = lhs.add(&self.q_chain(&faces)?)?;
        }
        let mut rhs: Terms = vec![(*cell, -1)];
        if let Some(p) = self.cg.project_cell(cell) {
            rhs.extend(self.cg.children(&p).into_iter().map(|c| (c, 1)));
        }
        Ok(lhs == single.with_terms(rhs))
    }
}

/// Builds `H = Q(alpha)` for a cycle and one offset, and checks the bridge
/// identity `dH = sub(coarsen(alpha)) - alpha` exactly.
pub fn chain_homotopy_q(grid: &CubicalGrid, alpha: &Chain, offset: Offset) -> Result<HomotopyStep> {
    offset.validate(grid)?;
    if !grid.is_cycle(alpha) {
        return Err(Error::NotACycle);
    }
    let mut h = Homotopy::new(grid, offset);
    let alpha_next = h.coarse().coarsen(alpha)?;
    let bridge = h.q_chain(alpha)?;
    let sub = h.coarse().refine(&alpha_next, alpha)?;
    if grid.boundary(&bridge)? != sub.sub(alpha)? {
        return Err(Error::Internal(format!(
            "bridge identity failed at scale {} offset {:?}",
            alpha.scale(),
            offset.as_slice(grid.dim())
        )));
    }
    let mass = grid.mass(&bridge);
    Ok(HomotopyStep {
        alpha: alpha.clone(),
        offset,
        alpha_next,
        bridge,
        mass,
    })
}
