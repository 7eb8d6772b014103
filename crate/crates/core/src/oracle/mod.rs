//! Exact ground truth on small windows: minimal fillings by rational linear
//! programming, unique top-dimensional fillings, and lattice-translation
//! intersection sums.

pub mod simplex;
pub mod window;

use std::collections::HashMap;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::coarsen::CarrierBox;
use crate::error::{Error, Result};
use crate::grid::{AxisSet, Chain, CubicalGrid, GridCell, MAX_DIM};
use crate::homotopy::contract_box;
use simplex::{q, LinearProgram, LpOutcome, Q};
pub use window::{SparseMatrix, WindowComplex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Largest admissible number of LP variables.
    pub var_cap: usize,
    pub max_pivots: usize,
    /// Branch-and-bound nodes explored before giving up on integrality.
    pub node_limit: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            var_cap: 100_000,
            max_pivots: 200_000,
            node_limit: 64,
        }
    }
}

/// Result of [`minimal_filling_lp`].
#[derive(Clone, Debug, PartialEq)]
pub struct LpFilling {
    /// Optimal LP value, certified by an exactly checked dual solution.
    pub lower_bound: Q,
    /// Best integral filling found, with `d b = zeta` checked exactly.
    pub filling: Option<Chain>,
    pub vars: usize,
    pub pivots: usize,
}

impl LpFilling {
    pub fn lower_bound_f64(&self) -> f64 {
        self.lower_bound.to_f64().unwrap_or(f64::NAN)
    }

    /// Whether the integral filling attains the LP bound.
    pub fn is_optimal(&self) -> bool {
        self.filling
            .as_ref()
            .is_some_and(|b| q(b.l1() as i64) == self.lower_bound)
    }
}

fn check_input(grid: &CubicalGrid, zeta: &Chain, w: &WindowComplex) -> Result<()> {
    if zeta.scale() != 0 || zeta.origin() != &[0; MAX_DIM] {
        return Err(Error::ScaleMismatch("oracle inputs live at scale 0".into()));
    }
    if w.dim() != grid.dim() {
        return Err(Error::DimensionMismatch(format!(
            "window of dimension {} for a {}-dimensional grid",
            w.dim(),
            grid.dim()
        )));
    }
    if !w.contains(zeta) {
        return Err(Error::SupportEscapesBox(format!("{:?}", w.bounds())));
    }
    if !grid.is_cycle(zeta) {
        return Err(Error::NotACycle);
    }
    Ok(())
}

/// Minimal `l1` (scale-0 mass) filling of `zeta` among chains supported in
/// the window.
///
/// Every filling is `b0 + d c` for one fixed filling `b0` and a
/// `(d+2)`-chain `c`, since boxes are acyclic. The LP is
/// `min sum |b|` over `p - q - d c = b0` with `p, q >= 0`; its row
/// multipliers `y` satisfy `|y| <= 1`, `d^T y = 0` and `b0 . y = value`,
/// which is checked exactly before the bound is returned.
pub fn minimal_filling_lp(
    grid: &CubicalGrid,
    zeta: &Chain,
    w: &WindowComplex,
    cfg: &OracleConfig,
) -> Result<LpFilling> {
    check_input(grid, zeta, w)?;
    let n = grid.dim();
    let d = zeta.dim();
    if d >= n {
        return Err(Error::DimensionMismatch(format!("{d}-cycle in dimension {n}")));
    }
    if d + 1 == n {
        let b = unique_top_filling(grid, zeta, w)?;
        return Ok(LpFilling {
            lower_bound: q(b.l1() as i64),
            filling: Some(b),
            vars: w.cell_count(n),
            pivots: 0,
        });
    }
    let vars = 2 * w.cell_count(d + 1) + w.cell_count(d + 2);
    if vars > cfg.var_cap {
        return Err(Error::WindowTooLarge {
            vars,
            cap: cfg.var_cap,
        });
    }
    let sigmas = w.cells(d + 1);
    let taus = w.cells(d + 2);
    let b0 = contract_box(grid, zeta, &CarrierBox(*w.bounds()))?;
    let bmat = w.boundary_matrix(d + 2);

    let mut lp = LinearProgram::default();
    for _ in sigmas {
        lp.add_var(q(1), Some(q(0)), None);
        lp.add_var(q(1), Some(q(0)), None);
    }
    let c0 = lp.num_vars();
    for _ in taus {
        lp.add_var(q(0), None, None);
    }
    let mut rows: Vec<Vec<(usize, Q)>> = (0..sigmas.len())
        .map(|i| vec![(2 * i, q(1)), (2 * i + 1, q(-1))])
        .collect();
    for (t, col) in bmat.cols.iter().enumerate() {
        for &(s, v) in col {
            rows[s].push((c0 + t, q(-v)));
        }
    }
    for (i, row) in rows.into_iter().enumerate() {
        lp.add_row(row, q(b0.coeff(&sigmas[i])));
    }

    let root = match lp.solve(cfg.max_pivots) {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible => {
            return Err(Error::Internal("filling LP infeasible in a box".into()))
        }
        other => return Err(Error::Lp(format!("{other:?}"))),
    };
    certify(&bmat, &root.duals, sigmas, &b0, &root.value)?;

    let to_chain = |x: &[Q]| -> Option<Chain> {
        let mut terms = Vec::new();
        for (i, s) in sigmas.iter().enumerate() {
            let v = &x[2 * i] - &x[2 * i + 1];
            if !v.is_integer() {
                return None;
            }
            terms.push((*s, v.to_integer().to_i64()?));
        }
        Some(zeta.sibling(d + 1, terms))
    };
    let mut best = to_chain(&root.x);
    let mut pivots = root.pivots;
    if best.is_none() {
        let (b, p) = branch_and_bound(&lp, c0, &root.x, cfg, &to_chain);
        best = b;
        pivots += p;
    }
    if let Some(b) = &best {
        if grid.boundary(b)? != *zeta {
            return Err(Error::Internal("LP filling has the wrong boundary".into()));
        }
    }
    Ok(LpFilling {
        lower_bound: root.value,
        filling: best,
        vars,
        pivots,
    })
}

fn certify(bmat: &SparseMatrix, y: &[Q], sigmas: &[GridCell], b0: &Chain, value: &Q) -> Result<()> {
    if y.iter().any(|v| v.abs() > q(1)) {
        return Err(Error::Lp("dual certificate violates |y| <= 1".into()));
    }
    for col in &bmat.cols {
        let s: Q = col.iter().map(|&(r, v)| &y[r] * q(v)).sum();
        if !s.is_zero() {
            return Err(Error::Lp("dual certificate is not a cocycle".into()));
        }
    }
    let dual: Q = sigmas
        .iter()
        .zip(y)
        .map(|(s, v)| v * q(b0.coeff(s)))
        .sum();
    if &dual != value {
        return Err(Error::Lp("dual value differs from the primal optimum".into()));
    }
    Ok(())
}

fn branch_and_bound(
    root: &LinearProgram,
    c0: usize,
    x_root: &[Q],
    cfg: &OracleConfig,
    to_chain: &dyn Fn(&[Q]) -> Option<Chain>,
) -> (Option<Chain>, usize) {
    let mut best: Option<(Q, Chain)> = None;
    let mut pivots = 0;
    let mut stack: Vec<(LinearProgram, Vec<Q>)> = vec![(root.clone(), x_root.to_vec())];
    let mut nodes = 0;
    while let Some((lp, x)) = stack.pop() {
        if let Some(b) = to_chain(&x) {
            let v = q(b.l1() as i64);
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, b));
            }
            continue;
        }
        let Some(j) = (c0..x.len()).find(|&j| !x[j].is_integer()) else {
            continue;
        };
        let fl = x[j].floor();
        for (lo, hi) in [(None, Some(fl.clone())), (Some(fl.clone() + q(1)), None)] {
            nodes += 1;
            if nodes > cfg.node_limit {
                return (best.map(|b| b.1), pivots);
            }
            let mut child = lp.clone();
            if let Some(l) = lo {
                child.lower[j] = Some(l);
            }
            if let Some(h) = hi {
                child.upper[j] = Some(h);
            }
            if let LpOutcome::Optimal(s) = child.solve(cfg.max_pivots) {
                pivots += s.pivots;
                if best.as_ref().is_none_or(|(bv, _)| s.value < *bv) {
                    stack.push((child, s.x));
                }
            }
        }
    }
    (best.map(|b| b.1), pivots)
}

/// The unique `n`-chain in the window with boundary `zeta`, found by
/// integrating along the last axis.
pub fn unique_top_filling(grid: &CubicalGrid, zeta: &Chain, w: &WindowComplex) -> Result<Chain> {
    check_input(grid, zeta, w)?;
    let n = grid.dim();
    if zeta.dim() + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "top fillings need an {}-cycle, got a {}-cycle",
            n - 1,
            zeta.dim()
        )));
    }
    let last = n - 1;
    let full = AxisSet::full(n);
    let floor = full.without(last);
    // the last-axis face of a top cell enters its boundary with sign (-1)^last
    let sign = if last.is_multiple_of(2) { 1 } else { -1 };
    let mut columns: HashMap<Vec<i64>, Vec<(i64, i64)>> = HashMap::new();
    for &(cell, k) in zeta.terms() {
        if cell.axes == floor {
            let key = cell.corner[..last].to_vec();
            columns.entry(key).or_default().push((cell.corner[last], k));
        }
    }
    let mut keys: Vec<&Vec<i64>> = columns.keys().collect();
    keys.sort();
    let hi = w.bounds().hi[last];
    let mut terms = Vec::new();
    for key in keys {
        let mut events = columns[key].clone();
        events.sort_unstable();
        let mut acc = 0i64;
        for (idx, &(z, k)) in events.iter().enumerate() {
            // b(z) = b(z - 1) - sign * zeta(face at z)
            acc -= sign * k;
            let next = events.get(idx + 1).map_or(hi, |e| e.0);
            if acc != 0 {
                for t in z..next {
                    let mut corner = [0i64; MAX_DIM];
                    corner[..last].copy_from_slice(key);
                    corner[last] = t;
                    terms.push((GridCell { axes: full, corner }, acc));
                }
            }
        }
    }
    let b = zeta.sibling(n, terms);
    if !w.contains(&b) || grid.boundary(&b)? != *zeta {
        return Err(Error::NoFillingInWindow(format!(
            "integration along axis {last} does not close inside {:?}",
            w.bounds()
        )));
    }
    Ok(b)
}

fn shuffle_sign(a: AxisSet) -> i64 {
    // sign of the permutation listing a's axes, then the rest
    let mut inversions = 0;
    for i in a.iter() {
        inversions += (0..i).filter(|j| !a.contains(*j)).count();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `sum_g |i(g a, b)|` over all lattice translations `g`, where a cell of
/// `g a` meets a complementary cell of `b` iff each one's fixed coordinates
/// lie in the other's half-open footprint.
pub fn translate_intersection_sum(n: usize, a: &Chain, b: &Chain) -> Result<u64> {
    if a.dim() + b.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} + {} != {n}",
            a.dim(),
            b.dim()
        )));
    }
    let mut by_shift: HashMap<[i64; MAX_DIM], i64> = HashMap::new();
    for &(s, ka) in a.terms() {
        for &(t, kb) in b.terms() {
            if t.axes != s.axes.complement(n) {
                continue;
            }
            let mut g = [0i64; MAX_DIM];
            for j in 0..n {
                g[j] = t.corner[j] - s.corner[j];
            }
            *by_shift.entry(g).or_default() += shuffle_sign(s.axes) * ka * kb;
        }
    }
    Ok(by_shift.values().map(|v| v.unsigned_abs()).sum())
}

/// One unit `(n - d)`-cell at the origin per complementary axis set.
pub fn unit_probe(grid: &CubicalGrid, d: usize) -> Result<Chain> {
    let n = grid.dim();
    let terms = AxisSet::all_of_size(n, n - d)
        .into_iter()
        .map(|axes| {
            (
                GridCell {
                    axes,
                    corner: [0; MAX_DIM],
                },
                1,
            )
        })
        .collect();
    grid.base_chain(n - d, terms)
}

/// `sum_g |i(g a, probe)| / (l1(a) l1(probe))` against [`unit_probe`].
pub fn intersection_constant(grid: &CubicalGrid, a: &Chain) -> Result<Option<f64>> {
    let probe = unit_probe(grid, a.dim())?;
    let s = translate_intersection_sum(grid.dim(), a, &probe)?;
    let den = a.l1() * probe.l1();
    Ok((den > 0).then(|| s as f64 / den as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{commutator_loop, random_chain, sphere_cycle};
    use crate::group::GroupSpec;
    use rand::SeedableRng;

    fn h3() -> (GroupSpec, CubicalGrid) {
        let g = GroupSpec::preset("H3").unwrap();
        let grid = CubicalGrid::for_group(&g).unwrap();
        (g, grid)
    }

    #[test]
    fn single_square_lp() {
        let (_, grid) = h3();
        let sq = grid
            .base_chain(2, vec![(GridCell::new(&[0, 2], &[1, 1, 1]), 1)])
            .unwrap();
        let z = grid.boundary(&sq).unwrap();
        let w = WindowComplex::around(&z, 3, 1).unwrap();
        let r = minimal_filling_lp(&grid, &z, &w, &OracleConfig::default()).unwrap();
        assert_eq!(r.lower_bound, q(1));
        assert_eq!(r.filling.as_ref(), Some(&sq));
        assert!(r.is_optimal());
        let zero = minimal_filling_lp(&grid, &Chain::zero(0, 1), &w, &OracleConfig::default()).unwrap();
        assert_eq!(zero.lower_bound, q(0));
    }

    #[test]
    fn commutator_lp_is_two_flat_squares() {
        let (g, grid) = h3();
        for r in 1..=2u64 {
            let z = commutator_loop(&g, &grid, r).unwrap();
            let w = WindowComplex::around(&z, 3, 1).unwrap();
            let res = minimal_filling_lp(&grid, &z, &w, &OracleConfig::default()).unwrap();
            assert_eq!(res.lower_bound, q(2 * (r * r) as i64));
            assert!(res.is_optimal());
        }
    }

    #[test]
    fn window_cap() {
        let (g, grid) = h3();
        let z = commutator_loop(&g, &grid, 2).unwrap();
        let w = WindowComplex::around(&z, 3, 1).unwrap();
        let cfg = OracleConfig {
            var_cap: 10,
            ..OracleConfig::default()
        };
        assert!(matches!(
            minimal_filling_lp(&grid, &z, &w, &cfg),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn sphere_top_fillings() {
        let (_, grid) = h3();
        for r in [2u64, 4, 8] {
            let s = sphere_cycle(&grid, r).unwrap();
            let w = WindowComplex::around(&s, 3, 0).unwrap();
            let b = unique_top_filling(&grid, &s, &w).unwrap();
            assert_eq!(b.l1(), r.pow(4));
        }
        let w = WindowComplex::new(crate::grid::VertexBox::new(&[0, 0, 0], &[1, 1, 1]));
        assert!(unique_top_filling(&grid, &Chain::zero(0, 2), &w).unwrap().is_zero());
    }

    #[test]
    fn top_filling_round_trip() {
        let (_, grid) = h3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let c = random_chain(&grid, 0, 3, 4, 6, &mut rng).unwrap();
            let z = grid.boundary(&c).unwrap();
            let w = WindowComplex::new(crate::grid::VertexBox::new(&[0, 0, 0], &[4, 4, 4]));
            assert_eq!(unique_top_filling(&grid, &z, &w).unwrap(), c);
        }
    }

    #[test]
    fn intersection_sums() {
        let (_, grid) = h3();
        let v = grid.base_chain(0, vec![(GridCell::vertex(&[3, 1, 2]), 1)]).unwrap();
        let cube = grid
            .base_chain(3, vec![(GridCell::new(&[0, 1, 2], &[0, 0, 0]), 1)])
            .unwrap();
        assert_eq!(translate_intersection_sum(3, &v, &cube).unwrap(), 1);
        let e = grid.base_chain(1, vec![(GridCell::new(&[0], &[0, 0, 0]), 1)]).unwrap();
        let f = grid
            .base_chain(2, vec![(GridCell::new(&[1, 2], &[5, 5, 5]), 1)])
            .unwrap();
        assert_eq!(translate_intersection_sum(3, &e, &f).unwrap(), 1);
        assert_eq!(translate_intersection_sum(3, &Chain::zero(0, 1), &f).unwrap(), 0);
        assert!(translate_intersection_sum(3, &e, &e).is_err());
    }
}
