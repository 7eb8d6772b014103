//! Cycle families used as filling inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{AxisSet, Chain, CubicalGrid, GridCell, VertexBox, MAX_DIM};
use crate::group::{GroupSpec, Point};
use crate::path::{horizontal_path, GeneratorStep};

/// Boundary of the anisotropic box `prod_j [0, r^{w_j}]` at scale 0.
///
/// For H3 this is the `r x r x r^2` box, of mass `2 r^2 + 4 r^3`.
pub fn sphere_cycle(grid: &CubicalGrid, r: u64) -> Result<Chain> {
    if r == 0 {
        return Err(Error::InvalidArgument("sphere radius must be >= 1".into()));
    }
    let n = grid.dim();
    let hi: Vec<i64> = (0..n)
        .map(|j| (r as i64).pow(grid.axis_weight(j)))
        .collect();
    Ok(grid.box_boundary(&VertexBox::new(&vec![0; n], &hi)))
}

/// Shadow of a horizontal word, drawn as grid edges in the weight-1
/// coordinates at a fixed weight-2 level.
fn word_shadow(
    group: &GroupSpec,
    steps: &[GeneratorStep],
    level: &[i64],
) -> Vec<(GridCell, i64)> {
    let m1 = group.m1();
    let mut at = [0i64; MAX_DIM];
    at[m1..m1 + level.len()].copy_from_slice(level);
    let mut out = Vec::with_capacity(steps.len());
    for s in steps {
        let mut corner = at;
        if s.sign < 0 {
            corner[s.axis] -= 1;
        }
        out.push((
            GridCell {
                axes: AxisSet::from_axes(&[s.axis]),
                corner,
            },
            s.sign as i64,
        ));
        at[s.axis] += s.sign as i64;
    }
    out
}

/// Closed horizontal loop `[a^r, b^r] . w` with `w = horizontal_path(z^{-r^2})`.
///
/// `(a, b)` is the unit-bracket pair of the first weight-2 axis `z`. The
/// commutator lifts to a path from the identity to `z^{r^2}`; the closing
/// word returns to the identity. Each part is drawn as its weight-1 shadow
/// at the level where it starts, giving two oppositely oriented `r x r`
/// squares at `z = 0` and `z = r^2`: a 1-cycle with `l1 = 8r`.
pub fn commutator_loop(group: &GroupSpec, grid: &CubicalGrid, r: u64) -> Result<Chain> {
    if r == 0 {
        return Err(Error::InvalidArgument("loop size must be >= 1".into()));
    }
    let word = commutator_word(group, r)?;
    let (bracket, closing) = word.split_at(4 * r as usize);
    let mut level = vec![0i64; group.m2()];
    let mut terms = word_shadow(group, bracket, &level);
    level[0] = (r * r) as i64;
    terms.extend(word_shadow(group, closing, &level));
    grid.base_chain(1, terms)
}

/// The full horizontal word traced by [`commutator_loop`].
pub fn commutator_word(group: &GroupSpec, r: u64) -> Result<Vec<GeneratorStep>> {
    let r = r as i64;
    let (a, b) = group.unit_bracket(0);
    let mut word = Vec::new();
    for (axis, count) in [(a, r), (b, r), (a, -r), (b, -r)] {
        let sign = if count > 0 { 1 } else { -1 };
        word.extend((0..count.abs()).map(|_| GeneratorStep::new(axis, sign)));
    }
    let mut lift = vec![0i64; group.dim()];
    lift[group.m1()] = -r * r;
    word.extend(horizontal_path(group, &Point::new(lift))?);
    Ok(word)
}

/// Random `dim`-chain at `scale` with `count` cells in `[0, extent]^n`,
/// coefficients in `{-2, -1, 1, 2}`.
pub fn random_chain<R: Rng>(
    grid: &CubicalGrid,
    scale: u32,
    dim: usize,
    extent: i64,
    count: usize,
    rng: &mut R,
) -> Result<Chain> {
    let n = grid.dim();
    if dim > n {
        return Err(Error::DimensionMismatch(format!("dim {dim} > {n}")));
    }
    if extent <= 0 {
        return Ok(Chain::zero(scale, dim));
    }
    let axis_sets = AxisSet::all_of_size(n, dim);
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let axes = axis_sets[rng.gen_range(0..axis_sets.len())];
        let mut corner = [0i64; MAX_DIM];
        for (j, c) in corner.iter_mut().enumerate().take(n) {
            let top = if axes.contains(j) { extent - 1 } else { extent };
            *c = rng.gen_range(0..=top);
        }
        let coeff = [-2, -1, 1, 2][rng.gen_range(0..4)];
        terms.push((GridCell { axes, corner }, coeff));
    }
    grid.chain(scale, dim, [0; MAX_DIM], terms)
}

/// Random `dim`-cycle in `[0, extent]^n`: the boundary of a random
/// `(dim + 1)`-chain. Deterministic per seed.
pub fn random_cycle(grid: &CubicalGrid, dim: usize, extent: i64, seed: u64) -> Result<Chain> {
    let n = grid.dim();
    if dim >= n {
        return Err(Error::DimensionMismatch(format!(
            "random cycles need dim < {n}, got {dim}"
        )));
    }
    if extent <= 0 {
        return Ok(Chain::zero(0, dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = 2 * extent as usize;
    let filler = random_chain(grid, 0, dim + 1, extent, count, &mut rng)?;
    grid.boundary(&filler)
}
