//! Chain files: one JSON object per line, one line per cell.
//!
//! ```text
//! {"scale":0,"dim":1,"axes":[0],"corner":[0,0,0],"coeff":1}
//! ```
//!
//! `origin` (base units) may be added to lines of chains whose frame is not
//! the base frame; it defaults to all zeros.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AxisSet, Chain, CubicalGrid, GridCell, MAX_DIM};
use crate::multiscale::MultiscaleChain;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellLine {
    pub scale: u32,
    pub dim: usize,
    pub axes: Vec<usize>,
    pub corner: Vec<i64>,
    pub coeff: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<i64>>,
}

fn lines_of(grid: &CubicalGrid, c: &Chain) -> Vec<CellLine> {
    let n = grid.dim();
    let origin = c.origin()[..n].to_vec();
    let origin = origin.iter().any(|&o| o != 0).then_some(origin);
    c.terms()
        .iter()
        .map(|(cell, k)| CellLine {
            scale: c.scale(),
            dim: c.dim(),
            axes: cell.axes.to_vec(),
            corner: cell.corner[..n].to_vec(),
            coeff: *k,
            origin: origin.clone(),
        })
        .collect()
}

pub fn chain_to_jsonl(grid: &CubicalGrid, c: &Chain) -> String {
    let mut out = String::new();
    for line in lines_of(grid, c) {
        out.push_str(&serde_json::to_string(&line).expect("cell lines serialize"));
        out.push('\n');
    }
    out
}

pub fn multiscale_to_jsonl(grid: &CubicalGrid, m: &MultiscaleChain) -> String {
    m.parts().iter().map(|p| chain_to_jsonl(grid, p)).collect()
}

fn parse_lines(text: &str) -> Result<Vec<CellLine>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

fn build(grid: &CubicalGrid, lines: &[CellLine], dim: usize) -> Result<Chain> {
    let n = grid.dim();
    let first = &lines[0];
    let origin_of = |l: &CellLine| -> Result<[i64; MAX_DIM]> {
        let mut o = [0i64; MAX_DIM];
        if let Some(v) = &l.origin {
            if v.len() != n {
                return Err(Error::Parse(format!("origin {v:?} has the wrong length")));
            }
            o[..n].copy_from_slice(v);
        }
        Ok(o)
    };
    let origin = origin_of(first)?;
    let mut terms = Vec::with_capacity(lines.len());
    for l in lines {
        if l.scale != first.scale || l.dim != dim || origin_of(l)? != origin {
            return Err(Error::Parse(
                "chain lines must share scale, dim and origin".into(),
            ));
        }
        if l.axes.len() != l.dim || l.corner.len() != n {
            return Err(Error::Parse(format!(
                "cell {:?} at {:?} does not fit a {}-cell of a {n}-dimensional grid",
                l.axes, l.corner, l.dim
            )));
        }
        if l.axes.iter().any(|&j| j >= n) || l.axes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse(format!("axes {:?} must be ascending and < {n}", l.axes)));
        }
        let mut corner = [0i64; MAX_DIM];
        corner[..n].copy_from_slice(&l.corner);
        terms.push((
            GridCell {
                axes: AxisSet::from_axes(&l.axes),
                corner,
            },
            l.coeff,
        ));
    }
    grid.chain(first.scale, dim, origin, terms)
}

/// Reads a single-scale chain. An empty file is the zero chain of `dim`.
pub fn chain_from_jsonl(grid: &CubicalGrid, text: &str, dim: Option<usize>) -> Result<Chain> {
    let lines = parse_lines(text)?;
    if lines.is_empty() {
        return dim
            .map(|d| Chain::zero(0, d))
            .ok_or_else(|| Error::Parse("empty chain file needs an explicit dimension".into()));
    }
    let d = dim.unwrap_or(lines[0].dim);
    build(grid, &lines, d)
}

/// Reads a multiscale chain: lines are grouped by scale.
pub fn multiscale_from_jsonl(grid: &CubicalGrid, text: &str, dim: usize) -> Result<MultiscaleChain> {
    let mut by_scale: BTreeMap<u32, Vec<CellLine>> = BTreeMap::new();
    for l in parse_lines(text)? {
        by_scale.entry(l.scale).or_default().push(l);
    }
    let mut m = MultiscaleChain::new(dim);
    for lines in by_scale.values() {
        m.push(grid, build(grid, lines, dim)?)?;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarsen::{coarsen, Offset};
    use crate::families::sphere_cycle;
    use crate::filling::multiscale_fill;
    use crate::group::GroupSpec;

    fn h3() -> CubicalGrid {
        CubicalGrid::for_group(&GroupSpec::preset("H3").unwrap()).unwrap()
    }

    #[test]
    fn round_trips() {
        let g = h3();
        let s = sphere_cycle(&g, 2).unwrap();
        let text = chain_to_jsonl(&g, &s);
        assert_eq!(chain_from_jsonl(&g, &text, None).unwrap(), s);
        let shifted = coarsen(&g, &s, Offset::new(&[1, 1, 3])).unwrap();
        assert_ne!(shifted.origin(), &[0; MAX_DIM]);
        let text = chain_to_jsonl(&g, &shifted);
        assert!(text.contains("origin"));
        assert_eq!(chain_from_jsonl(&g, &text, None).unwrap(), shifted);
        let (beta, _) = multiscale_fill(&g, &s, &Default::default()).unwrap();
        let text = multiscale_to_jsonl(&g, &beta);
        assert_eq!(multiscale_from_jsonl(&g, &text, 3).unwrap(), beta);
    }

    #[test]
    fn rejects_bad_lines() {
        let g = h3();
        let mixed = "{\"scale\":0,\"dim\":1,\"axes\":[0],\"corner\":[0,0,0],\"coeff\":1}\n\
                     {\"scale\":1,\"dim\":1,\"axes\":[0],\"corner\":[0,0,0],\"coeff\":1}\n";
        assert!(chain_from_jsonl(&g, mixed, None).is_err());
        let short = "{\"scale\":0,\"dim\":1,\"axes\":[0],\"corner\":[0,0],\"coeff\":1}";
        assert!(chain_from_jsonl(&g, short, None).is_err());
        assert!(chain_from_jsonl(&g, "not json", None).is_err());
        assert!(chain_from_jsonl(&g, "", Some(1)).unwrap().is_zero());
    }
}
