//! Browser bindings: every entry point takes plain values and returns a JSON
//! string, `{"error": ...}` on failure.

use carnot_fill::coarsen::{coarsen, Offset};
use carnot_fill::families::{commutator_loop, sphere_cycle};
use carnot_fill::filling::{multiscale_fill, FillConfig, OffsetPolicy};
use carnot_fill::grid::{Chain, CubicalGrid};
use carnot_fill::group::{GroupSpec, Point};
use carnot_fill::path::{horizontal_path, trace};
use carnot_fill::Result;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn setup(group: &str) -> Result<(GroupSpec, CubicalGrid)> {
    let g = GroupSpec::preset(group)?;
    let grid = CubicalGrid::for_group(&g)?;
    Ok((g, grid))
}

fn respond<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).expect("demo values serialize"),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// A cell as its box `[lo, hi]` in base-scale coordinates.
#[derive(Serialize)]
struct Drawn {
    coeff: i64,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

fn draw(grid: &CubicalGrid, c: &Chain) -> Vec<Drawn> {
    let n = grid.dim();
    let s = c.scale();
    c.terms()
        .iter()
        .map(|(cell, k)| {
            let lo: Vec<i64> = (0..n)
                .map(|j| c.origin()[j] + cell.corner[j] * grid.cell_length(j, s))
                .collect();
            let hi = (0..n)
                .map(|j| lo[j] + i64::from(cell.axes.contains(j)) * grid.cell_length(j, s))
                .collect();
            Drawn { coeff: *k, lo, hi }
        })
        .collect()
}

fn family(g: &GroupSpec, grid: &CubicalGrid, name: &str, r: u32) -> Result<Chain> {
    match name {
        "sphere" => sphere_cycle(grid, r as u64),
        _ => commutator_loop(g, grid, r as u64),
    }
}

/// Horizontal path from the identity to `target`: the word and the visited
/// lattice points.
#[wasm_bindgen]
pub fn path_trace(group: &str, target: Vec<i64>) -> String {
    respond((|| {
        let (g, _) = setup(group)?;
        let p = Point::new(target);
        let steps = horizontal_path(&g, &p)?;
        let pts = trace(&g, &steps)?;
        Ok(json!({
            "length": steps.len(),
            "quasi_norm": g.quasi_norm(&p)?,
            "word": steps.iter().map(|s| json!([s.axis, s.sign])).collect::<Vec<_>>(),
            "points": pts.iter().map(|p| p.coords.clone()).collect::<Vec<_>>(),
        }))
    })())
}

/// A family cycle and its coarsening at one offset.
#[wasm_bindgen]
pub fn coarsen_at(group: &str, fam: &str, r: u32, offset: Vec<i64>) -> String {
    respond((|| {
        let (g, grid) = setup(group)?;
        let alpha = family(&g, &grid, fam, r)?;
        let o = Offset::new(&offset);
        o.validate(&grid)?;
        let coarse = coarsen(&grid, &alpha, o)?;
        Ok(json!({
            "fine": draw(&grid, &alpha),
            "coarse": draw(&grid, &coarse),
            "l1_fine": alpha.l1(),
            "l1_coarse": coarse.l1(),
        }))
    })())
}

/// Multiscale filling of a family cycle: per-scale parts and the report.
#[wasm_bindgen]
pub fn fill(group: &str, fam: &str, r: u32, policy: &str) -> String {
    respond((|| {
        let (g, grid) = setup(group)?;
        let alpha = family(&g, &grid, fam, r)?;
        let cfg = FillConfig {
            policy: policy.parse::<OffsetPolicy>()?,
            ..FillConfig::default()
        };
        let (beta, report) = multiscale_fill(&grid, &alpha, &cfg)?;
        let parts: Vec<_> = beta
            .parts()
            .iter()
            .map(|p| json!({ "scale": p.scale(), "cells": draw(&grid, p) }))
            .collect();
        Ok(json!({
            "cycle": draw(&grid, &alpha),
            "parts": parts,
            "V": grid.mass(&alpha),
            "report": report,
        }))
    })())
}
