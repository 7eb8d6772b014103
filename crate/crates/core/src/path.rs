//! Horizontal words reaching arbitrary lattice points.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::group::{GroupSpec, Point};

/// A unit move `p -> p . (sign * e_axis)` along a weight-1 axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorStep {
    pub axis: usize,
    pub sign: i8,
}

impl GeneratorStep {
    pub fn new(axis: usize, sign: i8) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        GeneratorStep { axis, sign }
    }

    pub fn as_point(&self, group: &GroupSpec) -> Point {
        let mut c = vec![0; group.dim()];
        c[self.axis] = self.sign as i64;
        Point::new(c)
    }
}

fn repeat(out: &mut Vec<GeneratorStep>, axis: usize, count: i64) {
    let sign = if count >= 0 { 1 } else { -1 };
    out.extend((0..count.unsigned_abs()).map(|_| GeneratorStep::new(axis, sign)));
}

/// Rectangle commutator `a^p b^q a^-p b^-q`; adds `p * q * [e_a, e_b]`.
fn rectangle(out: &mut Vec<GeneratorStep>, a: usize, b: usize, p: i64, q: i64) {
    repeat(out, a, p);
    repeat(out, b, q);
    repeat(out, a, -p);
    repeat(out, b, -q);
}

/// Loops adding `amount * [e_a, e_b]`: one `s x b` rectangle with
/// `s = floor(sqrt |amount|)` and a thin `t x 1` rectangle for the rest.
fn area_loops(out: &mut Vec<GeneratorStep>, a: usize, b: usize, amount: i64) {
    if amount == 0 {
        return;
    }
    // a negative area is the same loop with the two axes swapped
    let (a, b) = if amount > 0 { (a, b) } else { (b, a) };
    let z = amount.unsigned_abs();
    let s = num_integer::Roots::sqrt(&z);
    let q = z / s;
    let t = z - s * q;
    rectangle(out, a, b, s as i64, q as i64);
    if t > 0 {
        rectangle(out, a, b, t as i64, 1);
    }
}

/// A word in the weight-1 generators whose product is exactly `target`.
///
/// The weight-1 coordinates are reached first by straight runs in ascending
/// axis order; each remaining weight-2 component is then produced by
/// commutator rectangles on its unit-bracket pair. Rectangles are central,
/// so they can be appended in any order.
pub fn horizontal_path(group: &GroupSpec, target: &Point) -> Result<Vec<GeneratorStep>> {
    group.quasi_norm(target)?; // length check
    let m1 = group.m1();
    let mut steps = Vec::new();
    for axis in 0..m1 {
        repeat(&mut steps, axis, target.coords[axis]);
    }
    let reached = endpoint(group, &steps)?;
    for k in 0..group.m2() {
        let residual = target.coords[m1 + k] - reached.coords[m1 + k];
        let (a, b) = group.unit_bracket(k);
        area_loops(&mut steps, a, b, residual);
    }
    Ok(steps)
}

/// Product of the steps starting from the identity.
pub fn endpoint(group: &GroupSpec, steps: &[GeneratorStep]) -> Result<Point> {
    trace(group, steps).map(|mut v| v.pop().unwrap())
}

/// All visited points, starting with the identity.
pub fn trace(group: &GroupSpec, steps: &[GeneratorStep]) -> Result<Vec<Point>> {
    let mut at = group.identity();
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(at.clone());
    for s in steps {
        at = group.mul(&at, &s.as_point(group))?;
        out.push(at.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h3() -> GroupSpec {
        GroupSpec::preset("H3").unwrap()
    }

    fn st(axis: usize, sign: i8) -> GeneratorStep {
        GeneratorStep::new(axis, sign)
    }

    #[test]
    fn horizontal_target() {
        let g = h3();
        let w = horizontal_path(&g, &Point::new(vec![1, 0, 0])).unwrap();
        assert_eq!(w, vec![st(0, 1)]);
    }

    #[test]
    fn unit_commutator() {
        let g = h3();
        let w = horizontal_path(&g, &Point::new(vec![0, 0, 1])).unwrap();
        assert_eq!(w, vec![st(0, 1), st(1, 1), st(0, -1), st(1, -1)]);
        assert_eq!(endpoint(&g, &w).unwrap(), Point::new(vec![0, 0, 1]));
    }

    #[test]
    fn side_two_square() {
        let g = h3();
        let w = horizontal_path(&g, &Point::new(vec![0, 0, 4])).unwrap();
        let expect = vec![
            st(0, 1),
            st(0, 1),
            st(1, 1),
            st(1, 1),
            st(0, -1),
            st(0, -1),
            st(1, -1),
            st(1, -1),
        ];
        assert_eq!(w, expect);
        assert_eq!(endpoint(&g, &w).unwrap(), Point::new(vec![0, 0, 4]));
    }

    #[test]
    fn mixed_targets_hit_exactly() {
        for name in ["H3", "H5"] {
            let g = GroupSpec::preset(name).unwrap();
            let n = g.dim();
            for seed in 0..200i64 {
                let c: Vec<i64> = (0..n)
                    .map(|j| ((seed * 7919 + j as i64 * 104729) % 41) - 20)
                    .collect();
                let t = Point::new(c);
                let w = horizontal_path(&g, &t).unwrap();
                assert_eq!(endpoint(&g, &w).unwrap(), t);
            }
        }
    }
}
