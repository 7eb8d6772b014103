//! Exact bounded-variable primal simplex over `BigRational`.
//!
//! Solves `min c.x` subject to `A x = b`, `l <= x <= u` (either bound may be
//! absent). The starting basis uses singleton columns where they fit and
//! artificial columns elsewhere. Pricing is Dantzig's rule, switching to
//! Bland's rule after a run of degenerate pivots.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(v: i64) -> Q {
    BigRational::from_integer(BigInt::from(v))
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub cost: Vec<Q>,
    pub lower: Vec<Option<Q>>,
    pub upper: Vec<Option<Q>>,
    /// Sparse rows of `A`.
    pub rows: Vec<Vec<(usize, Q)>>,
    pub rhs: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Q>,
    pub value: Q,
    /// Row multipliers `y` with reduced costs `c - A^T y`.
    pub duals: Vec<Q>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn add_var(&mut self, cost: Q, lower: Option<Q>, upper: Option<Q>) -> usize {
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, entries: Vec<(usize, Q)>, rhs: Q) -> usize {
        self.rows.push(entries);
        self.rhs.push(rhs);
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn solve(&self, max_pivots: usize) -> LpOutcome {
        Tableau::build(self).run(self, max_pivots)
    }
}

type Row = HashMap<usize, Q>;

struct Tableau {
    /// `B^{-1} A`, one sparse row per constraint, over original and
    /// artificial columns.
    t: Vec<Row>,
    basis: Vec<usize>,
    x: Vec<Q>,
    lower: Vec<Option<Q>>,
    upper: Vec<Option<Q>>,
    /// Column used as the initial basic variable of each row, with the sign
    /// the row was scaled by.
    start: Vec<(usize, Q)>,
    n_orig: usize,
}

fn add_into(row: &mut Row, col: usize, v: Q) {
    if v.is_zero() {
        return;
    }
    match row.get_mut(&col) {
        Some(e) => {
            *e += v;
            if e.is_zero() {
                row.remove(&col);
            }
        }
        None => {
            row.insert(col, v);
        }
    }
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut x: Vec<Q> = (0..n)
            .map(|j| match (&lower[j], &upper[j]) {
                (Some(l), _) => l.clone(),
                (None, Some(u)) => u.clone(),
                (None, None) => Q::zero(),
            })
            .collect();
        let mut t: Vec<Row> = lp
            .rows
            .iter()
            .map(|r| {
                let mut row = Row::new();
                for (j, v) in r {
                    add_into(&mut row, *j, v.clone());
                }
                row
            })
            .collect();
        let mut col_count = vec![0usize; n];
        for r in &t {
            for j in r.keys() {
                col_count[*j] += 1;
            }
        }
        let mut basis = Vec::with_capacity(m);
        let mut start = Vec::with_capacity(m);
        let mut used = vec![false; n];
        let mut n_art = 0;
        for i in 0..m {
            let residual: Q = lp.rhs[i].clone()
                - t[i].iter().map(|(j, v)| v * &x[*j]).sum::<Q>();
            // a singleton column can absorb the residual if the implied
            // value respects its bounds
            let pick = t[i]
                .iter()
                .filter(|(j, _)| col_count[**j] == 1 && !used[**j])
                .filter_map(|(j, a)| {
                    let val = &x[*j] + &residual / a;
                    let ok = lower[*j].as_ref().is_none_or(|l| &val >= l)
                        && upper[*j].as_ref().is_none_or(|u| &val <= u);
                    ok.then(|| (*j, a.clone(), val))
                })
                .min_by_key(|e| e.0);
            match pick {
                Some((j, a, val)) => {
                    used[j] = true;
                    x[j] = val;
                    for v in t[i].values_mut() {
                        *v /= &a;
                    }
                    basis.push(j);
                    start.push((j, a));
                }
                None => {
                    let col = n + n_art;
                    n_art += 1;
                    let s = if residual.is_negative() { q(-1) } else { q(1) };
                    if s.is_negative() {
                        for v in t[i].values_mut() {
                            *v = -v.clone();
                        }
                    }
                    t[i].insert(col, Q::one());
                    x.push(residual.abs());
                    lower.push(Some(Q::zero()));
                    upper.push(None);
                    basis.push(col);
                    start.push((col, s));
                }
            }
        }
        Tableau {
            t,
            basis,
            x,
            lower,
            upper,
            start,
            n_orig: n,
        }
    }

    fn reduced_costs(&self, cost: &[Q]) -> Row {
        let mut d = Row::new();
        for (j, c) in cost.iter().enumerate() {
            add_into(&mut d, j, c.clone());
        }
        for (i, row) in self.t.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in row {
                add_into(&mut d, *j, -(cb * v));
            }
        }
        d
    }

    fn can_increase(&self, j: usize) -> bool {
        self.upper[j].as_ref().is_none_or(|u| &self.x[j] < u)
    }

    fn can_decrease(&self, j: usize) -> bool {
        self.lower[j].as_ref().is_none_or(|l| &self.x[j] > l)
    }

    /// One simplex phase on `cost` (over all columns). Returns `false` if
    /// unbounded.
    fn optimize(&mut self, cost: &[Q], allowed: &dyn Fn(usize) -> bool, budget: &mut usize) -> Option<bool> {
        let mut d = self.reduced_costs(cost);
        let mut is_basic = vec![false; self.x.len()];
        for &b in &self.basis {
            is_basic[b] = true;
        }
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run > 50;
            let mut best: Option<(usize, i8, Q)> = None;
            let mut keys: Vec<usize> = d.keys().copied().collect();
            keys.sort_unstable();
            for j in keys {
                if is_basic[j] || !allowed(j) {
                    continue;
                }
                let dj = &d[&j];
                let dir = if dj.is_negative() && self.can_increase(j) {
                    1
                } else if dj.is_positive() && self.can_decrease(j) {
                    -1
                } else {
                    continue;
                };
                let score = dj.abs();
                if bland {
                    best = Some((j, dir, score));
                    break;
                }
                if best.as_ref().is_none_or(|b| score > b.2) {
                    best = Some((j, dir, score));
                }
            }
            let Some((e, dir, _)) = best else {
                return Some(true);
            };
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            let sgn = q(dir as i64);
            // ratio test: x_B(i) changes at rate -dir * t_ie
            let mut step: Option<Q> = match (&self.lower[e], &self.upper[e]) {
                (Some(l), Some(u)) => Some(u - l),
                _ => None,
            };
            let mut leave: Option<(usize, bool)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let Some(a) = row.get(&e) else { continue };
                let rate = -(&sgn * a);
                let b = self.basis[i];
                let limit = if rate.is_negative() {
                    self.lower[b].as_ref().map(|l| ((&self.x[b] - l) / -&rate, false))
                } else {
                    self.upper[b].as_ref().map(|u| ((u - &self.x[b]) / &rate, true))
                };
                let Some((lim, at_upper)) = limit else { continue };
                let better = match &step {
                    None => true,
                    Some(s) => {
                        lim < *s
                            || (lim == *s
                                && leave.is_some_and(|(r, _)| b < self.basis[r]))
                    }
                };
                if better {
                    step = Some(lim);
                    leave = Some((i, at_upper));
                }
            }
            let Some(step) = step else {
                return Some(false);
            };
            if step.is_zero() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for (i, row) in self.t.iter().enumerate() {
                if let Some(a) = row.get(&e) {
                    let b = self.basis[i];
                    self.x[b] = &self.x[b] - &sgn * a * &step;
                }
            }
            self.x[e] = &self.x[e] + &sgn * &step;
            let Some((r, at_upper)) = leave else {
                // bound flip
                continue;
            };
            let out = self.basis[r];
            self.x[out] = if at_upper {
                self.upper[out].clone().unwrap()
            } else {
                self.lower[out].clone().unwrap()
            };
            let piv = self.t[r][&e].clone();
            for v in self.t[r].values_mut() {
                *v /= &piv;
            }
            let prow: Vec<(usize, Q)> = self.t[r].iter().map(|(j, v)| (*j, v.clone())).collect();
            for i in 0..self.t.len() {
                if i == r {
                    continue;
                }
                let Some(f) = self.t[i].get(&e).cloned() else { continue };
                for (j, v) in &prow {
                    add_into(&mut self.t[i], *j, -(&f * v));
                }
            }
            if let Some(f) = d.get(&e).cloned() {
                for (j, v) in &prow {
                    add_into(&mut d, *j, -(&f * v));
                }
            }
            self.basis[r] = e;
            is_basic[out] = false;
            is_basic[e] = true;
        }
    }

    fn run(mut self, lp: &LinearProgram, max_pivots: usize) -> LpOutcome {
        let total = self.x.len();
        let n = self.n_orig;
        let mut budget = max_pivots;
        if total > n {
            let cost1: Vec<Q> = (0..total).map(|j| if j >= n { q(1) } else { Q::zero() }).collect();
            match self.optimize(&cost1, &|_| true, &mut budget) {
                None => return LpOutcome::IterationLimit,
                Some(false) => return LpOutcome::Infeasible,
                Some(true) => {}
            }
            if self.x[n..].iter().any(|v| !v.is_zero()) {
                return LpOutcome::Infeasible;
            }
            for j in n..total {
                self.upper[j] = Some(Q::zero());
            }
        }
        let mut cost2 = lp.cost.clone();
        cost2.resize(total, Q::zero());
        match self.optimize(&cost2, &|j| j < n, &mut budget) {
            None => return LpOutcome::IterationLimit,
            Some(false) => return LpOutcome::Unbounded,
            Some(true) => {}
        }
        let d = self.reduced_costs(&cost2);
        let duals: Vec<Q> = self
            .start
            .iter()
            .map(|(j, s)| {
                let dj = d.get(j).cloned().unwrap_or_else(Q::zero);
                (&cost2[*j] - dj) / s
            })
            .collect();
        let x: Vec<Q> = self.x[..n].to_vec();
        let value = x.iter().zip(&lp.cost).map(|(a, c)| a * c).sum();
        LpOutcome::Optimal(LpSolution {
            x,
            value,
            duals,
            pivots: max_pivots - budget,
        })
    }
}
