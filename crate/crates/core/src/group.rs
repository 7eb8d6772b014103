//! Step-2 Carnot groups in exponential coordinates of the second kind.
//!
//! A group is given by layer dimensions `m1`, `m2` and an integer bilinear
//! form `beta: Z^m1 x Z^m1 -> Z^m2`. The product is
//!
//! ```text
//! (x1, x2) . (y1, y2) = (x1 + y1, x2 + y2 + beta(x1, y1))
//! ```
//!
//! which keeps `Z^(m1+m2)` closed under multiplication, so the integer points
//! are a lattice. The Lie bracket of two weight-1 vectors is
//! `beta(u, v) - beta(v, u)`.

use num_integer::Roots;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::MAX_DIM;

/// One nonzero entry of the structure tensor: `beta(e_i, e_j)` has
/// component `value` along the `k`-th weight-2 axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaEntry(pub usize, pub usize, pub usize, pub i64);

/// On-disk form of a group description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpecFile {
    pub name: String,
    pub m1: usize,
    pub m2: usize,
    pub beta: Vec<BetaEntry>,
    /// Optional mass exponents `k(1..=n)`; defaults are derived when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    name: String,
    m1: usize,
    m2: usize,
    /// Dense `beta[i][j][k]`.
    beta: Vec<Vec<Vec<i64>>>,
    /// For each weight-2 axis, a weight-1 pair `(i, j)` with
    /// `[e_i, e_j] = e_k` exactly.
    unit_brackets: Vec<(usize, usize)>,
    user_k: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<i64>,
}

impl Point {
    pub fn new(coords: Vec<i64>) -> Self {
        Point { coords }
    }
}

impl From<&[i64]> for Point {
    fn from(c: &[i64]) -> Self {
        Point { coords: c.to_vec() }
    }
}

impl GroupSpec {
    /// The integral Heisenberg group `H_{2n+1}` with the standard symplectic
    /// pairing `beta(e_{2l}, e_{2l+1}) = e_z`.
    pub fn heisenberg(n: usize) -> Result<Self> {
        let beta = (0..n).map(|l| BetaEntry(2 * l, 2 * l + 1, 0, 1)).collect();
        GroupSpec::from_file(GroupSpecFile {
            name: format!("H{}", 2 * n + 1),
            m1: 2 * n,
            m2: 1,
            beta,
            k: None,
        })
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "H3" | "h3" => GroupSpec::heisenberg(1),
            "H5" | "h5" => GroupSpec::heisenberg(2),
            "H7" | "h7" => GroupSpec::heisenberg(3),
            other => Err(Error::InvalidGroup(format!("unknown preset {other:?}"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GroupSpecFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        GroupSpec::from_file(file)
    }

    pub fn from_file(file: GroupSpecFile) -> Result<Self> {
        let GroupSpecFile {
            name,
            m1,
            m2,
            beta: entries,
            k,
        } = file;
        let n = m1 + m2;
        if n < 3 || m2 < 1 || m1 < 2 {
            return Err(Error::InvalidGroup(format!(
                "need m1 >= 2, m2 >= 1 and m1 + m2 >= 3 (got m1={m1}, m2={m2})"
            )));
        }
        if n > MAX_DIM {
            return Err(Error::InvalidGroup(format!(
                "dimension {n} exceeds the supported maximum {MAX_DIM}"
            )));
        }
        let mut beta = vec![vec![vec![0i64; m2]; m1]; m1];
        for BetaEntry(i, j, kk, v) in entries {
            if i >= m1 || j >= m1 || kk >= m2 {
                return Err(Error::InvalidGroup(format!(
                    "beta entry ({i}, {j}, {kk}) out of range"
                )));
            }
            beta[i][j][kk] += v;
        }

        let bracket = |i: usize, j: usize| -> Vec<i64> {
            (0..m2).map(|kk| beta[i][j][kk] - beta[j][i][kk]).collect()
        };
        let mut vectors = Vec::new();
        for i in 0..m1 {
            for j in (i + 1)..m1 {
                vectors.push(bracket(i, j));
            }
        }
        let rank = integer_rank(&vectors, m2);
        if rank < m2 {
            return Err(Error::NotBracketGenerating { rank, m2 });
        }
        let mut unit_brackets = Vec::with_capacity(m2);
        for kk in 0..m2 {
            let mut found = None;
            'search: for i in 0..m1 {
                for j in 0..m1 {
                    if i == j {
                        continue;
                    }
                    let b = bracket(i, j);
                    if b.iter()
                        .enumerate()
                        .all(|(t, &v)| v == if t == kk { 1 } else { 0 })
                    {
                        found = Some((i, j));
                        break 'search;
                    }
                }
            }
            match found {
                Some(p) => unit_brackets.push(p),
                None => {
                    return Err(Error::InvalidGroup(format!(
                        "no pair of weight-1 axes brackets to the unit vector e_{kk}; \
                         horizontal path synthesis needs one per weight-2 axis"
                    )))
                }
            }
        }

        let spec = GroupSpec {
            name,
            m1,
            m2,
            beta,
            unit_brackets,
            user_k: k,
        };
        // validate the weight table eagerly so bad `k` fails at load time
        crate::weights::WeightTable::for_group(&spec)?;
        Ok(spec)
    }

    pub fn to_file(&self) -> GroupSpecFile {
        let mut beta = Vec::new();
        for i in 0..self.m1 {
            for j in 0..self.m1 {
                for kk in 0..self.m2 {
                    if self.beta[i][j][kk] != 0 {
                        beta.push(BetaEntry(i, j, kk, self.beta[i][j][kk]));
                    }
                }
            }
        }
        GroupSpecFile {
            name: self.name.clone(),
            m1: self.m1,
            m2: self.m2,
            beta,
            k: self.user_k.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    /// Topological dimension `n_G = m1 + m2`.
    pub fn dim(&self) -> usize {
        self.m1 + self.m2
    }

    /// Volume growth exponent `m1 + 2 m2`.
    pub fn kappa(&self) -> u32 {
        (self.m1 + 2 * self.m2) as u32
    }

    pub fn axis_weights(&self) -> Vec<u32> {
        (0..self.dim())
            .map(|j| if j < self.m1 { 1 } else { 2 })
            .collect()
    }

    pub fn user_k(&self) -> Option<&[u32]> {
        self.user_k.as_deref()
    }

    pub fn unit_bracket(&self, k: usize) -> (usize, usize) {
        self.unit_brackets[k]
    }

    /// `[e_i, e_j]` as a vector in `Z^m2`.
    pub fn bracket(&self, i: usize, j: usize) -> Vec<i64> {
        (0..self.m2)
            .map(|k| self.beta[i][j][k] - self.beta[j][i][k])
            .collect()
    }

    /// `beta(u, v)` for `u, v` in `Z^m1`.
    pub fn beta(&self, u: &[i64], v: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.m2];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            for (j, &vj) in v.iter().enumerate() {
                if vj == 0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += ui * vj * self.beta[i][j][k];
                }
            }
        }
        out
    }

    /// True when `m2 == 1` and the bracket pairing on `V_1` is nondegenerate.
    pub fn is_heisenberg(&self) -> bool {
        if self.m2 != 1 || !self.m1.is_multiple_of(2) {
            return false;
        }
        let rows: Vec<Vec<i64>> = (0..self.m1)
            .map(|i| (0..self.m1).map(|j| self.bracket(i, j)[0]).collect())
            .collect();
        integer_rank(&rows, self.m1) == self.m1
    }

    pub fn identity(&self) -> Point {
        Point::new(vec![0; self.dim()])
    }

    fn check(&self, p: &Point) -> Result<()> {
        if p.coords.len() != self.dim() {
            return Err(Error::GroupMismatch(
                format!("{} (dim {})", self.name, self.dim()),
                format!("point of length {}", p.coords.len()),
            ));
        }
        Ok(())
    }

    pub fn mul(&self, p: &Point, q: &Point) -> Result<Point> {
        self.check(p)?;
        self.check(q)?;
        let (x1, x2) = p.coords.split_at(self.m1);
        let (y1, y2) = q.coords.split_at(self.m1);
        let b = self.beta(x1, y1);
        let mut coords = Vec::with_capacity(self.dim());
        coords.extend(x1.iter().zip(y1).map(|(a, b)| a + b));
        coords.extend((0..self.m2).map(|k| x2[k] + y2[k] + b[k]));
        Ok(Point::new(coords))
    }

    /// `(x1, x2)^-1 = (-x1, -x2 + beta(x1, x1))`.
    pub fn inv(&self, p: &Point) -> Result<Point> {
        self.check(p)?;
        let (x1, x2) = p.coords.split_at(self.m1);
        let b = self.beta(x1, x1);
        let mut coords: Vec<i64> = x1.iter().map(|a| -a).collect();
        coords.extend((0..self.m2).map(|k| -x2[k] + b[k]));
        Ok(Point::new(coords))
    }

    /// Dyadic dilation `s_{2^i}`: weight-1 coordinates times `2^i`,
    /// weight-2 coordinates times `4^i`.
    pub fn scale(&self, i: u32, p: &Point) -> Result<Point> {
        self.check(p)?;
        let coords = p
            .coords
            .iter()
            .enumerate()
            .map(|(j, &c)| if j < self.m1 { c << i } else { c << (2 * i) })
            .collect();
        Ok(Point::new(coords))
    }

    /// `max(|x1|_inf, ceil(sqrt(|x2|_inf)))`, a homogeneous quasi-norm.
    pub fn quasi_norm(&self, p: &Point) -> Result<u64> {
        self.check(p)?;
        let (x1, x2) = p.coords.split_at(self.m1);
        let h = x1.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        let v = x2.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        Ok(h.max(ceil_sqrt(v)))
    }
}

pub(crate) fn ceil_sqrt(v: u64) -> u64 {
    let s = v.sqrt();
    if s * s == v {
        s
    } else {
        s + 1
    }
}

/// Rank over Q of a list of integer vectors of length `width`.
fn integer_rank(vectors: &[Vec<i64>], width: usize) -> usize {
    let mut rows: Vec<Vec<i128>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as i128).collect())
        .collect();
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank].clone();
        for r in (rank + 1)..rows.len() {
            let f = rows[r][col];
            if f == 0 {
                continue;
            }
            for c in 0..width {
                rows[r][c] = rows[r][c] * p[col] - p[c] * f;
            }
            let g = rows[r].iter().fold(0i128, |g, &x| num_integer::gcd(g, x));
            if g > 1 {
                rows[r].iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    rank
}
