use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupSpec;

/// Per-axis dilation weights, the mass exponents `k(d)` and `kappa`.
///
/// A `d`-cell at scale `i` carries mass `2^(i * k(d))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightTable {
    pub axis_weights: Vec<u32>,
    /// `k[d]` for `0 <= d <= n`; `k[0] = 0`.
    pub k: Vec<u32>,
    pub kappa: u32,
}

impl WeightTable {
    /// Heisenberg groups get `k(d) = d` for `d <= n` and `d + 1` above.
    /// Other groups use the user table if present, otherwise `k(1) = 1`,
    /// `k(n-1) = kappa - 1`, `k(n) = kappa` and the sum of the `d` largest
    /// axis weights in between.
    pub fn for_group(group: &GroupSpec) -> Result<Self> {
        let axis_weights = group.axis_weights();
        let n = group.dim();
        let kappa = group.kappa();
        let k = if let Some(user) = group.user_k() {
            if user.len() != n {
                return Err(Error::InvalidWeights(format!(
                    "expected {n} entries k(1..={n}), got {}",
                    user.len()
                )));
            }
            std::iter::once(0).chain(user.iter().copied()).collect()
        } else if group.is_heisenberg() {
            let half = group.m1() / 2;
            (0..=n as u32)
                .map(|d| if d as usize <= half { d } else { d + 1 })
                .collect()
        } else {
            let mut sorted = axis_weights.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            let mut k: Vec<u32> = (0..=n)
                .map(|d| sorted[..d].iter().sum::<u32>())
                .collect();
            k[1] = 1;
            k[n - 1] = kappa - 1;
            k[n] = kappa;
            k
        };
        let table = WeightTable {
            axis_weights,
            k,
            kappa,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.axis_weights.len();
        if self.k.len() != n + 1 || self.k[0] != 0 {
            return Err(Error::InvalidWeights("k must have n + 1 entries with k(0) = 0".into()));
        }
        if self.axis_weights.iter().sum::<u32>() != self.kappa {
            return Err(Error::InvalidWeights("kappa must equal the sum of axis weights".into()));
        }
        if self.k[n] != self.kappa {
            return Err(Error::InvalidWeights(format!(
                "k(n) = {} but kappa = {}",
                self.k[n], self.kappa
            )));
        }
        for d in 1..=n {
            if self.k[d] < self.k[d - 1] {
                return Err(Error::InvalidWeights("k must be nondecreasing".into()));
            }
            if self.k[d] < d as u32 {
                return Err(Error::InvalidWeights(format!("k({d}) < {d}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.axis_weights.len()
    }

    pub fn k(&self, d: usize) -> u32 {
        self.k[d]
    }

    /// Mass of one `d`-cell at `scale`.
    pub fn cell_mass(&self, d: usize, scale: u32) -> u128 {
        1u128 << (scale * self.k[d])
    }

    /// `mass(subdivide(sigma)) / mass(sigma)` for a single cell spanning
    /// `axes`: `2^(sum of spanned weights - k(d))`.
    pub fn subdivision_mass_ratio(&self, axes: &[usize]) -> Ratio<u64> {
        let spanned: u32 = axes.iter().map(|&j| self.axis_weights[j]).sum();
        let k = self.k[axes.len()];
        if spanned >= k {
            Ratio::from_integer(1u64 << (spanned - k))
        } else {
            Ratio::new(1, 1u64 << (k - spanned))
        }
    }

    /// Largest subdivision mass ratio over all `d`-dimensional axis sets.
    pub fn c_sub(&self, d: usize) -> Ratio<u64> {
        let n = self.dim();
        (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == d)
            .map(|m| {
                let axes: Vec<usize> = (0..n).filter(|j| m >> j & 1 == 1).collect();
                self.subdivision_mass_ratio(&axes)
            })
            .max()
            .unwrap_or_else(|| Ratio::from_integer(1))
    }

    /// The Prop.-style exponent `k(d+1) / (kappa - k(n-d))`, if the
    /// hypotheses `k(d+1) + k(n-d) > kappa` and `k(n-d) < kappa` hold.
    pub fn filling_exponent(&self, d: usize) -> Option<Ratio<u32>> {
        let n = self.dim();
        if d == 0 || d >= n {
            return None;
        }
        let top = self.k[d + 1];
        let dual = self.k[n - d];
        if top + dual > self.kappa && dual < self.kappa {
            Some(Ratio::new(top, self.kappa - dual))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_tables() {
        let h3 = WeightTable::for_group(&GroupSpec::preset("H3").unwrap()).unwrap();
        assert_eq!(h3.k, vec![0, 1, 3, 4]);
        assert_eq!(h3.kappa, 4);
        let h5 = WeightTable::for_group(&GroupSpec::preset("H5").unwrap()).unwrap();
        assert_eq!(h5.k, vec![0, 1, 2, 4, 5, 6]);
        assert_eq!(h5.kappa, 6);
        let h7 = WeightTable::for_group(&GroupSpec::preset("H7").unwrap()).unwrap();
        assert_eq!(h7.k, vec![0, 1, 2, 3, 5, 6, 7, 8]);
    }

    #[test]
    fn subdivision_ratio_table_h3() {
        let t = WeightTable::for_group(&GroupSpec::preset("H3").unwrap()).unwrap();
        let r = |a: &[usize]| t.subdivision_mass_ratio(a);
        assert_eq!(r(&[0]), Ratio::from_integer(1));
        assert_eq!(r(&[1]), Ratio::from_integer(1));
        assert_eq!(r(&[2]), Ratio::from_integer(2));
        assert_eq!(r(&[0, 1]), Ratio::new(1, 2));
        assert_eq!(r(&[0, 2]), Ratio::from_integer(1));
        assert_eq!(r(&[1, 2]), Ratio::from_integer(1));
        assert_eq!(r(&[0, 1, 2]), Ratio::from_integer(1));
        assert_eq!(t.c_sub(1), Ratio::from_integer(2));
    }

    #[test]
    fn exponents() {
        let h3 = WeightTable::for_group(&GroupSpec::preset("H3").unwrap()).unwrap();
        assert_eq!(h3.filling_exponent(2), Some(Ratio::new(4, 3)));
        assert_eq!(h3.filling_exponent(1), Some(Ratio::new(3, 1)));
        let h5 = WeightTable::for_group(&GroupSpec::preset("H5").unwrap()).unwrap();
        // d > n: (d + 2) / (d + 1)
        assert_eq!(h5.filling_exponent(3), Some(Ratio::new(5, 4)));
        assert_eq!(h5.filling_exponent(4), Some(Ratio::new(6, 5)));
    }

    #[test]
    fn user_table_is_validated() {
        use crate::group::{BetaEntry, GroupSpecFile};
        let bad = GroupSpecFile {
            name: "H3bad".into(),
            m1: 2,
            m2: 1,
            beta: vec![BetaEntry(0, 1, 0, 1)],
            k: Some(vec![1, 3, 5]),
        };
        assert!(matches!(
            GroupSpec::from_file(bad),
            Err(Error::InvalidWeights(_))
        ));
    }
}
