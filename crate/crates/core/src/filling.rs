//! Multiscale filling: coarsen until the cycle vanishes, collecting the
//! bridges between consecutive scales.

use num_bigint::BigUint;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::coarsen::{best_offset, offset_study, Offset};
use crate::error::{Error, Result};
use crate::grid::{Chain, CubicalGrid};
use crate::homotopy::chain_homotopy_q;
use crate::multiscale::MultiscaleChain;
use crate::weights::WeightTable;

/// Scale count and predicted exponent for filling a `d`-cycle of mass `V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingPlan {
    pub d: usize,
    pub volume: u128,
    pub scales: u32,
    pub predicted_exponent: Ratio<u32>,
    pub c_plan: Ratio<u64>,
    pub weights: WeightTable,
}

/// `I` = smallest positive integer with `c_plan V 2^{I k(n-d)} < 2^{kappa I}`.
pub fn plan(volume: u128, d: usize, wt: &WeightTable, c_plan: Ratio<u64>) -> Result<FillingPlan> {
    let n = wt.dim();
    if d >= n {
        return Err(Error::PlanRejected(format!("cycle dimension {d} >= {n}")));
    }
    let dual = wt.k(n - d);
    let top = wt.k(d + 1);
    if dual >= wt.kappa || top + dual <= wt.kappa {
        return Err(Error::PlanRejected(format!(
            "need k(d+1) + k(n-d) > kappa and k(n-d) < kappa; have k({}) = {top}, k({}) = {dual}, kappa = {}",
            d + 1,
            n - d,
            wt.kappa
        )));
    }
    if *c_plan.numer() == 0 {
        return Err(Error::PlanRejected("c_plan must be positive".into()));
    }
    let gap = wt.kappa - dual;
    let lhs = BigUint::from(*c_plan.numer()) * BigUint::from(volume);
    let den = BigUint::from(*c_plan.denom());
    let mut scales = 1u32;
    while lhs >= &den << (gap * scales) as usize {
        scales += 1;
    }
    Ok(FillingPlan {
        d,
        volume,
        scales,
        predicted_exponent: Ratio::new(top, gap),
        c_plan,
        weights: wt.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetPolicy {
    /// Minimize `l1` of the coarsened cycle at every step.
    Best,
    /// Use the zero offset at every step.
    Fixed,
    /// As `Best`, additionally recording the exhaustive offset mean.
    AverageStudy,
}

impl std::str::FromStr for OffsetPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "best" => Ok(OffsetPolicy::Best),
            "fixed" => Ok(OffsetPolicy::Fixed),
            "average-study" => Ok(OffsetPolicy::AverageStudy),
            _ => Err(Error::InvalidArgument(format!(
                "unknown offset policy {s:?} (best | fixed | average-study)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillConfig {
    pub c_plan: Ratio<u64>,
    pub policy: OffsetPolicy,
    /// Extra scales allowed beyond the plan before giving up.
    pub extension_cap: u32,
}

impl Default for FillConfig {
    fn default() -> Self {
        FillConfig {
            c_plan: Ratio::from_integer(1),
            policy: OffsetPolicy::Best,
            extension_cap: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub scale: u32,
    pub offset: Vec<i64>,
    pub l1_in: u64,
    pub l1_out: u64,
    /// Native-scale mass of the bridge.
    pub mass: u128,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_l1_out: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillingReport {
    pub plan: FillingPlan,
    pub steps: Vec<StepRecord>,
    /// Scale of the final coarse cycle and its `l1` (zero on success).
    pub residual_scale: u32,
    pub residual_l1: u64,
    pub scales_used: u32,
    pub total_mass: u128,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<f64>,
}

impl FillingReport {
    /// Scales used beyond the plan.
    pub fn extension(&self) -> u32 {
        self.scales_used.saturating_sub(self.plan.scales)
    }
}

/// Fills a cycle `alpha` at scale 0 by a multiscale chain `beta` with
/// `d beta = alpha`, where `beta = -sum_i H_i` over the coarsening steps.
pub fn multiscale_fill(
    grid: &CubicalGrid,
    alpha: &Chain,
    config: &FillConfig,
) -> Result<(MultiscaleChain, FillingReport)> {
    if alpha.scale() != 0 {
        return Err(Error::ScaleMismatch(format!(
            "fillings start at scale 0, got {}",
            alpha.scale()
        )));
    }
    if !grid.is_cycle(alpha) {
        return Err(Error::NotACycle);
    }
    let d = alpha.dim();
    let volume = grid.mass(alpha);
    let plan = plan(volume, d, grid.weights(), config.c_plan)?;
    let cap = plan.scales + config.extension_cap;
    let mut beta = MultiscaleChain::new(d + 1);
    let mut steps = Vec::new();
    let mut current = alpha.clone();
    let mut scale = 0u32;
    while !current.is_zero() {
        if scale >= cap {
            return Err(Error::ResidualNonzero {
                scale,
                l1: current.l1(),
            });
        }
        let (offset, mean) = match config.policy {
            OffsetPolicy::Fixed => (Offset::zero(), None),
            OffsetPolicy::Best => (best_offset(grid, &current)?.0, None),
            OffsetPolicy::AverageStudy => {
                let s = offset_study(grid, &current);
                (s.best, Some(*s.mean.numer() as f64 / *s.mean.denom() as f64))
            }
        };
        let step = chain_homotopy_q(grid, &current, offset)?;
        steps.push(StepRecord {
            scale,
            offset: offset.as_slice(grid.dim()).to_vec(),
            l1_in: current.l1(),
            l1_out: step.alpha_next.l1(),
            mass: step.mass,
            mean_l1_out: mean,
        });
        beta.push(grid, step.bridge.neg())?;
        current = step.alpha_next;
        scale += 1;
    }
    let verified = verify_filling(grid, &beta, alpha);
    let report = FillingReport {
        plan,
        total_mass: steps.iter().map(|s| s.mass).sum(),
        steps,
        residual_scale: scale,
        residual_l1: 0,
        scales_used: scale,
        verified,
        wall_time_ms: None,
    };
    Ok((beta, report))
}

/// `d(flatten(beta)) == alpha`, exactly.
pub fn verify_filling(grid: &CubicalGrid, beta: &MultiscaleChain, alpha: &Chain) -> bool {
    if beta.dim() != alpha.dim() + 1 {
        return false;
    }
    let Ok(fine) = grid.subdivide_to(alpha, 0) else {
        return false;
    };
    match beta.flat_boundary(grid) {
        Ok(b) => b == fine,
        Err(_) => false,
    }
}

/// Least-squares line through `(log V, log mass)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

pub fn fit_exponent(series: &[(f64, f64)]) -> Result<ExponentFit> {
    if series.len() < 3 {
        return Err(Error::TooFewPoints(series.len()));
    }
    if series.iter().any(|&(v, m)| !(v > 0.0 && m > 0.0)) {
        return Err(Error::InvalidArgument(
            "exponent fits need positive values".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(v, m)| (v.ln(), m.ln())).collect();
    let (slope, intercept) = ols(&pts)?;
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let ssr: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let stderr = (ssr / (k - 2.0) / sxx).sqrt();
    Ok(ExponentFit {
        slope,
        intercept,
        stderr,
    })
}

/// Slope of the log-log series over its first `2..=len` points.
pub fn running_slopes(series: &[(f64, f64)]) -> Vec<Option<f64>> {
    (1..=series.len())
        .map(|k| {
            if k < 2 {
                return None;
            }
            let pts: Vec<(f64, f64)> = series[..k].iter().map(|&(v, m)| (v.ln(), m.ln())).collect();
            ols(&pts).ok().map(|f| f.0)
        })
        .collect()
}

fn ols(pts: &[(f64, f64)]) -> Result<(f64, f64)> {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all V values are equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
