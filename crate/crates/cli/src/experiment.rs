use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use carnot_fill::coarsen::{averaging_constant, offset_study};
use carnot_fill::families::{commutator_loop, random_cycle, sphere_cycle};
use carnot_fill::filling::{
    fit_exponent, multiscale_fill, running_slopes, ExponentFit, FillConfig, FillingReport,
};
use carnot_fill::grid::{Chain, CubicalGrid};
use carnot_fill::group::GroupSpec;
use carnot_fill::io::{chain_to_jsonl, multiscale_to_jsonl};
use carnot_fill::multiscale::MultiscaleChain;
use carnot_fill::oracle::{intersection_constant, minimal_filling_lp, OracleConfig, WindowComplex};
use carnot_fill::{Error, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Sphere,
    Commutator,
    Random,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Sphere => "sphere",
            Family::Commutator => "commutator",
            Family::Random => "random",
        }
    }
}

pub struct Context {
    pub group: GroupSpec,
    pub grid: CubicalGrid,
    pub family: Family,
    pub dim: usize,
    pub seed: u64,
    pub fill: FillConfig,
    pub oracle: Option<OracleConfig>,
    pub timing: bool,
}

impl Context {
    /// Dimension of the family's cycles.
    pub fn cycle_dim(&self) -> usize {
        match self.family {
            Family::Sphere => self.grid.dim() - 1,
            Family::Commutator => 1,
            Family::Random => self.dim,
        }
    }

    pub fn build(&self, r: u64) -> Result<Chain> {
        match self.family {
            Family::Sphere => sphere_cycle(&self.grid, r),
            Family::Commutator => commutator_loop(&self.group, &self.grid, r),
            Family::Random => random_cycle(
                &self.grid,
                self.dim,
                r as i64,
                self.seed.wrapping_add(r),
            ),
        }
    }

    pub fn fill(&self, alpha: &Chain) -> Result<(MultiscaleChain, FillingReport)> {
        let t = Instant::now();
        let (beta, mut report) = multiscale_fill(&self.grid, alpha, &self.fill)?;
        if self.timing {
            report.wall_time_ms = Some(t.elapsed().as_secs_f64() * 1e3);
        }
        Ok((beta, report))
    }
}

#[derive(Serialize)]
pub struct FillOutput<'a> {
    pub group: &'a str,
    pub family: &'a str,
    pub r: Option<u64>,
    pub d: usize,
    #[serde(rename = "V")]
    pub volume: u128,
    pub chain_file: String,
    pub report: &'a FillingReport,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::InvalidArgument(format!("{}: {e}", path.display()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesRow {
    pub group: String,
    pub family: String,
    pub r: u64,
    pub d: usize,
    #[serde(rename = "V")]
    pub volume: u128,
    pub mass: u128,
    #[serde(rename = "I")]
    pub scales: u32,
    pub slope_running: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub group: String,
    pub family: String,
    pub r: u64,
    pub d: usize,
    #[serde(rename = "V")]
    pub volume: u128,
    pub constructed: u128,
    pub oracle: Option<String>,
    pub ratio: Option<f64>,
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AvgRow {
    pub group: String,
    pub family: String,
    pub r: u64,
    pub d: usize,
    #[serde(rename = "V")]
    pub volume: u128,
    pub l1: u64,
    pub mean_l1: f64,
    pub best_l1: u64,
    pub c_avg: f64,
    pub c_cap: f64,
}

pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub const SERIES_HEADER: [&str; 8] = ["group", "family", "r", "d", "V", "mass", "I", "slope_running"];
pub const ORACLE_HEADER: [&str; 9] = [
    "group", "family", "r", "d", "V", "constructed", "oracle", "ratio", "status",
];
pub const AVG_HEADER: [&str; 10] = [
    "group", "family", "r", "d", "V", "l1", "mean_l1", "best_l1", "c_avg", "c_cap",
];

pub fn read_series(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = r.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("{}: no {name} column", path.display())))
    };
    let (v, m) = (col("V")?, col("mass")?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::Parse(format!("not a number: {:?}", &rec[i])))
        };
        out.push((num(v)?, num(m)?));
    }
    Ok(out)
}

/// One member of a sweep.
#[derive(Serialize)]
pub struct Member {
    pub r: u64,
    #[serde(rename = "V")]
    pub volume: u128,
    pub mass: u128,
    #[serde(rename = "I")]
    pub scales: u32,
    pub scales_used: u32,
    pub offsets: Vec<Vec<i64>>,
    pub verified: bool,
    pub chain_file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRow>,
}

#[derive(Serialize)]
pub struct SweepSummary {
    pub group: String,
    pub family: String,
    pub d: usize,
    pub seed: u64,
    pub predicted_exponent: Option<f64>,
    pub fit: ExponentFit,
    pub members: Vec<Member>,
}

struct MemberRun {
    alpha: Chain,
    beta: MultiscaleChain,
    report: FillingReport,
    oracle: Option<OracleRow>,
}

pub fn oracle_row(ctx: &Context, r: u64, alpha: &Chain, constructed: u128) -> OracleRow {
    let mut row = OracleRow {
        group: ctx.group.name().to_string(),
        family: ctx.family.name().to_string(),
        r,
        d: alpha.dim(),
        volume: ctx.grid.mass(alpha),
        constructed,
        oracle: None,
        ratio: None,
        status: String::new(),
    };
    let cfg = ctx.oracle.clone().unwrap_or_default();
    let result = WindowComplex::around(alpha, ctx.grid.dim(), 1)
        .and_then(|w| minimal_filling_lp(&ctx.grid, alpha, &w, &cfg));
    match result {
        Ok(lp) => {
            row.oracle = Some(lp.lower_bound.to_string());
            let lb = lp.lower_bound_f64();
            row.ratio = (lb > 0.0).then(|| constructed as f64 / lb);
            row.status = if lp.is_optimal() { "optimal" } else { "lower-bound" }.into();
        }
        Err(Error::WindowTooLarge { vars, cap }) => {
            eprintln!("warning: r = {r}: window needs {vars} LP variables (cap {cap}), skipped");
            row.status = format!("skipped: {vars} variables exceed cap {cap}");
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

/// Runs every size of the family, in parallel, and writes the series CSV,
/// per-member filling chains and a JSON summary under `out`.
pub fn sweep(ctx: &Context, sizes: &[u64], out: &Path) -> Result<SweepSummary> {
    let runs: Vec<Result<MemberRun>> = sizes
        .par_iter()
        .map(|&r| {
            let alpha = ctx.build(r)?;
            let (beta, report) = ctx.fill(&alpha)?;
            if !report.verified {
                return Err(Error::Internal(format!("r = {r}: filling failed verification")));
            }
            let oracle = ctx
                .oracle
                .is_some()
                .then(|| oracle_row(ctx, r, &alpha, report.total_mass));
            Ok(MemberRun {
                alpha,
                beta,
                report,
                oracle,
            })
        })
        .collect();
    let runs: Vec<MemberRun> = runs.into_iter().collect::<Result<_>>()?;

    let chains = out.join("chains");
    fs::create_dir_all(&chains).map_err(io_err(&chains))?;
    let series: Vec<(f64, f64)> = runs
        .iter()
        .map(|m| (m.report.plan.volume as f64, m.report.total_mass as f64))
        .collect();
    let slopes = running_slopes(&series);
    let fit = fit_exponent(&series)?;
    let family = ctx.family.name();
    let mut rows = Vec::new();
    let mut members = Vec::new();
    for ((m, &r), slope) in runs.into_iter().zip(sizes).zip(slopes) {
        let file = format!("chains/{family}_r{r}.jsonl");
        write_text(&out.join(&file), &multiscale_to_jsonl(&ctx.grid, &m.beta))?;
        rows.push(SeriesRow {
            group: ctx.group.name().to_string(),
            family: family.to_string(),
            r,
            d: m.alpha.dim(),
            volume: m.report.plan.volume,
            mass: m.report.total_mass,
            scales: m.report.plan.scales,
            slope_running: slope,
        });
        members.push(Member {
            r,
            volume: m.report.plan.volume,
            mass: m.report.total_mass,
            scales: m.report.plan.scales,
            scales_used: m.report.scales_used,
            offsets: m.report.steps.iter().map(|s| s.offset.clone()).collect(),
            verified: m.report.verified,
            chain_file: file,
            wall_time_ms: m.report.wall_time_ms,
            oracle: m.oracle,
        });
    }
    write_csv(&out.join("series.csv"), &SERIES_HEADER, &rows)?;
    let pe = ctx
        .grid
        .weights()
        .filling_exponent(ctx.cycle_dim())
        .map(|e| *e.numer() as f64 / *e.denom() as f64);
    let summary = SweepSummary {
        group: ctx.group.name().to_string(),
        family: family.to_string(),
        d: ctx.cycle_dim(),
        seed: ctx.seed,
        predicted_exponent: pe,
        fit,
        members,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

pub fn avg_row(ctx: &Context, r: u64, label: &str, alpha: &Chain) -> Result<AvgRow> {
    let study = offset_study(&ctx.grid, alpha);
    let mean = *study.mean.numer() as f64 / *study.mean.denom() as f64;
    Ok(AvgRow {
        group: ctx.group.name().to_string(),
        family: label.to_string(),
        r,
        d: alpha.dim(),
        volume: ctx.grid.mass(alpha),
        l1: alpha.l1(),
        mean_l1: mean,
        best_l1: study.min,
        c_avg: averaging_constant(ctx.grid.weights(), alpha, study.mean).unwrap_or(0.0),
        c_cap: intersection_constant(&ctx.grid, alpha)?.unwrap_or(0.0),
    })
}

pub fn avg(ctx: &Context, sizes: &[u64], out: &Path) -> Result<Vec<AvgRow>> {
    let rows: Vec<Result<AvgRow>> = sizes
        .par_iter()
        .map(|&r| avg_row(ctx, r, ctx.family.name(), &ctx.build(r)?))
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    write_csv(&out.join("avg.csv"), &AVG_HEADER, &rows)?;
    Ok(rows)
}

pub fn oracle(ctx: &Context, sizes: &[u64], out: &Path) -> Result<Vec<OracleRow>> {
    let rows: Vec<Result<OracleRow>> = sizes
        .par_iter()
        .map(|&r| {
            let alpha = ctx.build(r)?;
            let (_, report) = ctx.fill(&alpha)?;
            Ok(oracle_row(ctx, r, &alpha, report.total_mass))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    write_csv(&out.join("oracle.csv"), &ORACLE_HEADER, &rows)?;
    Ok(rows)
}

/// Writes the input cycle, the filling chain and the report for one run.
pub fn fill_one(
    ctx: &Context,
    label: &str,
    r: Option<u64>,
    alpha: &Chain,
    out: &Path,
) -> Result<FillingReport> {
    let (beta, report) = ctx.fill(alpha)?;
    let stem = r.map_or_else(|| "input".to_string(), |r| format!("{label}_r{r}"));
    let chain_file: PathBuf = format!("{stem}.filling.jsonl").into();
    write_text(&out.join(format!("{stem}.cycle.jsonl")), &chain_to_jsonl(&ctx.grid, alpha))?;
    write_text(&out.join(&chain_file), &multiscale_to_jsonl(&ctx.grid, &beta))?;
    write_json(
        &out.join(format!("{stem}.report.json")),
        &FillOutput {
            group: ctx.group.name(),
            family: label,
            r,
            d: alpha.dim(),
            volume: ctx.grid.mass(alpha),
            chain_file: chain_file.display().to_string(),
            report: &report,
        },
    )?;
    Ok(report)
}
